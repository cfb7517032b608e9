//! Kato-Temple bounds and their randomized extension.
//!
//! The classical two-sided bound localizes an isolated eigenvalue around a
//! Rayleigh quotient eta with residual eps relative to a spectral window
//! (alpha, beta). The randomized version bounds, index by index, how far
//! the d eigenvalues (or singular values) of a noisy matrix inside a
//! window can drift from their reference counterparts: for pair k and
//! l = d - k + 1,
//!
//! ```text
//! lambda_k(noisy) >= lambda_k(ref) - t - zeta_minus
//! lambda_k(noisy) <= lambda_k(ref) + t + zeta_plus
//! ```
//!
//! where the correction terms depend on the noise spectral norm, the
//! window margins, and the deviation scale t, and each inequality carries
//! an explicit probability floor driven by the bilinear tail profile of
//! the noise. When the window is unbounded above the lower deficit
//! collapses to (l(l-1)+1) t with no norm dependence.

use serde::Serialize;

use crate::concentration::{ConcentrationProfile, SpectralNormTail};
use crate::error::{Error, Result};
use crate::spectral::{Spectrum, SpectralWindow};

/// The reference eigenvalues (or singular values) inside a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalSpectrum {
    values: Vec<f64>,
    window: SpectralWindow,
}

impl LocalSpectrum {
    pub fn new(values: Vec<f64>, window: SpectralWindow) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidLocalSpectrum("no values in window".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidLocalSpectrum("values not ascending".into()));
        }
        if let Some(&v) = values.iter().find(|&&v| !window.contains(v)) {
            return Err(Error::InvalidLocalSpectrum(format!(
                "value {v} not strictly inside ({}, {})",
                window.alpha(),
                window.beta()
            )));
        }
        Ok(Self { values, window })
    }

    /// Restricts a full spectrum to the window.
    pub fn from_spectrum(spectrum: &Spectrum, window: SpectralWindow) -> Result<Self> {
        let content = crate::spectral::locate_in_window(spectrum, &window);
        Self::new(content.values, window)
    }

    pub fn d(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// 1-based access matching the pair index convention.
    pub fn value(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn smallest(&self) -> f64 {
        self.values[0]
    }

    pub fn largest(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn window(&self) -> &SpectralWindow {
        &self.window
    }
}

/// Where a noise spectral-norm figure came from. The same bound formulas
/// serve a realized norm, an analytic tail threshold, or the asymptotic
/// degree plug-in; keeping the source explicit lets downstream assembly
/// check it is combining compatible pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormSource {
    /// Computed from a realized noise matrix.
    Empirical,
    /// An analytic high-probability threshold (epsilon-net tail).
    Analytic,
    /// The asymptotic 2 sqrt(max expected degree) comparator.
    PlugIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseNormEstimate {
    pub value: f64,
    pub source: NormSource,
}

impl NoiseNormEstimate {
    pub fn new(value: f64, source: NormSource) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise norm must be nonnegative, got {value}"
            )));
        }
        Ok(Self { value, source })
    }

    pub fn empirical(value: f64) -> Result<Self> {
        Self::new(value, NormSource::Empirical)
    }

    pub fn analytic(value: f64) -> Result<Self> {
        Self::new(value, NormSource::Analytic)
    }

    pub fn plug_in(value: f64) -> Result<Self> {
        Self::new(value, NormSource::PlugIn)
    }
}

/// Baseline uniform deviation: every pair moves by at most the noise norm.
/// All window-based bounds are compared against this.
pub fn weyl_bound(noise: &NoiseNormEstimate) -> f64 {
    noise.value
}

/// NaN-safe strict comparison: true exactly when a < b.
fn strictly_below(a: f64, b: f64) -> bool {
    matches!(a.partial_cmp(&b), Some(std::cmp::Ordering::Less))
}

/// Lower spectral localization: for alpha < eta (alpha = -inf permitted),
/// the interval (alpha, eta + eps^2 / (eta - alpha)] meets the spectrum.
/// Returns the right endpoint.
pub fn kato_lower_point(eta: f64, residual_eps: f64, alpha: f64) -> Result<f64> {
    if alpha == f64::NEG_INFINITY {
        return Ok(eta);
    }
    if !strictly_below(alpha, eta) {
        return Err(Error::ThresholdOrdering(format!(
            "require alpha < eta, got alpha = {alpha}, eta = {eta}"
        )));
    }
    Ok(eta + residual_eps * residual_eps / (eta - alpha))
}

/// Upper spectral localization: for beta > eta (beta = +inf permitted),
/// the interval [eta - eps^2 / (beta - eta), beta) meets the spectrum.
/// Returns the left endpoint.
pub fn kato_upper_point(eta: f64, residual_eps: f64, beta: f64) -> Result<f64> {
    if beta == f64::INFINITY {
        return Ok(eta);
    }
    if !strictly_below(eta, beta) {
        return Err(Error::ThresholdOrdering(format!(
            "require beta > eta, got beta = {beta}, eta = {eta}"
        )));
    }
    Ok(eta - residual_eps * residual_eps / (beta - eta))
}

/// Two-sided bracket [eta - eps^2/(beta - eta), eta + eps^2/(eta - alpha)]
/// under the hypothesis eps^2 < (beta - eta)(eta - alpha). The bracket
/// contains the eigenvalue only if it is the sole spectrum point in the
/// window; that isolation is the caller's responsibility.
pub fn kato_temple_bracket(
    eta: f64,
    residual_eps: f64,
    window: &SpectralWindow,
) -> Result<(f64, f64)> {
    let (alpha, beta) = (window.alpha(), window.beta());
    if !(alpha < eta && eta < beta) {
        return Err(Error::ThresholdOrdering(format!(
            "require alpha < eta < beta, got alpha = {alpha}, eta = {eta}, beta = {beta}"
        )));
    }
    let eps_sq = residual_eps * residual_eps;
    let limit = (beta - eta) * (eta - alpha);
    if !strictly_below(eps_sq, limit) {
        return Err(Error::ResidualTooLarge { eps_sq, limit });
    }
    let lo = kato_upper_point(eta, residual_eps, beta)?;
    let hi = kato_lower_point(eta, residual_eps, alpha)?;
    Ok((lo, hi))
}

/// x single events plus the x-choose-2 cross events of a union bound.
fn union_event_count(x: usize) -> f64 {
    debug_assert!(x <= 64);
    (x + x * (x - 1) / 2) as f64
}

/// Probability floor 1 - (x + x(x-1)/2) 2 exp(-t^2) for a union over x
/// indices of bilinear events with the Bernoulli-adjacency tail, clamped
/// to [0, 1].
pub fn bilinear_event_floor(events: usize, t: f64) -> f64 {
    (1.0 - union_event_count(events) * 2.0 * (-t * t).exp()).clamp(0.0, 1.0)
}

fn check_index(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::IndexOutOfRange { k, d });
    }
    Ok(())
}

fn check_scale(t: f64) -> Result<()> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::NonPositiveScale { t });
    }
    Ok(())
}

/// Upper-excess correction for pair k:
///
/// ```text
/// zeta_plus = (k ||E||^2 + (3 lambda_k - alpha + 3t) k(k-1) t)
///             / (lambda_1 - alpha - (k(k-1)+1) t)
/// ```
///
/// Inadmissible t (nonpositive denominator) is rejected with the maximal
/// admissible scale so callers can grid-search safely.
pub fn zeta_plus(
    k: usize,
    local: &LocalSpectrum,
    t: f64,
    noise: &NoiseNormEstimate,
) -> Result<f64> {
    check_index(k, local.d())?;
    check_scale(t)?;
    let alpha = local.window().alpha();
    let lambda_k = local.value(k);
    let lambda_1 = local.smallest();
    let kk = (k * (k - 1)) as f64;
    let denominator = lambda_1 - alpha - (kk + 1.0) * t;
    if denominator <= 0.0 {
        return Err(Error::InadmissibleScale {
            k,
            t,
            max_admissible: (lambda_1 - alpha) / (kk + 1.0),
        });
    }
    let norm_sq = noise.value * noise.value;
    Ok((k as f64 * norm_sq + (3.0 * lambda_k - alpha + 3.0 * t) * kk * t) / denominator)
}

/// Lower-deficit correction for pair k, with l = d - k + 1:
///
/// ```text
/// zeta_minus = (l ||E||^2 + ((beta - lambda_k) + (lambda_d - lambda_k) + 3t) l(l-1) t)
///              / (beta - lambda_d - (l(l-1)+1) t)
/// ```
///
/// Requires a finite beta; windows unbounded above take the
/// [`infinite_beta_lower_deficit`] route instead.
pub fn zeta_minus(
    k: usize,
    local: &LocalSpectrum,
    t: f64,
    noise: &NoiseNormEstimate,
) -> Result<f64> {
    check_index(k, local.d())?;
    check_scale(t)?;
    if local.window().is_unbounded() {
        return Err(Error::UnboundedWindow);
    }
    let beta = local.window().beta();
    let d = local.d();
    let l = d - k + 1;
    let lambda_k = local.value(k);
    let lambda_d = local.largest();
    let ll = (l * (l - 1)) as f64;
    let denominator = beta - lambda_d - (ll + 1.0) * t;
    if denominator <= 0.0 {
        return Err(Error::InadmissibleScale {
            k,
            t,
            max_admissible: (beta - lambda_d) / (ll + 1.0),
        });
    }
    let norm_sq = noise.value * noise.value;
    Ok((l as f64 * norm_sq + ((beta - lambda_k) + (lambda_d - lambda_k) + 3.0 * t) * ll * t)
        / denominator)
}

/// Total lower deficit (l(l-1)+1) t for a window unbounded above, with
/// l = d - k + 1. This is the whole deficit: it already includes the
/// separate "- t" of the finite-beta form.
pub fn infinite_beta_lower_deficit(k: usize, d: usize, t: f64) -> f64 {
    let l = d - k + 1;
    ((l * (l - 1) + 1) as f64) * t
}

/// A per-pair deviation bound with probability floors, echoing its inputs
/// so serialized documents are self-describing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationBound {
    pub k: usize,
    pub d: usize,
    pub t: f64,
    pub window: SpectralWindow,
    pub reference_value: f64,
    pub noise: NoiseNormEstimate,
    pub zeta_plus: f64,
    pub zeta_minus: f64,
    pub lower: f64,
    pub upper: f64,
    pub prob_lower: f64,
    pub prob_upper: f64,
    pub prob_joint: f64,
    /// True when some probability floor clamped to zero: the bound still
    /// holds vacuously but carries no content at this scale.
    pub vacuous: bool,
}

impl DeviationBound {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bound serialization")
    }
}

fn assemble_bound(
    k: usize,
    local: &LocalSpectrum,
    t: f64,
    noise: &NoiseNormEstimate,
    tail_at_t: f64,
) -> Result<DeviationBound> {
    check_index(k, local.d())?;
    check_scale(t)?;
    let d = local.d();
    let l = d - k + 1;
    let lambda_k = local.value(k);

    let zp = zeta_plus(k, local, t, noise)?;
    let zm = if local.window().is_unbounded() {
        // total deficit (l(l-1)+1) t, recorded so that lower = lambda_k - t - zm
        infinite_beta_lower_deficit(k, d, t) - t
    } else {
        zeta_minus(k, local, t, noise)?
    };

    let floor = |events: usize| (1.0 - union_event_count(events) * tail_at_t).clamp(0.0, 1.0);
    let prob_lower = floor(l);
    let prob_upper = floor(k);
    let prob_joint = floor(d);

    Ok(DeviationBound {
        k,
        d,
        t,
        window: *local.window(),
        reference_value: lambda_k,
        noise: *noise,
        zeta_plus: zp,
        zeta_minus: zm,
        lower: lambda_k - t - zm,
        upper: lambda_k + t + zp,
        prob_lower,
        prob_upper,
        prob_joint,
        vacuous: prob_lower == 0.0 || prob_upper == 0.0 || prob_joint == 0.0,
    })
}

/// Deviation bound for eigenvalue pair k under centered Bernoulli
/// adjacency noise: probability floors use the bilinear tail 2 exp(-t^2).
pub fn deviation_bound(
    k: usize,
    local: &LocalSpectrum,
    t: f64,
    noise: &NoiseNormEstimate,
) -> Result<DeviationBound> {
    check_scale(t)?;
    let tail = 2.0 * (-t * t).exp();
    assemble_bound(k, local, t, noise, tail)
}

/// Deviation bound for singular-value pair k under (C, c, gamma)
/// concentrated noise. The correction terms are unchanged; the floors use
/// the dilated profile (2C, c / 2^gamma, gamma), which is what the
/// Hermitian dilation of the noise satisfies.
pub fn sv_deviation_bound(
    k: usize,
    local: &LocalSpectrum,
    t: f64,
    noise: &NoiseNormEstimate,
    profile: &ConcentrationProfile,
) -> Result<DeviationBound> {
    check_scale(t)?;
    let dilated = profile.dilate();
    let tail = dilated.prefactor() * (-dilated.rate() * t.powf(dilated.exponent())).exp();
    assemble_bound(k, local, t, noise, tail)
}

/// Removes the conditioning on the noise-norm event: the bound values are
/// unchanged and every probability floor is reduced by the norm-tail
/// probability. The conditional bound must have been built with the
/// analytic norm equal to the tail's threshold.
pub fn unconditional_bound(
    conditional: &DeviationBound,
    norm_tail: &SpectralNormTail,
) -> Result<DeviationBound> {
    let matches_threshold = (conditional.noise.value - norm_tail.threshold).abs()
        <= 1e-9 * norm_tail.threshold.abs().max(1.0);
    if conditional.noise.source != NormSource::Analytic || !matches_threshold {
        return Err(Error::NormSourceMismatch);
    }
    let adjust = |p: f64| (p - norm_tail.probability).clamp(0.0, 1.0);
    let prob_lower = adjust(conditional.prob_lower);
    let prob_upper = adjust(conditional.prob_upper);
    let prob_joint = adjust(conditional.prob_joint);
    Ok(DeviationBound {
        prob_lower,
        prob_upper,
        prob_joint,
        vacuous: prob_lower == 0.0 || prob_upper == 0.0 || prob_joint == 0.0,
        ..conditional.clone()
    })
}

/// Margin added on each side of a level window beyond the noise norm; the
/// separation precondition is stated in terms of this margin.
pub const LEVEL_WINDOW_MARGIN: f64 = 1.0;

/// Selects a spectral window around one repeated level of a reference
/// spectrum using the uniform (Weyl) deviation as a preliminary device:
/// every perturbed value of the targeted level lands strictly inside the
/// window and every other level's perturbed values stay outside, provided
/// the noise norm does not exceed the estimate.
///
/// `levels` are the distinct reference values, ascending (see
/// [`Spectrum::levels`]); `target` indexes the level to localize. The gap
/// to each adjacent level must exceed 2 * noise + margin. For the top
/// level the window is unbounded above.
pub fn weyl_window_selection(
    levels: &[f64],
    target: usize,
    noise: &NoiseNormEstimate,
) -> Result<SpectralWindow> {
    if levels.is_empty() || target >= levels.len() {
        return Err(Error::IndexOutOfRange {
            k: target,
            d: levels.len(),
        });
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "levels must be strictly ascending".into(),
        ));
    }
    let e = noise.value;
    let required = 2.0 * e + LEVEL_WINDOW_MARGIN;
    let level = levels[target];

    let below = if target == 0 { 0.0 } else { levels[target - 1] };
    let gap_below = level - below;
    if gap_below <= required {
        return Err(Error::InsufficientSeparation {
            gap: gap_below,
            required,
        });
    }
    let alpha = below + e + LEVEL_WINDOW_MARGIN;

    let beta = if target + 1 == levels.len() {
        f64::INFINITY
    } else {
        let above = levels[target + 1];
        let gap_above = above - level;
        if gap_above <= required {
            return Err(Error::InsufficientSeparation {
                gap: gap_above,
                required,
            });
        }
        above - e - LEVEL_WINDOW_MARGIN
    };
    SpectralWindow::new(alpha, beta)
}
