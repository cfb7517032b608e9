//! Balanced three-block hypothesis test.
//!
//! The null model connects within blocks with probability p and across
//! blocks with probability q; the alternative adds epsilon to one
//! off-diagonal block pair. The test statistic is the smallest signal
//! eigenvalue. For each method we build confidence intervals that hold
//! with a target probability under both hypotheses and report the
//! smallest epsilon at which the two intervals separate.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::concentration::{self, ConcentrationProfile};
use crate::error::{Error, Result};
use crate::kato_temple::{
    bilinear_event_floor, deviation_bound, unconditional_bound, LocalSpectrum, NoiseNormEstimate,
};
use crate::models::BlockModel;
use crate::spectral::SpectralWindow;

/// Balanced three-block model parameters with a one-entry perturbation of
/// size `signal_eps` defining the alternative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeBlockSpec {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub signal_eps: f64,
}

impl ThreeBlockSpec {
    pub fn new(n: usize, p: f64, q: f64, signal_eps: f64) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(3) {
            return Err(Error::InvalidParameter(format!(
                "vertex count must be a positive multiple of 3, got {n}"
            )));
        }
        if !(0.0 < q && q < p && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "require 0 < q < p < 1, got p = {p}, q = {q}"
            )));
        }
        if !(0.0 <= signal_eps && signal_eps < p - q) {
            return Err(Error::InvalidParameter(format!(
                "signal epsilon must lie in [0, p - q), got {signal_eps}"
            )));
        }
        Ok(Self { n, p, q, signal_eps })
    }

    /// The block edge-probability model under either hypothesis.
    pub fn block_model(&self, alternative: bool) -> BlockModel {
        let (p, q) = (self.p, self.q);
        let e = if alternative { self.signal_eps } else { 0.0 };
        let b = DMatrix::from_row_slice(3, 3, &[p, q + e, q, q + e, p, q, q, q, p]);
        BlockModel::new(b, vec![self.n / 3; 3]).expect("validated parameters")
    }

    /// Maximum expected degree under either hypothesis.
    pub fn max_expected_degree(&self, alternative: bool) -> f64 {
        let e = if alternative { self.signal_eps } else { 0.0 };
        (self.n as f64 / 3.0) * (self.p + 2.0 * self.q + e)
    }
}

/// Closed-form signal eigenvalues, ascending.
///
/// Null: ((n/3)(p - q), (n/3)(p - q), (n/3)(p + 2q)). Alternative:
/// (n/3)(p - q - eps) and (n/6)(2p + q + eps -/+ sqrt(9 q^2 + 2 q eps + eps^2)).
pub fn three_block_signal_eigenvalues(spec: &ThreeBlockSpec, alternative: bool) -> (f64, f64, f64) {
    let n = spec.n as f64;
    let (p, q) = (spec.p, spec.q);
    if !alternative || spec.signal_eps == 0.0 {
        let lead = n / 3.0 * (p - q);
        return (lead, lead, n / 3.0 * (p + 2.0 * q));
    }
    let e = spec.signal_eps;
    let root = (9.0 * q * q + 2.0 * q * e + e * e).sqrt();
    (
        n / 3.0 * (p - q - e),
        n / 6.0 * (2.0 * p + q + e - root),
        n / 6.0 * (2.0 * p + q + e + root),
    )
}

/// Minimal t at which the unconditional joint floor
/// 1 - (d + d(d-1)/2) 2 exp(-t^2) - 2 exp(-n/20) reaches `target_prob`,
/// found by bisection to 1e-6.
pub fn solve_t(target_prob: f64, d: usize, n: usize) -> Result<f64> {
    if d == 0 || d > 64 {
        return Err(Error::InvalidParameter(format!(
            "pair count d = {d} out of supported range [1, 64]"
        )));
    }
    if !(0.0 < target_prob && target_prob < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target probability must lie in (0, 1), got {target_prob}"
        )));
    }
    let norm_term = 2.0 * (-(n as f64) / 20.0).exp();
    let limit = 1.0 - norm_term;
    if target_prob >= limit {
        return Err(Error::UnreachableTarget {
            target: target_prob,
            limit,
        });
    }
    let floor = |t: f64| bilinear_event_floor(d, t) - norm_term;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while floor(hi) < target_prob {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::UnreachableTarget {
                target: target_prob,
                limit,
            });
        }
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if floor(mid) >= target_prob {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    /// Window bound with analytic norm 3 sqrt(n), window floor 3 sqrt(n),
    /// unbounded above, all three signal eigenvalues treated jointly.
    KatoTemple,
    /// Uniform half-width 2 sqrt(max expected degree) around the statistic,
    /// with the degree taken under the hypothesis being intervaled.
    WeylLuPeng,
}

/// Confidence interval for the smallest signal eigenvalue under the given
/// hypothesis. `t` drives the window method and is ignored by the uniform
/// comparator.
pub fn lambda1_confidence_interval(
    spec: &ThreeBlockSpec,
    alternative: bool,
    t: f64,
    method: IntervalMethod,
) -> Result<(f64, f64)> {
    let (l1, l2, l3) = three_block_signal_eigenvalues(spec, alternative);
    match method {
        IntervalMethod::WeylLuPeng => {
            let half = concentration::lu_peng_spectral_bound(spec.max_expected_degree(alternative));
            Ok((l1 - half, l1 + half))
        }
        IntervalMethod::KatoTemple => {
            let threshold = 3.0 * (spec.n as f64).sqrt();
            let window = SpectralWindow::unbounded_above(threshold)?;
            let local = LocalSpectrum::new(vec![l1, l2, l3], window)?;
            let noise = NoiseNormEstimate::analytic(threshold)?;
            let conditional = deviation_bound(1, &local, t, &noise)?;
            let tail = concentration::spectral_norm_tail(
                &ConcentrationProfile::bernoulli_adjacency(),
                spec.n,
                spec.n,
                1.0,
                true,
            )?;
            let bound = unconditional_bound(&conditional, &tail)?;
            Ok((bound.lower, bound.upper))
        }
    }
}

/// Smallest epsilon in (0, `max_eps`] at which the null and alternative
/// intervals separate and stay separated through `max_eps`. Bisection to
/// 1e-5 on a gap that is monotone in epsilon.
pub fn epsilon_n_with_target(
    n: usize,
    p: f64,
    q: f64,
    method: IntervalMethod,
    target_prob: f64,
    max_eps: f64,
) -> Result<f64> {
    if !(max_eps > 0.0 && max_eps < p - q) {
        return Err(Error::InvalidParameter(format!(
            "search ceiling must lie in (0, p - q), got {max_eps}"
        )));
    }
    let t = match method {
        IntervalMethod::KatoTemple => solve_t(target_prob, 3, n)?,
        IntervalMethod::WeylLuPeng => 0.0,
    };
    let gap = |eps: f64| -> Result<f64> {
        let spec = ThreeBlockSpec::new(n, p, q, eps)?;
        let null = lambda1_confidence_interval(&spec, false, t, method)?;
        let alt = lambda1_confidence_interval(&spec, true, t, method)?;
        Ok(null.0 - alt.1)
    };
    if gap(max_eps)? <= 0.0 {
        return Err(Error::NoSeparation { max_eps });
    }
    let mut lo = 0.0f64;
    let mut hi = max_eps;
    while hi - lo > 1e-5 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // The gap is monotone for these interval families, but verify the
    // separation holds through the ceiling rather than assuming it.
    let steps = 200;
    for i in 0..=steps {
        let eps = hi + (max_eps - hi) * i as f64 / steps as f64;
        if gap(eps)? <= 0.0 {
            return Err(Error::NoSeparation { max_eps });
        }
    }
    Ok(hi)
}

/// [`epsilon_n_with_target`] at the working point: probability 0.99 and
/// search ceiling 0.2.
pub fn epsilon_n(n: usize, p: f64, q: f64, method: IntervalMethod) -> Result<f64> {
    epsilon_n_with_target(n, p, q, method, 0.99, 0.2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Row {
    pub n: usize,
    pub weyl_lu_peng: f64,
    pub kato_temple: f64,
}

/// Separation thresholds for a list of graph sizes, both methods.
pub fn table1(sizes: &[usize], p: f64, q: f64, target_prob: f64) -> Result<Vec<Table1Row>> {
    sizes
        .iter()
        .map(|&n| {
            Ok(Table1Row {
                n,
                weyl_lu_peng: epsilon_n_with_target(n, p, q, IntervalMethod::WeylLuPeng, target_prob, 0.2)?,
                kato_temple: epsilon_n_with_target(n, p, q, IntervalMethod::KatoTemple, target_prob, 0.2)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sbm_probability_matrix;
    use crate::spectral::symmetric_eigenvalues;

    const P: f64 = 0.81;
    const Q: f64 = 0.2025;

    #[test]
    fn null_eigenvalues_at_reference_size() {
        let spec = ThreeBlockSpec::new(6000, P, Q, 0.0).unwrap();
        let (l1, l2, l3) = three_block_signal_eigenvalues(&spec, false);
        assert!((l1 - 1215.0).abs() < 1e-9);
        assert!((l2 - 1215.0).abs() < 1e-9);
        assert!((l3 - 2430.0).abs() < 1e-9);
    }

    #[test]
    fn alternative_is_continuous_at_zero() {
        let spec = ThreeBlockSpec::new(6000, P, Q, 0.0).unwrap();
        assert_eq!(
            three_block_signal_eigenvalues(&spec, true),
            three_block_signal_eigenvalues(&spec, false)
        );
    }

    #[test]
    fn closed_forms_match_dense_eigensolver() {
        let spec = ThreeBlockSpec::new(150, 0.7, 0.25, 0.1).unwrap();
        for alternative in [false, true] {
            let p = sbm_probability_matrix(&spec.block_model(alternative)).unwrap();
            let spectrum = symmetric_eigenvalues(p.entries()).unwrap();
            let top: Vec<f64> = spectrum.values()[147..].to_vec();
            let (l1, l2, l3) = three_block_signal_eigenvalues(&spec, alternative);
            for (numeric, closed) in top.iter().zip([l1, l2, l3]) {
                assert!(
                    (numeric - closed).abs() / closed.abs() < 1e-8,
                    "{numeric} vs {closed} (alternative = {alternative})"
                );
            }
        }
    }

    #[test]
    fn alternative_eigenvalues_stay_ascending() {
        let spec = ThreeBlockSpec::new(300, 0.81, 0.2025, 0.2).unwrap();
        let (l1, l2, l3) = three_block_signal_eigenvalues(&spec, true);
        assert!(l1 < l2 && l2 < l3);
    }

    #[test]
    fn window_localizes_the_three_signal_values() {
        let spec = ThreeBlockSpec::new(6000, P, Q, 0.0).unwrap();
        let (l1, l2, l3) = three_block_signal_eigenvalues(&spec, false);
        let spectrum = crate::spectral::Spectrum::eigenvalues(
            [l1, l2, l3]
                .into_iter()
                .chain(std::iter::repeat_n(0.0, 5997))
                .collect(),
        );
        let window = SpectralWindow::unbounded_above(500.0).unwrap();
        let content = crate::spectral::locate_in_window(&spectrum, &window);
        assert_eq!(content.count, 3);
        assert!((content.values[0] - 1215.0).abs() < 1e-9);
        assert!((content.values[1] - 1215.0).abs() < 1e-9);
        assert!((content.values[2] - 2430.0).abs() < 1e-9);
    }

    #[test]
    fn solver_reproduces_reference_scales() {
        // d = 3 at n = 6000 and probability 0.99: t about 2.66
        let t = solve_t(0.99, 3, 6000).unwrap();
        assert!((t - 2.662716).abs() < 1e-4, "t = {t}");
        // d = 1 with a negligible norm term: t = sqrt(ln 200)
        let t = solve_t(0.99, 1, 1_000_000).unwrap();
        assert!((t - (200.0f64).ln().sqrt()).abs() < 1e-5, "t = {t}");
        // unreachable target
        assert!(matches!(
            solve_t(0.999999, 3, 20),
            Err(Error::UnreachableTarget { .. })
        ));
    }

    #[test]
    fn intervals_coincide_at_zero_epsilon() {
        let spec = ThreeBlockSpec::new(6000, P, Q, 0.0).unwrap();
        let t = solve_t(0.99, 3, 6000).unwrap();
        for method in [IntervalMethod::KatoTemple, IntervalMethod::WeylLuPeng] {
            let null = lambda1_confidence_interval(&spec, false, t, method).unwrap();
            let alt = lambda1_confidence_interval(&spec, true, t, method).unwrap();
            assert_eq!(null, alt);
        }
    }

    #[test]
    fn window_interval_is_narrower_than_uniform_comparator() {
        let spec = ThreeBlockSpec::new(6000, P, Q, 0.05).unwrap();
        let t = solve_t(0.99, 3, 6000).unwrap();
        let kt = lambda1_confidence_interval(&spec, false, t, IntervalMethod::KatoTemple).unwrap();
        let lp = lambda1_confidence_interval(&spec, false, t, IntervalMethod::WeylLuPeng).unwrap();
        assert!(kt.1 - kt.0 < lp.1 - lp.0);
    }

    #[test]
    fn separation_thresholds_at_reference_size() {
        let lp = epsilon_n(6000, P, Q, IntervalMethod::WeylLuPeng).unwrap();
        assert!((lp - 0.1006).abs() / 0.1006 < 0.005, "lu-peng {lp}");
        let kt = epsilon_n(6000, P, Q, IntervalMethod::KatoTemple).unwrap();
        assert!((kt - 0.0407).abs() / 0.0407 < 0.005, "window {kt}");
        assert!(kt < lp);
    }

    #[test]
    fn no_separation_is_reported() {
        // Tiny graphs cannot separate within the search ceiling.
        let err = epsilon_n_with_target(30, P, Q, IntervalMethod::WeylLuPeng, 0.99, 0.2);
        assert!(matches!(err, Err(Error::NoSeparation { .. })));
    }
}
