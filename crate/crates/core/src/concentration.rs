//! Tail-probability machinery for bilinear forms of random noise matrices:
//! the Hoeffding bound for centered Bernoulli adjacency noise, general
//! (C, c, gamma) tail profiles with their dilation arithmetic, and the
//! epsilon-net spectral-norm tail with explicit constants.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{sample_adjacency, EdgeProbabilityMatrix};
use crate::rng::SeedFamily;
use crate::spectral::UNIT_NORM_TOL;

/// Tail profile (C, c, gamma): bilinear forms of the noise matrix against
/// unit vectors satisfy P[|<Eu, v>| > t] <= C exp(-c t^gamma).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationProfile {
    prefactor: f64,
    rate: f64,
    exponent: f64,
}

impl ConcentrationProfile {
    pub fn new(prefactor: f64, rate: f64, exponent: f64) -> Result<Self> {
        if ![prefactor, rate, exponent]
            .iter()
            .all(|c| c.is_finite() && *c > 0.0)
        {
            return Err(Error::InvalidProfile {
                prefactor,
                rate,
                exponent,
            });
        }
        Ok(Self {
            prefactor,
            rate,
            exponent,
        })
    }

    /// Profile of centered Bernoulli adjacency noise: (2, 1, 2).
    pub fn bernoulli_adjacency() -> Self {
        Self {
            prefactor: 2.0,
            rate: 1.0,
            exponent: 2.0,
        }
    }

    /// Profile of i.i.d. standard normal noise: (2, 1/2, 2).
    pub fn gaussian() -> Self {
        Self {
            prefactor: 2.0,
            rate: 0.5,
            exponent: 2.0,
        }
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Tail bound min(1, C exp(-c t^gamma)); the raw formula exceeds one
    /// for small t and is clamped so downstream probability accounting
    /// stays valid.
    pub fn tail(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::NonPositiveScale { t });
        }
        Ok((self.prefactor * (-self.rate * t.powf(self.exponent)).exp()).min(1.0))
    }

    /// Profile of the Hermitian dilation of the noise: (2C, c / 2^gamma, gamma).
    pub fn dilate(&self) -> Self {
        Self {
            prefactor: 2.0 * self.prefactor,
            rate: self.rate / 2.0_f64.powf(self.exponent),
            exponent: self.exponent,
        }
    }
}

/// Bilinear tail of centered Bernoulli adjacency noise against fixed unit
/// vectors: min(1, 2 exp(-t^2)).
pub fn hoeffding_bilinear_tail(t: f64) -> Result<f64> {
    ConcentrationProfile::bernoulli_adjacency().tail(t)
}

/// Asymptotic spectral-norm plug-in 2 sqrt(max expected degree) for
/// centered adjacency noise, with the vanishing correction term dropped.
/// A large-n comparator, not a finite-sample guarantee.
pub fn lu_peng_spectral_bound(max_expected_degree: f64) -> f64 {
    2.0 * max_expected_degree.sqrt()
}

/// Spectral-norm tail produced by the epsilon-net argument: the norm
/// exceeds `threshold` with probability at most `probability`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralNormTail {
    pub threshold: f64,
    pub probability: f64,
    pub net_eps: f64,
    /// Exponential rate: probability = min(1, C exp(-c_eps * max(m, n))).
    pub c_eps: f64,
}

/// Net constant: a quarter-net of the unit sphere has at most 9^dim points.
fn net_log_constant(symmetric: bool) -> f64 {
    let log9 = 9.0_f64.ln();
    if symmetric {
        log9
    } else {
        2.0 * log9
    }
}

/// Spectral-norm tail bound for a (C, c, gamma)-concentrated m x n noise
/// matrix at threshold (2 + net_eps) max(m, n)^{1/gamma}.
///
/// `net_eps` must be large enough that the derived exponent
/// c (1 + net_eps/2)^gamma - (2 log 9 or log 9) is positive; the symmetric
/// refinement (one net instead of two) requires m == n.
pub fn spectral_norm_tail(
    profile: &ConcentrationProfile,
    m: usize,
    n: usize,
    net_eps: f64,
    symmetric: bool,
) -> Result<SpectralNormTail> {
    if symmetric && m != n {
        return Err(Error::InvalidParameter(format!(
            "symmetric refinement requires a square matrix, got {m} x {n}"
        )));
    }
    if net_eps.is_nan() || net_eps <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "net epsilon must be positive, got {net_eps}"
        )));
    }
    let log_const = net_log_constant(symmetric);
    let c_eps = profile.rate() * (1.0 + net_eps / 2.0).powf(profile.exponent()) - log_const;
    if c_eps <= 0.0 {
        let min_admissible =
            2.0 * (log_const / profile.rate()).powf(1.0 / profile.exponent()) - 2.0;
        return Err(Error::InadmissibleNetEps {
            net_eps,
            min_admissible,
        });
    }
    let dim = m.max(n) as f64;
    let threshold = (2.0 + net_eps) * dim.powf(1.0 / profile.exponent());
    let probability = (profile.prefactor() * (-c_eps * dim).exp()).min(1.0);
    Ok(SpectralNormTail {
        threshold,
        probability,
        net_eps,
        c_eps,
    })
}

/// Monte Carlo exceedance rate of the bilinear form |<(A - P) u, v>| over
/// independent adjacency samples; the analytic tail is an upper bound for
/// this rate up to Monte Carlo noise.
pub fn empirical_bilinear_check(
    p: &EdgeProbabilityMatrix,
    u: &DVector<f64>,
    v: &DVector<f64>,
    t: f64,
    replicates: usize,
    seeds: SeedFamily,
) -> Result<f64> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(Error::NonPositiveScale { t });
    }
    for w in [u, v] {
        let norm = w.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnitNorm { norm });
        }
    }
    let expected = p.entries() * u;
    let exceedances: u64 = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeds.stream(r);
            let a = sample_adjacency(p, &mut rng);
            let form = (a.entries() * u - &expected).dot(v);
            u64::from(form.abs() > t)
        })
        .sum();
    Ok(exceedances as f64 / replicates as f64)
}
