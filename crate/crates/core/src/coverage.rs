//! Monte Carlo validation of the deviation bounds on block models.
//!
//! For each replicate the harness samples an adjacency matrix, checks the
//! conditioning event (the window holds exactly d eigenvalues of the
//! sample, and the d Rayleigh quotients of the reference eigenvectors stay
//! in the window), and evaluates every per-pair bound. Reported rates are
//! compared against the nominal probability floors.
//!
//! Replicates run in parallel over streams derived from one master seed;
//! aggregation is integer counting, so reports are identical for a fixed
//! seed regardless of thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kato_temple::{
    deviation_bound, DeviationBound, LocalSpectrum, NoiseNormEstimate, NormSource,
};
use crate::models::{sample_adjacency, sbm_probability_matrix, BlockModel};
use crate::rng::SeedFamily;
use crate::spectral::{
    locate_in_window, spectral_norm_symmetric, symmetric_eigenvalues, SpectralWindow, Spectrum,
};

/// How the noise norm entering the corrections is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum NormChoice {
    /// Recompute ||A - P||_2 from each replicate.
    Empirical,
    /// A fixed analytic threshold (for example 3 sqrt(n)).
    Analytic(f64),
    /// The fixed asymptotic plug-in 2 sqrt(max expected degree).
    PlugIn(f64),
}

#[derive(Debug, Clone)]
pub struct CoverageConfig {
    pub model: BlockModel,
    pub window: SpectralWindow,
    pub t: f64,
    pub replicates: usize,
    pub seeds: SeedFamily,
    pub norm: NormChoice,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairCoverage {
    pub k: usize,
    pub reference_value: f64,
    /// Nominal floor for the lower bound event (l-indexed union).
    pub nominal_lower: f64,
    /// Nominal floor for the upper bound event (k-indexed union).
    pub nominal_upper: f64,
    pub lower_rate: f64,
    pub upper_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub replicates: usize,
    pub seed: u64,
    pub t: f64,
    pub window: SpectralWindow,
    pub d: usize,
    pub reference_values: Vec<f64>,
    pub norm: NormChoice,
    pub mean_noise_norm: f64,
    /// Nominal joint floor from the d-indexed union bound.
    pub nominal_joint: f64,
    /// Rate of {conditioning event and every pair bound}.
    pub joint_rate: f64,
    pub conditional_event_rate: f64,
    /// Binomial standard error of the joint rate at the nominal floor.
    pub monte_carlo_sigma: f64,
    pub pairs: Vec<PairCoverage>,
}

impl CoverageReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coverage report serialization")
    }
}

struct ReplicateOutcome {
    event: bool,
    lower_ok: Vec<bool>,
    upper_ok: Vec<bool>,
    joint_ok: bool,
    noise_norm: f64,
}

/// Runs the coverage harness. The model's signal eigenvalues located in
/// the window form the reference pairs; the matching block-constant
/// eigenvectors drive the Rayleigh part of the conditioning event.
pub fn run_coverage(config: &CoverageConfig) -> Result<CoverageReport> {
    if config.replicates == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    let p = sbm_probability_matrix(&config.model)?;
    let n = p.n();
    let (signal_values, signal_vectors) = config.model.signal_eigenpairs();

    // Reference pairs: signal eigenvalues strictly inside the window,
    // with their eigenvectors. The n - K zero eigenvalues lie outside any
    // positive window.
    let mut values = Vec::new();
    let mut vectors = Vec::new();
    for (value, vector) in signal_values.iter().zip(&signal_vectors) {
        if config.window.contains(*value) {
            values.push(*value);
            vectors.push(vector.clone());
        }
    }
    let full = Spectrum::eigenvalues(
        signal_values
            .iter()
            .copied()
            .chain(std::iter::repeat_n(0.0, n - signal_values.len()))
            .collect(),
    );
    let local = LocalSpectrum::from_spectrum(&full, config.window)?;
    let d = local.d();
    debug_assert_eq!(values.len(), d);

    // Pre-assemble the bounds once when the norm is replicate-independent.
    let fixed_noise = match config.norm {
        NormChoice::Analytic(v) => Some(NoiseNormEstimate::analytic(v)?),
        NormChoice::PlugIn(v) => Some(NoiseNormEstimate::plug_in(v)?),
        NormChoice::Empirical => None,
    };
    let fixed_bounds: Option<Vec<DeviationBound>> = match &fixed_noise {
        Some(noise) => Some(
            (1..=d)
                .map(|k| deviation_bound(k, &local, config.t, noise))
                .collect::<Result<_>>()?,
        ),
        None => {
            // validate admissibility up front with a zero norm
            let probe = NoiseNormEstimate::new(0.0, NormSource::Empirical)?;
            for k in 1..=d {
                deviation_bound(k, &local, config.t, &probe)?;
            }
            None
        }
    };

    let outcomes: Vec<ReplicateOutcome> = (0..config.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = config.seeds.stream(r);
            let a = sample_adjacency(&p, &mut rng);
            let sampled = symmetric_eigenvalues(a.entries()).expect("sampled matrix is symmetric");
            let in_window = locate_in_window(&sampled, &config.window);

            let rayleigh_ok = vectors.iter().all(|w| {
                let quotient = (a.entries() * w).dot(w);
                config.window.contains(quotient)
            });
            let event = in_window.count == d && rayleigh_ok;

            let noise_norm = match fixed_noise {
                Some(noise) => noise.value,
                None => {
                    let e = a.entries() - p.entries();
                    spectral_norm_symmetric(&e).expect("noise matrix is symmetric")
                }
            };

            let bounds: Vec<DeviationBound> = match &fixed_bounds {
                Some(b) => b.clone(),
                None => {
                    let noise = NoiseNormEstimate::empirical(noise_norm)
                        .expect("nonnegative spectral norm");
                    (1..=d)
                        .map(|k| {
                            deviation_bound(k, &local, config.t, &noise)
                                .expect("admissibility checked up front")
                        })
                        .collect()
                }
            };

            let mut lower_ok = vec![false; d];
            let mut upper_ok = vec![false; d];
            if in_window.count == d {
                for k in 1..=d {
                    let observed = in_window.values[k - 1];
                    lower_ok[k - 1] = observed >= bounds[k - 1].lower;
                    upper_ok[k - 1] = observed <= bounds[k - 1].upper;
                }
            }
            let joint_ok = event && lower_ok.iter().all(|&b| b) && upper_ok.iter().all(|&b| b);
            ReplicateOutcome {
                event,
                lower_ok,
                upper_ok,
                joint_ok,
                noise_norm,
            }
        })
        .collect();

    let r = config.replicates as f64;
    let mut joint = 0usize;
    let mut event = 0usize;
    let mut lower_counts = vec![0usize; d];
    let mut upper_counts = vec![0usize; d];
    let mut norm_sum = 0.0;
    for outcome in &outcomes {
        joint += outcome.joint_ok as usize;
        event += outcome.event as usize;
        norm_sum += outcome.noise_norm;
        for k in 0..d {
            lower_counts[k] += outcome.lower_ok[k] as usize;
            upper_counts[k] += outcome.upper_ok[k] as usize;
        }
    }

    // Floors are norm-independent; read them off a bound assembled with a
    // zero placeholder norm.
    let placeholder = NoiseNormEstimate::new(0.0, NormSource::Empirical)?;
    let floors: Vec<DeviationBound> = (1..=d)
        .map(|k| deviation_bound(k, &local, config.t, &placeholder))
        .collect::<Result<_>>()?;
    let nominal_joint = floors[0].prob_joint;

    let pairs = (0..d)
        .map(|idx| PairCoverage {
            k: idx + 1,
            reference_value: local.value(idx + 1),
            nominal_lower: floors[idx].prob_lower,
            nominal_upper: floors[idx].prob_upper,
            lower_rate: lower_counts[idx] as f64 / r,
            upper_rate: upper_counts[idx] as f64 / r,
        })
        .collect();

    Ok(CoverageReport {
        replicates: config.replicates,
        seed: config.seeds.master(),
        t: config.t,
        window: config.window,
        d,
        reference_values: local.values().to_vec(),
        norm: config.norm,
        mean_noise_norm: norm_sum / r,
        nominal_joint,
        joint_rate: joint as f64 / r,
        conditional_event_rate: event as f64 / r,
        monte_carlo_sigma: (nominal_joint * (1.0 - nominal_joint) / r).sqrt(),
        pairs,
    })
}
