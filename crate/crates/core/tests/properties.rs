//! Property tests and the heavier Monte Carlo checks: sampling
//! invariants, dilation and window properties, closed-form spectra
//! against the dense solver, null calibration of the normalized count
//! statistics, and the singular-value bound on the Gaussian spike model.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::RngExt;
use rayon::prelude::*;

use katobound::concentration::ConcentrationProfile;
use katobound::inference::{
    changepoint_power, expected_shift, normalized_statistic, three_block_signal_eigenvalues,
    ChangePointSpec, CountStatistic, PowerStatistic, ShiftStatistic, ThresholdRule,
    ThreeBlockSpec,
};
use katobound::kato_temple::{
    sv_deviation_bound, weyl_window_selection, LocalSpectrum, NoiseNormEstimate,
};
use katobound::models::{
    sample_adjacency, sbm_probability_matrix, spike_model_matrices, BlockModel,
    EdgeProbabilityMatrix, SpikeModelSpec,
};
use katobound::rng::SeedFamily;
use katobound::spectral::{
    hermitian_dilation, locate_in_window, singular_values, symmetric_eigenvalues, SpectralWindow,
    Spectrum,
};

// ---------------------------------------------------------------------
// Sampling invariants
// ---------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_adjacency_is_symmetric_binary(
        n in 2usize..24,
        density in 0.0f64..=1.0,
        hollow in proptest::bool::ANY,
        seed in proptest::num::u64::ANY,
    ) {
        let mut p = EdgeProbabilityMatrix::erdos_renyi(n, density).unwrap();
        if hollow {
            p = p.hollow();
        }
        let a = sample_adjacency(&p, &mut SeedFamily::new(seed).stream(0));
        for i in 0..n {
            for j in 0..n {
                let v = a.entries()[(i, j)];
                prop_assert!(v == 0.0 || v == 1.0);
                prop_assert_eq!(v, a.entries()[(j, i)]);
            }
            if hollow {
                prop_assert_eq!(a.entries()[(i, i)], 0.0);
            }
        }
    }

    #[test]
    fn dilation_matches_singular_values(
        m in 1usize..12,
        n in 1usize..12,
        seed in proptest::num::u64::ANY,
    ) {
        let mut rng = SeedFamily::new(seed).stream(0);
        let matrix = DMatrix::from_fn(m, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let sv = singular_values(&matrix);
        let spectrum = symmetric_eigenvalues(&hermitian_dilation(&matrix)).unwrap();
        let k = m.min(n);
        let top = &spectrum.values()[m + n - k..];
        for (&eig, &sigma) in top.iter().zip(sv.values()) {
            prop_assert!((eig - sigma).abs() <= 1e-10);
        }
    }

    #[test]
    fn shrinking_a_window_never_increases_the_count(
        values in proptest::collection::vec(0.1f64..100.0, 1..30),
        alpha in 0.05f64..40.0,
        widen in 0.1f64..60.0,
        tighten in 0.01f64..0.9,
    ) {
        let spectrum = Spectrum::eigenvalues(values);
        let outer = SpectralWindow::new(alpha, alpha + widen).unwrap();
        let inner_alpha = alpha + tighten * widen / 2.0;
        let inner = SpectralWindow::new(inner_alpha, alpha + widen * (1.0 - tighten / 2.0)).unwrap();
        let big = locate_in_window(&spectrum, &outer);
        let small = locate_in_window(&spectrum, &inner);
        prop_assert!(small.count <= big.count);
    }

    #[test]
    fn tail_profiles_stay_in_unit_interval(
        prefactor in 0.1f64..10.0,
        rate in 0.01f64..4.0,
        exponent in 0.2f64..4.0,
        t in 0.001f64..50.0,
    ) {
        let profile = ConcentrationProfile::new(prefactor, rate, exponent).unwrap();
        let tail = profile.tail(t).unwrap();
        prop_assert!((0.0..=1.0).contains(&tail));
        // dilation doubles the prefactor and scales the rate by 2^-gamma
        let d = profile.dilate();
        prop_assert!((d.prefactor() - 2.0 * prefactor).abs() < 1e-12);
        prop_assert!((d.rate() - rate / 2f64.powf(exponent)).abs() < 1e-12);
    }
}

// ---------------------------------------------------------------------
// Uniform deviation sanity: eigenvalues move by at most the perturbation
// norm. This is the comparator every window bound is measured against.
// ---------------------------------------------------------------------

#[test]
fn eigenvalues_shift_at_most_by_the_perturbation_norm() {
    let mut rng = SeedFamily::new(61).stream(0);
    for _ in 0..20 {
        let n = 10 + (rng.random::<u64>() % 20) as usize;
        let mut base = DMatrix::zeros(n, n);
        let mut bump = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let s = rng.random::<f64>() * 2.0 - 1.0;
                base[(i, j)] = s;
                base[(j, i)] = s;
                let f = (rng.random::<f64>() * 2.0 - 1.0) * 0.3;
                bump[(i, j)] = f;
                bump[(j, i)] = f;
            }
        }
        let perturbed = &base + &bump;
        let before = symmetric_eigenvalues(&base).unwrap();
        let after = symmetric_eigenvalues(&perturbed).unwrap();
        let norm = katobound::spectral::spectral_norm_symmetric(&bump).unwrap();
        let max_move = before
            .values()
            .iter()
            .zip(after.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(
            max_move <= norm + 1e-8,
            "eigenvalues moved {max_move} with perturbation norm {norm}"
        );
    }
}

// ---------------------------------------------------------------------
// Closed-form three-block spectra against the dense solver.
// ---------------------------------------------------------------------

#[test]
fn three_block_closed_forms_match_dense_solver() {
    let mut rng = SeedFamily::new(67).stream(0);
    let cases: Vec<(usize, f64, f64, f64, bool)> = (0..50)
        .map(|_| {
            let n = 3 * (2 + (rng.random::<u64>() % 299) as usize); // 6..=900, multiple of 3
            let q = 0.05 + rng.random::<f64>() * 0.4;
            let p = q + 0.05 + rng.random::<f64>() * (0.9 - q - 0.05);
            let eps = rng.random::<f64>() * (p - q) * 0.95;
            let alternative = rng.random::<f64>() < 0.5;
            (n, p, q, eps, alternative)
        })
        .collect();
    cases.par_iter().for_each(|&(n, p, q, eps, alternative)| {
        let spec = ThreeBlockSpec::new(n, p, q, eps).unwrap();
        let matrix = sbm_probability_matrix(&spec.block_model(alternative)).unwrap();
        let spectrum = symmetric_eigenvalues(matrix.entries()).unwrap();
        let top = &spectrum.values()[n - 3..];
        let (l1, l2, l3) = three_block_signal_eigenvalues(&spec, alternative);
        for (numeric, closed) in top.iter().zip([l1, l2, l3]) {
            assert!(
                (numeric - closed).abs() / closed.abs() <= 1e-8,
                "n={n} p={p:.3} q={q:.3} eps={eps:.3} alt={alternative}: {numeric} vs {closed}"
            );
        }
    });
}

// ---------------------------------------------------------------------
// Null calibration of the normalized count statistics at n = 500.
// ---------------------------------------------------------------------

#[test]
fn normalized_counts_are_calibrated_under_the_null() {
    let n = 500;
    let p = 0.3;
    let replicates = 2000usize;
    let epm = EdgeProbabilityMatrix::erdos_renyi(n, p).unwrap().hollow();
    let seeds = SeedFamily::new(71);
    let values: Vec<(f64, f64)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeds.stream(r);
            let a = sample_adjacency(&epm, &mut rng);
            let b = sample_adjacency(&epm, &mut rng);
            let edges = normalized_statistic(CountStatistic::Edges, &a, &b, p, 0.0)
                .unwrap()
                .normalized_difference;
            let triangles = normalized_statistic(CountStatistic::Triangles, &a, &b, p, 0.0)
                .unwrap()
                .normalized_difference;
            (edges, triangles)
        })
        .collect();

    let r = replicates as f64;
    for (name, sample) in [
        ("edges", values.iter().map(|v| v.0).collect::<Vec<_>>()),
        ("triangles", values.iter().map(|v| v.1).collect::<Vec<_>>()),
    ] {
        let mean = sample.iter().sum::<f64>() / r;
        let var = sample.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
        let sigma_mean = (var / r).sqrt();
        assert!(
            mean.abs() <= 3.0 * sigma_mean,
            "{name}: null mean {mean:.4} exceeds 3 sigma {:.4}",
            3.0 * sigma_mean
        );
        if name == "edges" {
            assert!(
                (0.8..=1.25).contains(&var),
                "edges: null variance {var:.3} outside [0.8, 1.25]"
            );
        }
    }
}

// ---------------------------------------------------------------------
// The alternative mean of the normalized edge difference matches the
// expected-shift formula.
// ---------------------------------------------------------------------

#[test]
fn edge_shift_formula_matches_monte_carlo() {
    let n = 500;
    let m = 4 * (n as f64).sqrt().round() as usize; // 89
    let spec = ChangePointSpec::new(n, m, 0.3, 0.1, 2, 2).unwrap();
    let shift = expected_shift(ShiftStatistic::Edges, &spec);
    let null = spec.null_probability_matrix();
    let chatter = spec.chatter_probability_matrix();
    let replicates = 600usize;
    let seeds = SeedFamily::new(73);
    let sample: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeds.stream(r);
            let a = sample_adjacency(&null, &mut rng);
            let b = sample_adjacency(&chatter, &mut rng);
            normalized_statistic(CountStatistic::Edges, &a, &b, spec.p, spec.signal_eps)
                .unwrap()
                .normalized_difference
        })
        .collect();
    let r = replicates as f64;
    let mean = sample.iter().sum::<f64>() / r;
    let var = sample.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
    let tol = 3.0 * (var / r).sqrt();
    assert!(
        (mean - shift).abs() <= tol,
        "empirical mean {mean:.4} vs expected shift {shift:.4} (tolerance {tol:.4})"
    );
}

// ---------------------------------------------------------------------
// Spike model: level windows and the singular-value bound, empirically.
// ---------------------------------------------------------------------

#[test]
fn spike_middle_level_bound_holds_empirically() {
    // Middle multiplicity kept small: the correction terms grow with
    // k(k-1) t, so a window packed with a macroscopic multiplicity makes
    // the conditional bound vacuous at any useful scale.
    let spec = SpikeModelSpec::new(299, 2, 299, 400.0, 400.0).unwrap();
    let q = spec.dim();
    let qf = q as f64;
    assert!(spec.kappa > 12.0 * qf.sqrt() + 1.0, "levels must separate");

    // with this separation the per-level uniform-deviation intervals
    // [level - 6 sqrt(q), level + 6 sqrt(q)] are pairwise disjoint
    let e = 6.0 * qf.sqrt();
    let levels = spec.levels();
    for pair in levels.windows(2) {
        assert!(pair[0] + e < pair[1] - e, "{} vs {}", pair[0], pair[1]);
    }

    let analytic = NoiseNormEstimate::analytic(6.0 * qf.sqrt()).unwrap();
    let window = weyl_window_selection(&spec.levels(), 1, &analytic).unwrap();
    assert!((window.alpha() - (6.0 * qf.sqrt() + 2.0)).abs() < 1e-12);
    assert!((window.beta() - (800.0 - 6.0 * qf.sqrt())).abs() < 1e-12);

    let sigma_mid = spec.kappa + 1.0;
    let local = LocalSpectrum::new(vec![sigma_mid, sigma_mid], window).unwrap();
    let t = 8.0;
    let profile = ConcentrationProfile::gaussian();
    let replicates = 24u64;
    let seeds = SeedFamily::new(79);
    let failures: u64 = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeds.stream(r);
            let (m, e) = spike_model_matrices(&spec, &mut rng);
            let observed = singular_values(&(&m + &e));
            let content = locate_in_window(&observed, &window);
            if content.count != 2 {
                return 1;
            }
            let norm = singular_values(&e).max().unwrap();
            let noise = NoiseNormEstimate::empirical(norm).unwrap();
            for k in 1..=2usize {
                let bound = sv_deviation_bound(k, &local, t, &noise, &profile).unwrap();
                let value = content.values[k - 1];
                if value < bound.lower || value > bound.upper {
                    return 1;
                }
            }
            0
        })
        .sum();
    // joint floor 1 - 12 exp(-t^2/8) = 0.9952 at t = 8; every replicate
    // is expected to satisfy the bound at this scale
    assert_eq!(failures, 0, "{failures} of {replicates} replicates violated the bound");
}

// ---------------------------------------------------------------------
// Subset eigenvalue statistic has power at enumeration-friendly scale.
// ---------------------------------------------------------------------

#[test]
fn subset_eigenvalue_statistic_detects_a_dense_community() {
    let spec = ChangePointSpec::new(20, 5, 0.2, 0.6, 2, 2).unwrap();
    let report = changepoint_power(
        &spec,
        PowerStatistic::LocalEigenvalue,
        ThresholdRule::EmpiricalNullQuantile {
            level: 0.05,
            calibration_replicates: 150,
        },
        150,
        SeedFamily::new(83),
    )
    .unwrap();
    let sigma = 3.0 * (0.05f64 * 0.95 / 150.0).sqrt();
    assert!(
        report.alt_rejection_rate > 0.05 + sigma,
        "power {:.3} does not clear the level {:.3}",
        report.alt_rejection_rate,
        0.05 + sigma
    );
    assert!(
        report.null_rejection_rate <= 0.12,
        "null rate {:.3} is far from the level",
        report.null_rejection_rate
    );
}

// ---------------------------------------------------------------------
// Dot-product factorization of the three-block model: the exact latent
// positions recover the block matrix, and the two-decimal rounded
// positions reproduce it to about a percent.
// ---------------------------------------------------------------------

#[test]
fn three_block_model_factors_as_a_dot_product_model() {
    let (p, q): (f64, f64) = (0.81, 0.2025);
    let b = DMatrix::from_row_slice(3, 3, &[p, q, q, q, p, q, q, q, p]);
    // eigendecompose the block matrix and scale eigenvectors by sqrt of
    // the eigenvalues to get one latent position per block
    let decomp = nalgebra::SymmetricEigen::new(b.clone());
    let mut latent = DMatrix::zeros(3, 3);
    for col in 0..3 {
        let lambda = decomp.eigenvalues[col];
        assert!(lambda > 0.0, "block matrix must be positive definite");
        for row in 0..3 {
            latent[(row, col)] = decomp.eigenvectors[(row, col)] * lambda.sqrt();
        }
    }
    let gram = &latent * latent.transpose();
    for i in 0..3 {
        for j in 0..3 {
            assert!((gram[(i, j)] - b[(i, j)]).abs() < 1e-12);
        }
    }

    // the published two-decimal positions land within 1e-2 of the block
    // probabilities entrywise
    let rounded = DMatrix::from_row_slice(
        3,
        3,
        &[0.55, 0.32, 0.64, -0.55, 0.32, 0.64, 0.0, -0.64, 0.64],
    );
    let approx = &rounded * rounded.transpose();
    for i in 0..3 {
        for j in 0..3 {
            assert!(
                (approx[(i, j)] - b[(i, j)]).abs() <= 1e-2,
                "({i},{j}): {} vs {}",
                approx[(i, j)],
                b[(i, j)]
            );
        }
    }

    // expanding each block row to n/3 vertices gives a valid dot-product
    // model whose matrix equals the block construction exactly
    let n = 30;
    let expanded = DMatrix::from_fn(n, 3, |i, j| latent[(i / (n / 3), j)]);
    let epm = katobound::models::rdpg_probability_matrix(&expanded).unwrap();
    let model = BlockModel::new(b, vec![n / 3; 3]).unwrap();
    let direct = sbm_probability_matrix(&model).unwrap();
    let max_dev = (epm.entries() - direct.entries())
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    assert!(max_dev < 1e-12, "max deviation {max_dev}");
}
