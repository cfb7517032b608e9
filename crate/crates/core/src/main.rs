//! Command-line front end: deviation bounds for a model spec, separation
//! thresholds for the three-block test, Monte Carlo bound validation, and
//! change-point power simulation. All randomized commands take a master
//! seed and produce byte-identical output for a fixed seed regardless of
//! thread count.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use katobound::concentration::{self, ConcentrationProfile};
use katobound::coverage::{run_coverage, CoverageConfig, NormChoice};
use katobound::error::Error;
use katobound::inference::{
    changepoint_power, table1, ChangePointSpec, PowerStatistic, ThresholdRule,
};
use katobound::kato_temple::{
    deviation_bound, sv_deviation_bound, unconditional_bound, DeviationBound, LocalSpectrum,
    NoiseNormEstimate,
};
use katobound::models::{sample_adjacency, spike_model_matrices, ModelSpec};
use katobound::rng::SeedFamily;
use katobound::spectral::{self, SpectralWindow, Spectrum};

#[derive(Parser)]
#[command(
    name = "katobound",
    version,
    about = "Spectral deviation bounds for random matrices and graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum NormArg {
    /// Sample one realization and use its measured noise norm.
    Empirical,
    /// Analytic tail threshold: 3 sqrt(n) for adjacency noise,
    /// 6 sqrt(q) for the Gaussian spike model.
    Analytic,
    /// Asymptotic plug-in 2 sqrt(max expected degree).
    Plugin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum StatisticArg {
    T2,
    T3,
    MaxDegree,
    Scan,
    ModifiedScan,
    LambdaM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum RuleArg {
    /// Pick a rule suited to the statistic: Gaussian quantile for the
    /// normalized counts, empirical null quantile for locality statistics,
    /// sqrt(m log n) for the subset eigenvalue statistic.
    Auto,
    Gaussian,
    Empirical,
    SqrtMLogN,
}

#[derive(Subcommand)]
enum Command {
    /// Per-pair deviation bounds for the signal values of a model inside
    /// a spectral window.
    Bound {
        /// Model spec: inline JSON or a path to a JSON file.
        #[arg(long)]
        spec: String,
        /// Window "alpha,beta" with beta a number or "inf".
        #[arg(long)]
        window: String,
        /// Deviation scale.
        #[arg(long, default_value_t = 2.55)]
        t: f64,
        #[arg(long, value_enum, default_value_t = NormArg::Analytic)]
        e_norm: NormArg,
        /// Master seed (used by the empirical norm choice).
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interval-separation thresholds of the three-block test over a list
    /// of graph sizes, for both interval methods.
    Table1 {
        #[arg(long, default_value_t = 0.81)]
        p: f64,
        #[arg(long, default_value_t = 0.2025)]
        q: f64,
        #[arg(long, default_value_t = 0.99)]
        target_prob: f64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![6000, 9000, 12000, 15000])]
        sizes: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo coverage of the deviation bounds on a block model.
    Validate {
        /// Block-model spec (kind "sbm" or "er"): inline JSON or a path.
        #[arg(long)]
        spec: String,
        /// Window "alpha,beta" with beta a number or "inf".
        #[arg(long)]
        window: String,
        #[arg(long, default_value_t = 2.55)]
        t: f64,
        #[arg(long, default_value_t = 500)]
        replicates: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = NormArg::Empirical)]
        e_norm: NormArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rejection rates of the two-sample change test under null and
    /// chatter alternatives.
    Changepoint {
        #[arg(long)]
        n: usize,
        /// Chatter community size.
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        /// Chatter increment added to p inside the community.
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = StatisticArg::T2)]
        statistic: StatisticArg,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[arg(long, value_enum, default_value_t = RuleArg::Auto)]
        rule: RuleArg,
        /// Null replicates used by the empirical quantile rule.
        #[arg(long, default_value_t = 500)]
        calibration: usize,
        /// Coefficient of the sqrt(m log n) rule.
        #[arg(long, default_value_t = 1.0)]
        coefficient: f64,
        #[arg(long, default_value_t = 500)]
        replicates: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Output envelope: every document embeds the library version and the
/// configuration it was produced from.
#[derive(Serialize)]
struct Document<C: Serialize, R: Serialize> {
    version: &'static str,
    command: &'static str,
    config: C,
    result: R,
}

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_domain_error() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Bound {
            spec,
            window,
            t,
            e_norm,
            seed,
            format,
            out,
        } => cmd_bound(&spec, &window, t, e_norm, seed, format, out),
        Command::Table1 {
            p,
            q,
            target_prob,
            sizes,
            format,
            out,
        } => cmd_table1(p, q, target_prob, &sizes, format, out),
        Command::Validate {
            spec,
            window,
            t,
            replicates,
            seed,
            e_norm,
            format,
            out,
        } => cmd_validate(&spec, &window, t, replicates, seed, e_norm, format, out),
        Command::Changepoint {
            n,
            m,
            p,
            eps,
            statistic,
            level,
            rule,
            calibration,
            coefficient,
            replicates,
            seed,
            format,
            out,
        } => cmd_changepoint(ChangepointConfig {
            n,
            m,
            p,
            eps,
            statistic,
            level,
            rule,
            calibration,
            coefficient,
            replicates,
            seed,
        }, format, out),
    }
}

fn load_spec(text: &str) -> Result<ModelSpec, Error> {
    let json = if text.trim_start().starts_with('{') {
        text.to_string()
    } else {
        std::fs::read_to_string(text)?
    };
    ModelSpec::from_json(&json)
}

fn parse_window(text: &str) -> Result<SpectralWindow, Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "window must be \"alpha,beta\" with beta a number or \"inf\", got {text:?}"
        )));
    }
    let alpha: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad window alpha {:?}", parts[0])))?;
    let beta_text = parts[1].trim();
    let beta = if beta_text.eq_ignore_ascii_case("inf") || beta_text.eq_ignore_ascii_case("infinity")
    {
        f64::INFINITY
    } else {
        beta_text
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad window beta {beta_text:?}")))?
    };
    SpectralWindow::new(alpha, beta)
}

fn emit(text: String, out: Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn require_json(format: Format, command: &str) -> Result<(), Error> {
    if format != Format::Json {
        return Err(Error::InvalidParameter(format!(
            "{command} supports only --format json"
        )));
    }
    Ok(())
}

/// Reference spectrum of a model without building the full matrix where a
/// small reduction exists: block models expose their nonzero eigenvalues
/// through the size-weighted block matrix, the spike model its singular
/// values.
fn model_spectrum(spec: &ModelSpec) -> Result<Spectrum, Error> {
    match spec {
        ModelSpec::Sbm { .. } | ModelSpec::Er { .. } => {
            let model = spec.as_block_model()?;
            let signal = model.signal_eigenvalues();
            let zeros = model.n() - signal.len();
            Ok(Spectrum::eigenvalues(
                signal
                    .into_iter()
                    .chain(std::iter::repeat_n(0.0, zeros))
                    .collect(),
            ))
        }
        ModelSpec::Rdpg { .. } => {
            let p = spec.build_probability_matrix()?;
            spectral::symmetric_eigenvalues(p.entries())
        }
        ModelSpec::Spike { .. } => {
            let sp = spec.as_spike_spec()?;
            Ok(Spectrum::singular_values(sp.singular_values()))
        }
    }
}

#[derive(Serialize)]
struct BoundConfig<'a> {
    spec: &'a ModelSpec,
    window: SpectralWindow,
    t: f64,
    e_norm: NormArg,
    seed: u64,
}

#[derive(Serialize)]
struct BoundResult {
    d: usize,
    noise: NoiseNormEstimate,
    bounds: Vec<DeviationBound>,
    /// Present when the analytic norm is used: the same bounds with the
    /// norm-tail probability folded into the floors.
    unconditional_bounds: Option<Vec<DeviationBound>>,
}

fn cmd_bound(
    spec_text: &str,
    window_text: &str,
    t: f64,
    e_norm: NormArg,
    seed: u64,
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), Error> {
    require_json(format, "bound")?;
    let spec = load_spec(spec_text)?;
    let window = parse_window(window_text)?;
    let spectrum = model_spectrum(&spec)?;
    let local = LocalSpectrum::from_spectrum(&spectrum, window)?;
    let is_spike = matches!(spec, ModelSpec::Spike { .. });
    let dim = spec.dimension();

    let norm_tail = if is_spike {
        concentration::spectral_norm_tail(&ConcentrationProfile::gaussian(), dim, dim, 4.0, false)?
    } else {
        concentration::spectral_norm_tail(
            &ConcentrationProfile::bernoulli_adjacency(),
            dim,
            dim,
            1.0,
            true,
        )?
    };

    let noise = match e_norm {
        NormArg::Analytic => NoiseNormEstimate::analytic(norm_tail.threshold)?,
        NormArg::Plugin => {
            if is_spike {
                return Err(Error::InvalidParameter(
                    "the degree plug-in norm applies to graph models only".into(),
                ));
            }
            let p = spec.build_probability_matrix()?;
            NoiseNormEstimate::plug_in(concentration::lu_peng_spectral_bound(
                p.max_expected_degree(),
            ))?
        }
        NormArg::Empirical => {
            let mut rng = SeedFamily::new(seed).stream(0);
            let value = if is_spike {
                let (_, e) = spike_model_matrices(&spec.as_spike_spec()?, &mut rng);
                spectral::singular_values(&e).max().unwrap_or(0.0)
            } else {
                let p = spec.build_probability_matrix()?;
                let a = sample_adjacency(&p, &mut rng);
                let e = a.entries() - p.entries();
                spectral::spectral_norm_symmetric(&e)?
            };
            NoiseNormEstimate::empirical(value)?
        }
    };

    let bounds: Vec<DeviationBound> = (1..=local.d())
        .map(|k| {
            if is_spike {
                sv_deviation_bound(k, &local, t, &noise, &ConcentrationProfile::gaussian())
            } else {
                deviation_bound(k, &local, t, &noise)
            }
        })
        .collect::<Result<_, _>>()?;
    let unconditional_bounds = match e_norm {
        NormArg::Analytic => Some(
            bounds
                .iter()
                .map(|b| unconditional_bound(b, &norm_tail))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        _ => None,
    };

    let document = Document {
        version: VERSION,
        command: "bound",
        config: BoundConfig {
            spec: &spec,
            window,
            t,
            e_norm,
            seed,
        },
        result: BoundResult {
            d: local.d(),
            noise,
            bounds,
            unconditional_bounds,
        },
    };
    emit(serde_json::to_string_pretty(&document)?, out)
}

#[derive(Serialize)]
struct Table1Config {
    p: f64,
    q: f64,
    target_prob: f64,
    sizes: Vec<usize>,
}

fn cmd_table1(
    p: f64,
    q: f64,
    target_prob: f64,
    sizes: &[usize],
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), Error> {
    let rows = table1(sizes, p, q, target_prob)?;
    match format {
        Format::Csv => {
            let mut text = String::from("n,epsilon_n_weyl_lu_peng,epsilon_n_kato_temple\n");
            for row in &rows {
                text.push_str(&format!(
                    "{},{:.6},{:.6}\n",
                    row.n, row.weyl_lu_peng, row.kato_temple
                ));
            }
            emit(text, out)
        }
        Format::Json => {
            let document = Document {
                version: VERSION,
                command: "table1",
                config: Table1Config {
                    p,
                    q,
                    target_prob,
                    sizes: sizes.to_vec(),
                },
                result: rows,
            };
            emit(serde_json::to_string_pretty(&document)?, out)
        }
    }
}

#[derive(Serialize)]
struct ValidateConfig<'a> {
    spec: &'a ModelSpec,
    window: SpectralWindow,
    t: f64,
    replicates: usize,
    seed: u64,
    e_norm: NormArg,
}

#[allow(clippy::too_many_arguments)]
fn cmd_validate(
    spec_text: &str,
    window_text: &str,
    t: f64,
    replicates: usize,
    seed: u64,
    e_norm: NormArg,
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), Error> {
    require_json(format, "validate")?;
    let spec = load_spec(spec_text)?;
    let window = parse_window(window_text)?;
    let model = spec.as_block_model()?;
    let norm = match e_norm {
        NormArg::Empirical => NormChoice::Empirical,
        NormArg::Analytic => NormChoice::Analytic(3.0 * (model.n() as f64).sqrt()),
        NormArg::Plugin => {
            let p = katobound::models::sbm_probability_matrix(&model)?;
            NormChoice::PlugIn(concentration::lu_peng_spectral_bound(p.max_expected_degree()))
        }
    };
    let report = run_coverage(&CoverageConfig {
        model,
        window,
        t,
        replicates,
        seeds: SeedFamily::new(seed),
        norm,
    })?;
    let document = Document {
        version: VERSION,
        command: "validate",
        config: ValidateConfig {
            spec: &spec,
            window,
            t,
            replicates,
            seed,
            e_norm,
        },
        result: report,
    };
    emit(serde_json::to_string_pretty(&document)?, out)
}

#[derive(Serialize)]
struct ChangepointConfig {
    n: usize,
    m: usize,
    p: f64,
    eps: f64,
    statistic: StatisticArg,
    level: f64,
    rule: RuleArg,
    calibration: usize,
    coefficient: f64,
    replicates: usize,
    seed: u64,
}

fn cmd_changepoint(
    config: ChangepointConfig,
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), Error> {
    require_json(format, "changepoint")?;
    let spec = ChangePointSpec::new(config.n, config.m, config.p, config.eps, 2, 2)?;
    let power_statistic = match config.statistic {
        StatisticArg::T2 => PowerStatistic::Edges,
        StatisticArg::T3 => PowerStatistic::Triangles,
        StatisticArg::MaxDegree => PowerStatistic::MaxDegree,
        StatisticArg::Scan => PowerStatistic::Scan,
        StatisticArg::ModifiedScan => PowerStatistic::ModifiedScan,
        StatisticArg::LambdaM => PowerStatistic::LocalEigenvalue,
    };
    let threshold_rule = match config.rule {
        RuleArg::Gaussian => ThresholdRule::GaussianQuantile {
            level: config.level,
        },
        RuleArg::Empirical => ThresholdRule::EmpiricalNullQuantile {
            level: config.level,
            calibration_replicates: config.calibration,
        },
        RuleArg::SqrtMLogN => ThresholdRule::SqrtMLogN {
            coefficient: config.coefficient,
        },
        RuleArg::Auto => match power_statistic {
            PowerStatistic::Edges | PowerStatistic::Triangles => ThresholdRule::GaussianQuantile {
                level: config.level,
            },
            PowerStatistic::LocalEigenvalue => ThresholdRule::SqrtMLogN {
                coefficient: config.coefficient,
            },
            _ => ThresholdRule::EmpiricalNullQuantile {
                level: config.level,
                calibration_replicates: config.calibration,
            },
        },
    };
    let report = changepoint_power(
        &spec,
        power_statistic,
        threshold_rule,
        config.replicates,
        SeedFamily::new(config.seed),
    )?;
    let document = Document {
        version: VERSION,
        command: "changepoint",
        config,
        result: report,
    };
    emit(serde_json::to_string_pretty(&document)?, out)
}
