//! Command-line front end: model ingestion, computation dispatch, and
//! machine-readable table/figure reproduction.
//!
//! Exit codes: 0 success, 1 validation problems, 2 numerical failures,
//! 3 resource caps. Errors are reported as a single JSON line on stderr.

mod model;
mod output;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hmpzeta::exact::{self, Case1Params, Case2Params};
use hmpzeta::zeta::WarningThresholds;
use hmpzeta::{genfun, oracle, orbits, zeta, Error, HmpModel, Result};

use model::load_model;
use output::{emit, fmt_sig, json_object, Csv};

#[derive(Parser)]
#[command(
    name = "hmpzeta",
    about = "Entropy rates, moment-generating functions and rate functions of \
             hidden Markov processes via cycle expansion of the inverse zeta-function",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy rate by cycle expansion, with the entropy bound bracket.
    Entropy {
        #[arg(long)]
        model: PathBuf,
        /// Truncation order (default 13 for binary alphabets, 8 for ternary).
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Convergence warning threshold on eigenvalue ratios.
        #[arg(long, default_value_t = 0.9)]
        warn_threshold: f64,
    },
    /// Coefficients of the truncated inverse zeta-function with their
    /// n-derivatives.
    Zeta {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        order: Option<usize>,
        /// Exponent at which the coefficients are evaluated.
        #[arg(long, default_value_t = 1.0)]
        n: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Chernoff rate functions f(eta) and g(eta).
    Rates {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        eta_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Search cap for the g maximization over n > 1.
        #[arg(long, default_value_t = genfun::DEFAULT_G_CAP)]
        n_cap: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Closed-form results for the exactly solvable families.
    Exact {
        /// One of: 1, 2, bsc-smallnoise.
        #[arg(long)]
        case: String,
        #[arg(long)]
        p1: Option<f64>,
        #[arg(long)]
        p2: Option<f64>,
        #[arg(long)]
        q1: Option<f64>,
        #[arg(long)]
        q2: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Entropy bound bracket (conditional entropies from below and above).
    Bounds {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Brute-force and Monte Carlo ground-truth machinery.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Canonical aperiodic necklaces, one word per line, grouped by length.
    Necklaces {
        #[arg(long)]
        alphabet: u8,
        #[arg(long)]
        max: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reproduce a reference table or figure data set.
    Reproduce {
        /// One of: table2, table3, table4, fig1, fig2, fig3, fig4.
        target: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Exact block entropies H(1)..H(N) by full enumeration.
    Block {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Entropy bound bracket.
    Bounds {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo entropy estimate from simulated sequences.
    Mc {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn default_order(model: &HmpModel) -> usize {
    if model.alphabet_size() <= 2 {
        13
    } else {
        8
    }
}

fn warning_strings(model: &HmpModel, threshold: f64) -> Result<Vec<String>> {
    let thresholds = WarningThresholds {
        ratio: threshold,
        radius: threshold,
        ..WarningThresholds::default()
    };
    Ok(zeta::convergence_warnings(model, &thresholds)?
        .iter()
        .map(|w| w.to_string())
        .collect())
}

/// The bound bracket is emitted whenever the enumeration behind the upper
/// bound stays small.
fn bracket_available(model: &HmpModel) -> bool {
    model.num_states() * model.alphabet_size() as usize <= 64
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Entropy { model, order, format, output, warn_threshold } => {
            let (spec, m) = load_model(&model)?;
            let k = order.unwrap_or_else(|| default_order(&m));
            let est = zeta::entropy_cycle_expansion(&m, k)?;
            let bracket = if bracket_available(&m) {
                Some(oracle::entropy_bounds(&m)?)
            } else {
                None
            };
            let warnings = warning_strings(&m, warn_threshold)?;
            match format {
                Format::Csv => {
                    let mut csv = Csv::new(&[
                        "h", "lower", "upper", "order", "residual", "tail_ratio",
                    ]);
                    let (lo, up) = bracket.map_or((f64::NAN, f64::NAN), |b| b);
                    csv.row(vec![
                        fmt_sig(est.entropy),
                        fmt_sig(lo),
                        fmt_sig(up),
                        k.to_string(),
                        fmt_sig(est.residual_at_one),
                        fmt_sig(est.tail_ratio),
                    ]);
                    emit(&csv.render(), output.as_deref())?;
                    for w in &warnings {
                        eprintln!("warning: {w}");
                    }
                }
                Format::Json => {
                    let results = serde_json::json!({
                        "h": est.entropy,
                        "order": k,
                        "residual_at_one": est.residual_at_one,
                        "tail_ratio": est.tail_ratio,
                        "lower": bracket.map(|b| b.0),
                        "upper": bracket.map(|b| b.1),
                    });
                    emit(&json_object(spec.describe(), results, warnings), output.as_deref())?;
                }
            }
            Ok(())
        }
        Command::Zeta { model, order, n, output } => {
            if n <= 0.0 {
                return Err(Error::Validation(format!("n = {n} must be positive")));
            }
            let (_, m) = load_model(&model)?;
            let k = order.unwrap_or_else(|| default_order(&m));
            let weights = zeta::orbit_weights_to_order(&m, k)?;
            let poly = zeta::zeta_polynomial(&weights, n);
            let mut csv = Csv::new(&["k", "coefficient", "d_coefficient_dn"]);
            for j in 0..=k {
                let c = poly.coefficient(j);
                csv.row(vec![j.to_string(), fmt_sig(c.value), fmt_sig(c.deriv)]);
            }
            emit(&csv.render(), output.as_deref())
        }
        Command::Rates { model, order, eta_max, points, n_cap, output } => {
            if !(eta_max > 0.0 && eta_max < 1.0) {
                return Err(Error::Validation(format!("eta-max = {eta_max} outside (0,1)")));
            }
            if points < 2 {
                return Err(Error::Validation("need at least 2 eta points".into()));
            }
            let (_, m) = load_model(&model)?;
            let k = order.unwrap_or_else(|| default_order(&m));
            let est = zeta::entropy_cycle_expansion(&m, k)?;
            let track = genfun::lambda_of_n(&m, k, &genfun::default_n_grid(n_cap))?;
            let etas = genfun::uniform_grid(0.0, eta_max, points);
            let f = genfun::rate_function_f(&track, est.entropy, &etas)?;
            let g = genfun::rate_function_g(&track, est.entropy, &etas, n_cap)?;
            let mut csv = Csv::new(&["eta", "f", "g", "n_star_f", "n_star_g"]);
            for (pf, pg) in f.points.iter().zip(&g.points) {
                csv.row(vec![
                    fmt_sig(pf.eta),
                    fmt_sig(pf.rate),
                    fmt_sig(pg.rate),
                    fmt_sig(pf.n_star),
                    fmt_sig(pg.n_star),
                ]);
            }
            emit(&csv.render(), output.as_deref())?;
            for w in warning_strings(&m, 0.9)? {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::Exact { case, p1, p2, q1, q2, q, r, eps, output } => {
            let need = |name: &str, v: Option<f64>| -> Result<f64> {
                v.ok_or_else(|| Error::Validation(format!("--{name} is required for this case")))
            };
            match case.as_str() {
                "1" => {
                    let params = Case1Params::new(
                        need("p1", p1)?,
                        need("p2", p2)?,
                        need("q1", q1)?,
                        need("q2", q2)?,
                    )?;
                    let h = exact::exact_entropy_case1(&params)?;
                    let m = HmpModel::aggregated_case1(params.p1, params.p2, params.q1, params.q2)?;
                    let (lo, up) = oracle::entropy_bounds(&m)?;
                    let results = serde_json::json!({
                        "h": h, "lower": lo, "upper": up,
                    });
                    let inputs = serde_json::json!({
                        "case": "1", "p1": params.p1, "p2": params.p2,
                        "q1": params.q1, "q2": params.q2,
                    });
                    emit(&json_object(inputs, results, vec![]), output.as_deref())
                }
                "2" => {
                    let params = Case2Params::new(
                        need("p1", p1)?,
                        need("p2", p2)?,
                        need("q", q)?,
                        need("r", r)?,
                    )?;
                    let h = exact::exact_entropy_case2(&params);
                    let h_markov = exact::markov_entropy_case2(&params);
                    let m = HmpModel::aggregated_case2(params.p1, params.p2, params.q, params.r)?;
                    let (lo, up) = oracle::entropy_bounds(&m)?;
                    let results = serde_json::json!({
                        "h": h, "h_markov": h_markov, "lower": lo, "upper": up,
                    });
                    let inputs = serde_json::json!({
                        "case": "2", "p1": params.p1, "p2": params.p2,
                        "q": params.q, "r": params.r,
                    });
                    emit(&json_object(inputs, results, vec![]), output.as_deref())
                }
                "bsc-smallnoise" => {
                    let qv = need("q", q)?;
                    let ev = need("eps", eps)?;
                    let h = exact::small_noise_entropy(qv, ev)?;
                    let m = HmpModel::binary_symmetric(qv, ev)?;
                    let (lo, up) = oracle::entropy_bounds(&m)?;
                    let results = serde_json::json!({
                        "h": h, "lower": lo, "upper": up,
                    });
                    let inputs = serde_json::json!({
                        "case": "bsc-smallnoise", "q": qv, "eps": ev,
                    });
                    emit(&json_object(inputs, results, vec![]), output.as_deref())
                }
                other => Err(Error::Validation(format!(
                    "unknown case '{other}' (expected 1, 2 or bsc-smallnoise)"
                ))),
            }
        }
        Command::Bounds { model, output } => {
            let (_, m) = load_model(&model)?;
            let (lo, up) = oracle::entropy_bounds(&m)?;
            let mut csv = Csv::new(&["lower", "upper"]);
            csv.row(vec![fmt_sig(lo), fmt_sig(up)]);
            emit(&csv.render(), output.as_deref())
        }
        Command::Oracle { command } => match command {
            OracleCommand::Block { model, nmax, output } => {
                let (_, m) = load_model(&model)?;
                let table = oracle::block_entropies(&m, nmax)?;
                let mut csv = Csv::new(&["n", "block_entropy", "innovation", "per_step"]);
                for n in 1..=nmax {
                    csv.row(vec![
                        n.to_string(),
                        fmt_sig(table.block(n)),
                        fmt_sig(table.innovation(n)),
                        fmt_sig(table.per_step(n)),
                    ]);
                }
                emit(&csv.render(), output.as_deref())
            }
            OracleCommand::Bounds { model, output } => {
                let (_, m) = load_model(&model)?;
                let (lo, up) = oracle::entropy_bounds(&m)?;
                let mut csv = Csv::new(&["lower", "upper"]);
                csv.row(vec![fmt_sig(lo), fmt_sig(up)]);
                emit(&csv.render(), output.as_deref())
            }
            OracleCommand::Mc { model, n, samples, seed, output } => {
                let (_, m) = load_model(&model)?;
                let est = oracle::mc_entropy(&m, n, samples, seed)?;
                let mut csv = Csv::new(&["estimate", "stderr", "samples", "n", "seed"]);
                csv.row(vec![
                    fmt_sig(est.mean),
                    fmt_sig(est.stderr),
                    est.samples.to_string(),
                    n.to_string(),
                    seed.to_string(),
                ]);
                emit(&csv.render(), output.as_deref())
            }
        },
        Command::Necklaces { alphabet, max, output } => {
            let set = orbits::enumerate_orbits(alphabet, max)?;
            let mut text = String::new();
            for orbit in set.iter() {
                for &c in orbit.letters() {
                    text.push((b'0' + c) as char);
                }
                text.push('\n');
            }
            emit(&text, output.as_deref())
        }
        Command::Reproduce { target, output } => {
            let result = reproduce::run(&target)?;
            emit(&result.csv.render(), output.as_deref())?;
            for note in &result.notes {
                eprintln!("{note}");
            }
            Ok(())
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Validation(_) | Error::Dimension(_) | Error::Domain(_) | Error::Mixing(_) => 1,
        Error::Numerical(_) | Error::Tracking(_) | Error::Convergence(_) => 2,
        Error::Resource(_) => 3,
    }
}

fn error_class(err: &Error) -> &'static str {
    match err {
        Error::Validation(_) => "validation",
        Error::Dimension(_) => "dimension",
        Error::Domain(_) => "domain",
        Error::Mixing(_) => "mixing",
        Error::Numerical(_) => "numerical",
        Error::Tracking(_) => "tracking",
        Error::Convergence(_) => "convergence",
        Error::Resource(_) => "resource",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let line = serde_json::json!({
                "error": error_class(&err),
                "message": err.to_string(),
            });
            eprintln!("{line}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
