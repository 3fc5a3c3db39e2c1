//! cwlo: exact and asymptotic Curie-Weiss concentration bounds.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 usage, 3 numeric failure,
//! 4 IO. Single results print as JSON with sorted keys and shortest
//! round-trip decimals, so identical invocations are byte-identical.

use clap::{Args, Parser, Subcommand};
use cwlo::model::{self, ModelParams};
use cwlo::scan::{Quantity, ScanFormat, ScanSpec};
use cwlo::{exact, series, verify, Error, Result};
use serde::Deserialize;
use serde_json::json;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "cwlo",
    version,
    about = "Curie-Weiss Littlewood-Offord concentration bounds"
)]
struct Cli {
    /// JSON file with default flag values (flags given on the command line win).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact finite-n quantities: z, qnplus, qn, pn.
    Exact(ExactArgs),
    /// Leading asymptotic constant and power for Qn+.
    Asymptotic(ParamArgs),
    /// Mean-field fixed point z* and tilt t*.
    Meanfield(ParamArgs),
    /// Expansion ladder coefficients for one quantity.
    Coeffs(CoeffsArgs),
    /// Sweep a parameter grid to CSV or JSON.
    Scan(ScanArgs),
    /// Run a self-check suite.
    Verify(VerifyArgs),
}

#[derive(Args, Default)]
struct ParamArgs {
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Args, Default)]
struct ExactArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n: Option<u64>,
    /// One of: z, qnplus, qn, pn.
    #[arg(long)]
    quantity: Option<String>,
}

#[derive(Args, Default)]
struct CoeffsArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Ladder to expand: z, o, qn, qnplus.
    #[arg(long)]
    kind: Option<String>,
    /// Highest order index; defaults to the validated maximum for the kind.
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Args, Default)]
struct ScanArgs {
    #[arg(long, value_delimiter = ',')]
    d_list: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    beta_list: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    h_list: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<u64>,
    /// Comma-separated subset of: z, qnplus, qn, pn, coeffs, asymptotic.
    #[arg(long, value_delimiter = ',')]
    quantities: Vec<String>,
    #[arg(long)]
    output: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Default)]
struct VerifyArgs {
    /// One of: meanfield, bruteforce, quadrature, coefficients, mixture, graphs, all.
    #[arg(long)]
    suite: Option<String>,
}

/// Optional config file: a flat JSON object whose keys mirror the flag names
/// of every subcommand. Explicit flags always win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    d: Option<u32>,
    beta: Option<f64>,
    h: Option<f64>,
    n: Option<u64>,
    quantity: Option<String>,
    kind: Option<String>,
    order: Option<usize>,
    suite: Option<String>,
    d_list: Option<Vec<u32>>,
    beta_list: Option<Vec<f64>>,
    h_list: Option<Vec<f64>>,
    n_list: Option<Vec<u64>>,
    quantities: Option<Vec<String>>,
    output: Option<String>,
    format: Option<String>,
}

fn load_config(path: Option<&PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidParams(format!("missing --{flag} (flag or config)")))
}

fn resolve_params(args: &ParamArgs, cfg: &FileConfig) -> Result<ModelParams> {
    let d = require(args.d.or(cfg.d), "d")?;
    let beta = require(args.beta.or(cfg.beta), "beta")?;
    let h = args.h.or(cfg.h).unwrap_or(0.0);
    ModelParams::new(d, beta, h)
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    // Through Value: object keys are sorted, floats shortest round-trip.
    let value = serde_json::to_value(v)?;
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn concentration_record(
    p: &ModelParams,
    n: u64,
    quantity: &str,
    r: &exact::ConcentrationResult,
) -> serde_json::Value {
    json!({
        "d": p.d, "beta": p.beta, "h": p.h, "n": n, "quantity": quantity,
        "probability": r.probability,
        "log_numerator": r.log_numerator,
        "log_denominator": r.log_denominator,
        "attaining_indices": r.attaining_indices,
    })
}

fn cmd_exact(args: &ExactArgs, cfg: &FileConfig) -> Result<()> {
    let p = resolve_params(&args.params, cfg)?;
    let n = require(args.n.or(cfg.n), "n")?;
    let quantity = require(
        args.quantity.clone().or_else(|| cfg.quantity.clone()),
        "quantity",
    )?;
    let record = match quantity.as_str() {
        "z" => {
            let lv = exact::log_partition(&p, n)?;
            json!({
                "d": p.d, "beta": p.beta, "h": p.h, "n": n, "quantity": "z",
                "log_value": lv.log_value,
                "reduced_log_value": exact::reduced_log_partition(&p, n)?,
            })
        }
        "qnplus" => concentration_record(&p, n, "qnplus", &exact::qn_plus_exact(&p, n)?),
        "qn" if n % 2 == 0 => concentration_record(&p, n, "qn", &exact::qn_even_exact(&p, n)?),
        // Odd n: Q_n has no balanced split; report the two-sided bracket.
        "qn" => {
            let (lower, upper) = exact::qn_bounds(&p, n)?;
            json!({
                "d": p.d, "beta": p.beta, "h": p.h, "n": n, "quantity": "qn",
                "parity": "odd",
                "lower_bound": lower,
                "upper_bound": upper,
            })
        }
        "pn" => concentration_record(&p, n, "pn", &exact::pn_odd_exact(&p, n)?),
        other => {
            return Err(Error::InvalidParams(format!(
                "unknown quantity {other:?}; expected z, qnplus, qn or pn"
            )))
        }
    };
    print_json(&record)
}

fn cmd_asymptotic(args: &ParamArgs, cfg: &FileConfig) -> Result<()> {
    let p = resolve_params(args, cfg)?;
    let asym = series::qn_plus_asymptotic(&p)?;
    print_json(&json!({
        "d": p.d, "beta": p.beta, "h": p.h,
        "regime": asym.regime,
        "constant": asym.values[0],
        "power": asym.powers[0],
    }))
}

fn cmd_meanfield(args: &ParamArgs, cfg: &FileConfig) -> Result<()> {
    let p = resolve_params(args, cfg)?;
    let sol = model::solve_mean_field_default(&p)?;
    let phi_star = model::phi(&p, sol.t_star)?;
    print_json(&json!({
        "d": p.d, "beta": p.beta, "h": p.h,
        "beta_c": p.beta_critical(),
        "regime": p.regime(),
        "z_star": sol.z_star,
        "t_star": sol.t_star,
        "residual": sol.residual,
        "all_solutions": sol.all_solutions,
        "ln2_plus_phi_star": std::f64::consts::LN_2 + phi_star,
    }))
}

fn cmd_coeffs(args: &CoeffsArgs, cfg: &FileConfig) -> Result<()> {
    let p = resolve_params(&args.params, cfg)?;
    let kind = require(args.kind.clone().or_else(|| cfg.kind.clone()), "kind")?;
    let order = args.order.or(cfg.order);
    let coeffs = match kind.as_str() {
        "z" => series::e_coeffs(&p, order.unwrap_or(series::E_ORDER_MAX))?,
        "o" => series::gamma_coeffs(&p, order.unwrap_or(series::GAMMA_ORDER_MAX))?,
        "qn" => series::qn_coeffs(&p, order.unwrap_or(series::QN_ORDER_MAX))?,
        "qnplus" => series::qn_plus_asymptotic(&p)?,
        other => {
            return Err(Error::InvalidParams(format!(
                "unknown kind {other:?}; expected z, o, qn or qnplus"
            )))
        }
    };
    print_json(&coeffs)
}

fn pick_list<T: Clone>(flag: &[T], file: &Option<Vec<T>>) -> Vec<T> {
    if flag.is_empty() {
        file.clone().unwrap_or_default()
    } else {
        flag.to_vec()
    }
}

fn cmd_scan(args: &ScanArgs, cfg: &FileConfig) -> Result<()> {
    let quantity_names = if args.quantities.is_empty() {
        cfg.quantities.clone().unwrap_or_default()
    } else {
        args.quantities.clone()
    };
    let quantities = quantity_names
        .iter()
        .map(|s| Quantity::parse(s))
        .collect::<Result<Vec<_>>>()?;
    let format = match args
        .format
        .clone()
        .or_else(|| cfg.format.clone())
        .unwrap_or_else(|| "csv".into())
        .as_str()
    {
        "csv" => ScanFormat::Csv,
        "json" => ScanFormat::Json,
        other => {
            return Err(Error::InvalidParams(format!(
                "unknown format {other:?}; expected csv or json"
            )))
        }
    };
    let spec = ScanSpec {
        d_list: pick_list(&args.d_list, &cfg.d_list),
        beta_list: pick_list(&args.beta_list, &cfg.beta_list),
        h_list: pick_list(&args.h_list, &cfg.h_list),
        n_list: pick_list(&args.n_list, &cfg.n_list),
        quantities,
        output_path: require(args.output.clone().or_else(|| cfg.output.clone()), "output")?,
        format,
    };
    let rows = cwlo::scan::run_to_file(&spec)?;
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    print_json(&json!({
        "output": spec.output_path,
        "rows": rows.len(),
        "failures": failures,
    }))
}

fn cmd_verify(args: &VerifyArgs, cfg: &FileConfig) -> Result<bool> {
    let suite = require(args.suite.clone().or_else(|| cfg.suite.clone()), "suite")?;
    let report = verify::run_suite(&suite)?;
    print_json(&report)?;
    eprintln!("{}", report.summary());
    for line in report.failures() {
        eprintln!("  {line}");
    }
    Ok(report.pass)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 4,
        Error::InvalidParams(_)
        | Error::ZeroBeta(_)
        | Error::Parity(_)
        | Error::Budget(_)
        | Error::OrderRange(_)
        | Error::NonUnimodal
        | Error::Serde(_) => 2,
        Error::Domain(_) | Error::Solver(_) | Error::Quadrature(_) => 3,
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli.config.as_ref())?;
    match &cli.command {
        Command::Exact(a) => cmd_exact(a, &cfg).map(|_| true),
        Command::Asymptotic(a) => cmd_asymptotic(a, &cfg).map(|_| true),
        Command::Meanfield(a) => cmd_meanfield(a, &cfg).map(|_| true),
        Command::Coeffs(a) => cmd_coeffs(a, &cfg).map(|_| true),
        Command::Scan(a) => cmd_scan(a, &cfg).map(|_| true),
        Command::Verify(a) => cmd_verify(a, &cfg),
    }
}

fn main() {
    if let Ok(s) = std::env::var("CW_LO_THREADS") {
        match s.trim().parse::<usize>() {
            Ok(k) if k >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
            _ => {
                eprintln!("error: CW_LO_THREADS must be a positive integer, got {s:?}");
                std::process::exit(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
