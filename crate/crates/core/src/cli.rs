//! Command-line front end. Exit status 0 means success (or a Proved
//! verdict, or every check passing), 1 a failed verdict or check, 2 a usage
//! or input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::certificates::{self, CertificateReport};
use crate::closed_form;
use crate::geometry::{load_configuration, Configuration, Point2, EPS};
use crate::objective::{self, ObjectiveOptions, ObjectiveValue};
use crate::oracle::{self, OracleValues};
use crate::proof::{self, RunOptions, SweepParams, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable holding the default worker count for `prove`.
pub const WORKERS_ENV: &str = "SIGMA_MINMAX_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "sigma-minmax", version, about = "Certified min-max computations for density-threshold bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zero- and one-generation min-max values at SIGMA.
    ClosedForm {
        sigma: f64,
        #[arg(long)]
        json: bool,
    },
    /// The cubic thresholds and their residuals.
    Roots {
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a maximum on a configuration file.
    Eval {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Which::Full)]
        which: Which,
        /// Only subsets containing the last TAIL points (sharp branch).
        #[arg(long, default_value_t = 0)]
        tail: usize,
        /// Skip singleton subsets, as the sweep does.
        #[arg(long)]
        parity: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run a built-in certificate (or `all`, or `interval_set`).
    Certify {
        #[arg(default_value = "all")]
        name: String,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Dangerous-children nets around a cube centre.
    Net {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p1: Point2,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p2: Point2,
        #[arg(long, default_value_t = 0.7)]
        sigma: f64,
        #[arg(long, default_value_t = 0.008)]
        delta: f64,
        #[arg(long, default_value_t = 0.03)]
        delta1: f64,
        /// Threshold on M♯ (default √2·δ).
        #[arg(long, allow_hyphen_values = true)]
        m: Option<f64>,
        /// Search radius (default 1 + δ/√2).
        #[arg(long)]
        r: Option<f64>,
        /// Also run S1/S2/S3 on the cube.
        #[arg(long)]
        dispose: bool,
        #[arg(long)]
        json: bool,
    },
    /// Sweep the discretized parameter region.
    Prove(ProveArgs),
    /// Compare LP maxima with an exhaustive grid search (at most 3 points).
    Oracle {
        config: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Sharp,
    Flat,
    BarFlat,
    Full,
}

#[derive(Debug, clap::Args)]
pub struct ProveArgs {
    #[arg(long, default_value_t = 0.7)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.008)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.03)]
    pub s3_delta: f64,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Number of shuffled cubes to process.
    #[arg(long, default_value_t = 1000, conflicts_with = "full")]
    pub sample: usize,
    /// Process every cube (days of CPU time at the default δ).
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Discard an existing checkpoint instead of resuming it.
    #[arg(long)]
    pub restart: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Enumerate every subset in the five-point compatibility test.
    #[arg(long)]
    pub exact_subsets: bool,
    /// Stop after this many new cubes (verdict Incomplete).
    #[arg(long)]
    pub stop_after: Option<usize>,
    #[arg(long)]
    pub quiet: bool,
}

fn parse_point(s: &str) -> Result<Point2, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok(Point2::new(parse(x)?, parse(y)?))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

type CmdResult = Result<i32, String>;

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::ClosedForm { sigma, json } => closed_form_cmd(sigma, json),
        Command::Roots { json } => roots_cmd(json),
        Command::Eval { config, which, tail, parity, json } => eval_cmd(&config, which, tail, parity, json),
        Command::Certify { name, report, json } => certify_cmd(&name, report.as_deref(), json),
        Command::Net { p1, p2, sigma, delta, delta1, m, r, dispose, json } => {
            let params = SweepParams { sigma, delta, ..SweepParams::default() };
            net_cmd(&params, p1, p2, delta1, m, r, dispose, json)
        }
        Command::Prove(args) => prove_cmd(&args),
        Command::Oracle { config, step, json } => oracle_cmd(&config, step, json),
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn write_report<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, text + "\n").map_err(|e| format!("writing {}: {e}", path.display()))
}

#[derive(Serialize)]
struct ClosedFormOut {
    sigma: f64,
    zero_generation: f64,
    one_generation: Option<f64>,
    one_generation_minimizer: Option<closed_form::TriangleParams>,
}

fn closed_form_cmd(sigma: f64, json: bool) -> CmdResult {
    let zero = closed_form::zero_gen_minmax(sigma).map_err(|e| e.to_string())?;
    let one = closed_form::one_gen_minmax(sigma).ok();
    let minimizer = closed_form::one_gen_minimizer(sigma).ok();
    if json {
        print_json(&ClosedFormOut { sigma, zero_generation: zero, one_generation: one, one_generation_minimizer: minimizer });
        return Ok(EXIT_OK);
    }
    println!("{zero}");
    match (one, minimizer) {
        (Some(v), Some(t)) => println!("one-generation: {v} at D={}, d1={}, d2={}", t.d, t.d1, t.d2),
        _ => println!("one-generation: n/a (sigma outside (1/2, 3/4])"),
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Root {
    name: &'static str,
    value: f64,
    residual: Option<f64>,
}

fn roots_cmd(json: bool) -> CmdResult {
    let pt = closed_form::sigma_pt();
    let lower = closed_form::sigma_lower();
    let roots = [
        Root { name: "sigma_pt", value: pt, residual: Some(closed_form::pt_cubic(pt)) },
        Root { name: "sigma_lower", value: lower, residual: Some(closed_form::lower_cubic(lower)) },
        Root { name: "sigma_b", value: closed_form::sigma_b(), residual: None },
    ];
    if json {
        print_json(&roots);
    } else {
        for r in &roots {
            match r.residual {
                Some(res) => println!("{:<12} {:.15}  residual {res:+.3e}", r.name, r.value),
                None => println!("{:<12} {:.15}", r.name, r.value),
            }
        }
    }
    Ok(EXIT_OK)
}

fn load(path: &Path) -> Result<Configuration, String> {
    load_configuration(path).map_err(|e| e.to_string())
}

fn eval_cmd(path: &Path, which: Which, tail: usize, parity: bool, json: bool) -> CmdResult {
    let cfg = load(path)?;
    let opts = if parity { ObjectiveOptions::pipeline_parity() } else { ObjectiveOptions::default() };
    let err = |e: objective::ObjectiveError| e.to_string();
    let value: Option<ObjectiveValue> = match which {
        Which::Sharp => objective::m_sharp_with(&cfg, tail, opts).map_err(err)?,
        Which::Flat => Some(objective::m_flat_with(&cfg, opts).map_err(err)?),
        Which::BarFlat => objective::bar_m_flat_with(&cfg, opts).map_err(err)?,
        Which::Full => Some(objective::m_sigma_with(&cfg, opts).map_err(err)?),
    };
    if json {
        print_json(&value);
    } else {
        match &value {
            Some(v) => {
                println!("{:.12}", v.value);
                println!("branch: {:?}", v.branch);
                let radii: Vec<String> = v.witness.as_slice().iter().map(|r| format!("{r:.9}")).collect();
                println!("witness: [{}]", radii.join(", "));
            }
            None => println!("no feasible candidate"),
        }
    }
    Ok(EXIT_OK)
}

fn certify_cmd(name: &str, report: Option<&Path>, json: bool) -> CmdResult {
    let reports: Vec<CertificateReport> = if name == "all" {
        certificates::certify_all().map_err(|e| e.to_string())?
    } else {
        vec![certificates::certify(name).map_err(|e| e.to_string())?]
    };
    if let Some(path) = report {
        write_report(path, &reports)?;
    }
    if json {
        print_json(&reports);
    } else {
        for r in &reports {
            print!("{}", r.render());
        }
    }
    Ok(if reports.iter().all(|r| r.overall) { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct NetOut {
    delta1: f64,
    r: f64,
    m: f64,
    lattice_disk: usize,
    x1: Vec<Point2>,
    x2: Vec<Point2>,
    x1_diameter: f64,
    x2_diameter: f64,
    disposed_by: Option<proof::Disposition>,
}

#[allow(clippy::too_many_arguments)]
fn net_cmd(
    params: &SweepParams,
    p1: Point2,
    p2: Point2,
    delta1: f64,
    m: Option<f64>,
    r: Option<f64>,
    dispose: bool,
    json: bool,
) -> CmdResult {
    params.validate().map_err(|e| e.to_string())?;
    if delta1.is_nan() || delta1 <= 0.0 {
        return Err("delta1 must be positive".into());
    }
    let (m, r) = (m.unwrap_or(params.m_delta()), r.unwrap_or(params.r_delta()));
    let x1 = proof::x_net(params, delta1, p1, p2, r, m);
    let x2 = proof::x_net(params, delta1, p2, p1, r, m);
    let out = NetOut {
        delta1,
        r,
        m,
        lattice_disk: proof::x_lattice_disk_count(params, delta1, r),
        x1_diameter: proof::compute_diameter(&x1, params.eps),
        x2_diameter: proof::compute_diameter(&x2, params.eps),
        x1,
        x2,
        disposed_by: dispose.then(|| proof::dispose(params, p1, p2)),
    };
    if json {
        print_json(&out);
    } else {
        println!("lattice points in disk: {}", out.lattice_disk);
        println!("X(p1, p2): {} points, diameter bound {:.6}", out.x1.len(), out.x1_diameter);
        println!("X(p2, p1): {} points, diameter bound {:.6}", out.x2.len(), out.x2_diameter);
        if let Some(d) = out.disposed_by {
            println!("disposed by: {d}");
        }
    }
    Ok(match out.disposed_by {
        Some(proof::Disposition::Failed) => EXIT_FAILED,
        _ => EXIT_OK,
    })
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn prove_cmd(args: &ProveArgs) -> CmdResult {
    let params = SweepParams {
        sigma: args.sigma,
        delta: args.delta,
        s3_delta: args.s3_delta,
        seed: args.seed,
        sample: if args.full { None } else { Some(args.sample) },
        exact_subsets: args.exact_subsets,
        ..SweepParams::default()
    };
    let workers = args.workers.unwrap_or_else(default_workers).max(1);
    let opts = RunOptions {
        workers,
        checkpoint: args.checkpoint.clone(),
        restart: args.restart,
        stop_after: args.stop_after,
        progress: !args.quiet,
    };
    let started = Instant::now();
    let report = proof::run_sweep_with(&params, &opts).map_err(|e| e.to_string())?;
    if let Some(path) = &args.report {
        write_report(path, &report)?;
    }
    if !args.quiet {
        println!("cubes: {} total, {} selected, {} processed ({} resumed)", report.total_cubes, report.selected, report.processed, report.resumed);
        let s2: Vec<String> = report.counts.s2.iter().map(|(k, v)| format!("{k}: {v}")).collect();
        println!(
            "S1: {}  S2: {} ({})  S3: {}  failed: {}",
            report.counts.s1,
            report.counts.s2_total(),
            s2.join(", "),
            report.counts.s3,
            report.counts.failed
        );
        for c in &report.failed_cubes {
            println!("failed cube {} at p1={} p2={}", c.cube, c.p1, c.p2);
        }
        println!("verdict: {:?} ({workers} workers, {:.1?})", report.verdict, started.elapsed());
    }
    Ok(if report.verdict == Verdict::Proved { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct OracleOut {
    grid: OracleValues,
    lp_sharp: Option<f64>,
    lp_flat: f64,
    lp_sigma: f64,
    tolerance: f64,
    agree: bool,
}

fn oracle_cmd(path: &Path, step: f64, json: bool) -> CmdResult {
    let cfg = load(path)?;
    let grid = oracle::grid_maxima(&cfg, step).map_err(|e| e.to_string())?;
    let err = |e: objective::ObjectiveError| e.to_string();
    let lp_sharp = objective::m_sharp(&cfg, 0).map_err(err)?.map(|v| v.value);
    let lp_flat = objective::m_flat(&cfg).map_err(err)?.value;
    let lp_sigma = objective::m_sigma(&cfg).map_err(err)?.value;
    let tolerance = grid.tolerance(cfg.len()) + EPS;
    let near = |lp: f64, g: f64| (lp - g).abs() <= tolerance;
    let agree = lp_sharp.is_some_and(|s| near(s, grid.sharp)) && near(lp_flat, grid.flat) && near(lp_sigma, grid.sigma);
    let out = OracleOut { grid, lp_sharp, lp_flat, lp_sigma, tolerance, agree };
    if json {
        print_json(&out);
    } else {
        println!("{:<8} {:>16} {:>16}", "", "grid", "lp");
        println!("{:<8} {:>16.9} {:>16.9}", "sharp", grid.sharp, lp_sharp.unwrap_or(f64::NAN));
        println!("{:<8} {:>16.9} {:>16.9}", "flat", grid.flat, lp_flat);
        println!("{:<8} {:>16.9} {:>16.9}", "sigma", grid.sigma, lp_sigma);
        println!("{} within {tolerance:e}", if agree { "agree" } else { "DISAGREE" });
    }
    Ok(if agree { EXIT_OK } else { EXIT_FAILED })
}
