//! `mfgc`: solve, verify and validate congestion mean-field games.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info, warn};
use mfg_congestion::continuation::{solve_path, PathRecord};
use mfg_congestion::estimates::{run_all, EstimateRecord, EstimateReport, Refined};
use mfg_congestion::io::{
    legendre_report, plot_columns, read_field, write_atomic, write_field, ReportFormat, RunConfig,
};
use mfg_congestion::mc;
use mfg_congestion::system::{residual_full, MfgProblem, SolutionPair};
use mfg_congestion::MfgError;

const EXIT_CHECK: u8 = 1;
const EXIT_HORIZON: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "mfgc", version, about = "Congestion mean-field game solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the Monte-Carlo and sampling stages.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Continue from the explicit solution to the target problem.
    Solve,
    /// Run the estimate checks on stored fields.
    Check {
        #[arg(long)]
        u: Option<PathBuf>,
        #[arg(long)]
        m: Option<PathBuf>,
    },
    /// Compare stored densities with a particle simulation.
    Mc {
        #[arg(long)]
        u: Option<PathBuf>,
        #[arg(long)]
        m: Option<PathBuf>,
    },
    /// Tabulate the Legendre duality and growth checks.
    Legendre,
}

/// Outcome of a subcommand other than success.
enum Failure {
    Check(String),
    Horizon(String),
    Usage(String),
}

impl From<MfgError> for Failure {
    fn from(e: MfgError) -> Self {
        match e {
            MfgError::Config { .. }
            | MfgError::Io(_)
            | MfgError::FieldFile(_)
            | MfgError::GridMismatch(_)
            | MfgError::InvalidGrid(_) => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .format_timestamp(None)
        .format_target(false)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            error!("check failed: {m}");
            ExitCode::from(EXIT_CHECK)
        }
        Err(Failure::Horizon(m)) => {
            error!("horizon failure: {m}");
            ExitCode::from(EXIT_HORIZON)
        }
        Err(Failure::Usage(m)) => {
            error!("{m}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::reference(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
        cfg.estimates.samples.seed = seed;
        cfg.legendre.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Outcome {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Solve => cmd_solve(&cfg),
        Command::Check { u, m } => cmd_check(&cfg, u.as_deref(), m.as_deref()),
        Command::Mc { u, m } => cmd_mc(&cfg, u.as_deref(), m.as_deref()),
        Command::Legendre => cmd_legendre(&cfg),
    }
}

fn write_text(cfg: &RunConfig, name: &str, text: &str) -> Result<(), Failure> {
    write_atomic(&cfg.output.dir.join(name), text.as_bytes())?;
    Ok(())
}

fn write_json<T: serde::Serialize>(cfg: &RunConfig, name: &str, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    write_text(cfg, name, &text)
}

fn write_report(cfg: &RunConfig, stem: &str, text: &str, json: &impl serde::Serialize) -> Result<(), Failure> {
    for f in &cfg.output.formats {
        match f {
            ReportFormat::Text => write_text(cfg, &format!("{stem}.txt"), text)?,
            ReportFormat::Json => write_json(cfg, &format!("{stem}.json"), json)?,
        }
    }
    Ok(())
}

fn write_pair(cfg: &RunConfig, suffix: &str, pair: &SolutionPair<f64>) -> Result<(), Failure> {
    let dir = &cfg.output.dir;
    write_field(&dir.join(format!("u{suffix}.bin")), "u", &pair.u)?;
    write_field(&dir.join(format!("m{suffix}.bin")), "m", &pair.m)?;
    if cfg.output.plot {
        write_text(cfg, &format!("u{suffix}.dat"), &plot_columns(&pair.u))?;
        write_text(cfg, &format!("m{suffix}.dat"), &plot_columns(&pair.m))?;
    }
    Ok(())
}

fn path_log(records: &[PathRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}

fn residual_record(problem: &MfgProblem<f64>, lambda: f64, pair: &SolutionPair<f64>, tol: f64) -> Result<EstimateRecord, Failure> {
    let data = problem.at_lambda(lambda)?;
    let r = residual_full(problem, &data, pair)?;
    let sup = r.sup_norm();
    Ok(EstimateRecord {
        name: "residual_certificate".into(),
        statement: "sup-norm of the discrete residual at the stored pair".into(),
        values: vec![("residual".into(), sup), ("lambda".into(), lambda)],
        policy: format!("residual <= {tol:.1e}"),
        passed: sup <= tol && !r.floor_active,
        location: None,
    })
}

fn cmd_solve(cfg: &RunConfig) -> Outcome {
    let problem = cfg.problem.build()?;
    let target = cfg.solver.target_lambda;
    let path = solve_path(&problem, &cfg.solver)?;
    write_text(cfg, "path.jsonl", &path_log(&path.records))?;
    let last = path.last();
    if let Some(f) = &path.failure {
        write_pair(cfg, "_last", &last.pair)?;
        return Err(Failure::Horizon(format!(
            "stopped at lambda={:.6} (last step {:.3e}): {}",
            f.lambda_reached, f.last_step, f.reason
        )));
    }
    // never report success without recomputing the certificate
    let tol = cfg.solver.newton_tol.max(1e-8);
    if !last.verify(&problem, tol)? {
        return Err(Failure::Check(format!("residual certificate above {tol:.1e} at lambda={}", last.lambda)));
    }
    info!("reached lambda={} residual={:.3e}", last.lambda, last.residual_norm);
    write_pair(cfg, "", &last.pair)?;

    let refined_problem;
    let refined_path;
    let refined = if cfg.estimates.refine_factor > 1 {
        refined_problem = cfg.problem.refined(cfg.estimates.refine_factor).build()?;
        refined_path = solve_path(&refined_problem, &cfg.solver)?;
        if let Some(f) = &refined_path.failure {
            warn!("refined solve stopped at lambda={}: {}", f.lambda_reached, f.reason);
            None
        } else {
            Some(Refined { problem: &refined_problem, pair: &refined_path.last().pair })
        }
    } else {
        None
    };
    let mut report = run_all(&last.pair, &problem, target, refined, &cfg.estimates.options())?;
    report.records.insert(0, residual_record(&problem, target, &last.pair, tol)?);
    finish_report(cfg, &report)
}

fn finish_report(cfg: &RunConfig, report: &EstimateReport) -> Outcome {
    let text = report.to_text();
    print!("{text}");
    write_report(cfg, "report", &text, report)?;
    if report.all_passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|r| r.name.as_str()).collect();
        Err(Failure::Check(format!("failing records: {}", names.join(", "))))
    }
}

fn load_pair(cfg: &RunConfig, problem: &MfgProblem<f64>, u: Option<&Path>, m: Option<&Path>) -> Result<SolutionPair<f64>, Failure> {
    let u_path = u.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.join("u.bin"));
    let m_path = m.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.join("m.bin"));
    let read = |p: &Path| {
        read_field(p).map_err(|e| match e {
            MfgError::Io(io) => Failure::Usage(format!("{}: {io}", p.display())),
            other => other.into(),
        })
    };
    let (_, u) = read(&u_path)?;
    let (_, m) = read(&m_path)?;
    for (name, f) in [("u", &u), ("m", &m)] {
        if f.grid() != problem.grid() || f.time() != problem.time() {
            return Err(Failure::Usage(format!("{name} does not match the configured grid")));
        }
    }
    Ok(SolutionPair::new(u, m)?)
}

fn cmd_check(cfg: &RunConfig, u: Option<&Path>, m: Option<&Path>) -> Outcome {
    let problem = cfg.problem.build()?.floored();
    let pair = load_pair(cfg, &problem, u, m)?;
    let lambda = cfg.solver.target_lambda;
    let tol = cfg.solver.newton_tol.max(1e-8);
    let mut report = run_all(&pair, &problem, lambda, None, &cfg.estimates.options())?;
    report.records.insert(0, residual_record(&problem, lambda, &pair, tol)?);
    finish_report(cfg, &report)
}

fn cmd_mc(cfg: &RunConfig, u: Option<&Path>, m: Option<&Path>) -> Outcome {
    let problem = cfg.problem.build()?;
    let pair = load_pair(cfg, &problem, u, m)?;
    let (emp, report) = mc::compare(&problem, cfg.solver.target_lambda, &pair, &cfg.mc)?;
    write_field(&cfg.output.dir.join("m_mc.bin"), "m_mc", &emp)?;
    if cfg.output.plot {
        write_text(cfg, "m_mc.dat", &plot_columns(&emp))?;
    }
    let text = report.to_text();
    print!("{text}");
    write_report(cfg, "mc_report", &text, &report)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!("max L1 distance {:.3e} above {:.1e}", report.max_l1, report.l1_tolerance)))
    }
}

fn cmd_legendre(cfg: &RunConfig) -> Outcome {
    let report = legendre_report(&cfg.legendre)?;
    let text = report.to_text();
    print!("{text}");
    write_report(cfg, "legendre", &text, &report)?;
    if let Some(e) = &report.error {
        warn!("{e}");
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check("Legendre oracle outside tolerance".into()))
    }
}
