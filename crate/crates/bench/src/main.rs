//! Command-line front end.
//!
//! ```text
//! pipg solve <problem-file> --method pipg|admm|pipgeq|pdhg|pdhg-acc
//!            [--iters K] [--seed S] [--restart P] [--ref reference-file]
//!            [--out DIR]
//! pipg bench masses|quadrotor|toy [--trials N] [--iters K] [--restart P]
//!            [--seed S] [--out DIR]
//! pipg stack <ocp-file|masses|quadrotor> --out <problem-file>
//! pipg certify <problem-file> --out <reference-file>
//! ```
//!
//! `PIPG_OUT_DIR` overrides any `--out` directory. Exit codes: 0 success,
//! 1 usage error, 2 certificate failure, 3 solver error.

use pipg_bench::csv::{CsvField, CsvWriter};
use pipg_bench::experiment::{run_experiment, ExperimentConfig, Method, ProblemSource};
use pipg_bench::reference::{compute_reference, load_reference, save_reference};
use pipg_bench::BenchError;
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "usage:
  pipg solve <problem-file> --method pipg|admm|pipgeq|pdhg|pdhg-acc [--iters K] [--seed S] [--restart P] [--ref reference-file] [--out DIR]
  pipg bench masses|quadrotor|toy [--trials N] [--iters K] [--restart P] [--seed S] [--out DIR]
  pipg stack <ocp-file|masses|quadrotor> --out <problem-file>
  pipg certify <problem-file> --out <reference-file>

PIPG_OUT_DIR overrides --out. Exit codes: 0 ok, 1 usage, 2 certificate failure, 3 solver error.";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("{msg}\n\n{USAGE}");
            ExitCode::from(1)
        }
        Err(CliError::Certificate(msg)) => {
            eprintln!("certificate failure: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(3)
        }
    }
}

enum CliError {
    Usage(String),
    Certificate(String),
    Solver(String),
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Config(msg) => CliError::Usage(msg),
            BenchError::CertificateUnmet { .. } => CliError::Certificate(e.to_string()),
            BenchError::Io(msg) => CliError::Solver(msg),
            BenchError::Solver(msg) => CliError::Solver(msg),
        }
    }
}

struct Flags {
    positional: Vec<String>,
    iters: Option<usize>,
    seed: u64,
    trials: Option<usize>,
    restart: Option<usize>,
    out: Option<PathBuf>,
    method: Option<String>,
    reference: Option<PathBuf>,
}

fn parse_flags(args: &[String]) -> Result<Flags, CliError> {
    let mut flags = Flags {
        positional: Vec::new(),
        iters: None,
        seed: 0,
        trials: None,
        restart: None,
        out: None,
        method: None,
        reference: None,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut grab = |name: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("{name} needs a value")))
        };
        match arg.as_str() {
            "--iters" => flags.iters = Some(parse_num(&grab("--iters")?, "--iters")?),
            "--seed" => flags.seed = parse_num(&grab("--seed")?, "--seed")? as u64,
            "--trials" => flags.trials = Some(parse_num(&grab("--trials")?, "--trials")?),
            "--restart" => flags.restart = Some(parse_num(&grab("--restart")?, "--restart")?),
            "--out" => flags.out = Some(PathBuf::from(grab("--out")?)),
            "--method" => flags.method = Some(grab("--method")?),
            "--ref" => flags.reference = Some(PathBuf::from(grab("--ref")?)),
            "--help" | "-h" => return Err(CliError::Usage("".into())),
            other if other.starts_with("--") => {
                return Err(CliError::Usage(format!("unknown flag {other}")));
            }
            other => flags.positional.push(other.to_string()),
        }
    }
    Ok(flags)
}

fn parse_num(text: &str, flag: &str) -> Result<usize, CliError> {
    text.parse()
        .map_err(|_| CliError::Usage(format!("{flag} expects a nonnegative integer, got {text}")))
}

fn out_dir(flags: &Flags) -> PathBuf {
    if let Ok(dir) = std::env::var("PIPG_OUT_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    flags.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn dispatch(args: &[String]) -> Result<(), CliError> {
    let Some(command) = args.first() else {
        return Err(CliError::Usage("missing command".into()));
    };
    let flags = parse_flags(&args[1..])?;
    match command.as_str() {
        "solve" => cmd_solve(&flags),
        "bench" => cmd_bench(&flags),
        "stack" => cmd_stack(&flags),
        "certify" => cmd_certify(&flags),
        other => Err(CliError::Usage(format!("unknown command {other}"))),
    }
}

fn source_from_name(name: &str) -> Option<ProblemSource> {
    match name {
        "masses" => Some(ProblemSource::Masses),
        "quadrotor" => Some(ProblemSource::Quadrotor),
        "toy" => Some(ProblemSource::Toy),
        _ => None,
    }
}

fn cmd_solve(flags: &Flags) -> Result<(), CliError> {
    let Some(path) = flags.positional.first() else {
        return Err(CliError::Usage("solve needs a problem file".into()));
    };
    let method_name = flags
        .method
        .as_deref()
        .ok_or_else(|| CliError::Usage("solve needs --method".into()))?;
    let method = match method_name {
        "pipg" => Method::Pipg {
            restart_period: flags.restart.unwrap_or(0),
        },
        "admm" => Method::Admm,
        "pipgeq" => Method::Pipgeq,
        "pdhg" => Method::PdhgConst,
        "pdhg-acc" => Method::PdhgVarying,
        other => return Err(CliError::Usage(format!("unknown method {other}"))),
    };
    let prob = pipg::problem::load_problem(std::path::Path::new(path))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let reference = match &flags.reference {
        Some(p) => Some(load_reference(p)?),
        None => None,
    };

    let dir = out_dir(flags);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Solver(e.to_string()))?;
    let iters = flags.iters.unwrap_or(10_000);

    let mut config = pipg::solvers::SolverConfig::new(iters).with_seed(flags.seed);
    if let Method::Pipg { restart_period } = method {
        config.restart_period = restart_period;
    }
    let trace = match &method {
        Method::Pipg { .. } => {
            let schedule = if prob.mu() > 0.0 {
                pipg::solvers::StepSchedule::StronglyConvex
            } else {
                pipg::solvers::StepSchedule::ConstantConvex {
                    beta: pipg::solvers::StepSchedule::default_beta(&prob),
                }
            };
            pipg::solvers::pipg_solve(&prob, &schedule, &config)
        }
        Method::Admm => pipg::solvers::admm_solve(&prob, 1.0, &config),
        Method::Pipgeq => {
            let beta = pipg::solvers::StepSchedule::default_beta(&prob);
            let alpha = pipg::solvers::pipgeq_default_alpha(&prob, beta);
            pipg::solvers::pipgeq_solve(&prob, alpha, beta, &config)
        }
        Method::PdhgConst => {
            let beta = pipg::solvers::StepSchedule::default_beta(&prob);
            let alpha = 1.0 / (beta * prob.sigma() + prob.lambda());
            pipg::solvers::pdhg_const_solve(&prob, alpha, beta, &config)
        }
        Method::PdhgVarying => pipg::solvers::pdhg_varying_solve(&prob, &config),
    }
    .map_err(|e| CliError::Solver(e.to_string()))?;

    let trace_path = dir.join(format!("{method_name}_trace.csv"));
    let has_ref = reference.is_some();
    let header: &[&str] = if has_ref {
        &["iter", "objective", "feasibility", "errorOpt", "errorFea"]
    } else {
        &["iter", "objective", "feasibility"]
    };
    let mut csv =
        CsvWriter::create(&trace_path, header).map_err(|e| CliError::Solver(e.to_string()))?;
    for point in &trace.logged {
        let objective = prob.objective(&point.z);
        let feasibility = prob.cone().dist_sq_half(&prob.residual(&point.z));
        let mut fields = vec![
            CsvField::Int(point.iter),
            CsvField::Float(objective),
            CsvField::Float(feasibility),
        ];
        if let Some(bundle) = &reference {
            let (eo, ef) = prob
                .error_metrics(&point.z, &bundle.reference)
                .map_err(|e| CliError::Solver(e.to_string()))?;
            fields.push(CsvField::Float(eo));
            fields.push(CsvField::Float(ef));
        }
        csv.row(&fields)
            .map_err(|e| CliError::Solver(e.to_string()))?;
    }
    csv.finish().map_err(|e| CliError::Solver(e.to_string()))?;

    let solution_path = dir.join(format!("{method_name}_solution.json"));
    let solution = serde_json::json!({
        "method": method_name,
        "iterations": trace.updates_run,
        "schedule": trace.schedule_info,
        "z": trace.final_z,
        "w": trace.final_w,
        "objective": prob.objective(&trace.final_z),
        "feasibility": prob.cone().dist_sq_half(&prob.residual(&trace.final_z)),
    });
    std::fs::write(
        &solution_path,
        serde_json::to_string_pretty(&solution).expect("serializable") + "\n",
    )
    .map_err(|e| CliError::Solver(e.to_string()))?;
    println!(
        "wrote {} and {}",
        trace_path.display(),
        solution_path.display()
    );
    Ok(())
}

fn cmd_bench(flags: &Flags) -> Result<(), CliError> {
    let Some(name) = flags.positional.first() else {
        return Err(CliError::Usage("bench needs a builtin name".into()));
    };
    let source = source_from_name(name)
        .ok_or_else(|| CliError::Usage(format!("unknown builtin problem {name}")))?;
    let restart_sweep: Vec<usize> = match flags.restart {
        Some(0) => Vec::new(),
        Some(p) => vec![p],
        None => vec![100],
    };
    let mut cfg = ExperimentConfig::standard(source, out_dir(flags), &restart_sweep);
    if let Some(trials) = flags.trials {
        cfg.trials = trials;
    }
    if let Some(iters) = flags.iters {
        cfg.max_iters = iters;
    }
    cfg.seed_base = flags.seed;
    let output = run_experiment(&cfg)?;
    for outcome in &output.outcomes {
        for (trial, msg) in &outcome.failures {
            eprintln!("note: {} trial {trial} failed: {msg}", outcome.name);
        }
    }
    println!("experiment complete; outputs in {}", output.out_dir.display());
    for f in &output.files {
        println!("  {}", f.display());
    }
    Ok(())
}

fn cmd_stack(flags: &Flags) -> Result<(), CliError> {
    let Some(input) = flags.positional.first() else {
        return Err(CliError::Usage(
            "stack needs an OCP file or builtin name".into(),
        ));
    };
    let out = flags
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("stack needs --out <problem-file>".into()))?;
    let spec = match input.as_str() {
        "masses" => pipg::ocp::build_masses(&pipg::ocp::MassesParams::default()),
        "quadrotor" => pipg::ocp::build_quadrotor(
            &pipg::ocp::QuadrotorParams::default(),
            &pipg::ocp::ObstacleSpec::default(),
        )
        .map_err(|e| CliError::Usage(e.to_string()))?,
        path => pipg::ocp::load_ocp(std::path::Path::new(path))
            .map_err(|e| CliError::Usage(e.to_string()))?,
    };
    let prob = pipg::ocp::stack_ocp(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    pipg::problem::save_problem(&prob, &out).map_err(|e| CliError::Solver(e.to_string()))?;
    println!(
        "stacked {} into {} ({} variables, {} rows)",
        input,
        out.display(),
        prob.n(),
        prob.m()
    );
    Ok(())
}

fn cmd_certify(flags: &Flags) -> Result<(), CliError> {
    let Some(path) = flags.positional.first() else {
        return Err(CliError::Usage("certify needs a problem file".into()));
    };
    let out = flags
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("certify needs --out <reference-file>".into()))?;
    let prob = pipg::problem::load_problem(std::path::Path::new(path))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let bundle = compute_reference(&prob)?;
    save_reference(&bundle, &out)?;
    println!(
        "certified reference after {} iterations (fixed-point {:.2e}, feasibility {:.2e}, complementarity {:.2e}); wrote {}",
        bundle.iterations_used,
        bundle.reference.residuals.fixed_point,
        bundle.reference.residuals.feasibility,
        bundle.reference.residuals.complementarity,
        out.display()
    );
    Ok(())
}
