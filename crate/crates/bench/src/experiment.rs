//! Multi-trial convergence experiments.
//!
//! One experiment = one problem, one shared certified reference, and a list
//! of solvers, each run from `trials` independent standard-normal
//! initializations (projected into `D` and `K°`). Per-solver CSVs carry the
//! error and certificate histories; an aggregate CSV and SVG plots carry the
//! min/median/max envelopes. Trials are independent and may run on several
//! threads; results are merged by trial index, so the output is identical
//! regardless of scheduling.

use crate::csv::{CsvField, CsvWriter};
use crate::reference::{compute_reference, ReferenceBundle};
use crate::svg::{write_loglog_envelope, Series};
use crate::BenchError;
use pipg::ocp::{build_masses, build_quadrotor, stack_ocp, MassesParams, ObstacleSpec, QuadrotorParams};
use pipg::problem::ConicProblem;
use pipg::solvers::{
    admm_solve, bound_certificates, pdhg_const_solve, pdhg_varying_solve, pipg_solve,
    pipgeq_default_alpha, pipgeq_solve, CertificatePoint, SolverConfig, StepSchedule,
};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Masses,
    Quadrotor,
    Toy,
    File(PathBuf),
}

impl ProblemSource {
    pub fn label(&self) -> String {
        match self {
            ProblemSource::Masses => "masses".into(),
            ProblemSource::Quadrotor => "quadrotor".into(),
            ProblemSource::Toy => "toy".into(),
            ProblemSource::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "problem".into()),
        }
    }

    pub fn build(&self) -> Result<ConicProblem, BenchError> {
        match self {
            ProblemSource::Masses => stack_ocp(&build_masses(&MassesParams::default()))
                .map_err(|e| BenchError::Config(e.to_string())),
            ProblemSource::Quadrotor => {
                let spec = build_quadrotor(&QuadrotorParams::default(), &ObstacleSpec::default())
                    .map_err(|e| BenchError::Config(e.to_string()))?;
                stack_ocp(&spec).map_err(|e| BenchError::Config(e.to_string()))
            }
            ProblemSource::Toy => Ok(crate::synthetic::toy_instance().problem),
            ProblemSource::File(path) => {
                pipg::problem::load_problem(path).map_err(|e| BenchError::Config(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// PIPG with the strongly convex schedule when µ > 0, the constant one
    /// otherwise; `restart_period = 0` disables restarting.
    Pipg { restart_period: usize },
    Admm,
    Pipgeq,
    PdhgConst,
    PdhgVarying,
}

#[derive(Debug, Clone)]
pub struct SolverSpec {
    pub name: String,
    pub method: Method,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: ProblemSource,
    pub solvers: Vec<SolverSpec>,
    pub trials: usize,
    pub seed_base: u64,
    pub max_iters: usize,
    pub out_dir: PathBuf,
    pub admm_alpha: f64,
    pub admm_inner_tolerance: f64,
    pub admm_inner_max_iters: usize,
}

impl ExperimentConfig {
    /// The standard five-solver comparison plus restarted PIPG variants.
    pub fn standard(source: ProblemSource, out_dir: PathBuf, restart_sweep: &[usize]) -> Self {
        let mut solvers = vec![
            SolverSpec {
                name: "pipg".into(),
                method: Method::Pipg { restart_period: 0 },
            },
            SolverSpec {
                name: "admm".into(),
                method: Method::Admm,
            },
            SolverSpec {
                name: "pipgeq".into(),
                method: Method::Pipgeq,
            },
            SolverSpec {
                name: "pdhg".into(),
                method: Method::PdhgConst,
            },
            SolverSpec {
                name: "pdhg-acc".into(),
                method: Method::PdhgVarying,
            },
        ];
        for &period in restart_sweep {
            if period > 0 {
                solvers.push(SolverSpec {
                    name: format!("pipg-restart-{period}"),
                    method: Method::Pipg {
                        restart_period: period,
                    },
                });
            }
        }
        ExperimentConfig {
            source,
            solvers,
            trials: 100,
            seed_base: 0,
            max_iters: 100_000,
            out_dir,
            admm_alpha: 1.0,
            admm_inner_tolerance: 1e-6,
            admm_inner_max_iters: 100,
        }
    }
}

/// One logged row of one trial.
#[derive(Debug, Clone)]
pub struct TrialRow {
    pub iter: usize,
    pub error_opt: f64,
    pub error_fea: f64,
    pub cert: Option<CertificatePoint>,
}

#[derive(Debug)]
pub struct SolverOutcome {
    pub name: String,
    /// Rows per trial, all on the same logged-iteration grid.
    pub per_trial: Vec<Vec<TrialRow>>,
    /// Trials whose solve failed, with the error message.
    pub failures: Vec<(usize, String)>,
}

impl SolverOutcome {
    pub fn logged_iters(&self) -> Vec<usize> {
        self.per_trial
            .iter()
            .find(|t| !t.is_empty())
            .map(|t| t.iter().map(|r| r.iter).collect())
            .unwrap_or_default()
    }

    fn values_at(&self, iter: usize, metric: fn(&TrialRow) -> f64) -> Vec<f64> {
        self.per_trial
            .iter()
            .filter_map(|rows| rows.iter().find(|r| r.iter == iter).map(metric))
            .collect()
    }

    pub fn median_error_opt_at(&self, iter: usize) -> Option<f64> {
        median(self.values_at(iter, |r| r.error_opt))
    }

    pub fn median_error_fea_at(&self, iter: usize) -> Option<f64> {
        median(self.values_at(iter, |r| r.error_fea))
    }
}

pub fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in metrics"));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub reference: ReferenceBundle,
    pub outcomes: Vec<SolverOutcome>,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, BenchError> {
    if cfg.trials == 0 {
        return Err(BenchError::Config("trial count must be at least 1".into()));
    }
    if cfg.solvers.is_empty() {
        return Err(BenchError::Config("solver list must be nonempty".into()));
    }
    std::fs::create_dir_all(&cfg.out_dir)?;
    let prob = cfg.source.build()?;
    // One reference shared across all trials keeps the error metrics
    // comparable.
    let bundle = compute_reference(&prob)?;
    let mut files = Vec::new();

    let reference_path = cfg.out_dir.join("reference.json");
    crate::reference::save_reference(&bundle, &reference_path)?;
    files.push(reference_path);

    let mut outcomes = Vec::new();
    for spec in &cfg.solvers {
        let outcome = run_solver_trials(&prob, &bundle, spec, cfg)?;
        let path = cfg.out_dir.join(format!("{}.csv", spec.name));
        write_solver_csv(&path, &outcome)?;
        files.push(path);
        outcomes.push(outcome);
    }

    let envelope_path = cfg.out_dir.join("envelopes.csv");
    write_envelope_csv(&envelope_path, &outcomes)?;
    files.push(envelope_path);

    for (metric, label, file) in [
        (
            MetricKind::ErrorOpt,
            "error_opt = |z - z*|^2 / |z*|^2",
            "error_opt.svg",
        ),
        (
            MetricKind::ErrorFea,
            "error_fea = d_K(Hz - g) / |z*|^2",
            "error_fea.svg",
        ),
    ] {
        let series: Vec<Series> = outcomes
            .iter()
            .map(|o| Series {
                name: o.name.clone(),
                rows: envelope_rows(o, metric),
            })
            .collect();
        let path = cfg.out_dir.join(file);
        write_loglog_envelope(
            &path,
            &format!("{} on {}", label, cfg.source.label()),
            "iteration",
            label,
            &series,
        )?;
        files.push(path);
    }

    Ok(ExperimentOutput {
        reference: bundle,
        outcomes,
        out_dir: cfg.out_dir.clone(),
        files,
    })
}

/// Run one solver on one trial's initialization.
pub fn run_single(
    prob: &ConicProblem,
    bundle: &ReferenceBundle,
    method: &Method,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<TrialRow>, BenchError> {
    let mut config = SolverConfig::new(cfg.max_iters).with_seed(seed);
    config.inner_tolerance = cfg.admm_inner_tolerance;
    config.inner_max_iters = cfg.admm_inner_max_iters;

    let reference = &bundle.reference;
    let (trace, certs) = match method {
        Method::Pipg { restart_period } => {
            config.restart_period = *restart_period;
            let schedule = if prob.mu() > 0.0 {
                StepSchedule::StronglyConvex
            } else {
                StepSchedule::ConstantConvex {
                    beta: StepSchedule::default_beta(prob),
                }
            };
            let trace =
                pipg_solve(prob, &schedule, &config).map_err(|e| BenchError::Solver(e.to_string()))?;
            let certs = bound_certificates(prob, reference, &trace, &schedule);
            (trace, certs)
        }
        Method::Admm => (
            admm_solve(prob, cfg.admm_alpha, &config)
                .map_err(|e| BenchError::Solver(e.to_string()))?,
            Vec::new(),
        ),
        Method::Pipgeq => {
            let beta = StepSchedule::default_beta(prob);
            let alpha = pipgeq_default_alpha(prob, beta);
            (
                pipgeq_solve(prob, alpha, beta, &config)
                    .map_err(|e| BenchError::Solver(e.to_string()))?,
                Vec::new(),
            )
        }
        Method::PdhgConst => {
            let beta = StepSchedule::default_beta(prob);
            let alpha = 1.0 / (beta * prob.sigma() + prob.lambda());
            (
                pdhg_const_solve(prob, alpha, beta, &config)
                    .map_err(|e| BenchError::Solver(e.to_string()))?,
                Vec::new(),
            )
        }
        Method::PdhgVarying => (
            pdhg_varying_solve(prob, &config).map_err(|e| BenchError::Solver(e.to_string()))?,
            Vec::new(),
        ),
    };

    let mut rows = Vec::with_capacity(trace.logged.len());
    for point in &trace.logged {
        let (error_opt, error_fea) = prob
            .error_metrics(&point.z, reference)
            .map_err(|e| BenchError::Solver(e.to_string()))?;
        let cert = certs.iter().find(|c| c.iter == point.iter).copied();
        rows.push(TrialRow {
            iter: point.iter,
            error_opt,
            error_fea,
            cert,
        });
    }
    Ok(rows)
}

type TrialSlot = Option<Result<Vec<TrialRow>, String>>;

fn run_solver_trials(
    prob: &ConicProblem,
    bundle: &ReferenceBundle,
    spec: &SolverSpec,
    cfg: &ExperimentConfig,
) -> Result<SolverOutcome, BenchError> {
    let results: Mutex<Vec<TrialSlot>> = Mutex::new(vec![None; cfg.trials]);
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(cfg.trials);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let trial = next.fetch_add(1, Ordering::Relaxed);
                if trial >= cfg.trials {
                    break;
                }
                let seed = cfg.seed_base.wrapping_add(trial as u64);
                let outcome = run_single(prob, bundle, &spec.method, cfg, seed)
                    .map_err(|e| e.to_string());
                results.lock().unwrap()[trial] = Some(outcome);
            });
        }
    });

    let mut per_trial = Vec::with_capacity(cfg.trials);
    let mut failures = Vec::new();
    for (trial, slot) in results.into_inner().unwrap().into_iter().enumerate() {
        match slot.expect("every trial was claimed") {
            Ok(rows) => per_trial.push(rows),
            Err(msg) => {
                failures.push((trial, msg));
                per_trial.push(Vec::new());
            }
        }
    }
    Ok(SolverOutcome {
        name: spec.name.clone(),
        per_trial,
        failures,
    })
}

fn write_solver_csv(path: &Path, outcome: &SolverOutcome) -> Result<(), BenchError> {
    let mut csv = CsvWriter::create(
        path,
        &[
            "iter",
            "trial",
            "errorOpt",
            "errorFea",
            "certLhsFea",
            "certRhsFea",
            "certLhsGap",
            "certRhsGap",
        ],
    )?;
    for (trial, rows) in outcome.per_trial.iter().enumerate() {
        for row in rows {
            let (clf, crf, clg, crg) = match &row.cert {
                Some(c) => (
                    CsvField::Float(c.lhs_fea),
                    CsvField::Float(c.rhs_fea),
                    CsvField::Float(c.lhs_gap),
                    CsvField::Float(c.rhs_gap),
                ),
                None => (CsvField::Empty, CsvField::Empty, CsvField::Empty, CsvField::Empty),
            };
            csv.row(&[
                CsvField::Int(row.iter),
                CsvField::Int(trial),
                CsvField::Float(row.error_opt),
                CsvField::Float(row.error_fea),
                clf,
                crf,
                clg,
                crg,
            ])?;
        }
    }
    csv.finish()?;
    Ok(())
}

#[derive(Clone, Copy)]
enum MetricKind {
    ErrorOpt,
    ErrorFea,
}

fn envelope_rows(outcome: &SolverOutcome, metric: MetricKind) -> Vec<(f64, f64, f64, f64)> {
    let pick: fn(&TrialRow) -> f64 = match metric {
        MetricKind::ErrorOpt => |r| r.error_opt,
        MetricKind::ErrorFea => |r| r.error_fea,
    };
    outcome
        .logged_iters()
        .into_iter()
        .filter_map(|iter| {
            let mut vals = outcome.values_at(iter, pick);
            if vals.is_empty() {
                return None;
            }
            vals.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in metrics"));
            let min = vals[0];
            let max = vals[vals.len() - 1];
            let med = median(vals).unwrap();
            Some((iter as f64, min, med, max))
        })
        .collect()
}

fn write_envelope_csv(path: &Path, outcomes: &[SolverOutcome]) -> Result<(), BenchError> {
    let mut csv = CsvWriter::create(path, &["solver", "metric", "iter", "min", "median", "max"])?;
    for outcome in outcomes {
        for (metric, name) in [(MetricKind::ErrorOpt, "errorOpt"), (MetricKind::ErrorFea, "errorFea")] {
            for (iter, min, med, max) in envelope_rows(outcome, metric) {
                csv.row(&[
                    CsvField::Str(outcome.name.clone()),
                    CsvField::Str(name.into()),
                    CsvField::Int(iter as usize),
                    CsvField::Float(min),
                    CsvField::Float(med),
                    CsvField::Float(max),
                ])?;
            }
        }
    }
    csv.finish()?;
    Ok(())
}
