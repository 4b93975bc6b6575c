//! The five iterative methods and their supporting machinery: step-size
//! schedules, ergodic averaging, the restart heuristic, and the
//! convergence-bound certificates.
//!
//! All solvers run a fixed iteration budget `k` in the same sense as the
//! algorithm statements: `k = 1` returns the initialization only, and `k`
//! iterations execute `k − 1` update steps.

mod admm;
mod certificates;
mod pdhg;
mod pipg;
mod pipgeq;

pub use admm::admm_solve;
pub use certificates::{bound_certificates, CertificatePoint};
pub use pdhg::{pdhg_const_solve, pdhg_varying_solve};
pub use pipg::pipg_solve;
pub use pipgeq::{pipgeq_default_alpha, pipgeq_solve};

use crate::problem::ConicProblem;
use crate::rng::Rng;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// k = 0 or other unusable configuration.
    InvalidConfig(String),
    /// Schedule requires curvature the problem does not have (µ = 0), or a
    /// schedule kind was passed to a solver that cannot realize it.
    ScheduleMismatch(String),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::InvalidConfig(msg) => write!(f, "invalid solver config: {msg}"),
            SolverError::ScheduleMismatch(msg) => write!(f, "schedule mismatch: {msg}"),
        }
    }
}

impl std::error::Error for SolverError {}

/// Per-iteration step-size rule.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    /// Constant steps for a merely convex objective: `β` free,
    /// `α = 1/(βσ + λ)`, so `α(λ + σβ) = 1` holds exactly.
    ConstantConvex { beta: f64 },
    /// Strongly convex schedule: `α^j = 2/((j+1)µ + 2λ)`,
    /// `β^j = (j+1)µ/(2σ)`; again `α^j(λ + σβ^j) = 1`.
    StronglyConvex,
    /// Accelerated primal-dual recursion for the varying-step PDHG baseline;
    /// only `pdhg_varying_solve` accepts it.
    PdhgAccelerated,
    /// Explicit per-iteration values; entries past the end repeat the last.
    Explicit {
        alphas: Vec<f64>,
        betas: Vec<f64>,
        gammas: Option<Vec<f64>>,
    },
}

impl StepSchedule {
    /// Default `β` balancing the two terms of the initial potential:
    /// `√(λ/σ)` when both are positive, `1/√σ` when only σ is, 1 otherwise.
    pub fn default_beta(prob: &ConicProblem) -> f64 {
        let (lambda, sigma) = (prob.lambda(), prob.sigma());
        if lambda > 0.0 && sigma > 0.0 {
            (lambda / sigma).sqrt()
        } else if sigma > 0.0 {
            1.0 / sigma.sqrt()
        } else {
            1.0
        }
    }

    /// `(α^j, β^j)` for a 1-based iteration index within an epoch.
    pub fn steps(&self, j: usize, prob: &ConicProblem) -> (f64, f64) {
        match self {
            StepSchedule::ConstantConvex { beta } => {
                let alpha = 1.0 / (beta * prob.sigma() + prob.lambda());
                (alpha, *beta)
            }
            StepSchedule::StronglyConvex => {
                let mu = prob.mu();
                let alpha = 2.0 / ((j as f64 + 1.0) * mu + 2.0 * prob.lambda());
                let beta = (j as f64 + 1.0) * mu / (2.0 * prob.sigma());
                (alpha, beta)
            }
            StepSchedule::Explicit { alphas, betas, .. } => {
                let idx = (j - 1).min(alphas.len() - 1);
                let idx_b = (j - 1).min(betas.len() - 1);
                (alphas[idx], betas[idx_b])
            }
            StepSchedule::PdhgAccelerated => {
                panic!("the accelerated PDHG recursion is internal to pdhg_varying_solve")
            }
        }
    }

    /// Ergodic weights `(w̃_j, w̄_j)` for the averages the convergence
    /// theorems are stated for: uniform in the constant case, polynomial
    /// `((j+1)(j+2), j+2)` in the strongly convex case.
    pub fn ergodic_weights(&self, j: usize) -> (f64, f64) {
        match self {
            StepSchedule::StronglyConvex => {
                let jf = j as f64;
                ((jf + 1.0) * (jf + 2.0), jf + 2.0)
            }
            _ => (1.0, 1.0),
        }
    }

    pub fn describe(&self, prob: &ConicProblem) -> String {
        match self {
            StepSchedule::ConstantConvex { beta } => format!(
                "constant-convex beta={beta} alpha={}",
                1.0 / (beta * prob.sigma() + prob.lambda())
            ),
            StepSchedule::StronglyConvex => format!(
                "strongly-convex mu={} lambda={} sigma={}",
                prob.mu(),
                prob.lambda(),
                prob.sigma()
            ),
            StepSchedule::PdhgAccelerated => {
                "pdhg-accelerated: gamma_j = 1/sqrt(1+2*mu*alpha_(j-1)), alpha_j = \
                 gamma_j*alpha_(j-1), beta_j = beta_(j-1)/gamma_j, alpha1 = beta1 = 1/sqrt(sigma)"
                    .to_string()
            }
            StepSchedule::Explicit { alphas, betas, .. } => {
                format!("explicit ({} alphas, {} betas)", alphas.len(), betas.len())
            }
        }
    }
}

/// Shared solver configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Iteration budget `k`; `k − 1` update steps are executed and `k = 0`
    /// is rejected.
    pub max_iters: usize,
    /// Logging stride; `None` logs every ⌈k/1000⌉-th step plus the final one.
    pub log_stride: Option<usize>,
    /// Restart period for the schedule index and ergodic accumulators;
    /// 0 disables restarting.
    pub restart_period: usize,
    /// ADMM inner-loop gradient-mapping tolerance.
    pub inner_tolerance: f64,
    /// ADMM inner-loop iteration cap.
    pub inner_max_iters: usize,
    pub seed: u64,
    /// Initial `z¹`; defaults to a seeded standard-normal draw. Always
    /// projected into `D`.
    pub z_init: Option<Vec<f64>>,
    /// Initial dual seed: `v¹` for PIPG (projected into `K°`), `w¹` for the
    /// PDHG variants (projected into `K°`) and for ADMM/PIPGeq (free).
    pub v_init: Option<Vec<f64>>,
    /// Initial slack seed `y¹` for ADMM/PIPGeq; projected into `K`.
    pub y_init: Option<Vec<f64>>,
    /// Keep `w` (and `v` where defined) at logged points, not just `z`.
    pub store_iterates: bool,
}

impl SolverConfig {
    pub fn new(max_iters: usize) -> Self {
        SolverConfig {
            max_iters,
            log_stride: None,
            restart_period: 0,
            inner_tolerance: 1e-8,
            inner_max_iters: 500,
            seed: 0,
            z_init: None,
            v_init: None,
            y_init: None,
            store_iterates: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn stride(&self) -> usize {
        self.log_stride
            .unwrap_or_else(|| self.max_iters.div_ceil(1000))
            .max(1)
    }

    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        if self.max_iters == 0 {
            return Err(SolverError::InvalidConfig(
                "iteration budget k must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Draw the raw initialization triple `(z-seed, dual-seed, slack-seed)`.
    /// The three vectors are always drawn in a fixed order so explicit
    /// overrides do not perturb the remaining defaults.
    pub(crate) fn draw_initials(&self, n: usize, m: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut rng = Rng::new(self.seed);
        let z = rng.normal_vec(n);
        let v = rng.normal_vec(m);
        let y = rng.normal_vec(m);
        (
            self.z_init.clone().unwrap_or(z),
            self.v_init.clone().unwrap_or(v),
            self.y_init.clone().unwrap_or(y),
        )
    }
}

/// Ergodic averages at a logged point.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicAverages {
    pub z_tilde: Vec<f64>,
    pub z_bar: Vec<f64>,
    pub w_bar: Vec<f64>,
}

/// One logged point of a solve. `iter` counts completed update steps, so the
/// stored `z` is the iterate `z^{iter+1}` in the algorithm numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct LoggedPoint {
    pub iter: usize,
    pub epoch: usize,
    /// Completed update steps within the current restart epoch.
    pub epoch_iter: usize,
    pub z: Vec<f64>,
    pub w: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub ergodic: Option<ErgodicAverages>,
}

/// Initialization of a restart epoch, kept for certificate evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochInit {
    pub epoch: usize,
    pub start_iter: usize,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub method: &'static str,
    pub schedule_info: String,
    pub iters_requested: usize,
    pub updates_run: usize,
    pub logged: Vec<LoggedPoint>,
    pub epoch_inits: Vec<EpochInit>,
    pub final_z: Vec<f64>,
    pub final_w: Vec<f64>,
    pub final_v: Option<Vec<f64>>,
    pub restart_period: usize,
    /// Projections onto `D` spent inside ADMM subproblem solves.
    pub inner_projections: usize,
    /// ADMM subproblems that hit the inner iteration cap.
    pub inner_failures: usize,
    pub wall_time_s: f64,
    pub seed: u64,
}

impl SolveTrace {
    /// Numerical equality ignoring wall time.
    pub fn numerically_eq(&self, other: &SolveTrace) -> bool {
        self.method == other.method
            && self.updates_run == other.updates_run
            && self.final_z == other.final_z
            && self.final_w == other.final_w
            && self.final_v == other.final_v
            && self.logged == other.logged
            && self.epoch_inits == other.epoch_inits
    }
}

/// Accumulators for the running ergodic averages.
pub(crate) struct ErgodicAccumulator {
    sum_tilde: Vec<f64>,
    sum_bar_z: Vec<f64>,
    sum_bar_w: Vec<f64>,
    weight_tilde: f64,
    weight_bar: f64,
}

impl ErgodicAccumulator {
    pub(crate) fn new(n: usize, m: usize) -> Self {
        ErgodicAccumulator {
            sum_tilde: vec![0.0; n],
            sum_bar_z: vec![0.0; n],
            sum_bar_w: vec![0.0; m],
            weight_tilde: 0.0,
            weight_bar: 0.0,
        }
    }

    pub(crate) fn reset(&mut self) {
        self.sum_tilde.fill(0.0);
        self.sum_bar_z.fill(0.0);
        self.sum_bar_w.fill(0.0);
        self.weight_tilde = 0.0;
        self.weight_bar = 0.0;
    }

    pub(crate) fn add_pre(&mut self, weight: f64, z: &[f64]) {
        for (s, &v) in self.sum_tilde.iter_mut().zip(z.iter()) {
            *s += weight * v;
        }
        self.weight_tilde += weight;
    }

    pub(crate) fn add_post(&mut self, weight: f64, z: &[f64], w: &[f64]) {
        for (s, &v) in self.sum_bar_z.iter_mut().zip(z.iter()) {
            *s += weight * v;
        }
        for (s, &v) in self.sum_bar_w.iter_mut().zip(w.iter()) {
            *s += weight * v;
        }
        self.weight_bar += weight;
    }

    pub(crate) fn snapshot(&self) -> ErgodicAverages {
        let norm = |sum: &[f64], w: f64| sum.iter().map(|v| v / w).collect::<Vec<f64>>();
        ErgodicAverages {
            z_tilde: norm(&self.sum_tilde, self.weight_tilde),
            z_bar: norm(&self.sum_bar_z, self.weight_bar),
            w_bar: norm(&self.sum_bar_w, self.weight_bar),
        }
    }
}

pub(crate) fn now() -> std::time::Instant {
    std::time::Instant::now()
}
