//! Optimal-control front end: a discrete-time tracking problem over a
//! horizon τ with input-rate limits and per-stage affine constraints, its
//! stacking into a [`ConicProblem`], and the two builtin benchmark models
//! (oscillating masses, quadrotor path planning).
//!
//! The stacked variable is `z = (x₁, …, x_τ, u₀, …, u_{τ−1})`. Dynamics rows
//! land in a zero cone, everything else (rate limits, per-stage rows) in a
//! nonnegative orthant; the state and input sets form the Cartesian set `D`.

use crate::geometry::ConvexSet;
use crate::linalg::{curvature_bounds, zoh_discretize, DenseMatrix};
use crate::problem::{ConicProblem, ProblemError, QuadForm};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::Path;

#[derive(Debug)]
pub enum OcpError {
    /// Dimension inconsistency, tagged with the stage it was found at.
    Stage { stage: usize, message: String },
    Dimension(String),
    /// Q or R failed the SPD check.
    Weights(crate::linalg::LinalgError),
    /// An obstacle-linearization reference point coincides with a center.
    ReferenceAtCenter { stage: usize, obstacle: usize },
    Problem(ProblemError),
    Io(std::io::Error),
    Parse(String),
}

impl fmt::Display for OcpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OcpError::Stage { stage, message } => write!(f, "stage {stage}: {message}"),
            OcpError::Dimension(msg) => write!(f, "dimension error: {msg}"),
            OcpError::Weights(e) => write!(f, "weight matrices must be SPD: {e}"),
            OcpError::ReferenceAtCenter { stage, obstacle } => write!(
                f,
                "reference position at stage {stage} coincides with obstacle {obstacle} center"
            ),
            OcpError::Problem(e) => write!(f, "{e}"),
            OcpError::Io(e) => write!(f, "io error: {e}"),
            OcpError::Parse(msg) => write!(f, "ocp file parse error: {msg}"),
        }
    }
}

impl std::error::Error for OcpError {}

impl From<ProblemError> for OcpError {
    fn from(e: ProblemError) -> Self {
        OcpError::Problem(e)
    }
}

impl From<std::io::Error> for OcpError {
    fn from(e: std::io::Error) -> Self {
        OcpError::Io(e)
    }
}

/// The optimal-control problem before stacking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcpSpec {
    pub horizon: usize,
    #[serde(rename = "A")]
    pub a: DenseMatrix,
    #[serde(rename = "B")]
    pub b: DenseMatrix,
    pub h: Vec<f64>,
    pub x0: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: DenseMatrix,
    #[serde(rename = "R")]
    pub r: DenseMatrix,
    /// References x̂₁ … x̂_τ.
    pub x_refs: Vec<Vec<f64>>,
    /// References û₀ … û_{τ−1}.
    pub u_refs: Vec<Vec<f64>>,
    /// Elementwise bound γ on ‖u_{t+1} − u_t‖_∞.
    pub rate_bound: f64,
    /// Per-stage state rows (C_t, a_t), t = 1…τ: `C_t x_t − a_t ≥ 0`.
    pub stage_state: Option<Vec<(DenseMatrix, Vec<f64>)>>,
    /// Per-stage input rows (D_t, b_t), t = 0…τ−1: `D_t u_t − b_t ≥ 0`.
    pub stage_input: Option<Vec<(DenseMatrix, Vec<f64>)>>,
    pub state_set: ConvexSet,
    pub input_set: ConvexSet,
}

impl OcpSpec {
    pub fn state_dim(&self) -> usize {
        self.a.rows
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols
    }

    fn validate(&self) -> Result<(), OcpError> {
        let n_x = self.state_dim();
        let n_u = self.input_dim();
        let tau = self.horizon;
        if tau == 0 {
            return Err(OcpError::Dimension("horizon must be at least 1".into()));
        }
        if self.a.cols != n_x {
            return Err(OcpError::Dimension("A must be square".into()));
        }
        if self.b.rows != n_x {
            return Err(OcpError::Dimension("B row count must match A".into()));
        }
        if self.h.len() != n_x || self.x0.len() != n_x {
            return Err(OcpError::Dimension("h and x0 must have state dimension".into()));
        }
        if self.q.rows != n_x || self.q.cols != n_x {
            return Err(OcpError::Dimension("Q must be n_x × n_x".into()));
        }
        if self.r.rows != n_u || self.r.cols != n_u {
            return Err(OcpError::Dimension("R must be n_u × n_u".into()));
        }
        if self.x_refs.len() != tau || self.u_refs.len() != tau {
            return Err(OcpError::Dimension(format!(
                "need τ = {tau} state and input references, got {} and {}",
                self.x_refs.len(),
                self.u_refs.len()
            )));
        }
        for (t, x) in self.x_refs.iter().enumerate() {
            if x.len() != n_x {
                return Err(OcpError::Stage {
                    stage: t + 1,
                    message: format!("state reference has length {}, expected {n_x}", x.len()),
                });
            }
        }
        for (t, u) in self.u_refs.iter().enumerate() {
            if u.len() != n_u {
                return Err(OcpError::Stage {
                    stage: t,
                    message: format!("input reference has length {}, expected {n_u}", u.len()),
                });
            }
        }
        if let Some(rows) = &self.stage_state {
            if rows.len() != tau {
                return Err(OcpError::Dimension("stage_state must have τ entries".into()));
            }
            for (t, (c, a)) in rows.iter().enumerate() {
                if c.cols != n_x || a.len() != c.rows {
                    return Err(OcpError::Stage {
                        stage: t + 1,
                        message: "state constraint block dimensions are inconsistent".into(),
                    });
                }
            }
        }
        if let Some(rows) = &self.stage_input {
            if rows.len() != tau {
                return Err(OcpError::Dimension("stage_input must have τ entries".into()));
            }
            for (t, (d, b)) in rows.iter().enumerate() {
                if d.cols != n_u || b.len() != d.rows {
                    return Err(OcpError::Stage {
                        stage: t,
                        message: "input constraint block dimensions are inconsistent".into(),
                    });
                }
            }
        }
        if self.state_set.dim() != n_x {
            return Err(OcpError::Dimension("state set dimension must be n_x".into()));
        }
        if self.input_set.dim() != n_u {
            return Err(OcpError::Dimension("input set dimension must be n_u".into()));
        }
        let (mu_q, _) = curvature_bounds(&self.q).map_err(OcpError::Weights)?;
        let (mu_r, _) = curvature_bounds(&self.r).map_err(OcpError::Weights)?;
        if mu_q <= 0.0 || mu_r <= 0.0 {
            return Err(OcpError::Weights(crate::linalg::LinalgError::Indefinite {
                min_eigenvalue: mu_q.min(mu_r),
            }));
        }
        Ok(())
    }
}

/// Stack an optimal-control problem into a conic program.
///
/// `P = blkdiag(I_τ⊗Q, I_τ⊗R)` and `p = −P ẑ` with `ẑ` the stacked
/// references, so `∇f(z) = P(z − ẑ)` reproduces the tracking objective (the
/// constant `½‖ẑ‖²_P` is dropped; it shifts objective values, not iterates).
pub fn stack_ocp(spec: &OcpSpec) -> Result<ConicProblem, OcpError> {
    spec.validate()?;
    let n_x = spec.state_dim();
    let n_u = spec.input_dim();
    let tau = spec.horizon;
    let n = tau * (n_x + n_u);
    let u_offset = tau * n_x;

    let rate_rows = if tau >= 2 { (tau - 1) * n_u } else { 0 };
    let state_rows: usize = spec
        .stage_state
        .as_ref()
        .map(|rows| rows.iter().map(|(c, _)| c.rows).sum())
        .unwrap_or(0);
    let input_rows: usize = spec
        .stage_input
        .as_ref()
        .map(|rows| rows.iter().map(|(d, _)| d.rows).sum())
        .unwrap_or(0);
    let m = tau * n_x + 2 * rate_rows + state_rows + input_rows;

    let mut op = crate::linalg::BlockOperator::new(m, n);
    let mut g = vec![0.0; m];

    // Dynamics rows: x_{t+1} − A x_t − B u_t = h, first row block pins
    // x₁ − B u₀ = A x₀ + h.
    op.push_identity(0, 0, tau * n_x, 1.0);
    for t in 1..tau {
        op.push_dense(t * n_x, (t - 1) * n_x, spec.a.clone(), -1.0);
    }
    for t in 0..tau {
        op.push_dense(t * n_x, u_offset + t * n_u, spec.b.clone(), -1.0);
    }
    let ax0 = spec.a.matvec(&spec.x0);
    for i in 0..n_x {
        g[i] = ax0[i] + spec.h[i];
    }
    for t in 1..tau {
        for i in 0..n_x {
            g[t * n_x + i] = spec.h[i];
        }
    }

    // Input-rate rows: ±(u_t − u_{t+1}) ≥ −γ1 for both signs.
    let mut row = tau * n_x;
    if rate_rows > 0 {
        op.push_identity(row, u_offset, rate_rows, 1.0);
        op.push_identity(row, u_offset + n_u, rate_rows, -1.0);
        for i in 0..rate_rows {
            g[row + i] = -spec.rate_bound;
        }
        row += rate_rows;
        op.push_identity(row, u_offset, rate_rows, -1.0);
        op.push_identity(row, u_offset + n_u, rate_rows, 1.0);
        for i in 0..rate_rows {
            g[row + i] = -spec.rate_bound;
        }
        row += rate_rows;
    }

    // Per-stage affine rows.
    if let Some(rows) = &spec.stage_state {
        for (t, (c, a)) in rows.iter().enumerate() {
            if c.rows > 0 {
                op.push_dense(row, t * n_x, c.clone(), 1.0);
                g[row..row + a.len()].copy_from_slice(a);
                row += c.rows;
            }
        }
    }
    if let Some(rows) = &spec.stage_input {
        for (t, (d, b)) in rows.iter().enumerate() {
            if d.rows > 0 {
                op.push_dense(row, u_offset + t * n_u, d.clone(), 1.0);
                g[row..row + b.len()].copy_from_slice(b);
                row += d.rows;
            }
        }
    }
    debug_assert_eq!(row, m);

    let quad = QuadForm::BlockDiag {
        blocks: vec![(tau, spec.q.clone()), (tau, spec.r.clone())],
    };
    let mut refs = Vec::with_capacity(n);
    for x in &spec.x_refs {
        refs.extend_from_slice(x);
    }
    for u in &spec.u_refs {
        refs.extend_from_slice(u);
    }
    let lin: Vec<f64> = quad.apply(&refs).into_iter().map(|v| -v).collect();

    let orthant_dim = m - tau * n_x;
    let cone = if orthant_dim > 0 {
        ConvexSet::Cartesian {
            factors: vec![
                ConvexSet::Zero { dim: tau * n_x },
                ConvexSet::NonnegOrthant { dim: orthant_dim },
            ],
        }
    } else {
        ConvexSet::Zero { dim: tau * n_x }
    };
    let mut factors = Vec::with_capacity(2 * tau);
    factors.extend(std::iter::repeat_n(spec.state_set.clone(), tau));
    factors.extend(std::iter::repeat_n(spec.input_set.clone(), tau));
    let set = ConvexSet::Cartesian { factors };

    Ok(ConicProblem::new(quad, lin, op, g, cone, set)?)
}

/// Roll the dynamics forward from `x0` under the given inputs, returning
/// `x₁ … x_τ`.
pub fn rollout_states(spec: &OcpSpec, inputs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut states = Vec::with_capacity(inputs.len());
    let mut x = spec.x0.clone();
    for u in inputs {
        let mut next = spec.a.matvec(&x);
        spec.b.matvec_acc(u, 1.0, &mut next);
        for (v, &hi) in next.iter_mut().zip(spec.h.iter()) {
            *v += hi;
        }
        states.push(next.clone());
        x = next;
    }
    states
}

/// Stack a state/input trajectory in the solver's variable ordering.
pub fn stack_trajectory(states: &[Vec<f64>], inputs: &[Vec<f64>]) -> Vec<f64> {
    let mut z = Vec::new();
    for x in states {
        z.extend_from_slice(x);
    }
    for u in inputs {
        z.extend_from_slice(u);
    }
    z
}

/// Symmetric tridiagonal spring-coupling matrix: 2 on the diagonal, −1 on
/// the sub- and super-diagonals.
pub fn spring_chain_matrix(n: usize) -> DenseMatrix {
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        l.set(i, i, 2.0);
        if i + 1 < n {
            l.set(i, i + 1, -1.0);
            l.set(i + 1, i, -1.0);
        }
    }
    l
}

/// Oscillating-masses chain: N unit masses coupled by unit springs to each
/// other and to the walls, driven by per-mass external forces.
#[derive(Debug, Clone)]
pub struct MassesParams {
    pub mass_count: usize,
    pub horizon: usize,
    pub delta: f64,
    pub rate_bound: f64,
    pub displacement_bound: f64,
    pub velocity_bound: f64,
    pub force_bound: f64,
    /// Defaults to the identity of size 2N.
    pub q: Option<DenseMatrix>,
    /// Defaults to the identity of size N.
    pub r: Option<DenseMatrix>,
    /// Per-stage state reference; defaults to (1_N, 0_N).
    pub x_ref: Option<Vec<f64>>,
    /// Per-stage input reference; defaults to 0_N.
    pub u_ref: Option<Vec<f64>>,
}

impl Default for MassesParams {
    fn default() -> Self {
        MassesParams {
            mass_count: 4,
            horizon: 30,
            delta: 0.25,
            rate_bound: 0.5,
            displacement_bound: 2.0,
            velocity_bound: 2.0,
            force_bound: 2.0,
            q: None,
            r: None,
            x_ref: None,
            u_ref: None,
        }
    }
}

pub fn build_masses(params: &MassesParams) -> OcpSpec {
    let n = params.mass_count;
    let l = spring_chain_matrix(n);
    let mut a_c = DenseMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        a_c.set(i, n + i, 1.0);
        for j in 0..n {
            a_c.set(n + i, j, -l.get(i, j));
        }
    }
    let mut b_c = DenseMatrix::zeros(2 * n, n);
    for i in 0..n {
        b_c.set(n + i, i, 1.0);
    }
    let h_c = vec![0.0; 2 * n];
    let (a, b, h) = zoh_discretize(&a_c, &b_c, &h_c, params.delta);

    let x_ref = params.x_ref.clone().unwrap_or_else(|| {
        let mut r = vec![1.0; n];
        r.extend(vec![0.0; n]);
        r
    });
    let u_ref = params.u_ref.clone().unwrap_or_else(|| vec![0.0; n]);

    OcpSpec {
        horizon: params.horizon,
        a,
        b,
        h,
        x0: vec![0.0; 2 * n],
        q: params.q.clone().unwrap_or_else(|| DenseMatrix::identity(2 * n)),
        r: params.r.clone().unwrap_or_else(|| DenseMatrix::identity(n)),
        x_refs: vec![x_ref; params.horizon],
        u_refs: vec![u_ref; params.horizon],
        rate_bound: params.rate_bound,
        stage_state: None,
        stage_input: None,
        state_set: ConvexSet::Cartesian {
            factors: vec![
                ConvexSet::InfBall {
                    dim: n,
                    radius: params.displacement_bound,
                },
                ConvexSet::InfBall {
                    dim: n,
                    radius: params.velocity_bound,
                },
            ],
        },
        input_set: ConvexSet::InfBall {
            dim: n,
            radius: params.force_bound,
        },
    }
}

/// Static cylindrical obstacles in the horizontal plane, selected from the
/// state by `M = [I₂ 0₂ₓ₄]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub centers: Vec<[f64; 2]>,
    pub radii: Vec<f64>,
}

impl Default for ObstacleSpec {
    fn default() -> Self {
        ObstacleSpec {
            centers: vec![[-1.5, -1.5], [1.2, -1.2], [1.5, 1.5]],
            radii: vec![0.8, 1.2, 0.8],
        }
    }
}

/// Supporting-hyperplane relaxation of the keep-out constraints
/// `‖Mx − o^i‖² ≥ (ϱ^i)²` at the (pushed-out) reference position `r̂`:
/// rows `⟨c^i, x⟩ ≥ a^i` with `c^i = 2Mᵀ(r̃ − o^i)` and
/// `a^i = ‖r̃‖² + (ϱ^i)² − ‖o^i‖²`, where `r̃ = r̂` if `r̂` clears every
/// obstacle and otherwise `r̃` is `r̂` scaled radially out to the violated
/// obstacle's boundary.
pub fn linearize_obstacles(
    obstacles: &ObstacleSpec,
    r_hat: [f64; 2],
    state_dim: usize,
) -> Result<(DenseMatrix, Vec<f64>), OcpError> {
    assert_eq!(
        obstacles.centers.len(),
        obstacles.radii.len(),
        "obstacle centers and radii must pair up"
    );
    assert!(state_dim >= 2, "selector M needs at least two state entries");
    let mut r_tilde = r_hat;
    for (i, (o, &radius)) in obstacles
        .centers
        .iter()
        .zip(obstacles.radii.iter())
        .enumerate()
    {
        let dx = r_hat[0] - o[0];
        let dy = r_hat[1] - o[1];
        let dist = (dx * dx + dy * dy).sqrt();
        if dist == 0.0 {
            return Err(OcpError::ReferenceAtCenter {
                stage: 0,
                obstacle: i,
            });
        }
        if dist < radius {
            let s = radius / dist;
            r_tilde = [o[0] + s * dx, o[1] + s * dy];
            break; // at most one obstacle can contain the reference
        }
    }
    let count = obstacles.centers.len();
    let mut c = DenseMatrix::zeros(count, state_dim);
    let mut a = vec![0.0; count];
    let r_norm_sq = r_tilde[0] * r_tilde[0] + r_tilde[1] * r_tilde[1];
    for (i, (o, &radius)) in obstacles
        .centers
        .iter()
        .zip(obstacles.radii.iter())
        .enumerate()
    {
        c.set(i, 0, 2.0 * (r_tilde[0] - o[0]));
        c.set(i, 1, 2.0 * (r_tilde[1] - o[1]));
        a[i] = r_norm_sq + radius * radius - (o[0] * o[0] + o[1] * o[1]);
    }
    Ok((c, a))
}

/// 3-DoF quadrotor: double-integrator translational dynamics under gravity,
/// thrust confined to a vertical ice-cream cone inside a norm ball, with a
/// minimum vertical thrust and linearized obstacle avoidance.
#[derive(Debug, Clone)]
pub struct QuadrotorParams {
    pub horizon: usize,
    pub delta: f64,
    pub mass: f64,
    pub gravity: f64,
    pub rate_bound: f64,
    pub half_angle: f64,
    pub position_bound: f64,
    pub velocity_bound: f64,
    pub thrust_bound: f64,
    pub min_vertical_thrust: f64,
    pub start: [f64; 3],
    pub target: [f64; 3],
    /// Defaults to the start position at rest.
    pub x0: Option<Vec<f64>>,
    /// Defaults to diag(I₃, 2.5·I₃).
    pub q: Option<DenseMatrix>,
    /// Defaults to 0.5·I₃.
    pub r: Option<DenseMatrix>,
}

impl Default for QuadrotorParams {
    fn default() -> Self {
        QuadrotorParams {
            horizon: 30,
            delta: 0.25,
            mass: 0.35,
            gravity: 9.8,
            rate_bound: 3.0,
            half_angle: std::f64::consts::FRAC_PI_4,
            position_bound: 3.0,
            velocity_bound: 5.0,
            thrust_bound: 5.0,
            min_vertical_thrust: 2.0,
            start: [-1.5, -2.5, 0.0],
            target: [2.5, 1.5, 0.0],
            x0: None,
            q: None,
            r: None,
        }
    }
}

/// The straight-line position reference `r̂_t`, `t = 1…τ`, interpolating
/// start → target.
pub fn quadrotor_position_reference(params: &QuadrotorParams, t: usize) -> [f64; 3] {
    let frac = t as f64 / params.horizon as f64;
    [
        frac * params.target[0] + (1.0 - frac) * params.start[0],
        frac * params.target[1] + (1.0 - frac) * params.start[1],
        frac * params.target[2] + (1.0 - frac) * params.start[2],
    ]
}

pub fn build_quadrotor(
    params: &QuadrotorParams,
    obstacles: &ObstacleSpec,
) -> Result<OcpSpec, OcpError> {
    let mut a_c = DenseMatrix::zeros(6, 6);
    for i in 0..3 {
        a_c.set(i, 3 + i, 1.0);
    }
    let mut b_c = DenseMatrix::zeros(6, 3);
    for i in 0..3 {
        b_c.set(3 + i, i, 1.0 / params.mass);
    }
    let h_c = vec![0.0, 0.0, 0.0, 0.0, 0.0, -params.gravity];
    let (a, b, h) = zoh_discretize(&a_c, &b_c, &h_c, params.delta);

    let tau = params.horizon;
    let mut x_refs = Vec::with_capacity(tau);
    let mut stage_state = Vec::with_capacity(tau);
    for t in 1..=tau {
        let r_hat = quadrotor_position_reference(params, t);
        let mut x_ref = r_hat.to_vec();
        x_ref.extend([0.0, 0.0, 0.0]);
        x_refs.push(x_ref);
        let rows = linearize_obstacles(obstacles, [r_hat[0], r_hat[1]], 6).map_err(|e| {
            match e {
                OcpError::ReferenceAtCenter { obstacle, .. } => {
                    OcpError::ReferenceAtCenter { stage: t, obstacle }
                }
                other => other,
            }
        })?;
        stage_state.push(rows);
    }

    // Minimum vertical thrust ⟨e₃, u⟩ ≥ ρ₂.
    let d_t = DenseMatrix::from_rows(&[vec![0.0, 0.0, 1.0]]);
    let stage_input = vec![(d_t, vec![params.min_vertical_thrust]); tau];

    let cone = ConvexSet::ice_cream(params.half_angle, vec![0.0, 0.0, 1.0])
        .expect("valid half angle");
    let input_set = ConvexSet::cone_intersect_ball(cone, params.thrust_bound)
        .expect("positive thrust bound");

    Ok(OcpSpec {
        horizon: tau,
        a,
        b,
        h,
        x0: params.x0.clone().unwrap_or_else(|| {
            let mut x = params.start.to_vec();
            x.extend([0.0, 0.0, 0.0]);
            x
        }),
        q: params.q.clone().unwrap_or_else(|| {
            DenseMatrix::diagonal(&[1.0, 1.0, 1.0, 2.5, 2.5, 2.5])
        }),
        r: params
            .r
            .clone()
            .unwrap_or_else(|| DenseMatrix::identity(3).scaled(0.5)),
        x_refs,
        u_refs: vec![vec![0.0; 3]; tau],
        rate_bound: params.rate_bound,
        stage_state: Some(stage_state),
        stage_input: Some(stage_input),
        state_set: ConvexSet::Cartesian {
            factors: vec![
                ConvexSet::InfBall {
                    dim: 3,
                    radius: params.position_bound,
                },
                ConvexSet::Ball {
                    dim: 3,
                    radius: params.velocity_bound,
                    center: vec![0.0; 3],
                },
            ],
        },
        input_set,
    })
}

pub fn save_ocp(spec: &OcpSpec, path: &Path) -> Result<(), OcpError> {
    let text = serde_json::to_string_pretty(spec).map_err(|e| OcpError::Parse(e.to_string()))?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn load_ocp(path: &Path) -> Result<OcpSpec, OcpError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| {
        OcpError::Parse(format!("{} (line {}, column {})", e, e.line(), e.column()))
    })
}
