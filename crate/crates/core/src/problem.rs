//! The conic-program data model: a quadratic objective `f(z) = ½zᵀPz + ⟨p,z⟩`
//! minimized over `z ∈ D` subject to `Hz − g ∈ K`, together with the
//! Lagrangian, error metrics, a KKT certificate, and problem-file I/O.

use crate::geometry::ConvexSet;
use crate::linalg::{curvature_bounds, dot, spectral_norm_sq, BlockOperator, DenseMatrix};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::Path;

#[derive(Debug)]
pub enum ProblemError {
    Dimension(String),
    Curvature(crate::linalg::LinalgError),
    NotACone,
    Geometry(crate::geometry::GeometryError),
    Io(std::io::Error),
    /// Malformed problem file; carries serde_json's line/column location.
    Parse(String),
    /// A reference with ‖z*‖ = 0 cannot normalize the error metrics.
    ZeroReference,
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::Dimension(msg) => write!(f, "dimension error: {msg}"),
            ProblemError::Curvature(e) => write!(f, "objective curvature: {e}"),
            ProblemError::NotACone => write!(f, "constraint set K must be a cone"),
            ProblemError::Geometry(e) => write!(f, "{e}"),
            ProblemError::Io(e) => write!(f, "io error: {e}"),
            ProblemError::Parse(msg) => write!(f, "problem file parse error: {msg}"),
            ProblemError::ZeroReference => {
                write!(f, "error metrics are undefined for a zero reference solution")
            }
        }
    }
}

impl std::error::Error for ProblemError {}

impl From<std::io::Error> for ProblemError {
    fn from(e: std::io::Error) -> Self {
        ProblemError::Io(e)
    }
}

impl From<crate::geometry::GeometryError> for ProblemError {
    fn from(e: crate::geometry::GeometryError) -> Self {
        ProblemError::Geometry(e)
    }
}

/// The quadratic form `P`, dense or block-diagonal with repeated blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum QuadForm {
    Dense { matrix: DenseMatrix },
    /// Block-diagonal: each entry is `count` copies of `block` in order.
    BlockDiag { blocks: Vec<(usize, DenseMatrix)> },
}

impl QuadForm {
    pub fn dim(&self) -> usize {
        match self {
            QuadForm::Dense { matrix } => matrix.rows,
            QuadForm::BlockDiag { blocks } => {
                blocks.iter().map(|(count, b)| count * b.rows).sum()
            }
        }
    }

    /// y = P z
    pub fn apply_into(&self, z: &[f64], y: &mut [f64]) {
        match self {
            QuadForm::Dense { matrix } => {
                y.fill(0.0);
                matrix.matvec_acc(z, 1.0, y);
            }
            QuadForm::BlockDiag { blocks } => {
                y.fill(0.0);
                let mut offset = 0;
                for (count, b) in blocks {
                    for _ in 0..*count {
                        b.matvec_acc(&z[offset..offset + b.cols], 1.0, &mut y[offset..offset + b.rows]);
                        offset += b.rows;
                    }
                }
            }
        }
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; z.len()];
        self.apply_into(z, &mut y);
        y
    }

    /// `(µ, λ)`: extreme eigenvalues, per block for the block-diagonal form.
    pub fn curvature(&self) -> Result<(f64, f64), crate::linalg::LinalgError> {
        match self {
            QuadForm::Dense { matrix } => curvature_bounds(matrix),
            QuadForm::BlockDiag { blocks } => {
                let mut mu = f64::INFINITY;
                let mut lambda: f64 = 0.0;
                for (_, b) in blocks {
                    let (bm, bl) = curvature_bounds(b)?;
                    mu = mu.min(bm);
                    lambda = lambda.max(bl);
                }
                if blocks.is_empty() {
                    return Ok((0.0, 0.0));
                }
                Ok((mu, lambda))
            }
        }
    }
}

/// Residuals of the saddle-point optimality conditions at a candidate
/// `(z, w)`: a zero triple (plus polar membership) certifies optimality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// ‖z − π_D[z − η(∇f(z) + Hᵀw)]‖ for the probe step η.
    pub fixed_point: f64,
    /// d_K(Hz − g)
    pub feasibility: f64,
    /// |⟨Hz − g, w⟩|
    pub complementarity: f64,
    /// ‖w − π_{K°}[w]‖
    pub polar_membership: f64,
}

/// A certified saddle point together with the residuals measured for it and
/// the tolerances they were required to meet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleReference {
    pub z_star: Vec<f64>,
    pub w_star: Vec<f64>,
    pub residuals: KktResiduals,
    /// (fixed-point, feasibility, complementarity) tolerances the residuals
    /// were checked against when the reference was produced.
    pub tolerances: (f64, f64, f64),
}

impl SaddleReference {
    pub fn z_norm_sq(&self) -> f64 {
        dot(&self.z_star, &self.z_star)
    }
}

/// The full problem instance with cached curvature and operator-norm bounds.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    quad: QuadForm,
    lin: Vec<f64>,
    op: BlockOperator,
    offset: Vec<f64>,
    cone: ConvexSet,
    set: ConvexSet,
    mu: f64,
    lambda: f64,
    sigma: f64,
}

/// Power-iteration length used when caching σ at construction.
const SIGMA_POWER_ITERS: usize = 200;
/// Fixed internal seed so σ is a pure function of the operator.
const SIGMA_SEED: u64 = 0x5eed_0001;

impl ConicProblem {
    pub fn new(
        quad: QuadForm,
        lin: Vec<f64>,
        op: BlockOperator,
        offset: Vec<f64>,
        cone: ConvexSet,
        set: ConvexSet,
    ) -> Result<Self, ProblemError> {
        let n = quad.dim();
        if lin.len() != n {
            return Err(ProblemError::Dimension(format!(
                "p has length {}, P is {n}x{n}",
                lin.len()
            )));
        }
        if op.cols != n {
            return Err(ProblemError::Dimension(format!(
                "H has {} columns, variable dimension is {n}",
                op.cols
            )));
        }
        if offset.len() != op.rows {
            return Err(ProblemError::Dimension(format!(
                "g has length {}, H has {} rows",
                offset.len(),
                op.rows
            )));
        }
        if cone.dim() != op.rows {
            return Err(ProblemError::Dimension(format!(
                "K has dimension {}, H has {} rows",
                cone.dim(),
                op.rows
            )));
        }
        if set.dim() != n {
            return Err(ProblemError::Dimension(format!(
                "D has dimension {}, variable dimension is {n}",
                set.dim()
            )));
        }
        if !cone.is_cone() {
            return Err(ProblemError::NotACone);
        }
        cone.validate()?;
        set.validate()?;
        let (mu, lambda) = quad.curvature().map_err(ProblemError::Curvature)?;
        let mut sigma = spectral_norm_sq(&op, SIGMA_POWER_ITERS, SIGMA_SEED);
        if sigma == 0.0 {
            // With H = 0 the dual is inert; a tiny positive σ keeps the
            // strongly-convex step rule finite.
            sigma = 1e-12;
        }
        Ok(ConicProblem {
            quad,
            lin,
            op,
            offset,
            cone,
            set,
            mu,
            lambda,
            sigma,
        })
    }

    pub fn n(&self) -> usize {
        self.lin.len()
    }

    pub fn m(&self) -> usize {
        self.offset.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn quad(&self) -> &QuadForm {
        &self.quad
    }

    pub fn lin(&self) -> &[f64] {
        &self.lin
    }

    pub fn operator(&self) -> &BlockOperator {
        &self.op
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn cone(&self) -> &ConvexSet {
        &self.cone
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    /// f(z) = ½ zᵀPz + ⟨p, z⟩
    pub fn objective(&self, z: &[f64]) -> f64 {
        let pz = self.quad.apply(z);
        0.5 * dot(z, &pz) + dot(&self.lin, z)
    }

    /// ∇f(z) = Pz + p
    pub fn gradient_into(&self, z: &[f64], out: &mut [f64]) {
        self.quad.apply_into(z, out);
        for (o, &p) in out.iter_mut().zip(self.lin.iter()) {
            *o += p;
        }
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        self.gradient_into(z, &mut out);
        out
    }

    /// Bregman divergence f(z) − f(z′) − ⟨∇f(z′), z − z′⟩; for the quadratic
    /// objective this equals ½‖z − z′‖²_P.
    pub fn bregman(&self, z: &[f64], z_prime: &[f64]) -> f64 {
        let g = self.gradient(z_prime);
        let mut lin_term = 0.0;
        for ((&a, &b), &gi) in z.iter().zip(z_prime.iter()).zip(g.iter()) {
            lin_term += gi * (a - b);
        }
        self.objective(z) - self.objective(z_prime) - lin_term
    }

    /// out = Hz − g
    pub fn residual_into(&self, z: &[f64], out: &mut [f64]) {
        self.op.apply_into(z, out);
        for (o, &g) in out.iter_mut().zip(self.offset.iter()) {
            *o -= g;
        }
    }

    pub fn residual(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        self.residual_into(z, &mut out);
        out
    }

    /// L(z, w) = f(z) + ⟨Hz − g, w⟩
    pub fn lagrangian(&self, z: &[f64], w: &[f64]) -> f64 {
        let r = self.residual(z);
        self.objective(z) + dot(&r, w)
    }

    /// `(error_opt, error_fea)` of a candidate `z` against a reference:
    /// ‖z − z*‖²/‖z*‖² and d_K(Hz − g)/‖z*‖². Rejects z* = 0.
    pub fn error_metrics(
        &self,
        z: &[f64],
        reference: &SaddleReference,
    ) -> Result<(f64, f64), ProblemError> {
        let norm_sq = reference.z_norm_sq();
        if norm_sq == 0.0 {
            return Err(ProblemError::ZeroReference);
        }
        let diff_sq: f64 = z
            .iter()
            .zip(reference.z_star.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let fea = self.cone.dist_sq_half(&self.residual(z));
        Ok((diff_sq / norm_sq, fea / norm_sq))
    }

    /// KKT residuals at `(z, w)` with probe step `step_probe` (any positive
    /// value yields an equivalent zero-residual condition; 1/λ scales it
    /// sensibly).
    pub fn kkt_certificate(&self, z: &[f64], w: &[f64], step_probe: f64) -> KktResiduals {
        assert!(step_probe > 0.0, "probe step must be positive");
        let mut grad = vec![0.0; self.n()];
        self.gradient_into(z, &mut grad);
        let mut htw = vec![0.0; self.n()];
        self.op.apply_transpose_into(w, &mut htw);
        let probe: Vec<f64> = z
            .iter()
            .zip(grad.iter().zip(htw.iter()))
            .map(|(&zi, (&gi, &hi))| zi - step_probe * (gi + hi))
            .collect();
        let projected = self.set.project(&probe);
        let fixed_point = crate::linalg::norm_diff(z, &projected);

        let r = self.residual(z);
        let feasibility = self.cone.dist_sq_half(&r);
        let complementarity = dot(&r, w).abs();

        let wp = self.cone.moreau_polar_project(w);
        let polar_membership = crate::linalg::norm_diff(w, &wp);

        KktResiduals {
            fixed_point,
            feasibility,
            complementarity,
            polar_membership,
        }
    }

    /// Default probe step 1/λ (1 when λ = 0).
    pub fn default_probe_step(&self) -> f64 {
        if self.lambda > 0.0 {
            1.0 / self.lambda
        } else {
            1.0
        }
    }
}

/// On-disk form: self-describing tagged records, JSON-shaped.
#[derive(Serialize, Deserialize)]
struct ProblemFile {
    n: usize,
    m: usize,
    #[serde(rename = "P")]
    quad: QuadForm,
    p: Vec<f64>,
    #[serde(rename = "H")]
    op: BlockOperator,
    g: Vec<f64>,
    #[serde(rename = "K")]
    cone: ConvexSet,
    #[serde(rename = "D")]
    set: ConvexSet,
}

pub fn save_problem(prob: &ConicProblem, path: &Path) -> Result<(), ProblemError> {
    let file = ProblemFile {
        n: prob.n(),
        m: prob.m(),
        quad: prob.quad.clone(),
        p: prob.lin.clone(),
        op: prob.op.clone(),
        g: prob.offset.clone(),
        cone: prob.cone.clone(),
        set: prob.set.clone(),
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| ProblemError::Parse(e.to_string()))?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn load_problem(path: &Path) -> Result<ConicProblem, ProblemError> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

pub fn parse_problem(text: &str) -> Result<ConicProblem, ProblemError> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| {
        ProblemError::Parse(format!(
            "{} (line {}, column {})",
            e,
            e.line(),
            e.column()
        ))
    })?;
    if file.p.len() != file.n || file.g.len() != file.m {
        return Err(ProblemError::Parse(format!(
            "declared sizes n={}, m={} do not match data lengths {}, {}",
            file.n,
            file.m,
            file.p.len(),
            file.g.len()
        )));
    }
    ConicProblem::new(file.quad, file.p, file.op, file.g, file.cone, file.set)
}
