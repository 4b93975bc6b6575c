//! Minimal dense/block linear algebra.
//!
//! [`DenseMatrix`] is a row-major dense matrix. [`BlockOperator`] represents
//! a large structured matrix as a list of scaled dense or identity blocks and
//! supports `Hx` / `Hᵀy` without ever materializing the full matrix; the two
//! directions are exact adjoints of each other.
//!
//! The module also provides the three numeric services the solvers need:
//! a safety-inflated spectral norm estimate `σ ≥ ‖H‖²` (power iteration),
//! the curvature bounds `(µ, λ)` of a symmetric PSD matrix (Jacobi
//! eigenvalues), and zero-order-hold discretization of continuous linear
//! dynamics via the augmented matrix exponential.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Matrix is not symmetric within tolerance.
    NotSymmetric { asymmetry: f64 },
    /// Matrix has an eigenvalue below the PSD tolerance.
    Indefinite { min_eigenvalue: f64 },
    DimensionMismatch(String),
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NotSymmetric { asymmetry } => {
                write!(f, "matrix is not symmetric (asymmetry {asymmetry:.3e})")
            }
            LinalgError::Indefinite { min_eigenvalue } => {
                write!(f, "matrix is indefinite (min eigenvalue {min_eigenvalue:.3e})")
            }
            LinalgError::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
        }
    }
}

impl std::error::Error for LinalgError {}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        DenseMatrix { rows: r, cols: c, data }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = DenseMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// y += scale * A x
    pub fn matvec_acc(&self, x: &[f64], scale: f64, y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        assert_eq!(y.len(), self.rows, "matvec dimension mismatch");
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            y[r] += scale * acc;
        }
    }

    /// y += scale * Aᵀ x
    pub fn matvec_t_acc(&self, x: &[f64], scale: f64, y: &mut [f64]) {
        assert_eq!(x.len(), self.rows, "matvec_t dimension mismatch");
        assert_eq!(y.len(), self.cols, "matvec_t dimension mismatch");
        for r in 0..self.rows {
            let row = self.row(r);
            let s = scale * x[r];
            if s != 0.0 {
                for (yc, a) in y.iter_mut().zip(row.iter()) {
                    *yc += s * a;
                }
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_acc(x, 1.0, &mut y);
        y
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik != 0.0 {
                    for j in 0..other.cols {
                        out.data[i * other.cols + j] += aik * other.get(k, j);
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Max column-sum norm.
    pub fn one_norm(&self) -> f64 {
        let mut best: f64 = 0.0;
        for c in 0..self.cols {
            let mut s = 0.0;
            for r in 0..self.rows {
                s += self.get(r, c).abs();
            }
            best = best.max(s);
        }
        best
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// One placed block of a [`BlockOperator`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub row: usize,
    pub col: usize,
    pub scale: f64,
    pub kind: BlockKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum BlockKind {
    Identity { dim: usize },
    Dense { matrix: DenseMatrix },
}

impl Block {
    fn shape(&self) -> (usize, usize) {
        match &self.kind {
            BlockKind::Identity { dim } => (*dim, *dim),
            BlockKind::Dense { matrix } => (matrix.rows, matrix.cols),
        }
    }
}

/// A structured `m × n` linear operator given as a sum of placed blocks.
/// Overlapping blocks add. `apply` and `apply_transpose` are exact adjoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockOperator {
    pub rows: usize,
    pub cols: usize,
    pub blocks: Vec<Block>,
}

impl BlockOperator {
    pub fn new(rows: usize, cols: usize) -> Self {
        BlockOperator {
            rows,
            cols,
            blocks: Vec::new(),
        }
    }

    pub fn push(&mut self, block: Block) {
        let (br, bc) = block.shape();
        assert!(
            block.row + br <= self.rows && block.col + bc <= self.cols,
            "block placement ({},{})+({br},{bc}) outside operator {}x{}",
            block.row,
            block.col,
            self.rows,
            self.cols,
        );
        self.blocks.push(block);
    }

    pub fn push_identity(&mut self, row: usize, col: usize, dim: usize, scale: f64) {
        self.push(Block {
            row,
            col,
            scale,
            kind: BlockKind::Identity { dim },
        });
    }

    pub fn push_dense(&mut self, row: usize, col: usize, matrix: DenseMatrix, scale: f64) {
        self.push(Block {
            row,
            col,
            scale,
            kind: BlockKind::Dense { matrix },
        });
    }

    /// y = H x
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "apply dimension mismatch");
        assert_eq!(y.len(), self.rows, "apply dimension mismatch");
        y.fill(0.0);
        for b in &self.blocks {
            match &b.kind {
                BlockKind::Identity { dim } => {
                    let xs = &x[b.col..b.col + dim];
                    let ys = &mut y[b.row..b.row + dim];
                    if b.scale == 1.0 {
                        for (yo, xi) in ys.iter_mut().zip(xs.iter()) {
                            *yo += xi;
                        }
                    } else {
                        for (yo, xi) in ys.iter_mut().zip(xs.iter()) {
                            *yo += b.scale * xi;
                        }
                    }
                }
                BlockKind::Dense { matrix } => {
                    let xs = &x[b.col..b.col + matrix.cols];
                    matrix.matvec_acc(xs, b.scale, &mut y[b.row..b.row + matrix.rows]);
                }
            }
        }
    }

    /// x = Hᵀ y
    pub fn apply_transpose_into(&self, y: &[f64], x: &mut [f64]) {
        assert_eq!(y.len(), self.rows, "apply_transpose dimension mismatch");
        assert_eq!(x.len(), self.cols, "apply_transpose dimension mismatch");
        x.fill(0.0);
        for b in &self.blocks {
            match &b.kind {
                BlockKind::Identity { dim } => {
                    let ys = &y[b.row..b.row + dim];
                    let xs = &mut x[b.col..b.col + dim];
                    if b.scale == 1.0 {
                        for (xo, yi) in xs.iter_mut().zip(ys.iter()) {
                            *xo += yi;
                        }
                    } else {
                        for (xo, yi) in xs.iter_mut().zip(ys.iter()) {
                            *xo += b.scale * yi;
                        }
                    }
                }
                BlockKind::Dense { matrix } => {
                    let ys = &y[b.row..b.row + matrix.rows];
                    matrix.matvec_t_acc(ys, b.scale, &mut x[b.col..b.col + matrix.cols]);
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.cols];
        self.apply_transpose_into(y, &mut x);
        x
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for b in &self.blocks {
            match &b.kind {
                BlockKind::Identity { dim } => {
                    for i in 0..*dim {
                        let idx = (b.row + i) * self.cols + b.col + i;
                        out.data[idx] += b.scale;
                    }
                }
                BlockKind::Dense { matrix } => {
                    for r in 0..matrix.rows {
                        for c in 0..matrix.cols {
                            let idx = (b.row + r) * self.cols + b.col + c;
                            out.data[idx] += b.scale * matrix.get(r, c);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn from_dense(matrix: DenseMatrix) -> Self {
        let mut op = BlockOperator::new(matrix.rows, matrix.cols);
        op.push_dense(0, 0, matrix, 1.0);
        op
    }
}

/// Safety-inflated estimate of `‖H‖²` by power iteration on `x ↦ Hᵀ(Hx)`.
///
/// The returned value is `estimate · 1.001`; power iteration converges from
/// below, so the inflation keeps the estimate a valid upper bound at desk
/// scale. A zero operator yields 0. Deterministic given `seed`.
pub fn spectral_norm_sq(op: &BlockOperator, iters: usize, seed: u64) -> f64 {
    assert!(iters >= 1, "power iteration needs at least one step");
    let mut rng = crate::rng::Rng::new(seed);
    let mut x = rng.normal_vec(op.cols);
    let mut hx = vec![0.0; op.rows];
    let mut y = vec![0.0; op.cols];
    let mut estimate = 0.0;
    for _ in 0..iters {
        let nx = norm(&x);
        if nx == 0.0 || !nx.is_finite() {
            return 0.0;
        }
        for v in x.iter_mut() {
            *v /= nx;
        }
        op.apply_into(&x, &mut hx);
        op.apply_transpose_into(&hx, &mut y);
        // Rayleigh quotient of HᵀH at the unit vector x.
        estimate = dot(&x, &y);
        std::mem::swap(&mut x, &mut y);
    }
    if estimate <= 0.0 {
        0.0
    } else {
        estimate * 1.001
    }
}

/// Curvature bounds of a symmetric PSD matrix: `(µ, λ)` = (smallest, largest)
/// eigenvalue, with µ clamped to 0 when it falls below 1e−12. Rejects
/// asymmetry above 1e−10 and eigenvalues below −1e−8.
pub fn curvature_bounds(p: &DenseMatrix) -> Result<(f64, f64), LinalgError> {
    if p.rows != p.cols {
        return Err(LinalgError::DimensionMismatch(format!(
            "curvature_bounds needs a square matrix, got {}x{}",
            p.rows, p.cols
        )));
    }
    let mut asym: f64 = 0.0;
    for r in 0..p.rows {
        for c in (r + 1)..p.cols {
            asym = asym.max((p.get(r, c) - p.get(c, r)).abs());
        }
    }
    if asym > 1e-10 {
        return Err(LinalgError::NotSymmetric { asymmetry: asym });
    }
    if p.rows == 0 {
        return Ok((0.0, 0.0));
    }
    let eigs = symmetric_eigenvalues(p);
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min < -1e-8 {
        return Err(LinalgError::Indefinite { min_eigenvalue: min });
    }
    let mu = if min <= 1e-12 { 0.0 } else { min };
    Ok((mu, max.max(0.0)))
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(p: &DenseMatrix) -> Vec<f64> {
    assert_eq!(p.rows, p.cols);
    let n = p.rows;
    let mut a = p.clone();
    // Symmetrize away roundoff so the rotations stay consistent.
    for r in 0..n {
        for c in (r + 1)..n {
            let v = 0.5 * (a.get(r, c) + a.get(c, r));
            a.set(r, c, v);
            a.set(c, r, v);
        }
    }
    let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for r in 0..n {
            for c in (r + 1)..n {
                off = off.max(a.get(r, c).abs());
            }
        }
        if off <= tol {
            break;
        }
        for pi in 0..n {
            for qi in (pi + 1)..n {
                let apq = a.get(pi, qi);
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a.get(pi, pi);
                let aqq = a.get(qi, qi);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, pi);
                    let akq = a.get(k, qi);
                    a.set(k, pi, c * akp - s * akq);
                    a.set(k, qi, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(pi, k);
                    let aqk = a.get(qi, k);
                    a.set(pi, k, c * apk - s * aqk);
                    a.set(qi, k, s * apk + c * aqk);
                }
            }
        }
    }
    (0..n).map(|i| a.get(i, i)).collect()
}

/// Solve `A X = B` by LU with partial pivoting, overwriting nothing.
pub fn lu_solve(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.rows, a.cols, "lu_solve needs a square matrix");
    assert_eq!(a.rows, b.rows, "lu_solve rhs mismatch");
    let n = a.rows;
    let m = b.cols;
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let mut piv = k;
        let mut best = lu.get(k, k).abs();
        for r in (k + 1)..n {
            let v = lu.get(r, k).abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        assert!(best > 0.0, "singular matrix in lu_solve");
        if piv != k {
            for c in 0..n {
                let tmp = lu.get(k, c);
                lu.set(k, c, lu.get(piv, c));
                lu.set(piv, c, tmp);
            }
            for c in 0..m {
                let tmp = x.get(k, c);
                x.set(k, c, x.get(piv, c));
                x.set(piv, c, tmp);
            }
        }
        let d = lu.get(k, k);
        for r in (k + 1)..n {
            let f = lu.get(r, k) / d;
            lu.set(r, k, f);
            if f != 0.0 {
                for c in (k + 1)..n {
                    let v = lu.get(r, c) - f * lu.get(k, c);
                    lu.set(r, c, v);
                }
                for c in 0..m {
                    let v = x.get(r, c) - f * x.get(k, c);
                    x.set(r, c, v);
                }
            }
        }
    }
    for k in (0..n).rev() {
        for c in 0..m {
            let mut v = x.get(k, c);
            for j in (k + 1)..n {
                v -= lu.get(k, j) * x.get(j, c);
            }
            x.set(k, c, v / lu.get(k, k));
        }
    }
    x
}

/// Matrix exponential by scaling-and-squaring around a diagonal Padé(6,6)
/// core; the input is scaled until its 1-norm is at most 0.5.
pub fn expm(m: &DenseMatrix) -> DenseMatrix {
    assert_eq!(m.rows, m.cols, "expm needs a square matrix");
    let n = m.rows;
    let norm = m.one_norm();
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m.scaled(scale);
    // Padé(6,6): p(A) q(A)^{-1} with q(x) = p(-x).
    let coeffs = pade6_coefficients();
    let mut power = DenseMatrix::identity(n);
    let mut p = DenseMatrix::zeros(n, n);
    let mut q = DenseMatrix::zeros(n, n);
    for (k, &ck) in coeffs.iter().enumerate() {
        for i in 0..n * n {
            p.data[i] += ck * power.data[i];
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            q.data[i] += sign * ck * power.data[i];
        }
        if k + 1 < coeffs.len() {
            power = a.matmul(&power);
        }
    }
    let mut result = lu_solve(&q, &p);
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

fn pade6_coefficients() -> [f64; 7] {
    // c_k = (12-k)! 6! / (12! k! (6-k)!)
    let mut c = [0.0; 7];
    c[0] = 1.0;
    for k in 0..6 {
        c[k + 1] = c[k] * ((6 - k) as f64) / (((12 - k) * (k + 1)) as f64);
    }
    c
}

/// Zero-order-hold discretization of `dx/ds = A_c x + B_c u + h_c`:
/// `A = exp(A_c Δ)`, `B = (∫₀^Δ exp(A_c s) ds) B_c`, `h = (∫₀^Δ exp(A_c s) ds) h_c`,
/// computed from the exponential of the augmented matrix `[[A_c, I], [0, 0]] Δ`
/// whose top-right block is the integral.
pub fn zoh_discretize(
    a_c: &DenseMatrix,
    b_c: &DenseMatrix,
    h_c: &[f64],
    delta: f64,
) -> (DenseMatrix, DenseMatrix, Vec<f64>) {
    assert!(delta > 0.0, "sampling period must be positive");
    let n = a_c.rows;
    assert_eq!(a_c.cols, n, "A_c must be square");
    assert_eq!(b_c.rows, n, "B_c row count must match A_c");
    assert_eq!(h_c.len(), n, "h_c length must match A_c");
    let mut aug = DenseMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            aug.set(r, c, a_c.get(r, c) * delta);
        }
        aug.set(r, n + r, delta);
    }
    let e = expm(&aug);
    let mut a = DenseMatrix::zeros(n, n);
    let mut integral = DenseMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            a.set(r, c, e.get(r, c));
            integral.set(r, c, e.get(r, n + c));
        }
    }
    let b = integral.matmul(b_c);
    let h = integral.matvec(h_c);
    (a, b, h)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
