//! Oracle-backed tests for the block operator, the spectral-norm bound, and
//! the ZOH discretization.

use pipg::linalg::{
    curvature_bounds, dot, spectral_norm_sq, zoh_discretize, BlockOperator, DenseMatrix,
};
use pipg::rng::Rng;

fn random_block_operator(rng: &mut Rng, rows: usize, cols: usize) -> BlockOperator {
    let mut op = BlockOperator::new(rows, cols);
    for _ in 0..4 {
        let br = 1 + (rng.next_u64() as usize) % rows.min(3);
        let bc = 1 + (rng.next_u64() as usize) % cols.min(3);
        let r0 = (rng.next_u64() as usize) % (rows - br + 1);
        let c0 = (rng.next_u64() as usize) % (cols - bc + 1);
        let m = DenseMatrix {
            rows: br,
            cols: bc,
            data: rng.normal_vec(br * bc),
        };
        op.push_dense(r0, c0, m, rng.normal());
    }
    let d = rows.min(cols);
    if d > 0 {
        op.push_identity(0, 0, d, rng.normal());
    }
    op
}

/// Products of a block operator match its densified matrix, both ways.
#[test]
fn block_products_match_densified_oracle() {
    let mut rng = Rng::new(211);
    for _ in 0..20 {
        let rows = 2 + (rng.next_u64() as usize) % 6;
        let cols = 2 + (rng.next_u64() as usize) % 6;
        let op = random_block_operator(&mut rng, rows, cols);
        let dense = op.to_dense();
        let x = rng.normal_vec(cols);
        let y = rng.normal_vec(rows);
        let hx = op.apply(&x);
        let hx_oracle = dense.matvec(&x);
        for (a, b) in hx.iter().zip(hx_oracle.iter()) {
            assert!((a - b).abs() <= 1e-12, "apply disagrees with densified matrix");
        }
        let hty = op.apply_transpose(&y);
        let hty_oracle = dense.transpose().matvec(&y);
        for (a, b) in hty.iter().zip(hty_oracle.iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

/// ⟨Hx, y⟩ = ⟨x, Hᵀy⟩ for every constructed operator.
#[test]
fn apply_and_transpose_are_adjoint() {
    let mut rng = Rng::new(223);
    for _ in 0..50 {
        let rows = 2 + (rng.next_u64() as usize) % 7;
        let cols = 2 + (rng.next_u64() as usize) % 7;
        let op = random_block_operator(&mut rng, rows, cols);
        let x = rng.normal_vec(cols);
        let y = rng.normal_vec(rows);
        let lhs = dot(&op.apply(&x), &y);
        let rhs = dot(&x, &op.apply_transpose(&y));
        assert!(
            (lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()),
            "adjoint identity broken: {lhs} vs {rhs}"
        );
    }
}

/// One-sided Jacobi SVD: orthogonalize the columns of A; the column norms of
/// the result are the singular values. Independent of the library's power
/// iteration and symmetric eigensolver.
fn largest_singular_value_oracle(a: &DenseMatrix) -> f64 {
    let mut cols: Vec<Vec<f64>> = (0..a.cols)
        .map(|c| (0..a.rows).map(|r| a.get(r, c)).collect())
        .collect();
    let n = cols.len();
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = dot(&cols[p], &cols[q]);
                let app = dot(&cols[p], &cols[p]);
                let aqq = dot(&cols[q], &cols[q]);
                off = off.max(apq.abs() / (app * aqq).sqrt().max(1e-300));
                if apq.abs() <= 1e-15 * (app * aqq).sqrt() {
                    continue;
                }
                let theta = 0.5 * ((2.0 * apq).atan2(aqq - app));
                let (s, c) = theta.sin_cos();
                for r in 0..a.rows {
                    let vp = cols[p][r];
                    let vq = cols[q][r];
                    cols[p][r] = c * vp - s * vq;
                    cols[q][r] = s * vp + c * vq;
                }
            }
        }
        if off <= 1e-14 {
            break;
        }
    }
    cols.iter()
        .map(|c| dot(c, c).sqrt())
        .fold(0.0f64, f64::max)
}

/// The safety-inflated σ dominates the true ‖H‖² on random desk-scale
/// operators and stays within the 0.1% inflation of it.
#[test]
fn sigma_bounds_true_spectral_norm() {
    let mut rng = Rng::new(227);
    for i in 0..25 {
        let rows = 3 + (rng.next_u64() as usize) % 8;
        let cols = 3 + (rng.next_u64() as usize) % 8;
        let op = random_block_operator(&mut rng, rows, cols);
        let truth = largest_singular_value_oracle(&op.to_dense());
        let sigma = spectral_norm_sq(&op, 200, 1000 + i);
        assert!(
            sigma >= truth * truth * (1.0 - 1e-9),
            "sigma {sigma} fails to dominate ‖H‖² = {}",
            truth * truth
        );
        assert!(
            sigma <= truth * truth * 1.0011,
            "sigma {sigma} overshoots ‖H‖² = {} beyond the inflation",
            truth * truth
        );
    }
}

/// σ of the stacked oscillating-masses operator against the dense oracle.
#[test]
fn sigma_of_stacked_masses_operator() {
    let params = pipg::ocp::MassesParams {
        mass_count: 2,
        horizon: 6,
        ..Default::default()
    };
    let prob = pipg::ocp::stack_ocp(&pipg::ocp::build_masses(&params)).unwrap();
    let truth = largest_singular_value_oracle(&prob.operator().to_dense());
    let sigma = prob.sigma();
    assert!(sigma >= truth * truth * (1.0 - 1e-9));
    assert!(sigma <= truth * truth * 1.0011);
}

/// Semigroup property A(2Δ) = A(Δ)² for random stable continuous dynamics.
#[test]
fn zoh_satisfies_semigroup_property() {
    let mut rng = Rng::new(229);
    for _ in 0..15 {
        let n = 2 + (rng.next_u64() as usize) % 4;
        // Stable-ish: random matrix shifted toward negative diagonal.
        let mut a_c = DenseMatrix {
            rows: n,
            cols: n,
            data: rng.normal_vec(n * n),
        };
        for i in 0..n {
            let v = a_c.get(i, i) - 1.5;
            a_c.set(i, i, v);
        }
        let b_c = DenseMatrix::identity(n);
        let h_c = vec![0.0; n];
        let delta = 0.1 + rng.uniform() * 0.4;
        let (a1, _, _) = zoh_discretize(&a_c, &b_c, &h_c, delta);
        let (a2, _, _) = zoh_discretize(&a_c, &b_c, &h_c, 2.0 * delta);
        let a1_sq = a1.matmul(&a1);
        assert!(
            a2.max_abs_diff(&a1_sq) <= 1e-10,
            "semigroup violated by {}",
            a2.max_abs_diff(&a1_sq)
        );
    }
}

/// Degree-30 Taylor with heavy scaling as an independent expm oracle.
fn expm_taylor_oracle(m: &DenseMatrix) -> DenseMatrix {
    let n = m.rows;
    let mut scale = 1.0;
    let mut squarings = 0;
    while m.one_norm() * scale > 0.05 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m.scaled(scale);
    let mut sum = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&a).scaled(1.0 / k as f64);
        sum = sum.add(&term);
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// The oscillating-masses discretization against the Taylor oracle, plus
/// the exact h = 0.
#[test]
fn masses_discretization_matches_taylor_oracle() {
    let n = 4;
    let l = pipg::ocp::spring_chain_matrix(n);
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
    let delta = 0.25;
    let (a, b, h) = zoh_discretize(&a_c, &b_c, &vec![0.0; 2 * n], delta);
    assert!(h.iter().all(|&v| v == 0.0), "h must vanish exactly");

    let a_oracle = expm_taylor_oracle(&a_c.scaled(delta));
    assert!(a.max_abs_diff(&a_oracle) <= 1e-12);

    // Integral oracle via the augmented construction with the Taylor core.
    let mut aug = DenseMatrix::zeros(4 * n, 4 * n);
    for r in 0..2 * n {
        for c in 0..2 * n {
            aug.set(r, c, a_c.get(r, c) * delta);
        }
        aug.set(r, 2 * n + r, delta);
    }
    let e = expm_taylor_oracle(&aug);
    let mut b_oracle = DenseMatrix::zeros(2 * n, n);
    for r in 0..2 * n {
        for c in 0..n {
            let mut acc = 0.0;
            for k in 0..2 * n {
                acc += e.get(r, 2 * n + k) * b_c.get(k, c);
            }
            b_oracle.set(r, c, acc);
        }
    }
    assert!(b.max_abs_diff(&b_oracle) <= 1e-12);
}

/// Quadrotor dynamics are nilpotent: the closed forms are matched to
/// machine precision, including the gravity offsets −g₀Δ²/2 and −g₀Δ.
#[test]
fn quadrotor_discretization_matches_nilpotent_closed_form() {
    let delta = 0.25;
    let m0 = 0.35;
    let g0 = 9.8;
    let mut a_c = DenseMatrix::zeros(6, 6);
    for i in 0..3 {
        a_c.set(i, 3 + i, 1.0);
    }
    let mut b_c = DenseMatrix::zeros(6, 3);
    for i in 0..3 {
        b_c.set(3 + i, i, 1.0 / m0);
    }
    let h_c = vec![0.0, 0.0, 0.0, 0.0, 0.0, -g0];
    let (a, b, h) = zoh_discretize(&a_c, &b_c, &h_c, delta);

    let mut a_expect = DenseMatrix::identity(6);
    for i in 0..3 {
        a_expect.set(i, 3 + i, delta);
    }
    assert!(a.max_abs_diff(&a_expect) <= 1e-12);

    let mut b_expect = DenseMatrix::zeros(6, 3);
    for i in 0..3 {
        b_expect.set(i, i, delta * delta / (2.0 * m0));
        b_expect.set(3 + i, i, delta / m0);
    }
    assert!(b.max_abs_diff(&b_expect) <= 1e-12);

    let h_expect = [
        0.0,
        0.0,
        -g0 * delta * delta / 2.0, // −0.30625
        0.0,
        0.0,
        -g0 * delta, // −2.45
    ];
    for (got, want) in h.iter().zip(h_expect.iter()) {
        assert!((got - want).abs() <= 1e-12, "h {h:?}");
    }
    assert!((h[2] + 0.30625).abs() <= 1e-12);
    assert!((h[5] + 2.45).abs() <= 1e-12);
}

/// Extreme eigenvalues of the quadrotor weight blocks: the stacked objective
/// has curvature extremes over {1, 2.5} and {0.5}.
#[test]
fn quadrotor_weight_curvature() {
    let q = DenseMatrix::diagonal(&[1.0, 1.0, 1.0, 2.5, 2.5, 2.5]);
    let r = DenseMatrix::identity(3).scaled(0.5);
    let (mq, lq) = curvature_bounds(&q).unwrap();
    let (mr, lr) = curvature_bounds(&r).unwrap();
    assert_eq!((mq.min(mr), lq.max(lr)), (0.5, 2.5));
}

/// Jacobi eigenvalues against an analytically known spectrum.
#[test]
fn jacobi_eigenvalues_on_known_matrix() {
    // Eigenvalues of [[2, 1], [1, 2]] are 1 and 3.
    let m = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
    let (mu, lambda) = curvature_bounds(&m).unwrap();
    assert!((mu - 1.0).abs() <= 1e-12);
    assert!((lambda - 3.0).abs() <= 1e-12);
}
