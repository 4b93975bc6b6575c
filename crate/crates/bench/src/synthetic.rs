//! Seeded random conic QPs with exactly known saddle points.
//!
//! The trick: draw the answer first. Pick `z*` strictly inside the box `D`,
//! split a random vector by the Moreau decomposition into a complementary
//! pair `s* = π_K[ξ] ∈ K`, `w* = ξ − s* ∈ K°` (orthogonal by construction),
//! then choose `g := Hz* − s*` and `p := −(Pz* + Hᵀw*)`. Stationarity at an
//! interior point, primal feasibility, dual feasibility and complementarity
//! all hold analytically, so `(z*, w*)` is a saddle point whose KKT
//! residuals are at roundoff level.

use pipg::geometry::ConvexSet;
use pipg::linalg::{BlockOperator, DenseMatrix};
use pipg::problem::{ConicProblem, QuadForm, SaddleReference};
use pipg::rng::Rng;

pub struct SyntheticInstance {
    pub problem: ConicProblem,
    pub reference: SaddleReference,
}

/// A random instance with `K = Zero × NonnegOrthant × SOC` and a box `D`.
/// With `strongly_convex` the objective gets a positive diagonal shift;
/// otherwise `P = GᵀG` with `G` rank-deficient, so µ = 0.
pub fn random_conic_qp(seed: u64, strongly_convex: bool) -> SyntheticInstance {
    let mut rng = Rng::new(seed.wrapping_mul(0x9e37_79b9).wrapping_add(17));
    let n = 4 + (rng.next_u64() as usize) % 9; // 4..=12 ≤ 20
    let zero_dim = 1 + (rng.next_u64() as usize) % 3;
    let orthant_dim = 1 + (rng.next_u64() as usize) % 4;
    let soc_dim = 3 + (rng.next_u64() as usize) % 3;
    let m = zero_dim + orthant_dim + soc_dim;

    let rank = if strongly_convex { n } else { n.saturating_sub(2).max(1) };
    let g_factor = DenseMatrix {
        rows: rank,
        cols: n,
        data: rng.normal_vec(rank * n),
    };
    let mut p_mat = g_factor.transpose().matmul(&g_factor);
    if strongly_convex {
        for i in 0..n {
            let v = p_mat.get(i, i) + 0.4;
            p_mat.set(i, i, v);
        }
    }

    let h = DenseMatrix {
        rows: m,
        cols: n,
        data: rng.normal_vec(m * n),
    };
    let cone = ConvexSet::Cartesian {
        factors: vec![
            ConvexSet::Zero { dim: zero_dim },
            ConvexSet::NonnegOrthant { dim: orthant_dim },
            ConvexSet::SecondOrderCone {
                dim: soc_dim,
                axis_index: 0,
            },
        ],
    };
    let lower: Vec<f64> = (0..n).map(|_| -1.5 - rng.uniform()).collect();
    let upper: Vec<f64> = (0..n).map(|_| 1.5 + rng.uniform()).collect();
    // Strictly interior so the normal cone of D at z* is trivial.
    let z_star: Vec<f64> = lower
        .iter()
        .zip(upper.iter())
        .map(|(&l, &u)| l + (0.25 + 0.5 * rng.uniform()) * (u - l))
        .collect();

    let xi = rng.normal_vec(m);
    let s_star = cone.project(&xi);
    let w_star: Vec<f64> = xi.iter().zip(s_star.iter()).map(|(a, b)| a - b).collect();

    let hz = h.matvec(&z_star);
    let g_vec: Vec<f64> = hz.iter().zip(s_star.iter()).map(|(a, b)| a - b).collect();
    let pz = p_mat.matvec(&z_star);
    let htw = h.transpose().matvec(&w_star);
    let p_vec: Vec<f64> = pz.iter().zip(htw.iter()).map(|(a, b)| -(a + b)).collect();

    let problem = ConicProblem::new(
        QuadForm::Dense { matrix: p_mat },
        p_vec,
        BlockOperator::from_dense(h),
        g_vec,
        cone,
        ConvexSet::Box { lower, upper },
    )
    .expect("synthetic instance construction");

    let residuals = problem.kkt_certificate(&z_star, &w_star, problem.default_probe_step());
    let tolerances = (1e-10, 1e-10, 1e-9);
    assert!(
        residuals.fixed_point <= tolerances.0
            && residuals.feasibility <= tolerances.1
            && residuals.complementarity <= tolerances.2,
        "constructed saddle point failed certification: {residuals:?}"
    );
    SyntheticInstance {
        problem,
        reference: SaddleReference {
            z_star,
            w_star,
            residuals,
            tolerances,
        },
    }
}

/// The 1-D analytic toy: minimize ½z² subject to z − 1 ≥ 0 over D = ℝ.
/// Optimum z* = 1 with multiplier w* = −1.
pub fn toy_instance() -> SyntheticInstance {
    let mut op = BlockOperator::new(1, 1);
    op.push_identity(0, 0, 1, 1.0);
    let problem = ConicProblem::new(
        QuadForm::Dense {
            matrix: DenseMatrix::identity(1),
        },
        vec![0.0],
        op,
        vec![1.0],
        ConvexSet::NonnegOrthant { dim: 1 },
        ConvexSet::Reals { dim: 1 },
    )
    .unwrap();
    let residuals = problem.kkt_certificate(&[1.0], &[-1.0], problem.default_probe_step());
    SyntheticInstance {
        reference: SaddleReference {
            z_star: vec![1.0],
            w_star: vec![-1.0],
            residuals,
            tolerances: (1e-12, 1e-12, 1e-12),
        },
        problem,
    }
}
