//! First-order conic optimization: the proportional-integral projected
//! gradient method (PIPG) together with the ADMM, PIPGeq and PDHG baselines
//! it is usually compared against.
//!
//! The problem class is
//!
//! ```text
//!     minimize    f(z) = ½ zᵀPz + ⟨p, z⟩
//!     subject to  Hz − g ∈ K,   z ∈ D,
//! ```
//!
//! where `K` is a closed convex cone and `D` a closed convex set, both given
//! as [`geometry::ConvexSet`] values with exact projection rules. All solvers
//! touch the constraint matrix only through `Hz` and `Hᵀw`, so `H` is a
//! structured [`linalg::BlockOperator`].
//!
//! The [`ocp`] module builds conic programs from discrete-time optimal
//! control problems (tracking objective, input rate limits, per-stage affine
//! constraints) and ships the two standard benchmark instances: an
//! oscillating-masses chain and a quadrotor path-planning problem with
//! linearized obstacle-avoidance constraints.

pub mod geometry;
pub mod linalg;
pub mod ocp;
pub mod problem;
pub mod rng;
pub mod solvers;
