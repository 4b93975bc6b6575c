//! ADMM on the slack form `Hz − y = g, y ∈ K, z ∈ D`:
//!
//! ```text
//!     z^{j+1} = argmin_{z∈D} f(z) + (α/2)‖Hz − y^j − g + w^j‖²
//!     y^{j+1} = π_K[ Hz^{j+1} − g + w^j ]
//!     w^{j+1} = w^j + Hz^{j+1} − y^{j+1} − g
//! ```
//!
//! The argmin is solved inexactly by an accelerated projected-gradient loop
//! on the `(λ + ασ)`-smooth subobjective, warm-started at the previous
//! iterate and terminated on the gradient-mapping norm. Every projection
//! onto `D` is counted; subproblems that hit the iteration cap are flagged
//! in the trace rather than treated as fatal.

use super::{now, LoggedPoint, SolveTrace, SolverConfig, SolverError};
use crate::problem::ConicProblem;

pub fn admm_solve(
    prob: &ConicProblem,
    alpha: f64,
    config: &SolverConfig,
) -> Result<SolveTrace, SolverError> {
    config.validate()?;
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(SolverError::InvalidConfig(format!(
            "ADMM penalty must be positive, got {alpha}"
        )));
    }

    let start = now();
    let n = prob.n();
    let m = prob.m();
    let (z_seed, w_seed, y_seed) = config.draw_initials(n, m);

    let mut z = prob.set().project(&z_seed);
    let mut y = prob.cone().project(&y_seed);
    let mut w = w_seed; // w¹ ∈ ℝ^m is unconstrained

    let total_updates = config.max_iters - 1;
    let stride = config.stride();

    // Inner-loop workspace.
    let smooth = prob.lambda() + alpha * prob.sigma();
    let step = 1.0 / smooth;
    let momentum_strong = if prob.mu() > 0.0 {
        let q = (prob.mu() / smooth).sqrt();
        Some((1.0 - q) / (1.0 + q))
    } else {
        None
    };

    let mut target = vec![0.0; m]; // c = y + g − w
    let mut hz = vec![0.0; m];
    let mut inner_x = vec![0.0; n];
    let mut inner_y = vec![0.0; n];
    let mut inner_x_new = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut tmp_m = vec![0.0; m];
    let mut tmp_n = vec![0.0; n];

    let mut inner_projections = 0usize;
    let mut inner_failures = 0usize;
    let mut logged = Vec::new();
    logged.push(LoggedPoint {
        iter: 0,
        epoch: 0,
        epoch_iter: 0,
        z: z.clone(),
        w: None,
        v: None,
        ergodic: None,
    });

    for outer in 1..=total_updates {
        for i in 0..m {
            target[i] = y[i] + prob.offset()[i] - w[i];
        }

        // Inner accelerated projected gradient on
        //   φ(z) = f(z) + (α/2)‖Hz − c‖².
        inner_x.copy_from_slice(&z);
        inner_y.copy_from_slice(&z);
        let mut fista_t = 1.0f64;
        let mut converged = false;
        for _ in 0..config.inner_max_iters {
            prob.operator().apply_into(&inner_y, &mut tmp_m);
            for i in 0..m {
                tmp_m[i] -= target[i];
            }
            prob.gradient_into(&inner_y, &mut grad);
            prob.operator().apply_transpose_into(&tmp_m, &mut tmp_n);
            for i in 0..n {
                tmp_n[i] = inner_y[i] - step * (grad[i] + alpha * tmp_n[i]);
            }
            prob.set().project_into(&tmp_n, &mut inner_x_new);
            inner_projections += 1;

            let gm = crate::linalg::norm_diff(&inner_y, &inner_x_new) / step;
            if gm <= config.inner_tolerance {
                inner_x.copy_from_slice(&inner_x_new);
                converged = true;
                break;
            }

            let theta = match momentum_strong {
                Some(t) => t,
                None => {
                    let t_new = 0.5 * (1.0 + (1.0 + 4.0 * fista_t * fista_t).sqrt());
                    let th = (fista_t - 1.0) / t_new;
                    fista_t = t_new;
                    th
                }
            };
            for i in 0..n {
                inner_y[i] = inner_x_new[i] + theta * (inner_x_new[i] - inner_x[i]);
            }
            std::mem::swap(&mut inner_x, &mut inner_x_new);
        }
        if !converged {
            inner_failures += 1;
        }
        z.copy_from_slice(&inner_x);

        // y and w updates.
        prob.operator().apply_into(&z, &mut hz);
        for i in 0..m {
            tmp_m[i] = hz[i] - prob.offset()[i] + w[i];
        }
        prob.cone().project_into(&tmp_m, &mut y);
        for i in 0..m {
            w[i] += hz[i] - y[i] - prob.offset()[i];
        }

        if outer % stride == 0 || outer == total_updates {
            logged.push(LoggedPoint {
                iter: outer,
                epoch: 0,
                epoch_iter: outer,
                z: z.clone(),
                w: config.store_iterates.then(|| w.clone()),
                v: config.store_iterates.then(|| y.clone()),
                ergodic: None,
            });
        }
    }

    Ok(SolveTrace {
        method: "admm",
        schedule_info: format!(
            "admm alpha={alpha} inner_tol={} inner_max={}",
            config.inner_tolerance, config.inner_max_iters
        ),
        iters_requested: config.max_iters,
        updates_run: total_updates,
        logged,
        epoch_inits: Vec::new(),
        final_z: z,
        final_w: w,
        final_v: Some(y),
        restart_period: 0,
        inner_projections,
        inner_failures,
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: config.seed,
    })
}
