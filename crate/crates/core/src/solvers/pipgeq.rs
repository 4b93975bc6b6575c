//! PIPGeq: the proportional-integral projected gradient method for the
//! slack form `Hz − y = g, y ∈ K, z ∈ D`:
//!
//! ```text
//!     v^{j+1} = w^j + β (Hz^j − y^j − g)
//!     z^{j+1} = π_D[ z^j − α (∇f(z^j) + Hᵀ v^{j+1}) ]
//!     y^{j+1} = π_K[ y^j + α v^{j+1} ]
//!     w^{j+1} = w^j + β (Hz^{j+1} − y^{j+1} − g)
//! ```
//!
//! One projection onto `K` and one onto `D` per iteration.

use super::{now, LoggedPoint, SolveTrace, SolverConfig, SolverError};
use crate::problem::ConicProblem;

/// Default primal step `α = 1/(λ + 2βσ)`; the factor 2 covers the norm of
/// the stacked `[H, −I]` operator of the slack form.
pub fn pipgeq_default_alpha(prob: &ConicProblem, beta: f64) -> f64 {
    1.0 / (prob.lambda() + 2.0 * beta * prob.sigma())
}

pub fn pipgeq_solve(
    prob: &ConicProblem,
    alpha: f64,
    beta: f64,
    config: &SolverConfig,
) -> Result<SolveTrace, SolverError> {
    config.validate()?;
    if !(alpha.is_finite() && beta.is_finite()) || alpha <= 0.0 || beta <= 0.0 {
        return Err(SolverError::InvalidConfig(format!(
            "steps must be positive, got alpha={alpha} beta={beta}"
        )));
    }

    let start = now();
    let n = prob.n();
    let m = prob.m();
    let (z_seed, w_seed, y_seed) = config.draw_initials(n, m);

    let mut z = prob.set().project(&z_seed);
    let mut y = prob.cone().project(&y_seed);
    let mut w = w_seed;
    let mut v = vec![0.0; m];

    let mut hz = vec![0.0; m];
    prob.operator().apply_into(&z, &mut hz);
    let mut hz_new = vec![0.0; m];
    let mut z_new = vec![0.0; n];
    let mut y_new = vec![0.0; m];
    let mut tmp_n = vec![0.0; n];
    let mut tmp_m = vec![0.0; m];
    let mut grad = vec![0.0; n];

    let total_updates = config.max_iters - 1;
    let stride = config.stride();
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

    for step in 1..=total_updates {
        for i in 0..m {
            v[i] = w[i] + beta * (hz[i] - y[i] - prob.offset()[i]);
        }

        prob.gradient_into(&z, &mut grad);
        prob.operator().apply_transpose_into(&v, &mut tmp_n);
        for i in 0..n {
            tmp_n[i] = z[i] - alpha * (grad[i] + tmp_n[i]);
        }
        prob.set().project_into(&tmp_n, &mut z_new);

        for i in 0..m {
            tmp_m[i] = y[i] + alpha * v[i];
        }
        prob.cone().project_into(&tmp_m, &mut y_new);

        prob.operator().apply_into(&z_new, &mut hz_new);
        for i in 0..m {
            w[i] += beta * (hz_new[i] - y_new[i] - prob.offset()[i]);
        }

        std::mem::swap(&mut z, &mut z_new);
        std::mem::swap(&mut y, &mut y_new);
        std::mem::swap(&mut hz, &mut hz_new);

        if step % stride == 0 || step == total_updates {
            logged.push(LoggedPoint {
                iter: step,
                epoch: 0,
                epoch_iter: step,
                z: z.clone(),
                w: config.store_iterates.then(|| w.clone()),
                v: config.store_iterates.then(|| v.clone()),
                ergodic: None,
            });
        }
    }

    Ok(SolveTrace {
        method: "pipgeq",
        schedule_info: format!("pipgeq alpha={alpha} beta={beta} (alpha guard: 1/(lambda+2*beta*sigma))"),
        iters_requested: config.max_iters,
        updates_run: total_updates,
        logged,
        epoch_inits: Vec::new(),
        final_z: z,
        final_w: w,
        final_v: Some(v),
        restart_period: 0,
        inner_projections: 0,
        inner_failures: 0,
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: config.seed,
    })
}
