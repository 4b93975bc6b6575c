//! The two primal-dual hybrid gradient baselines on the saddle form
//! `min_{z∈D} max_{w∈K°} f(z) + ⟨Hz − g, w⟩`.
//!
//! Constant steps:
//!
//! ```text
//!     z^{j+1} = π_D  [ z^j − α (∇f(z^j) + Hᵀ w^j) ]
//!     w^{j+1} = π_{K°}[ w^j + β (H(2z^{j+1} − z^j) − g) ]
//! ```
//!
//! Varying steps (strongly convex objective only):
//!
//! ```text
//!     w^{j+1} = π_{K°}[ w^j + β^j (H(z^j + γ^j(z^j − z^{j−1})) − g) ]
//!     z^{j+1} = π_D  [ z^j − α^j/(µα^j + 1) (∇f(z^j) + Hᵀ w^{j+1}) ]
//! ```
//!
//! with `z⁰ := z¹` so the first extrapolation is null, and the accelerated
//! step recursion `γ^j = 1/√(1 + 2µα^{j−1})`, `α^j = γ^j α^{j−1}`,
//! `β^j = β^{j−1}/γ^j` started from `α¹ = β¹ = 1/√σ` (so `α¹β¹σ = 1`).

use super::{now, LoggedPoint, SolveTrace, SolverConfig, SolverError, StepSchedule};
use crate::problem::ConicProblem;

pub fn pdhg_const_solve(
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
    let (z_seed, w_seed, _) = config.draw_initials(n, m);

    let mut z = prob.set().project(&z_seed);
    let mut w = prob.cone().moreau_polar_project(&w_seed);

    let mut hz = vec![0.0; m];
    prob.operator().apply_into(&z, &mut hz);
    let mut hz_new = vec![0.0; m];
    let mut z_new = vec![0.0; n];
    let mut tmp_n = vec![0.0; n];
    let mut tmp_m = vec![0.0; m];
    let mut w_new = vec![0.0; m];
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
        prob.gradient_into(&z, &mut grad);
        prob.operator().apply_transpose_into(&w, &mut tmp_n);
        for i in 0..n {
            tmp_n[i] = z[i] - alpha * (grad[i] + tmp_n[i]);
        }
        prob.set().project_into(&tmp_n, &mut z_new);

        // H(2z^{j+1} − z^j) evaluated as 2Hz^{j+1} − Hz^j from the caches.
        prob.operator().apply_into(&z_new, &mut hz_new);
        for i in 0..m {
            tmp_m[i] = w[i] + beta * (2.0 * hz_new[i] - hz[i] - prob.offset()[i]);
        }
        prob.cone().polar_project_into(&tmp_m, &mut w_new);

        std::mem::swap(&mut z, &mut z_new);
        std::mem::swap(&mut w, &mut w_new);
        std::mem::swap(&mut hz, &mut hz_new);

        if step % stride == 0 || step == total_updates {
            logged.push(LoggedPoint {
                iter: step,
                epoch: 0,
                epoch_iter: step,
                z: z.clone(),
                w: config.store_iterates.then(|| w.clone()),
                v: None,
                ergodic: None,
            });
        }
    }

    Ok(SolveTrace {
        method: "pdhg",
        schedule_info: format!("pdhg-constant alpha={alpha} beta={beta}"),
        iters_requested: config.max_iters,
        updates_run: total_updates,
        logged,
        epoch_inits: Vec::new(),
        final_z: z,
        final_w: w,
        final_v: None,
        restart_period: 0,
        inner_projections: 0,
        inner_failures: 0,
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: config.seed,
    })
}

pub fn pdhg_varying_solve(
    prob: &ConicProblem,
    config: &SolverConfig,
) -> Result<SolveTrace, SolverError> {
    config.validate()?;
    let mu = prob.mu();
    if mu <= 0.0 {
        return Err(SolverError::ScheduleMismatch(
            "varying-step PDHG needs a strongly convex objective (µ > 0)".into(),
        ));
    }

    let start = now();
    let n = prob.n();
    let m = prob.m();
    let (z_seed, w_seed, _) = config.draw_initials(n, m);

    let mut z = prob.set().project(&z_seed);
    let mut w = prob.cone().moreau_polar_project(&w_seed);
    let mut z_prev = z.clone();

    let mut hz = vec![0.0; m];
    prob.operator().apply_into(&z, &mut hz);
    let mut hz_prev = hz.clone();
    let mut hz_new = vec![0.0; m];
    let mut z_new = vec![0.0; n];
    let mut tmp_n = vec![0.0; n];
    let mut tmp_m = vec![0.0; m];
    let mut w_new = vec![0.0; m];
    let mut grad = vec![0.0; n];

    let mut alpha = 1.0 / prob.sigma().sqrt();
    let mut beta = alpha;
    let mut gamma = 1.0; // never used at j = 1: z⁰ = z¹ nullifies it

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
        // w^{j+1} from the extrapolated primal point; H(z + γ(z − z_prev))
        // evaluated from the cached products.
        for i in 0..m {
            let extrap = hz[i] + gamma * (hz[i] - hz_prev[i]);
            tmp_m[i] = w[i] + beta * (extrap - prob.offset()[i]);
        }
        prob.cone().polar_project_into(&tmp_m, &mut w_new);

        let prox_step = alpha / (mu * alpha + 1.0);
        prob.gradient_into(&z, &mut grad);
        prob.operator().apply_transpose_into(&w_new, &mut tmp_n);
        for i in 0..n {
            tmp_n[i] = z[i] - prox_step * (grad[i] + tmp_n[i]);
        }
        prob.set().project_into(&tmp_n, &mut z_new);
        prob.operator().apply_into(&z_new, &mut hz_new);

        std::mem::swap(&mut z_prev, &mut z);
        std::mem::swap(&mut z, &mut z_new);
        std::mem::swap(&mut hz_prev, &mut hz);
        std::mem::swap(&mut hz, &mut hz_new);
        std::mem::swap(&mut w, &mut w_new);

        // Advance the step recursion for the next iteration.
        gamma = 1.0 / (1.0 + 2.0 * mu * alpha).sqrt();
        alpha *= gamma;
        beta /= gamma;

        if step % stride == 0 || step == total_updates {
            logged.push(LoggedPoint {
                iter: step,
                epoch: 0,
                epoch_iter: step,
                z: z.clone(),
                w: config.store_iterates.then(|| w.clone()),
                v: None,
                ergodic: None,
            });
        }
    }

    Ok(SolveTrace {
        method: "pdhg-acc",
        schedule_info: StepSchedule::PdhgAccelerated.describe(prob),
        iters_requested: config.max_iters,
        updates_run: total_updates,
        logged,
        epoch_inits: Vec::new(),
        final_z: z,
        final_w: w,
        final_v: None,
        restart_period: 0,
        inner_projections: 0,
        inner_failures: 0,
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: config.seed,
    })
}
