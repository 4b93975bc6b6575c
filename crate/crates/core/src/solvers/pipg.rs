//! The proportional-integral projected gradient method.
//!
//! Per update step `j` (within the current restart epoch):
//!
//! ```text
//!     w^{j+1} = π_{K°}[ v^j + β^j (Hz^j − g) ]
//!     z^{j+1} = π_D  [ z^j − α^j (∇f(z^j) + Hᵀ w^{j+1}) ]
//!     v^{j+1} = w^{j+1} + β^j H (z^{j+1} − z^j)
//! ```
//!
//! The dual `w` is a proportional-plus-integral feedback on the constraint
//! residual `Hz − g`; with `H = 0` the iteration reduces to projected
//! gradient descent on `D`.

use super::{
    now, EpochInit, ErgodicAccumulator, LoggedPoint, SolveTrace, SolverConfig, SolverError,
    StepSchedule,
};
use crate::problem::ConicProblem;

pub fn pipg_solve(
    prob: &ConicProblem,
    schedule: &StepSchedule,
    config: &SolverConfig,
) -> Result<SolveTrace, SolverError> {
    config.validate()?;
    match schedule {
        StepSchedule::StronglyConvex if prob.mu() <= 0.0 => {
            return Err(SolverError::ScheduleMismatch(
                "the strongly convex schedule needs µ > 0".into(),
            ));
        }
        StepSchedule::PdhgAccelerated => {
            return Err(SolverError::ScheduleMismatch(
                "the accelerated PDHG recursion belongs to pdhg_varying_solve".into(),
            ));
        }
        _ => {}
    }

    let start = now();
    let n = prob.n();
    let m = prob.m();
    let (z_seed, v_seed, _) = config.draw_initials(n, m);

    // z¹ ∈ D and v¹ ∈ K° are enforced by projection.
    let mut z = prob.set().project(&z_seed);
    let mut v = prob.cone().moreau_polar_project(&v_seed);
    let mut w = vec![0.0; m];

    let mut hz = vec![0.0; m];
    prob.operator().apply_into(&z, &mut hz);
    let mut hz_new = vec![0.0; m];
    let mut z_new = vec![0.0; n];
    let mut tmp_m = vec![0.0; m];
    let mut tmp_n = vec![0.0; n];
    let mut grad = vec![0.0; n];

    let total_updates = config.max_iters - 1;
    let stride = config.stride();
    let restart = config.restart_period;

    let mut ergodic = ErgodicAccumulator::new(n, m);
    let mut epoch = 0usize;
    let mut epoch_start = 0usize;
    let mut pending_init = Some(EpochInit {
        epoch: 0,
        start_iter: 0,
        z: z.clone(),
        v: v.clone(),
    });

    let mut logged = Vec::new();
    let mut epoch_inits: Vec<EpochInit> = Vec::new();
    // The initialization is a loggable point of its own (the whole trace,
    // when k = 1).
    logged.push(LoggedPoint {
        iter: 0,
        epoch: 0,
        epoch_iter: 0,
        z: z.clone(),
        w: None,
        v: config.store_iterates.then(|| v.clone()),
        ergodic: None,
    });

    for step in 1..=total_updates {
        let j = step - epoch_start; // 1-based index within the epoch
        let (alpha, beta) = schedule.steps(j, prob);
        let (wt_tilde, wt_bar) = schedule.ergodic_weights(j);

        // z̃ accumulates the pre-update iterate z^j.
        ergodic.add_pre(wt_tilde, &z);

        // w^{j+1} = π_{K°}[v^j + β(Hz^j − g)]
        for i in 0..m {
            tmp_m[i] = v[i] + beta * (hz[i] - prob.offset()[i]);
        }
        prob.cone().polar_project_into(&tmp_m, &mut w);

        // z^{j+1} = π_D[z^j − α(∇f(z^j) + Hᵀw^{j+1})]
        prob.gradient_into(&z, &mut grad);
        prob.operator().apply_transpose_into(&w, &mut tmp_n);
        for i in 0..n {
            tmp_n[i] = z[i] - alpha * (grad[i] + tmp_n[i]);
        }
        prob.set().project_into(&tmp_n, &mut z_new);

        // v^{j+1} = w^{j+1} + β H(z^{j+1} − z^j), with H(z^{j+1} − z^j)
        // evaluated as the difference of the cached products.
        prob.operator().apply_into(&z_new, &mut hz_new);
        for i in 0..m {
            v[i] = w[i] + beta * (hz_new[i] - hz[i]);
        }
        std::mem::swap(&mut z, &mut z_new);
        std::mem::swap(&mut hz, &mut hz_new);

        ergodic.add_post(wt_bar, &z, &w);

        if step % stride == 0 || step == total_updates {
            if let Some(init) = pending_init.take() {
                epoch_inits.push(init);
            }
            logged.push(LoggedPoint {
                iter: step,
                epoch,
                epoch_iter: j,
                z: z.clone(),
                w: config.store_iterates.then(|| w.clone()),
                v: config.store_iterates.then(|| v.clone()),
                ergodic: Some(ergodic.snapshot()),
            });
        }

        if restart > 0 && j == restart && step < total_updates {
            epoch += 1;
            epoch_start = step;
            ergodic.reset();
            // z and v carry over; the schedule index resets to 1.
            pending_init = Some(EpochInit {
                epoch,
                start_iter: step,
                z: z.clone(),
                v: v.clone(),
            });
        }
    }

    if let Some(init) = pending_init.take() {
        if epoch_inits.is_empty() {
            epoch_inits.push(init);
        }
    }

    Ok(SolveTrace {
        method: "pipg",
        schedule_info: format!(
            "{}; restart_period={}",
            schedule.describe(prob),
            restart
        ),
        iters_requested: config.max_iters,
        updates_run: total_updates,
        logged,
        epoch_inits,
        final_z: z,
        final_w: w,
        final_v: Some(v),
        restart_period: restart,
        inner_projections: 0,
        inner_failures: 0,
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: config.seed,
    })
}
