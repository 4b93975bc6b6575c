//! Log-log rate fitting: the least-squares slope of log(metric) against
//! log(iteration) exposes the empirical decay order.

use pipg::problem::ConicProblem;
use pipg::solvers::SolveTrace;

/// Least-squares slope of `ln v` vs `ln k` over `(k, v)` pairs; points with
/// nonpositive or nonfinite values are dropped. `None` with fewer than two
/// usable points.
pub fn rate_fit(points: &[(f64, f64)]) -> Option<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(k, v)| *k > 0.0 && *v > 0.0 && v.is_finite())
        .map(|&(k, v)| (k.ln(), v.ln()))
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let n = usable.len() as f64;
    let mean_x = usable.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = usable.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &usable {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// `(k, d_K(Hz̃^k − g))` pairs from a PIPG trace, restricted to the logged
/// iteration window `[k_lo, k_hi]`.
pub fn ergodic_feasibility_points(
    prob: &ConicProblem,
    trace: &SolveTrace,
    k_lo: usize,
    k_hi: usize,
) -> Vec<(f64, f64)> {
    trace
        .logged
        .iter()
        .filter(|p| p.iter >= k_lo && p.iter <= k_hi)
        .filter_map(|p| {
            p.ergodic.as_ref().map(|e| {
                let d = prob.cone().dist_sq_half(&prob.residual(&e.z_tilde));
                (p.iter as f64, d)
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::rate_fit;

    #[test]
    fn synthetic_slopes() {
        let inv_k: Vec<(f64, f64)> = (1..200).map(|k| (k as f64, 1.0 / k as f64)).collect();
        let slope = rate_fit(&inv_k).unwrap();
        assert!((slope + 1.0).abs() <= 1e-6, "slope {slope}");

        let inv_k3: Vec<(f64, f64)> = (1..200)
            .map(|k| (k as f64, (k as f64).powi(-3)))
            .collect();
        let slope = rate_fit(&inv_k3).unwrap();
        assert!((slope + 3.0).abs() <= 1e-6, "slope {slope}");
    }

    #[test]
    fn degenerate_inputs() {
        assert!(rate_fit(&[]).is_none());
        assert!(rate_fit(&[(1.0, 1.0)]).is_none());
        assert!(rate_fit(&[(1.0, -1.0), (2.0, 0.0)]).is_none());
    }
}
