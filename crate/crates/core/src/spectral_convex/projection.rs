//! Exact Euclidean projections used by the proximal maps.

/// Projection onto `{x : sum_j w_j |x_j| <= radius}` for positive weights.
///
/// The solution is `x_j = sign(y_j) max(|y_j| - tau w_j, 0)`; the threshold
/// `tau` is found by sorting the breakpoints `|y_j| / w_j` (O(n log n)).
pub fn project_weighted_l1_ball(y: &[f64], w: &[f64], radius: f64) -> Vec<f64> {
    debug_assert_eq!(y.len(), w.len());
    let mass: f64 = y.iter().zip(w).map(|(a, b)| a.abs() * b).sum();
    if mass <= radius {
        return y.to_vec();
    }
    if radius <= 0.0 {
        return vec![0.0; y.len()];
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| (y[b].abs() / w[b]).total_cmp(&(y[a].abs() / w[a])));
    let mut num = 0.0;
    let mut den = 0.0;
    let mut tau = 0.0;
    for (k, &j) in order.iter().enumerate() {
        num += w[j] * y[j].abs();
        den += w[j] * w[j];
        let candidate = (num - radius) / den;
        let next_ratio = order.get(k + 1).map(|&i| y[i].abs() / w[i]).unwrap_or(0.0);
        if candidate >= next_ratio {
            tau = candidate;
            break;
        }
    }
    y.iter()
        .zip(w)
        .map(|(&v, &wj)| v.signum() * (v.abs() - tau * wj).max(0.0))
        .collect()
}

pub fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

pub fn l2_norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}
