//! Conditional merging diagnostic: how fast do the smoothed laws of the
//! hidden state forget the initial hidden state, given a shared observation
//! record over a finite window?

use super::tv_distance;
use super::FilterState;
use crate::error::{Error, Result};
use crate::model::JointKernel;

/// Distances `D_n` between the two smoothed hidden-state laws, `0 <= n <= N`
/// for a window of length `N`.
#[derive(Debug, Clone)]
pub struct MergingCurve {
    pub d: Vec<f64>,
    /// Largest increase `D_{n+1} - D_n` observed along the window. The
    /// smoothed laws evolve under one shared conditional transition kernel,
    /// so in exact arithmetic the curve never increases; this field reports
    /// the numerical violation, informationally.
    pub max_increase: f64,
}

/// Forward-backward smoothing on the window `y_path`, started from the two
/// hidden states `z` and `z_prime` (the observed coordinate of the start is
/// `y_path[0]` for both).
///
/// `D_n` is the total variation between the smoothed time-`n` hidden laws.
/// Forward and backward vectors are rescaled to unit sum every step so long
/// windows cannot underflow.
pub fn smoother_merging(
    kernel: &JointKernel,
    y_path: &[usize],
    z: usize,
    z_prime: usize,
) -> Result<MergingCurve> {
    assert!(y_path.len() >= 2, "window must contain at least one step");
    let smoothed_a = smoothed_marginals(kernel, y_path, z)?;
    let smoothed_b = smoothed_marginals(kernel, y_path, z_prime)?;
    let mut d = Vec::with_capacity(y_path.len());
    for (a, b) in smoothed_a.iter().zip(&smoothed_b) {
        d.push(tv_distance(a, b));
    }
    let mut max_increase = 0.0_f64;
    for pair in d.windows(2) {
        max_increase = max_increase.max(pair[1] - pair[0]);
    }
    Ok(MergingCurve { d, max_increase })
}

/// Smoothed hidden-state laws `P(X_n = . | X_0 = z, Y_0..Y_N = y_path)`.
pub fn smoothed_marginals(
    kernel: &JointKernel,
    y_path: &[usize],
    z: usize,
) -> Result<Vec<FilterState>> {
    let space = kernel.space();
    let ne = space.hidden_count();
    let steps = y_path.len() - 1;

    // Forward pass: a_0 = delta_z, a_n(x) = sum_x' a_{n-1}(x') P((x', y_{n-1}), (x, y_n)).
    let mut forward = Vec::with_capacity(steps + 1);
    let mut a = vec![0.0; ne];
    a[z] = 1.0;
    forward.push(a.clone());
    for n in 1..=steps {
        let mut next = vec![0.0; ne];
        let mut total = 0.0;
        for (x_prev, &mass) in a.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let row = kernel.row(space.pair_index(x_prev, y_path[n - 1]));
            for x in 0..ne {
                let p = mass * row[space.pair_index(x, y_path[n])];
                next[x] += p;
                total += p;
            }
        }
        if total <= 0.0 {
            return Err(Error::ZeroLikelihood {
                state: space.hidden_labels()[z].clone(),
            });
        }
        for v in &mut next {
            *v /= total;
        }
        a = next;
        forward.push(a.clone());
    }

    // Backward pass: b_N = 1, b_n(x) = sum_x' P((x, y_n), (x', y_{n+1})) b_{n+1}(x').
    let mut backward = vec![vec![1.0; ne]; steps + 1];
    for n in (0..steps).rev() {
        let mut total = 0.0;
        for x in 0..ne {
            let row = kernel.row(space.pair_index(x, y_path[n]));
            let mut acc = 0.0;
            for x1 in 0..ne {
                acc += row[space.pair_index(x1, y_path[n + 1])] * backward[n + 1][x1];
            }
            backward[n][x] = acc;
            total += acc;
        }
        if total <= 0.0 {
            return Err(Error::ZeroLikelihood {
                state: space.hidden_labels()[z].clone(),
            });
        }
        for v in &mut backward[n] {
            *v /= total;
        }
    }

    let mut out = Vec::with_capacity(steps + 1);
    for n in 0..=steps {
        let mut s: Vec<f64> = (0..ne).map(|x| forward[n][x] * backward[n][x]).collect();
        let total: f64 = s.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroLikelihood {
                state: space.hidden_labels()[z].clone(),
            });
        }
        for v in &mut s {
            *v /= total;
        }
        out.push(FilterState::new(s).expect("smoothed marginal is a probability vector"));
    }
    Ok(out)
}
