//! Mixing coefficients of the stationary pair chain.
//!
//! All quantities average a total variation distance over the invariant law
//! and use the total-mass convention (range [0, 2]):
//!
//! * `alpha_fwd[n]`: distance between the hidden marginal of the n-step law
//!   from a point and the stationary hidden marginal (forward marginal
//!   ergodicity).
//! * `alpha_rev[n]`: the same for the time-reversed kernel.
//! * `beta[n]`: distance between the full n-step law from a point and the
//!   invariant law (absolute regularity).
//!
//! Marginalization contracts total variation, so `alpha <= beta` holds
//! index-wise; `beta` is also invariant under time reversal.

use super::{mat_mul, reverse_kernel, tv, JointKernel, StationaryLaw};
use crate::error::Result;

/// Forward/reversed marginal-ergodicity and absolute-regularity sequences,
/// indexed from n = 1.
#[derive(Debug, Clone)]
pub struct MixingProfile {
    pub alpha_fwd: Vec<f64>,
    pub alpha_rev: Vec<f64>,
    pub beta: Vec<f64>,
}

impl MixingProfile {
    pub fn horizon(&self) -> usize {
        self.beta.len()
    }
}

/// Compute the mixing profile of `(kernel, law)` for `n = 1..=n_max`.
pub fn mixing_profile(
    kernel: &JointKernel,
    law: &StationaryLaw,
    n_max: usize,
) -> Result<MixingProfile> {
    let reversed = reverse_kernel(kernel, law)?;
    let space = kernel.space();
    let dim = space.pair_count();
    let pi = law.pi();
    let pi_hidden = law.hidden_marginal(space);

    let mut alpha_fwd = Vec::with_capacity(n_max);
    let mut alpha_rev = Vec::with_capacity(n_max);
    let mut beta = Vec::with_capacity(n_max);

    let mut fwd_power = kernel.rows_flat().to_vec();
    let mut rev_power = reversed.rows_flat().to_vec();
    for n in 1..=n_max {
        if n > 1 {
            fwd_power = mat_mul(&fwd_power, kernel.rows_flat(), dim);
            rev_power = mat_mul(&rev_power, reversed.rows_flat(), dim);
        }
        let mut a_fwd = 0.0;
        let mut a_rev = 0.0;
        let mut b = 0.0;
        for s in 0..dim {
            if pi[s] == 0.0 {
                continue;
            }
            let fwd_row = &fwd_power[s * dim..(s + 1) * dim];
            let rev_row = &rev_power[s * dim..(s + 1) * dim];
            a_fwd += pi[s] * tv(&hidden_marginal_of(space, fwd_row), &pi_hidden);
            a_rev += pi[s] * tv(&hidden_marginal_of(space, rev_row), &pi_hidden);
            b += pi[s] * tv(fwd_row, pi);
        }
        alpha_fwd.push(a_fwd);
        alpha_rev.push(a_rev);
        beta.push(b);
    }
    Ok(MixingProfile {
        alpha_fwd,
        alpha_rev,
        beta,
    })
}

fn hidden_marginal_of(space: &super::StateSpace, row: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; space.hidden_count()];
    for (t, &p) in row.iter().enumerate() {
        out[space.split_index(t).0] += p;
    }
    out
}

/// Absolute-regularity sequence of a marginal kernel on a single space:
/// `sum_z pi0(z) ||K^n(z, .) - pi0||` for `n = 1..=n_max`. Used for the
/// hidden-chain premises of the structured model families.
pub fn marginal_kernel_mixing(kernel: &[f64], pi0: &[f64], n_max: usize) -> Vec<f64> {
    let dim = pi0.len();
    debug_assert_eq!(kernel.len(), dim * dim);
    let mut out = Vec::with_capacity(n_max);
    let mut power = kernel.to_vec();
    for n in 1..=n_max {
        if n > 1 {
            power = mat_mul(&power, kernel, dim);
        }
        let mut acc = 0.0;
        for z in 0..dim {
            if pi0[z] > 0.0 {
                acc += pi0[z] * tv(&power[z * dim..(z + 1) * dim], pi0);
            }
        }
        out.push(acc);
    }
    out
}

/// Domain-of-attraction premise for a specific initial law: the sequence
/// `||mu K^n - target||` for `n = 1..=n_max`, where `K` is a row-stochastic
/// kernel given as a flat matrix. Decay of this sequence is the checkable
/// premise under which the stability guarantee covers the law `mu`.
pub fn law_convergence(kernel: &[f64], mu: &[f64], target: &[f64], n_max: usize) -> Vec<f64> {
    let dim = target.len();
    debug_assert_eq!(kernel.len(), dim * dim);
    debug_assert_eq!(mu.len(), dim);
    let mut out = Vec::with_capacity(n_max);
    let mut current = mu.to_vec();
    for _ in 1..=n_max {
        let mut next = vec![0.0; dim];
        for (z, &mass) in current.iter().enumerate() {
            if mass != 0.0 {
                let row = &kernel[z * dim..(z + 1) * dim];
                for (o, &p) in next.iter_mut().zip(row) {
                    *o += mass * p;
                }
            }
        }
        current = next;
        out.push(tv(&current, target));
    }
    out
}
