//! The nonlinear filter: the conditional law of the hidden state given the
//! observations to date, computed by the exact Bayes recursion on the pair
//! kernel.

mod merging;
mod simulate;
mod stability;

pub use merging::{smoothed_marginals, smoother_merging, MergingCurve};
pub use simulate::{simulate_path, PathSample};
pub use stability::{run_replicates, stability_experiment, StabilityOptions, StabilityTrace};

use crate::error::{Error, Result};
use crate::model::JointKernel;

/// A probability vector over the hidden space.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    probs: Vec<f64>,
}

impl FilterState {
    /// Wrap a probability vector, checking nonnegativity and normalization.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        for (i, &p) in probs.iter().enumerate() {
            if p < 0.0 {
                return Err(Error::NegativeEntry {
                    row: 0,
                    col: i,
                    value: p,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NonNormalized { sum });
        }
        Ok(FilterState { probs })
    }

    pub fn uniform(n: usize) -> Self {
        FilterState {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, z: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[z] = 1.0;
        FilterState { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support(&self) -> Vec<usize> {
        crate::model::support(&self.probs)
    }

    fn from_unnormalized(mut probs: Vec<f64>, total: f64) -> Self {
        for p in &mut probs {
            *p /= total;
        }
        FilterState { probs }
    }
}

/// Total variation between two filter states (total-mass convention,
/// range [0, 2]).
pub fn tv_distance(a: &FilterState, b: &FilterState) -> f64 {
    crate::model::tv(a.probs(), b.probs())
}

/// One step of the filter recursion: from the state `nu` at observation `y0`,
/// condition on the next observation being `y1`.
///
/// `nu'(z') = sum_z nu(z) P((z, y0), (z', y1)) / Z`. Working with the full
/// pair kernel is equivalent to the factorized recursion because the
/// observed-side reference factor is constant in `(z, z')` and cancels in
/// the normalization.
pub fn filter_update(
    kernel: &JointKernel,
    nu: &FilterState,
    y0: usize,
    y1: usize,
) -> Result<FilterState> {
    filter_update_with_norm(kernel, nu, y0, y1).map(|(state, _)| state)
}

/// As [`filter_update`] but also returns the normalization `Z`, the one-step
/// predictive probability of observing `y1` next.
pub fn filter_update_with_norm(
    kernel: &JointKernel,
    nu: &FilterState,
    y0: usize,
    y1: usize,
) -> Result<(FilterState, f64)> {
    let space = kernel.space();
    let ne = space.hidden_count();
    let mut out = vec![0.0; ne];
    let mut total = 0.0;
    for (z, &mass) in nu.probs().iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let row = kernel.row(space.pair_index(z, y0));
        for z1 in 0..ne {
            let p = mass * row[space.pair_index(z1, y1)];
            out[z1] += p;
            total += p;
        }
    }
    if total <= 0.0 {
        return Err(Error::ImpossibleObservation {
            y0: space.observed_labels()[y0].clone(),
            y1: space.observed_labels()[y1].clone(),
        });
    }
    Ok((FilterState::from_unnormalized(out, total), total))
}

/// Condition an initial law on `E x F` on its observed coordinate:
/// `mu_{y0}(z) = mu(z, y0) / mu(E x {y0})`.
pub fn conditional_given_observation(
    kernel: &JointKernel,
    mu: &[f64],
    y0: usize,
) -> Result<FilterState> {
    let space = kernel.space();
    let ne = space.hidden_count();
    let mut out = vec![0.0; ne];
    let mut total = 0.0;
    for z in 0..ne {
        let p = mu[space.pair_index(z, y0)];
        out[z] = p;
        total += p;
    }
    if total <= 0.0 {
        return Err(Error::UndefinedConditional {
            y0: space.observed_labels()[y0].clone(),
        });
    }
    Ok(FilterState::from_unnormalized(out, total))
}

/// A full filter pass over an observation path.
#[derive(Debug, Clone)]
pub struct FilterRun {
    /// Filter states at times `0..ys.len()`.
    pub states: Vec<FilterState>,
    /// Cumulative log predictive likelihood `log P(Y_0..Y_n = y_0..y_n)`
    /// under the initial law, per step. Logs avoid underflow on long paths.
    pub log_likelihood: Vec<f64>,
}

/// Run the filter on an observation path from an initial law `mu` on the
/// pair space. The state at time 0 is the conditional of `mu` given the
/// first observation; each later state applies [`filter_update`].
pub fn run_filter(kernel: &JointKernel, mu: &[f64], ys: &[usize]) -> Result<FilterRun> {
    assert!(!ys.is_empty(), "observation path must be non-empty");
    let space = kernel.space();
    let mass_y0: f64 = (0..space.hidden_count())
        .map(|z| mu[space.pair_index(z, ys[0])])
        .sum();
    let mut states = Vec::with_capacity(ys.len());
    let mut log_likelihood = Vec::with_capacity(ys.len());
    states.push(conditional_given_observation(kernel, mu, ys[0])?);
    log_likelihood.push(mass_y0.ln());
    for i in 1..ys.len() {
        let (next, norm) = filter_update_with_norm(kernel, &states[i - 1], ys[i - 1], ys[i])?;
        log_likelihood.push(log_likelihood[i - 1] + norm.ln());
        states.push(next);
    }
    Ok(FilterRun {
        states,
        log_likelihood,
    })
}
