//! Filter stability experiments: run the filter twice on the same sampled
//! observation record, once from a user prior and once from the stationary
//! prior, and trace the total variation distance between the two.

use super::{conditional_given_observation, filter_update, simulate_path, tv_distance};
use crate::error::{Error, Result};
use crate::model::{detect_nondegeneracy, JointKernel, StationaryLaw, ZERO_THRESHOLD};
use crate::rng::derive_seed;

#[derive(Debug, Clone)]
pub struct StabilityOptions {
    /// Number of filter steps per replicate.
    pub horizon: usize,
    pub replicates: usize,
    /// Master seed; replicate r uses the derived seed `derive_seed(seed, r)`.
    pub seed: u64,
    /// Worker threads. Output is bit-identical for any value.
    pub threads: usize,
    /// Run even when the model is not verified nondegenerate with a unique
    /// invariant law (needed to reproduce the counterexamples).
    pub allow_unverified: bool,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            horizon: 100,
            replicates: 10,
            seed: 0,
            threads: 1,
            allow_unverified: false,
        }
    }
}

/// Per-replicate distance traces `d_n = tv(filter from mu, filter from pi)`.
#[derive(Debug, Clone)]
pub struct StabilityTrace {
    /// `traces[r][n]` for replicate `r` and time `0 <= n <= horizon`.
    pub traces: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
    pub horizon: usize,
}

impl StabilityTrace {
    pub fn mean_at(&self, n: usize) -> f64 {
        self.traces.iter().map(|t| t[n]).sum::<f64>() / self.traces.len() as f64
    }

    pub fn max_at(&self, n: usize) -> f64 {
        self.traces.iter().map(|t| t[n]).fold(0.0, f64::max)
    }
}

/// Sample observation records under the `mu`-initialized chain and trace the
/// distance between the `mu`-filter and the stationary filter along each.
///
/// Requires the observed marginal of `mu` to live inside the support of the
/// stationary observed marginal; otherwise the stationary filter state at
/// time zero would be undefined on a set the experiment actually visits.
pub fn stability_experiment(
    kernel: &JointKernel,
    law: &StationaryLaw,
    mu: &[f64],
    options: &StabilityOptions,
) -> Result<StabilityTrace> {
    let space = kernel.space();
    let pi_observed = law.observed_marginal(space);
    let mut mu_observed = vec![0.0; space.observed_count()];
    for (s, &p) in mu.iter().enumerate() {
        mu_observed[space.split_index(s).1] += p;
    }
    for w in 0..space.observed_count() {
        if mu_observed[w] > ZERO_THRESHOLD && pi_observed[w] <= ZERO_THRESHOLD {
            return Err(Error::SupportViolation {
                y0: space.observed_labels()[w].clone(),
            });
        }
    }
    if !options.allow_unverified {
        if !detect_nondegeneracy(kernel).is_factorized() {
            return Err(Error::DegenerateModel {
                reason: "nondegeneracy refuted".into(),
            });
        }
        if !law.is_unique() {
            return Err(Error::DegenerateModel {
                reason: format!("invariant law not unique (eigenspace dim {})", law.eigenspace_dim()),
            });
        }
    }

    let seeds: Vec<u64> = (0..options.replicates)
        .map(|r| derive_seed(options.seed, r as u64))
        .collect();
    let traces = run_replicates(options.threads, options.replicates, |r| {
        replicate_trace(kernel, law, mu, options.horizon, seeds[r])
    })?;
    Ok(StabilityTrace {
        traces,
        seeds,
        horizon: options.horizon,
    })
}

fn replicate_trace(
    kernel: &JointKernel,
    law: &StationaryLaw,
    mu: &[f64],
    horizon: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let path = simulate_path(kernel, mu, horizon, seed);
    let ys = &path.ys;
    let mut from_mu = conditional_given_observation(kernel, mu, ys[0])?;
    let mut from_pi = conditional_given_observation(kernel, law.pi(), ys[0])?;
    let mut trace = Vec::with_capacity(horizon + 1);
    trace.push(tv_distance(&from_mu, &from_pi));
    for n in 1..=horizon {
        from_mu = filter_update(kernel, &from_mu, ys[n - 1], ys[n])?;
        from_pi = filter_update(kernel, &from_pi, ys[n - 1], ys[n])?;
        trace.push(tv_distance(&from_mu, &from_pi));
    }
    Ok(trace)
}

/// Run `count` independent jobs on up to `threads` workers, preserving job
/// order in the output. Each job is a pure function of its index, so the
/// result does not depend on the schedule.
pub fn run_replicates<T, F>(threads: usize, count: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let threads = threads.max(1).min(count.max(1));
    if threads <= 1 {
        return (0..count).map(&job).collect();
    }
    let mut slots: Vec<Option<Result<T>>> = (0..count).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut remaining: &mut [Option<Result<T>>] = &mut slots;
        let mut start = 0;
        let chunk = count.div_ceil(threads);
        let job = &job;
        while !remaining.is_empty() {
            let take = chunk.min(remaining.len());
            let (head, tail) = remaining.split_at_mut(take);
            let offset = start;
            scope.spawn(move || {
                for (i, slot) in head.iter_mut().enumerate() {
                    *slot = Some(job(offset + i));
                }
            });
            remaining = tail;
            start += take;
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("replicate job did not run"))
        .collect()
}
