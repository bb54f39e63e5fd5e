//! Empirical approximation of lift-invariant measures by long stationary
//! runs of the pair chain with the filter attached.
//!
//! The distinguished invariant measure (the law of the stationary filter
//! pair) lives on the two-sided stationary process; it is approximated here
//! by a one-sided run started from the observation-conditioned stationary
//! law, discarding a burn-in prefix. Reports quoting these estimates must
//! carry that window caveat.

use super::{EmpiricalLiftMeasure, LiftAtomPair, LiftAtomTriple, LiftAtoms};
use crate::error::{Error, Result};
use crate::filter::{conditional_given_observation, filter_update, simulate_path, FilterState};
use crate::model::{detect_nondegeneracy, JointKernel, StationaryLaw};

/// Which lifted chain to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    Pair,
    Triple,
}

/// Initial filter state as a function of the first observation.
#[derive(Debug, Clone)]
pub enum FilterInit {
    /// Conditional of the invariant law given the first observation.
    Stationary,
    /// Uniform over the hidden space, whatever was observed.
    Uniform,
    /// Point mass at a fixed hidden state.
    Point(usize),
    /// Explicit kernel from observations to filter states.
    Kernel(Vec<FilterState>),
}

impl FilterInit {
    fn state(
        &self,
        kernel: &JointKernel,
        law: &StationaryLaw,
        y0: usize,
    ) -> Result<FilterState> {
        let ne = kernel.space().hidden_count();
        match self {
            FilterInit::Stationary => conditional_given_observation(kernel, law.pi(), y0),
            FilterInit::Uniform => Ok(FilterState::uniform(ne)),
            FilterInit::Point(z) => Ok(FilterState::point_mass(ne, *z)),
            FilterInit::Kernel(states) => Ok(states[y0].clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimateOptions {
    pub samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub lift: LiftKind,
    /// Run even when the model is not verified nondegenerate with a unique
    /// invariant law.
    pub allow_unverified: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            samples: 100_000,
            burn_in: 1000,
            seed: 0,
            lift: LiftKind::Pair,
            allow_unverified: false,
        }
    }
}

/// Simulate the stationary pair chain, run the filter alongside it from
/// `filter_init`, and collect the post-burn-in lift states as equally
/// weighted atoms.
pub fn estimate_invariant(
    kernel: &JointKernel,
    law: &StationaryLaw,
    filter_init: &FilterInit,
    options: &EstimateOptions,
) -> Result<EmpiricalLiftMeasure> {
    if !options.allow_unverified {
        if !detect_nondegeneracy(kernel).is_factorized() {
            return Err(Error::DegenerateModel {
                reason: "nondegeneracy refuted".into(),
            });
        }
        if !law.is_unique() {
            return Err(Error::DegenerateModel {
                reason: format!(
                    "invariant law not unique (eigenspace dim {})",
                    law.eigenspace_dim()
                ),
            });
        }
    }
    // Atoms are the lift states at times burn_in ..= burn_in + samples - 1.
    let horizon = (options.burn_in + options.samples - 1).max(1);
    let path = simulate_path(kernel, law.pi(), horizon, options.seed);
    let mut nu = filter_init.state(kernel, law, path.ys[0])?;
    let weight = 1.0 / options.samples as f64;
    let mut pair_atoms = Vec::new();
    let mut triple_atoms = Vec::new();
    if options.burn_in == 0 {
        collect(&mut pair_atoms, &mut triple_atoms, options.lift, &nu, &path, 0, weight);
    }
    for n in 1..=horizon {
        nu = filter_update(kernel, &nu, path.ys[n - 1], path.ys[n])?;
        if n >= options.burn_in && pair_atoms.len() + triple_atoms.len() < options.samples {
            collect(&mut pair_atoms, &mut triple_atoms, options.lift, &nu, &path, n, weight);
        }
    }
    let atoms = match options.lift {
        LiftKind::Pair => LiftAtoms::Pair(pair_atoms),
        LiftKind::Triple => LiftAtoms::Triple(triple_atoms),
    };
    Ok(EmpiricalLiftMeasure {
        atoms,
        sample_count: options.samples,
        burn_in: options.burn_in,
        seed: options.seed,
    })
}

fn collect(
    pair_atoms: &mut Vec<LiftAtomPair>,
    triple_atoms: &mut Vec<LiftAtomTriple>,
    lift: LiftKind,
    nu: &FilterState,
    path: &crate::filter::PathSample,
    n: usize,
    weight: f64,
) {
    match lift {
        LiftKind::Pair => pair_atoms.push(LiftAtomPair {
            nu: nu.clone(),
            y: path.ys[n],
            weight,
        }),
        LiftKind::Triple => triple_atoms.push(LiftAtomTriple {
            nu: nu.clone(),
            x: path.xs[n],
            y: path.ys[n],
            weight,
        }),
    }
}
