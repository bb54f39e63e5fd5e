//! Lifted Markov kernels of the filtering process.
//!
//! The pair `(filter state, observation)` and the triple
//! `(filter state, hidden state, observation)` are themselves Markov chains;
//! on a finite model their one-step successor distributions are finite and
//! can be enumerated exactly. Invariant measures of these lifts are
//! approximated by weighted atom lists collected from long stationary runs.

mod battery;
mod empirical;

pub use battery::{
    class_m_check, compare_lift_measures, BatteryFunction, ClassMReport, ClassMRow,
    ComparisonReport, ComparisonRow, TestFunctionBattery,
};
pub use empirical::{estimate_invariant, EstimateOptions, FilterInit, LiftKind};

use crate::error::Result;
use crate::filter::{filter_update_with_norm, FilterState};
use crate::model::{JointKernel, StateSpace, ZERO_THRESHOLD};

/// Weighted atom of a measure on `P(E) x F`.
#[derive(Debug, Clone)]
pub struct LiftAtomPair {
    pub nu: FilterState,
    pub y: usize,
    pub weight: f64,
}

/// Weighted atom of a measure on `P(E) x E x F`.
#[derive(Debug, Clone)]
pub struct LiftAtomTriple {
    pub nu: FilterState,
    pub x: usize,
    pub y: usize,
    pub weight: f64,
}

/// Weighted atoms approximating an invariant measure of a lifted kernel.
#[derive(Debug, Clone)]
pub enum LiftAtoms {
    Pair(Vec<LiftAtomPair>),
    Triple(Vec<LiftAtomTriple>),
}

#[derive(Debug, Clone)]
pub struct EmpiricalLiftMeasure {
    pub atoms: LiftAtoms,
    pub sample_count: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl EmpiricalLiftMeasure {
    pub fn len(&self) -> usize {
        match &self.atoms {
            LiftAtoms::Pair(a) => a.len(),
            LiftAtoms::Triple(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pair_atoms(&self) -> Option<&[LiftAtomPair]> {
        match &self.atoms {
            LiftAtoms::Pair(a) => Some(a),
            LiftAtoms::Triple(_) => None,
        }
    }

    pub fn triple_atoms(&self) -> Option<&[LiftAtomTriple]> {
        match &self.atoms {
            LiftAtoms::Triple(a) => Some(a),
            LiftAtoms::Pair(_) => None,
        }
    }
}

/// One-step successor distribution of the pair lift from `(nu, y0)`: for
/// every observation `y1` reachable next, its predictive probability
/// together with the updated filter state.
pub fn gamma_successors(
    kernel: &JointKernel,
    nu: &FilterState,
    y0: usize,
) -> Result<Vec<(f64, FilterState, usize)>> {
    let space = kernel.space();
    let mut out = Vec::new();
    for y1 in 0..space.observed_count() {
        let mut mass = 0.0;
        for (z, &p) in nu.probs().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = kernel.row(space.pair_index(z, y0));
            for z1 in 0..space.hidden_count() {
                mass += p * row[space.pair_index(z1, y1)];
            }
        }
        if mass > ZERO_THRESHOLD {
            let (next, norm) = filter_update_with_norm(kernel, nu, y0, y1)?;
            debug_assert!((norm - mass).abs() < 1e-12);
            out.push((mass, next, y1));
        }
    }
    Ok(out)
}

/// One-step successor distribution of the triple lift from `(nu, x, y)`:
/// every pair-kernel successor `(x', y')` with its probability and the
/// filter state updated by the observation move.
pub fn lambda_successors(
    kernel: &JointKernel,
    nu: &FilterState,
    x: usize,
    y: usize,
) -> Result<Vec<(f64, FilterState, usize, usize)>> {
    let space = kernel.space();
    let row = kernel.row(space.pair_index(x, y));
    let mut updated: Vec<Option<FilterState>> = vec![None; space.observed_count()];
    let mut out = Vec::new();
    for x1 in 0..space.hidden_count() {
        for y1 in 0..space.observed_count() {
            let p = row[space.pair_index(x1, y1)];
            if p > ZERO_THRESHOLD {
                if updated[y1].is_none() {
                    updated[y1] = Some(filter_update_with_norm(kernel, nu, y, y1)?.0);
                }
                out.push((p, updated[y1].clone().unwrap(), x1, y1));
            }
        }
    }
    Ok(out)
}

/// Barycenter of a pair-lift measure: the law on `E x F` given by
/// `bm(z, w) = sum_atoms weight * nu(z) * I(y = w)`.
pub fn barycenter(space: &StateSpace, atoms: &[LiftAtomPair]) -> Vec<f64> {
    let mut out = vec![0.0; space.pair_count()];
    for atom in atoms {
        for (z, &p) in atom.nu.probs().iter().enumerate() {
            out[space.pair_index(z, atom.y)] += atom.weight * p;
        }
    }
    out
}

/// `(nu, y)`-marginal of a triple-lift measure (drop the hidden coordinate).
pub fn pair_marginal(atoms: &[LiftAtomTriple]) -> Vec<LiftAtomPair> {
    atoms
        .iter()
        .map(|a| LiftAtomPair {
            nu: a.nu.clone(),
            y: a.y,
            weight: a.weight,
        })
        .collect()
}

/// `(x, y)`-marginal of a triple-lift measure, as a law on the pair space.
pub fn joint_marginal(space: &StateSpace, atoms: &[LiftAtomTriple]) -> Vec<f64> {
    let mut out = vec![0.0; space.pair_count()];
    for a in atoms {
        out[space.pair_index(a.x, a.y)] += a.weight;
    }
    out
}

/// Push a finitely-supported pair-lift measure one step through the lifted
/// kernel, exactly.
pub fn gamma_pushforward(
    kernel: &JointKernel,
    atoms: &[LiftAtomPair],
) -> Result<Vec<LiftAtomPair>> {
    let mut out = Vec::new();
    for atom in atoms {
        for (p, nu, y1) in gamma_successors(kernel, &atom.nu, atom.y)? {
            out.push(LiftAtomPair {
                nu,
                y: y1,
                weight: atom.weight * p,
            });
        }
    }
    Ok(out)
}
