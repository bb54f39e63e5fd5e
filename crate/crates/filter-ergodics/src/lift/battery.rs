//! A fixed battery of bounded test functions on `P(E) x F` used to compare
//! empirical lift measures.
//!
//! The battery holds, for every hidden state `z`, observed state `w` and
//! power `k` in {1, 2}, the function `(nu, y) -> I(y = w) nu(z)^k`, plus the
//! pairwise products `(nu, y) -> nu(z) nu(z')`. Agreement of two measures on
//! the battery is necessary-but-sampled evidence of equality: the battery
//! pins all coordinate moments of order up to two, which separates any two
//! finitely-supported measures differing in such a moment, but it is not a
//! metric bound.
//!
//! Standard errors of battery means over an ergodic run are estimated by
//! batch means (block length ~ sqrt(sample count)) so that serial
//! correlation of consecutive filter states does not understate them.

use super::{EmpiricalLiftMeasure, LiftAtomTriple};
use crate::model::StateSpace;

#[derive(Debug, Clone)]
pub enum BatteryFunction {
    /// `I(y = w) * nu(z)^k`
    Moment { z: usize, w: usize, k: u32 },
    /// `nu(z) * nu(z')`
    Product { z: usize, z1: usize },
}

impl BatteryFunction {
    pub fn eval(&self, nu: &[f64], y: usize) -> f64 {
        match *self {
            BatteryFunction::Moment { z, w, k } => {
                if y == w {
                    nu[z].powi(k as i32)
                } else {
                    0.0
                }
            }
            BatteryFunction::Product { z, z1 } => nu[z] * nu[z1],
        }
    }

    pub fn id(&self, space: &StateSpace) -> String {
        match *self {
            BatteryFunction::Moment { z, w, k } => format!(
                "nu[{}]^{}*I(y={})",
                space.hidden_labels()[z],
                k,
                space.observed_labels()[w]
            ),
            BatteryFunction::Product { z, z1 } => format!(
                "nu[{}]*nu[{}]",
                space.hidden_labels()[z],
                space.hidden_labels()[z1]
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TestFunctionBattery {
    pub functions: Vec<BatteryFunction>,
}

impl TestFunctionBattery {
    /// The moment battery for a given space.
    pub fn moments(space: &StateSpace) -> Self {
        let mut functions = Vec::new();
        for z in 0..space.hidden_count() {
            for w in 0..space.observed_count() {
                for k in 1..=2 {
                    functions.push(BatteryFunction::Moment { z, w, k });
                }
            }
        }
        for z in 0..space.hidden_count() {
            for z1 in (z + 1)..space.hidden_count() {
                functions.push(BatteryFunction::Product { z, z1 });
            }
        }
        TestFunctionBattery { functions }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// Mean and batch-means standard error of a sequence of per-atom values.
fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 4 {
        return (mean, 0.0);
    }
    let block = (n as f64).sqrt().floor() as usize;
    let blocks = n / block;
    let mut var_acc = 0.0;
    for b in 0..blocks {
        let slice = &values[b * block..(b + 1) * block];
        let bm = slice.iter().sum::<f64>() / block as f64;
        var_acc += (bm - mean) * (bm - mean);
    }
    if blocks < 2 {
        return (mean, 0.0);
    }
    let block_var = var_acc / (blocks - 1) as f64;
    (mean, (block_var / blocks as f64).sqrt())
}

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub function_id: String,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Pooled standard error of the difference of the two means.
    pub se: f64,
    /// Discrepancy of the means in units of the pooled standard error.
    pub z_score: f64,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// True when every battery discrepancy is below 3 standard errors.
    pub indistinguishable: bool,
    /// Caveat carried by every report quoting these estimates.
    pub caveat: &'static str,
}

pub const WINDOW_CAVEAT: &str = "empirical one-sided window approximation; battery agreement is \
necessary-but-sampled evidence of equality, not a metric bound";

fn atom_values(measure: &EmpiricalLiftMeasure, f: &BatteryFunction) -> Vec<f64> {
    match &measure.atoms {
        super::LiftAtoms::Pair(atoms) => atoms
            .iter()
            .map(|a| f.eval(a.nu.probs(), a.y))
            .collect(),
        super::LiftAtoms::Triple(atoms) => atoms
            .iter()
            .map(|a| f.eval(a.nu.probs(), a.y))
            .collect(),
    }
}

/// Compare two empirical lift measures over the battery. Verdict is
/// `indistinguishable` iff every function's discrepancy stays below 3
/// pooled standard errors.
pub fn compare_lift_measures(
    space: &StateSpace,
    a: &EmpiricalLiftMeasure,
    b: &EmpiricalLiftMeasure,
    battery: &TestFunctionBattery,
) -> ComparisonReport {
    let mut rows = Vec::with_capacity(battery.len());
    let mut indistinguishable = true;
    for f in &battery.functions {
        let (mean_a, se_a) = mean_and_se(&atom_values(a, f));
        let (mean_b, se_b) = mean_and_se(&atom_values(b, f));
        let se = (se_a * se_a + se_b * se_b).sqrt();
        let diff = (mean_a - mean_b).abs();
        let z_score = if diff == 0.0 {
            0.0
        } else if se > 0.0 {
            diff / se
        } else {
            f64::INFINITY
        };
        if z_score >= 3.0 {
            indistinguishable = false;
        }
        rows.push(ComparisonRow {
            function_id: f.id(space),
            mean_a,
            mean_b,
            se,
            z_score,
        });
    }
    ComparisonReport {
        rows,
        indistinguishable,
        caveat: WINDOW_CAVEAT,
    }
}

#[derive(Debug, Clone)]
pub struct ClassMRow {
    pub hidden_state: String,
    pub function_id: String,
    /// Mean of `I(x = b) f(nu, y)` over the atoms.
    pub lhs: f64,
    /// Mean of `nu(b) f(nu, y)` over the atoms.
    pub rhs: f64,
    pub se: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone)]
pub struct ClassMReport {
    pub rows: Vec<ClassMRow>,
    /// True when every comparison stays below 3 standard errors: the filter
    /// coordinate behaves as a version of the conditional law of the hidden
    /// coordinate given (filter, observation).
    pub member: bool,
}

/// Check membership of a triple-lift measure in the compatible class: for
/// every hidden state `b` and battery function `f`, the mean of
/// `I(x = b) f(nu, y)` must match the mean of `nu(b) f(nu, y)`.
pub fn class_m_check(
    space: &StateSpace,
    atoms: &[LiftAtomTriple],
    battery: &TestFunctionBattery,
) -> ClassMReport {
    let mut rows = Vec::new();
    let mut member = true;
    for b in 0..space.hidden_count() {
        for f in &battery.functions {
            let diffs: Vec<f64> = atoms
                .iter()
                .map(|a| {
                    let fv = f.eval(a.nu.probs(), a.y);
                    let indicator = if a.x == b { 1.0 } else { 0.0 };
                    (indicator - a.nu.probs()[b]) * fv
                })
                .collect();
            let (mean_diff, se) = mean_and_se(&diffs);
            let lhs_mean: f64 = atoms
                .iter()
                .map(|a| {
                    let fv = f.eval(a.nu.probs(), a.y);
                    if a.x == b {
                        a.weight * fv
                    } else {
                        0.0
                    }
                })
                .sum();
            let rhs_mean: f64 = atoms
                .iter()
                .map(|a| a.weight * a.nu.probs()[b] * f.eval(a.nu.probs(), a.y))
                .sum();
            let diff = mean_diff.abs();
            let z_score = if diff == 0.0 {
                0.0
            } else if se > 0.0 {
                diff / se
            } else {
                f64::INFINITY
            };
            if z_score >= 3.0 {
                member = false;
            }
            rows.push(ClassMRow {
                hidden_state: space.hidden_labels()[b].clone(),
                function_id: f.id(space),
                lhs: lhs_mean,
                rhs: rhs_mean,
                se,
                z_score,
            });
        }
    }
    ClassMReport { rows, member }
}
