//! Seeded simulation of the pair chain.

use crate::model::JointKernel;
use crate::rng::Rng;

/// A sampled trajectory of the pair chain; `xs` and `ys` have equal length
/// `horizon + 1` and every step has positive kernel probability by
/// construction.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
    pub seed: u64,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

/// Sample `(X_0, Y_0)` from `initial` (a law on the pair space) and take
/// `horizon` steps through the kernel rows. Deterministic given `seed`.
pub fn simulate_path(
    kernel: &JointKernel,
    initial: &[f64],
    horizon: usize,
    seed: u64,
) -> PathSample {
    assert!(horizon >= 1, "horizon must be at least 1");
    let space = kernel.space();
    let mut rng = Rng::new(seed);
    let mut xs = Vec::with_capacity(horizon + 1);
    let mut ys = Vec::with_capacity(horizon + 1);
    let mut state = rng.sample_index(initial);
    let (z, w) = space.split_index(state);
    xs.push(z);
    ys.push(w);
    for _ in 0..horizon {
        state = rng.sample_index(kernel.row(state));
        let (z, w) = space.split_index(state);
        xs.push(z);
        ys.push(w);
    }
    PathSample { xs, ys, seed }
}
