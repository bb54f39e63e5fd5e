//! Finite-state representation of a bivariate Markov chain `(X_n, Y_n)` on a
//! product space `E x F`, together with its stationary law and time reversal.
//!
//! Pair states are indexed `s = z * |F| + w` where `z` indexes the hidden
//! space `E` and `w` the observed space `F`. Kernels are dense row-stochastic
//! matrices over pair states, stored row-major.

mod mixing;
mod nondegen;

pub use mixing::{law_convergence, marginal_kernel_mixing, mixing_profile, MixingProfile};
pub use nondegen::{
    brute_force_nondegenerate, detect_nondegeneracy, nstep_factorization_check,
    product_structure_check, validate_factorization, FactorizationReport, NStepReport,
    NondegenFactorization, NondegeneracyVerdict, NondegeneracyWitness, ProductStructureReport,
};

use crate::error::{Error, Result};

/// Default cap on `|E| * |F|`; exact dense computation beyond this is not
/// what this crate is for.
pub const DEFAULT_SIZE_BOUND: usize = 4096;

/// Kernel entries at or below this threshold are treated as structural zeros
/// when computing supports.
pub const ZERO_THRESHOLD: f64 = 1e-14;

/// Tolerance on row sums accepted by [`JointKernel::validate`].
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Residual bound guaranteed by [`stationary_law`]: `||pi P - pi||_1`.
pub const STATIONARY_RESIDUAL: f64 = 1e-10;

/// Pivot tolerance of the rank test used to flag a non-unique invariant law.
pub const RANK_TOL: f64 = 1e-8;

/// Total-mass total variation: `sum_i |a_i - b_i|`, in `[0, 2]` for
/// probability vectors.
pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Indices of entries above the structural-zero threshold.
pub fn support(v: &[f64]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, &p)| p > ZERO_THRESHOLD)
        .map(|(i, _)| i)
        .collect()
}

/// Labelled finite hidden and observed spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    hidden_labels: Vec<String>,
    observed_labels: Vec<String>,
}

impl StateSpace {
    pub fn new<S: Into<String>>(hidden: Vec<S>, observed: Vec<S>) -> Result<Self> {
        Self::with_bound(hidden, observed, DEFAULT_SIZE_BOUND)
    }

    pub fn with_bound<S: Into<String>>(
        hidden: Vec<S>,
        observed: Vec<S>,
        bound: usize,
    ) -> Result<Self> {
        let hidden_labels: Vec<String> = hidden.into_iter().map(Into::into).collect();
        let observed_labels: Vec<String> = observed.into_iter().map(Into::into).collect();
        if hidden_labels.is_empty() || observed_labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (which, labels) in [("hidden", &hidden_labels), ("observed", &observed_labels)] {
            for (i, l) in labels.iter().enumerate() {
                if labels[..i].contains(l) {
                    return Err(Error::DuplicateLabel {
                        which,
                        label: l.clone(),
                    });
                }
            }
        }
        let size = hidden_labels.len() * observed_labels.len();
        if size > bound {
            return Err(Error::SpaceTooLarge { size, bound });
        }
        Ok(StateSpace {
            hidden_labels,
            observed_labels,
        })
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden_labels.len()
    }

    pub fn observed_count(&self) -> usize {
        self.observed_labels.len()
    }

    /// Number of pair states `|E| * |F|`.
    pub fn pair_count(&self) -> usize {
        self.hidden_labels.len() * self.observed_labels.len()
    }

    pub fn hidden_labels(&self) -> &[String] {
        &self.hidden_labels
    }

    pub fn observed_labels(&self) -> &[String] {
        &self.observed_labels
    }

    pub fn pair_index(&self, z: usize, w: usize) -> usize {
        debug_assert!(z < self.hidden_count() && w < self.observed_count());
        z * self.observed_count() + w
    }

    /// Inverse of [`pair_index`]: `(hidden, observed)`.
    pub fn split_index(&self, s: usize) -> (usize, usize) {
        (s / self.observed_count(), s % self.observed_count())
    }

    pub fn hidden_index(&self, label: &str) -> Result<usize> {
        self.hidden_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel {
                label: label.to_string(),
            })
    }

    pub fn observed_index(&self, label: &str) -> Result<usize> {
        self.observed_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel {
                label: label.to_string(),
            })
    }

    pub fn pair_label(&self, s: usize) -> String {
        let (z, w) = self.split_index(s);
        format!("({}, {})", self.hidden_labels[z], self.observed_labels[w])
    }
}

/// Row-stochastic transition law of the pair chain on `E x F`.
#[derive(Debug, Clone)]
pub struct JointKernel {
    space: StateSpace,
    rows: Vec<f64>,
}

impl JointKernel {
    /// Validate raw rows (flattened `(|E||F|)^2`, row-major) into a kernel.
    pub fn validate(space: StateSpace, rows: Vec<f64>) -> Result<Self> {
        let n = space.pair_count();
        if rows.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: rows.len(),
            });
        }
        for i in 0..n {
            let row = &rows[i * n..(i + 1) * n];
            for (j, &p) in row.iter().enumerate() {
                if p < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NonStochasticRow { row: i, sum });
            }
        }
        Ok(JointKernel { space, rows })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn pair_count(&self) -> usize {
        self.space.pair_count()
    }

    pub fn row(&self, s: usize) -> &[f64] {
        let n = self.pair_count();
        &self.rows[s * n..(s + 1) * n]
    }

    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.rows[from * self.pair_count() + to]
    }

    pub fn rows_flat(&self) -> &[f64] {
        &self.rows
    }

    /// Dense `n`-step kernel `P^n` (flattened row-major).
    pub fn power(&self, n: usize) -> Vec<f64> {
        let dim = self.pair_count();
        let mut acc = identity(dim);
        for _ in 0..n {
            acc = mat_mul(&acc, &self.rows, dim);
        }
        acc
    }

    /// Left action `v P` of a row vector on the kernel.
    pub fn apply_left(&self, v: &[f64]) -> Vec<f64> {
        let n = self.pair_count();
        let mut out = vec![0.0; n];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                let row = self.row(i);
                for (o, &p) in out.iter_mut().zip(row) {
                    *o += vi * p;
                }
            }
        }
        out
    }
}

pub(crate) fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

pub(crate) fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                let brow = &b[k * n..(k + 1) * n];
                let crow = &mut c[i * n..(i + 1) * n];
                for (cj, &bj) in crow.iter_mut().zip(brow) {
                    *cj += aik * bj;
                }
            }
        }
    }
    c
}

/// How an invariant law was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryMethod {
    DenseSolve,
    PowerIteration,
    Supplied,
}

/// A probability vector over pair states that is invariant for its kernel.
#[derive(Debug, Clone)]
pub struct StationaryLaw {
    pi: Vec<f64>,
    eigenspace_dim: usize,
    method: StationaryMethod,
}

impl StationaryLaw {
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Dimension of the eigenvalue-1 eigenspace of the kernel. A dimension
    /// above 1 means the invariant law is not unique and this one is merely
    /// the solver's selection.
    pub fn eigenspace_dim(&self) -> usize {
        self.eigenspace_dim
    }

    pub fn is_unique(&self) -> bool {
        self.eigenspace_dim == 1
    }

    pub fn method(&self) -> StationaryMethod {
        self.method
    }

    /// Hidden marginal `pi(. x F)` over `E`.
    pub fn hidden_marginal(&self, space: &StateSpace) -> Vec<f64> {
        let mut out = vec![0.0; space.hidden_count()];
        for (s, &p) in self.pi.iter().enumerate() {
            out[space.split_index(s).0] += p;
        }
        out
    }

    /// Observed marginal `pi(E x .)` over `F`.
    pub fn observed_marginal(&self, space: &StateSpace) -> Vec<f64> {
        let mut out = vec![0.0; space.observed_count()];
        for (s, &p) in self.pi.iter().enumerate() {
            out[space.split_index(s).1] += p;
        }
        out
    }

    /// Wrap a user-supplied law after checking nonnegativity, normalization
    /// and invariance for `kernel`.
    pub fn validate(kernel: &JointKernel, pi: Vec<f64>) -> Result<Self> {
        let n = kernel.pair_count();
        if pi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: pi.len(),
            });
        }
        for (i, &p) in pi.iter().enumerate() {
            if p < 0.0 {
                return Err(Error::NegativeEntry {
                    row: 0,
                    col: i,
                    value: p,
                });
            }
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NonNormalized { sum });
        }
        let residual = tv(&kernel.apply_left(&pi), &pi);
        if residual > STATIONARY_RESIDUAL {
            return Err(Error::NotStationary { residual });
        }
        let eigenspace_dim = eigenspace_dimension(kernel);
        Ok(StationaryLaw {
            pi,
            eigenspace_dim,
            method: StationaryMethod::Supplied,
        })
    }
}

/// Options for [`stationary_law`].
#[derive(Debug, Clone)]
pub struct StationaryOptions {
    /// Skip the dense solve and go straight to power iteration.
    pub power_iteration_only: bool,
    /// Iteration cap for the power-iteration fallback.
    pub max_iterations: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions {
            power_iteration_only: false,
            max_iterations: 500_000,
        }
    }
}

/// Compute an invariant law of `kernel`.
///
/// Primary route: dense linear solve of `(P^T - I) pi = 0` with the
/// normalization `sum pi = 1`. Falls back to power iteration of the lazy
/// kernel `(P + I)/2` when the solve is singular or leaves the simplex
/// (which happens when the invariant law is not unique). The eigenvalue-1
/// eigenspace dimension is always reported so callers can tell whether the
/// returned law is the only one.
pub fn stationary_law(kernel: &JointKernel, options: &StationaryOptions) -> Result<StationaryLaw> {
    let eigenspace_dim = eigenspace_dimension(kernel);
    if !options.power_iteration_only {
        if let Some(pi) = dense_stationary_solve(kernel) {
            return Ok(StationaryLaw {
                pi,
                eigenspace_dim,
                method: StationaryMethod::DenseSolve,
            });
        }
    }
    let pi = power_iteration(kernel, options.max_iterations)?;
    Ok(StationaryLaw {
        pi,
        eigenspace_dim,
        method: StationaryMethod::PowerIteration,
    })
}

/// Dimension of `ker(P^T - I)` with pivot tolerance [`RANK_TOL`].
fn eigenspace_dimension(kernel: &JointKernel) -> usize {
    let n = kernel.pair_count();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[j * n + i] = kernel.entry(i, j) - if i == j { 1.0 } else { 0.0 };
        }
    }
    n - matrix_rank(&mut a, n, RANK_TOL)
}

fn matrix_rank(a: &mut [f64], n: usize, tol: f64) -> usize {
    let mut rank = 0;
    let mut row = 0;
    for col in 0..n {
        // Partial pivoting on the current column.
        let mut pivot_row = row;
        let mut pivot_val = 0.0;
        for r in row..n {
            let v = a[r * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val <= tol {
            continue;
        }
        if pivot_row != row {
            for c in 0..n {
                a.swap(row * n + c, pivot_row * n + c);
            }
        }
        let pivot = a[row * n + col];
        for r in (row + 1)..n {
            let factor = a[r * n + col] / pivot;
            if factor != 0.0 {
                for c in col..n {
                    a[r * n + c] -= factor * a[row * n + c];
                }
            }
        }
        rank += 1;
        row += 1;
        if row == n {
            break;
        }
    }
    rank
}

/// Solve `(P^T - I) pi = 0, sum pi = 1` by Gaussian elimination; `None` when
/// the system is singular or the solution leaves the simplex.
fn dense_stationary_solve(kernel: &JointKernel) -> Option<Vec<f64>> {
    let n = kernel.pair_count();
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            a[j * n + i] = kernel.entry(i, j) - if i == j { 1.0 } else { 0.0 };
        }
    }
    // Replace the last equation with the normalization constraint.
    for i in 0..n {
        a[(n - 1) * n + i] = 1.0;
    }
    b[n - 1] = 1.0;

    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = a[col * n + col].abs();
        for r in (col + 1)..n {
            let v = a[r * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val < 1e-13 {
            return None;
        }
        if pivot_row != col {
            for c in 0..n {
                a.swap(col * n + c, pivot_row * n + c);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for r in (col + 1)..n {
            let factor = a[r * n + col] / pivot;
            if factor != 0.0 {
                for c in col..n {
                    a[r * n + c] -= factor * a[col * n + c];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    let mut pi = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in (i + 1)..n {
            acc -= a[i * n + j] * pi[j];
        }
        pi[i] = acc / a[i * n + i];
    }
    // A clean one-dimensional fixed point has only rounding-level negatives.
    if pi.iter().any(|&p| p < -1e-9) {
        return None;
    }
    for p in &mut pi {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let sum: f64 = pi.iter().sum();
    if sum <= 0.0 {
        return None;
    }
    for p in &mut pi {
        *p /= sum;
    }
    let residual = tv(&kernel.apply_left(&pi), &pi);
    if residual < STATIONARY_RESIDUAL {
        Some(pi)
    } else {
        None
    }
}

/// Power iteration of the lazy kernel `(P + I)/2` from the uniform vector.
fn power_iteration(kernel: &JointKernel, max_iterations: usize) -> Result<Vec<f64>> {
    let n = kernel.pair_count();
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..max_iterations {
        let pv = kernel.apply_left(&v);
        let residual = tv(&pv, &v);
        let mut next: Vec<f64> = v
            .iter()
            .zip(&pv)
            .map(|(&a, &b)| 0.5 * (a + b))
            .collect();
        let sum: f64 = next.iter().sum();
        for p in &mut next {
            *p /= sum;
        }
        v = next;
        if residual < STATIONARY_RESIDUAL * 0.1 {
            return Ok(v);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
    })
}

/// Time-reversed kernel: `P'(b, a) = pi(a) P(a, b) / pi(b)` on the support of
/// `pi`; rows at states `pi` does not charge become self-loops (those states
/// are unreachable in stationarity, and a self-loop keeps the kernel
/// stochastic without inventing dynamics).
///
/// The construction makes the detailed-balance identity
/// `pi(a) P(a, b) = pi(b) P'(b, a)` exact up to rounding.
pub fn reverse_kernel(kernel: &JointKernel, law: &StationaryLaw) -> Result<JointKernel> {
    let n = kernel.pair_count();
    let residual = tv(&kernel.apply_left(law.pi()), law.pi());
    if residual > STATIONARY_RESIDUAL {
        return Err(Error::NotStationary { residual });
    }
    let pi = law.pi();
    let mut rows = vec![0.0; n * n];
    for b in 0..n {
        if pi[b] > ZERO_THRESHOLD {
            let mut sum = 0.0;
            for a in 0..n {
                let p = pi[a] * kernel.entry(a, b) / pi[b];
                rows[b * n + a] = p;
                sum += p;
            }
            // pi P = pi makes each reversed row sum to 1 up to rounding;
            // renormalize the residual so validation tolerances are easy.
            for a in 0..n {
                rows[b * n + a] /= sum;
            }
        } else {
            rows[b * n + b] = 1.0;
        }
    }
    JointKernel::validate(kernel.space().clone(), rows)
}
