//! Nondegeneracy of the pair kernel: detection of a factorization
//! `P = g * (P0 (x) Q)` with strictly positive density `g`, validation of
//! supplied factorizations, and the support checks this structure implies
//! for the iterated kernel and for the invariant law.

use super::{support, JointKernel, StateSpace, StationaryLaw, ZERO_THRESHOLD};

/// The triple `(P0, Q, g)` realizing `P((z,w),(z',w')) =
/// g(z,w,z',w') * P0(z,z') * Q(w,w')`.
#[derive(Debug, Clone)]
pub struct NondegenFactorization {
    /// Row-stochastic `|E| x |E|` kernel, row-major.
    pub p0: Vec<f64>,
    /// Row-stochastic `|F| x |F|` kernel, row-major.
    pub q: Vec<f64>,
    /// Density indexed by pair states `(s, s')`, same layout as the kernel.
    pub g: Vec<f64>,
}

impl NondegenFactorization {
    /// `P0(z, z') * Q(w, w')` for pair states `s = (z, w)`, `t = (z', w')`.
    pub fn product_entry(&self, space: &StateSpace, s: usize, t: usize) -> f64 {
        let (z, w) = space.split_index(s);
        let (z1, w1) = space.split_index(t);
        self.p0[z * space.hidden_count() + z1] * self.q[w * space.observed_count() + w1]
    }

    pub fn g_entry(&self, space: &StateSpace, s: usize, t: usize) -> f64 {
        self.g[s * space.pair_count() + t]
    }
}

/// Why no factorization exists, with a concrete witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NondegeneracyWitness {
    /// The support of row `(z, w)` is not a full rectangle: the pair
    /// `(z1, w1)` lies in the product of the projections but carries zero
    /// probability.
    NonRectangular {
        z: usize,
        w: usize,
        missing: (usize, usize),
    },
    /// The hidden projection of the row support depends on the observed
    /// coordinate: rows `(z, w)` and `(z, w_other)` project differently.
    HiddenSetVariesWithObservation { z: usize, w: usize, w_other: usize },
    /// The observed projection of the row support depends on the hidden
    /// coordinate: rows `(z, w)` and `(z_other, w)` project differently.
    ObservedSetVariesWithHidden { z: usize, w: usize, z_other: usize },
}

impl NondegeneracyWitness {
    pub fn describe(&self, space: &StateSpace) -> String {
        let h = space.hidden_labels();
        let o = space.observed_labels();
        match self {
            NondegeneracyWitness::NonRectangular { z, w, missing } => format!(
                "row ({}, {}): support is not a rectangle; ({}, {}) is in the projection product but has zero probability",
                h[*z], o[*w], h[missing.0], o[missing.1]
            ),
            NondegeneracyWitness::HiddenSetVariesWithObservation { z, w, w_other } => format!(
                "hidden successor set of rows ({z0}, {w0}) and ({z0}, {w1}) differ, so it depends on the observation",
                z0 = h[*z], w0 = o[*w], w1 = o[*w_other]
            ),
            NondegeneracyWitness::ObservedSetVariesWithHidden { z, w, z_other } => format!(
                "observed successor set of rows ({z0}, {w0}) and ({z1}, {w0}) differ, so it depends on the hidden state",
                z0 = h[*z], w0 = o[*w], z1 = h[*z_other]
            ),
        }
    }
}

/// Outcome of [`detect_nondegeneracy`]: a refutation is a normal result,
/// not an error.
#[derive(Debug, Clone)]
pub enum NondegeneracyVerdict {
    Factorized(NondegenFactorization),
    Refuted(NondegeneracyWitness),
}

impl NondegeneracyVerdict {
    pub fn is_factorized(&self) -> bool {
        matches!(self, NondegeneracyVerdict::Factorized(_))
    }

    pub fn factorization(&self) -> Option<&NondegenFactorization> {
        match self {
            NondegeneracyVerdict::Factorized(f) => Some(f),
            NondegeneracyVerdict::Refuted(_) => None,
        }
    }
}

/// Decide whether `P = g * (P0 (x) Q)` for some strictly positive `g`.
///
/// On a finite space a factorization exists if and only if every row support
/// is a rectangle `A(z) x B(w)` whose hidden side depends only on `z` and
/// whose observed side depends only on `w`; the detector checks exactly that
/// and is therefore complete. On success it returns the canonical choice
/// `P0(z, .) = uniform on A(z)`, `Q(w, .) = uniform on B(w)`,
/// `g = P / (P0 (x) Q)` on the support and `g = 1` elsewhere.
pub fn detect_nondegeneracy(kernel: &JointKernel) -> NondegeneracyVerdict {
    let space = kernel.space();
    let ne = space.hidden_count();
    let nf = space.observed_count();

    // Projections of each row support.
    let mut hidden_sets = vec![vec![false; ne]; ne * nf];
    let mut observed_sets = vec![vec![false; nf]; ne * nf];
    for s in 0..space.pair_count() {
        let row = kernel.row(s);
        for t in support(row) {
            let (z1, w1) = space.split_index(t);
            hidden_sets[s][z1] = true;
            observed_sets[s][w1] = true;
        }
    }

    // (i) every row support must equal the product of its projections.
    for z in 0..ne {
        for w in 0..nf {
            let s = space.pair_index(z, w);
            for z1 in 0..ne {
                if !hidden_sets[s][z1] {
                    continue;
                }
                for w1 in 0..nf {
                    if observed_sets[s][w1] && kernel.entry(s, space.pair_index(z1, w1)) <= ZERO_THRESHOLD {
                        return NondegeneracyVerdict::Refuted(NondegeneracyWitness::NonRectangular {
                            z,
                            w,
                            missing: (z1, w1),
                        });
                    }
                }
            }
        }
    }

    // (ii) the hidden projection may depend on z only.
    for z in 0..ne {
        let first = space.pair_index(z, 0);
        for w in 1..nf {
            let s = space.pair_index(z, w);
            if hidden_sets[s] != hidden_sets[first] {
                return NondegeneracyVerdict::Refuted(
                    NondegeneracyWitness::HiddenSetVariesWithObservation { z, w: 0, w_other: w },
                );
            }
        }
    }

    // (iii) the observed projection may depend on w only.
    for w in 0..nf {
        let first = space.pair_index(0, w);
        for z in 1..ne {
            let s = space.pair_index(z, w);
            if observed_sets[s] != observed_sets[first] {
                return NondegeneracyVerdict::Refuted(
                    NondegeneracyWitness::ObservedSetVariesWithHidden { z: 0, w, z_other: z },
                );
            }
        }
    }

    // Canonical factorization: uniform reference kernels on the support sets.
    let mut p0 = vec![0.0; ne * ne];
    for z in 0..ne {
        let set = &hidden_sets[space.pair_index(z, 0)];
        let count = set.iter().filter(|&&b| b).count();
        for (z1, &member) in set.iter().enumerate() {
            if member {
                p0[z * ne + z1] = 1.0 / count as f64;
            }
        }
    }
    let mut q = vec![0.0; nf * nf];
    for w in 0..nf {
        let set = &observed_sets[space.pair_index(0, w)];
        let count = set.iter().filter(|&&b| b).count();
        for (w1, &member) in set.iter().enumerate() {
            if member {
                q[w * nf + w1] = 1.0 / count as f64;
            }
        }
    }
    let n = space.pair_count();
    let mut g = vec![1.0; n * n];
    for s in 0..n {
        let (z, w) = space.split_index(s);
        for t in 0..n {
            let (z1, w1) = space.split_index(t);
            let product = p0[z * ne + z1] * q[w * nf + w1];
            if product > 0.0 {
                g[s * n + t] = kernel.entry(s, t) / product;
            }
        }
    }
    NondegeneracyVerdict::Factorized(NondegenFactorization { p0, q, g })
}

/// Result of checking a factorization against a kernel.
#[derive(Debug, Clone)]
pub struct FactorizationReport {
    pub valid: bool,
    /// `max |g * P0 * Q - P|` over all index pairs.
    pub max_reconstruction_error: f64,
    /// Smallest `g` value on the support of `P0 (x) Q`.
    pub min_g_on_support: f64,
    /// First index pair where positivity or reconstruction failed.
    pub first_violation: Option<(usize, usize)>,
}

/// Check the factorization invariants: `g > 0` wherever `P0 (x) Q > 0`, and
/// `g * P0 * Q` reconstructs `P` exactly up to 1e-12.
pub fn validate_factorization(
    kernel: &JointKernel,
    fact: &NondegenFactorization,
) -> FactorizationReport {
    let space = kernel.space();
    let n = space.pair_count();
    let mut max_err = 0.0_f64;
    let mut min_g = f64::INFINITY;
    let mut first_violation = None;
    let mut valid = true;
    if fact.p0.len() != space.hidden_count() * space.hidden_count()
        || fact.q.len() != space.observed_count() * space.observed_count()
        || fact.g.len() != n * n
    {
        return FactorizationReport {
            valid: false,
            max_reconstruction_error: f64::INFINITY,
            min_g_on_support: 0.0,
            first_violation: Some((0, 0)),
        };
    }
    for s in 0..n {
        for t in 0..n {
            let product = fact.product_entry(space, s, t);
            let g = fact.g_entry(space, s, t);
            if product > ZERO_THRESHOLD {
                if g <= 0.0 {
                    valid = false;
                    first_violation.get_or_insert((s, t));
                }
                min_g = min_g.min(g);
            }
            let err = (g * product - kernel.entry(s, t)).abs();
            if err > max_err {
                max_err = err;
            }
            if err > 1e-12 {
                valid = false;
                first_violation.get_or_insert((s, t));
            }
        }
    }
    FactorizationReport {
        valid,
        max_reconstruction_error: max_err,
        min_g_on_support: if min_g.is_finite() { min_g } else { 0.0 },
        first_violation,
    }
}

/// Result of the iterated-kernel support check.
#[derive(Debug, Clone)]
pub struct NStepReport {
    pub n: usize,
    pub holds: bool,
    /// Pair states in the support of the invariant law where
    /// `supp P^n((z,w), .)` is not the product of the marginal supports.
    pub failures: Vec<(usize, usize)>,
}

/// Verify that the `n`-step kernel factorizes at the level of supports:
/// for every pair state `(z, w)` charged by the invariant law,
/// `supp P^n((z,w), .)` must equal `supp PnX(z, .) x supp PnY(w, .)`,
/// where `PnX` and `PnY` are the hidden and observed `n`-step marginal
/// kernels obtained by averaging the other coordinate under the
/// conditionals of the invariant law.
pub fn nstep_factorization_check(
    kernel: &JointKernel,
    law: &StationaryLaw,
    n: usize,
) -> NStepReport {
    let space = kernel.space();
    let ne = space.hidden_count();
    let nf = space.observed_count();
    let dim = space.pair_count();
    let pn = kernel.power(n);
    let pi = law.pi();
    let pi_hidden = law.hidden_marginal(space);
    let pi_observed = law.observed_marginal(space);

    // Hidden n-step marginal kernel: average the observed start under the
    // conditional of the invariant law given the hidden coordinate.
    let mut pnx = vec![0.0; ne * ne];
    for z in 0..ne {
        if pi_hidden[z] <= ZERO_THRESHOLD {
            continue;
        }
        for w in 0..nf {
            let weight = pi[space.pair_index(z, w)] / pi_hidden[z];
            if weight <= 0.0 {
                continue;
            }
            let s = space.pair_index(z, w);
            for t in 0..dim {
                let (z1, _) = space.split_index(t);
                pnx[z * ne + z1] += weight * pn[s * dim + t];
            }
        }
    }
    // Observed counterpart.
    let mut pny = vec![0.0; nf * nf];
    for w in 0..nf {
        if pi_observed[w] <= ZERO_THRESHOLD {
            continue;
        }
        for z in 0..ne {
            let weight = pi[space.pair_index(z, w)] / pi_observed[w];
            if weight <= 0.0 {
                continue;
            }
            let s = space.pair_index(z, w);
            for t in 0..dim {
                let (_, w1) = space.split_index(t);
                pny[w * nf + w1] += weight * pn[s * dim + t];
            }
        }
    }

    let mut failures = Vec::new();
    for z in 0..ne {
        for w in 0..nf {
            let s = space.pair_index(z, w);
            if pi[s] <= ZERO_THRESHOLD {
                continue;
            }
            let mut ok = true;
            'cells: for z1 in 0..ne {
                for w1 in 0..nf {
                    let joint = pn[s * dim + space.pair_index(z1, w1)] > ZERO_THRESHOLD;
                    let product = pnx[z * ne + z1] > ZERO_THRESHOLD
                        && pny[w * nf + w1] > ZERO_THRESHOLD;
                    if joint != product {
                        ok = false;
                        break 'cells;
                    }
                }
            }
            if !ok {
                failures.push((z, w));
            }
        }
    }
    NStepReport {
        n,
        holds: failures.is_empty(),
        failures,
    }
}

/// Result of the product-structure check of an invariant law.
#[derive(Debug, Clone)]
pub struct ProductStructureReport {
    pub holds: bool,
    /// Density `h(z, w) = pi(z, w) / (pi_E(z) pi_F(w))` on the product of the
    /// marginal supports (flattened over pair states; zero off that product).
    pub h: Vec<f64>,
    /// A pair `(z, w)` in the product of the marginal supports that `pi`
    /// does not charge, when the structure fails.
    pub witness: Option<(usize, usize)>,
}

/// Check whether `supp pi = supp pi_E x supp pi_F` and compute the density of
/// `pi` with respect to the product of its marginals where defined.
pub fn product_structure_check(space: &StateSpace, pi: &[f64]) -> ProductStructureReport {
    let ne = space.hidden_count();
    let nf = space.observed_count();
    let mut pi_hidden = vec![0.0; ne];
    let mut pi_observed = vec![0.0; nf];
    for s in 0..space.pair_count() {
        let (z, w) = space.split_index(s);
        pi_hidden[z] += pi[s];
        pi_observed[w] += pi[s];
    }
    let mut h = vec![0.0; space.pair_count()];
    let mut witness = None;
    for z in 0..ne {
        for w in 0..nf {
            let s = space.pair_index(z, w);
            let product = pi_hidden[z] * pi_observed[w];
            if product > ZERO_THRESHOLD {
                h[s] = pi[s] / product;
                if pi[s] <= ZERO_THRESHOLD && witness.is_none() {
                    witness = Some((z, w));
                }
            }
        }
    }
    ProductStructureReport {
        holds: witness.is_none(),
        h,
        witness,
    }
}

/// Brute-force nondegeneracy decision for tiny spaces: search every
/// assignment of candidate hidden support sets `A(z)` and observed support
/// sets `B(w)` and test whether the row supports match `A(z) x B(w)`.
///
/// Exponential in the space size; intended as an independent cross-check of
/// [`detect_nondegeneracy`] for `|E||F| <= 6`.
pub fn brute_force_nondegenerate(kernel: &JointKernel) -> bool {
    let space = kernel.space();
    let ne = space.hidden_count();
    let nf = space.observed_count();
    let hidden_subsets: Vec<u32> = (1..(1u32 << ne)).collect();
    let observed_subsets: Vec<u32> = (1..(1u32 << nf)).collect();

    // Row supports as (hidden mask, observed mask, popcount) for comparison.
    let mut row_supports = Vec::with_capacity(space.pair_count());
    for s in 0..space.pair_count() {
        let sup = support(kernel.row(s));
        let mut cells = vec![false; space.pair_count()];
        for t in sup {
            cells[t] = true;
        }
        row_supports.push(cells);
    }

    let mut a_choice = vec![0usize; ne];
    let mut b_choice = vec![0usize; nf];
    loop {
        // Test the current assignment.
        let matches = (0..ne).all(|z| {
            (0..nf).all(|w| {
                let a = hidden_subsets[a_choice[z]];
                let b = observed_subsets[b_choice[w]];
                let s = space.pair_index(z, w);
                (0..ne).all(|z1| {
                    (0..nf).all(|w1| {
                        let in_rect = (a >> z1) & 1 == 1 && (b >> w1) & 1 == 1;
                        row_supports[s][space.pair_index(z1, w1)] == in_rect
                    })
                })
            })
        });
        if matches {
            return true;
        }
        // Odometer over all assignments.
        let mut carry = true;
        for slot in a_choice.iter_mut() {
            if carry {
                *slot += 1;
                if *slot == hidden_subsets.len() {
                    *slot = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            for slot in b_choice.iter_mut() {
                *slot += 1;
                if *slot == observed_subsets.len() {
                    *slot = 0;
                } else {
                    carry = false;
                    break;
                }
            }
        }
        if carry {
            return false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{stationary_law, StationaryOptions};

    fn product_kernel() -> JointKernel {
        // P = P0 (x) Q with full support: trivially nondegenerate.
        let space = StateSpace::new(vec!["a", "b"], vec!["0", "1"]).unwrap();
        let p0 = [[0.7, 0.3], [0.4, 0.6]];
        let q = [[0.5, 0.5], [0.2, 0.8]];
        let n = space.pair_count();
        let mut rows = vec![0.0; n * n];
        for z in 0..2 {
            for w in 0..2 {
                for z1 in 0..2 {
                    for w1 in 0..2 {
                        rows[space.pair_index(z, w) * n + space.pair_index(z1, w1)] =
                            p0[z][z1] * q[w][w1];
                    }
                }
            }
        }
        JointKernel::validate(space, rows).unwrap()
    }

    #[test]
    fn product_kernel_factorizes() {
        let kernel = product_kernel();
        let verdict = detect_nondegeneracy(&kernel);
        let fact = verdict.factorization().expect("factorization expected");
        let report = validate_factorization(&kernel, fact);
        assert!(report.valid, "report: {report:?}");
        assert!(report.max_reconstruction_error < 1e-12);
        assert!(report.min_g_on_support > 0.0);
    }

    #[test]
    fn zeroed_g_detected_with_index() {
        let kernel = product_kernel();
        let mut fact = detect_nondegeneracy(&kernel)
            .factorization()
            .unwrap()
            .clone();
        // Break one support point.
        let n = kernel.pair_count();
        let idx = support(kernel.row(0))[0];
        fact.g[idx] = 0.0;
        let report = validate_factorization(&kernel, &fact);
        assert!(!report.valid);
        assert_eq!(report.first_violation, Some((0, idx % n)));
    }

    #[test]
    fn brute_force_agrees_on_product_kernel() {
        let kernel = product_kernel();
        assert!(brute_force_nondegenerate(&kernel));
    }

    #[test]
    fn nstep_check_passes_on_full_support_model() {
        let kernel = product_kernel();
        let law = stationary_law(&kernel, &StationaryOptions::default()).unwrap();
        for n in 1..=3 {
            let report = nstep_factorization_check(&kernel, &law, n);
            assert!(report.holds, "n = {n}: {:?}", report.failures);
        }
    }

    #[test]
    fn product_measure_has_unit_density() {
        let space = StateSpace::new(vec!["a", "b"], vec!["0", "1"]).unwrap();
        let pi = vec![0.12, 0.28, 0.18, 0.42]; // (0.3, 0.7) x (0.4, 0.6) scaled by rows
        let pi = {
            // pi = pi_E (x) pi_F with pi_E = (0.4, 0.6), pi_F = (0.3, 0.7)
            let pe = [0.4, 0.6];
            let pf = [0.3, 0.7];
            let mut v = pi;
            for z in 0..2 {
                for w in 0..2 {
                    v[space.pair_index(z, w)] = pe[z] * pf[w];
                }
            }
            v
        };
        let report = product_structure_check(&space, &pi);
        assert!(report.holds);
        for s in 0..space.pair_count() {
            assert!((report.h[s] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_atom_refutes_product_structure() {
        let space = StateSpace::new(vec!["a", "b"], vec!["0", "1"]).unwrap();
        // Charges (a,0) and (b,1) only: marginal product support is all four.
        let pi = vec![0.5, 0.0, 0.0, 0.5];
        let report = product_structure_check(&space, &pi);
        assert!(!report.holds);
        assert!(report.witness.is_some());
    }
}
