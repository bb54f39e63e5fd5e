//! Constructors for the model families used throughout: the classical and
//! generalized hidden Markov structures, feedback models with correlated
//! noise, fully general pair chains, the two counterexample models with
//! degenerate observation structure, and seeded random instances.

mod kalman;

pub use kalman::{
    kalman_lambda_demo, riccati_fixed_point, riccati_step, BranchSummary, KalmanDemoReport,
    KalmanDemoRow, KalmanState,
};

use crate::error::{Error, Result};
use crate::model::{
    stationary_law, JointKernel, NondegenFactorization, StateSpace, StationaryLaw,
    StationaryOptions,
};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Hmm,
    GeneralizedHmm,
    CorrelatedNoiseHmm,
    General,
    Counterexample,
    KalmanDemo,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Hmm => "hmm",
            Family::GeneralizedHmm => "generalized_hmm",
            Family::CorrelatedNoiseHmm => "correlated_noise_hmm",
            Family::General => "general",
            Family::Counterexample => "counterexample",
            Family::KalmanDemo => "kalman_demo",
        }
    }
}

/// A constructed model: kernel, invariant law, and whatever extra structure
/// the construction provides.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    pub family: Family,
    pub kernel: JointKernel,
    pub stationary: StationaryLaw,
    /// Factorization certificate, when the construction yields one.
    pub factorization: Option<NondegenFactorization>,
    /// Autonomous hidden-chain kernel (`|E| x |E|`) for the families whose
    /// hidden coordinate is Markov on its own.
    pub hidden_kernel: Option<Vec<f64>>,
    pub description: String,
}

fn binary_pair_labels() -> Vec<String> {
    vec!["00".into(), "01".into(), "10".into(), "11".into()]
}

/// Hidden pair state `(a, b)` as the index `2a + b`.
fn pair_state(a: usize, b: usize) -> usize {
    2 * a + b
}

/// Parity observation attached to the hidden pair `(a, b)`.
fn parity(a: usize, b: usize) -> usize {
    a ^ b
}

/// The binary-increment counterexample: the hidden state is a sliding pair
/// of fair coin flips and the observation is their parity, a deterministic
/// function of the hidden state. The filter started from a point mass stays
/// a point mass forever while the stationary filter stays a two-point
/// mixture, so the filter is not asymptotically stable and the lifted chain
/// has several invariant measures.
pub fn build_example_1_1() -> ModelSpec {
    let space = StateSpace::new(binary_pair_labels(), vec!["0".into(), "1".into()]).unwrap();
    let n = space.pair_count();
    let mut rows = vec![0.0; n * n];
    for a in 0..2 {
        for b in 0..2 {
            for y in 0..2 {
                let from = space.pair_index(pair_state(a, b), y);
                for c in 0..2 {
                    let to = space.pair_index(pair_state(b, c), parity(b, c));
                    rows[from * n + to] += 0.5;
                }
            }
        }
    }
    let kernel = JointKernel::validate(space, rows).unwrap();
    let mut pi = vec![0.0; n];
    for a in 0..2 {
        for b in 0..2 {
            pi[kernel
                .space()
                .pair_index(pair_state(a, b), parity(a, b))] = 0.25;
        }
    }
    let stationary = StationaryLaw::validate(&kernel, pi).unwrap();
    ModelSpec {
        name: "example-1.1".into(),
        family: Family::Counterexample,
        kernel,
        stationary,
        factorization: None,
        hidden_kernel: Some(sliding_pair_kernel()),
        description: "sliding pair of fair coins observed through their parity \
                      (degenerate observations; filter not asymptotically stable)"
            .into(),
    }
}

/// Hidden-chain kernel of the sliding-pair dynamics: `(a, b) -> (b, c)` with
/// `c` a fresh fair coin.
fn sliding_pair_kernel() -> Vec<f64> {
    let mut p0 = vec![0.0; 16];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                p0[pair_state(a, b) * 4 + pair_state(b, c)] += 0.5;
            }
        }
    }
    p0
}

/// The counterexample with the parity observation passed through a binary
/// symmetric channel with flip probability `epsilon`. The channel makes the
/// observation density strictly positive, so the construction carries a
/// factorization certificate and the filter is stable.
pub fn build_example_1_1_noisy(epsilon: f64) -> Result<ModelSpec> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::EpsilonOutOfRange { value: epsilon });
    }
    let space = StateSpace::new(binary_pair_labels(), vec!["0".into(), "1".into()]).unwrap();
    let n = space.pair_count();
    let mut rows = vec![0.0; n * n];
    for a in 0..2 {
        for b in 0..2 {
            for y in 0..2 {
                let from = space.pair_index(pair_state(a, b), y);
                for c in 0..2 {
                    let clean = parity(b, c);
                    for w1 in 0..2 {
                        let channel = if w1 == clean { 1.0 - epsilon } else { epsilon };
                        let to = space.pair_index(pair_state(b, c), w1);
                        rows[from * n + to] += 0.5 * channel;
                    }
                }
            }
        }
    }
    let kernel = JointKernel::validate(space, rows).unwrap();

    // Invariant law: hidden pair uniform, observation through the channel.
    let mut pi = vec![0.0; n];
    for a in 0..2 {
        for b in 0..2 {
            let z = pair_state(a, b);
            let clean = parity(a, b);
            for w in 0..2 {
                let channel = if w == clean { 1.0 - epsilon } else { epsilon };
                pi[kernel.space().pair_index(z, w)] = 0.25 * channel;
            }
        }
    }
    let stationary = StationaryLaw::validate(&kernel, pi).unwrap();

    // Factorization: hidden pair kernel, fair-coin observation reference,
    // channel likelihood ratio as the density (entries 2(1-eps) and 2 eps).
    let p0 = sliding_pair_kernel();
    let q = vec![0.5, 0.5, 0.5, 0.5];
    let mut g = vec![1.0; n * n];
    for s in 0..n {
        let (z, w) = kernel.space().split_index(s);
        for t in 0..n {
            let (z1, w1) = kernel.space().split_index(t);
            let product = p0[z * 4 + z1] * q[w * 2 + w1];
            if product > 0.0 {
                g[s * n + t] = kernel.entry(s, t) / product;
            }
        }
    }
    let factorization = NondegenFactorization { p0: p0.clone(), q, g };
    Ok(ModelSpec {
        name: format!("example-1.1-noisy-eps{epsilon}"),
        family: Family::Hmm,
        kernel,
        stationary,
        factorization: Some(factorization),
        hidden_kernel: Some(p0),
        description: format!(
            "sliding-pair counterexample with the parity observation flipped \
             with probability {epsilon} (strictly positive channel; stable filter)"
        ),
    })
}

/// The feedback counterexample, discretized to the sign of its Gaussian
/// observation: the observation sequence is i.i.d. fair signs, yet the sign
/// feeds back into the hidden update so the pair kernel is degenerate. The
/// hidden update depends on the observation only through its sign, so the
/// sign chain is lossless for every filtering quantity.
pub fn build_example_1_2_discrete() -> ModelSpec {
    let space = StateSpace::new(binary_pair_labels(), vec!["-".into(), "+".into()]).unwrap();
    let n = space.pair_count();
    let mut rows = vec![0.0; n * n];
    for x1 in 0..2 {
        for x2 in 0..2 {
            for y in 0..2 {
                let from = space.pair_index(pair_state(x1, x2), y);
                // Deterministic hidden update driven by the current sign.
                let next = pair_state(x2, x2 ^ y);
                for w1 in 0..2 {
                    let to = space.pair_index(next, w1);
                    rows[from * n + to] += 0.5;
                }
            }
        }
    }
    let kernel = JointKernel::validate(space, rows).unwrap();
    let pi = vec![1.0 / n as f64; n];
    let stationary = StationaryLaw::validate(&kernel, pi).unwrap();
    ModelSpec {
        name: "example-1.2-discrete".into(),
        family: Family::Counterexample,
        kernel,
        stationary,
        factorization: None,
        hidden_kernel: None,
        description: "feedback counterexample driven by i.i.d. signs: the \
                      observations look noisy but the pair kernel is degenerate"
            .into(),
    }
}

/// The chain `(X_n, sign_{n-1})` embedded in the feedback counterexample,
/// expressed on the label conventions of [`build_example_1_1`]. Its
/// transition law coincides entry-by-entry with the sliding-pair model.
pub fn example_1_2_embedded_kernel() -> JointKernel {
    let space = StateSpace::new(binary_pair_labels(), vec!["0".into(), "1".into()]).unwrap();
    let n = space.pair_count();
    let mut rows = vec![0.0; n * n];
    for x1 in 0..2 {
        for x2 in 0..2 {
            for z in 0..2 {
                let from = space.pair_index(pair_state(x1, x2), z);
                for c in 0..2 {
                    // Next sign c updates the hidden pair; the embedded
                    // observed coordinate is that same sign.
                    let to = space.pair_index(pair_state(x2, x2 ^ c), c);
                    rows[from * n + to] += 0.5;
                }
            }
        }
    }
    JointKernel::validate(space, rows).unwrap()
}

/// Generalized hidden Markov model: autonomous hidden kernel `p0`, i.i.d.
/// observation reference `phi`, and an observation density
/// `obs_density(z, w, z', w')` that integrates to one against `phi` in `w'`
/// for every `(z, w, z')`.
///
/// `obs_density` is flattened with shape `[|E|][|F|][|E|][|F|]`.
pub fn build_generalized_hmm(
    space: StateSpace,
    p0: &[f64],
    obs_density: &[f64],
    phi: &[f64],
) -> Result<ModelSpec> {
    let ne = space.hidden_count();
    let nf = space.observed_count();
    check_rows_stochastic(p0, ne, "P0")?;
    check_probability(phi, nf)?;
    let idx = |z: usize, w: usize, z1: usize, w1: usize| ((z * nf + w) * ne + z1) * nf + w1;
    for z in 0..ne {
        for w in 0..nf {
            for z1 in 0..ne {
                let sum: f64 = (0..nf).map(|w1| obs_density[idx(z, w, z1, w1)] * phi[w1]).sum();
                if (sum - 1.0).abs() > 1e-10 {
                    return Err(Error::ConstraintViolation { z, w, z1, sum });
                }
            }
        }
    }
    let n = space.pair_count();
    let mut rows = vec![0.0; n * n];
    for z in 0..ne {
        for w in 0..nf {
            let from = space.pair_index(z, w);
            for z1 in 0..ne {
                for w1 in 0..nf {
                    let to = space.pair_index(z1, w1);
                    rows[from * n + to] = p0[z * ne + z1] * obs_density[idx(z, w, z1, w1)] * phi[w1];
                }
            }
        }
    }
    let kernel = JointKernel::validate(space, rows).unwrap();
    let stationary = stationary_law(&kernel, &StationaryOptions::default())?;
    let mut q = vec![0.0; nf * nf];
    for w in 0..nf {
        q[w * nf..(w + 1) * nf].copy_from_slice(phi);
    }
    let mut g = vec![1.0; n * n];
    for s in 0..n {
        let (z, w) = kernel.space().split_index(s);
        for t in 0..n {
            let (z1, w1) = kernel.space().split_index(t);
            g[s * n + t] = obs_density[idx(z, w, z1, w1)];
        }
    }
    Ok(ModelSpec {
        name: "generalized-hmm".into(),
        family: Family::GeneralizedHmm,
        kernel,
        stationary,
        factorization: Some(NondegenFactorization {
            p0: p0.to_vec(),
            q,
            g,
        }),
        hidden_kernel: Some(p0.to_vec()),
        description: "autonomous hidden chain with observation dynamics of its own".into(),
    })
}

/// Hidden Markov model with correlated noise: the next hidden state draws
/// from `gx(z, w, .)` (feedback from the observation) and the next
/// observation from the reweighted reference `gy(z', .) phi`.
///
/// `gx` is flattened `[|E|][|F|][|E|]` with strictly positive stochastic
/// rows; `gy` is `[|E|][|F|]`, strictly positive, with
/// `sum_w gy(z, w) phi(w) = 1` per hidden state.
pub fn build_correlated_noise_hmm(
    space: StateSpace,
    gx: &[f64],
    gy: &[f64],
    phi: &[f64],
) -> Result<ModelSpec> {
    let ne = space.hidden_count();
    let nf = space.observed_count();
    check_probability(phi, nf)?;
    for z in 0..ne {
        for w in 0..nf {
            let row = &gx[(z * nf + w) * ne..(z * nf + w + 1) * ne];
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&v| v <= 0.0) {
                return Err(Error::NonStochasticRow {
                    row: z * nf + w,
                    sum,
                });
            }
        }
    }
    for z in 0..ne {
        let sum: f64 = (0..nf).map(|w| gy[z * nf + w] * phi[w]).sum();
        if (sum - 1.0).abs() > 1e-10 || (0..nf).any(|w| gy[z * nf + w] <= 0.0) {
            return Err(Error::NormalizationViolation { z, sum });
        }
    }
    let n = space.pair_count();
    let mut rows = vec![0.0; n * n];
    for z in 0..ne {
        for w in 0..nf {
            let from = space.pair_index(z, w);
            for z1 in 0..ne {
                for w1 in 0..nf {
                    let to = space.pair_index(z1, w1);
                    rows[from * n + to] =
                        gx[(z * nf + w) * ne + z1] * gy[z1 * nf + w1] * phi[w1];
                }
            }
        }
    }
    let kernel = JointKernel::validate(space, rows).unwrap();
    let stationary = stationary_law(&kernel, &StationaryOptions::default())?;

    // Marginal hidden kernel of the stationary chain: average the feedback
    // coordinate under its stationary conditional.
    let mut tilde_p0 = vec![0.0; ne * ne];
    for z in 0..ne {
        for z1 in 0..ne {
            let mut acc = 0.0;
            for w in 0..nf {
                acc += gx[(z * nf + w) * ne + z1] * gy[z * nf + w] * phi[w];
            }
            tilde_p0[z * ne + z1] = acc;
        }
    }

    // Canonical factorization with a uniform hidden reference: gx is
    // strictly positive, so any full-support reference works and the density
    // absorbs it.
    let p0 = vec![1.0 / ne as f64; ne * ne];
    let mut q = vec![0.0; nf * nf];
    for w in 0..nf {
        q[w * nf..(w + 1) * nf].copy_from_slice(phi);
    }
    let mut g = vec![1.0; n * n];
    for s in 0..n {
        for t in 0..n {
            let product = {
                let (z, w) = kernel.space().split_index(s);
                let (z1, w1) = kernel.space().split_index(t);
                p0[z * ne + z1] * q[w * nf + w1]
            };
            if product > 0.0 {
                g[s * n + t] = kernel.entry(s, t) / product;
            }
        }
    }
    Ok(ModelSpec {
        name: "correlated-noise-hmm".into(),
        family: Family::CorrelatedNoiseHmm,
        kernel,
        stationary,
        factorization: Some(NondegenFactorization { p0, q, g }),
        hidden_kernel: Some(tilde_p0),
        description: "observation feedback into the hidden dynamics with a \
                      strictly positive observation weight"
            .into(),
    })
}

/// Seeded random pair-chain model.
///
/// With `nondegenerate = true` the kernel is assembled as
/// `g * (P0 (x) Q)` with full-support reference rows and density entries
/// log-uniform in `[1/e, e]`, then row-normalized (the rescaling folds into
/// the density, so the factorization certificate survives). Otherwise the
/// rows are unconstrained Dirichlet-style draws.
pub fn random_model(hidden: usize, observed: usize, nondegenerate: bool, seed: u64) -> ModelSpec {
    let hidden_labels: Vec<String> = (0..hidden).map(|i| format!("h{i}")).collect();
    let observed_labels: Vec<String> = (0..observed).map(|i| format!("o{i}")).collect();
    let space = StateSpace::new(hidden_labels, observed_labels).unwrap();
    let mut rng = Rng::new(seed);
    let n = space.pair_count();
    if nondegenerate {
        let p0 = random_stochastic_rows(&mut rng, hidden, hidden);
        let q = random_stochastic_rows(&mut rng, observed, observed);
        let mut g = vec![0.0; n * n];
        for v in &mut g {
            // log-uniform in [1/e, e]
            *v = (2.0 * rng.next_f64() - 1.0).exp();
        }
        let mut rows = vec![0.0; n * n];
        for s in 0..n {
            let (z, w) = space.split_index(s);
            let mut sum = 0.0;
            for t in 0..n {
                let (z1, w1) = space.split_index(t);
                let v = g[s * n + t] * p0[z * hidden + z1] * q[w * observed + w1];
                rows[s * n + t] = v;
                sum += v;
            }
            for t in 0..n {
                rows[s * n + t] /= sum;
                g[s * n + t] /= sum;
            }
        }
        let kernel = JointKernel::validate(space, rows).unwrap();
        let stationary = stationary_law(&kernel, &StationaryOptions::default()).unwrap();
        ModelSpec {
            name: format!("random-nondegenerate-{hidden}x{observed}-seed{seed}"),
            family: Family::General,
            kernel,
            stationary,
            factorization: Some(NondegenFactorization { p0, q, g }),
            hidden_kernel: None,
            description: "seeded random pair chain assembled from full-support \
                          reference kernels and a bounded positive density"
                .into(),
        }
    } else {
        let rows = random_stochastic_rows(&mut rng, n, n);
        let kernel = JointKernel::validate(space, rows).unwrap();
        let stationary = stationary_law(&kernel, &StationaryOptions::default()).unwrap();
        ModelSpec {
            name: format!("random-general-{hidden}x{observed}-seed{seed}"),
            family: Family::General,
            kernel,
            stationary,
            factorization: None,
            hidden_kernel: None,
            description: "seeded random pair chain with unconstrained rows".into(),
        }
    }
}

fn random_stochastic_rows(rng: &mut Rng, rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        let mut sum = 0.0;
        for c in 0..cols {
            // Dirichlet(1, .., 1) via normalized exponentials.
            let v = -rng.next_f64().max(f64::MIN_POSITIVE).ln();
            out[r * cols + c] = v;
            sum += v;
        }
        for c in 0..cols {
            out[r * cols + c] /= sum;
        }
    }
    out
}

/// Seeded random instance of the generalized hidden Markov family.
pub fn random_generalized_hmm(hidden: usize, observed: usize, seed: u64) -> ModelSpec {
    let hidden_labels: Vec<String> = (0..hidden).map(|i| format!("h{i}")).collect();
    let observed_labels: Vec<String> = (0..observed).map(|i| format!("o{i}")).collect();
    let space = StateSpace::new(hidden_labels, observed_labels).unwrap();
    let mut rng = Rng::new(seed);
    let p0 = random_stochastic_rows(&mut rng, hidden, hidden);
    let phi = {
        let mut v = random_stochastic_rows(&mut rng, 1, observed);
        // keep the reference bounded away from zero
        for p in &mut v {
            *p = 0.5 * *p + 0.5 / observed as f64;
        }
        v
    };
    // Positive raw weights, then normalize against phi in the last slot.
    let mut obs = vec![0.0; hidden * observed * hidden * observed];
    let idx = |z: usize, w: usize, z1: usize, w1: usize| ((z * observed + w) * hidden + z1) * observed + w1;
    for z in 0..hidden {
        for w in 0..observed {
            for z1 in 0..hidden {
                let mut total = 0.0;
                for w1 in 0..observed {
                    let v = (2.0 * rng.next_f64() - 1.0).exp();
                    obs[idx(z, w, z1, w1)] = v;
                    total += v * phi[w1];
                }
                for w1 in 0..observed {
                    obs[idx(z, w, z1, w1)] /= total;
                }
            }
        }
    }
    let mut spec = build_generalized_hmm(space, &p0, &obs, &phi).unwrap();
    spec.name = format!("generalized-hmm-{hidden}x{observed}-seed{seed}");
    spec
}

/// Seeded random instance of the correlated-noise family.
pub fn random_correlated_noise_hmm(hidden: usize, observed: usize, seed: u64) -> ModelSpec {
    let hidden_labels: Vec<String> = (0..hidden).map(|i| format!("h{i}")).collect();
    let observed_labels: Vec<String> = (0..observed).map(|i| format!("o{i}")).collect();
    let space = StateSpace::new(hidden_labels, observed_labels).unwrap();
    let mut rng = Rng::new(seed);
    let mut gx = random_stochastic_rows(&mut rng, hidden * observed, hidden);
    for v in &mut gx {
        *v = 0.8 * *v + 0.2 / hidden as f64;
    }
    // Renormalize after the floor.
    for r in 0..hidden * observed {
        let sum: f64 = gx[r * hidden..(r + 1) * hidden].iter().sum();
        for c in 0..hidden {
            gx[r * hidden + c] /= sum;
        }
    }
    let phi = {
        let mut v = random_stochastic_rows(&mut rng, 1, observed);
        for p in &mut v {
            *p = 0.5 * *p + 0.5 / observed as f64;
        }
        v
    };
    let mut gy = vec![0.0; hidden * observed];
    for z in 0..hidden {
        let mut total = 0.0;
        for w in 0..observed {
            let v = (2.0 * rng.next_f64() - 1.0).exp();
            gy[z * observed + w] = v;
            total += v * phi[w];
        }
        for w in 0..observed {
            gy[z * observed + w] /= total;
        }
    }
    let mut spec = build_correlated_noise_hmm(space, &gx, &gy, &phi).unwrap();
    spec.name = format!("correlated-noise-hmm-{hidden}x{observed}-seed{seed}");
    spec
}

/// Resolve a zoo model by name.
///
/// Names: `example-1.1`, `example-1.1-noisy[:<eps>]`, `example-1.2-discrete`,
/// `random-nondegenerate:<E>x<F>:<seed>`, `random-general:<E>x<F>:<seed>`,
/// `generalized-hmm:<E>x<F>:<seed>`, `correlated-noise-hmm:<E>x<F>:<seed>`.
pub fn by_name(name: &str) -> Result<ModelSpec> {
    let unknown = || Error::ModelFile(format!("no zoo model named {name:?}"));
    if name == "example-1.1" {
        return Ok(build_example_1_1());
    }
    if name == "example-1.2-discrete" {
        return Ok(build_example_1_2_discrete());
    }
    if let Some(rest) = name.strip_prefix("example-1.1-noisy") {
        let eps = if rest.is_empty() {
            0.1
        } else {
            rest.strip_prefix(':')
                .ok_or_else(unknown)?
                .parse()
                .map_err(|_| unknown())?
        };
        return build_example_1_1_noisy(eps);
    }
    for (prefix, f) in [
        (
            "random-nondegenerate:",
            (|ne, nf, s| random_model(ne, nf, true, s)) as fn(usize, usize, u64) -> ModelSpec,
        ),
        ("random-general:", |ne, nf, s| random_model(ne, nf, false, s)),
        ("generalized-hmm:", random_generalized_hmm),
        ("correlated-noise-hmm:", random_correlated_noise_hmm),
    ] {
        if let Some(rest) = name.strip_prefix(prefix) {
            let mut parts = rest.split(':');
            let dims = parts.next().ok_or_else(unknown)?;
            let seed: u64 = parts
                .next()
                .ok_or_else(unknown)?
                .parse()
                .map_err(|_| unknown())?;
            let (ne, nf) = dims.split_once('x').ok_or_else(unknown)?;
            let ne: usize = ne.parse().map_err(|_| unknown())?;
            let nf: usize = nf.parse().map_err(|_| unknown())?;
            return Ok(f(ne, nf, seed));
        }
    }
    Err(unknown())
}

fn check_rows_stochastic(m: &[f64], dim: usize, _what: &str) -> Result<()> {
    for r in 0..dim {
        let row = &m[r * dim..(r + 1) * dim];
        for (c, &v) in row.iter().enumerate() {
            if v < 0.0 {
                return Err(Error::NegativeEntry {
                    row: r,
                    col: c,
                    value: v,
                });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NonStochasticRow { row: r, sum });
        }
    }
    Ok(())
}

fn check_probability(v: &[f64], len: usize) -> Result<()> {
    debug_assert_eq!(v.len(), len);
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NonNormalized { sum });
    }
    Ok(())
}
