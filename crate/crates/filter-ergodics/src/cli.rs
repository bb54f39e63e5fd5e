//! Command-line front end: model checking, seeded experiments, CSV/SVG/JSON
//! emission, and run manifests.
//!
//! Exit codes: 0 success, 2 validation failure, 3 assumption-check
//! refutation under `--strict`, 4 runtime error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::filter::{smoother_merging, stability_experiment, StabilityOptions};
use crate::io::{
    self, fmt_f64, line_chart_svg, measure_to_json, model_from_json, model_to_json, RunManifest,
};
use crate::lift::{
    barycenter, class_m_check, compare_lift_measures, estimate_invariant, EstimateOptions,
    FilterInit, LiftKind, TestFunctionBattery,
};
use crate::model::{
    detect_nondegeneracy, mixing_profile, nstep_factorization_check, product_structure_check,
    reverse_kernel, stationary_law, tv, validate_factorization, JointKernel,
    NondegeneracyVerdict, StationaryLaw, StationaryOptions,
};
use crate::rng::{derive_seed, Rng};
use crate::zoo;

/// Seed override honored by every subcommand.
pub const SEED_ENV: &str = "FILTER_ERGODICS_SEED";

/// Mixing coefficients below this at the report horizon count as satisfied
/// for the checklist.
const MIXING_PASS_LEVEL: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(
    name = "filter-ergodics",
    version,
    about = "Exact nonlinear filtering and lifted-kernel experiments for finite bivariate Markov chains"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a model and run the structural assumption checklist.
    Check(CheckArgs),
    /// Trace filter stability along sampled observation records.
    Stability(StabilityArgs),
    /// Conditional merging of smoothed hidden-state laws over windows.
    Merging(MergingArgs),
    /// Empirical lift-invariant measures and uniqueness evidence.
    Invariant(InvariantArgs),
    /// Built-in model families and demos.
    Zoo(ZooArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArg {
    /// Model file path, or a zoo name (see `zoo list`).
    #[arg(long)]
    model: String,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Exit with status 3 when an assumption check is refuted.
    #[arg(long)]
    strict: bool,
    /// Horizon of the mixing-coefficient report.
    #[arg(long, default_value_t = 20)]
    mixing_horizon: usize,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Initial law: "stationary", "uniform", or "point:<hidden>:<observed>".
    #[arg(long, default_value = "uniform")]
    mu: String,
    #[arg(long, default_value_t = 100)]
    horizon: usize,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Run even when the model fails the nondegenerate+ergodic gate.
    #[arg(long)]
    force: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Skip the SVG chart.
    #[arg(long)]
    no_svg: bool,
}

#[derive(Args, Debug)]
struct MergingArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Number of sampled observation windows.
    #[arg(long, default_value_t = 20)]
    paths: usize,
    /// Window length (number of steps per window).
    #[arg(long, default_value_t = 100)]
    window: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Fixed first initial hidden state (label). Default: the sampled one.
    #[arg(long)]
    z: Option<String>,
    /// Fixed second initial hidden state (label). Default: seeded draw.
    #[arg(long)]
    z_prime: Option<String>,
    /// JSON array of observed labels to use instead of sampling
    /// (requires --z and --z-prime).
    #[arg(long)]
    observations: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct InvariantArgs {
    #[command(flatten)]
    model: ModelArg,
    /// First filter initialization: "stationary", "uniform" or
    /// "point:<hidden>".
    #[arg(long, default_value = "stationary")]
    init_a: String,
    /// Second filter initialization.
    #[arg(long, default_value = "uniform")]
    init_b: String,
    /// Lift to sample: "pair" or "triple".
    #[arg(long, default_value = "pair")]
    lift: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run even when the model fails the nondegenerate+ergodic gate.
    #[arg(long)]
    force: bool,
    /// Skip writing the (large) measure JSON files.
    #[arg(long)]
    no_measures: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ZooArgs {
    #[command(subcommand)]
    command: ZooCommand,
}

#[derive(Subcommand, Debug)]
enum ZooCommand {
    /// List the built-in model names.
    List,
    /// Write a zoo model to a model file.
    Emit {
        /// Zoo model name (see `zoo list`).
        name: String,
        /// Emit the factorized schema (requires a construction that carries
        /// a factorization certificate).
        #[arg(long)]
        factorized: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scalar linear-Gaussian demo with a frozen branch coordinate: traces
    /// the variance recursion of the unstable branch to its fixed point and
    /// the empirical posterior laws of both branch filters.
    Kalman {
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parse argv, run, and map errors onto the documented exit codes.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own message; --help/--version are successes.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::EmptySpace
        | Error::DuplicateLabel { .. }
        | Error::SpaceTooLarge { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonStochasticRow { .. }
        | Error::NegativeEntry { .. }
        | Error::NonNormalized { .. }
        | Error::NotStationary { .. }
        | Error::EpsilonOutOfRange { .. }
        | Error::UnknownLabel { .. }
        | Error::ModelFile(_)
        | Error::Config(_)
        | Error::Json(_) => 2,
        _ => 4,
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Stability(args) => cmd_stability(args),
        Command::Merging(args) => cmd_merging(args),
        Command::Invariant(args) => cmd_invariant(args),
        Command::Zoo(args) => cmd_zoo(args),
    }
}

fn require_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::Config(format!("--{name} must be positive")));
    }
    Ok(())
}

fn effective_seed(flag: u64) -> u64 {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.parse().unwrap_or(flag),
        Err(_) => flag,
    }
}

/// A resolved model: where it came from, its kernel and invariant law.
struct ResolvedModel {
    kernel: JointKernel,
    law: StationaryLaw,
    factorization_supplied: Option<crate::model::NondegenFactorization>,
    /// Autonomous hidden-chain kernel when the construction provides one.
    hidden_kernel: Option<Vec<f64>>,
    source_bytes: Vec<u8>,
    name: String,
}

fn resolve_model(arg: &str) -> Result<ResolvedModel> {
    if Path::new(arg).exists() {
        let text = std::fs::read_to_string(arg)?;
        let loaded = model_from_json(&text)?;
        let law = match loaded.supplied_pi {
            Some(pi) => StationaryLaw::validate(&loaded.kernel, pi)?,
            None => stationary_law(&loaded.kernel, &StationaryOptions::default())?,
        };
        return Ok(ResolvedModel {
            kernel: loaded.kernel,
            law,
            factorization_supplied: loaded.supplied_factorization,
            hidden_kernel: None,
            source_bytes: text.into_bytes(),
            name: arg.to_string(),
        });
    }
    let spec = zoo_by_name(arg)?;
    let source = model_to_json(&spec.kernel, Some(&spec.stationary));
    Ok(ResolvedModel {
        kernel: spec.kernel,
        law: spec.stationary,
        factorization_supplied: spec.factorization,
        hidden_kernel: spec.hidden_kernel,
        source_bytes: source.into_bytes(),
        name: spec.name,
    })
}

fn zoo_by_name(name: &str) -> Result<zoo::ModelSpec> {
    zoo::by_name(name).map_err(|_| {
        Error::ModelFile(format!(
            "no model file and no zoo model named {name:?} (see `zoo list`)"
        ))
    })
}

fn parse_pair_law(kernel: &JointKernel, law: &StationaryLaw, spec: &str) -> Result<Vec<f64>> {
    let space = kernel.space();
    let n = space.pair_count();
    match spec {
        "stationary" => Ok(law.pi().to_vec()),
        "uniform" => Ok(vec![1.0 / n as f64; n]),
        other => {
            let rest = other
                .strip_prefix("point:")
                .ok_or_else(|| Error::ModelFile(format!("bad initial law {other:?}")))?;
            let (hidden, observed) = rest
                .split_once(':')
                .ok_or_else(|| Error::ModelFile("point law needs <hidden>:<observed>".into()))?;
            let z = space.hidden_index(hidden)?;
            let w = space.observed_index(observed)?;
            let mut mu = vec![0.0; n];
            mu[space.pair_index(z, w)] = 1.0;
            Ok(mu)
        }
    }
}

fn parse_filter_init(kernel: &JointKernel, spec: &str) -> Result<FilterInit> {
    match spec {
        "stationary" => Ok(FilterInit::Stationary),
        "uniform" => Ok(FilterInit::Uniform),
        other => {
            let label = other
                .strip_prefix("point:")
                .ok_or_else(|| Error::ModelFile(format!("bad filter init {other:?}")))?;
            Ok(FilterInit::Point(kernel.space().hidden_index(label)?))
        }
    }
}

/// Buffered output directory: files are accumulated, checksummed into the
/// manifest, and written together.
struct OutputDir {
    dir: PathBuf,
    manifest: RunManifest,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputDir {
    fn new(dir: &Path, command: &str, config: serde_json::Value) -> Self {
        OutputDir {
            dir: dir.to_path_buf(),
            manifest: RunManifest::new(command, config),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.manifest.record_output(name, &bytes);
        self.files.push((name.to_string(), bytes));
    }

    fn finish(mut self) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        for (name, bytes) in self.files.drain(..) {
            std::fs::write(self.dir.join(&name), bytes)?;
        }
        self.manifest.write_to(&self.dir)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// check

fn cmd_check(args: CheckArgs) -> Result<i32> {
    let model = resolve_model(&args.model.model)?;
    let kernel = &model.kernel;
    let law = &model.law;
    let space = kernel.space();
    let mut refuted = false;
    println!("model: {}", model.name);
    println!(
        "space: |E| = {}, |F| = {} ({} pair states)",
        space.hidden_count(),
        space.observed_count(),
        space.pair_count()
    );
    println!("kernel: row-stochastic, validated");
    let residual = tv(&kernel.apply_left(law.pi()), law.pi());
    println!(
        "invariant law: residual {:.3e}, eigenspace dim {}{}",
        residual,
        law.eigenspace_dim(),
        if law.is_unique() { "" } else { " (NOT unique)" }
    );

    if let Some(fact) = &model.factorization_supplied {
        let report = validate_factorization(kernel, fact);
        println!(
            "supplied factorization: {} (max reconstruction error {:.3e}, min density on support {:.3e})",
            if report.valid { "valid" } else { "INVALID" },
            report.max_reconstruction_error,
            report.min_g_on_support
        );
    }

    let verdict = detect_nondegeneracy(kernel);
    match &verdict {
        NondegeneracyVerdict::Factorized(fact) => {
            let report = validate_factorization(kernel, fact);
            println!(
                "nondegeneracy: satisfied (canonical factorization, reconstruction error {:.3e})",
                report.max_reconstruction_error
            );
        }
        NondegeneracyVerdict::Refuted(witness) => {
            refuted = true;
            println!("nondegeneracy: REFUTED — {}", witness.describe(space));
        }
    }

    let product = product_structure_check(space, law.pi());
    if product.holds {
        println!("product structure of the invariant law: satisfied");
    } else {
        refuted = true;
        let (z, w) = product.witness.unwrap();
        println!(
            "product structure of the invariant law: REFUTED — ({}, {}) is in the marginal product support but not charged",
            space.hidden_labels()[z],
            space.observed_labels()[w]
        );
    }

    if verdict.is_factorized() {
        for n in 1..=3 {
            let report = nstep_factorization_check(kernel, law, n);
            if report.holds {
                println!("{n}-step support factorization: satisfied");
            } else {
                refuted = true;
                println!(
                    "{n}-step support factorization: REFUTED at {} pair state(s)",
                    report.failures.len()
                );
            }
        }
    } else {
        println!("n-step support factorization: skipped (kernel not nondegenerate)");
    }

    let horizon = args.mixing_horizon.max(1);
    let profile = mixing_profile(kernel, law, horizon)?;
    let last = horizon - 1;
    let verdict_of = |v: f64| {
        if v < MIXING_PASS_LEVEL {
            "satisfied at horizon"
        } else {
            "NOT satisfied at horizon"
        }
    };
    println!(
        "marginal ergodicity (fwd):  alpha[1] = {:.6}, alpha[{horizon}] = {:.3e} — {}",
        profile.alpha_fwd[0],
        profile.alpha_fwd[last],
        verdict_of(profile.alpha_fwd[last])
    );
    println!(
        "marginal ergodicity (rev):  alpha[1] = {:.6}, alpha[{horizon}] = {:.3e} — {}",
        profile.alpha_rev[0],
        profile.alpha_rev[last],
        verdict_of(profile.alpha_rev[last])
    );
    println!(
        "absolute regularity (beta): beta[1]  = {:.6}, beta[{horizon}]  = {:.3e} — {}",
        profile.beta[0],
        profile.beta[last],
        verdict_of(profile.beta[last])
    );
    if profile.alpha_fwd[last] >= MIXING_PASS_LEVEL {
        refuted = true;
    }

    // Structured families carry an autonomous hidden kernel; its own
    // absolute-regularity sequence is the premise their stability theory
    // actually needs, so report it when available.
    if let Some(hidden) = &model.hidden_kernel {
        let pi0 = law.hidden_marginal(space);
        let seq = crate::model::marginal_kernel_mixing(hidden, &pi0, horizon);
        println!(
            "hidden-chain absolute regularity: value[1] = {:.6}, value[{horizon}] = {:.3e} — {}",
            seq[0],
            seq[last],
            verdict_of(seq[last])
        );
    }

    let reversed = reverse_kernel(kernel, law)?;
    match detect_nondegeneracy(&reversed) {
        NondegeneracyVerdict::Factorized(_) => {
            println!("reversed nondegeneracy: satisfied");
        }
        NondegeneracyVerdict::Refuted(witness) => {
            refuted = true;
            println!(
                "reversed nondegeneracy: REFUTED — {}",
                witness.describe(space)
            );
        }
    }
    println!(
        "checklist horizon note: mixing verdicts use horizon {horizon} and pass level {MIXING_PASS_LEVEL:.0e}"
    );

    if refuted {
        println!("verdict: at least one assumption check refuted");
        if args.strict {
            return Ok(3);
        }
    } else {
        println!("verdict: all assumption checks satisfied at the computed horizons");
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// stability

fn cmd_stability(args: StabilityArgs) -> Result<i32> {
    require_positive("horizon", args.horizon)?;
    require_positive("replicates", args.replicates)?;
    let model = resolve_model(&args.model.model)?;
    let seed = effective_seed(args.seed);
    let mu = parse_pair_law(&model.kernel, &model.law, &args.mu)?;
    let options = StabilityOptions {
        horizon: args.horizon,
        replicates: args.replicates,
        seed,
        threads: args.threads,
        allow_unverified: args.force,
    };
    let trace = stability_experiment(&model.kernel, &model.law, &mu, &options)?;

    let config = serde_json::json!({
        "model": model.name,
        "mu": args.mu,
        "horizon": args.horizon,
        "replicates": args.replicates,
        "seed": seed,
        "threads": args.threads,
        "force": args.force,
    });
    let mut out = OutputDir::new(&args.out, "stability", config);
    out.manifest.set_model_bytes(&model.source_bytes);

    let mut trace_csv = String::from("replicate,n,tv\n");
    for (r, t) in trace.traces.iter().enumerate() {
        for (n, d) in t.iter().enumerate() {
            trace_csv.push_str(&format!("{r},{n},{}\n", fmt_f64(*d)));
        }
    }
    out.add("trace.csv", trace_csv.into_bytes());

    let mut summary_csv = String::from("n,mean_tv,max_tv\n");
    let mut means = Vec::with_capacity(args.horizon + 1);
    for n in 0..=args.horizon {
        let mean = trace.mean_at(n);
        means.push(mean);
        summary_csv.push_str(&format!(
            "{n},{},{}\n",
            fmt_f64(mean),
            fmt_f64(trace.max_at(n))
        ));
    }
    out.add("summary.csv", summary_csv.into_bytes());

    if !args.no_svg {
        let svg = line_chart_svg(
            "mean filter distance from the stationary filter",
            "n (steps)",
            "mean tv",
            &means,
        );
        out.add("mean_tv.svg", svg.into_bytes());
    }
    out.finish()?;
    println!(
        "stability: {} replicates, horizon {}: mean d_N = {:.6}, max d_N = {:.6}",
        args.replicates,
        args.horizon,
        trace.mean_at(args.horizon),
        trace.max_at(args.horizon)
    );
    // Domain-of-attraction premise for this initial law: decay of
    // ||mu P^n - pi|| is the checkable condition under which the stability
    // guarantee covers mu.
    let premise = crate::model::law_convergence(
        model.kernel.rows_flat(),
        &mu,
        model.law.pi(),
        args.horizon.clamp(1, 200),
    );
    println!(
        "initial-law convergence premise: ||mu P^n - pi|| = {:.6} at n = 1, {:.3e} at n = {}",
        premise[0],
        premise[premise.len() - 1],
        premise.len()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// merging

fn cmd_merging(args: MergingArgs) -> Result<i32> {
    require_positive("paths", args.paths)?;
    require_positive("window", args.window)?;
    let model = resolve_model(&args.model.model)?;
    let kernel = &model.kernel;
    let space = kernel.space();
    let seed = effective_seed(args.seed);

    let fixed_z = args.z.as_deref().map(|l| space.hidden_index(l)).transpose()?;
    let fixed_z_prime = args
        .z_prime
        .as_deref()
        .map(|l| space.hidden_index(l))
        .transpose()?;

    struct PathResult {
        rows: Vec<(usize, usize, f64)>,
        skipped: bool,
        max_increase: f64,
    }

    let jobs: Vec<PathResult> = if let Some(obs_path) = &args.observations {
        let text = std::fs::read_to_string(obs_path)?;
        let ys = io::observations_from_json(space, &text)?;
        let z = fixed_z.ok_or_else(|| {
            Error::ModelFile("--observations requires --z and --z-prime".into())
        })?;
        let zp = fixed_z_prime.ok_or_else(|| {
            Error::ModelFile("--observations requires --z and --z-prime".into())
        })?;
        let curve = smoother_merging(kernel, &ys, z, zp)?;
        vec![PathResult {
            rows: curve.d.iter().enumerate().map(|(n, d)| (0, n, *d)).collect(),
            skipped: false,
            max_increase: curve.max_increase,
        }]
    } else {
        let run_one = |p: usize| -> Result<PathResult> {
            let path_seed = derive_seed(seed, p as u64);
            let sample =
                crate::filter::simulate_path(kernel, model.law.pi(), args.window, path_seed);
            let z = fixed_z.unwrap_or(sample.xs[0]);
            // Seeded draw of the second start; walk the remaining states in a
            // seeded rotation until one is compatible with the window.
            let mut rng = Rng::new(derive_seed(path_seed, 1));
            let ne = space.hidden_count();
            let offset = (rng.next_u64() % ne as u64) as usize;
            let mut chosen = None;
            for k in 0..ne {
                let candidate = match fixed_z_prime {
                    Some(zp) => zp,
                    None => (offset + k) % ne,
                };
                if candidate == z && fixed_z_prime.is_none() {
                    continue;
                }
                match smoother_merging(kernel, &sample.ys, z, candidate) {
                    Ok(curve) => {
                        chosen = Some(curve);
                        break;
                    }
                    Err(Error::ZeroLikelihood { .. }) if fixed_z_prime.is_none() => continue,
                    Err(e) => return Err(e),
                }
            }
            match chosen {
                Some(curve) => Ok(PathResult {
                    rows: curve.d.iter().enumerate().map(|(n, d)| (p, n, *d)).collect(),
                    skipped: false,
                    max_increase: curve.max_increase,
                }),
                None => Ok(PathResult {
                    rows: Vec::new(),
                    skipped: true,
                    max_increase: 0.0,
                }),
            }
        };
        crate::filter::run_replicates(args.threads, args.paths, run_one)?
    };

    let config = serde_json::json!({
        "model": model.name,
        "paths": args.paths,
        "window": args.window,
        "seed": seed,
        "threads": args.threads,
        "z": args.z,
        "z_prime": args.z_prime,
        "window_note": "conditioning uses this finite window only",
    });
    let mut out = OutputDir::new(&args.out, "merging", config);
    out.manifest.set_model_bytes(&model.source_bytes);
    let mut csv = String::from("path_id,n,D\n");
    let mut skipped = 0;
    let mut max_increase = 0.0_f64;
    for job in &jobs {
        if job.skipped {
            skipped += 1;
        }
        max_increase = max_increase.max(job.max_increase);
        for (p, n, d) in &job.rows {
            csv.push_str(&format!("{p},{n},{}\n", fmt_f64(*d)));
        }
    }
    out.add("merging.csv", csv.into_bytes());
    out.finish()?;
    println!(
        "merging: {} window(s) of length {} (conditioning on the finite window only){}",
        jobs.len(),
        args.window,
        if skipped > 0 {
            format!(", {skipped} skipped for zero likelihood")
        } else {
            String::new()
        }
    );
    println!(
        "informational: largest within-window increase of D = {max_increase:.3e} \
         (non-increase is an empirical observation, not an asserted property)"
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// invariant

fn cmd_invariant(args: InvariantArgs) -> Result<i32> {
    require_positive("samples", args.samples)?;
    let model = resolve_model(&args.model.model)?;
    let kernel = &model.kernel;
    let space = kernel.space();
    let seed = effective_seed(args.seed);
    let lift = match args.lift.as_str() {
        "pair" => LiftKind::Pair,
        "triple" => LiftKind::Triple,
        other => return Err(Error::ModelFile(format!("bad lift kind {other:?}"))),
    };
    let init_a = parse_filter_init(kernel, &args.init_a)?;
    let init_b = parse_filter_init(kernel, &args.init_b)?;
    let options = EstimateOptions {
        samples: args.samples,
        burn_in: args.burn_in,
        seed,
        lift,
        allow_unverified: args.force,
    };
    // Both estimates share the master seed, hence the same stationary record:
    // the comparison then measures what the initialization alone changes.
    let measure_a = estimate_invariant(kernel, &model.law, &init_a, &options)?;
    let measure_b = estimate_invariant(kernel, &model.law, &init_b, &options)?;

    let battery = TestFunctionBattery::moments(space);
    let comparison = compare_lift_measures(space, &measure_a, &measure_b, &battery);

    let config = serde_json::json!({
        "model": model.name,
        "init_a": args.init_a,
        "init_b": args.init_b,
        "lift": args.lift,
        "samples": args.samples,
        "burn_in": args.burn_in,
        "seed": seed,
        "force": args.force,
        "caveat": comparison.caveat,
    });
    let mut out = OutputDir::new(&args.out, "invariant", config);
    out.manifest.set_model_bytes(&model.source_bytes);

    let mut battery_csv = String::from("function_id,mean_a,mean_b,se,z_score\n");
    for row in &comparison.rows {
        battery_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.function_id,
            fmt_f64(row.mean_a),
            fmt_f64(row.mean_b),
            fmt_f64(row.se),
            fmt_f64(row.z_score)
        ));
    }
    out.add("battery.csv", battery_csv.into_bytes());

    if !args.no_measures {
        out.add(
            "measure_a.json",
            measure_to_json(space, &measure_a).into_bytes(),
        );
        out.add(
            "measure_b.json",
            measure_to_json(space, &measure_b).into_bytes(),
        );
    }

    // Barycenter of the stationary-init estimate against the invariant law.
    let bary_tv = match (&measure_a.atoms, &measure_b.atoms) {
        (crate::lift::LiftAtoms::Pair(atoms), _) => {
            Some(tv(&barycenter(space, atoms), model.law.pi()))
        }
        (crate::lift::LiftAtoms::Triple(atoms), _) => {
            let pairs = crate::lift::pair_marginal(atoms);
            Some(tv(&barycenter(space, &pairs), model.law.pi()))
        }
    };

    let mut class_m_member = None;
    if lift == LiftKind::Triple {
        let report = class_m_check(space, measure_a.triple_atoms().unwrap(), &battery);
        class_m_member = Some(report.member);
        let mut csv = String::from("hidden_state,function_id,lhs,rhs,se,z_score\n");
        for row in &report.rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.hidden_state,
                row.function_id,
                fmt_f64(row.lhs),
                fmt_f64(row.rhs),
                fmt_f64(row.se),
                fmt_f64(row.z_score)
            ));
        }
        out.add("class_compatibility.csv", csv.into_bytes());
    }

    let verdict = if comparison.indistinguishable {
        "indistinguishable"
    } else {
        "distinguished"
    };
    let max_z = comparison
        .rows
        .iter()
        .map(|r| r.z_score)
        .fold(0.0, f64::max);
    let summary = serde_json::json!({
        "verdict": verdict,
        "max_z_score": if max_z.is_finite() { serde_json::json!(max_z) } else { serde_json::json!("inf") },
        "barycenter_tv_vs_pi": bary_tv,
        "class_compatibility_member": class_m_member,
        "caveat": comparison.caveat,
        "note": "estimates approximate invariant measures reachable from the chosen initializations; agreement is consistency evidence, not a certificate of global uniqueness",
    });
    out.add(
        "verdict.json",
        serde_json::to_string_pretty(&summary).unwrap().into_bytes(),
    );
    out.finish()?;
    println!(
        "invariant: verdict {verdict} (max |z| = {max_z:.2}), barycenter tv vs pi = {}",
        bary_tv.map(|v| format!("{v:.5}")).unwrap_or_default()
    );
    println!("note: {}", comparison.caveat);
    Ok(0)
}

// ---------------------------------------------------------------------------
// zoo

fn cmd_zoo(args: ZooArgs) -> Result<i32> {
    match args.command {
        ZooCommand::List => {
            println!("example-1.1                             sliding-pair counterexample (degenerate observations)");
            println!("example-1.1-noisy[:<eps>]               counterexample with a flip-noise channel (default eps 0.1)");
            println!("example-1.2-discrete                    feedback counterexample driven by i.i.d. signs");
            println!("random-nondegenerate:<E>x<F>:<seed>     random kernel with a factorization certificate");
            println!("random-general:<E>x<F>:<seed>           random kernel with unconstrained rows");
            println!("generalized-hmm:<E>x<F>:<seed>          autonomous hidden chain, observations with dynamics");
            println!("correlated-noise-hmm:<E>x<F>:<seed>     observation feedback with positive observation weight");
            Ok(0)
        }
        ZooCommand::Emit { name, factorized, out } => {
            let spec = zoo_by_name(&name)?;
            let json = if factorized {
                let fact = spec.factorization.as_ref().ok_or_else(|| {
                    Error::Config(format!(
                        "{} carries no factorization certificate; emit it as joint rows",
                        spec.name
                    ))
                })?;
                serde_json::to_string_pretty(&crate::io::model_to_file_factorized(
                    &spec.kernel,
                    fact,
                    Some(&spec.stationary),
                ))
                .expect("model serializes")
            } else {
                model_to_json(&spec.kernel, Some(&spec.stationary))
            };
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(&out, json)?;
            println!("wrote {} ({})", out.display(), spec.description);
            Ok(0)
        }
        ZooCommand::Kalman {
            horizon,
            replicates,
            seed,
            out,
        } => {
            require_positive("horizon", horizon)?;
            require_positive("replicates", replicates)?;
            let seed = effective_seed(seed);
            let report = zoo::kalman_lambda_demo(horizon, replicates, seed);
            let config = serde_json::json!({
                "horizon": horizon,
                "replicates": replicates,
                "seed": seed,
            });
            let mut dir = OutputDir::new(&out, "zoo kalman", config);
            let mut csv = String::from("n,s2,m_branch1,m_branch0\n");
            for row in &report.rows {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    row.n,
                    fmt_f64(row.s2),
                    fmt_f64(row.m_branch1),
                    fmt_f64(row.m_branch0)
                ));
            }
            dir.add("kalman.csv", csv.into_bytes());
            let summary = serde_json::json!({
                "fixed_point": report.fixed_point,
                "converged_at": report.converged_at,
                "final_s2": report.riccati.last(),
                "branch1": {
                    "x2_mean": report.branch1.x2_mean,
                    "mean_m": report.branch1.mean_m,
                    "var_m": report.branch1.var_m,
                    "mean_s2": report.branch1.mean_s2,
                },
                "branch0": {
                    "x2_mean": report.branch0.x2_mean,
                    "mean_m": report.branch0.mean_m,
                    "var_m": report.branch0.var_m,
                    "mean_s2": report.branch0.mean_s2,
                },
                "caveat": report.caveat,
            });
            dir.add(
                "summary.json",
                serde_json::to_string_pretty(&summary).unwrap().into_bytes(),
            );
            dir.finish()?;
            println!(
                "kalman demo: variance fixed point {:.9} (reached at step {:?}); branch x2 means {} and {}",
                report.fixed_point,
                report.converged_at,
                report.branch1.x2_mean,
                report.branch0.x2_mean
            );
            println!("note: {}", report.caveat);
            Ok(0)
        }
    }
}
