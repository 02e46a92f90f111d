//! Command-line interface: generation, evaluation, sampling, moments, and
//! self-verification with JSON input and output.
//!
//! Exit codes: 0 on success, 2 on validation errors, 3 when a size guard
//! rejects an exhaustive enumeration. All subcommands are deterministic in
//! their flags and seed; identical invocations produce byte-identical output.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use itertools::Itertools;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hdpp::ProcessSpec;
use crate::json;
use crate::kernel::{gen_system, GroundSpace, OrthonormalSystem, PointConfig, SystemKind};
use crate::moments::{factorial_moment, pmf_from_factorial_moments, ProductSet};
use crate::multilinear::{
    hermitian_eigenvalues, hyperdet_direct, hyperdet_factored, permutations_with_sign, SignancySet,
};
use crate::tensor::{ComplexMatrix, HypercubicArray};

#[derive(Parser)]
#[command(
    name = "hyppp",
    about = "Hyperdeterminantal point processes on finite weighted ground spaces",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an orthonormal system and write it as JSON.
    Gen(GenArgs),
    /// Evaluate the N-point density at a configuration.
    Density(DensityArgs),
    /// Draw configurations by seeded sequential sampling.
    Sample(SampleArgs),
    /// Factorial moments of the count in a product set, with the inverted PMF.
    Moments(MomentsArgs),
    /// Run the invariant suite against a system and report max deviations.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of factors M.
    #[arg(long)]
    m: usize,
    /// Comma-separated factor sizes, e.g. `3,3`.
    #[arg(long)]
    sizes: String,
    /// Rank L (number of orthonormal functions per factor).
    #[arg(long)]
    l: usize,
    /// Construction: haar, dft, or identity.
    #[arg(long, default_value = "haar")]
    kind: String,
    /// Seed for the haar construction.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-factor weights, factors separated by `;`, e.g. `1,2,1;1,1`.
    /// Defaults to unit weights.
    #[arg(long)]
    weights: Option<String>,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    /// Path to an orthonormal system JSON file.
    #[arg(long)]
    system: PathBuf,
    /// Signancy set as comma-separated 1-based factor indices, e.g. `1,3`.
    #[arg(long)]
    signancy: String,
    /// Path to a point configuration JSON file ({"coords": [[..]]}).
    #[arg(long)]
    points: Option<PathBuf>,
    /// Inline configuration: points separated by `;`, coordinates by `,`.
    #[arg(long)]
    coords: Option<String>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    signancy: String,
    /// Number of points per configuration (at most L).
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of configurations to draw.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Output path for JSON lines; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    signancy: String,
    /// Product set: per-factor point lists separated by `;`. Use `*` for a
    /// full factor and `-` for an empty one, e.g. `1,2;*`.
    #[arg(long)]
    set: String,
    /// Report moments up to this order (default L; the PMF always uses all L).
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    signancy: String,
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::TooLarge(_) => 3,
                _ => 2,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Density(args) => cmd_density(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Moments(args) => cmd_moments(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Argument(format!("cannot parse {what} entry {tok:?}")))
        })
        .collect()
}

fn parse_weights(text: &str, sizes: &[usize]) -> Result<Vec<Vec<f64>>> {
    let groups: Vec<&str> = text.split(';').collect();
    if groups.len() != sizes.len() {
        return Err(Error::Argument(format!(
            "{} weight groups for {} factors",
            groups.len(),
            sizes.len()
        )));
    }
    groups
        .iter()
        .map(|group| {
            group
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Argument(format!("cannot parse weight {tok:?}")))
                })
                .collect()
        })
        .collect()
}

fn parse_coords(text: &str, factor_count: usize) -> Result<PointConfig> {
    let rows = text
        .split(';')
        .map(|point| parse_usize_list(point, "coordinate"))
        .collect::<Result<Vec<_>>>()?;
    PointConfig::new(factor_count, rows)
}

fn parse_product_set(text: &str, space: &GroundSpace) -> Result<ProductSet> {
    let groups: Vec<&str> = text.split(';').collect();
    if groups.len() != space.factor_count() {
        return Err(Error::Argument(format!(
            "{} set groups for {} factors",
            groups.len(),
            space.factor_count()
        )));
    }
    let per_factor = groups
        .iter()
        .enumerate()
        .map(|(m0, group)| match group.trim() {
            "*" => Ok((1..=space.sizes()[m0]).collect()),
            "-" | "" => Ok(Vec::new()),
            list => parse_usize_list(list, "set"),
        })
        .collect::<Result<Vec<_>>>()?;
    let set = ProductSet::new(per_factor);
    set.validate_for(space)?;
    Ok(set)
}

fn load_spec(system: &Path, signancy: &str) -> Result<ProcessSpec> {
    let sys: OrthonormalSystem = json::read_json_file(system)?;
    let k = SignancySet::parse(signancy, sys.factor_count())?;
    ProcessSpec::new(sys, k)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let sizes = parse_usize_list(&args.sizes, "size")?;
    if sizes.len() != args.m {
        return Err(Error::Argument(format!(
            "--m {} disagrees with {} sizes",
            args.m,
            sizes.len()
        )));
    }
    let space = match &args.weights {
        Some(w) => GroundSpace::new(sizes.clone(), parse_weights(w, &sizes)?)?,
        None => GroundSpace::unit(sizes)?,
    };
    let kind: SystemKind = args.kind.parse()?;
    let sys = gen_system(&space, args.l, kind, args.seed)?;
    let mut text = json::to_json_string(&sys)?;
    text.push('\n');
    emit(args.output.as_deref(), &text)?;
    Ok(0)
}

fn cmd_density(args: DensityArgs) -> Result<i32> {
    let spec = load_spec(&args.system, &args.signancy)?;
    let pts = match (&args.points, &args.coords) {
        (Some(path), None) => json::read_json_file(path)?,
        (None, Some(text)) => parse_coords(text, spec.factor_count())?,
        _ => {
            return Err(Error::Argument(
                "supply exactly one of --points and --coords".into(),
            ))
        }
    };
    let d = spec.density(&pts)?;
    println!("{d:.16e}");
    Ok(0)
}

fn cmd_sample(args: SampleArgs) -> Result<i32> {
    let spec = load_spec(&args.system, &args.signancy)?;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
    let mut lines = String::new();
    for _ in 0..args.count {
        let config = spec.sample_with_rng(args.n, &mut rng)?;
        lines.push_str(&json::to_json_string(&config)?);
        lines.push('\n');
    }
    emit(args.output.as_deref(), &lines)?;
    Ok(0)
}

#[derive(Serialize)]
struct MomentsReport {
    moments: Vec<f64>,
    pmf: Vec<f64>,
}

fn cmd_moments(args: MomentsArgs) -> Result<i32> {
    let spec = load_spec(&args.system, &args.signancy)?;
    let set = parse_product_set(&args.set, spec.sys().space())?;
    let l = spec.l();
    let max_n = args.max_n.unwrap_or(l);
    if max_n < 1 || max_n > l {
        return Err(Error::Argument(format!("--max-n {max_n} outside 1..={l}")));
    }
    // the inversion needs every order up to L, whatever is reported
    let all: Vec<f64> = (1..=l)
        .map(|n| factorial_moment(&spec, &set, n))
        .collect::<Result<Vec<_>>>()?;
    let pmf = pmf_from_factorial_moments(&all)?;
    let report = MomentsReport {
        moments: all[..max_n].to_vec(),
        pmf: pmf.probs().to_vec(),
    };
    let mut text = json::to_json_string(&report)?;
    text.push('\n');
    emit(args.output.as_deref(), &text)?;
    Ok(0)
}

struct CheckReport {
    lines: Vec<String>,
    failed: bool,
}

impl CheckReport {
    fn new() -> Self {
        CheckReport {
            lines: Vec::new(),
            failed: false,
        }
    }

    fn record(&mut self, name: &str, deviation: f64, tolerance: f64) {
        let ok = deviation <= tolerance;
        self.failed |= !ok;
        self.lines.push(format!(
            "{name:<24} max deviation {deviation:9.3e}  (tol {tolerance:.1e})  {}",
            if ok { "ok" } else { "FAIL" }
        ));
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.lines.push(format!("{name:<24} skipped ({why})"));
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let spec = load_spec(&args.system, &args.signancy)?;
    let sys = spec.sys();
    let space = sys.space();
    let l = spec.l();
    // fail fast before any partial work: the suite enumerates Sigma^N for
    // every N <= L and triple point loops for the reproducing identity
    crate::hdpp::guard_enumeration(space.total_points(), l.max(3))?;
    let mut report = CheckReport::new();

    report.record(
        "orthonormality",
        sys.validate_orthonormal().max_deviation(),
        1e-10,
    );

    let points: Vec<Vec<usize>> = space.points().collect();

    let mut hermitian_dev: f64 = 0.0;
    for y in &points {
        for z in &points {
            let fwd = sys.eval_kernel(y, z)?;
            let bwd = sys.eval_kernel(z, y)?;
            hermitian_dev = hermitian_dev.max((fwd - bwd.conj()).norm());
        }
    }
    report.record("kernel_hermitian", hermitian_dev, 1e-12);

    let mut trace = 0.0;
    for p in &points {
        trace += space.point_weight(p) * sys.eval_kernel(p, p)?.re;
    }
    report.record("kernel_trace", (trace - l as f64).abs(), 1e-9);

    let mut reproducing_dev: f64 = 0.0;
    for x in &points {
        for z in &points {
            let mut composed = Complex64::new(0.0, 0.0);
            for y in &points {
                composed += space.point_weight(y) * sys.eval_kernel(x, y)? * sys.eval_kernel(y, z)?;
            }
            reproducing_dev = reproducing_dev.max((composed - sys.eval_kernel(x, z)?).norm());
        }
    }
    report.record("kernel_reproducing", reproducing_dev, 1e-9);

    // positive semidefiniteness via the spectrum of the full Gram matrix
    let gram = ComplexMatrix::from_fn(points.len(), points.len(), |r, c| {
        sys.eval_kernel(&points[r], &points[c]).unwrap()
    });
    let min_eig = hermitian_eigenvalues(&gram)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    report.record("kernel_psd", (-min_eig).max(0.0), 1e-9);

    let mut normalization_dev: f64 = 0.0;
    for n in 1..=l {
        normalization_dev = normalization_dev.max((spec.normalization_check(n)? - 1.0).abs());
    }
    report.record("normalization", normalization_dev, 1e-9);

    let configs_at = |n: usize| -> Vec<PointConfig> {
        (0..n)
            .map(|_| points.iter().cloned())
            .multi_cartesian_product()
            .take(200)
            .map(|rows| PointConfig::new(space.factor_count(), rows).unwrap())
            .collect()
    };

    let mut marginal_dev: f64 = 0.0;
    for n in 2..=l {
        for config in configs_at(n) {
            let integrated = spec.marginalize_last_point(&config)?;
            let shorter = spec.density(&config.prefix(n - 1))?;
            marginal_dev = marginal_dev.max((integrated - shorter).abs());
        }
    }
    if l >= 2 {
        report.record("marginal_consistency", marginal_dev, 1e-9);
    } else {
        report.skip("marginal_consistency", "L = 1");
    }

    let expansion_n = l.min(2);
    let mut expansion_dev: f64 = 0.0;
    for config in configs_at(expansion_n) {
        let b = sys.b_matrices(&config)?;
        let factored = hyperdet_factored(&b, spec.signancy())?;
        let direct = hyperdet_direct(&HypercubicArray::from_factored(&b)?, spec.signancy())?;
        let dev = (direct - Complex64::new(factored, 0.0)).norm()
            / (1.0 + factored.abs());
        expansion_dev = expansion_dev.max(dev);
    }
    report.record("expansion_identity", expansion_dev, 1e-9);

    let exchange_n = l.min(3).min(points.len());
    let mut exchange_dev: f64 = 0.0;
    if exchange_n >= 2 {
        let perms = permutations_with_sign(exchange_n);
        for config in configs_at(exchange_n) {
            let base = spec.density(&config)?;
            for (perm, _) in &perms {
                let permuted = spec.density(&config.permuted(perm))?;
                exchange_dev = exchange_dev.max((permuted - base).abs());
            }
        }
        report.record("exchangeability", exchange_dev, 1e-12);
    } else {
        report.skip("exchangeability", "fewer than two points");
    }

    if space.factor_count() >= 2 {
        match spec.reduce_factor() {
            Ok(reduced) => {
                let reduced_space = reduced.sys().space();
                let mut reduction_dev: f64 = 0.0;
                let kept_n = l.min(2);
                let kept_points: Vec<Vec<usize>> = reduced_space.points().collect();
                for rows in (0..kept_n)
                    .map(|_| kept_points.iter().cloned())
                    .multi_cartesian_product()
                    .take(200)
                {
                    let kept = PointConfig::new(reduced_space.factor_count(), rows)?;
                    let mut integrated = 0.0;
                    let last = space.factor_count();
                    for extension in (0..kept_n)
                        .map(|_| 1..=space.size(last))
                        .multi_cartesian_product()
                    {
                        let full_rows: Vec<Vec<usize>> = kept
                            .coords()
                            .iter()
                            .zip(extension.iter())
                            .map(|(row, &tail)| {
                                let mut full = row.clone();
                                full.push(tail);
                                full
                            })
                            .collect();
                        let full = PointConfig::new(space.factor_count(), full_rows)?;
                        let tail_weight: f64 = extension
                            .iter()
                            .map(|&t| space.weight(last, t))
                            .product();
                        integrated += spec.density(&full)? * tail_weight;
                    }
                    reduction_dev =
                        reduction_dev.max((integrated - reduced.density(&kept)?).abs());
                }
                report.record("factor_reduction", reduction_dev, 1e-9);
            }
            Err(Error::InvalidSignancy(_)) => {
                report.skip("factor_reduction", "signancy would become empty");
            }
            Err(e) => return Err(e),
        }
    } else {
        report.skip("factor_reduction", "M = 1");
    }

    for line in &report.lines {
        println!("{line}");
    }
    if report.failed {
        println!("verify: FAIL");
        Ok(2)
    } else {
        println!("verify: ok");
        Ok(0)
    }
}
