//! `spdwave`: denoise curves of symmetric positive-definite matrices with the
//! intrinsic average-interpolation wavelet estimator and build confidence
//! sets around the result.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use spdwave_core::harness::{
    clt_check, coverage_study, curve_eval, grid_point, read_curve_json, report_csv,
    sample_noisy_curve, write_curve_json, write_report_json, CltConfig, CurveSpec, NoiseSpec,
    StudyConfig,
};
use spdwave_core::refinement::build_transition;
use spdwave_core::{
    asymptotic_cs, bootstrap_ball, forward_transform, le_distance, linear_estimate, wild_bootstrap,
    BootstrapConfig, Multiplier, RefinementOrder, RngStream, SpdMat,
};

#[derive(Parser)]
#[command(name = "spdwave", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a noisy SPD curve on the dyadic midpoint grid and write it as JSON.
    Simulate(SimulateArgs),
    /// Forward wavelet transform: emit whitened coefficient norms as CSV.
    Transform(TransformArgs),
    /// Linear wavelet estimate (threshold all coefficients at scales >= J0).
    Estimate(EstimateArgs),
    /// Wild-bootstrap replicate distances at selected grid points, as CSV.
    Bootstrap(BootstrapArgs),
    /// Confidence set (asymptotic ellipsoid or bootstrap ball) at one grid point, as JSON.
    Cs(CsArgs),
    /// Monte Carlo coverage/volume study over both confidence-set families.
    Coverage(CoverageArgs),
    /// Refinement constants for order N: kappa_N and the limit matrix E_inf.
    Kappa(KappaArgs),
    /// Compare the estimator's sampling covariance with its theoretical limit.
    CltCheck(CltCheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MultiplierArg {
    Gaussian,
    TwoPoint,
}

impl From<MultiplierArg> for Multiplier {
    fn from(m: MultiplierArg) -> Self {
        match m {
            MultiplierArg::Gaussian => Multiplier::Gaussian,
            MultiplierArg::TwoPoint => Multiplier::TwoPoint,
        }
    }
}

/// Entrywise noise standard deviations; defaults depend on the curve.
#[derive(Args)]
struct NoiseArgs {
    /// Standard deviation of the (1,1) log-entry.
    #[arg(long)]
    sigma11: Option<f64>,
    /// Standard deviation of the (2,2) log-entry.
    #[arg(long)]
    sigma22: Option<f64>,
    /// Standard deviation of the (1,2) = (2,1) log-entry.
    #[arg(long)]
    sigma12: Option<f64>,
}

impl NoiseArgs {
    fn resolve(&self, curve: &CurveSpec) -> Result<NoiseSpec> {
        let d = NoiseSpec::default_for(curve);
        Ok(NoiseSpec::new(
            self.sigma11.unwrap_or(d.sigma_11),
            self.sigma22.unwrap_or(d.sigma_22),
            self.sigma12.unwrap_or(d.sigma_12),
        )?)
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Built-in test curve: c1, c2 or c3.
    #[arg(long)]
    curve: CurveSpec,
    /// Sample 2^J grid points.
    #[arg(long, default_value_t = 10)]
    j: usize,
    #[command(flatten)]
    noise: NoiseArgs,
    /// RNG seed (results are deterministic given the seed).
    #[arg(long)]
    seed: u64,
    /// Output JSON file for the noisy samples.
    #[arg(long)]
    out: PathBuf,
    /// Optional output JSON file for the noise-free curve values.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    /// Input curve JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Refinement order N (odd).
    #[arg(long, default_value_t = 5)]
    order: usize,
    /// Output CSV file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Input curve JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Smoothing scale J0: coefficients at scales >= J0 are zeroed.
    #[arg(long)]
    j0: usize,
    /// Refinement order N (odd).
    #[arg(long, default_value_t = 5)]
    order: usize,
    /// Output JSON file for the estimated curve.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BootstrapArgs {
    /// Input curve JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Smoothing scale of the re-estimator.
    #[arg(long)]
    j0: usize,
    /// Pilot smoothing scale; defaults to J0.
    #[arg(long)]
    j0_star: Option<usize>,
    /// Refinement order N (odd).
    #[arg(long, default_value_t = 5)]
    order: usize,
    /// Number of bootstrap replicates.
    #[arg(long, default_value_t = 100)]
    b: usize,
    #[arg(long, value_enum, default_value_t = MultiplierArg::Gaussian)]
    multiplier: MultiplierArg,
    /// Rescale residuals for the pilot's noise absorption (leverage correction).
    #[arg(long)]
    rescale: bool,
    /// RNG seed (results are deterministic given the seed).
    #[arg(long)]
    seed: u64,
    /// Grid indices at which to report replicate distances (repeatable).
    #[arg(long, required = true)]
    index: Vec<usize>,
    /// Output CSV file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Asymptotic,
    Bootstrap,
}

#[derive(Args)]
struct CsArgs {
    /// Input curve JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Smoothing scale J0.
    #[arg(long)]
    j0: usize,
    /// Refinement order N (odd).
    #[arg(long, default_value_t = 5)]
    order: usize,
    /// Grid index of the target point.
    #[arg(long)]
    index: usize,
    /// Nominal coverage level in (0, 1).
    #[arg(long)]
    level: f64,
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Noise standard deviations of the log-entries (asymptotic family).
    #[command(flatten)]
    noise: NoiseArgs,
    /// Number of bootstrap replicates (bootstrap family).
    #[arg(long, default_value_t = 100)]
    b: usize,
    /// Pilot smoothing scale; defaults to J0 (bootstrap family).
    #[arg(long)]
    j0_star: Option<usize>,
    #[arg(long, value_enum, default_value_t = MultiplierArg::Gaussian)]
    multiplier: MultiplierArg,
    /// RNG seed; required for the bootstrap family.
    #[arg(long)]
    seed: Option<u64>,
    /// Output JSON file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoverageArgs {
    /// Built-in test curve: c1, c2 or c3.
    #[arg(long)]
    curve: CurveSpec,
    /// Sample 2^J grid points per Monte Carlo run.
    #[arg(long, default_value_t = 10)]
    j: usize,
    /// Smoothing scale J0.
    #[arg(long)]
    j0: usize,
    /// Pilot smoothing scale; defaults to J0.
    #[arg(long)]
    j0_star: Option<usize>,
    /// Refinement order N (odd).
    #[arg(long, default_value_t = 5)]
    order: usize,
    /// Bootstrap replicates per sample.
    #[arg(long, default_value_t = 100)]
    b: usize,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Comma-separated nominal coverage levels.
    #[arg(long, default_value = "0.9,0.95,0.975", value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Grid points dropped at each end before scoring.
    #[arg(long, default_value_t = 100)]
    trim: usize,
    /// Rejection-sampling draws per volume estimate; 0 disables volumes.
    #[arg(long, default_value_t = 20_000)]
    volume_samples: usize,
    /// Volumes are estimated at every volume-stride-th kept grid point.
    #[arg(long, default_value_t = 32)]
    volume_stride: usize,
    #[arg(long, value_enum, default_value_t = MultiplierArg::Gaussian)]
    multiplier: MultiplierArg,
    #[command(flatten)]
    noise: NoiseArgs,
    /// RNG seed (the whole study is deterministic given the seed).
    #[arg(long)]
    seed: u64,
    /// Output CSV file for the aggregate rows; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional JSON sidecar with config and per-point coverage vectors.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct KappaArgs {
    /// Refinement order N (odd).
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct CltCheckArgs {
    /// Built-in test curve: c1, c2 or c3.
    #[arg(long)]
    curve: CurveSpec,
    /// Sample 2^J grid points per replicate.
    #[arg(long, default_value_t = 12)]
    j: usize,
    /// Smoothing scale J0.
    #[arg(long)]
    j0: usize,
    /// Refinement order N (odd).
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Fresh-data replicates.
    #[arg(long, default_value_t = 2000)]
    r: usize,
    /// Grid index of the target point.
    #[arg(long)]
    index: usize,
    #[command(flatten)]
    noise: NoiseArgs,
    /// RNG seed (results are deterministic given the seed).
    #[arg(long)]
    seed: u64,
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let noise = a.noise.resolve(&a.curve)?;
    let mut rng = RngStream::new(a.seed).rng();
    let data = sample_noisy_curve(&a.curve, &noise, a.j, &mut rng)?;
    write_curve_json(&data, &a.out)?;
    if let Some(truth_path) = &a.truth {
        let truth: Vec<SpdMat> = (0..1usize << a.j)
            .map(|k| curve_eval(&a.curve, grid_point(a.j, k)))
            .collect::<spdwave_core::Result<_>>()?;
        write_curve_json(&truth, truth_path)?;
    }
    Ok(())
}

fn run_transform(a: TransformArgs) -> Result<()> {
    let data = read_curve_json(&a.input)?;
    let order = RefinementOrder::from_n(a.order)?;
    let pyr = forward_transform(&data, &order)?;
    let mut csv = String::from("scale,position,coeff_norm\n");
    for j in 1..=pyr.finest_scale() {
        for (k, c) in pyr.coeffs_at_scale(j).iter().enumerate() {
            csv.push_str(&format!("{j},{k},{}\n", c.frob_norm()));
        }
    }
    write_or_print(&a.out, &csv)
}

fn run_estimate(a: EstimateArgs) -> Result<()> {
    let data = read_curve_json(&a.input)?;
    let order = RefinementOrder::from_n(a.order)?;
    let est = linear_estimate(&data, a.j0, &order)?;
    write_curve_json(&est, &a.out)?;
    Ok(())
}

fn run_bootstrap(a: BootstrapArgs) -> Result<()> {
    let data = read_curve_json(&a.input)?;
    let order = RefinementOrder::from_n(a.order)?;
    let est = linear_estimate(&data, a.j0, &order)?;
    let cfg = BootstrapConfig {
        j0_star: a.j0_star.unwrap_or(a.j0),
        j0: a.j0,
        order,
        b: a.b,
        multiplier: a.multiplier.into(),
        seed: a.seed,
        residual_rescale: a.rescale,
    };
    for &k in &a.index {
        if k >= data.len() {
            bail!("index {k} out of range for {} grid points", data.len());
        }
    }
    let reps = wild_bootstrap(&data, &cfg)?;
    let mut csv = String::from("index,replicate,distance\n");
    for &k in &a.index {
        for (r, rep) in reps.iter().enumerate() {
            csv.push_str(&format!("{k},{r},{}\n", le_distance(&rep[k], &est[k])?));
        }
    }
    write_or_print(&a.out, &csv)
}

fn run_cs(a: CsArgs) -> Result<()> {
    let data = read_curve_json(&a.input)?;
    let j = data.len().trailing_zeros() as usize;
    let order = RefinementOrder::from_n(a.order)?;
    let est = linear_estimate(&data, a.j0, &order)?;
    if a.index >= data.len() {
        bail!("index {} out of range for {} grid points", a.index, data.len());
    }
    let center = &est[a.index];
    let t = grid_point(j, a.index);
    let value = match a.family {
        FamilyArg::Asymptotic => {
            let (s11, s22, s12) = match (a.noise.sigma11, a.noise.sigma22, a.noise.sigma12) {
                (Some(x), Some(y), Some(z)) => (x, y, z),
                _ => bail!("the asymptotic family needs --sigma11, --sigma22 and --sigma12"),
            };
            let cov = NoiseSpec::new(s11, s22, s12)?.cov_tensor()?;
            let cs = asymptotic_cs(center, &cov, j, a.j0, a.order, a.level)?;
            let q = cov.q();
            let metric: Vec<Vec<f64>> = (0..q)
                .map(|r| (0..q).map(|c| cs.metric_matrix()[(r, c)]).collect())
                .collect();
            serde_json::json!({
                "family": "asymptotic",
                "index": a.index,
                "t": t,
                "level": a.level,
                "center": center,
                "scale": cs.scale(),
                "chi2_radius_sq": cs.radius_sq(),
                "metric_matrix": metric,
            })
        }
        FamilyArg::Bootstrap => {
            let seed = a
                .seed
                .ok_or_else(|| anyhow::anyhow!("--seed is required for the bootstrap family"))?;
            let cfg = BootstrapConfig {
                j0_star: a.j0_star.unwrap_or(a.j0),
                j0: a.j0,
                order,
                b: a.b,
                multiplier: a.multiplier.into(),
                seed,
                residual_rescale: false,
            };
            let reps = wild_bootstrap(&data, &cfg)?;
            let at_k: Vec<SpdMat> = reps.iter().map(|rep| rep[a.index].clone()).collect();
            let ball = bootstrap_ball(center, &at_k, 1.0 - a.level)?;
            serde_json::json!({
                "family": "bootstrap",
                "index": a.index,
                "t": t,
                "level": a.level,
                "center": center,
                "radius": ball.radius,
            })
        }
    };
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    write_or_print(&a.out, &text)
}

fn run_coverage(a: CoverageArgs) -> Result<()> {
    let noise = a.noise.resolve(&a.curve)?;
    let cfg = StudyConfig {
        curve: a.curve,
        noise,
        j: a.j,
        j0: a.j0,
        j0_star: a.j0_star.unwrap_or(a.j0),
        order: RefinementOrder::from_n(a.order)?,
        b: a.b,
        k: a.k,
        alphas: a.alphas,
        boundary_trim: a.trim,
        seed: a.seed,
        volume_samples: a.volume_samples,
        volume_stride: a.volume_stride,
        multiplier: a.multiplier.into(),
    };
    let report = coverage_study(&cfg)?;
    if let Some(path) = &a.json {
        write_report_json(&report, path)?;
    }
    write_or_print(&a.out, &report_csv(&report))
}

fn run_kappa(a: KappaArgs) -> Result<()> {
    let order = RefinementOrder::from_n(a.n)?;
    let tm = build_transition(&order)?;
    println!("N = {}", a.n);
    println!("kappa = {:.17}", tm.kappa);
    println!("E_inf:");
    let (rows, cols) = tm.e_inf.shape();
    for r in 0..rows {
        let line: Vec<String> = (0..cols).map(|c| format!("{}", tm.e_inf[(r, c)])).collect();
        println!("{}", line.join(","));
    }
    Ok(())
}

fn run_clt_check(a: CltCheckArgs) -> Result<()> {
    let noise = a.noise.resolve(&a.curve)?;
    let cfg = CltConfig {
        curve: a.curve,
        noise,
        j: a.j,
        j0: a.j0,
        order: RefinementOrder::from_n(a.order)?,
        r: a.r,
        index: a.index,
        seed: a.seed,
    };
    let report = clt_check(&cfg)?;
    let q = report.theoretical.nrows();
    println!("empirical covariance (eta coordinates):");
    for r in 0..q {
        let line: Vec<String> = (0..q).map(|c| format!("{}", report.empirical[(r, c)])).collect();
        println!("{}", line.join(","));
    }
    println!("theoretical covariance:");
    for r in 0..q {
        let line: Vec<String> = (0..q)
            .map(|c| format!("{}", report.theoretical[(r, c)]))
            .collect();
        println!("{}", line.join(","));
    }
    println!("relative max-norm error = {}", report.rel_error);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => run_simulate(a),
        Command::Transform(a) => run_transform(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Bootstrap(a) => run_bootstrap(a),
        Command::Cs(a) => run_cs(a),
        Command::Coverage(a) => run_coverage(a),
        Command::Kappa(a) => run_kappa(a),
        Command::CltCheck(a) => run_clt_check(a),
    }
}
