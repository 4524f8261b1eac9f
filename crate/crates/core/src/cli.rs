//! Command-line front end: `ncpgeom <subcommand> --config <path> [--seed N] [--out DIR]`.
//!
//! Exit codes are 0 on success, 2 for invalid input and 3 for numerical
//! failures. `NCPGEOM_WORKERS` sets the worker count.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use serde_json::json;

use crate::asymptotics::{
    busemann, busemann_estimate, busemann_gradient, busemann_hessian, volume_entropy_scaled, volume_growth_table,
    ProductPoint,
};
use crate::claims::{claims_table, run_ledger, LedgerOptions};
use crate::config::{load_config, JobConfig};
use crate::error::{Error, Result};
use crate::geodesic::{integrate_geodesic_with, PhaseState};
use crate::hyperbolic::read_generators;
use crate::invariants::{
    curvature_deviation, disk_tube_limit_ratio, enumerate_length_spectrum, epsilon0, isoperimetric_bound,
    length_spectrum_table, moduli_dimension, product_spectrum, spectral_gap, spectrum_table, tube_profiles, tube_table,
    SigmaSpectrum,
};
use crate::jacobi::{propagate_jacobi, scan_conjugate, scan_table, ScanOptions};
use crate::metric::{ChartPoint, MetricSpec};
use crate::report::{fmt_f, fmt_opt, Table};
use crate::riccati::{riccati_average, stable_tensor, AverageOptions, VerticalSampler, DEFAULT_ANCHOR};

pub const WORKERS_ENV: &str = "NCPGEOM_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "ncpgeom",
    version,
    about = "Geodesics, Jacobi fields and invariants of H² × S¹ metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Job configuration (`key: value` lines or JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Random geodesics searched for conjugate points.
    ScanConjugate(Common),
    /// Jacobi propagators along one geodesic.
    Jacobi(Common),
    /// Stable Riccati solution along one geodesic.
    RiccatiStable(Common),
    /// Average of Tr(U² + R_V) over vertical geodesics.
    RiccatiAverage(Common),
    /// Busemann function of the fiber ray (product metric).
    Busemann(Common),
    /// Ball volumes and volume entropy.
    VolumeGrowth(Common),
    /// Laplace spectrum of the product.
    Spectrum(Common),
    /// Marked length spectrum from surface generators.
    LengthSpectrum(Common),
    /// Isoperimetric bound against tube regions.
    Isoperimetric(Common),
    /// Monte Carlo curvature deviation.
    CurvatureDeviation(Common),
    /// Curvature-gap constants delta and epsilon0.
    GapConstant(Common),
    /// Dimension of the moduli space.
    ModuliDim(Common),
    /// Recomputes the claim ledger.
    Ledger(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::ScanConjugate(c) => ("scan-conjugate", c),
            Command::Jacobi(c) => ("jacobi", c),
            Command::RiccatiStable(c) => ("riccati-stable", c),
            Command::RiccatiAverage(c) => ("riccati-average", c),
            Command::Busemann(c) => ("busemann", c),
            Command::VolumeGrowth(c) => ("volume-growth", c),
            Command::Spectrum(c) => ("spectrum", c),
            Command::LengthSpectrum(c) => ("length-spectrum", c),
            Command::Isoperimetric(c) => ("isoperimetric", c),
            Command::CurvatureDeviation(c) => ("curvature-deviation", c),
            Command::GapConstant(c) => ("gap-constant", c),
            Command::ModuliDim(c) => ("moduli-dim", c),
            Command::Ledger(c) => ("ledger", c),
        }
    }
}

/// Everything a job needs besides the config itself.
struct Context {
    base_dir: PathBuf,
}

fn required<T: Copy>(key: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| Error::value(key, "required for this job"))
}

fn one_row(name: &str, pairs: &[(&str, String)]) -> Table {
    let header: Vec<&str> = pairs.iter().map(|(k, _)| *k).collect();
    let mut table = Table::new(name, &header);
    table.push(pairs.iter().map(|(_, v)| v.clone()).collect());
    table
}

fn initial_state(cfg: &JobConfig, spec: &MetricSpec) -> Result<PhaseState> {
    let q = ChartPoint::new(cfg.x0.unwrap_or(0.0), cfg.y0.unwrap_or(1.0), cfg.t0.unwrap_or(0.0))
        .map_err(|e| Error::value("y0", e.to_string()))?;
    let dir = Vector3::new(
        cfg.dir_x.unwrap_or(0.0),
        cfg.dir_y.unwrap_or(0.0),
        cfg.dir_t.unwrap_or(1.0),
    );
    PhaseState::normalized(spec, q, dir).map_err(|e| Error::value("dir_t", e.to_string()))
}

fn product_length(spec: &MetricSpec) -> Result<f64> {
    match spec {
        MetricSpec::Product { fiber_length } => Ok(*fiber_length),
        other => Err(Error::Unsupported(format!(
            "this job needs the Product metric, got {}",
            other.kind_name()
        ))),
    }
}

fn run_job(name: &str, cfg: &JobConfig, ctx: &Context) -> Result<Vec<Table>> {
    let n = |default: usize| cfg.n.unwrap_or(default);
    match name {
        "scan-conjugate" => {
            let spec = cfg.metric_spec()?;
            let records = scan_conjugate(
                &spec,
                &cfg.sample_box()?,
                &ScanOptions {
                    n: n(200),
                    seed: cfg.seed,
                    tmax: cfg.tmax,
                    step: cfg.step,
                },
            )?;
            Ok(vec![scan_table(&records)])
        }
        "jacobi" => {
            let spec = cfg.metric_spec()?;
            let start = initial_state(cfg, &spec)?;
            let traj = integrate_geodesic_with(&spec, start.q, start.v, cfg.t.unwrap_or(10.0), cfg.integrator())?;
            let run = propagate_jacobi(&traj)?;
            let mut conj = Table::new("conjugate_points", &["index", "t_star"]);
            for (i, t) in run.conjugate_points.iter().enumerate() {
                conj.push(vec![i.to_string(), fmt_f(*t)]);
            }
            let summary = one_row(
                "jacobi_summary",
                &[
                    ("t_end", fmt_f(traj.end_time())),
                    ("truncated", traj.truncated.to_string()),
                    ("first_conjugate", fmt_opt(run.first_conjugate())),
                    ("det_min", fmt_f(run.det_min)),
                ],
            );
            Ok(vec![traj.to_table("trajectory"), run.to_table("jacobi"), conj, summary])
        }
        "riccati-stable" => {
            let spec = cfg.metric_spec()?;
            let start = initial_state(cfg, &spec)?;
            let anchor = cfg.anchor.or(cfg.t).unwrap_or(DEFAULT_ANCHOR);
            let traj = integrate_geodesic_with(&spec, start.q, start.v, 2.0 * anchor, cfg.integrator())?;
            if traj.truncated {
                return Err(Error::Integration {
                    time: traj.end_time(),
                    reason: "geodesic left the chart before twice the anchor".into(),
                });
            }
            let st = stable_tensor(&traj, anchor)?;
            let u = st.value;
            let summary = one_row(
                "stable_tensor",
                &[
                    ("anchor", fmt_f(anchor)),
                    ("u11", fmt_f(u[(0, 0)])),
                    ("u12", fmt_f(u[(0, 1)])),
                    ("u21", fmt_f(u[(1, 0)])),
                    ("u22", fmt_f(u[(1, 1)])),
                    ("discrepancy", fmt_f(st.discrepancy)),
                    ("trace_quantity", fmt_f(st.run.trace_quantity())),
                ],
            );
            Ok(vec![st.run.to_table("riccati"), summary])
        }
        "riccati-average" => {
            let spec = cfg.metric_spec()?;
            let avg = riccati_average(
                &spec,
                &VerticalSampler::Box(cfg.sample_box()?),
                &AverageOptions {
                    n: n(100),
                    seed: cfg.seed,
                    anchor: cfg.anchor.unwrap_or(DEFAULT_ANCHOR),
                    step: cfg.step,
                },
            )?;
            let summary = one_row(
                "riccati_average_summary",
                &[
                    ("mean", fmt_f(avg.mean)),
                    ("std_error", fmt_f(avg.std_error)),
                    ("accepted", avg.accepted.to_string()),
                    ("rejected", avg.rejected.to_string()),
                ],
            );
            Ok(vec![avg.to_table(), summary])
        }
        "busemann" => {
            let spec = cfg.metric_spec()?;
            let l = product_length(&spec)?;
            let x = ProductPoint::new(cfg.x0.unwrap_or(0.0), cfg.y0.unwrap_or(1.0), cfg.t0.unwrap_or(0.0))
                .map_err(|e| Error::value("y0", e.to_string()))?;
            let mut sweep = Table::new("busemann", &["s", "b_s"]);
            for k in 1..=10 {
                let s = 30.0 * k as f64 + (x.t * l).abs();
                sweep.push(vec![fmt_f(s), fmt_f(busemann_estimate(l, &x, s)?)]);
            }
            let g = busemann_gradient(l, &x, None)?;
            let h = busemann_hessian(l, &x, None)?;
            let summary = one_row(
                "busemann_derivatives",
                &[
                    ("b", fmt_f(busemann(l, &x)?)),
                    ("grad_x", fmt_f(g.gradient[0])),
                    ("grad_y", fmt_f(g.gradient[1])),
                    ("grad_t", fmt_f(g.gradient[2])),
                    ("grad_norm", fmt_f(g.norm)),
                    ("fiber_alignment", fmt_f(g.fiber_alignment)),
                    ("hess_11", fmt_f(h.horizontal[(0, 0)])),
                    ("hess_12", fmt_f(h.horizontal[(0, 1)])),
                    ("hess_22", fmt_f(h.horizontal[(1, 1)])),
                    ("hess_vv", fmt_f(h.vertical)),
                    ("hess_mixed", fmt_f(h.mixed)),
                ],
            );
            Ok(vec![sweep, summary])
        }
        "volume-growth" => {
            let r_max = cfg.r_max.unwrap_or(30.0);
            let kappa = cfg.kappa.unwrap_or(1.0);
            let h = volume_entropy_scaled(r_max, kappa)?;
            let summary = one_row(
                "volume_entropy",
                &[
                    ("R_max", fmt_f(r_max)),
                    ("kappa", fmt_f(kappa)),
                    ("estimate", fmt_f(h.estimate)),
                    ("raw_ratio", fmt_f(h.raw_ratio)),
                    ("prefactor_exponent", fmt_f(h.prefactor_exponent)),
                ],
            );
            Ok(vec![volume_growth_table(r_max, kappa, n(30))?, summary])
        }
        "spectrum" => {
            let file = cfg
                .spectrum_file
                .as_deref()
                .ok_or_else(|| Error::value("spectrum_file", "required for this job"))?;
            let sig = SigmaSpectrum::read(&cfg.resolve(&ctx.base_dir, file))?;
            let l = cfg.l.unwrap_or(1.0);
            let entries = product_spectrum(&sig, l, cfg.cutoff.unwrap_or(50.0))?;
            let gap = one_row(
                "spectral_gap",
                &[("L", fmt_f(l)), ("gap", fmt_f(spectral_gap(&sig, l)?))],
            );
            Ok(vec![spectrum_table(&entries), gap])
        }
        "length-spectrum" => {
            let file = cfg
                .generators_file
                .as_deref()
                .ok_or_else(|| Error::value("generators_file", "required for this job"))?;
            let gens = read_generators(&cfg.resolve(&ctx.base_dir, file))?;
            let entries = enumerate_length_spectrum(
                &gens,
                cfg.max_word.unwrap_or(4),
                cfg.l.unwrap_or(1.0),
                cfg.n_max.unwrap_or(1),
            )?;
            Ok(vec![length_spectrum_table(&entries)])
        }
        "isoperimetric" => {
            let l = cfg.l.unwrap_or(1.0);
            let r_list = cfg.r_list.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
            let w_list = cfg.w_list.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
            let rows = tube_profiles(l, &r_list, cfg.ell_collar.unwrap_or(2.0), &w_list)?;
            let mut pairs = vec![("L", fmt_f(l)), ("disk_limit_ratio", fmt_f(disk_tube_limit_ratio(l)?))];
            if let Some(v) = cfg.v {
                pairs.push(("v", fmt_f(v)));
                pairs.push(("bound", fmt_f(isoperimetric_bound(v, l)?)));
            }
            Ok(vec![tube_table(&rows), one_row("isoperimetric_summary", &pairs)])
        }
        "curvature-deviation" => {
            let spec = cfg.metric_spec()?;
            let d = curvature_deviation(&spec, &cfg.sample_box()?, n(1000), cfg.seed)?;
            Ok(vec![one_row(
                "curvature_deviation",
                &[
                    ("value", fmt_f(d.value)),
                    ("std_error", fmt_f(d.std_error)),
                    ("N", d.n.to_string()),
                ],
            )])
        }
        "gap-constant" => {
            let (lambda1, l, diam) = (
                required("lambda1", cfg.lambda1)?,
                required("L", cfg.l)?,
                required("diam", cfg.diam)?,
            );
            let (delta, eps0) = epsilon0(lambda1, l, diam)?;
            Ok(vec![one_row(
                "gap_constant",
                &[
                    ("lambda1", fmt_f(lambda1)),
                    ("L", fmt_f(l)),
                    ("diam", fmt_f(diam)),
                    ("delta", fmt_f(delta)),
                    ("eps0", fmt_f(eps0)),
                ],
            )])
        }
        "moduli-dim" => {
            let genus = required("genus", cfg.genus)?;
            let dim = moduli_dimension(genus).map_err(|e| Error::value("genus", e.to_string()))?;
            Ok(vec![one_row(
                "moduli_dim",
                &[("genus", genus.to_string()), ("dimension", dim.to_string())],
            )])
        }
        "ledger" => {
            let opts = LedgerOptions {
                seed: cfg.seed,
                ..Default::default()
            };
            Ok(vec![claims_table(&run_ledger(&opts)?)])
        }
        other => Err(Error::value("job", format!("unknown job `{other}`"))),
    }
}

fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::value(WORKERS_ENV, format!("`{v}` is not a positive integer"))),
        },
    }
}

/// Writes every table as CSV plus `manifest.json`, returning the written paths.
pub fn write_outputs(
    tables: &[Table],
    out_dir: &Path,
    subcommand: &str,
    cfg: &JobConfig,
    workers: usize,
    wall_time: f64,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut paths = Vec::with_capacity(tables.len() + 1);
    for t in tables {
        paths.push(t.write_csv(out_dir)?);
    }
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": subcommand,
        "seed": cfg.seed,
        "config": cfg.to_json(),
        "outputs": tables.iter().map(|t| t.file_name()).collect::<Vec<_>>(),
        "workers": workers,
        "wall_time_seconds": wall_time,
    });
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    paths.push(path);
    Ok(paths)
}

fn execute(command: &Command) -> Result<()> {
    let (name, common) = command.parts();
    let started = Instant::now();
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None if name == "ledger" => crate::config::parse_config("")?,
        None => return Err(Error::value("config", "--config is required")),
    };
    if let Some(job) = &cfg.job {
        if job != name {
            return Err(Error::value("job", format!("config is for `{job}`, not `{name}`")));
        }
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let base_dir = common
        .config
        .as_deref()
        .and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let ctx = Context { base_dir };

    let workers = workers_from_env()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::value(WORKERS_ENV, e.to_string()))?;
    let tables = pool.install(|| run_job(name, &cfg, &ctx))?;
    let paths = write_outputs(
        &tables,
        &common.out,
        name,
        &cfg,
        pool.current_num_threads(),
        started.elapsed().as_secs_f64(),
    )?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                3
            }
        }
    }
}
