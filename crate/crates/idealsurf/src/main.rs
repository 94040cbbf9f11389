//! Command-line entry point: curvature analysis, variation checks, gradient
//! flow, estimate audits, oracle sampling, and convergence studies, all
//! emitting deterministic JSON reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use serde_json::{json, Value};

use idealsurf::config::{parse_config, Config};
use idealsurf::flow::{FlowConfig, Verdict};
use idealsurf::mesh::{load_mesh, write_obj, Mesh};
use idealsurf::oracle::{CurvatureSample, ParametricSurface};
use idealsurf::{audit, energy, flow, meshgen, ops, report, Error};

#[derive(Parser)]
#[command(
    name = "idealsurf",
    version,
    about = "Curvature-energy analysis, gradient flow, and integral-estimate audits"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Curvature, energy, Euler-Lagrange residual, and boundary residuals.
    Analyze(AnalyzeArgs),
    /// Compare the analytic first variation against centered differences.
    VariationCheck(VariationArgs),
    /// Run the L2 gradient flow with snapshots and histories.
    Flow(FlowArgs),
    /// Cutoff, Sobolev, exact-identity, and inequality-chain audits.
    Audit(AuditArgs),
    /// Generate an oracle mesh with exact-field sidecars.
    Sample(SampleArgs),
    /// Repeat an analysis across a resolution ladder and report orders.
    Convergence(ConvergenceArgs),
}

/// Mesh source shared by all subcommands: an OBJ file or a named surface
/// family (exactly one of the two).
#[derive(Args, Clone)]
struct InputArgs {
    /// Path to an OBJ mesh.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Surface family: plane | sphere | cylinder | flat-disk |
    /// perturbed-disk | graph:<polynomial in u, v>.
    #[arg(long)]
    surface: Option<String>,
    /// Samples per chart direction.
    #[arg(long)]
    resolution: Option<usize>,
    /// Radius / scale parameter of the surface family.
    #[arg(long)]
    r: Option<f64>,
    /// Bump amplitude for perturbed-disk.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VariationArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of random probes.
    #[arg(long)]
    probes: Option<usize>,
    /// RNG seed; fixed seed means byte-identical reports.
    #[arg(long)]
    seed: Option<u64>,
    /// Acceptable relative mismatch per probe.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Time step (length^6 scale) or `auto`.
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Stop threshold on sup|A0|.
    #[arg(long)]
    tol_a0: Option<f64>,
    /// Stop threshold on the energy F.
    #[arg(long)]
    tol_f: Option<f64>,
    /// Snapshot period in steps (0 disables).
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// Output directory for report, histories, and snapshots.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Cutoff radius; `inf` for the gamma = 1 sentinel.
    #[arg(long)]
    rho: Option<String>,
    /// Cutoff power p.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory for mesh.obj and fields.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Quantity to track: energy | el.
    #[arg(long, default_value = "energy")]
    what: String,
    /// Comma-separated resolution ladder.
    #[arg(long, default_value = "32,64,128")]
    resolutions: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    if let Some(threads) = std::env::var_os("IDEALSURF_THREADS") {
        match threads.to_string_lossy().parse::<usize>() {
            // The pipeline is single-threaded, which satisfies any cap >= 1.
            Ok(n) if n >= 1 => {}
            _ => {
                eprintln!("error: IDEALSURF_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Analyze(a) => cmd_analyze(a),
        Cmd::VariationCheck(a) => cmd_variation(a),
        Cmd::Flow(a) => cmd_flow(a),
        Cmd::Audit(a) => cmd_audit(a),
        Cmd::Sample(a) => cmd_sample(a),
        Cmd::Convergence(a) => cmd_convergence(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type CliResult = Result<u8, Error>;

struct Input {
    mesh: Mesh,
    samples: Option<Vec<CurvatureSample>>,
    surface: Option<ParametricSurface>,
    echo: Value,
}

impl InputArgs {
    fn load_config(&self) -> Result<Config, Error> {
        match &self.config {
            None => Ok(Config::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                parse_config(&text)
            }
        }
    }

    fn resolve(&self) -> Result<Input, Error> {
        let cfg = self.load_config()?;
        let resolution = self
            .resolution
            .or(cfg.get_usize("surface.resolution")?)
            .unwrap_or(32);
        let r = self.r.or(cfg.get_f64("surface.r")?).unwrap_or(1.0);
        let amplitude = self
            .amplitude
            .or(cfg.get_f64("surface.amplitude")?)
            .unwrap_or(0.01);
        let surface_name = self
            .surface
            .clone()
            .or_else(|| cfg.get("surface.family").map(String::from));

        match (&self.input, surface_name) {
            (Some(_), Some(_)) => Err(Error::Config(
                "exactly one of --input and --surface must be given".into(),
            )),
            (None, None) => Err(Error::Config(
                "an input source is required: --input <obj> or --surface <family>".into(),
            )),
            (Some(path), None) => Ok(Input {
                mesh: load_mesh(path)?,
                samples: None,
                surface: None,
                echo: json!({
                    "input": path.display().to_string(),
                }),
            }),
            (None, Some(name)) => {
                let echo = json!({
                    "surface": name,
                    "resolution": resolution,
                    "r": r,
                });
                let oracle = |surf: ParametricSurface| -> Result<Input, Error> {
                    let (mesh, samples) = surf.sample_mesh(resolution)?;
                    Ok(Input {
                        mesh,
                        samples: Some(samples),
                        surface: Some(surf),
                        echo: echo.clone(),
                    })
                };
                match name.as_str() {
                    "plane" => oracle(ParametricSurface::plane_disk(r)),
                    "sphere" => oracle(ParametricSurface::sphere(r)),
                    "cylinder" => oracle(ParametricSurface::cylinder(r)),
                    "flat-disk" => Ok(Input {
                        mesh: meshgen::flat_disk(r, resolution)?,
                        samples: None,
                        surface: None,
                        echo,
                    }),
                    "perturbed-disk" => Ok(Input {
                        mesh: meshgen::perturbed_disk(r, resolution, amplitude)?,
                        samples: None,
                        surface: None,
                        echo: json!({
                            "surface": "perturbed-disk",
                            "resolution": resolution,
                            "r": r,
                            "amplitude": amplitude,
                        }),
                    }),
                    other => match other.strip_prefix("graph:") {
                        Some(expr) => oracle(ParametricSurface::graph_disk(expr, r)?),
                        None => Err(Error::Config(format!("unknown surface family {other:?}"))),
                    },
                }
            }
        }
    }
}

fn emit(value: &Value, out: Option<&Path>) -> Result<(), Error> {
    match out {
        None => {
            print!("{}", report::to_pretty_string(value));
            Ok(())
        }
        Some(path) => report::write_report(value, path),
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> CliResult {
    let input = args.input.resolve()?;
    let analysis = energy::analyze(&input.mesh)?;
    let e = energy::energy(&input.mesh, &analysis);
    let boundary = ops::boundary_residuals(&input.mesh, &analysis.curvature, &analysis.derived);
    let (b_a, b_h, b_lap) = boundary.overall_max();
    let el_max = input
        .mesh
        .interior_vertices()
        .map(|v| analysis.derived.el[v].abs())
        .fold(0.0, f64::max);
    let payload = json!({
        "F": e.f,
        "A2": e.a2,
        "A02": e.a02,
        "H2": e.h2,
        "area": e.area,
        "el_max_interior": el_max,
        "boundary_residuals": {
            "A_norm_max": b_a,
            "grad_eta_H_max": b_h,
            "grad_eta_lapH_max": b_lap,
        },
        "num_vertices": input.mesh.num_vertices(),
    });
    emit(&report::report(&input.echo, payload), args.out.as_deref())?;
    Ok(0)
}

fn cmd_variation(args: VariationArgs) -> CliResult {
    let cfg = args.input.load_config()?;
    let input = args.input.resolve()?;
    let probes = args.probes.or(cfg.get_usize("variation.probes")?).unwrap_or(10);
    let seed = args
        .seed
        .or(cfg.get_usize("variation.seed")?.map(|s| s as u64))
        .unwrap_or(0);
    let tol = args.tol.or(cfg.get_f64("variation.tol")?).unwrap_or(0.05);

    let epsilon = 1e-4 * input.mesh.diameter();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..probes {
        let probe = energy::random_normal_probe(&input.mesh, seed + i as u64, epsilon);
        let analytic = energy::first_variation(&input.mesh, &probe)?;
        let fd = energy::finite_difference_variation(&input.mesh, &probe)?;
        let rel = (analytic.total - fd).abs() / fd.abs().max(1e-30);
        worst = worst.max(rel);
        rows.push(json!({
            "probe": i,
            "analytic": analytic.total,
            "interior": analytic.interior,
            "boundary": analytic.boundary,
            "finite_difference": fd,
            "relative_error": rel,
        }));
    }
    let ok = worst <= tol;
    let payload = json!({
        "probes": rows,
        "worst_relative_error": worst,
        "tolerance": tol,
        "pass": ok,
    });
    emit(&report::report(&input.echo, payload), args.out.as_deref())?;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_flow(args: FlowArgs) -> CliResult {
    let cfg = args.input.load_config()?;
    let input = args.input.resolve()?;
    let dt_raw = args.dt.or_else(|| cfg.get("flow.dt").map(String::from));
    let dt = match dt_raw.as_deref() {
        None | Some("auto") => None,
        Some(s) => Some(s.parse::<f64>().map_err(|_| {
            Error::Config(format!("--dt expects a number or `auto`, got {s:?}"))
        })?),
    };
    let mut config = FlowConfig::default();
    config.dt = dt;
    if let Some(v) = args.max_steps.or(cfg.get_usize("flow.max-steps")?) {
        config.max_steps = v;
    }
    if let Some(v) = args.tol_a0.or(cfg.get_f64("flow.tol-a0")?) {
        config.stop_a0 = v;
    }
    if let Some(v) = args.tol_f.or(cfg.get_f64("flow.tol-f")?) {
        config.stop_f = v;
    }
    if let Some(v) = args
        .snapshot_every
        .or(cfg.get_usize("flow.snapshot-every")?)
    {
        config.snapshot_every = v;
    }

    let out = args.out.clone();
    let (state, verdict) = flow::run_flow_with(input.mesh, &config, |s| {
        if let Some(dir) = &out {
            write_obj(&s.mesh, dir.join(format!("snapshot_{:05}.obj", s.step)))?;
        }
        Ok(())
    })?;

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let mut csv = String::from("step,F,A2,supA0\n");
        for (i, f) in state.f_history.iter().enumerate() {
            csv.push_str(&format!(
                "{i},{f:.16e},{:.16e},{:.16e}\n",
                state.smallness_history[i], state.a0sup_history[i]
            ));
        }
        std::fs::write(dir.join("history.csv"), csv).map_err(|source| Error::Io {
            path: dir.join("history.csv").display().to_string(),
            source,
        })?;
        write_obj(&state.mesh, dir.join("final.obj"))?;
    }

    let planarity = flow::planarity_test(&state.mesh, config.stop_a0)?;
    let payload = json!({
        "verdict": verdict.label(),
        "verdict_detail": match &verdict {
            Verdict::Planar => Value::Null,
            Verdict::NotConverged { reason } => Value::from(reason.clone()),
            Verdict::Diverged { step } => Value::from(format!("diverged at step {step}")),
        },
        "steps": state.step,
        "final_F": state.f_history.last().copied(),
        "final_supA0": state.a0sup_history.last().copied(),
        "final_A2": state.smallness_history.last().copied(),
        "planarity": report::to_value(&planarity)?,
    });
    let full = report::report(&input.echo, payload);
    match &args.out {
        Some(dir) => report::write_report(&full, dir.join("report.json"))?,
        None => print!("{}", report::to_pretty_string(&full)),
    }
    Ok(if verdict == Verdict::Planar { 0 } else { 1 })
}

fn cmd_audit(args: AuditArgs) -> CliResult {
    let cfg = args.input.load_config()?;
    let input = args.input.resolve()?;
    let rho_raw = args
        .rho
        .or_else(|| cfg.get("audit.rho").map(String::from))
        .unwrap_or_else(|| "inf".into());
    let rho = if rho_raw == "inf" {
        f64::INFINITY
    } else {
        rho_raw
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("--rho expects a number or `inf`, got {rho_raw:?}")))?
    };
    let p = args.p.or(cfg.get_f64("audit.p")?).unwrap_or(4.0);

    let n = input.mesh.num_vertices() as f64;
    let center: Vector3<f64> =
        input.mesh.positions().iter().sum::<Vector3<f64>>() / n;
    let gamma = audit::make_cutoff(&input.mesh, center, rho, p);

    // Sobolev corpus: constant, coordinate, cutoff, and curvature fields.
    let curv = ops::discrete_curvature(&input.mesh)?;
    let fields: Vec<(&str, Vec<f64>)> = vec![
        ("constant", vec![1.0; input.mesh.num_vertices()]),
        ("x", input.mesh.positions().iter().map(|q| q.x).collect()),
        ("cutoff", gamma.values.clone()),
        ("H", curv.h.clone()),
    ];
    let mut sobolev = serde_json::Map::new();
    let mut violated = false;
    for (name, u) in &fields {
        let rep = audit::ms_sobolev_check(&input.mesh, u)?;
        violated |= rep.violated;
        sobolev.insert((*name).into(), report::to_value(&rep)?);
    }

    // On analytic surfaces the exact identity is audited with the oracle's
    // chart-exact fields; on imported meshes, with the discrete estimators.
    let identity = match &input.samples {
        Some(samples) => audit::lemma41_identity_analytic(&input.mesh, samples, &gamma)?,
        None => audit::lemma41_identity(&input.mesh, &gamma)?,
    };
    let chain = audit::lemma_chain_audit(&input.mesh, &gamma)?;
    let mut lemmas = serde_json::Map::new();
    lemmas.insert("4.1".into(), report::to_value(&identity)?);
    for rec in &chain {
        lemmas.insert(rec.lemma.clone(), report::to_value(rec)?);
    }

    let payload = json!({
        "cutoff": {
            "rho": if rho.is_infinite() { Value::from("inf") } else { Value::from(rho) },
            "p": p,
            "c_gamma": gamma.c_gamma,
            "measured_max_grad": gamma.max_grad,
            "measured_max_lap": gamma.max_lap,
        },
        "sobolev": Value::Object(sobolev),
        "lemmas": Value::Object(lemmas),
    });
    emit(&report::report(&input.echo, payload), args.out.as_deref())?;
    Ok(if violated { 1 } else { 0 })
}

fn cmd_sample(args: SampleArgs) -> CliResult {
    let input = args.input.resolve()?;
    let Some(samples) = &input.samples else {
        return Err(Error::Config(
            "sample requires an analytic --surface family".into(),
        ));
    };
    std::fs::create_dir_all(&args.out).map_err(|source| Error::Io {
        path: args.out.display().to_string(),
        source,
    })?;
    write_obj(&input.mesh, args.out.join("mesh.obj"))?;
    let rows: Vec<Value> = samples
        .iter()
        .map(|s| {
            json!({
                "H": s.h,
                "kappa1": s.kappa1,
                "kappa2": s.kappa2,
                "A2": s.a_norm2,
                "A02": s.a0_norm2,
                "grad_H_norm2": s.grad_h_norm2,
                "lap_H": s.lap_h,
                "bilap_H": s.bilap_h,
                "el": s.el_residual,
            })
        })
        .collect();
    let payload = json!({ "fields": rows });
    report::write_report(
        &report::report(&input.echo, payload),
        args.out.join("fields.json"),
    )?;
    Ok(0)
}

fn cmd_convergence(args: ConvergenceArgs) -> CliResult {
    let ladder: Vec<usize> = args
        .resolutions
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad resolution {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    if ladder.len() < 2 {
        return Err(Error::Config("need at least two resolutions".into()));
    }

    let mut errors = Vec::new();
    let mut echo = Value::Null;
    for &res in &ladder {
        let mut inp = args.input.clone();
        inp.resolution = Some(res);
        let input = inp.resolve()?;
        echo = input.echo.clone();
        let err = match args.what.as_str() {
            "energy" => {
                let surf = input.surface.as_ref().ok_or_else(|| {
                    Error::Config("energy convergence requires an analytic --surface".into())
                })?;
                let exact = surf.energy_quadrature(1024)?;
                let analysis = energy::analyze(&input.mesh)?;
                (energy::energy(&input.mesh, &analysis).f - exact).abs()
            }
            "el" => {
                let samples = input.samples.as_ref().ok_or_else(|| {
                    Error::Config("el convergence requires an analytic --surface".into())
                })?;
                let analysis = energy::analyze(&input.mesh)?;
                el_l2_error(&input.mesh, &analysis.derived.el, samples)
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown convergence target {other:?} (energy | el)"
                )))
            }
        };
        errors.push((res, err));
    }
    let orders: Vec<f64> = errors
        .windows(2)
        .map(|w| {
            let h_ratio = w[1].0 as f64 / w[0].0 as f64;
            (w[0].1 / w[1].1).ln() / h_ratio.ln()
        })
        .collect();
    let payload = json!({
        "what": args.what,
        "ladder": errors.iter().map(|&(r, e)| json!({"resolution": r, "error": e})).collect::<Vec<_>>(),
        "observed_orders": orders,
    });
    emit(&report::report(&echo, payload), args.out.as_deref())?;
    Ok(0)
}

/// L2 error of the discrete Euler-Lagrange density against the oracle over
/// the geometric interior (80% of the max in-plane radius), away from the
/// rim where the one-sided stencils degrade.
fn el_l2_error(mesh: &Mesh, el: &[f64], samples: &[CurvatureSample]) -> f64 {
    let center: Vector3<f64> =
        mesh.positions().iter().sum::<Vector3<f64>>() / mesh.num_vertices() as f64;
    let rmax = mesh
        .positions()
        .iter()
        .map(|p| (p - center).xy().norm())
        .fold(0.0, f64::max);
    let mut acc = 0.0;
    for v in mesh.interior_vertices() {
        if (mesh.position(v) - center).xy().norm() <= 0.8 * rmax {
            acc += (el[v] - samples[v].el_residual).powi(2) * mesh.vertex_area(v);
        }
    }
    acc.sqrt()
}
