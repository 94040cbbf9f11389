//! Acceptance suite: one pass/fail line per criterion.
//!
//! Each criterion runs in isolation; failures are collected so every line is
//! printed even when an early criterion fails. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines as they
//! complete.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use idealsurf::flow::{planarity_test, run_flow, FlowConfig, FlowState, Verdict};
use idealsurf::mesh::Mesh;
use idealsurf::oracle::{CurvatureSample, Domain, ParametricSurface};
use idealsurf::{audit, energy, meshgen, ops};

// ---------------------------------------------------------------------------
// helpers

fn assert_close(label: &str, got: f64, want: f64, rel: f64) {
    let err = (got - want).abs() / want.abs().max(1e-30);
    assert!(
        err <= rel,
        "{label}: got {got}, want {want} (rel err {err:.3e} > {rel:.1e})"
    );
}

fn random_domain_point(surf: &ParametricSurface, rng: &mut ChaCha8Rng) -> (f64, f64) {
    match surf.domain {
        Domain::Rect { u: (u0, u1), v: (v0, v1) } => {
            (rng.gen_range(u0..u1), rng.gen_range(v0..v1))
        }
        Domain::Disk { radius } => loop {
            let u = rng.gen_range(-radius..radius);
            let v = rng.gen_range(-radius..radius);
            if u * u + v * v < radius * radius {
                break (u, v);
            }
        },
    }
}

/// `I[f]` L² error against the oracle over the geometric interior
/// (cylindrical radius ≤ 0.8 of the footprint), where the composed
/// bilaplacian is free of boundary pollution.
fn el_l2_error(mesh: &Mesh, el: &[f64], samples: &[CurvatureSample]) -> f64 {
    let n = mesh.num_vertices() as f64;
    let center: Vector3<f64> = mesh.positions().iter().sum::<Vector3<f64>>() / n;
    let rmax = mesh
        .positions()
        .iter()
        .map(|p| (p - center).xy().norm())
        .fold(0.0f64, f64::max);
    let mut acc = 0.0;
    let mut area = 0.0;
    for v in mesh.interior_vertices() {
        if (mesh.position(v) - center).xy().norm() <= 0.8 * rmax {
            let a = mesh.vertex_area(v);
            acc += (el[v] - samples[v].el_residual).powi(2) * a;
            area += a;
        }
    }
    (acc / area.max(1e-300)).sqrt()
}

fn flowed_disk(res: usize) -> (FlowState, Verdict) {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<usize, (FlowState, Verdict)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(res)
        .or_insert_with(|| {
            let mesh = meshgen::perturbed_disk(1.0, res, 0.01).unwrap();
            run_flow(mesh, &FlowConfig::default()).unwrap()
        })
        .clone()
}

// ---------------------------------------------------------------------------
// criteria

/// Exact-oracle Euler-Lagrange and Simons residuals on closed-form surfaces.
fn criterion_1() {
    let t0 = Instant::now();
    let surfaces: Vec<(String, ParametricSurface)> = vec![
        ("plane".into(), ParametricSurface::plane_disk(1.0)),
        ("sphere r=0.5".into(), ParametricSurface::sphere(0.5)),
        ("sphere r=1".into(), ParametricSurface::sphere(1.0)),
        ("sphere r=2".into(), ParametricSurface::sphere(2.0)),
        ("cylinder r=0.5".into(), ParametricSurface::cylinder(0.5)),
        ("cylinder r=1".into(), ParametricSurface::cylinder(1.0)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for (name, surf) in &surfaces {
        for _ in 0..100 {
            let (u, v) = random_domain_point(surf, &mut rng);
            let s = surf.exact_curvature(u, v).unwrap();
            assert!(
                s.el_residual.abs() <= 1e-10,
                "{name}: I[f] = {:.3e} at ({u}, {v})",
                s.el_residual
            );
            let simons = surf.simons_residual(u, v).unwrap();
            assert!(
                simons.abs() <= 1e-8,
                "{name}: Simons residual = {simons:.3e} at ({u}, {v})"
            );
        }
    }
    assert!(t0.elapsed().as_secs() < 10, "runtime {:?}", t0.elapsed());
}

/// First-variation formula against centered finite differences, plus
/// linearity of the analytic side in the probe.
fn criterion_2() {
    let t0 = Instant::now();
    let surf = ParametricSurface::graph_disk("u^3", 1.0).unwrap();
    let (mesh, _) = surf.sample_mesh(64).unwrap();
    let eps = 1e-4 * mesh.diameter();
    let analysis = energy::analyze(&mesh).unwrap();
    for seed in 0..10u64 {
        let probe = energy::random_normal_probe(&mesh, seed, eps);
        assert!(probe.compactly_supported(&mesh), "seed {seed}");
        let analytic = energy::first_variation_with(&mesh, &analysis, &probe)
            .unwrap()
            .total;
        let fd = energy::finite_difference_variation(&mesh, &probe).unwrap();
        let rel = (analytic - fd).abs() / fd.abs().max(1e-30);
        assert!(
            rel <= 0.05,
            "seed {seed}: analytic {analytic} vs fd {fd} (rel {rel:.3})"
        );
    }
    // Linearity of the analytic first variation.
    let p1 = energy::random_normal_probe(&mesh, 100, eps);
    let p2 = energy::random_normal_probe(&mesh, 200, eps);
    let (a, b) = (0.6, -2.1);
    let combo = energy::VariationProbe {
        phi: (0..mesh.num_vertices())
            .map(|v| p1.phi[v] * a + p2.phi[v] * b)
            .collect(),
        epsilon: eps,
    };
    let v1 = energy::first_variation_with(&mesh, &analysis, &p1).unwrap().total;
    let v2 = energy::first_variation_with(&mesh, &analysis, &p2).unwrap().total;
    let vc = energy::first_variation_with(&mesh, &analysis, &combo)
        .unwrap()
        .total;
    assert_close("linearity", vc, a * v1 + b * v2, 1e-10);
    assert!(t0.elapsed().as_secs() < 120, "runtime {:?}", t0.elapsed());
}

/// Rigidity experiment: a bumped disk under the clamp-collar flow returns to
/// the plane.
fn criterion_3() {
    let t0 = Instant::now();
    let mesh = meshgen::perturbed_disk(1.0, 70, 0.01).unwrap();
    assert!(mesh.num_vertices() >= 5000, "{} vertices", mesh.num_vertices());
    let analysis = energy::analyze(&mesh).unwrap();
    let smallness = energy::energy(&mesh, &analysis).a2;
    assert!(smallness <= 1e-2, "initial smallness {smallness:.3e}");

    let (state, verdict) = run_flow(mesh, &FlowConfig::default()).unwrap();
    assert_eq!(verdict, Verdict::Planar, "verdict {}", verdict.label());
    assert!(state.step <= 5000, "{} steps", state.step);
    let f_end = *state.f_history.last().unwrap();
    let a0_end = *state.a0sup_history.last().unwrap();
    assert!(f_end <= 1e-10, "final F = {f_end:.3e}");
    assert!(a0_end <= 1e-3, "final sup|A0| = {a0_end:.3e}");
    let down = state
        .f_history
        .windows(2)
        .filter(|w| w[1] <= w[0])
        .count() as f64
        / (state.f_history.len() - 1).max(1) as f64;
    assert!(down >= 0.95, "F non-increasing at only {:.1}% of steps", 100.0 * down);
    assert!(t0.elapsed().as_secs() < 300, "runtime {:?}", t0.elapsed());
}

/// Planarity test separates flat/flowed disks from the sphere, rejecting the
/// sphere through the plane-distance prong.
fn criterion_4() {
    let tol = 1e-3;
    let flat = meshgen::flat_disk(1.0, 32).unwrap();
    let r = planarity_test(&flat, tol).unwrap();
    assert!(r.planar, "flat disk rejected: {r:?}");

    let (state, verdict) = flowed_disk(32);
    assert_eq!(verdict, Verdict::Planar);
    let r = planarity_test(&state.mesh, tol).unwrap();
    assert!(r.planar, "flowed disk rejected: {r:?}");

    // Fine enough that the discrete umbilicity noise sits below `tol`, so the
    // sphere is rejected by geometry (plane distance), not estimator error.
    let sphere = meshgen::icosphere(1.0, 5).unwrap();
    let r = planarity_test(&sphere, tol).unwrap();
    assert!(!r.planar, "sphere accepted: {r:?}");
    assert!(
        r.sup_a0 <= tol && r.plane_distance > tol,
        "sphere must fail via the plane-distance prong: {r:?}"
    );
}

/// Michael-Simon Sobolev inequality over a mesh/field corpus.
fn criterion_5() {
    let t0 = Instant::now();
    let meshes: Vec<(String, Mesh)> = vec![
        ("flat disk".into(), meshgen::flat_disk(1.0, 16).unwrap()),
        (
            "perturbed disk".into(),
            meshgen::perturbed_disk(1.0, 24, 0.05).unwrap(),
        ),
        ("icosphere".into(), meshgen::icosphere(1.0, 3).unwrap()),
        (
            "sphere chart".into(),
            ParametricSurface::sphere(2.0).sample_mesh(24).unwrap().0,
        ),
        (
            "graph bowl".into(),
            ParametricSurface::graph_disk("0.25u^2 + 0.25v^2", 1.0)
                .unwrap()
                .sample_mesh(32)
                .unwrap()
                .0,
        ),
    ];
    let mut fields = 0usize;
    for (name, mesh) in &meshes {
        let curv = ops::discrete_curvature(mesh).unwrap();
        let centroid: Vector3<f64> =
            mesh.positions().iter().sum::<Vector3<f64>>() / mesh.num_vertices() as f64;
        let gamma = audit::make_cutoff(mesh, centroid, 0.4 * mesh.diameter(), 4.0);
        let candidates: Vec<(&str, Vec<f64>)> = vec![
            ("constant", vec![1.0; mesh.num_vertices()]),
            ("x", mesh.positions().iter().map(|p| p.x).collect()),
            ("y", mesh.positions().iter().map(|p| p.y).collect()),
            ("cutoff", gamma.values.clone()),
            ("H", curv.h.clone()),
        ];
        for (field, u) in candidates {
            let rep = audit::ms_sobolev_check(mesh, &u).unwrap();
            assert!(
                !rep.violated && rep.ratio <= 1.0,
                "{name}/{field}: ratio {:.3e}",
                rep.ratio
            );
            fields += 1;
        }
    }
    assert!(fields >= 20, "only {fields} corpus fields");
    assert!(t0.elapsed().as_secs() < 30, "runtime {:?}", t0.elapsed());
}

/// Lemma 4.1 exact identity: closed CMC samples with γ ≡ 1, and monotone
/// residual decay on the flowed disk ladder with ρ = diameter, p = 4.
fn criterion_6() {
    for (r, res) in [(1.0, 24usize), (2.0, 24)] {
        let surf = ParametricSurface::sphere(r);
        let (mesh, samples) = surf.sample_mesh(res).unwrap();
        let centroid: Vector3<f64> =
            mesh.positions().iter().sum::<Vector3<f64>>() / mesh.num_vertices() as f64;
        let gamma = audit::make_cutoff(&mesh, centroid, f64::INFINITY, 4.0);
        let rec = audit::lemma41_identity_analytic(&mesh, &samples, &gamma).unwrap();
        let residual = rec.identity_residual.unwrap();
        assert!(residual <= 1e-3, "sphere r={r}: residual {residual:.3e}");
    }

    let mut residuals = Vec::new();
    for res in [32usize, 64, 128] {
        let (state, verdict) = flowed_disk(res);
        assert_eq!(verdict, Verdict::Planar, "res {res}");
        let mesh = &state.mesh;
        let centroid: Vector3<f64> =
            mesh.positions().iter().sum::<Vector3<f64>>() / mesh.num_vertices() as f64;
        let gamma = audit::make_cutoff(mesh, centroid, mesh.diameter(), 4.0);
        let rec = audit::lemma41_identity(mesh, &gamma).unwrap();
        residuals.push(rec.identity_residual.unwrap());
    }
    assert!(
        residuals[1] < residuals[0] && residuals[2] < residuals[1],
        "residual ladder not monotone: {residuals:?}"
    );
}

/// Discrete convergence: energy order ≥ 1 on the graph bowl, monotone I[f]
/// L² decay on the cubic graph.
fn criterion_7() {
    let bowl = ParametricSurface::graph_disk("0.25u^2 + 0.25v^2", 1.0).unwrap();
    let oracle = bowl.energy_quadrature(1024).unwrap();
    let mut errs = Vec::new();
    for res in [32usize, 64, 128] {
        let (mesh, _) = bowl.sample_mesh(res).unwrap();
        let analysis = energy::analyze(&mesh).unwrap();
        let f = energy::energy(&mesh, &analysis).f;
        errs.push((f - oracle).abs().max(1e-300));
    }
    let order = (errs[0] / errs[2]).ln() / 4f64.ln();
    assert!(order >= 1.0, "energy order {order:.2} (errors {errs:?})");

    let cubic = ParametricSurface::graph_disk("u^3", 1.0).unwrap();
    let mut l2 = Vec::new();
    for res in [32usize, 64, 128] {
        let (mesh, samples) = cubic.sample_mesh(res).unwrap();
        let analysis = energy::analyze(&mesh).unwrap();
        l2.push(el_l2_error(&mesh, &analysis.derived.el, &samples));
    }
    assert!(
        l2[1] < l2[0] && l2[2] < l2[1],
        "I[f] L2 ladder not monotone: {l2:?}"
    );
}

/// Invariance battery: rigid-motion invariance and scaling covariance of the
/// curvature and Euler-Lagrange estimators.
fn criterion_8() {
    // Closed, chart-with-boundary, and graph topology. All three are
    // shape-regular: the sixth-order operator amplifies position roundoff by
    // the square of the stencil conditioning, so sliver corners or chart
    // poles would push pure-roundoff noise past the invariance tolerance.
    let meshes: Vec<(String, Mesh)> = vec![
        ("icosphere".into(), meshgen::icosphere(1.0, 3).unwrap()),
        (
            "cylinder chart".into(),
            ParametricSurface::cylinder(1.0).sample_mesh(24).unwrap().0,
        ),
        (
            "cubic graph".into(),
            ParametricSurface::graph_disk("u^3", 1.0)
                .unwrap()
                .sample_mesh(32)
                .unwrap()
                .0,
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for (name, mesh) in &meshes {
        let curv = ops::discrete_curvature(mesh).unwrap();
        let derived = ops::el_residual(mesh, &curv).unwrap();
        let h_sup = curv.h.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1e-30);
        let el_sup = derived.el.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1e-30);

        for motion in 0..5 {
            // Random rotation (QR of a Gaussian matrix) plus translation.
            let g = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let qr = g.qr();
            let mut q = qr.q();
            if q.determinant() < 0.0 {
                q.column_mut(0).neg_mut();
            }
            let t = Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let moved = Mesh::new(
                mesh.positions().iter().map(|p| q * p + t).collect(),
                mesh.faces().to_vec(),
            )
            .unwrap();
            let mc = ops::discrete_curvature(&moved).unwrap();
            let md = ops::el_residual(&moved, &mc).unwrap();
            for v in 0..mesh.num_vertices() {
                assert!(
                    (mc.h[v] - curv.h[v]).abs() / h_sup <= 1e-10,
                    "{name} motion {motion}: H changed at v{v}"
                );
                assert!(
                    (md.el[v] - derived.el[v]).abs() / el_sup <= 1e-10,
                    "{name} motion {motion}: I[f] changed at v{v}"
                );
            }

            for lambda in [0.5, 3.0] {
                let scaled = Mesh::new(
                    mesh.positions().iter().map(|p| p * lambda).collect(),
                    mesh.faces().to_vec(),
                )
                .unwrap();
                let sc = ops::discrete_curvature(&scaled).unwrap();
                let sd = ops::el_residual(&scaled, &sc).unwrap();
                let l5 = lambda.powi(5);
                for v in 0..mesh.num_vertices() {
                    assert!(
                        (sc.h[v] * lambda - curv.h[v]).abs() / h_sup <= 1e-8,
                        "{name} λ={lambda}: H covariance at v{v}"
                    );
                    assert!(
                        (sd.el[v] * l5 - derived.el[v]).abs() / el_sup <= 1e-8,
                        "{name} λ={lambda}: I[f] covariance at v{v}"
                    );
                }
            }
        }
    }
}

/// Lemma 4.5 constant stability across the flow-experiment disk ladder.
///
/// The audit runs on the flow's initial surface, which is where the lemma's
/// hypotheses (flat boundary, smallness) hold with curvature signal above
/// the discrete floor. Once the flow has removed the bump, every
/// second-derivative integral in the chain is pure discretization noise and
/// the reported ratio of two noise terms carries no information.
fn criterion_9() {
    let mut constants = Vec::new();
    for res in [32usize, 64, 128] {
        let mesh = &meshgen::perturbed_disk(1.0, res, 0.01).unwrap();
        let centroid: Vector3<f64> =
            mesh.positions().iter().sum::<Vector3<f64>>() / mesh.num_vertices() as f64;
        let gamma = audit::make_cutoff(mesh, centroid, mesh.diameter(), 4.0);
        let records = audit::lemma_chain_audit(mesh, &gamma).unwrap();
        let rec = records.iter().find(|r| r.lemma == "4.5").unwrap();
        constants.push(rec.min_constant.expect("4.5 min_constant"));
    }
    let (lo, hi) = constants
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
    assert!(
        lo > 0.0 && hi / lo < 2.0,
        "4.5 min_constant unstable: {constants:?} (ratio {:.2})",
        hi / lo.max(1e-300)
    );
}

// ---------------------------------------------------------------------------

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn())> = vec![
        ("1 exact-oracle EL + Simons", criterion_1),
        ("2 variation-formula consistency", criterion_2),
        ("3 rigidity flow experiment", criterion_3),
        ("4 sphere-vs-plane discrimination", criterion_4),
        ("5 Michael-Simon Sobolev corpus", criterion_5),
        ("6 Lemma 4.1 exact identity", criterion_6),
        ("7 discrete convergence suite", criterion_7),
        ("8 invariance battery", criterion_8),
        ("9 Lemma 4.2-4.5 constant stability", criterion_9),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match catch_unwind(AssertUnwindSafe(run)) {
            Ok(()) => println!("criterion {name}: PASS"),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                println!("criterion {name}: FAIL ({msg})");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
