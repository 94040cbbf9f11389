//! L² gradient descent for `F = ∫|∇H|² dμ` with flat boundary conditions.
//!
//! The descent velocity is the Euler–Lagrange density `I[f]` along the
//! curvature-convention normal: by the first-variation formula, moving with
//! `φ_ν = I[f]` gives `dF = −2∫ I[f]² dμ ≤ 0` once the boundary terms vanish,
//! which the clamp-collar boundary handling preserves exactly. The default
//! stepper treats the leading sixth-order part of the update implicitly
//! (backward Euler on the flat-state linearization `δI ≈ Δ³ψ`), so the step
//! size is not limited by the `h⁶` explicit CFL of the flow.

use faer::prelude::*;
use faer::sparse::SparseColMat;
use nalgebra::Vector3;

use crate::energy::{self, Analysis};
use crate::mesh::Mesh;
use crate::ops;
use crate::{Error, Result};

/// Time stepping scheme for [`flow_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stepper {
    /// Forward Euler; requires `dt = O(h⁶)`.
    Explicit,
    /// Backward Euler on the linearized sixth-order operator; the lower-order
    /// curvature terms are lagged. Unconditionally stable.
    SemiImplicit,
}

/// Boundary handling for the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Fix the boundary vertices and their one-ring; flat boundary data is
    /// preserved bitwise at the cost of a collar layer.
    ClampCollar,
}

/// Parameters of the gradient flow.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Time step (length⁶ scale). `None` selects a heuristic based on the
    /// mesh diameter.
    pub dt: Option<f64>,
    pub max_steps: usize,
    /// Energy threshold: stop once `F ≤ stop_f`.
    pub stop_f: f64,
    /// Umbilicity threshold: stop once `sup|A⁰| ≤ stop_a0`.
    pub stop_a0: f64,
    pub boundary_mode: BoundaryMode,
    pub stepper: Stepper,
    /// Emit a snapshot every this many steps (0 disables).
    pub snapshot_every: usize,
    /// Largest admissible boundary `|A|` residual of the input.
    pub boundary_tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt: None,
            max_steps: 5000,
            stop_f: 1e-10,
            stop_a0: 1e-3,
            boundary_mode: BoundaryMode::ClampCollar,
            stepper: Stepper::SemiImplicit,
            snapshot_every: 0,
            boundary_tol: 0.1,
        }
        .validated()
    }
}

impl FlowConfig {
    fn validated(self) -> Self {
        assert!(self.dt.map_or(true, |dt| dt > 0.0), "dt must be positive");
        assert!(self.stop_f > 0.0 && self.stop_a0 > 0.0);
        self
    }

    /// Heuristic step for the semi-implicit stepper: the decay time of the
    /// slowest mode scales like the sixth power of the domain size, and a few
    /// hundred steps should resolve it.
    pub fn auto_dt(mesh: &Mesh) -> f64 {
        (0.05 * mesh.diameter()).powi(6)
    }
}

/// Evolving state of the flow with per-step monitoring histories.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub mesh: Mesh,
    pub step: usize,
    /// Energy `F` before each completed step, plus the final state.
    pub f_history: Vec<f64>,
    /// `sup|A⁰|` over interior vertices, aligned with `f_history`.
    pub a0sup_history: Vec<f64>,
    /// Smallness monitor `∫|A|² dμ`, aligned with `f_history`.
    pub smallness_history: Vec<f64>,
}

/// Outcome of [`run_flow`].
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Planar,
    NotConverged { reason: String },
    Diverged { step: usize },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Planar => "planar",
            Verdict::NotConverged { .. } => "not-converged",
            Verdict::Diverged { .. } => "diverged",
        }
    }
}

/// Result of the two-pronged planarity test.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PlanarityReport {
    /// `sup|A⁰|` over interior vertices.
    pub sup_a0: f64,
    /// Max distance to the least-squares plane, normalized by the diameter.
    pub plane_distance: f64,
    pub planar: bool,
}

/// Vertices that move: everything except the boundary and its one-ring
/// (the clamp collar).
fn free_mask(mesh: &Mesh) -> Vec<bool> {
    let n = mesh.num_vertices();
    let mut free = vec![true; n];
    for v in 0..n {
        if mesh.is_boundary_vertex(v) {
            free[v] = false;
            for &w in mesh.neighbors(v) {
                free[w] = false;
            }
        }
    }
    free
}

/// Check that no face flipped relative to the reference mesh.
fn check_inversion(reference: &Mesh, moved: &Mesh) -> Result<()> {
    for f in 0..reference.num_faces() {
        if reference.face_normal(f).dot(&moved.face_normal(f)) <= 0.0 {
            return Err(Error::FaceInversion { face: f });
        }
    }
    Ok(())
}

/// One step of the flow from a precomputed analysis; returns the moved mesh.
fn step_mesh(mesh: &Mesh, analysis: &Analysis, config: &FlowConfig, dt: f64) -> Result<Mesh> {
    let free = free_mask(mesh);
    let el = &analysis.derived.el;
    let n = mesh.num_vertices();

    let psi = match config.stepper {
        Stepper::Explicit => {
            let mut psi = vec![0.0; n];
            for v in 0..n {
                if free[v] {
                    psi[v] = dt * el[v];
                }
            }
            psi
        }
        Stepper::SemiImplicit => semi_implicit_displacement(mesh, el, &free, dt)?,
    };

    // The descent direction φ = ψ·ν in the curvature convention, which is the
    // negative of the mesh's outward vertex normal.
    let disp: Vec<Vector3<f64>> = (0..n)
        .map(|v| -psi[v] * mesh.vertex_normal(v))
        .collect();
    let moved = mesh.displaced(&disp)?;
    check_inversion(mesh, &moved)?;
    Ok(moved)
}

/// Rows of the cotan stiffness matrix `L` (so that `Δ = M⁻¹L` with the mass
/// matrix `M = diag(vertex areas)`); `L` is symmetric negative semidefinite.
fn stiffness_rows(mesh: &Mesh) -> Vec<Vec<(usize, f64)>> {
    (0..mesh.num_vertices())
        .map(|v| {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(mesh.neighbors(v).len() + 1);
            let mut diag = 0.0;
            for &(w, cw) in mesh.cot_weights(v) {
                row.push((w, cw));
                diag -= cw;
            }
            row.push((v, diag));
            row
        })
        .collect()
}

/// Sparse product of row-major matrices using a dense accumulator.
fn spmul(a: &[Vec<(usize, f64)>], b: &[Vec<(usize, f64)>], n: usize) -> Vec<Vec<(usize, f64)>> {
    let mut acc = vec![0.0; n];
    let mut mark = vec![false; n];
    let mut touched = Vec::new();
    a.iter()
        .map(|arow| {
            for &(k, av) in arow {
                for &(j, bv) in &b[k] {
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    acc[j] += av * bv;
                }
            }
            touched.sort_unstable();
            let row = touched.iter().map(|&j| (j, acc[j])).collect();
            for &j in &touched {
                acc[j] = 0.0;
                mark[j] = false;
            }
            touched.clear();
            row
        })
        .collect()
}

/// Solve `(M − dt·K)ψ = dt·M·I` over the free vertices with `ψ = 0` on the
/// clamped collar, where `K = L M⁻¹ L M⁻¹ L` is the stiffness form of the
/// discrete `Δ³` — the flat-state linearization of the velocity in the normal
/// displacement. `−K` is positive semidefinite, so the system is SPD.
fn semi_implicit_displacement(
    mesh: &Mesh,
    el: &[f64],
    free: &[bool],
    dt: f64,
) -> Result<Vec<f64>> {
    let n = mesh.num_vertices();
    let l = stiffness_rows(mesh);
    // D L with D = M⁻¹.
    let dl: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|v| {
            let inv = 1.0 / mesh.vertex_area(v);
            l[v].iter().map(|&(j, w)| (j, inv * w)).collect()
        })
        .collect();
    let k = spmul(&l, &spmul(&dl, &dl, n), n);

    let idx: Vec<Option<usize>> = {
        let mut next = 0usize;
        free.iter()
            .map(|&f| {
                if f {
                    next += 1;
                    Some(next - 1)
                } else {
                    None
                }
            })
            .collect()
    };
    let nfree = idx.iter().flatten().count();
    if nfree == 0 {
        return Ok(vec![0.0; n]);
    }

    let mut triplets = Vec::new();
    for v in 0..n {
        let Some(i) = idx[v] else { continue };
        let mut diag = mesh.vertex_area(v);
        for &(j, kv) in &k[v] {
            match idx[j] {
                Some(jj) if jj == i => diag -= dt * kv,
                Some(jj) => triplets.push((i, jj, -dt * kv)),
                None => {}
            }
        }
        triplets.push((i, i, diag));
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(nfree, nfree, &triplets)
        .map_err(|e| Error::Solver(format!("assembly failed: {e:?}")))?;
    let mut rhs = Mat::<f64>::zeros(nfree, 1);
    for v in 0..n {
        if let Some(i) = idx[v] {
            rhs.write(i, 0, dt * mesh.vertex_area(v) * el[v]);
        }
    }
    let chol = mat
        .sp_cholesky(faer::Side::Lower)
        .map_err(|e| Error::Solver(format!("cholesky failed: {e:?}")))?;
    let sol = chol.solve(&rhs);

    let mut psi = vec![0.0; n];
    for v in 0..n {
        if let Some(i) = idx[v] {
            psi[v] = sol.read(i, 0);
        }
    }
    Ok(psi)
}

/// Advance the flow by one step: analyze the current mesh, move the free
/// vertices, and append the post-step monitors.
pub fn flow_step(state: &FlowState, config: &FlowConfig) -> Result<FlowState> {
    let analysis = energy::analyze(&state.mesh)?;
    let dt = config.dt.unwrap_or_else(|| FlowConfig::auto_dt(&state.mesh));
    let mesh = step_mesh(&state.mesh, &analysis, config, dt)?;
    let mut next = FlowState {
        mesh,
        step: state.step + 1,
        f_history: state.f_history.clone(),
        a0sup_history: state.a0sup_history.clone(),
        smallness_history: state.smallness_history.clone(),
    };
    let post = energy::analyze(&next.mesh)?;
    let report = energy::energy(&next.mesh, &post);
    next.f_history.push(report.f);
    next.a0sup_history.push(sup_a0(&next.mesh, &post));
    next.smallness_history.push(report.a2);
    Ok(next)
}

fn sup_a0(mesh: &Mesh, analysis: &Analysis) -> f64 {
    mesh.interior_vertices()
        .map(|v| analysis.curvature.a0_norm2[v].sqrt())
        .fold(0.0, f64::max)
}

/// Run the flow to planarity, step exhaustion, or divergence. `on_snapshot`
/// is invoked every `snapshot_every` steps (and on the final state) when
/// snapshots are enabled.
pub fn run_flow_with(
    mesh: Mesh,
    config: &FlowConfig,
    mut on_snapshot: impl FnMut(&FlowState) -> Result<()>,
) -> Result<(FlowState, Verdict)> {
    let mut state = FlowState {
        mesh,
        step: 0,
        f_history: Vec::new(),
        a0sup_history: Vec::new(),
        smallness_history: Vec::new(),
    };

    // Flat boundary conditions must approximately hold on the input; clamping
    // cannot repair a boundary where |A| ≠ 0 (the nonexistence regime).
    let analysis = energy::analyze(&state.mesh)?;
    let boundary = ops::boundary_residuals(&state.mesh, &analysis.curvature, &analysis.derived);
    let (a_max, _, _) = boundary.overall_max();
    if a_max > config.boundary_tol {
        return Ok((
            state,
            Verdict::NotConverged {
                reason: format!(
                    "boundary |A| residual {a_max:.3e} exceeds tolerance {:.3e}; \
                     flat boundary conditions are violated at input",
                    config.boundary_tol
                ),
            },
        ));
    }

    let mut dt = config.dt.unwrap_or_else(|| FlowConfig::auto_dt(&state.mesh));
    let mut analysis = analysis;
    loop {
        let report = energy::energy(&state.mesh, &analysis);
        let a0 = sup_a0(&state.mesh, &analysis);
        if !report.f.is_finite() || !a0.is_finite() {
            let step = state.step;
            return Ok((state, Verdict::Diverged { step }));
        }
        state.f_history.push(report.f);
        state.a0sup_history.push(a0);
        state.smallness_history.push(report.a2);
        if config.snapshot_every > 0 && state.step % config.snapshot_every == 0 {
            on_snapshot(&state)?;
        }

        // Converged: either F is below threshold outright, or the flow has
        // stalled at its discretization floor while the surface is already
        // umbilic to tolerance (an umbilic surface with flat boundary is a
        // piece of a plane, so the residual F is pure discretization error).
        let n = state.f_history.len();
        let stalled = n > 50
            && state.f_history[n - 51] - report.f
                <= 1e-3 * report.f.max(config.stop_f);
        if (report.f <= config.stop_f || stalled) && a0 <= config.stop_a0 {
            if config.snapshot_every > 0 {
                on_snapshot(&state)?;
            }
            return Ok((state, Verdict::Planar));
        }
        if state.step >= config.max_steps {
            return Ok((
                state,
                Verdict::NotConverged {
                    reason: format!(
                        "step limit {} reached with F = {:.3e}, sup|A⁰| = {:.3e}",
                        config.max_steps, report.f, a0
                    ),
                },
            ));
        }

        // Halving-on-failure: retry a rejected step (a face inversion, or —
        // when the step size is automatic and the stepper unconditionally
        // stable — an energy increase) with a smaller dt; give up after
        // shrinking by 2⁻²⁰. Accepted automatic steps grow dt again, so the
        // endgame approaches the exact solve of the linearized equation and
        // the energy drops to its floor instead of stalling on a tiny step.
        let adaptive =
            config.dt.is_none() && matches!(config.stepper, Stepper::SemiImplicit);
        let dt_cap = FlowConfig::auto_dt(&state.mesh) * 1e12;
        let mut halvings = 0;
        let (moved, post) = loop {
            match step_mesh(&state.mesh, &analysis, config, dt) {
                Ok(m) => {
                    if adaptive {
                        let post = energy::analyze(&m)?;
                        let f_new = energy::energy(&m, &post).f;
                        // A bounded number of energy halvings; past that the
                        // increase is discretization-floor noise and the step
                        // is accepted (the stall test owns that regime).
                        if f_new > report.f * (1.0 + 1e-12) && halvings < 6 {
                            dt *= 0.5;
                            halvings += 1;
                            continue;
                        }
                        if halvings == 0 {
                            dt = (dt * 2.0).min(dt_cap);
                        }
                        break (m, Some(post));
                    }
                    break (m, None);
                }
                Err(Error::FaceInversion { face }) if halvings < 20 => {
                    let _ = face;
                    dt *= 0.5;
                    halvings += 1;
                }
                Err(e) => return Err(e),
            }
        };
        state.mesh = moved;
        state.step += 1;
        analysis = match post {
            Some(a) => a,
            None => energy::analyze(&state.mesh)?,
        };
    }
}

/// [`run_flow_with`] without snapshot emission.
pub fn run_flow(mesh: Mesh, config: &FlowConfig) -> Result<(FlowState, Verdict)> {
    run_flow_with(mesh, config, |_| Ok(()))
}

/// Two-pronged planarity test: `sup|A⁰|` small (umbilic) *and* globally close
/// to the least-squares plane. The second prong rejects spheres, which pass
/// the first.
pub fn planarity_test(mesh: &Mesh, tol: f64) -> Result<PlanarityReport> {
    let curv = ops::discrete_curvature(mesh)?;
    let sup_a0 = mesh
        .interior_vertices()
        .map(|v| curv.a0_norm2[v].sqrt())
        .fold(0.0, f64::max);

    let n = mesh.num_vertices() as f64;
    let centroid: Vector3<f64> = mesh.positions().iter().sum::<Vector3<f64>>() / n;
    let mut cov = nalgebra::Matrix3::<f64>::zeros();
    for p in mesh.positions() {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let k = eig.eigenvalues.imin();
    let normal = eig.eigenvectors.column(k).into_owned();
    let plane_distance = mesh
        .positions()
        .iter()
        .map(|p| (p - centroid).dot(&normal).abs())
        .fold(0.0, f64::max)
        / mesh.diameter();

    Ok(PlanarityReport {
        sup_a0,
        plane_distance,
        planar: sup_a0 <= tol && plane_distance <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen;

    fn state_of(mesh: Mesh) -> FlowState {
        FlowState {
            mesh,
            step: 0,
            f_history: Vec::new(),
            a0sup_history: Vec::new(),
            smallness_history: Vec::new(),
        }
    }

    #[test]
    fn flat_disk_is_fixed_point() {
        let m = meshgen::flat_disk(1.0, 16).unwrap();
        let before = m.positions().to_vec();
        let mut state = state_of(m);
        let config = FlowConfig::default();
        for _ in 0..3 {
            state = flow_step(&state, &config).unwrap();
        }
        for (p, q) in before.iter().zip(state.mesh.positions()) {
            assert!((p - q).norm() <= 1e-14, "planar input must not move");
        }
    }

    #[test]
    fn explicit_step_decreases_energy_on_bump() {
        let m = meshgen::perturbed_disk(1.0, 32, 0.01).unwrap();
        let analysis = energy::analyze(&m).unwrap();
        let f0 = energy::energy(&m, &analysis).f;
        let config = FlowConfig {
            stepper: Stepper::Explicit,
            dt: Some(1e-12),
            ..FlowConfig::default()
        };
        let state = flow_step(&state_of(m), &config).unwrap();
        let f1 = *state.f_history.last().unwrap();
        assert!(f1 < f0, "explicit step must descend: {f0} -> {f1}");
    }

    #[test]
    fn semi_implicit_step_decreases_energy_on_bump() {
        let m = meshgen::perturbed_disk(1.0, 32, 0.01).unwrap();
        let analysis = energy::analyze(&m).unwrap();
        let f0 = energy::energy(&m, &analysis).f;
        let config = FlowConfig::default();
        let state = flow_step(&state_of(m), &config).unwrap();
        let f1 = *state.f_history.last().unwrap();
        assert!(f1 < f0, "semi-implicit step must descend: {f0} -> {f1}");
    }

    #[test]
    fn icosphere_is_near_critical() {
        let m = meshgen::icosphere(1.0, 4).unwrap();
        let config = FlowConfig {
            dt: Some(1e-8),
            ..FlowConfig::default()
        };
        let state = flow_step(&state_of(m), &config).unwrap();
        assert!(*state.f_history.last().unwrap() <= 1e-3);
    }

    #[test]
    fn boundary_vertices_pinned_bitwise() {
        let m = meshgen::perturbed_disk(1.0, 24, 0.01).unwrap();
        let boundary: Vec<usize> = (0..m.num_vertices())
            .filter(|&v| m.is_boundary_vertex(v))
            .collect();
        let before: Vec<_> = boundary.iter().map(|&v| m.position(v)).collect();
        let mut state = state_of(m);
        let config = FlowConfig::default();
        for _ in 0..5 {
            state = flow_step(&state, &config).unwrap();
        }
        for (&v, p) in boundary.iter().zip(&before) {
            assert_eq!(state.mesh.position(v), *p);
        }
    }

    #[test]
    fn run_flow_rejects_curved_boundary() {
        let m = meshgen::spherical_cap(2.0, 0.9, 16).unwrap();
        let (_, verdict) = run_flow(m, &FlowConfig::default()).unwrap();
        match verdict {
            Verdict::NotConverged { reason } => {
                assert!(reason.contains("boundary"), "diagnostic: {reason}")
            }
            other => panic!("expected not-converged, got {other:?}"),
        }
    }

    #[test]
    fn run_flow_flat_disk_immediately_planar() {
        let m = meshgen::flat_disk(1.0, 16).unwrap();
        let (state, verdict) = run_flow(m, &FlowConfig::default()).unwrap();
        assert_eq!(verdict, Verdict::Planar);
        assert_eq!(state.step, 0);
    }

    #[test]
    fn planarity_flat_vs_sphere() {
        let disk = meshgen::flat_disk(1.0, 16).unwrap();
        let r = planarity_test(&disk, 1e-3).unwrap();
        assert!(r.planar, "flat disk: {r:?}");
        assert!(r.sup_a0 <= 1e-10 && r.plane_distance <= 1e-10);

        let sphere = meshgen::icosphere(1.0, 3).unwrap();
        let r = planarity_test(&sphere, 1e-3).unwrap();
        assert!(!r.planar);
        assert!(r.sup_a0 <= 0.2, "sphere is umbilic: {r:?}");
        assert!(r.plane_distance >= 0.2, "plane prong must reject: {r:?}");
    }

    #[test]
    fn perturbed_disk_flows_to_plane() {
        let m = meshgen::perturbed_disk(1.0, 32, 0.01).unwrap();
        let config = FlowConfig {
            max_steps: 2000,
            ..FlowConfig::default()
        };
        let (state, verdict) = run_flow(m, &config).unwrap();
        assert_eq!(verdict, Verdict::Planar, "history tail: {:?}", {
            let n = state.f_history.len();
            &state.f_history[n.saturating_sub(5)..]
        });
        let decreases = state
            .f_history
            .windows(2)
            .filter(|w| w[1] <= w[0])
            .count();
        assert!(
            decreases * 100 >= (state.f_history.len() - 1) * 95,
            "F must be non-increasing at >= 95% of steps"
        );
        let report = planarity_test(&state.mesh, 1e-3).unwrap();
        assert!(report.planar, "{report:?}");
    }
}
