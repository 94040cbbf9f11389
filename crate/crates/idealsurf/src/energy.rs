//! The energy `F = ∫|∇H|²dμ`, the smallness quantity `∫|A|²dμ`, and the
//! first-variation formula
//! `dF = −2∫ I[f] φ_ν dμ + 2∫_∂ ⟨(Δφ_ν + |A|²φ_ν)∇H + ∇ΔH φ_ν − ΔH ∇φ_ν, η⟩ dσ`,
//! cross-checked by central finite differences of the full discrete pipeline.

use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::ops::{self, CurvatureField, DerivedField};

/// Integral quantities of one mesh.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EnergyReport {
    /// `∫|∇H|²dμ`, by face quadrature of the piecewise-linear H gradient.
    pub f: f64,
    /// `∫|A|²dμ`, vertex-area quadrature.
    pub a2: f64,
    /// `∫|A⁰|²dμ`.
    pub a02: f64,
    /// `∫H²dμ`.
    pub h2: f64,
    pub area: f64,
    #[serde(skip)]
    pub per_face: Vec<f64>,
}

/// Curvature and derived fields of one mesh, computed together.
pub struct Analysis {
    pub curvature: CurvatureField,
    pub derived: DerivedField,
}

pub fn analyze(mesh: &Mesh) -> Result<Analysis> {
    let curvature = ops::discrete_curvature(mesh)?;
    let derived = ops::el_residual(mesh, &curvature)?;
    Ok(Analysis { curvature, derived })
}

pub fn energy(mesh: &Mesh, analysis: &Analysis) -> EnergyReport {
    let mut f = 0.0;
    let mut per_face = Vec::with_capacity(mesh.num_faces());
    for (fi, g) in analysis.derived.grad_h_face.iter().enumerate() {
        let contrib = g.norm_squared() * mesh.face_area(fi);
        per_face.push(contrib);
        f += contrib;
    }
    let mut a2 = 0.0;
    let mut a02 = 0.0;
    let mut h2 = 0.0;
    for v in 0..mesh.num_vertices() {
        let a = mesh.vertex_area(v);
        a2 += analysis.curvature.a_norm2[v] * a;
        a02 += analysis.curvature.a0_norm2[v] * a;
        h2 += analysis.curvature.h[v] * analysis.curvature.h[v] * a;
    }
    EnergyReport {
        f,
        a2,
        a02,
        h2,
        area: mesh.total_area(),
        per_face,
    }
}

/// A normal variation `φ` with the finite-differencing step used by the
/// oracle side.
#[derive(Clone, Debug)]
pub struct VariationProbe {
    pub phi: Vec<Vector3<f64>>,
    pub epsilon: f64,
}

impl VariationProbe {
    pub fn check_len(&self, mesh: &Mesh) -> Result<()> {
        if self.phi.len() != mesh.num_vertices() {
            return Err(Error::ProbeLength {
                got: self.phi.len(),
                expect: mesh.num_vertices(),
            });
        }
        Ok(())
    }

    /// Scalar normal part `φ_ν = ⟨φ, ν⟩` per vertex, with ν the curvature
    /// convention normal (the sphere's H is positive), which is the negated
    /// mesh vertex normal.
    pub fn normal_part(&self, mesh: &Mesh) -> Vec<f64> {
        self.phi
            .iter()
            .enumerate()
            .map(|(v, p)| -p.dot(&mesh.vertex_normal(v)))
            .collect()
    }

    /// True when the probe vanishes on the boundary and its one-ring.
    pub fn compactly_supported(&self, mesh: &Mesh) -> bool {
        (0..mesh.num_vertices()).all(|v| {
            let near = mesh.is_boundary_vertex(v)
                || mesh.neighbors(v).iter().any(|&j| mesh.is_boundary_vertex(j));
            !near || self.phi[v].norm() == 0.0
        })
    }
}

#[derive(Clone, Debug)]
pub struct Variation {
    pub interior: f64,
    pub boundary: f64,
    pub total: f64,
}

/// Lemma-form first variation with the probe projected to its normal part.
pub fn first_variation(mesh: &Mesh, probe: &VariationProbe) -> Result<Variation> {
    probe.check_len(mesh)?;
    let analysis = analyze(mesh)?;
    first_variation_with(mesh, &analysis, probe)
}

pub fn first_variation_with(
    mesh: &Mesh,
    analysis: &Analysis,
    probe: &VariationProbe,
) -> Result<Variation> {
    probe.check_len(mesh)?;
    let phi_nu = probe.normal_part(mesh);
    let derived = &analysis.derived;

    let mut interior = 0.0;
    for v in 0..mesh.num_vertices() {
        interior += derived.el[v] * phi_nu[v] * mesh.vertex_area(v);
    }
    interior *= -2.0;

    let mut boundary = 0.0;
    if !mesh.is_closed() {
        let lap_phi = ops::laplace_scalar(mesh, &phi_nu);
        let grad_phi = ops::vertex_gradient_of(mesh, &phi_nu);
        let grad_lap_h = ops::vertex_gradient_of(mesh, &derived.lap_h);
        for loop_vs in mesh.boundary_loops() {
            for &v in loop_vs {
                let eta = mesh.conormal(v);
                let x = (lap_phi[v] + analysis.curvature.a_norm2[v] * phi_nu[v])
                    * derived.grad_h_vertex[v]
                    + grad_lap_h[v] * phi_nu[v]
                    - derived.lap_h[v] * grad_phi[v];
                boundary += x.dot(&eta) * mesh.boundary_weight(v);
            }
        }
        boundary *= 2.0;
    }

    Ok(Variation {
        interior,
        boundary,
        total: interior + boundary,
    })
}

/// Central difference `(F[f+εφ] − F[f−εφ]) / 2ε` with both displaced meshes
/// re-run through the full curvature pipeline.
pub fn finite_difference_variation(mesh: &Mesh, probe: &VariationProbe) -> Result<f64> {
    probe.check_len(mesh)?;
    if probe.epsilon <= 0.0 {
        return Err(Error::Config("probe epsilon must be positive".into()));
    }
    let f_at = |sign: f64| -> Result<f64> {
        let disp: Vec<Vector3<f64>> = probe.phi.iter().map(|p| p * sign * probe.epsilon).collect();
        let m = mesh.displaced(&disp)?;
        for fi in 0..m.num_faces() {
            if m.face_normal(fi).dot(&mesh.face_normal(fi)) <= 0.0 {
                return Err(Error::DegenerateDisplacement { face: fi });
            }
        }
        let analysis = analyze(&m)?;
        Ok(energy(&m, &analysis).f)
    };
    let fp = f_at(1.0)?;
    let fm = f_at(-1.0)?;
    Ok((fp - fm) / (2.0 * probe.epsilon))
}

/// Seeded, compactly supported smooth normal probe: a quintic radial bump
/// about a random interior point, faded to zero over a boundary collar.
pub fn random_normal_probe(mesh: &Mesh, seed: u64, epsilon: f64) -> VariationProbe {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let interior: Vec<usize> = mesh.interior_vertices().collect();
    let center = if interior.is_empty() {
        Vector3::zeros()
    } else {
        mesh.position(interior[rng.gen_range(0..interior.len())])
    };
    let radius = 0.45 * mesh.diameter().max(1e-12);
    let amp = rng.gen_range(0.5..1.5);

    // Euclidean distance to the nearest boundary vertex, for the collar fade.
    let boundary: Vec<Vector3<f64>> = mesh
        .boundary_loops()
        .iter()
        .flatten()
        .map(|&v| mesh.position(v))
        .collect();
    // Resolution-independent fade width (never thinner than the one-ring the
    // compact-support check requires). A fade over only a few mesh edges
    // would put O(1/h²) curvature of φ where the integrands are largest and
    // wreck the vertex quadrature of the variation formula.
    let collar = (0.08 * mesh.diameter()).max(3.0 * mesh.mean_edge_length());

    let smooth = |t: f64| {
        let t = t.clamp(0.0, 1.0);
        t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    };
    let phi = (0..mesh.num_vertices())
        .map(|v| {
            let p = mesh.position(v);
            let bump = smooth(1.0 - (p - center).norm() / radius);
            let fade = if boundary.is_empty() {
                1.0
            } else {
                let d = boundary
                    .iter()
                    .map(|b| (p - b).norm())
                    .fold(f64::INFINITY, f64::min);
                smooth((d - collar) / collar)
            };
            mesh.vertex_normal(v) * amp * bump * fade
        })
        .collect();
    VariationProbe { phi, epsilon }
}
