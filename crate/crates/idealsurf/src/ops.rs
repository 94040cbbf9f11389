//! Discrete curvature operators: cotan Laplace–Beltrami, mean curvature,
//! shape operator fits, the Euler–Lagrange residual
//! `I[f] = Δ²H + |A|²ΔH − (A⁰)ⁱʲ∇ᵢH∇ⱼH`, and boundary-condition residuals.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::field::VertexField;
use crate::mesh::Mesh;

/// Per-vertex curvature data. The shape tensor lives in the orthonormal
/// tangent frame stored alongside it, as `[a11, a12, a22]`.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    pub h: Vec<f64>,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    pub shape: Vec<[f64; 3]>,
    pub a_norm2: Vec<f64>,
    pub a0_norm2: Vec<f64>,
    pub frame: Vec<(Vector3<f64>, Vector3<f64>)>,
}

impl CurvatureField {
    /// Trace-free part of the shape tensor at vertex `v`, same frame.
    pub fn a0(&self, v: usize) -> [f64; 3] {
        let [a, b, c] = self.shape[v];
        let t = (a + c) / 2.0;
        [a - t, b, c - t]
    }
}

/// Differentiated curvature fields and the Euler–Lagrange residual.
#[derive(Clone, Debug)]
pub struct DerivedField {
    pub grad_h_face: Vec<Vector3<f64>>,
    /// Tangent-projected, area-averaged gradient of H per vertex.
    pub grad_h_vertex: Vec<Vector3<f64>>,
    pub grad_h_norm2: Vec<f64>,
    pub lap_h: Vec<f64>,
    pub bilap_h: Vec<f64>,
    /// I[f] per vertex; meaningful at interior vertices.
    pub el: Vec<f64>,
    /// Weak-form residual H·I[f].
    pub weak: Vec<f64>,
}

/// Per-boundary-vertex residuals of the flat boundary conditions.
#[derive(Clone, Debug)]
pub struct BoundaryResidual {
    pub vertex: usize,
    pub a_norm: f64,
    pub grad_eta_h: f64,
    pub grad_eta_lap_h: f64,
}

#[derive(Clone, Debug, Default)]
pub struct BoundaryReport {
    pub per_vertex: Vec<BoundaryResidual>,
    /// `(max |A|, max |∇_ηH|, max |∇_ηΔH|)` per boundary loop.
    pub loop_max: Vec<(f64, f64, f64)>,
}

impl BoundaryReport {
    pub fn overall_max(&self) -> (f64, f64, f64) {
        self.loop_max.iter().fold((0.0, 0.0, 0.0), |acc, m| {
            (acc.0.max(m.0), acc.1.max(m.1), acc.2.max(m.2))
        })
    }
}

/// Cotan Laplacian with inverse-mass normalization,
/// `(Δu)_i = (1/a_i) Σ_j w_ij (u_j − u_i)`. Boundary vertices get the natural
/// (Neumann-consistent) one-sided stencil.
pub fn laplace_beltrami(mesh: &Mesh, field: &VertexField) -> Result<VertexField> {
    field.check_len(mesh)?;
    let u = field.scalars()?;
    Ok(VertexField::Scalar(laplace_scalar(mesh, u)))
}

pub(crate) fn laplace_scalar(mesh: &Mesh, u: &[f64]) -> Vec<f64> {
    (0..mesh.num_vertices())
        .map(|i| {
            let acc: f64 = mesh
                .cot_weights(i)
                .iter()
                .map(|&(j, w)| w * (u[j] - u[i]))
                .sum();
            acc / mesh.vertex_area(i)
        })
        .collect()
}

/// Per-face gradient of the piecewise-linear interpolant of `u`.
pub(crate) fn face_gradients(mesh: &Mesh, u: &[f64]) -> Vec<Vector3<f64>> {
    mesh.faces()
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            let n = mesh.face_normal(fi);
            let inv2a = 1.0 / (2.0 * mesh.face_area(fi));
            // Difference form (Σ∇λ = 0): constants are annihilated exactly,
            // which matters on near-degenerate faces where 1/area amplifies
            // rounding noise.
            let mut g = Vector3::zeros();
            for k in 1..3 {
                let opposite = mesh.position(f[(k + 2) % 3]) - mesh.position(f[(k + 1) % 3]);
                g += (u[f[k]] - u[f[0]]) * n.cross(&opposite) * inv2a;
            }
            g
        })
        .collect()
}

/// Area-weighted average of incident face gradients per vertex.
pub(crate) fn vertex_gradients(mesh: &Mesh, face_grad: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    (0..mesh.num_vertices())
        .map(|v| {
            let mut g = Vector3::zeros();
            let mut area = 0.0;
            for &f in mesh.vertex_faces(v) {
                g += mesh.face_area(f) * face_grad[f];
                area += mesh.face_area(f);
            }
            g / area
        })
        .collect()
}

/// Tangent-projected, area-averaged vertex gradient of a scalar field.
pub(crate) fn vertex_gradient_of(mesh: &Mesh, u: &[f64]) -> Vec<Vector3<f64>> {
    let fg = face_gradients(mesh, u);
    vertex_gradients(mesh, &fg)
}

/// Gradient data for one scalar field.
#[derive(Clone, Debug)]
pub struct GradientField {
    pub face: Vec<Vector3<f64>>,
    pub vertex: Vec<Vector3<f64>>,
    /// Area-weighted mean of squared face-gradient norms per vertex.
    pub norm2: Vec<f64>,
    /// `∇_η` at boundary vertices; zero at interior vertices.
    pub normal_derivative: Vec<f64>,
}

pub fn gradient_field(mesh: &Mesh, field: &VertexField) -> Result<GradientField> {
    field.check_len(mesh)?;
    let u = field.scalars()?;
    let face = face_gradients(mesh, u);
    let vertex = vertex_gradients(mesh, &face);
    let norm2 = (0..mesh.num_vertices())
        .map(|v| {
            let mut acc = 0.0;
            let mut area = 0.0;
            for &f in mesh.vertex_faces(v) {
                acc += mesh.face_area(f) * face[f].norm_squared();
                area += mesh.face_area(f);
            }
            acc / area
        })
        .collect();
    let normal_derivative = (0..mesh.num_vertices())
        .map(|v| {
            if mesh.is_boundary_vertex(v) {
                vertex[v].dot(&mesh.conormal(v))
            } else {
                0.0
            }
        })
        .collect();
    Ok(GradientField {
        face,
        vertex,
        norm2,
        normal_derivative,
    })
}

/// Orthonormal tangent frame per vertex: first edge projected to the tangent
/// plane, completed by `ν × e1`.
fn tangent_frames(mesh: &Mesh) -> Vec<(Vector3<f64>, Vector3<f64>)> {
    (0..mesh.num_vertices())
        .map(|v| {
            let nu = mesh.vertex_normal(v);
            let mut e1 = Vector3::zeros();
            for &j in mesh.neighbors(v) {
                let d = mesh.position(j) - mesh.position(v);
                let t = d - nu * d.dot(&nu);
                if t.norm() > 1e-12 {
                    e1 = t.normalize();
                    break;
                }
            }
            if e1.norm() == 0.0 {
                // All edges normal-aligned cannot happen on a valid mesh,
                // but keep a deterministic fallback.
                let axis = if nu.x.abs() < 0.9 {
                    Vector3::x()
                } else {
                    Vector3::y()
                };
                e1 = (axis - nu * axis.dot(&nu)).normalize();
            }
            let e2 = nu.cross(&e1);
            (e1, e2)
        })
        .collect()
}

/// Discrete curvature: shape tensor per vertex by a least-squares
/// height-quadric fit over the two-ring; H is its trace, and the
/// principal curvatures its eigenvalues.
///
/// The fit `z = (a x² + 2b xy + c y²)/2 + d x + e y` includes linear terms
/// that absorb the first-order error of the estimated vertex normal, which
/// would otherwise pollute the curvature terms by O(1) near boundaries. The
/// fit only sees vertex positions, so sliver triangles (which make
/// cotan-based magnitudes blow up) do not degrade it, and it is exactly zero
/// on flat patches.
pub fn discrete_curvature(mesh: &Mesh) -> Result<CurvatureField> {
    let n = mesh.num_vertices();
    for v in 0..n {
        if mesh.neighbors(v).is_empty() {
            return Err(Error::IsolatedVertex { v });
        }
    }
    let frame = tangent_frames(mesh);

    let mut h = vec![0.0; n];
    let mut shape = vec![[0.0; 3]; n];
    // Vertices whose least-squares system stayed degenerate at the maximum
    // ring depth (their neighborhood is essentially one-dimensional, as at
    // the singular corners of mapped grid layouts). Their fit is replaced by
    // a neighborhood average in a second pass.
    let mut degenerate = vec![false; n];
    let mut rings: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let nu = mesh.vertex_normal(v);
        let (e1, e2) = frame[v];

        // Grow the neighborhood ring by ring (two rings normally; more when
        // the least-squares system is ill-conditioned, as at sliver corners
        // where the two-ring collapses onto a near-1D point set).
        let mut ring: Vec<usize> = mesh.neighbors(v).to_vec();
        let mut frontier = ring.clone();
        let mut samples: Vec<(f64, f64, f64)> = Vec::new();
        let mut scale = 1e-30;
        let mut m5 = nalgebra::Matrix5::<f64>::zeros();
        let mut r5 = nalgebra::Vector5::<f64>::zeros();
        for depth in 2..=4 {
            let mut next = Vec::new();
            for &j in &frontier {
                for &k in mesh.neighbors(j) {
                    if k != v && !ring.contains(&k) {
                        ring.push(k);
                        next.push(k);
                    }
                }
            }
            frontier = next;

            samples = ring
                .iter()
                .map(|&j| {
                    let d = mesh.position(j) - mesh.position(v);
                    (d.dot(&e1), d.dot(&e2), d.dot(&nu))
                })
                .collect();
            // Normalize coordinates by the ring scale for conditioning.
            scale = samples
                .iter()
                .map(|s| s.0.hypot(s.1))
                .fold(0.0f64, f64::max)
                .max(1e-30);
            m5 = nalgebra::Matrix5::<f64>::zeros();
            r5 = nalgebra::Vector5::<f64>::zeros();
            for &(x, y, z) in &samples {
                let (x, y) = (x / scale, y / scale);
                let row =
                    nalgebra::Vector5::new(x * x / 2.0, x * y, y * y / 2.0, x, y);
                m5 += row * row.transpose();
                r5 += row * z;
            }
            let eig = m5.symmetric_eigenvalues();
            let (lo, hi) = (
                eig.iter().cloned().fold(f64::INFINITY, f64::min),
                eig.iter().cloned().fold(0.0f64, f64::max),
            );
            degenerate[v] = samples.len() < 8 || lo <= 1e-4 * hi.max(1e-30);
            if !degenerate[v] {
                break;
            }
            let _ = depth;
        }
        rings[v] = ring;
        let sol5 = if samples.len() >= 5 {
            m5.lu().solve(&r5)
        } else {
            None
        };
        let [a, b, c] = match sol5 {
            Some(s) if s.iter().all(|x| x.is_finite()) => [
                -s.x / (scale * scale),
                -s.y / (scale * scale),
                -s.z / (scale * scale),
            ],
            _ => {
                // Thin ring: quadric-only fit, then isotropic fallback.
                let mut m3 = Matrix3::zeros();
                let mut r3 = Vector3::zeros();
                for &(x, y, z) in &samples {
                    let (x, y) = (x / scale, y / scale);
                    let row = Vector3::new(x * x / 2.0, x * y, y * y / 2.0);
                    m3 += row * row.transpose();
                    r3 += row * z;
                }
                match m3.lu().solve(&r3) {
                    Some(s) if s.iter().all(|x| x.is_finite())
                        && m3.determinant().abs() > 1e-12 =>
                    {
                        [
                            -s.x / (scale * scale),
                            -s.y / (scale * scale),
                            -s.z / (scale * scale),
                        ]
                    }
                    _ => {
                        let mut acc = 0.0;
                        let mut cnt = 0usize;
                        for &(x, y, z) in &samples {
                            let d2 = x * x + y * y + z * z;
                            if d2 > 0.0 {
                                acc += -2.0 * z / d2;
                                cnt += 1;
                            }
                        }
                        let k = if cnt > 0 { acc / cnt as f64 } else { 0.0 };
                        [k, 0.0, k]
                    }
                }
            }
        };

        h[v] = a + c;
        shape[v] = [a, b, c];
    }

    // Second pass: a vertex whose point neighborhood never spread into two
    // dimensions has no trustworthy fit of its own; borrow the average of the
    // well-posed fits around it. H is frame-invariant; the averaged shape
    // entries carry a frame-alignment error, acceptable at the isolated
    // degenerate vertices this targets.
    // Iterate so the replacement propagates inward to vertices (like the map
    // corner itself) whose whole neighborhood is degenerate.
    let mut resolved: Vec<bool> = degenerate.iter().map(|&d| !d).collect();
    for _ in 0..8 {
        if resolved.iter().all(|&r| r) {
            break;
        }
        let h_prev = h.clone();
        let shape_prev = shape.clone();
        let resolved_prev = resolved.clone();
        for v in 0..n {
            if resolved[v] {
                continue;
            }
            let good: Vec<usize> = rings[v]
                .iter()
                .cloned()
                .filter(|&j| resolved_prev[j])
                .collect();
            if good.is_empty() {
                continue;
            }
            let inv = 1.0 / good.len() as f64;
            h[v] = good.iter().map(|&j| h_prev[j]).sum::<f64>() * inv;
            for k in 0..3 {
                shape[v][k] = good.iter().map(|&j| shape_prev[j][k]).sum::<f64>() * inv;
            }
            resolved[v] = true;
        }
    }

    let mut kappa1 = vec![0.0; n];
    let mut kappa2 = vec![0.0; n];
    let mut a_norm2 = vec![0.0; n];
    let mut a0_norm2 = vec![0.0; n];
    for v in 0..n {
        let [a, b, c] = shape[v];
        let t = (a + c) / 2.0;
        let disc = ((a - c) / 2.0).powi(2) + b * b;
        let r = disc.sqrt();
        kappa1[v] = t + r;
        kappa2[v] = t - r;
        a0_norm2[v] = 2.0 * disc;
        a_norm2[v] = h[v] * h[v] / 2.0 + a0_norm2[v];
    }

    Ok(CurvatureField {
        h,
        kappa1,
        kappa2,
        shape,
        a_norm2,
        a0_norm2,
        frame,
    })
}

/// Euler–Lagrange residual `I[f]` per vertex, with `Δ²H` by composing the
/// cotan Laplacian and the `(A⁰)ⁱʲ∇ᵢH∇ⱼH` contraction evaluated in the
/// orthonormal vertex tangent frame.
pub fn el_residual(mesh: &Mesh, curv: &CurvatureField) -> Result<DerivedField> {
    let lap_h = laplace_scalar(mesh, &curv.h);
    let bilap_h = laplace_scalar(mesh, &lap_h);
    let grad_h_face = face_gradients(mesh, &curv.h);
    let grad_raw = vertex_gradients(mesh, &grad_h_face);

    let n = mesh.num_vertices();
    let mut grad_h_vertex = Vec::with_capacity(n);
    let mut grad_h_norm2 = vec![0.0; n];
    let mut el = vec![0.0; n];
    let mut weak = vec![0.0; n];
    for v in 0..n {
        let nu = mesh.vertex_normal(v);
        let g = grad_raw[v] - nu * grad_raw[v].dot(&nu);
        grad_h_vertex.push(g);
        let mut acc = 0.0;
        let mut area = 0.0;
        for &f in mesh.vertex_faces(v) {
            acc += mesh.face_area(f) * grad_h_face[f].norm_squared();
            area += mesh.face_area(f);
        }
        grad_h_norm2[v] = acc / area;

        let (e1, e2) = curv.frame[v];
        let (g1, g2) = (g.dot(&e1), g.dot(&e2));
        let [a0a, a0b, a0c] = curv.a0(v);
        let contraction = a0a * g1 * g1 + 2.0 * a0b * g1 * g2 + a0c * g2 * g2;
        el[v] = bilap_h[v] + curv.a_norm2[v] * lap_h[v] - contraction;
        weak[v] = curv.h[v] * el[v];
    }

    let out = DerivedField {
        grad_h_face,
        grad_h_vertex,
        grad_h_norm2,
        lap_h,
        bilap_h,
        el,
        weak,
    };
    for x in out.el.iter().chain(&out.lap_h).chain(&out.bilap_h) {
        if !x.is_finite() {
            return Err(Error::Solver("non-finite curvature derivative".into()));
        }
    }
    Ok(out)
}

/// Residuals of the flat boundary conditions `|A| = ∇_ηH = ∇_ηΔH = 0` per
/// boundary vertex and their per-loop maxima. Empty on closed meshes.
pub fn boundary_residuals(
    mesh: &Mesh,
    curv: &CurvatureField,
    derived: &DerivedField,
) -> BoundaryReport {
    let lap_grad_face = face_gradients(mesh, &derived.lap_h);
    let lap_grad_vertex = vertex_gradients(mesh, &lap_grad_face);
    let mut report = BoundaryReport::default();
    for loop_vs in mesh.boundary_loops() {
        let mut lmax = (0.0f64, 0.0f64, 0.0f64);
        for &v in loop_vs {
            let eta = mesh.conormal(v);
            let r = BoundaryResidual {
                vertex: v,
                a_norm: curv.a_norm2[v].max(0.0).sqrt(),
                grad_eta_h: derived.grad_h_vertex[v].dot(&eta),
                grad_eta_lap_h: lap_grad_vertex[v].dot(&eta),
            };
            lmax.0 = lmax.0.max(r.a_norm.abs());
            lmax.1 = lmax.1.max(r.grad_eta_h.abs());
            lmax.2 = lmax.2.max(r.grad_eta_lap_h.abs());
            report.per_vertex.push(r);
        }
        report.loop_max.push(lmax);
    }
    report
}

/// Smallest rotation taking unit vector `from` to unit vector `to`.
fn rotation_between(from: Vector3<f64>, to: Vector3<f64>) -> impl Fn(Vector3<f64>) -> Vector3<f64> {
    let axis = from.cross(&to);
    let s = axis.norm();
    let c = from.dot(&to);
    move |v: Vector3<f64>| {
        if s < 1e-14 {
            if c > 0.0 {
                v
            } else {
                -v
            }
        } else {
            let k = axis / s;
            v * c + k.cross(&v) * s + k * k.dot(&v) * (1.0 - c)
        }
    }
}

/// Per-vertex estimates `(|∇H|, |∇A|, |∇A⁰|)` by finite differences of the
/// parallel-transported shape tensors across one-ring edges. With roughly
/// isotropic edge directions, the mean of squared directional derivatives is
/// half the full tensor norm, hence the factor 2.
pub fn codazzi_quantities(mesh: &Mesh, curv: &CurvatureField) -> Vec<(f64, f64, f64)> {
    let n = mesh.num_vertices();
    let mut out = Vec::with_capacity(n);
    for v in 0..n {
        let (e1_i, e2_i) = curv.frame[v];
        let nu_i = mesh.vertex_normal(v);
        let ai = curv.shape[v];
        let a0i = curv.a0(v);
        let mut sum_h = 0.0;
        let mut sum_a = 0.0;
        let mut sum_a0 = 0.0;
        let mut count = 0usize;
        for &j in mesh.neighbors(v) {
            let len = (mesh.position(j) - mesh.position(v)).norm();
            if len == 0.0 {
                continue;
            }
            let rot = rotation_between(mesh.vertex_normal(j), nu_i);
            let (e1_j, e2_j) = curv.frame[j];
            let f1 = rot(e1_j);
            let f2 = rot(e2_j);
            // 2x2 change of frame from j's transported frame into i's frame.
            let q = [
                [f1.dot(&e1_i), f2.dot(&e1_i)],
                [f1.dot(&e2_i), f2.dot(&e2_i)],
            ];
            let transport = |t: [f64; 3]| {
                let tm = [[t[0], t[1]], [t[1], t[2]]];
                let mut r = [[0.0; 2]; 2];
                for a in 0..2 {
                    for b in 0..2 {
                        for x in 0..2 {
                            for y in 0..2 {
                                r[a][b] += q[a][x] * tm[x][y] * q[b][y];
                            }
                        }
                    }
                }
                [r[0][0], (r[0][1] + r[1][0]) / 2.0, r[1][1]]
            };
            let frob2 = |d: [f64; 3]| d[0] * d[0] + 2.0 * d[1] * d[1] + d[2] * d[2];

            let aj = transport(curv.shape[j]);
            let a0j = transport(curv.a0(j));
            let da = [aj[0] - ai[0], aj[1] - ai[1], aj[2] - ai[2]];
            let da0 = [a0j[0] - a0i[0], a0j[1] - a0i[1], a0j[2] - a0i[2]];
            sum_a += frob2(da) / (len * len);
            sum_a0 += frob2(da0) / (len * len);
            sum_h += ((curv.h[j] - curv.h[v]) / len).powi(2);
            count += 1;
        }
        if count == 0 {
            out.push((0.0, 0.0, 0.0));
            continue;
        }
        let c = count as f64;
        out.push((
            (2.0 * sum_h / c).sqrt(),
            (2.0 * sum_a / c).sqrt(),
            (2.0 * sum_a0 / c).sqrt(),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen;
    use crate::oracle::ParametricSurface;

    #[test]
    fn laplacian_annihilates_constants() {
        let m = meshgen::flat_disk(1.0, 8).unwrap();
        let u = VertexField::Scalar(vec![3.7; m.num_vertices()]);
        let lap = laplace_beltrami(&m, &u).unwrap();
        for &x in lap.scalars().unwrap() {
            assert!(x.abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_rejects_vector_fields() {
        let m = meshgen::flat_disk(1.0, 4).unwrap();
        let u = VertexField::Vector(vec![Vector3::zeros(); m.num_vertices()]);
        assert!(matches!(laplace_beltrami(&m, &u), Err(Error::FieldKind)));
    }

    #[test]
    fn laplacian_of_coordinate_on_flat_mesh() {
        let m = meshgen::flat_disk(1.0, 12).unwrap();
        let u = VertexField::Scalar(m.positions().iter().map(|p| p.x).collect());
        let lap = laplace_beltrami(&m, &u).unwrap();
        let lap = lap.scalars().unwrap();
        for v in m.interior_vertices() {
            assert!(lap[v].abs() < 1e-8, "lap x = {} at {v}", lap[v]);
        }
    }

    #[test]
    fn laplacian_of_quadratic_on_fine_flat_chart() {
        let m = meshgen::flat_disk(1.0, 40).unwrap();
        let u = VertexField::Scalar(
            m.positions()
                .iter()
                .map(|p| p.x * p.x + p.y * p.y)
                .collect(),
        );
        let lap = laplace_beltrami(&m, &u).unwrap();
        let lap = lap.scalars().unwrap();
        // Interior away from the rim where the stencil is complete and the
        // smoothly mapped stars are asymptotically point-symmetric.
        for v in m.interior_vertices() {
            let p = m.position(v);
            if p.x.hypot(p.y) < 0.8 {
                approx::assert_relative_eq!(lap[v], 4.0, max_relative = 0.05);
            }
        }
    }

    #[test]
    fn laplacian_self_adjoint_on_closed_mesh() {
        let m = meshgen::icosphere(1.0, 2).unwrap();
        let u: Vec<f64> = m.positions().iter().map(|p| p.x + 0.3 * p.y * p.z).collect();
        let w: Vec<f64> = m.positions().iter().map(|p| p.z * p.z - 0.1 * p.x).collect();
        let lu = laplace_scalar(&m, &u);
        let lw = laplace_scalar(&m, &w);
        let a: f64 = (0..m.num_vertices())
            .map(|v| lu[v] * w[v] * m.vertex_area(v))
            .sum();
        let b: f64 = (0..m.num_vertices())
            .map(|v| u[v] * lw[v] * m.vertex_area(v))
            .sum();
        approx::assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn gradient_of_constant_and_linear() {
        let m = meshgen::flat_disk(1.0, 8).unwrap();
        let g = gradient_field(
            &m,
            &VertexField::Scalar(vec![2.0; m.num_vertices()]),
        )
        .unwrap();
        for f in &g.face {
            assert!(f.norm() < 1e-12);
        }
        let g = gradient_field(
            &m,
            &VertexField::Scalar(m.positions().iter().map(|p| p.x).collect()),
        )
        .unwrap();
        for f in &g.face {
            assert!((f - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn flat_disk_curvature_vanishes() {
        let m = meshgen::flat_disk(1.0, 10).unwrap();
        let c = discrete_curvature(&m).unwrap();
        for v in m.interior_vertices() {
            assert!(c.h[v].abs() < 1e-8);
            assert!(c.a0_norm2[v] < 1e-8);
        }
        let d = el_residual(&m, &c).unwrap();
        for v in m.interior_vertices() {
            assert!(d.el[v].abs() < 1e-8, "I[f] = {} at {v}", d.el[v]);
        }
    }

    #[test]
    fn icosphere_mean_curvature() {
        let m = meshgen::icosphere(1.0, 4).unwrap();
        let c = discrete_curvature(&m).unwrap();
        let mean: f64 = c.h.iter().sum::<f64>() / c.h.len() as f64;
        approx::assert_relative_eq!(mean, 2.0, max_relative = 0.03);
        let good = c.a0_norm2.iter().filter(|&&x| x <= 0.05).count();
        assert!(good as f64 >= 0.95 * c.a0_norm2.len() as f64);
    }

    #[test]
    fn cylinder_principal_curvatures() {
        let surf = ParametricSurface::cylinder(1.0);
        let (m, _) = surf.sample_mesh(24).unwrap();
        let c = discrete_curvature(&m).unwrap();
        for v in m.interior_vertices() {
            approx::assert_relative_eq!(c.kappa1[v], 1.0, max_relative = 0.05);
            assert!(c.kappa2[v].abs() < 0.05);
        }
    }

    #[test]
    fn trace_decomposition_discrete() {
        let surf = ParametricSurface::graph_disk("0.25u^2 + 0.25v^2", 1.0).unwrap();
        let (m, _) = surf.sample_mesh(16).unwrap();
        let c = discrete_curvature(&m).unwrap();
        for v in 0..m.num_vertices() {
            if c.a_norm2[v] > 0.0 {
                approx::assert_relative_eq!(
                    c.a_norm2[v],
                    c.h[v] * c.h[v] / 2.0 + c.a0_norm2[v],
                    max_relative = 1e-8
                );
            }
            let [a, b, cc] = c.a0(v);
            let _ = b;
            assert!((a + cc).abs() <= 1e-10 * c.a_norm2[v].sqrt().max(1e-30));
        }
    }

    #[test]
    fn boundary_residuals_flat_and_cap() {
        let m = meshgen::flat_disk(1.0, 10).unwrap();
        let c = discrete_curvature(&m).unwrap();
        let d = el_residual(&m, &c).unwrap();
        let r = boundary_residuals(&m, &c, &d);
        let (a, gh, glh) = r.overall_max();
        assert!(a < 1e-8 && gh < 1e-8 && glh < 1e-8);

        let cap = meshgen::spherical_cap(2.0, 0.9, 16).unwrap();
        let cc = discrete_curvature(&cap).unwrap();
        let dd = el_residual(&cap, &cc).unwrap();
        let rr = boundary_residuals(&cap, &cc, &dd);
        let expected = 2f64.sqrt() / 2.0;
        let mut a_vals: Vec<f64> = rr.per_vertex.iter().map(|r| r.a_norm).collect();
        a_vals.sort_by(f64::total_cmp);
        let median = a_vals[a_vals.len() / 2];
        approx::assert_relative_eq!(median, expected, max_relative = 0.15);
        assert!(a_vals[0] > 0.3 * expected, "boundary |A| not clearly nonzero");

        let closed = meshgen::icosphere(1.0, 2).unwrap();
        let c3 = discrete_curvature(&closed).unwrap();
        let d3 = el_residual(&closed, &c3).unwrap();
        assert!(boundary_residuals(&closed, &c3, &d3).per_vertex.is_empty());
    }

    #[test]
    fn codazzi_flat_and_sphere() {
        let m = meshgen::flat_disk(1.0, 10).unwrap();
        let c = discrete_curvature(&m).unwrap();
        for &(gh, ga, ga0) in &codazzi_quantities(&m, &c) {
            assert!(gh < 1e-8 && ga < 1e-8 && ga0 < 1e-8);
        }

        let coarse = meshgen::icosphere(1.0, 3).unwrap();
        let fine = meshgen::icosphere(1.0, 4).unwrap();
        let norm = |m: &Mesh| {
            let c = discrete_curvature(m).unwrap();
            let q = codazzi_quantities(m, &c);
            let total: f64 = (0..m.num_vertices())
                .map(|v| q[v].1 * q[v].1 * m.vertex_area(v))
                .sum();
            (total / m.total_area()).sqrt()
        };
        let (nc, nf) = (norm(&coarse), norm(&fine));
        assert!(nf < nc, "|grad A| did not shrink: {nc} -> {nf}");
    }

    #[test]
    fn rigid_motion_invariance_of_curvature() {
        use nalgebra::Rotation3;
        let surf = ParametricSurface::graph_disk("0.25u^2 + 0.25v^2", 1.0).unwrap();
        let (m, _) = surf.sample_mesh(10).unwrap();
        let rot = Rotation3::from_euler_angles(0.7, -0.2, 0.4);
        let t = Vector3::new(1.0, -0.5, 2.0);
        let moved: Vec<Vector3<f64>> = m.positions().iter().map(|p| rot * p + t).collect();
        let m2 = Mesh::new(moved, m.faces().to_vec()).unwrap();
        let (c1, c2) = (discrete_curvature(&m).unwrap(), discrete_curvature(&m2).unwrap());
        let (d1, d2) = (el_residual(&m, &c1).unwrap(), el_residual(&m2, &c2).unwrap());
        for v in 0..m.num_vertices() {
            assert!((c1.h[v] - c2.h[v]).abs() < 1e-10);
            assert!((c1.a_norm2[v] - c2.a_norm2[v]).abs() < 1e-10);
            assert!((d1.el[v] - d2.el[v]).abs() < 1e-8 * (1.0 + d1.el[v].abs()));
        }
    }

    #[test]
    fn scaling_covariance_of_curvature() {
        let surf = ParametricSurface::graph_disk("0.25u^2 + 0.25v^2", 1.0).unwrap();
        let (m, _) = surf.sample_mesh(10).unwrap();
        let lam = 3.0;
        let scaled: Vec<Vector3<f64>> = m.positions().iter().map(|p| p * lam).collect();
        let m2 = Mesh::new(scaled, m.faces().to_vec()).unwrap();
        let (c1, c2) = (discrete_curvature(&m).unwrap(), discrete_curvature(&m2).unwrap());
        let (d1, d2) = (el_residual(&m, &c1).unwrap(), el_residual(&m2, &c2).unwrap());
        for v in m.interior_vertices() {
            if c1.h[v].abs() > 1e-6 {
                approx::assert_relative_eq!(c2.h[v], c1.h[v] / lam, max_relative = 1e-8);
            }
            if d1.el[v].abs() > 1e-6 {
                approx::assert_relative_eq!(
                    d2.el[v],
                    d1.el[v] / lam.powi(5),
                    max_relative = 1e-8
                );
            }
        }
    }
}
