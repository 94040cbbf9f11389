//! Metric bookkeeping: areas, normals, conormals, cotangent weights.

use nalgebra::Vector3;

use super::Mesh;
use crate::error::{Error, Result};

const DEGENERATE_AREA: f64 = 1e-300;

impl Mesh {
    /// Populates face/vertex areas, normals, boundary conormals, boundary
    /// length weights, and cotangent weights.
    ///
    /// Vertex areas use the mixed Voronoi rule: the Voronoi cell area on
    /// non-obtuse triangles, clamped to half (obtuse corner) or a quarter
    /// (other corners) of the face area on obtuse ones. Vertex normals are
    /// area-weighted averages of incident face normals.
    pub fn compute_metric(&mut self) -> Result<()> {
        let nv = self.num_vertices();
        let nf = self.num_faces();
        self.face_area = vec![0.0; nf];
        self.face_normal = vec![Vector3::zeros(); nf];
        self.vertex_area = vec![0.0; nv];
        self.vertex_normal = vec![Vector3::zeros(); nv];
        self.conormal = vec![Vector3::zeros(); nv];
        self.boundary_weight = vec![0.0; nv];
        self.cot_weights = vec![Vec::new(); nv];

        for (fi, f) in self.faces.iter().enumerate() {
            let [a, b, c] = *f;
            let (pa, pb, pc) = (self.positions[a], self.positions[b], self.positions[c]);
            let n = (pb - pa).cross(&(pc - pa));
            let double_area = n.norm();
            if !(double_area > DEGENERATE_AREA) || !double_area.is_finite() {
                return Err(Error::DegenerateFace { face: fi });
            }
            self.face_area[fi] = 0.5 * double_area;
            self.face_normal[fi] = n / double_area;

            // Corner cotangents; angle at corner k is opposite edge k.
            let edges = [pc - pb, pa - pc, pb - pa];
            let mut cot = [0.0; 3];
            for k in 0..3 {
                let e1 = -edges[(k + 1) % 3];
                let e2 = edges[(k + 2) % 3];
                cot[k] = e1.dot(&e2) / double_area;
            }

            // Mixed Voronoi areas.
            let obtuse = (0..3).position(|k| cot[k] < 0.0);
            match obtuse {
                None => {
                    for k in 0..3 {
                        let vk = f[k];
                        let l1 = edges[(k + 1) % 3].norm_squared();
                        let l2 = edges[(k + 2) % 3].norm_squared();
                        self.vertex_area[vk] +=
                            (l1 * cot[(k + 1) % 3] + l2 * cot[(k + 2) % 3]) / 8.0;
                    }
                }
                Some(ko) => {
                    for k in 0..3 {
                        let share = if k == ko { 0.5 } else { 0.25 };
                        self.vertex_area[f[k]] += share * self.face_area[fi];
                    }
                }
            }

            // Cotangent weight contributions: the angle at corner k is opposite
            // the edge between the other two corners.
            for k in 0..3 {
                let (i, j) = (f[(k + 1) % 3], f[(k + 2) % 3]);
                let w = 0.5 * cot[k];
                push_weight(&mut self.cot_weights, i, j, w);
                push_weight(&mut self.cot_weights, j, i, w);
            }

            for k in 0..3 {
                self.vertex_normal[f[k]] += self.face_area[fi] * self.face_normal[fi];
            }
        }

        for v in 0..nv {
            let n = self.vertex_normal[v].norm();
            if n > 0.0 {
                self.vertex_normal[v] /= n;
            }
        }

        self.compute_conormals();
        self.has_metric = true;
        Ok(())
    }

    fn compute_conormals(&mut self) {
        let loops = self.boundary_loops.clone();
        for cycle in &loops {
            let n = cycle.len();
            for (k, &v) in cycle.iter().enumerate() {
                let prev = cycle[(k + n - 1) % n];
                let next = cycle[(k + 1) % n];
                let (pp, pv, pn) = (
                    self.positions[prev],
                    self.positions[v],
                    self.positions[next],
                );
                self.boundary_weight[v] = 0.5 * ((pv - pp).norm() + (pn - pv).norm());

                let t = (pn - pp).normalize();
                let nu = self.vertex_normal[v];
                let mut eta = t.cross(&nu);
                let norm = eta.norm();
                if norm > 0.0 {
                    eta /= norm;
                }
                // Orient outward: positive inner product with the direction
                // from the adjacent interior centroid to the vertex, projected
                // to the tangent plane.
                let mut centroid = Vector3::zeros();
                let mut cnt = 0.0;
                for &f in &self.vertex_faces[v] {
                    let [a, b, c] = self.faces[f];
                    centroid += (self.positions[a] + self.positions[b] + self.positions[c]) / 3.0;
                    cnt += 1.0;
                }
                centroid /= cnt;
                let out = pv - centroid;
                let out_t = out - nu * out.dot(&nu);
                if eta.dot(&out_t) < 0.0 {
                    eta = -eta;
                }
                self.conormal[v] = eta;
            }
        }
    }
}

fn push_weight(weights: &mut [Vec<(usize, f64)>], i: usize, j: usize, w: f64) {
    for entry in weights[i].iter_mut() {
        if entry.0 == j {
            entry.1 += w;
            return;
        }
    }
    weights[i].push((j, w));
}
