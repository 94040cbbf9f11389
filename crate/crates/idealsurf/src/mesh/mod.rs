//! Oriented triangle meshes with boundary.
//!
//! [`Mesh`] owns vertex positions, face connectivity, boundary loops, and the
//! metric quantities (areas, normals, conormals, cotangent weights) every
//! downstream operator consumes. A mesh is immutable once its metric has been
//! computed; flow steps build a fresh mesh from displaced positions.

mod metric;
mod obj;

pub use obj::{load_mesh, parse_obj, write_obj};

use nalgebra::Vector3;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Mesh {
    pub(crate) positions: Vec<Vector3<f64>>,
    pub(crate) faces: Vec<[usize; 3]>,
    /// Twin halfedge of `3f + k` (the halfedge from corner `k` to corner `k+1`),
    /// or `None` on the boundary.
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) twin: Vec<Option<usize>>,
    pub(crate) vertex_faces: Vec<Vec<usize>>,
    pub(crate) neighbors: Vec<Vec<usize>>,
    pub(crate) boundary_loops: Vec<Vec<usize>>,
    pub(crate) is_boundary: Vec<bool>,

    // Metric data, populated by `compute_metric`.
    pub(crate) face_area: Vec<f64>,
    pub(crate) face_normal: Vec<Vector3<f64>>,
    pub(crate) vertex_area: Vec<f64>,
    pub(crate) vertex_normal: Vec<Vector3<f64>>,
    /// Unit outward conormal per vertex; zero on interior vertices.
    pub(crate) conormal: Vec<Vector3<f64>>,
    /// Trapezoidal boundary length weight per vertex; zero on interior vertices.
    pub(crate) boundary_weight: Vec<f64>,
    /// Cotangent weights `w_ij` stored per vertex as `(neighbor, weight)`.
    pub(crate) cot_weights: Vec<Vec<(usize, f64)>>,
    pub(crate) has_metric: bool,
}

impl Mesh {
    /// Builds connectivity from raw positions and faces and checks the
    /// manifoldness and orientation invariants. Metric data is not yet
    /// populated; call [`Mesh::compute_metric`].
    pub fn build(positions: Vec<Vector3<f64>>, faces: Vec<[usize; 3]>) -> Result<Mesh> {
        let nv = positions.len();
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= nv {
                    return Err(Error::ObjParse {
                        line: 0,
                        msg: format!("face {fi} references vertex {v} out of range"),
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::DegenerateFace { face: fi });
            }
        }

        // Directed edge -> halfedge id. A repeat of the same direction means
        // inconsistent winding; three faces on one undirected edge means a
        // non-manifold edge.
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                if directed.insert((a, b), 3 * fi + k).is_some() {
                    // Distinguish winding problems from true non-manifold edges:
                    // if the opposite direction also occurs twice the edge has
                    // more than two faces.
                    return if directed.contains_key(&(b, a)) {
                        Err(Error::NonManifoldEdge { a: a.min(b), b: a.max(b) })
                    } else {
                        Err(Error::InconsistentWinding { a, b })
                    };
                }
            }
        }
        let mut twin = vec![None; 3 * faces.len()];
        for (&(a, b), &he) in &directed {
            twin[he] = directed.get(&(b, a)).copied();
        }

        let mut vertex_faces = vec![Vec::new(); nv];
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                vertex_faces[f[k]].push(fi);
                let n = f[(k + 1) % 3];
                if !neighbors[f[k]].contains(&n) {
                    neighbors[f[k]].push(n);
                }
                if !neighbors[n].contains(&f[k]) {
                    neighbors[n].push(f[k]);
                }
            }
        }
        for v in 0..nv {
            if vertex_faces[v].is_empty() {
                return Err(Error::IsolatedVertex { v });
            }
        }

        // Boundary loops. A boundary halfedge a->b without twin contributes the
        // directed boundary edge b->a; these close up into cycles on a manifold.
        let mut bnext: BTreeMap<usize, usize> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                if twin[3 * fi + k].is_none() {
                    let (a, b) = (f[k], f[(k + 1) % 3]);
                    if bnext.insert(b, a).is_some() {
                        return Err(Error::NonManifoldVertex { v: b });
                    }
                }
            }
        }
        let mut is_boundary = vec![false; nv];
        for (&b, &a) in &bnext {
            is_boundary[b] = true;
            is_boundary[a] = true;
        }
        let mut boundary_loops = Vec::new();
        let mut visited: BTreeMap<usize, bool> = bnext.keys().map(|&k| (k, false)).collect();
        let starts: Vec<usize> = bnext.keys().copied().collect();
        for start in starts {
            if visited[&start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = start;
            loop {
                cycle.push(cur);
                *visited.get_mut(&cur).unwrap() = true;
                cur = *bnext.get(&cur).ok_or(Error::NonManifoldVertex { v: cur })?;
                if cur == start {
                    break;
                }
            }
            boundary_loops.push(cycle);
        }

        Ok(Mesh {
            positions,
            faces,
            twin,
            vertex_faces,
            neighbors,
            boundary_loops,
            is_boundary,
            face_area: Vec::new(),
            face_normal: Vec::new(),
            vertex_area: Vec::new(),
            vertex_normal: Vec::new(),
            conormal: Vec::new(),
            boundary_weight: Vec::new(),
            cot_weights: Vec::new(),
            has_metric: false,
        })
    }

    /// Builds connectivity and metric in one go.
    pub fn new(positions: Vec<Vector3<f64>>, faces: Vec<[usize; 3]>) -> Result<Mesh> {
        let mut m = Mesh::build(positions, faces)?;
        m.compute_metric()?;
        Ok(m)
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn position(&self, v: usize) -> Vector3<f64> {
        self.positions[v]
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_loops.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        self.face_area[f]
    }

    pub fn face_normal(&self, f: usize) -> Vector3<f64> {
        self.face_normal[f]
    }

    pub fn vertex_area(&self, v: usize) -> f64 {
        self.vertex_area[v]
    }

    pub fn vertex_normal(&self, v: usize) -> Vector3<f64> {
        self.vertex_normal[v]
    }

    pub fn conormal(&self, v: usize) -> Vector3<f64> {
        self.conormal[v]
    }

    pub fn boundary_weight(&self, v: usize) -> f64 {
        self.boundary_weight[v]
    }

    pub fn cot_weights(&self, v: usize) -> &[(usize, f64)] {
        &self.cot_weights[v]
    }

    pub fn has_metric(&self) -> bool {
        self.has_metric
    }

    pub fn total_area(&self) -> f64 {
        self.face_area.iter().sum()
    }

    /// Bounding-box diagonal, used to scale tolerances and time steps.
    pub fn diameter(&self) -> f64 {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for p in &self.positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    /// Mean edge length, a proxy for the mesh spacing h.
    pub fn mean_edge_length(&self) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (v, nbrs) in self.neighbors.iter().enumerate() {
            for &w in nbrs {
                if w > v {
                    sum += (self.positions[w] - self.positions[v]).norm();
                    n += 1;
                }
            }
        }
        sum / n as f64
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_vertices()).filter(|&v| !self.is_boundary[v])
    }

    /// Returns a mesh with the same connectivity and displaced positions.
    pub fn displaced(&self, displacement: &[Vector3<f64>]) -> Result<Mesh> {
        let positions: Vec<Vector3<f64>> = self
            .positions
            .iter()
            .zip(displacement.iter())
            .map(|(p, d)| p + d)
            .collect();
        Mesh::new(positions, self.faces.clone())
    }
}
