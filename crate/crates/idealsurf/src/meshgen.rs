//! Procedural test geometry: icospheres, disk and rectangle layouts, and the
//! bumped disk used by the flow experiments.

use nalgebra::Vector3;
use std::collections::BTreeMap;

use crate::error::Result;
use crate::mesh::Mesh;

/// Unit-disk layout: concentric rings with `6k` vertices on ring `k`.
/// Returns chart coordinates in the closed unit disk plus the triangulation,
/// wound counterclockwise in the `(u, v)` plane.
pub fn disk_layout(rings: usize) -> (Vec<(f64, f64)>, Vec<[usize; 3]>) {
    assert!(rings >= 1);
    let mut uv = vec![(0.0, 0.0)];
    let mut ring_start = vec![0usize];
    for k in 1..=rings {
        ring_start.push(uv.len());
        let n = 6 * k;
        let r = k as f64 / rings as f64;
        for i in 0..n {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            uv.push((r * th.cos(), r * th.sin()));
        }
    }
    let mut faces = Vec::new();
    for k in 1..=rings {
        let no = 6 * k;
        let ni = 6 * (k - 1).max(0);
        let outer = ring_start[k];
        let inner = if k == 1 { 0 } else { ring_start[k - 1] };
        let inner_len = if k == 1 { 1 } else { ni };
        bridge_rings(&mut faces, outer, no, inner, inner_len);
    }
    (uv, faces)
}

/// Triangulates the annulus between two concentric vertex rings by walking
/// both rings in angle order. `inner_len == 1` degenerates to a fan.
fn bridge_rings(
    faces: &mut Vec<[usize; 3]>,
    outer: usize,
    outer_len: usize,
    inner: usize,
    inner_len: usize,
) {
    let (mut i, mut j) = (0usize, 0usize);
    while i < outer_len || j < inner_len {
        let adv_outer = if j >= inner_len {
            true
        } else if i >= outer_len {
            false
        } else {
            (i + 1) as f64 / outer_len as f64 <= (j + 1) as f64 / inner_len as f64
        };
        if adv_outer {
            faces.push([
                outer + i,
                outer + (i + 1) % outer_len,
                inner + j % inner_len,
            ]);
            i += 1;
        } else {
            if inner_len > 1 {
                faces.push([
                    outer + i % outer_len,
                    inner + (j + 1) % inner_len,
                    inner + j,
                ]);
            }
            j += 1;
        }
    }
}

/// Rectangle grid layout with `res x res` cells. Diagonals all run the same
/// way so every interior vertex has a point-symmetric hexagonal star, which
/// the cotan Laplacian needs for pointwise accuracy.
pub fn rect_layout(
    res: usize,
    (u0, u1): (f64, f64),
    (v0, v1): (f64, f64),
) -> (Vec<(f64, f64)>, Vec<[usize; 3]>) {
    assert!(res >= 1);
    let n = res + 1;
    let mut uv = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let u = u0 + (u1 - u0) * i as f64 / res as f64;
            let v = v0 + (v1 - v0) * j as f64 / res as f64;
            uv.push((u, v));
        }
    }
    let id = |i: usize, j: usize| i * n + j;
    let mut faces = Vec::new();
    for i in 0..res {
        for j in 0..res {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    (uv, faces)
}

/// Unit-disk layout obtained by mapping the uniform square grid through the
/// elliptical square-to-disk map `(u, v) -> (u sqrt(1 - v²/2), v sqrt(1 - u²/2))`.
/// The map is smooth in the open square, so the grid's point-symmetric stars
/// survive to O(h²) everywhere in the interior and the square's boundary
/// lands exactly on the unit circle. The four square corners are singular
/// points of the map: the cells there degenerate into slivers, which the
/// curvature estimators must (and do) tolerate.
pub fn disk_grid_layout(res: usize) -> (Vec<(f64, f64)>, Vec<[usize; 3]>) {
    let (uv, faces) = rect_layout(res, (-1.0, 1.0), (-1.0, 1.0));
    let mapped = uv
        .iter()
        .map(|&(u, v)| {
            (
                u * (1.0 - v * v / 2.0).sqrt(),
                v * (1.0 - u * u / 2.0).sqrt(),
            )
        })
        .collect();
    (mapped, faces)
}

/// Closed latitude/longitude sphere layout in chart coordinates
/// `(u, v) = (colatitude, longitude)` with welded seam and pole vertices.
/// Pole chart coordinates are the degenerate `(0, 0)` and `(pi, 0)`.
pub fn latlong_layout(res: usize) -> (Vec<(f64, f64)>, Vec<[usize; 3]>) {
    assert!(res >= 2);
    let rows = res;
    let cols = 2 * res;
    let pi = std::f64::consts::PI;
    let mut uv = Vec::new();
    uv.push((0.0, 0.0)); // north pole
    for i in 1..rows {
        for j in 0..cols {
            uv.push((pi * i as f64 / rows as f64, 2.0 * pi * j as f64 / cols as f64));
        }
    }
    let south = uv.len();
    uv.push((pi, 0.0));
    let id = |i: usize, j: usize| 1 + (i - 1) * cols + j % cols;
    let mut faces = Vec::new();
    for j in 0..cols {
        faces.push([0, id(1, j), id(1, j + 1)]);
    }
    for i in 1..rows - 1 {
        for j in 0..cols {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    for j in 0..cols {
        faces.push([id(rows - 1, j), south, id(rows - 1, j + 1)]);
    }
    (uv, faces)
}

/// Icosphere of radius `r` after `subdiv` 4-to-1 subdivisions, outward winding.
pub fn icosphere(r: f64, subdiv: usize) -> Result<Mesh> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let mut positions: Vec<Vector3<f64>> = raw
        .iter()
        .map(|&(x, y, z)| Vector3::new(x, y, z).normalize() * r)
        .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdiv {
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let p = ((positions[a] + positions[b]) / 2.0).normalize() * r;
                    positions.push(p);
                    positions.len() - 1
                });
            }
            next.push([f[0], mid[0], mid[2]]);
            next.push([f[1], mid[1], mid[0]]);
            next.push([f[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        faces = next;
    }
    Mesh::new(positions, faces)
}

/// Flat disk of radius `r` in the z = 0 plane, grid-based layout.
pub fn flat_disk(r: f64, res: usize) -> Result<Mesh> {
    let (uv, faces) = disk_grid_layout(res);
    let positions = uv
        .iter()
        .map(|&(u, v)| Vector3::new(r * u, r * v, 0.0))
        .collect();
    Mesh::new(positions, faces)
}

/// Disk of radius `r` with a compactly supported C^2 interior bump of the
/// given amplitude: `z = A (1 - (rho/r0)^2)^3` inside `rho < r0 = 0.8 r`.
/// The boundary collar stays exactly planar, so the flat boundary conditions
/// hold at the rim; the bump is wide enough that amplitude 0.01 on the unit
/// disk keeps the smallness monitor `∫|A|²dμ` below 10⁻².
pub fn perturbed_disk(r: f64, res: usize, amplitude: f64) -> Result<Mesh> {
    let (uv, faces) = disk_grid_layout(res);
    let r0 = 0.8 * r;
    let positions = uv
        .iter()
        .map(|&(u, v)| {
            let (x, y) = (r * u, r * v);
            let rho2 = (x * x + y * y) / (r0 * r0);
            let z = if rho2 < 1.0 {
                amplitude * (1.0 - rho2).powi(3)
            } else {
                0.0
            };
            Vector3::new(x, y, z)
        })
        .collect();
    Mesh::new(positions, faces)
}

/// Spherical cap of radius `r` spanning colatitude `[0, u_max]`; its boundary
/// circle has nonzero |A|, violating the flat boundary conditions by design.
pub fn spherical_cap(r: f64, u_max: f64, res: usize) -> Result<Mesh> {
    let (uv, faces) = disk_grid_layout(res);
    let positions = uv
        .iter()
        .map(|&(x, y)| {
            let rho = (x * x + y * y).sqrt().min(1.0);
            let u = u_max * rho;
            let th = y.atan2(x);
            Vector3::new(
                r * u.sin() * th.cos(),
                r * u.sin() * th.sin(),
                r * u.cos(),
            )
        })
        .collect();
    Mesh::new(positions, faces)
}
