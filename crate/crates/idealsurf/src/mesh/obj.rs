//! Minimal OBJ reader/writer: `v x y z` and triangular `f i j k` records.

use nalgebra::Vector3;
use std::path::Path;

use super::Mesh;
use crate::error::{Error, Result};

/// Parses OBJ text into positions and triangular faces.
///
/// Supports comments, `v` records with at least three coordinates, and `f`
/// records with exactly three vertex references (`i`, `i/t`, `i/t/n`, or
/// negative relative indices). Any other face arity is rejected.
pub fn parse_obj(text: &str) -> Result<(Vec<Vector3<f64>>, Vec<[usize; 3]>)> {
    let mut positions: Vec<Vector3<f64>> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let stripped = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        let mut tok = stripped.split_whitespace();
        let Some(head) = tok.next() else { continue };
        match head {
            "v" => {
                let mut xyz = [0.0f64; 3];
                for x in xyz.iter_mut() {
                    let s = tok.next().ok_or(Error::ObjParse {
                        line,
                        msg: "vertex needs three coordinates".into(),
                    })?;
                    *x = s.parse().map_err(|_| Error::ObjParse {
                        line,
                        msg: format!("bad coordinate {s:?}"),
                    })?;
                    if !x.is_finite() {
                        return Err(Error::ObjParse {
                            line,
                            msg: format!("non-finite coordinate {s:?}"),
                        });
                    }
                }
                positions.push(Vector3::new(xyz[0], xyz[1], xyz[2]));
            }
            "f" => {
                let refs: Vec<&str> = tok.collect();
                if refs.len() != 3 {
                    return Err(Error::ObjParse {
                        line,
                        msg: format!("face has {} vertices, only triangles are supported", refs.len()),
                    });
                }
                let mut idxs = [0usize; 3];
                for (k, r) in refs.iter().enumerate() {
                    let first = r.split('/').next().unwrap_or("");
                    let i: i64 = first.parse().map_err(|_| Error::ObjParse {
                        line,
                        msg: format!("bad vertex reference {r:?}"),
                    })?;
                    let n = positions.len() as i64;
                    let resolved = if i > 0 { i - 1 } else if i < 0 { n + i } else { -1 };
                    if resolved < 0 || resolved >= n {
                        return Err(Error::ObjParse {
                            line,
                            msg: format!("vertex reference {i} out of range"),
                        });
                    }
                    idxs[k] = resolved as usize;
                }
                faces.push(idxs);
            }
            _ => {}
        }
    }
    Ok((positions, faces))
}

/// Loads an OBJ file, builds connectivity, and computes the metric.
pub fn load_mesh<P: AsRef<Path>>(path: P) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let (positions, faces) = parse_obj(&text)?;
    Mesh::new(positions, faces)
}

/// Writes a mesh as OBJ with 1-based face indices.
pub fn write_obj<P: AsRef<Path>>(mesh: &Mesh, path: P) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for p in mesh.positions() {
        out.push_str(&format!("v {:.17e} {:.17e} {:.17e}\n", p.x, p.y, p.z));
    }
    for f in mesh.faces() {
        out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
