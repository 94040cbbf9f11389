//! Per-vertex scalar and vector fields.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// One value per vertex, either scalar or 3-vector.
#[derive(Clone, Debug)]
pub enum VertexField {
    Scalar(Vec<f64>),
    Vector(Vec<Vector3<f64>>),
}

impl VertexField {
    pub fn zeros(n: usize) -> Self {
        VertexField::Scalar(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        match self {
            VertexField::Scalar(v) => v.len(),
            VertexField::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scalars(&self) -> Result<&[f64]> {
        match self {
            VertexField::Scalar(v) => Ok(v),
            VertexField::Vector(_) => Err(Error::FieldKind),
        }
    }

    pub fn vectors(&self) -> Result<&[Vector3<f64>]> {
        match self {
            VertexField::Vector(v) => Ok(v),
            VertexField::Scalar(_) => Err(Error::FieldKind),
        }
    }

    pub fn check_len(&self, mesh: &Mesh) -> Result<()> {
        if self.len() != mesh.num_vertices() {
            return Err(Error::FieldLength {
                got: self.len(),
                expect: mesh.num_vertices(),
            });
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        match self {
            VertexField::Scalar(v) => v.iter().all(|x| x.is_finite()),
            VertexField::Vector(v) => v.iter().all(|x| x.iter().all(|c| c.is_finite())),
        }
    }
}

impl From<Vec<f64>> for VertexField {
    fn from(v: Vec<f64>) -> Self {
        VertexField::Scalar(v)
    }
}

impl From<Vec<Vector3<f64>>> for VertexField {
    fn from(v: Vec<Vector3<f64>>) -> Self {
        VertexField::Vector(v)
    }
}
