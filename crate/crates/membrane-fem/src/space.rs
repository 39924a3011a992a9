//! P1 Lagrange finite element spaces on triangulated surfaces.

use std::sync::Arc;

use crate::mesh::{Geometry, TriangleMesh};

/// Continuous piecewise-linear space with one dof per mesh vertex.
#[derive(Clone, Debug)]
pub struct FESpace {
    pub mesh: TriangleMesh,
    pub ndof: usize,
    /// True on dofs eliminated by homogeneous Dirichlet (Navier) conditions;
    /// all false on closed surfaces.
    pub dirichlet_mask: Vec<bool>,
}

impl FESpace {
    /// Space without essential boundary conditions.
    pub fn new(mesh: TriangleMesh) -> Arc<Self> {
        let ndof = mesh.vertices.len();
        Arc::new(FESpace {
            mesh,
            ndof,
            dirichlet_mask: vec![false; ndof],
        })
    }

    /// Space with homogeneous Dirichlet values on boundary vertices, as used
    /// for the Navier conditions of the flat membrane problem. On a closed
    /// surface the mask stays all false.
    pub fn with_boundary_conditions(mesh: TriangleMesh) -> Arc<Self> {
        let ndof = mesh.vertices.len();
        let mut mask = vec![false; ndof];
        if mesh.geometry == Geometry::FlatDisc {
            for &b in &mesh.boundary_vertices {
                mask[b] = true;
            }
        }
        Arc::new(FESpace {
            mesh,
            ndof,
            dirichlet_mask: mask,
        })
    }

    pub fn has_dirichlet(&self) -> bool {
        self.dirichlet_mask.iter().any(|&m| m)
    }
}

/// A discrete function given by nodal coefficients.
#[derive(Clone, Debug)]
pub struct FEFunction {
    pub space: Arc<FESpace>,
    pub coefficients: Vec<f64>,
}

impl FEFunction {
    pub fn new(space: Arc<FESpace>, coefficients: Vec<f64>) -> Self {
        assert_eq!(coefficients.len(), space.ndof, "coefficient length != ndof");
        FEFunction {
            space,
            coefficients,
        }
    }

    pub fn zero(space: Arc<FESpace>) -> Self {
        let n = space.ndof;
        Self::new(space, vec![0.0; n])
    }
}
