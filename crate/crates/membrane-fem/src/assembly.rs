//! Assembly of P1 stiffness, mass, load vectors, point-evaluation and
//! mean-value operators over flat triangles, plus the weighted combinations
//! that realize the bilinear forms c, b, m of the membrane problems.
//!
//! Every form here has the shape alpha * grad-grad + beta * mass; loads are
//! integrated with the flat-triangle measure but the data is evaluated at
//! the lifted quadrature point, which is the second-order-consistent
//! surrogate for affine surface elements.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mesh::{lift_point, triangle_area, GEOM_TOL};
use crate::quadrature::triangle_rule;
use crate::space::{FEFunction, FESpace};
use crate::sparse::SparseSymMatrix;
use crate::vec3;

use std::sync::Arc;

const DEGENERATE_AREA: f64 = 1e-14;

/// Weights (alpha, beta) of a form s(u,v) = alpha grad-grad + beta mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormWeights {
    pub grad_coeff: f64,
    pub mass_coeff: f64,
    pub tag: FormTag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormTag {
    C,
    B,
    M,
    Custom,
}

impl FormWeights {
    /// The c-form on a sphere of radius `radius`:
    /// (sigma/kappa - 2 - 2/R^2) grad-grad - (1 + 2 sigma / (kappa R^2)) mass.
    pub fn c_sphere(kappa: f64, sigma: f64, radius: f64) -> Self {
        let r2 = radius * radius;
        FormWeights {
            grad_coeff: sigma / kappa - 2.0 - 2.0 / r2,
            mass_coeff: -(1.0 + 2.0 * sigma / (kappa * r2)),
            tag: FormTag::C,
        }
    }

    /// The c-form on a flat domain: (sigma/kappa - 2) grad-grad - mass.
    pub fn c_flat(kappa: f64, sigma: f64) -> Self {
        FormWeights {
            grad_coeff: sigma / kappa - 2.0,
            mass_coeff: -1.0,
            tag: FormTag::C,
        }
    }

    /// b(u,v) = grad-grad + mass (the full H1 inner product).
    pub fn b() -> Self {
        FormWeights {
            grad_coeff: 1.0,
            mass_coeff: 1.0,
            tag: FormTag::B,
        }
    }

    /// m(u,v) = mass.
    pub fn m() -> Self {
        FormWeights {
            grad_coeff: 0.0,
            mass_coeff: 1.0,
            tag: FormTag::M,
        }
    }

    pub fn custom(grad_coeff: f64, mass_coeff: f64) -> Self {
        FormWeights {
            grad_coeff,
            mass_coeff,
            tag: FormTag::Custom,
        }
    }
}

/// In-plane gradients of the three P1 basis functions on a triangle.
pub fn p1_gradients(p: [[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let n = vec3::cross(vec3::sub(p[1], p[0]), vec3::sub(p[2], p[0]));
    let nn = vec3::dot(n, n);
    if nn.sqrt() * 0.5 < DEGENERATE_AREA {
        return Err(Error::DegenerateTriangle(usize::MAX, nn.sqrt() * 0.5));
    }
    // grad phi_i = n x (p_{i+2} - p_{i+1}) / |n|^2
    Ok([
        vec3::scale(1.0 / nn, vec3::cross(n, vec3::sub(p[2], p[1]))),
        vec3::scale(1.0 / nn, vec3::cross(n, vec3::sub(p[0], p[2]))),
        vec3::scale(1.0 / nn, vec3::cross(n, vec3::sub(p[1], p[0]))),
    ])
}

fn triangle_points(space: &FESpace, t: usize) -> [[f64; 3]; 3] {
    let [a, b, c] = space.mesh.triangles[t];
    [
        space.mesh.vertices[a],
        space.mesh.vertices[b],
        space.mesh.vertices[c],
    ]
}

/// K_ij = sum_T area_T grad phi_i . grad phi_j.
pub fn assemble_stiffness(space: &FESpace) -> Result<SparseSymMatrix> {
    let mut triplets = Vec::with_capacity(9 * space.mesh.triangles.len());
    for (t, tri) in space.mesh.triangles.iter().enumerate() {
        let p = triangle_points(space, t);
        let area = triangle_area(p[0], p[1], p[2]);
        if area < DEGENERATE_AREA {
            return Err(Error::DegenerateTriangle(t, area));
        }
        let g = p1_gradients(p)?;
        for i in 0..3 {
            for j in i..3 {
                triplets.push((tri[i], tri[j], area * vec3::dot(g[i], g[j])));
            }
        }
    }
    Ok(SparseSymMatrix::from_triplets(space.ndof, &triplets))
}

/// Exact P1 mass matrix, local block (A/12) [[2,1,1],[1,2,1],[1,1,2]].
pub fn assemble_mass(space: &FESpace) -> Result<SparseSymMatrix> {
    let mut triplets = Vec::with_capacity(9 * space.mesh.triangles.len());
    for (t, tri) in space.mesh.triangles.iter().enumerate() {
        let p = triangle_points(space, t);
        let area = triangle_area(p[0], p[1], p[2]);
        if area < DEGENERATE_AREA {
            return Err(Error::DegenerateTriangle(t, area));
        }
        for i in 0..3 {
            for j in i..3 {
                let factor = if i == j { 2.0 } else { 1.0 };
                triplets.push((tri[i], tri[j], factor * area / 12.0));
            }
        }
    }
    Ok(SparseSymMatrix::from_triplets(space.ndof, &triplets))
}

/// F_i = sum_T sum_q w_q f(lift(x_q)) phi_i(x_q) |T|.
pub fn assemble_load(
    space: &FESpace,
    field: &ScalarField,
    quad_degree: usize,
) -> Result<Vec<f64>> {
    let rule = triangle_rule(quad_degree)?;
    let mut load = vec![0.0; space.ndof];
    for (t, tri) in space.mesh.triangles.iter().enumerate() {
        let p = triangle_points(space, t);
        let area = triangle_area(p[0], p[1], p[2]);
        if area < DEGENERATE_AREA {
            return Err(Error::DegenerateTriangle(t, area));
        }
        for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
            let x = barycentric_point(&p, node);
            let lifted = lift_point(x, space.mesh.geometry)?;
            let value = field.eval_checked(&lifted)?;
            for i in 0..3 {
                load[tri[i]] += w * value * node[i] * area;
            }
        }
    }
    Ok(load)
}

pub fn barycentric_point(p: &[[f64; 3]; 3], lambda: &[f64; 3]) -> [f64; 3] {
    [
        lambda[0] * p[0][0] + lambda[1] * p[1][0] + lambda[2] * p[2][0],
        lambda[0] * p[0][1] + lambda[1] * p[1][1] + lambda[2] * p[2][1],
        lambda[0] * p[0][2] + lambda[1] * p[1][2] + lambda[2] * p[2][2],
    ]
}

/// alpha K + beta M.
pub fn form_matrix(
    stiffness: &SparseSymMatrix,
    mass: &SparseSymMatrix,
    weights: FormWeights,
) -> Result<SparseSymMatrix> {
    stiffness.linear_combination(weights.grad_coeff, mass, weights.mass_coeff)
}

/// The nodal point-evaluation operator T. Every row is a unit coordinate
/// vector; a point that does not coincide with a mesh vertex is rejected
/// rather than interpolated.
#[derive(Clone, Debug)]
pub struct PointEvalMatrix {
    pub ndof: usize,
    /// Vertex index carrying the unit entry of each row.
    pub rows: Vec<usize>,
}

impl PointEvalMatrix {
    pub fn num_points(&self) -> usize {
        self.rows.len()
    }

    /// T x: nodal values at the constraint vertices.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|&v| x[v]).collect()
    }

    /// y += T^t z.
    pub fn add_transpose_apply(&self, z: &[f64], y: &mut [f64]) {
        for (&v, &zi) in self.rows.iter().zip(z) {
            y[v] += zi;
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut dense = nalgebra::DMatrix::zeros(self.rows.len(), self.ndof);
        for (r, &v) in self.rows.iter().enumerate() {
            dense[(r, v)] = 1.0;
        }
        dense
    }
}

pub fn point_eval_matrix(space: &FESpace, points: &[[f64; 3]]) -> Result<PointEvalMatrix> {
    let mut rows = Vec::with_capacity(points.len());
    for &point in points {
        let vertex = space
            .mesh
            .vertices
            .iter()
            .position(|&v| vec3::dist(v, point) <= GEOM_TOL);
        match vertex {
            Some(v) => rows.push(v),
            None => return Err(Error::ConstraintOffGrid(point[0], point[1], point[2])),
        }
    }
    Ok(PointEvalMatrix {
        ndof: space.ndof,
        rows,
    })
}

/// a_i = integral of phi_i = (M 1)_i.
pub fn mean_vector(space: &FESpace) -> Result<Vec<f64>> {
    let mass = assemble_mass(space)?;
    let ones = vec![1.0; space.ndof];
    let mut a = vec![0.0; space.ndof];
    mass.mul_vec(&ones, &mut a);
    Ok(a)
}

/// Nodal interpolation I_h f, evaluating f at the lifted vertex positions.
pub fn interpolate(space: &Arc<FESpace>, field: &ScalarField) -> Result<FEFunction> {
    let mut coefficients = Vec::with_capacity(space.ndof);
    for &v in &space.mesh.vertices {
        let lifted = lift_point(v, space.mesh.geometry)?;
        coefficients.push(field.eval_checked(&lifted)?);
    }
    Ok(FEFunction::new(space.clone(), coefficients))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_disc_mesh, build_octasphere, Geometry, TriangleMesh};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn single_triangle_space() -> Arc<FESpace> {
        let mesh = TriangleMesh {
            vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            triangles: vec![[0, 1, 2]],
            geometry: Geometry::FlatDisc,
            boundary_vertices: vec![0, 1, 2],
            constraint_vertices: Vec::new(),
        };
        FESpace::new(mesh)
    }

    #[test]
    fn unit_right_triangle_stiffness() {
        let space = single_triangle_space();
        let k = assemble_stiffness(&space).unwrap();
        let expected = [
            [1.0, -0.5, -0.5],
            [-0.5, 0.5, 0.0],
            [-0.5, 0.0, 0.5],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(k.get(i, j), expected[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn unit_right_triangle_mass() {
        let space = single_triangle_space();
        let m = assemble_mass(&space).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 2.0 / 24.0 } else { 1.0 / 24.0 };
                assert_abs_diff_eq!(m.get(i, j), expected, epsilon = 1e-16);
            }
        }
    }

    #[test]
    fn single_triangle_h_is_sqrt_two() {
        let space = single_triangle_space();
        let stats = crate::mesh::mesh_size(&space.mesh);
        assert_abs_diff_eq!(stats.h, 2.0_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn stiffness_kernel_contains_constants() {
        for mesh in [build_octasphere(2, 1.0).unwrap(), build_disc_mesh(2).unwrap()] {
            let space = FESpace::new(mesh);
            let k = assemble_stiffness(&space).unwrap();
            let ones = vec![1.0; space.ndof];
            let mut y = vec![0.0; space.ndof];
            k.mul_vec(&ones, &mut y);
            let max = y.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            assert!(max <= 1e-12, "K 1 = {max}");
        }
    }

    #[test]
    fn mass_sum_equals_area() {
        for mesh in [build_octasphere(2, 1.0).unwrap(), build_disc_mesh(2).unwrap()] {
            let space = FESpace::new(mesh);
            let m = assemble_mass(&space).unwrap();
            let stats = crate::mesh::mesh_size(&space.mesh);
            let ones = vec![1.0; space.ndof];
            assert_abs_diff_eq!(
                m.quadratic_form(&ones),
                stats.total_area,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn octasphere_mass_sum_near_sphere_area() {
        let space = FESpace::new(build_octasphere(3, 1.0).unwrap());
        let m = assemble_mass(&space).unwrap();
        let ones = vec![1.0; space.ndof];
        let total = m.quadratic_form(&ones);
        let exact = 4.0 * std::f64::consts::PI;
        assert!((total - exact).abs() / exact <= 0.02);
    }

    #[test]
    fn load_of_one_sums_to_area() {
        let space = FESpace::new(build_disc_mesh(1).unwrap());
        let load = assemble_load(&space, &ScalarField::constant(1.0), 4).unwrap();
        let stats = crate::mesh::mesh_size(&space.mesh);
        let sum: f64 = load.iter().sum();
        assert_abs_diff_eq!(sum, stats.total_area, epsilon = 1e-12);
    }

    #[test]
    fn load_of_zero_is_zero() {
        let space = FESpace::new(build_octasphere(1, 1.0).unwrap());
        let load = assemble_load(&space, &ScalarField::zero(), 3).unwrap();
        assert!(load.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn load_of_x1_on_unit_triangle() {
        // Analytic integrals of x phi_i over the unit right triangle.
        let space = single_triangle_space();
        let load = assemble_load(&space, &ScalarField::new(|x| x[0]), 4).unwrap();
        let expected = [1.0 / 24.0, 1.0 / 12.0, 1.0 / 24.0];
        for (computed, exact) in load.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(computed, exact, epsilon = 1e-15);
        }
    }

    #[test]
    fn form_matrix_weights() {
        let space = FESpace::new(build_octasphere(1, 1.0).unwrap());
        let k = assemble_stiffness(&space).unwrap();
        let m = assemble_mass(&space).unwrap();
        // (0, 1) reproduces M exactly.
        let m2 = form_matrix(&k, &m, FormWeights::m()).unwrap();
        for (i, j, v) in m.upper_entries() {
            assert_eq!(m2.get(i, j), v);
        }
        // Sphere experiment kappa = sigma = R = 1: c = -3 b entrywise.
        let c = form_matrix(&k, &m, FormWeights::c_sphere(1.0, 1.0, 1.0)).unwrap();
        let b = form_matrix(&k, &m, FormWeights::b()).unwrap();
        for (i, j, v) in b.upper_entries() {
            assert_abs_diff_eq!(c.get(i, j), -3.0 * v, epsilon = 1e-13);
        }
        // Flat experiment kappa = 1, sigma = 0: c = -2K - M.
        let cf = form_matrix(&k, &m, FormWeights::c_flat(1.0, 0.0)).unwrap();
        for (i, j, _) in cf.upper_entries() {
            assert_abs_diff_eq!(
                cf.get(i, j),
                -2.0 * k.get(i, j) - m.get(i, j),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn point_eval_rows_are_unit_vectors() {
        let space = FESpace::new(build_octasphere(2, 1.0).unwrap());
        let points = space.mesh.constraint_points();
        let t = point_eval_matrix(&space, &points).unwrap();
        assert_eq!(t.num_points(), 6);
        let dense = t.to_dense();
        for r in 0..6 {
            assert_eq!(dense.row(r).iter().map(|v| v.abs()).sum::<f64>(), 1.0);
            assert_eq!(dense[(r, t.rows[r])], 1.0);
        }
    }

    #[test]
    fn point_eval_off_grid_rejected() {
        let space = FESpace::new(build_octasphere(1, 1.0).unwrap());
        let err = point_eval_matrix(&space, &[[0.3, 0.2, 0.1]]);
        assert!(matches!(err, Err(Error::ConstraintOffGrid(..))));
    }

    #[test]
    fn point_eval_returns_nodal_values() {
        let space = FESpace::new(build_octasphere(2, 1.0).unwrap());
        let field = ScalarField::new(|x| 1.0 + x[0] - 2.0 * x[2]);
        let u = interpolate(&space, &field).unwrap();
        let points = space.mesh.constraint_points();
        let t = point_eval_matrix(&space, &points).unwrap();
        let values = t.apply(&u.coefficients);
        for (v, p) in values.iter().zip(points.iter()) {
            assert_eq!(*v, field.eval(p));
        }
    }

    #[test]
    fn mean_vector_properties() {
        let space = FESpace::new(build_disc_mesh(1).unwrap());
        let a = mean_vector(&space).unwrap();
        let stats = crate::mesh::mesh_size(&space.mesh);
        let sum: f64 = a.iter().sum();
        assert_abs_diff_eq!(sum, stats.total_area, epsilon = 1e-12);
        assert!(a.iter().all(|&v| v >= 0.0));
        let ones = interpolate(&space, &ScalarField::constant(1.0)).unwrap();
        let dot: f64 = a
            .iter()
            .zip(&ones.coefficients)
            .map(|(ai, ci)| ai * ci)
            .sum();
        assert_abs_diff_eq!(dot, stats.total_area, epsilon = 1e-12);
    }

    #[test]
    fn interpolate_constant_and_coordinates() {
        let space = FESpace::new(build_octasphere(2, 1.0).unwrap());
        let c = interpolate(&space, &ScalarField::constant(2.5)).unwrap();
        assert!(c.coefficients.iter().all(|&v| v == 2.5));
        let x3 = interpolate(&space, &ScalarField::new(|x| x[2])).unwrap();
        for (coeff, v) in x3.coefficients.iter().zip(&space.mesh.vertices) {
            // Lifting renormalizes generic vertices by at most one ulp.
            assert_abs_diff_eq!(*coeff, v[2], epsilon = 1e-15);
        }
    }

    #[test]
    fn interpolate_log_singular_field_fails_at_pole() {
        let space = FESpace::new(build_octasphere(1, 1.0).unwrap());
        let w = ScalarField::new(|x| (1.0 - x[2]).ln());
        assert!(matches!(
            interpolate(&space, &w),
            Err(Error::NonFiniteField(..))
        ));
    }

    proptest! {
        /// Permuting the triangle list leaves every assembled entry unchanged
        /// up to rounding.
        #[test]
        fn assembly_order_independent(seed in 0u64..32) {
            let mesh = build_octasphere(1, 1.0).unwrap();
            let mut permuted = mesh.clone();
            // Deterministic shuffle driven by the seed.
            let n = permuted.triangles.len();
            for i in (1..n).rev() {
                let j = ((seed as usize).wrapping_mul(2654435761).wrapping_add(i * 40503)) % (i + 1);
                permuted.triangles.swap(i, j);
            }
            let s1 = FESpace::new(mesh);
            let s2 = FESpace::new(permuted);
            let k1 = assemble_stiffness(&s1).unwrap();
            let k2 = assemble_stiffness(&s2).unwrap();
            let m1 = assemble_mass(&s1).unwrap();
            let m2 = assemble_mass(&s2).unwrap();
            for (i, j, v) in k1.upper_entries() {
                prop_assert!((k2.get(i, j) - v).abs() <= 1e-13);
            }
            for (i, j, v) in m1.upper_entries() {
                prop_assert!((m2.get(i, j) - v).abs() <= 1e-13);
            }
        }
    }
}
