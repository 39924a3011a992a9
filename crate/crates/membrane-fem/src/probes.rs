//! Numerical probes of the structural assumptions behind the constrained
//! splitting method: Ritz projection quality, coercivity of c + m over the
//! b/m-coupled kernel, inf-sup health of the full saddle matrix, and a
//! manufactured-solution residual check.
//!
//! The spectral probes run dense linear algebra and are size-guarded; they
//! certify structure on coarse meshes, not performance.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::assembly::{
    assemble_mass, assemble_stiffness, barycentric_point, form_matrix, p1_gradients,
    FormWeights, PointEvalMatrix,
};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::ldl::{LdltFactor, LdltOptions};
use crate::mesh::{lift_point, triangle_area, Geometry, GEOM_TOL};
use crate::quadrature::triangle_rule;
use crate::saddle::{prepare_system, AssembledForms, ConstraintMode, SaddleConfig};
use crate::space::{FEFunction, FESpace};
use crate::vec3;

/// Dense probes refuse systems beyond this many dofs.
pub const PROBE_DOF_LIMIT: usize = 5000;

/// Outcome of one probe: per-level scalars and a verdict against the
/// stated threshold.
#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub name: String,
    pub levels: Vec<usize>,
    pub values: Vec<f64>,
    pub criterion: String,
    pub pass: bool,
}

impl ProbeReport {
    pub fn line(&self) -> String {
        let values: Vec<String> = self.values.iter().map(|v| format!("{v:.6e}")).collect();
        format!(
            "{} {}: levels {:?}, values [{}] ({})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.levels,
            values.join(", "),
            self.criterion,
        )
    }
}

/// b-orthogonal projection onto the P1 space: solves the SPD b-matrix
/// system with the load b(f, phi_i) evaluated by quadrature at lifted
/// points.
pub fn ritz_projection(
    space: &Arc<FESpace>,
    field: &ScalarField,
    quad_degree: usize,
) -> Result<FEFunction> {
    let stiffness = assemble_stiffness(space)?;
    let mass = assemble_mass(space)?;
    let b_matrix = form_matrix(&stiffness, &mass, FormWeights::b())?;
    let rule = triangle_rule(quad_degree)?;

    let mut load = vec![0.0; space.ndof];
    for tri in &space.mesh.triangles {
        let pts = [
            space.mesh.vertices[tri[0]],
            space.mesh.vertices[tri[1]],
            space.mesh.vertices[tri[2]],
        ];
        let area = triangle_area(pts[0], pts[1], pts[2]);
        let grads = p1_gradients(pts)?;
        let n = vec3::cross(vec3::sub(pts[1], pts[0]), vec3::sub(pts[2], pts[0]));
        let unit_n = vec3::scale(1.0 / vec3::norm(n), n);
        for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
            let x = barycentric_point(&pts, node);
            let lifted = lift_point(x, space.mesh.geometry)?;
            let value = field.eval_checked(&lifted)?;
            let grad = field.grad(&lifted)?;
            let grad_t = vec3::sub(grad, vec3::scale(vec3::dot(grad, unit_n), unit_n));
            for i in 0..3 {
                load[tri[i]] +=
                    w * area * (vec3::dot(grad_t, grads[i]) + value * node[i]);
            }
        }
    }

    let factor = LdltFactor::new(&b_matrix, LdltOptions::default())?;
    let (coeffs, diag) = factor.solve_refined(&b_matrix, &load);
    if diag.rel_residual > 1e-9 {
        return Err(Error::ToleranceNotMet(
            diag.rel_residual,
            diag.refine_iterations,
            diag.regularized_pivots,
        ));
    }
    Ok(FEFunction::new(space.clone(), coeffs))
}

/// Wraps a P1 function as a field evaluable anywhere on the surface, by
/// brute-force point location (flat barycentric test, radial cone test on
/// spheres). Unlocated points evaluate to NaN.
pub fn fe_function_field(function: &FEFunction) -> ScalarField {
    let mesh = function.space.mesh.clone();
    let locate = move |x: &[f64; 3]| -> Option<(usize, [f64; 3])> {
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let p = [
                mesh.vertices[tri[0]],
                mesh.vertices[tri[1]],
                mesh.vertices[tri[2]],
            ];
            let lambda = match mesh.geometry {
                Geometry::FlatDisc => {
                    let d = [
                        [p[1][0] - p[0][0], p[2][0] - p[0][0]],
                        [p[1][1] - p[0][1], p[2][1] - p[0][1]],
                    ];
                    let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
                    if det.abs() < 1e-300 {
                        continue;
                    }
                    let rx = x[0] - p[0][0];
                    let ry = x[1] - p[0][1];
                    let l1 = (rx * d[1][1] - ry * d[0][1]) / det;
                    let l2 = (-rx * d[1][0] + ry * d[0][0]) / det;
                    [1.0 - l1 - l2, l1, l2]
                }
                Geometry::Sphere { .. } => {
                    // Radial cone containment: solve [p0 p1 p2] c = x and
                    // normalize to barycentric weights of the projection.
                    let m = DMatrix::from_fn(3, 3, |r, c| p[c][r]);
                    let rhs = nalgebra::DVector::from_column_slice(x);
                    let Some(c) = m.lu().solve(&rhs) else {
                        continue;
                    };
                    let sum = c[0] + c[1] + c[2];
                    if sum.abs() < 1e-300 {
                        continue;
                    }
                    [c[0] / sum, c[1] / sum, c[2] / sum]
                }
            };
            if lambda.iter().all(|&l| l >= -1e-12) {
                return Some((t, lambda));
            }
        }
        None
    };
    let mesh2 = function.space.mesh.clone();
    let coeffs2 = function.coefficients.clone();
    let locate2 = locate.clone();
    ScalarField::new(move |x| match locate(x) {
        Some((t, lambda)) => {
            let tri = mesh2.triangles[t];
            lambda[0] * coeffs2[tri[0]] + lambda[1] * coeffs2[tri[1]] + lambda[2] * coeffs2[tri[2]]
        }
        None => f64::NAN,
    })
    .with_gradient({
        let mesh = function.space.mesh.clone();
        let coeffs = function.coefficients.clone();
        move |x| match locate2(x) {
            Some((t, _)) => {
                let tri = mesh.triangles[t];
                let p = [
                    mesh.vertices[tri[0]],
                    mesh.vertices[tri[1]],
                    mesh.vertices[tri[2]],
                ];
                let g = p1_gradients(p).expect("degenerate triangle in located mesh");
                let mut grad = [0.0; 3];
                for i in 0..3 {
                    grad = vec3::add(grad, vec3::scale(coeffs[tri[i]], g[i]));
                }
                grad
            }
            None => [f64::NAN; 3],
        }
    })
}

fn dense_guard(dim: usize) -> Result<()> {
    if dim > PROBE_DOF_LIMIT {
        return Err(Error::ProbeTooLarge(dim, PROBE_DOF_LIMIT));
    }
    Ok(())
}

/// Smallest generalized eigenvalue of (S, W) for symmetric S and SPD W.
fn min_generalized_eigenvalue(s: DMatrix<f64>, w: DMatrix<f64>) -> Result<f64> {
    let chol = nalgebra::Cholesky::new(w)
        .ok_or_else(|| Error::Config("weight matrix not positive definite".into()))?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&s)
        .ok_or_else(|| Error::Config("singular Cholesky factor".into()))?;
    let z = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Config("singular Cholesky factor".into()))?;
    let sym = (&z + z.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Smallest Rayleigh quotient of the splitting coercivity form:
/// for free w, u solves b(u, .) = m(w, .) and the probe minimizes
/// [c(u,u) + (1/eps0) |T u|^2 + m(w,w)] / m(w,w).
/// Pass `f64::INFINITY` for eps0 to drop the constraint term.
pub fn coercivity_probe(
    space: &FESpace,
    forms: &AssembledForms,
    t: &PointEvalMatrix,
    epsilon0: f64,
) -> Result<f64> {
    dense_guard(space.ndof)?;
    let bd = forms.b.to_dense();
    let md = forms.m.to_dense();
    let cd = forms.c.to_dense();
    let chol_b = nalgebra::Cholesky::new(bd)
        .ok_or_else(|| Error::Config("b-matrix not positive definite".into()))?;
    // Discrete coupling u = B^{-1} M w.
    let u_map = chol_b.solve(&md);
    let mut q = u_map.transpose() * (&cd * &u_map) + &md;
    if epsilon0.is_finite() {
        let tu = t.to_dense() * &u_map;
        q += tu.transpose() * &tu / epsilon0;
    }
    let q = (&q + q.transpose()) * 0.5;
    min_generalized_eigenvalue(q, md)
}

/// Smallest generalized singular value of the full Lagrange block matrix
/// with block-diagonal H1/H1/l2 norm weights.
pub fn saddle_infsup_probe(
    space: &FESpace,
    forms: &AssembledForms,
    constraint_points: &[[f64; 3]],
    mean_constraints: bool,
) -> Result<f64> {
    let config = SaddleConfig {
        mode: ConstraintMode::Lagrange,
        mean_constraint_u: mean_constraints,
        mean_constraint_w: mean_constraints,
        dirichlet: space.has_dirichlet(),
        constraint_points: constraint_points.to_vec(),
        targets: vec![0.0; constraint_points.len()],
    };
    let zeros = vec![0.0; space.ndof];
    let (system, _, _, _) = prepare_system(forms, space, &zeros, &zeros, &config)?;
    dense_guard(system.layout.dim)?;

    let a_dense = system.matrix.to_dense();
    let n = system.layout.ndof;
    let dim = system.layout.dim;
    let bd = forms.b.to_dense();
    let mut weights = DMatrix::<f64>::identity(dim, dim);
    // H1 weights for the u and w blocks. Dirichlet-eliminated rows keep
    // their unit diagonal.
    for i in 0..n {
        for j in 0..n {
            let v = bd[(i, j)];
            if v != 0.0 {
                weights[(i, j)] = v;
                weights[(n + i, n + j)] = v;
            }
        }
    }
    if space.has_dirichlet() {
        for (i, &masked) in space.dirichlet_mask.iter().enumerate() {
            if masked {
                for j in 0..n {
                    weights[(i, j)] = 0.0;
                    weights[(j, i)] = 0.0;
                    weights[(n + i, n + j)] = 0.0;
                    weights[(n + j, n + i)] = 0.0;
                }
                weights[(i, i)] = 1.0;
                weights[(n + i, n + i)] = 1.0;
            }
        }
    }

    // Generalized singular values of A w.r.t. W are the absolute
    // generalized eigenvalues of (A, W).
    let chol = nalgebra::Cholesky::new(weights)
        .ok_or_else(|| Error::Config("weight matrix not positive definite".into()))?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&a_dense)
        .ok_or_else(|| Error::Config("singular Cholesky factor".into()))?;
    let z = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Config("singular Cholesky factor".into()))?;
    let sym = (&z + z.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    Ok(eig
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min))
}

/// Assembles the discrete residual of the Lagrange system at the
/// interpolated exact solution and reports a mass-weighted dual norm.
/// Residual rows whose stencil touches a singular vertex are excluded, as
/// are the corresponding interpolation values (set to zero there).
#[allow(clippy::too_many_arguments)]
pub fn residual_probe(
    space: &Arc<FESpace>,
    forms: &AssembledForms,
    config: &SaddleConfig,
    u_exact: &ScalarField,
    w_exact: &ScalarField,
    f_load: &[f64],
    g_load: &[f64],
    lambda_exact: &[f64],
    p_bar: f64,
    q_bar: f64,
) -> Result<f64> {
    if !matches!(config.mode, ConstraintMode::Lagrange) {
        return Err(Error::Config(
            "residual probe requires the Lagrange formulation".into(),
        ));
    }
    let (system, _, _, mask) = prepare_system(forms, space, f_load, g_load, config)?;
    if lambda_exact.len() != system.layout.num_constraints {
        return Err(Error::DimensionMismatch(format!(
            "{} exact multipliers for {} constraints",
            lambda_exact.len(),
            system.layout.num_constraints
        )));
    }

    // Vertices where either exact field is singular; residual rows whose
    // stencil touches one of them (the 1-rings) are excluded.
    let singular_vertices = |field: &ScalarField| -> Vec<usize> {
        space
            .mesh
            .vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| {
                field
                    .singular_points()
                    .iter()
                    .any(|s| vec3::dist(**v, *s) <= GEOM_TOL)
            })
            .map(|(i, _)| i)
            .collect()
    };
    let singular_u = singular_vertices(u_exact);
    let singular_w = singular_vertices(w_exact);
    let mut excluded = vec![false; space.ndof];
    for &s in singular_u.iter().chain(&singular_w) {
        excluded[s] = true;
        for tri in &space.mesh.triangles {
            if tri.contains(&s) {
                for &v in tri {
                    excluded[v] = true;
                }
            }
        }
    }

    // Each field is interpolated with zeros only at its own singular
    // vertices; the excluded rows make those placeholder values inert.
    let interp = |field: &ScalarField, own_singular: &[usize]| -> Result<Vec<f64>> {
        space
            .mesh
            .vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if own_singular.contains(&i) {
                    return Ok(0.0);
                }
                if mask.as_ref().is_some_and(|m| m[i]) {
                    return Ok(0.0);
                }
                field.eval_checked(&lift_point(v, space.mesh.geometry)?)
            })
            .collect()
    };
    let u_star = interp(u_exact, &singular_u)?;
    let w_star = interp(w_exact, &singular_w)?;

    let n = system.layout.ndof;
    let mut x = vec![0.0; system.layout.dim];
    x[..n].copy_from_slice(&u_star);
    x[n..2 * n].copy_from_slice(&w_star);
    if let Some(off) = system.layout.lambda_offset {
        x[off..off + lambda_exact.len()].copy_from_slice(lambda_exact);
    }
    if let Some(p_idx) = system.layout.p_bar_index {
        x[p_idx] = p_bar;
    }
    if let Some(q_idx) = system.layout.q_bar_index {
        x[q_idx] = q_bar;
    }

    let mut ax = vec![0.0; system.layout.dim];
    system.matrix.mul_vec(&x, &mut ax);

    // The interpolated log singularity keeps an O(1) residual in the plain
    // H^-1 dual norm (it is self-similar under refinement), so the probe
    // reports the L2 norm of the discrete Riesz representative z = B^-1 r
    // instead: the error the residual would induce through the b-form.
    // Constraint and mean rows enter with their plain l2 norm.
    let mut r_u = vec![0.0; n];
    let mut r_w = vec![0.0; n];
    let mut tail_sq = 0.0;
    for k in 0..system.layout.dim {
        let r = ax[k] - system.rhs[k];
        if k < n {
            if !excluded[k] {
                r_u[k] = r;
            }
        } else if k < 2 * n {
            if !excluded[k - n] {
                r_w[k - n] = r;
            }
        } else {
            tail_sq += r * r;
        }
    }
    let factor = LdltFactor::new(&forms.b, LdltOptions::default())?;
    let mut acc = tail_sq;
    for r in [&r_u, &r_w] {
        let (z, _) = factor.solve_refined(&forms.b, r);
        let piece = forms.m.quadratic_form(&z).max(0.0);
        let (imax, zmax) = z.iter().enumerate().fold((0, 0.0f64), |(bi, bv), (i, v)| {
            if v.abs() > bv { (i, v.abs()) } else { (bi, bv) }
        });
        let vtx = space.mesh.vertices[imax];
        let rad = (vtx[0]*vtx[0] + vtx[1]*vtx[1]).sqrt();
        eprintln!("DBG piece = {:.4e}, max |z| = {:.3e} at vertex {} r={:.4}", piece.sqrt(), zmax, imax, rad);
        acc += piece;
    }
    eprintln!("DBG tail = {:.4e}", tail_sq.sqrt());
    Ok(acc.sqrt())
}
