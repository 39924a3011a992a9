//! Exact data of the two membrane experiments: the flat problem on the unit
//! disc with Navier boundary conditions and the problem on the unit sphere
//! with mean-value constraints.
//!
//! The flat problem has kappa = 1, sigma = 0 and homogeneous loads; its
//! solution is u = 1 - |x|^2 + (|x|^2/2) log(|x|^2) and the auxiliary
//! variable w = -Lap u + u carries a log singularity at the origin. The
//! sphere problem has kappa = sigma = R = 1 with log-singular data at the
//! north pole. The discrete solver imposes zero means on u and w, so the
//! exact w is shifted to zero mean; the unshifted variant is kept for
//! reporting.

use std::sync::Arc;

use crate::assembly::{assemble_load, FormWeights};
use crate::error::Result;
use crate::field::ScalarField;
use crate::mesh::{build_disc_mesh, build_octasphere, TriangleMesh};
use crate::saddle::{ConstraintMode, SaddleConfig};
use crate::space::FESpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Flat,
    Sphere,
}

/// Exact fields, constraint data and form weights of one experiment.
pub struct MembraneProblem {
    pub kind: ProblemKind,
    pub u: ScalarField,
    pub w: ScalarField,
    /// The unshifted w on the sphere (nonzero mean), kept for reporting.
    pub w_unshifted: Option<ScalarField>,
    pub f: ScalarField,
    pub g: ScalarField,
    /// Constraint targets in the constraint-registry order of the meshes.
    pub targets: Vec<f64>,
    /// Known exact multipliers (flat case only), same ordering.
    pub lambda_exact: Option<Vec<f64>>,
    pub c_weights: FormWeights,
    pub mean_constraints: bool,
    pub dirichlet: bool,
}

/// Mean value of log(1 - x3) over the unit sphere.
pub fn sphere_w_mean() -> f64 {
    2.0f64.ln() - 1.0
}

fn u_flat_value(x: &[f64; 3]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 == 0.0 {
        1.0
    } else {
        1.0 - r2 + 0.5 * r2 * r2.ln()
    }
}

fn u_flat_gradient(x: &[f64; 3]) -> [f64; 3] {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 == 0.0 {
        return [0.0; 3];
    }
    let s = r2.ln() - 1.0;
    [s * x[0], s * x[1], 0.0]
}

fn w_flat_value(x: &[f64; 3]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    -2.0 * r2.ln() + u_flat_value(x)
}

fn w_flat_gradient(x: &[f64; 3]) -> [f64; 3] {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let s = -4.0 / r2 + r2.ln() - 1.0;
    [s * x[0], s * x[1], 0.0]
}

fn u_sphere_value(x: &[f64; 3]) -> f64 {
    let t = 1.0 - x[2];
    let c1 = 0.5 * (4.0f64.ln() - 1.0);
    if t <= 0.0 {
        -c1
    } else {
        t * t.ln() - c1
    }
}

/// Surface gradient of a function of x3 alone: f'(x3) (e3 - x3 x).
fn radial_sphere_gradient(x: &[f64; 3], df_dx3: f64) -> [f64; 3] {
    [
        -df_dx3 * x[2] * x[0],
        -df_dx3 * x[2] * x[1],
        df_dx3 * (1.0 - x[2] * x[2]),
    ]
}

fn u_sphere_gradient(x: &[f64; 3]) -> [f64; 3] {
    let t = 1.0 - x[2];
    radial_sphere_gradient(x, -t.ln() - 1.0)
}

fn w_sphere_gradient(x: &[f64; 3]) -> [f64; 3] {
    let t = 1.0 - x[2];
    radial_sphere_gradient(x, -1.0 / t)
}

/// Returns the exact fields and data of the requested problem.
pub fn exact_fields(kind: ProblemKind) -> MembraneProblem {
    match kind {
        ProblemKind::Flat => {
            let origin = vec![[0.0, 0.0, 0.0]];
            let u_half = u_flat_value(&[0.5, 0.0, 0.0]);
            MembraneProblem {
                kind,
                u: ScalarField::new(u_flat_value).with_gradient(u_flat_gradient),
                w: ScalarField::new(w_flat_value)
                    .with_gradient(w_flat_gradient)
                    .with_singular_points(origin.clone()),
                w_unshifted: None,
                f: ScalarField::zero(),
                g: ScalarField::zero(),
                targets: vec![1.0, u_half, u_half, u_half, u_half],
                lambda_exact: Some(vec![-8.0 * std::f64::consts::PI, 0.0, 0.0, 0.0, 0.0]),
                c_weights: FormWeights::c_flat(1.0, 0.0),
                mean_constraints: false,
                dirichlet: true,
            }
        }
        ProblemKind::Sphere => {
            let pole = vec![[0.0, 0.0, 1.0]];
            let shift = sphere_w_mean();
            let log4 = 4.0f64.ln();
            let c1 = 0.5 * (log4 - 1.0);
            // Targets at +x, -x, +y, -y, +z, -z.
            let equator = -c1;
            let north = -c1;
            let south = 2.0 * 2.0f64.ln() - c1;
            MembraneProblem {
                kind,
                u: ScalarField::new(u_sphere_value).with_gradient(u_sphere_gradient),
                w: ScalarField::new(move |x| (1.0 - x[2]).ln() - shift)
                    .with_gradient(w_sphere_gradient)
                    .with_singular_points(pole.clone()),
                w_unshifted: Some(
                    ScalarField::new(|x| (1.0 - x[2]).ln())
                        .with_gradient(w_sphere_gradient)
                        .with_singular_points(pole.clone()),
                ),
                f: ScalarField::new(move |x| {
                    let l = (1.0 - x[2]).ln();
                    9.0 * x[2] * l + 9.0 * x[2] - 2.0 * l + 0.5 * (5.0 + 3.0 * log4)
                })
                .with_singular_points(pole.clone()),
                g: ScalarField::new(move |x| {
                    let l = (1.0 - x[2]).ln();
                    -3.0 * x[2] * l - 3.0 * x[2] - 0.5 * (log4 + 1.0)
                })
                .with_singular_points(pole),
                targets: vec![equator, equator, equator, equator, north, south],
                lambda_exact: None,
                c_weights: FormWeights::c_sphere(1.0, 1.0, 1.0),
                mean_constraints: true,
                dirichlet: false,
            }
        }
    }
}

pub fn build_mesh(kind: ProblemKind, level: usize) -> Result<TriangleMesh> {
    match kind {
        ProblemKind::Flat => build_disc_mesh(level),
        ProblemKind::Sphere => build_octasphere(level, 1.0),
    }
}

pub fn build_space(kind: ProblemKind, level: usize) -> Result<Arc<FESpace>> {
    let mesh = build_mesh(kind, level)?;
    Ok(match kind {
        ProblemKind::Flat => FESpace::with_boundary_conditions(mesh),
        ProblemKind::Sphere => FESpace::new(mesh),
    })
}

impl MembraneProblem {
    /// Solver configuration on a given mesh, taking the constraint points
    /// from the mesh registry (they are exact vertices by construction).
    pub fn config(&self, mesh: &TriangleMesh, mode: ConstraintMode) -> SaddleConfig {
        SaddleConfig {
            mode,
            mean_constraint_u: self.mean_constraints,
            mean_constraint_w: self.mean_constraints,
            dirichlet: self.dirichlet,
            constraint_points: mesh.constraint_points(),
            targets: self.targets.clone(),
        }
    }

    /// Quadrature loads (F, G) for the two equations.
    pub fn loads(&self, space: &FESpace, quad_degree: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((
            assemble_load(space, &self.f, quad_degree)?,
            assemble_load(space, &self.g, quad_degree)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn flat_u_at_constraint_points() {
        let p = exact_fields(ProblemKind::Flat);
        assert_eq!(p.u.eval(&[0.0, 0.0, 0.0]), 1.0);
        let expected = 0.75 + 0.125 * 0.25f64.ln();
        assert_abs_diff_eq!(p.u.eval(&[0.5, 0.0, 0.0]), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(p.u.eval(&[0.0, -0.5, 0.0]), expected, epsilon = 1e-15);
        assert_eq!(p.targets[0], 1.0);
        assert_abs_diff_eq!(p.targets[3], expected, epsilon = 1e-15);
    }

    #[test]
    fn flat_fields_vanish_on_unit_circle() {
        let p = exact_fields(ProblemKind::Flat);
        for k in 0..12 {
            let angle = k as f64 * 0.5236;
            let x = [angle.cos(), angle.sin(), 0.0];
            assert!(p.u.eval(&x).abs() < 1e-14);
            assert!(p.w.eval(&x).abs() < 1e-13);
        }
    }

    #[test]
    fn flat_split_system_satisfied_by_finite_differences() {
        // Independent check of the manufactured data: away from the origin
        // the split system 2 Lap u - u - Lap w + w = 0, -Lap u + u - w = 0
        // must hold. The Laplacian is approximated by central differences.
        let p = exact_fields(ProblemKind::Flat);
        let h = 1e-4;
        let fd_laplacian = |field: &ScalarField, x: [f64; 3]| -> f64 {
            let mut acc = -4.0 * field.eval(&x);
            for d in [[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]] {
                acc += field.eval(&[x[0] + d[0], x[1] + d[1], 0.0]);
            }
            acc / (h * h)
        };
        for (px, py) in [(0.31, 0.12), (-0.44, 0.25), (0.05, -0.61), (0.52, 0.41)] {
            let x = [px, py, 0.0];
            let lap_u = fd_laplacian(&p.u, x);
            let lap_w = fd_laplacian(&p.w, x);
            let eq1 = 2.0 * lap_u - p.u.eval(&x) - lap_w + p.w.eval(&x);
            let eq2 = -lap_u + p.u.eval(&x) - p.w.eval(&x);
            assert!(eq1.abs() < 1e-4, "first equation residual {eq1} at {x:?}");
            assert!(eq2.abs() < 1e-5, "second equation residual {eq2} at {x:?}");
        }
    }

    #[test]
    fn sphere_u_value_at_poles_and_equator() {
        let p = exact_fields(ProblemKind::Sphere);
        let c1 = 0.5 * (4.0f64.ln() - 1.0);
        assert_abs_diff_eq!(p.u.eval(&[0.0, 0.0, 1.0]), -c1, epsilon = 1e-15);
        assert_abs_diff_eq!(p.u.eval(&[1.0, 0.0, 0.0]), -c1, epsilon = 1e-15);
        assert_abs_diff_eq!(
            p.u.eval(&[0.0, 0.0, -1.0]),
            2.0 * 2.0f64.ln() - c1,
            epsilon = 1e-15
        );
    }

    #[test]
    fn sphere_split_system_is_an_identity_in_x3() {
        // For functions of x3 on the unit sphere the Laplace-Beltrami
        // operator reduces to (1 - x3^2) f'' - 2 x3 f'. With
        // u = (1-x3) log(1-x3) - c1 and w = log(1-x3):
        // Lap u = 1 + 3 x3 + 2 x3 log(1-x3) and Lap w = -1.
        // The split system with p_bar = q_bar = 0 must reproduce f and g.
        let p = exact_fields(ProblemKind::Sphere);
        let w_raw = p.w_unshifted.as_ref().unwrap();
        for k in 1..40 {
            let x3: f64 = -0.95 + 0.048 * k as f64;
            let sin_t = (1.0 - x3 * x3).sqrt();
            let x = [sin_t, 0.0, x3];
            let l = (1.0 - x3).ln();
            let lap_u = 1.0 + 3.0 * x3 + 2.0 * x3 * l;
            let lap_w = -1.0;
            let eq1 = 3.0 * lap_u - 3.0 * p.u.eval(&x) - lap_w + w_raw.eval(&x);
            let eq2 = -lap_u + p.u.eval(&x) - w_raw.eval(&x);
            assert_abs_diff_eq!(eq1, p.f.eval(&x), epsilon = 1e-12);
            assert_abs_diff_eq!(eq2, p.g.eval(&x), epsilon = 1e-12);
        }
    }

    #[test]
    fn sphere_gradients_are_tangent() {
        let p = exact_fields(ProblemKind::Sphere);
        for k in 1..30 {
            let theta = 0.1 + 0.1 * k as f64;
            let phi = 0.7 * k as f64;
            let x = [
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ];
            for field in [&p.u, &p.w] {
                let g = field.grad(&x).unwrap();
                let normal_part =
                    (g[0] * x[0] + g[1] * x[1] + g[2] * x[2]).abs();
                assert!(normal_part <= 1e-10, "normal component {normal_part}");
            }
        }
    }

    #[test]
    fn sphere_exact_fields_have_zero_mean() {
        // Quadrature over a fine polyhedral sphere approximates the surface
        // integrals of u and the shifted w; both vanish analytically while
        // the unshifted w has mean log 2 - 1.
        let p = exact_fields(ProblemKind::Sphere);
        let space = build_space(ProblemKind::Sphere, 4).unwrap();
        let integrate = |field: &ScalarField| -> f64 {
            assemble_load(&space, field, 4).unwrap().iter().sum()
        };
        let area = 4.0 * std::f64::consts::PI;
        assert!(integrate(&p.u).abs() < 0.02);
        assert!(integrate(&p.w).abs() < 0.02);
        let unshifted_mean = integrate(p.w_unshifted.as_ref().unwrap()) / area;
        assert!((unshifted_mean - sphere_w_mean()).abs() < 0.01);
    }

    #[test]
    fn sphere_targets_follow_registry_order() {
        let p = exact_fields(ProblemKind::Sphere);
        let mesh = build_mesh(ProblemKind::Sphere, 1).unwrap();
        for (point, target) in mesh.constraint_points().iter().zip(&p.targets) {
            assert_abs_diff_eq!(p.u.eval(point), *target, epsilon = 1e-14);
        }
    }

    #[test]
    fn flat_loads_are_zero() {
        let p = exact_fields(ProblemKind::Flat);
        let space = build_space(ProblemKind::Flat, 1).unwrap();
        let (f, g) = p.loads(&space, 4).unwrap();
        assert!(f.iter().all(|&v| v == 0.0));
        assert!(g.iter().all(|&v| v == 0.0));
    }
}
