//! Error norms of discrete functions against exact fields (with lifting on
//! curved geometry), multiplier errors, and experimental orders of
//! convergence.

use crate::assembly::{barycentric_point, p1_gradients};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mesh::{lift_point, triangle_area};
use crate::quadrature::triangle_rule;
use crate::space::{FEFunction, FESpace};
use crate::sparse::SparseSymMatrix;
use crate::vec3;

/// Which norm to measure. `W1p` uses the full norm
/// (|v|_{0,p}^p + |grad v|_{0,p}^p)^{1/p}; `H1` is the p = 2 case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    L2,
    H1,
    W1p(f64),
}

impl NormKind {
    fn exponent(&self) -> Result<f64> {
        match *self {
            NormKind::L2 | NormKind::H1 => Ok(2.0),
            NormKind::W1p(p) => {
                if p > 1.0 && p <= 2.0 {
                    Ok(p)
                } else {
                    Err(Error::Config(format!(
                        "W1p exponent {p} outside (1, 2]"
                    )))
                }
            }
        }
    }

    fn with_gradient(&self) -> bool {
        !matches!(self, NormKind::L2)
    }
}

/// Returns (absolute, relative) error of `v_h` against `exact`.
///
/// Value contributions compare v_h at the quadrature point with the exact
/// field at its lift; gradient contributions compare the per-triangle
/// discrete gradient with the exact surface gradient at the lifted point
/// projected onto the triangle plane. The relative error divides by the same
/// norm of the exact field computed with the identical rule.
pub fn fe_error_norm(
    space: &FESpace,
    v_h: &FEFunction,
    exact: &ScalarField,
    kind: NormKind,
    quad_degree: usize,
) -> Result<(f64, f64)> {
    let p = kind.exponent()?;
    let rule = triangle_rule(quad_degree)?;
    let needs_grad = kind.with_gradient();
    if needs_grad && !exact.has_gradient() {
        return Err(Error::MissingGradient);
    }

    let mut err_acc = 0.0f64;
    let mut exact_acc = 0.0f64;
    for tri in &space.mesh.triangles {
        let pts = [
            space.mesh.vertices[tri[0]],
            space.mesh.vertices[tri[1]],
            space.mesh.vertices[tri[2]],
        ];
        let area = triangle_area(pts[0], pts[1], pts[2]);
        let coeffs = [
            v_h.coefficients[tri[0]],
            v_h.coefficients[tri[1]],
            v_h.coefficients[tri[2]],
        ];
        let (grad_h, normal) = if needs_grad {
            let g = p1_gradients(pts)?;
            let mut gh = [0.0; 3];
            for i in 0..3 {
                gh = vec3::add(gh, vec3::scale(coeffs[i], g[i]));
            }
            let n = vec3::cross(vec3::sub(pts[1], pts[0]), vec3::sub(pts[2], pts[0]));
            (gh, vec3::scale(1.0 / vec3::norm(n), n))
        } else {
            ([0.0; 3], [0.0; 3])
        };

        for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
            let x = barycentric_point(&pts, node);
            let lifted = lift_point(x, space.mesh.geometry)?;
            let exact_val = exact.eval_checked(&lifted)?;
            let vh_val = coeffs[0] * node[0] + coeffs[1] * node[1] + coeffs[2] * node[2];
            err_acc += w * area * (vh_val - exact_val).abs().powf(p);
            exact_acc += w * area * exact_val.abs().powf(p);
            if needs_grad {
                let ge = exact.grad(&lifted)?;
                // Project the exact surface gradient onto the facet plane.
                let ge_t = vec3::sub(ge, vec3::scale(vec3::dot(ge, normal), normal));
                let diff = vec3::sub(grad_h, ge_t);
                err_acc += w * area * vec3::norm(diff).powf(p);
                exact_acc += w * area * vec3::norm(ge_t).powf(p);
            }
        }
    }

    let absolute = err_acc.powf(1.0 / p);
    let exact_norm = exact_acc.powf(1.0 / p);
    let relative = if exact_norm > 0.0 {
        absolute / exact_norm
    } else {
        f64::INFINITY
    };
    Ok((absolute, relative))
}

/// Relative l2 error of a discrete multiplier vector.
pub fn lambda_error(lambda_h: &[f64], lambda_exact: &[f64]) -> Result<f64> {
    if lambda_h.len() != lambda_exact.len() {
        return Err(Error::DimensionMismatch(format!(
            "multiplier lengths {} and {}",
            lambda_h.len(),
            lambda_exact.len()
        )));
    }
    let norm_exact: f64 = lambda_exact.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_exact == 0.0 {
        return Err(Error::ZeroExactMultiplier);
    }
    let diff: f64 = lambda_h
        .iter()
        .zip(lambda_exact)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm_exact)
}

/// Experimental order of convergence log(E1/E2) / log(h1/h2). Also used with
/// the penalty parameter in place of h.
pub fn eoc(e1: f64, e2: f64, h1: f64, h2: f64) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0 && h1 > 0.0 && h2 > 0.0) || h1 == h2 {
        return Err(Error::EocInput(e1, e2, h1, h2));
    }
    Ok((e1 / e2).ln() / (h1 / h2).ln())
}

/// sqrt(x^t A x) for an SPD matrix; the b-matrix energy is the discrete full
/// H1 norm.
pub fn energy_norm(matrix: &SparseSymMatrix, x: &[f64]) -> f64 {
    matrix.quadratic_form(x).max(0.0).sqrt()
}

/// l2 norm helper.
pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::interpolate;
    use crate::mesh::{build_disc_mesh, build_octasphere};
    use crate::space::FESpace;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn p1_reproduces_linear_fields_on_flat_mesh() {
        let space = FESpace::new(build_disc_mesh(1).unwrap());
        let field = ScalarField::new(|x| 0.5 + 2.0 * x[0] - x[1])
            .with_gradient(|_| [2.0, -1.0, 0.0]);
        let v_h = interpolate(&space, &field).unwrap();
        let (abs_err, _) = fe_error_norm(&space, &v_h, &field, NormKind::H1, 4).unwrap();
        assert!(abs_err <= 1e-13, "H1 error {abs_err}");
    }

    #[test]
    fn zero_function_against_constant_has_relative_error_one() {
        let space = FESpace::new(build_octasphere(1, 1.0).unwrap());
        let exact = ScalarField::constant(2.0);
        let zero = crate::space::FEFunction::zero(space.clone());
        for kind in [NormKind::L2, NormKind::H1, NormKind::W1p(4.0 / 3.0)] {
            let (_, rel) = fe_error_norm(&space, &zero, &exact, kind, 4).unwrap();
            assert_eq!(rel, 1.0);
        }
    }

    #[test]
    fn sphere_l2_norm_of_x3_matches_analytic_integral() {
        // integral of x3^2 over the unit sphere is 4 pi / 3.
        let space = FESpace::new(build_octasphere(3, 1.0).unwrap());
        let exact = ScalarField::new(|x| x[2]);
        let zero = crate::space::FEFunction::zero(space.clone());
        let (abs_err, _) = fe_error_norm(&space, &zero, &exact, NormKind::L2, 4).unwrap();
        let target = (4.0 * std::f64::consts::PI / 3.0).sqrt();
        assert!(
            (abs_err - target).abs() / target <= 0.02,
            "{abs_err} vs {target}"
        );
    }

    #[test]
    fn lambda_error_examples() {
        let exact = [-8.0 * std::f64::consts::PI, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(lambda_error(&exact, &exact).unwrap(), 0.0);
        let doubled: Vec<f64> = exact.iter().map(|v| 2.0 * v).collect();
        assert_abs_diff_eq!(lambda_error(&doubled, &exact).unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(
            lambda_error(&[0.0], &[0.0]),
            Err(Error::ZeroExactMultiplier)
        ));
    }

    #[test]
    fn eoc_paper_values() {
        let v1 = eoc(0.0347383, 0.010496, 0.420334, 0.221925).unwrap();
        assert!((v1 - 1.87385).abs() <= 5e-5, "{v1}");
        let v2 = eoc(0.568092, 0.421624, 0.2, 0.1).unwrap();
        assert!((v2 - 0.430169).abs() <= 5e-6, "{v2}");
    }

    #[test]
    fn eoc_equal_errors_and_bad_inputs() {
        assert_eq!(eoc(0.3, 0.3, 0.2, 0.1).unwrap(), 0.0);
        assert!(eoc(0.0, 0.1, 0.2, 0.1).is_err());
        assert!(eoc(0.1, 0.1, 0.2, 0.2).is_err());
    }

    proptest! {
        #[test]
        fn eoc_antisymmetric(
            e1 in 1e-8f64..1.0,
            e2 in 1e-8f64..1.0,
            h1 in 1e-4f64..1.0,
            ratio in 1.1f64..4.0,
        ) {
            let h2 = h1 / ratio;
            let forward = eoc(e1, e2, h1, h2).unwrap();
            let backward = eoc(e2, e1, h2, h1).unwrap();
            prop_assert!((forward - backward).abs() <= 1e-12 * (1.0 + forward.abs()));
        }

        /// Scaling both the discrete function and the exact field by s scales
        /// the absolute error by |s| in every norm.
        #[test]
        fn absolute_homogeneity(s in prop::sample::select(vec![0.25f64, 0.5, 2.0, 4.0, 8.0])) {
            let space = FESpace::new(build_disc_mesh(1).unwrap());
            let base = ScalarField::new(|x| x[0] * x[0] + 0.3 * x[1])
                .with_gradient(|x| [2.0 * x[0], 0.3, 0.0]);
            let scaled = ScalarField::new(move |x| s * (x[0] * x[0] + 0.3 * x[1]))
                .with_gradient(move |x| [s * 2.0 * x[0], s * 0.3, 0.0]);
            // v_h = 0 so that v_h - exact scales exactly with s.
            let zero = crate::space::FEFunction::zero(space.clone());
            for kind in [NormKind::L2, NormKind::H1, NormKind::W1p(1.5)] {
                let (e_base, _) = fe_error_norm(&space, &zero, &base, kind, 4).unwrap();
                let (e_scaled, _) = fe_error_norm(&space, &zero, &scaled, kind, 4).unwrap();
                prop_assert!((e_scaled - s.abs() * e_base).abs() <= 1e-12 * e_scaled.max(1.0));
            }
        }
    }

    #[test]
    fn w1p_exponent_validation() {
        let space = FESpace::new(build_disc_mesh(0).unwrap());
        let exact = ScalarField::constant(1.0);
        let zero = crate::space::FEFunction::zero(space.clone());
        assert!(fe_error_norm(&space, &zero, &exact, NormKind::W1p(3.0), 2).is_err());
        assert!(fe_error_norm(&space, &zero, &exact, NormKind::W1p(1.0), 2).is_err());
    }
}
