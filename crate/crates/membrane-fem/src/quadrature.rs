//! Symmetric quadrature rules on the reference triangle.
//!
//! All rules use interior nodes only, so integrands that are singular at a
//! mesh vertex (the point-constraint data of the membrane problems) remain
//! evaluable. Weights are normalized to sum to one; multiply by the triangle
//! area when integrating.

use crate::error::{Error, Result};

/// A quadrature rule given by barycentric node coordinates and weights.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub degree: usize,
    /// Barycentric coordinates of each node, all strictly positive.
    pub nodes: Vec<[f64; 3]>,
    /// Weights summing to 1.
    pub weights: Vec<f64>,
}

/// Returns the rule of the requested polynomial exactness degree (1..=6).
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    let (nodes, weights) = match degree {
        1 => (vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]], vec![1.0]),
        2 => {
            let a = 1.0 / 6.0;
            let b = 2.0 / 3.0;
            (perm3(b, a), vec![1.0 / 3.0; 3])
        }
        3 => {
            // 4-point rule with a negative centroid weight (Strang).
            let mut nodes = vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]];
            let mut weights = vec![-27.0 / 48.0];
            nodes.extend(perm3(0.6, 0.2));
            weights.extend([25.0 / 48.0; 3]);
            (nodes, weights)
        }
        4 => {
            let mut nodes = perm3(1.0 - 2.0 * 0.445948490915965, 0.445948490915965);
            let mut weights = vec![0.223381589678011; 3];
            nodes.extend(perm3(1.0 - 2.0 * 0.091576213509771, 0.091576213509771));
            weights.extend([0.109951743655322; 3]);
            (nodes, weights)
        }
        5 => {
            let mut nodes = vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]];
            let mut weights = vec![9.0 / 40.0];
            nodes.extend(perm3(1.0 - 2.0 * 0.470142064105115, 0.470142064105115));
            weights.extend([0.132394152788506; 3]);
            nodes.extend(perm3(1.0 - 2.0 * 0.101286507323456, 0.101286507323456));
            weights.extend([0.125939180544827; 3]);
            (nodes, weights)
        }
        6 => {
            let mut nodes = perm3(1.0 - 2.0 * 0.249286745170910, 0.249286745170910);
            let mut weights = vec![0.116786275726379; 3];
            nodes.extend(perm3(1.0 - 2.0 * 0.063089014491502, 0.063089014491502));
            weights.extend([0.050844906370207; 3]);
            nodes.extend(perm6(0.053145049844816, 0.310352451033785));
            weights.extend([0.082851075618374; 6]);
            (nodes, weights)
        }
        _ => return Err(Error::QuadratureDegree(degree)),
    };
    Ok(TriangleRule {
        degree,
        nodes,
        weights,
    })
}

fn perm3(a: f64, b: f64) -> Vec<[f64; 3]> {
    vec![[a, b, b], [b, a, b], [b, b, a]]
}

fn perm6(a: f64, b: f64) -> Vec<[f64; 3]> {
    let c = 1.0 - a - b;
    vec![
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ]
}
