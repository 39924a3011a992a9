//! Analytic scalar fields on the smooth surface, with optional surface
//! gradients and a registry of singular points (the membrane data is
//! log-singular at constraint points).

use crate::error::{Error, Result};

type ValueFn = dyn Fn(&[f64; 3]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64; 3]) -> [f64; 3] + Send + Sync;

pub struct ScalarField {
    value: Box<ValueFn>,
    gradient: Option<Box<GradFn>>,
    singular_points: Vec<[f64; 3]>,
}

impl ScalarField {
    pub fn new<F>(value: F) -> Self
    where
        F: Fn(&[f64; 3]) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            value: Box::new(value),
            gradient: None,
            singular_points: Vec::new(),
        }
    }

    /// Attaches the surface gradient (a tangent vector at each point).
    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&[f64; 3]) -> [f64; 3] + Send + Sync + 'static,
    {
        self.gradient = Some(Box::new(gradient));
        self
    }

    /// Registers points where the field (or its gradient) is singular.
    pub fn with_singular_points(mut self, points: Vec<[f64; 3]>) -> Self {
        self.singular_points = points;
        self
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(move |_| c).with_gradient(|_| [0.0; 3])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        (self.value)(x)
    }

    /// Evaluates and rejects non-finite values.
    pub fn eval_checked(&self, x: &[f64; 3]) -> Result<f64> {
        let v = self.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteField(x[0], x[1], x[2]))
        }
    }

    pub fn grad(&self, x: &[f64; 3]) -> Result<[f64; 3]> {
        match &self.gradient {
            Some(g) => Ok(g(x)),
            None => Err(Error::MissingGradient),
        }
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn singular_points(&self) -> &[[f64; 3]] {
        &self.singular_points
    }
}
