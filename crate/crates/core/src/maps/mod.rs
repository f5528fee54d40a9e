//! Concrete maps: power-mean expressions, nonnegative matrices and tensors,
//! and multiplicative conjugates of Shapley operators.

pub mod build;
mod expr;
mod sparsity;

pub use build::{harmonic_theta, matrix_map, shapley_conjugate, tensor_map, TensorSpec};
pub use expr::MapExpr;
pub use sparsity::{sparsity_probe, SparsityMethod, SparsityPattern};

use std::any::Any;
use thiserror::Error;

use crate::cone::{ConeMap, ExtScalar, ExtVec, MapFlags, Staged};

pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("weights must be nonnegative and sum to 1 (sum = {sum})")]
    BadWeights { sum: f64 },
    #[error("weights and children have different lengths ({weights} vs {children})")]
    ArityMismatch { weights: usize, children: usize },
    #[error("node has no children")]
    EmptyChildren,
    #[error("coordinate {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("exponents sum to {sum}, expected 1")]
    Inhomogeneous { sum: f64 },
    #[error("coefficient {0} must be positive and finite")]
    BadCoefficient(f64),
    #[error("mean exponent {0} must be finite")]
    BadExponent(f64),
    #[error("row {0} has no positive entry")]
    ZeroRow(usize),
    #[error("expected {expected} coordinate expressions, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tensor entry has {got} indices, expected {expected}")]
    TensorArity { expected: usize, got: usize },
}

/// A map given by one [`MapExpr`] per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprMap {
    coords: Vec<MapExpr>,
    flags: MapFlags,
}

impl ExprMap {
    pub fn new(coords: Vec<MapExpr>) -> Result<Self, MapError> {
        let n = coords.len();
        if n == 0 {
            return Err(MapError::EmptyChildren);
        }
        for e in &coords {
            validate(e, n)?;
        }
        let flags = derive_flags(&coords);
        Ok(ExprMap { coords, flags })
    }

    /// Same as [`ExprMap::new`] but with flags forced off where requested.
    pub fn with_flags_capped(coords: Vec<MapExpr>, cap: MapFlags) -> Result<Self, MapError> {
        let mut m = Self::new(coords)?;
        m.flags.multiplicatively_convex &= cap.multiplicatively_convex;
        m.flags.analytic &= cap.analytic;
        Ok(m)
    }

    pub fn coords(&self) -> &[MapExpr] {
        &self.coords
    }

    pub fn is_linear(&self) -> bool {
        self.coords.iter().all(|e| matches!(e, MapExpr::Linear(_)))
    }
}

impl ConeMap for ExprMap {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn eval_staged(&self, x: &[Staged]) -> Vec<Staged> {
        self.coords.iter().map(|e| e.eval_staged(x)).collect()
    }

    fn eval_staged_subset(&self, x: &[Staged], outputs: &[usize]) -> Vec<Staged> {
        outputs.iter().map(|&i| self.coords[i].eval_staged(x)).collect()
    }

    fn eval_interior(&self, x: &[f64]) -> Vec<f64> {
        self.coords.iter().map(|e| e.eval_f64(x)).collect()
    }

    fn flags(&self) -> MapFlags {
        self.flags
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `M_{rσ}(x)` at a pure extended vector.
pub fn eval_mean(r: f64, sigma: &[f64], x: &ExtVec) -> Result<ExtScalar, MapError> {
    let e = MapExpr::PowerMean { r, weights: sigma.to_vec(), children: (0..x.len()).map(MapExpr::Coord).collect() };
    validate(&e, x.len())?;
    Ok(e.eval_staged(&x.to_staged()).to_ext())
}

fn check_weights(w: &[f64]) -> Result<(), MapError> {
    let sum: f64 = w.iter().sum();
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) || (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(MapError::BadWeights { sum });
    }
    Ok(())
}

fn check_coeff(c: f64) -> Result<(), MapError> {
    if !(c.is_finite() && c > 0.0) {
        return Err(MapError::BadCoefficient(c));
    }
    Ok(())
}

pub(crate) fn validate(e: &MapExpr, n: usize) -> Result<(), MapError> {
    match e {
        MapExpr::Coord(j) => {
            if *j >= n {
                return Err(MapError::IndexOutOfRange { index: *j, n });
            }
        }
        MapExpr::PowerMean { r, weights, children } => {
            if !r.is_finite() {
                return Err(MapError::BadExponent(*r));
            }
            if children.is_empty() {
                return Err(MapError::EmptyChildren);
            }
            if weights.len() != children.len() {
                return Err(MapError::ArityMismatch { weights: weights.len(), children: children.len() });
            }
            check_weights(weights)?;
            for c in children {
                validate(c, n)?;
            }
        }
        MapExpr::Sum(cs) | MapExpr::Min(cs) | MapExpr::Max(cs) => {
            if cs.is_empty() {
                return Err(MapError::EmptyChildren);
            }
            for c in cs {
                validate(c, n)?;
            }
        }
        MapExpr::Scale { c, child } => {
            check_coeff(*c)?;
            validate(child, n)?;
        }
        MapExpr::Compose { outer, inner } => {
            if inner.is_empty() {
                return Err(MapError::EmptyChildren);
            }
            for c in inner {
                validate(c, n)?;
            }
            validate(outer, inner.len())?;
        }
        MapExpr::Linear(w) => {
            for (j, a) in w {
                if *j >= n {
                    return Err(MapError::IndexOutOfRange { index: *j, n });
                }
                if !(a.is_finite() && *a >= 0.0) {
                    return Err(MapError::BadCoefficient(*a));
                }
            }
            if !w.iter().any(|(_, a)| *a > 0.0) {
                return Err(MapError::EmptyChildren);
            }
        }
        MapExpr::Monomial { coeff, exponents } => {
            check_coeff(*coeff)?;
            if exponents.is_empty() {
                return Err(MapError::EmptyChildren);
            }
            let mut sum = 0.0;
            for (j, p) in exponents {
                if *j >= n {
                    return Err(MapError::IndexOutOfRange { index: *j, n });
                }
                if !(p.is_finite() && *p >= 0.0) {
                    return Err(MapError::Inhomogeneous { sum: *p });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > WEIGHT_TOL {
                return Err(MapError::Inhomogeneous { sum });
            }
        }
        MapExpr::Theta(a, b) => {
            validate(a, n)?;
            validate(b, n)?;
        }
    }
    Ok(())
}

fn derive_flags(coords: &[MapExpr]) -> MapFlags {
    let mut analytic = true;
    let mut convex = true;
    for e in coords {
        e.walk(&mut |node| match node {
            MapExpr::Min(_) | MapExpr::Max(_) => {
                analytic = false;
                convex = false;
            }
            MapExpr::Theta(..) => convex = false,
            MapExpr::PowerMean { r, .. } if *r < 0.0 => convex = false,
            _ => {}
        });
    }
    MapFlags { multiplicatively_convex: convex, analytic }
}
