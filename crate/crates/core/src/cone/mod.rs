//! Extended vectors on the closed positive orthant, the map trait, and the
//! elementary operators built on top of it (projections, restrictions,
//! reciprocal conjugation, Hilbert's projective metric).

mod ext;
mod mask;
mod ops;

pub use ext::{ser_ext_f64, ExtScalar, ExtVec, Side, Staged};
pub use mask::{SubsetMask, MAX_MASK_DIM};
pub use ops::{
    evaluate, face_map, hilbert_distance, hilbert_distance_f64, project, reciprocal_conjugate, restrict_lower,
    restrict_upper, BlackBoxMap, Conjugated, Face, Restricted,
};

use serde::Serialize;
use std::any::Any;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("vector mixes zero and infinite entries")]
    MixedPoles,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid extended scalar {0}")]
    InvalidScalar(f64),
    #[error("empty vector")]
    EmptyVector,
    #[error("vector is not in the open cone")]
    NotInterior,
    #[error("mask {bits:#b} has bits outside dimension {n}")]
    MaskOutOfRange { n: usize, bits: u32 },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension {n} exceeds the supported maximum {max}")]
    DimensionTooLarge { n: usize, max: usize },
}

/// Which pole a projection or restriction fills in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Pole {
    Zero,
    Inf,
}

impl Pole {
    pub fn at(self, stage: u8) -> Staged {
        match self {
            Pole::Zero => Staged::Zero(stage),
            Pole::Inf => Staged::Inf(stage),
        }
    }

    pub fn matches(self, v: Staged) -> bool {
        match self {
            Pole::Zero => v.is_zero(),
            Pole::Inf => v.is_inf(),
        }
    }

    pub fn dual(self) -> Pole {
        match self {
            Pole::Zero => Pole::Inf,
            Pole::Inf => Pole::Zero,
        }
    }
}

/// Structural facts about a map that unlock specialised results.
/// Flags are only ever set by constructors that can prove them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MapFlags {
    /// `log ∘ f ∘ exp` is convex in every coordinate.
    pub multiplicatively_convex: bool,
    /// Real-analytic on the open cone.
    pub analytic: bool,
}

/// A homogeneous order-preserving map of the positive orthant into itself,
/// extended continuously to the closed cone.
pub trait ConeMap: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Evaluates on staged extended values. Must be monotone, homogeneous
    /// on finite parts, and consistent with limits from the interior.
    fn eval_staged(&self, x: &[Staged]) -> Vec<Staged>;

    /// Evaluates only the listed output coordinates.
    fn eval_staged_subset(&self, x: &[Staged], outputs: &[usize]) -> Vec<Staged> {
        let full = self.eval_staged(x);
        outputs.iter().map(|&i| full[i]).collect()
    }

    /// Evaluation at a point of the open cone.
    fn eval_interior(&self, x: &[f64]) -> Vec<f64> {
        let xs: Vec<Staged> = x.iter().map(|&v| Staged::Finite(v)).collect();
        self.eval_staged(&xs).into_iter().map(Staged::to_f64).collect()
    }

    fn flags(&self) -> MapFlags {
        MapFlags::default()
    }

    /// False when boundary behaviour is only estimated numerically.
    fn is_exact(&self) -> bool {
        true
    }

    fn as_any(&self) -> &dyn Any;
}

pub type SharedMap = Arc<dyn ConeMap>;
