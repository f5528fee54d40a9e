use serde::{Serialize, Serializer};
use std::fmt;

use super::CoreError;

/// A value in the extended half-line `[0, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtScalar {
    Zero,
    /// Strictly positive and finite.
    Finite(f64),
    Inf,
}

impl ExtScalar {
    pub fn new(v: f64) -> Result<Self, CoreError> {
        if v.is_nan() || v < 0.0 {
            Err(CoreError::InvalidScalar(v))
        } else if v == 0.0 {
            Ok(ExtScalar::Zero)
        } else if v.is_infinite() {
            Ok(ExtScalar::Inf)
        } else {
            Ok(ExtScalar::Finite(v))
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtScalar::Zero => 0.0,
            ExtScalar::Finite(v) => v,
            ExtScalar::Inf => f64::INFINITY,
        }
    }

    pub fn recip(self) -> Self {
        match self {
            ExtScalar::Zero => ExtScalar::Inf,
            ExtScalar::Finite(v) => ExtScalar::Finite(1.0 / v),
            ExtScalar::Inf => ExtScalar::Zero,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtScalar::Finite(_))
    }
}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtScalar::Zero => write!(f, "0"),
            ExtScalar::Finite(v) => write!(f, "{v}"),
            ExtScalar::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ser_ext_f64(&self.to_f64(), s)
    }
}

/// Serializes an `f64` that may be infinite; JSON has no infinity literal.
pub fn ser_ext_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else if v.is_infinite() {
        s.serialize_str("-inf")
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else {
        s.serialize_f64(*v)
    }
}

/// Extended scalar tagged with the limit stage at which its pole was pinned.
///
/// Nested faces and conjugations take several limits one after another.
/// A pole with a smaller stage is taken first, so it dominates a pole of
/// the opposite kind with a larger stage (for instance inside a geometric
/// mean `0 · ∞`). Pure user-facing vectors only carry stage 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Staged {
    Zero(u8),
    Finite(f64),
    Inf(u8),
}

impl Staged {
    pub const ONE: Staged = Staged::Finite(1.0);

    pub fn from_ext(e: ExtScalar, stage: u8) -> Self {
        match e {
            ExtScalar::Zero => Staged::Zero(stage),
            ExtScalar::Finite(v) => Staged::Finite(v),
            ExtScalar::Inf => Staged::Inf(stage),
        }
    }

    /// Lossy conversion from a float: 0 and ∞ become stage-0 poles.
    pub fn from_f64(v: f64) -> Self {
        if v <= 0.0 {
            Staged::Zero(0)
        } else if v.is_infinite() {
            Staged::Inf(0)
        } else {
            Staged::Finite(v)
        }
    }

    pub fn to_ext(self) -> ExtScalar {
        match self {
            Staged::Zero(_) => ExtScalar::Zero,
            Staged::Finite(v) => ExtScalar::Finite(v),
            Staged::Inf(_) => ExtScalar::Inf,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.to_ext().to_f64()
    }

    pub fn recip(self) -> Self {
        match self {
            Staged::Zero(s) => Staged::Inf(s),
            Staged::Finite(v) => Staged::Finite(1.0 / v),
            Staged::Inf(s) => Staged::Zero(s),
        }
    }

    pub fn later(self, by: u8) -> Self {
        match self {
            Staged::Zero(s) => Staged::Zero(s.saturating_add(by)),
            Staged::Inf(s) => Staged::Inf(s.saturating_add(by)),
            v => v,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Staged::Zero(_))
    }

    pub fn is_inf(self) -> bool {
        matches!(self, Staged::Inf(_))
    }

    pub fn scale(self, c: f64) -> Self {
        match self {
            Staged::Finite(v) => Staged::Finite(c * v),
            p => p,
        }
    }
}

/// Which boundary part of the closed cone a vector lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    /// Some entries are 0, none are ∞.
    Lower,
    /// Some entries are ∞, none are 0.
    Upper,
    Interior,
}

/// A vector in `[0,∞)^n ∪ (0,∞]^n`. Zeros and infinities never mix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtVec {
    entries: Vec<ExtScalar>,
    side: Side,
}

impl ExtVec {
    pub fn new(entries: Vec<ExtScalar>) -> Result<Self, CoreError> {
        if entries.is_empty() {
            return Err(CoreError::EmptyVector);
        }
        let zero = entries.contains(&ExtScalar::Zero);
        let inf = entries.contains(&ExtScalar::Inf);
        let side = match (zero, inf) {
            (true, true) => return Err(CoreError::MixedPoles),
            (true, false) => Side::Lower,
            (false, true) => Side::Upper,
            (false, false) => Side::Interior,
        };
        Ok(ExtVec { entries, side })
    }

    pub fn from_f64(v: &[f64]) -> Result<Self, CoreError> {
        let entries = v.iter().map(|&x| ExtScalar::new(x)).collect::<Result<Vec<_>, _>>()?;
        Self::new(entries)
    }

    pub fn interior(v: &[f64]) -> Result<Self, CoreError> {
        let out = Self::from_f64(v)?;
        if out.side != Side::Interior {
            return Err(CoreError::NotInterior);
        }
        Ok(out)
    }

    pub fn ones(n: usize) -> Self {
        ExtVec { entries: vec![ExtScalar::Finite(1.0); n], side: Side::Interior }
    }

    pub fn from_staged(v: &[Staged]) -> Result<Self, CoreError> {
        Self::new(v.iter().map(|s| s.to_ext()).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn entries(&self) -> &[ExtScalar] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> ExtScalar {
        self.entries[i]
    }

    /// `{j : x_j > 0}` on the lower side, `{j : x_j < ∞}` on the upper side.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.entries[j].is_finite()).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.to_f64()).collect()
    }

    pub fn to_staged(&self) -> Vec<Staged> {
        self.entries.iter().map(|&e| Staged::from_ext(e, 0)).collect()
    }

    /// The entrywise reciprocal `L x`.
    pub fn reciprocal(&self) -> Self {
        let side = match self.side {
            Side::Lower => Side::Upper,
            Side::Upper => Side::Lower,
            Side::Interior => Side::Interior,
        };
        ExtVec { entries: self.entries.iter().map(|e| e.recip()).collect(), side }
    }
}

impl fmt::Display for ExtVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mixed_poles() {
        let v = ExtVec::new(vec![ExtScalar::Zero, ExtScalar::Inf]);
        assert_eq!(v, Err(CoreError::MixedPoles));
    }

    #[test]
    fn side_and_support() {
        let v = ExtVec::from_f64(&[0.0, 2.0, 3.0]).unwrap();
        assert_eq!(v.side(), Side::Lower);
        assert_eq!(v.support(), vec![1, 2]);
        let u = v.reciprocal();
        assert_eq!(u.side(), Side::Upper);
        assert_eq!(u.support(), vec![1, 2]);
        assert_eq!(u.get(1), ExtScalar::Finite(0.5));
    }

    #[test]
    fn invalid_scalars() {
        assert!(ExtScalar::new(-1.0).is_err());
        assert!(ExtScalar::new(f64::NAN).is_err());
        assert_eq!(ExtScalar::new(0.0).unwrap(), ExtScalar::Zero);
    }

    #[test]
    fn infinite_values_serialize_as_strings() {
        let s = serde_json::to_string(&ExtScalar::Inf).unwrap();
        assert_eq!(s, "\"inf\"");
    }
}
