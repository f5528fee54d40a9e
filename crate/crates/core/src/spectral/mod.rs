//! Collatz–Wielandt brackets, the minimal Hilbert displacement, and the
//! eigenvector solver.
//!
//! All iterations run `x ↦ f(x)/s + x` normalised in the sup-norm. Adding
//! the identity removes periodic behaviour and keeps the iterates
//! convergent whenever an interior eigenvector exists; the fixed scalar
//! `s` only rescales `f`.

mod run;

pub(crate) use run::UpperRun;

use serde::Serialize;
use thiserror::Error;

pub use crate::cone::reciprocal_conjugate;
use crate::cone::{ser_ext_f64, ConeMap, CoreError, ExtVec, SharedMap, Side};

/// Iteration budget and relative tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub budget: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-10, budget: 10_000 }
    }
}

/// Entries below this are treated as having left the face.
pub const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Error, Clone)]
pub enum SpectralError {
    #[error("iterates left the face; surviving support {support:?}")]
    SupportCollapse { support: Vec<usize> },
    #[error("no convergence within budget; bracket [{}, {}]", .0.lower, .0.upper)]
    Nonconverged(Box<CWBracket>),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Two-sided bound on a Collatz–Wielandt number, each side certified by a
/// stored witness: `upper` is a max-ratio and `lower` a min-ratio of the
/// map at the respective witness, taken over the witness's finite entries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CWBracket {
    #[serde(serialize_with = "ser_ext_f64")]
    pub lower: f64,
    #[serde(serialize_with = "ser_ext_f64")]
    pub upper: f64,
    pub witness_lower: ExtVec,
    pub witness_upper: ExtVec,
    pub iterations: usize,
    pub converged: bool,
}

impl CWBracket {
    pub fn contains(&self, v: f64, slack: f64) -> bool {
        self.lower - slack * self.lower.abs().max(1.0) <= v && v <= self.upper + slack * self.upper.abs().max(1.0)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `max_i f(w)_i / w_i` over the finite entries of `w` (0 when none).
pub fn max_ratio(f: &dyn ConeMap, w: &ExtVec) -> f64 {
    ratios(f, w).fold(0.0, f64::max)
}

/// `min_i f(w)_i / w_i` over the finite entries of `w` (∞ when none).
pub fn min_ratio(f: &dyn ConeMap, w: &ExtVec) -> f64 {
    ratios(f, w).fold(f64::INFINITY, f64::min)
}

fn ratios<'a>(f: &'a dyn ConeMap, w: &'a ExtVec) -> impl Iterator<Item = f64> + 'a {
    let y = f.eval_staged(&w.to_staged());
    let wf = w.to_f64();
    w.support().into_iter().map(move |i| y[i].to_f64() / wf[i])
}

/// Bracket for `r(f) = inf_x max_i f(x)_i/x_i`.
///
/// Coordinates that vanish under iteration are removed first; when all of
/// them vanish the bracket is `[0, 0]`. Lower bounds come from min-ratios
/// at interior iterates and at faces spanned by their largest entries.
pub fn cw_upper(f: &SharedMap, cfg: &SolverConfig) -> Result<CWBracket, SpectralError> {
    let mut run = UpperRun::new(f.clone(), None)?;
    run.advance(cfg.budget, cfg.tol)?;
    Ok(run.bracket(cfg.tol))
}

/// Bracket for `λ(f) = sup_x min_i f(x)_i/x_i = 1 / r(L f L)`.
pub fn cw_lower(f: &SharedMap, cfg: &SolverConfig) -> Result<CWBracket, SpectralError> {
    let dual = cw_upper(&reciprocal_conjugate(f), cfg)?;
    Ok(dual_bracket(f.as_ref(), &dual))
}

/// Turns a bracket for `r(L f L)` into one for `λ(f)`.
pub(crate) fn dual_bracket(f: &dyn ConeMap, dual: &CWBracket) -> CWBracket {
    let witness_lower = dual.witness_upper.reciprocal();
    let witness_upper = dual.witness_lower.reciprocal();
    CWBracket {
        lower: min_ratio(f, &witness_lower),
        // A witness with no finite entries certifies nothing from above.
        upper: if witness_upper.support().is_empty() { f64::INFINITY } else { max_ratio(f, &witness_upper) },
        witness_lower,
        witness_upper,
        iterations: dual.iterations,
        converged: dual.converged,
    }
}

/// Enclosure of `δ(f) = log r(f) - log λ(f)`.
#[derive(Clone, Debug, Serialize)]
pub struct Displacement {
    pub lower: f64,
    #[serde(serialize_with = "ser_ext_f64")]
    pub upper: f64,
    pub r: CWBracket,
    pub lambda: CWBracket,
}

pub fn min_displacement(f: &SharedMap, cfg: &SolverConfig) -> Result<Displacement, SpectralError> {
    let r = cw_upper(f, cfg)?;
    let lambda = cw_lower(f, cfg)?;
    let lower = (r.lower.ln() - lambda.upper.ln()).max(0.0);
    let upper = (r.upper.ln() - lambda.lower.ln()).max(0.0);
    Ok(Displacement { lower: if lower.is_nan() { 0.0 } else { lower }, upper, r, lambda })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenResult {
    /// Sup-norm normalised.
    pub vector: ExtVec,
    pub eigenvalue: f64,
    /// `d_H(x, f(x))` at the returned vector.
    pub residual: f64,
    pub iterations: usize,
}

/// Finds `x` with `d_H(x, f(x)) <= tol`.
pub fn solve_eigenvector(f: &dyn ConeMap, x0: &ExtVec, cfg: &SolverConfig) -> Result<EigenResult, SpectralError> {
    if x0.len() != f.dim() {
        return Err(CoreError::DimensionMismatch { expected: f.dim(), got: x0.len() }.into());
    }
    if x0.side() != Side::Interior {
        return Err(CoreError::NotInterior.into());
    }
    let mut x = normalized(x0.to_f64());
    let mut s = 0.0;
    let mut best_hi = f64::INFINITY;
    let mut best_hi_x = x.clone();
    let mut best_lo = 0.0;
    let mut best_lo_x = x.clone();
    for k in 0..=cfg.budget {
        let y = f.eval_interior(&x);
        check_image(&y)?;
        let (hi, lo) = extreme_ratios(&y, &x);
        if hi < best_hi {
            best_hi = hi;
            best_hi_x.clone_from(&x);
        }
        if lo > best_lo {
            best_lo = lo;
            best_lo_x.clone_from(&x);
        }
        let residual = (hi / lo).ln();
        if residual <= cfg.tol {
            return Ok(EigenResult {
                vector: ExtVec::interior(&x)?,
                eigenvalue: (hi * lo).sqrt(),
                residual,
                iterations: k,
            });
        }
        if k == 0 || run::rescale_at(k) {
            s = best_hi;
        }
        x = normalized(y.iter().zip(&x).map(|(a, b)| a / s + b).collect());
    }
    let bracket = CWBracket {
        lower: best_lo,
        upper: best_hi,
        witness_lower: ExtVec::interior(&best_lo_x)?,
        witness_upper: ExtVec::interior(&best_hi_x)?,
        iterations: cfg.budget,
        converged: false,
    };
    Err(SpectralError::Nonconverged(Box::new(bracket)))
}

/// The first `k` iterates of `f` from `x0`, each normalised to sup-norm 1.
pub fn iterate_normalized(f: &dyn ConeMap, x0: &ExtVec, k: usize) -> Result<Vec<ExtVec>, SpectralError> {
    if x0.side() != Side::Interior {
        return Err(CoreError::NotInterior.into());
    }
    let mut x = normalized(x0.to_f64());
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let y = f.eval_interior(&x);
        check_image(&y)?;
        x = normalized(y);
        out.push(ExtVec::interior(&x)?);
    }
    Ok(out)
}

pub(crate) fn normalized(mut x: Vec<f64>) -> Vec<f64> {
    let m = x.iter().copied().fold(0.0, f64::max);
    if m > 0.0 && m.is_finite() {
        x.iter_mut().for_each(|v| *v /= m);
    }
    x
}

pub(crate) fn extreme_ratios(y: &[f64], x: &[f64]) -> (f64, f64) {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for (a, b) in y.iter().zip(x) {
        let q = a / b;
        hi = hi.max(q);
        lo = lo.min(q);
    }
    (hi, lo)
}

pub(crate) fn check_image(y: &[f64]) -> Result<(), SpectralError> {
    if y.iter().all(|v| v.is_finite() && *v > UNDERFLOW) {
        return Ok(());
    }
    let support = (0..y.len()).filter(|&i| y[i].is_finite() && y[i] > UNDERFLOW).collect();
    Err(SpectralError::SupportCollapse { support })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::matrix_map;
    use std::sync::Arc;

    fn m(rows: &[Vec<f64>]) -> SharedMap {
        Arc::new(matrix_map(rows).unwrap())
    }

    #[test]
    fn diagonal_brackets_are_exact() {
        let f = m(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let cfg = SolverConfig::default();
        let r = cw_upper(&f, &cfg).unwrap();
        assert!((r.upper - 2.0).abs() < 1e-9 && (r.lower - 2.0).abs() < 1e-9, "{r:?}");
        let l = cw_lower(&f, &cfg).unwrap();
        assert!((l.upper - 1.0).abs() < 1e-9 && (l.lower - 1.0).abs() < 1e-9, "{l:?}");
        let d = min_displacement(&f, &cfg).unwrap();
        assert!((d.lower - 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn permutation_eigenvector() {
        let f = m(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let e =
            solve_eigenvector(f.as_ref(), &ExtVec::interior(&[1.0, 3.0]).unwrap(), &SolverConfig::default()).unwrap();
        assert!(e.residual <= 1e-10);
        assert!((e.eigenvalue - 1.0).abs() < 1e-10);
        let v = e.vector.to_f64();
        assert!((v[0] - v[1]).abs() < 1e-10);
    }

    #[test]
    fn witnesses_replay() {
        let f = m(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let b = cw_upper(&f, &SolverConfig::default()).unwrap();
        assert_eq!(b.upper, max_ratio(f.as_ref(), &b.witness_upper));
        assert_eq!(b.lower, min_ratio(f.as_ref(), &b.witness_lower));
        let rho = (5.0 + 5f64.sqrt()) / 2.0;
        assert!(b.contains(rho, 1e-12));
        assert!(b.converged);
    }

    #[test]
    fn nilpotent_collapses_to_zero() {
        let f: SharedMap = Arc::new(
            crate::maps::ExprMap::new(vec![
                crate::maps::MapExpr::Monomial { coeff: 1.0, exponents: vec![(0, 0.5), (1, 0.5)] },
                crate::maps::MapExpr::Coord(1),
            ])
            .unwrap(),
        );
        let g = crate::cone::face_map(&f, &[0], crate::cone::Pole::Zero).unwrap();
        let b = cw_upper(&g, &SolverConfig::default()).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }
}
