use std::any::Any;
use std::fmt;
use std::sync::Arc;

use super::{ConeMap, CoreError, ExtScalar, ExtVec, MapFlags, Pole, SharedMap, Side, Staged, SubsetMask};

/// Evaluates `f` at a pure extended vector.
///
/// Fails with `MixedPoles` when the image has both zero and infinite
/// entries, which can happen for restricted maps at upper-side points.
pub fn evaluate(f: &dyn ConeMap, x: &ExtVec) -> Result<ExtVec, CoreError> {
    if x.len() != f.dim() {
        return Err(CoreError::DimensionMismatch { expected: f.dim(), got: x.len() });
    }
    ExtVec::from_staged(&f.eval_staged(&x.to_staged()))
}

/// `P^J_0` (fill = Zero) or `P^J_∞` (fill = Inf): keep the entries in `J`.
pub fn project(x: &ExtVec, j: SubsetMask, fill: Pole) -> Result<ExtVec, CoreError> {
    if j.dim() != x.len() {
        return Err(CoreError::DimensionMismatch { expected: x.len(), got: j.dim() });
    }
    let filler = match fill {
        Pole::Zero => ExtScalar::Zero,
        Pole::Inf => ExtScalar::Inf,
    };
    let entries = (0..x.len()).map(|i| if j.contains(i) { x.get(i) } else { filler }).collect();
    ExtVec::new(entries)
}

/// `P f P` as an n-dimensional map: coordinates outside `keep` are pinned
/// to the pole both on input and output.
#[derive(Debug)]
pub struct Restricted {
    inner: SharedMap,
    keep: Vec<bool>,
    fill: Pole,
}

impl Restricted {
    pub fn new(inner: SharedMap, keep: &[usize], fill: Pole) -> Result<Self, CoreError> {
        let n = inner.dim();
        let mut mask = vec![false; n];
        for &i in keep {
            if i >= n {
                return Err(CoreError::IndexOutOfRange { index: i, n });
            }
            mask[i] = true;
        }
        Ok(Restricted { inner, keep: mask, fill })
    }
}

impl ConeMap for Restricted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval_staged(&self, x: &[Staged]) -> Vec<Staged> {
        let z: Vec<Staged> =
            x.iter().zip(&self.keep).map(|(&v, &k)| if k { v.later(1) } else { self.fill.at(0) }).collect();
        let mut out = self.inner.eval_staged(&z);
        for (o, &k) in out.iter_mut().zip(&self.keep) {
            if k {
                *o = unshift(*o);
            } else {
                *o = self.fill.at(0);
            }
        }
        out
    }

    fn flags(&self) -> MapFlags {
        self.inner.flags()
    }

    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

// Outputs of a face evaluation come back at the shifted stages; stage 0
// belonged to the fill, which is the pole the output projection imposes
// anyway, so callers see the same ordering they supplied.
fn unshift(v: Staged) -> Staged {
    match v {
        Staged::Zero(s) => Staged::Zero(s.saturating_sub(1)),
        Staged::Inf(s) => Staged::Inf(s.saturating_sub(1)),
        f => f,
    }
}

/// The face map `f^J` on `R^J`: `y ↦ (f(P y))_J`, with `P` filling the
/// complement of `J` by the given pole.
#[derive(Debug)]
pub struct Face {
    inner: SharedMap,
    indices: Vec<usize>,
    fill: Pole,
}

impl Face {
    pub fn new(inner: SharedMap, indices: Vec<usize>, fill: Pole) -> Result<Self, CoreError> {
        let n = inner.dim();
        if indices.is_empty() {
            return Err(CoreError::EmptyVector);
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(CoreError::IndexOutOfRange { index: bad, n });
        }
        Ok(Face { inner, indices, fill })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn fill(&self) -> Pole {
        self.fill
    }

    fn lift(&self, y: &[Staged]) -> Vec<Staged> {
        let mut z = vec![self.fill.at(0); self.inner.dim()];
        for (k, &i) in self.indices.iter().enumerate() {
            z[i] = y[k].later(1);
        }
        z
    }
}

impl ConeMap for Face {
    fn dim(&self) -> usize {
        self.indices.len()
    }

    fn eval_staged(&self, y: &[Staged]) -> Vec<Staged> {
        let z = self.lift(y);
        self.inner.eval_staged_subset(&z, &self.indices).into_iter().map(unshift).collect()
    }

    fn eval_staged_subset(&self, y: &[Staged], outputs: &[usize]) -> Vec<Staged> {
        let z = self.lift(y);
        let idx: Vec<usize> = outputs.iter().map(|&k| self.indices[k]).collect();
        self.inner.eval_staged_subset(&z, &idx).into_iter().map(unshift).collect()
    }

    fn flags(&self) -> MapFlags {
        self.inner.flags()
    }

    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `L f L` where `L` is the entrywise reciprocal.
#[derive(Debug)]
pub struct Conjugated {
    inner: SharedMap,
}

impl Conjugated {
    pub fn inner(&self) -> &SharedMap {
        &self.inner
    }
}

impl ConeMap for Conjugated {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval_staged(&self, x: &[Staged]) -> Vec<Staged> {
        let lx: Vec<Staged> = x.iter().map(|v| v.recip()).collect();
        self.inner.eval_staged(&lx).into_iter().map(Staged::recip).collect()
    }

    fn eval_staged_subset(&self, x: &[Staged], outputs: &[usize]) -> Vec<Staged> {
        let lx: Vec<Staged> = x.iter().map(|v| v.recip()).collect();
        self.inner.eval_staged_subset(&lx, outputs).into_iter().map(Staged::recip).collect()
    }

    fn eval_interior(&self, x: &[f64]) -> Vec<f64> {
        let lx: Vec<f64> = x.iter().map(|v| 1.0 / v).collect();
        self.inner.eval_interior(&lx).into_iter().map(|v| 1.0 / v).collect()
    }

    fn flags(&self) -> MapFlags {
        // Conjugation turns log-convex into log-concave coordinates.
        MapFlags { multiplicatively_convex: false, analytic: self.inner.flags().analytic }
    }

    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `f^J_0 = P^J_0 f P^J_0` as an n-dimensional map.
pub fn restrict_lower(f: SharedMap, j: SubsetMask) -> Result<SharedMap, CoreError> {
    check_mask(&f, j)?;
    Ok(Arc::new(Restricted::new(f, &j.indices(), Pole::Zero)?))
}

/// `f^J_∞ = P^J_∞ f P^J_∞` as an n-dimensional map.
pub fn restrict_upper(f: SharedMap, j: SubsetMask) -> Result<SharedMap, CoreError> {
    check_mask(&f, j)?;
    Ok(Arc::new(Restricted::new(f, &j.indices(), Pole::Inf)?))
}

fn check_mask(f: &SharedMap, j: SubsetMask) -> Result<(), CoreError> {
    if j.dim() != f.dim() {
        return Err(CoreError::DimensionMismatch { expected: f.dim(), got: j.dim() });
    }
    Ok(())
}

/// Face map on the given coordinates. When `indices` covers everything
/// the map itself is returned.
pub fn face_map(f: &SharedMap, indices: &[usize], fill: Pole) -> Result<SharedMap, CoreError> {
    if indices.len() == f.dim() && indices.iter().enumerate().all(|(k, &i)| k == i) {
        return Ok(f.clone());
    }
    Ok(Arc::new(Face::new(f.clone(), indices.to_vec(), fill)?))
}

/// `L f L`. Applying it twice returns the original map.
pub fn reciprocal_conjugate(f: &SharedMap) -> SharedMap {
    if let Some(c) = f.as_any().downcast_ref::<Conjugated>() {
        return c.inner.clone();
    }
    Arc::new(Conjugated { inner: f.clone() })
}

/// Hilbert's projective metric on the open orthant.
pub fn hilbert_distance(x: &ExtVec, y: &ExtVec) -> Result<f64, CoreError> {
    if x.len() != y.len() {
        return Err(CoreError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.side() != Side::Interior || y.side() != Side::Interior {
        return Err(CoreError::NotInterior);
    }
    Ok(hilbert_distance_f64(&x.to_f64(), &y.to_f64()))
}

/// `log max_i (y_i/x_i) - log min_i (y_i/x_i)` for positive finite vectors.
pub fn hilbert_distance_f64(x: &[f64], y: &[f64]) -> f64 {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for (a, b) in x.iter().zip(y) {
        let q = b / a;
        hi = hi.max(q);
        lo = lo.min(q);
    }
    (hi / lo).ln().max(0.0)
}

type Kernel = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A map known only through evaluations on the open cone.
///
/// Boundary values are estimated from the growth of outputs at two
/// surrogate scales, so anything derived from them is heuristic.
#[derive(Clone)]
pub struct BlackBoxMap {
    n: usize,
    kernel: Arc<Kernel>,
}

impl BlackBoxMap {
    pub const PROBE_SCALE: f64 = 1e12;

    pub fn new(n: usize, kernel: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        BlackBoxMap { n, kernel: Arc::new(kernel) }
    }

    fn surrogate(v: Staged, t: f64) -> f64 {
        match v {
            Staged::Finite(x) => x,
            Staged::Zero(s) => t.powi(-(4 - i32::from(s.min(3)))),
            Staged::Inf(s) => t.powi(4 - i32::from(s.min(3))),
        }
    }
}

impl fmt::Debug for BlackBoxMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBoxMap").field("n", &self.n).finish()
    }
}

impl ConeMap for BlackBoxMap {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_staged(&self, x: &[Staged]) -> Vec<Staged> {
        let t = Self::PROBE_SCALE;
        if x.iter().all(|v| matches!(v, Staged::Finite(_))) {
            return self
                .eval_interior(&x.iter().map(|v| v.to_f64()).collect::<Vec<_>>())
                .into_iter()
                .map(Staged::from_f64)
                .collect();
        }
        let a: Vec<f64> = x.iter().map(|&v| Self::surrogate(v, t)).collect();
        let b: Vec<f64> = x.iter().map(|&v| Self::surrogate(v, t * t)).collect();
        let ya = (self.kernel)(&a);
        let yb = (self.kernel)(&b);
        ya.iter()
            .zip(&yb)
            .map(|(&p, &q)| {
                if p <= 0.0 || q <= 0.0 {
                    return Staged::Zero(0);
                }
                if p.is_infinite() || q.is_infinite() {
                    return Staged::Inf(0);
                }
                let growth = (q / p).ln() / t.ln();
                if growth > 0.25 {
                    Staged::Inf(0)
                } else if growth < -0.25 {
                    Staged::Zero(0)
                } else {
                    Staged::Finite(p)
                }
            })
            .collect()
    }

    fn eval_interior(&self, x: &[f64]) -> Vec<f64> {
        (self.kernel)(x)
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
