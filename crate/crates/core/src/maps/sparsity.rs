use serde::Serialize;

use super::{ExprMap, MapExpr};
use crate::cone::ConeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SparsityMethod {
    Symbolic,
    FiniteDifference,
}

/// Nonzero pattern of the derivative `f'(u)`: `entry(i, j)` is true when
/// `∂f_i/∂x_j (u) > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparsityPattern {
    pub n: usize,
    pub entries: Vec<Vec<bool>>,
    pub method: SparsityMethod,
    /// False when one-sided differences disagree at `u`.
    pub differentiable: bool,
}

impl SparsityPattern {
    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.entries[i][j]
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.entries[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Derivative pattern at `u`. Analytic expression maps are read
/// symbolically; everything else uses central differences with step
/// `1e-6 u_j`.
pub fn sparsity_probe(f: &dyn ConeMap, u: &[f64], tol: f64) -> SparsityPattern {
    let n = f.dim();
    if let Some(m) = f.as_any().downcast_ref::<ExprMap>() {
        if m.flags().analytic {
            let entries = m.coords().iter().map(|e| dependencies(e, n)).collect();
            return SparsityPattern { n, entries, method: SparsityMethod::Symbolic, differentiable: true };
        }
    }
    let fu = f.eval_interior(u);
    let mut entries = vec![vec![false; n]; n];
    let mut differentiable = true;
    for j in 0..n {
        let h = 1e-6 * u[j];
        let mut up = u.to_vec();
        up[j] += h;
        let mut down = u.to_vec();
        down[j] -= h;
        let fp = f.eval_interior(&up);
        let fm = f.eval_interior(&down);
        for i in 0..n {
            let fwd = (fp[i] - fu[i]) / h;
            let bwd = (fu[i] - fm[i]) / h;
            let scale = fu[i] / u[j];
            if (fwd - bwd).abs() > 1e-3 * scale.max(fwd.abs()) {
                differentiable = false;
            }
            entries[i][j] = 0.5 * (fwd + bwd) > tol * scale;
        }
    }
    SparsityPattern { n, entries, method: SparsityMethod::FiniteDifference, differentiable }
}

/// Coordinates with a positive partial derivative everywhere in the open
/// cone. Exact for analytic expressions, whose nodes are strictly
/// increasing in every positively weighted child.
pub fn dependencies(e: &MapExpr, n: usize) -> Vec<bool> {
    let mut out = vec![false; n];
    match e {
        MapExpr::Coord(j) => out[*j] = true,
        MapExpr::PowerMean { weights, children, .. } => {
            for (w, c) in weights.iter().zip(children) {
                if *w > 0.0 {
                    merge(&mut out, &dependencies(c, n));
                }
            }
        }
        MapExpr::Sum(cs) | MapExpr::Min(cs) | MapExpr::Max(cs) => {
            for c in cs {
                merge(&mut out, &dependencies(c, n));
            }
        }
        MapExpr::Scale { child, .. } => out = dependencies(child, n),
        MapExpr::Compose { outer, inner } => {
            let via = dependencies(outer, inner.len());
            for (k, c) in inner.iter().enumerate() {
                if via[k] {
                    merge(&mut out, &dependencies(c, n));
                }
            }
        }
        MapExpr::Linear(w) => w.iter().filter(|(_, a)| *a > 0.0).for_each(|(j, _)| out[*j] = true),
        MapExpr::Monomial { exponents, .. } => {
            exponents.iter().filter(|(_, p)| *p > 0.0).for_each(|(j, _)| out[*j] = true)
        }
        MapExpr::Theta(a, b) => {
            merge(&mut out, &dependencies(a, n));
            merge(&mut out, &dependencies(b, n));
        }
    }
    out
}

fn merge(acc: &mut [bool], other: &[bool]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a |= *b;
    }
}
