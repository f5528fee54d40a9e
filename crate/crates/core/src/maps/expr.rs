use crate::cone::Staged;

/// One coordinate of a map in the class generated by power means.
///
/// Tensor maps, harmonic means and Shapley conjugates are built from
/// these nodes by the constructors in [`super::build`].
#[derive(Clone, Debug, PartialEq)]
pub enum MapExpr {
    Coord(usize),
    /// `(Σ σ_i c_i^r)^{1/r}`, the weighted geometric mean when `r = 0`.
    PowerMean {
        r: f64,
        weights: Vec<f64>,
        children: Vec<MapExpr>,
    },
    Sum(Vec<MapExpr>),
    Min(Vec<MapExpr>),
    Max(Vec<MapExpr>),
    Scale {
        c: f64,
        child: Box<MapExpr>,
    },
    /// `outer` evaluated on the vector `(inner_1, .., inner_k)`.
    Compose {
        outer: Box<MapExpr>,
        inner: Vec<MapExpr>,
    },
    /// `Σ w_j x_j`, a nonnegative matrix row stored sparsely.
    Linear(Vec<(usize, f64)>),
    /// `c Π x_j^{p_j}` with `Σ p_j = 1`.
    Monomial {
        coeff: f64,
        exponents: Vec<(usize, f64)>,
    },
    /// `(1/a + 1/b)^{-1}`.
    Theta(Box<MapExpr>, Box<MapExpr>),
}

pub(crate) fn power_mean_f64(r: f64, weights: &[f64], vals: &[f64]) -> f64 {
    if r == 0.0 {
        weights.iter().zip(vals).filter(|(w, _)| **w > 0.0).map(|(w, v)| v.powf(*w)).product()
    } else {
        let s: f64 = weights.iter().zip(vals).filter(|(w, _)| **w > 0.0).map(|(w, v)| w * v.powf(r)).sum();
        s.powf(1.0 / r)
    }
}

impl MapExpr {
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        match self {
            MapExpr::Coord(j) => x[*j],
            MapExpr::PowerMean { r, weights, children } => {
                let vals: Vec<f64> = children.iter().map(|c| c.eval_f64(x)).collect();
                power_mean_f64(*r, weights, &vals)
            }
            MapExpr::Sum(cs) => cs.iter().map(|c| c.eval_f64(x)).sum(),
            MapExpr::Min(cs) => cs.iter().map(|c| c.eval_f64(x)).fold(f64::INFINITY, f64::min),
            MapExpr::Max(cs) => cs.iter().map(|c| c.eval_f64(x)).fold(0.0, f64::max),
            MapExpr::Scale { c, child } => c * child.eval_f64(x),
            MapExpr::Compose { outer, inner } => {
                let y: Vec<f64> = inner.iter().map(|c| c.eval_f64(x)).collect();
                outer.eval_f64(&y)
            }
            MapExpr::Linear(w) => w.iter().map(|(j, a)| a * x[*j]).sum(),
            MapExpr::Monomial { coeff, exponents } => {
                coeff * exponents.iter().map(|(j, p)| x[*j].powf(*p)).product::<f64>()
            }
            MapExpr::Theta(a, b) => 1.0 / (1.0 / a.eval_f64(x) + 1.0 / b.eval_f64(x)),
        }
    }

    pub fn eval_staged(&self, x: &[Staged]) -> Staged {
        match self {
            MapExpr::Coord(j) => x[*j],
            MapExpr::PowerMean { r, weights, children } => {
                let vals: Vec<(f64, Staged)> = weights
                    .iter()
                    .zip(children)
                    .filter(|(w, _)| **w > 0.0)
                    .map(|(w, c)| (*w, c.eval_staged(x)))
                    .collect();
                let r = *r;
                if r > 0.0 {
                    join_or(&vals, |fin| power_mean_pairs(r, fin))
                } else if r < 0.0 {
                    join_and(&vals, |fin| power_mean_pairs(r, fin))
                } else {
                    join_geometric(&vals, 1.0)
                }
            }
            MapExpr::Sum(cs) => {
                let vals = unit_weighted(cs, x);
                join_or(&vals, |fin| fin.iter().map(|(_, v)| v).sum())
            }
            MapExpr::Max(cs) => {
                let vals = unit_weighted(cs, x);
                join_or(&vals, |fin| fin.iter().map(|(_, v)| *v).fold(0.0, f64::max))
            }
            MapExpr::Min(cs) => {
                let vals = unit_weighted(cs, x);
                join_and(&vals, |fin| fin.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min))
            }
            MapExpr::Scale { c, child } => child.eval_staged(x).scale(*c),
            MapExpr::Compose { outer, inner } => {
                let y: Vec<Staged> = inner.iter().map(|c| c.eval_staged(x)).collect();
                outer.eval_staged(&y)
            }
            MapExpr::Linear(w) => {
                let vals: Vec<(f64, Staged)> = w.iter().map(|(j, a)| (*a, x[*j])).collect();
                join_or(&vals, |fin| fin.iter().map(|(a, v)| a * v).sum())
            }
            MapExpr::Monomial { coeff, exponents } => {
                let vals: Vec<(f64, Staged)> =
                    exponents.iter().filter(|(_, p)| *p > 0.0).map(|(j, p)| (*p, x[*j])).collect();
                join_geometric(&vals, *coeff)
            }
            MapExpr::Theta(a, b) => {
                let vals = vec![(1.0, a.eval_staged(x)), (1.0, b.eval_staged(x))];
                join_and(&vals, |fin| 1.0 / fin.iter().map(|(_, v)| 1.0 / v).sum::<f64>())
            }
        }
    }

    /// Calls `visit` on this node and every descendant.
    pub fn walk(&self, visit: &mut impl FnMut(&MapExpr)) {
        visit(self);
        match self {
            MapExpr::PowerMean { children, .. }
            | MapExpr::Sum(children)
            | MapExpr::Min(children)
            | MapExpr::Max(children) => children.iter().for_each(|c| c.walk(visit)),
            MapExpr::Scale { child, .. } => child.walk(visit),
            MapExpr::Compose { outer, inner } => {
                outer.walk(visit);
                inner.iter().for_each(|c| c.walk(visit));
            }
            MapExpr::Theta(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            MapExpr::Coord(_) | MapExpr::Linear(_) | MapExpr::Monomial { .. } => {}
        }
    }
}

fn unit_weighted(cs: &[MapExpr], x: &[Staged]) -> Vec<(f64, Staged)> {
    cs.iter().map(|c| (1.0, c.eval_staged(x))).collect()
}

fn power_mean_pairs(r: f64, fin: &[(f64, f64)]) -> f64 {
    let s: f64 = fin.iter().map(|(w, v)| w * v.powf(r)).sum();
    s.powf(1.0 / r)
}

fn finite_parts(vals: &[(f64, Staged)]) -> Vec<(f64, f64)> {
    vals.iter()
        .filter_map(|(w, v)| match v {
            Staged::Finite(f) => Some((*w, *f)),
            _ => None,
        })
        .collect()
}

// Sums, maxima and power means with r > 0: one infinite term makes the
// result infinite, and the result vanishes only when every term does.
// Zero terms contribute nothing to the finite value.
fn join_or(vals: &[(f64, Staged)], finite: impl Fn(&[(f64, f64)]) -> f64) -> Staged {
    let inf = vals.iter().filter_map(|(_, v)| if let Staged::Inf(s) = v { Some(*s) } else { None }).min();
    if let Some(s) = inf {
        return Staged::Inf(s);
    }
    if vals.iter().all(|(_, v)| v.is_zero()) {
        let s = vals.iter().filter_map(|(_, v)| if let Staged::Zero(s) = v { Some(*s) } else { None }).max();
        return Staged::Zero(s.unwrap_or(0));
    }
    let mut fin = finite_parts(vals);
    for (w, v) in vals {
        if v.is_zero() {
            fin.push((*w, 0.0));
        }
    }
    Staged::Finite(finite(&fin))
}

// Minima, harmonic-type means (r < 0): dual of `join_or`. Infinite terms
// drop out of the finite value.
fn join_and(vals: &[(f64, Staged)], finite: impl Fn(&[(f64, f64)]) -> f64) -> Staged {
    let zero = vals.iter().filter_map(|(_, v)| if let Staged::Zero(s) = v { Some(*s) } else { None }).min();
    if let Some(s) = zero {
        return Staged::Zero(s);
    }
    if vals.iter().all(|(_, v)| v.is_inf()) {
        let s = vals.iter().filter_map(|(_, v)| if let Staged::Inf(s) = v { Some(*s) } else { None }).max();
        return Staged::Inf(s.unwrap_or(0));
    }
    let fin = finite_parts(vals);
    if fin.is_empty() {
        return Staged::Inf(0);
    }
    // Renormalising is unnecessary for the weights that remain: a term at
    // infinity contributes 0 to Σ σ v^r when r < 0.
    Staged::Finite(finite(&fin))
}

// Weighted geometric means: the pole pinned earliest decides. Two poles of
// opposite kind at the same stage never arise from pure inputs; zero wins.
fn join_geometric(vals: &[(f64, Staged)], coeff: f64) -> Staged {
    let mut best: Option<Staged> = None;
    for (_, v) in vals {
        let cand = match v {
            Staged::Zero(s) => (*s, 0u8),
            Staged::Inf(s) => (*s, 1u8),
            Staged::Finite(_) => continue,
        };
        let cur = best.map(|b| match b {
            Staged::Zero(s) => (s, 0u8),
            Staged::Inf(s) => (s, 1u8),
            Staged::Finite(_) => unreachable!(),
        });
        if cur.is_none_or(|c| cand < c) {
            best = Some(*v);
        }
    }
    if let Some(p) = best {
        return p;
    }
    let prod: f64 = vals
        .iter()
        .map(|(w, v)| match v {
            Staged::Finite(f) => f.powf(*w),
            _ => 1.0,
        })
        .product();
    Staged::Finite(coeff * prod)
}
