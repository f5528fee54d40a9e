use super::{ExprMap, MapError, MapExpr};
use crate::cone::MapFlags;
use crate::topical::{GameSpec, Player};

/// A nonnegative order-`d` tensor, stored as a sparse list of entries per
/// row: `(a, [j_2, .., j_d])` stands for `a x_{j_2} ⋯ x_{j_d}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorSpec {
    pub n: usize,
    pub order: usize,
    pub rows: Vec<Vec<(f64, Vec<usize>)>>,
}

impl TensorSpec {
    /// From a dense row-major table of length `n^order`.
    pub fn from_dense(n: usize, order: usize, data: &[f64]) -> Result<Self, MapError> {
        let expected = n.pow(order as u32);
        if data.len() != expected {
            return Err(MapError::DimensionMismatch { expected, got: data.len() });
        }
        let per_row = n.pow(order as u32 - 1);
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::new();
            for k in 0..per_row {
                let a = data[i * per_row + k];
                if a != 0.0 {
                    let mut idx = Vec::with_capacity(order - 1);
                    let mut rest = k;
                    for _ in 1..order {
                        idx.push(rest % n);
                        rest /= n;
                    }
                    idx.reverse();
                    row.push((a, idx));
                }
            }
            rows.push(row);
        }
        Ok(TensorSpec { n, order, rows })
    }
}

/// `f(x)_i = ((A x^{d-1})_i)^{1/(d-1)}`.
///
/// Each row becomes `A_i^{1/(d-1)} M_{d-1,σ}(g_1, ..)` where the `g_k` are
/// geometric means of the monomials and `σ_k = a_k / A_i`. Order 2 gives
/// the linear map of the matrix.
pub fn tensor_map(spec: &TensorSpec) -> Result<ExprMap, MapError> {
    if spec.order < 2 {
        return Err(MapError::TensorArity { expected: 2, got: spec.order });
    }
    if spec.rows.len() != spec.n {
        return Err(MapError::DimensionMismatch { expected: spec.n, got: spec.rows.len() });
    }
    let m = (spec.order - 1) as f64;
    let mut coords = Vec::with_capacity(spec.n);
    for (i, row) in spec.rows.iter().enumerate() {
        let mut terms = Vec::new();
        for (a, idx) in row {
            if idx.len() != spec.order - 1 {
                return Err(MapError::TensorArity { expected: spec.order - 1, got: idx.len() });
            }
            if let Some(&bad) = idx.iter().find(|&&j| j >= spec.n) {
                return Err(MapError::IndexOutOfRange { index: bad, n: spec.n });
            }
            if !(a.is_finite() && *a >= 0.0) {
                return Err(MapError::BadCoefficient(*a));
            }
            if *a > 0.0 {
                terms.push((*a, idx));
            }
        }
        let total: f64 = terms.iter().map(|(a, _)| a).sum();
        if terms.is_empty() {
            return Err(MapError::ZeroRow(i));
        }
        if spec.order == 2 {
            let mut w: Vec<(usize, f64)> = Vec::new();
            for (a, idx) in &terms {
                match w.iter_mut().find(|(j, _)| *j == idx[0]) {
                    Some(slot) => slot.1 += a,
                    None => w.push((idx[0], *a)),
                }
            }
            coords.push(MapExpr::Linear(w));
            continue;
        }
        let weights: Vec<f64> = terms.iter().map(|(a, _)| a / total).collect();
        let children: Vec<MapExpr> = terms
            .iter()
            .map(|(_, idx)| {
                let mut exps: Vec<(usize, f64)> = Vec::new();
                for &j in idx.iter() {
                    match exps.iter_mut().find(|(k, _)| *k == j) {
                        Some(slot) => slot.1 += 1.0 / m,
                        None => exps.push((j, 1.0 / m)),
                    }
                }
                MapExpr::Monomial { coeff: 1.0, exponents: exps }
            })
            .collect();
        coords.push(MapExpr::Scale {
            c: total.powf(1.0 / m),
            child: Box::new(MapExpr::PowerMean { r: m, weights, children }),
        });
    }
    ExprMap::new(coords)
}

/// The linear map of a nonnegative matrix given by rows.
pub fn matrix_map(rows: &[Vec<f64>]) -> Result<ExprMap, MapError> {
    let n = rows.len();
    let mut coords = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(MapError::DimensionMismatch { expected: n, got: row.len() });
        }
        if row.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(MapError::BadCoefficient(row.iter().copied().find(|a| !(a.is_finite() && *a >= 0.0)).unwrap()));
        }
        let w: Vec<(usize, f64)> = row.iter().enumerate().filter(|(_, a)| **a > 0.0).map(|(j, a)| (j, *a)).collect();
        if w.is_empty() {
            return Err(MapError::ZeroRow(i));
        }
        coords.push(MapExpr::Linear(w));
    }
    ExprMap::new(coords)
}

/// `θ(a, b) = (1/a + 1/b)^{-1} = ½ M_{-1,(½,½)}(a, b)`.
pub fn harmonic_theta(a: MapExpr, b: MapExpr) -> MapExpr {
    MapExpr::Theta(Box::new(a), Box::new(b))
}

/// `exp ∘ T ∘ log` for the Shapley operator of a turn-based stochastic game:
/// a max or min over actions of `e^{r_a} Π x_j^{P_a(j)}`.
pub fn shapley_conjugate(game: &GameSpec) -> Result<ExprMap, MapError> {
    let mut coords = Vec::with_capacity(game.states.len());
    for state in &game.states {
        let mut branches = Vec::with_capacity(state.actions.len());
        for a in &state.actions {
            let coeff = a.payoff.exp();
            let exponents: Vec<(usize, f64)> =
                a.transition.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(j, p)| (j, *p)).collect();
            branches.push(MapExpr::Monomial { coeff, exponents });
        }
        coords.push(match state.player {
            Player::Max => MapExpr::Max(branches),
            Player::Min => MapExpr::Min(branches),
        });
    }
    ExprMap::with_flags_capped(coords, MapFlags::default())
}
