//! Topical maps and turn-based stochastic games.
//!
//! A topical map `T` is order-preserving and additively homogeneous. Its
//! multiplicative conjugate `exp ∘ T ∘ log` is a cone map, and an additive
//! eigenvector `T(x) = x + λ·1` is the logarithm of an interior eigenvector
//! of the conjugate. Evaluation stays additive so payoffs far outside the
//! range of `exp` still work; the conjugate is built from payoffs shifted
//! by a constant, which only rescales its eigenvalue.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::cone::{Pole, SharedMap, SubsetMask};
use crate::existence::{classify, verdict_document, ClassifyConfig, ExistenceError, NumberScale, Verdict};
use crate::maps::{shapley_conjugate, MapError};
use crate::spectral::{cw_lower, cw_upper, SolverConfig, SpectralError};

/// Allowed deviation of a transition row sum from 1.
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Player {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Action {
    pub payoff: f64,
    /// Probability of moving to each state.
    pub transition: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameState {
    pub player: Player,
    pub actions: Vec<Action>,
}

/// Zero-sum game where one player controls each state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameSpec {
    pub states: Vec<GameState>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("game has no states")]
    NoStates,
    #[error("state {state} has no actions")]
    NoActions { state: usize },
    #[error("state {state} action {action}: transition has {got} entries, expected {expected}")]
    TransitionLength { state: usize, action: usize, expected: usize, got: usize },
    #[error("state {state} action {action}: probability {value} for target {target} is not in [0, 1]")]
    BadProbability { state: usize, action: usize, target: usize, value: f64 },
    #[error("state {state} action {action}: transition sums to {sum}, not 1")]
    NotStochastic { state: usize, action: usize, sum: f64 },
    #[error("state {state} action {action}: payoff is not finite")]
    NonFinitePayoff { state: usize, action: usize },
}

impl GameSpec {
    pub fn validate(&self) -> Result<(), GameError> {
        let n = self.states.len();
        if n == 0 {
            return Err(GameError::NoStates);
        }
        for (s, st) in self.states.iter().enumerate() {
            if st.actions.is_empty() {
                return Err(GameError::NoActions { state: s });
            }
            for (a, act) in st.actions.iter().enumerate() {
                if !act.payoff.is_finite() {
                    return Err(GameError::NonFinitePayoff { state: s, action: a });
                }
                if act.transition.len() != n {
                    return Err(GameError::TransitionLength {
                        state: s,
                        action: a,
                        expected: n,
                        got: act.transition.len(),
                    });
                }
                for (t, &p) in act.transition.iter().enumerate() {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(GameError::BadProbability { state: s, action: a, target: t, value: p });
                    }
                }
                let sum: f64 = act.transition.iter().sum();
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(GameError::NotStochastic { state: s, action: a, sum });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TopicalError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Existence(#[from] ExistenceError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Shapley operator of a turn-based game together with its conjugate.
#[derive(Clone, Debug)]
pub struct TopicalMap {
    game: GameSpec,
    shift: f64,
    conjugate: SharedMap,
}

/// `T(x)_i = max/min over actions of r_a + Σ_j P_a(j) x_j`.
pub fn build_shapley(game: &GameSpec) -> Result<TopicalMap, TopicalError> {
    game.validate()?;
    let payoffs = game.states.iter().flat_map(|s| s.actions.iter().map(|a| a.payoff));
    let (lo, hi) = payoffs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p)));
    let shift = 0.5 * (lo + hi);
    let mut shifted = game.clone();
    for st in &mut shifted.states {
        for a in &mut st.actions {
            a.payoff -= shift;
        }
    }
    let conjugate: SharedMap = Arc::new(shapley_conjugate(&shifted)?);
    Ok(TopicalMap { game: game.clone(), shift, conjugate })
}

impl TopicalMap {
    pub fn dim(&self) -> usize {
        self.game.states.len()
    }

    pub fn game(&self) -> &GameSpec {
        &self.game
    }

    /// `exp ∘ (T − shift) ∘ log`.
    pub fn conjugate(&self) -> &SharedMap {
        &self.conjugate
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Evaluates `T` on `[-∞, ∞]^n`. Zero-probability targets are skipped,
    /// so `±∞` only propagates through positive weights. Mixing `+∞` and
    /// `-∞` in one argument is not meaningful and yields NaN.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.game
            .states
            .iter()
            .map(|st| {
                let vals = st.actions.iter().map(|a| {
                    a.payoff + a.transition.iter().zip(x).filter(|(p, _)| **p > 0.0).map(|(p, v)| p * v).sum::<f64>()
                });
                match st.player {
                    Player::Max => vals.fold(f64::NEG_INFINITY, f64::max),
                    Player::Min => vals.fold(f64::INFINITY, f64::min),
                }
            })
            .collect()
    }

    /// Heads of the additive hyperarc with the given tail: coordinates
    /// outside the tail sent to `∓∞` when the tail is.
    pub fn hyperarc_targets(&self, tail: SubsetMask, pole: Pole) -> SubsetMask {
        let pin = match pole {
            Pole::Zero => f64::NEG_INFINITY,
            Pole::Inf => f64::INFINITY,
        };
        let x: Vec<f64> = (0..self.dim()).map(|i| if tail.contains(i) { pin } else { 0.0 }).collect();
        let y = self.eval(&x);
        let heads: Vec<usize> = (0..self.dim()).filter(|&j| !tail.contains(j) && y[j] == pin).collect();
        SubsetMask::from_indices(self.dim(), &heads).expect("indices in range")
    }

    /// `max_i T(x)_i − x_i`.
    pub fn max_gap(&self, x: &[f64]) -> f64 {
        self.eval(x).iter().zip(x).map(|(t, v)| t - v).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `min_i T(x)_i − x_i`.
    pub fn min_gap(&self, x: &[f64]) -> f64 {
        self.eval(x).iter().zip(x).map(|(t, v)| t - v).fold(f64::INFINITY, f64::min)
    }
}

/// `max_i x_i − min_i x_i`.
pub fn variation_norm(x: &[f64]) -> f64 {
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Additive Collatz–Wielandt brackets `(r_lo, r_hi, λ_lo, λ_hi)`.
pub fn additive_cw(t: &TopicalMap, cfg: &SolverConfig) -> Result<[f64; 4], TopicalError> {
    let r = cw_upper(t.conjugate(), cfg)?;
    let l = cw_lower(t.conjugate(), cfg)?;
    Ok([r.lower, r.upper, l.lower, l.upper].map(|v| v.ln() + t.shift))
}

/// Classification of the conjugate reported in additive units.
#[derive(Clone, Debug)]
pub struct AdditiveVerdict {
    pub verdict: Verdict,
    pub shift: f64,
    /// `λ` with `T(x) = x + λ·1`.
    pub eigenvalue: Option<f64>,
    /// Additive eigenvector, normalised to maximum 0.
    pub eigenvector: Option<Vec<f64>>,
    /// `max_i (T(x) − x)_i − min_i (T(x) − x)_i` at the eigenvector.
    pub residual: Option<f64>,
}

impl AdditiveVerdict {
    pub fn document(&self) -> serde_json::Value {
        let mut doc = verdict_document(&self.verdict, NumberScale::Additive { offset: self.shift });
        doc["additive_residual"] = self.residual.map_or(serde_json::Value::Null, serde_json::Value::from);
        doc
    }
}

/// Existence of `x` with `T(x) = x + λ·1`, decided on the conjugate.
pub fn check_additive_eigenvector(t: &TopicalMap, cfg: &ClassifyConfig) -> Result<AdditiveVerdict, TopicalError> {
    let verdict = classify(t.conjugate(), cfg)?;
    let (eigenvalue, eigenvector, residual) = match &verdict.eigen {
        Some(e) => {
            let x: Vec<f64> = e.vector.to_f64().iter().map(|v| v.ln()).collect();
            let residual = t.max_gap(&x) - t.min_gap(&x);
            (Some(e.eigenvalue.ln() + t.shift), Some(x), Some(residual))
        }
        None => (None, None, None),
    };
    Ok(AdditiveVerdict { verdict, shift: t.shift, eigenvalue, eigenvector, residual })
}

/// `T^k(0)_state / k`.
pub fn mean_payoff(t: &TopicalMap, state: usize, k: usize) -> f64 {
    mean_payoffs(t, k)[state]
}

/// `T^k(0) / k` for every state.
pub fn mean_payoffs(t: &TopicalMap, k: usize) -> Vec<f64> {
    assert!(k >= 1, "horizon must be positive");
    let mut x = vec![0.0; t.dim()];
    for _ in 0..k {
        x = t.eval(&x);
    }
    x.iter().map(|v| v / k as f64).collect()
}
