use super::{check_image, extreme_ratios, max_ratio, min_ratio, normalized, CWBracket, SpectralError};
use crate::cone::{face_map, ExtVec, Pole, SharedMap, Staged};
use crate::graphs::lower_collapse_set;

/// Iterations at which the scaling constant is refreshed.
pub(crate) fn rescale_at(k: usize) -> bool {
    k >= 8 && k.is_power_of_two()
}

/// Resumable bracket computation for `r(f)`.
pub(crate) struct UpperRun {
    map: SharedMap,
    /// Coordinates that survive iteration, and the face map on them.
    support: Vec<usize>,
    active: Option<Active>,
}

struct Active {
    g: SharedMap,
    x: Vec<f64>,
    s: f64,
    upper: f64,
    upper_x: Vec<f64>,
    lower: f64,
    lower_w: Vec<f64>,
    iterations: usize,
    /// Set when an iterate underflowed; the bracket is frozen from then on.
    stalled: bool,
}

impl UpperRun {
    pub(crate) fn new(map: SharedMap, x0: Option<&[f64]>) -> Result<Self, SpectralError> {
        let gone = lower_collapse_set(map.as_ref());
        let support: Vec<usize> = (0..map.dim()).filter(|&i| !gone[i]).collect();
        if support.is_empty() {
            return Ok(UpperRun { map, support, active: None });
        }
        let g = face_map(&map, &support, Pole::Zero)?;
        let x = normalized(match x0 {
            Some(v) => support.iter().map(|&i| v[i]).collect(),
            None => vec![1.0; support.len()],
        });
        let y = g.eval_interior(&x);
        check_image(&y).map_err(|_| SpectralError::SupportCollapse { support: support.clone() })?;
        let (hi, lo) = extreme_ratios(&y, &x);
        let active = Active {
            g,
            s: hi,
            upper: hi,
            upper_x: x.clone(),
            lower: lo,
            lower_w: x.clone(),
            x,
            iterations: 0,
            stalled: false,
        };
        Ok(UpperRun { map, support, active: Some(active) })
    }

    pub(crate) fn converged(&self, tol: f64) -> bool {
        match &self.active {
            None => true,
            Some(a) => a.stalled || a.upper - a.lower <= tol * a.upper,
        }
    }

    /// Runs up to `steps` more iterations, stopping early on convergence.
    pub(crate) fn advance(&mut self, steps: usize, tol: f64) -> Result<(), SpectralError> {
        if self.converged(tol) {
            return Ok(());
        }
        let a = self.active.as_mut().expect("active run");
        if a.stalled {
            return Ok(());
        }
        for _ in 0..steps {
            let y = a.g.eval_interior(&a.x);
            if check_image(&y).is_err() {
                a.stalled = true;
                break;
            }
            let (hi, lo) = extreme_ratios(&y, &a.x);
            if hi < a.upper {
                a.upper = hi;
                a.upper_x.clone_from(&a.x);
            }
            if lo > a.lower {
                a.lower = lo;
                a.lower_w.clone_from(&a.x);
            }
            a.iterations += 1;
            if a.iterations.is_power_of_two() {
                a.face_scan();
            }
            if a.upper - a.lower <= tol * a.upper {
                return Ok(());
            }
            if rescale_at(a.iterations) {
                a.s = a.upper;
            }
            let s = a.s;
            a.x = normalized(y.iter().zip(&a.x).map(|(p, q)| p / s + q).collect());
        }
        a.face_scan();
        Ok(())
    }

    /// Bracket in the coordinates of the original map, with both ends
    /// recomputed at their witnesses.
    pub(crate) fn bracket(&self, tol: f64) -> CWBracket {
        let n = self.map.dim();
        let Some(a) = &self.active else {
            let zero = ExtVec::from_f64(&vec![0.0; n]).expect("zero vector");
            return CWBracket {
                lower: 0.0,
                upper: 0.0,
                witness_lower: zero.clone(),
                witness_upper: zero,
                iterations: 0,
                converged: true,
            };
        };
        let embed = |v: &[f64]| {
            let mut full = vec![0.0; n];
            for (k, &i) in self.support.iter().enumerate() {
                full[i] = v[k];
            }
            ExtVec::from_f64(&full).expect("nonnegative witness")
        };
        let witness_upper = embed(&a.upper_x);
        let witness_lower = embed(&a.lower_w);
        let upper = max_ratio(self.map.as_ref(), &witness_upper);
        let lower = min_ratio(self.map.as_ref(), &witness_lower);
        CWBracket {
            lower,
            upper,
            witness_lower,
            witness_upper,
            iterations: a.iterations,
            converged: upper - lower <= tol * upper,
        }
    }
}

impl Active {
    /// Min-ratios on faces spanned by the largest entries of the iterate.
    /// If `g(y)_i >= α y_i` on the support of `y` then `r(g) >= α`.
    fn face_scan(&mut self) {
        let m = self.x.len();
        if m < 2 {
            return;
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| self.x[j].total_cmp(&self.x[i]));
        let sizes: Vec<usize> = if m <= 64 {
            (1..m).collect()
        } else {
            let mut v: Vec<usize> =
                std::iter::successors(Some(1usize), |s| Some(s * 2)).take_while(|&s| s < m).collect();
            v.push(m - 1);
            v
        };
        for s in sizes {
            let top = &order[..s];
            let mut y = vec![Staged::Zero(0); m];
            for &i in top {
                y[i] = Staged::Finite(self.x[i]);
            }
            let out = self.g.eval_staged_subset(&y, top);
            let alpha = top.iter().zip(&out).map(|(&i, v)| v.to_f64() / self.x[i]).fold(f64::INFINITY, f64::min);
            if alpha > self.lower {
                self.lower = alpha;
                self.lower_w = y.iter().map(|v| v.to_f64()).collect();
            }
        }
    }
}
