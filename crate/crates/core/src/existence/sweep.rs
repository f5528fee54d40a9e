use rayon::prelude::*;
use std::collections::HashMap;

use super::{classify, ClassifyConfig, ExistenceError, Route, SubsetCertificate, Verdict, VerdictKind, Work};
use crate::cone::{face_map, project, reciprocal_conjugate, ConeMap, ExtVec, Pole, SharedMap, Staged, SubsetMask};
use crate::graphs::HypergraphProbe;
use crate::spectral::{dual_bracket, max_ratio, min_ratio, CWBracket, SolverConfig, UpperRun};

/// Strictness margin used for every numeric comparison.
pub fn margin(tol: f64, v: f64) -> f64 {
    tol * v.abs().max(1.0)
}

pub(crate) struct Sweep<'a> {
    f: &'a SharedMap,
    n: usize,
    cfg: &'a ClassifyConfig,
    lower: HypergraphProbe,
    upper: HypergraphProbe,
}

impl<'a> Sweep<'a> {
    pub(crate) fn new(f: &'a SharedMap, cfg: &'a ClassifyConfig) -> Result<Self, ExistenceError> {
        Ok(Sweep {
            f,
            n: f.dim(),
            cfg,
            lower: HypergraphProbe::new(f.clone(), Pole::Zero)?,
            upper: HypergraphProbe::new(f.clone(), Pole::Inf)?,
        })
    }

    fn reach_route(&self, j: SubsetMask) -> Option<Route> {
        if self.upper.reach(j).is_full() {
            Some(Route::ReachUpper)
        } else if self.lower.reach(j.complement()).is_full() {
            Some(Route::ReachLower)
        } else {
            None
        }
    }

    pub(crate) fn check(
        &self,
        j: SubsetMask,
        known: &HashMap<SubsetMask, SubsetCertificate>,
    ) -> Result<SubsetCertificate, ExistenceError> {
        if let Some(route) = self.reach_route(j) {
            return Ok(SubsetCertificate {
                mask: j,
                route,
                r_bracket: None,
                lambda_bracket: None,
                witness: None,
                heuristic: self.heuristic(),
            });
        }
        self.numeric(j, known)
    }

    fn heuristic(&self) -> bool {
        !self.f.is_exact()
    }

    /// Brackets `r(f^J_0)` and `λ(f^{Jᶜ}_∞)` until they separate, both
    /// converge, or the budget runs out.
    fn numeric(
        &self,
        j: SubsetMask,
        known: &HashMap<SubsetMask, SubsetCertificate>,
    ) -> Result<SubsetCertificate, ExistenceError> {
        let SolverConfig { tol, budget } = self.cfg.solver;
        let inside = j.indices();
        let outside = j.complement().indices();
        let r_face = face_map(self.f, &inside, Pole::Zero)?;
        let l_face = face_map(self.f, &outside, Pole::Inf)?;
        let mut r_run = UpperRun::new(r_face.clone(), None)?;
        let mut l_run = UpperRun::new(reciprocal_conjugate(&l_face), None)?;
        let mut chunk = 16;
        let mut spent = 0;
        loop {
            let step = chunk.min(budget - spent);
            r_run.advance(step, tol)?;
            l_run.advance(step, tol)?;
            spent += step;
            let mut rb = embed(&r_run.bracket(tol), &inside, self.n, Pole::Zero);
            let mut lb = embed(&dual_bracket(l_face.as_ref(), &l_run.bracket(tol)), &outside, self.n, Pole::Inf);
            self.tighten(j, &mut rb, &mut lb, known);
            let route = if rb.upper + margin(tol, rb.upper) < lb.lower {
                Some(Route::NumericStrict)
            } else if lb.upper + margin(tol, lb.upper) < rb.lower {
                Some(Route::NumericReverse)
            } else if (r_run.converged(tol) && l_run.converged(tol)) || spent >= budget {
                Some(Route::Boundary)
            } else {
                None
            };
            if let Some(route) = route {
                let witness =
                    if route == Route::NumericStrict { combined_witness(self.f.as_ref(), j, &rb, &lb) } else { None };
                return Ok(SubsetCertificate {
                    mask: j,
                    route,
                    r_bracket: Some(rb),
                    lambda_bracket: Some(lb),
                    witness,
                    heuristic: self.heuristic(),
                });
            }
            chunk *= 2;
        }
    }

    /// Monotonicity in `J`: for `A ⊆ J`, `r(f^A_0) <= r(f^J_0)`
    /// and `λ(f^{Aᶜ}_∞) <= λ(f^{Jᶜ}_∞)`. Witnesses of immediate subsets
    /// are reused (the λ witness after pushing `J ∖ A` to infinity).
    fn tighten(
        &self,
        j: SubsetMask,
        rb: &mut CWBracket,
        lb: &mut CWBracket,
        known: &HashMap<SubsetMask, SubsetCertificate>,
    ) {
        for i in j.indices() {
            let Some(cert) = known.get(&j.without(i)) else { continue };
            if let Some(a) = &cert.r_bracket {
                if a.lower > rb.lower {
                    rb.lower = a.lower;
                    rb.witness_lower = a.witness_lower.clone();
                }
            }
            if let Some(a) = &cert.lambda_bracket {
                if a.lower > lb.lower && a.lower.is_finite() {
                    let w = project(&a.witness_lower, j.complement(), Pole::Inf).expect("upper-side witness");
                    let v = min_ratio(self.f.as_ref(), &w);
                    if v > lb.lower {
                        lb.lower = v;
                        lb.witness_lower = w;
                    }
                }
            }
        }
    }

    pub(crate) fn run(&self) -> Result<Verdict, ExistenceError> {
        let all = SubsetMask::proper_subsets_by_size(self.n);
        let mut done: HashMap<SubsetMask, SubsetCertificate> = HashMap::new();
        let mut work = Work::default();
        let mut reverse = false;
        let max_level = self.n - 1;
        for level in 1..=max_level {
            let todo: Vec<SubsetMask> =
                all.iter().copied().filter(|m| m.count() == level && !done.contains_key(m)).collect();
            let certs: Vec<Result<SubsetCertificate, ExistenceError>> =
                todo.par_iter().map(|&m| self.check(m, &done)).collect();
            let mut fresh = Vec::with_capacity(certs.len());
            for c in certs {
                let c = c?;
                if c.r_bracket.is_some() {
                    work.numeric_subsets += 1;
                    work.iterations += c.r_bracket.as_ref().map_or(0, |b| b.iterations)
                        + c.lambda_bracket.as_ref().map_or(0, |b| b.iterations);
                } else {
                    work.reach_subsets += 1;
                }
                reverse |= c.route == Route::NumericReverse;
                fresh.push(c.mask);
                done.insert(c.mask, c);
            }
            if reverse {
                break;
            }
            if self.cfg.prune {
                self.prune_up(&fresh, &mut done, &mut work)?;
            }
        }
        let mut certificates: Vec<SubsetCertificate> = done.into_values().collect();
        certificates.sort_by_key(|c| (c.mask.count(), c.mask.bits()));
        let kind = if reverse {
            VerdictKind::NoInteriorEigenvector
        } else if certificates.iter().all(|c| c.route.passes()) && certificates.len() == all.len() {
            VerdictKind::NonemptyBounded
        } else {
            VerdictKind::Indeterminate
        };
        let heuristic = self.heuristic();
        Ok(Verdict::from_sweep(kind, certificates, work, heuristic))
    }

    /// When `J` passes and the face map `f^{Jᶜ}_∞` itself has a nonempty
    /// bounded eigenspace, every `I ⊇ J` with `I ≠ [n]` passes too.
    fn prune_up(
        &self,
        fresh: &[SubsetMask],
        done: &mut HashMap<SubsetMask, SubsetCertificate>,
        work: &mut Work,
    ) -> Result<(), ExistenceError> {
        for &j in fresh {
            if !done[&j].route.passes() || matches!(done[&j].route, Route::Pruned { .. }) {
                continue;
            }
            let pending: Vec<SubsetMask> = SubsetMask::proper_subsets_by_size(self.n)
                .into_iter()
                .filter(|&i| i != j && j.is_subset_of(i) && !done.contains_key(&i) && self.reach_route(i).is_none())
                .collect();
            if pending.is_empty() {
                continue;
            }
            let face = face_map(self.f, &j.complement().indices(), Pole::Inf)?;
            if !self.face_nonempty_bounded(&face)? {
                continue;
            }
            work.recursive_faces += 1;
            for i in pending {
                done.insert(
                    i,
                    SubsetCertificate {
                        mask: i,
                        route: Route::Pruned { by: j },
                        r_bracket: None,
                        lambda_bracket: None,
                        witness: None,
                        heuristic: self.heuristic(),
                    },
                );
            }
        }
        Ok(())
    }

    fn face_nonempty_bounded(&self, face: &SharedMap) -> Result<bool, ExistenceError> {
        let ones = vec![Staged::ONE; face.dim()];
        if !face.eval_staged(&ones).iter().all(|v| matches!(v, Staged::Finite(_))) {
            return Ok(false);
        }
        let nested = ClassifyConfig { solve: false, ..self.cfg.clone() };
        Ok(classify(face, &nested)?.kind == VerdictKind::NonemptyBounded)
    }
}

pub(crate) fn embed(b: &CWBracket, idx: &[usize], n: usize, fill: Pole) -> CWBracket {
    let lift = |w: &ExtVec| {
        let pad = match fill {
            Pole::Zero => 0.0,
            Pole::Inf => f64::INFINITY,
        };
        let mut full = vec![pad; n];
        for (k, &i) in idx.iter().enumerate() {
            full[i] = w.get(k).to_f64();
        }
        ExtVec::from_f64(&full).expect("witness stays on one side")
    };
    CWBracket { witness_lower: lift(&b.witness_lower), witness_upper: lift(&b.witness_upper), ..b.clone() }
}

/// A point `x` of the open cone with `max_{J} f(x)/x < min_{Jᶜ} f(x)/x`,
/// built as `v + t w` from the two bracket witnesses.
fn combined_witness(f: &dyn ConeMap, j: SubsetMask, rb: &CWBracket, lb: &CWBracket) -> Option<ExtVec> {
    let v = rb.witness_upper.to_f64();
    let w = lb.witness_lower.to_f64();
    let v_min = v.iter().copied().filter(|&a| a > 0.0).fold(f64::INFINITY, f64::min);
    let w_max = w.iter().copied().filter(|a| a.is_finite()).fold(0.0, f64::max);
    let w_min = w.iter().copied().filter(|a| a.is_finite()).fold(f64::INFINITY, f64::min);
    for k in 1..=6 {
        let t = 10f64.powi(-2 * k);
        let x: Vec<f64> = (0..v.len())
            .map(|i| {
                if j.contains(i) {
                    if v[i] > 0.0 {
                        v[i]
                    } else {
                        t * t * v_min
                    }
                } else if w[i].is_finite() {
                    t * w[i] / w_max
                } else {
                    t.sqrt() * w_min / w_max
                }
            })
            .collect();
        let y = f.eval_interior(&x);
        let hi = j.indices().iter().map(|&i| y[i] / x[i]).fold(0.0, f64::max);
        let lo = j.complement().indices().iter().map(|&i| y[i] / x[i]).fold(f64::INFINITY, f64::min);
        if hi < lo {
            return ExtVec::interior(&x).ok();
        }
    }
    None
}

/// Re-derives a certificate from its stored witnesses.
pub fn replay_certificate(f: &dyn ConeMap, cert: &SubsetCertificate, tol: f64) -> bool {
    let close = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    let (Some(rb), Some(lb)) = (&cert.r_bracket, &cert.lambda_bracket) else {
        return !matches!(cert.route, Route::NumericStrict | Route::NumericReverse | Route::Boundary);
    };
    match cert.route {
        Route::NumericStrict => {
            let hi = max_ratio(f, &rb.witness_upper);
            let lo = min_ratio(f, &lb.witness_lower);
            let witness_ok = cert.witness.as_ref().is_none_or(|x| {
                let y = f.eval_interior(&x.to_f64());
                let xs = x.to_f64();
                let hi = cert.mask.indices().iter().map(|&i| y[i] / xs[i]).fold(0.0, f64::max);
                let lo = cert.mask.complement().indices().iter().map(|&i| y[i] / xs[i]).fold(f64::INFINITY, f64::min);
                hi < lo
            });
            close(hi, rb.upper) && close(lo, lb.lower) && hi + margin(tol, hi) < lo && witness_ok
        }
        Route::NumericReverse => {
            let lo = min_ratio(f, &rb.witness_lower);
            let hi = max_ratio(f, &lb.witness_upper);
            close(lo, rb.lower) && close(hi, lb.upper) && hi + margin(tol, hi) < lo
        }
        _ => true,
    }
}
