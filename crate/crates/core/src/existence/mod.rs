//! Existence, boundedness and uniqueness of interior eigenvectors.
//!
//! [`classify`] tries cheap structural arguments first (dimension one, a
//! strongly connected `G(f)`, a dominant final class, the convex theory)
//! and otherwise sweeps every nonempty proper `J ⊂ [n]`, comparing
//! `r(f^J_0)` with `λ(f^{Jᶜ}_∞)`. Each subset gets a certificate that can
//! be replayed from its stored witnesses.

mod convex;
mod infer;
mod report;
mod sweep;

pub use convex::{classify_convex, BasicStatus, ComponentReport, ConvexReport, EigenspaceStatus};
pub use infer::infer_uniqueness_and_convergence;
pub use report::{verdict_document, NumberScale};
pub use sweep::{margin, replay_certificate};

use serde::Serialize;
use thiserror::Error;

use crate::cone::{face_map, CoreError, ExtVec, Pole, SharedMap, SubsetMask, MAX_MASK_DIM};
use crate::graphs::{digraph_of, scc_decompose};
use crate::spectral::{cw_upper, solve_eigenvector, CWBracket, EigenResult, SolverConfig, SpectralError};

#[derive(Debug, Error)]
pub enum ExistenceError {
    #[error("subset sweep needs n <= {cap}, got n = {n}")]
    DimensionTooLarge { n: usize, cap: usize },
    #[error("map is not flagged multiplicatively convex")]
    FlagMissing,
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// How a subset was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// `reach(J, H⁺∞(f)) = [n]`, so `λ(f^{Jᶜ}_∞) = ∞`.
    ReachUpper,
    /// `reach(Jᶜ, H⁻₀(f)) = [n]`, so `r(f^J_0) = 0`.
    ReachLower,
    NumericStrict,
    NumericReverse,
    /// Implied by the certificate of a smaller subset.
    Pruned {
        by: SubsetMask,
    },
    /// Brackets still overlap.
    Boundary,
}

impl Route {
    pub fn passes(&self) -> bool {
        matches!(self, Route::ReachUpper | Route::ReachLower | Route::NumericStrict | Route::Pruned { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Route::ReachUpper => "ReachUpper",
            Route::ReachLower => "ReachLower",
            Route::NumericStrict => "NumericStrict",
            Route::NumericReverse => "NumericReverse",
            Route::Pruned { .. } => "Pruned",
            Route::Boundary => "Boundary",
        }
    }
}

/// Outcome for one subset `J`. Brackets live in the coordinates of `f`:
/// the `r` witnesses vanish off `J`, the `λ` witnesses are infinite on `J`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetCertificate {
    pub mask: SubsetMask,
    pub route: Route,
    pub r_bracket: Option<CWBracket>,
    pub lambda_bracket: Option<CWBracket>,
    /// Interior point with `max_J f(x)/x < min_{Jᶜ} f(x)/x`, when found.
    pub witness: Option<ExtVec>,
    /// Boundary values were estimated by probing rather than computed.
    pub heuristic: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    NonemptyBounded,
    NoInteriorEigenvector,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Uniqueness {
    Unique,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Convergence {
    IteratesConverge,
    Unknown,
}

/// Structural shortcut that settled the verdict without a full sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum FastPath {
    OneDimensional,
    StronglyConnected,
    /// `r(f^{Cᶜ}_0) < r(f)` for the unique final class `C` of `G(f)`.
    UniqueFinalClass {
        class: Vec<usize>,
        rest: CWBracket,
        whole: CWBracket,
    },
    Convex(ConvexReport),
}

/// Deterministic work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Work {
    pub reach_subsets: usize,
    pub numeric_subsets: usize,
    pub iterations: usize,
    pub recursive_faces: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Sorted by `(|J|, mask)`.
    pub certificates: Vec<SubsetCertificate>,
    pub fast_path: Option<FastPath>,
    pub eigen: Option<EigenResult>,
    /// Set when the solver was run and failed.
    pub eigen_error: Option<String>,
    pub uniqueness: Uniqueness,
    pub convergence: Convergence,
    /// Which rules produced the uniqueness and convergence flags.
    pub basis: Vec<String>,
    pub heuristic: bool,
    pub work: Work,
}

impl Verdict {
    fn new(kind: VerdictKind) -> Self {
        Verdict {
            kind,
            certificates: Vec::new(),
            fast_path: None,
            eigen: None,
            eigen_error: None,
            uniqueness: Uniqueness::Unknown,
            convergence: Convergence::Unknown,
            basis: Vec::new(),
            heuristic: false,
            work: Work::default(),
        }
    }

    fn from_sweep(kind: VerdictKind, certificates: Vec<SubsetCertificate>, work: Work, heuristic: bool) -> Self {
        Verdict { certificates, work, heuristic, ..Verdict::new(kind) }
    }

    fn fast(kind: VerdictKind, path: FastPath) -> Self {
        Verdict { fast_path: Some(path), ..Verdict::new(kind) }
    }

    pub fn certificate(&self, mask: SubsetMask) -> Option<&SubsetCertificate> {
        self.certificates.iter().find(|c| c.mask == mask)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyConfig {
    pub solver: SolverConfig,
    pub prune: bool,
    pub fast_paths: bool,
    /// Largest dimension for the subset sweep.
    pub subset_cap: usize,
    /// Solve for an eigenvector after a positive verdict.
    pub solve: bool,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            solver: SolverConfig::default(),
            prune: true,
            fast_paths: true,
            subset_cap: MAX_MASK_DIM,
            solve: true,
        }
    }
}

/// Full classification of `f`.
pub fn classify(f: &SharedMap, cfg: &ClassifyConfig) -> Result<Verdict, ExistenceError> {
    let n = f.dim();
    let cap = cfg.subset_cap.min(MAX_MASK_DIM);
    let verdict = if n == 1 {
        Verdict::fast(VerdictKind::NonemptyBounded, FastPath::OneDimensional)
    } else if let Some(v) = if cfg.fast_paths { fast_path(f, cfg, n > cap)? } else { None } {
        v
    } else if n <= cap {
        sweep::Sweep::new(f, cfg)?.run()?
    } else {
        return Err(ExistenceError::DimensionTooLarge { n, cap });
    };
    Ok(finish(f, verdict, cfg))
}

/// Solves for the eigenvector and infers uniqueness after a positive verdict.
pub(crate) fn finish(f: &SharedMap, mut v: Verdict, cfg: &ClassifyConfig) -> Verdict {
    if v.kind != VerdictKind::NonemptyBounded || !cfg.solve {
        return v;
    }
    v.heuristic |= !f.is_exact();
    match solve_eigenvector(f.as_ref(), &ExtVec::ones(f.dim()), &cfg.solver) {
        Ok(e) => v.eigen = Some(e),
        Err(e) => v.eigen_error = Some(e.to_string()),
    }
    infer_uniqueness_and_convergence(f.as_ref(), v)
}

fn fast_path(f: &SharedMap, cfg: &ClassifyConfig, allow_negative: bool) -> Result<Option<Verdict>, ExistenceError> {
    let g = digraph_of(f.as_ref());
    let scc = scc_decompose(&g);
    if scc.components.len() == 1 {
        // Every nonempty J reaches [n] in H⁺∞(f).
        return Ok(Some(Verdict::fast(VerdictKind::NonemptyBounded, FastPath::StronglyConnected)));
    }
    if let Some(c) = scc.unique_final_class() {
        let class = scc.components[c].clone();
        let rest: Vec<usize> = (0..f.dim()).filter(|i| !class.contains(i)).collect();
        let rb = cw_upper(&face_map(f, &rest, Pole::Zero)?, &cfg.solver)?;
        let whole = cw_upper(f, &cfg.solver)?;
        if rb.upper + margin(cfg.solver.tol, rb.upper) < whole.lower {
            let rest = sweep::embed(&rb, &rest, f.dim(), Pole::Zero);
            let path = FastPath::UniqueFinalClass { class, rest, whole };
            return Ok(Some(Verdict::fast(VerdictKind::NonemptyBounded, path)));
        }
    }
    if f.flags().multiplicatively_convex {
        let v = convex::convex_verdict(f, &scc, cfg)?;
        if v.kind == VerdictKind::NonemptyBounded || (allow_negative && v.kind == VerdictKind::NoInteriorEigenvector) {
            return Ok(Some(v));
        }
    }
    Ok(None)
}
