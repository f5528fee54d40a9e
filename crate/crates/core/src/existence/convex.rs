use serde::{Serialize, Serializer};

use super::sweep::{embed, margin};
use super::{finish, ClassifyConfig, ExistenceError, FastPath, Verdict, VerdictKind};
use crate::cone::{face_map, Pole, SharedMap};
use crate::graphs::{digraph_of, scc_decompose, SccDecomposition};
use crate::spectral::{cw_upper, CWBracket};

/// Whether `r(f^C_0) = r(f)` for a strongly connected component `C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasicStatus {
    Basic,
    NotBasic,
    /// Not separated from the largest radius at the working tolerance.
    WithinTolerance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EigenspaceStatus {
    Bounded,
    /// Eigenvectors exist but are not bounded in Hilbert's metric.
    Unbounded,
    Empty,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentReport {
    #[serde(serialize_with = "one_based")]
    pub nodes: Vec<usize>,
    pub is_final: bool,
    pub basic: BasicStatus,
    /// `r(f^C_0)`, witnesses in the coordinates of `f`.
    pub bracket: CWBracket,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexReport {
    pub components: Vec<ComponentReport>,
    /// `None` when a final class is tied with the maximum only within tolerance.
    pub strongly_nonnegative: Option<bool>,
    pub final_classes: usize,
    pub eigenspace: EigenspaceStatus,
}

fn one_based<S: Serializer>(v: &[usize], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|i| i + 1))
}

/// Classification through the basic and final classes of `G(f)`, valid
/// for multiplicatively convex maps.
pub fn classify_convex(f: &SharedMap, cfg: &ClassifyConfig) -> Result<Verdict, ExistenceError> {
    if !f.flags().multiplicatively_convex {
        return Err(ExistenceError::FlagMissing);
    }
    let scc = scc_decompose(&digraph_of(f.as_ref()));
    let v = convex_verdict(f, &scc, cfg)?;
    Ok(finish(f, v, cfg))
}

pub(crate) fn convex_verdict(
    f: &SharedMap,
    scc: &SccDecomposition,
    cfg: &ClassifyConfig,
) -> Result<Verdict, ExistenceError> {
    let n = f.dim();
    let tol = cfg.solver.tol;
    let mut brackets = Vec::with_capacity(scc.components.len());
    for comp in &scc.components {
        let b = cw_upper(&face_map(f, comp, Pole::Zero)?, &cfg.solver)?;
        brackets.push(embed(&b, comp, n, Pole::Zero));
    }
    // r(f) is the largest component radius.
    let max_lower = brackets.iter().map(|b| b.lower).fold(0.0, f64::max);
    let max_upper = brackets.iter().map(|b| b.upper).fold(0.0, f64::max);
    let m = margin(tol, max_upper);
    let below: Vec<bool> = brackets.iter().map(|b| b.upper + m < max_lower).collect();
    let basic: Vec<BasicStatus> = (0..brackets.len())
        .map(|c| {
            if below[c] {
                BasicStatus::NotBasic
            } else if (0..brackets.len()).all(|d| d == c || below[d]) {
                BasicStatus::Basic
            } else {
                BasicStatus::WithinTolerance
            }
        })
        .collect();

    let finals = scc.final_classes();
    let final_not_basic = finals.iter().any(|&c| basic[c] == BasicStatus::NotBasic);
    let nonfinal_basic = (0..brackets.len()).any(|c| !scc.is_final[c] && basic[c] == BasicStatus::Basic);
    let nonfinal_clear = (0..brackets.len()).all(|c| scc.is_final[c] || basic[c] == BasicStatus::NotBasic);
    let strongly_nonnegative = if final_not_basic || nonfinal_basic {
        Some(false)
    } else if nonfinal_clear && finals.iter().all(|&c| basic[c] == BasicStatus::Basic) {
        Some(true)
    } else {
        None
    };

    let analytic = f.flags().analytic;
    let (kind, eigenspace) = match (strongly_nonnegative, finals.len()) {
        (Some(true), 1) => (VerdictKind::NonemptyBounded, EigenspaceStatus::Bounded),
        (Some(false), _) if analytic => (VerdictKind::NoInteriorEigenvector, EigenspaceStatus::Empty),
        // Several final classes tied within tolerance, all others strictly below.
        (None, k) if k > 1 && nonfinal_clear => (VerdictKind::Indeterminate, EigenspaceStatus::Unbounded),
        _ => (VerdictKind::Indeterminate, EigenspaceStatus::Unknown),
    };
    let components = scc
        .components
        .iter()
        .zip(brackets)
        .enumerate()
        .map(|(c, (nodes, bracket))| ComponentReport {
            nodes: nodes.clone(),
            is_final: scc.is_final[c],
            basic: basic[c],
            bracket,
        })
        .collect();
    let report = ConvexReport { components, strongly_nonnegative, final_classes: finals.len(), eigenspace };
    let mut v = Verdict::fast(kind, FastPath::Convex(report));
    v.heuristic = !f.is_exact();
    Ok(v)
}
