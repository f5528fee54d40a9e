use super::{Convergence, Uniqueness, Verdict, VerdictKind};
use crate::cone::ConeMap;
use crate::graphs::{scc_decompose, Digraph};
use crate::maps::{sparsity_probe, SparsityMethod};

/// Relative threshold for a nonzero derivative entry.
const SPARSITY_TOL: f64 = 1e-9;

/// Upgrades the uniqueness and convergence flags from `Unknown` when a
/// rule applies. Never downgrades.
pub fn infer_uniqueness_and_convergence(f: &dyn ConeMap, mut v: Verdict) -> Verdict {
    if v.kind != VerdictKind::NonemptyBounded {
        return v;
    }
    if f.flags().analytic && v.uniqueness == Uniqueness::Unknown {
        v.uniqueness = Uniqueness::Unique;
        v.basis.push("real analytic with nonempty bounded eigenspace".into());
    }
    let Some(e) = &v.eigen else { return v };
    let u = e.vector.to_f64();
    let pattern = sparsity_probe(f, &u, SPARSITY_TOL);
    if pattern.method == SparsityMethod::FiniteDifference && !pattern.differentiable {
        v.basis.push("derivative at the eigenvector not available".into());
        return v;
    }
    let scc = scc_decompose(&Digraph::from_arcs(f.dim(), pattern.arcs()));
    let Some(c) = scc.unique_final_class() else { return v };
    if v.uniqueness == Uniqueness::Unknown {
        v.uniqueness = Uniqueness::Unique;
        v.basis.push("derivative graph at the eigenvector has a unique final class".into());
    }
    if scc.is_primitive(c) && v.convergence == Convergence::Unknown {
        v.convergence = Convergence::IteratesConverge;
        v.basis.push("final class of the derivative graph is primitive".into());
    }
    v
}
