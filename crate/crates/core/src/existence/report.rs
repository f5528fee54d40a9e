use serde_json::{json, Value};

use super::{ConvexReport, FastPath, Route, SubsetCertificate, Verdict};
use crate::cone::{ExtVec, SubsetMask};
use crate::spectral::{CWBracket, EigenResult};

/// Units for brackets, eigenvalues and vectors in a verdict document.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NumberScale {
    Multiplicative,
    /// Natural logarithms of the multiplicative values; `offset` is added
    /// to eigenvalues and bracket ends but not to vectors.
    Additive {
        offset: f64,
    },
}

impl NumberScale {
    fn name(self) -> &'static str {
        match self {
            NumberScale::Multiplicative => "multiplicative",
            NumberScale::Additive { .. } => "additive",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            NumberScale::Multiplicative => v,
            NumberScale::Additive { offset } => v.ln() + offset,
        }
    }

    fn apply_entry(self, v: f64) -> f64 {
        match self {
            NumberScale::Multiplicative => v,
            NumberScale::Additive { .. } => v.ln(),
        }
    }
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn mask(m: SubsetMask) -> Value {
    json!(m.one_based())
}

fn vector(x: &ExtVec, s: NumberScale) -> Value {
    Value::Array(x.to_f64().into_iter().map(|v| num(s.apply_entry(v))).collect())
}

fn bracket(b: &CWBracket, s: NumberScale) -> Value {
    json!({
        "lower": num(s.apply(b.lower)),
        "upper": num(s.apply(b.upper)),
        "witness_lower": vector(&b.witness_lower, s),
        "witness_upper": vector(&b.witness_upper, s),
        "iterations": b.iterations,
        "converged": b.converged,
    })
}

fn eigen(e: &EigenResult, s: NumberScale) -> Value {
    json!({
        "eigenvalue": num(s.apply(e.eigenvalue)),
        "vector": vector(&e.vector, s),
        "residual": num(e.residual),
        "iterations": e.iterations,
    })
}

fn certificate(c: &SubsetCertificate, s: NumberScale) -> Value {
    let brackets = match (&c.r_bracket, &c.lambda_bracket) {
        (Some(r), Some(l)) => json!({ "r": bracket(r, s), "lambda": bracket(l, s) }),
        _ => Value::Null,
    };
    let pruned_by = match c.route {
        Route::Pruned { by } => mask(by),
        _ => Value::Null,
    };
    json!({
        "mask": mask(c.mask),
        "route": c.route.name(),
        "pruned_by": pruned_by,
        "brackets": brackets,
        "witness": c.witness.as_ref().map_or(Value::Null, |w| vector(w, s)),
        "heuristic": c.heuristic,
    })
}

fn convex(r: &ConvexReport, s: NumberScale) -> Value {
    let comps: Vec<Value> = r
        .components
        .iter()
        .map(|c| {
            json!({
                "nodes": c.nodes.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "is_final": c.is_final,
                "basic": c.basic,
                "bracket": bracket(&c.bracket, s),
            })
        })
        .collect();
    json!({
        "rule": "Convex",
        "strongly_nonnegative": r.strongly_nonnegative,
        "final_classes": r.final_classes,
        "eigenspace": r.eigenspace,
        "components": comps,
    })
}

fn fast_path(p: &FastPath, s: NumberScale) -> Value {
    match p {
        FastPath::OneDimensional => json!({ "rule": "OneDimensional" }),
        FastPath::StronglyConnected => json!({ "rule": "StronglyConnected" }),
        FastPath::UniqueFinalClass { class, rest, whole } => json!({
            "rule": "UniqueFinalClass",
            "class": class.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "rest": bracket(rest, s),
            "whole": bracket(whole, s),
        }),
        FastPath::Convex(r) => convex(r, s),
    }
}

/// Stable JSON rendering of a verdict. Masks are 1-based index lists and
/// infinite values are the strings `"inf"` and `"-inf"`.
pub fn verdict_document(v: &Verdict, scale: NumberScale) -> Value {
    json!({
        "format": 1,
        "scale": scale.name(),
        "kind": v.kind,
        "subsets": v.certificates.iter().map(|c| certificate(c, scale)).collect::<Vec<_>>(),
        "fast_path": v.fast_path.as_ref().map_or(Value::Null, |p| fast_path(p, scale)),
        "eigen": v.eigen.as_ref().map_or(Value::Null, |e| eigen(e, scale)),
        "eigen_error": v.eigen_error,
        "uniqueness": v.uniqueness,
        "convergence": v.convergence,
        "basis": v.basis,
        "heuristic": v.heuristic,
        "timing": v.work,
    })
}
