use std::fmt::Write;

use super::{MapDocument, FORMAT_VERSION};
use crate::maps::MapExpr;

/// Canonical text for a document. Every node is written in function form,
/// and floats use the shortest representation that reads back exactly.
pub fn serialize_document(doc: &MapDocument) -> String {
    let mut out = format!("format: {FORMAT_VERSION}\ndim: {}\n", doc.n);
    for (name, v) in &doc.params {
        let _ = writeln!(out, "param {name} = {v}");
    }
    for (k, e) in doc.coords.iter().enumerate() {
        let _ = writeln!(out, "f{} = {}", k + 1, serialize_expr(e, doc.n));
    }
    out
}

/// `dim` is the number of coordinates visible to `e`; it fixes the length
/// of dense `linear(..)` weight lists.
pub fn serialize_expr(e: &MapExpr, dim: usize) -> String {
    let list = |cs: &[MapExpr]| cs.iter().map(|c| serialize_expr(c, dim)).collect::<Vec<_>>().join(", ");
    match e {
        MapExpr::Coord(j) => format!("x{}", j + 1),
        MapExpr::PowerMean { r, weights, children } => {
            let w = weights.iter().map(|w| format!("{w}")).collect::<Vec<_>>().join(", ");
            let w = if weights.len() == 1 { w } else { format!("({w})") };
            format!("mean({r}, {w}, {})", list(children))
        }
        MapExpr::Sum(cs) => format!("sum({})", list(cs)),
        MapExpr::Min(cs) => format!("min({})", list(cs)),
        MapExpr::Max(cs) => format!("max({})", list(cs)),
        MapExpr::Scale { c, child } => format!("scale({c}, {})", serialize_expr(child, dim)),
        MapExpr::Compose { outer, inner } => {
            let k = inner.len();
            let inner = list(inner);
            let inner = if k == 1 { inner } else { format!("({inner})") };
            format!("compose({}, {inner})", serialize_expr(outer, k))
        }
        MapExpr::Linear(w) => {
            let mut dense = vec![0.0; dim.max(w.iter().map(|(j, _)| j + 1).max().unwrap_or(0))];
            for &(j, a) in w {
                dense[j] += a;
            }
            format!("linear({})", dense.iter().map(|a| format!("{a}")).collect::<Vec<_>>().join(", "))
        }
        MapExpr::Monomial { coeff, exponents } => {
            let mut s = format!("{coeff}");
            for (j, p) in exponents {
                let _ = write!(s, "*x{}^{p}", j + 1);
            }
            s
        }
        MapExpr::Theta(a, b) => format!("theta({}, {})", serialize_expr(a, dim), serialize_expr(b, dim)),
    }
}
