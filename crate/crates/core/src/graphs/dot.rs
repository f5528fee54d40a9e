use std::fmt::Write;

use super::Digraph;
use crate::cone::SubsetMask;

/// Graphviz text for a digraph, vertices labelled 1-based.
pub fn digraph_to_dot(g: &Digraph, name: &str) -> String {
    let mut s = String::new();
    writeln!(s, "digraph {name} {{").unwrap();
    for i in 0..g.n() {
        writeln!(s, "  {} [label=\"{}\"];", i + 1, i + 1).unwrap();
    }
    for (i, j) in g.arcs() {
        writeln!(s, "  {} -> {};", i + 1, j + 1).unwrap();
    }
    s.push_str("}\n");
    s
}

/// Graphviz text for a directed hypergraph with singleton heads. A tail
/// with several vertices is drawn through a small fan-in node.
pub fn hypergraph_to_dot(n: usize, arcs: &[(SubsetMask, usize)], name: &str, comment: Option<&str>) -> String {
    let mut s = String::new();
    writeln!(s, "digraph {name} {{").unwrap();
    if let Some(c) = comment {
        writeln!(s, "  // {c}").unwrap();
    }
    for i in 0..n {
        writeln!(s, "  {} [label=\"{}\"];", i + 1, i + 1).unwrap();
    }
    for (k, (tail, head)) in arcs.iter().enumerate() {
        let members = tail.one_based();
        if members.len() == 1 {
            writeln!(s, "  {} -> {};", members[0], head + 1).unwrap();
        } else {
            let hub = format!("h{k}");
            writeln!(s, "  {hub} [shape=point, label=\"\"];").unwrap();
            for m in members {
                writeln!(s, "  {m} -> {hub} [arrowhead=none];").unwrap();
            }
            writeln!(s, "  {hub} -> {};", head + 1).unwrap();
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_in_node_for_large_tail() {
        let tail = SubsetMask::from_indices(3, &[0, 1]).unwrap();
        let dot = hypergraph_to_dot(3, &[(tail, 2)], "H", None);
        assert!(dot.contains("h0 -> 3;"));
        assert!(dot.contains("1 -> h0 [arrowhead=none];"));
    }

    #[test]
    fn digraph_arcs_rendered() {
        let g = Digraph::from_arcs(2, [(0, 1)]);
        assert!(digraph_to_dot(&g, "G").contains("1 -> 2;"));
    }
}
