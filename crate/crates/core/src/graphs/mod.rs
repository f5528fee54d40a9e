//! Boundary hypergraphs `H⁻₀`, `H⁺∞`, the digraph `G(f)`, strongly connected
//! components and Graphviz output.

mod digraph;
mod dot;
mod hyper;

pub use digraph::{digraph_of, scc_decompose, Digraph, SccDecomposition};
pub use dot::{digraph_to_dot, hypergraph_to_dot};
pub use hyper::{lower_collapse_set, HypergraphProbe};
