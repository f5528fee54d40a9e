//! Eigenvectors of order-preserving homogeneous maps on the positive orthant.
//!
//! The crate decides whether such a map has an entrywise positive
//! eigenvector, whether the set of them is bounded in Hilbert's projective
//! metric, and whether it is unique up to scaling. Every decision is backed
//! by Collatz–Wielandt brackets with stored witnesses or by a reachability
//! argument in the boundary hypergraphs.
//!
//! * [`cone`]: extended vectors, subset masks, restrictions and faces.
//! * [`maps`]: expression trees for power-mean maps, tensors and games.
//! * [`graphs`]: the hypergraphs `H⁻₀`, `H⁺∞`, the digraph `G(f)` and SCCs.
//! * [`spectral`]: brackets for `r` and `λ`, displacement, the solver.
//! * [`existence`]: the classifier.
//! * [`topical`]: additive maps and Shapley operators.
//! * [`dsl`]: `.conemap` and `.game.json` formats.
//! * [`catalog`]: worked examples.

pub mod catalog;
pub mod cone;
pub mod dsl;
pub mod existence;
pub mod graphs;
pub mod maps;
pub mod spectral;
pub mod topical;
