//! Text formats: `.conemap` expression documents and `.game.json` games.
//!
//! A map document starts with `format: 1` and `dim: n`, may bind positive
//! parameters with `param name = value`, and defines each output with
//! `fK = expr`. Coordinates are `x1 .. xn`. Expressions combine
//!
//! * `mean(r, (w1, .., wk), e1, .., ek)` and `geo(e1, .., ek)`,
//! * `sum`, `min`, `max`, `theta(a, b)`, `scale(c, e)`,
//! * `linear(w1, .., wn)` and `compose(outer, (e1, .., ek))`,
//! * products `c * e1^p1 * .. * ek^pk` with `Σ p = 1`, and infix `+`.
//!
//! Numeric subexpressions may use `+ - * / ^`, parameters and
//! `exp`, `sqrt`, `ln`.

mod game;
mod lexer;
mod parser;
mod serialize;

pub use game::{parse_game, serialize_game};
pub use parser::parse_map_document;
pub use serialize::{serialize_document, serialize_expr};

use thiserror::Error;

use crate::maps::{ExprMap, MapError, MapExpr};

pub const FORMAT_VERSION: usize = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DslError {
    #[error("{line}:{column}: expected {}, found {found}", expected.join(" or "))]
    Parse { line: usize, column: usize, expected: Vec<String>, found: String },
    #[error("{line}:{column}: {message}")]
    Semantic { line: usize, column: usize, message: String },
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Parsed map file. Parameters are already substituted into `coords`.
#[derive(Clone, Debug, PartialEq)]
pub struct MapDocument {
    pub n: usize,
    pub params: Vec<(String, f64)>,
    pub coords: Vec<MapExpr>,
}

impl MapDocument {
    pub fn to_map(&self) -> Result<ExprMap, DslError> {
        Ok(ExprMap::new(self.coords.clone())?)
    }
}

/// Parses a map file straight into a map.
pub fn parse_map(text: &str) -> Result<ExprMap, DslError> {
    parse_map_document(text)?.to_map()
}
