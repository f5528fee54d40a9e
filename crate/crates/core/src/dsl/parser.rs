use std::collections::BTreeMap;

use super::lexer::{tokenize, Spanned, Tok};
use super::{DslError, MapDocument, FORMAT_VERSION};
use crate::maps::{validate, MapExpr, WEIGHT_TOL};

/// Intermediate value during parsing. Products stay open until their
/// exponent sum can be checked.
#[derive(Clone, Debug)]
enum Val {
    Num(f64),
    Map(MapExpr),
    Prod { coeff: f64, factors: Vec<(MapExpr, f64)> },
    Tuple(Vec<Val>),
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    params: BTreeMap<String, f64>,
}

/// Parses a `.conemap` document.
pub fn parse_map_document(text: &str) -> Result<MapDocument, DslError> {
    let mut p = Parser { toks: tokenize(text)?, at: 0, params: BTreeMap::new() };
    p.document()
}

fn sem(pos: Pos, message: impl Into<String>) -> DslError {
    DslError::Semantic { line: pos.line, column: pos.col, message: message.into() }
}

/// `x3` or `x_3`, 1-based.
fn coord_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('x')?;
    let rest = rest.strip_prefix('_').unwrap_or(rest);
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

/// `f2` or `f_2`, 1-based.
fn output_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('f')?;
    let rest = rest.strip_prefix('_').unwrap_or(rest);
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

const FUNCTIONS: &[&str] =
    &["mean", "geo", "sum", "min", "max", "theta", "scale", "linear", "compose", "exp", "sqrt", "ln"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        let t = &self.toks[self.at];
        Pos { line: t.line, col: t.col }
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, DslError> {
        let t = &self.toks[self.at];
        Err(DslError::Parse {
            line: t.line,
            column: t.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), DslError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(&[what])
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), DslError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, pos))
            }
            _ => self.fail(&[what]),
        }
    }

    fn end_of_line(&mut self) -> Result<(), DslError> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.fail(&["end of line", "operator"]),
        }
    }

    fn header_value(&mut self, key: &str) -> Result<(usize, Pos), DslError> {
        let (name, pos) = self.ident(key)?;
        if name != key {
            return Err(DslError::Parse {
                line: pos.line,
                column: pos.col,
                expected: vec![format!("'{key}'")],
                found: format!("identifier '{name}'"),
            });
        }
        self.expect(Tok::Colon, "':'")?;
        let vpos = self.pos();
        let v = match self.peek() {
            Tok::Num(v) => *v,
            _ => return self.fail(&["integer"]),
        };
        self.bump();
        if v.fract() != 0.0 || v < 1.0 {
            return Err(sem(vpos, format!("{key} must be a positive integer")));
        }
        self.end_of_line()?;
        Ok((v as usize, vpos))
    }

    fn document(&mut self) -> Result<MapDocument, DslError> {
        let (format, fpos) = self.header_value("format")?;
        if format != FORMAT_VERSION {
            return Err(sem(fpos, format!("unsupported format {format}, expected {FORMAT_VERSION}")));
        }
        let (n, _) = self.header_value("dim")?;
        let mut params = Vec::new();
        let mut coords: Vec<Option<(MapExpr, Pos)>> = vec![None; n];
        while *self.peek() != Tok::Eof {
            let (name, pos) = self.ident("'param' or output name")?;
            if name == "param" {
                let (pname, ppos) = self.ident("parameter name")?;
                if coord_index(&pname).is_some()
                    || output_index(&pname).is_some()
                    || FUNCTIONS.contains(&pname.as_str())
                    || pname == "param"
                {
                    return Err(sem(ppos, format!("'{pname}' is reserved")));
                }
                if self.params.contains_key(&pname) {
                    return Err(sem(ppos, format!("parameter '{pname}' bound twice")));
                }
                self.expect(Tok::Eq, "'='")?;
                let vpos = self.pos();
                let v = self.expr(Some(n))?;
                let Val::Num(v) = v else { return Err(sem(vpos, "parameter value must be a number")) };
                if !(v.is_finite() && v > 0.0) {
                    return Err(sem(vpos, format!("parameter '{pname}' = {v} must be positive and finite")));
                }
                self.params.insert(pname.clone(), v);
                params.push((pname, v));
                self.end_of_line()?;
                continue;
            }
            let Some(k) = output_index(&name) else {
                return Err(DslError::Parse {
                    line: pos.line,
                    column: pos.col,
                    expected: vec!["'param'".into(), "'f<k>'".into()],
                    found: format!("identifier '{name}'"),
                });
            };
            if k == 0 || k > n {
                return Err(sem(pos, format!("output f{k} out of range for dim {n}")));
            }
            if coords[k - 1].is_some() {
                return Err(sem(pos, format!("output f{k} defined twice")));
            }
            self.expect(Tok::Eq, "'='")?;
            let epos = self.pos();
            let v = self.expr(Some(n))?;
            let e = to_map(v, epos)?;
            validate(&e, n).map_err(|err| sem(epos, err.to_string()))?;
            coords[k - 1] = Some((e, pos));
            self.end_of_line()?;
        }
        let mut out = Vec::with_capacity(n);
        for (k, c) in coords.into_iter().enumerate() {
            match c {
                Some((e, _)) => out.push(e),
                None => {
                    let p = self.pos();
                    return Err(sem(p, format!("output f{} is not defined", k + 1)));
                }
            }
        }
        Ok(MapDocument { n, params, coords: out })
    }

    /// `dim` is the number of coordinates visible here; `None` inside the
    /// outer expression of `compose`, which is checked afterwards.
    fn expr(&mut self, dim: Option<usize>) -> Result<Val, DslError> {
        let pos = self.pos();
        let mut terms = vec![(self.term(dim)?, pos)];
        let mut numeric_sign = vec![1.0];
        loop {
            let sign = match self.peek() {
                Tok::Plus => 1.0,
                Tok::Minus => -1.0,
                _ => break,
            };
            self.bump();
            let p = self.pos();
            terms.push((self.term(dim)?, p));
            numeric_sign.push(sign);
        }
        if terms.len() == 1 {
            return Ok(terms.pop().expect("one term").0);
        }
        if terms.iter().all(|(t, _)| matches!(t, Val::Num(_))) {
            let s =
                terms.iter().zip(&numeric_sign).map(|((t, _), s)| if let Val::Num(v) = t { s * v } else { 0.0 }).sum();
            return Ok(Val::Num(s));
        }
        let mut children = Vec::with_capacity(terms.len());
        for ((t, p), s) in terms.into_iter().zip(numeric_sign) {
            if s < 0.0 {
                return Err(sem(p, "subtraction of map expressions is not order-preserving"));
            }
            if matches!(t, Val::Num(_)) {
                return Err(sem(p, "adding a constant to a map breaks homogeneity"));
            }
            children.push(to_map(t, p)?);
        }
        Ok(Val::Map(MapExpr::Sum(children)))
    }

    fn term(&mut self, dim: Option<usize>) -> Result<Val, DslError> {
        let mut acc = self.power(dim)?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let p = self.pos();
                    let rhs = self.power(dim)?;
                    acc = mul(acc, rhs, p)?;
                }
                Tok::Slash => {
                    self.bump();
                    let p = self.pos();
                    let rhs = self.power(dim)?;
                    let Val::Num(d) = rhs else { return Err(sem(p, "only division by a number is allowed")) };
                    if d == 0.0 {
                        return Err(sem(p, "division by zero"));
                    }
                    acc = mul(acc, Val::Num(1.0 / d), p)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self, dim: Option<usize>) -> Result<Val, DslError> {
        let base_pos = self.pos();
        let base = self.unary(dim)?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let p = self.pos();
        let exp = self.power(dim)?;
        let Val::Num(e) = exp else { return Err(sem(p, "exponent must be a number")) };
        match base {
            Val::Num(b) => Ok(Val::Num(b.powf(e))),
            Val::Map(m) => Ok(Val::Prod { coeff: 1.0, factors: vec![(m, e)] }),
            Val::Prod { coeff, factors } => {
                Ok(Val::Prod { coeff: coeff.powf(e), factors: factors.into_iter().map(|(m, q)| (m, q * e)).collect() })
            }
            Val::Tuple(_) => Err(sem(base_pos, "a list cannot be raised to a power")),
        }
    }

    fn unary(&mut self, dim: Option<usize>) -> Result<Val, DslError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let p = self.pos();
            return match self.unary(dim)? {
                Val::Num(v) => Ok(Val::Num(-v)),
                _ => Err(sem(p, "negated map expressions are not order-preserving")),
            };
        }
        self.primary(dim)
    }

    fn primary(&mut self, dim: Option<usize>) -> Result<Val, DslError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Val::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let mut items = vec![self.expr(dim)?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    items.push(self.expr(dim)?);
                }
                self.expect(Tok::RParen, "')'")?;
                Ok(if items.len() == 1 { items.pop().expect("one item") } else { Val::Tuple(items) })
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    return self.call(&name, pos, dim);
                }
                if let Some(k) = coord_index(&name) {
                    if k == 0 || dim.is_some_and(|n| k > n) {
                        return Err(sem(
                            pos,
                            format!("coordinate x{k} out of range for dimension {}", dim.unwrap_or(0)),
                        ));
                    }
                    return Ok(Val::Map(MapExpr::Coord(k - 1)));
                }
                match self.params.get(&name) {
                    Some(v) => Ok(Val::Num(*v)),
                    None => Err(sem(pos, format!("unbound parameter '{name}'"))),
                }
            }
            _ => self.fail(&["number", "coordinate", "parameter", "function call", "'('"]),
        }
    }

    fn args(&mut self, dim: Option<usize>) -> Result<Vec<(Val, Pos)>, DslError> {
        self.expect(Tok::LParen, "'('")?;
        let mut out = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let p = self.pos();
                out.push((self.expr(dim)?, p));
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(out)
    }

    fn call(&mut self, name: &str, pos: Pos, dim: Option<usize>) -> Result<Val, DslError> {
        if name == "compose" {
            return self.compose(dim);
        }
        let args = self.args(dim)?;
        let arity = |k: usize| -> Result<(), DslError> {
            if args.len() != k {
                Err(sem(pos, format!("{name} takes {k} argument(s), got {}", args.len())))
            } else {
                Ok(())
            }
        };
        let maps = |args: Vec<(Val, Pos)>| -> Result<Vec<MapExpr>, DslError> {
            if args.is_empty() {
                return Err(sem(pos, format!("{name} needs at least one argument")));
            }
            args.into_iter().map(|(v, p)| to_map(v, p)).collect()
        };
        match name {
            "exp" | "sqrt" | "ln" => {
                arity(1)?;
                let (v, p) = args.into_iter().next().expect("one argument");
                let Val::Num(x) = v else { return Err(sem(p, format!("{name} takes a number"))) };
                Ok(Val::Num(match name {
                    "exp" => x.exp(),
                    "sqrt" => x.sqrt(),
                    _ => x.ln(),
                }))
            }
            "sum" => Ok(Val::Map(MapExpr::Sum(maps(args)?))),
            "min" => Ok(Val::Map(MapExpr::Min(maps(args)?))),
            "max" => Ok(Val::Map(MapExpr::Max(maps(args)?))),
            "geo" => {
                let children = maps(args)?;
                let k = children.len();
                Ok(Val::Map(MapExpr::PowerMean { r: 0.0, weights: vec![1.0 / k as f64; k], children }))
            }
            "theta" => {
                arity(2)?;
                let mut it = maps(args)?.into_iter();
                let a = it.next().expect("two arguments");
                let b = it.next().expect("two arguments");
                Ok(Val::Map(MapExpr::Theta(Box::new(a), Box::new(b))))
            }
            "scale" => {
                arity(2)?;
                let mut it = args.into_iter();
                let (c, cp) = it.next().expect("two arguments");
                let (e, ep) = it.next().expect("two arguments");
                let Val::Num(c) = c else { return Err(sem(cp, "scale factor must be a number")) };
                if !(c.is_finite() && c > 0.0) {
                    return Err(sem(cp, format!("scale factor {c} must be positive")));
                }
                Ok(Val::Map(MapExpr::Scale { c, child: Box::new(to_map(e, ep)?) }))
            }
            "linear" => {
                if let Some(n) = dim {
                    arity(n)?;
                }
                let mut w = Vec::new();
                for (j, (v, p)) in args.into_iter().enumerate() {
                    let Val::Num(a) = v else { return Err(sem(p, "linear weights must be numbers")) };
                    if !(a.is_finite() && a >= 0.0) {
                        return Err(sem(p, format!("linear weight {a} must be nonnegative")));
                    }
                    if a > 0.0 {
                        w.push((j, a));
                    }
                }
                if w.is_empty() {
                    return Err(sem(pos, "linear needs a positive weight"));
                }
                Ok(Val::Map(MapExpr::Linear(w)))
            }
            "mean" => {
                if args.len() < 3 {
                    return Err(sem(pos, "mean takes an exponent, a weight list and at least one expression"));
                }
                let mut it = args.into_iter();
                let (r, rp) = it.next().expect("exponent");
                let Val::Num(r) = r else { return Err(sem(rp, "mean exponent must be a number")) };
                let (w, wp) = it.next().expect("weights");
                let weights: Vec<f64> = match w {
                    Val::Num(v) => vec![v],
                    Val::Tuple(items) => items
                        .into_iter()
                        .map(|v| match v {
                            Val::Num(x) => Ok(x),
                            _ => Err(sem(wp, "weights must be numbers")),
                        })
                        .collect::<Result<_, _>>()?,
                    _ => return Err(sem(wp, "expected a weight list")),
                };
                let children: Vec<MapExpr> = it.map(|(v, p)| to_map(v, p)).collect::<Result<_, _>>()?;
                if weights.len() != children.len() {
                    return Err(sem(wp, format!("{} weights for {} expressions", weights.len(), children.len())));
                }
                let sum: f64 = weights.iter().sum();
                if weights.iter().any(|w| w.is_nan() || *w < 0.0) || (sum - 1.0).abs() > WEIGHT_TOL {
                    return Err(sem(wp, format!("weights must be a probability vector (sum = {sum})")));
                }
                Ok(Val::Map(MapExpr::PowerMean { r, weights, children }))
            }
            _ => Err(sem(pos, format!("unknown function '{name}'"))),
        }
    }

    fn compose(&mut self, dim: Option<usize>) -> Result<Val, DslError> {
        self.expect(Tok::LParen, "'('")?;
        let opos = self.pos();
        let outer = to_map(self.expr(None)?, opos)?;
        self.expect(Tok::Comma, "','")?;
        let ipos = self.pos();
        let inner: Vec<MapExpr> = match self.expr(dim)? {
            Val::Tuple(items) => items.into_iter().map(|v| to_map(v, ipos)).collect::<Result<_, _>>()?,
            v => vec![to_map(v, ipos)?],
        };
        self.expect(Tok::RParen, "')'")?;
        validate(&outer, inner.len()).map_err(|e| sem(opos, format!("outer expression of compose: {e}")))?;
        Ok(Val::Map(MapExpr::Compose { outer: Box::new(outer), inner }))
    }
}

fn mul(a: Val, b: Val, pos: Pos) -> Result<Val, DslError> {
    let open = |v: Val| -> Result<(f64, Vec<(MapExpr, f64)>), DslError> {
        match v {
            Val::Num(c) => Ok((c, Vec::new())),
            Val::Map(m) => Ok((1.0, vec![(m, 1.0)])),
            Val::Prod { coeff, factors } => Ok((coeff, factors)),
            Val::Tuple(_) => Err(sem(pos, "a list cannot be multiplied")),
        }
    };
    if let (Val::Num(x), Val::Num(y)) = (&a, &b) {
        return Ok(Val::Num(x * y));
    }
    let (ca, mut fa) = open(a)?;
    let (cb, fb) = open(b)?;
    fa.extend(fb);
    Ok(Val::Prod { coeff: ca * cb, factors: fa })
}

/// Closes a value into a map node, checking homogeneity of products.
fn to_map(v: Val, pos: Pos) -> Result<MapExpr, DslError> {
    match v {
        Val::Map(m) => Ok(m),
        Val::Num(_) => Err(sem(pos, "expected a map expression, found a number")),
        Val::Tuple(_) => Err(sem(pos, "expected a map expression, found a list")),
        Val::Prod { coeff, factors } => {
            if !(coeff.is_finite() && coeff > 0.0) {
                return Err(sem(pos, format!("coefficient {coeff} must be positive")));
            }
            let sum: f64 = factors.iter().map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > WEIGHT_TOL {
                return Err(sem(pos, format!("inhomogeneous product: exponents sum to {sum}, expected 1")));
            }
            if factors.iter().any(|(_, p)| p.is_nan() || *p < 0.0) {
                return Err(sem(pos, "negative exponents are not order-preserving"));
            }
            if factors.iter().all(|(m, _)| matches!(m, MapExpr::Coord(_))) {
                let mut exponents: Vec<(usize, f64)> = Vec::new();
                for (m, p) in factors {
                    let MapExpr::Coord(j) = m else { unreachable!() };
                    match exponents.iter_mut().find(|(i, _)| *i == j) {
                        Some(e) => e.1 += p,
                        None => exponents.push((j, p)),
                    }
                }
                return Ok(MapExpr::Monomial { coeff, exponents });
            }
            let inner = if factors.len() == 1 {
                factors.into_iter().next().expect("one factor").0
            } else {
                let (children, weights): (Vec<_>, Vec<_>) = factors.into_iter().unzip();
                MapExpr::PowerMean { r: 0.0, weights, children }
            };
            Ok(if coeff == 1.0 { inner } else { MapExpr::Scale { c: coeff, child: Box::new(inner) } })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(expr: &str, n: usize) -> Result<MapExpr, DslError> {
        let mut text = format!("format: 1\ndim: {n}\n");
        for k in 1..=n {
            if k == 1 {
                text.push_str(&format!("f1 = {expr}\n"));
            } else {
                text.push_str(&format!("f{k} = x{k}\n"));
            }
        }
        parse_map_document(&text).map(|d| d.coords[0].clone())
    }

    #[test]
    fn max_of_monomial_and_geometric_mean() {
        let e = one("max(1.0*x1, 0.5*x1^0.5*x2^0.5)", 2).unwrap();
        assert_eq!(
            e,
            MapExpr::Max(vec![
                MapExpr::Monomial { coeff: 1.0, exponents: vec![(0, 1.0)] },
                MapExpr::Monomial { coeff: 0.5, exponents: vec![(0, 0.5), (1, 0.5)] },
            ])
        );
    }

    #[test]
    fn tensor_entry_in_mean_form() {
        let text = "format: 1\ndim: 2\nparam a1 = 2\nparam a2 = 3\n\
                    f1 = mean(2, (a1/(a1+a2), a2/(a1+a2)), geo(x1,x2), x2) * (a1+a2)^0.5\nf2 = x1\n";
        let d = parse_map_document(text).unwrap();
        let x = [0.7, 1.9];
        let v = d.coords[0].eval_f64(&x);
        assert!((v - (2.0 * x[0] * x[1] + 3.0 * x[1] * x[1]).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn errors_are_positioned() {
        match one("x1 + x3", 2) {
            Err(DslError::Semantic { line: 3, column: 11, message }) => assert!(message.contains("x3"), "{message}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(one("x1^0.5 * x2^0.6", 2), Err(DslError::Semantic { .. })));
        assert!(matches!(one("mean(1, (0.5, 0.6), x1, x2)", 2), Err(DslError::Semantic { .. })));
        assert!(matches!(one("sum(x1, b)", 2), Err(DslError::Semantic { .. })));
        match one("sum(x1 x2)", 2) {
            Err(DslError::Parse { line: 3, column: 13, expected, .. }) => {
                assert!(expected.contains(&"')'".to_string()))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infix_and_products() {
        assert_eq!(one("x1 + x2", 2).unwrap(), MapExpr::Sum(vec![MapExpr::Coord(0), MapExpr::Coord(1)]));
        let e = one("2 * sum(x1, x2)^0.5 * x2^0.5", 2).unwrap();
        assert!(matches!(e, MapExpr::Scale { c, .. } if c == 2.0));
        assert!(matches!(one("x1 - x2", 2), Err(DslError::Semantic { .. })));
        assert!(matches!(one("x1 + 1", 2), Err(DslError::Semantic { .. })));
    }

    #[test]
    fn compose_checks_outer_dimension() {
        let e = one("compose(theta(x1, x2), (x1, sum(x1, x2)))", 2).unwrap();
        assert!(matches!(e, MapExpr::Compose { .. }));
        assert!(matches!(one("compose(x3, (x1, x2))", 2), Err(DslError::Semantic { .. })));
    }

    #[test]
    fn headers_required() {
        assert!(matches!(parse_map_document("dim: 1\nf1 = x1\n"), Err(DslError::Parse { line: 1, .. })));
        assert!(matches!(parse_map_document("format: 2\ndim: 1\nf1 = x1\n"), Err(DslError::Semantic { .. })));
        assert!(matches!(parse_map_document("format: 1\ndim: 2\nf1 = x1\n"), Err(DslError::Semantic { .. })));
    }
}
