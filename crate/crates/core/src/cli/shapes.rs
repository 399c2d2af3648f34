//! Text syntax for shapes, set sequences, and probe lists.
//!
//! ```text
//! shape    := point(x, y, ...) | point((x, y))
//!           | points((x, y), (u, v), ...)
//!           | ball((cx, cy), r) | sphere((cx, cy), r)
//!           | box((lo...), (hi...)) | hyperplane((n...), b)
//! sequence := shape                      A_k = shape evaluated at k
//!           | cycle: S0 | S1 | ...       A_k = S_(k mod m)
//!           | squares: S_on | S_off      S_on at perfect squares k
//! ```
//!
//! Every number is a real expression in `k` with `+ - * / ^`, parentheses,
//! implicit multiplication (`2k`) and the functions `sqrt`, `abs`, `ln`,
//! `exp`. One-dimensional points may be written without parentheses.

use crate::error::{Error, Result};
use crate::metric_sets::{ClosedSet, MetricPoint, SetSequence};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, only when followed by digits
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{text}` in `{s}`")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected `{c}` in `{s}`")));
        }
    }
    Ok(out)
}

/// Real-valued expression in the sequence index `k`.
#[derive(Debug, Clone, PartialEq)]
pub enum RealExpr {
    Const(f64),
    K,
    Neg(Box<RealExpr>),
    Bin(char, Box<RealExpr>, Box<RealExpr>),
    Call(Func, Box<RealExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Sqrt,
    Abs,
    Ln,
    Exp,
}

impl RealExpr {
    pub fn eval(&self, k: f64) -> f64 {
        match self {
            RealExpr::Const(v) => *v,
            RealExpr::K => k,
            RealExpr::Neg(e) => -e.eval(k),
            RealExpr::Bin(op, a, b) => {
                let (a, b) = (a.eval(k), b.eval(k));
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => a / b,
                    _ => a.powf(b),
                }
            }
            RealExpr::Call(f, e) => {
                let v = e.eval(k);
                match f {
                    Func::Sqrt => v.sqrt(),
                    Func::Abs => v.abs(),
                    Func::Ln => v.ln(),
                    Func::Exp => v.exp(),
                }
            }
        }
    }

    pub fn uses_k(&self) -> bool {
        match self {
            RealExpr::Const(_) => false,
            RealExpr::K => true,
            RealExpr::Neg(e) | RealExpr::Call(_, e) => e.uses_k(),
            RealExpr::Bin(_, a, b) => a.uses_k() || b.uses_k(),
        }
    }
}

/// Shape argument: a parenthesized coordinate list or a single number.
#[derive(Debug, Clone, PartialEq)]
enum Item {
    Tuple(Vec<RealExpr>),
    Scalar(RealExpr),
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        Ok(Self {
            toks: tokenize(src)?,
            pos: 0,
            src,
        })
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} in `{}`", self.src))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn done(&self) -> Result<()> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.err("trailing input"))
        }
    }

    fn expr(&mut self) -> Result<RealExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym(c)) if *c == '+' || *c == '-' => *c,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = RealExpr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Sym('(')))
    }

    fn term(&mut self) -> Result<RealExpr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym(c)) if *c == '*' || *c == '/' => {
                    let c = *c;
                    self.pos += 1;
                    c
                }
                _ if self.starts_atom() => '*',
                _ => return Ok(lhs),
            };
            lhs = RealExpr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<RealExpr> {
        if self.eat('-') {
            return Ok(RealExpr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(RealExpr::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RealExpr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(RealExpr::Const(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let func = match name.as_str() {
                    "k" => return Ok(RealExpr::K),
                    "pi" => return Ok(RealExpr::Const(std::f64::consts::PI)),
                    "sqrt" => Func::Sqrt,
                    "abs" => Func::Abs,
                    "ln" => Func::Ln,
                    "exp" => Func::Exp,
                    other => return Err(self.err(&format!("unknown name `{other}`"))),
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(RealExpr::Call(func, Box::new(arg)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(self.err("expected a number")),
        }
    }

    /// A tuple when a parenthesized group holds a top-level comma and ends
    /// the argument; otherwise a scalar expression.
    fn item(&mut self) -> Result<Item> {
        if self.peek() == Some(&Tok::Sym('(')) {
            let save = self.pos;
            self.pos += 1;
            let mut parts = vec![self.expr()?];
            while self.eat(',') {
                parts.push(self.expr()?);
            }
            if parts.len() > 1 {
                self.expect(')')?;
                return Ok(Item::Tuple(parts));
            }
            self.pos = save;
        }
        Ok(Item::Scalar(self.expr()?))
    }

    fn shape(&mut self) -> Result<ShapeExpr> {
        let kind = match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "point" | "singleton" => ShapeKind::Point,
                    "points" => ShapeKind::Points,
                    "ball" => ShapeKind::Ball,
                    "sphere" => ShapeKind::Sphere,
                    "box" => ShapeKind::Box,
                    "hyperplane" => ShapeKind::Hyperplane,
                    other => return Err(self.err(&format!("unknown shape `{other}`"))),
                }
            }
            _ => return Err(self.err("expected a shape name")),
        };
        self.expect('(')?;
        let mut items = vec![self.item()?];
        while self.eat(',') {
            items.push(self.item()?);
        }
        self.expect(')')?;
        let sh = ShapeExpr { kind, items };
        sh.check_arity().map_err(|m| self.err(&m))?;
        Ok(sh)
    }
}

/// Parses a real expression in `k`.
pub fn parse_real(src: &str) -> Result<RealExpr> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.done()?;
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ShapeKind {
    Point,
    Points,
    Ball,
    Sphere,
    Box,
    Hyperplane,
}

/// A parsed shape, evaluated per index `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeExpr {
    kind: ShapeKind,
    items: Vec<Item>,
}

fn point_of(item: &Item, k: f64) -> Result<MetricPoint> {
    match item {
        Item::Tuple(parts) => MetricPoint::new(parts.iter().map(|e| e.eval(k)).collect()),
        Item::Scalar(e) => MetricPoint::new(vec![e.eval(k)]),
    }
}

fn scalar_of(item: &Item, k: f64) -> Result<f64> {
    match item {
        Item::Scalar(e) => Ok(e.eval(k)),
        Item::Tuple(_) => Err(Error::Parse("expected a number, found a tuple".into())),
    }
}

impl ShapeExpr {
    fn check_arity(&self) -> std::result::Result<(), String> {
        let n = self.items.len();
        let ok = match self.kind {
            ShapeKind::Point | ShapeKind::Points => n >= 1,
            _ => n == 2,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("wrong number of arguments ({n})"))
        }
    }

    pub fn uses_k(&self) -> bool {
        self.items.iter().any(|i| match i {
            Item::Tuple(p) => p.iter().any(RealExpr::uses_k),
            Item::Scalar(e) => e.uses_k(),
        })
    }

    pub fn eval(&self, k: f64) -> Result<ClosedSet> {
        let it = &self.items;
        match self.kind {
            ShapeKind::Point => {
                if it.len() == 1 {
                    Ok(ClosedSet::singleton(point_of(&it[0], k)?))
                } else {
                    let coords = it.iter().map(|i| scalar_of(i, k)).collect::<Result<Vec<_>>>()?;
                    Ok(ClosedSet::singleton(MetricPoint::new(coords)?))
                }
            }
            ShapeKind::Points => ClosedSet::points(it.iter().map(|i| point_of(i, k)).collect::<Result<_>>()?),
            ShapeKind::Ball => ClosedSet::ball(point_of(&it[0], k)?, scalar_of(&it[1], k)?),
            ShapeKind::Sphere => ClosedSet::sphere(point_of(&it[0], k)?, scalar_of(&it[1], k)?),
            ShapeKind::Box => ClosedSet::axis_box(point_of(&it[0], k)?, point_of(&it[1], k)?),
            ShapeKind::Hyperplane => ClosedSet::hyperplane(point_of(&it[0], k)?, scalar_of(&it[1], k)?),
        }
    }
}

pub fn parse_shape(src: &str) -> Result<ShapeExpr> {
    let mut p = Parser::new(src)?;
    let s = p.shape()?;
    p.done()?;
    Ok(s)
}

/// Parses a constant shape (no `k`).
pub fn parse_set(src: &str) -> Result<ClosedSet> {
    let s = parse_shape(src)?;
    if s.uses_k() {
        return Err(Error::Parse(format!("`{src}` depends on k")));
    }
    s.eval(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceExpr {
    Single(ShapeExpr),
    Cycle(Vec<ShapeExpr>),
    Squares(ShapeExpr, ShapeExpr),
}

impl SequenceExpr {
    pub fn at(&self, k: u64) -> Result<ClosedSet> {
        let kf = k as f64;
        match self {
            SequenceExpr::Single(s) => s.eval(kf),
            SequenceExpr::Cycle(v) => v[(k % v.len() as u64) as usize].eval(kf),
            SequenceExpr::Squares(on, off) => {
                let r = k.isqrt();
                if r * r == k {
                    on.eval(kf)
                } else {
                    off.eval(kf)
                }
            }
        }
    }

    /// Evaluates `A_1..=A_horizon` once, so that later evaluation cannot fail.
    pub fn validate(&self, horizon: usize) -> Result<()> {
        let mut dim = None;
        for k in 1..=horizon as u64 {
            let set = self.at(k).map_err(|e| Error::Parse(format!("A_{k}: {e}")))?;
            match dim {
                None => dim = Some(set.dim()),
                Some(d) if d != set.dim() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: set.dim(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Converts to a [`SetSequence`]; call [`SequenceExpr::validate`] first.
    pub fn into_sequence(self, label: String) -> SetSequence {
        SetSequence::new(label, move |k| {
            self.at(k).expect("sequence validated over the horizon")
        })
    }
}

pub fn parse_sequence(src: &str) -> Result<SequenceExpr> {
    let src = src.trim();
    let parts = |rest: &str| rest.split('|').map(|s| parse_shape(s.trim())).collect::<Result<Vec<_>>>();
    if let Some(rest) = src.strip_prefix("cycle:") {
        let v = parts(rest)?;
        if v.is_empty() {
            return Err(Error::Parse("empty cycle".into()));
        }
        Ok(SequenceExpr::Cycle(v))
    } else if let Some(rest) = src.strip_prefix("squares:") {
        let mut v = parts(rest)?;
        if v.len() != 2 {
            return Err(Error::Parse("squares: needs exactly two shapes".into()));
        }
        let off = v.pop().expect("two");
        let on = v.pop().expect("two");
        Ok(SequenceExpr::Squares(on, off))
    } else {
        Ok(SequenceExpr::Single(parse_shape(src)?))
    }
}

/// One probe point: `1,0`, `(1, 0)`, or `-2.5`.
pub fn parse_point(src: &str) -> Result<MetricPoint> {
    let s = src.trim();
    let inner = s
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .unwrap_or(s);
    let coords = inner
        .split(',')
        .map(|c| {
            let e = parse_real(c.trim())?;
            if e.uses_k() {
                return Err(Error::Parse(format!("probe `{s}` depends on k")));
            }
            Ok(e.eval(0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    MetricPoint::new(coords)
}

/// Semicolon-separated probe list.
pub fn parse_points(src: &str) -> Result<Vec<MetricPoint>> {
    src.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_point)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_sets::distance;

    #[test]
    fn real_expressions() {
        let e = parse_real("2k + 1/2").unwrap();
        assert_eq!(e.eval(3.0), 6.5);
        assert_eq!(parse_real("-k^2").unwrap().eval(3.0), -9.0);
        assert_eq!(parse_real("2^3^2").unwrap().eval(0.0), 512.0);
        assert_eq!(parse_real("sqrt(k)(k+1)").unwrap().eval(4.0), 10.0);
        assert_eq!(parse_real("1e-3").unwrap().eval(0.0), 1e-3);
        assert!(parse_real("2 +").is_err());
        assert!(parse_real("foo(1)").is_err());
    }

    #[test]
    fn shapes() {
        let o = MetricPoint::origin(2);
        let d = |s: &str| distance(&o, &parse_set(s).unwrap()).unwrap();
        assert_eq!(d("point(3,4)"), 5.0);
        assert_eq!(d("point((3,4))"), 5.0);
        assert_eq!(d("ball((3,4), 1)"), 4.0);
        assert_eq!(d("sphere((0,0), 2)"), 2.0);
        assert_eq!(d("box((1,1),(2,2))"), 2f64.sqrt());
        assert_eq!(d("hyperplane((1,0), 2)"), 2.0);
        assert_eq!(d("points((1,0),(0,0.5))"), 0.5);
        assert!(parse_set("ball((0,0), k)").is_err());
        assert!(parse_set("ball((0,0))").is_err());
        assert!(parse_set("ball((0,0), -1)").is_err());
        assert!(parse_set("cube(1)").is_err());
    }

    #[test]
    fn one_dimensional_and_parenthesized_scalars() {
        let s = parse_set("ball(3, (1+1)/2)").unwrap();
        assert_eq!(distance(&MetricPoint::origin(1), &s).unwrap(), 2.0);
    }

    #[test]
    fn sequences() {
        let o = MetricPoint::origin(2);
        let s = parse_sequence("cycle: point(1,0) | point(-1,0) | point(0,2)").unwrap();
        let d: Vec<f64> = (1..=4).map(|k| distance(&o, &s.at(k).unwrap()).unwrap()).collect();
        assert_eq!(d, [1.0, 2.0, 1.0, 1.0]);
        let s = parse_sequence("squares: point(k, 0) | point(0,0)").unwrap();
        let d: Vec<f64> = (1..=5).map(|k| distance(&o, &s.at(k).unwrap()).unwrap()).collect();
        assert_eq!(d, [1.0, 0.0, 0.0, 4.0, 0.0]);
        let s = parse_sequence("sphere((k,0), k)").unwrap();
        assert!(s.validate(100).is_ok());
        let bad = parse_sequence("ball((0,0), 5 - k)").unwrap();
        assert!(bad.validate(10).is_err());
        let mixed = parse_sequence("cycle: point(1) | point(1,2)").unwrap();
        assert!(matches!(mixed.validate(4), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn probes() {
        let p = parse_points("(1,0); (0, -3); 2, 2").unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p[1].coords(), &[0.0, -3.0]);
        assert!(parse_point("k, 1").is_err());
    }
}
