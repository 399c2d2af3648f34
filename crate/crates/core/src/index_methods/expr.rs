//! Integer expressions in `n` for index methods.
//!
//! Grammar (whitespace ignored, `^` right-associative, juxtaposition of a
//! number with `n` or `(` means multiplication):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := INT | 'n' | '(' expr ')' | INT atom
//! ```
//!
//! Covers `n`, `2*n`, `2n`, `n^2`, `n^3`, `2^n`, `3*n^2+1`, ...

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Int(i128),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
}

/// Parsed closed-form index expression.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaExpr {
    source: String,
    root: Node,
}

impl fmt::Display for LambdaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Int(i128),
    Var,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => {}
            '0'..='9' => {
                let start = i;
                while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..=i].iter().collect();
                let v = lit
                    .parse::<i128>()
                    .map_err(|_| Error::Parse(format!("integer literal `{lit}` too large")))?;
                out.push(Tok::Int(v));
            }
            'n' => out.push(Tok::Var),
            '+' => out.push(Tok::Plus),
            '-' => out.push(Tok::Minus),
            '*' | '·' => out.push(Tok::Star),
            '^' => out.push(Tok::Caret),
            '(' => out.push(Tok::LParen),
            ')' => out.push(Tok::RParen),
            other => {
                return Err(Error::Parse(format!(
                    "unexpected character `{other}` in `{src}`"
                )))
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op @ (Tok::Plus | Tok::Minus)) = self.peek() {
            self.bump();
            let rhs = self.term()?;
            lhs = if op == Tok::Plus {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(Tok::Star) {
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek() == Some(Tok::Minus) {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek() == Some(Tok::Caret) {
            self.bump();
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.bump() {
            Some(Tok::Int(v)) => {
                // `2n`, `3(n+1)`; `2^n` binds the literal alone.
                if matches!(self.peek(), Some(Tok::Var | Tok::LParen)) {
                    let rhs = self.power()?;
                    Ok(Node::Mul(Box::new(Node::Int(v)), Box::new(rhs)))
                } else {
                    Ok(Node::Int(v))
                }
            }
            Some(Tok::Var) => Ok(Node::Var),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                if self.bump() != Some(Tok::RParen) {
                    return Err(Error::Parse("missing `)`".into()));
                }
                Ok(inner)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

impl LambdaExpr {
    pub fn parse(src: &str) -> Result<Self> {
        let toks = lex(src)?;
        if toks.is_empty() {
            return Err(Error::Parse("empty expression".into()));
        }
        let mut p = Parser {
            toks: &toks,
            pos: 0,
        };
        let root = p.expr()?;
        if p.pos != toks.len() {
            return Err(Error::Parse(format!("trailing input in `{src}`")));
        }
        Ok(Self {
            source: src.trim().to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Exact value at `n`, or `None` on overflow / negative exponent.
    pub fn eval(&self, n: u64) -> Option<i128> {
        eval(&self.root, n as i128)
    }
}

fn eval(node: &Node, n: i128) -> Option<i128> {
    match node {
        Node::Int(v) => Some(*v),
        Node::Var => Some(n),
        Node::Neg(a) => eval(a, n)?.checked_neg(),
        Node::Add(a, b) => eval(a, n)?.checked_add(eval(b, n)?),
        Node::Sub(a, b) => eval(a, n)?.checked_sub(eval(b, n)?),
        Node::Mul(a, b) => eval(a, n)?.checked_mul(eval(b, n)?),
        Node::Pow(a, b) => {
            let base = eval(a, n)?;
            let exp = u32::try_from(eval(b, n)?).ok()?;
            base.checked_pow(exp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vals(src: &str, upto: u64) -> Vec<i128> {
        let e = LambdaExpr::parse(src).unwrap();
        (1..=upto).map(|n| e.eval(n).unwrap()).collect()
    }

    #[test]
    fn common_forms() {
        assert_eq!(vals("n", 3), [1, 2, 3]);
        assert_eq!(vals("2*n", 3), [2, 4, 6]);
        assert_eq!(vals("2n", 3), [2, 4, 6]);
        assert_eq!(vals("n^2", 4), [1, 4, 9, 16]);
        assert_eq!(vals("n^3", 3), [1, 8, 27]);
        assert_eq!(vals("2^n", 5), [2, 4, 8, 16, 32]);
    }

    #[test]
    fn precedence() {
        assert_eq!(vals("3*n^2+1", 2), [4, 13]);
        assert_eq!(vals("2^n^2", 2), [2, 16]);
        assert_eq!(vals("(n+1)^2 - 1", 2), [3, 8]);
        assert_eq!(vals("2(n+1)", 2), [4, 6]);
        assert_eq!(vals("-n + 10", 2), [9, 8]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(LambdaExpr::parse("").is_err());
        assert!(LambdaExpr::parse("n +").is_err());
        assert!(LambdaExpr::parse("(n").is_err());
        assert!(LambdaExpr::parse("log(n)").is_err());
        assert!(LambdaExpr::parse("n n").is_err());
    }

    #[test]
    fn overflow_is_none() {
        let e = LambdaExpr::parse("2^n").unwrap();
        assert!(e.eval(126).is_some());
        assert!(e.eval(127).is_none());
    }
}
