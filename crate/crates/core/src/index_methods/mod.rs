//! Index subsequences `lambda`, deferred pairs `(p, q)`, the T and R proof
//! matrices, and finite-window estimates of the ratio conditions.

mod conditions;
mod expr;
mod matrices;

use std::path::Path;

use serde::Serialize;

pub use conditions::{
    ratio_condition, ConditionHint, ConditionReport, Quantity, CONDITION_HORIZON, CONDITION_TOL,
};
pub use expr::LambdaExpr;
pub use matrices::{
    r_abs_row_sum_formula, r_matrix_row, regularity_report, t_matrix_row, CesaroMatrix,
    IdentityMatrix, RMatrix, RegularityReport, RegularityVerdict, Row, RowMatrix, TMatrix,
    REGULARITY_COLUMNS, ROW_SUM_TOL, COLUMN_TAIL_TOL,
};

use crate::error::{Error, Result};

/// Materialized prefix `lambda(1), ..., lambda(len)` of a strictly
/// increasing sequence of positive integers, with `lambda(0) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexMethod {
    label: String,
    values: Vec<u64>,
}

impl IndexMethod {
    pub fn from_values(label: impl Into<String>, values: Vec<u64>) -> Result<Self> {
        let label = label.into();
        let mut prev = 0u64;
        for (i, &v) in values.iter().enumerate() {
            if v <= prev {
                return Err(Error::NonMonotone { label, n: i + 1 });
            }
            prev = v;
        }
        Ok(Self { label, values })
    }

    pub fn from_fn(label: impl Into<String>, n_max: usize, f: impl Fn(u64) -> u64) -> Result<Self> {
        Self::from_values(label, (1..=n_max as u64).map(f).collect())
    }

    /// `lambda(n) = n`, the Cesaro method C1.
    pub fn identity(n_max: usize) -> Self {
        Self {
            label: "n".into(),
            values: (1..=n_max as u64).collect(),
        }
    }

    /// `lambda(1..=n_max)` from a closed-form expression.
    pub fn from_expr(expr: &LambdaExpr, n_max: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(n_max);
        for n in 1..=n_max as u64 {
            values.push(eval_positive(expr, n)?);
        }
        Self::from_values(expr.source(), values)
    }

    /// Every `lambda(n) <= bound`, plus the first value beyond it, so that
    /// both the in-horizon part and one look-ahead step are available.
    pub fn covering(expr: &LambdaExpr, bound: u64) -> Result<Self> {
        Self::covering_at_least(expr, bound, 0)
    }

    /// [`IndexMethod::covering`], extended to at least `min_terms` terms when
    /// the expression stays within `u64`. Overflow is an error only while
    /// `bound` is not yet covered.
    pub fn covering_at_least(expr: &LambdaExpr, bound: u64, min_terms: usize) -> Result<Self> {
        let mut values = Vec::new();
        let mut prev = 0u64;
        for n in 1u64.. {
            let v = match eval_positive(expr, n) {
                Ok(v) => v,
                Err(Error::Overflow { .. }) if prev > bound => break,
                Err(e) => return Err(e),
            };
            if v <= prev {
                return Err(Error::NonMonotone {
                    label: expr.source().into(),
                    n: n as usize,
                });
            }
            values.push(v);
            prev = v;
            if v > bound && values.len() >= min_terms {
                break;
            }
        }
        Ok(Self {
            label: expr.source().into(),
            values,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Number of materialized terms.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// `lambda(n)`, with the sentinel `lambda(0) = 0`.
    pub fn get(&self, n: usize) -> Result<u64> {
        if n == 0 {
            return Ok(0);
        }
        self.values
            .get(n - 1)
            .copied()
            .ok_or(Error::HorizonExceeded {
                needed: n as u64,
                available: self.values.len() as u64,
            })
    }

    /// Largest `n` with `lambda(n) <= horizon`.
    pub fn n_horizon(&self, horizon: usize) -> usize {
        self.values.partition_point(|&v| v <= horizon as u64)
    }
}

fn eval_positive(expr: &LambdaExpr, n: u64) -> Result<u64> {
    let overflow = || Error::Overflow {
        expr: expr.source().into(),
        n,
    };
    let v = expr.eval(n).ok_or_else(overflow)?;
    if v < 1 {
        return Err(Error::NonMonotone {
            label: expr.source().into(),
            n: n as usize,
        });
    }
    u64::try_from(v).map_err(|_| overflow())
}

/// Parses an index method: a closed-form expression, or `@path` naming a
/// list file with one strictly increasing integer per line (blank lines and
/// `#` comments skipped). Lists longer than `n_max` are truncated.
pub fn parse_lambda(spec: &str, n_max: usize) -> Result<IndexMethod> {
    let spec = spec.trim();
    if let Some(path) = spec.strip_prefix('@') {
        return read_lambda_list(Path::new(path.trim()), n_max);
    }
    let expr = LambdaExpr::parse(spec)?;
    IndexMethod::from_expr(&expr, n_max)
}

/// Like [`parse_lambda`], but sized for a trace of length `horizon`:
/// expressions are materialized past `horizon` and to at least `min_terms`
/// terms where representable; list files are read whole.
pub fn lambda_for_horizon(spec: &str, horizon: usize, min_terms: usize) -> Result<IndexMethod> {
    let spec = spec.trim();
    if let Some(path) = spec.strip_prefix('@') {
        return read_lambda_list(Path::new(path.trim()), usize::MAX);
    }
    let expr = LambdaExpr::parse(spec)?;
    IndexMethod::covering_at_least(&expr, horizon as u64, min_terms)
}

fn read_lambda_list(path: &Path, n_max: usize) -> Result<IndexMethod> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = line.parse::<u64>().map_err(|_| {
            Error::Parse(format!("{}:{}: `{line}` is not a positive integer", path.display(), lineno + 1))
        })?;
        values.push(v);
        if values.len() == n_max {
            break;
        }
    }
    IndexMethod::from_values(format!("@{}", path.display()), values)
}

/// Window bounds `p(n) < q(n)` of a deferred Cesaro mean.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeferredPair {
    label: String,
    p: Vec<u64>,
    q: Vec<u64>,
}

impl DeferredPair {
    pub fn new(label: impl Into<String>, p: Vec<u64>, q: Vec<u64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::InvalidParameter {
                name: "deferred pair",
                reason: format!("p has {} terms, q has {}", p.len(), q.len()),
            });
        }
        if let Some(i) = p.iter().zip(&q).position(|(a, b)| a >= b) {
            return Err(Error::DeferredOrder(i + 1));
        }
        Ok(Self {
            label: label.into(),
            p,
            q,
        })
    }

    pub fn from_fn(
        label: impl Into<String>,
        n_max: usize,
        p: impl Fn(u64) -> u64,
        q: impl Fn(u64) -> u64,
    ) -> Result<Self> {
        let ns = 1..=n_max as u64;
        Self::new(label, ns.clone().map(p).collect(), ns.map(q).collect())
    }

    /// `p(n) = lambda(n-1)`, `q(n) = lambda(n)`: the pair behind `D_lambda`.
    pub fn from_method(lambda: &IndexMethod) -> Self {
        let q = lambda.values.clone();
        let p = std::iter::once(0).chain(q.iter().copied()).take(q.len()).collect();
        Self {
            label: format!("D[{}]", lambda.label),
            p,
            q,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// `(p(n), q(n))`, `n >= 1`.
    pub fn window(&self, n: usize) -> (u64, u64) {
        (self.p[n - 1], self.q[n - 1])
    }
}

/// Complement `{1..N} \ {lambda(n)}` of an index method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Complement {
    pub method: IndexMethod,
    /// Set when every index up to `N` is a lambda-value.
    pub empty: bool,
}

/// Enumerates `mu`, the indices in `1..=horizon` missed by `lambda`.
pub fn complement_method(lambda: &IndexMethod, horizon: usize) -> Result<Complement> {
    let first = lambda.get(1)?;
    if (horizon as u64) < first {
        return Err(Error::InvalidParameter {
            name: "horizon",
            reason: format!("{horizon} is below lambda(1) = {first}"),
        });
    }
    let last = *lambda.values.last().expect("nonempty after get(1)");
    if last < horizon as u64 {
        return Err(Error::HorizonExceeded {
            needed: horizon as u64,
            available: last,
        });
    }
    let mut mu = Vec::new();
    let mut it = lambda.values.iter().peekable();
    for k in 1..=horizon as u64 {
        while it.peek().is_some_and(|&&v| v < k) {
            it.next();
        }
        if it.peek() != Some(&&k) {
            mu.push(k);
        }
    }
    let empty = mu.is_empty();
    Ok(Complement {
        method: IndexMethod {
            label: format!("N\\{}", lambda.label),
            values: mu,
        },
        empty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn method(src: &str, n: usize) -> IndexMethod {
        parse_lambda(src, n).unwrap()
    }

    #[test]
    fn parse_lambda_examples() {
        assert_eq!(method("n^2", 4).values(), &[1, 4, 9, 16]);
        assert_eq!(method("2^n", 5).values(), &[2, 4, 8, 16, 32]);
        assert_eq!(method("2*n", 3).values(), &[2, 4, 6]);
    }

    #[test]
    fn parse_lambda_errors() {
        assert!(matches!(parse_lambda("n^", 3), Err(Error::Parse(_))));
        assert!(matches!(parse_lambda("5", 3), Err(Error::NonMonotone { n: 2, .. })));
        assert!(matches!(parse_lambda("n - 1", 3), Err(Error::NonMonotone { n: 1, .. })));
        assert!(matches!(parse_lambda("2^n", 200), Err(Error::Overflow { n: 64, .. })));
    }

    #[test]
    fn list_files() {
        let dir = std::env::temp_dir().join(format!("wijsum-list-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let good = dir.join("good.txt");
        std::fs::write(&good, "# squares\n1\n4\n\n9\n16\n").unwrap();
        let m = parse_lambda(&format!("@{}", good.display()), 3).unwrap();
        assert_eq!(m.values(), &[1, 4, 9]);
        let bad = dir.join("bad.txt");
        std::fs::write(&bad, "1\n3\n2\n").unwrap();
        assert!(matches!(
            parse_lambda(&format!("@{}", bad.display()), 10),
            Err(Error::NonMonotone { n: 3, .. })
        ));
        assert!(matches!(parse_lambda("@/nonexistent/x", 3), Err(Error::Io(_))));
    }

    #[test]
    fn sentinel_and_horizon() {
        let m = method("n^2", 10);
        assert_eq!(m.get(0).unwrap(), 0);
        assert_eq!(m.get(3).unwrap(), 9);
        assert!(m.get(11).is_err());
        assert_eq!(m.n_horizon(10), 3);
        assert_eq!(m.n_horizon(9), 3);
        assert_eq!(m.n_horizon(0), 0);
    }

    #[test]
    fn covering_adds_one_lookahead() {
        let e = LambdaExpr::parse("n^2").unwrap();
        let m = IndexMethod::covering(&e, 10).unwrap();
        assert_eq!(m.values(), &[1, 4, 9, 16]);
        assert!(IndexMethod::covering(&LambdaExpr::parse("3").unwrap(), 10).is_err());
    }

    #[test]
    fn complements() {
        let c = complement_method(&method("2*n", 3), 6).unwrap();
        assert_eq!(c.method.values(), &[1, 3, 5]);
        assert!(!c.empty);
        let c = complement_method(&method("n^2", 4), 10).unwrap();
        assert_eq!(c.method.values(), &[2, 3, 5, 6, 7, 8, 10]);
        let c = complement_method(&method("n", 5), 5).unwrap();
        assert!(c.empty && c.method.is_empty());
        assert!(complement_method(&method("n^2", 3), 10).is_err());
    }

    #[test]
    fn deferred_pairs() {
        assert!(matches!(
            DeferredPair::new("bad", vec![0, 3], vec![1, 3]),
            Err(Error::DeferredOrder(2))
        ));
        let d = DeferredPair::from_method(&method("2^n", 3));
        assert_eq!(d.window(1), (0, 2));
        assert_eq!(d.window(3), (4, 8));
    }
}
