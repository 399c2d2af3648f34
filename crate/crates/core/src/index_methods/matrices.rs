//! Row-generated summability matrices and finite-prefix Silverman-Toeplitz
//! diagnostics.
//!
//! `T` turns the `D_lambda` means into the `C_lambda` means (a convex
//! combination of block means); `R` inverts it (a two-term difference).

use serde::Serialize;

use super::IndexMethod;
use crate::error::Result;
use crate::numeric;

/// Sparse matrix row: `(k, a_nk)` pairs, `k >= 1`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub entries: Vec<(usize, f64)>,
}

impl Row {
    pub fn sum(&self) -> f64 {
        numeric::sum(self.entries.iter().map(|e| e.1))
    }

    pub fn abs_sum(&self) -> f64 {
        numeric::sum(self.entries.iter().map(|e| e.1.abs()))
    }

    /// Largest column index with a nonzero entry.
    pub fn support(&self) -> usize {
        self.entries.iter().map(|e| e.0).max().unwrap_or(0)
    }

    /// Entry at column `k`, zero when absent.
    pub fn at(&self, k: usize) -> f64 {
        self.entries
            .iter()
            .find(|e| e.0 == k)
            .map_or(0.0, |e| e.1)
    }
}

/// A lower-triangular matrix given row by row, `n >= 1`.
pub trait RowMatrix {
    fn label(&self) -> String;
    fn row(&self, n: usize) -> Result<Row>;
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityMatrix;

impl RowMatrix for IdentityMatrix {
    fn label(&self) -> String {
        "I".into()
    }

    fn row(&self, n: usize) -> Result<Row> {
        Ok(Row {
            entries: vec![(n, 1.0)],
        })
    }
}

/// The Cesaro matrix C1: `a_nk = 1/n` for `k <= n`.
#[derive(Debug, Clone, Copy)]
pub struct CesaroMatrix;

impl RowMatrix for CesaroMatrix {
    fn label(&self) -> String {
        "C1".into()
    }

    fn row(&self, n: usize) -> Result<Row> {
        let w = 1.0 / n as f64;
        Ok(Row {
            entries: (1..=n).map(|k| (k, w)).collect(),
        })
    }
}

/// `t_nk = (lambda(k) - lambda(k-1)) / lambda(n)` for `k <= n`.
#[derive(Debug, Clone, Copy)]
pub struct TMatrix<'a>(pub &'a IndexMethod);

impl RowMatrix for TMatrix<'_> {
    fn label(&self) -> String {
        format!("T[{}]", self.0.label())
    }

    fn row(&self, n: usize) -> Result<Row> {
        let w = t_matrix_row(self.0, n)?;
        Ok(Row {
            entries: w.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect(),
        })
    }
}

/// `r_nn = lambda(n) / (lambda(n) - lambda(n-1))`,
/// `r_n,n-1 = -lambda(n-1) / (lambda(n) - lambda(n-1))`.
#[derive(Debug, Clone, Copy)]
pub struct RMatrix<'a>(pub &'a IndexMethod);

impl RowMatrix for RMatrix<'_> {
    fn label(&self) -> String {
        format!("R[{}]", self.0.label())
    }

    fn row(&self, n: usize) -> Result<Row> {
        r_matrix_row(self.0, n)
    }
}

/// Dense row `(t_n1, ..., t_nn)` of T.
pub fn t_matrix_row(lambda: &IndexMethod, n: usize) -> Result<Vec<f64>> {
    let denom = lambda.get(n)? as f64;
    let v = &lambda.values()[..n];
    let mut prev = 0;
    Ok(v
        .iter()
        .map(|&cur| {
            let w = (cur - prev) as f64 / denom;
            prev = cur;
            w
        })
        .collect())
}

/// Sparse row of R; row 1 is the single entry `{1: 1}` since `lambda(0) = 0`.
pub fn r_matrix_row(lambda: &IndexMethod, n: usize) -> Result<Row> {
    let cur = lambda.get(n)?;
    let prev = lambda.get(n - 1)?;
    let gap = (cur - prev) as f64;
    let mut entries = Vec::with_capacity(2);
    if n > 1 {
        entries.push((n - 1, -(prev as f64) / gap));
    }
    entries.push((n, cur as f64 / gap));
    Ok(Row { entries })
}

/// `1 + 2 / (lambda(n)/lambda(n-1) - 1)`, the closed form of the absolute
/// row sum of R (1 for the first row).
pub fn r_abs_row_sum_formula(lambda: &IndexMethod, n: usize) -> Result<f64> {
    if n == 1 {
        lambda.get(1)?;
        return Ok(1.0);
    }
    let ratio = lambda.get(n)? as f64 / lambda.get(n - 1)? as f64;
    Ok(1.0 + 2.0 / (ratio - 1.0))
}

/// Row sums must be within this of 1.
pub const ROW_SUM_TOL: f64 = 1e-9;
/// Fixed columns' entries in the last row must fall below this.
pub const COLUMN_TAIL_TOL: f64 = 1e-3;
/// Number of leading columns inspected for tail decay.
pub const REGULARITY_COLUMNS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegularityVerdict {
    RegularConsistent,
    NotRegularConsistent,
}

/// Finite-prefix check of the three Silverman-Toeplitz conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub matrix: String,
    pub horizon: usize,
    pub max_abs_row_sum: f64,
    pub max_row_sum_deviation: f64,
    pub max_column_tail: f64,
    /// Absolute row sums over `(N/2, N]` do not exceed those over `[1, N/2]`.
    pub abs_row_sums_bounded: bool,
    pub verdict: RegularityVerdict,
}

pub fn regularity_report(rows: &dyn RowMatrix, horizon: usize) -> Result<RegularityReport> {
    if horizon < 2 {
        return Err(crate::Error::InvalidParameter {
            name: "horizon",
            reason: "regularity needs at least two rows".into(),
        });
    }
    let half = horizon / 2;
    let mut head_abs: f64 = 0.0;
    let mut tail_abs: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    let mut last = None;
    for n in 1..=horizon {
        let row = rows.row(n)?;
        let abs = row.abs_sum();
        if n <= half {
            head_abs = head_abs.max(abs);
        } else {
            tail_abs = tail_abs.max(abs);
        }
        max_dev = max_dev.max((row.sum() - 1.0).abs());
        if n == horizon {
            last = Some(row);
        }
    }
    let last = last.expect("horizon >= 2");
    let max_column_tail = (1..=REGULARITY_COLUMNS.min(horizon))
        .map(|k| last.at(k).abs())
        .fold(0.0, f64::max);
    let abs_row_sums_bounded = tail_abs <= head_abs * (1.0 + 1e-9);
    let regular = max_dev <= ROW_SUM_TOL && abs_row_sums_bounded && max_column_tail < COLUMN_TAIL_TOL;
    Ok(RegularityReport {
        matrix: rows.label(),
        horizon,
        max_abs_row_sum: head_abs.max(tail_abs),
        max_row_sum_deviation: max_dev,
        max_column_tail,
        abs_row_sums_bounded,
        verdict: if regular {
            RegularityVerdict::RegularConsistent
        } else {
            RegularityVerdict::NotRegularConsistent
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_methods::parse_lambda;

    fn m(src: &str, n: usize) -> IndexMethod {
        parse_lambda(src, n).unwrap()
    }

    #[test]
    fn t_rows() {
        let r = t_matrix_row(&m("n", 3), 3).unwrap();
        assert_eq!(r, vec![1.0 / 3.0; 3]);
        assert_eq!(t_matrix_row(&m("n^2", 2), 2).unwrap(), vec![0.25, 0.75]);
        assert_eq!(t_matrix_row(&m("2^n", 3), 3).unwrap(), vec![0.25, 0.25, 0.5]);
    }

    #[test]
    fn r_rows() {
        let r = r_matrix_row(&m("2^n", 3), 3).unwrap();
        assert_eq!(r.entries, vec![(2, -1.0), (3, 2.0)]);
        assert_eq!(r.abs_sum(), 3.0);
        let r = r_matrix_row(&m("n", 5), 5).unwrap();
        assert_eq!(r.entries, vec![(4, -4.0), (5, 5.0)]);
        assert_eq!(r.abs_sum(), 9.0);
        for src in ["n", "n^2", "2^n", "3n+4"] {
            let r = r_matrix_row(&m(src, 1), 1).unwrap();
            assert_eq!(r.entries, vec![(1, 1.0)]);
            assert_eq!(r_abs_row_sum_formula(&m(src, 1), 1).unwrap(), 1.0);
        }
    }

    #[test]
    fn regularity_examples() {
        let sq = m("n^2", 200);
        let t = regularity_report(&TMatrix(&sq), 200).unwrap();
        assert!(t.max_row_sum_deviation <= 1e-12);
        assert_eq!(t.verdict, RegularityVerdict::RegularConsistent);

        let geo = m("2^n", 40);
        let r = regularity_report(&RMatrix(&geo), 40).unwrap();
        assert_eq!(r.max_abs_row_sum, 3.0);
        assert_eq!(r.verdict, RegularityVerdict::RegularConsistent);

        let lin = m("n", 200);
        let r = regularity_report(&RMatrix(&lin), 200).unwrap();
        assert_eq!(r.max_abs_row_sum, 399.0);
        assert!(!r.abs_row_sums_bounded);
        assert_eq!(r.verdict, RegularityVerdict::NotRegularConsistent);
    }

    #[test]
    fn identity_and_cesaro_rows() {
        assert_eq!(IdentityMatrix.row(4).unwrap().entries, vec![(4, 1.0)]);
        let c = CesaroMatrix.row(4).unwrap();
        assert_eq!(c.entries.len(), 4);
        assert_eq!(c.sum(), 1.0);
        assert!(regularity_report(&IdentityMatrix, 1).is_err());
    }
}
