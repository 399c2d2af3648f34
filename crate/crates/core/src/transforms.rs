//! Mean-type transforms of a distance trace.
//!
//! * `C_lambda`: `(1/lambda(n)) sum_{k <= lambda(n)} x_k` (C1 when `lambda(n) = n`)
//! * `D_lambda`: mean over the block `(lambda(n-1), lambda(n)]`
//! * deferred `D_{p,q}`: mean over `(p(n), q(n)]`
//! * strong variants: the same means of `|x_k - L|^p`
//!
//! The n-horizon of a series is the largest `n` whose window fits inside the
//! trace; entries are indexed `n = 1..=n_horizon`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index_methods::{DeferredPair, IndexMethod, RowMatrix};
use crate::metric_sets::DistanceTrace;
use crate::numeric::{self, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SeriesKind {
    C1,
    Clambda,
    Dlambda,
    Deferred,
    StrongClambda { p: f64 },
    StrongDlambda { p: f64 },
    StrongC1 { p: f64 },
    /// Output of [`apply_row_matrix`].
    Transformed,
}

impl SeriesKind {
    /// Column value used in CSV output.
    pub fn name(&self) -> String {
        match self {
            SeriesKind::C1 => "c1".into(),
            SeriesKind::Clambda => "c_lambda".into(),
            SeriesKind::Dlambda => "d_lambda".into(),
            SeriesKind::Deferred => "deferred".into(),
            SeriesKind::StrongClambda { p } => format!("strong_c_lambda_p{p}"),
            SeriesKind::StrongDlambda { p } => format!("strong_d_lambda_p{p}"),
            SeriesKind::StrongC1 { p } => format!("strong_c1_p{p}"),
            SeriesKind::Transformed => "transformed".into(),
        }
    }

    pub fn power(&self) -> Option<f64> {
        match *self {
            SeriesKind::StrongClambda { p }
            | SeriesKind::StrongDlambda { p }
            | SeriesKind::StrongC1 { p } => Some(p),
            _ => None,
        }
    }
}

/// Which mean a strong transform is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StrongMethod {
    Clambda,
    Dlambda,
    C1,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanSeries {
    pub kind: SeriesKind,
    /// Label of the index method (or deferred pair / matrix) used.
    pub method: String,
    /// Right end of each averaging window: `lambda(n)`, `q(n)`, or `n`.
    pub window_end: Vec<u64>,
    /// `values[probe][n - 1]`.
    pub values: Vec<Vec<f64>>,
    /// For strong kinds: per-probe maximum deviation over the averaged range.
    pub max_deviation: Option<Vec<f64>>,
}

impl MeanSeries {
    pub fn n_horizon(&self) -> usize {
        self.window_end.len()
    }

    pub fn num_probes(&self) -> usize {
        self.values.len()
    }

    /// Entry `n >= 1` for `probe`.
    pub fn at(&self, probe: usize, n: usize) -> f64 {
        self.values[probe][n - 1]
    }
}

/// `sum_{k <= end} row[k] / end` for each `end`, from one compensated
/// running sum.
fn running_means(row: &[f64], ends: &[u64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    let mut k = 0usize;
    ends.iter()
        .map(|&end| {
            let end = end as usize;
            while k < end {
                acc.add(row[k]);
                k += 1;
            }
            acc.value() / end as f64
        })
        .collect()
}

/// Mean of `row` over each window `(lo, hi]` (1-based), summed directly.
fn block_means(row: &[f64], windows: impl Iterator<Item = (u64, u64)>) -> Vec<f64> {
    windows
        .map(|(lo, hi)| {
            let s = numeric::sum(row[lo as usize..hi as usize].iter().copied());
            s / (hi - lo) as f64
        })
        .collect()
}

fn lambda_prefix(trace: &DistanceTrace, lambda: &IndexMethod) -> Result<Vec<u64>> {
    let n = lambda.n_horizon(trace.horizon());
    if n == 0 {
        return Err(Error::HorizonExceeded {
            needed: lambda.get(1).unwrap_or(1),
            available: trace.horizon() as u64,
        });
    }
    Ok(lambda.values()[..n].to_vec())
}

fn lambda_blocks(ends: &[u64]) -> impl Iterator<Item = (u64, u64)> + '_ {
    std::iter::once(0)
        .chain(ends.iter().copied())
        .zip(ends.iter().copied())
}

fn deviations(trace: &DistanceTrace, p: f64) -> Result<Vec<Vec<f64>>> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("{p} is not a positive real"),
        });
    }
    let target = trace.require_target()?;
    Ok(trace
        .rows()
        .iter()
        .zip(target)
        .map(|(row, t)| row.iter().map(|v| power((v - t).abs(), p)).collect())
        .collect())
}

fn power(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

/// Cesaro means `(C1 x)_n`, `n = 1..=N`.
pub fn c1(trace: &DistanceTrace) -> MeanSeries {
    let ends: Vec<u64> = (1..=trace.horizon() as u64).collect();
    MeanSeries {
        kind: SeriesKind::C1,
        method: "n".into(),
        values: trace.rows().iter().map(|r| running_means(r, &ends)).collect(),
        window_end: ends,
        max_deviation: None,
    }
}

/// Cesaro-submethod means `(C_lambda x)_n`.
pub fn c_lambda(trace: &DistanceTrace, lambda: &IndexMethod) -> Result<MeanSeries> {
    let ends = lambda_prefix(trace, lambda)?;
    Ok(MeanSeries {
        kind: SeriesKind::Clambda,
        method: lambda.label().into(),
        values: trace.rows().iter().map(|r| running_means(r, &ends)).collect(),
        window_end: ends,
        max_deviation: None,
    })
}

/// Block means `(D_lambda x)_n` over `(lambda(n-1), lambda(n)]`.
pub fn d_lambda(trace: &DistanceTrace, lambda: &IndexMethod) -> Result<MeanSeries> {
    let ends = lambda_prefix(trace, lambda)?;
    Ok(MeanSeries {
        kind: SeriesKind::Dlambda,
        method: lambda.label().into(),
        values: trace
            .rows()
            .iter()
            .map(|r| block_means(r, lambda_blocks(&ends)))
            .collect(),
        window_end: ends,
        max_deviation: None,
    })
}

/// Deferred Cesaro means over `(p(n), q(n)]`; every `q(n)` must fit the trace.
pub fn deferred(trace: &DistanceTrace, pq: &DeferredPair) -> Result<MeanSeries> {
    let n = pq.len();
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "deferred pair",
            reason: "no terms".into(),
        });
    }
    let windows: Vec<(u64, u64)> = (1..=n).map(|i| pq.window(i)).collect();
    if let Some(&(_, q)) = windows.iter().find(|w| w.1 > trace.horizon() as u64) {
        return Err(Error::HorizonExceeded {
            needed: q,
            available: trace.horizon() as u64,
        });
    }
    Ok(MeanSeries {
        kind: SeriesKind::Deferred,
        method: pq.label().into(),
        values: trace
            .rows()
            .iter()
            .map(|r| block_means(r, windows.iter().copied()))
            .collect(),
        window_end: windows.iter().map(|w| w.1).collect(),
        max_deviation: None,
    })
}

/// Strong means of `|d(x, A_k) - d(x, A)|^p`; `lambda` is ignored for `C1`.
pub fn strong_mean(
    trace: &DistanceTrace,
    method: StrongMethod,
    lambda: &IndexMethod,
    p: f64,
) -> Result<MeanSeries> {
    let dev = deviations(trace, p)?;
    let ends = match method {
        StrongMethod::C1 => (1..=trace.horizon() as u64).collect(),
        _ => lambda_prefix(trace, lambda)?,
    };
    let last = *ends.last().expect("nonempty") as usize;
    let target = trace.require_target()?;
    let max_deviation = trace
        .rows()
        .iter()
        .zip(target)
        .map(|(r, t)| r[..last].iter().map(|v| (v - t).abs()).fold(0.0, f64::max))
        .collect();
    let (kind, label, values) = match method {
        StrongMethod::Clambda => (
            SeriesKind::StrongClambda { p },
            lambda.label().to_string(),
            dev.iter().map(|r| running_means(r, &ends)).collect(),
        ),
        StrongMethod::C1 => (
            SeriesKind::StrongC1 { p },
            "n".to_string(),
            dev.iter().map(|r| running_means(r, &ends)).collect(),
        ),
        StrongMethod::Dlambda => (
            SeriesKind::StrongDlambda { p },
            lambda.label().to_string(),
            dev.iter()
                .map(|r| block_means(r, lambda_blocks(&ends)))
                .collect(),
        ),
    };
    Ok(MeanSeries {
        kind,
        method: label,
        window_end: ends,
        values,
        max_deviation: Some(max_deviation),
    })
}

/// `(A s)_n = sum_k a_nk s_k` for `n = 1..=series.n_horizon()`.
pub fn apply_row_matrix(rows: &dyn RowMatrix, series: &MeanSeries) -> Result<MeanSeries> {
    let horizon = series.n_horizon();
    let mut out = vec![Vec::with_capacity(horizon); series.num_probes()];
    for n in 1..=horizon {
        let row = rows.row(n)?;
        let support = row.support();
        if support > horizon {
            return Err(Error::SupportOverflow {
                row: n,
                support,
                horizon,
            });
        }
        for (p, dst) in out.iter_mut().enumerate() {
            let v = numeric::dot(row.entries.iter().map(|&(k, w)| (w, series.at(p, k))));
            dst.push(v);
        }
    }
    Ok(MeanSeries {
        kind: SeriesKind::Transformed,
        method: format!("{}({})", rows.label(), series.method),
        window_end: series.window_end.clone(),
        values: out,
        max_deviation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_methods::{parse_lambda, IdentityMatrix};

    fn scalar(v: Vec<f64>) -> DistanceTrace {
        DistanceTrace::scalar(v, None).unwrap()
    }

    fn ramp(n: usize) -> DistanceTrace {
        scalar((1..=n).map(|k| k as f64).collect())
    }

    fn alternating(n: usize) -> Vec<f64> {
        (1..=n).map(|k| if k % 2 == 1 { 2.0 } else { 0.0 }).collect()
    }

    #[test]
    fn c_lambda_examples() {
        let lam = parse_lambda("n^2", 10).unwrap();
        let c = c_lambda(&scalar(vec![3.5; 50]), &lam).unwrap();
        assert_eq!(c.n_horizon(), 7);
        assert!(c.values[0].iter().all(|&v| v == 3.5));

        let c = c_lambda(&scalar(alternating(100)), &parse_lambda("2n", 60).unwrap()).unwrap();
        assert_eq!(c.n_horizon(), 50);
        assert!(c.values[0].iter().all(|&v| v == 1.0));

        let c = c_lambda(&ramp(10), &lam).unwrap();
        assert_eq!(c.at(0, 2), 2.5);
    }

    #[test]
    fn d_lambda_examples() {
        let lam = parse_lambda("2^n", 3).unwrap();
        let d = d_lambda(&ramp(8), &lam).unwrap();
        assert_eq!(d.at(0, 3), 6.5);
        let d = d_lambda(&scalar(vec![0.25; 16]), &lam).unwrap();
        assert!(d.values[0].iter().all(|&v| v == 0.25));
        let t = ramp(20);
        let d = d_lambda(&t, &parse_lambda("n", 20).unwrap()).unwrap();
        assert_eq!(d.values[0], t.row(0));
    }

    #[test]
    fn deferred_examples() {
        let t = ramp(12);
        let pq = DeferredPair::from_fn("n,2n", 6, |n| n, |n| 2 * n).unwrap();
        assert_eq!(deferred(&t, &pq).unwrap().at(0, 3), 5.0);

        let c1pair = DeferredPair::from_fn("0,n", 12, |_| 0, |n| n).unwrap();
        assert_eq!(deferred(&t, &c1pair).unwrap().values, c1(&t).values);

        let lam = parse_lambda("n^2", 3).unwrap();
        let via_pair = deferred(&t, &DeferredPair::from_method(&lam)).unwrap();
        assert_eq!(via_pair.values, d_lambda(&t, &lam).unwrap().values);

        let too_long = DeferredPair::from_fn("n,2n", 7, |n| n, |n| 2 * n).unwrap();
        assert!(matches!(deferred(&t, &too_long), Err(Error::HorizonExceeded { .. })));
    }

    #[test]
    fn strong_examples() {
        let lam = parse_lambda("2n", 50).unwrap();
        let same = DistanceTrace::scalar(vec![1.5; 100], Some(1.5)).unwrap();
        let s = strong_mean(&same, StrongMethod::Clambda, &lam, 1.0).unwrap();
        assert!(s.values[0].iter().all(|&v| v == 0.0));

        let alt = DistanceTrace::scalar(alternating(100), Some(0.0)).unwrap();
        let s1 = strong_mean(&alt, StrongMethod::Clambda, &lam, 1.0).unwrap();
        assert!(s1.values[0].iter().all(|&v| v == 1.0));
        let s2 = strong_mean(&alt, StrongMethod::Clambda, &lam, 2.0).unwrap();
        assert!(s2.values[0].iter().all(|&v| v == 2.0));
        assert_eq!(s2.max_deviation.as_deref(), Some(&[2.0][..]));
        let sd = strong_mean(&alt, StrongMethod::Dlambda, &lam, 1.0).unwrap();
        assert!(sd.values[0].iter().all(|&v| v == 1.0));
        let sc = strong_mean(&alt, StrongMethod::C1, &lam, 1.0).unwrap();
        assert_eq!(sc.n_horizon(), 100);
        assert_eq!(sc.at(0, 1), 2.0);

        let no_target = scalar(vec![1.0; 10]);
        assert_eq!(
            strong_mean(&no_target, StrongMethod::Clambda, &lam, 1.0),
            Err(Error::MissingTarget)
        );
        assert!(strong_mean(&alt, StrongMethod::Clambda, &lam, 0.0).is_err());
    }

    #[test]
    fn identity_matrix_leaves_series() {
        let c = c1(&ramp(30));
        let out = apply_row_matrix(&IdentityMatrix, &c).unwrap();
        assert_eq!(out.values, c.values);
    }

    #[test]
    fn horizon_too_short() {
        let lam = parse_lambda("n+10", 3).unwrap();
        assert!(matches!(
            c_lambda(&ramp(5), &lam),
            Err(Error::HorizonExceeded { .. })
        ));
    }
}
