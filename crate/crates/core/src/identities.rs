//! Residuals of the exact algebraic relations between the means.
//!
//! Residuals are relative to the magnitude of the summed terms,
//! `|lhs - rhs| / max(|lhs|, |rhs|, sum |w_k s_k|)`, which is the scale at
//! which floating-point error enters a weighted sum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::numeric;
use crate::index_methods::{
    r_abs_row_sum_formula, r_matrix_row, t_matrix_row, DeferredPair, IndexMethod, RMatrix,
    RowMatrix, TMatrix,
};
use crate::metric_sets::{DistanceTrace, MetricPoint};
use crate::transforms::{self, MeanSeries, StrongMethod};

/// Largest residual of each identity over all probes and `n`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub lambda: String,
    pub n_horizon: usize,
    /// `(C_lambda x)_n` against `(C1 x)_{lambda(n)}`.
    pub subsequence: f64,
    /// `C_lambda = T D_lambda`, plain and strong (p = 1) means.
    pub t_convex: f64,
    /// `D_lambda = R C_lambda`.
    pub r_inversion: f64,
    /// `D_{0,n} = C1`.
    pub deferred_c1: f64,
    /// `D_{lambda(n-1),lambda(n)} = D_lambda`.
    pub deferred_d_lambda: f64,
    /// `|sum_k t_nk - 1|`.
    pub t_row_sum: f64,
    /// Relative gap between the R absolute row sum and its closed form.
    pub r_abs_row_sum: f64,
    /// Mean entries outside `[min, max]` of the values they average.
    pub monotone_bound_violations: usize,
}

impl IdentityResiduals {
    pub fn max_residual(&self) -> f64 {
        [
            self.subsequence,
            self.t_convex,
            self.r_inversion,
            self.deferred_c1,
            self.deferred_d_lambda,
            self.t_row_sum,
            self.r_abs_row_sum,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    fn merge(&mut self, other: &IdentityResiduals) {
        self.subsequence = self.subsequence.max(other.subsequence);
        self.t_convex = self.t_convex.max(other.t_convex);
        self.r_inversion = self.r_inversion.max(other.r_inversion);
        self.deferred_c1 = self.deferred_c1.max(other.deferred_c1);
        self.deferred_d_lambda = self.deferred_d_lambda.max(other.deferred_d_lambda);
        self.t_row_sum = self.t_row_sum.max(other.t_row_sum);
        self.r_abs_row_sum = self.r_abs_row_sum.max(other.r_abs_row_sum);
        self.monotone_bound_violations += other.monotone_bound_violations;
        self.n_horizon = self.n_horizon.max(other.n_horizon);
    }
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(scale);
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

/// Largest residual of `expected = A input` over every `(input, expected)`
/// pair, building each row of `A` once.
fn matrix_residual(rows: &dyn RowMatrix, pairs: &[(&MeanSeries, &MeanSeries)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let Some(horizon) = pairs.iter().map(|(i, _)| i.n_horizon()).min() else {
        return Ok(0.0);
    };
    for n in 1..=horizon {
        let row = rows.row(n)?;
        let support = row.support();
        if support > horizon {
            return Err(crate::Error::SupportOverflow {
                row: n,
                support,
                horizon,
            });
        }
        for (input, expected) in pairs {
            for p in 0..expected.num_probes() {
                let x = &input.values[p];
                let applied = numeric::dot(row.entries.iter().map(|&(k, w)| (w, x[k - 1])));
                let scale: f64 = row.entries.iter().map(|&(k, w)| (w * x[k - 1]).abs()).sum();
                worst = worst.max(rel(applied, expected.at(p, n), scale));
            }
        }
    }
    Ok(worst)
}

fn series_residual(a: &MeanSeries, b: &MeanSeries) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .flat_map(|(x, y)| x.iter().zip(y))
        .map(|(&x, &y)| rel(x, y, 0.0))
        .fold(0.0, f64::max)
}

/// Counts entries outside the range of the averaged values. A slack of a few
/// ulps is allowed for the final division.
fn bound_violations(trace: &DistanceTrace, series: &MeanSeries, windows: &[(u64, u64)]) -> usize {
    let mut count = 0;
    for (p, row) in trace.rows().iter().enumerate() {
        for (n, &(lo, hi)) in windows.iter().enumerate() {
            let w = &row[lo as usize..hi as usize];
            let min = w.iter().copied().fold(f64::INFINITY, f64::min);
            let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let slack = 8.0 * f64::EPSILON * max.abs().max(min.abs());
            let v = series.values[p][n];
            if v < min - slack || v > max + slack {
                count += 1;
            }
        }
    }
    count
}

/// Evaluates every identity for one trace and one index method.
pub fn identity_residuals(trace: &DistanceTrace, lambda: &IndexMethod) -> Result<IdentityResiduals> {
    let c1 = transforms::c1(trace);
    let c = transforms::c_lambda(trace, lambda)?;
    let d = transforms::d_lambda(trace, lambda)?;
    let n_h = c.n_horizon();

    let mut out = IdentityResiduals {
        lambda: lambda.label().into(),
        n_horizon: n_h,
        ..Default::default()
    };

    for p in 0..trace.num_probes() {
        for n in 1..=n_h {
            let k = lambda.get(n)? as usize;
            out.subsequence = out.subsequence.max(rel(c.at(p, n), c1.at(p, k), 0.0));
        }
    }

    let strong = if trace.target_row().is_some() {
        Some((
            transforms::strong_mean(trace, StrongMethod::Dlambda, lambda, 1.0)?,
            transforms::strong_mean(trace, StrongMethod::Clambda, lambda, 1.0)?,
        ))
    } else {
        None
    };
    let mut t_pairs = vec![(&d, &c)];
    if let Some((sd, sc)) = &strong {
        t_pairs.push((sd, sc));
    }
    out.t_convex = matrix_residual(&TMatrix(lambda), &t_pairs)?;
    out.r_inversion = matrix_residual(&RMatrix(lambda), &[(&c, &d)])?;

    let n = trace.horizon();
    let c1_pair = DeferredPair::from_fn("0,n", n, |_| 0, |k| k)?;
    out.deferred_c1 = series_residual(&transforms::deferred(trace, &c1_pair)?, &c1);
    let d_pair = DeferredPair::from_method(&IndexMethod::from_values(
        lambda.label(),
        lambda.values()[..n_h].to_vec(),
    )?);
    out.deferred_d_lambda = series_residual(&transforms::deferred(trace, &d_pair)?, &d);

    for n in 1..=n_h {
        let t_sum: f64 = crate::numeric::sum(t_matrix_row(lambda, n)?);
        out.t_row_sum = out.t_row_sum.max((t_sum - 1.0).abs());
        let r_abs = r_matrix_row(lambda, n)?.abs_sum();
        let formula = r_abs_row_sum_formula(lambda, n)?;
        out.r_abs_row_sum = out.r_abs_row_sum.max(rel(r_abs, formula, 0.0));
    }

    let prefix: Vec<(u64, u64)> = c.window_end.iter().map(|&e| (0, e)).collect();
    let blocks: Vec<(u64, u64)> = (1..=n_h)
        .map(|i| Ok((lambda.get(i - 1)?, lambda.get(i)?)))
        .collect::<Result<_>>()?;
    out.monotone_bound_violations =
        bound_violations(trace, &c, &prefix) + bound_violations(trace, &d, &blocks);
    Ok(out)
}

/// Random bounded trace: values uniform in `[0, max_value]`, target uniform
/// in the same range, `probes` synthetic 1-d probes.
pub fn random_trace(rng: &mut impl Rng, horizon: usize, probes: usize, max_value: f64) -> DistanceTrace {
    let rows = (0..probes)
        .map(|_| (0..horizon).map(|_| rng.random_range(0.0..=max_value)).collect())
        .collect();
    let target = (0..probes).map(|_| rng.random_range(0.0..=max_value)).collect();
    let pts = (0..probes).map(|i| MetricPoint::new(vec![i as f64]).expect("finite")).collect();
    DistanceTrace::from_rows(pts, rows, Some(target)).expect("generated values are valid")
}

/// Summary of an identity run over many random traces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySuite {
    pub seed: u64,
    pub traces: usize,
    pub horizon: usize,
    pub per_lambda: Vec<IdentityResiduals>,
    pub max_residual: f64,
}

/// Runs [`identity_residuals`] on `traces` random traces per method. Trace
/// horizons are drawn uniformly from `[horizon / 2, horizon]`.
pub fn identity_suite(
    methods: &[IndexMethod],
    traces: usize,
    horizon: usize,
    seed: u64,
) -> Result<IdentitySuite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_lambda: Vec<IdentityResiduals> = methods
        .iter()
        .map(|m| IdentityResiduals {
            lambda: m.label().into(),
            ..Default::default()
        })
        .collect();
    for _ in 0..traces {
        let n = rng.random_range((horizon / 2).max(1)..=horizon);
        let t = random_trace(&mut rng, n, 2, 10.0);
        for (m, acc) in methods.iter().zip(per_lambda.iter_mut()) {
            let r = identity_residuals(&t, m)?;
            acc.merge(&r);
        }
    }
    let max_residual = per_lambda
        .iter()
        .map(IdentityResiduals::max_residual)
        .fold(0.0, f64::max);
    Ok(IdentitySuite {
        seed,
        traces,
        horizon,
        per_lambda,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_methods::{lambda_for_horizon, parse_lambda};

    #[test]
    fn identities_hold_on_a_random_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_trace(&mut rng, 500, 2, 10.0);
        for src in ["n", "2n", "n^2", "2^n"] {
            let r = identity_residuals(&t, &lambda_for_horizon(src, 500, 0).unwrap()).unwrap();
            assert!(r.max_residual() < 1e-12, "{src}: {r:?}");
            assert_eq!(r.monotone_bound_violations, 0);
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let methods = [parse_lambda("n^2", 50).unwrap()];
        let a = identity_suite(&methods, 3, 200, 7).unwrap();
        let b = identity_suite(&methods, 3, 200, 7).unwrap();
        assert_eq!(a, b);
    }
}
