//! epsilon-exceedance counts and (C_lambda-)statistical densities, plus the
//! two per-n inequalities linking densities to strong means:
//!
//! * Chebyshev: `eps^p * density(n) <= strong_p(n)`
//! * bounded split: `strong_p(n) <= alpha^p * density(n) + eps^p`
//!
//! Ties `|x_k - L| = eps` count as exceedances.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index_methods::IndexMethod;
use crate::metric_sets::DistanceTrace;
use crate::transforms::{MeanSeries, SeriesKind};

/// Slack allowed in the per-n inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-12;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("{eps} is not a positive real"),
        })
    }
}

fn exceed_flags(row: &[f64], target: f64, eps: f64) -> impl Iterator<Item = bool> + '_ {
    row.iter().map(move |v| (v - target).abs() >= eps)
}

/// Per-probe `#{k <= upto : |d(x, A_k) - d(x, A)| >= eps}`.
pub fn exceed_count(trace: &DistanceTrace, eps: f64, upto: usize) -> Result<Vec<usize>> {
    check_eps(eps)?;
    let target = trace.require_target()?;
    if upto > trace.horizon() {
        return Err(Error::HorizonExceeded {
            needed: upto as u64,
            available: trace.horizon() as u64,
        });
    }
    Ok(trace
        .rows()
        .iter()
        .zip(target)
        .map(|(row, &t)| exceed_flags(&row[..upto], t, eps).filter(|&b| b).count())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySeries {
    pub eps: f64,
    pub method: String,
    /// `lambda(n)` for `n = 1..=n_horizon`.
    pub window_end: Vec<u64>,
    /// `counts[probe][n - 1]`, exact.
    pub counts: Vec<Vec<usize>>,
    /// `counts / lambda(n)`.
    pub values: Vec<Vec<f64>>,
}

impl DensitySeries {
    pub fn n_horizon(&self) -> usize {
        self.window_end.len()
    }

    pub fn at(&self, probe: usize, n: usize) -> f64 {
        self.values[probe][n - 1]
    }
}

/// `(1/lambda(n)) #{k <= lambda(n) : |d(x, A_k) - d(x, A)| >= eps}`;
/// `lambda(n) = n` gives the plain statistical density.
pub fn c_lambda_stat_density(trace: &DistanceTrace, lambda: &IndexMethod, eps: f64) -> Result<DensitySeries> {
    check_eps(eps)?;
    let target = trace.require_target()?;
    let n_h = lambda.n_horizon(trace.horizon());
    if n_h == 0 {
        return Err(Error::HorizonExceeded {
            needed: lambda.get(1)?,
            available: trace.horizon() as u64,
        });
    }
    let ends = &lambda.values()[..n_h];
    let mut counts = Vec::with_capacity(trace.num_probes());
    for (row, &t) in trace.rows().iter().zip(target) {
        let mut running = 0usize;
        let mut k = 0usize;
        let mut flags = exceed_flags(row, t, eps);
        let probe_counts: Vec<usize> = ends
            .iter()
            .map(|&end| {
                while k < end as usize {
                    if flags.next().expect("end <= horizon") {
                        running += 1;
                    }
                    k += 1;
                }
                running
            })
            .collect();
        counts.push(probe_counts);
    }
    let values = counts
        .iter()
        .map(|c| c.iter().zip(ends).map(|(&c, &e)| c as f64 / e as f64).collect())
        .collect();
    Ok(DensitySeries {
        eps,
        method: lambda.label().into(),
        window_end: ends.to_vec(),
        counts,
        values,
    })
}

/// Outcome of a per-n inequality over all probes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub holds: bool,
    /// `rhs - lhs` minimized over probes and `n`.
    pub min_slack: f64,
    /// `(probe, n)` of the first violation.
    pub first_violation: Option<(usize, usize)>,
    pub checked: usize,
    /// Per-probe `rhs - lhs`, indexed by `n - 1`.
    #[serde(skip)]
    pub slack: Vec<Vec<f64>>,
}

fn check_aligned(strong: &MeanSeries, density: &DensitySeries, eps: f64, p: f64) -> Result<()> {
    let power = match strong.kind {
        SeriesKind::StrongClambda { p } => p,
        other => {
            return Err(Error::MetadataMismatch(format!(
                "expected a strong C_lambda series, got {}",
                other.name()
            )))
        }
    };
    if power != p {
        return Err(Error::MetadataMismatch(format!("series power {power} != p = {p}")));
    }
    if density.eps != eps {
        return Err(Error::MetadataMismatch(format!(
            "density eps {} != eps = {eps}",
            density.eps
        )));
    }
    if strong.window_end != density.window_end || strong.values.len() != density.values.len() {
        return Err(Error::MetadataMismatch(
            "strong mean and density use different lambda or probes".into(),
        ));
    }
    Ok(())
}

fn inequality(
    strong: &MeanSeries,
    density: &DensitySeries,
    slack_of: impl Fn(usize, f64, f64) -> f64,
) -> InequalityReport {
    let mut min_slack = f64::INFINITY;
    let mut first_violation = None;
    let mut checked = 0;
    let slack: Vec<Vec<f64>> = (0..strong.num_probes())
        .map(|p| {
            (1..=strong.n_horizon())
                .map(|n| {
                    let s = slack_of(p, strong.at(p, n), density.at(p, n));
                    checked += 1;
                    if s < min_slack {
                        min_slack = s;
                    }
                    if s < -INEQUALITY_SLACK && first_violation.is_none() {
                        first_violation = Some((p, n));
                    }
                    s
                })
                .collect()
        })
        .collect();
    InequalityReport {
        holds: first_violation.is_none(),
        min_slack,
        first_violation,
        checked,
        slack,
    }
}

/// `eps^p * density(n) <= strong(n)` for every probe and `n`.
pub fn chebyshev_check(strong: &MeanSeries, density: &DensitySeries, eps: f64, p: f64) -> Result<InequalityReport> {
    check_aligned(strong, density, eps, p)?;
    let scale = eps.powf(p);
    Ok(inequality(strong, density, |_, s, d| s - scale * d))
}

/// `strong(n) <= alpha^p * density(n) + eps^p`, with `alpha[probe]` bounding
/// every deviation.
pub fn bounded_split_check(
    strong: &MeanSeries,
    density: &DensitySeries,
    eps: f64,
    p: f64,
    alpha: &[f64],
) -> Result<InequalityReport> {
    check_aligned(strong, density, eps, p)?;
    if alpha.len() != strong.num_probes() {
        return Err(Error::MetadataMismatch(format!(
            "{} alpha values for {} probes",
            alpha.len(),
            strong.num_probes()
        )));
    }
    if let Some(observed) = &strong.max_deviation {
        for (probe, (&a, &o)) in alpha.iter().zip(observed).enumerate() {
            if a < o {
                return Err(Error::BoundTooSmall {
                    probe,
                    alpha: a,
                    observed: o,
                });
            }
        }
    }
    let eps_p = eps.powf(p);
    let alpha_p: Vec<f64> = alpha.iter().map(|a| a.powf(p)).collect();
    Ok(inequality(strong, density, |probe, s, d| alpha_p[probe] * d + eps_p - s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_methods::parse_lambda;
    use crate::transforms::{strong_mean, StrongMethod};

    fn alternating(n: usize) -> DistanceTrace {
        let v = (1..=n).map(|k| if k % 2 == 1 { 2.0 } else { 0.0 }).collect();
        DistanceTrace::scalar(v, Some(0.0)).unwrap()
    }

    fn spike(n: u64) -> DistanceTrace {
        let v = (1..=n)
            .map(|k| {
                let r = (k as f64).sqrt() as u64;
                if r * r == k {
                    k as f64
                } else {
                    0.0
                }
            })
            .collect();
        DistanceTrace::scalar(v, Some(0.0)).unwrap()
    }

    #[test]
    fn counts() {
        let same = DistanceTrace::scalar(vec![3.0; 20], Some(3.0)).unwrap();
        assert_eq!(exceed_count(&same, 0.1, 20).unwrap(), vec![0]);
        assert_eq!(exceed_count(&alternating(20), 1.0, 10).unwrap(), vec![5]);
        assert_eq!(exceed_count(&spike(10_000), 0.5, 10_000).unwrap(), vec![100]);
        // ties count
        assert_eq!(exceed_count(&alternating(4), 2.0, 4).unwrap(), vec![2]);
        assert!(exceed_count(&alternating(4), 1.0, 5).is_err());
        assert!(exceed_count(&alternating(4), 0.0, 4).is_err());
        let no_target = DistanceTrace::scalar(vec![1.0], None).unwrap();
        assert_eq!(exceed_count(&no_target, 1.0, 1), Err(Error::MissingTarget));
    }

    #[test]
    fn densities() {
        let id = parse_lambda("n", 10_000).unwrap();
        let d = c_lambda_stat_density(&spike(10_000), &id, 0.5).unwrap();
        assert_eq!(d.at(0, 10_000), 0.01);

        let d = c_lambda_stat_density(&alternating(100), &parse_lambda("2n", 50).unwrap(), 1.0).unwrap();
        assert!(d.values[0].iter().all(|&v| v == 0.5));

        let same = DistanceTrace::scalar(vec![3.0; 20], Some(3.0)).unwrap();
        let d = c_lambda_stat_density(&same, &parse_lambda("n^2", 5).unwrap(), 0.1).unwrap();
        assert!(d.values[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn inequalities_on_alternating() {
        let t = alternating(100);
        let lam = parse_lambda("2n", 50).unwrap();
        let strong = strong_mean(&t, StrongMethod::Clambda, &lam, 1.0).unwrap();
        let dens = c_lambda_stat_density(&t, &lam, 1.0).unwrap();
        let cheb = chebyshev_check(&strong, &dens, 1.0, 1.0).unwrap();
        assert!(cheb.holds);
        assert_eq!(cheb.min_slack, 0.5);
        let split = bounded_split_check(&strong, &dens, 1.0, 1.0, &[2.0]).unwrap();
        assert!(split.holds);
        assert_eq!(split.min_slack, 1.0);
        assert!(matches!(
            bounded_split_check(&strong, &dens, 1.0, 1.0, &[1.5]),
            Err(Error::BoundTooSmall { .. })
        ));
    }

    #[test]
    fn identical_trace_inequalities() {
        let t = DistanceTrace::scalar(vec![1.0; 30], Some(1.0)).unwrap();
        let lam = parse_lambda("n", 30).unwrap();
        let strong = strong_mean(&t, StrongMethod::Clambda, &lam, 2.0).unwrap();
        let dens = c_lambda_stat_density(&t, &lam, 0.5).unwrap();
        assert_eq!(chebyshev_check(&strong, &dens, 0.5, 2.0).unwrap().min_slack, 0.0);
        assert_eq!(
            bounded_split_check(&strong, &dens, 0.5, 2.0, &[0.0]).unwrap().min_slack,
            0.25
        );
    }

    #[test]
    fn metadata_mismatch() {
        let t = alternating(100);
        let lam = parse_lambda("2n", 50).unwrap();
        let strong = strong_mean(&t, StrongMethod::Clambda, &lam, 1.0).unwrap();
        let dens = c_lambda_stat_density(&t, &parse_lambda("n", 100).unwrap(), 1.0).unwrap();
        assert!(matches!(
            chebyshev_check(&strong, &dens, 1.0, 1.0),
            Err(Error::MetadataMismatch(_))
        ));
        let dens = c_lambda_stat_density(&t, &lam, 1.0).unwrap();
        assert!(chebyshev_check(&strong, &dens, 1.0, 2.0).is_err());
        assert!(chebyshev_check(&strong, &dens, 0.5, 1.0).is_err());
        let dstrong = strong_mean(&t, StrongMethod::Dlambda, &lam, 1.0).unwrap();
        assert!(chebyshev_check(&dstrong, &dens, 1.0, 1.0).is_err());
    }
}
