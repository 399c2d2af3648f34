//! Closed subsets of Euclidean space and the Wijsman distance functional.
//!
//! A set sequence `{A_k}` is observed through the scalar sequences
//! `k -> d(x, A_k)` at a finite set of probe points `x`; the
//! [`DistanceTrace`] materializes those sequences up to a horizon and is the
//! input to every transform, density and verdict in the crate.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// A point of real d-space with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricPoint(Vec<f64>);

impl MetricPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidShape("point with zero dimensions".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        Ok(Self(coords))
    }

    /// The origin of d-space.
    pub fn origin(dim: usize) -> Self {
        Self(vec![0.0; dim.max(1)])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Euclidean distance. Callers guarantee equal dimensions.
    pub fn dist(&self, other: &MetricPoint) -> f64 {
        euclid(&self.0, &other.0)
    }
}

impl fmt::Display for MetricPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// User-supplied distance function, declared nonnegative and 1-Lipschitz.
#[derive(Clone)]
pub struct DistanceOracle {
    label: String,
    dim: usize,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl DistanceOracle {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            dim,
            f: Arc::new(f),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for DistanceOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistanceOracle")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

/// A nonempty closed subset of Euclidean d-space.
///
/// Construct through the checked constructors; they enforce the shape
/// invariants (nonnegative radius, `lo <= hi`, unit hyperplane normal).
#[derive(Debug, Clone)]
pub enum ClosedSet {
    Singleton(MetricPoint),
    FinitePointSet(Vec<MetricPoint>),
    Ball { center: MetricPoint, radius: f64 },
    Sphere { center: MetricPoint, radius: f64 },
    AxisBox { lo: MetricPoint, hi: MetricPoint },
    /// `{x : normal . x = offset}` with `|normal| = 1`.
    Hyperplane { normal: MetricPoint, offset: f64 },
    Oracle(DistanceOracle),
}

impl ClosedSet {
    pub fn singleton(p: MetricPoint) -> Self {
        ClosedSet::Singleton(p)
    }

    pub fn points(points: Vec<MetricPoint>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidShape("empty finite point set".into()));
        };
        let dim = first.dim();
        if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(ClosedSet::FinitePointSet(points))
    }

    pub fn ball(center: MetricPoint, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::InvalidShape(format!("ball radius {radius}")));
        }
        Ok(ClosedSet::Ball { center, radius })
    }

    pub fn sphere(center: MetricPoint, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidShape(format!("sphere radius {radius}")));
        }
        Ok(ClosedSet::Sphere { center, radius })
    }

    pub fn axis_box(lo: MetricPoint, hi: MetricPoint) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch {
                expected: lo.dim(),
                got: hi.dim(),
            });
        }
        if lo.coords().iter().zip(hi.coords()).any(|(l, h)| l > h) {
            return Err(Error::InvalidShape("box with lo > hi".into()));
        }
        Ok(ClosedSet::AxisBox { lo, hi })
    }

    /// Hyperplane `{x : n . x = offset}`; `normal` is rescaled to unit length
    /// and the offset with it.
    pub fn hyperplane(normal: MetricPoint, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::NonFinite("hyperplane offset"));
        }
        let len = normal.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
        if len == 0.0 {
            return Err(Error::InvalidShape("hyperplane with zero normal".into()));
        }
        let unit = normal.coords().iter().map(|c| c / len).collect();
        Ok(ClosedSet::Hyperplane {
            normal: MetricPoint(unit),
            offset: offset / len,
        })
    }

    pub fn oracle(oracle: DistanceOracle) -> Self {
        ClosedSet::Oracle(oracle)
    }

    pub fn dim(&self) -> usize {
        match self {
            ClosedSet::Singleton(p) => p.dim(),
            ClosedSet::FinitePointSet(ps) => ps[0].dim(),
            ClosedSet::Ball { center, .. } | ClosedSet::Sphere { center, .. } => center.dim(),
            ClosedSet::AxisBox { lo, .. } => lo.dim(),
            ClosedSet::Hyperplane { normal, .. } => normal.dim(),
            ClosedSet::Oracle(o) => o.dim,
        }
    }

    /// Short human-readable description, used in reports.
    pub fn describe(&self) -> String {
        match self {
            ClosedSet::Singleton(p) => format!("point{p}"),
            ClosedSet::FinitePointSet(ps) => {
                let inner: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                format!("points({})", inner.join(";"))
            }
            ClosedSet::Ball { center, radius } => format!("ball({center},{radius})"),
            ClosedSet::Sphere { center, radius } => format!("sphere({center},{radius})"),
            ClosedSet::AxisBox { lo, hi } => format!("box({lo},{hi})"),
            ClosedSet::Hyperplane { normal, offset } => format!("hyperplane({normal},{offset})"),
            ClosedSet::Oracle(o) => format!("oracle({})", o.label),
        }
    }
}

/// `d(x, A) = inf_{a in A} |x - a|`, closed form per shape.
pub fn distance(x: &MetricPoint, set: &ClosedSet) -> Result<f64> {
    if set.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: x.dim(),
        });
    }
    let xs = x.coords();
    let d = match set {
        ClosedSet::Singleton(p) => euclid(xs, p.coords()),
        ClosedSet::FinitePointSet(ps) => ps
            .iter()
            .map(|p| euclid(xs, p.coords()))
            .fold(f64::INFINITY, f64::min),
        ClosedSet::Ball { center, radius } => (euclid(xs, center.coords()) - radius).max(0.0),
        ClosedSet::Sphere { center, radius } => (euclid(xs, center.coords()) - radius).abs(),
        ClosedSet::AxisBox { lo, hi } => xs
            .iter()
            .zip(lo.coords().iter().zip(hi.coords()))
            .map(|(&c, (&l, &h))| {
                let gap = (l - c).max(c - h).max(0.0);
                gap * gap
            })
            .sum::<f64>()
            .sqrt(),
        ClosedSet::Hyperplane { normal, offset } => {
            let proj: f64 = xs.iter().zip(normal.coords()).map(|(a, b)| a * b).sum();
            (proj - offset).abs()
        }
        ClosedSet::Oracle(o) => {
            let v = (o.f)(xs);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidShape(format!(
                    "oracle `{}` returned {v} at {x}",
                    o.label
                )));
            }
            v
        }
    };
    Ok(d)
}

type Generator = Arc<dyn Fn(u64) -> ClosedSet + Send + Sync>;

/// Deterministic indexed family `k -> A_k`, `k >= 1`.
#[derive(Clone)]
pub struct SetSequence {
    pub label: String,
    generator: Generator,
    pub bounded_hint: Option<bool>,
}

impl SetSequence {
    pub fn new(
        label: impl Into<String>,
        generator: impl Fn(u64) -> ClosedSet + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            generator: Arc::new(generator),
            bounded_hint: None,
        }
    }

    pub fn with_bounded_hint(mut self, bounded: bool) -> Self {
        self.bounded_hint = Some(bounded);
        self
    }

    /// The set `A_k`. Panics on `k = 0`.
    pub fn at(&self, k: u64) -> ClosedSet {
        assert!(k >= 1, "set sequences are indexed from k = 1");
        (self.generator)(k)
    }
}

impl fmt::Debug for SetSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetSequence")
            .field("label", &self.label)
            .field("bounded_hint", &self.bounded_hint)
            .finish_non_exhaustive()
    }
}

/// Matrix of `d(x_p, A_k)` for probes `p` and `k = 1..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTrace {
    probes: Vec<MetricPoint>,
    values: Vec<Vec<f64>>,
    target_row: Option<Vec<f64>>,
}

impl DistanceTrace {
    /// Builds a trace from already-computed rows, e.g. a re-ingested CSV.
    pub fn from_rows(
        probes: Vec<MetricPoint>,
        values: Vec<Vec<f64>>,
        target_row: Option<Vec<f64>>,
    ) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::InvalidTrace("no probes".into()));
        }
        if values.len() != probes.len() {
            return Err(Error::InvalidTrace(format!(
                "{} rows for {} probes",
                values.len(),
                probes.len()
            )));
        }
        let horizon = values[0].len();
        if horizon == 0 {
            return Err(Error::InvalidTrace("empty horizon".into()));
        }
        for (p, row) in values.iter().enumerate() {
            if row.len() != horizon {
                return Err(Error::InvalidTrace(format!(
                    "row {p} has length {}, expected {horizon}",
                    row.len()
                )));
            }
            if let Some(k) = row.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidTrace(format!(
                    "value {} at probe {p}, k = {}",
                    row[k],
                    k + 1
                )));
            }
        }
        if let Some(t) = &target_row {
            if t.len() != probes.len() || t.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidTrace("malformed target row".into()));
            }
        }
        Ok(Self {
            probes,
            values,
            target_row,
        })
    }

    /// A single scalar sequence `x_1..x_N` with optional limit `L`, viewed as a
    /// trace with one synthetic probe.
    pub fn scalar(values: Vec<f64>, limit: Option<f64>) -> Result<Self> {
        Self::from_rows(vec![MetricPoint::origin(1)], vec![values], limit.map(|l| vec![l]))
    }

    pub fn probes(&self) -> &[MetricPoint] {
        &self.probes
    }

    pub fn num_probes(&self) -> usize {
        self.probes.len()
    }

    pub fn horizon(&self) -> usize {
        self.values[0].len()
    }

    /// Row for probe `p`; entry `k - 1` holds `d(x_p, A_k)`.
    pub fn row(&self, p: usize) -> &[f64] {
        &self.values[p]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn target_row(&self) -> Option<&[f64]> {
        self.target_row.as_deref()
    }

    pub fn require_target(&self) -> Result<&[f64]> {
        self.target_row().ok_or(Error::MissingTarget)
    }

    /// `|d(x_p, A_k) - d(x_p, A)|` for every probe, as a target-free trace.
    pub fn deviation_trace(&self) -> Result<DistanceTrace> {
        let target = self.require_target()?;
        let values = self
            .values
            .iter()
            .zip(target)
            .map(|(row, t)| row.iter().map(|v| (v - t).abs()).collect())
            .collect();
        Ok(Self {
            probes: self.probes.clone(),
            values,
            target_row: None,
        })
    }

    /// Prefix of the first `n` indices.
    pub fn truncated(&self, n: usize) -> Result<DistanceTrace> {
        if n == 0 || n > self.horizon() {
            return Err(Error::HorizonExceeded {
                needed: n as u64,
                available: self.horizon() as u64,
            });
        }
        Ok(Self {
            probes: self.probes.clone(),
            values: self.values.iter().map(|r| r[..n].to_vec()).collect(),
            target_row: self.target_row.clone(),
        })
    }
}

/// Materializes `d(x, A_k)` for every probe and `k = 1..=horizon`.
pub fn trace(
    seq: &SetSequence,
    probes: &[MetricPoint],
    horizon: usize,
    target: Option<&ClosedSet>,
) -> Result<DistanceTrace> {
    if horizon == 0 {
        return Err(Error::InvalidParameter {
            name: "horizon",
            reason: "must be at least 1".into(),
        });
    }
    if probes.is_empty() {
        return Err(Error::InvalidTrace("no probes".into()));
    }
    let mut values = vec![Vec::with_capacity(horizon); probes.len()];
    for k in 1..=horizon as u64 {
        let set = seq.at(k);
        for (row, x) in values.iter_mut().zip(probes) {
            row.push(distance(x, &set)?);
        }
    }
    let target_row = target
        .map(|a| probes.iter().map(|x| distance(x, a)).collect::<Result<Vec<_>>>())
        .transpose()?;
    Ok(DistanceTrace {
        probes: probes.to_vec(),
        values,
        target_row,
    })
}

/// Finite-horizon supremum of one probe's row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundEstimate {
    pub sup: f64,
    /// First index attaining the supremum.
    pub argmax: usize,
    pub unbounded_suspect: bool,
}

/// Relative growth of the running supremum over the last decade of indices
/// that flags a probe as possibly unbounded.
pub const UNBOUNDED_GROWTH_TOL: f64 = 1e-2;

/// Per-probe `sup_{k <= N} d(x, A_k)`, with a growth flag: the probe is
/// suspect when the supremum over `(N/10, N]` exceeds the supremum over
/// `[1, N/10]` by more than [`UNBOUNDED_GROWTH_TOL`] relative.
pub fn bounded_estimate(trace: &DistanceTrace) -> Vec<BoundEstimate> {
    let n = trace.horizon();
    let head_len = n / 10;
    trace
        .rows()
        .iter()
        .map(|row| {
            let (argmax, sup) = row
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                    if v > bv {
                        (i, v)
                    } else {
                        (bi, bv)
                    }
                });
            let unbounded_suspect = if head_len == 0 {
                false
            } else {
                let head = row[..head_len].iter().copied().fold(0.0, f64::max);
                let tail = row[head_len..].iter().copied().fold(0.0, f64::max);
                tail > head * (1.0 + UNBOUNDED_GROWTH_TOL) && tail - head > 1e-12
            };
            BoundEstimate {
                sup,
                argmax: argmax + 1,
                unbounded_suspect,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> MetricPoint {
        MetricPoint::new(c.to_vec()).unwrap()
    }

    /// Grid-sampling oracle: minimum of |x - a| over a dense sample of the
    /// shape, with the sample refined until successive minima agree to 1e-6.
    fn sampled_ball_distance(x: &[f64], center: &[f64], r: f64) -> f64 {
        let mut prev = f64::INFINITY;
        let mut m = 64usize;
        loop {
            let mut best = f64::INFINITY;
            for i in 0..=m {
                for j in 0..=m {
                    let a = center[0] - r + 2.0 * r * i as f64 / m as f64;
                    let b = center[1] - r + 2.0 * r * j as f64 / m as f64;
                    if (a - center[0]).powi(2) + (b - center[1]).powi(2) <= r * r {
                        best = best.min(((x[0] - a).powi(2) + (x[1] - b).powi(2)).sqrt());
                    }
                }
            }
            if (prev - best).abs() < 1e-6 {
                return best;
            }
            prev = best;
            m *= 2;
        }
    }

    #[test]
    fn point_distances() {
        let s = ClosedSet::singleton(pt(&[1.0, 0.0]));
        assert_eq!(distance(&pt(&[1.0, 0.0]), &s).unwrap(), 0.0);
        assert_eq!(distance(&pt(&[0.0, 0.0]), &s).unwrap(), 1.0);
    }

    #[test]
    fn ball_distance_matches_sampling() {
        let ball = ClosedSet::ball(pt(&[3.0, 0.0]), 1.0).unwrap();
        let d = distance(&pt(&[0.0, 0.0]), &ball).unwrap();
        assert_eq!(d, 2.0);
        let oracle = sampled_ball_distance(&[0.0, 0.0], &[3.0, 0.0], 1.0);
        assert!((d - oracle).abs() < 1e-6, "{d} vs {oracle}");
    }

    #[test]
    fn other_shapes() {
        let sphere = ClosedSet::sphere(pt(&[0.0, 0.0]), 2.0).unwrap();
        assert_eq!(distance(&pt(&[0.5, 0.0]), &sphere).unwrap(), 1.5);
        let bx = ClosedSet::axis_box(pt(&[0.0, 0.0]), pt(&[1.0, 1.0])).unwrap();
        assert_eq!(distance(&pt(&[4.0, 5.0]), &bx).unwrap(), 5.0);
        assert_eq!(distance(&pt(&[0.5, 0.5]), &bx).unwrap(), 0.0);
        let plane = ClosedSet::hyperplane(pt(&[2.0, 0.0]), 0.0).unwrap();
        assert_eq!(distance(&pt(&[-3.0, 7.0]), &plane).unwrap(), 3.0);
        let pts = ClosedSet::points(vec![pt(&[0.0, 0.0]), pt(&[10.0, 0.0])]).unwrap();
        assert_eq!(distance(&pt(&[7.0, 0.0]), &pts).unwrap(), 3.0);
    }

    #[test]
    fn shape_errors() {
        assert!(ClosedSet::ball(pt(&[0.0]), -1.0).is_err());
        assert!(ClosedSet::sphere(pt(&[0.0]), 0.0).is_err());
        assert!(ClosedSet::axis_box(pt(&[1.0]), pt(&[0.0])).is_err());
        assert!(ClosedSet::hyperplane(pt(&[0.0, 0.0]), 1.0).is_err());
        assert!(ClosedSet::points(vec![]).is_err());
        assert!(MetricPoint::new(vec![f64::NAN]).is_err());
        let s = ClosedSet::singleton(pt(&[0.0, 0.0]));
        assert!(matches!(
            distance(&pt(&[0.0]), &s),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn oracle_must_return_nonnegative() {
        let o = ClosedSet::oracle(DistanceOracle::new("bad", 1, |_| -1.0));
        assert!(distance(&pt(&[0.0]), &o).is_err());
        let o = ClosedSet::oracle(DistanceOracle::new("abs", 1, |x| x[0].abs()));
        assert_eq!(distance(&pt(&[-2.0]), &o).unwrap(), 2.0);
    }

    #[test]
    fn constant_and_alternating_traces() {
        let constant = SetSequence::new("c", |_| ClosedSet::singleton(pt(&[0.0, 0.0])));
        let t = trace(&constant, &[pt(&[3.0, 4.0])], 5, None).unwrap();
        assert_eq!(t.row(0), &[5.0; 5]);

        let alt = SetSequence::new("alt", |k| {
            let x = if k % 2 == 0 { 1.0 } else { -1.0 };
            ClosedSet::singleton(pt(&[x, 0.0]))
        });
        let t = trace(&alt, &[pt(&[1.0, 0.0])], 4, None).unwrap();
        assert_eq!(t.row(0), &[2.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn circle_family_approaches_axis_distance() {
        let circles = SetSequence::new("circles", |k| {
            ClosedSet::sphere(pt(&[k as f64, 0.0]), k as f64).unwrap()
        });
        let t = trace(&circles, &[pt(&[2.0, 1.0])], 10_000, None).unwrap();
        for (i, &v) in t.row(0).iter().enumerate() {
            let k = (i + 1) as f64;
            let closed = (((2.0 - k) * (2.0 - k) + 1.0).sqrt() - k).abs();
            assert!((v - closed).abs() < 1e-12);
        }
        // k - sqrt((k-2)^2 + 1) = 2 - 1/(2k) + O(1/k^2)
        let last = t.row(0)[9_999];
        assert!((last - 2.0).abs() < 1e-3);
        assert!((last - (2.0 - 1.0 / (2.0 * 9_998.0))).abs() < 1e-7);
    }

    #[test]
    fn bounded_estimates() {
        let c = DistanceTrace::scalar(vec![5.0; 100], None).unwrap();
        let b = bounded_estimate(&c)[0];
        assert_eq!((b.sup, b.unbounded_suspect), (5.0, false));

        let alt: Vec<f64> = (1..=100).map(|k| if k % 2 == 1 { 2.0 } else { 0.0 }).collect();
        let b = bounded_estimate(&DistanceTrace::scalar(alt, None).unwrap())[0];
        assert_eq!((b.sup, b.unbounded_suspect), (2.0, false));

        let spike: Vec<f64> = (1..=10_000u64)
            .map(|k| {
                let r = (k as f64).sqrt().round() as u64;
                if r * r == k {
                    k as f64
                } else {
                    0.0
                }
            })
            .collect();
        let b = bounded_estimate(&DistanceTrace::scalar(spike, None).unwrap())[0];
        assert_eq!(b.sup, 10_000.0);
        assert_eq!(b.argmax, 10_000);
        assert!(b.unbounded_suspect);
    }

    #[test]
    fn from_rows_validation() {
        let p = vec![pt(&[0.0])];
        assert!(DistanceTrace::from_rows(p.clone(), vec![vec![-1.0]], None).is_err());
        assert!(DistanceTrace::from_rows(p.clone(), vec![vec![]], None).is_err());
        assert!(DistanceTrace::from_rows(p.clone(), vec![vec![1.0]], Some(vec![])).is_err());
        let t = DistanceTrace::from_rows(p, vec![vec![1.0, 3.0]], Some(vec![2.0])).unwrap();
        assert_eq!(t.deviation_trace().unwrap().row(0), &[1.0, 1.0]);
    }
}
