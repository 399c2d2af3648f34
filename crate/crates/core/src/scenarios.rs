//! Named set-sequence scenarios with expected verdicts.
//!
//! A [`Scenario`] fixes the sequence, target, probes, index methods and
//! parameters; [`run`] computes every diagnostic and compares the result
//! with the scenario's expectations.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideals::{
    equivalence_suite, ideal_verdict, implication_suite, Ideal, IdealKind, IdealVerdict,
    ImplicationReport, Status, SuiteParams, VerdictMode, VerdictParams,
};
use crate::index_methods::{
    lambda_for_horizon, ratio_condition, regularity_report, ConditionHint, ConditionReport,
    IndexMethod, Quantity, RMatrix, RegularityReport, TMatrix, CONDITION_HORIZON,
};
use crate::metric_sets::{self, bounded_estimate, BoundEstimate, ClosedSet, DistanceTrace, MetricPoint, SetSequence};
use crate::statistical::{bounded_split_check, c_lambda_stat_density, chebyshev_check, InequalityReport};
use crate::transforms::{self, MeanSeries, StrongMethod};

pub const CATALOG: [&str; 5] = [
    "constant",
    "alternating-pair",
    "sparse-spike",
    "circle-to-axis",
    "paper-lambda-pair",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Trivial,
    Derived,
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Expect {
    /// Verdict of `mode` under `ideal`; `method` defaults to the scenario's
    /// lambda, `probe` to every probe.
    Verdict {
        mode: VerdictMode,
        ideal: IdealKind,
        method: Option<String>,
        probe: Option<usize>,
        status: Status,
    },
    Condition {
        quantity: Quantity,
        method: String,
        companion: Option<String>,
        hint: ConditionHint,
    },
    /// Plain statistical density of `eps`-exceedances at `N`, compared exactly.
    StatDensity { probe: usize, value: f64 },
    /// `max_{k >= from} |d(x, A_k) - d(x, A)| <= max` at every probe.
    TailResidual { from: usize, max: f64 },
    /// No counterexample candidate and no failed containment in any suite.
    NoCounterexamples,
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expect::Verdict {
                mode,
                ideal,
                method,
                probe,
                ..
            } => {
                write!(f, "verdict {} {:?}", mode.name(), ideal)?;
                if let Some(m) = method {
                    write!(f, " method={m}")?;
                }
                match probe {
                    Some(p) => write!(f, " probe={p}"),
                    None => write!(f, " all probes"),
                }
            }
            Expect::Condition {
                quantity,
                method,
                companion,
                ..
            } => {
                write!(f, "condition {:?} {method}", quantity)?;
                if let Some(c) = companion {
                    write!(f, " vs {c}")?;
                }
                Ok(())
            }
            Expect::StatDensity { probe, .. } => write!(f, "statistical density probe={probe}"),
            Expect::TailResidual { from, .. } => write!(f, "tail residual k>={from}"),
            Expect::NoCounterexamples => write!(f, "implication suites"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expected {
    pub check: Expect,
    pub tag: Provenance,
}

impl Expected {
    fn new(check: Expect, tag: Provenance) -> Self {
        Self { check, tag }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub seq: SetSequence,
    pub target: Option<ClosedSet>,
    pub probes: Vec<MetricPoint>,
    pub lambda: String,
    pub mu: Option<String>,
    pub eps: f64,
    pub delta: f64,
    pub p: f64,
    pub horizon: usize,
    pub threshold: f64,
    /// Extra index methods for the implication and equivalence suites.
    pub suite_lambdas: Vec<String>,
    pub expected: Vec<Expected>,
}

fn pt(c: &[f64]) -> MetricPoint {
    MetricPoint::new(c.to_vec()).expect("catalog points are finite")
}

fn is_square(k: u64) -> bool {
    let r = k.isqrt();
    r * r == k
}

fn verdict(mode: VerdictMode, ideal: IdealKind, probe: Option<usize>, status: Status) -> Expect {
    Expect::Verdict {
        mode,
        ideal,
        method: None,
        probe,
        status,
    }
}

fn all_modes(ideal: IdealKind, probe: Option<usize>, status: Status, tag: Provenance) -> Vec<Expected> {
    VerdictMode::PRIMARY
        .iter()
        .map(|&m| Expected::new(verdict(m, ideal, probe, status), tag))
        .collect()
}

fn both_ideals(probe: Option<usize>, status: Status, tag: Provenance) -> Vec<Expected> {
    let mut v = all_modes(IdealKind::Fin, probe, status, tag);
    v.extend(all_modes(IdealKind::DensityZero, probe, status, tag));
    v
}

/// Looks up a catalog scenario.
pub fn builtin(name: &str) -> Result<Scenario> {
    use Provenance::*;
    let base = |name: &str, description: &str, seq: SetSequence, target: ClosedSet| Scenario {
        name: name.to_string(),
        description: description.to_string(),
        seq,
        target: Some(target),
        probes: Vec::new(),
        lambda: "n^2".into(),
        mu: None,
        eps: 0.5,
        delta: 0.25,
        p: 1.0,
        horizon: 1000,
        threshold: Ideal::DEFAULT_THRESHOLD,
        suite_lambdas: Vec::new(),
        expected: Vec::new(),
    };
    let sc = match name {
        "constant" => {
            let a = ClosedSet::ball(pt(&[1.0, 1.0]), 0.5)?;
            let seq_set = a.clone();
            let mut sc = base(
                name,
                "A_k = A = ball((1,1), 0.5)",
                SetSequence::new("ball((1,1),0.5)", move |_| seq_set.clone()).with_bounded_hint(true),
                a,
            );
            sc.probes = vec![pt(&[0.0, 0.0]), pt(&[3.0, -1.0]), pt(&[1.0, 1.2])];
            sc.expected = both_ideals(None, Status::Consistent, Trivial);
            sc.expected.push(Expected::new(Expect::NoCounterexamples, Trivial));
            sc
        }
        "alternating-pair" => {
            let even = ClosedSet::singleton(pt(&[1.0, 0.0]));
            let odd = ClosedSet::singleton(pt(&[-1.0, 0.0]));
            let target = even.clone();
            let mut sc = base(
                name,
                "A_k = {(1,0)} for even k, {(-1,0)} for odd k; A = {(1,0)}",
                SetSequence::new("alternating (1,0) / (-1,0)", move |k| {
                    if k % 2 == 0 {
                        even.clone()
                    } else {
                        odd.clone()
                    }
                })
                .with_bounded_hint(true),
                target,
            );
            sc.lambda = "2n".into();
            sc.probes = vec![pt(&[1.0, 0.0]), pt(&[0.0, 1.0])];
            sc.expected = both_ideals(Some(0), Status::Violated, Derived);
            sc.expected.extend(both_ideals(Some(1), Status::Consistent, Derived));
            sc.expected.push(Expected::new(Expect::NoCounterexamples, Derived));
            sc
        }
        "sparse-spike" => {
            let mut sc = base(
                name,
                "A_k = {(k,0)} for square k, else {(0,0)}; A = {(0,0)}",
                SetSequence::new("spike on squares", |k| {
                    let x = if is_square(k) { k as f64 } else { 0.0 };
                    ClosedSet::singleton(MetricPoint::new(vec![x, 0.0]).expect("finite"))
                })
                .with_bounded_hint(false),
                ClosedSet::singleton(pt(&[0.0, 0.0])),
            );
            sc.horizon = 10_000;
            sc.probes = vec![pt(&[0.0, 0.0])];
            for ideal in [IdealKind::Fin, IdealKind::DensityZero] {
                for mode in VerdictMode::PRIMARY {
                    let status = match (mode, ideal) {
                        (VerdictMode::IConv, IdealKind::DensityZero) => Status::Consistent,
                        (VerdictMode::IClambdaStat, _) => Status::Consistent,
                        _ => Status::Violated,
                    };
                    sc.expected.push(Expected::new(verdict(mode, ideal, None, status), Derived));
                }
            }
            sc.expected.push(Expected::new(
                Expect::StatDensity {
                    probe: 0,
                    value: 0.01,
                },
                Derived,
            ));
            sc.expected.push(Expected::new(Expect::NoCounterexamples, Derived));
            sc
        }
        "circle-to-axis" => {
            let mut sc = base(
                name,
                "A_k = sphere((k,0), k); A = the line x1 = 0",
                SetSequence::new("sphere((k,0),k)", |k| {
                    let k = k as f64;
                    ClosedSet::sphere(MetricPoint::new(vec![k, 0.0]).expect("finite"), k)
                        .expect("radius is positive")
                })
                .with_bounded_hint(true),
                ClosedSet::hyperplane(pt(&[1.0, 0.0]), 0.0)?,
            );
            sc.horizon = 10_000;
            sc.lambda = "2n".into();
            sc.probes = vec![pt(&[2.0, 1.0]), pt(&[0.0, 3.0]), pt(&[-1.0, 2.0])];
            sc.expected = both_ideals(None, Status::Consistent, Derived);
            sc.expected.push(Expected::new(
                Expect::TailResidual {
                    from: 5000,
                    max: 1e-3,
                },
                Derived,
            ));
            sc.expected.push(Expected::new(Expect::NoCounterexamples, Derived));
            sc
        }
        "paper-lambda-pair" => {
            let big = ClosedSet::ball(pt(&[0.0, 0.0]), 2.0)?;
            let small = ClosedSet::singleton(pt(&[0.0, 0.0]));
            let mut sc = base(
                name,
                "A_k = ball(0, 2) for even k, {0} for odd k; A = ball(0, 1); lambda = n^2, mu = n^3",
                SetSequence::new("ball(0,2) / {0}", move |k| {
                    if k % 2 == 0 {
                        big.clone()
                    } else {
                        small.clone()
                    }
                })
                .with_bounded_hint(true),
                ClosedSet::ball(pt(&[0.0, 0.0]), 1.0)?,
            );
            sc.horizon = 10_000;
            sc.mu = Some("n^3".into());
            sc.probes = vec![pt(&[3.0, 0.0]), pt(&[0.0, -4.0]), pt(&[2.0, 2.0])];
            for ideal in [IdealKind::Fin, IdealKind::DensityZero] {
                for mode in VerdictMode::PRIMARY {
                    let status = if mode == VerdictMode::IClambdaSummable {
                        Status::Consistent
                    } else {
                        Status::Violated
                    };
                    sc.expected.push(Expected::new(verdict(mode, ideal, None, status), Derived));
                }
                for method in ["n^3", "n"] {
                    sc.expected.push(Expected::new(
                        Expect::Verdict {
                            mode: VerdictMode::IClambdaSummable,
                            ideal,
                            method: Some(method.into()),
                            probe: None,
                            status: Status::Consistent,
                        },
                        Derived,
                    ));
                }
            }
            for (quantity, method, companion, hint) in [
                (Quantity::LimsupStepRatio, "n^2", None, ConditionHint::SatisfiesCondition),
                (Quantity::LimsupStepRatio, "n^3", None, ConditionHint::SatisfiesCondition),
                (
                    Quantity::LimCompanionRatio,
                    "n^2",
                    Some("n^3".to_string()),
                    ConditionHint::FailsCondition,
                ),
            ] {
                sc.expected.push(Expected::new(
                    Expect::Condition {
                        quantity,
                        method: method.into(),
                        companion,
                        hint,
                    },
                    Paper,
                ));
            }
            sc.expected.push(Expected::new(Expect::NoCounterexamples, Derived));
            sc
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(sc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedInequality {
    pub name: String,
    pub method: String,
    pub report: InequalityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationResult {
    pub check: String,
    pub tag: Provenance,
    pub expected: String,
    pub actual: String,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioParams {
    pub horizon: usize,
    pub lambda: String,
    pub mu: Option<String>,
    pub eps: f64,
    pub delta: f64,
    pub p: f64,
    pub threshold: f64,
    pub probes: Vec<MetricPoint>,
    pub sequence: String,
    pub target: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub description: String,
    pub params: ScenarioParams,
    pub bounds: Vec<BoundEstimate>,
    pub conditions: Vec<ConditionReport>,
    pub regularity: Vec<RegularityReport>,
    /// Plain statistical density of `eps`-exceedances at `N`, per probe.
    pub stat_density: Vec<f64>,
    /// `max_{k >= N/2} |d(x, A_k) - d(x, A)|`, per probe.
    pub tail_residual: Vec<f64>,
    pub inequalities: Vec<NamedInequality>,
    pub verdicts: Vec<IdealVerdict>,
    pub implications: Vec<ImplicationReport>,
    pub equivalences: Vec<ImplicationReport>,
    pub expectations: Vec<ExpectationResult>,
    pub diffs: usize,
    pub counterexample_candidates: usize,
    pub containment_failures: usize,
    #[serde(skip)]
    pub trace: DistanceTrace,
    /// Mean series of the scenario's lambda (and mu), for CSV output.
    #[serde(skip)]
    pub series: Vec<MeanSeries>,
}

impl ScenarioReport {
    /// No diffs, no counterexample candidates, no failed containments.
    pub fn ok(&self) -> bool {
        self.diffs == 0 && self.counterexample_candidates == 0 && self.containment_failures == 0
    }

    pub fn verdict(&self, mode: VerdictMode, ideal: IdealKind, method: &str) -> Option<&IdealVerdict> {
        self.verdicts
            .iter()
            .find(|v| v.mode == mode && v.ideal.kind == ideal && v.lambda == method)
    }
}

/// Every ratio condition of `lambda` (and `mu`), each on the window ending at
/// `min(cap, len - 1)` of its method.
pub(crate) fn conditions_for(
    lambda: &IndexMethod,
    mu: Option<&IndexMethod>,
    cap: usize,
) -> Result<Vec<ConditionReport>> {
    let mut out = Vec::new();
    let h = |m: &IndexMethod| cap.min(m.len().saturating_sub(1));
    let mut methods = vec![lambda];
    methods.extend(mu);
    for m in methods {
        for q in Quantity::ALL {
            if q != Quantity::LimCompanionRatio && h(m) >= 4 {
                out.push(ratio_condition(m, q, h(m), None)?);
            }
        }
    }
    if let Some(mu) = mu {
        let hc = h(lambda).min(mu.len());
        if hc >= 4 {
            out.push(ratio_condition(lambda, Quantity::LimCompanionRatio, hc, Some(mu))?);
        }
    }
    Ok(out)
}

fn materialize(spec: &str, horizon: usize) -> Result<IndexMethod> {
    lambda_for_horizon(spec, horizon, CONDITION_HORIZON + 1)
}

/// Computes every diagnostic for `sc` and compares against its expectations.
pub fn run(sc: &Scenario) -> Result<ScenarioReport> {
    let n = sc.horizon;
    let target = sc.target.as_ref().ok_or(Error::MissingTarget)?;
    let trace = metric_sets::trace(&sc.seq, &sc.probes, n, Some(target))?;
    let lambda = materialize(&sc.lambda, n)?;
    let mu = sc.mu.as_deref().map(|m| materialize(m, n)).transpose()?;
    let identity = IndexMethod::identity(n);

    let conditions = conditions_for(&lambda, mu.as_ref(), CONDITION_HORIZON)?;
    let n_reg = lambda.n_horizon(n).min(CONDITION_HORIZON);
    let regularity = if n_reg >= 2 {
        vec![
            regularity_report(&TMatrix(&lambda), n_reg)?,
            regularity_report(&RMatrix(&lambda), n_reg)?,
        ]
    } else {
        Vec::new()
    };
    let bounds = bounded_estimate(&trace);

    let stat = c_lambda_stat_density(&trace, &identity, sc.eps)?;
    let stat_density = (0..trace.num_probes()).map(|p| stat.at(p, n)).collect();
    let target_row = trace.require_target()?;
    let tail_residual = trace
        .rows()
        .iter()
        .zip(target_row)
        .map(|(row, t)| row[n / 2..].iter().map(|v| (v - t).abs()).fold(0.0, f64::max))
        .collect();

    let mut series = vec![
        transforms::c1(&trace),
        transforms::c_lambda(&trace, &lambda)?,
        transforms::d_lambda(&trace, &lambda)?,
    ];
    let strong_c = transforms::strong_mean(&trace, StrongMethod::Clambda, &lambda, sc.p)?;
    series.push(strong_c.clone());
    series.push(transforms::strong_mean(&trace, StrongMethod::Dlambda, &lambda, sc.p)?);
    if let Some(mu) = &mu {
        series.push(transforms::c_lambda(&trace, mu)?);
    }

    let density = c_lambda_stat_density(&trace, &lambda, sc.eps)?;
    let alpha = strong_c.max_deviation.clone().expect("strong series");
    let inequalities = vec![
        NamedInequality {
            name: "chebyshev".into(),
            method: lambda.label().into(),
            report: chebyshev_check(&strong_c, &density, sc.eps, sc.p)?,
        },
        NamedInequality {
            name: "bounded_split".into(),
            method: lambda.label().into(),
            report: bounded_split_check(&strong_c, &density, sc.eps, sc.p, &alpha)?,
        },
    ];

    let fin = Ideal::fin().with_threshold(sc.threshold);
    let dz = Ideal::density_zero().with_threshold(sc.threshold);
    let params = VerdictParams::new(sc.eps).with_delta(sc.delta).with_p(sc.p);
    let mut verdicts = Vec::new();
    for ideal in [fin, dz] {
        for mode in VerdictMode::PRIMARY {
            verdicts.push(ideal_verdict(mode, &trace, &lambda, &ideal, &params)?);
        }
        if let Some(mu) = &mu {
            verdicts.push(ideal_verdict(VerdictMode::IClambdaSummable, &trace, mu, &ideal, &params)?);
        }
        if lambda.label() != "n" {
            verdicts.push(ideal_verdict(
                VerdictMode::IClambdaSummable,
                &trace,
                &identity,
                &ideal,
                &params,
            )?);
        }
    }

    let suite = SuiteParams::new(sc.eps, sc.delta, sc.p);
    let mut suite_methods = vec![lambda.clone()];
    for spec in &sc.suite_lambdas {
        let m = materialize(spec, n)?;
        if !suite_methods.iter().any(|x| x.label() == m.label()) {
            suite_methods.push(m);
        }
    }
    let mut implications = Vec::new();
    let mut equivalences = Vec::new();
    for m in &suite_methods {
        for ideal in [fin, dz] {
            implications.push(implication_suite(&trace, m, &ideal, &suite)?);
        }
        let companion = if m.label() == lambda.label() { mu.as_ref() } else { None };
        equivalences.push(equivalence_suite(&trace, m, companion, &suite)?);
    }
    let counterexample_candidates = implications
        .iter()
        .chain(&equivalences)
        .map(|r| r.counterexample_candidates)
        .sum();
    let containment_failures = implications
        .iter()
        .chain(&equivalences)
        .map(|r| r.containment_failures)
        .sum();

    let mut report = ScenarioReport {
        name: sc.name.clone(),
        description: sc.description.clone(),
        params: ScenarioParams {
            horizon: n,
            lambda: lambda.label().into(),
            mu: mu.as_ref().map(|m| m.label().into()),
            eps: sc.eps,
            delta: sc.delta,
            p: sc.p,
            threshold: sc.threshold,
            probes: sc.probes.clone(),
            sequence: sc.seq.label.clone(),
            target: Some(target.describe()),
        },
        bounds,
        conditions,
        regularity,
        stat_density,
        tail_residual,
        inequalities,
        verdicts,
        implications,
        equivalences,
        expectations: Vec::new(),
        diffs: 0,
        counterexample_candidates,
        containment_failures,
        trace,
        series,
    };
    report.expectations = sc
        .expected
        .iter()
        .map(|e| evaluate(e, &report, lambda.label()))
        .collect();
    report.diffs = report.expectations.iter().filter(|e| !e.matches).count();
    Ok(report)
}

fn evaluate(e: &Expected, report: &ScenarioReport, lambda: &str) -> ExpectationResult {
    let (expected, actual, matches) = match &e.check {
        Expect::Verdict {
            mode,
            ideal,
            method,
            probe,
            status,
        } => {
            let method = method.as_deref().unwrap_or(if mode.uses_lambda() { lambda } else { "n" });
            match report.verdict(*mode, *ideal, method) {
                None => (format!("{status:?}"), "missing".to_string(), false),
                Some(v) => {
                    let actual: Vec<Status> = match probe {
                        Some(p) => v.probes.get(*p).map(|x| x.status).into_iter().collect(),
                        None => v.probes.iter().map(|x| x.status).collect(),
                    };
                    let ok = !actual.is_empty() && actual.iter().all(|s| s == status);
                    (format!("{status:?}"), format!("{actual:?}"), ok)
                }
            }
        }
        Expect::Condition {
            quantity,
            method,
            companion,
            hint,
        } => {
            let found = report.conditions.iter().find(|c| {
                c.quantity == *quantity && &c.method == method && c.companion == *companion
            });
            match found {
                None => (format!("{hint:?}"), "missing".to_string(), false),
                Some(c) => (
                    format!("{hint:?}"),
                    format!("{:?} (estimate {})", c.verdict_hint, c.estimate),
                    c.verdict_hint == *hint,
                ),
            }
        }
        Expect::StatDensity { probe, value } => match report.stat_density.get(*probe) {
            None => (value.to_string(), "missing".to_string(), false),
            Some(&d) => (value.to_string(), d.to_string(), d == *value),
        },
        Expect::TailResidual { from, max } => {
            let t = &report.trace;
            let target = t.target_row().unwrap_or(&[]);
            let worst = t
                .rows()
                .iter()
                .zip(target)
                .map(|(row, tv)| {
                    row.get(from.saturating_sub(1)..)
                        .unwrap_or(&[])
                        .iter()
                        .map(|v| (v - tv).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            (format!("<= {max}"), worst.to_string(), *from <= t.horizon() && worst <= *max)
        }
        Expect::NoCounterexamples => (
            "0 candidates, 0 failed containments".to_string(),
            format!(
                "{} candidates, {} failed containments",
                report.counterexample_candidates, report.containment_failures
            ),
            report.counterexample_candidates == 0 && report.containment_failures == 0,
        ),
    };
    ExpectationResult {
        check: e.check.to_string(),
        tag: e.tag,
        expected,
        actual,
        matches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name() {
        assert!(matches!(builtin("nope"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn constant_has_no_diffs() {
        let r = run(&builtin("constant").unwrap()).unwrap();
        assert!(r.ok(), "{:#?}", r.expectations.iter().filter(|e| !e.matches).collect::<Vec<_>>());
    }

    #[test]
    fn alternating_c_lambda_is_exactly_one() {
        let r = run(&builtin("alternating-pair").unwrap()).unwrap();
        let c = r.series.iter().find(|s| s.kind == crate::SeriesKind::Clambda).unwrap();
        assert!(c.values[0].iter().all(|&v| v == 1.0));
        assert!(r.ok());
    }
}
