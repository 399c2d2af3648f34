//! Finite-horizon checks of the implications between convergence modes.
//!
//! Each check runs only when its hypothesis on `lambda` is satisfied by the
//! condition estimates. A probe whose antecedent verdict is Consistent and
//! whose consequent verdict is Violated is a counterexample candidate.
//! Where the implication comes from an exact per-n inequality, the
//! corresponding inclusion of exceptional sets is also checked directly.

use serde::Serialize;

use super::verdict::{exceptional_sets, verdict_from_sets};
use super::{Ideal, IdealVerdict, IndexSet, Status, VerdictMode, VerdictParams};
use crate::error::{Error, Result};
use crate::index_methods::{
    ratio_condition, ConditionHint, ConditionReport, IndexMethod, Quantity, CONDITION_HORIZON,
};
use crate::metric_sets::{bounded_estimate, DistanceTrace};
use crate::transforms::{self, StrongMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem {
    /// strong C_lambda => strong D_lambda, if liminf lambda(n)/lambda(n-1) > 1.
    StrongClambdaToDlambda,
    /// strong D_lambda => strong C_lambda.
    StrongDlambdaToClambda,
    /// strong D_lambda => strong C1, if limsup lambda(n)/lambda(n-1) < inf.
    StrongDlambdaToC1,
    /// p-strong C_lambda => C_lambda-statistical.
    PStrongToStat,
    /// C_lambda-statistical => p-strong C_lambda for bounded sequences.
    BoundedStatToPStrong,
    /// C1 => C_lambda.
    C1ToClambda,
    /// C_lambda => C1 for bounded sequences, if limsup lambda(n+1)/lambda(n) = 1.
    ClambdaToC1,
    /// C_lambda => C_mu for bounded sequences, if lim n/lambda(n) > 0 and lim n/mu(n) > 0.
    DensityClambdaToCmu,
    DensityCmuToClambda,
    /// C_lambda => C_mu for bounded sequences, if lim mu(n)/lambda(n) = 1.
    RatioClambdaToCmu,
    RatioCmuToClambda,
    /// D_lambda => C_lambda.
    DlambdaToClambda,
    /// C_lambda => D_lambda, if liminf lambda(n)/lambda(n-1) > 1.
    ClambdaToDlambda,
    /// statistical => C_lambda-statistical.
    StatToClambdaStat,
    /// C_lambda-statistical => statistical for bounded sequences, if
    /// limsup lambda(n+1)/lambda(n) = 1.
    ClambdaStatToStat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HypothesisStatus {
    Unconditional,
    Holds,
    Fails,
    Inconclusive,
}

impl HypothesisStatus {
    fn runs(self) -> bool {
        matches!(self, HypothesisStatus::Unconditional | HypothesisStatus::Holds)
    }

    fn all(parts: &[HypothesisStatus]) -> HypothesisStatus {
        if parts.contains(&HypothesisStatus::Fails) {
            HypothesisStatus::Fails
        } else if parts.contains(&HypothesisStatus::Inconclusive) {
            HypothesisStatus::Inconclusive
        } else if parts.contains(&HypothesisStatus::Holds) {
            HypothesisStatus::Holds
        } else {
            HypothesisStatus::Unconditional
        }
    }
}

impl From<ConditionHint> for HypothesisStatus {
    fn from(h: ConditionHint) -> Self {
        match h {
            ConditionHint::SatisfiesCondition => HypothesisStatus::Holds,
            ConditionHint::FailsCondition => HypothesisStatus::Fails,
            ConditionHint::Inconclusive => HypothesisStatus::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CheckOutcome {
    /// Hypothesis on lambda (or boundedness) not satisfied.
    Skipped,
    /// Antecedent not Consistent.
    Vacuous,
    Pass,
    /// Consequent Inconclusive while the antecedent is Consistent.
    Inconclusive,
    CounterexampleCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub probe: usize,
    pub antecedent: Status,
    pub consequent: Status,
    pub antecedent_density: f64,
    pub consequent_density: f64,
    pub outcome: CheckOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplicationCheck {
    pub theorem: Theorem,
    pub hypothesis: HypothesisStatus,
    pub antecedent: Option<IdealVerdict>,
    pub consequent: Option<IdealVerdict>,
    pub probes: Vec<ProbeOutcome>,
    pub outcome: CheckOutcome,
}

/// Inclusion `subset ⊆ superset` of exceptional index sets, per probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub name: String,
    pub subset: String,
    pub superset: String,
    pub holds: bool,
    /// Total number of indices in `subset \ superset`, over all probes.
    pub violations: usize,
    /// `(probe, n)` of the first index in `subset \ superset`.
    pub first_violation: Option<(usize, usize)>,
    pub checked: usize,
}

impl ContainmentReport {
    pub fn new(name: &str, subset: String, superset: String, a: &[IndexSet], b: &[IndexSet]) -> Self {
        let mut violations = 0;
        let mut first_violation = None;
        let mut checked = 0;
        for (probe, (s, t)) in a.iter().zip(b).enumerate() {
            checked += s.horizon();
            let diff = s.difference(t);
            if let (None, Some(&n)) = (first_violation, diff.first()) {
                first_violation = Some((probe, n));
            }
            violations += diff.len();
        }
        Self {
            name: name.to_string(),
            subset,
            superset,
            holds: violations == 0,
            violations,
            first_violation,
            checked,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteParams {
    pub eps: f64,
    /// Second level of the strong C_lambda => D_lambda argument; defaults to `eps`.
    pub eps2: Option<f64>,
    pub delta: f64,
    pub p: f64,
}

impl SuiteParams {
    pub fn new(eps: f64, delta: f64, p: f64) -> Self {
        Self {
            eps,
            eps2: None,
            delta,
            p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplicationReport {
    pub lambda: String,
    pub companion: Option<String>,
    pub ideal: Ideal,
    pub params: SuiteParams,
    pub conditions: Vec<ConditionReport>,
    /// No probe flagged as unbounded.
    pub bounded: bool,
    pub checks: Vec<ImplicationCheck>,
    /// Inclusions that follow from exact per-n inequalities; any failure is a defect.
    pub containments: Vec<ContainmentReport>,
    /// Inclusions at alternative levels, reported without gating.
    pub informational: Vec<ContainmentReport>,
    pub counterexample_candidates: usize,
    pub containment_failures: usize,
}

impl ImplicationReport {
    pub fn passed(&self) -> bool {
        self.counterexample_candidates == 0 && self.containment_failures == 0
    }

    pub fn check(&self, theorem: Theorem) -> Option<&ImplicationCheck> {
        self.checks.iter().find(|c| c.theorem == theorem)
    }

    fn finish(mut self) -> Self {
        self.counterexample_candidates = self
            .checks
            .iter()
            .flat_map(|c| &c.probes)
            .filter(|p| p.outcome == CheckOutcome::CounterexampleCandidate)
            .count();
        self.containment_failures = self.containments.iter().filter(|c| !c.holds).count();
        self
    }
}

fn condition(
    lambda: &IndexMethod,
    which: Quantity,
    horizon: usize,
    companion: Option<&IndexMethod>,
) -> Result<ConditionReport> {
    ratio_condition(lambda, which, horizon, companion)
}

/// Largest `n <= CONDITION_HORIZON` at which every condition on `lambda`
/// (and `mu`) can be evaluated from the materialized prefixes.
fn condition_horizon(lambda: &IndexMethod, mu: Option<&IndexMethod>) -> Result<usize> {
    let mut h = CONDITION_HORIZON.min(lambda.len().saturating_sub(1));
    if let Some(mu) = mu {
        h = h.min(mu.len());
    }
    if h < 4 {
        return Err(Error::HorizonTooSmall {
            entries: h,
            required: 4,
        });
    }
    Ok(h)
}

fn hint(reports: &[ConditionReport], q: Quantity, method: &str) -> HypothesisStatus {
    reports
        .iter()
        .find(|r| r.quantity == q && r.method == method)
        .map_or(HypothesisStatus::Inconclusive, |r| r.verdict_hint.into())
}

fn bounded_status(trace: &DistanceTrace) -> (bool, HypothesisStatus) {
    let bounded = !bounded_estimate(trace).iter().any(|b| b.unbounded_suspect);
    let status = if bounded {
        HypothesisStatus::Holds
    } else {
        HypothesisStatus::Fails
    };
    (bounded, status)
}

fn compare(theorem: Theorem, hypothesis: HypothesisStatus, ant: IdealVerdict, cons: IdealVerdict) -> ImplicationCheck {
    let probes: Vec<ProbeOutcome> = ant
        .probes
        .iter()
        .zip(&cons.probes)
        .map(|(a, c)| {
            let outcome = match (a.status, c.status) {
                (Status::Consistent, Status::Consistent) => CheckOutcome::Pass,
                (Status::Consistent, Status::Violated) => CheckOutcome::CounterexampleCandidate,
                (Status::Consistent, Status::Inconclusive) => CheckOutcome::Inconclusive,
                _ => CheckOutcome::Vacuous,
            };
            ProbeOutcome {
                probe: a.probe,
                antecedent: a.status,
                consequent: c.status,
                antecedent_density: a.witness.full_density,
                consequent_density: c.witness.full_density,
                outcome,
            }
        })
        .collect();
    let outcome = probes
        .iter()
        .map(|p| p.outcome)
        .max()
        .unwrap_or(CheckOutcome::Vacuous);
    ImplicationCheck {
        theorem,
        hypothesis,
        antecedent: Some(ant),
        consequent: Some(cons),
        probes,
        outcome,
    }
}

fn skipped(theorem: Theorem, hypothesis: HypothesisStatus) -> ImplicationCheck {
    ImplicationCheck {
        theorem,
        hypothesis,
        antecedent: None,
        consequent: None,
        probes: Vec::new(),
        outcome: CheckOutcome::Skipped,
    }
}

/// Exceptional sets plus the verdict built from them.
struct Leg {
    sets: Vec<IndexSet>,
    verdict: IdealVerdict,
}

fn leg(
    mode: VerdictMode,
    trace: &DistanceTrace,
    lambda: &IndexMethod,
    ideal: &Ideal,
    params: VerdictParams,
) -> Result<Leg> {
    // run the full verdict once for its horizon checks, then keep the sets
    super::ideal_verdict(mode, trace, lambda, ideal, &params)?;
    let sets = exceptional_sets(mode, trace, lambda, &params)?;
    let verdict = verdict_from_sets(mode, ideal, lambda, &params, &sets);
    Ok(Leg { sets, verdict })
}

fn describe(mode: VerdictMode, level: f64, delta: Option<f64>) -> String {
    match delta {
        Some(d) => format!("{}(eps={level}, delta={d})", mode.name()),
        None => format!("{}(level={level})", mode.name()),
    }
}

/// Checks the implications between strong, statistical and p-strong modes
/// of `lambda` under `ideal`.
///
/// Levels used:
/// * strong C_lambda => strong D_lambda: antecedent `eps`, consequent
///   `(1 + beta)/beta * eps`, with `beta = min_n lambda(n)/lambda(n-1) - 1`
///   over the materialized prefix. The exceptional-set inclusion is exact.
/// * strong D_lambda => strong C_lambda: both at `eps`.
/// * strong D_lambda => strong C1: antecedent `eps`, consequent `eps * L`,
///   `L = max_n lambda(n)/lambda(n-1)` over the prefix.
/// * p-strong => statistical: antecedent p-strong at `eps^p * delta`,
///   consequent statistical at `(eps, delta)`. Exact inclusion.
/// * bounded statistical => p-strong: consequent p-strong at `delta`,
///   antecedent statistical at `eps_s = (delta/2)^(1/p)` and
///   `delta_c = delta / (2 alpha^p)`, with `alpha` the largest deviation.
///   Exact inclusion.
pub fn implication_suite(
    trace: &DistanceTrace,
    lambda: &IndexMethod,
    ideal: &Ideal,
    params: &SuiteParams,
) -> Result<ImplicationReport> {
    let SuiteParams { eps, delta, p, .. } = *params;
    let eps2 = params.eps2.unwrap_or(eps);
    for (name, v) in [("eps", eps), ("eps2", eps2), ("delta", delta), ("p", p)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("{v} is not a positive real"),
            });
        }
    }
    let hc = condition_horizon(lambda, None)?;
    let conditions = vec![
        condition(lambda, Quantity::LiminfBackRatio, hc, None)?,
        condition(lambda, Quantity::LimsupBackRatio, hc, None)?,
    ];
    let label = lambda.label();
    let (bounded, bounded_hyp) = bounded_status(trace);
    let n_h = lambda.n_horizon(trace.horizon());

    let ratios: Vec<f64> = (2..=n_h)
        .map(|n| Ok(lambda.get(n)? as f64 / lambda.get(n - 1)? as f64))
        .collect::<Result<_>>()?;
    let beta = ratios.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let big_l = ratios.iter().copied().fold(1.0, f64::max);

    let v = |e: f64| VerdictParams::new(e);
    let mut checks = Vec::new();
    let mut containments = Vec::new();
    let mut informational = Vec::new();

    // strong C_lambda => strong D_lambda
    let hyp = hint(&conditions, Quantity::LiminfBackRatio, label);
    let strong_c = leg(VerdictMode::StrongIClambda, trace, lambda, ideal, v(eps))?;
    if beta > 0.0 {
        let level = (1.0 + beta) / beta * eps;
        let strong_d = leg(VerdictMode::StrongIDlambda, trace, lambda, ideal, v(level))?;
        containments.push(ContainmentReport::new(
            "strong_d_lambda_within_strong_c_lambda",
            describe(VerdictMode::StrongIDlambda, level, None),
            describe(VerdictMode::StrongIClambda, eps, None),
            &strong_d.sets,
            &strong_c.sets,
        ));
        let printed = (1.0 + beta) / beta * eps - eps2 / beta;
        if printed > 0.0 {
            let alt = exceptional_sets(VerdictMode::StrongIDlambda, trace, lambda, &v(printed))?;
            informational.push(ContainmentReport::new(
                "strong_d_lambda_within_strong_c_lambda_two_level",
                describe(VerdictMode::StrongIDlambda, printed, None),
                describe(VerdictMode::StrongIClambda, eps, None),
                &alt,
                &strong_c.sets,
            ));
        }
        checks.push(if hyp.runs() {
            compare(Theorem::StrongClambdaToDlambda, hyp, strong_c.verdict.clone(), strong_d.verdict)
        } else {
            skipped(Theorem::StrongClambdaToDlambda, hyp)
        });
    } else {
        checks.push(skipped(Theorem::StrongClambdaToDlambda, HypothesisStatus::Fails));
    }

    // strong D_lambda => strong C_lambda
    let strong_d_eps = leg(VerdictMode::StrongIDlambda, trace, lambda, ideal, v(eps))?;
    checks.push(compare(
        Theorem::StrongDlambdaToClambda,
        HypothesisStatus::Unconditional,
        strong_d_eps.verdict.clone(),
        strong_c.verdict.clone(),
    ));

    // strong D_lambda => strong C1
    let hyp = hint(&conditions, Quantity::LimsupBackRatio, label);
    checks.push(if hyp.runs() {
        let c1 = leg(VerdictMode::StrongIC1, trace, lambda, ideal, v(eps * big_l))?;
        compare(Theorem::StrongDlambdaToC1, hyp, strong_d_eps.verdict, c1.verdict)
    } else {
        skipped(Theorem::StrongDlambdaToC1, hyp)
    });

    // p-strong => statistical
    let pstrong_level = eps.powf(p) * delta;
    let pstrong = leg(
        VerdictMode::PStrongIClambda,
        trace,
        lambda,
        ideal,
        v(pstrong_level).with_p(p),
    )?;
    let stat = leg(VerdictMode::IClambdaStat, trace, lambda, ideal, v(eps).with_delta(delta))?;
    containments.push(ContainmentReport::new(
        "stat_within_p_strong",
        describe(VerdictMode::IClambdaStat, eps, Some(delta)),
        describe(VerdictMode::PStrongIClambda, pstrong_level, None),
        &stat.sets,
        &pstrong.sets,
    ));
    checks.push(compare(
        Theorem::PStrongToStat,
        HypothesisStatus::Unconditional,
        pstrong.verdict,
        stat.verdict,
    ));

    // bounded statistical => p-strong
    let alpha = transforms::strong_mean(trace, StrongMethod::Clambda, lambda, p)?
        .max_deviation
        .expect("strong means carry deviations")
        .into_iter()
        .fold(0.0, f64::max);
    let eps_s = (delta / 2.0).powf(1.0 / p);
    let delta_c = if alpha > 0.0 {
        delta / (2.0 * alpha.powf(p))
    } else {
        f64::MAX
    };
    let pstrong_delta = leg(
        VerdictMode::PStrongIClambda,
        trace,
        lambda,
        ideal,
        v(delta).with_p(p),
    )?;
    let stat_split = exceptional_sets(
        VerdictMode::IClambdaStat,
        trace,
        lambda,
        &v(eps_s).with_delta(delta_c),
    )?;
    containments.push(ContainmentReport::new(
        "p_strong_within_stat_bounded",
        describe(VerdictMode::PStrongIClambda, delta, None),
        describe(VerdictMode::IClambdaStat, eps_s, Some(delta_c)),
        &pstrong_delta.sets,
        &stat_split,
    ));
    if alpha > 0.0 {
        let printed = delta.powf(p) / alpha.powf(p);
        let alt = exceptional_sets(VerdictMode::IClambdaStat, trace, lambda, &v(eps).with_delta(printed))?;
        informational.push(ContainmentReport::new(
            "p_strong_within_stat_delta_p_over_alpha_p",
            describe(VerdictMode::PStrongIClambda, delta, None),
            describe(VerdictMode::IClambdaStat, eps, Some(printed)),
            &pstrong_delta.sets,
            &alt,
        ));
    }
    checks.push(if bounded_hyp.runs() {
        let ant = verdict_from_sets(
            VerdictMode::IClambdaStat,
            ideal,
            lambda,
            &v(eps_s).with_delta(delta_c),
            &stat_split,
        );
        compare(Theorem::BoundedStatToPStrong, bounded_hyp, ant, pstrong_delta.verdict)
    } else {
        skipped(Theorem::BoundedStatToPStrong, bounded_hyp)
    });

    Ok(ImplicationReport {
        lambda: label.to_string(),
        companion: None,
        ideal: *ideal,
        params: *params,
        conditions,
        bounded,
        checks,
        containments,
        informational,
        counterexample_candidates: 0,
        containment_failures: 0,
    }
    .finish())
}

/// Checks the equivalences between C1, C_lambda, C_mu, D_lambda and the
/// statistical modes, as ordinary convergence (the `Fin` ideal).
pub fn equivalence_suite(
    trace: &DistanceTrace,
    lambda: &IndexMethod,
    mu: Option<&IndexMethod>,
    params: &SuiteParams,
) -> Result<ImplicationReport> {
    let ideal = Ideal::fin();
    let SuiteParams { eps, delta, .. } = *params;
    let label = lambda.label();
    let hc = condition_horizon(lambda, mu)?;
    let mut conditions = vec![
        condition(lambda, Quantity::LimsupStepRatio, hc, None)?,
        condition(lambda, Quantity::LiminfBackRatio, hc, None)?,
        condition(lambda, Quantity::LimInverseDensity, hc, None)?,
    ];
    if let Some(mu) = mu {
        conditions.push(condition(mu, Quantity::LimInverseDensity, hc, None)?);
        conditions.push(condition(lambda, Quantity::LimCompanionRatio, hc, Some(mu))?);
    }
    let (bounded, bounded_hyp) = bounded_status(trace);
    let identity = IndexMethod::identity(trace.horizon());
    let v = VerdictParams::new(eps);
    let verdict = |mode, m: &IndexMethod, p: VerdictParams| super::ideal_verdict(mode, trace, m, &ideal, &p);

    let c1 = verdict(VerdictMode::IC1Summable, lambda, v)?;
    let cl = verdict(VerdictMode::IClambdaSummable, lambda, v)?;
    let dl = verdict(VerdictMode::IDlambdaSummable, lambda, v)?;
    let mut checks = vec![compare(
        Theorem::C1ToClambda,
        HypothesisStatus::Unconditional,
        c1.clone(),
        cl.clone(),
    )];

    let step = hint(&conditions, Quantity::LimsupStepRatio, label);
    let hyp = HypothesisStatus::all(&[step, bounded_hyp]);
    checks.push(if hyp.runs() {
        compare(Theorem::ClambdaToC1, hyp, cl.clone(), c1)
    } else {
        skipped(Theorem::ClambdaToC1, hyp)
    });

    if let Some(mu) = mu {
        let cm = verdict(VerdictMode::IClambdaSummable, mu, v)?;
        let dens = HypothesisStatus::all(&[
            hint(&conditions, Quantity::LimInverseDensity, label),
            hint(&conditions, Quantity::LimInverseDensity, mu.label()),
            bounded_hyp,
        ]);
        let ratio = HypothesisStatus::all(&[
            hint(&conditions, Quantity::LimCompanionRatio, label),
            bounded_hyp,
        ]);
        for (hyp, fwd, back) in [
            (dens, Theorem::DensityClambdaToCmu, Theorem::DensityCmuToClambda),
            (ratio, Theorem::RatioClambdaToCmu, Theorem::RatioCmuToClambda),
        ] {
            if hyp.runs() {
                checks.push(compare(fwd, hyp, cl.clone(), cm.clone()));
                checks.push(compare(back, hyp, cm.clone(), cl.clone()));
            } else {
                checks.push(skipped(fwd, hyp));
                checks.push(skipped(back, hyp));
            }
        }
    }

    checks.push(compare(
        Theorem::DlambdaToClambda,
        HypothesisStatus::Unconditional,
        dl.clone(),
        cl.clone(),
    ));
    let hyp = hint(&conditions, Quantity::LiminfBackRatio, label);
    checks.push(if hyp.runs() {
        compare(Theorem::ClambdaToDlambda, hyp, cl, dl)
    } else {
        skipped(Theorem::ClambdaToDlambda, hyp)
    });

    let sv = v.with_delta(delta);
    let st = verdict(VerdictMode::IClambdaStat, &identity, sv)?;
    let cst = verdict(VerdictMode::IClambdaStat, lambda, sv)?;
    checks.push(compare(
        Theorem::StatToClambdaStat,
        HypothesisStatus::Unconditional,
        st.clone(),
        cst.clone(),
    ));
    let hyp = HypothesisStatus::all(&[step, bounded_hyp]);
    checks.push(if hyp.runs() {
        compare(Theorem::ClambdaStatToStat, hyp, cst, st)
    } else {
        skipped(Theorem::ClambdaStatToStat, hyp)
    });

    Ok(ImplicationReport {
        lambda: label.to_string(),
        companion: mu.map(|m| m.label().to_string()),
        ideal,
        params: *params,
        conditions,
        bounded,
        checks,
        containments: Vec::new(),
        informational: Vec::new(),
        counterexample_candidates: 0,
        containment_failures: 0,
    }
    .finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_methods::{lambda_for_horizon, parse_lambda};

    fn spike(n: usize) -> DistanceTrace {
        let row = (1..=n)
            .map(|k| {
                let r = (k as f64).sqrt() as usize;
                if r * r == k {
                    k as f64
                } else {
                    0.0
                }
            })
            .collect();
        DistanceTrace::scalar(row, Some(0.0)).unwrap()
    }

    fn params() -> SuiteParams {
        SuiteParams::new(0.5, 0.25, 1.0)
    }

    #[test]
    fn constant_trace_passes() {
        let t = DistanceTrace::scalar(vec![1.0; 2000], Some(1.0)).unwrap();
        for src in ["2^n", "n^2", "n"] {
            let lam = lambda_for_horizon(src, 2000, 1001).unwrap();
            for ideal in [Ideal::fin(), Ideal::density_zero()] {
                let r = implication_suite(&t, &lam, &ideal, &params()).unwrap();
                assert!(r.passed(), "{src}: {r:#?}");
            }
            let r = equivalence_suite(&t, &lam, None, &params()).unwrap();
            assert!(r.passed());
        }
    }

    #[test]
    fn spike_with_geometric_lambda_passes() {
        let t = spike(10_000);
        let lam = lambda_for_horizon("2^n", 10_000, 1001).unwrap();
        let r = implication_suite(&t, &lam, &Ideal::density_zero(), &params()).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert!(!r.bounded);
        assert_eq!(
            r.check(Theorem::BoundedStatToPStrong).unwrap().outcome,
            CheckOutcome::Skipped
        );
    }

    #[test]
    fn spike_with_identity_lambda_breaks_d_to_c() {
        // The block means of lambda(n) = n are the terms themselves, so the
        // strong D_lambda exceptional set is the squares (density zero),
        // while the running mean of the spikes grows like sqrt(n)/3.
        let t = spike(10_000);
        let lam = parse_lambda("n", 10_001).unwrap();
        let r = implication_suite(&t, &lam, &Ideal::density_zero(), &params()).unwrap();
        let c = r.check(Theorem::StrongDlambdaToClambda).unwrap();
        assert_eq!(c.outcome, CheckOutcome::CounterexampleCandidate);
        assert!(!r.passed());
        assert_eq!(r.containment_failures, 0);
    }

    #[test]
    fn printed_bounded_level_can_fail() {
        // deviations all 1.9, eps = 2, delta = 1.5, alpha = 2 after padding
        let mut row = vec![1.9; 400];
        row[0] = 2.0;
        let t = DistanceTrace::scalar(row, Some(0.0)).unwrap();
        let lam = parse_lambda("n", 401).unwrap();
        let r = implication_suite(&t, &lam, &Ideal::density_zero(), &SuiteParams::new(2.0, 1.5, 1.0)).unwrap();
        assert!(r.containments.iter().all(|c| c.holds), "{:#?}", r.containments);
        let printed = r
            .informational
            .iter()
            .find(|c| c.name == "p_strong_within_stat_delta_p_over_alpha_p")
            .unwrap();
        assert!(!printed.holds);
    }

    #[test]
    fn equivalences_on_bounded_alternation() {
        let row = (1..=2000).map(|k| if k % 2 == 0 { 1.0 } else { 3.0 }).collect();
        let t = DistanceTrace::scalar(row, Some(2.0)).unwrap();
        let lam = parse_lambda("n^2", 1001).unwrap();
        let mu = parse_lambda("n^3", 1001).unwrap();
        let r = equivalence_suite(&t, &lam, Some(&mu), &params()).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert_eq!(r.check(Theorem::C1ToClambda).unwrap().outcome, CheckOutcome::Pass);
        assert_eq!(r.check(Theorem::ClambdaToC1).unwrap().outcome, CheckOutcome::Pass);
        assert_eq!(
            r.check(Theorem::RatioClambdaToCmu).unwrap().outcome,
            CheckOutcome::Skipped
        );
    }
}
