use serde::Serialize;

use super::{member_estimate, Ideal, IndexSet, Membership, MembershipEstimate};
use crate::error::{Error, Result};
use crate::index_methods::IndexMethod;
use crate::metric_sets::DistanceTrace;
use crate::statistical::c_lambda_stat_density;
use crate::transforms::{self, MeanSeries, StrongMethod};

/// Smallest trace horizon accepted by [`ideal_verdict`].
pub const MIN_TRACE_HORIZON: usize = 100;
/// Smallest number of `n` entries a lambda-indexed verdict may rest on.
pub const MIN_INDEX_ENTRIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum VerdictMode {
    /// `{k : |d(x,A_k) - d(x,A)| >= eps}` in I.
    IConv,
    /// `{n : |C_lambda(d)_n - d(x,A)| >= eps}` in I.
    IClambdaSummable,
    /// `{n : strong C_lambda mean (p = 1) >= eps}` in I.
    StrongIClambda,
    /// `{n : strong D_lambda mean (p = 1) >= eps}` in I.
    StrongIDlambda,
    /// `{m : strong C1 mean (p = 1) >= eps}` in I.
    StrongIC1,
    /// `{n : C_lambda density of eps-exceedances >= delta}` in I.
    IClambdaStat,
    /// `{n : strong C_lambda mean of order p >= eps}` in I.
    PStrongIClambda,
    /// `{n : |D_lambda(d)_n - d(x,A)| >= eps}` in I.
    IDlambdaSummable,
    /// `{m : |C1(d)_m - d(x,A)| >= eps}` in I.
    IC1Summable,
}

impl VerdictMode {
    /// The seven convergence modes reported for every scenario.
    pub const PRIMARY: [VerdictMode; 7] = [
        VerdictMode::IConv,
        VerdictMode::IClambdaSummable,
        VerdictMode::StrongIClambda,
        VerdictMode::StrongIDlambda,
        VerdictMode::StrongIC1,
        VerdictMode::IClambdaStat,
        VerdictMode::PStrongIClambda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VerdictMode::IConv => "i_conv",
            VerdictMode::IClambdaSummable => "i_c_lambda_summable",
            VerdictMode::StrongIClambda => "strong_i_c_lambda",
            VerdictMode::StrongIDlambda => "strong_i_d_lambda",
            VerdictMode::StrongIC1 => "strong_i_c1",
            VerdictMode::IClambdaStat => "i_c_lambda_stat",
            VerdictMode::PStrongIClambda => "p_strong_i_c_lambda",
            VerdictMode::IDlambdaSummable => "i_d_lambda_summable",
            VerdictMode::IC1Summable => "i_c1_summable",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_lowercase();
        [
            VerdictMode::IConv,
            VerdictMode::IClambdaSummable,
            VerdictMode::StrongIClambda,
            VerdictMode::StrongIDlambda,
            VerdictMode::StrongIC1,
            VerdictMode::IClambdaStat,
            VerdictMode::PStrongIClambda,
            VerdictMode::IDlambdaSummable,
            VerdictMode::IC1Summable,
        ]
        .into_iter()
        .find(|m| {
            let a = m.name().replace('_', "");
            let b = format!("{m:?}").to_ascii_lowercase();
            norm == a || norm == b
        })
        .ok_or_else(|| Error::Parse(format!("unknown verdict mode '{s}'")))
    }

    /// Whether the exceptional set is indexed by `n` through `lambda`.
    pub fn uses_lambda(self) -> bool {
        !matches!(
            self,
            VerdictMode::IConv | VerdictMode::StrongIC1 | VerdictMode::IC1Summable
        )
    }

    fn needs_delta(self) -> bool {
        self == VerdictMode::IClambdaStat
    }

    fn needs_p(self) -> bool {
        self == VerdictMode::PStrongIClambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Consistent,
    Violated,
    Inconclusive,
}

impl From<Membership> for Status {
    fn from(m: Membership) -> Self {
        match m {
            Membership::InIdealConsistent => Status::Consistent,
            Membership::NotInIdealConsistent => Status::Violated,
            Membership::Inconclusive => Status::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictParams {
    pub eps: f64,
    pub delta: Option<f64>,
    pub p: Option<f64>,
}

impl VerdictParams {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            delta: None,
            p: None,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    fn positive(name: &'static str, v: f64) -> Result<f64> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter {
                name,
                reason: format!("{v} is not a positive real"),
            })
        }
    }

    fn validate(&self, mode: VerdictMode) -> Result<()> {
        Self::positive("eps", self.eps)?;
        if let Some(d) = self.delta {
            Self::positive("delta", d)?;
        }
        if let Some(p) = self.p {
            Self::positive("p", p)?;
        }
        if mode.needs_delta() && self.delta.is_none() {
            return Err(Error::MissingParameter("delta"));
        }
        if mode.needs_p() && self.p.is_none() {
            return Err(Error::MissingParameter("p"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeVerdict {
    pub probe: usize,
    pub status: Status,
    /// Density estimate of the exceptional set.
    pub witness: MembershipEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealVerdict {
    pub mode: VerdictMode,
    pub ideal: Ideal,
    pub lambda: String,
    pub params: VerdictParams,
    /// Length of the exceptional-set indicator.
    pub index_horizon: usize,
    pub probes: Vec<ProbeVerdict>,
}

impl IdealVerdict {
    /// Violated if any probe is, else Inconclusive if any probe is, else Consistent.
    pub fn overall(&self) -> Status {
        let any = |s| self.probes.iter().any(|p| p.status == s);
        if any(Status::Violated) {
            Status::Violated
        } else if any(Status::Inconclusive) {
            Status::Inconclusive
        } else {
            Status::Consistent
        }
    }

    pub fn status(&self, probe: usize) -> Status {
        self.probes[probe].status
    }
}

fn check_horizon(trace: &DistanceTrace, mode: VerdictMode, lambda: &IndexMethod) -> Result<()> {
    if trace.horizon() < MIN_TRACE_HORIZON {
        return Err(Error::HorizonTooSmall {
            entries: trace.horizon(),
            required: MIN_TRACE_HORIZON,
        });
    }
    if mode.uses_lambda() {
        let n_h = lambda.n_horizon(trace.horizon());
        if n_h < MIN_INDEX_ENTRIES {
            return Err(Error::HorizonTooSmall {
                entries: n_h,
                required: MIN_INDEX_ENTRIES,
            });
        }
    }
    Ok(())
}

fn above(series: &MeanSeries, level: f64) -> Vec<IndexSet> {
    series
        .values
        .iter()
        .map(|row| IndexSet::from_fn(row.len(), |n| row[n - 1] >= level))
        .collect()
}

fn far_from_target(series: &MeanSeries, target: &[f64], eps: f64) -> Vec<IndexSet> {
    series
        .values
        .iter()
        .zip(target)
        .map(|(row, &t)| IndexSet::from_fn(row.len(), |n| (row[n - 1] - t).abs() >= eps))
        .collect()
}

/// Per-probe exceptional index sets of `mode`. No horizon minimum is
/// enforced here.
pub fn exceptional_sets(
    mode: VerdictMode,
    trace: &DistanceTrace,
    lambda: &IndexMethod,
    params: &VerdictParams,
) -> Result<Vec<IndexSet>> {
    params.validate(mode)?;
    let target = trace.require_target()?;
    let eps = params.eps;
    let strong = |m| transforms::strong_mean(trace, m, lambda, 1.0);
    Ok(match mode {
        VerdictMode::IConv => trace
            .rows()
            .iter()
            .zip(target)
            .map(|(row, &t)| IndexSet::from_fn(row.len(), |k| (row[k - 1] - t).abs() >= eps))
            .collect(),
        VerdictMode::IClambdaSummable => {
            far_from_target(&transforms::c_lambda(trace, lambda)?, target, eps)
        }
        VerdictMode::IDlambdaSummable => {
            far_from_target(&transforms::d_lambda(trace, lambda)?, target, eps)
        }
        VerdictMode::IC1Summable => far_from_target(&transforms::c1(trace), target, eps),
        VerdictMode::StrongIClambda => above(&strong(StrongMethod::Clambda)?, eps),
        VerdictMode::StrongIDlambda => above(&strong(StrongMethod::Dlambda)?, eps),
        VerdictMode::StrongIC1 => above(&strong(StrongMethod::C1)?, eps),
        VerdictMode::PStrongIClambda => {
            let p = params.p.expect("validated");
            above(
                &transforms::strong_mean(trace, StrongMethod::Clambda, lambda, p)?,
                eps,
            )
        }
        VerdictMode::IClambdaStat => {
            let delta = params.delta.expect("validated");
            let dens = c_lambda_stat_density(trace, lambda, eps)?;
            dens.values
                .iter()
                .map(|row| IndexSet::from_fn(row.len(), |n| row[n - 1] >= delta))
                .collect()
        }
    })
}

/// Builds the exceptional sets of `mode` and estimates their membership in
/// `ideal`, one verdict per probe.
pub fn ideal_verdict(
    mode: VerdictMode,
    trace: &DistanceTrace,
    lambda: &IndexMethod,
    ideal: &Ideal,
    params: &VerdictParams,
) -> Result<IdealVerdict> {
    ideal.validate()?;
    params.validate(mode)?;
    check_horizon(trace, mode, lambda)?;
    let sets = exceptional_sets(mode, trace, lambda, params)?;
    Ok(verdict_from_sets(mode, ideal, lambda, params, &sets))
}

pub(super) fn verdict_from_sets(
    mode: VerdictMode,
    ideal: &Ideal,
    lambda: &IndexMethod,
    params: &VerdictParams,
    sets: &[IndexSet],
) -> IdealVerdict {
    let probes = sets
        .iter()
        .enumerate()
        .map(|(probe, s)| {
            let witness = member_estimate(ideal, s);
            ProbeVerdict {
                probe,
                status: witness.status.into(),
                witness,
            }
        })
        .collect();
    IdealVerdict {
        mode,
        ideal: *ideal,
        lambda: if mode.uses_lambda() {
            lambda.label().to_string()
        } else {
            "n".to_string()
        },
        params: *params,
        index_horizon: sets.first().map_or(0, IndexSet::horizon),
        probes,
    }
}
