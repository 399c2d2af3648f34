//! Tail-window estimates of the ratio hypotheses on `lambda`.
//!
//! A limit cannot be certified from a prefix, so each report names the
//! window it was computed on and carries only a hint.

use serde::Serialize;

use super::IndexMethod;
use crate::error::{Error, Result};

/// Tolerance of every condition hint.
pub const CONDITION_TOL: f64 = 1e-2;

/// Default `N` of the estimation window `[ceil(N/2), N]`.
pub const CONDITION_HORIZON: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    /// `limsup lambda(n+1)/lambda(n)`, compared with 1.
    LimsupStepRatio,
    /// `liminf lambda(n)/lambda(n-1)`, must exceed 1.
    LiminfBackRatio,
    /// `lim mu(n)/lambda(n)` for a companion `mu`, compared with 1.
    LimCompanionRatio,
    /// `lim n/lambda(n)`, must be positive.
    LimInverseDensity,
    /// `limsup lambda(n)/lambda(n-1)`, must be finite.
    LimsupBackRatio,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::LimsupStepRatio,
        Quantity::LiminfBackRatio,
        Quantity::LimCompanionRatio,
        Quantity::LimInverseDensity,
        Quantity::LimsupBackRatio,
    ];

    pub fn describe(self) -> &'static str {
        match self {
            Quantity::LimsupStepRatio => "limsup lambda(n+1)/lambda(n) = 1",
            Quantity::LiminfBackRatio => "liminf lambda(n)/lambda(n-1) > 1",
            Quantity::LimCompanionRatio => "lim mu(n)/lambda(n) = 1",
            Quantity::LimInverseDensity => "lim n/lambda(n) > 0",
            Quantity::LimsupBackRatio => "limsup lambda(n)/lambda(n-1) < inf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionHint {
    SatisfiesCondition,
    FailsCondition,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub quantity: Quantity,
    pub condition: &'static str,
    pub method: String,
    pub companion: Option<String>,
    pub estimate: f64,
    /// Inclusive `n` range the estimate was computed on.
    pub window: (usize, usize),
    /// `max - min` of the ratio over the window.
    pub spread: f64,
    pub tolerance: f64,
    pub verdict_hint: ConditionHint,
}

/// Estimates `which` on the window `[ceil(N/2), N]`.
///
/// limsup quantities take the window maximum, liminf the minimum, and limits
/// the value at the window end (with the window spread reported alongside).
pub fn ratio_condition(
    lambda: &IndexMethod,
    which: Quantity,
    horizon: usize,
    companion: Option<&IndexMethod>,
) -> Result<ConditionReport> {
    if horizon < 4 {
        return Err(Error::InvalidParameter {
            name: "horizon",
            reason: format!("{horizon} < 4"),
        });
    }
    match (which, companion) {
        (Quantity::LimCompanionRatio, None) => return Err(Error::MissingParameter("companion")),
        (Quantity::LimCompanionRatio, Some(_)) => {}
        (_, Some(_)) => {
            return Err(Error::InvalidParameter {
                name: "companion",
                reason: "only used for lim mu(n)/lambda(n)".into(),
            })
        }
        _ => {}
    }
    let lo = horizon.div_ceil(2);
    let f = |n: usize| -> Result<f64> {
        Ok(match which {
            Quantity::LimsupStepRatio => lambda.get(n + 1)? as f64 / lambda.get(n)? as f64,
            Quantity::LiminfBackRatio | Quantity::LimsupBackRatio => {
                lambda.get(n)? as f64 / lambda.get(n - 1)? as f64
            }
            Quantity::LimCompanionRatio => {
                companion.expect("checked above").get(n)? as f64 / lambda.get(n)? as f64
            }
            Quantity::LimInverseDensity => n as f64 / lambda.get(n)? as f64,
        })
    };
    let ratios = (lo..=horizon).map(f).collect::<Result<Vec<_>>>()?;
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let last = *ratios.last().expect("window is nonempty");
    let spread = max - min;
    let tol = CONDITION_TOL;

    let (estimate, hint) = match which {
        Quantity::LimsupStepRatio => (max, pass((max - 1.0).abs() <= tol)),
        Quantity::LiminfBackRatio => (min, pass(min > 1.0 + tol)),
        Quantity::LimCompanionRatio => {
            let hint = if (last - 1.0).abs() > tol {
                ConditionHint::FailsCondition
            } else if spread > tol {
                ConditionHint::Inconclusive
            } else {
                ConditionHint::SatisfiesCondition
            };
            (last, hint)
        }
        Quantity::LimInverseDensity => (last, pass(last > tol)),
        Quantity::LimsupBackRatio => {
            // Finite iff the ratio stops growing across the window.
            let mid = ratios.len() / 2;
            let first = ratios[..mid.max(1)].iter().copied().fold(0.0, f64::max);
            let second = ratios[mid..].iter().copied().fold(0.0, f64::max);
            (max, pass(second <= first * (1.0 + tol)))
        }
    };

    Ok(ConditionReport {
        quantity: which,
        condition: which.describe(),
        method: lambda.label().to_string(),
        companion: companion.map(|m| m.label().to_string()),
        estimate,
        window: (lo, horizon),
        spread,
        tolerance: tol,
        verdict_hint: hint,
    })
}

fn pass(ok: bool) -> ConditionHint {
    if ok {
        ConditionHint::SatisfiesCondition
    } else {
        ConditionHint::FailsCondition
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_methods::parse_lambda;

    fn m(src: &str, n: usize) -> IndexMethod {
        parse_lambda(src, n).unwrap()
    }

    #[test]
    fn squares_step_ratio() {
        let r = ratio_condition(&m("n^2", 1001), Quantity::LimsupStepRatio, 1000, None).unwrap();
        assert_eq!(r.window, (500, 1000));
        // max over the window is at n = 500: (501/500)^2
        assert!((r.estimate - (501.0f64 / 500.0).powi(2)).abs() < 1e-15);
        assert!((r.estimate - 1.0).abs() < 0.01);
        assert_eq!(r.verdict_hint, ConditionHint::SatisfiesCondition);
    }

    #[test]
    fn geometric_back_ratio() {
        let r = ratio_condition(&m("2^n", 41), Quantity::LiminfBackRatio, 40, None).unwrap();
        assert_eq!(r.estimate, 2.0);
        assert_eq!(r.verdict_hint, ConditionHint::SatisfiesCondition);
        let r = ratio_condition(&m("2^n", 41), Quantity::LimsupBackRatio, 40, None).unwrap();
        assert_eq!(r.estimate, 2.0);
        assert_eq!(r.verdict_hint, ConditionHint::SatisfiesCondition);
        // (n/(n-1))^2 only drops below 1.01 past n = 200
        let r = ratio_condition(&m("n^2", 41), Quantity::LiminfBackRatio, 40, None).unwrap();
        assert_eq!(r.verdict_hint, ConditionHint::SatisfiesCondition);
        let r = ratio_condition(&m("n^2", 1001), Quantity::LiminfBackRatio, 1000, None).unwrap();
        assert_eq!(r.verdict_hint, ConditionHint::FailsCondition);
    }

    #[test]
    fn companion_ratio() {
        let lambda = m("n^2", 1001);
        let mu = m("n^3", 1001);
        let r = ratio_condition(&lambda, Quantity::LimCompanionRatio, 1000, Some(&mu)).unwrap();
        assert_eq!(r.estimate, 1000.0);
        assert_eq!(r.verdict_hint, ConditionHint::FailsCondition);

        let near = m("n^2+n", 1001);
        let r = ratio_condition(&lambda, Quantity::LimCompanionRatio, 1000, Some(&near)).unwrap();
        assert_eq!(r.verdict_hint, ConditionHint::SatisfiesCondition);

        assert!(matches!(
            ratio_condition(&lambda, Quantity::LimCompanionRatio, 1000, None),
            Err(Error::MissingParameter("companion"))
        ));
    }

    #[test]
    fn inverse_density() {
        let r = ratio_condition(&m("2n", 100), Quantity::LimInverseDensity, 100, None).unwrap();
        assert_eq!(r.estimate, 0.5);
        assert_eq!(r.verdict_hint, ConditionHint::SatisfiesCondition);
        let r = ratio_condition(&m("n^2", 1000), Quantity::LimInverseDensity, 1000, None).unwrap();
        assert_eq!(r.verdict_hint, ConditionHint::FailsCondition);
    }

    #[test]
    fn growing_back_ratio_fails() {
        // lambda(n) = n!, ratio n grows without bound.
        let fact = IndexMethod::from_fn("n!", 20, |n| (1..=n).product()).unwrap();
        let r = ratio_condition(&fact, Quantity::LimsupBackRatio, 20, None).unwrap();
        assert_eq!(r.verdict_hint, ConditionHint::FailsCondition);
    }

    #[test]
    fn errors() {
        assert!(ratio_condition(&m("n", 10), Quantity::LimsupStepRatio, 3, None).is_err());
        assert!(matches!(
            ratio_condition(&m("n", 10), Quantity::LimsupStepRatio, 10, None),
            Err(Error::HorizonExceeded { .. })
        ));
    }
}
