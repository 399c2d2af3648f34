//! Run configuration and command execution behind the `wijsum` binary.
//!
//! A [`RunConfig`] is built from `key = value` pairs, whether they come
//! from a config file or from command-line flags, and [`execute`] turns it
//! into an [`Outcome`]: the CSV or JSON bytes, a short human summary and
//! the exit code (0 success, 1 diffs or violations, 2 input errors).

mod output;
mod shapes;

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

pub use output::{
    density_rows, fmt_f64, parse_trace_csv, read_trace_csv, series_rows, trace_rows, write_csv,
    write_json, CsvRow, CSV_HEADER,
};
pub use shapes::{
    parse_point, parse_points, parse_real, parse_sequence, parse_set, parse_shape, RealExpr,
    SequenceExpr, ShapeExpr,
};

use crate::error::{Error, Result};
use crate::ideals::{ideal_verdict, IdealVerdict, Status, VerdictMode, VerdictParams, MIN_TRACE_HORIZON};
use crate::identities::identity_suite;
use crate::index_methods::{
    lambda_for_horizon, regularity_report, ConditionHint, ConditionReport, IndexMethod, Quantity,
    RMatrix, RegularityReport, RegularityVerdict, TMatrix,
};
use crate::metric_sets::{self, DistanceTrace};
use crate::scenarios::{self, Expect, Expected, Provenance, Scenario};
use crate::statistical::{bounded_split_check, c_lambda_stat_density, chebyshev_check, DensitySeries};
use crate::transforms::{self, MeanSeries, SeriesKind, StrongMethod};
use crate::{Ideal, IdealKind};

/// Largest accepted trace horizon.
pub const MAX_HORIZON: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Transform,
    Density,
    Verdict,
    Scenario,
    Identities,
    Conditions,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Transform,
        Command::Density,
        Command::Verdict,
        Command::Scenario,
        Command::Identities,
        Command::Conditions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Density => "density",
            Command::Verdict => "verdict",
            Command::Scenario => "scenario",
            Command::Identities => "identities",
            Command::Conditions => "conditions",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Transform | Command::Density => Format::Csv,
            _ => Format::Json,
        }
    }

    fn default_horizon(self) -> usize {
        match self {
            Command::Identities => 500,
            _ => 1000,
        }
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

fn parse_ideal(s: &str) -> Result<IdealKind> {
    match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
        "fin" => Ok(IdealKind::Fin),
        "density-zero" | "densityzero" | "dz" => Ok(IdealKind::DensityZero),
        other => Err(Error::Parse(format!("unknown ideal `{other}`"))),
    }
}

/// Everything a run depends on. Serialized verbatim (minus the output path)
/// as the `config` echo of every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub lambda: String,
    pub mu: Option<String>,
    /// Trace horizon N; defaults per command.
    pub horizon: Option<usize>,
    pub eps: f64,
    pub delta: f64,
    pub p: f64,
    pub tol: f64,
    pub probes: Vec<String>,
    pub ideal: IdealKind,
    pub threshold: f64,
    pub format: Option<Format>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// Catalog scenario name.
    pub name: Option<String>,
    pub sequence: Option<String>,
    pub target: Option<String>,
    pub trace_path: Option<PathBuf>,
    pub suite_lambdas: Vec<String>,
    pub modes: Vec<String>,
    /// Number of random traces for `identities`.
    pub traces: usize,
    pub timing: bool,
    pub expects: Vec<String>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            lambda: "n^2".into(),
            mu: None,
            horizon: None,
            eps: 0.5,
            delta: 0.25,
            p: 1.0,
            tol: 1e-12,
            probes: Vec::new(),
            ideal: IdealKind::DensityZero,
            threshold: Ideal::DEFAULT_THRESHOLD,
            format: None,
            out: None,
            seed: 0,
            name: None,
            sequence: None,
            target: None,
            trace_path: None,
            suite_lambdas: Vec::new(),
            modes: Vec::new(),
            traces: 100,
            timing: false,
            expects: Vec::new(),
        }
    }

    /// Builds a config from `key = value` pairs applied in order. The command
    /// comes from `command`, else from a `command` pair.
    pub fn from_pairs(command: Option<Command>, pairs: &[(String, String)]) -> Result<Self> {
        let from_pairs = pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "command")
            .map(|(_, v)| v.parse())
            .transpose()?;
        let cmd = command
            .or(from_pairs)
            .ok_or(Error::MissingParameter("command"))?;
        let mut cfg = RunConfig::new(cmd);
        for (k, v) in pairs {
            if k != "command" {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }

    /// Applies one setting. `probe`, `suite_lambda`, `mode` and `expect`
    /// accumulate; every other key overwrites.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let num = |name: &'static str| -> Result<f64> {
            parse_real(v)
                .ok()
                .filter(|e| !e.uses_k())
                .map(|e| e.eval(0.0))
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidParameter {
                    name,
                    reason: format!("`{v}` is not a number"),
                })
        };
        let int = |name: &'static str| -> Result<u64> {
            v.parse().map_err(|_| Error::InvalidParameter {
                name,
                reason: format!("`{v}` is not a nonnegative integer"),
            })
        };
        match key.trim().replace('-', "_").as_str() {
            "lambda" => self.lambda = v.into(),
            "mu" => self.mu = Some(v.into()),
            "horizon" => self.horizon = Some(int("horizon")? as usize),
            "eps" => self.eps = num("eps")?,
            "delta" => self.delta = num("delta")?,
            "p" => self.p = num("p")?,
            "tol" => self.tol = num("tol")?,
            "probe" | "probes" => self.probes.push(v.into()),
            "ideal" => self.ideal = parse_ideal(v)?,
            "threshold" => self.threshold = num("threshold")?,
            "format" => self.format = Some(v.parse()?),
            "out" => self.out = Some(PathBuf::from(v)),
            "seed" => self.seed = int("seed")?,
            "name" => self.name = Some(v.into()),
            "sequence" => self.sequence = Some(v.into()),
            "target" => self.target = Some(v.into()),
            "trace" | "trace_path" => self.trace_path = Some(PathBuf::from(v)),
            "suite_lambda" | "suite_lambdas" => self.suite_lambdas.push(v.into()),
            "mode" | "modes" => self.modes.push(v.into()),
            "traces" => self.traces = int("traces")? as usize,
            "timing" => {
                self.timing = match v {
                    "" | "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(Error::Parse(format!("timing = `{v}`"))),
                }
            }
            "expect" | "expects" => self.expects.push(v.into()),
            other => return Err(Error::Parse(format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(self.command.default_format())
    }

    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or(self.command.default_horizon())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} is not positive"),
                })
            }
        };
        positive("eps", self.eps)?;
        positive("delta", self.delta)?;
        positive("tol", self.tol)?;
        if self.p < 1.0 {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("{} < 1", self.p),
            });
        }
        Ideal::density_zero().with_threshold(self.threshold).validate()?;
        let n = self.horizon();
        if n == 0 || n > MAX_HORIZON {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: format!("{n} not in 1..={MAX_HORIZON}"),
            });
        }
        if self.command == Command::Verdict && n < MIN_TRACE_HORIZON && self.trace_path.is_none() {
            return Err(Error::HorizonTooSmall {
                entries: n,
                required: MIN_TRACE_HORIZON,
            });
        }
        if self.traces == 0 {
            return Err(Error::InvalidParameter {
                name: "traces",
                reason: "must be at least 1".into(),
            });
        }
        if !self.expects.is_empty()
            && !matches!(self.command, Command::Verdict | Command::Conditions | Command::Scenario)
        {
            return Err(Error::Parse(format!(
                "`expect` is not supported by `{}`",
                self.command.name()
            )));
        }
        Ok(())
    }
}

/// Splits a config file into `key = value` pairs. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected `key = value`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Result of [`execute`].
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub output: Vec<u8>,
    /// Human-readable summary for the diagnostic stream.
    pub summary: String,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    config: &'a RunConfig,
    report: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
}

struct Produced {
    json: serde_json::Value,
    rows: Vec<CsvRow>,
    failed: bool,
    summary: String,
}

/// Runs `cfg`. Input errors produce exit code 2 and no output.
pub fn execute(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    match produce(cfg).and_then(|p| render(cfg, p, start)) {
        Ok(o) => o,
        Err(e) => Outcome {
            exit_code: 2,
            output: Vec::new(),
            summary: format!("error: {e}"),
        },
    }
}

fn render(cfg: &RunConfig, p: Produced, start: Instant) -> Result<Outcome> {
    let output = match cfg.format() {
        Format::Csv => write_csv(&p.rows)?,
        Format::Json => write_json(&Envelope {
            config: cfg,
            report: &p.json,
            wall_time_s: cfg.timing.then(|| start.elapsed().as_secs_f64()),
        })?,
    };
    Ok(Outcome {
        exit_code: if p.failed { 1 } else { 0 },
        output,
        summary: p.summary,
    })
}

fn to_value(v: &impl Serialize) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn produce(cfg: &RunConfig) -> Result<Produced> {
    cfg.validate()?;
    match cfg.command {
        Command::Transform => transform_cmd(cfg),
        Command::Density => density_cmd(cfg),
        Command::Verdict => verdict_cmd(cfg),
        Command::Scenario => scenario_cmd(cfg),
        Command::Identities => identities_cmd(cfg),
        Command::Conditions => conditions_cmd(cfg),
    }
}

/// The trace named by `trace_path`, or the one generated from
/// `sequence`/`probes`/`target`.
fn load_trace(cfg: &RunConfig) -> Result<DistanceTrace> {
    if let Some(path) = &cfg.trace_path {
        if cfg.sequence.is_some() {
            return Err(Error::Parse("give either `trace` or `sequence`, not both".into()));
        }
        let t = read_trace_csv(path)?;
        return match cfg.horizon {
            Some(n) if n < t.horizon() => t.truncated(n),
            Some(n) if n > t.horizon() => Err(Error::HorizonExceeded {
                needed: n as u64,
                available: t.horizon() as u64,
            }),
            _ => Ok(t),
        };
    }
    let src = cfg.sequence.as_deref().ok_or(Error::MissingParameter("sequence"))?;
    let n = cfg.horizon();
    let seq = parse_sequence(src)?;
    seq.validate(n)?;
    let probes = probes_of(cfg)?;
    let target = cfg.target.as_deref().map(parse_set).transpose()?;
    let seq = seq.into_sequence(src.to_string());
    metric_sets::trace(&seq, &probes, n, target.as_ref())
}

fn probes_of(cfg: &RunConfig) -> Result<Vec<metric_sets::MetricPoint>> {
    let mut out = Vec::new();
    for p in &cfg.probes {
        out.extend(parse_points(p)?);
    }
    if out.is_empty() {
        return Err(Error::MissingParameter("probe"));
    }
    Ok(out)
}

fn method(spec: &str, horizon: usize) -> Result<IndexMethod> {
    lambda_for_horizon(spec, horizon, 0)
}

#[derive(Serialize)]
struct TransformReport<'a> {
    trace_horizon: usize,
    probes: &'a [metric_sets::MetricPoint],
    target: Option<&'a [f64]>,
    series: &'a [MeanSeries],
}

fn csv_kind(s: &MeanSeries, lambda: &str) -> String {
    match s.kind {
        SeriesKind::Clambda if s.method != lambda => "c_mu".into(),
        k => k.name(),
    }
}

fn transform_cmd(cfg: &RunConfig) -> Result<Produced> {
    let trace = load_trace(cfg)?;
    let n = trace.horizon();
    let lambda = method(&cfg.lambda, n)?;
    let mut series = vec![
        transforms::c1(&trace),
        transforms::c_lambda(&trace, &lambda)?,
        transforms::d_lambda(&trace, &lambda)?,
    ];
    if let Some(mu) = &cfg.mu {
        series.push(transforms::c_lambda(&trace, &method(mu, n)?)?);
    }
    if trace.target_row().is_some() {
        for m in [StrongMethod::Clambda, StrongMethod::Dlambda, StrongMethod::C1] {
            series.push(transforms::strong_mean(&trace, m, &lambda, cfg.p)?);
        }
    }
    let mut rows = trace_rows(&trace);
    for s in &series {
        rows.extend(series_rows(s, Some(&csv_kind(s, lambda.label()))));
    }
    let json = to_value(&TransformReport {
        trace_horizon: n,
        probes: trace.probes(),
        target: trace.target_row(),
        series: &series,
    })?;
    Ok(Produced {
        json,
        rows,
        failed: false,
        summary: format!(
            "transform: N = {n}, {} probes, lambda = {}, {} series",
            trace.num_probes(),
            lambda.label(),
            series.len()
        ),
    })
}

#[derive(Serialize)]
struct DensityReport<'a> {
    eps: f64,
    p: f64,
    trace_horizon: usize,
    /// Plain statistical density at N, per probe.
    final_density: Vec<f64>,
    densities: [&'a DensitySeries; 2],
    inequalities: Vec<(&'static str, crate::statistical::InequalityReport)>,
}

fn density_cmd(cfg: &RunConfig) -> Result<Produced> {
    let trace = load_trace(cfg)?;
    let n = trace.horizon();
    let lambda = method(&cfg.lambda, n)?;
    let stat = c_lambda_stat_density(&trace, &IndexMethod::identity(n), cfg.eps)?;
    let dens = c_lambda_stat_density(&trace, &lambda, cfg.eps)?;
    let strong = transforms::strong_mean(&trace, StrongMethod::Clambda, &lambda, cfg.p)?;
    let alpha = strong.max_deviation.clone().expect("strong series");
    let inequalities = vec![
        ("chebyshev", chebyshev_check(&strong, &dens, cfg.eps, cfg.p)?),
        ("bounded_split", bounded_split_check(&strong, &dens, cfg.eps, cfg.p, &alpha)?),
    ];
    let failed = inequalities.iter().any(|(_, r)| !r.holds);
    let final_density: Vec<f64> = (0..trace.num_probes()).map(|p| stat.at(p, n)).collect();
    let mut rows = density_rows(&stat, "stat_density");
    rows.extend(density_rows(&dens, "c_lambda_stat_density"));
    rows.extend(series_rows(&strong, None));
    let summary = format!(
        "density: eps = {}, statistical density at N = {n}: {:?}; inequalities {}",
        cfg.eps,
        final_density,
        if failed { "VIOLATED" } else { "hold" }
    );
    let json = to_value(&DensityReport {
        eps: cfg.eps,
        p: cfg.p,
        trace_horizon: n,
        final_density,
        densities: [&stat, &dens],
        inequalities,
    })?;
    Ok(Produced {
        json,
        rows,
        failed,
        summary,
    })
}

/// Expected-vs-actual comparison for the `verdict` and `conditions` commands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectCheck {
    pub key: String,
    pub expected: String,
    pub actual: String,
    pub matches: bool,
}

fn split_expect(e: &str) -> Result<(&str, &str)> {
    e.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::Parse(format!("expectation `{e}` is not `key=value`")))
}

fn parse_status(s: &str) -> Result<Status> {
    match s.to_ascii_lowercase().as_str() {
        "consistent" => Ok(Status::Consistent),
        "violated" => Ok(Status::Violated),
        "inconclusive" => Ok(Status::Inconclusive),
        _ => Err(Error::Parse(format!("unknown status `{s}`"))),
    }
}

fn status_code(s: Status) -> f64 {
    match s {
        Status::Consistent => 1.0,
        Status::Violated => 0.0,
        Status::Inconclusive => -1.0,
    }
}

#[derive(Serialize)]
struct VerdictReport {
    trace_horizon: usize,
    lambda: String,
    verdicts: Vec<IdealVerdict>,
    expectations: Vec<ExpectCheck>,
    diffs: usize,
}

fn verdict_cmd(cfg: &RunConfig) -> Result<Produced> {
    let trace = load_trace(cfg)?;
    let n = trace.horizon();
    let lambda = method(&cfg.lambda, n)?;
    let ideal = match cfg.ideal {
        IdealKind::Fin => Ideal::fin(),
        IdealKind::DensityZero => Ideal::density_zero(),
    }
    .with_threshold(cfg.threshold);
    let params = VerdictParams::new(cfg.eps).with_delta(cfg.delta).with_p(cfg.p);
    let modes = if cfg.modes.is_empty() {
        VerdictMode::PRIMARY.to_vec()
    } else {
        cfg.modes.iter().map(|m| VerdictMode::parse(m)).collect::<Result<_>>()?
    };
    let verdicts = modes
        .iter()
        .map(|&m| ideal_verdict(m, &trace, &lambda, &ideal, &params))
        .collect::<Result<Vec<_>>>()?;
    let mut expectations = Vec::new();
    for e in &cfg.expects {
        let (k, v) = split_expect(e)?;
        let mode = VerdictMode::parse(k)?;
        let want = parse_status(v)?;
        let actual = verdicts.iter().find(|x| x.mode == mode).map(|x| x.overall());
        expectations.push(ExpectCheck {
            key: mode.name().into(),
            expected: format!("{want:?}"),
            actual: actual.map(|s| format!("{s:?}")).unwrap_or_else(|| "missing".into()),
            matches: actual == Some(want),
        });
    }
    let diffs = expectations.iter().filter(|e| !e.matches).count();
    let mut rows = Vec::new();
    for v in &verdicts {
        for pv in &v.probes {
            let base = CsvRow {
                probe: Some(pv.probe),
                n: Some(pv.witness.horizon as u64),
                lambda_n: None,
                kind: format!("{}_density", v.mode.name()),
                value: pv.witness.full_density,
            };
            rows.push(CsvRow {
                kind: format!("{}_status", v.mode.name()),
                value: status_code(pv.status),
                ..base.clone()
            });
            rows.push(base);
        }
    }
    let summary = verdicts
        .iter()
        .map(|v| format!("{} {:?}", v.mode.name(), v.overall()))
        .chain((diffs > 0).then(|| format!("{diffs} expectation diffs")))
        .collect::<Vec<_>>()
        .join("; ");
    let json = to_value(&VerdictReport {
        trace_horizon: n,
        lambda: lambda.label().into(),
        verdicts,
        expectations,
        diffs,
    })?;
    Ok(Produced {
        json,
        rows,
        failed: diffs > 0,
        summary,
    })
}

fn custom_scenario(cfg: &RunConfig) -> Result<Scenario> {
    let src = cfg.sequence.as_deref().ok_or(Error::MissingParameter("sequence"))?;
    let target_src = cfg.target.as_deref().ok_or(Error::MissingParameter("target"))?;
    let n = cfg.horizon();
    let seq = parse_sequence(src)?;
    seq.validate(n)?;
    let mut expected = Vec::new();
    for e in &cfg.expects {
        let (k, v) = split_expect(e)?;
        expected.push(Expected {
            check: Expect::Verdict {
                mode: VerdictMode::parse(k)?,
                ideal: cfg.ideal,
                method: None,
                probe: None,
                status: parse_status(v)?,
            },
            tag: Provenance::Derived,
        });
    }
    Ok(Scenario {
        name: cfg.name.clone().unwrap_or_else(|| "custom".into()),
        description: format!("user-defined sequence {src}"),
        seq: seq.into_sequence(src.to_string()),
        target: Some(parse_set(target_src)?),
        probes: probes_of(cfg)?,
        lambda: cfg.lambda.clone(),
        mu: cfg.mu.clone(),
        eps: cfg.eps,
        delta: cfg.delta,
        p: cfg.p,
        horizon: n,
        threshold: cfg.threshold,
        suite_lambdas: cfg.suite_lambdas.clone(),
        expected,
    })
}

fn scenario_cmd(cfg: &RunConfig) -> Result<Produced> {
    let sc = match (&cfg.name, &cfg.sequence) {
        (Some(name), None) => {
            if !cfg.expects.is_empty() {
                return Err(Error::Parse("catalog scenarios carry their own expectations".into()));
            }
            let mut sc = scenarios::builtin(name)?;
            sc.suite_lambdas = cfg.suite_lambdas.clone();
            sc
        }
        (_, Some(_)) => custom_scenario(cfg)?,
        (None, None) => return Err(Error::MissingParameter("name")),
    };
    let report = scenarios::run(&sc)?;
    let ineq_failed = report.inequalities.iter().any(|i| !i.report.holds);
    let failed = !report.ok() || ineq_failed;
    let mut rows = trace_rows(&report.trace);
    for s in &report.series {
        rows.extend(series_rows(s, Some(&csv_kind(s, &report.params.lambda))));
    }
    let summary = format!(
        "scenario {}: {} expectations, {} diffs, {} counterexample candidates, {} containment failures{}",
        report.name,
        report.expectations.len(),
        report.diffs,
        report.counterexample_candidates,
        report.containment_failures,
        if ineq_failed { ", inequality VIOLATED" } else { "" }
    );
    Ok(Produced {
        json: to_value(&report)?,
        rows,
        failed,
        summary,
    })
}

fn identities_cmd(cfg: &RunConfig) -> Result<Produced> {
    let n = cfg.horizon();
    let mut methods = vec![method(&cfg.lambda, n)?];
    for s in &cfg.suite_lambdas {
        methods.push(method(s, n)?);
    }
    let suite = identity_suite(&methods, cfg.traces, n, cfg.seed)?;
    let bound_violations: usize = suite.per_lambda.iter().map(|r| r.monotone_bound_violations).sum();
    let failed = !(suite.max_residual < cfg.tol) || bound_violations > 0;
    let mut rows = Vec::new();
    for r in &suite.per_lambda {
        for (kind, v) in [
            ("subsequence", r.subsequence),
            ("t_convex", r.t_convex),
            ("r_inversion", r.r_inversion),
            ("deferred_c1", r.deferred_c1),
            ("deferred_d_lambda", r.deferred_d_lambda),
            ("t_row_sum", r.t_row_sum),
            ("r_abs_row_sum", r.r_abs_row_sum),
        ] {
            rows.push(CsvRow {
                probe: None,
                n: Some(r.n_horizon as u64),
                lambda_n: None,
                kind: format!("{kind}_residual[{}]", r.lambda),
                value: v,
            });
        }
    }
    let summary = format!(
        "max identity residual: {:.3e} over {} traces (N <= {n}, lambda = {}); tolerance {:e}{}",
        suite.max_residual,
        suite.traces,
        methods.iter().map(|m| m.label()).collect::<Vec<_>>().join(", "),
        cfg.tol,
        if bound_violations > 0 {
            format!("; {bound_violations} mean-bound violations")
        } else {
            String::new()
        }
    );
    Ok(Produced {
        json: to_value(&suite)?,
        rows,
        failed,
        summary,
    })
}

fn quantity_name(q: Quantity) -> &'static str {
    match q {
        Quantity::LimsupStepRatio => "limsup_step_ratio",
        Quantity::LiminfBackRatio => "liminf_back_ratio",
        Quantity::LimCompanionRatio => "lim_companion_ratio",
        Quantity::LimInverseDensity => "lim_inverse_density",
        Quantity::LimsupBackRatio => "limsup_back_ratio",
    }
}

fn parse_hint(s: &str) -> Result<ConditionHint> {
    match s.to_ascii_lowercase().as_str() {
        "satisfies" | "satisfiescondition" => Ok(ConditionHint::SatisfiesCondition),
        "fails" | "failscondition" => Ok(ConditionHint::FailsCondition),
        "inconclusive" => Ok(ConditionHint::Inconclusive),
        _ => Err(Error::Parse(format!("unknown condition hint `{s}`"))),
    }
}

#[derive(Serialize)]
struct ConditionsReport {
    horizon: usize,
    lambda: String,
    mu: Option<String>,
    conditions: Vec<ConditionReport>,
    regularity: Vec<RegularityReport>,
    expectations: Vec<ExpectCheck>,
    diffs: usize,
}

/// Evaluates `quantity[@method]=hint` and `regular_t|regular_r=regular|not_regular`.
fn condition_expectation(
    e: &str,
    lambda: &str,
    conditions: &[ConditionReport],
    regularity: &[RegularityReport],
) -> Result<ExpectCheck> {
    let (k, v) = split_expect(e)?;
    if let Some(which) = k.strip_prefix("regular_") {
        let want = match v {
            "regular" => RegularityVerdict::RegularConsistent,
            "not_regular" => RegularityVerdict::NotRegularConsistent,
            _ => return Err(Error::Parse(format!("unknown regularity `{v}`"))),
        };
        let idx = match which {
            "t" => 0,
            "r" => 1,
            _ => return Err(Error::Parse(format!("unknown matrix `{which}`"))),
        };
        let actual = regularity.get(idx).map(|r| r.verdict);
        return Ok(ExpectCheck {
            key: k.into(),
            expected: format!("{want:?}"),
            actual: actual.map(|a| format!("{a:?}")).unwrap_or_else(|| "missing".into()),
            matches: actual == Some(want),
        });
    }
    let (qname, m) = k.split_once('@').unwrap_or((k, lambda));
    let q = Quantity::ALL
        .into_iter()
        .find(|&q| quantity_name(q) == qname)
        .ok_or_else(|| Error::Parse(format!("unknown condition `{qname}`")))?;
    let want = parse_hint(v)?;
    let found = conditions.iter().find(|c| c.quantity == q && c.method == m);
    Ok(ExpectCheck {
        key: k.into(),
        expected: format!("{want:?}"),
        actual: found
            .map(|c| format!("{:?} (estimate {})", c.verdict_hint, c.estimate))
            .unwrap_or_else(|| "missing".into()),
        matches: found.map(|c| c.verdict_hint) == Some(want),
    })
}

fn conditions_cmd(cfg: &RunConfig) -> Result<Produced> {
    let n = cfg.horizon();
    let lambda = lambda_for_horizon(&cfg.lambda, n, n + 1)?;
    let mu = cfg.mu.as_deref().map(|m| lambda_for_horizon(m, n, n + 1)).transpose()?;
    let conditions = scenarios::conditions_for(&lambda, mu.as_ref(), n)?;
    let h = n.min(lambda.len().saturating_sub(1));
    let regularity = if h >= 2 {
        vec![
            regularity_report(&TMatrix(&lambda), h)?,
            regularity_report(&RMatrix(&lambda), h)?,
        ]
    } else {
        Vec::new()
    };
    let expectations = cfg
        .expects
        .iter()
        .map(|e| condition_expectation(e, lambda.label(), &conditions, &regularity))
        .collect::<Result<Vec<_>>>()?;
    let diffs = expectations.iter().filter(|e| !e.matches).count();
    let rows = conditions
        .iter()
        .map(|c| CsvRow {
            probe: None,
            n: Some(c.window.1 as u64),
            lambda_n: None,
            kind: match &c.companion {
                Some(mu) => format!("{}[{}/{}]", quantity_name(c.quantity), mu, c.method),
                None => format!("{}[{}]", quantity_name(c.quantity), c.method),
            },
            value: c.estimate,
        })
        .collect();
    let summary = conditions
        .iter()
        .map(|c| {
            let who = match &c.companion {
                Some(mu) => format!("{mu}/{}", c.method),
                None => c.method.clone(),
            };
            format!("{} [{who}] = {:.6} {:?}", quantity_name(c.quantity), c.estimate, c.verdict_hint)
        })
        .chain(regularity.iter().map(|r| format!("{}: {:?}", r.matrix, r.verdict)))
        .chain((diffs > 0).then(|| format!("{diffs} expectation diffs")))
        .collect::<Vec<_>>()
        .join("\n");
    let json = to_value(&ConditionsReport {
        horizon: n,
        lambda: lambda.label().into(),
        mu: mu.as_ref().map(|m| m.label().into()),
        conditions,
        regularity,
        expectations,
        diffs,
    })?;
    Ok(Produced {
        json,
        rows,
        failed: diffs > 0,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(cmd: Command, pairs: &[(&str, &str)]) -> RunConfig {
        let pairs: Vec<_> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        RunConfig::from_pairs(Some(cmd), &pairs).unwrap()
    }

    #[test]
    fn config_text() {
        let pairs = parse_config("# comment\ncommand = verdict\nprobe = 1,0\nprobe = (0,1)\n\neps = 1/4\n").unwrap();
        let c = RunConfig::from_pairs(None, &pairs).unwrap();
        assert_eq!(c.command, Command::Verdict);
        assert_eq!(c.probes.len(), 2);
        assert_eq!(c.eps, 0.25);
        assert!(parse_config("no equals sign").is_err());
        assert!(RunConfig::from_pairs(None, &[]).is_err());
        assert!(RunConfig::new(Command::Scenario).set("colour", "red").is_err());
    }

    #[test]
    fn identities_example() {
        let o = execute(&cfg(
            Command::Identities,
            &[("lambda", "n^2"), ("horizon", "500"), ("seed", "7"), ("traces", "5")],
        ));
        assert_eq!(o.exit_code, 0, "{}", o.summary);
        assert!(o.summary.starts_with("max identity residual"));
    }

    #[test]
    fn conditions_example() {
        let o = execute(&cfg(
            Command::Conditions,
            &[("lambda", "n^2"), ("mu", "n^3"), ("horizon", "1000"), ("expect", "lim_companion_ratio=fails")],
        ));
        assert_eq!(o.exit_code, 0, "{}", o.summary);
        let v: serde_json::Value = serde_json::from_slice(&o.output).unwrap();
        let conds = v["report"]["conditions"].as_array().unwrap();
        let ratio = conds.iter().find(|c| c["quantity"] == "LimCompanionRatio").unwrap();
        assert_eq!(ratio["estimate"].as_f64().unwrap(), 1000.0);
    }

    #[test]
    fn input_errors_exit_2() {
        let bad = [
            cfg(Command::Verdict, &[("sequence", "point(1,0)"), ("probe", "0,0"), ("horizon", "50")]),
            cfg(Command::Transform, &[("sequence", "ball((0,0), -k)"), ("probe", "0,0")]),
            cfg(Command::Transform, &[("sequence", "point(1,0)")]),
            cfg(Command::Scenario, &[("name", "nope")]),
            cfg(Command::Identities, &[("lambda", "n^")]),
        ];
        for c in bad {
            let o = execute(&c);
            assert_eq!(o.exit_code, 2, "{c:?}");
            assert!(o.output.is_empty());
        }
    }

    #[test]
    fn verdict_expectations_gate_the_exit_code() {
        let base = [
            ("sequence", "point(1/k, 0)"),
            ("target", "point(0,0)"),
            ("probe", "1,1"),
            ("eps", "0.05"),
        ];
        let mut pairs = base.to_vec();
        pairs.push(("expect", "i_conv=consistent"));
        let o = execute(&cfg(Command::Verdict, &pairs));
        assert_eq!(o.exit_code, 0, "{}", o.summary);
        let mut pairs = base.to_vec();
        pairs.push(("expect", "i_conv=violated"));
        assert_eq!(execute(&cfg(Command::Verdict, &pairs)).exit_code, 1);
    }
}
