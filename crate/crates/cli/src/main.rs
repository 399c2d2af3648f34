use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use wijsum_core::cli::{execute, parse_config, Command, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Transform,
    Density,
    Verdict,
    Scenario,
    Identities,
    Conditions,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Transform => Command::Transform,
            Cmd::Density => Command::Density,
            Cmd::Verdict => Command::Verdict,
            Cmd::Scenario => Command::Scenario,
            Cmd::Identities => Command::Identities,
            Cmd::Conditions => Command::Conditions,
        }
    }
}

/// Wijsman-type summability diagnostics for sequences of closed sets.
///
/// Exit status: 0 on success, 1 when expectations differ or a checked
/// implication, containment, inequality or identity fails, 2 on input errors.
#[derive(Debug, Parser)]
#[command(name = "wijsum", version)]
struct Args {
    /// Command to run; may instead come from `command = ...` in the config file.
    command: Option<Cmd>,
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Index method: expression in n (`n^2`, `2n`, `2^n`) or `@file`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Companion index method.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    horizon: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// Tolerance for identity residuals.
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    /// Probe point such as `1,0`; repeatable, or `;`-separated.
    #[arg(long = "probe", allow_hyphen_values = true)]
    probes: Vec<String>,
    /// `fin` or `density-zero`.
    #[arg(long, allow_hyphen_values = true)]
    ideal: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<String>,
    /// `csv` or `json`.
    #[arg(long, allow_hyphen_values = true)]
    format: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, allow_hyphen_values = true)]
    out: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    /// Catalog scenario name.
    #[arg(long, allow_hyphen_values = true)]
    name: Option<String>,
    /// Set sequence, e.g. `cycle: point(1,0) | point(0,1)`.
    #[arg(long, allow_hyphen_values = true)]
    sequence: Option<String>,
    /// Limit set A.
    #[arg(long, allow_hyphen_values = true)]
    target: Option<String>,
    /// Trace CSV to read instead of generating one.
    #[arg(long, allow_hyphen_values = true)]
    trace: Option<String>,
    /// Extra index method for the implication suites; repeatable.
    #[arg(long = "suite-lambda", allow_hyphen_values = true)]
    suite_lambdas: Vec<String>,
    /// Verdict mode; repeatable.
    #[arg(long = "mode", allow_hyphen_values = true)]
    modes: Vec<String>,
    /// Number of random traces for `identities`.
    #[arg(long, allow_hyphen_values = true)]
    traces: Option<String>,
    /// Include wall time in JSON output.
    #[arg(long)]
    timing: bool,
    /// Expectation `key=value`; repeatable.
    #[arg(long = "expect", allow_hyphen_values = true)]
    expects: Vec<String>,
}

impl Args {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut one = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        };
        one("lambda", &self.lambda);
        one("mu", &self.mu);
        one("horizon", &self.horizon);
        one("eps", &self.eps);
        one("delta", &self.delta);
        one("p", &self.p);
        one("tol", &self.tol);
        one("ideal", &self.ideal);
        one("threshold", &self.threshold);
        one("format", &self.format);
        one("out", &self.out);
        one("seed", &self.seed);
        one("name", &self.name);
        one("sequence", &self.sequence);
        one("target", &self.target);
        one("trace", &self.trace);
        one("traces", &self.traces);
        for (k, vs) in [
            ("probe", &self.probes),
            ("suite_lambda", &self.suite_lambdas),
            ("mode", &self.modes),
            ("expect", &self.expects),
        ] {
            out.extend(vs.iter().map(|v| (k.to_string(), v.clone())));
        }
        if self.timing {
            out.push(("timing".into(), "true".into()));
        }
        out
    }
}

fn build_config(args: &Args) -> Result<RunConfig, String> {
    let mut pairs = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => Vec::new(),
    };
    pairs.extend(args.pairs());
    RunConfig::from_pairs(args.command.map(Command::from), &pairs).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match build_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = execute(&cfg);
    if !outcome.summary.is_empty() {
        eprintln!("{}", outcome.summary);
    }
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.output).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(&outcome.output)
            .map_err(|e| format!("stdout: {e}")),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(outcome.exit_code as u8)
}
