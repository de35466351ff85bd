//! Scenario files, parameter sweeps, the analytic-vs-Monte-Carlo
//! validation report and their CSV output.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channels::FadingParams;
use crate::error::{Error, Result};
use crate::montecarlo::{
    empirical_cdf, estimate_asc, estimate_sop, kde_log, silverman_bandwidth, simulate_batch_with,
    CascadeModel, McEstimate, McOptions, SampleBatch, TabulatedCdf, Which, CVM_CRITICAL_5PCT,
};
use crate::par::{map_items, Execution};
use crate::secrecy::{self, Mode, SecrecyQuery, SecrecyResult};
use crate::snrdist::{
    dbm_to_watts, derive_constants, watts_to_dbm, DerivedConstants, LinkFading, LinkGeometry, LogBase,
    ScenarioConfig, Side, SnrDistributionHandle,
};
use crate::specfun::ContourSpec;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status for each failure class.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) => 2,
        Error::Convergence { .. } | Error::Domain(_) => 3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerSection {
    p_s_dbm: f64,
    sigma2_r_dbm: f64,
    sigma2_e_dbm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma2_t_dbm: Option<f64>,
}

/// Average surface-path SNRs to hit by rescaling the noise powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnrTargets {
    #[serde(default, rename = "gammabar_R2_db")]
    gammabar_r2_db: Option<f64>,
    #[serde(default, rename = "gammabar_E2_db")]
    gammabar_e2_db: Option<f64>,
}

/// On-disk scenario: powers in dBm, distances in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    n: usize,
    r_s: f64,
    direct_links: bool,
    #[serde(default)]
    base: LogBase,
    power: PowerSection,
    geometry: LinkGeometry,
    fading: LinkFading,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    snr_targets: Option<SnrTargets>,
}

const BUNDLED: [(&str, &str); 3] = [
    ("paper_default", include_str!("../scenarios/paper_default.toml")),
    ("operating", include_str!("../scenarios/operating.toml")),
    ("crossed_snr", include_str!("../scenarios/crossed_snr.toml")),
];

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn bundled_scenario(name: &str) -> Option<Result<ScenarioConfig>> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(n, text)| parse_scenario(text, n))
}

/// Parses and validates a scenario document; `origin` names it in errors.
pub fn parse_scenario(text: &str, origin: &str) -> Result<ScenarioConfig> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse(format!("{origin}: {e}")))?;
    let mut cfg = ScenarioConfig {
        name: file.name,
        geometry: file.geometry,
        fading: file.fading,
        n: file.n,
        p_s: dbm_to_watts(file.power.p_s_dbm),
        sigma2_r: dbm_to_watts(file.power.sigma2_r_dbm),
        sigma2_e: dbm_to_watts(file.power.sigma2_e_dbm),
        sigma2_t: file.power.sigma2_t_dbm.map(dbm_to_watts),
        r_s: file.r_s,
        direct_links: file.direct_links,
        base: file.base,
    };
    cfg.validate().map_err(|e| in_context(origin, e))?;
    if let Some(t) = file.snr_targets {
        if let Some(db) = t.gammabar_r2_db {
            cfg.set_snr_r2(db_to_linear(db));
        }
        if let Some(db) = t.gammabar_e2_db {
            cfg.set_snr_e2(db_to_linear(db));
        }
    }
    Ok(cfg)
}

/// Reads a scenario file, or a bundled scenario when `path` is one of
/// [`bundled_names`] and no such file exists.
pub fn load_scenario(path: &str) -> Result<ScenarioConfig> {
    if !Path::new(path).exists() {
        if let Some(cfg) = bundled_scenario(path) {
            return cfg;
        }
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read scenario '{path}': {e}")))?;
    parse_scenario(&text, path)
}

/// Renders a scenario with every power in dBm.
pub fn scenario_to_toml(cfg: &ScenarioConfig) -> Result<String> {
    let file = ScenarioFile {
        name: cfg.name.clone(),
        n: cfg.n,
        r_s: cfg.r_s,
        direct_links: cfg.direct_links,
        base: cfg.base,
        power: PowerSection {
            p_s_dbm: watts_to_dbm(cfg.p_s),
            sigma2_r_dbm: watts_to_dbm(cfg.sigma2_r),
            sigma2_e_dbm: watts_to_dbm(cfg.sigma2_e),
            sigma2_t_dbm: cfg.sigma2_t.map(watts_to_dbm),
        },
        geometry: cfg.geometry,
        fading: cfg.fading,
        snr_targets: None,
    };
    toml::to_string(&file).map_err(|e| Error::Parse(e.to_string()))
}

pub fn save_scenario(cfg: &ScenarioConfig, path: &Path) -> Result<()> {
    std::fs::write(path, scenario_to_toml(cfg)?)?;
    Ok(())
}

fn in_context(what: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{what}: {m}")),
        other => other,
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A sweepable scenario parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepParam {
    /// Average surface-path reader SNR, in dB.
    GammabarR2,
    /// Average surface-path Eve SNR, in dB.
    GammabarE2,
    N,
    DThetaR,
    Rs,
    /// Multipath parameter m of one or more named links, set together.
    FadingM(Vec<String>),
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gammabar_R2" => SweepParam::GammabarR2,
            "gammabar_E2" => SweepParam::GammabarE2,
            "N" => SweepParam::N,
            "d_thetar" | "d_ThetaR" => SweepParam::DThetaR,
            "R_s" | "r_s" => SweepParam::Rs,
            _ => match s.strip_prefix("m_") {
                Some(links) => {
                    let links: Vec<String> = links.split('+').map(str::to_string).collect();
                    let mut probe = LinkFading::uniform(FadingParams { m: 1.0, m_s: 2.0, omega: 1.0 });
                    for l in &links {
                        if probe.get_mut(l).is_none() {
                            return Err(Error::config(format!("unknown link '{l}' in parameter '{s}'")));
                        }
                    }
                    SweepParam::FadingM(links)
                }
                None => {
                    return Err(Error::config(format!(
                        "unknown sweep parameter '{s}' (expected gammabar_R2, gammabar_E2, N, d_thetar, R_s or m_<link>)"
                    )))
                }
            },
        })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParam::GammabarR2 => write!(f, "gammabar_R2"),
            SweepParam::GammabarE2 => write!(f, "gammabar_E2"),
            SweepParam::N => write!(f, "N"),
            SweepParam::DThetaR => write!(f, "d_thetar"),
            SweepParam::Rs => write!(f, "R_s"),
            SweepParam::FadingM(links) => write!(f, "m_{}", links.join("+")),
        }
    }
}

impl SweepParam {
    /// Returns `cfg` with the parameter set to `v`.
    pub fn apply(&self, cfg: &ScenarioConfig, v: f64) -> Result<ScenarioConfig> {
        let mut c = cfg.clone();
        match self {
            SweepParam::GammabarR2 => c.set_snr_r2(db_to_linear(v)),
            SweepParam::GammabarE2 => c.set_snr_e2(db_to_linear(v)),
            SweepParam::N => {
                if !(v >= 1.0 && v.fract() == 0.0) {
                    return Err(Error::config(format!("N must be a positive integer, got {v}")));
                }
                c.n = v as usize;
            }
            SweepParam::DThetaR => c.geometry.d_thetar = v,
            SweepParam::Rs => c.r_s = v,
            SweepParam::FadingM(links) => {
                for l in links {
                    c.fading.get_mut(l).expect("links checked when parsed").m = v;
                }
            }
        }
        c.validate().map_err(|e| in_context(&format!("{self} = {v}"), e))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Asc,
    Sop,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Asc => "asc",
            Metric::Sop => "sop",
        }
    }
}

pub fn parse_metrics(s: &str) -> Result<Vec<Metric>> {
    match s {
        "asc" => Ok(vec![Metric::Asc]),
        "sop" => Ok(vec![Metric::Sop]),
        "both" => Ok(vec![Metric::Asc, Metric::Sop]),
        _ => Err(Error::config(format!("--metric must be asc, sop or both, got '{s}'"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Exact,
    Asymptotic,
    MonteCarlo,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Asymptotic => "asymptotic",
            Engine::MonteCarlo => "mc",
        }
    }
}

/// Comma-separated engine names; `all` selects every engine.
pub fn parse_engines(s: &str) -> Result<Vec<Engine>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "exact" => out.push(Engine::Exact),
            "asymptotic" => out.push(Engine::Asymptotic),
            "mc" => out.push(Engine::MonteCarlo),
            "all" => out.extend([Engine::Exact, Engine::Asymptotic, Engine::MonteCarlo]),
            _ => return Err(Error::config(format!("unknown engine '{part}' (expected exact, asymptotic, mc or all)"))),
        }
    }
    out.dedup();
    Ok(out)
}

pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| Error::config(format!("--values: '{p}' is not a number"))))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    /// `None` evaluates the base scenario once.
    pub param: Option<SweepParam>,
    pub values: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub engines: Vec<Engine>,
    pub trials: usize,
    pub seed: u64,
    pub contour: ContourSpec,
    pub execution: Execution,
}

impl SweepSpec {
    pub fn new(base: ScenarioConfig, param: Option<SweepParam>, values: Vec<f64>) -> Self {
        Self {
            base,
            param,
            values,
            metrics: vec![Metric::Asc, Metric::Sop],
            engines: vec![Engine::Exact],
            trials: 100_000,
            seed: 1,
            contour: ContourSpec::default().with_rel_tol(1e-7),
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.engines.is_empty() {
            return Err(Error::config("engine set is empty"));
        }
        if self.metrics.is_empty() {
            return Err(Error::config("metric set is empty"));
        }
        if self.trials == 0 && self.engines.contains(&Engine::MonteCarlo) {
            return Err(Error::config("trials must be positive for the mc engine"));
        }
        match &self.param {
            Some(p) => {
                if self.values.is_empty() {
                    return Err(Error::config(format!("no values given for '{p}'")));
                }
                for &v in &self.values {
                    p.apply(&self.base, v)?;
                }
            }
            None => self.base.validate()?,
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub param: String,
    pub value: String,
    pub metric: Metric,
    pub engine: Engine,
    pub result: Option<f64>,
    pub stderr: Option<f64>,
    pub elapsed_ms: f64,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub timestamp: u64,
    pub fingerprint: String,
    pub version: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub rows: Vec<PointResult>,
}

fn secrecy_row(r: Result<SecrecyResult>) -> (Option<f64>, Option<f64>, Vec<String>) {
    match r {
        Ok(r) => {
            let mut flags = Vec::new();
            if r.low_confidence {
                flags.push("low_confidence".to_string());
            }
            (Some(r.value), Some(r.error_estimate), flags)
        }
        Err(e) => (None, None, vec![format!("error: {e}")]),
    }
}

fn evaluate_point(spec: &SweepSpec, cfg: &ScenarioConfig, label: (&str, &str)) -> Vec<PointResult> {
    let mut rows = Vec::new();
    let query = |mode| {
        derive_constants(cfg).and_then(|k| SecrecyQuery::from_constants(&k, cfg.direct_links, &spec.contour, mode))
    };
    let mut batch: Option<Result<SampleBatch>> = None;
    for &engine in &spec.engines {
        for &metric in &spec.metrics {
            let start = Instant::now();
            let (result, stderr, flags) = match engine {
                Engine::Exact | Engine::Asymptotic => {
                    let mode = if engine == Engine::Exact { Mode::Exact } else { Mode::Asymptotic };
                    secrecy_row(query(mode).and_then(|q| match metric {
                        Metric::Asc => secrecy::asc(&q),
                        Metric::Sop => secrecy::sop(&q),
                    }))
                }
                Engine::MonteCarlo => {
                    // One batch serves both metrics; its cost is booked to the first row.
                    let b = batch.get_or_insert_with(|| {
                        let mc = McOptions { execution: spec.execution, ..McOptions::default() };
                        simulate_batch_with(cfg, spec.trials, spec.seed, mc)
                    });
                    match b {
                        Ok(b) => {
                            let e = match metric {
                                Metric::Asc => estimate_asc(b, cfg.base),
                                Metric::Sop => estimate_sop(b, cfg.r_s, cfg.base),
                            };
                            (Some(e.mean), Some(e.standard_error), Vec::new())
                        }
                        Err(e) => (None, None, vec![format!("error: {e}")]),
                    }
                }
            };
            let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            rows.push(PointResult {
                param: label.0.to_string(),
                value: label.1.to_string(),
                metric,
                engine,
                result,
                stderr,
                elapsed_ms,
                flags,
            });
        }
    }
    rows
}

/// Runs every point of the sweep; rows come back in sweep order whatever
/// the completion order. Per-point failures are recorded in the row.
pub fn run_sweep(spec: &SweepSpec) -> Result<RunRecord> {
    spec.validate()?;
    let points: Vec<(ScenarioConfig, String, String)> = match &spec.param {
        Some(p) => spec
            .values
            .iter()
            .map(|&v| Ok((p.apply(&spec.base, v)?, p.to_string(), format_value(v))))
            .collect::<Result<_>>()?,
        None => vec![(spec.base.clone(), "scenario".to_string(), spec.base.name.clone())],
    };
    let rows = map_items(&points, spec.execution, |(cfg, p, v)| evaluate_point(spec, cfg, (p, v)));
    let timestamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
    Ok(RunRecord {
        timestamp,
        fingerprint: spec.base.fingerprint(),
        version: TOOL_VERSION,
        seed: spec.seed,
        trials: spec.trials,
        rows: rows.into_iter().flatten().collect(),
    })
}

fn format_value(v: f64) -> String {
    format!("{v}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.10e}"))
}

/// Trend of a sequence, treating steps within `tol(i)` as ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Constant,
    NonDecreasing,
    NonIncreasing,
    Mixed,
    Incomplete,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Constant => "constant",
            Trend::NonDecreasing => "non-decreasing",
            Trend::NonIncreasing => "non-increasing",
            Trend::Mixed => "mixed",
            Trend::Incomplete => "incomplete",
        })
    }
}

/// Classifies `values`, where consecutive points closer than `tol` of
/// their pair count as equal.
pub fn trend(values: &[(f64, f64)]) -> Trend {
    let (mut up, mut down) = (false, false);
    for w in values.windows(2) {
        let (a, sa) = w[0];
        let (b, sb) = w[1];
        let tol = 3.0 * (sa * sa + sb * sb).sqrt();
        if b > a + tol {
            up = true;
        } else if b < a - tol {
            down = true;
        }
    }
    match (up, down) {
        (false, false) => Trend::Constant,
        (true, false) => Trend::NonDecreasing,
        (false, true) => Trend::NonIncreasing,
        (true, true) => Trend::Mixed,
    }
}

impl RunRecord {
    /// (value, noise) series of one metric and engine in sweep order; the
    /// noise is the MC standard error and zero for the analytic engines.
    pub fn series(&self, metric: Metric, engine: Engine) -> Option<Vec<(f64, f64)>> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric && r.engine == engine)
            .map(|r| {
                let noise = if engine == Engine::MonteCarlo { r.stderr.unwrap_or(0.0) } else { 0.0 };
                r.result.map(|v| (v, noise))
            })
            .collect()
    }

    pub fn trends(&self) -> Vec<(Metric, Engine, Trend)> {
        let mut out = Vec::new();
        for metric in [Metric::Asc, Metric::Sop] {
            for engine in [Engine::Exact, Engine::Asymptotic, Engine::MonteCarlo] {
                if !self.rows.iter().any(|r| r.metric == metric && r.engine == engine) {
                    continue;
                }
                let t = self.series(metric, engine).map_or(Trend::Incomplete, |s| trend(&s));
                out.push((metric, engine, t));
            }
        }
        out
    }

    /// Writes the rows and a `#`-commented monotonicity footer. Without
    /// `timing` the elapsed column is left empty so that reruns are
    /// byte-identical.
    pub fn write_csv<W: Write>(&self, out: W, timing: bool) -> Result<()> {
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["param", "value", "metric", "engine", "result", "stderr", "elapsed_ms", "flags"])
            .map_err(io)?;
        for r in &self.rows {
            let elapsed = if timing { format!("{:.3}", r.elapsed_ms) } else { String::new() };
            w.write_record([
                r.param.as_str(),
                r.value.as_str(),
                r.metric.as_str(),
                r.engine.as_str(),
                &format_opt(r.result),
                &format_opt(r.stderr),
                &elapsed,
                &r.flags.join(";"),
            ])
            .map_err(io)?;
        }
        let mut out = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        if self.rows.len() > self.rows.iter().map(|r| (r.metric.as_str(), r.engine.as_str())).collect::<std::collections::BTreeSet<_>>().len() {
            writeln!(out, "# monotonicity (steps within 3 MC standard errors count as ties)")?;
            for (m, e, t) in self.trends() {
                writeln!(out, "# {},{},{}", m.as_str(), e.as_str(), t)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Run metadata as TOML, kept out of the CSV so the CSV stays
    /// reproducible.
    pub fn metadata(&self) -> String {
        format!(
            "timestamp = {}\nfingerprint = \"{}\"\nversion = \"{}\"\nseed = {}\ntrials = {}\npoints = {}\nerrors = {}\n",
            self.timestamp,
            self.fingerprint,
            self.version,
            self.seed,
            self.trials,
            self.rows.len(),
            self.rows.iter().filter(|r| r.result.is_none()).count()
        )
    }
}

/// Settings of the analytic-vs-Monte-Carlo comparison.
#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub trials: usize,
    pub seed: u64,
    /// Log-spaced nodes of the tabulated analytic CDF used by the CvM test.
    pub grid_points: usize,
    pub kde_points: usize,
    pub cascade: CascadeModel,
    pub contour: ContourSpec,
    pub execution: Execution,
    /// Return after the first failing gating check.
    pub stop_on_failure: bool,
    /// Checks that already fail on the unperturbed model; with
    /// `stop_on_failure` they do not end the run.
    pub baseline_failures: Vec<String>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 1,
            grid_points: 160,
            kde_points: 20,
            cascade: CascadeModel::MomentMatched,
            contour: ContourSpec::default().with_rel_tol(1e-7),
            execution: Execution::default(),
            stop_on_failure: false,
            baseline_failures: Vec::new(),
        }
    }
}

/// Fewer trials than this are flagged as low power.
pub const LOW_POWER_TRIALS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub analytic: f64,
    pub mc: f64,
    pub stderr: f64,
    /// z-score, or the test statistic for distribution tests.
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Reported but not part of the verdict.
    pub informational: bool,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub fingerprint: String,
    pub trials: usize,
    pub low_power: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass || c.informational)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass && !c.informational)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["check", "analytic", "mc", "stderr", "statistic", "threshold", "verdict"]).map_err(io)?;
        for c in &self.checks {
            let verdict = match (c.informational, c.pass) {
                (true, _) => "info",
                (false, true) => "pass",
                (false, false) => "FAIL",
            };
            w.write_record([
                c.name.clone(),
                format!("{:.10e}", c.analytic),
                format!("{:.10e}", c.mc),
                format!("{:.4e}", c.stderr),
                format!("{:.4}", c.statistic),
                format!("{}", c.threshold),
                verdict.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn z_check(name: String, analytic: f64, e: &McEstimate) -> Check {
    let z = e.z_score(analytic);
    Check {
        name,
        analytic,
        mc: e.mean,
        stderr: e.standard_error,
        statistic: z,
        threshold: 3.0,
        pass: z < 3.0,
        informational: false,
    }
}

/// Compares every distribution and metric of `cfg` with Monte-Carlo.
pub fn validate(cfg: &ScenarioConfig, opts: &ValidateOptions) -> Result<ValidationReport> {
    validate_with(cfg, opts, &|k| Ok(k))
}

/// As [`validate`], with the analytic constants passed through `tweak`
/// (for negative controls); the Monte-Carlo side always uses `cfg`.
pub fn validate_with(
    cfg: &ScenarioConfig,
    opts: &ValidateOptions,
    tweak: &dyn Fn(DerivedConstants) -> Result<DerivedConstants>,
) -> Result<ValidationReport> {
    let mut plain = cfg.clone();
    plain.direct_links = false;
    let mut direct = cfg.clone();
    direct.direct_links = true;
    let mc = McOptions { cascade: opts.cascade, execution: opts.execution, ..McOptions::default() };
    let batches = [
        simulate_batch_with(&plain, opts.trials, opts.seed, mc)?,
        simulate_batch_with(&direct, opts.trials, opts.seed.wrapping_add(1), mc)?,
    ];
    let k = tweak(derive_constants(&plain)?)?;
    let queries = [
        SecrecyQuery::from_constants(&k, false, &opts.contour, Mode::Exact)?,
        SecrecyQuery::from_constants(&k, true, &opts.contour, Mode::Exact)?,
    ];
    let mut report = ValidationReport {
        fingerprint: cfg.fingerprint(),
        trials: opts.trials,
        low_power: opts.trials < LOW_POWER_TRIALS,
        checks: Vec::new(),
    };
    let stop = |r: &ValidationReport| {
        opts.stop_on_failure && r.failures().any(|c| !opts.baseline_failures.contains(&c.name))
    };
    let n = opts.trials as f64;

    // Cheap checks first so that a negative control can stop early.
    for (q, b) in queries.iter().zip(&batches) {
        let tag = if q.direct() { "direct" } else { "nodirect" };
        let asc = secrecy::asc(q)?;
        report.checks.push(z_check(format!("asc_{tag}"), asc.value, &estimate_asc(b, cfg.base)));
        let sop = secrecy::sop(q)?;
        report.checks.push(z_check(format!("sop_{tag}"), sop.value, &estimate_sop(b, cfg.r_s, cfg.base)));
        if stop(&report) {
            return Ok(report);
        }
    }
    let cases: Vec<(&SnrDistributionHandle, &SampleBatch, Which)> = queries
        .iter()
        .zip(&batches)
        .flat_map(|(q, b)| [(&q.reader, b, Which::Reader), (&q.eve, b, Which::Eve)])
        .collect();
    let ecdfs: Vec<_> = cases.iter().map(|(_, b, w)| empirical_cdf(b, *w)).collect::<Result<_>>()?;
    for ((h, _, _), e) in cases.iter().zip(&ecdfs) {
        let median = e.median();
        let est = McEstimate { mean: 0.5, standard_error: (0.25 / n).sqrt(), n_trials: opts.trials, seed: opts.seed };
        report.checks.push(z_check(format!("cdf_at_median_{}", h.case), h.cdf(median)?, &est));
        if stop(&report) {
            return Ok(report);
        }
    }
    let mut tables = Vec::new();
    for ((h, _, _), e) in cases.iter().zip(&ecdfs) {
        let tab = TabulatedCdf::build(h, e.min(), e.max(), opts.grid_points, opts.execution)?;
        let w2 = e.cvm_statistic(|x| tab.eval(x));
        tables.push(tab);
        report.checks.push(Check {
            name: format!("cvm_{}", h.case),
            analytic: f64::NAN,
            mc: f64::NAN,
            stderr: f64::NAN,
            statistic: w2,
            threshold: CVM_CRITICAL_5PCT,
            pass: w2 < CVM_CRITICAL_5PCT,
            informational: false,
        });
        if stop(&report) {
            return Ok(report);
        }
    }
    // Pointwise density checks: 20 points per law make a family-wise false
    // alarm likely at 3 SE, so they do not gate the verdict.
    for (((h, _, _), e), tab) in cases.iter().zip(&ecdfs).zip(&tables) {
        let bw = silverman_bandwidth(e.samples());
        let (lo, hi) = (e.quantile(0.001).ln(), e.quantile(0.999).ln());
        let k = opts.kde_points.max(2);
        let mut worst: Option<Check> = None;
        for i in 0..k {
            let u = lo + (hi - lo) * i as f64 / (k - 1) as f64;
            let c = z_check(format!("kde_{}", h.case), tab.smoothed_log_density(u, bw)?, &kde_log(e.samples(), u, bw));
            if worst.as_ref().is_none_or(|w| c.statistic > w.statistic) {
                worst = Some(c);
            }
        }
        if let Some(mut c) = worst {
            c.informational = true;
            report.checks.push(c);
        }
    }
    // High-SNR asymptotes against the no-direct samples.
    let asy = SecrecyQuery::from_constants(&k, false, &opts.contour, Mode::Asymptotic)?;
    for (name, r, e) in [
        ("asc_asymptotic", secrecy::asc(&asy), estimate_asc(&batches[0], cfg.base)),
        ("sop_asymptotic", secrecy::sop(&asy), estimate_sop(&batches[0], cfg.r_s, cfg.base)),
    ] {
        let mut c = z_check(name.to_string(), r?.value, &e);
        c.informational = true;
        report.checks.push(c);
    }
    Ok(report)
}

/// Named single-constant perturbation used as a negative control.
pub fn perturb(name: &'static str, factor: f64) -> impl Fn(DerivedConstants) -> Result<DerivedConstants> {
    move |k| k.perturbed(name, factor)
}

/// SNR law of one side built from `cfg`, for plotting recipes.
pub fn handle(cfg: &ScenarioConfig, side: Side, contour: &ContourSpec) -> Result<SnrDistributionHandle> {
    SnrDistributionHandle::new(&derive_constants(cfg)?, side, cfg.direct_links, contour.clone())
}
