//! Plain-text scenario configuration.
//!
//! ```text
//! scenario = simulate
//!
//! [params]
//! sigma_p_mm = 1
//! crystal_length_mm = 3
//! k_p_tilde = 2.6e7        # or `auto` to derive it from phase matching
//!
//! [sampler]
//! samples = 1000000
//! seed = 42
//! ```
//!
//! Sections: `params`, `state`, `sweep`, `sampler`, `energy_time`, `bound`,
//! `output`. Keys before the first section header belong to the root, which
//! only knows `scenario`. `#` and `;` start comments. Unknown keys, repeated
//! keys and malformed values are errors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tripent::sampler::{Binning, Bootstrap, RefinementPolicy};
use tripent::{CoefficientVectors, ExperimentParams, PolingSign, TripartiteGaussianState};

use crate::error::{CliError, Result};
use crate::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Fig2,
    Shalm,
    PhaseMatch,
    Simulate,
    Bound,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::Shalm => "shalm",
            Scenario::PhaseMatch => "phase-match",
            Scenario::Simulate => "simulate",
            Scenario::Bound => "bound",
        }
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig2" => Scenario::Fig2,
            "shalm" => Scenario::Shalm,
            "phase-match" => Scenario::PhaseMatch,
            "simulate" => Scenario::Simulate,
            "bound" => Scenario::Bound,
            _ => return Err(CliError::Config(format!("unknown scenario `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KpTilde {
    Fixed(f64),
    /// Derived from the pump index, wavelength and poling periods.
    Auto,
}

impl fmt::Display for KpTilde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KpTilde::Fixed(k) => f.write_str(&fmt_f64(*k)),
            KpTilde::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    SigmaP,
    CrystalLength,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::SigmaP => "sigma_p_mm",
            SweepVariable::CrystalLength => "crystal_length_mm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Linear,
    Log,
}

/// Sweep over one experiment parameter, in millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: SweepScale,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            variable: SweepVariable::SigmaP,
            min: 0.01,
            max: 10.0,
            points: 61,
            scale: SweepScale::Log,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(CliError::Config(format!("sweep needs >= 2 points, got {}", self.points)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(CliError::Config(format!("sweep needs min < max, got {} and {}", self.min, self.max)));
        }
        if self.min < 0.0 || (self.scale == SweepScale::Log && self.min <= 0.0) {
            return Err(CliError::Config("sweep minimum must be >= 0 (> 0 for log scale)".into()));
        }
        Ok(())
    }

    /// The sweep points, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.points - 1 {
                    return self.max;
                }
                let t = i as f64 / last;
                match self.scale {
                    SweepScale::Linear => self.min + t * (self.max - self.min),
                    SweepScale::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinningKind {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerSpec {
    pub samples: usize,
    pub seed: u64,
    pub binning: BinningKind,
    /// Fixed bin width as a fraction of the sample standard deviation.
    pub bin_fraction: f64,
    /// Fixed grid half-width in sample standard deviations.
    pub half_width: f64,
    pub resamples: usize,
    pub policy: RefinementPolicy,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 42,
            binning: BinningKind::Fixed,
            bin_fraction: 1.0 / 16.0,
            half_width: 8.0,
            resamples: Bootstrap::default().resamples,
            policy: RefinementPolicy::default(),
        }
    }
}

impl SamplerSpec {
    pub fn binning(&self) -> Binning {
        match self.binning {
            BinningKind::Fixed => Binning::FixedWidth {
                fraction: self.bin_fraction,
                half_width: self.half_width,
            },
            BinningKind::Adaptive => Binning::Adaptive(self.policy),
        }
    }

    pub fn bootstrap(&self) -> Bootstrap {
        Bootstrap {
            resamples: self.resamples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTimeSpec {
    pub sigma_t: f64,
    pub sigma_omega: f64,
}

impl Default for EnergyTimeSpec {
    fn default() -> Self {
        Self {
            sigma_t: 3.7e-10,
            sigma_omega: 3.77e7,
        }
    }
}

/// Inputs of the `bound` scenario. With neither pair set, the closed-form
/// SPDC bound of the configured source is reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdHocBound {
    pub h_x: Option<f64>,
    pub h_k: Option<f64>,
    pub sigma_x: Option<f64>,
    pub sigma_k: Option<f64>,
    pub coeffs: CoefficientVectors,
}

impl Default for AdHocBound {
    fn default() -> Self {
        Self {
            h_x: None,
            h_k: None,
            sigma_x: None,
            sigma_k: None,
            coeffs: CoefficientVectors::cascaded(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("unknown format `{s}` (csv or json)"))),
        }
    }
}

/// SPDC bounds per transverse dimension, or doubled for both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    PerAxis,
    Total,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::PerAxis => "per-axis",
            Convention::Total => "total",
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Convention::PerAxis => 1.0,
            Convention::Total => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    /// `None` picks CSV for tables and JSON for reports.
    pub format: Option<Format>,
    pub convention: Convention,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Option<Scenario>,
    pub params: ExperimentParams,
    pub k_p_tilde: KpTilde,
    /// Explicit principal variances (m^2), bypassing the source model.
    pub state: Option<TripartiteGaussianState>,
    pub sweep: SweepSpec,
    pub sampler: SamplerSpec,
    pub energy_time: EnergyTimeSpec,
    pub bound: AdHocBound,
    pub output: OutputSpec,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            params: ExperimentParams::ppln_default(),
            k_p_tilde: KpTilde::Fixed(2.6e7),
            state: None,
            sweep: SweepSpec::default(),
            sampler: SamplerSpec::default(),
            energy_time: EnergyTimeSpec::default(),
            bound: AdHocBound::default(),
            output: OutputSpec::default(),
        }
    }
}

fn err(line: usize, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("line {line}: {msg}"))
}

fn real(line: usize, key: &str, v: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(err(line, format!("`{key}` needs a finite number, got `{v}`"))),
    }
}

fn integer<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| err(line, format!("`{key}` needs a non-negative integer, got `{v}`")))
}

fn triple(line: usize, key: &str, v: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(err(line, format!("`{key}` needs three comma-separated numbers")));
    }
    Ok([real(line, key, parts[0])?, real(line, key, parts[1])?, real(line, key, parts[2])?])
}

fn poling_sign(line: usize, v: &str) -> Result<PolingSign> {
    match v {
        "add" => Ok(PolingSign::Add),
        "subtract" => Ok(PolingSign::Subtract),
        _ => Err(err(line, format!("poling sign must be `add` or `subtract`, got `{v}`"))),
    }
}

fn period_um(line: usize, key: &str, v: &str) -> Result<Option<f64>> {
    if v == "none" {
        Ok(None)
    } else {
        real(line, key, v).map(|p| Some(p / 1e6))
    }
}

fn period_str(p: Option<f64>) -> String {
    p.map_or("none".into(), |p| fmt_f64(p * 1e6))
}

fn sign_str(s: PolingSign) -> &'static str {
    match s {
        PolingSign::Add => "add",
        PolingSign::Subtract => "subtract",
    }
}

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    /// Checks everything that does not need the numerics.
    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        let s = &self.sampler;
        if s.samples < 2 {
            return Err(CliError::Config("samples must be >= 2".into()));
        }
        if !(s.bin_fraction > 0.0 && s.half_width > 0.0) {
            return Err(CliError::Config("bin_fraction and half_width must be > 0".into()));
        }
        s.policy
            .validate::<3>()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    /// The full parameter set as ordered `section.key=value` pairs, enough to
    /// rebuild this configuration.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let p = &self.params;
        let mut m: Vec<(&str, String)> = Vec::new();
        if let Some(s) = self.scenario {
            m.push(("scenario", s.name().into()));
        }
        m.extend([
            ("params.lambda_pump_nm", fmt_f64(p.lambda_pump * 1e9)),
            ("params.n_pump", fmt_f64(p.n_pump)),
            ("params.poling_period_1_um", period_str(p.poling_period_1)),
            ("params.poling_period_2_um", period_str(p.poling_period_2)),
            ("params.poling_sign_1", sign_str(p.poling_sign_1).into()),
            ("params.poling_sign_2", sign_str(p.poling_sign_2).into()),
            ("params.crystal_length_mm", fmt_f64(p.crystal_length * 1e3)),
            ("params.sigma_p_mm", fmt_f64(p.pump_radius * 1e3)),
            ("params.k_p_tilde", self.k_p_tilde.to_string()),
        ]);
        if let Some(s) = &self.state {
            m.push(("state.sigma_u_sq", fmt_f64(s.sigma_u_sq.get())));
            m.push(("state.sigma_v_sq", fmt_f64(s.sigma_v_sq.get())));
            m.push(("state.sigma_w_sq", fmt_f64(s.sigma_w_sq.get())));
        }
        let w = &self.sweep;
        m.extend([
            ("sweep.variable", w.variable.name().into()),
            ("sweep.min", fmt_f64(w.min)),
            ("sweep.max", fmt_f64(w.max)),
            ("sweep.points", w.points.to_string()),
            (
                "sweep.scale",
                match w.scale {
                    SweepScale::Linear => "linear",
                    SweepScale::Log => "log",
                }
                .into(),
            ),
        ]);
        let s = &self.sampler;
        m.extend([
            ("sampler.samples", s.samples.to_string()),
            ("sampler.seed", s.seed.to_string()),
            (
                "sampler.binning",
                match s.binning {
                    BinningKind::Fixed => "fixed",
                    BinningKind::Adaptive => "adaptive",
                }
                .into(),
            ),
            ("sampler.bin_fraction", fmt_f64(s.bin_fraction)),
            ("sampler.half_width", fmt_f64(s.half_width)),
            ("sampler.resamples", s.resamples.to_string()),
            ("sampler.tau", fmt_f64(s.policy.tau)),
            ("sampler.max_depth", s.policy.max_depth.to_string()),
            ("sampler.leaf_budget", s.policy.leaf_budget.to_string()),
            ("energy_time.sigma_t", fmt_f64(self.energy_time.sigma_t)),
            ("energy_time.sigma_omega", fmt_f64(self.energy_time.sigma_omega)),
        ]);
        let b = &self.bound;
        for (k, v) in [("bound.h_x", b.h_x), ("bound.h_k", b.h_k), ("bound.sigma_x", b.sigma_x), ("bound.sigma_k", b.sigma_k)] {
            if let Some(v) = v {
                m.push((k, fmt_f64(v)));
            }
        }
        let list = |t: [f64; 3]| t.map(fmt_f64).join(",");
        m.push(("bound.eta", list(b.coeffs.eta)));
        m.push(("bound.beta", list(b.coeffs.beta)));
        m.push(("output.convention", self.output.convention.name().into()));
        m.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    fn set(&mut self, section: &str, key: &str, v: &str, line: usize, state: &mut [Option<f64>; 3]) -> Result<()> {
        let p = &mut self.params;
        match (section, key) {
            ("", "scenario") => self.scenario = Some(v.parse().map_err(|e: CliError| err(line, e))?),
            ("params", "lambda_pump_nm") => p.lambda_pump = real(line, key, v)? / 1e9,
            ("params", "n_pump") => p.n_pump = real(line, key, v)?,
            ("params", "poling_period_1_um") => p.poling_period_1 = period_um(line, key, v)?,
            ("params", "poling_period_2_um") => p.poling_period_2 = period_um(line, key, v)?,
            ("params", "poling_sign_1") => p.poling_sign_1 = poling_sign(line, v)?,
            ("params", "poling_sign_2") => p.poling_sign_2 = poling_sign(line, v)?,
            ("params", "crystal_length_mm") => p.crystal_length = real(line, key, v)? / 1e3,
            ("params", "sigma_p_mm") => p.pump_radius = real(line, key, v)? / 1e3,
            ("params", "k_p_tilde") => {
                self.k_p_tilde = if v == "auto" {
                    KpTilde::Auto
                } else {
                    KpTilde::Fixed(real(line, key, v)?)
                }
            }
            ("state", "sigma_u_sq") => state[0] = Some(real(line, key, v)?),
            ("state", "sigma_v_sq") => state[1] = Some(real(line, key, v)?),
            ("state", "sigma_w_sq") => state[2] = Some(real(line, key, v)?),
            ("sweep", "variable") => {
                self.sweep.variable = match v {
                    "sigma_p_mm" => SweepVariable::SigmaP,
                    "crystal_length_mm" => SweepVariable::CrystalLength,
                    _ => return Err(err(line, format!("unknown sweep variable `{v}`"))),
                }
            }
            ("sweep", "min") => self.sweep.min = real(line, key, v)?,
            ("sweep", "max") => self.sweep.max = real(line, key, v)?,
            ("sweep", "points") => self.sweep.points = integer(line, key, v)?,
            ("sweep", "scale") => {
                self.sweep.scale = match v {
                    "linear" => SweepScale::Linear,
                    "log" => SweepScale::Log,
                    _ => return Err(err(line, format!("sweep scale must be `linear` or `log`, got `{v}`"))),
                }
            }
            ("sampler", "samples") => self.sampler.samples = integer(line, key, v)?,
            ("sampler", "seed") => self.sampler.seed = integer(line, key, v)?,
            ("sampler", "binning") => {
                self.sampler.binning = match v {
                    "fixed" => BinningKind::Fixed,
                    "adaptive" => BinningKind::Adaptive,
                    _ => return Err(err(line, format!("binning must be `fixed` or `adaptive`, got `{v}`"))),
                }
            }
            ("sampler", "bin_fraction") => self.sampler.bin_fraction = real(line, key, v)?,
            ("sampler", "half_width") => self.sampler.half_width = real(line, key, v)?,
            ("sampler", "resamples") => self.sampler.resamples = integer(line, key, v)?,
            ("sampler", "tau") => self.sampler.policy.tau = real(line, key, v)?,
            ("sampler", "max_depth") => self.sampler.policy.max_depth = integer(line, key, v)?,
            ("sampler", "leaf_budget") => self.sampler.policy.leaf_budget = integer(line, key, v)?,
            ("energy_time", "sigma_t") => self.energy_time.sigma_t = real(line, key, v)?,
            ("energy_time", "sigma_omega") => self.energy_time.sigma_omega = real(line, key, v)?,
            ("bound", "h_x") => self.bound.h_x = Some(real(line, key, v)?),
            ("bound", "h_k") => self.bound.h_k = Some(real(line, key, v)?),
            ("bound", "sigma_x") => self.bound.sigma_x = Some(real(line, key, v)?),
            ("bound", "sigma_k") => self.bound.sigma_k = Some(real(line, key, v)?),
            ("bound", "eta") => self.bound.coeffs.eta = triple(line, key, v)?,
            ("bound", "beta") => self.bound.coeffs.beta = triple(line, key, v)?,
            ("output", "path") => self.output.path = Some(PathBuf::from(v)),
            ("output", "format") => self.output.format = Some(v.parse().map_err(|e: CliError| err(line, e))?),
            ("output", "convention") => {
                self.output.convention = match v {
                    "per-axis" => Convention::PerAxis,
                    "total" => Convention::Total,
                    _ => return Err(err(line, format!("convention must be `per-axis` or `total`, got `{v}`"))),
                }
            }
            ("", _) => return Err(err(line, format!("unknown key `{key}` outside a section"))),
            _ => return Err(err(line, format!("unknown key `{key}` in [{section}]"))),
        }
        Ok(())
    }
}

const SECTIONS: [&str; 7] = ["params", "state", "sweep", "sampler", "energy_time", "bound", "output"];

impl FromStr for ScenarioConfig {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut section = String::new();
        let mut seen = std::collections::HashSet::new();
        let mut state = [None; 3];
        let mut state_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(line, format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected key = value, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert((section.clone(), key.to_string())) {
                return Err(err(line, format!("`{key}` given twice")));
            }
            if section == "state" {
                state_line = line;
            }
            cfg.set(&section, key, value, line, &mut state)?;
        }
        if state.iter().any(Option::is_some) {
            let (Some(u), Some(v)) = (state[0], state[1]) else {
                return Err(err(state_line, "[state] needs sigma_u_sq and sigma_v_sq"));
            };
            let s = TripartiteGaussianState::new(u, v, state[2].unwrap_or(v))
                .map_err(|e| err(state_line, e))?;
            cfg.state = Some(s);
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let cfg: ScenarioConfig = "scenario = fig2 # trailing\n; note\n[params]\nsigma_p_mm = 2\nk_p_tilde = auto\n\
             [sweep]\npoints = 5\nscale = linear\nmin = 0\nmax = 4\n"
            .parse()
            .unwrap();
        assert_eq!(cfg.scenario, Some(Scenario::Fig2));
        assert_eq!(cfg.params.pump_radius, 2e-3);
        assert_eq!(cfg.k_p_tilde, KpTilde::Auto);
        assert_eq!(cfg.sweep.values(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "bogus = 1",
            "[nowhere]\n",
            "[params]\nsigma_p_mm = wide\n",
            "[params]\nsigma_p_mm = 1\nsigma_p_mm = 2\n",
            "scenario = fig3",
            "[state]\nsigma_v_sq = 1\n",
            "[params\n",
            "[bound]\neta = 1,2\n",
        ] {
            assert!(text.parse::<ScenarioConfig>().is_err(), "{text}");
        }
        let mut cfg = ScenarioConfig::default();
        cfg.sweep.points = 1;
        assert!(cfg.validate().is_err());
        cfg.sweep = SweepSpec { min: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn metadata_round_trips() {
        let text = "scenario = simulate\n[params]\npoling_period_1_um = none\nk_p_tilde = auto\n\
                    [state]\nsigma_u_sq = 2\nsigma_v_sq = 1\n[bound]\nh_x = -3\neta = 1,-0.5,-0.5\n";
        let cfg: ScenarioConfig = text.parse().unwrap();
        let mut rebuilt = String::new();
        let mut section = String::new();
        for (k, v) in cfg.metadata() {
            let (s, key) = k.split_once('.').unwrap_or(("", &k));
            if !s.is_empty() && s != section {
                rebuilt.push_str(&format!("[{s}]\n"));
                section = s.to_string();
            }
            rebuilt.push_str(&format!("{key} = {v}\n"));
        }
        assert_eq!(rebuilt.parse::<ScenarioConfig>().unwrap(), cfg);
    }
}
