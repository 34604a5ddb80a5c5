//! Scenarios behind the `tripent` command: the bound-vs-pump-radius curve,
//! the energy-time point, phase matching, ad-hoc bounds and the end-to-end
//! measurement simulation.

pub mod config;
pub mod error;
pub mod table;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use tripent::bounds::{
    e3f_entropic_bound, e3f_variance_bound, energy_time_bound, gaussian_state_bound, spdc_closed_form_bound,
};
use tripent::entropy::MultiResHistogram;
use tripent::sampler::{adaptive_histogram, estimate_bound_from_samples, sample_triplets, Domain};
use tripent::schmidt::exact_e3f;
use tripent::spdc::{
    effective_pump_momentum, gaussian_triphoton_state, poling_period_from_dispersion, CongruentLnExtraordinary,
    PhaseMatchSolution,
};
use tripent::{BoundReport, CoefficientVectors, Execution, ExperimentParams, TripartiteGaussianState};

pub use config::{Convention, Format, KpTilde, Scenario, ScenarioConfig, SweepSpec, SweepVariable};
pub use error::{CliError, Result};
pub use table::CurveTable;

use error::StageExt;

pub const TOOL: &str = "tripent";

/// Shortest round-trip decimal; exponent form outside [1e-4, 1e15).
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Tool, version and the full configuration.
pub fn base_metadata(cfg: &ScenarioConfig) -> Vec<(String, String)> {
    let mut m = vec![
        ("tool".to_string(), TOOL.to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
    ];
    m.extend(cfg.metadata());
    m
}

pub fn resolve_k_p_tilde(cfg: &ScenarioConfig) -> Result<f64> {
    match cfg.k_p_tilde {
        KpTilde::Fixed(k) => Ok(k),
        KpTilde::Auto => effective_pump_momentum(&cfg.params)
            .stage("phase match")
            .map(|s| s.k_p_tilde),
    }
}

/// Closed-form bound, exact E3F and their gap along a sweep.
pub fn fig2_curve(
    params: &ExperimentParams,
    k_p_tilde: f64,
    sweep: &SweepSpec,
    convention: Convention,
) -> Result<CurveTable> {
    sweep.validate()?;
    let first = sweep.variable.name();
    let mut t = CurveTable::new(&[first, "bound_gebits", "exact_gebits", "gap_gebits"]);
    let f = convention.factor();
    for v in sweep.values() {
        let p = match sweep.variable {
            SweepVariable::SigmaP => params.with_pump_radius(v / 1e3),
            SweepVariable::CrystalLength => ExperimentParams {
                crystal_length: v / 1e3,
                ..*params
            },
        };
        let row = format!("fig2 row {first}={}", fmt_f64(v));
        let bound = spdc_closed_form_bound(&p, k_p_tilde).stage(&row)?.bound_gebits;
        let phase = PhaseMatchSolution::from_k_tilde(k_p_tilde, p.crystal_length).stage(&row)?;
        let state = gaussian_triphoton_state(&phase, p.pump_radius).stage(&row)?;
        let exact = exact_e3f(&state).stage(&row)?;
        t.push_row(vec![v, f * bound, f * exact, f * (exact - bound)])?;
    }
    Ok(t)
}

/// Energy-time bound of the time-frequency triplet source.
pub fn shalm_scenario(sigma_t: f64, sigma_omega: f64) -> Result<BoundReport> {
    energy_time_bound(sigma_t, sigma_omega).stage("energy-time bound")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseMatchReport {
    pub k_pump: f64,
    pub k_poling_1: f64,
    pub k_poling_2: f64,
    pub k_p_tilde: f64,
    pub a_param_m2: f64,
    /// Periods for lambda_p -> (3/2, 3) lambda_p and 3/2 lambda_p -> (3, 3)
    /// lambda_p from the lithium niobate dispersion.
    pub dispersion_poling_period_1_um: f64,
    pub dispersion_poling_period_2_um: f64,
    pub dispersion_k_p_tilde: f64,
}

pub fn phase_match_report(params: &ExperimentParams) -> Result<PhaseMatchReport> {
    let s = effective_pump_momentum(params).stage("phase match")?;
    let ln = CongruentLnExtraordinary;
    let lp = params.lambda_pump;
    let l1 = poling_period_from_dispersion(&ln, lp, 1.5 * lp, 3.0 * lp).stage("dispersion stage 1")?;
    let l2 = poling_period_from_dispersion(&ln, 1.5 * lp, 3.0 * lp, 3.0 * lp).stage("dispersion stage 2")?;
    let from_dispersion = ExperimentParams {
        poling_period_1: Some(l1),
        poling_period_2: Some(l2),
        ..*params
    };
    let d = effective_pump_momentum(&from_dispersion).stage("dispersion phase match")?;
    Ok(PhaseMatchReport {
        k_pump: s.k_pump,
        k_poling_1: s.k_poling_1,
        k_poling_2: s.k_poling_2,
        k_p_tilde: s.k_p_tilde,
        a_param_m2: s.a_param,
        dispersion_poling_period_1_um: l1 * 1e6,
        dispersion_poling_period_2_um: l2 * 1e6,
        dispersion_k_p_tilde: d.k_p_tilde,
    })
}

const TOTAL_NOTE: &str = "total over both transverse dimensions";

fn apply_convention(mut r: BoundReport, convention: Convention) -> BoundReport {
    if convention == Convention::Total {
        let f = convention.factor();
        r.bound_gebits *= f;
        r.standard_error = r.standard_error.map(|s| f * s);
        r.interval = r.interval.map(|(a, b)| (f * a, f * b));
        r.notes.push(TOTAL_NOTE.into());
    }
    r
}

fn source_state(cfg: &ScenarioConfig) -> Result<TripartiteGaussianState> {
    if let Some(s) = cfg.state {
        return Ok(s);
    }
    let k = resolve_k_p_tilde(cfg)?;
    let phase = PhaseMatchSolution::from_k_tilde(k, cfg.params.crystal_length).stage("phase match")?;
    gaussian_triphoton_state(&phase, cfg.params.pump_radius).stage("gaussian state")
}

/// `bound`: entropic from (h_x, h_k), variance-based from (sigma_x,
/// sigma_k), or else the Gaussian bound of the configured state or source.
pub fn adhoc_bound(cfg: &ScenarioConfig) -> Result<BoundReport> {
    let b = &cfg.bound;
    let coeffs = CoefficientVectors::new(b.coeffs.eta, b.coeffs.beta).stage("coefficients")?;
    match (b.h_x, b.h_k, b.sigma_x, b.sigma_k) {
        (Some(hx), Some(hk), None, None) => e3f_entropic_bound(hx, hk, &coeffs).stage("entropic bound"),
        (None, None, Some(sx), Some(sk)) => e3f_variance_bound(sx, sk, &coeffs).stage("variance bound"),
        (None, None, None, None) => {
            let r = if let Some(s) = cfg.state {
                gaussian_state_bound(&s, &coeffs).stage("gaussian bound")?
            } else if coeffs == CoefficientVectors::cascaded() {
                let k = resolve_k_p_tilde(cfg)?;
                spdc_closed_form_bound(&cfg.params, k).stage("closed-form bound")?
            } else {
                gaussian_state_bound(&source_state(cfg)?, &coeffs).stage("gaussian bound")?
            };
            Ok(apply_convention(r, cfg.output.convention))
        }
        _ => Err(CliError::Config(
            "give either both of h_x, h_k or both of sigma_x, sigma_k (or neither)".into(),
        )),
    }
}

/// Everything `simulate` produces.
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub table: CurveTable,
    pub report: BoundReport,
    pub analytic: BoundReport,
    pub position_histogram: MultiResHistogram<3>,
    pub momentum_histogram: MultiResHistogram<3>,
    pub metadata: Vec<(String, String)>,
}

pub const SIMULATION_COLUMNS: [&str; 11] = [
    "samples",
    "seed",
    "h_x_bits",
    "h_k_bits",
    "bound_gebits",
    "standard_error_gebits",
    "ci_low_gebits",
    "ci_high_gebits",
    "analytic_gebits",
    "position_leaves",
    "momentum_leaves",
];

/// Source parameters, phase matching, Gaussian state, exact samples,
/// adaptive 3-D histograms and the sampled bound with its bootstrap error.
pub fn run_simulation(cfg: &ScenarioConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    let exec = Execution::Parallel;
    let s = &cfg.sampler;
    let state = source_state(cfg)?;
    let coeffs = CoefficientVectors::cascaded();
    let x = sample_triplets(&state, Domain::Position, s.samples, s.seed, exec).stage("sampling")?;
    let k = sample_triplets(&state, Domain::Momentum, s.samples, s.seed, exec).stage("sampling")?;
    let hx = adaptive_histogram(&x.samples, &s.policy).stage("adaptive histogram")?;
    let hk = adaptive_histogram(&k.samples, &s.policy).stage("adaptive histogram")?;
    let report = estimate_bound_from_samples(&x, &k, &coeffs, &s.binning(), &s.bootstrap(), exec)
        .stage("bound estimate")?;
    let analytic = gaussian_state_bound(&state, &coeffs).stage("analytic bound")?;

    let conv = cfg.output.convention;
    let report = apply_convention(report, conv);
    let analytic = apply_convention(analytic, conv);
    let mut table = CurveTable::new(&SIMULATION_COLUMNS);
    let (lo, hi) = report.interval.unwrap_or((report.bound_gebits, report.bound_gebits));
    table.push_row(vec![
        s.samples as f64,
        s.seed as f64,
        report.h_x.unwrap_or(f64::NAN),
        report.h_k.unwrap_or(f64::NAN),
        report.bound_gebits,
        report.standard_error.unwrap_or(0.0),
        lo,
        hi,
        analytic.bound_gebits,
        hx.leaves.len() as f64,
        hk.leaves.len() as f64,
    ])?;
    let mut metadata = base_metadata(cfg);
    metadata.push(("certified".into(), report.certified.to_string()));
    table.metadata = metadata.clone();
    Ok(SimulationOutput {
        table,
        report,
        analytic,
        position_histogram: hx,
        momentum_histogram: hk,
        metadata,
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Output(e.to_string()))
}

/// The JSON metadata record of a simulation run.
pub fn simulation_record(out: &SimulationOutput) -> Result<String> {
    let v = json!({
        "metadata": table::metadata_object(&out.metadata),
        "report": to_value(&out.report)?,
        "analytic": to_value(&out.analytic)?,
        "position_histogram": {
            "leaves": out.position_histogram.leaves.len(),
            "truncated": out.position_histogram.truncated,
        },
        "momentum_histogram": {
            "leaves": out.momentum_histogram.leaves.len(),
            "truncated": out.momentum_histogram.truncated,
        },
    });
    table::pretty(&v)
}

/// Rendered outputs: the primary document and side files keyed by suffix.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub primary: String,
    pub extras: Vec<(&'static str, String)>,
}

fn render_table(t: &CurveTable, format: Option<Format>) -> Result<String> {
    match format.unwrap_or(Format::Csv) {
        Format::Csv => t.to_csv(),
        Format::Json => t.to_json(),
    }
}

fn render_report<T: Serialize>(meta: &[(String, String)], report: &T, format: Option<Format>) -> Result<String> {
    let v = to_value(report)?;
    match format.unwrap_or(Format::Json) {
        Format::Csv => table::report_csv(meta, &v),
        Format::Json => table::pretty(&json!({ "metadata": table::metadata_object(meta), "report": v })),
    }
}

fn histogram_csv(h: &MultiResHistogram<3>, meta: &[(String, String)], domain: Domain) -> Result<String> {
    let mut extra = meta.to_vec();
    extra.push(("domain".into(), domain.name().into()));
    let mut out = Vec::new();
    tripent::io::write_histogram_csv(h, &extra, &mut out).map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(out).map_err(|e| CliError::Output(e.to_string()))
}

/// Runs the configured scenario and renders its outputs.
pub fn execute(cfg: &ScenarioConfig) -> Result<Emission> {
    cfg.validate()?;
    let scenario = cfg
        .scenario
        .ok_or_else(|| CliError::Config("no scenario given (subcommand or `scenario =`)".into()))?;
    let meta = base_metadata(cfg);
    let format = cfg.output.format;
    let primary = match scenario {
        Scenario::Fig2 => {
            let k = resolve_k_p_tilde(cfg)?;
            let mut t = fig2_curve(&cfg.params, k, &cfg.sweep, cfg.output.convention)?;
            t.metadata = meta;
            render_table(&t, format)?
        }
        Scenario::Shalm => {
            let r = shalm_scenario(cfg.energy_time.sigma_t, cfg.energy_time.sigma_omega)?;
            render_report(&meta, &r, format)?
        }
        Scenario::PhaseMatch => render_report(&meta, &phase_match_report(&cfg.params)?, format)?,
        Scenario::Bound => render_report(&meta, &adhoc_bound(cfg)?, format)?,
        Scenario::Simulate => {
            let out = run_simulation(cfg)?;
            return Ok(Emission {
                primary: render_table(&out.table, format)?,
                extras: vec![
                    (".hist-x.csv", histogram_csv(&out.position_histogram, &out.metadata, Domain::Position)?),
                    (".hist-k.csv", histogram_csv(&out.momentum_histogram, &out.metadata, Domain::Momentum)?),
                    (".meta.json", simulation_record(&out)?),
                ],
            });
        }
    };
    Ok(Emission {
        primary,
        extras: Vec::new(),
    })
}

/// `dir/stem.ext` -> `dir/stem{suffix}`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Writes the primary output to `path` (or `stdout`) and side files next to
/// `path`. Returns the side files written; without a path they are skipped.
pub fn write_emission(em: &Emission, path: Option<&Path>, stdout: &mut impl Write) -> Result<Vec<PathBuf>> {
    let io = |p: &Path, e: std::io::Error| CliError::Output(format!("{}: {e}", p.display()));
    let Some(path) = path else {
        stdout
            .write_all(em.primary.as_bytes())
            .map_err(|e| CliError::Output(e.to_string()))?;
        return Ok(Vec::new());
    };
    std::fs::write(path, &em.primary).map_err(|e| io(path, e))?;
    let mut written = Vec::new();
    for (suffix, body) in &em.extras {
        let p = sibling(path, suffix);
        std::fs::write(&p, body).map_err(|e| io(&p, e))?;
        written.push(p);
    }
    Ok(written)
}
