use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tripent_cli::config::{BinningKind, SweepScale};
use tripent_cli::{execute, write_emission, CliError, Convention, Format, KpTilde, Scenario, ScenarioConfig, SweepVariable};

/// Tripartite entanglement witnesses for cascaded SPDC sources.
///
/// Flags override values read from --config; a subcommand overrides the
/// configured scenario.
#[derive(Parser, Debug)]
#[command(name = "tripent", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct Global {
    /// Scenario configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; side files of `simulate` are written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Pump beam radius in mm.
    #[arg(long, global = true, value_name = "MM", allow_hyphen_values = true)]
    sigma_p: Option<f64>,
    #[arg(long, global = true, value_name = "MM", allow_hyphen_values = true)]
    crystal_length: Option<f64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Effective pump momentum in 1/m, or `auto` to derive it.
    #[arg(long, global = true)]
    k_p_tilde: Option<String>,
    /// Report SPDC bounds per transverse axis (default).
    #[arg(long, global = true, conflicts_with = "total")]
    per_axis: bool,
    /// Report SPDC bounds summed over both transverse axes.
    #[arg(long, global = true)]
    total: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScaleArg {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariableArg {
    SigmaP,
    CrystalLength,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BinningArg {
    Fixed,
    Adaptive,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form bound and exact entanglement versus pump radius.
    Fig2 {
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_enum)]
        scale: Option<ScaleArg>,
        #[arg(long, value_enum)]
        variable: Option<VariableArg>,
    },
    /// Energy-time bound of a time-frequency triplet source.
    Shalm {
        /// Time spread in seconds.
        #[arg(long, allow_hyphen_values = true)]
        sigma_t: Option<f64>,
        /// Frequency spread in rad/s.
        #[arg(long, allow_hyphen_values = true)]
        sigma_omega: Option<f64>,
    },
    /// Effective pump momentum and poling periods.
    PhaseMatch,
    /// Sample triplets, histogram them and estimate the bound.
    Simulate {
        #[arg(long, value_enum)]
        binning: Option<BinningArg>,
    },
    /// Bound from given entropies or standard deviations.
    Bound {
        #[arg(long, allow_hyphen_values = true)]
        h_x: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        h_k: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        sigma_x: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        sigma_k: Option<f64>,
        /// Position coefficients, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eta: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        beta: Option<Vec<f64>>,
    },
}

fn triple(name: &str, v: &[f64]) -> tripent_cli::Result<[f64; 3]> {
    <[f64; 3]>::try_from(v).map_err(|_| CliError::Config(format!("--{name} takes three comma-separated values")))
}

fn build_config(cli: Cli) -> tripent_cli::Result<ScenarioConfig> {
    let g = cli.global;
    let mut cfg = match &g.config {
        Some(p) => ScenarioConfig::from_path(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(f) = g.format {
        cfg.output.format = Some(match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        });
    }
    if let Some(s) = g.seed {
        cfg.sampler.seed = s;
    }
    if let Some(mm) = g.sigma_p {
        cfg.params.pump_radius = mm / 1e3;
    }
    if let Some(mm) = g.crystal_length {
        cfg.params.crystal_length = mm / 1e3;
    }
    if let Some(n) = g.samples {
        cfg.sampler.samples = n;
    }
    if let Some(k) = g.k_p_tilde {
        cfg.k_p_tilde = match k.as_str() {
            "auto" => KpTilde::Auto,
            s => KpTilde::Fixed(
                s.parse()
                    .map_err(|_| CliError::Config(format!("--k-p-tilde: not a number: `{s}`")))?,
            ),
        };
    }
    if g.total {
        cfg.output.convention = Convention::Total;
    } else if g.per_axis {
        cfg.output.convention = Convention::PerAxis;
    }
    cfg.output.path = g.out.or(cfg.output.path);

    if let Some(cmd) = cli.command {
        cfg.scenario = Some(match cmd {
            Command::Fig2 {
                min,
                max,
                points,
                scale,
                variable,
            } => {
                let s = &mut cfg.sweep;
                if let Some(v) = variable {
                    s.variable = match v {
                        VariableArg::SigmaP => SweepVariable::SigmaP,
                        VariableArg::CrystalLength => SweepVariable::CrystalLength,
                    };
                }
                s.min = min.unwrap_or(s.min);
                s.max = max.unwrap_or(s.max);
                s.points = points.unwrap_or(s.points);
                if let Some(sc) = scale {
                    s.scale = match sc {
                        ScaleArg::Linear => SweepScale::Linear,
                        ScaleArg::Log => SweepScale::Log,
                    };
                }
                Scenario::Fig2
            }
            Command::Shalm { sigma_t, sigma_omega } => {
                let e = &mut cfg.energy_time;
                e.sigma_t = sigma_t.unwrap_or(e.sigma_t);
                e.sigma_omega = sigma_omega.unwrap_or(e.sigma_omega);
                Scenario::Shalm
            }
            Command::PhaseMatch => Scenario::PhaseMatch,
            Command::Simulate { binning } => {
                if let Some(b) = binning {
                    cfg.sampler.binning = match b {
                        BinningArg::Fixed => BinningKind::Fixed,
                        BinningArg::Adaptive => BinningKind::Adaptive,
                    };
                }
                Scenario::Simulate
            }
            Command::Bound {
                h_x,
                h_k,
                sigma_x,
                sigma_k,
                eta,
                beta,
            } => {
                let b = &mut cfg.bound;
                b.h_x = h_x.or(b.h_x);
                b.h_k = h_k.or(b.h_k);
                b.sigma_x = sigma_x.or(b.sigma_x);
                b.sigma_k = sigma_k.or(b.sigma_k);
                if let Some(e) = eta {
                    b.coeffs.eta = triple("eta", &e)?;
                }
                if let Some(e) = beta {
                    b.coeffs.beta = triple("beta", &e)?;
                }
                Scenario::Bound
            }
        });
    }
    Ok(cfg)
}

fn run(cli: Cli) -> tripent_cli::Result<()> {
    let cfg = build_config(cli)?;
    let em = execute(&cfg)?;
    let written = write_emission(&em, cfg.output.path.as_deref(), &mut std::io::stdout().lock())?;
    if let Some(p) = &cfg.output.path {
        eprintln!("wrote {}", p.display());
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tripent: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
