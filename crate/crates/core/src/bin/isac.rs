use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use isac_limits::experiments::{self, ExperimentConfig, Metadata, WaveformCompare};
use isac_limits::regions::{Mode, DEFAULT_GRID_POINTS, DEFAULT_SATURATION_FRACTION};
use isac_limits::waveform::Ensemble;
use isac_limits::Error;

/// Communication and sensing limits of a band-limited ISAC link.
#[derive(Parser, Debug)]
#[command(name = "isac", version = experiments::version_string())]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON configuration file (flat schema, see README).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV output path; stdout when absent. A `<out>.meta.json` sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte-Carlo trial count.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Sensing-parameter count K.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Exact formulas or high-SNR approximations (region sweeps).
    #[arg(long, global = true, value_enum, default_value_t = CliMode::Exact)]
    mode: CliMode,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CliMode {
    Exact,
    Approx,
}

impl From<CliMode> for Mode {
    fn from(m: CliMode) -> Mode {
        match m {
            CliMode::Exact => Mode::Exact,
            CliMode::Approx => Mode::Approx,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CliEnsemble {
    Gaussian,
    ConstantModulus,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// MSE bound over an SMI grid for each (K, rho_s).
    SmiMse {
        #[arg(long, value_delimiter = ',', default_value = "4,8,12,16")]
        k_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.3,0.6,0.9")]
        rho_s_list: Vec<f64>,
        #[arg(long, default_value_t = 100.0)]
        smi_max: f64,
        #[arg(long, default_value_t = 1.0)]
        smi_step: f64,
    },
    /// Communication-sensing region sweeps with region labels.
    Region {
        /// Defaults to the configured U_ISAC.
        #[arg(long, value_delimiter = ',')]
        u_isac_list: Vec<usize>,
        /// Defaults to the configured rho_x.
        #[arg(long, value_delimiter = ',')]
        rho_x_list: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[arg(long, default_value_t = DEFAULT_SATURATION_FRACTION)]
        saturation_fraction: f64,
    },
    /// Gaussian versus constant-modulus waveforms.
    WaveformCompare {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        m_c_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        u_s_list: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        outer: usize,
        #[arg(long, default_value_t = 10_000)]
        inner: usize,
    },
    /// Full-channel sensing versus parameter correlation.
    SensingRho {
        #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.4,0.6,0.8")]
        rho_s_list: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        u_s: usize,
    },
    /// LMMSE empirical MSE against the bound.
    Oracle {
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        u_s_list: Vec<usize>,
    },
    /// Dump one CPI of transmit samples.
    DumpWaveform {
        #[arg(long, value_enum, default_value_t = CliEnsemble::Gaussian)]
        ensemble: CliEnsemble,
        /// Defaults to the configured rho_x.
        #[arg(long)]
        rho_x: Option<f64>,
    },
}

fn load_config(g: &Global) -> Result<ExperimentConfig, Error> {
    let mut file = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidParameter { name: "config", reason: format!("{}: {e}", path.display()) })?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidParameter { name: "config", reason: e.to_string() })?
        }
        None => experiments::ConfigFile::default(),
    };
    if let Some(s) = g.seed {
        file.seed = s;
    }
    if let Some(t) = g.trials {
        file.trials = t;
    }
    if let Some(k) = g.k {
        file.k = Some(k);
    }
    if let Some(o) = &g.out {
        file.output_path = Some(o.clone());
    }
    ExperimentConfig::try_from(file)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::SmiMse { .. } => "smi-mse",
        Command::Region { .. } => "region",
        Command::WaveformCompare { .. } => "waveform-compare",
        Command::SensingRho { .. } => "sensing-rho",
        Command::Oracle { .. } => "oracle",
        Command::DumpWaveform { .. } => "dump-waveform",
    }
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::InvalidParameter { name: "out", reason: format!("{}: {e}", path.display()) }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(&cli.global)?;
    let mode: Mode = cli.global.mode.into();
    let mut warnings = Vec::new();
    let mut buf: Vec<u8> = Vec::new();
    let arguments = match &cli.command {
        Command::SmiMse { k_list, rho_s_list, smi_max, smi_step } => {
            if !smi_step.is_finite() || *smi_step <= 0.0 || !smi_max.is_finite() || *smi_max < 0.0 {
                return Err(Error::InvalidParameter { name: "smi_step", reason: "need smi_step > 0 and smi_max >= 0".into() });
            }
            let steps = (smi_max / smi_step).floor() as usize;
            let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * smi_step).collect();
            experiments::cmd_smi_mse(&cfg, k_list, rho_s_list, &grid, &mut buf)?;
            json!({ "k_list": k_list, "rho_s_list": rho_s_list, "smi_max": smi_max, "smi_step": smi_step })
        }
        Command::Region { u_isac_list, rho_x_list, grid_points, saturation_fraction } => {
            let u_list = if u_isac_list.is_empty() { vec![cfg.u_isac] } else { u_isac_list.clone() };
            let r_list = if rho_x_list.is_empty() { vec![cfg.correlation.rho_x] } else { rho_x_list.clone() };
            experiments::cmd_region(&cfg, mode, &u_list, &r_list, *grid_points, *saturation_fraction, &mut buf)?;
            json!({ "mode": mode.to_string(), "u_isac_list": u_list, "rho_x_list": r_list,
                    "grid_points": grid_points, "saturation_fraction": saturation_fraction })
        }
        Command::WaveformCompare { n_list, m_c_list, u_s_list, outer, inner } => {
            let p = WaveformCompare {
                n_list: n_list.clone(),
                m_c_list: m_c_list.clone(),
                u_s_list: u_s_list.clone(),
                n_outer: *outer,
                n_inner: *inner,
            };
            experiments::cmd_waveform_compare(&cfg, &p, &mut buf)?;
            serde_json::to_value(&p).expect("serializable")
        }
        Command::SensingRho { rho_s_list, u_s } => {
            experiments::cmd_sensing_rho(&cfg, rho_s_list, *u_s, &mut buf)?;
            json!({ "rho_s_list": rho_s_list, "u_s": u_s })
        }
        Command::Oracle { u_s_list } => {
            warnings = experiments::cmd_oracle(&cfg, u_s_list, &mut buf)?;
            json!({ "u_s_list": u_s_list })
        }
        Command::DumpWaveform { ensemble, rho_x } => {
            let ens = match ensemble {
                CliEnsemble::Gaussian => Ensemble::Gaussian { rho_x: rho_x.unwrap_or(cfg.correlation.rho_x) },
                CliEnsemble::ConstantModulus => {
                    if rho_x.is_some_and(|r| r != 0.0) {
                        return Err(Error::InvalidParameter {
                            name: "rho_x",
                            reason: "spatial correlation is only defined for the Gaussian ensemble".into(),
                        });
                    }
                    Ensemble::ConstantModulus
                }
            };
            experiments::cmd_dump_waveform(&cfg, ens, &mut buf)?;
            json!({ "ensemble": ens.tag().to_string() })
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match &cfg.output_path {
        Some(path) => {
            std::fs::write(path, &buf).map_err(|e| io_error(path, e))?;
            let meta = Metadata {
                command: command_name(&cli.command),
                version: experiments::version_string(),
                seed: cfg.seed,
                config: &cfg,
                arguments,
            };
            let mut meta_path = path.as_os_str().to_owned();
            meta_path.push(".meta.json");
            let meta_path = PathBuf::from(meta_path);
            let f = File::create(&meta_path).map_err(|e| io_error(&meta_path, e))?;
            let mut w = BufWriter::new(f);
            serde_json::to_writer_pretty(&mut w, &meta)
                .map_err(|e| io_error(&meta_path, io::Error::other(e)))?;
            writeln!(w).map_err(|e| io_error(&meta_path, e))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            match lock.write_all(&buf).and_then(|_| lock.flush()) {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                    return Err(io_error(Path::new("<stdout>"), e));
                }
                _ => {}
            }
        }
    }
    Ok(())
}

fn init_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("ISAC_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidParameter { name: "ISAC_THREADS", reason: format!("expected a positive integer, got {v:?}") })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter { name: "ISAC_THREADS", reason: e.to_string() })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
