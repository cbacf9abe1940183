use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use fda_secrecy::config::{ConfigError, RunConfig, Truncation, DEFAULT_SAMPLES, DEFAULT_SEED};
use fda_secrecy::fda::{beampattern_gain, ArrayConfig, NodeGeometry};
use fda_secrecy::figures::{asr_scenario, figure_runs, sop_scenario, FigureId};
use fda_secrecy::manifest::Manifest;
use fda_secrecy::montecarlo::mc_secrecy;
use fda_secrecy::qam::{fit_exp_mixture, fit_exp_mixture_default, QamConstellation};
use fda_secrecy::secrecy::{
    asr_asymptote, asr_closed_form, asr_quadrature, gaussian_asr, prob_positive_secrecy, sop, sop_asymptote, sop_series,
};
use fda_secrecy::sweep::{mixture_for, run_sweep, SweepTable};

#[derive(Parser)]
#[command(name = "fda-secrecy", version, about = "Secrecy rate and outage of FDA links over FTR fading")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Monte Carlo seed (default 42 unless the config sets one).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Fixed series truncation J; the default grows J until the tail is negligible.
    #[arg(long, global = true)]
    truncation: Option<usize>,
    /// Gauss-Legendre order for the SOP integral.
    #[arg(long, global = true)]
    quadrature_v: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Eve's beampattern gain along range.
    Beampattern {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 28.0)]
        f0_ghz: f64,
        #[arg(long, default_value_t = 1.0)]
        delta_f_khz: f64,
        #[arg(long, default_value_t = 1.0)]
        r_b_km: f64,
        #[arg(long, default_value_t = 20.0)]
        theta_b_deg: f64,
        #[arg(long, default_value_t = 20.0)]
        theta_e_deg: f64,
        #[arg(long, default_value_t = 0.1)]
        r_e_min_km: f64,
        #[arg(long, default_value_t = 10.0)]
        r_e_max_km: f64,
        #[arg(long, default_value_t = 500)]
        points: usize,
    },
    /// QAM mutual information, its gap to log2 M and slope.
    Mi {
        #[arg(long, default_value_t = 16)]
        m: usize,
        #[arg(long, default_value_t = -20.0)]
        snr_db_min: f64,
        #[arg(long, default_value_t = 40.0)]
        snr_db_max: f64,
        #[arg(long, default_value_t = 61)]
        points: usize,
    },
    /// Average secrecy rate of one scenario (default: the ASR figure scenario).
    Asr { config: Option<PathBuf> },
    /// Secrecy outage probability of one scenario (default: the SOP figure scenario).
    Sop {
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1.8)]
        rate: f64,
    },
    /// Run the sweep described by a config file.
    Sweep { config: PathBuf },
    /// Monte Carlo estimates for one scenario.
    Montecarlo {
        config: Option<PathBuf>,
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Write the CSVs behind a figure (2a, 2b, 3a, 3b, 4a, 4b, 5a, 5b).
    ReproduceFigure { id: String },
    /// Fit the exponential mixture to I_M and print it as JSON.
    FitMixture {
        m: usize,
        #[arg(long)]
        k: Option<usize>,
    },
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<fda_secrecy::Error> for Failure {
    fn from(e: fda_secrecy::Error) -> Self {
        if e.is_numerical_guard() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Beampattern {
            n,
            f0_ghz,
            delta_f_khz,
            r_b_km,
            theta_b_deg,
            theta_e_deg,
            r_e_min_km,
            r_e_max_km,
            points,
        } => {
            let array = ArrayConfig::new(*n, f0_ghz * 1e9, delta_f_khz * 1e3)?;
            let bob = NodeGeometry::from_km_deg(*r_b_km, *theta_b_deg)?;
            let count = (*points).max(2);
            let mut rows = Vec::with_capacity(count);
            for i in 0..count {
                let r = r_e_min_km + (r_e_max_km - r_e_min_km) * i as f64 / (count - 1) as f64;
                let gain = beampattern_gain(&array, &bob, &NodeGeometry::from_km_deg(r, *theta_e_deg)?);
                rows.push(vec![Some(r), Some(gain)]);
            }
            let table = SweepTable { header: vec!["r_e_km".into(), "gain".into()], rows };
            write_table(g, "beampattern", &table)
        }
        Command::Mi { m, snr_db_min, snr_db_max, points } => {
            let qam = QamConstellation::new(*m)?;
            let count = (*points).max(2);
            let rows = (0..count)
                .map(|i| {
                    let db = snr_db_min + (snr_db_max - snr_db_min) * i as f64 / (count - 1) as f64;
                    let gamma = 10f64.powf(db / 10.0);
                    vec![Some(db), Some(qam.mi(gamma)), Some(qam.gap(gamma)), Some(qam.mi_slope(gamma))]
                })
                .collect();
            let table = SweepTable { header: vec!["snr_db".into(), "mi".into(), "gap".into(), "slope".into()], rows };
            write_table(g, &format!("mi_M{m}"), &table)
        }
        Command::Asr { config } => {
            let cfg = load_or(config.as_deref(), || asr_scenario(4), g)?;
            let w = cfg.scenario()?.resolve()?;
            let quad = asr_quadrature(&w)?;
            let rep = asr_asymptote(&w)?;
            let closed = match asr_closed_form(&w, &*mixture_for(w.qam())?) {
                Ok(r) => json!({"value": r.value, "bracket": r.error_estimate}),
                Err(fda_secrecy::Error::DegenerateEve) => json!(null),
                Err(e) => return Err(e.into()),
            };
            print_json(&json!({
                "snr_b": w.bob().avg_snr(),
                "snr_e": w.eve().avg_snr(),
                "asr_quad": quad.value,
                "asr_cf": closed,
                "asr_limit": rep.limit_value,
                "psi": rep.slope_coeff,
                "chi_b": rep.chi_b,
                "gaussian_asr": gaussian_asr(&w)?.value,
                "prob_positive": prob_positive_secrecy(&w)?,
            }));
            Ok(())
        }
        Command::Sop { config, rate } => {
            let cfg = load_or(config.as_deref(), || sop_scenario(4), g)?;
            let w = cfg.scenario()?.resolve()?;
            let outage = sop(&w, *rate)?;
            let series = match sop_series(&w, *rate) {
                Ok(r) => json!(r.value),
                Err(fda_secrecy::Error::DegenerateEve) => json!(null),
                Err(e) => return Err(e.into()),
            };
            let asym = match sop_asymptote(&w, *rate) {
                Ok(r) => json!({"limit": r.limit_value, "phi": r.slope_coeff, "chi_b": r.chi_b}),
                Err(fda_secrecy::Error::MiRange { .. }) => json!(null),
                Err(e) => return Err(e.into()),
            };
            print_json(&json!({
                "snr_b": w.bob().avg_snr(),
                "snr_e": w.eve().avg_snr(),
                "rate_bits": rate,
                "sop": outage.value,
                "sop_error_estimate": outage.error_estimate,
                "sop_series": series,
                "asymptote": asym,
            }));
            Ok(())
        }
        Command::Montecarlo { config, rate } => {
            let cfg = load_or(config.as_deref(), || asr_scenario(4), g)?;
            let w = cfg.scenario()?.resolve()?;
            let mc = mc_secrecy(&w, *rate, cfg.mc.samples, cfg.mc.seed)?;
            print_json(&serde_json::to_value(mc).expect("estimates serialize"));
            Ok(())
        }
        Command::Sweep { config } => {
            let bytes = fs::read(config)?;
            let cfg = apply_globals(RunConfig::from_path(config)?, g)?;
            if cfg.sweep.is_none() {
                return Err(Failure::Config("config has no sweep section".into()));
            }
            let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep").to_string();
            let table = run_sweep(&cfg)?;
            write_table(g, &stem, &table)?;
            let manifest =
                Manifest::new("sweep", cfg.mc.seed, &bytes, vec![cfg.to_value()], vec![format!("{stem}.csv")]);
            manifest.write(&g.out_dir.join(format!("{stem}.manifest.json")))?;
            Ok(())
        }
        Command::ReproduceFigure { id } => {
            let fig: FigureId = id.parse().map_err(Failure::Config)?;
            let base = apply_globals(asr_scenario(4), g)?;
            let runs = figure_runs(fig, &base.numerics, base.mc);
            let mut outputs = Vec::new();
            let mut configs = Vec::new();
            for r in &runs {
                log::info!("running {}", r.stem);
                let table = run_sweep(&r.config)?;
                write_table(g, &r.stem, &table)?;
                outputs.push(format!("{}.csv", r.stem));
                configs.push(r.config.to_value());
            }
            let input = serde_json::to_vec(&configs).expect("configs serialize");
            let manifest =
                Manifest::new(&format!("reproduce-figure {}", fig.label()), base.mc.seed, &input, configs, outputs);
            manifest.write(&g.out_dir.join(format!("{fig}.manifest.json")))?;
            Ok(())
        }
        Command::FitMixture { m, k } => {
            let qam = QamConstellation::new(*m)?;
            let mix = match k {
                Some(k) => fit_exp_mixture(&qam, *k)?,
                None => fit_exp_mixture_default(&qam)?,
            };
            println!("{}", mix.to_json());
            Ok(())
        }
    }
}

fn apply_globals(mut cfg: RunConfig, g: &Global) -> Result<RunConfig, Failure> {
    if let Some(s) = g.seed {
        cfg.mc.seed = s;
    }
    if let Some(n) = g.samples {
        cfg.mc.samples = n;
    }
    if let Some(j) = g.truncation {
        cfg.numerics.truncation = Truncation::Fixed(j);
    }
    if let Some(v) = g.quadrature_v {
        cfg.numerics.quadrature_v = v;
    }
    cfg.validate().map_err(|errs| Failure::from(ConfigError::Invalid(errs)))?;
    Ok(cfg)
}

fn load_or(path: Option<&Path>, default: impl FnOnce() -> RunConfig, g: &Global) -> Result<RunConfig, Failure> {
    let cfg = match path {
        Some(p) => RunConfig::from_path(p)?,
        None => {
            let mut c = default();
            c.mc.seed = DEFAULT_SEED;
            c.mc.samples = DEFAULT_SAMPLES;
            c
        }
    };
    apply_globals(cfg, g)
}

fn write_table(g: &Global, stem: &str, table: &SweepTable) -> Outcome {
    fs::create_dir_all(&g.out_dir)?;
    let path = g.out_dir.join(format!("{stem}.csv"));
    let file = fs::File::create(&path)?;
    table.write_csv(std::io::BufWriter::new(file))?;
    println!("{}", path.display());
    Ok(())
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON serializes"));
}
