use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mfe::characterize;
use mfe::kinematics::LinkageGeometry;
use mfe::mapping::MappingConfig;
use mfe::plants::{MicrofluidicParams, MotorPlant};
use mfe::session::{
    check_safety, replay, run_session, GeometrySpec, Scenario, SessionConfig, SessionLog, Summary,
};

#[derive(Parser)]
#[command(
    name = "mfe",
    version,
    about = "Multimodal haptic teleoperation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bench traces of one leader-side actuator as CSV.
    Characterize {
        #[arg(value_enum)]
        device: Device,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Drive voltage(s). Fluidic default: 50,100,150,200. Thermo default: 5.
        #[arg(long, value_delimiter = ',')]
        voltage: Vec<f64>,
        /// Thermo only: run the PID loop towards this setpoint instead.
        #[arg(long)]
        setpoint: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Run a scenario headless and write its log, summary and frames.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Run leader and follower as separate endpoints over UDP.
        #[arg(long)]
        split: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Leader finger geometry (TOML, metres and degrees).
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[command(flatten)]
        mapping: MappingArgs,
    },
    /// Recompute every command of a logged run and check it bit for bit.
    Replay {
        log: PathBuf,
        /// Summary written next to the log; supplies the mapping config.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        mapping: MappingArgs,
    },
    /// Serve a live session and the operator console.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        #[arg(long, default_value = "scenarios")]
        scenarios: PathBuf,
        #[arg(long, default_value = "free")]
        scenario: String,
        /// Directory of built console assets.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Device {
    Motor,
    Fluidic,
    Thermo,
}

#[derive(Args, Default)]
struct MappingArgs {
    /// Mapping config file (TOML).
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Force threshold F_t in newtons.
    #[arg(long)]
    force_threshold: Option<f64>,
    /// Pressure intensity k.
    #[arg(long)]
    pressure_gain: Option<f64>,
    /// Motor current limit in mA.
    #[arg(long)]
    current_limit: Option<f64>,
}

impl MappingArgs {
    fn apply(&self, base: MappingConfig) -> anyhow::Result<MappingConfig> {
        let mut cfg = match &self.mapping {
            Some(path) => toml::from_str(&std::fs::read_to_string(path)?)
                .with_context(|| format!("parsing {}", path.display()))?,
            None => base,
        };
        if let Some(v) = self.force_threshold {
            cfg.force_threshold = v;
        }
        if let Some(v) = self.pressure_gain {
            cfg.pressure_gain = v;
        }
        if let Some(v) = self.current_limit {
            cfg.current_limit = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn characterize(
    device: Device,
    out: &Option<PathBuf>,
    voltage: &[f64],
    setpoint: Option<f64>,
    duration: Option<f64>,
) -> anyhow::Result<()> {
    let w = output(out)?;
    match device {
        Device::Motor => {
            let rows = characterize::motor_sweep(
                &MotorPlant::default(),
                &LinkageGeometry::calibrated(),
                50.0,
            );
            characterize::write_motor_csv(w, &rows)?;
        }
        Device::Fluidic => {
            let volts = if voltage.is_empty() {
                vec![50.0, 100.0, 150.0, 200.0]
            } else {
                voltage.to_vec()
            };
            let rows = characterize::fluidic_steps(
                &MicrofluidicParams::calibrated(),
                &volts,
                duration.unwrap_or(0.5),
            )?;
            characterize::write_fluidic_csv(w, &rows)?;
        }
        Device::Thermo => {
            let d = duration.unwrap_or(15.0);
            let rows = match setpoint {
                Some(sp) => characterize::thermo_closed_loop(sp, d)?,
                None => characterize::thermo_open_loop(voltage.first().copied().unwrap_or(5.0), d)?,
            };
            characterize::write_thermo_csv(w, &rows)?;
        }
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    scenario: &Path,
    split: bool,
    seed: Option<u64>,
    duration: Option<f64>,
    out_dir: &Path,
    geometry: &Option<PathBuf>,
    mapping: &MappingArgs,
) -> anyhow::Result<ExitCode> {
    let mut sc = Scenario::load(scenario)?;
    if let Some(seed) = seed {
        sc.seed = seed;
        sc.link.seed = seed;
    }
    if let Some(d) = duration {
        sc.duration_s = d;
    }
    if let Some(path) = geometry {
        let spec: GeometrySpec = toml::from_str(&std::fs::read_to_string(path)?)
            .with_context(|| format!("parsing {}", path.display()))?;
        sc.geometry = Some(spec);
    }
    sc.mapping = mapping.apply(sc.mapping)?;
    let mut cfg = SessionConfig::new(sc);
    if split {
        cfg = cfg.split();
    }
    std::fs::create_dir_all(out_dir)?;
    let stem = out_dir.join(&cfg.scenario.name);
    let log_path = stem.with_extension("csv");
    match run_session(&cfg) {
        Ok(out) => {
            out.log.save(&log_path)?;
            out.log.write_scenario_csv(BufWriter::new(File::create(
                stem.with_extension("scenario.csv"),
            )?))?;
            std::fs::write(stem.with_extension("frames"), &out.frames)?;
            write_json(&stem.with_extension("summary.json"), &out.summary)?;
            println!("{}", serde_json::to_string_pretty(&out.summary)?);
            if !out.summary.safety.is_safe() {
                eprintln!("safety violations: {}", out.summary.safety.violations.len());
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(failure) => {
            failure.partial.save(&log_path)?;
            bail!("{failure}; partial log written to {}", log_path.display())
        }
    }
}

fn replay_cmd(
    log_path: &Path,
    summary: &Option<PathBuf>,
    mapping: &MappingArgs,
) -> anyhow::Result<ExitCode> {
    let log =
        SessionLog::load(log_path).with_context(|| format!("reading {}", log_path.display()))?;
    let summary_path = summary
        .clone()
        .unwrap_or_else(|| log_path.with_extension("summary.json"));
    let base = match std::fs::read_to_string(&summary_path) {
        Ok(text) => {
            serde_json::from_str::<Summary>(&text)
                .with_context(|| format!("parsing {}", summary_path.display()))?
                .mapping
        }
        Err(_) => MappingConfig::default(),
    };
    let cfg = mapping.apply(base)?;
    let report = replay(&log, &cfg)?;
    let safety = check_safety(&log, &cfg);
    let last = log.records.last();
    let out = serde_json::json!({
        "ticks": report.ticks,
        "divergences": report.divergences,
        "first_divergence": report.first,
        "safety_violations": safety.violations.len(),
        "spilled_g": last.map_or(0.0, |r| r.follower.spilled_g),
        "dropped": last.is_some_and(|r| r.follower.dropped),
        "lost_ticks": log.records.iter().filter(|r| r.leader.link == mfe::protocol::LinkState::Lost).count(),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    if !report.is_clean() {
        eprintln!(
            "audit failed at tick {}",
            report.first.as_ref().map_or(0, |d| d.tick)
        );
        return Ok(ExitCode::from(3));
    }
    if !safety.is_safe() {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

async fn serve(
    port: u16,
    bind: &str,
    scenarios: &Path,
    scenario: &str,
    assets: &Option<PathBuf>,
) -> anyhow::Result<()> {
    let loaded = if scenarios.is_dir() {
        mfe_cli::serve::load_scenarios(scenarios)?
    } else {
        Default::default()
    };
    let app = mfe_cli::serve::router(mfe_cli::serve::ServeOptions {
        scenarios: loaded,
        initial: scenario.into(),
        assets: assets.clone(),
        tick_period: std::time::Duration::from_millis(10),
    })?;
    let listener = tokio::net::TcpListener::bind((bind, port)).await?;
    eprintln!("serving on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Characterize {
            device,
            out,
            voltage,
            setpoint,
            duration,
        } => characterize(*device, out, voltage, *setpoint, *duration).map(|_| ExitCode::SUCCESS),
        Command::Run {
            scenario,
            split,
            seed,
            duration,
            out_dir,
            geometry,
            mapping,
        } => run(
            scenario, *split, *seed, *duration, out_dir, geometry, mapping,
        ),
        Command::Replay {
            log,
            summary,
            mapping,
        } => replay_cmd(log, summary, mapping),
        Command::Serve {
            port,
            bind,
            scenarios,
            scenario,
            assets,
        } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(*port, bind, scenarios, scenario, assets))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
