use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use skylink::render::render_svg;
use skylink::runner::{compare, run_with, sweep, RunOptions, SweepParam};
use skylink::{Config, Error, Output};

/// Environment variable that overrides the seed in any loaded configuration.
const SEED_VAR: &str = "SKYLINK_SEED";

#[derive(Parser)]
#[command(
    name = "skylink",
    version,
    about = "Self-organizing aerial access-point overlay simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write metrics.csv and run.json.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Record the per-step stage sequence in run.json.
        #[arg(long)]
        trace: bool,
    },
    /// Run the scenario once per value of a parameter (L, failure_fraction, s, K).
    Sweep {
        config: PathBuf,
        #[arg(long)]
        vary: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dynamic method against p-median and circle-packing placements.
    Compare {
        config: PathBuf,
        /// Access point counts to compare.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "10,20,30,40,50,60,70,80,90,100"
        )]
        values: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the stored snapshot nearest to a time as SVG.
    Render {
        /// run.json, or the directory holding it.
        run_output: PathBuf,
        #[arg(long)]
        at: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the default scenario configuration.
    Defaults,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

fn load_config(path: &Path) -> Result<Config, Error> {
    let mut cfg = Config::load(path)?;
    if let Ok(seed) = std::env::var(SEED_VAR) {
        cfg.seed = seed.trim().parse().map_err(|_| {
            Error::Config(format!("{SEED_VAR}={seed:?} is not an unsigned integer"))
        })?;
    }
    Ok(cfg)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, out, trace } => {
            let cfg = load_config(&config)?;
            let output = run_with(&cfg, RunOptions { trace })?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("metrics.csv"), output.metrics_csv()?)?;
            std::fs::write(out.join("run.json"), output.to_json()?)?;
            let last = output.records.last().expect("at least the initial record");
            println!(
                "t={:.2} coverage={:.4} fiedler={:.6} info_penetration={:.4} alive_maps={}",
                last.t, last.coverage, last.fiedler, last.info_penetration, last.alive_maps
            );
            for r in &output.recovery {
                let ratio = r
                    .ratio
                    .map_or_else(|| "undefined".to_string(), |x| format!("{x:.4}"));
                println!(
                    "recovery {:?} after t={}: pre={:.4} post={:.4} ratio={ratio}",
                    r.metric, r.event_time, r.pre, r.post
                );
            }
            Ok(())
        }
        Command::Sweep {
            config,
            vary,
            values,
            out,
        } => {
            let cfg = load_config(&config)?;
            let param: SweepParam = vary.parse()?;
            let points = sweep(&cfg, param, &values)?;
            let mut text = String::from("value,coverage,fiedler,info_penetration,alive_maps\n");
            for p in &points {
                let r = &p.result;
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    p.value, r.coverage, r.fiedler, r.info_penetration, r.alive_maps
                ));
            }
            write_or_print(out.as_deref(), &text)
        }
        Command::Compare {
            config,
            values,
            out,
        } => {
            let cfg = load_config(&config)?;
            let rows = compare(&cfg, &values)?;
            let mut text = String::from("map_count,method,coverage,fiedler,info_penetration\n");
            for row in &rows {
                for (name, r) in [
                    ("dynamic", &row.dynamic),
                    ("p-median", &row.p_median),
                    ("circle-packing", &row.circle_packing),
                ] {
                    text.push_str(&format!(
                        "{},{name},{},{},{}\n",
                        row.map_count, r.coverage, r.fiedler, r.info_penetration
                    ));
                }
            }
            write_or_print(out.as_deref(), &text)
        }
        Command::Render {
            run_output,
            at,
            out,
        } => {
            let path = if run_output.is_dir() {
                run_output.join("run.json")
            } else {
                run_output
            };
            let text = std::fs::read_to_string(&path)?;
            let output = Output::from_json(&text)?;
            let snapshot = output
                .snapshots
                .iter()
                .min_by(|a, b| (a.t - at).abs().total_cmp(&(b.t - at).abs()))
                .ok_or_else(|| Error::Input(format!("{} holds no snapshots", path.display())))?;
            write_or_print(out.as_deref(), &render_svg(snapshot, &output.config)?)
        }
        Command::Defaults => {
            print!("{}", Config::table_one().to_toml_string()?);
            Ok(())
        }
    }
}
