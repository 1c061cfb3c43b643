use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use holotunnel::analytics::Space;
use holotunnel::geometry::{ExerciseId, Vec3};
use holotunnel::labels::Condition;

mod commands;
mod config;
mod serve;

use commands::*;
use config::Config;

#[derive(Parser)]
#[command(name = "holotunnel", version, about = "Trajectory-tunnel feedback server and analysis tools")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the session server.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Session log file, overriding the config.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Simulate one session and write its log.
    Simulate {
        #[arg(long)]
        exercise: ExerciseId,
        #[arg(long)]
        condition: Condition,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Closed-loop correction rate, 1/s.
        #[arg(long)]
        gain: Option<f64>,
        /// Wander standard deviation, meters.
        #[arg(long)]
        wander: Option<f64>,
        /// Constant hand offset `x,y,z` in meters.
        #[arg(long, value_parser = parse_vec3, default_value = "0,0,0")]
        bias: Vec3,
        #[arg(long, default_value = "s01")]
        subject: String,
        #[arg(long)]
        cycle_time: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Simulate every subject, exercise and condition; write the error CSV.
    Sweep {
        #[arg(long, default_value_t = 15)]
        subjects: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "T1,T2,T3,T4")]
        exercises: Vec<ExerciseId>,
        #[arg(long, value_delimiter = ',', default_value = "c1,c2,c3")]
        conditions: Vec<Condition>,
        #[arg(long)]
        gain: Option<f64>,
        #[arg(long)]
        wander: Option<f64>,
        /// Skip the joint-space analysis.
        #[arg(long)]
        no_joint: bool,
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Replay a session log and compute the task error of every stop.
    Analyze {
        log: PathBuf,
        #[arg(long, default_value = "ee")]
        space: Space,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write `subject,exercise,condition,space,err` rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Turn a demonstrated hand path into a trajectory file.
    Record {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        spacing: f64,
        #[arg(long, default_value_t = holotunnel::feedback::DEFAULT_SMOOTH_WINDOW)]
        smooth: usize,
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        author: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Questionnaire and error statistics.
    Stats {
        #[command(subcommand)]
        which: StatsCmd,
    },
}

#[derive(Subcommand)]
enum StatsCmd {
    /// SUS scores from a questionnaire CSV.
    Sus {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// TAM category scores, reliability, correlations and regressions.
    Tam {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normality and paired Wilcoxon tests on an error CSV.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "ee")]
        space: Space,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Cmd::Serve { port, host, config, log } => {
            let mut cfg = Config::load_or_default(config.as_deref())?;
            if let Some(p) = port {
                cfg.server.port = p;
            }
            if let Some(h) = host {
                cfg.server.host = h;
            }
            if log.is_some() {
                cfg.server.log = log;
            }
            serve::serve(&cfg)
        }
        Cmd::Simulate {
            exercise,
            condition,
            seed,
            out,
            gain,
            wander,
            bias,
            subject,
            cycle_time,
            config,
        } => {
            let cfg = Config::load_or_default(config.as_deref())?;
            simulate(
                &cfg,
                &SimulateOptions {
                    exercise,
                    condition,
                    seed,
                    out,
                    gain,
                    wander,
                    bias,
                    subject,
                    cycle_time,
                },
            )
        }
        Cmd::Sweep {
            subjects,
            seed,
            exercises,
            conditions,
            gain,
            wander,
            no_joint,
            sequential,
            out,
            config,
        } => {
            let cfg = Config::load_or_default(config.as_deref())?;
            sweep(
                &cfg,
                &SweepOptions {
                    subjects,
                    seed,
                    exercises,
                    conditions,
                    gain,
                    wander,
                    joint: !no_joint,
                    sequential,
                    out,
                },
            )
        }
        Cmd::Analyze { log, space, out, csv, config } => {
            let cfg = Config::load_or_default(config.as_deref())?;
            let summaries = analyze(&cfg, &log, space)?;
            write_analysis(&summaries, out.as_deref(), csv.as_deref())
        }
        Cmd::Record {
            input,
            spacing,
            smooth,
            id,
            author,
            out,
        } => record(&RecordOptions {
            input,
            spacing,
            smooth,
            id,
            author,
            out,
        }),
        Cmd::Stats { which } => match which {
            StatsCmd::Sus { input, out } => stats_sus(&input, out.as_deref()),
            StatsCmd::Tam { input, out } => stats_tam(&input, out.as_deref()),
            StatsCmd::Compare { input, space, out } => stats_compare(&input, space, out.as_deref()),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        // usage errors exit with 2, --help and --version with 0
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
