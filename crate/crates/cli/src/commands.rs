//! Offline subcommands: simulation, sweeps, log analysis, recording and
//! questionnaire / error statistics.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use holotunnel::analytics::{analyze_path, ErrorSummary, Space};
use holotunnel::exec::ExecMode;
use holotunnel::feedback::{record_demonstration, HandSample};
use holotunnel::geometry::{generate_exercise, ExerciseId, Vec3};
use holotunnel::labels::Condition;
use holotunnel::protocol::{
    read_log, save_trajectory, session_ids, write_log, LogDirection, ProtocolSession, SessionLogRecord, WireMessage,
};
use holotunnel::sim::{run_closed_loop, run_open_loop, SimConfig};
use holotunnel::stats::{compare_conditions, sus_report, tam_report, ErrRow, QuestionnaireMatrix};
use holotunnel::sweep::{err_rows, run_sweep, SweepConfig};

use crate::config::Config;

/// File at `path`, or stdout.
fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> anyhow::Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got `{s}`")),
    }
}

pub struct SimulateOptions {
    pub exercise: ExerciseId,
    pub condition: Condition,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub gain: Option<f64>,
    pub wander: Option<f64>,
    pub bias: Vec3,
    pub subject: String,
    pub cycle_time: Option<f64>,
}

pub fn simulate(cfg: &Config, o: &SimulateOptions) -> anyhow::Result<()> {
    let traj = generate_exercise(o.exercise, &cfg.exercise)?;
    let sim_cfg = &cfg.simulation;
    let mut sim = SimConfig::new(o.exercise, o.condition).with_seed(o.seed);
    sim.noise.wander_sd = o.wander.unwrap_or(sim_cfg.wander_sd_m);
    sim.noise.bias = o.bias;
    sim.deadband = sim_cfg.deadband;
    sim.theta = sim_cfg.theta;
    sim.sample_rate_hz = sim_cfg.sample_rate_hz;
    sim.repetitions = sim_cfg.repetitions;
    sim.subject = Some(o.subject.clone());
    if let Some(t) = o.cycle_time {
        sim.cycle_time_s = t;
    }
    let run = match o.condition {
        Condition::NoFeedback => run_open_loop(&sim, &traj)?,
        _ => run_closed_loop(&sim, &traj, o.gain.unwrap_or(sim_cfg.gain))?,
    };
    let mut w = output(o.out.as_deref())?;
    write_log(&run.log, &mut w)?;
    w.flush()?;
    Ok(())
}

pub struct SweepOptions {
    pub subjects: u64,
    pub seed: u64,
    pub exercises: Vec<ExerciseId>,
    pub conditions: Vec<Condition>,
    pub gain: Option<f64>,
    pub wander: Option<f64>,
    pub joint: bool,
    pub sequential: bool,
    pub out: Option<PathBuf>,
}

pub fn sweep(cfg: &Config, o: &SweepOptions) -> anyhow::Result<()> {
    let sweep = SweepConfig {
        exercises: o.exercises.clone(),
        subjects: o.subjects,
        base_seed: o.seed,
        conditions: o.conditions.clone(),
        gain: o.gain.unwrap_or(cfg.simulation.gain),
        wander_sd: o.wander.unwrap_or(cfg.simulation.wander_sd_m),
        deadband: cfg.simulation.deadband,
        joint_space: o.joint,
        exercise_params: cfg.exercise,
        analysis: cfg.engine.analysis,
        arm: cfg.engine.arm,
    };
    let mode = if o.sequential { ExecMode::Sequential } else { ExecMode::Parallel };
    let results = run_sweep(&sweep, mode)?;
    let rows = err_rows(&results);
    let mut w = output(o.out.as_deref())?;
    ErrRow::write_csv(&rows, &mut w)?;
    w.flush()?;
    eprintln!("{} runs, {} rows", results.len(), rows.len());
    Ok(())
}

/// Replays every session of a log and analyzes each stop.
pub fn analyze(cfg: &Config, log: &Path, space: Space) -> anyhow::Result<Vec<ErrorSummary>> {
    let records = read_log(open(log)?).with_context(|| format!("reading {}", log.display()))?;
    let library = Arc::new(cfg.library()?);
    let mut summaries = Vec::new();
    for id in session_ids(&records) {
        let mut engine = ProtocolSession::new(Arc::clone(&library), cfg.engine.clone());
        let (mut produced, mut recorded) = (Vec::new(), Vec::new());
        for r in records.iter().filter(|r| r.session == id) {
            if r.dir == LogDirection::Out {
                recorded.push(r.msg.to_line());
                continue;
            }
            let replies = engine.handle(r.msg.clone());
            for m in &replies {
                if let WireMessage::Summary(s) = m {
                    let traj = engine
                        .session()
                        .placed_trajectory()
                        .context("stopped session has no trajectory")?;
                    let summary = analyze_path(
                        &s.session.tracked_path,
                        &traj,
                        space,
                        &cfg.engine.arm,
                        &cfg.engine.analysis,
                        &s.session.labels,
                    )
                    .with_context(|| format!("session {id}"))?;
                    summaries.push(summary);
                }
                produced.push(m.to_line());
            }
        }
        if produced != recorded {
            eprintln!("warning: session {id} replays differently from its log");
        }
    }
    if summaries.is_empty() {
        bail!("{}: no stopped session to analyze", log.display());
    }
    Ok(summaries)
}

pub fn write_analysis(
    summaries: &[ErrorSummary],
    out: Option<&Path>,
    csv: Option<&Path>,
) -> anyhow::Result<()> {
    write_json(&summaries, out)?;
    if let Some(path) = csv {
        let rows = summaries
            .iter()
            .map(|s| {
                let (Some(subject), Some(exercise), Some(condition)) = (&s.subject, s.exercise, s.condition) else {
                    bail!("summary lacks subject, exercise or condition labels");
                };
                Ok(ErrRow {
                    subject: subject.clone(),
                    exercise,
                    condition,
                    space: s.space,
                    err: s.err_reported(),
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let mut w = output(Some(path))?;
        ErrRow::write_csv(&rows, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

/// Hand samples from JSONL: session log records (inbound samples only),
/// `hand_sample` frames, or bare `{t_ms, pos_m}` objects.
pub fn read_samples(path: &Path) -> anyhow::Result<Vec<HandSample>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let msg = if let Ok(r) = serde_json::from_str::<SessionLogRecord>(&line) {
            (r.dir == LogDirection::In).then_some(r.msg)
        } else if let Ok(m) = WireMessage::parse_line(&line) {
            Some(m)
        } else {
            let s: HandSample = serde_json::from_str(&line)
                .with_context(|| format!("{}:{}: not a hand sample", path.display(), i + 1))?;
            out.push(s);
            None
        };
        if let Some(WireMessage::HandSample { t_ms, pos_m }) = msg {
            out.push(HandSample::new(t_ms, pos_m));
        }
    }
    Ok(out)
}

pub struct RecordOptions {
    pub input: PathBuf,
    pub spacing: f64,
    pub smooth: usize,
    pub id: Option<String>,
    pub author: Option<String>,
    pub out: PathBuf,
}

pub fn record(o: &RecordOptions) -> anyhow::Result<()> {
    let samples = read_samples(&o.input)?;
    let id = o.id.clone().unwrap_or_else(|| {
        o.out.file_stem().map_or("recorded".into(), |s| s.to_string_lossy().into_owned())
    });
    let traj = record_demonstration(id, &samples, o.spacing, o.smooth, o.author.clone())?;
    save_trajectory(&o.out, &traj)?;
    eprintln!("{} samples -> {} via-points, {:.3} m", samples.len(), traj.via_points.len(), traj.length());
    Ok(())
}

pub fn stats_sus(input: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let m = QuestionnaireMatrix::from_csv(open(input)?)?;
    write_json(&sus_report(&m)?, out)
}

pub fn stats_tam(input: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let m = QuestionnaireMatrix::from_csv(open(input)?)?;
    write_json(&tam_report(&m)?, out)
}

pub fn stats_compare(input: &Path, space: Space, out: Option<&Path>) -> anyhow::Result<()> {
    let rows = ErrRow::read_csv(open(input)?)?;
    if !rows.iter().any(|r| r.space == space) {
        bail!("{}: no `{}` rows", input.display(), space.as_str());
    }
    write_json(&compare_conditions(&rows, space), out)
}
