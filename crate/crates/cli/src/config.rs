//! TOML configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use anyhow::Context;
use holotunnel::geometry::ExerciseParams;
use holotunnel::protocol::{EngineConfig, TrajectoryLibrary};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub server: ServerConfig,
    pub engine: EngineConfig,
    pub exercise: ExerciseParams,
    pub simulation: SimulationConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    /// Session log (JSONL); no log when absent.
    pub log: Option<PathBuf>,
    /// Directory of extra trajectory files loaded next to the built-ins.
    pub trajectories: Option<PathBuf>,
    /// Inbound messages per second per connection.
    pub rate_hz: f64,
    pub burst: f64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: 7878,
            log: None,
            trajectories: None,
            rate_hz: 500.0,
            burst: 250.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Closed-loop correction rate, 1/s.
    pub gain: f64,
    pub wander_sd_m: f64,
    /// Fraction of the tunnel radius inside which no correction is made.
    pub deadband: f64,
    pub theta: f64,
    pub sample_rate_hz: f64,
    pub repetitions: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            gain: 2.0,
            wander_sd_m: 0.01,
            deadband: 0.2,
            theta: 1.0,
            sample_rate_hz: 60.0,
            repetitions: 5,
        }
    }
}

impl Config {
    /// Reads a config file; relative paths inside it are taken from the
    /// file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Config = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.server.log, &mut cfg.server.trajectories].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> anyhow::Result<Config> {
        path.map_or_else(|| Ok(Config::default()), Config::load)
    }

    pub fn library(&self) -> anyhow::Result<TrajectoryLibrary> {
        let mut lib = TrajectoryLibrary::builtin(&self.exercise).context("building the exercise library")?;
        if let Some(dir) = &self.server.trajectories {
            lib.load_dir(dir)?;
        }
        Ok(lib)
    }
}
