use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::geometry::{generate_exercise, ExerciseId, ExerciseParams, GeometryError, Trajectory};

#[derive(Debug, thiserror::Error)]
pub enum TrajectoryFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}, column {column}: {message}")]
    SchemaViolation {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: GeometryError,
    },
}

/// Reads a trajectory file, rejecting unknown or missing fields.
pub fn load_trajectory(path: &Path) -> Result<Trajectory, TrajectoryFileError> {
    let text = fs::read_to_string(path).map_err(|source| TrajectoryFileError::Io {
        path: path.to_owned(),
        source,
    })?;
    let t: Trajectory = serde_json::from_str(&text).map_err(|e| TrajectoryFileError::SchemaViolation {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    t.validate().map_err(|source| TrajectoryFileError::Invalid {
        path: path.to_owned(),
        source,
    })?;
    Ok(t)
}

pub fn save_trajectory(path: &Path, t: &Trajectory) -> Result<(), TrajectoryFileError> {
    let mut text = serde_json::to_string_pretty(t).expect("trajectories serialize");
    text.push('\n');
    fs::write(path, text).map_err(|source| TrajectoryFileError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Trajectories selectable by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryLibrary {
    entries: BTreeMap<String, Trajectory>,
}

impl TrajectoryLibrary {
    /// The four built-in exercises, keyed `T1`..`T4`.
    pub fn builtin(params: &ExerciseParams) -> Result<Self, GeometryError> {
        let mut lib = Self::default();
        for id in ExerciseId::ALL {
            lib.insert(generate_exercise(id, params)?);
        }
        Ok(lib)
    }

    pub fn insert(&mut self, t: Trajectory) {
        self.entries.insert(t.id.clone(), t);
    }

    pub fn get(&self, id: &str) -> Option<&Trajectory> {
        self.entries.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Adds every `*.json` trajectory in `dir`, in file-name order.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, TrajectoryFileError> {
        let io = |source| TrajectoryFileError::Io {
            path: dir.to_owned(),
            source,
        };
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for p in &paths {
            self.insert(load_trajectory(p)?);
        }
        Ok(paths.len())
    }
}
