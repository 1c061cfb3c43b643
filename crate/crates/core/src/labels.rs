//! Bookkeeping labels attached to sessions and error summaries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{ConfidenceInterval, ExerciseId};

/// Execution condition: no visual feedback, or feedback with a given tunnel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    #[serde(rename = "no")]
    NoFeedback,
    C1,
    C2,
    C3,
}

impl Condition {
    pub const ALL: [Condition; 4] = [Self::NoFeedback, Self::C1, Self::C2, Self::C3];

    pub fn ci(self) -> Option<ConfidenceInterval> {
        match self {
            Self::NoFeedback => None,
            Self::C1 => Some(ConfidenceInterval::C1),
            Self::C2 => Some(ConfidenceInterval::C2),
            Self::C3 => Some(ConfidenceInterval::C3),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::NoFeedback => "no",
            Self::C1 => "c1",
            Self::C2 => "c2",
            Self::C3 => "c3",
        }
    }
}

impl From<ConfidenceInterval> for Condition {
    fn from(ci: ConfidenceInterval) -> Self {
        match ci {
            ConfidenceInterval::C1 => Self::C1,
            ConfidenceInterval::C2 => Self::C2,
            ConfidenceInterval::C3 => Self::C3,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "no" | "none" | "nofeedback" | "no_feedback" => Ok(Self::NoFeedback),
            "c1" => Ok(Self::C1),
            "c2" => Ok(Self::C2),
            "c3" => Ok(Self::C3),
            _ => Err(format!("unknown condition `{s}` (expected no, c1, c2 or c3)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionLabels {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exercise: Option<ExerciseId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
}
