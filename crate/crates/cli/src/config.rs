//! Experiment configuration as read from JSON.

use std::path::PathBuf;

use janossy_core::models::ChainModelSpec;
use janossy_core::measure_space::WindowSpec;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Not needed by `verify`, which draws its own instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ChainModelSpec>,
    /// One window per floor; empty means every window is empty.
    #[serde(default)]
    pub windows: Vec<WindowSpec>,
    pub task: Task,
    #[serde(default)]
    pub output: OutputOptions,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A point `[floor, node]`, both 0-based.
pub type PointSpec = [usize; 2];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Correlations {
        points: Vec<Vec<PointSpec>>,
        #[serde(default)]
        oracle: bool,
    },
    Janossy {
        #[serde(default)]
        points: Vec<Vec<PointSpec>>,
        #[serde(default)]
        counts: Vec<Vec<usize>>,
        #[serde(default)]
        oracle: bool,
    },
    Gap {
        #[serde(default)]
        oracle: bool,
    },
    Extremes {
        floor: usize,
        k: usize,
        s_grid: Vec<f64>,
    },
    Verify {
        suite: String,
        instances: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        force_full_windows: Option<usize>,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Correlations { .. } => "correlations",
            Task::Janossy { .. } => "janossy",
            Task::Gap { .. } => "gap",
            Task::Extremes { .. } => "extremes",
            Task::Verify { .. } => "verify",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Also write every kernel entry to kernel.csv.
    #[serde(default)]
    pub kernel_csv: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_condition: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    /// Oracle agreement threshold (absolute).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), String> {
        let t = &self.tolerances;
        for (name, v) in [("max_condition", t.max_condition), ("agreement", t.agreement)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(format!("tolerances.{name} must be positive, got {v}"));
                }
            }
        }
        if t.budget == Some(0) {
            return Err("tolerances.budget must be positive".into());
        }
        if self.model.is_none() && !matches!(self.task, Task::Verify { .. }) {
            return Err(format!("task {} needs a model", self.task.name()));
        }
        Ok(())
    }
}
