use darkcool::engine::DEFAULT_CHECKPOINTS;
use serde::{Deserialize, Serialize};

/// Sweep description read from `--sweep <path>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSpec {
    /// α values at the configured doughnut order.
    Width {
        values: Vec<f64>,
        #[serde(default = "default_checkpoints")]
        checkpoints: Vec<usize>,
    },
    /// (2n, α) pairs.
    Order {
        pairs: Vec<(u32, f64)>,
        #[serde(default = "default_checkpoints")]
        checkpoints: Vec<usize>,
    },
}

fn default_checkpoints() -> Vec<usize> {
    DEFAULT_CHECKPOINTS.to_vec()
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}
