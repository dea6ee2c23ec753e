use serde::{Deserialize, Serialize};

/// Exploration threshold `rate(t)` used by the UCB-style indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ExplorationRate {
    /// `log t`
    #[serde(rename = "log")]
    LogT,
    /// `log t + 4 log log t`, floored at zero.
    #[default]
    #[serde(rename = "log-plus-4-loglog")]
    LogTPlus4LogLogT,
}

impl ExplorationRate {
    pub fn value(self, t: usize) -> f64 {
        if t < 2 {
            return 0.0;
        }
        let lt = (t as f64).ln();
        let v = match self {
            ExplorationRate::LogT => lt,
            ExplorationRate::LogTPlus4LogLogT => lt + 4.0 * lt.ln(),
        };
        v.max(0.0)
    }
}
