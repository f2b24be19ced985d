use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio of base horizon to current horizon. Maps timestamps of an execution
/// of any length onto the base timeline: below 1 for slower-than-base
/// executions, above 1 for faster ones.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LambdaScalar(f64);

impl LambdaScalar {
    pub const ONE: LambdaScalar = LambdaScalar(1.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn temporal_scalar(base_steps: usize, current_steps: usize) -> Result<LambdaScalar> {
    if base_steps == 0 || current_steps == 0 {
        return Err(Error::InvalidArgument(format!(
            "temporal scalar needs positive step counts, got {base_steps}/{current_steps}"
        )));
    }
    Ok(LambdaScalar(base_steps as f64 / current_steps as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert_eq!(temporal_scalar(15, 15).unwrap().value(), 1.0);
        assert_eq!(temporal_scalar(15, 25).unwrap().value(), 0.6);
        assert_eq!(temporal_scalar(15, 10).unwrap().value(), 1.5);
    }

    #[test]
    fn zero_length_rejected() {
        assert!(temporal_scalar(15, 0).is_err());
        assert!(temporal_scalar(0, 15).is_err());
    }
}
