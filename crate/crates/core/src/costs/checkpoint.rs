use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{init_params, CostKind, CostParams, CostSettings, RbfParams};
use crate::error::{Error, Result};

/// Persisted learned cost. `K` and `bandwidth` are null for non-RBF kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub kind: CostKind,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub base_duration: f64,
    pub bandwidth: Option<f64>,
    pub flat_params: Vec<f64>,
    pub seed: u64,
    pub epoch: usize,
}

impl Checkpoint {
    pub fn new(params: &CostParams, base_duration: f64, seed: u64, epoch: usize) -> Self {
        let rbf = params.rbf();
        Checkpoint {
            kind: params.kind(),
            k: rbf.map(RbfParams::k),
            base_duration: rbf.map_or(base_duration, |p| p.base_duration),
            bandwidth: rbf.map(|p| p.bandwidth),
            flat_params: params.flat(),
            seed,
            epoch,
        }
    }

    pub fn params(&self) -> Result<CostParams> {
        let settings = CostSettings {
            centers: self.k.unwrap_or(super::DEFAULT_CENTERS),
            base_duration: self.base_duration,
        };
        let mut params = init_params(self.kind, self.seed, &settings)?;
        if let (Some(b), CostParams::Rbf(p) | CostParams::LambdaRbf(p)) = (self.bandwidth, &mut params) {
            if !(b > 0.0) {
                return Err(Error::Config(format!("RBF bandwidth must be positive, got {b}")));
            }
            p.bandwidth = b;
        }
        params.with_flat(&self.flat_params)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}
