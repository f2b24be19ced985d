//! The five learnable cost parameterizations and the temporal scalar.
//!
//! | kind   | structure                                    | time input        |
//! |--------|----------------------------------------------|-------------------|
//! | `poly` | per-dimension cubic polynomial of the error  | none              |
//! | `rbf`  | Gaussian kernels over wall-clock time        | `x_t` (lam = 1)   |
//! | `lrbf` | Gaussian kernels over the base timeline      | `lam * x_t`       |
//! | `mlp`  | 16-unit sigmoid MLP on squared errors        | none              |
//! | `lmlp` | same MLP with an extra input                 | `lam * x_t`       |
//!
//! Every cost is written once over [`Scalar`], so the same code serves plain
//! evaluation and differentiation.

mod checkpoint;
mod lambda;
mod mlp;
mod poly;
mod rbf;

pub use checkpoint::Checkpoint;
pub use lambda::{temporal_scalar, LambdaScalar};
pub use mlp::{eval_mlp_cost, mlp_cost, MlpParams, HIDDEN};
pub use poly::{eval_poly_cost, poly_cost, PolyParams, POLY_DEGREE};
pub use rbf::{default_bandwidth, eval_rbf_cost, rbf_centers, rbf_cost, RbfParams, DEFAULT_CENTERS};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffcore::Scalar;
use crate::env::{Trajectory, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CostKind {
    #[serde(rename = "poly")]
    Poly,
    #[serde(rename = "rbf")]
    Rbf,
    #[serde(rename = "lrbf")]
    LambdaRbf,
    #[serde(rename = "mlp")]
    Mlp,
    #[serde(rename = "lmlp")]
    LambdaMlp,
}

impl CostKind {
    pub const ALL: [CostKind; 5] = [
        CostKind::Poly,
        CostKind::Rbf,
        CostKind::LambdaRbf,
        CostKind::Mlp,
        CostKind::LambdaMlp,
    ];

    /// The four kinds compared in the experiments.
    pub const COMPARED: [CostKind; 4] = [CostKind::Rbf, CostKind::LambdaRbf, CostKind::Mlp, CostKind::LambdaMlp];

    pub fn name(self) -> &'static str {
        match self {
            CostKind::Poly => "poly",
            CostKind::Rbf => "rbf",
            CostKind::LambdaRbf => "lrbf",
            CostKind::Mlp => "mlp",
            CostKind::LambdaMlp => "lmlp",
        }
    }

    pub fn uses_lambda(self) -> bool {
        matches!(self, CostKind::LambdaRbf | CostKind::LambdaMlp)
    }

    /// The temporally scaled counterpart of a plain kind.
    pub fn scaled_counterpart(self) -> Option<CostKind> {
        match self {
            CostKind::Rbf => Some(CostKind::LambdaRbf),
            CostKind::Mlp => Some(CostKind::LambdaMlp),
            _ => None,
        }
    }
}

impl std::fmt::Display for CostKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CostKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CostKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown cost kind '{s}'")))
    }
}

/// Structural hyperparameters shared by every kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSettings {
    /// RBF center count.
    pub centers: usize,
    /// Base duration, seconds.
    pub base_duration: f64,
}

impl Default for CostSettings {
    fn default() -> Self {
        CostSettings {
            centers: DEFAULT_CENTERS,
            base_duration: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CostParams {
    Poly(PolyParams),
    /// Kernels on wall-clock time: lambda is pinned to 1.
    Rbf(RbfParams),
    LambdaRbf(RbfParams),
    Mlp(MlpParams),
    LambdaMlp(MlpParams),
}

const INIT_WEIGHT: f64 = 0.1;
const MLP_INIT_RANGE: f64 = 0.5;

/// Initial parameters: constant 0.1 weights for polynomial and RBF costs,
/// uniform [-0.5, 0.5] MLP weights with zero biases.
pub fn init_params(kind: CostKind, rng_seed: u64, settings: &CostSettings) -> Result<CostParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut mlp = |lam_input: bool| {
        let mut p = MlpParams::zeros(lam_input);
        for w in p.hidden_weights.iter_mut().chain(p.output_weights.iter_mut()) {
            *w = rng.gen_range(-MLP_INIT_RANGE..=MLP_INIT_RANGE);
        }
        p
    };
    Ok(match kind {
        CostKind::Poly => CostParams::Poly(PolyParams::filled(INIT_WEIGHT)),
        CostKind::Rbf => CostParams::Rbf(RbfParams::new(settings.centers, settings.base_duration, INIT_WEIGHT)?),
        CostKind::LambdaRbf => {
            CostParams::LambdaRbf(RbfParams::new(settings.centers, settings.base_duration, INIT_WEIGHT)?)
        }
        CostKind::Mlp => CostParams::Mlp(mlp(false)),
        CostKind::LambdaMlp => CostParams::LambdaMlp(mlp(true)),
    })
}

impl CostParams {
    pub fn kind(&self) -> CostKind {
        match self {
            CostParams::Poly(_) => CostKind::Poly,
            CostParams::Rbf(_) => CostKind::Rbf,
            CostParams::LambdaRbf(_) => CostKind::LambdaRbf,
            CostParams::Mlp(_) => CostKind::Mlp,
            CostParams::LambdaMlp(_) => CostKind::LambdaMlp,
        }
    }

    /// The learnable entries, phi.
    pub fn flat(&self) -> Vec<f64> {
        match self {
            CostParams::Poly(p) => p.flat(),
            CostParams::Rbf(p) | CostParams::LambdaRbf(p) => p.flat(),
            CostParams::Mlp(p) | CostParams::LambdaMlp(p) => p.flat(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CostParams::Poly(_) => PolyParams::LEN,
            CostParams::Rbf(p) | CostParams::LambdaRbf(p) => 3 * p.k(),
            CostParams::Mlp(p) | CostParams::LambdaMlp(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same structure, new learnable entries.
    pub fn with_flat(&self, flat: &[f64]) -> Result<CostParams> {
        if flat.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "{} expects {} parameters, got {}",
                self.kind(),
                self.len(),
                flat.len()
            )));
        }
        let mut out = self.clone();
        match &mut out {
            CostParams::Poly(p) => *p = PolyParams::from_flat(flat),
            CostParams::Rbf(p) | CostParams::LambdaRbf(p) => p.set_flat(flat),
            CostParams::Mlp(p) | CostParams::LambdaMlp(p) => p.set_flat(flat),
        }
        Ok(out)
    }

    /// The lambda this kind actually sees: plain kinds ignore it.
    pub fn effective_lambda(&self, lam: LambdaScalar) -> LambdaScalar {
        if self.kind().uses_lambda() {
            lam
        } else {
            LambdaScalar::ONE
        }
    }

    /// Cost of a position sequence with learnable entries taken from `flat`
    /// (the structure comes from `self`).
    pub fn evaluate<T: Scalar>(&self, flat: &[T], lam: LambdaScalar, positions: &[[T; 3]], dt: f64, goal: Vec3) -> T {
        let lam = self.effective_lambda(lam);
        match self {
            CostParams::Poly(_) => poly_cost(flat, positions, goal),
            CostParams::Rbf(p) | CostParams::LambdaRbf(p) => rbf_cost(p, flat, lam, positions, dt, goal),
            CostParams::Mlp(p) | CostParams::LambdaMlp(p) => mlp_cost(p, flat, lam, positions, dt, goal),
        }
    }

    pub fn eval(&self, lam: LambdaScalar, traj: &Trajectory, goal: Vec3) -> f64 {
        self.evaluate(&self.flat(), lam, &traj.positions(), traj.dt(), goal)
    }

    pub fn rbf(&self) -> Option<&RbfParams> {
        match self {
            CostParams::Rbf(p) | CostParams::LambdaRbf(p) => Some(p),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::State;

    #[test]
    fn init_is_seed_deterministic() {
        for kind in CostKind::ALL {
            let s = CostSettings::default();
            assert_eq!(init_params(kind, 4, &s).unwrap(), init_params(kind, 4, &s).unwrap());
        }
    }

    #[test]
    fn rbf_init() {
        let p = init_params(CostKind::LambdaRbf, 0, &CostSettings::default()).unwrap();
        let rbf = p.rbf().unwrap();
        assert_eq!(rbf.bandwidth, 18.0);
        assert!(p.flat().iter().all(|&w| w == 0.1));
        assert_eq!(p.len(), 30);
    }

    #[test]
    fn mlp_init_range() {
        let p = init_params(CostKind::LambdaMlp, 0, &CostSettings::default()).unwrap();
        let CostParams::LambdaMlp(m) = &p else { unreachable!() };
        assert!(m.hidden_weights.iter().chain(&m.output_weights).all(|w| (-0.5..=0.5).contains(w)));
        assert!(m.hidden_bias.iter().all(|&b| b == 0.0) && m.output_bias == 0.0);
        assert_ne!(
            p,
            init_params(CostKind::LambdaMlp, 1, &CostSettings::default()).unwrap()
        );
    }

    #[test]
    fn flat_view_is_consistent() {
        for kind in CostKind::ALL {
            let p = init_params(kind, 2, &CostSettings::default()).unwrap();
            let shifted: Vec<f64> = p.flat().iter().map(|v| v + 0.25).collect();
            let q = p.with_flat(&shifted).unwrap();
            assert_eq!(q.flat(), shifted);
            assert_eq!(q.kind(), kind);
            assert!(p.with_flat(&shifted[1..]).is_err());
        }
    }

    #[test]
    fn kind_names_parse() {
        for kind in CostKind::ALL {
            assert_eq!(kind.name().parse::<CostKind>().unwrap(), kind);
        }
        assert!("nope".parse::<CostKind>().is_err());
    }

    #[test]
    fn plain_rbf_ignores_lambda() {
        let p = init_params(CostKind::Rbf, 0, &CostSettings::default()).unwrap();
        let traj = Trajectory::new(
            (0..=10).map(|t| State::at_rest([0.0, t as f64, 10.0])).collect(),
            0.2,
        )
        .unwrap();
        let goal = [0.0, 10.0, 0.0];
        let a = p.eval(temporal_scalar(15, 10).unwrap(), &traj, goal);
        let b = p.eval(LambdaScalar::ONE, &traj, goal);
        assert_eq!(a, b);
    }
}
