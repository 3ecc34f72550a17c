//! Run-wide knobs shared by the numeric experiments.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid sizes, tolerances, and the seed. One value of this struct fixes every
/// random choice and every discretization in a run, which is what makes
/// artifacts reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Angular grid size for disc suprema.
    pub n_theta: usize,
    /// Radial grid size for disc suprema.
    pub n_rho: usize,
    /// Cauchy quadrature node count.
    pub quadrature_points: usize,
    /// Number of dyadic δ levels in gain sweeps.
    pub delta_levels: usize,
    /// Fraction of the certified radius used when sampling discs.
    pub fill: f64,
    /// Disc sample count per level.
    pub samples: usize,
    /// Scale for the S-value tolerance: tol_S = tol_s_scale · max(|S|, t^12).
    pub tol_s_scale: f64,
    /// Relative tolerance of reported disc radii.
    pub tol_r_scale: f64,
    /// Log-log slope residual above which an order estimate is undetermined.
    pub parity_residual_cap: f64,
    /// Proof-window size as a fraction of t_max.
    pub delta0_factor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            n_theta: 64,
            n_rho: 64,
            quadrature_points: 64,
            delta_levels: 6,
            fill: 0.95,
            samples: 256,
            tol_s_scale: 1e-9,
            tol_r_scale: 1e-3,
            parity_residual_cap: 0.1,
            delta0_factor: 1e-2,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive_counts = [
            ("n_theta", self.n_theta),
            ("n_rho", self.n_rho),
            ("quadrature_points", self.quadrature_points),
            ("delta_levels", self.delta_levels),
            ("samples", self.samples),
        ];
        for (name, v) in positive_counts {
            if v == 0 {
                return Err(Error::ParameterRange { msg: format!("{name} must be positive") });
            }
        }
        if !(self.fill > 0.0 && self.fill <= 0.95) {
            return Err(Error::ParameterRange { msg: format!("fill {} outside (0, 0.95]", self.fill) });
        }
        for (name, v) in [
            ("tol_s_scale", self.tol_s_scale),
            ("tol_r_scale", self.tol_r_scale),
            ("parity_residual_cap", self.parity_residual_cap),
        ] {
            if !(v > 0.0) {
                return Err(Error::ParameterRange { msg: format!("{name} must be positive") });
            }
        }
        if !(self.delta0_factor > 0.0 && self.delta0_factor < 1.0) {
            return Err(Error::ParameterRange {
                msg: format!("delta0_factor {} outside (0, 1)", self.delta0_factor),
            });
        }
        Ok(())
    }

    /// Replace the seed with TANLIP_SEED when the variable is set.
    pub fn apply_env_seed(&mut self) -> Result<()> {
        if let Ok(text) = std::env::var("TANLIP_SEED") {
            self.seed = text.parse().map_err(|_| Error::ParameterRange {
                msg: format!("TANLIP_SEED must be an unsigned integer, got {text:?}"),
            })?;
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        use rand::SeedableRng;
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}
