use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Problem definition: competing powers `q < p`, boost velocity `v`, and the
/// periodic box `[-L/2, L/2)^d` sampled with `n` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Defocusing exponent.
    pub q: f64,
    /// Focusing exponent.
    pub p: f64,
    /// Boost velocity, one component per axis.
    pub v: Vec<f64>,
    pub dim: usize,
    /// Torus side length `L`.
    pub len: f64,
    /// Points per axis.
    pub n: usize,
}

impl ModelParams {
    /// One-dimensional model on the default grid (`N = 1024`, `L = 80`).
    pub fn one_d(q: f64, p: f64, v: f64) -> Self {
        ModelParams { q, p, v: vec![v], dim: 1, len: 80.0, n: 1024 }
    }

    /// Two-dimensional model on the default grid (`N = 256` per axis,
    /// `L = 80 * sqrt(2)`).
    pub fn two_d(q: f64, p: f64, v: [f64; 2]) -> Self {
        ModelParams { q, p, v: v.to_vec(), dim: 2, len: 80.0 * 2f64.sqrt(), n: 256 }
    }

    pub fn with_grid(mut self, n: usize, len: f64) -> Self {
        self.n = n;
        self.len = len;
        self
    }

    pub fn with_v(mut self, v: Vec<f64>) -> Self {
        self.v = v;
        self
    }

    pub fn speed(&self) -> f64 {
        self.v.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Upper end of the mass-subcritical window, `1 + 2/d`.
    pub fn critical_power(&self) -> f64 {
        1.0 + 2.0 / self.dim as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.dim != 1 && self.dim != 2 {
            return bad(format!("dimension must be 1 or 2, got {}", self.dim));
        }
        if !(self.q.is_finite() && self.p.is_finite()) {
            return bad("exponents must be finite".into());
        }
        if !(1.0 < self.q && self.q < self.p && self.p < self.critical_power()) {
            return bad(format!(
                "need 1 < q < p < 1 + 2/d = {}, got q = {}, p = {}",
                self.critical_power(),
                self.q,
                self.p
            ));
        }
        if self.v.len() != self.dim {
            return bad(format!("velocity has {} components, expected {}", self.v.len(), self.dim));
        }
        if !self.v.iter().all(|c| c.is_finite()) || self.speed() >= 1.0 {
            return bad(format!("need |v| < 1, got {:?}", self.v));
        }
        if !(self.len.is_finite() && self.len > 0.0) {
            return bad(format!("torus length must be positive, got {}", self.len));
        }
        if self.n < 4 || !self.n.is_power_of_two() {
            return bad(format!("points per axis must be a power of two >= 4, got {}", self.n));
        }
        Ok(())
    }
}
