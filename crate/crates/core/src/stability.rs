//! Distance to the ground-state orbit and perturbation experiments.
//!
//! The orbit of `u` is `{e^{iγ} u(· + y)}`. With the `H^{1/2}` product
//! `⟨a, b⟩ = L^{-d} Σ (1+|ξ|²)^{1/2} â conj(b̂)` (linear in the first slot),
//!
//! ```text
//! ‖ψ - e^{iγ} u(·+y)‖² = ‖ψ‖² + ‖u‖² - 2 Re(e^{-iγ} ⟨ψ, u(·+y)⟩),
//! ```
//!
//! so for each shift the best phase is `γ = arg⟨ψ, u(·+y)⟩`, and the products
//! for all grid shifts form one inverse transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, EvolveConfig};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::functionals::{hhalf_norm_sq, rescale, Model};
use crate::grid::wavenumber;
use crate::variational::project_mass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitDistanceResult {
    pub distance: f64,
    pub gamma_opt: f64,
    /// Translation `y` (one entry per axis) with `ψ ≈ e^{iγ} u(· + y)`,
    /// in `[-L/2, L/2)`.
    pub y_opt: Vec<f64>,
}

/// `inf_{γ, y on the grid} ‖ψ - e^{iγ} u(· + y)‖_{H^{1/2}}`.
pub fn orbit_distance(psi: &Field, u: &Field) -> Result<OrbitDistanceResult> {
    psi.ensure_same_grid(u)?;
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let grid = psi.grid();
    let w = grid.spectral_map(|k| (1.0 + k[0] * k[0] + k[1] * k[1]).sqrt());
    let a = grid.forward(psi.values());
    let b = grid.forward(u.values());
    // u(·+sh) has spectrum e^{iξ·sh} b̂, so the products over all shifts s are
    // L^{-d} Σ_k w ψ̂ conj(b̂) e^{-2πi k·s/N}: a forward transform without the
    // cell weight.
    let prod: Vec<Complex64> = a.iter().zip(&b).zip(&w).map(|((x, y), s)| x * y.conj() * s).collect();
    let scale = 1.0 / (grid.cell_volume() * grid.len().powi(grid.dim() as i32));
    let corr: Vec<Complex64> = grid.forward(&prod).into_iter().map(|z| z * scale).collect();
    let best = (0..corr.len()).max_by(|&i, &j| corr[i].norm().total_cmp(&corr[j].norm())).unwrap();
    let gamma = corr[best].arg();
    let n = grid.n();
    let shift: Vec<i64> = match grid.dim() {
        1 => vec![wavenumber(best, n)],
        _ => vec![wavenumber(best / n, n), wavenumber(best % n, n)],
    };
    // evaluate the winner directly; the expanded form loses digits near 0
    let moved = u.shifted(&shift).scaled(Complex64::from_polar(1.0, gamma));
    let distance = hhalf_norm_sq(&psi.sub(&moved)?).max(0.0).sqrt();
    let h = grid.spacing();
    Ok(OrbitDistanceResult { distance, gamma_opt: gamma, y_opt: shift.iter().map(|&s| s as f64 * h).collect() })
}

/// Direction `w` of the initial perturbation; every shape is normalised to
/// `‖w‖_{H^{1/2}} = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// `u_λ - u` with the mass-preserving dilation `λ^{d/2} u(λx)`.
    Dilation { lambda: f64 },
    /// Seeded noise with random Fourier coefficients on `|ξ| ≤ cutoff`.
    Noise { cutoff: f64, seed: u64 },
    /// `e^{iκ·x} u - u`, with `κ` snapped to the nearest box frequency.
    Kick { kappa: f64 },
}

impl Perturbation {
    pub fn label(&self) -> String {
        match self {
            Perturbation::Dilation { lambda } => format!("dilation(lambda={lambda})"),
            Perturbation::Noise { cutoff, seed } => format!("noise(cutoff={cutoff},seed={seed})"),
            Perturbation::Kick { kappa } => format!("kick(kappa={kappa})"),
        }
    }

    pub fn direction(&self, u: &Field) -> Result<Field> {
        let grid = u.grid();
        let raw = match *self {
            Perturbation::Dilation { lambda } => rescale(u, lambda, 0.5 * grid.dim() as f64)?.sub(u)?,
            Perturbation::Noise { cutoff, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let spec: Vec<Complex64> = (0..grid.size())
                    .map(|i| {
                        let k = grid.wavevector(i);
                        let (re, im): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        if (k[0] * k[0] + k[1] * k[1]).sqrt() <= cutoff {
                            Complex64::new(re, im)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .collect();
                Field::new(grid, grid.inverse(&spec))?
            }
            Perturbation::Kick { kappa } => {
                let dk = 2.0 * PI / grid.len();
                let k = (kappa / dk).round() * dk;
                let kicked = Field::from_fn(grid, |x| Complex64::from_polar(1.0, k * x[0]))?;
                let values = kicked.values().iter().zip(u.values()).map(|(a, b)| a * b - b).collect();
                Field::new(grid, values)?
            }
        };
        let norm = hhalf_norm_sq(&raw).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument(format!("perturbation {} vanishes", self.label())));
        }
        Ok(raw.scaled(Complex64::new(1.0 / norm, 0.0)))
    }
}

/// Dilation by 1.1, noise on `|ξ| ≤ 4` and a kick of about 0.5.
pub fn default_perturbations(seed: u64) -> Vec<Perturbation> {
    vec![
        Perturbation::Dilation { lambda: 1.1 },
        Perturbation::Noise { cutoff: 4.0, seed },
        Perturbation::Kick { kappa: 0.5 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSample {
    pub t: f64,
    pub distance: f64,
    pub gamma_opt: f64,
    pub y_opt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub shape: Option<Perturbation>,
    pub delta: f64,
    pub horizon: f64,
    pub dt: f64,
    pub initial_distance: f64,
    pub sup_distance: f64,
    pub series: Vec<DistanceSample>,
}

/// Evolves `project_mass(u + δ w, ρ)` and tracks the distance to the orbit
/// of `u` at every saved time. `shape = None` runs the unperturbed state.
pub fn perturbed_run(
    model: &Model,
    u: &Field,
    delta: f64,
    shape: Option<Perturbation>,
    config: &EvolveConfig,
) -> Result<StabilityReport> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be >= 0, got {delta}")));
    }
    let rho = u.l2_norm();
    let psi0 = match shape {
        Some(s) if delta > 0.0 => project_mass(&u.axpy(Complex64::new(delta, 0.0), &s.direction(u)?)?, rho)?,
        _ => u.clone(),
    };
    let traj = evolve(&psi0, model, config)?;
    let series = traj
        .times
        .iter()
        .zip(&traj.snapshots)
        .map(|(&t, psi)| {
            orbit_distance(psi, u).map(|d| DistanceSample {
                t,
                distance: d.distance,
                gamma_opt: d.gamma_opt,
                y_opt: d.y_opt[0],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sup_distance = series.iter().map(|s| s.distance).fold(0.0, f64::max);
    Ok(StabilityReport {
        shape,
        delta,
        horizon: config.t_final,
        dt: config.dt,
        initial_distance: series[0].distance,
        sup_distance,
        series,
    })
}

/// Every `(δ, shape)` combination plus the `δ = 0` baseline (first),
/// in input order.
pub fn stability_experiment(
    model: &Model,
    u: &Field,
    deltas: &[f64],
    shapes: &[Perturbation],
    config: &EvolveConfig,
) -> Result<Vec<StabilityReport>> {
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidArgument("perturbation sizes must be positive".into()));
    }
    let mut jobs: Vec<(f64, Option<Perturbation>)> = vec![(0.0, None)];
    for &d in deltas {
        jobs.extend(shapes.iter().map(|&s| (d, Some(s))));
    }
    jobs.par_iter().map(|&(d, s)| perturbed_run(model, u, d, s, config)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;

    fn bump(model: &Model) -> Field {
        Field::from_fn(model.grid(), |x| Complex64::new((-(x[0] - 0.3).powi(2)).exp(), 0.2 * x[0] * (-x[0] * x[0]).exp()))
            .unwrap()
    }

    #[test]
    fn self_distance_is_zero() {
        let m = Model::new(ModelParams::one_d(1.5, 2.5, 0.0).with_grid(256, 20.0)).unwrap();
        let u = bump(&m);
        let d = orbit_distance(&u, &u).unwrap();
        assert!(d.distance < 1e-12);
        assert_eq!(d.y_opt, vec![0.0]);
        assert!(d.gamma_opt.abs() < 1e-12);
    }

    #[test]
    fn recovers_gauge() {
        let m = Model::new(ModelParams::one_d(1.5, 2.5, 0.0).with_grid(256, 20.0)).unwrap();
        let u = bump(&m);
        // 2.5 = 32 h
        let psi = u.shifted(&[32]).scaled(Complex64::from_polar(1.0, 0.7));
        let d = orbit_distance(&psi, &u).unwrap();
        assert!(d.distance < 1e-10);
        assert!((d.gamma_opt - 0.7).abs() < 1e-12);
        assert!((d.y_opt[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn directions_are_normalised() {
        let m = Model::new(ModelParams::one_d(1.5, 2.5, 0.0).with_grid(256, 20.0)).unwrap();
        let u = bump(&m);
        for s in default_perturbations(7) {
            let w = s.direction(&u).unwrap();
            assert!((hhalf_norm_sq(&w) - 1.0).abs() < 1e-12, "{}", s.label());
        }
        let a = Perturbation::Noise { cutoff: 4.0, seed: 3 }.direction(&u).unwrap();
        let b = Perturbation::Noise { cutoff: 4.0, seed: 3 }.direction(&u).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_reference_rejected() {
        let m = Model::new(ModelParams::one_d(1.5, 2.5, 0.0).with_grid(16, 2.0)).unwrap();
        let u = Field::zeros(m.grid());
        assert!(matches!(orbit_distance(&u, &u), Err(Error::ZeroField)));
    }
}
