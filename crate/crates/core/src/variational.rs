//! Mass-constrained minimisation of `E_v` on `S_ρ = {‖u‖₂ = ρ}`.
//!
//! The descent is a preconditioned projected gradient flow: with
//! `r = ∇E(u) + ω u` the tangential residual, each step is
//! `u ← ρ (u - τ P r)/‖u - τ P r‖₂` with `P = (1 + m(ξ))^{-1}` and Armijo
//! backtracking on `τ`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::functionals::{rescale, EnergyParts, FunctionalReport, Model};

/// Starting point of one descent run. Every initializer is projected onto
/// `S_ρ` before the first step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Initializer {
    /// Radial Gaussian of the given width.
    Gaussian { width: f64 },
    /// `λ^{1/(q-1)} g(λx)` with `g` the unit-width Gaussian.
    Witness { lambda: f64 },
}

impl Initializer {
    pub fn label(&self) -> String {
        match self {
            Initializer::Gaussian { width } => format!("gaussian(w={width})"),
            Initializer::Witness { lambda } => format!("witness(lambda={lambda})"),
        }
    }

    pub fn build(&self, model: &Model, rho: f64) -> Result<Field> {
        let grid = model.grid();
        let raw = match *self {
            Initializer::Gaussian { width } => Field::gaussian(grid, width, 1.0)?,
            Initializer::Witness { lambda } => {
                let base = Field::gaussian(grid, 1.0, 1.0)?;
                rescale(&base, lambda, 1.0 / (model.params().q - 1.0))?
            }
        };
        project_mass(&raw, rho)
    }
}

/// Gaussians of widths {0.5, 1, 2, 4} plus the witness family at λ ∈ {1, 2, 4}.
pub fn default_initializers() -> Vec<Initializer> {
    let mut seeds: Vec<Initializer> =
        [0.5, 1.0, 2.0, 4.0].iter().map(|&width| Initializer::Gaussian { width }).collect();
    seeds.extend([1.0, 2.0, 4.0].iter().map(|&lambda| Initializer::Witness { lambda }));
    seeds
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Initial step `τ`.
    pub step: f64,
    /// Backtracking factor.
    pub backtrack: f64,
    /// Growth applied to `τ` after an accepted step.
    pub step_growth: f64,
    pub step_max: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub max_iters: usize,
    /// Euler–Lagrange residual in the `H^{-1/2}` dual norm.
    pub tol_residual: f64,
    /// Relative energy change treated as a stall.
    pub tol_energy: f64,
    /// Consecutive stalled iterations before a run stops.
    pub stall_window: usize,
    pub precondition: bool,
    pub initializers: Vec<Initializer>,
    /// A run is spreading while `T_v` stays below this value ...
    pub spreading_kinetic: f64,
    /// ... its energy stays above `-spreading_energy` ...
    pub spreading_energy: f64,
    /// ... for this many consecutive iterations.
    pub spreading_patience: usize,
    /// Pohozaev tolerance `|G| <= max(rel * T, abs)`.
    pub pohozaev_rel: f64,
    pub pohozaev_abs: f64,
    /// Energies with `|E| <= zero_energy` count as the zero branch.
    pub zero_energy: f64,
    /// Radius of the small-kinetic guard in the certificate.
    pub delta_guard: f64,
    /// Relative tolerance of the minimiser identities in the certificate.
    pub identity_rel: f64,
    /// Run multistarts on the rayon pool.
    pub parallel: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            step: 0.5,
            backtrack: 0.5,
            step_growth: 2.0,
            step_max: 16.0,
            armijo: 1e-4,
            max_iters: 200_000,
            tol_residual: 1e-10,
            tol_energy: 1e-15,
            stall_window: 200,
            precondition: true,
            initializers: default_initializers(),
            spreading_kinetic: 1e-3,
            spreading_energy: 1e-4,
            spreading_patience: 200,
            pohozaev_rel: 1e-6,
            pohozaev_abs: 1e-8,
            zero_energy: 1e-4,
            delta_guard: 1e-3,
            identity_rel: 1e-4,
            parallel: true,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("step", self.step),
            ("step_max", self.step_max),
            ("tol_residual", self.tol_residual),
            ("tol_energy", self.tol_energy),
            ("spreading_kinetic", self.spreading_kinetic),
            ("spreading_energy", self.spreading_energy),
            ("pohozaev_rel", self.pohozaev_rel),
            ("zero_energy", self.zero_energy),
            ("delta_guard", self.delta_guard),
            ("identity_rel", self.identity_rel),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidArgument("backtrack must lie in (0, 1)".into()));
        }
        if self.step_growth < 1.0 {
            return Err(Error::InvalidArgument("step_growth must be >= 1".into()));
        }
        if self.initializers.is_empty() {
            return Err(Error::InvalidArgument("at least one initializer is required".into()));
        }
        Ok(())
    }

    pub fn pohozaev_tolerance(&self, kinetic: f64) -> f64 {
        (self.pohozaev_rel * kinetic).max(self.pohozaev_abs)
    }
}

/// How the returned state was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Certified stationary point with non-positive energy.
    Minimizer,
    /// The flow flattened out: the vanishing (I = 0) regime.
    Spreading,
    /// Stationary to tolerance but failing the Pohozaev certificate; the
    /// profile is not resolved by the grid.
    Unresolved,
    IterationCap,
}

/// Termination status of a single descent run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Stationary,
    Spreading,
    Stalled,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub initializer: Initializer,
    pub status: RunStatus,
    pub energy: f64,
    pub kinetic: f64,
    pub pohozaev: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct GroundState {
    /// Target `ρ = ‖u‖₂`.
    pub rho: f64,
    pub field: Field,
    pub report: FunctionalReport,
    pub residual: f64,
    pub iterations: usize,
    pub converged_to: Outcome,
    /// Whole-space estimate of `I_{ρ²}`: the energy of the returned state
    /// for a minimiser, 0 for the vanishing branch (the dilation family
    /// `λ^{d/2} u(λx)` has energy tending to 0 as `λ → 0`).
    pub energy_estimate: f64,
    /// Accepted energies of the winning run, one per iteration.
    pub energy_trace: Vec<f64>,
    /// Largest `|‖u‖₂ - ρ|/ρ` over the accepted iterates of the winning run.
    pub max_constraint_error: f64,
    pub runs: Vec<RunSummary>,
}

/// `∇E(u) = (√(-Δ) + i v·∇) u + |u|^{q-1} u - |u|^{p-1} u`.
pub fn energy_gradient(model: &Model, u: &Field) -> Result<Field> {
    model.check(u)?;
    let au = model.apply_symbol(u)?;
    let (q, p) = (model.params().q, model.params().p);
    let defocusing = if model.has_defocusing() { 1.0 } else { 0.0 };
    let values = au
        .values()
        .iter()
        .zip(u.values())
        .map(|(a, z)| {
            let r = z.norm();
            if r == 0.0 {
                *a
            } else {
                a + z * (defocusing * r.powf(q - 1.0) - r.powf(p - 1.0))
            }
        })
        .collect();
    Field::new(model.grid(), values)
}

/// `(ρ/‖u‖₂) u`.
pub fn project_mass(u: &Field, rho: f64) -> Result<Field> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidArgument(format!("target mass must be positive, got {rho}")));
    }
    let norm = u.l2_norm();
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(u.scaled(Complex64::new(rho / norm, 0.0)))
}

/// `ω = -Re⟨∇E(u), u⟩ / ‖u‖₂²`.
pub fn lagrange_multiplier(model: &Model, u: &Field) -> Result<f64> {
    model.check(u)?;
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let g = energy_gradient(model, u)?;
    Ok(-g.inner(u).re / u.mass_sq())
}

/// `‖∇E(u) + ω u‖` in the `H^{-1/2}` dual norm.
pub fn euler_lagrange_residual(model: &Model, u: &Field) -> Result<f64> {
    let omega = lagrange_multiplier(model, u)?;
    let g = energy_gradient(model, u)?;
    let r = g.axpy(Complex64::new(omega, 0.0), u)?;
    Ok(dual_norm(model, &r))
}

fn dual_norm(model: &Model, r: &Field) -> f64 {
    let grid = model.grid();
    let w = grid.spectral_map(|k| (1.0 + k[0] * k[0] + k[1] * k[1]).sqrt().recip());
    grid.quadratic_form(&grid.forward(r.values()), &w).sqrt()
}

const ENERGY_NOISE: f64 = 1e-14;
const NOISE_MARGIN: f64 = 10.0;

fn energy_scale(model: &Model, parts: &EnergyParts) -> f64 {
    let (q, p) = (model.params().q, model.params().p);
    0.5 * parts.kinetic + parts.lq / (q + 1.0) + parts.lp / (p + 1.0)
}

struct Run {
    field: Field,
    parts: EnergyParts,
    summary: RunSummary,
    trace: Vec<f64>,
    max_constraint_error: f64,
}

/// Gradient, energy and multiplier evaluated together; the descent reuses
/// the spectra rather than going through the public helpers.
struct Workspace<'a> {
    model: &'a Model,
    precond: Vec<f64>,
    dual: Vec<f64>,
}

impl<'a> Workspace<'a> {
    fn new(model: &'a Model, precondition: bool) -> Self {
        let grid = model.grid();
        let precond = if precondition {
            model.symbol().iter().map(|m| 1.0 / (1.0 + m)).collect()
        } else {
            vec![1.0; grid.size()]
        };
        let dual = grid.spectral_map(|k| (1.0 + k[0] * k[0] + k[1] * k[1]).sqrt().recip());
        Workspace { model, precond, dual }
    }

    /// Returns (tangential residual r, preconditioned direction P r,
    /// dual residual norm, slope Re⟨r, P r⟩).
    fn direction(&self, u: &Field, rho: f64) -> (Vec<Complex64>, f64, f64) {
        let grid = self.model.grid();
        let g = energy_gradient(self.model, u).expect("finite iterate");
        let omega = -g.inner(u).re / (rho * rho);
        let r: Vec<Complex64> =
            g.values().iter().zip(u.values()).map(|(a, b)| a + b * omega).collect();
        let mut spec = grid.forward(&r);
        let residual = grid.quadratic_form(&spec, &self.dual).sqrt();
        let slope = grid.quadratic_form(&spec, &self.precond);
        spec.iter_mut().zip(&self.precond).for_each(|(z, w)| *z *= w);
        grid.inverse_in_place(&mut spec);
        (spec, residual, slope)
    }
}

fn descend(model: &Model, rho: f64, init: Initializer, config: &SolveConfig) -> Result<Run> {
    let grid = model.grid();
    let ws = Workspace::new(model, config.precondition);
    let mut u = init.build(model, rho)?;
    let mut parts = model.parts(&u);
    let mut energy = model.energy_of(&parts);
    let mut tau = config.step;
    let mut trace = vec![energy];
    let mut max_constraint_error = (u.l2_norm() - rho).abs() / rho;
    let mut spreading_count = 0usize;
    let mut stall_count = 0usize;
    let mut residual = f64::INFINITY;
    let mut status = RunStatus::IterationCap;
    let mut iterations = 0usize;

    let mut cached: Option<(Vec<Complex64>, f64, f64)> = None;
    let mut best_residual = f64::INFINITY;
    for it in 0..config.max_iters {
        iterations = it;
        let (dir, res, slope) = cached.take().unwrap_or_else(|| ws.direction(&u, rho));
        residual = res;
        if residual <= config.tol_residual {
            status = RunStatus::Stationary;
            break;
        }
        if parts.kinetic < config.spreading_kinetic && energy > -config.spreading_energy {
            spreading_count += 1;
            if spreading_count >= config.spreading_patience {
                status = RunStatus::Spreading;
                break;
            }
        } else {
            spreading_count = 0;
        }

        // Energies carry rounding error of a few ulps of the largest term.
        // Once the predicted decrease drops below that, the energy test is
        // meaningless and steps are judged by the residual instead.
        let noise = ENERGY_NOISE * energy_scale(model, &parts);
        let mut accepted = None;
        let mut t = tau;
        while t >= 1e-16 {
            let trial: Vec<Complex64> =
                u.values().iter().zip(&dir).map(|(a, b)| a - b * t).collect();
            let trial = Field::new(grid, trial).map_err(|_| {
                Error::Solver(format!("non-finite iterate at iteration {it} (tau = {t})"))
            })?;
            let trial = project_mass(&trial, rho)?;
            let tp = model.parts(&trial);
            let te = model.energy_of(&tp);
            if t * slope > NOISE_MARGIN * noise {
                if te <= energy - config.armijo * t * slope {
                    accepted = Some((trial, tp, te));
                    break;
                }
            } else if te <= energy + NOISE_MARGIN * noise {
                let next = ws.direction(&trial, rho);
                if next.1 < res {
                    cached = Some(next);
                    accepted = Some((trial, tp, te));
                    break;
                }
            }
            t *= config.backtrack;
        }
        let Some((next, next_parts, next_energy)) = accepted else {
            status = RunStatus::Stalled;
            break;
        };
        let change = (energy - next_energy).abs();
        u = next;
        parts = next_parts;
        energy = next_energy;
        trace.push(energy);
        max_constraint_error = max_constraint_error.max((parts.mass_sq.sqrt() - rho).abs() / rho);
        tau = (t * config.step_growth).min(config.step_max);
        // a stall is neither energy nor residual making progress
        let progress = change > config.tol_energy * energy.abs().max(1.0) || res < 0.5 * best_residual;
        best_residual = best_residual.min(res);
        if progress {
            stall_count = 0;
        } else {
            stall_count += 1;
            if stall_count >= config.stall_window {
                status = RunStatus::Stalled;
                break;
            }
        }
        iterations = it + 1;
    }
    if !energy.is_finite() {
        return Err(Error::Solver("energy diverged; the step size is too large".into()));
    }
    if status == RunStatus::Stationary && parts.kinetic < config.spreading_kinetic {
        // converged onto the flat state of the box
        status = RunStatus::Spreading;
    }
    let summary = RunSummary {
        initializer: init,
        status,
        energy,
        kinetic: parts.kinetic,
        pohozaev: model.pohozaev_of(&parts),
        residual,
        iterations,
    };
    Ok(Run { field: u, parts, summary, trace, max_constraint_error })
}

/// Approximates `I_{ρ²} = inf_{S_ρ} E_v` by multistart descent.
pub fn minimize(model: &Model, rho: f64, config: &SolveConfig) -> Result<GroundState> {
    config.validate()?;
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidArgument(format!("target mass must be positive, got {rho}")));
    }
    let runs: Vec<Result<Run>> = if config.parallel {
        config.initializers.par_iter().map(|&init| descend(model, rho, init, config)).collect()
    } else {
        config.initializers.iter().map(|&init| descend(model, rho, init, config)).collect()
    };
    let runs: Vec<Run> = runs.into_iter().collect::<Result<_>>()?;
    let summaries: Vec<RunSummary> = runs.iter().map(|r| r.summary.clone()).collect();

    let by_energy = |a: &&Run, b: &&Run| a.summary.energy.total_cmp(&b.summary.energy);
    let localized = runs.iter().filter(|r| r.summary.status != RunStatus::Spreading).min_by(by_energy);
    let spread = runs.iter().filter(|r| r.summary.status == RunStatus::Spreading).min_by(by_energy);

    let certified = |r: &Run| {
        r.summary.residual <= config.tol_residual
            && r.summary.pohozaev.abs() <= config.pohozaev_tolerance(r.parts.kinetic)
    };
    let (winner, outcome) = match localized {
        Some(best) if best.summary.energy <= config.zero_energy => {
            let outcome = if certified(best) {
                Outcome::Minimizer
            } else if best.summary.status == RunStatus::Stationary {
                Outcome::Unresolved
            } else {
                Outcome::IterationCap
            };
            (best, outcome)
        }
        // every localized candidate sits above the vanishing branch
        Some(best) => match spread {
            Some(s) => (s, Outcome::Spreading),
            None if best.summary.status == RunStatus::Stationary => (best, Outcome::Spreading),
            None => (best, Outcome::IterationCap),
        },
        None => (spread.expect("at least one run"), Outcome::Spreading),
    };

    let report = model.functionals(&winner.field)?;
    let energy_estimate = match outcome {
        Outcome::Spreading => 0.0,
        _ => report.energy.min(0.0),
    };
    Ok(GroundState {
        rho,
        field: winner.field.clone(),
        report,
        residual: winner.summary.residual,
        iterations: winner.summary.iterations,
        converged_to: outcome,
        energy_estimate,
        energy_trace: winner.trace.clone(),
        max_constraint_error: winner.max_constraint_error,
        runs: summaries,
    })
}

/// One identity check of the certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs|`.
    pub residual: f64,
    /// Residual over the natural scale of the terms involved.
    pub relative: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `G_v(u) = 0`.
    pub pohozaev: IdentityCheck,
    /// `E = (d(q-1)-2)/(2d(q-1)) T + (p-q)/((p+1)(q-1)) lp`.
    pub energy_identity: IdentityCheck,
    /// `T + lq - lp = (d(q-1)-q-1)/(d(q-1)) T + 2(p-q)/((p+1)(q-1)) lp`.
    pub virial_identity: IdentityCheck,
    /// `lq = (q+1)/(d(q-1)) (d(p-1)/(p+1) lp - T)`.
    pub lq_relation: IdentityCheck,
    /// Not simultaneously `E <= 0`, `|G| <= tol` and `T <= δ`.
    pub small_kinetic_guard: bool,
    pub passed: bool,
}

/// Checks the identities every constrained minimiser satisfies.
pub fn certify(gs: &GroundState, model: &Model, config: &SolveConfig) -> Result<CertificateReport> {
    if gs.converged_to != Outcome::Minimizer {
        return Err(Error::InvalidArgument(format!(
            "certificate requires a minimizer, got {:?}",
            gs.converged_to
        )));
    }
    Ok(certify_report(&gs.report, model, config))
}

/// Certificate of an arbitrary functional report (no outcome precondition).
pub fn certify_report(r: &FunctionalReport, model: &Model, config: &SolveConfig) -> CertificateReport {
    let (q, p, d) = (model.params().q, model.params().p, model.params().dim as f64);
    let (t, lq, lp) = (r.kinetic, r.lq, r.lp);
    let scale_e = 0.5 * t + lq / (q + 1.0) + lp / (p + 1.0);
    let check = |name: &str, lhs: f64, rhs: f64, scale: f64, tol: f64| {
        let residual = (lhs - rhs).abs();
        let relative = if scale > 0.0 { residual / scale } else { residual };
        IdentityCheck { name: name.into(), lhs, rhs, residual, relative, passed: relative <= tol }
    };

    let g_tol = config.pohozaev_tolerance(t);
    let pohozaev = IdentityCheck {
        name: "pohozaev".into(),
        lhs: r.pohozaev,
        rhs: 0.0,
        residual: r.pohozaev.abs(),
        relative: if t > 0.0 { r.pohozaev.abs() / t } else { r.pohozaev.abs() },
        passed: r.pohozaev.abs() <= g_tol,
    };
    let e_rhs = (d * (q - 1.0) - 2.0) / (2.0 * d * (q - 1.0)) * t + (p - q) / ((p + 1.0) * (q - 1.0)) * lp;
    let energy_identity = check("energy", r.energy, e_rhs, scale_e, config.identity_rel);
    let v_lhs = t + lq - lp;
    let v_rhs = (d * (q - 1.0) - q - 1.0) / (d * (q - 1.0)) * t + 2.0 * (p - q) / ((p + 1.0) * (q - 1.0)) * lp;
    let virial_identity = check("virial", v_lhs, v_rhs, t + lq + lp, config.identity_rel);
    let lq_rhs = (q + 1.0) / (d * (q - 1.0)) * (d * (p - 1.0) / (p + 1.0) * lp - t);
    let lq_scale = (q + 1.0) / (d * (q - 1.0)) * (d * (p - 1.0) / (p + 1.0) * lp + t);
    let lq_relation = check("lq", lq, lq_rhs, lq_scale, config.identity_rel);
    let small_kinetic_guard = !(r.energy <= 0.0 && r.pohozaev.abs() <= g_tol && t <= config.delta_guard);
    let passed = pohozaev.passed
        && energy_identity.passed
        && virial_identity.passed
        && lq_relation.passed
        && small_kinetic_guard;
    CertificateReport { pohozaev, energy_identity, virial_identity, lq_relation, small_kinetic_guard, passed }
}

/// The focusing norm a zero-energy solution of the stationary problem
/// would carry: `lp = (2 - d(q-1))(p+1) / (2d(p-q)) T`.
pub fn zero_energy_lp(model: &Model, kinetic: f64) -> f64 {
    let (q, p, d) = (model.params().q, model.params().p, model.params().dim as f64);
    (2.0 - d * (q - 1.0)) * (p + 1.0) / (2.0 * d * (p - q)) * kinetic
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;

    fn small_model(v: f64) -> Model {
        Model::new(ModelParams::one_d(1.5, 2.5, v).with_grid(256, 40.0)).unwrap()
    }

    #[test]
    fn gradient_of_zero_is_zero() {
        let m = small_model(0.2);
        let g = energy_gradient(&m, &Field::zeros(m.grid())).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn flat_state_gradient() {
        let m = small_model(0.3);
        let c: f64 = 0.7;
        let g = energy_gradient(&m, &Field::constant(m.grid(), Complex64::new(c, 0.0))).unwrap();
        let want = c.powf(1.5) - c.powf(2.5);
        for z in g.values() {
            assert!((z.re - want).abs() < 1e-14 && z.im.abs() < 1e-14);
        }
    }

    #[test]
    fn flat_state_multiplier() {
        let m = small_model(0.0);
        let c: f64 = 1.3;
        let u = Field::constant(m.grid(), Complex64::new(c, 0.0));
        let om = lagrange_multiplier(&m, &u).unwrap();
        assert!((om + (c.sqrt() - c.powf(1.5))).abs() < 1e-13);
    }

    #[test]
    fn projection() {
        let m = small_model(0.0);
        let u = Field::gaussian(m.grid(), 1.0, 3.0).unwrap();
        let a = project_mass(&u, 2.0).unwrap();
        assert!((a.l2_norm() - 2.0).abs() < 1e-14 * 2.0);
        let b = project_mass(&u.scaled(Complex64::new(2.0, 0.0)), 2.0).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-15);
        }
        let same = project_mass(&a, 2.0).unwrap();
        for (x, y) in a.values().iter().zip(same.values()) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!(matches!(project_mass(&Field::zeros(m.grid()), 1.0), Err(Error::ZeroField)));
        assert!(project_mass(&u, 0.0).is_err());
    }

    #[test]
    fn multiplier_rejects_zero() {
        let m = small_model(0.0);
        assert!(matches!(lagrange_multiplier(&m, &Field::zeros(m.grid())), Err(Error::ZeroField)));
    }

    #[test]
    fn certificate_rejects_violations() {
        let m = small_model(0.0);
        let cfg = SolveConfig::default();
        let u = Field::gaussian(m.grid(), 1.0, 1.0).unwrap();
        let cert = certify_report(&m.functionals(&u).unwrap(), &m, &cfg);
        assert!(!cert.pohozaev.passed);
        assert!(!cert.energy_identity.passed);
        assert!(!cert.lq_relation.passed);
        assert!(!cert.passed);
    }
}
