//! The ground-state energy curve `ρ ↦ I_{ρ²}`, the critical mass bracket and
//! structural checks on the curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::functionals::{rescale, Model};
use crate::params::ModelParams;
use crate::variational::{minimize, project_mass, GroundState, Outcome, SolveConfig};

/// Sign class of a point on the energy curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attained {
    NegativeMinimizer,
    ZeroSpreading,
    Undecided,
}

impl Attained {
    pub fn as_str(&self) -> &'static str {
        match self {
            Attained::NegativeMinimizer => "negative-minimizer",
            Attained::ZeroSpreading => "zero-spreading",
            Attained::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// `|i_est|` below this counts as the zero branch.
    pub zero_tol: f64,
    /// Dilation factors `2^k` tried by the witness search.
    pub witness_k_min: i32,
    pub witness_k_max: i32,
    /// Width of the Gaussian the witness family is built on.
    pub witness_width: f64,
    /// Relative tolerance of the witness mass law.
    pub witness_mass_tol: f64,
    pub subadditivity_slack: f64,
    pub monotone_slack: f64,
    /// Search for a witness at every negative point.
    pub witnesses: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            zero_tol: 1e-4,
            witness_k_min: 0,
            witness_k_max: 8,
            witness_width: 1.0,
            witness_mass_tol: 1e-6,
            subadditivity_slack: 1e-4,
            monotone_slack: 1e-6,
            witnesses: true,
        }
    }
}

/// Solver-independent certificate that `I_{ρ²} < 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub lambda: f64,
    pub energy: f64,
    #[serde(skip)]
    pub field: Option<Field>,
}

/// One trial of the witness search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessTrial {
    pub lambda: f64,
    /// `‖u_λ‖₂ / (λ^β ‖u‖₂) - 1` before the final projection.
    pub mass_law_error: f64,
    pub energy: f64,
    /// The dilated profile is resolved and obeys the mass law.
    pub admissible: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRecord {
    pub rho: f64,
    /// Estimate of `I_{ρ²}`.
    pub i_est: f64,
    /// Energy of the state the solver returned on the box.
    pub box_energy: f64,
    pub attained: Attained,
    pub outcome: Outcome,
    pub residual: f64,
    pub iterations: usize,
    pub kinetic: f64,
    pub pohozaev: f64,
    pub witness: Option<Witness>,
}

impl ScanRecord {
    pub fn from_ground_state(gs: &GroundState, config: &ScanConfig) -> Self {
        let attained = match gs.converged_to {
            Outcome::Spreading => Attained::ZeroSpreading,
            Outcome::Minimizer | Outcome::Unresolved if gs.energy_estimate < -config.zero_tol => {
                Attained::NegativeMinimizer
            }
            _ => Attained::Undecided,
        };
        ScanRecord {
            rho: gs.rho,
            i_est: gs.energy_estimate,
            box_energy: gs.report.energy,
            attained,
            outcome: gs.converged_to,
            residual: gs.residual,
            iterations: gs.iterations,
            kinetic: gs.report.kinetic,
            pohozaev: gs.report.pohozaev,
            witness: None,
        }
    }
}

/// Minimises on `S_ρ` and classifies the result. Negative points also get
/// a witness search when enabled.
pub fn ground_energy(model: &Model, rho: f64, solve: &SolveConfig, config: &ScanConfig) -> Result<ScanRecord> {
    let gs = minimize(model, rho, solve)?;
    let mut record = ScanRecord::from_ground_state(&gs, config);
    if config.witnesses && record.attained == Attained::NegativeMinimizer {
        record.witness = negativity_witness(model, rho, config).ok();
    }
    Ok(record)
}

/// Evaluates `ground_energy` on every mass; results are ordered as `rhos`.
pub fn scan(model: &Model, rhos: &[f64], solve: &SolveConfig, config: &ScanConfig) -> Result<Vec<ScanRecord>> {
    rhos.par_iter().map(|&rho| ground_energy(model, rho, solve, config)).collect()
}

/// `(2 - d(q-1)) / (2(q-1))`, the mass exponent of `λ^{1/(q-1)} u(λx)`.
pub fn witness_mass_exponent(params: &ModelParams) -> f64 {
    let (q, d) = (params.q, params.dim as f64);
    (2.0 - d * (q - 1.0)) / (2.0 * (q - 1.0))
}

/// Every trial of the dilation family `u_λ = λ^{1/(q-1)} g(λx)`, `λ = 2^k`,
/// with the Gaussian `g` scaled so that `u_λ` lands on `S_ρ`.
pub fn witness_trials(model: &Model, rho: f64, config: &ScanConfig) -> Result<Vec<(WitnessTrial, Field)>> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidArgument(format!("target mass must be positive, got {rho}")));
    }
    let params = model.params();
    let alpha = 1.0 / (params.q - 1.0);
    let beta = witness_mass_exponent(params);
    let base = Field::gaussian(model.grid(), config.witness_width, 1.0)?;
    let mut out = Vec::new();
    for k in config.witness_k_min..=config.witness_k_max {
        let lambda = 2f64.powi(k);
        let g = project_mass(&base, rho * lambda.powf(-beta))?;
        let dilated = rescale(&g, lambda, alpha)?;
        let mass_law_error = dilated.l2_norm() / (lambda.powf(beta) * g.l2_norm()) - 1.0;
        let admissible = mass_law_error.abs() <= config.witness_mass_tol;
        let field = project_mass(&dilated, rho)?;
        let energy = model.energy(&field);
        out.push((WitnessTrial { lambda, mass_law_error, energy, admissible }, field));
    }
    Ok(out)
}

/// The lowest-energy admissible member of the witness family, if it is
/// negative.
pub fn negativity_witness(model: &Model, rho: f64, config: &ScanConfig) -> Result<Witness> {
    let trials = witness_trials(model, rho, config)?;
    trials
        .into_iter()
        .filter(|(t, _)| t.admissible && t.energy < 0.0)
        .min_by(|a, b| a.0.energy.total_cmp(&b.0.energy))
        .map(|(t, f)| Witness { lambda: t.lambda, energy: t.energy, field: Some(f) })
        .ok_or_else(|| {
            Error::NoWitness(format!(
                "no admissible lambda in 2^{}..2^{} gives E < 0 at rho = {rho}",
                config.witness_k_min, config.witness_k_max
            ))
        })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BisectionStep {
    pub iteration: usize,
    pub lo: f64,
    pub hi: f64,
    pub rho: f64,
    pub attained: Attained,
    pub i_est: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalMassResult {
    pub rho0_lo: f64,
    pub rho0_hi: f64,
    pub iterations: usize,
    pub lo_record: ScanRecord,
    pub hi_record: ScanRecord,
    pub trace: Vec<BisectionStep>,
}

/// Bisection on the sign class. The bracket must start as
/// (zero-spreading, negative-minimizer).
pub fn find_critical_mass(
    model: &Model,
    bracket: (f64, f64),
    tol_rho: f64,
    solve: &SolveConfig,
    config: &ScanConfig,
) -> Result<CriticalMassResult> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
        return Err(Error::Bracket(format!("need 0 < lo < hi, got ({lo}, {hi})")));
    }
    if !(tol_rho > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol_rho}")));
    }
    let quiet = ScanConfig { witnesses: false, ..config.clone() };
    let endpoints = scan(model, &[lo, hi], solve, &quiet)?;
    let (mut lo_rec, mut hi_rec) = (endpoints[0].clone(), endpoints[1].clone());
    if lo_rec.attained == hi_rec.attained {
        return Err(Error::Bracket(format!(
            "both endpoints classify as {}",
            lo_rec.attained.as_str()
        )));
    }
    if lo_rec.attained != Attained::ZeroSpreading || hi_rec.attained != Attained::NegativeMinimizer {
        return Err(Error::Bracket(format!(
            "expected (zero-spreading, negative-minimizer), got ({}, {})",
            lo_rec.attained.as_str(),
            hi_rec.attained.as_str()
        )));
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    while hi_rec.rho - lo_rec.rho > tol_rho {
        let mid = 0.5 * (lo_rec.rho + hi_rec.rho);
        let rec = ground_energy(model, mid, solve, &quiet)?;
        trace.push(BisectionStep {
            iteration: iterations,
            lo: lo_rec.rho,
            hi: hi_rec.rho,
            rho: mid,
            attained: rec.attained,
            i_est: rec.i_est,
        });
        iterations += 1;
        match rec.attained {
            Attained::ZeroSpreading => lo_rec = rec,
            Attained::NegativeMinimizer => {
                // I is nonincreasing in ρ: a smaller mass cannot sit lower
                if rec.i_est < hi_rec.i_est - config.monotone_slack {
                    return Err(Error::Inversion {
                        rho: mid,
                        detail: format!(
                            "i_est = {} lies below i_est = {} at the larger mass {}",
                            rec.i_est, hi_rec.i_est, hi_rec.rho
                        ),
                    });
                }
                hi_rec = rec;
            }
            Attained::Undecided => {
                return Err(Error::Inversion {
                    rho: mid,
                    detail: format!("solver outcome {:?} does not classify", rec.outcome),
                });
            }
        }
    }
    if config.witnesses {
        hi_rec.witness = negativity_witness(model, hi_rec.rho, config).ok();
    }
    Ok(CriticalMassResult {
        rho0_lo: lo_rec.rho,
        rho0_hi: hi_rec.rho,
        iterations,
        lo_record: lo_rec,
        hi_record: hi_rec,
        trace,
    })
}

/// `(4 - 2(d-1)(r-1)) / (2 - d(r-1))`.
pub fn homogeneity_exponent(dim: usize, r: f64) -> f64 {
    let d = dim as f64;
    (4.0 - 2.0 * (d - 1.0) * (r - 1.0)) / (2.0 - d * (r - 1.0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogeneityPoint {
    pub rho: f64,
    pub j_est: f64,
    pub outcome: Outcome,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub p: f64,
    pub exponent: f64,
    pub slope: f64,
    pub relative_error: f64,
    pub points: Vec<HomogeneityPoint>,
}

/// Minimises the single-power energy on each `S_ρ` and fits
/// `log|J|` against `log ρ`.
pub fn homogeneity_check(params: &ModelParams, rhos: &[f64], solve: &SolveConfig) -> Result<HomogeneityReport> {
    if rhos.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 masses, got {}", rhos.len())));
    }
    let model = Model::focusing_only(params.clone())?;
    let states: Vec<GroundState> =
        rhos.par_iter().map(|&rho| minimize(&model, rho, solve)).collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(states.len());
    for gs in &states {
        // the flat state of the box is not a candidate for J
        if gs.converged_to == Outcome::Spreading || gs.report.kinetic < solve.spreading_kinetic {
            return Err(Error::Solver(format!("no localised state at rho = {}", gs.rho)));
        }
        if !(gs.report.energy < 0.0) {
            return Err(Error::Solver(format!(
                "nonnegative J estimate {} at rho = {}",
                gs.report.energy, gs.rho
            )));
        }
        points.push(HomogeneityPoint {
            rho: gs.rho,
            j_est: gs.report.energy,
            outcome: gs.converged_to,
            residual: gs.residual,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.rho.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (-p.j_est).ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    let exponent = homogeneity_exponent(params.dim, params.p);
    Ok(HomogeneityReport {
        p: params.p,
        exponent,
        slope,
        relative_error: (slope - exponent).abs() / exponent,
        points,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// One `I(ρ) ≤ I(μ) + I(√(ρ²-μ²))` test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCheck {
    pub rho: f64,
    pub mu: f64,
    pub rest: f64,
    /// `I(ρ) - I(μ) - I(rest)`; positive values violate subadditivity.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingWindowCheck {
    /// Which exponent bounds the window: "q" or "p".
    pub window: String,
    pub alpha: f64,
    /// Largest increase of `i_est/ρ^α` between consecutive negative points.
    pub max_increase: f64,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityReport {
    pub splits: Vec<SplitCheck>,
    pub max_excess: f64,
    pub subadditive: bool,
    /// Largest `i_est(ρ_{k+1}) - i_est(ρ_k)` along the sorted scan.
    pub max_increase: f64,
    pub nonincreasing: bool,
    pub scaling: Vec<ScalingWindowCheck>,
    /// `|i_est|/ρ²` on the three smallest masses, in increasing `ρ`.
    pub small_mass_ratios: Vec<f64>,
    pub small_mass_decay: bool,
}

/// `i_est` at an arbitrary mass by linear interpolation of the scan, with
/// `I(0) = 0`; masses beyond the scan are clamped to the last value, which
/// can only overestimate `I` since the curve is nonincreasing.
fn interpolate(curve: &[(f64, f64)], rho: f64) -> f64 {
    let mut prev = (0.0, 0.0);
    for &(r, i) in curve {
        if rho <= r {
            let s = if r > prev.0 { (rho - prev.0) / (r - prev.0) } else { 1.0 };
            return prev.1 + s * (i - prev.1);
        }
        prev = (r, i);
    }
    prev.1
}

/// Structural checks of a completed scan. Violations are reported, never
/// raised.
pub fn subadditivity_check(records: &[ScanRecord], params: &ModelParams, config: &ScanConfig) -> SubadditivityReport {
    let mut curve: Vec<(f64, f64)> = records.iter().map(|r| (r.rho, r.i_est)).collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut splits = Vec::new();
    for (i, &(rho, i_rho)) in curve.iter().enumerate() {
        for &(mu, i_mu) in &curve[..i] {
            if mu >= rho {
                continue;
            }
            let rest = (rho * rho - mu * mu).sqrt();
            let excess = i_rho - i_mu - interpolate(&curve, rest);
            splits.push(SplitCheck { rho, mu, rest, excess });
        }
    }
    let max_excess = splits.iter().map(|s| s.excess).fold(f64::NEG_INFINITY, f64::max);
    let max_increase = curve.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::NEG_INFINITY, f64::max);

    let negative: Vec<(f64, f64)> = curve.iter().copied().filter(|&(_, i)| i < -config.zero_tol).collect();
    let mut scaling = Vec::new();
    for (label, r) in [("q", params.q), ("p", params.p)] {
        let top = homogeneity_exponent(params.dim, r);
        for frac in [0.0, 0.5, 0.9] {
            let alpha = 2.0 + frac * (top - 2.0);
            let inc = negative
                .windows(2)
                .map(|w| w[1].1 / w[1].0.powf(alpha) - w[0].1 / w[0].0.powf(alpha))
                .fold(f64::NEG_INFINITY, f64::max);
            scaling.push(ScalingWindowCheck {
                window: label.into(),
                alpha,
                max_increase: inc,
                monotone: !(inc > 0.0),
            });
        }
    }

    let small_mass_ratios: Vec<f64> = curve.iter().take(3).map(|&(r, i)| i.abs() / (r * r)).collect();
    let small_mass_decay = small_mass_ratios.windows(2).all(|w| w[0] <= w[1] + config.monotone_slack);

    SubadditivityReport {
        max_excess: if splits.is_empty() { 0.0 } else { max_excess },
        subadditive: splits.iter().all(|s| s.excess <= config.subadditivity_slack),
        splits,
        max_increase: if curve.len() < 2 { 0.0 } else { max_increase },
        nonincreasing: curve.windows(2).all(|w| w[1].1 <= w[0].1 + config.monotone_slack),
        scaling,
        small_mass_ratios,
        small_mass_decay,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rho: f64, i_est: f64) -> ScanRecord {
        ScanRecord {
            rho,
            i_est,
            box_energy: i_est,
            attained: if i_est < 0.0 { Attained::NegativeMinimizer } else { Attained::ZeroSpreading },
            outcome: if i_est < 0.0 { Outcome::Minimizer } else { Outcome::Spreading },
            residual: 0.0,
            iterations: 0,
            kinetic: 0.0,
            pohozaev: 0.0,
            witness: None,
        }
    }

    #[test]
    fn exponents() {
        assert_eq!(homogeneity_exponent(1, 2.0), 4.0);
        assert_eq!(homogeneity_exponent(1, 2.5), 8.0);
        let p = ModelParams::one_d(1.5, 2.5, 0.0);
        assert_eq!(witness_mass_exponent(&p), 1.5);
    }

    #[test]
    fn slope_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((least_squares_slope(&xs, &ys) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_branch_is_additive() {
        let recs: Vec<ScanRecord> = [0.1, 0.2, 0.4, 0.8].iter().map(|&r| record(r, 0.0)).collect();
        let p = ModelParams::one_d(1.5, 2.5, 0.0);
        let rep = subadditivity_check(&recs, &p, &ScanConfig::default());
        assert!(rep.subadditive && rep.nonincreasing && rep.small_mass_decay);
        assert_eq!(rep.max_excess, 0.0);
        assert!(rep.splits.iter().all(|s| s.excess == 0.0));
    }

    #[test]
    fn detects_violations() {
        // a bump breaks monotonicity, a too-negative point breaks subadditivity
        let recs = vec![record(1.0, -1.0), record(2.0, -0.5), record(3.0, -20.0)];
        let p = ModelParams::one_d(1.5, 2.5, 0.0);
        let rep = subadditivity_check(&recs, &p, &ScanConfig::default());
        assert!(!rep.nonincreasing);
        assert!((rep.max_increase - 0.5).abs() < 1e-15);
        let recs = vec![record(1.0, -1.0), record(1.2, -1.1), record(2.0, -1.5)];
        let rep = subadditivity_check(&recs, &p, &ScanConfig::default());
        assert!(!rep.subadditive);
    }

    #[test]
    fn interpolation_anchors_at_origin() {
        let curve = [(1.0, -2.0), (2.0, -4.0)];
        assert_eq!(interpolate(&curve, 0.5), -1.0);
        assert_eq!(interpolate(&curve, 1.5), -3.0);
        assert_eq!(interpolate(&curve, 5.0), -4.0);
    }

    #[test]
    fn degenerate_bracket() {
        let m = Model::new(ModelParams::one_d(1.5, 2.5, 0.0).with_grid(64, 20.0)).unwrap();
        let cfg = SolveConfig::default();
        let err = find_critical_mass(&m, (5.0, 5.0), 1e-2, &cfg, &ScanConfig::default());
        assert!(matches!(err, Err(Error::Bracket(_))));
    }
}
