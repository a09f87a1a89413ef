//! The invariant battery behind `hwlab check`.

use std::path::Path;

use halfwave::dynamics::{evolve, invariant_drift, random_smooth_data, EvolveConfig};
use halfwave::scan::{homogeneity_check, scan, subadditivity_check};
use halfwave::stability::Perturbation;
use halfwave::variational::{certify_report, energy_gradient, minimize, Initializer, Outcome, SolveConfig};
use halfwave::{rescale, Field, Model};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::Config;
use crate::manifest::Outputs;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

fn row(name: impl Into<String>, value: f64, threshold: f64) -> CheckRow {
    CheckRow { name: name.into(), value, threshold, passed: value <= threshold }
}

/// Band-limited random field with unit `H^{1/2}` norm.
pub fn smooth_field(model: &Model, seed: u64) -> Result<Field, CliError> {
    let probe = Field::gaussian(model.grid(), 1.0, 1.0)?;
    Ok(Perturbation::Noise { cutoff: 4.0, seed }.direction(&probe)?)
}

fn wavepacket(model: &Model) -> Result<Field, CliError> {
    Ok(Field::from_fn(model.grid(), |x| {
        Complex64::from_polar((-x[0] * x[0] / 8.0).exp(), 2.5 * x[0])
    })?)
}

fn scaling_rows(model: &Model) -> Result<Vec<CheckRow>, CliError> {
    let (q, p, d) = (model.params().q, model.params().p, model.params().dim as f64);
    let u = wavepacket(model)?;
    let (m0, t0) = (u.mass_sq(), model.kinetic(&u));
    let mut worst_mass: f64 = 0.0;
    let mut worst_kin: f64 = 0.0;
    for lambda in [0.5, 1.0, 2.0, 4.0] {
        for alpha in [1.0 / (q - 1.0), d / 2.0, 1.0 / (p - 1.0)] {
            let v = rescale(&u, lambda, alpha)?;
            let m_want = lambda.powf(2.0 * alpha - d) * m0;
            let t_want = lambda.powf(2.0 * alpha + 1.0 - d) * t0;
            worst_mass = worst_mass.max((v.mass_sq() - m_want).abs() / m_want);
            worst_kin = worst_kin.max((model.kinetic(&v) - t_want).abs() / t_want.abs());
        }
    }
    Ok(vec![row("scaling: mass law", worst_mass, 1e-6), row("scaling: kinetic law", worst_kin, 1e-6)])
}

fn gradient_row(model: &Model, seed: u64) -> Result<CheckRow, CliError> {
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let u = smooth_field(model, seed.wrapping_add(2 * k))?.scaled(Complex64::new(3.0, 0.0));
        let w = smooth_field(model, seed.wrapping_add(2 * k + 1))?;
        let plus = model.energy(&u.axpy(Complex64::new(eps, 0.0), &w)?);
        let minus = model.energy(&u.axpy(Complex64::new(-eps, 0.0), &w)?);
        let fd = (plus - minus) / (2.0 * eps);
        let exact = energy_gradient(model, &u)?.inner(&w).re;
        worst = worst.max((fd - exact).abs() / exact.abs().max(1e-300));
    }
    Ok(row("gradient: finite differences", worst, 1e-5))
}

fn certification_rows(config: &Config) -> Result<Vec<CheckRow>, CliError> {
    let c = &config.check;
    let mut params = config.model.params();
    params.n = c.certify_n;
    params.len = c.certify_len;
    let model = Model::new(params)?;
    let solver = SolveConfig { initializers: vec![Initializer::Gaussian { width: 0.5 }], ..config.solver.clone() };
    let mut rows = Vec::new();
    for &rho in &c.certify_rhos {
        let gs = minimize(&model, rho, &solver)?;
        let cert = certify_report(&gs.report, &model, &solver);
        let certified = gs.converged_to == Outcome::Minimizer;
        rows.push(CheckRow {
            name: format!("certificate rho={rho}: minimizer"),
            value: gs.report.pohozaev.abs() / gs.report.kinetic,
            threshold: solver.pohozaev_rel,
            passed: certified,
        });
        rows.push(row(format!("certificate rho={rho}: energy identity"), cert.energy_identity.relative, 1e-4));
        rows.push(CheckRow {
            name: format!("certificate rho={rho}: small-kinetic guard"),
            value: gs.report.kinetic,
            threshold: solver.delta_guard,
            passed: cert.small_kinetic_guard,
        });
    }
    Ok(rows)
}

fn conservation_rows(model: &Model, config: &Config) -> Result<Vec<CheckRow>, CliError> {
    let u = random_smooth_data(model.grid(), config.seed, config.check.smooth_amplitude)?;
    let ec = EvolveConfig { t_final: config.check.t_final, ..EvolveConfig::default() };
    let drift = invariant_drift(&evolve(&u, model, &ec)?)?;
    Ok(vec![
        row("conservation: mass", drift.mass, 1e-12),
        row("conservation: energy", drift.energy, 1e-6),
        row("conservation: E_v", drift.ev, 1e-6),
        row("conservation: momentum", drift.momentum, 1e-8),
    ])
}

fn homogeneity_row(config: &Config) -> Result<CheckRow, CliError> {
    let params = config.model.params();
    let rep = homogeneity_check(&params, &config.check.homogeneity_rhos, &config.solver)?;
    Ok(row(format!("homogeneity: slope {:.4} vs {}", rep.slope, rep.exponent), rep.relative_error, 0.05))
}

fn subadditivity_rows(model: &Model, config: &Config) -> Result<Vec<CheckRow>, CliError> {
    let records = scan(model, &config.check.scan_rhos, &config.solver, &config.scan.options)?;
    let rep = subadditivity_check(&records, model.params(), &config.scan.options);
    let sign = records.iter().map(|r| r.i_est).fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        row("curve: i_est <= 1e-4", sign, 1e-4),
        row("curve: subadditivity excess", rep.max_excess, config.scan.options.subadditivity_slack),
        row("curve: monotone increase", rep.max_increase, config.scan.options.monotone_slack),
    ])
}

pub fn run(config: &Config, dir: &Path) -> Result<(Vec<String>, bool), CliError> {
    let model = Model::new(config.model.params())?;
    let mut rows = scaling_rows(&model)?;
    rows.push(gradient_row(&model, config.seed)?);
    rows.extend(certification_rows(config)?);
    if model.params().dim == 1 {
        rows.extend(conservation_rows(&model, config)?);
    }
    rows.push(homogeneity_row(config)?);
    rows.extend(subadditivity_rows(&model, config)?);

    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &rows {
        println!(
            "{:<width$}  {:>12.4e}  <= {:<10.1e} {}",
            r.name,
            r.value,
            r.threshold,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    let all = rows.iter().all(|r| r.passed);
    let mut out = Outputs::create(dir.to_path_buf())?;
    out.json("check.json", &rows)?;
    Ok((out.finish("check", config)?, all))
}
