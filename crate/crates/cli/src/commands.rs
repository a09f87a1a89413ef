use std::fmt::Write as _;
use std::path::Path;

use halfwave::dynamics::{evolve, invariant_drift, Invariants};
use halfwave::io::{encode_field, write_field_csv};
use halfwave::scan::{find_critical_mass, scan, subadditivity_check, CriticalMassResult, ScanRecord};
use halfwave::stability::{stability_experiment, StabilityReport};
use halfwave::variational::{certify_report, minimize, project_mass, CertificateReport, GroundState, Outcome, RunSummary};
use halfwave::{Field, FunctionalReport, Model, ModelParams};
use serde::Serialize;

use crate::config::{Config, InitialState};
use crate::manifest::Outputs;
use crate::CliError;

#[derive(Serialize)]
struct GroundStateSummary<'a> {
    params: &'a ModelParams,
    rho: f64,
    outcome: Outcome,
    energy_estimate: f64,
    residual: f64,
    iterations: usize,
    max_constraint_error: f64,
    report: &'a FunctionalReport,
    runs: &'a [RunSummary],
}

#[derive(Serialize)]
struct CertificateFile<'a> {
    outcome: Outcome,
    /// The identities are evaluated for every outcome; only a minimiser is
    /// expected to pass.
    certificate: &'a CertificateReport,
}

fn model_of(config: &Config) -> Result<Model, CliError> {
    Model::new(config.model.params()).map_err(CliError::from)
}

fn field_csv(u: &Field) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    write_field_csv(&mut out, u)?;
    Ok(out)
}

fn write_ground_state(out: &mut Outputs, model: &Model, gs: &GroundState, config: &Config) -> Result<(), CliError> {
    out.bytes("groundstate.hwf", &encode_field(&gs.field))?;
    out.json(
        "groundstate.json",
        &GroundStateSummary {
            params: model.params(),
            rho: gs.rho,
            outcome: gs.converged_to,
            energy_estimate: gs.energy_estimate,
            residual: gs.residual,
            iterations: gs.iterations,
            max_constraint_error: gs.max_constraint_error,
            report: &gs.report,
            runs: &gs.runs,
        },
    )?;
    let cert = certify_report(&gs.report, model, &config.solver);
    out.json("certificate.json", &CertificateFile { outcome: gs.converged_to, certificate: &cert })?;
    out.bytes("groundstate.csv", &field_csv(&gs.field)?)
}

pub fn groundstate(config: &Config, dir: &Path) -> Result<Vec<String>, CliError> {
    let model = model_of(config)?;
    let mut out = Outputs::create(dir.to_path_buf())?;
    let gs = minimize(&model, config.groundstate.rho, &config.solver)?;
    write_ground_state(&mut out, &model, &gs, config)?;
    eprintln!(
        "rho = {}: {:?}, E = {:.10e}, residual = {:.3e}",
        gs.rho, gs.converged_to, gs.report.energy, gs.residual
    );
    out.finish("groundstate", config)
}

fn scan_csv(records: &[ScanRecord]) -> String {
    let mut s = String::from("rho,i_est,attained,residual,iterations,box_energy,outcome,witness_lambda,witness_energy\n");
    for r in records {
        let (wl, we) = match &r.witness {
            Some(w) => (w.lambda.to_string(), w.energy.to_string()),
            None => (String::new(), String::new()),
        };
        let outcome = serde_json::to_value(r.outcome).unwrap();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.rho,
            r.i_est,
            r.attained.as_str(),
            r.residual,
            r.iterations,
            r.box_energy,
            outcome.as_str().unwrap_or(""),
            wl,
            we
        );
    }
    s
}

fn bisection_csv(result: &CriticalMassResult) -> String {
    let mut s = String::from("iteration,lo,hi,rho,attained,i_est\n");
    for step in &result.trace {
        let _ =
            writeln!(s, "{},{},{},{},{},{}", step.iteration, step.lo, step.hi, step.rho, step.attained.as_str(), step.i_est);
    }
    s
}

pub fn scan_cmd(config: &Config, dir: &Path) -> Result<Vec<String>, CliError> {
    let model = model_of(config)?;
    let sc = &config.scan;
    let mut out = Outputs::create(dir.to_path_buf())?;
    let mut rhos = sc.rhos.clone();
    rhos.sort_by(f64::total_cmp);
    let records = scan(&model, &rhos, &config.solver, &sc.options)?;
    out.text("scan.csv", &scan_csv(&records))?;
    out.json("scan.json", &records)?;
    out.json("subadditivity.json", &subadditivity_check(&records, model.params(), &sc.options))?;
    if sc.bisect {
        let result = find_critical_mass(&model, (sc.bracket[0], sc.bracket[1]), sc.tol_rho, &config.solver, &sc.options)?;
        eprintln!("critical mass bracket: ({}, {})", result.rho0_lo, result.rho0_hi);
        out.text("bisection.csv", &bisection_csv(&result))?;
        out.json("critical_mass.json", &result)?;
    }
    out.finish("scan", config)
}

fn invariants_csv(series: &[Invariants]) -> String {
    let mut s = String::from("t,mass,energy,momentum,Ev\n");
    for x in series {
        let _ = writeln!(s, "{},{},{},{},{}", x.t, x.mass, x.energy, x.momentum, x.ev);
    }
    s
}

pub fn evolve_cmd(config: &Config, dir: &Path) -> Result<Vec<String>, CliError> {
    let model = model_of(config)?;
    if model.params().dim != 1 {
        return Err(CliError::config(format!(
            "evolve integrates the flow in one dimension only (well-posedness is a 1D result); model.dim = {}",
            model.params().dim
        )));
    }
    let ev = &config.evolve;
    let mut out = Outputs::create(dir.to_path_buf())?;
    let psi0 = match ev.initial {
        InitialState::Groundstate => {
            let gs = minimize(&model, ev.rho, &config.solver)?;
            write_ground_state(&mut out, &model, &gs, config)?;
            gs.field
        }
        InitialState::Gaussian => project_mass(&Field::gaussian(model.grid(), ev.width, 1.0)?, ev.rho)?,
    };
    let traj = evolve(&psi0, &model, &ev.integrator)?;
    out.text("invariants.csv", &invariants_csv(&traj.series))?;
    out.json("drift.json", &invariant_drift(&traj)?)?;
    if ev.snapshots {
        for (i, snap) in traj.snapshots.iter().enumerate() {
            out.bytes(&format!("snapshots/snap_{i:06}.hwf"), &encode_field(snap))?;
        }
    }
    out.bytes("final.csv", &field_csv(traj.last())?)?;
    out.finish("evolve", config)
}

fn distance_csv(report: &StabilityReport) -> String {
    let mut s = String::from("t,distance,gamma_opt,y_opt\n");
    for x in &report.series {
        let _ = writeln!(s, "{},{},{},{}", x.t, x.distance, x.gamma_opt, x.y_opt);
    }
    s
}

/// The critical-mass bracket: from the config, a previous scan under the
/// output root, or a fresh bisection.
fn critical_bracket(config: &Config, root: &Path, model: &Model) -> Result<[f64; 2], CliError> {
    if let Some(b) = config.stability.rho0_bracket {
        return Ok(b);
    }
    let stored = root.join("scan").join("critical_mass.json");
    if let Ok(text) = std::fs::read_to_string(&stored) {
        let r: CriticalMassResult =
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", stored.display())))?;
        return Ok([r.rho0_lo, r.rho0_hi]);
    }
    let sc = &config.scan;
    let r = find_critical_mass(model, (sc.bracket[0], sc.bracket[1]), sc.tol_rho, &config.solver, &sc.options)?;
    Ok([r.rho0_lo, r.rho0_hi])
}

#[derive(Serialize)]
struct StabilitySummary<'a> {
    rho: f64,
    rho0_bracket: [f64; 2],
    groundstate_outcome: Outcome,
    reports: &'a [StabilityReport],
}

pub fn stability_cmd(config: &Config, root: &Path, dir: &Path) -> Result<Vec<String>, CliError> {
    let model = model_of(config)?;
    if model.params().dim != 1 {
        return Err(CliError::config("stability experiments need the 1D flow; set model.dim = 1".into()));
    }
    let st = &config.stability;
    let bracket = critical_bracket(config, root, &model)?;
    if st.rho <= bracket[1] {
        return Err(CliError::config(format!(
            "rho = {} does not exceed the critical-mass bracket ({}, {}); no minimiser regime",
            st.rho, bracket[0], bracket[1]
        )));
    }
    let mut out = Outputs::create(dir.to_path_buf())?;
    let gs = minimize(&model, st.rho, &config.solver)?;
    write_ground_state(&mut out, &model, &gs, config)?;
    let reports = stability_experiment(&model, &gs.field, &st.deltas, &st.shapes, &st.integrator)?;
    for (i, r) in reports.iter().enumerate() {
        let label = match &r.shape {
            Some(s) => format!("{}_{}", r.delta, s.label()),
            None => "baseline".into(),
        };
        let label: String = label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect();
        out.text(&format!("stability_{i:02}_{label}.csv"), &distance_csv(r))?;
        eprintln!("{label}: sup distance {:.3e}", r.sup_distance);
    }
    out.json(
        "stability.json",
        &StabilitySummary { rho: st.rho, rho0_bracket: bracket, groundstate_outcome: gs.converged_to, reports: &reports },
    )?;
    out.finish("stability", config)
}
