use halfwave::scan::{
    find_critical_mass, homogeneity_exponent, negativity_witness, scan, subadditivity_check, witness_mass_exponent,
    witness_trials, Attained, ScanConfig, ScanRecord,
};
use halfwave::variational::{Initializer, Outcome, SolveConfig};
use halfwave::{Error, Model, ModelParams};

fn record(rho: f64, i_est: f64) -> ScanRecord {
    ScanRecord {
        rho,
        i_est,
        box_energy: i_est,
        attained: if i_est < -1e-4 { Attained::NegativeMinimizer } else { Attained::ZeroSpreading },
        outcome: if i_est < -1e-4 { Outcome::Minimizer } else { Outcome::Spreading },
        residual: 0.0,
        iterations: 0,
        kinetic: 1.0,
        pohozaev: 0.0,
        witness: None,
    }
}

fn coarse() -> Model {
    Model::new(ModelParams::one_d(1.5, 2.5, 0.0).with_grid(512, 40.0)).unwrap()
}

#[test]
fn exponents_closed_form() {
    assert_eq!(homogeneity_exponent(1, 2.5), 8.0);
    assert_eq!(homogeneity_exponent(1, 2.0), 4.0);
    assert!((homogeneity_exponent(2, 1.5) - 3.0 / 1.0).abs() < 1e-15);
    assert_eq!(witness_mass_exponent(&ModelParams::one_d(1.5, 2.5, 0.0)), 1.5);
}

#[test]
fn witness_family_obeys_mass_law() {
    let model = Model::new(ModelParams::one_d(1.5, 2.5, 0.0)).unwrap();
    let trials = witness_trials(&model, 10.0, &ScanConfig::default()).unwrap();
    assert_eq!(trials.len(), 9);
    for (t, field) in &trials {
        assert!((field.l2_norm() - 10.0).abs() < 1e-12 * 10.0);
        // resolved dilations keep the Gaussian mass law; the finest ones
        // fall below the grid spacing and are rejected
        if t.lambda <= 4.0 {
            assert!(t.admissible && t.mass_law_error.abs() <= 1e-6, "{t:?}");
        }
        if t.lambda >= 64.0 {
            assert!(!t.admissible, "{t:?}");
        }
    }
}

#[test]
fn witness_certifies_large_mass() {
    let model = Model::new(ModelParams::one_d(1.5, 2.5, 0.0)).unwrap();
    let w = negativity_witness(&model, 10.0, &ScanConfig::default()).unwrap();
    assert!(w.energy < 0.0);
    let f = w.field.unwrap();
    assert!((model.energy(&f) - w.energy).abs() <= 1e-12 * w.energy.abs());
}

#[test]
fn no_witness_at_small_mass() {
    let model = Model::new(ModelParams::one_d(1.5, 2.5, 0.0)).unwrap();
    match negativity_witness(&model, 0.01, &ScanConfig::default()) {
        Err(Error::NoWitness(_)) => {}
        other => panic!("expected NoWitness, got {other:?}"),
    }
}

#[test]
fn scan_classifies_both_regimes() {
    let model = Model::new(ModelParams::one_d(1.5, 2.5, 0.0)).unwrap();
    let recs = scan(&model, &[0.05, 10.0], &SolveConfig::default(), &ScanConfig::default()).unwrap();
    assert_eq!(recs[0].attained, Attained::ZeroSpreading);
    assert!(recs[0].i_est.abs() <= 1e-4);
    assert_eq!(recs[1].attained, Attained::NegativeMinimizer);
    assert!(recs[1].i_est < 0.0);
    assert!(recs[1].witness.as_ref().unwrap().energy < 0.0);
}

#[test]
fn bracket_validation() {
    let model = coarse();
    let solve = SolveConfig::default();
    let sc = ScanConfig::default();
    for b in [(2.0, 1.0), (0.0, 1.0), (1.0, 1.0), (f64::NAN, 1.0)] {
        assert!(matches!(find_critical_mass(&model, b, 0.1, &solve, &sc), Err(Error::Bracket(_))), "{b:?}");
    }
    assert!(matches!(find_critical_mass(&model, (0.01, 0.02), 0.001, &solve, &sc), Err(Error::Bracket(_))));
}

#[test]
fn bisection_brackets_sign_change() {
    let model = coarse();
    let solve = SolveConfig { initializers: vec![Initializer::Gaussian { width: 0.5 }, Initializer::Gaussian { width: 2.0 }], ..SolveConfig::default() };
    let r = find_critical_mass(&model, (0.5, 6.0), 0.1, &solve, &ScanConfig::default()).unwrap();
    assert!(r.rho0_lo < r.rho0_hi && r.rho0_hi - r.rho0_lo <= 0.1);
    assert_eq!(r.lo_record.attained, Attained::ZeroSpreading);
    assert_eq!(r.hi_record.attained, Attained::NegativeMinimizer);
    assert!(r.rho0_lo > 1.0 && r.rho0_hi < 4.0, "{} {}", r.rho0_lo, r.rho0_hi);
    for s in &r.trace {
        assert!(s.lo < s.rho && s.rho < s.hi);
    }
}

#[test]
fn convex_curve_is_subadditive() {
    let recs: Vec<ScanRecord> = [0.5, 1.0, 2.0, 3.0, 4.0].iter().map(|&r| record(r, -0.01 * r.powi(4))).collect();
    let rep = subadditivity_check(&recs, &ModelParams::one_d(1.5, 2.5, 0.0), &ScanConfig::default());
    assert!(rep.subadditive, "{}", rep.max_excess);
    assert!(rep.nonincreasing);
}

#[test]
fn violations_are_reported() {
    // I(M) = -√M is strictly superadditive in the mass
    let recs: Vec<ScanRecord> = [1.0, 2.0, 3.0, 4.0].iter().map(|&r| record(r, -r)).collect();
    let rep = subadditivity_check(&recs, &ModelParams::one_d(1.5, 2.5, 0.0), &ScanConfig::default());
    assert!(!rep.subadditive && rep.max_excess > 0.1);

    let recs: Vec<ScanRecord> = [1.0, 2.0, 3.0].iter().map(|&r| record(r, -3.0 + r)).collect();
    let rep = subadditivity_check(&recs, &ModelParams::one_d(1.5, 2.5, 0.0), &ScanConfig::default());
    assert!(!rep.nonincreasing && (rep.max_increase - 1.0).abs() < 1e-12);
}
