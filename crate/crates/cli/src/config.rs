//! Run configuration: one TOML file with sections, every key optional.

use std::path::{Path, PathBuf};

use halfwave::dynamics::EvolveConfig;
use halfwave::scan::ScanConfig;
use halfwave::stability::Perturbation;
use halfwave::variational::SolveConfig;
use halfwave::ModelParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub q: f64,
    pub p: f64,
    pub v: Vec<f64>,
    pub dim: usize,
    /// Points per axis; 1024 in 1D and 256 in 2D when absent.
    pub n: Option<usize>,
    /// Box side; `80 √d` when absent.
    pub len: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { q: 1.5, p: 2.5, v: vec![0.0], dim: 1, n: None, len: None }
    }
}

impl ModelSection {
    pub fn params(&self) -> ModelParams {
        let d = self.dim.max(1);
        let n = self.n.unwrap_or(if d == 1 { 1024 } else { 256 });
        let len = self.len.unwrap_or(80.0 * (d as f64).sqrt());
        let mut v = self.v.clone();
        if v.len() == 1 && d == 2 {
            v.push(0.0);
        }
        ModelParams { q: self.q, p: self.p, v, dim: self.dim, len, n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundstateSection {
    pub rho: f64,
}

impl Default for GroundstateSection {
    fn default() -> Self {
        GroundstateSection { rho: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    /// Masses of the energy-curve scan.
    pub rhos: Vec<f64>,
    /// Run the critical-mass bisection.
    pub bisect: bool,
    pub bracket: [f64; 2],
    pub tol_rho: f64,
    pub options: ScanConfig,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            rhos: vec![0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0],
            bisect: true,
            bracket: [0.05, 10.0],
            tol_rho: 1e-2,
            options: ScanConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Groundstate,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    pub initial: InitialState,
    /// Mass of the initial state.
    pub rho: f64,
    /// Gaussian width when `initial = "gaussian"`.
    pub width: f64,
    /// Write every saved snapshot as a binary field.
    pub snapshots: bool,
    pub integrator: EvolveConfig,
}

impl Default for EvolveSection {
    fn default() -> Self {
        EvolveSection {
            initial: InitialState::Groundstate,
            rho: 3.0,
            width: 1.0,
            snapshots: true,
            integrator: EvolveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub rho: f64,
    pub deltas: Vec<f64>,
    /// Perturbation shapes; the noise seed comes from `--seed` when given.
    pub shapes: Vec<Perturbation>,
    /// Known critical-mass bracket. When absent the bracket is read from a
    /// previous scan under the output root, or computed.
    pub rho0_bracket: Option<[f64; 2]>,
    pub integrator: EvolveConfig,
}

impl Default for StabilitySection {
    fn default() -> Self {
        StabilitySection {
            rho: 10.0,
            deltas: vec![1e-3, 1e-2],
            shapes: halfwave::stability::default_perturbations(0),
            rho0_bracket: None,
            integrator: EvolveConfig { dt: 2e-4, t_final: 20.0, save_stride: 500, ..EvolveConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSection {
    /// Masses whose minimisers are certified.
    pub certify_rhos: Vec<f64>,
    /// Grid used for certification; the torus error in `G_v` decays like
    /// `L^{-2}`, so certification needs a larger box than the default.
    pub certify_n: usize,
    pub certify_len: f64,
    /// Masses of the single-power homogeneity fit.
    pub homogeneity_rhos: Vec<f64>,
    /// Masses of the subadditivity scan.
    pub scan_rhos: Vec<f64>,
    /// Horizon of the conservation run.
    pub t_final: f64,
    /// Amplitude of its random smooth data; large values collapse onto a
    /// few grid cells.
    pub smooth_amplitude: f64,
}

impl Default for CheckSection {
    fn default() -> Self {
        CheckSection {
            certify_rhos: vec![3.0],
            certify_n: 65536,
            certify_len: 640.0,
            homogeneity_rhos: vec![1.6, 1.8, 2.0],
            scan_rhos: vec![0.5, 1.0, 2.0, 3.0, 4.0],
            t_final: 1.0,
            smooth_amplitude: 0.3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Output root; `HWLAB_OUT` and `--out` take precedence.
    pub root: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub solver: SolveConfig,
    pub groundstate: GroundstateSection,
    pub scan: ScanSection,
    pub evolve: EvolveSection,
    pub stability: StabilitySection,
    pub check: CheckSection,
    pub output: OutputSection,
    /// Seed of every random perturbation.
    pub seed: u64,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Config, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") {
            // a manifest written by a previous run
            let manifest: crate::manifest::RunManifest =
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            return Ok(manifest.config);
        }
        Config::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Applies the seed to the seeded perturbation shapes.
    pub fn apply_seed(&mut self, seed: u64) {
        self.seed = seed;
        for s in &mut self.stability.shapes {
            if let Perturbation::Noise { seed: slot, .. } = s {
                *slot = seed;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::parse("[model]\nqq = 1.2\n").unwrap_err();
        assert!(err.contains("qq"), "{err}");
        let err = Config::parse("[solver]\nstep_size = 1.0\n").unwrap_err();
        assert!(err.contains("step_size"), "{err}");
    }

    #[test]
    fn sections_round_trip() {
        let mut c = Config::default();
        c.model.v = vec![0.5];
        c.scan.rhos = vec![1.0];
        c.apply_seed(9);
        let text = toml::to_string(&c).unwrap();
        assert_eq!(Config::parse(&text).unwrap(), c);
    }

    #[test]
    fn two_d_defaults() {
        let m = ModelSection { dim: 2, q: 1.2, p: 1.5, ..ModelSection::default() };
        let p = m.params();
        assert_eq!((p.n, p.v.len()), (256, 2));
        assert!((p.len - 80.0 * 2f64.sqrt()).abs() < 1e-12);
    }
}
