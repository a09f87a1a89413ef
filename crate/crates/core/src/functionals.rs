//! The boosted Half-Wave symbol and every functional evaluated on a field.
//!
//! `T_v(u) = L^{-d} Σ_k (|ξ_k| - v·ξ_k) |û_k|²`,
//! `E_v(u) = T_v/2 + ‖u‖_{q+1}^{q+1}/(q+1) - ‖u‖_{p+1}^{p+1}/(p+1)`,
//! `G_v(u) = T_v + d(q-1)/(q+1) ‖u‖_{q+1}^{q+1} - d(p-1)/(p+1) ‖u‖_{p+1}^{p+1}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::params::ModelParams;

/// Every scalar the energy landscape exposes for one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub mass_sq: f64,
    pub kinetic: f64,
    /// `‖u‖_{q+1}^{q+1}`.
    pub lq: f64,
    /// `‖u‖_{p+1}^{p+1}`.
    pub lp: f64,
    pub energy: f64,
    pub pohozaev: f64,
    /// `-∫ i ū ∂ₓu`; only defined in one dimension.
    pub momentum: Option<f64>,
    /// Lagrange multiplier `ω = -(T + lq - lp)/‖u‖²` (0 for the zero field).
    pub omega: f64,
    pub hhalf_sq: f64,
}

/// Gagliardo–Nirenberg quotient of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnDiagnostics {
    pub r: f64,
    /// `‖u‖_{r+1}^{r+1} / (T^{d(r-1)/2} M^{(r+1)/2 - d(r-1)/2})`.
    pub quotient: f64,
    /// Interpolation exponent `2d(p-q)/((p+1)(2d-(d-1)(q+1)))`.
    pub theta: f64,
}

/// Kinetic and potential pieces, the minimum needed for energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub mass_sq: f64,
    pub kinetic: f64,
    pub lq: f64,
    pub lp: f64,
}

/// A validated parameter set with its grid and cached multipliers.
#[derive(Debug, Clone)]
pub struct Model {
    params: ModelParams,
    grid: Grid,
    symbol: Vec<f64>,
    defocusing: bool,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        let grid = Grid::from_params(&params)?;
        let v = [params.v[0], params.v.get(1).copied().unwrap_or(0.0)];
        let symbol = grid.spectral_map(|k| (k[0] * k[0] + k[1] * k[1]).sqrt() - v[0] * k[0] - v[1] * k[1]);
        Ok(Model { params, grid, symbol, defocusing: true })
    }

    /// The single-power model `T_v/2 - ‖u‖_{p+1}^{p+1}/(p+1)`: the `q` term is
    /// dropped from every functional and from the gradient.
    pub fn focusing_only(params: ModelParams) -> Result<Self> {
        Ok(Model { defocusing: false, ..Model::new(params)? })
    }

    pub fn has_defocusing(&self) -> bool {
        self.defocusing
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `m(ξ) = |ξ| - v·ξ` per spectral slot.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn check(&self, u: &Field) -> Result<()> {
        if u.grid() == &self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `(√(-Δ) + i v·∇) u`.
    pub fn apply_symbol(&self, u: &Field) -> Result<Field> {
        self.check(u)?;
        let out = self.grid.apply_multiplier(u.values(), &self.symbol);
        Ok(Field::from_parts_unchecked(&self.grid, out))
    }

    pub fn kinetic(&self, u: &Field) -> f64 {
        self.grid.quadratic_form(&self.grid.forward(u.values()), &self.symbol)
    }

    pub fn parts(&self, u: &Field) -> EnergyParts {
        let (q, p) = (self.params.q, self.params.p);
        let w = self.grid.cell_volume();
        let (mut m, mut lq, mut lp) = (0.0, 0.0, 0.0);
        for z in u.values() {
            let a2 = z.norm_sqr();
            let a = a2.sqrt();
            m += a2;
            if self.defocusing {
                lq += a * a.powf(q);
            }
            lp += a * a.powf(p);
        }
        EnergyParts { mass_sq: m * w, kinetic: self.kinetic(u), lq: lq * w, lp: lp * w }
    }

    pub fn energy_of(&self, parts: &EnergyParts) -> f64 {
        let (q, p) = (self.params.q, self.params.p);
        0.5 * parts.kinetic + parts.lq / (q + 1.0) - parts.lp / (p + 1.0)
    }

    pub fn pohozaev_of(&self, parts: &EnergyParts) -> f64 {
        let (q, p, d) = (self.params.q, self.params.p, self.params.dim as f64);
        parts.kinetic + d * (q - 1.0) / (q + 1.0) * parts.lq - d * (p - 1.0) / (p + 1.0) * parts.lp
    }

    pub fn energy(&self, u: &Field) -> f64 {
        self.energy_of(&self.parts(u))
    }

    pub fn functionals(&self, u: &Field) -> Result<FunctionalReport> {
        self.check(u)?;
        let parts = self.parts(u);
        let spectrum = self.grid.forward(u.values());
        let momentum = (self.params.dim == 1).then(|| {
            let k = self.grid.axis_freqs();
            self.grid.quadratic_form(&spectrum, k)
        });
        let omega = if parts.mass_sq > 0.0 {
            -(parts.kinetic + parts.lq - parts.lp) / parts.mass_sq
        } else {
            0.0
        };
        Ok(FunctionalReport {
            mass_sq: parts.mass_sq,
            kinetic: parts.kinetic,
            lq: parts.lq,
            lp: parts.lp,
            energy: self.energy_of(&parts),
            pohozaev: self.pohozaev_of(&parts),
            momentum,
            omega,
            hhalf_sq: hhalf_from_spectrum(&self.grid, &spectrum),
        })
    }

    /// Measured Gagliardo–Nirenberg quotient for the power `r`.
    pub fn gn_diagnostics(&self, u: &Field, r: f64) -> Result<GnDiagnostics> {
        self.check(u)?;
        let d = self.params.dim as f64;
        let r_max = if self.params.dim == 1 { f64::INFINITY } else { 1.0 + 2.0 / (d - 1.0) };
        if !(r > 1.0 && r < r_max) {
            return Err(Error::InvalidArgument(format!("GN exponent r = {r} outside (1, {r_max})")));
        }
        if u.is_zero() {
            return Err(Error::ZeroField);
        }
        let t = self.kinetic(u);
        if t <= 0.0 {
            return Err(Error::InvalidArgument("GN quotient needs T(u) > 0".into()));
        }
        let m = u.mass_sq();
        let a = d * (r - 1.0) / 2.0;
        let quotient = u.lr_norm_pow(r + 1.0) / (t.powf(a) * m.powf((r + 1.0) / 2.0 - a));
        Ok(GnDiagnostics { r, quotient, theta: gn_theta(&self.params) })
    }
}

/// `θ = 2d(p-q) / ((p+1)(2d - (d-1)(q+1)))`.
pub fn gn_theta(params: &ModelParams) -> f64 {
    let (q, p, d) = (params.q, params.p, params.dim as f64);
    2.0 * d * (p - q) / ((p + 1.0) * (2.0 * d - (d - 1.0) * (q + 1.0)))
}

fn hhalf_from_spectrum(grid: &Grid, spectrum: &[Complex64]) -> f64 {
    let w = grid.spectral_map(|k| (1.0 + k[0] * k[0] + k[1] * k[1]).sqrt());
    grid.quadratic_form(spectrum, &w)
}

/// `‖u‖²_{H^{1/2}} = L^{-d} Σ (1+|ξ|²)^{1/2} |û|²`.
pub fn hhalf_norm_sq(u: &Field) -> f64 {
    hhalf_from_spectrum(u.grid(), &u.grid().forward(u.values()))
}

/// `u_λ(x) = λ^α u(λx)` by band-limited interpolation: the transform of the
/// samples is evaluated at `ξ/λ` and set to zero outside the original band.
/// Dilation is about the box centre `x = 0`.
pub fn rescale(u: &Field, lambda: f64, alpha: f64) -> Result<Field> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("scale factor must be positive, got {lambda}")));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument("exponent must be finite".into()));
    }
    let grid = u.grid();
    if lambda == 1.0 && alpha == 0.0 {
        return Ok(u.clone());
    }
    if lambda == 1.0 {
        return Ok(u.scaled(Complex64::new(1.0, 0.0)));
    }
    let n = grid.n();
    let line = LineDilation::new(grid, lambda);
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.size()];
    match grid.dim() {
        1 => line.apply(u.values(), &mut spec),
        _ => {
            let mut tmp = vec![Complex64::new(0.0, 0.0); grid.size()];
            for r in 0..n {
                line.apply(&u.values()[r * n..(r + 1) * n], &mut tmp[r * n..(r + 1) * n]);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for c in 0..n {
                for r in 0..n {
                    col[r] = tmp[r * n + c];
                }
                line.apply(&col, &mut out);
                for r in 0..n {
                    spec[r * n + c] = out[r];
                }
            }
        }
    }
    let factor = lambda.powf(alpha - grid.dim() as f64);
    spec.iter_mut().for_each(|z| *z *= factor);
    grid.inverse_in_place(&mut spec);
    Field::new(grid, spec)
}

/// Samples of the transform of one grid line at `ξ_k/λ`, written in FFT
/// order and referenced to the first node; entries with `|ξ_k/λ|` beyond
/// the band are zero. With `θ = 2π/(Nλ)` the sum `Σ_j a_j e^{-iθkj}` is a
/// chirp-z transform, evaluated as one convolution.
struct LineDilation {
    n: usize,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    kernel: Vec<Complex64>,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    ifft: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl LineDilation {
    fn new(grid: &Grid, lambda: f64) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let x0 = -0.5 * grid.len();
        let theta = 2.0 * std::f64::consts::PI / (n as f64 * lambda);
        let chirp = |m: i64| Complex64::from_polar(1.0, 0.5 * theta * (m * m) as f64);
        let size = (4 * n).next_power_of_two();
        let mut planner = rustfft::FftPlanner::new();
        let fft = planner.plan_fft_forward(size);
        let ifft = planner.plan_fft_inverse(size);
        // kernel[m] = e^{iθ(m - 3N/2 + 1)²/2} for m in 0..2N-1
        let offset = 3 * n as i64 / 2 - 1;
        let mut kernel = vec![Complex64::new(0.0, 0.0); size];
        for (m, slot) in kernel.iter_mut().enumerate().take(2 * n - 1) {
            *slot = chirp(m as i64 - offset);
        }
        fft.process(&mut kernel);
        let pre = (0..n as i64).map(|j| chirp(j).conj()).collect();
        let nyquist = std::f64::consts::PI / h * (1.0 + 1e-12);
        let post = (0..n as i64)
            .map(|kk| {
                let k = kk - n as i64 / 2;
                let xi = 2.0 * std::f64::consts::PI * k as f64 / grid.len();
                let s = xi / lambda;
                if s.abs() > nyquist {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(h, x0 * (xi - s)) * chirp(k).conj() / size as f64
                }
            })
            .collect();
        LineDilation { n, pre, post, kernel, fft, ifft }
    }

    fn apply(&self, line: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.kernel.len()];
        for (j, (a, c)) in line.iter().zip(&self.pre).enumerate() {
            buf[j] = a * c;
        }
        self.fft.process(&mut buf);
        buf.iter_mut().zip(&self.kernel).for_each(|(a, b)| *a *= b);
        self.ifft.process(&mut buf);
        for kk in 0..n {
            let k = kk as i64 - n as i64 / 2;
            out[k.rem_euclid(n as i64) as usize] = buf[kk + n - 1] * self.post[kk];
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn model(v: f64) -> Model {
        Model::new(ModelParams::one_d(1.5, 2.5, v)).unwrap()
    }

    #[test]
    fn fourier_mode_is_eigenfield() {
        let m = Model::new(ModelParams::one_d(1.5, 2.5, 0.5).with_grid(64, 2.0 * PI)).unwrap();
        let u = Field::from_fn(m.grid(), |x| Complex64::from_polar(1.0, 3.0 * x[0])).unwrap();
        let au = m.apply_symbol(&u).unwrap();
        for (a, b) in au.values().iter().zip(u.values()) {
            assert!((a - 1.5 * b).norm() < 1e-12);
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let m = model(0.3);
        let u = Field::constant(m.grid(), Complex64::new(0.7, -0.2));
        assert!(m.apply_symbol(&u).unwrap().max_modulus() < 1e-14);
    }

    #[test]
    fn zero_field_report() {
        let m = model(0.0);
        let r = m.functionals(&Field::zeros(m.grid())).unwrap();
        assert_eq!(r.mass_sq, 0.0);
        assert_eq!(r.kinetic, 0.0);
        assert_eq!(r.energy, 0.0);
        assert_eq!(r.pohozaev, 0.0);
        assert_eq!(r.omega, 0.0);
        assert_eq!(r.hhalf_sq, 0.0);
        assert_eq!(r.momentum, Some(0.0));
    }

    #[test]
    fn flat_state_energy() {
        let m = model(0.0);
        let c: f64 = 0.8;
        let r = m.functionals(&Field::constant(m.grid(), Complex64::new(c, 0.0))).unwrap();
        assert!(r.kinetic.abs() < 1e-14);
        let want = 80.0 * (c.powf(2.5) / 2.5 - c.powf(3.5) / 3.5);
        assert!((r.energy - want).abs() < 1e-12);
    }

    #[test]
    fn decomposition_identities() {
        let m = model(0.4);
        let u = Field::from_fn(m.grid(), |x| {
            Complex64::new((-x[0] * x[0]).exp(), 0.3 * x[0] * (-x[0] * x[0] / 2.0).exp())
        })
        .unwrap();
        let r = m.functionals(&u).unwrap();
        assert_eq!(r.energy, 0.5 * r.kinetic + r.lq / 2.5 - r.lp / 3.5);
        assert_eq!(r.pohozaev, r.kinetic + 0.5 / 2.5 * r.lq - 1.5 / 3.5 * r.lp);
        assert!(r.kinetic > 0.0);
    }

    #[test]
    fn theta_example() {
        let p = ModelParams::one_d(1.5, 2.5, 0.0);
        assert!((gn_theta(&p) - 2.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn gn_rejects_bad_input() {
        let m = model(0.0);
        let z = Field::zeros(m.grid());
        assert!(matches!(m.gn_diagnostics(&z, 2.0), Err(Error::ZeroField)));
        let g = Field::gaussian(m.grid(), 1.0, 1.0).unwrap();
        assert!(m.gn_diagnostics(&g, 1.0).is_err());
        let m2 = Model::new(ModelParams::two_d(1.2, 1.8, [0.0, 0.0]).with_grid(32, 20.0)).unwrap();
        let g2 = Field::gaussian(m2.grid(), 1.0, 1.0).unwrap();
        assert!(m2.gn_diagnostics(&g2, 3.5).is_err());
        assert!(m2.gn_diagnostics(&g2, 2.5).is_ok());
    }

    #[test]
    fn hhalf_single_mode() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let u = Field::from_fn(&g, |x| Complex64::from_polar(0.5, 5.0 * x[0])).unwrap();
        let want = (1.0f64 + 25.0).sqrt() * u.mass_sq();
        assert!((hhalf_norm_sq(&u) - want).abs() < 1e-12 * want);
        assert_eq!(hhalf_norm_sq(&Field::zeros(&g)), 0.0);
    }

    #[test]
    fn rescale_identity_and_errors() {
        let g = Grid::new(1, 64, 10.0).unwrap();
        let u = Field::gaussian(&g, 1.0, 1.0).unwrap();
        assert_eq!(rescale(&u, 1.0, 0.0).unwrap(), u);
        assert!(rescale(&u, 0.0, 1.0).is_err());
        assert!(rescale(&u, -2.0, 1.0).is_err());
    }

    #[test]
    fn rescale_matches_closed_form() {
        let g = Grid::new(1, 256, 40.0).unwrap();
        let u = Field::gaussian(&g, 1.0, 1.0).unwrap();
        for &lam in &[0.5, 2.0] {
            let r = rescale(&u, lam, 0.7).unwrap();
            let want = Field::gaussian(&g, 1.0 / lam, lam.powf(0.7)).unwrap();
            let err = r.sub(&want).unwrap().max_modulus();
            assert!(err < 1e-12, "lambda {lam}: {err}");
        }
    }
}
