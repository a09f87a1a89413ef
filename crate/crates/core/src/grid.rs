//! Uniform periodic lattices and their discrete Fourier transforms.
//!
//! Nodes sit at `x_j = -L/2 + j h`, `h = L/N`, on every axis. The forward
//! transform carries the cell volume, `û_k = h^d Σ_j u_j e^{-2πi j·k/N}`, so that
//! the discrete Plancherel identity reads
//!
//! ```text
//! h^d Σ_j |u_j|²  =  L^{-d} Σ_k |û_k|²
//! ```
//!
//! mirroring `∫|u|² dx = (2π)^{-d} ∫|û|² dξ` with `dξ = (2π/L)^d`. Spectra are
//! stored in FFT order and referenced to the first node, i.e. the unimodular
//! factor `e^{-iξ·x_0}` is left out; every operator in this crate is a
//! diagonal multiplier, for which that factor cancels.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Clone)]
pub struct Grid {
    dim: usize,
    n: usize,
    len: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    axis_freqs: Arc<Vec<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("len", &self.len)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.len.to_bits() == other.len.to_bits()
    }
}

/// Signed integer wavenumber of FFT slot `i`, in `[-N/2, N/2)`.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize, len: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParams(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "points per axis must be a power of two >= 4, got {n}"
            )));
        }
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::InvalidParams(format!("torus length must be positive, got {len}")));
        }
        let mut planner = FftPlanner::new();
        let dk = 2.0 * PI / len;
        let axis_freqs = (0..n).map(|i| dk * wavenumber(i, n) as f64).collect();
        Ok(Grid {
            dim,
            n,
            len,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            axis_freqs: Arc::new(axis_freqs),
        })
    }

    /// The lattice a parameter set describes.
    pub fn from_params(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        Grid::new(params.dim, params.n, params.len)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    /// Total number of nodes, `N^d`.
    pub fn size(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn spacing(&self) -> f64 {
        self.len / self.n as f64
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Weight of one Fourier mode in Plancherel sums, `L^{-d}`.
    pub fn mode_weight(&self) -> f64 {
        self.len.powi(-(self.dim as i32))
    }

    pub fn axis_nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|j| -0.5 * self.len + j as f64 * h).collect()
    }

    /// Frequencies `2πk/L` of one axis, FFT order.
    pub fn axis_freqs(&self) -> &[f64] {
        &self.axis_freqs
    }

    /// Coordinates of node `idx` (row-major; the last axis varies fastest).
    pub fn node(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        let x0 = -0.5 * self.len;
        match self.dim {
            1 => [x0 + idx as f64 * h, 0.0],
            _ => [x0 + (idx / self.n) as f64 * h, x0 + (idx % self.n) as f64 * h],
        }
    }

    /// Wavevector of spectral slot `idx`.
    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.axis_freqs[idx], 0.0],
            _ => [self.axis_freqs[idx / self.n], self.axis_freqs[idx % self.n]],
        }
    }

    /// Evaluates `f` at every wavevector.
    pub fn spectral_map<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.size()).map(|i| f(self.wavevector(i))).collect()
    }

    /// Forward transform with the `h^d` weight.
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.transform(&mut buf, &self.forward);
        let w = self.cell_volume();
        buf.iter_mut().for_each(|z| *z *= w);
        buf
    }

    /// Inverse of [`Grid::forward`].
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spectrum.to_vec();
        self.inverse_in_place(&mut buf);
        buf
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.inverse);
        let w = self.mode_weight();
        buf.iter_mut().for_each(|z| *z *= w);
    }

    /// Raw forward DFT, no weights.
    pub(crate) fn dft(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.forward);
    }

    /// Raw inverse DFT, no weights; `idft(dft(x)) = N^d x`.
    pub(crate) fn idft(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.inverse);
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(buf.len(), self.size());
        let n = self.n;
        // rows are contiguous, so process() batches them in one call
        plan.process(buf);
        if self.dim == 2 {
            let mut column = vec![Complex64::new(0.0, 0.0); n];
            for c in 0..n {
                for r in 0..n {
                    column[r] = buf[r * n + c];
                }
                plan.process(&mut column);
                for r in 0..n {
                    buf[r * n + c] = column[r];
                }
            }
        }
    }

    /// Applies the real diagonal multiplier `symbol` (one entry per spectral
    /// slot) to `values`.
    pub fn apply_multiplier(&self, values: &[Complex64], symbol: &[f64]) -> Vec<Complex64> {
        let mut buf = self.forward(values);
        buf.iter_mut().zip(symbol).for_each(|(z, s)| *z *= s);
        self.inverse_in_place(&mut buf);
        buf
    }

    /// `L^{-d} Σ_k w_k |û_k|²`, the Plancherel quadratic form of a multiplier.
    pub fn quadratic_form(&self, spectrum: &[Complex64], weight: &[f64]) -> f64 {
        let s: f64 = spectrum.iter().zip(weight).map(|(z, w)| w * z.norm_sqr()).sum();
        s * self.mode_weight()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(g: &Grid) -> Vec<i64> {
        let dk = 2.0 * PI / g.len();
        let mut k: Vec<i64> = g.axis_freqs().iter().map(|f| (f / dk).round() as i64).collect();
        k.sort();
        k
    }

    #[test]
    fn frequencies_unit_box() {
        let g = Grid::new(1, 8, 2.0 * PI).unwrap();
        assert_eq!(ints(&g), vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        let mut f: Vec<f64> = g.axis_freqs().to_vec();
        f.sort_by(f64::total_cmp);
        for (fi, k) in f.iter().zip(-4..4) {
            assert!((fi - k as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn frequencies_half_box() {
        let g = Grid::new(1, 8, PI).unwrap();
        let mut f: Vec<f64> = g.axis_freqs().to_vec();
        f.sort_by(f64::total_cmp);
        let want = [-8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0];
        for (a, b) in f.iter().zip(want) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn two_d_layout() {
        let g = Grid::new(2, 4, 2.0 * PI).unwrap();
        assert_eq!(g.size(), 16);
        let mut pairs: Vec<(i64, i64)> = (0..16)
            .map(|i| {
                let k = g.wavevector(i);
                (k[0].round() as i64, k[1].round() as i64)
            })
            .collect();
        pairs.sort();
        let mut want = vec![];
        for a in -2..2 {
            for b in -2..2 {
                want.push((a, b));
            }
        }
        assert_eq!(pairs, want);
    }

    #[test]
    fn frequencies_symmetric_except_nyquist() {
        let g = Grid::new(1, 16, 3.0).unwrap();
        let f = g.axis_freqs();
        let nyq = f.iter().cloned().fold(0.0, f64::min);
        for &x in f {
            if x != nyq {
                assert!(f.iter().any(|&y| (y + x).abs() < 1e-12));
            }
        }
        assert!(!f.iter().any(|&y| (y + nyq).abs() < 1e-12));
    }

    #[test]
    fn nodes_and_weights() {
        let g = Grid::new(1, 8, 4.0).unwrap();
        assert_eq!(g.node(0)[0], -2.0);
        assert_eq!(g.node(4)[0], 0.0);
        assert!((g.cell_volume() - 0.5).abs() < 1e-15);
        let g2 = Grid::new(2, 8, 4.0).unwrap();
        assert_eq!(g2.node(8 * 3 + 5), [-0.5, 0.5]);
        assert!((g2.cell_volume() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid() {
        assert!(Grid::new(3, 8, 1.0).is_err());
        assert!(Grid::new(1, 12, 1.0).is_err());
        assert!(Grid::new(1, 8, -1.0).is_err());
    }

    #[test]
    fn round_trip_2d() {
        let g = Grid::new(2, 8, 5.0).unwrap();
        let v: Vec<Complex64> =
            (0..64).map(|i| Complex64::new((i as f64).sin(), (0.3 * i as f64).cos())).collect();
        let back = g.inverse(&g.forward(&v));
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
