use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// A complex lattice function bound to a [`Grid`]. Entries are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.size(),
                values.len()
            )));
        }
        if !values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite(None));
        }
        Ok(Field { grid: grid.clone(), values })
    }

    pub(crate) fn from_parts_unchecked(grid: &Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.size());
        Field { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Field { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.size()] }
    }

    pub fn constant(grid: &Grid, c: Complex64) -> Self {
        Field { grid: grid.clone(), values: vec![c; grid.size()] }
    }

    /// Samples `f` at every node.
    pub fn from_fn<F: Fn([f64; 2]) -> Complex64>(grid: &Grid, f: F) -> Result<Self> {
        let values = (0..grid.size()).map(|i| f(grid.node(i))).collect();
        Field::new(grid, values)
    }

    /// Radial Gaussian `amplitude * exp(-|x|²/(2 width²))`.
    pub fn gaussian(grid: &Grid, width: f64, amplitude: f64) -> Result<Self> {
        Field::from_fn(grid, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            Complex64::new(amplitude * (-r2 / (2.0 * width * width)).exp(), 0.0)
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `‖u‖₂²` by the uniform quadrature rule.
    pub fn mass_sq(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass_sq().sqrt()
    }

    /// `‖u‖_r^r`.
    pub fn lr_norm_pow(&self, r: f64) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|z| z.norm().powf(r)).sum::<f64>()
    }

    /// `⟨u, w⟩ = h^d Σ conj(u_j) w_j`.
    pub fn inner(&self, other: &Field) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.cell_volume()
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        Field::from_parts_unchecked(&self.grid, self.values.iter().map(|z| z * c).collect())
    }

    pub fn conj(&self) -> Field {
        Field::from_parts_unchecked(&self.grid, self.values.iter().map(|z| z.conj()).collect())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &Field) -> Result<Field> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Field::new(&self.grid, values)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// Cyclic grid shift: the result at node `j` is `self` at node `j + shift`
    /// (per axis), i.e. `u(· + shift·h)`.
    pub fn shifted(&self, shift: &[i64]) -> Field {
        let n = self.grid.n() as i64;
        let wrap = |j: i64| j.rem_euclid(n) as usize;
        let values = match self.grid.dim() {
            1 => (0..n).map(|j| self.values[wrap(j + shift[0])]).collect(),
            _ => {
                let mut out = Vec::with_capacity(self.values.len());
                for a in 0..n {
                    for b in 0..n {
                        let ia = wrap(a + shift[0]);
                        let ib = wrap(b + shift.get(1).copied().unwrap_or(0));
                        out.push(self.values[ia * n as usize + ib]);
                    }
                }
                out
            }
        };
        Field::from_parts_unchecked(&self.grid, values)
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(Field::new(&g, v), Err(Error::NonFinite(_))));
        assert!(Field::new(&g, vec![Complex64::new(0.0, 0.0); 7]).is_err());
    }

    #[test]
    fn shift_convention() {
        let g = Grid::new(1, 8, 8.0).unwrap();
        let u = Field::from_fn(&g, |x| Complex64::new(x[0], 0.0)).unwrap();
        let s = u.shifted(&[2]);
        // u(x + 2h) at x = -4 is -2
        assert_eq!(s.values()[0].re, -2.0);
    }

    #[test]
    fn gaussian_mass() {
        let g = Grid::new(1, 1024, 80.0).unwrap();
        let u = Field::gaussian(&g, 0.5f64.sqrt(), 1.0).unwrap();
        // exp(-x²) has ∫ e^{-2x²} = sqrt(π/2)
        assert!((u.mass_sq() - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-10);
    }
}
