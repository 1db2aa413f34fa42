use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::GridSpec;
use crate::error::{Error, Result};
use crate::linop::VectorSpace;

/// Fields below this size are processed on the calling thread.
pub(crate) const PAR_THRESHOLD: usize = 1 << 14;

/// Nodal values of a real scalar field on a periodic grid.
///
/// The inner product is the rectangle rule `∏h_α Σ f g`, so `dot` and
/// `norm` approximate `∫_Q f g` and the `L²(Q)` norm.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field values"));
        }
        Ok(RealField { grid, values })
    }

    /// Construction without the finiteness scan; used for freshly computed data.
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        RealField { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        RealField::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        RealField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f` at every node; `f` receives the node coordinates.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64 + Sync) -> Self {
        let d = grid.dim();
        let values = (0..grid.len())
            .into_par_iter()
            .with_min_len(1024)
            .map(|flat| {
                let idx = grid.multi_index(flat);
                let mut x = [0.0; 3];
                for a in 0..d {
                    x[a] = grid.coordinate(a, idx[a]);
                }
                f(&x[..d])
            })
            .collect();
        RealField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.flat_index(idx)]
    }

    /// `∫_Q f` by the rectangle rule.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }

    /// `(1/|Q|) ∫_Q f`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Applies `f` at every node.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> RealField {
        let values = if self.values.len() >= PAR_THRESHOLD {
            self.values.par_iter().map(|&v| f(v)).collect()
        } else {
            self.values.iter().map(|&v| f(v)).collect()
        };
        RealField::from_parts(self.grid, values)
    }

    /// Applies `f` to paired nodal values.
    pub fn zip_map(
        &self,
        other: &RealField,
        f: impl Fn(f64, f64) -> f64 + Sync + Send,
    ) -> Result<RealField> {
        self.grid.check_same(&other.grid)?;
        let values = if self.values.len() >= PAR_THRESHOLD {
            self.values
                .par_iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect()
        } else {
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect()
        };
        Ok(RealField::from_parts(self.grid, values))
    }

    /// Nodewise product.
    pub fn mul(&self, other: &RealField) -> Result<RealField> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Circular shift by `shift[α]` nodes along each axis.
    pub fn shifted(&self, shift: &[isize]) -> RealField {
        let g = self.grid;
        let d = g.dim();
        let mut out = vec![0.0; g.len()];
        for (flat, &v) in self.values.iter().enumerate() {
            let idx = g.multi_index(flat);
            let mut dst = [0usize; 3];
            for a in 0..d {
                let n = g.shape()[a] as isize;
                dst[a] = (idx[a] as isize + shift[a]).rem_euclid(n) as usize;
            }
            out[g.flat_index(&dst[..d])] = v;
        }
        RealField::from_parts(g, out)
    }
}

impl VectorSpace for RealField {
    fn zeros_like(&self) -> Self {
        RealField::zeros(self.grid)
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        assert_eq!(self.grid, x.grid, "axpy on fields from different grids");
        if self.values.len() >= PAR_THRESHOLD {
            self.values
                .par_iter_mut()
                .zip(&x.values)
                .for_each(|(a, &b)| *a += alpha * b);
        } else {
            for (a, &b) in self.values.iter_mut().zip(&x.values) {
                *a += alpha * b;
            }
        }
    }

    fn scale_mut(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "inner product of fields from different grids");
        // Sequential sum keeps the result independent of the thread count.
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        s * self.grid.cell_volume()
    }

    fn dim(&self) -> usize {
        self.values.len()
    }

    fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Discrete Fourier coefficients `c_k` in FFT bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a grid of {} nodes",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub(crate) fn from_parts(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        SpectralField { grid, coeffs }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Largest violation of `c_{−k} = conj(c_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        let d = g.dim();
        let mut worst: f64 = 0.0;
        for (flat, c) in self.coeffs.iter().enumerate() {
            let idx = g.multi_index(flat);
            let mut neg = [0usize; 3];
            for a in 0..d {
                let n = g.shape()[a];
                neg[a] = (n - idx[a]) % n;
            }
            let partner = self.coeffs[g.flat_index(&neg[..d])];
            worst = worst.max((c - partner.conj()).norm());
        }
        worst
    }
}
