use super::GridSpec;
use crate::error::{Error, Result};

/// A real Fourier multiplier `s(ξ)`, one value per FFT bin.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSymbol {
    grid: GridSpec,
    values: Vec<f64>,
}

impl DiagonalSymbol {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} symbol values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(DiagonalSymbol { grid, values })
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        DiagonalSymbol {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// `s = f(|k|²)` with `|k|² = 4π²|ξ|²`.
    pub fn radial(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|flat| {
                let idx = grid.multi_index(flat);
                let k2: f64 = (0..grid.dim())
                    .map(|a| grid.wavenumber(a, idx[a]).powi(2))
                    .sum();
                f(k2)
            })
            .collect();
        DiagonalSymbol { grid, values }
    }

    /// `|k|²`, the symbol of `−Δ`.
    pub fn k2(grid: GridSpec) -> Self {
        Self::radial(grid, |k2| k2)
    }

    /// `−|k|²`, the symbol of `Δ`.
    pub fn laplacian(grid: GridSpec) -> Self {
        Self::radial(grid, |k2| -k2)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at the zero frequency, i.e. the action on constants.
    pub fn at_zero(&self) -> f64 {
        self.values[0]
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        DiagonalSymbol {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}
