use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::PAR_THRESHOLD;
use super::{DiagonalSymbol, GridSpec, RealField, SpectralField};
use crate::error::{Error, Result};

/// Smallest admissible `|1 − s₁ s₂|` in [`Spectral::block_solve`].
pub const DET_FLOOR: f64 = 1e-13;

struct AxisPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// FFT plans and cached wavenumbers for one grid.
///
/// The forward transform is unnormalised and the inverse carries the
/// `1/∏N_α` factor, so a constant `c` maps to `c ∏N_α` at `ξ = 0`.
pub struct Spectral {
    grid: GridSpec,
    plans: Vec<AxisPlan>,
    k2: Vec<f64>,
    /// Per axis, the wavenumber of each bin with the Nyquist bin zeroed.
    deriv: Vec<Vec<f64>>,
    /// Flat index of `−ξ` for every bin.
    mirror: Vec<usize>,
    /// Whether each bin survives the 2/3 rule.
    keep: Vec<bool>,
    dealias: bool,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .field("dealias", &self.dealias)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let plans = grid
            .shape()
            .iter()
            .map(|&n| AxisPlan {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
            .collect();
        let deriv: Vec<Vec<f64>> = (0..grid.dim())
            .map(|a| {
                (0..grid.shape()[a])
                    .map(|i| {
                        if grid.is_nyquist(a, i) {
                            0.0
                        } else {
                            grid.wavenumber(a, i)
                        }
                    })
                    .collect()
            })
            .collect();
        let k2 = (0..grid.len())
            .map(|flat| {
                let idx = grid.multi_index(flat);
                (0..grid.dim())
                    .map(|a| grid.wavenumber(a, idx[a]).powi(2))
                    .sum()
            })
            .collect();
        let mirror = (0..grid.len())
            .map(|flat| {
                let idx = grid.multi_index(flat);
                let mut neg = [0usize; 3];
                for a in 0..grid.dim() {
                    let n = grid.shape()[a];
                    neg[a] = (n - idx[a]) % n;
                }
                grid.flat_index(&neg[..grid.dim()])
            })
            .collect();
        let keep = (0..grid.len())
            .map(|flat| {
                let idx = grid.multi_index(flat);
                (0..grid.dim()).all(|a| {
                    3 * grid.frequency(a, idx[a]).unsigned_abs() as usize <= grid.shape()[a]
                })
            })
            .collect();
        Spectral {
            grid,
            plans,
            k2,
            deriv,
            mirror,
            keep,
            dealias: false,
        }
    }

    /// Enables the 2/3-rule filter in [`Self::product`] and the
    /// variable-coefficient operators.
    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn dealias_enabled(&self) -> bool {
        self.dealias
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `|k|² = 4π²|ξ|²` per spectral index, Nyquist bins included.
    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let g = &self.grid;
        for axis in 0..g.dim() {
            let plan = &self.plans[axis];
            let fft = if inverse { &plan.inverse } else { &plan.forward };
            transform_axis(data, g, axis, fft.as_ref());
        }
    }

    pub fn forward(&self, f: &RealField) -> Result<SpectralField> {
        self.grid.check_same(f.grid())?;
        let mut data: Vec<Complex64> =
            f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        Ok(SpectralField::from_parts(self.grid, data))
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&self, f: &SpectralField) -> Result<RealField> {
        self.grid.check_same(f.grid())?;
        let mut data = f.coeffs().to_vec();
        self.transform(&mut data, true);
        let scale = 1.0 / self.grid.len() as f64;
        let values = data.iter().map(|c| c.re * scale).collect();
        Ok(RealField::from_parts(self.grid, values))
    }

    /// Multiplies every coefficient by the symbol value at its frequency.
    pub fn apply_symbol(&self, f: &SpectralField, s: &DiagonalSymbol) -> Result<SpectralField> {
        self.grid.check_same(f.grid())?;
        self.grid.check_same(s.grid())?;
        let coeffs = f
            .coeffs()
            .iter()
            .zip(s.values())
            .map(|(c, &v)| c * v)
            .collect();
        Ok(SpectralField::from_parts(self.grid, coeffs))
    }

    /// Applies a real symbol to a real field.
    pub fn filter(&self, f: &RealField, s: &DiagonalSymbol) -> Result<RealField> {
        let hat = self.forward(f)?;
        self.inverse(&self.apply_symbol(&hat, s)?)
    }

    /// `Δf` with symbol `−|k|²`.
    pub fn laplacian(&self, f: &RealField) -> Result<RealField> {
        let mut hat = self.forward(f)?;
        for (c, &k2) in hat.coeffs_mut().iter_mut().zip(&self.k2) {
            *c *= -k2;
        }
        self.inverse(&hat)
    }

    /// Forward transforms of two real fields through one complex transform.
    fn forward_pair(&self, f: &RealField, g: &RealField) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        self.grid.check_same(f.grid())?;
        self.grid.check_same(g.grid())?;
        let mut z: Vec<Complex64> = f
            .values()
            .iter()
            .zip(g.values())
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        self.transform(&mut z, false);
        let (mut fh, mut gh) = (Vec::with_capacity(z.len()), Vec::with_capacity(z.len()));
        for (k, zk) in z.iter().enumerate() {
            let zm = z[self.mirror[k]].conj();
            fh.push((zk + zm) * 0.5);
            let d = (zk - zm) * 0.5;
            gh.push(Complex64::new(d.im, -d.re));
        }
        Ok((fh, gh))
    }

    /// Real parts of the inverse transforms of `a` and `b`, through one
    /// complex transform.
    fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> (RealField, RealField) {
        let mut z: Vec<Complex64> = (0..a.len())
            .map(|k| {
                let m = self.mirror[k];
                // Hermitian parts, whose inverses are the real parts.
                let ah = (a[k] + a[m].conj()) * 0.5;
                let bh = (b[k] + b[m].conj()) * 0.5;
                ah + Complex64::new(-bh.im, bh.re)
            })
            .collect();
        self.transform(&mut z, true);
        let scale = 1.0 / self.grid.len() as f64;
        let re = z.iter().map(|c| c.re * scale).collect();
        let im = z.iter().map(|c| c.im * scale).collect();
        (
            RealField::from_parts(self.grid, re),
            RealField::from_parts(self.grid, im),
        )
    }

    /// Real inverse transforms of several spectra, two at a time.
    fn inverse_many(&self, spectra: &[Vec<Complex64>]) -> Vec<RealField> {
        let mut out = Vec::with_capacity(spectra.len());
        for chunk in spectra.chunks(2) {
            if let [a, b] = chunk {
                let (x, y) = self.inverse_pair(a, b);
                out.push(x);
                out.push(y);
            } else {
                let mut z = chunk[0].clone();
                self.transform(&mut z, true);
                let scale = 1.0 / self.grid.len() as f64;
                let values = z.iter().map(|c| c.re * scale).collect();
                out.push(RealField::from_parts(self.grid, values));
            }
        }
        out
    }

    /// Forward transforms of several real fields, two at a time.
    fn forward_many(&self, fields: &[RealField]) -> Result<Vec<Vec<Complex64>>> {
        let mut out = Vec::with_capacity(fields.len());
        for chunk in fields.chunks(2) {
            if let [f, g] = chunk {
                let (a, b) = self.forward_pair(f, g)?;
                out.push(a);
                out.push(b);
            } else {
                out.push(self.forward(&chunk[0])?.into_coeffs());
            }
        }
        Ok(out)
    }

    fn gradient_spectra(&self, hat: &[Complex64]) -> Vec<Vec<Complex64>> {
        (0..self.grid.dim())
            .map(|axis| {
                let mut h = hat.to_vec();
                self.multiply_ik(&mut h, axis);
                h
            })
            .collect()
    }

    /// `∂_α f` for every axis, with symbol `i k_α` and the Nyquist mode dropped.
    pub fn grad(&self, f: &RealField) -> Result<Vec<RealField>> {
        let hat = self.forward(f)?;
        Ok(self.inverse_many(&self.gradient_spectra(hat.coeffs())))
    }

    /// `Σ_α ∂_α v_α`, the negative adjoint of [`Self::grad`].
    pub fn div(&self, v: &[RealField]) -> Result<RealField> {
        self.div_masked(v, false)
    }

    fn div_masked(&self, v: &[RealField], mask: bool) -> Result<RealField> {
        if v.len() != self.grid.dim() {
            return Err(Error::GridMismatch(format!(
                "divergence of {} components on a {}-d grid",
                v.len(),
                self.grid.dim()
            )));
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (axis, mut hat) in self.forward_many(v)?.into_iter().enumerate() {
            self.multiply_ik(&mut hat, axis);
            for (a, h) in acc.iter_mut().zip(&hat) {
                *a += h;
            }
        }
        if mask {
            self.apply_mask(&mut acc);
        }
        self.inverse(&SpectralField::from_parts(self.grid, acc))
    }

    fn multiply_ik(&self, coeffs: &mut [Complex64], axis: usize) {
        let g = &self.grid;
        let stride = g.stride(axis);
        let k = &self.deriv[axis];
        for block in coeffs.chunks_mut(g.shape()[axis] * stride) {
            for (line, &ki) in block.chunks_mut(stride).zip(k) {
                for c in line {
                    *c = Complex64::new(-c.im * ki, c.re * ki);
                }
            }
        }
    }

    fn apply_mask(&self, coeffs: &mut [Complex64]) {
        for (c, &keep) in coeffs.iter_mut().zip(&self.keep) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Zeroes every mode with `|k_α| > N_α/3` on some axis.
    pub fn dealias_filter(&self, f: &RealField) -> Result<RealField> {
        let mut hat = self.forward(f)?;
        self.apply_mask(hat.coeffs_mut());
        self.inverse(&hat)
    }

    /// Nodewise product, followed by the 2/3-rule filter when enabled.
    pub fn product(&self, f: &RealField, g: &RealField) -> Result<RealField> {
        let p = f.mul(g)?;
        check_finite(&p)?;
        if self.dealias {
            self.dealias_filter(&p)
        } else {
            Ok(p)
        }
    }

    /// `−div(a ∇μ)` with the coefficient applied in physical space.
    ///
    /// With dealiasing on, the 2/3 rule acts on the flux `a∇μ`; since it
    /// commutes with the derivative it is applied once to the divergence.
    pub fn neg_div_coef_grad(&self, a: &RealField, mu: &RealField) -> Result<RealField> {
        self.grid.check_same(a.grid())?;
        let flux: Vec<RealField> = self
            .grad(mu)?
            .iter()
            .map(|g| a.mul(g))
            .collect::<Result<_>>()?;
        let mut out = self.div_masked(&flux, self.dealias)?;
        crate::linop::VectorSpace::scale_mut(&mut out, -1.0);
        Ok(out)
    }

    /// `∫ a |∇μ|²` by the rectangle rule.
    pub fn weighted_dirichlet(&self, a: &RealField, mu: &RealField) -> Result<f64> {
        self.weighted_cross(a, mu, mu)
    }

    /// `∫ a ∇μ·∇ν`.
    pub fn weighted_cross(&self, a: &RealField, mu: &RealField, nu: &RealField) -> Result<f64> {
        let gm = self.grad(mu)?;
        let gn = if std::ptr::eq(mu, nu) {
            gm.clone()
        } else {
            self.grad(nu)?
        };
        let mut s = 0.0;
        for (x, y) in gm.iter().zip(&gn) {
            s += x
                .values()
                .iter()
                .zip(y.values())
                .zip(a.values())
                .map(|((p, q), w)| w * p * q)
                .sum::<f64>();
        }
        Ok(s * self.grid.cell_volume())
    }

    /// `∫|∇f|²` from the spectrum, `(∏h/∏N) Σ |k|² |c_k|²`.
    pub fn dirichlet_energy(&self, f: &RealField) -> Result<f64> {
        let hat = self.forward(f)?;
        let s: f64 = hat
            .coeffs()
            .iter()
            .zip(&self.k2)
            .map(|(c, k2)| k2 * c.norm_sqr())
            .sum();
        Ok(s * self.grid.cell_volume() / self.grid.len() as f64)
    }

    /// Solves `[[1, s₁], [s₂, 1]] (û, μ̂) = (r̂_u, r̂_μ)` mode by mode.
    pub fn block_solve(
        &self,
        s1: &DiagonalSymbol,
        s2: &DiagonalSymbol,
        rhs_u: &RealField,
        rhs_mu: &RealField,
    ) -> Result<(RealField, RealField)> {
        self.grid.check_same(s1.grid())?;
        self.grid.check_same(s2.grid())?;
        let det: Vec<f64> = s1
            .values()
            .iter()
            .zip(s2.values())
            .map(|(a, b)| 1.0 - a * b)
            .collect();
        if let Some((flat, &d)) = det
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.abs() >= DET_FLOOR))
        {
            return Err(Error::IllPosedSymbol {
                frequency: self.grid.frequencies_of(flat),
                det: d,
                floor: DET_FLOOR,
            });
        }
        let (ru, rm) = self.forward_pair(rhs_u, rhs_mu)?;
        let n = self.grid.len();
        let mut u = Vec::with_capacity(n);
        let mut mu = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (s1.values()[i], s2.values()[i]);
            let (x, y) = (ru[i], rm[i]);
            u.push((x - y * a) / det[i]);
            mu.push((y - x * b) / det[i]);
        }
        Ok(self.inverse_pair(&u, &mu))
    }
}

fn check_finite(f: &RealField) -> Result<()> {
    if crate::linop::VectorSpace::is_finite(f) {
        Ok(())
    } else {
        Err(Error::NonFinite("pointwise product"))
    }
}

/// In-place 1D transforms of every line along `axis`.
fn transform_axis(data: &mut [Complex64], grid: &GridSpec, axis: usize, fft: &dyn Fft<f64>) {
    let n = grid.shape()[axis];
    let stride = grid.stride(axis);
    let parallel = data.len() >= PAR_THRESHOLD && rayon::current_num_threads() > 1;


    if stride == 1 {
        // Contiguous lines: rustfft processes any multiple of n in one call.
        if parallel {
            data.par_chunks_mut(n * 64).for_each(|c| fft.process(c));
        } else {
            with_buffers(0, fft.get_inplace_scratch_len(), |_, scratch| {
                fft.process_with_scratch(data, scratch)
            });
        }
        return;
    }

    // Each block of `n` rows by `stride` columns is transposed so the lines
    // become contiguous, transformed, and transposed back.
    let block = n * stride;
    let run = |chunk: &mut [Complex64], buf: &mut [Complex64], scratch: &mut [Complex64]| {
        transpose(chunk, buf, n, stride);
        fft.process_with_scratch(buf, scratch);
        transpose(buf, chunk, stride, n);
    };
    if parallel && data.len() > block {
        data.par_chunks_mut(block).for_each(|chunk| {
            with_buffers(block, fft.get_inplace_scratch_len(), |buf, scratch| run(chunk, buf, scratch))
        });
    } else {
        with_buffers(block, fft.get_inplace_scratch_len(), |buf, scratch| {
            for chunk in data.chunks_mut(block) {
                run(chunk, buf, scratch);
            }
        });
    }
}

thread_local! {
    static BUFFERS: std::cell::RefCell<(Vec<Complex64>, Vec<Complex64>)> =
        const { std::cell::RefCell::new((Vec::new(), Vec::new())) };
}

/// Runs `f` with per-thread transpose and FFT scratch buffers of at least the
/// given lengths; reusing them avoids page-faulting fresh memory on every
/// transform.
fn with_buffers<R>(len: usize, scratch_len: usize, f: impl FnOnce(&mut [Complex64], &mut [Complex64]) -> R) -> R {
    BUFFERS.with(|cell| match cell.try_borrow_mut() {
        Ok(mut bufs) => {
            let (buf, scratch) = &mut *bufs;
            let zero = Complex64::new(0.0, 0.0);
            if buf.len() < len {
                buf.resize(len, zero);
            }
            if scratch.len() < scratch_len {
                scratch.resize(scratch_len, zero);
            }
            f(&mut buf[..len], &mut scratch[..scratch_len])
        }
        // Re-entered from a nested rayon task on the same thread.
        Err(_) => {
            let zero = Complex64::new(0.0, 0.0);
            f(&mut vec![zero; len], &mut vec![zero; scratch_len])
        }
    })
}

/// `dst = srcᵀ` for a row-major `rows × cols` matrix, in cache-sized tiles.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const TILE: usize = 16;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// One-off forward transform; prefer a reused [`Spectral`] in loops.
pub fn forward(f: &RealField) -> SpectralField {
    Spectral::new(*f.grid())
        .forward(f)
        .expect("plan built for the field's own grid")
}

/// One-off inverse transform.
pub fn inverse(f: &SpectralField) -> RealField {
    Spectral::new(*f.grid())
        .inverse(f)
        .expect("plan built for the field's own grid")
}
