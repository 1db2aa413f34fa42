//! Dense reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use mobsav::spectral::{GridSpec, RealField};
use nalgebra::{DMatrix, DVector};

/// First-derivative Fourier matrix on `n` equispaced points of `[0, l)`:
/// `D[i][j] = ½ (−1)^{i−j} cot((i−j)h/2)` for `h = 2π/n`, rescaled to `l`.
pub fn fourier_d1(n: usize, l: f64) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let m = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * sign / (0.5 * m * h).tan()
        }
    }) * (2.0 * PI / l)
}

/// Second-derivative Fourier matrix:
/// diagonal `−π²/(3h²) − 1/6`, off-diagonal `−(−1)^{i−j} / (2 sin²((i−j)h/2))`.
pub fn fourier_d2(n: usize, l: f64) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -PI * PI / (3.0 * h * h) - 1.0 / 6.0
        } else {
            let m = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            -sign / (2.0 * (0.5 * m * h).sin().powi(2))
        }
    }) * (2.0 * PI / l).powi(2)
}

/// Embeds a 1-D operator on `axis` into the row-major tensor grid.
fn on_axis(grid: &GridSpec, axis: usize, op: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::identity(1, 1);
    for a in 0..grid.dim() {
        let n = grid.shape()[a];
        let factor = if a == axis { op.clone() } else { DMatrix::identity(n, n) };
        m = m.kronecker(&factor);
    }
    m
}

pub fn partial(grid: &GridSpec, axis: usize) -> DMatrix<f64> {
    on_axis(grid, axis, &fourier_d1(grid.shape()[axis], grid.lengths()[axis]))
}

pub fn laplacian(grid: &GridSpec) -> DMatrix<f64> {
    let n = grid.len();
    (0..grid.dim()).fold(DMatrix::zeros(n, n), |acc, a| {
        acc + on_axis(grid, a, &fourier_d2(grid.shape()[a], grid.lengths()[a]))
    })
}

/// `−div(a ∇·)` as `−Σ_α D_α diag(a) D_α`.
pub fn neg_div_coef_grad(grid: &GridSpec, a: &[f64]) -> DMatrix<f64> {
    let n = grid.len();
    let diag = DMatrix::from_diagonal(&DVector::from_column_slice(a));
    (0..grid.dim()).fold(DMatrix::zeros(n, n), |acc, ax| {
        let d = partial(grid, ax);
        acc - &d * &diag * &d
    })
}

pub fn vec_of(f: &RealField) -> DVector<f64> {
    DVector::from_column_slice(f.values())
}

pub fn field_of(grid: GridSpec, v: &DVector<f64>) -> RealField {
    RealField::new(grid, v.iter().copied().collect()).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// A smooth random periodic field: a few low modes with seeded amplitudes.
pub fn smooth_random(grid: GridSpec, seed: u64, modes: i64) -> RealField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let mut terms = Vec::new();
    let ranges: Vec<std::ops::RangeInclusive<i64>> =
        (0..3).map(|a| if a < d { -modes..=modes } else { 0..=0 }).collect();
    for k0 in ranges[0].clone() {
        for k1 in ranges[1].clone() {
            for k2 in ranges[2].clone() {
                let amp: f64 = rng.gen_range(-1.0..1.0);
                let phase: f64 = rng.gen_range(0.0..2.0 * PI);
                terms.push(([k0 as f64, k1 as f64, k2 as f64], amp, phase));
            }
        }
    }
    let l = grid.lengths().to_vec();
    RealField::from_fn(grid, move |x| {
        terms
            .iter()
            .map(|(k, amp, ph)| {
                let arg: f64 = (0..x.len()).map(|a| 2.0 * PI * k[a] * x[a] / l[a]).sum();
                amp * (arg + ph).cos()
            })
            .sum::<f64>()
            / terms.len() as f64
    })
}

/// Random field with every mode present, Nyquist included.
pub fn rough_random(grid: GridSpec, seed: u64) -> RealField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let v = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    RealField::new(grid, v).unwrap()
}

/// A linear gradient flow written out as explicit matrices, with the inner
/// product `⟨x, y⟩ = w xᵀy`.
pub struct DenseFlow {
    pub ata: DMatrix<f64>,
    pub atb: DVector<f64>,
    /// Implicit mobility operator `L₁*L₁`.
    pub k1: DMatrix<f64>,
    /// Explicit mobility operator `L₂*L₂`.
    pub k2: DMatrix<f64>,
    pub w: f64,
    pub c0: f64,
}

/// Which update the monolithic oracle solves.
#[derive(Clone, Copy, Debug)]
pub enum OracleScheme {
    Sav1,
    Sav1Plus,
    Sav2,
    Sav2Plus,
}

impl DenseFlow {
    pub fn gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.ata * u - &self.atb
    }

    pub fn j2(&self, mu: &DVector<f64>) -> f64 {
        0.5 * self.w * mu.dot(&(&self.k2 * mu))
    }

    /// Convex-splitting step by eliminating `μ`:
    /// `(I + δt K₁ A*A) u = uⁿ + δt K₂ μⁿ + δt K₁ A*b`.
    pub fn cvx_step(&self, u: &DVector<f64>, mu: &DVector<f64>, dt: f64) -> (DVector<f64>, DVector<f64>) {
        let n = u.len();
        let lhs = DMatrix::<f64>::identity(n, n) + &self.k1 * &self.ata * dt;
        let rhs = u + &self.k2 * mu * dt + &self.k1 * &self.atb * dt;
        let u1 = lhs.full_piv_lu().solve(&rhs).expect("nonsingular");
        let mu1 = self.gradient(&u1);
        (u1, mu1)
    }

    /// One SAV-type step as a single `(2n+1)`-unknown linear system in
    /// `(u, μ, r)`. `mu_ref` is the point where the explicit direction is
    /// frozen (`μⁿ` for first order, the midpoint for second order).
    /// With `zero_r`, the scalar equation is replaced by `r = 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn sav_system(
        &self,
        u: &DVector<f64>,
        mu: &DVector<f64>,
        r: f64,
        mu_ref: &DVector<f64>,
        dt: f64,
        second_order: bool,
        reset: bool,
        zero_r: bool,
    ) -> (DVector<f64>, DVector<f64>, f64) {
        let n = u.len();
        let g = &self.k2 * mu_ref;
        let s = (self.j2(mu_ref).max(0.0) + self.c0).sqrt();
        let theta = if second_order { 0.5 } else { 1.0 };
        let mut m = DMatrix::<f64>::zeros(2 * n + 1, 2 * n + 1);
        let mut rhs = DVector::<f64>::zeros(2 * n + 1);
        // u + θ δt K₁ μ − θ_r δt r g/s = uⁿ − (1−θ) δt K₁ μⁿ + (1−θ_r) δt rⁿ g/s
        m.view_mut((0, 0), (n, n)).fill_with_identity();
        m.view_mut((0, n), (n, n)).copy_from(&(&self.k1 * (theta * dt)));
        m.view_mut((0, 2 * n), (n, 1)).copy_from(&(&g * (-theta * dt / s)));
        let explicit_r = if second_order { 0.5 * dt * r / s } else { 0.0 };
        rhs.rows_mut(0, n)
            .copy_from(&(u - &self.k1 * mu * ((1.0 - theta) * dt) + &g * explicit_r));
        // μ − A*A u = −A*b
        m.view_mut((n, 0), (n, n)).copy_from(&(-&self.ata));
        m.view_mut((n, n), (n, n)).fill_with_identity();
        rhs.rows_mut(n, n).copy_from(&(-&self.atb));
        // r − w⟨g, μ⟩/(2s) = r_start − w⟨g, μⁿ⟩/(2s)
        let h_n = self.w * g.dot(mu) / (2.0 * s);
        if zero_r {
            m[(2 * n, 2 * n)] = 1.0;
        } else {
            for j in 0..n {
                m[(2 * n, n + j)] = -self.w * g[j] / (2.0 * s);
            }
            m[(2 * n, 2 * n)] = 1.0;
            let r_start = if reset { self.j2(mu).max(0.0).sqrt() } else { r };
            rhs[2 * n] = r_start - h_n;
        }
        let x = m.full_piv_lu().solve(&rhs).expect("nonsingular");
        (x.rows(0, n).into_owned(), x.rows(n, n).into_owned(), x[2 * n])
    }

    /// Reference result of one step of `scheme`. Second-order schemes take
    /// their prediction from the first-order oracle.
    pub fn step(
        &self,
        scheme: OracleScheme,
        u: &DVector<f64>,
        mu: &DVector<f64>,
        r: f64,
        dt: f64,
    ) -> (DVector<f64>, DVector<f64>, f64) {
        match scheme {
            OracleScheme::Sav1 => self.sav_system(u, mu, r, mu, dt, false, false, false),
            OracleScheme::Sav1Plus => self.sav_system(u, mu, r, mu, dt, false, true, false),
            OracleScheme::Sav2 | OracleScheme::Sav2Plus => {
                let (_, mu_tilde, _) = self.sav_system(u, mu, r, mu, dt, false, false, false);
                let mid = (mu + mu_tilde) * 0.5;
                let reset = matches!(scheme, OracleScheme::Sav2Plus);
                self.sav_system(u, mu, r, &mid, dt, true, reset, false)
            }
        }
    }
}

/// Dense 2/3-rule projection on the tensor grid.
pub fn dealias_projection(grid: &GridSpec) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::identity(1, 1);
    for a in 0..grid.dim() {
        let n = grid.shape()[a];
        let kept: Vec<i64> = (0..n)
            .map(|i| if 2 * i < n { i as i64 } else { i as i64 - n as i64 })
            .filter(|k| 3 * k.unsigned_abs() as usize <= n)
            .collect();
        let p = DMatrix::from_fn(n, n, |i, j| {
            let d = i as f64 - j as f64;
            kept.iter()
                .map(|&k| (2.0 * PI * k as f64 * d / n as f64).cos())
                .sum::<f64>()
                / n as f64
        });
        m = m.kronecker(&p);
    }
    m
}

pub fn relative_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1e-300)
}

/// Dense form of one frozen-mobility Cahn-Hilliard step at `un`: the
/// linearised energy and the M-CH (`nmn = false`) or NMN splitting.
pub fn ch_dense_flow(grid: &GridSpec, un: &RealField, p: &mobsav::ch::ChParams, nmn: bool) -> DenseFlow {
    use mobsav::ch::potential::{mobility_mch, mobility_nmn, n_fun, w_prime};
    let n = grid.len();
    let c = p.alpha_over_eps2;
    let lap = laplacian(grid);
    let eye = DMatrix::<f64>::identity(n, n);
    let ata = -&lap + &eye * c;
    let atb = DVector::from_iterator(
        n,
        un.values().iter().map(|&s| -(w_prime(s) / (p.eps * p.eps) - c * s)),
    );
    let proj = if p.dealias {
        dealias_projection(grid)
    } else {
        eye.clone()
    };
    let (k1, k2) = if nmn {
        let k1 = -&lap * p.m + &eye * p.beta;
        let mob: Vec<f64> = un.values().iter().map(|&s| mobility_nmn(s, p.eps)).collect();
        let nd = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            un.values().iter().map(|&s| n_fun(s, p.eps)),
        ));
        let k2 = &k1 - &nd * &proj * neg_div_coef_grad(grid, &mob) * &nd;
        (k1, k2)
    } else {
        let deficit: Vec<f64> = un.values().iter().map(|&s| p.m - mobility_mch(s)).collect();
        (-&lap * p.m, &proj * neg_div_coef_grad(grid, &deficit))
    };
    DenseFlow {
        ata,
        atb,
        k1,
        k2,
        w: grid.cell_volume(),
        c0: p.c0,
    }
}
