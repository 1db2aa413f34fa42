//! First- and second-order time steppers for `u_t = −L*L μ`, `μ = ∇E(u)`
//! with the mobility split `L*L = L₁*L₁ − L₂*L₂`.
//!
//! All SAV-type steppers solve two block systems sharing the same operator
//! and recombine them with the scalar `r`, which tracks `√J₂(μ)`:
//!
//! 1. `(u₁, μ₁)` from the homogeneous right-hand side, `(u₂, μ₂)` from the
//!    explicit `L₂*L₂` direction;
//! 2. `r` from a scalar equation in `h(μ) = ⟨L₂*L₂μ_ref, μ⟩ / (2√J₂(μ_ref))`;
//! 3. `u = u₁ + r u₂`, `μ = μ₁ + r μ₂`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{MobilitySplit, QuadraticEnergy, VectorSpace};
use crate::error::{Error, Result};

/// Denominators `1 − h(μ₂)` closer to zero than this are rejected.
pub const SINGULAR_DENOMINATOR: f64 = 1e-14;

/// The evolving `(u, μ, r)` triple of a flow.
#[derive(Debug, Clone, PartialEq)]
pub struct SavState<V> {
    pub u: V,
    pub mu: V,
    pub r: f64,
    pub step_index: usize,
    /// Set when the `max(r, 0)` clamp fired on the step that produced this state.
    pub r_clamped: bool,
}

impl<V: VectorSpace> SavState<V> {
    /// Consistent initial state: `μ = ∇E(u)` and `r = √J₂(μ)`.
    pub fn new<E, M, K>(u: V, energy: &E, split: &M) -> Self
    where
        E: QuadraticEnergy<Vector = V, Kernel = K>,
        M: MobilitySplit<Vector = V, Kernel = K>,
        K: ?Sized,
    {
        let mu = energy.gradient(&u);
        let r = split.j2(&mu).max(0.0).sqrt();
        SavState {
            u,
            mu,
            r,
            step_index: 0,
            r_clamped: false,
        }
    }
}

/// Per-step observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub e_value: f64,
    pub j_value: f64,
    /// `J̃(μ, r) = J₁(μ) − r²`.
    pub j_tilde_value: f64,
    pub r_value: f64,
    /// `√J₂(μ)` recomputed from the state.
    pub r_exact: f64,
    pub fallback_used: bool,
    pub r_clamped: bool,
}

impl StepReport {
    /// Observables of a state, with the step flags cleared.
    pub fn of_state<E, M, V, K>(state: &SavState<V>, energy: &E, split: &M) -> Self
    where
        V: VectorSpace,
        E: QuadraticEnergy<Vector = V, Kernel = K>,
        M: MobilitySplit<Vector = V, Kernel = K>,
        K: ?Sized,
    {
        let j1 = split.j1(&state.mu);
        let j2 = split.j2(&state.mu);
        StepReport {
            e_value: energy.value(&state.u),
            j_value: j1 - j2,
            j_tilde_value: j1 - state.r * state.r,
            r_value: state.r,
            r_exact: j2.max(0.0).sqrt(),
            fallback_used: false,
            r_clamped: state.r_clamped,
        }
    }
}

/// Knobs shared by the SAV steppers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeOptions {
    /// Replace a negative `r` by zero.
    pub clamp: bool,
    /// Constant added under every `√J₂` in denominators.
    pub c0: f64,
    /// Fallback threshold on `√J₂`; `None` means `1e-14 (1 + ‖μ‖²)`.
    pub j2_floor: Option<f64>,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        SchemeOptions {
            clamp: true,
            c0: 0.0,
            j2_floor: None,
        }
    }
}

impl SchemeOptions {
    pub fn unclamped() -> Self {
        SchemeOptions {
            clamp: false,
            ..Self::default()
        }
    }

    fn floor_for<V: VectorSpace>(&self, mu: &V) -> f64 {
        self.j2_floor
            .unwrap_or_else(|| 1e-14 * (1.0 + mu.dot(mu)))
    }
}

/// First-order stepper used to predict `μ̃ⁿ⁺¹` in the second-order schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predictor {
    Cvx,
    #[default]
    MbSav1,
    MbSav1Plus,
}

/// Scheme selector for [`step`] and [`super::run_flow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    CvxSplit,
    MbSav1,
    MbSav1Plus,
    MbSav2(Predictor),
    MbSav2Plus(Predictor),
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::CvxSplit,
        Scheme::MbSav1,
        Scheme::MbSav1Plus,
        Scheme::MbSav2(Predictor::MbSav1),
        Scheme::MbSav2Plus(Predictor::MbSav1),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::CvxSplit => "cvx",
            Scheme::MbSav1 => "mbsav1",
            Scheme::MbSav1Plus => "mbsav1plus",
            Scheme::MbSav2(_) => "mbsav2",
            Scheme::MbSav2Plus(_) => "mbsav2plus",
        }
    }

    pub fn is_sav(&self) -> bool {
        !matches!(self, Scheme::CvxSplit)
    }

    /// Nominal order of accuracy in time.
    pub fn order(&self) -> u32 {
        match self {
            Scheme::MbSav2(_) | Scheme::MbSav2Plus(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cvx" => Scheme::CvxSplit,
            "mbsav1" => Scheme::MbSav1,
            "mbsav1plus" => Scheme::MbSav1Plus,
            "mbsav2" => Scheme::MbSav2(Predictor::default()),
            "mbsav2plus" => Scheme::MbSav2Plus(Predictor::default()),
            other => return Err(Error::InvalidParameter(format!("unknown scheme `{other}`"))),
        })
    }
}

/// Explicit data evaluated at the reference point `μ_ref` of a step.
struct Explicit<V> {
    /// `L₂*L₂ μ_ref`.
    g: V,
    /// `√(J₂(μ_ref) + c0)`.
    sqrt_j2: f64,
    fallback: bool,
}

impl<V: VectorSpace> Explicit<V> {
    fn new<M, K>(split: &M, mu_ref: &V, opts: &SchemeOptions) -> Result<Self>
    where
        M: MobilitySplit<Vector = V, Kernel = K>,
        K: ?Sized,
    {
        let g = split.apply_l2tl2(mu_ref);
        let mut j2 = 0.5 * g.dot(mu_ref);
        if !j2.is_finite() {
            return Err(Error::NonFinite("J2 evaluation"));
        }
        let mut fallback = false;
        let negative_tol = 1e-12 * (g.norm() * mu_ref.norm()).max(1.0);
        if j2 < -negative_tol {
            split.on_negative_j2(j2)?;
            fallback = true;
        }
        j2 = j2.max(0.0);
        if j2.sqrt() <= opts.floor_for(mu_ref) {
            fallback = true;
        }
        Ok(Explicit {
            g,
            sqrt_j2: (j2 + opts.c0).sqrt(),
            fallback,
        })
    }

    /// `h(μ) = ⟨L₂*L₂ μ_ref, μ⟩ / (2 √(J₂(μ_ref) + c0))`.
    fn h(&self, mu: &V) -> f64 {
        self.g.dot(mu) / (2.0 * self.sqrt_j2)
    }
}

fn check_finite<V: VectorSpace>(v: &V, what: &'static str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn finish<E, M, V, K>(
    prev: &SavState<V>,
    u: V,
    mu: V,
    r: f64,
    clamped: bool,
    fallback: bool,
    energy: &E,
    split: &M,
) -> Result<(SavState<V>, StepReport)>
where
    V: VectorSpace,
    E: QuadraticEnergy<Vector = V, Kernel = K>,
    M: MobilitySplit<Vector = V, Kernel = K>,
    K: ?Sized,
{
    check_finite(&u, "u update")?;
    check_finite(&mu, "mu update")?;
    let next = SavState {
        u,
        mu,
        r,
        step_index: prev.step_index + 1,
        r_clamped: clamped,
    };
    let mut report = StepReport::of_state(&next, energy, split);
    report.fallback_used = fallback;
    Ok((next, report))
}

fn clamp_r(r: f64, opts: &SchemeOptions) -> (f64, bool) {
    if opts.clamp && r < 0.0 {
        (0.0, true)
    } else {
        (r, false)
    }
}

fn checked_denominator(den: f64, quantity: &'static str) -> Result<f64> {
    if den.abs() <= SINGULAR_DENOMINATOR {
        Err(Error::SingularUpdate {
            quantity,
            value: den,
        })
    } else {
        Ok(den)
    }
}

/// Convex-concave splitting of the mobility: `L₁` implicit, `L₂` explicit,
/// no auxiliary variable. The output `r` is `√J₂(μⁿ⁺¹)`.
pub fn cvx_split_step<E, M, V, K>(
    state: &SavState<V>,
    energy: &E,
    split: &M,
    dt: f64,
) -> Result<(SavState<V>, StepReport)>
where
    V: VectorSpace,
    E: QuadraticEnergy<Vector = V, Kernel = K>,
    M: MobilitySplit<Vector = V, Kernel = K>,
    K: ?Sized,
{
    positive_dt(dt)?;
    let explicit = split.apply_l2tl2(&state.mu);
    let rhs_u = state.u.plus_scaled(dt, &explicit);
    let rhs_mu = energy.atb().scaled(-1.0);
    let (u, mu) = energy.block_solve(dt, split.implicit_kernel(), &rhs_u, &rhs_mu)?;
    let r = split.j2(&mu).max(0.0).sqrt();
    finish(state, u, mu, r, false, false, energy, split)
}

fn positive_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")))
    }
}

fn sav1_impl<E, M, V, K>(
    state: &SavState<V>,
    energy: &E,
    split: &M,
    dt: f64,
    opts: &SchemeOptions,
    plus: bool,
) -> Result<(SavState<V>, StepReport)>
where
    V: VectorSpace,
    E: QuadraticEnergy<Vector = V, Kernel = K>,
    M: MobilitySplit<Vector = V, Kernel = K>,
    K: ?Sized,
{
    positive_dt(dt)?;
    let kernel = split.implicit_kernel();
    let minus_atb = energy.atb().scaled(-1.0);
    let ex = Explicit::new(split, &state.mu, opts)?;

    if ex.fallback {
        // Pure implicit L₁ flow; r is carried as zero.
        let (u, mu) = energy.block_solve(dt, kernel, &state.u, &minus_atb)?;
        return finish(state, u, mu, 0.0, false, true, energy, split);
    }

    let (u1, mu1) = energy.block_solve(dt, kernel, &state.u, &minus_atb)?;
    let rhs2 = ex.g.scaled(dt / ex.sqrt_j2);
    let zero = rhs2.zeros_like();
    let (u2, mu2) = energy.block_solve(dt, kernel, &rhs2, &zero)?;

    let numerator = if plus {
        // r̃ⁿ = h(μⁿ), which is √J₂(μⁿ) when c0 = 0.
        ex.h(&mu1)
    } else {
        state.r - ex.h(&state.mu) + ex.h(&mu1)
    };
    let den = checked_denominator(1.0 - ex.h(&mu2), "h(mu_2)")?;
    let (r, clamped) = clamp_r(numerator / den, opts);

    let u = u1.plus_scaled(r, &u2);
    let mu = mu1.plus_scaled(r, &mu2);
    finish(state, u, mu, r, clamped, false, energy, split)
}

/// First-order mobility-relaxed SAV step.
pub fn mb_sav1_step<E, M, V, K>(
    state: &SavState<V>,
    energy: &E,
    split: &M,
    dt: f64,
    opts: &SchemeOptions,
) -> Result<(SavState<V>, StepReport)>
where
    V: VectorSpace,
    E: QuadraticEnergy<Vector = V, Kernel = K>,
    M: MobilitySplit<Vector = V, Kernel = K>,
    K: ?Sized,
{
    sav1_impl(state, energy, split, dt, opts, false)
}

/// First-order step with `rⁿ` reset to `√J₂(μⁿ)` before the update.
pub fn mb_sav1_plus_step<E, M, V, K>(
    state: &SavState<V>,
    energy: &E,
    split: &M,
    dt: f64,
    opts: &SchemeOptions,
) -> Result<(SavState<V>, StepReport)>
where
    V: VectorSpace,
    E: QuadraticEnergy<Vector = V, Kernel = K>,
    M: MobilitySplit<Vector = V, Kernel = K>,
    K: ?Sized,
{
    sav1_impl(state, energy, split, dt, opts, true)
}

fn predict<E, M, V, K>(
    state: &SavState<V>,
    energy: &E,
    split: &M,
    dt: f64,
    opts: &SchemeOptions,
    predictor: Predictor,
) -> Result<V>
where
    V: VectorSpace,
    E: QuadraticEnergy<Vector = V, Kernel = K>,
    M: MobilitySplit<Vector = V, Kernel = K>,
    K: ?Sized,
{
    let (next, _) = match predictor {
        Predictor::Cvx => cvx_split_step(state, energy, split, dt)?,
        Predictor::MbSav1 => mb_sav1_step(state, energy, split, dt, opts)?,
        Predictor::MbSav1Plus => mb_sav1_plus_step(state, energy, split, dt, opts)?,
    };
    Ok(next.mu)
}

/// Second-order step given the first-order prediction `μ̃ⁿ⁺¹`.
///
/// With `plus`, the r-update starts from `√J₂(μⁿ)` instead of the stored
/// `rⁿ`; the recombination coefficient `(rⁿ⁺¹ + rⁿ)/2` always uses the
/// stored value.
pub fn mb_sav2_step_with_prediction<E, M, V, K>(
    state: &SavState<V>,
    energy: &E,
    split: &M,
    dt: f64,
    opts: &SchemeOptions,
    mu_tilde: &V,
    plus: bool,
) -> Result<(SavState<V>, StepReport)>
where
    V: VectorSpace,
    E: QuadraticEnergy<Vector = V, Kernel = K>,
    M: MobilitySplit<Vector = V, Kernel = K>,
    K: ?Sized,
{
    positive_dt(dt)?;
    let half = 0.5 * dt;
    let kernel = split.implicit_kernel();
    let minus_atb = energy.atb().scaled(-1.0);

    let mut mu_half = state.mu.clone();
    mu_half.axpy(1.0, mu_tilde);
    mu_half.scale_mut(0.5);
    let ex = Explicit::new(split, &mu_half, opts)?;

    let rhs1_u = state.u.plus_scaled(-half, &split.apply_l1tl1(&state.mu));
    if ex.fallback {
        let (u, mu) = energy.block_solve(half, kernel, &rhs1_u, &minus_atb)?;
        return finish(state, u, mu, 0.0, false, true, energy, split);
    }

    let (u1, mu1) = energy.block_solve(half, kernel, &rhs1_u, &minus_atb)?;
    let rhs2 = ex.g.scaled(dt / ex.sqrt_j2);
    let zero = rhs2.zeros_like();
    let (u2, mu2) = energy.block_solve(half, kernel, &rhs2, &zero)?;

    let r_start = if plus {
        split.j2(&state.mu).max(0.0).sqrt()
    } else {
        state.r
    };
    let h2 = ex.h(&mu2);
    let numerator = r_start - ex.h(&state.mu) + ex.h(&mu1) + 0.5 * state.r * h2;
    let den = checked_denominator(1.0 - 0.5 * h2, "h(mu_2)/2")?;
    let (r, clamped) = clamp_r(numerator / den, opts);

    let r_mid = 0.5 * (r + state.r);
    let u = u1.plus_scaled(r_mid, &u2);
    let mu = mu1.plus_scaled(r_mid, &mu2);
    finish(state, u, mu, r, clamped, false, energy, split)
}

/// Second-order mobility-relaxed SAV step.
pub fn mb_sav2_step<E, M, V, K>(
    state: &SavState<V>,
    energy: &E,
    split: &M,
    dt: f64,
    opts: &SchemeOptions,
    predictor: Predictor,
) -> Result<(SavState<V>, StepReport)>
where
    V: VectorSpace,
    E: QuadraticEnergy<Vector = V, Kernel = K>,
    M: MobilitySplit<Vector = V, Kernel = K>,
    K: ?Sized,
{
    let mu_tilde = predict(state, energy, split, dt, opts, predictor)?;
    mb_sav2_step_with_prediction(state, energy, split, dt, opts, &mu_tilde, false)
}

/// Second-order step with the `√J₂(μⁿ)` reset in the r-update.
pub fn mb_sav2_plus_step<E, M, V, K>(
    state: &SavState<V>,
    energy: &E,
    split: &M,
    dt: f64,
    opts: &SchemeOptions,
    predictor: Predictor,
) -> Result<(SavState<V>, StepReport)>
where
    V: VectorSpace,
    E: QuadraticEnergy<Vector = V, Kernel = K>,
    M: MobilitySplit<Vector = V, Kernel = K>,
    K: ?Sized,
{
    let mu_tilde = predict(state, energy, split, dt, opts, predictor)?;
    mb_sav2_step_with_prediction(state, energy, split, dt, opts, &mu_tilde, true)
}

/// Dispatches one step of `scheme`.
pub fn step<E, M, V, K>(
    scheme: Scheme,
    state: &SavState<V>,
    energy: &E,
    split: &M,
    dt: f64,
    opts: &SchemeOptions,
) -> Result<(SavState<V>, StepReport)>
where
    V: VectorSpace,
    E: QuadraticEnergy<Vector = V, Kernel = K>,
    M: MobilitySplit<Vector = V, Kernel = K>,
    K: ?Sized,
{
    match scheme {
        Scheme::CvxSplit => cvx_split_step(state, energy, split, dt),
        Scheme::MbSav1 => mb_sav1_step(state, energy, split, dt, opts),
        Scheme::MbSav1Plus => mb_sav1_plus_step(state, energy, split, dt, opts),
        Scheme::MbSav2(p) => mb_sav2_step(state, energy, split, dt, opts, p),
        Scheme::MbSav2Plus(p) => mb_sav2_plus_step(state, energy, split, dt, opts, p),
    }
}
