mod common;

use common::{ch_dense_flow, relative_diff, smooth_random, vec_of, OracleScheme};
use mobsav::ch::potential::{mobility_mch, mobility_nmn, n_fun, q, w, w_prime};
use mobsav::ch::{
    ch_step, chemical_potential, component_count, energy_p_eps, eyre_step, initial_condition,
    mch_sav1_step, nmn_sav1_step, profile_slice, relaxed_energy, sav_classic_step, ChParams,
    ChScheme, ChState, MchSplit, NmnSplit, Shape,
};
use mobsav::linop::{increased, MobilitySplit, VectorSpace};
use mobsav::spectral::{GridSpec, RealField, Spectral};
use mobsav::Error;
use nalgebra::DVector;

fn grid(n: usize) -> GridSpec {
    GridSpec::cube(2, n).unwrap()
}

fn disk(n: usize, radius: f64) -> (GridSpec, RealField, f64) {
    let g = grid(n);
    let eps = 2.0 / n as f64;
    let shape = Shape::Disk {
        center: vec![0.5, 0.5],
        radius,
    };
    (g, initial_condition(&shape, g, eps).unwrap(), eps)
}

/// Steps `scheme` on an `n × n` disk and compares every step with the dense
/// monolithic solve from the same state.
fn shadow_run(n: usize, scheme: ChScheme, dealias: bool, m: f64, steps: usize) -> f64 {
    let (g, u0, eps) = disk(n, 0.3);
    let mut p = ChParams::scaled(eps, m);
    p.dealias = dealias;
    let sp = p.spectral(g);
    let mut st = ChState::initial(&sp, u0, &p, scheme).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..steps {
        let (next, info) = ch_step(scheme, &sp, &st, &p).unwrap();
        assert!(!info.fallback_used && !info.r_clamped);
        let flow = ch_dense_flow(&g, &st.u, &p, scheme == ChScheme::NmnSav1);
        let (u, mu, r) = flow.step(OracleScheme::Sav1Plus, &vec_of(&st.u), &vec_of(&st.mu), st.r, p.dt);
        worst = worst
            .max(relative_diff(&vec_of(&next.u), &u))
            .max(relative_diff(&vec_of(&next.mu), &mu))
            .max((next.r - r).abs() / r.abs().max(1.0));
        st = next;
    }
    worst
}

#[test]
fn mch_step_matches_dense_oracle() {
    for dealias in [false, true] {
        let err = shadow_run(16, ChScheme::MchSav1, dealias, 2.25, 20);
        assert!(err < 1e-9, "dealias={dealias}: {err:e}");
    }
}

#[test]
fn nmn_step_matches_dense_oracle() {
    // Without dealiasing this small grid keeps J₂ positive for m = 8.
    for (dealias, m) in [(true, 2.25), (false, 8.0)] {
        let err = shadow_run(16, ChScheme::NmnSav1, dealias, m, 20);
        assert!(err < 1e-9, "dealias={dealias}: {err:e}");
    }
}

#[test]
fn classic_sav_matches_dense_oracle() {
    // ½∫|∇u|² + r²/ε² with u-system [[I, δt(−Δ)], [Δ, I]] and the W' direction.
    let (g, u0, eps) = disk(16, 0.3);
    let p = ChParams::scaled(eps, 2.25);
    let sp = p.spectral(g);
    let st = ChState::initial(&sp, u0, &p, ChScheme::SavClassic).unwrap();
    let next = sav_classic_step(&sp, &st, &p).unwrap();

    let n = g.len();
    let lap = common::laplacian(&g);
    let wv = g.cell_volume();
    let un = vec_of(&st.u);
    let wp = un.map(w_prime);
    let s = (st.u.map(w).integral() + p.c0).sqrt();
    // Unknowns (u, μ, r): u − δtΔμ = uⁿ; μ + Δu − r W'(uⁿ)/(ε² s) = 0;
    // r − w⟨W'(uⁿ), u⟩/(2s) = rⁿ − w⟨W'(uⁿ), uⁿ⟩/(2s).
    let mut m = nalgebra::DMatrix::<f64>::zeros(2 * n + 1, 2 * n + 1);
    let mut rhs = DVector::<f64>::zeros(2 * n + 1);
    m.view_mut((0, 0), (n, n)).fill_with_identity();
    m.view_mut((0, n), (n, n)).copy_from(&(-&lap * p.dt));
    rhs.rows_mut(0, n).copy_from(&un);
    m.view_mut((n, 0), (n, n)).copy_from(&lap);
    m.view_mut((n, n), (n, n)).fill_with_identity();
    m.view_mut((n, 2 * n), (n, 1)).copy_from(&(&wp * (-1.0 / (eps * eps * s))));
    for j in 0..n {
        m[(2 * n, j)] = -wv * wp[j] / (2.0 * s);
    }
    m[(2 * n, 2 * n)] = 1.0;
    rhs[2 * n] = st.r - wv * wp.dot(&un) / (2.0 * s);
    let x = m.full_piv_lu().solve(&rhs).unwrap();
    assert!(relative_diff(&vec_of(&next.u), &x.rows(0, n).into_owned()) < 1e-9);
    assert!((next.r - x[2 * n]).abs() < 1e-9 * x[2 * n].abs());
}

#[test]
fn eyre_matches_fourier_formula() {
    let g = grid(32);
    let p = ChParams::scaled(2.0 / 32.0, 2.25);
    let sp = p.spectral(g);
    let u0 = smooth_random(g, 3, 4).map(|v| 0.5 + v);
    let st = ChState::initial(&sp, u0.clone(), &p, ChScheme::Eyre).unwrap();
    let next = eyre_step(&sp, &st, &p).unwrap();
    let c = p.alpha_over_eps2;
    let inv = 1.0 / (p.eps * p.eps);
    // û⁺ = [ûⁿ − δt k² (W'(uⁿ)/ε² − c uⁿ)^] / (1 + δt k² (k² + c))
    let forcing = u0.map(|s| w_prime(s) * inv - c * s);
    let fh = sp.forward(&forcing).unwrap();
    let mut uh = sp.forward(&u0).unwrap();
    for ((x, f), &k2) in uh.coeffs_mut().iter_mut().zip(fh.coeffs()).zip(sp.k2()) {
        *x = (*x - f * (p.dt * k2)) / (1.0 + p.dt * k2 * (k2 + c));
    }
    let want = sp.inverse(&uh).unwrap();
    assert!(common::max_abs_diff(next.u.values(), want.values()) < 1e-12);
}

#[test]
fn homogeneous_schemes_conserve_mass_and_decay() {
    let g = grid(32);
    let p = ChParams::scaled(2.0 / 32.0, 2.25);
    let sp = p.spectral(g);
    let u0 = smooth_random(g, 9, 3).map(|v| 0.5 + 0.5 * v);
    for scheme in [ChScheme::Eyre, ChScheme::SavClassic] {
        let mut st = ChState::initial(&sp, u0.clone(), &p, scheme).unwrap();
        let m0 = st.u.mean();
        let mut prev_p = energy_p_eps(&sp, &st.u, p.eps).unwrap();
        let mut prev_rel = relaxed_energy(&sp, &st.u, st.r, p.eps).unwrap();
        for _ in 0..200 {
            st = ch_step(scheme, &sp, &st, &p).unwrap().0;
            assert!((st.u.mean() - m0).abs() <= 1e-12 * (1.0 + m0.abs()));
            let pe = energy_p_eps(&sp, &st.u, p.eps).unwrap();
            let rel = relaxed_energy(&sp, &st.u, st.r, p.eps).unwrap();
            match scheme {
                ChScheme::Eyre => assert!(!increased(prev_p, pe), "{scheme}"),
                _ => assert!(!increased(prev_rel, rel), "{scheme}"),
            }
            prev_p = pe;
            prev_rel = rel;
        }
    }
}

#[test]
fn degenerate_schemes_decay_p_eps() {
    let (g, u0, eps) = disk(64, 0.25);
    for (scheme, dealias) in [(ChScheme::MchSav1, false), (ChScheme::NmnSav1, true)] {
        let mut p = ChParams::scaled(eps, 2.25);
        p.dealias = dealias;
        let sp = p.spectral(g);
        let mut st = ChState::initial(&sp, u0.clone(), &p, scheme).unwrap();
        let m0 = st.u.mean();
        let mut prev = energy_p_eps(&sp, &st.u, eps).unwrap();
        for _ in 0..100 {
            let (next, info) = ch_step(scheme, &sp, &st, &p).unwrap();
            let pe = energy_p_eps(&sp, &next.u, eps).unwrap();
            assert!(pe <= prev + 1e-10 * prev.max(1.0), "{scheme}: {prev} -> {pe}");
            assert!(!info.r_clamped && !info.fallback_used);
            if scheme.conserves_mass() {
                assert!((next.u.mean() - m0).abs() <= 1e-12 * (1.0 + m0.abs()));
            }
            prev = pe;
            st = next;
        }
        if !scheme.conserves_mass() {
            assert!((st.u.mean() - m0).abs() < 1e-2 * m0);
        }
    }
}

#[test]
fn steppers_are_translation_equivariant() {
    let (g, u0, eps) = disk(32, 0.25);
    let shift = [3isize, -5];
    for scheme in ChScheme::ALL {
        for dealias in [false, true] {
            let mut p = ChParams::scaled(eps, 2.25);
            p.dealias = dealias;
            let sp = p.spectral(g);
            let a = ChState::initial(&sp, u0.clone(), &p, scheme).unwrap();
            let b = ChState::initial(&sp, u0.shifted(&shift), &p, scheme).unwrap();
            let (a1, _) = ch_step(scheme, &sp, &a, &p).unwrap();
            let (b1, _) = ch_step(scheme, &sp, &b, &p).unwrap();
            let d = common::max_abs_diff(a1.u.shifted(&shift).values(), b1.u.values());
            assert!(d < 1e-11, "{scheme} dealias={dealias}: {d:e}");
        }
    }
}

#[test]
fn disk_energy_is_a_sixth_of_the_perimeter() {
    let (g, u0, eps) = disk(128, 0.25);
    let sp = Spectral::new(g);
    let pe = energy_p_eps(&sp, &u0, eps).unwrap();
    let want = 2.0 * std::f64::consts::PI * 0.25 / 6.0;
    assert!((pe - want).abs() < 2e-3 * want, "{pe} vs {want}");
}

#[test]
fn slice_through_disk_matches_profile() {
    let (g, u0, eps) = disk(128, 0.25);
    let slice = profile_slice(&u0, 0, &[0.0, 0.5]).unwrap();
    assert_eq!(slice.len(), g.shape()[0]);
    for (x, v) in slice {
        let d = (x - 0.5).abs() - 0.25;
        assert!((v - q(d / eps)).abs() < 1e-3);
    }
}

#[test]
fn initial_state_is_consistent() {
    let (g, u0, eps) = disk(32, 0.25);
    let p = ChParams::scaled(eps, 2.25);
    let sp = p.spectral(g);
    let mu = chemical_potential(&sp, &u0, eps).unwrap();
    let st = ChState::initial(&sp, u0.clone(), &p, ChScheme::MchSav1).unwrap();
    assert_eq!(st.mu, mu);
    let split = MchSplit::new(&sp, &u0, &p);
    assert_eq!(st.r, split.j2(&mu).sqrt());
    let st = ChState::initial(&sp, u0.clone(), &p, ChScheme::SavClassic).unwrap();
    assert_eq!(st.r, (u0.map(w).integral() + p.c0).sqrt());
    assert_eq!(ChState::initial(&sp, u0, &p, ChScheme::Eyre).unwrap().r, 0.0);
}

#[test]
fn mobility_splits_are_consistent() {
    // Band-limited μ: the Laplacian symbol keeps the Nyquist mode, the
    // gradient does not.
    let (g, u0, eps) = disk(32, 0.25);
    let p = ChParams::scaled(eps, 2.25);
    let sp = Spectral::new(g);
    let mu = smooth_random(g, 8, 5);
    let mch = MchSplit::new(&sp, &u0, &p);
    assert!((mch.j(&mu) - mch.j_direct(&mu)).abs() < 1e-10 * mch.j1(&mu));
    assert!(mch.j2(&mu) >= 0.0);
    let nmn = NmnSplit::new(&sp, &u0, &p);
    assert!((nmn.j(&mu) - nmn.j_direct(&mu)).abs() < 1e-10 * nmn.j1(&mu));
}

#[test]
fn potentials() {
    for s in [0.0, 1.0] {
        assert_eq!(w(s), 0.0);
        assert_eq!(mobility_mch(s), 0.0);
    }
    assert!((mobility_mch(0.5) - 2.25).abs() < 1e-15);
    let eps = 0.01;
    for i in 0..=100 {
        let s = -0.5 + 2.0 * i as f64 / 100.0;
        assert!(w(s) >= 0.0);
        assert!(mobility_nmn(s, eps) >= eps * eps);
        assert!(n_fun(s, eps).is_finite());
    }
    assert!((q(0.0) - 0.5).abs() < 1e-15);
}

#[test]
fn negative_j2_fails_or_falls_back() {
    let (g, u0, eps) = disk(32, 0.25);
    let mut p = ChParams::scaled(eps, 1.0);
    p.beta = 0.0;
    let sp = p.spectral(g);
    let mut st = ChState::initial(&sp, u0, &p, ChScheme::MchSav1).unwrap();
    // ∇μ concentrated in the interface, where M(u) > m.
    st.mu = st.u.clone();
    let err = mch_sav1_step(&sp, &st, &p).unwrap_err();
    assert!(matches!(err, Error::InvalidSplitting { .. }), "{err}");
    p.allow_negative_j2 = true;
    let (_, rep) = mch_sav1_step(&sp, &st, &p).unwrap();
    assert!(rep.fallback_used);
}

#[test]
fn grid_mismatch_is_rejected() {
    let (_, u0, eps) = disk(32, 0.25);
    let p = ChParams::scaled(eps, 2.25);
    let sp = Spectral::new(grid(16));
    assert!(matches!(
        ChState::initial(&sp, u0, &p, ChScheme::Eyre),
        Err(Error::GridMismatch(_))
    ));
}

#[test]
fn nmn_does_not_conserve_mass_exactly() {
    let (g, u0, eps) = disk(32, 0.25);
    let mut p = ChParams::scaled(eps, 2.25);
    p.dealias = true;
    let sp = p.spectral(g);
    let st = ChState::initial(&sp, u0, &p, ChScheme::NmnSav1).unwrap();
    let (next, _) = nmn_sav1_step(&sp, &st, &p).unwrap();
    assert!(next.u.mean() != st.u.mean());
    assert!(!ChScheme::NmnSav1.conserves_mass());
}

#[test]
fn tube_pinches_into_components() {
    let g = GridSpec::new(&[32, 8, 8], &[1.0, 0.25, 0.25]).unwrap();
    let tube = Shape::Tube {
        axis: 0,
        center: [0.125, 0.125],
        radius: 0.06,
        amplitude: 0.25,
        wavelength: 0.5,
    };
    let u = initial_condition(&tube, g, 2.0 / 32.0).unwrap();
    assert_eq!(component_count(&u, 0.5), 1);
    let cut = RealField::from_fn(g, |x| {
        let s = (x[0] * 2.0 * std::f64::consts::PI / 0.5).cos();
        if s < -0.9 { 0.0 } else { 1.0 }
    });
    let split = u.mul(&cut).unwrap();
    assert_eq!(component_count(&split, 0.5), 2);
}

#[test]
fn dealias_changes_only_variable_coefficient_terms() {
    // A constant mobility has no aliasing, so both settings agree.
    let g = grid(32);
    let mu = smooth_random(g, 4, 6);
    let a = RealField::constant(g, 1.7);
    let plain = Spectral::new(g).neg_div_coef_grad(&a, &mu).unwrap();
    let filtered = Spectral::new(g).with_dealias(true).neg_div_coef_grad(&a, &mu).unwrap();
    assert!(common::max_abs_diff(plain.values(), filtered.values()) < 1e-9);
    let mut lap = Spectral::new(g).laplacian(&mu).unwrap();
    lap.scale_mut(-1.7);
    assert!(common::max_abs_diff(plain.values(), lap.values()) < 1e-9);
}
