mod common;

use std::f64::consts::PI;

use common::*;
use mobsav::linop::VectorSpace;
use mobsav::spectral::{DiagonalSymbol, GridSpec, RealField, Spectral, SpectralField};
use mobsav::Error;
use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;

fn grid2() -> GridSpec {
    GridSpec::new(&[16, 8], &[1.0, 0.7]).unwrap()
}

#[test]
fn constant_field_spectrum() {
    let g = grid2();
    let sp = Spectral::new(g);
    let hat = sp.forward(&RealField::constant(g, 2.5)).unwrap();
    assert!((hat.coeffs()[0] - Complex64::new(2.5 * 128.0, 0.0)).norm() < 1e-12);
    assert!(hat.coeffs()[1..].iter().all(|c| c.norm() < 1e-12));
}

#[test]
fn cosine_has_two_coefficients() {
    let g = grid2();
    let sp = Spectral::new(g);
    let f = RealField::from_fn(g, |x| (2.0 * PI * x[0] / 1.0).cos());
    let hat = sp.forward(&f).unwrap();
    let nonzero: Vec<usize> = (0..g.len()).filter(|&i| hat.coeffs()[i].norm() > 1e-9).collect();
    assert_eq!(nonzero, vec![g.flat_index(&[1, 0]), g.flat_index(&[15, 0])]);
}

#[test]
fn round_trip_1d_2d_3d() {
    for g in [
        GridSpec::new(&[32], &[2.0]).unwrap(),
        grid2(),
        GridSpec::new(&[8, 4, 6], &[1.0, 0.5, 0.25]).unwrap(),
        GridSpec::new(&[64, 32, 16], &[1.0, 0.5, 0.25]).unwrap(),
    ] {
        let sp = Spectral::new(g);
        let f = rough_random(g, 3);
        let back = sp.inverse(&sp.forward(&f).unwrap()).unwrap();
        assert!(max_abs_diff(f.values(), back.values()) <= 1e-12 * f.norm().max(1.0));
    }
}

#[test]
fn forward_of_real_field_is_hermitian() {
    let g = GridSpec::new(&[8, 4, 6], &[1.0, 0.5, 0.25]).unwrap();
    let hat = Spectral::new(g).forward(&rough_random(g, 5)).unwrap();
    assert!(hat.hermitian_defect() < 1e-12);
}

#[test]
fn transform_matches_direct_dft() {
    let g = GridSpec::new(&[8, 6], &[1.0, 1.0]).unwrap();
    let f = rough_random(g, 11);
    let hat = Spectral::new(g).forward(&f).unwrap();
    for k0 in 0..8 {
        for k1 in 0..6 {
            let mut s = Complex64::new(0.0, 0.0);
            for j0 in 0..8 {
                for j1 in 0..6 {
                    let arg = -2.0 * PI * ((k0 * j0) as f64 / 8.0 + (k1 * j1) as f64 / 6.0);
                    s += f.at(&[j0, j1]) * Complex64::from_polar(1.0, arg);
                }
            }
            assert!((s - hat.coeffs()[g.flat_index(&[k0, k1])]).norm() < 1e-12);
        }
    }
}

#[test]
fn laplacian_eigenfunction() {
    let g = grid2();
    let sp = Spectral::new(g);
    let f = RealField::from_fn(g, |x| (2.0 * PI * x[0]).cos());
    let lap = sp.laplacian(&f).unwrap();
    let expected = f.map(|v| -4.0 * PI * PI * v);
    assert!(max_abs_diff(lap.values(), expected.values()) < 1e-10);
}

#[test]
fn laplacian_matches_dense_second_derivative_matrix() {
    let g = GridSpec::new(&[8, 6], &[1.3, 0.6]).unwrap();
    let f = rough_random(g, 2);
    let lap = Spectral::new(g).laplacian(&f).unwrap();
    let dense = laplacian(&g) * vec_of(&f);
    assert!(max_abs_diff(lap.values(), dense.as_slice()) < 1e-10);
}

#[test]
fn gradient_matches_dense_first_derivative_matrix() {
    let g = GridSpec::new(&[8, 6], &[1.3, 0.6]).unwrap();
    let f = rough_random(g, 4);
    let grads = Spectral::new(g).grad(&f).unwrap();
    for (a, ga) in grads.iter().enumerate() {
        let dense = partial(&g, a) * vec_of(&f);
        assert!(max_abs_diff(ga.values(), dense.as_slice()) < 1e-11);
    }
}

#[test]
fn div_grad_is_laplacian_without_nyquist_content() {
    let g = grid2();
    let sp = Spectral::new(g);
    let f = smooth_random(g, 7, 3);
    let dg = sp.div(&sp.grad(&f).unwrap()).unwrap();
    let lap = sp.laplacian(&f).unwrap();
    assert!(max_abs_diff(dg.values(), lap.values()) < 1e-11 * lap.norm().max(1.0));
}

#[test]
fn div_is_negative_adjoint_of_grad() {
    let g = GridSpec::new(&[8, 8, 4], &[1.0, 2.0, 0.5]).unwrap();
    let sp = Spectral::new(g);
    let f = rough_random(g, 1);
    let v: Vec<RealField> = (0..3).map(|s| rough_random(g, 10 + s)).collect();
    let lhs: f64 = sp.grad(&f).unwrap().iter().zip(&v).map(|(a, b)| a.dot(b)).sum();
    let rhs = -f.dot(&sp.div(&v).unwrap());
    assert!((lhs - rhs).abs() < 1e-11 * lhs.abs().max(1.0));
}

#[test]
fn divergence_has_zero_mean() {
    let g = grid2();
    let sp = Spectral::new(g);
    let v = vec![rough_random(g, 21), rough_random(g, 22)];
    assert!(sp.div(&v).unwrap().mean().abs() < 1e-13);
}

#[test]
fn derivatives_annihilate_constants() {
    let g = grid2();
    let sp = Spectral::new(g);
    let c = RealField::constant(g, 4.0);
    assert!(sp.laplacian(&c).unwrap().values().iter().all(|v| v.abs() < 1e-12));
    for d in sp.grad(&c).unwrap() {
        assert!(d.values().iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn parseval() {
    let g = GridSpec::new(&[8, 6, 4], &[1.0, 0.3, 2.0]).unwrap();
    let sp = Spectral::new(g);
    let (f, h) = (rough_random(g, 31), rough_random(g, 32));
    let (fh, hh) = (sp.forward(&f).unwrap(), sp.forward(&h).unwrap());
    let spectral: f64 = fh
        .coeffs()
        .iter()
        .zip(hh.coeffs())
        .map(|(a, b)| (a * b.conj()).re)
        .sum::<f64>()
        * g.cell_volume()
        / g.len() as f64;
    assert!((spectral - f.dot(&h)).abs() < 1e-11);
}

#[test]
fn dirichlet_energy_matches_dense() {
    let g = GridSpec::new(&[8, 6], &[1.3, 0.6]).unwrap();
    let f = rough_random(g, 9);
    let e = Spectral::new(g).dirichlet_energy(&f).unwrap();
    let v = vec_of(&f);
    let dense = -(v.transpose() * laplacian(&g) * &v)[(0, 0)] * g.cell_volume();
    assert!((e - dense).abs() < 1e-10 * dense.abs());
}

#[test]
fn apply_symbol_rejects_other_grid() {
    let g = grid2();
    let other = GridSpec::new(&[16, 8], &[1.0, 1.0]).unwrap();
    let sp = Spectral::new(g);
    let hat = sp.forward(&RealField::zeros(g)).unwrap();
    assert!(matches!(
        sp.apply_symbol(&hat, &DiagonalSymbol::k2(other)),
        Err(Error::GridMismatch(_))
    ));
    assert!(sp.forward(&RealField::zeros(other)).is_err());
}

#[test]
fn block_solve_with_zero_symbols_is_identity() {
    let g = grid2();
    let sp = Spectral::new(g);
    let z = DiagonalSymbol::constant(g, 0.0);
    let (a, b) = (rough_random(g, 1), rough_random(g, 2));
    let (u, mu) = sp.block_solve(&z, &z, &a, &b).unwrap();
    assert!(max_abs_diff(u.values(), a.values()) < 1e-13);
    assert!(max_abs_diff(mu.values(), b.values()) < 1e-13);
}

#[test]
fn block_solve_matches_dense_assembly() {
    let g = GridSpec::new(&[8, 8], &[1.0, 1.0]).unwrap();
    let sp = Spectral::new(g);
    let (dt, m, c) = (1e-3, 2.25, 50.0);
    let s1 = DiagonalSymbol::k2(g).scaled(dt * m);
    let s2 = DiagonalSymbol::k2(g).map(|k2| -(k2 + c));
    let (ru, rm) = (rough_random(g, 5), rough_random(g, 6));
    let (u, mu) = sp.block_solve(&s1, &s2, &ru, &rm).unwrap();

    let n = g.len();
    let neg_lap = -laplacian(&g);
    let mut sys = DMatrix::<f64>::identity(2 * n, 2 * n);
    sys.view_mut((0, n), (n, n)).copy_from(&(&neg_lap * (dt * m)));
    sys.view_mut((n, 0), (n, n))
        .copy_from(&(-(&neg_lap + DMatrix::<f64>::identity(n, n) * c)));
    let mut rhs = DVector::zeros(2 * n);
    rhs.rows_mut(0, n).copy_from(&vec_of(&ru));
    rhs.rows_mut(n, n).copy_from(&vec_of(&rm));
    let x = sys.lu().solve(&rhs).unwrap();
    let scale = x.amax().max(1.0);
    assert!(max_abs_diff(u.values(), x.rows(0, n).as_slice()) < 1e-10 * scale);
    assert!(max_abs_diff(mu.values(), x.rows(n, n).as_slice()) < 1e-10 * scale);
}

#[test]
fn block_solve_reports_ill_posed_frequency() {
    let g = GridSpec::new(&[8], &[1.0]).unwrap();
    let sp = Spectral::new(g);
    let k2 = DiagonalSymbol::k2(g);
    // det = 1 − (k²/k₁²)·1 vanishes exactly at |k| = k₁.
    let k1 = (2.0 * PI).powi(2);
    let s1 = k2.scaled(1.0 / k1);
    let s2 = DiagonalSymbol::constant(g, 1.0);
    let f = RealField::zeros(g);
    match sp.block_solve(&s1, &s2, &f, &f) {
        Err(Error::IllPosedSymbol { frequency, .. }) => assert_eq!(frequency, vec![1]),
        other => panic!("expected ill-posed symbol, got {other:?}"),
    }
}

#[test]
fn opposite_sign_symbols_never_fail() {
    let g = grid2();
    let sp = Spectral::new(g);
    let s1 = DiagonalSymbol::k2(g).scaled(1e6);
    let s2 = DiagonalSymbol::k2(g).map(|k| -k - 1e8);
    let f = rough_random(g, 8);
    assert!(sp.block_solve(&s1, &s2, &f, &f).is_ok());
}

#[test]
fn pointwise_product_with_one_is_identity() {
    let g = grid2();
    let sp = Spectral::new(g);
    let f = rough_random(g, 3);
    let p = sp.product(&f, &RealField::constant(g, 1.0)).unwrap();
    assert_eq!(p, f);
}

#[test]
fn dealiased_product_matches_truncated_convolution() {
    // 1-D, N = 8: keep |k| ≤ 8/3, i.e. k ∈ {−2, …, 2}.
    let g = GridSpec::new(&[8], &[1.0]).unwrap();
    let sp = Spectral::new(g).with_dealias(true);
    let f = RealField::from_fn(g, |x| 1.0 + (2.0 * PI * x[0]).cos());
    let h = RealField::from_fn(g, |x| (2.0 * PI * 2.0 * x[0]).sin());
    let p = sp.product(&f, &h).unwrap();

    // Exact product: sin(4πx) + ½ sin(6πx) + ½ sin(2πx); the k = 3 term is cut.
    let expected = RealField::from_fn(g, |x| {
        (4.0 * PI * x[0]).sin() + 0.5 * (2.0 * PI * x[0]).sin()
    });
    assert!(max_abs_diff(p.values(), expected.values()) < 1e-13);
}

#[test]
fn spectral_field_rejects_wrong_length() {
    let g = grid2();
    assert!(SpectralField::new(g, vec![Complex64::new(0.0, 0.0); 3]).is_err());
}
