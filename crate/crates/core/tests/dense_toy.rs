use mobsav::dense::{
    consistency_experiment, default_dt_grid, expm, stability_experiment, IncreaseEvents, ToyIntegrator,
    ToyProblem, ToySpec,
};
use mobsav::linop::{increased, MobilitySplit, QuadraticEnergy, Scheme, SchemeOptions};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `exp(−t M C)` for symmetric positive `M`, `C` through the symmetric matrix
/// `S = C^{1/2} M C^{1/2}`: `exp(−t M C) = C^{−1/2} exp(−t S) C^{1/2}`.
fn exp_by_eigen(m: &DMatrix<f64>, c: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let ce = c.clone().symmetric_eigen();
    let root = |p: f64| {
        let d = DMatrix::from_diagonal(&ce.eigenvalues.map(|l| l.powf(p)));
        &ce.eigenvectors * d * ce.eigenvectors.transpose()
    };
    let (half, neg_half) = (root(0.5), root(-0.5));
    let s = &half * m * &half;
    let s = (&s + s.transpose()) * 0.5;
    let se = s.symmetric_eigen();
    let e = DMatrix::from_diagonal(&se.eigenvalues.map(|l| (-t * l).exp()));
    neg_half * (&se.eigenvectors * e * se.eigenvectors.transpose()) * half
}

#[test]
fn matrix_exponential_matches_eigendecomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in 1..=8 {
        let p = ToyProblem::random(n, &mut rng);
        let a = p.a.matrix();
        let c = a.transpose() * a;
        let m = p.mobility_matrix();
        for t in [0.01, 0.7, 5.0, 40.0] {
            let got = expm(&(&m * &c * -t));
            let want = exp_by_eigen(&m, &c, t);
            let err = (&got - &want).amax() / want.amax().max(1e-300);
            assert!(err < 1e-10, "n={n} t={t}: {err:e}");
        }
    }
}

#[test]
fn exponential_of_diagonal_and_nilpotent() {
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![-3.0, 0.5, 2.0]));
    let e = expm(&d);
    for (i, x) in [-3.0f64, 0.5, 2.0].iter().enumerate() {
        assert!((e[(i, i)] - x.exp()).abs() < 1e-14 * x.exp());
    }
    let n = DMatrix::from_row_slice(2, 2, &[0.0, 7.0, 0.0, 0.0]);
    let e = expm(&n);
    assert!((e - DMatrix::from_row_slice(2, 2, &[1.0, 7.0, 0.0, 1.0])).amax() < 1e-13);
}

#[test]
fn default_problem_values() {
    let p = ToyProblem::default();
    let ev = p.mobility_eigenvalues();
    assert!((ev[0] - 0.19).abs() < 1e-14 && (ev[1] - 0.99).abs() < 1e-14);
    assert_eq!(p.minimiser(), DVector::zeros(2));
    let e = p.energy();
    assert!(e.value(&p.exact_flow(200.0)) < 1e-3 * e.value(&p.u0));
}

#[test]
fn toy_spec_json_round_trip() {
    let spec = ToyProblem::default().to_spec();
    let text = serde_json::to_string(&spec).unwrap();
    let back: ToySpec = serde_json::from_str(&text).unwrap();
    assert_eq!(ToyProblem::from_spec(&back).unwrap(), ToyProblem::default());
    assert!(serde_json::from_str::<ToySpec>(r#"{"a":[[1]],"b":[0],"l1":[[1]],"l2":[[0]],"u0":[1],"x":1}"#).is_err());
}

#[test]
fn nine_dimensional_problems_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = ToyProblem::random(8, &mut rng);
    let mut spec = p.to_spec();
    spec.a.iter_mut().for_each(|row| row.push(0.0));
    spec.a.push(vec![0.0; 9]);
    assert!(ToyProblem::from_spec(&spec).is_err());
}

#[test]
fn consistency_table_has_one_row_per_cell() {
    let p = ToyProblem::default();
    let dts = &default_dt_grid()[5..];
    let integrators: Vec<ToyIntegrator> = Scheme::ALL.into_iter().map(Into::into).collect();
    let r = consistency_experiment(&p, &integrators, 1.0, dts, &SchemeOptions::default());
    assert_eq!(r.rows.len(), 5 * dts.len());
    assert!(r.rows.iter().all(|row| row.failure.is_none()));
    for s in Scheme::ALL {
        assert_eq!(r.errors(s.name()).len(), dts.len());
        assert!(r.slope(s.name()).is_some());
    }
    let exact = consistency_experiment(&p, &[ToyIntegrator::Exact], 1.0, dts, &SchemeOptions::default());
    assert!(exact.rows.iter().all(|row| row.error.unwrap() < 1e-12));
}

#[test]
fn stability_trace_shapes() {
    let p = ToyProblem::default();
    let traces = stability_experiment(&p, &[Scheme::MbSav1], 10.0, &[1.0], &SchemeOptions::default());
    let t = &traces[0];
    assert_eq!(t.reports.len(), 11);
    assert_eq!(t.times.len(), 11);
    assert_eq!(t.u.len(), 11);
    assert_eq!(t.exact[0], vec![0.1, 2.0]);
    assert_eq!(t.events, IncreaseEvents::count(&t.reports));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_flow_is_a_semigroup(seed in any::<u64>(), n in 1usize..=8, t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = ToyProblem::random(n, &mut rng);
        let direct = p.exact_flow(t1 + t2);
        let composed = p.exact_flow_from(&p.exact_flow(t1), t2);
        prop_assert!((&direct - &composed).amax() <= 1e-10 * direct.amax().max(1.0));
    }

    #[test]
    fn exact_flow_dissipates_e_and_j(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = ToyProblem::random(n, &mut rng);
        let (e, m) = (p.energy(), p.split());
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..40 {
            let u = p.exact_flow(0.05 * k as f64);
            let mu = e.gradient(&u);
            let now = (e.value(&u), m.j(&mu));
            if let Some((pe, pj)) = prev {
                prop_assert!(!increased(pe, now.0));
                prop_assert!(!increased(pj, now.1));
            }
            prev = Some(now);
        }
    }
}
