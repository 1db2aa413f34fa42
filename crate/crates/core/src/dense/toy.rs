use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::expm::expm;
use super::operator::{DenseEnergy, DenseOperator, DenseSplit};
use crate::error::{Error, Result};
use crate::linop::SavState;

/// A small quadratic flow `u_t = −(L₁ᵀL₁ − L₂ᵀL₂)(AᵀA u − Aᵀb)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyProblem {
    pub a: DenseOperator,
    pub b: DVector<f64>,
    pub l1: DenseOperator,
    pub l2: DenseOperator,
    pub u0: DVector<f64>,
}

/// Plain-data form used in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySpec {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub l1: Vec<Vec<f64>>,
    pub l2: Vec<Vec<f64>>,
    pub u0: Vec<f64>,
}

impl Default for ToyProblem {
    /// The 2×2 benchmark: `A = diag(0.25, 2)`, `b = 0`, `L₁ = I`,
    /// `L₂ = [[0.5, −0.4], [−0.4, 0.5]]`, `u⁰ = (0.1, 2)`.
    fn default() -> Self {
        ToyProblem {
            a: DenseOperator::diagonal(&[0.25, 2.0]),
            b: DVector::zeros(2),
            l1: DenseOperator::identity(2),
            l2: DenseOperator::from_rows(&[vec![0.5, -0.4], vec![-0.4, 0.5]])
                .expect("static matrix"),
            u0: DVector::from_vec(vec![0.1, 2.0]),
        }
    }
}

impl ToyProblem {
    pub fn new(
        a: DenseOperator,
        b: DVector<f64>,
        l1: DenseOperator,
        l2: DenseOperator,
        u0: DVector<f64>,
    ) -> Result<Self> {
        let p = ToyProblem { a, b, l1, l2, u0 };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if [self.l1.dim(), self.l2.dim(), self.b.len(), self.u0.len()]
            .iter()
            .any(|&d| d != n)
        {
            return Err(Error::InvalidParameter("toy problem dimensions disagree".into()));
        }
        if n > 8 {
            return Err(Error::InvalidParameter(format!(
                "toy problems are limited to n <= 8, got {n}"
            )));
        }
        let lambda = self.min_mobility_eigenvalue();
        if !(lambda > 0.0) {
            return Err(Error::InvalidSplitting {
                j2: lambda,
                hint: "L1'L1 - L2'L2 must be positive definite".into(),
            });
        }
        Ok(())
    }

    /// `L₁ᵀL₁ − L₂ᵀL₂`.
    pub fn mobility_matrix(&self) -> DMatrix<f64> {
        self.l1.gram() - self.l2.gram()
    }

    /// Eigenvalues of `L₁ᵀL₁ − L₂ᵀL₂` in ascending order.
    pub fn mobility_eigenvalues(&self) -> Vec<f64> {
        let m = self.mobility_matrix();
        let mut ev = if m.nrows() == 2 {
            // Characteristic polynomial λ² − tr λ + det.
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
            vec![0.5 * tr - disc, 0.5 * tr + disc]
        } else {
            m.symmetric_eigen().eigenvalues.iter().copied().collect()
        };
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_mobility_eigenvalue(&self) -> f64 {
        self.mobility_eigenvalues()[0]
    }

    pub fn energy(&self) -> DenseEnergy {
        DenseEnergy::new(&self.a, &self.b).expect("validated dimensions")
    }

    pub fn split(&self) -> DenseSplit {
        DenseSplit::new(&self.l1, &self.l2).expect("validated dimensions")
    }

    /// Consistent initial state at `u⁰`.
    pub fn initial_state(&self) -> SavState<DVector<f64>> {
        SavState::new(self.u0.clone(), &self.energy(), &self.split())
    }

    /// A minimiser `u_*` of `E`, i.e. a solution of `AᵀA u = Aᵀb`.
    pub fn minimiser(&self) -> DVector<f64> {
        let a = self.a.matrix();
        let ata = a.transpose() * a;
        let atb = a.transpose() * &self.b;
        ata.svd(true, true)
            .solve(&atb, 1e-14)
            .expect("svd was computed with both factors")
    }

    /// The exact solution `u(t) = u_* + exp(−t (L₁ᵀL₁ − L₂ᵀL₂) AᵀA) (u⁰ − u_*)`.
    pub fn exact_flow(&self, t: f64) -> DVector<f64> {
        self.exact_flow_from(&self.u0, t)
    }

    /// The exact flow started from an arbitrary `u`.
    pub fn exact_flow_from(&self, u: &DVector<f64>, t: f64) -> DVector<f64> {
        assert!(t >= 0.0, "exact flow needs t >= 0");
        let a = self.a.matrix();
        let generator = self.mobility_matrix() * (a.transpose() * a);
        let star = self.minimiser();
        &star + expm(&(generator * -t)) * (u - &star)
    }

    pub fn to_spec(&self) -> ToySpec {
        ToySpec {
            a: self.a.to_rows(),
            b: self.b.iter().copied().collect(),
            l1: self.l1.to_rows(),
            l2: self.l2.to_rows(),
            u0: self.u0.iter().copied().collect(),
        }
    }

    pub fn from_spec(spec: &ToySpec) -> Result<Self> {
        ToyProblem::new(
            DenseOperator::from_rows(&spec.a)?,
            DVector::from_vec(spec.b.clone()),
            DenseOperator::from_rows(&spec.l1)?,
            DenseOperator::from_rows(&spec.l2)?,
            DVector::from_vec(spec.u0.clone()),
        )
    }

    /// A random well-posed instance of dimension `n`: `A` and `L₁` are
    /// well conditioned, and `L₂ = Q L₁` with `‖Q‖₂ = 0.8`, so that
    /// `L₂ᵀL₂ ≤ 0.64 L₁ᵀL₁`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let well_conditioned = |rng: &mut R| {
            let noise = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.5..0.5));
            DMatrix::<f64>::identity(n, n) * 1.5 + noise
        };
        let a = well_conditioned(rng);
        let l1 = well_conditioned(rng);
        let q = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let q_norm = q.clone().svd(false, false).singular_values.max();
        let l2 = (q * (0.8 / q_norm)) * &l1;
        let b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let u0 = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
        ToyProblem {
            a: DenseOperator::new(a).expect("finite"),
            b,
            l1: DenseOperator::new(l1).expect("finite"),
            l2: DenseOperator::new(l2).expect("finite"),
            u0,
        }
    }
}
