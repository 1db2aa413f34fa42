use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linop::{MobilitySplit, QuadraticEnergy};

/// Square real matrix acting on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    entries: DMatrix<f64>,
}

impl DenseOperator {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidParameter(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("dense operator entries"));
        }
        Ok(DenseOperator { entries })
    }

    /// From row-major nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("ragged operator rows".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        DenseOperator {
            entries: DMatrix::identity(n, n),
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        DenseOperator {
            entries: DMatrix::from_diagonal(&DVector::from_column_slice(d)),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.entries.row(i).iter().copied().collect())
            .collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (&self.entries - self.entries.transpose()).amax() <= tol
    }

    /// `MᵀM`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.entries.transpose() * &self.entries
    }
}

/// Solves `[[I, dt K], [−AᵀA, I]] (u, μ) = (rhs_u, rhs_mu)` by LU on the
/// assembled `2n × 2n` matrix.
pub fn dense_block_solve(
    ata: &DMatrix<f64>,
    k: &DMatrix<f64>,
    dt: f64,
    rhs_u: &DVector<f64>,
    rhs_mu: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = ata.nrows();
    let mut sys = DMatrix::<f64>::identity(2 * n, 2 * n);
    sys.view_mut((0, n), (n, n)).copy_from(&(k * dt));
    sys.view_mut((n, 0), (n, n)).copy_from(&(-ata));
    let mut rhs = DVector::zeros(2 * n);
    rhs.rows_mut(0, n).copy_from(rhs_u);
    rhs.rows_mut(n, n).copy_from(rhs_mu);

    let lu = sys.clone().lu();
    let rcond = pivot_ratio(&lu.u());
    if !(rcond > 1e-15) {
        return Err(Error::SingularMatrix { rcond });
    }
    let x = lu.solve(&rhs).ok_or(Error::SingularMatrix { rcond })?;
    Ok((x.rows(0, n).into_owned(), x.rows(n, n).into_owned()))
}

/// `min |U_ii| / max |U_ii|`, a cheap reciprocal condition estimate.
fn pivot_ratio(u: &DMatrix<f64>) -> f64 {
    let d = u.diagonal();
    let max = d.amax();
    if max == 0.0 {
        return 0.0;
    }
    d.amin() / max
}

/// `E(u) = ½‖Au − b‖²` with explicit matrices.
#[derive(Debug, Clone)]
pub struct DenseEnergy {
    a: DMatrix<f64>,
    b: DVector<f64>,
    ata: DMatrix<f64>,
    atb: DVector<f64>,
}

impl DenseEnergy {
    pub fn new(a: &DenseOperator, b: &DVector<f64>) -> Result<Self> {
        if b.len() != a.dim() {
            return Err(Error::InvalidParameter("b has the wrong length".into()));
        }
        let a = a.matrix().clone();
        let ata = a.transpose() * &a;
        let atb = a.transpose() * b;
        Ok(DenseEnergy {
            a,
            b: b.clone(),
            ata,
            atb,
        })
    }

    pub fn ata(&self) -> &DMatrix<f64> {
        &self.ata
    }
}

impl QuadraticEnergy for DenseEnergy {
    type Vector = DVector<f64>;
    type Kernel = DMatrix<f64>;

    fn value(&self, u: &DVector<f64>) -> f64 {
        0.5 * (&self.a * u - &self.b).norm_squared()
    }

    fn apply_ata(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.ata * u
    }

    fn atb(&self) -> &DVector<f64> {
        &self.atb
    }

    fn block_solve(
        &self,
        tau: f64,
        kernel: &DMatrix<f64>,
        rhs_u: &DVector<f64>,
        rhs_mu: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        dense_block_solve(&self.ata, kernel, tau, rhs_u, rhs_mu)
    }
}

/// Mobility `J(μ) = ½‖L₁μ‖² − ½‖L₂μ‖²` with explicit matrices.
#[derive(Debug, Clone)]
pub struct DenseSplit {
    l1: DMatrix<f64>,
    l2: DMatrix<f64>,
    l1tl1: DMatrix<f64>,
    l2tl2: DMatrix<f64>,
}

impl DenseSplit {
    pub fn new(l1: &DenseOperator, l2: &DenseOperator) -> Result<Self> {
        if l1.dim() != l2.dim() {
            return Err(Error::InvalidParameter("L1 and L2 dimensions differ".into()));
        }
        Ok(DenseSplit {
            l1: l1.matrix().clone(),
            l2: l2.matrix().clone(),
            l1tl1: l1.gram(),
            l2tl2: l2.gram(),
        })
    }

    /// `L₁ᵀL₁ − L₂ᵀL₂`.
    pub fn ltl(&self) -> DMatrix<f64> {
        &self.l1tl1 - &self.l2tl2
    }
}

impl MobilitySplit for DenseSplit {
    type Vector = DVector<f64>;
    type Kernel = DMatrix<f64>;

    fn implicit_kernel(&self) -> &DMatrix<f64> {
        &self.l1tl1
    }

    fn apply_l1tl1(&self, mu: &DVector<f64>) -> DVector<f64> {
        &self.l1tl1 * mu
    }

    fn apply_l2tl2(&self, mu: &DVector<f64>) -> DVector<f64> {
        &self.l2tl2 * mu
    }

    fn j1(&self, mu: &DVector<f64>) -> f64 {
        0.5 * (&self.l1 * mu).norm_squared()
    }

    fn j2(&self, mu: &DVector<f64>) -> f64 {
        0.5 * (&self.l2 * mu).norm_squared()
    }

    fn cross(&self, mu: &DVector<f64>, nu: &DVector<f64>) -> f64 {
        (&self.l2 * mu).dot(&(&self.l2 * nu))
    }
}
