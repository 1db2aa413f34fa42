use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic box `[0, ℓ₁) × … × [0, ℓ_d)` sampled at `N₁ × … × N_d` nodes.
///
/// Fields are stored row-major: the last axis varies fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct GridSpec {
    d: usize,
    n: [usize; 3],
    l: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRepr {
    n: Vec<usize>,
    l: Vec<f64>,
}

impl TryFrom<GridRepr> for GridSpec {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        GridSpec::new(&r.n, &r.l)
    }
}

impl From<GridSpec> for GridRepr {
    fn from(g: GridSpec) -> Self {
        GridRepr {
            n: g.shape().to_vec(),
            l: g.lengths().to_vec(),
        }
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n: Vec<String> = self.shape().iter().map(|x| x.to_string()).collect();
        let l: Vec<String> = self.lengths().iter().map(|x| x.to_string()).collect();
        write!(f, "{} on [{}]", n.join("x"), l.join(", "))
    }
}

impl GridSpec {
    pub fn new(n: &[usize], l: &[f64]) -> Result<Self> {
        let d = n.len();
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidParameter(format!(
                "grid dimension must be 1, 2 or 3, got {d}"
            )));
        }
        if l.len() != d {
            return Err(Error::InvalidParameter(format!(
                "grid has {d} point counts but {} lengths",
                l.len()
            )));
        }
        let mut spec = GridSpec {
            d,
            n: [1; 3],
            l: [1.0; 3],
        };
        for a in 0..d {
            if n[a] < 4 || n[a] % 2 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "axis {a}: point count must be even and >= 4, got {}",
                    n[a]
                )));
            }
            if !(l[a] > 0.0 && l[a].is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "axis {a}: box length must be positive, got {}",
                    l[a]
                )));
            }
            spec.n[a] = n[a];
            spec.l[a] = l[a];
        }
        Ok(spec)
    }

    /// `N^d` points on the unit box.
    pub fn cube(d: usize, n: usize) -> Result<Self> {
        GridSpec::new(&vec![n; d], &vec![1.0; d])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn shape(&self) -> &[usize] {
        &self.n[..self.d]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.l[..self.d]
    }

    /// Total number of nodes `∏ N_α`.
    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh size `h_α = ℓ_α / N_α`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.l[axis] / self.n[axis] as f64
    }

    /// Quadrature weight `∏ h_α` of the rectangle rule.
    pub fn cell_volume(&self) -> f64 {
        (0..self.d).map(|a| self.spacing(a)).product()
    }

    /// `|Q| = ∏ ℓ_α`.
    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    /// Distance between consecutive entries along `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.n[axis + 1..self.d].iter().product()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.d);
        idx.iter()
            .zip(self.shape())
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in (0..self.d).rev() {
            idx[a] = flat % self.n[a];
            flat /= self.n[a];
        }
        idx
    }

    /// Node coordinate `i h_α`.
    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        i as f64 * self.spacing(axis)
    }

    /// Signed integer frequency of FFT bin `i` on `axis`, in `[−N/2, N/2 − 1]`.
    pub fn frequency(&self, axis: usize, i: usize) -> i64 {
        let n = self.n[axis];
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Angular wavenumber `2π k / ℓ_α` of FFT bin `i`.
    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        2.0 * PI * self.frequency(axis, i) as f64 / self.l[axis]
    }

    /// Whether bin `i` is the unpaired Nyquist frequency `−N/2`.
    pub fn is_nyquist(&self, axis: usize, i: usize) -> bool {
        i == self.n[axis] / 2
    }

    /// Signed frequencies of a flat spectral index.
    pub fn frequencies_of(&self, flat: usize) -> Vec<i64> {
        let idx = self.multi_index(flat);
        (0..self.d).map(|a| self.frequency(a, idx[a])).collect()
    }

    /// Minimum-image difference `x − y` along `axis`.
    pub fn periodic_delta(&self, axis: usize, x: f64, y: f64) -> f64 {
        let l = self.l[axis];
        let mut dx = (x - y) % l;
        if dx > 0.5 * l {
            dx -= l;
        } else if dx < -0.5 * l {
            dx += l;
        }
        dx
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self} vs {other}")))
        }
    }
}
