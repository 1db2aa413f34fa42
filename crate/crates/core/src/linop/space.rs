use nalgebra::DVector;

/// Hilbert-space operations needed by the time steppers.
///
/// Implementations must make `dot` symmetric and positive definite; `norm`
/// is derived from it.
pub trait VectorSpace: Clone {
    /// Zero element of the same shape as `self`.
    fn zeros_like(&self) -> Self;

    /// `self += alpha * x`.
    fn axpy(&mut self, alpha: f64, x: &Self);

    /// `self *= alpha`.
    fn scale_mut(&mut self, alpha: f64);

    fn dot(&self, other: &Self) -> f64;

    /// Number of scalar degrees of freedom.
    fn dim(&self) -> usize;

    fn norm(&self) -> f64 {
        self.dot(self).max(0.0).sqrt()
    }

    fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.scale_mut(alpha);
        out
    }

    /// `self + alpha * x` as a new vector.
    fn plus_scaled(&self, alpha: f64, x: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(alpha, x);
        out
    }

    fn is_finite(&self) -> bool {
        self.dot(self).is_finite()
    }
}

impl VectorSpace for DVector<f64> {
    fn zeros_like(&self) -> Self {
        DVector::zeros(self.len())
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        nalgebra::Matrix::axpy(self, alpha, x, 1.0);
    }

    fn scale_mut(&mut self, alpha: f64) {
        *self *= alpha;
    }

    fn dot(&self, other: &Self) -> f64 {
        nalgebra::Matrix::dot(self, other)
    }

    fn dim(&self) -> usize {
        self.len()
    }
}
