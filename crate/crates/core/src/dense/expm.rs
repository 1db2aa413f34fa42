use nalgebra::DMatrix;

/// Taylor order of the scaled exponential.
const TAYLOR_ORDER: usize = 16;

/// Number of squarings for `exp(M)`: `max(0, ⌈log₂‖M‖₁⌉ + 4)`.
fn squarings(m: &DMatrix<f64>) -> u32 {
    let norm1 = (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if norm1 == 0.0 {
        return 0;
    }
    (norm1.log2().ceil() as i64 + 4).max(0) as u32
}

/// Matrix exponential by scaling and squaring around a degree-16 Taylor
/// polynomial.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let s = squarings(m);
    let x = m / 2f64.powi(s as i32);

    // Horner form of Σ_{k≤16} Xᵏ/k!.
    let id = DMatrix::<f64>::identity(n, n);
    let mut acc = id.clone();
    for k in (1..=TAYLOR_ORDER).rev() {
        acc = &id + (&x * acc) / k as f64;
    }
    for _ in 0..s {
        acc = &acc * &acc;
    }
    acc
}
