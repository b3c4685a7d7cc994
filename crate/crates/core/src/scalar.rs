//! Scalar abstraction for the geometric kernel.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, NumCast};

/// Real scalar usable by the geometry kernel.
///
/// Implemented for `f32` and `f64`. Everything above the geometry layer
/// (quadrature, transfer operators, Monte Carlo) works in `f64`.
pub trait Scalar: Float + FloatConst + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion back to `f64`.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }

    /// Default absolute comparison tolerance for this precision.
    fn tol() -> Self;
}

impl Scalar for f32 {
    #[inline]
    fn tol() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    #[inline]
    fn tol() -> Self {
        1e-9
    }
}

/// Compensated (Kahan-Babuska) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `log(sum(exp(xs)))` without overflow. Returns `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: KahanSum = xs.iter().map(|&x| (x - m).exp()).collect();
    m + s.value().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 1000.0);
    }

    #[test]
    fn lse_matches_naive() {
        let xs = [0.1, -2.0, 3.5];
        let naive = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - naive).abs() < 1e-14);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
