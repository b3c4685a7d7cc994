//! Adaptive Gauss-Legendre quadrature on `[a, b]` with known breakpoints.

use crate::error::{Error, Result};

const NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Maximum number of bisections of a panel.
pub const MAX_HALVINGS: u32 = 24;

/// Eight-point Gauss-Legendre rule on one panel.
#[inline]
pub fn gauss_legendre_8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// Integrates `f` over `[a, b]` to `rel_tol · (1 + |I|)`.
///
/// `breakpoints` are interior points where `f` is not smooth; the interval is
/// split there first. Each smooth piece is then refined by panel halving until
/// a panel's estimate and the sum of its halves agree to that panel's share of
/// the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64], rel_tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    cuts.push(a);
    let span = b - a;
    let min_gap = span * 1e-14;
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|t| t.is_finite() && *t > a + min_gap && *t < b - min_gap)
        .collect();
    inner.sort_by(f64::total_cmp);
    for t in inner {
        if t - cuts[cuts.len() - 1] > min_gap {
            cuts.push(t);
        }
    }
    cuts.push(b);

    // First pass fixes the absolute tolerance from the size of the result.
    let rough: f64 = cuts.windows(2).map(|w| gauss_legendre_8(&f, w[0], w[1])).sum();
    if !rough.is_finite() {
        return Err(Error::Numeric("non-finite integrand".into()));
    }
    let tol = rel_tol * (1.0 + rough.abs());
    // Differences below this are rounding noise, whatever the panel's share.
    let floor = 64.0 * f64::EPSILON * (1.0 + rough.abs());
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let share = tol * (w[1] - w[0]) / span;
        let whole = gauss_legendre_8(&f, w[0], w[1]);
        total += refine(&f, w[0], w[1], whole, share, floor, 0)?;
    }
    Ok(total)
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, floor: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = gauss_legendre_8(f, a, m);
    let right = gauss_legendre_8(f, m, b);
    let diff = (left + right - whole).abs();
    if diff <= tol.max(floor) {
        return Ok(left + right);
    }
    if depth >= MAX_HALVINGS {
        return Err(Error::Quadrature { halvings: depth, residual: diff });
    }
    Ok(refine(f, a, m, left, 0.5 * tol, floor, depth + 1)? + refine(f, m, b, right, 0.5 * tol, floor, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        // GL8 integrates degree 15 exactly.
        let v = gauss_legendre_8(&|x: f64| x.powi(15) + 3.0 * x.powi(4), 0.0, 2.0);
        let exact = 2f64.powi(16) / 16.0 + 3.0 * 32.0 / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn smooth_and_kinked() {
        let v = integrate(|x: f64| x.exp(), 0.0, 1.0, &[], 1e-12).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        let k = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-12).unwrap();
        assert!((k - (0.045 + 0.245)).abs() < 1e-13);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|_| 1.0, 1.0, 1.0, &[], 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn discontinuity_without_breakpoint_fails() {
        let r = integrate(|x: f64| if x < 1.0 / 3.0 { 0.0 } else { 1e6 }, 0.0, 1.0, &[], 1e-15);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
