//! Weighted orbit sums: Poincaré series, critical exponents, the cusp
//! finiteness series, Patterson atoms and the bump-family sandwich.
//!
//! Every sum runs over an [`OrbitBall`] in its word order. Line integrals are
//! computed in parallel and collected in that order, and all accumulation is
//! sequential (compensated or log-sum-exp), so results do not depend on the
//! number of worker threads.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{busemann, dist, direction_angle, boundary_angle, boundary_at_angle};
use crate::group::{GroupKind, GroupPresentation, OrbitBall, Word};
use crate::potential::{gibbs_cocycle_auto, line_integral, Potential};
use crate::scalar::{log_sum_exp, KahanSum};
use crate::{BoundaryPoint, HPoint, Mobius};

/// Tail slope below which a series is reported as convergent.
pub const CONVERGENT_SLOPE: f64 = -0.2;
/// Tail slope above which a series is reported as divergent.
pub const DIVERGENT_SLOPE: f64 = 0.2;
/// Smallest ball radius accepted by [`critical_exponent`].
pub const MIN_EXPONENT_RADIUS: f64 = 8.0;

/// Heuristic divergence verdict from finitely many terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    ConvergesLikely,
    DivergesLikely,
    Inconclusive,
}

/// Partial sums of a positive series at increasing distance cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    /// `(cutoff, Σ_{d ≤ cutoff})`; the last entry holds every computed term.
    pub partial_sums: Vec<(f64, f64)>,
    pub verdict: Verdict,
    /// Least-squares slope of `log Δ_r` against `log r` over the tail.
    pub slope: f64,
}

impl SeriesReport {
    /// Sum of all computed terms.
    pub fn total(&self) -> f64 {
        self.partial_sums.last().map_or(0.0, |p| p.1)
    }
}

/// Critical exponent estimated from annulus sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentEstimate {
    pub delta_hat: f64,
    pub window_c: f64,
    /// Largest annulus index.
    pub l_max: usize,
    pub regression_r2: f64,
    /// `(n, log a_n)` for every nonempty annulus.
    pub annulus_table: Vec<(usize, f64)>,
}

/// Least-squares line `y = slope·x + intercept` and its `r²`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if syy > 0.0 && sxx > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

/// `∫_{x₀}^{γx₀} F` for every entry of the ball, in ball order.
pub fn orbit_integrals(g: &GroupPresentation, f: &Potential, ball: &OrbitBall) -> Result<Vec<f64>> {
    let x0 = g.basepoint();
    ball.entries
        .par_iter()
        .map(|e| if e.word.is_empty() { Ok(0.0) } else { line_integral(f, x0, e.matrix.apply(x0)) })
        .collect()
}

/// Partial sums of `Σ exp(log_terms)` at unit cutoffs `1, 2, ..` up to
/// `complete_to`, followed by the full sum at the largest distance.
fn series_report(dists: &[f64], log_terms: &[f64], complete_to: f64, truncated: bool) -> SeriesReport {
    let last = complete_to.floor().max(0.0) as usize;
    let mut bins = vec![KahanSum::new(); last + 2];
    for (&d, &lt) in dists.iter().zip(log_terms) {
        let k = (d.ceil().max(1.0) as usize).min(last + 1);
        bins[k].add(lt.exp());
    }
    let mut partial_sums = Vec::with_capacity(last + 1);
    let mut acc = bins[0].value();
    for (r, bin) in bins.iter().enumerate().take(last + 1).skip(1) {
        acc += bin.value();
        partial_sums.push((r as f64, acc));
    }
    let d_max = dists.iter().copied().fold(0.0, f64::max);
    if d_max > last as f64 || partial_sums.is_empty() {
        partial_sums.push((d_max.max(last as f64), acc + bins[last + 1].value()));
    }

    // tail increments Δ_r over the upper half of the complete cutoffs
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for r in (last / 2).max(1)..=last {
        let inc = bins[r].value();
        if r >= 2 && inc > 0.0 {
            xs.push((r as f64).ln());
            ys.push(inc.ln());
        }
    }
    let slope = if xs.len() >= 3 { fit_line(&xs, &ys).0 } else { f64::NAN };
    let verdict = if truncated || !slope.is_finite() {
        Verdict::Inconclusive
    } else if slope < CONVERGENT_SLOPE {
        Verdict::ConvergesLikely
    } else if slope > DIVERGENT_SLOPE {
        Verdict::DivergesLikely
    } else {
        Verdict::Inconclusive
    };
    SeriesReport { partial_sums, verdict, slope }
}

/// Partial sums of `Σ_γ exp(∫_{x₀}^{γx₀} F − s·d(x₀, γx₀))` over the ball.
pub fn poincare_partial(g: &GroupPresentation, f: &Potential, s: f64, ball: &OrbitBall) -> Result<SeriesReport> {
    let ints = orbit_integrals(g, f, ball)?;
    Ok(poincare_from_integrals(ball, &ints, s))
}

/// [`poincare_partial`] with precomputed orbit integrals.
pub fn poincare_from_integrals(ball: &OrbitBall, ints: &[f64], s: f64) -> SeriesReport {
    let dists: Vec<f64> = ball.entries.iter().map(|e| e.displacement).collect();
    let logs: Vec<f64> = dists.iter().zip(ints).map(|(d, i)| i - s * d).collect();
    series_report(&dists, &logs, ball.radius, ball.truncated)
}

/// Annulus regression on `log a_n`, `a_n = Σ_{n−c < d ≤ n} e^{I}`.
pub fn exponent_from_integrals(dists: &[f64], ints: &[f64], radius: f64, window_c: f64) -> Result<ExponentEstimate> {
    if !(window_c > 0.0) {
        return Err(Error::Domain("window_c must be positive".into()));
    }
    let l_max = radius.floor() as usize;
    let mut annuli: Vec<Vec<f64>> = vec![Vec::new(); l_max + 1];
    for (&d, &i) in dists.iter().zip(ints) {
        // n with n − c < d ≤ n
        let lo = d.ceil().max(1.0) as usize;
        let mut n = lo;
        while n <= l_max && (n as f64) - window_c < d {
            annuli[n].push(i);
            n += 1;
        }
    }
    let annulus_table: Vec<(usize, f64)> = annuli
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_empty())
        .map(|(n, a)| (n, log_sum_exp(a)))
        .collect();
    let fit: Vec<&(usize, f64)> = annulus_table.iter().filter(|(n, _)| 2 * n > l_max).collect();
    if fit.len() < 4 {
        return Err(Error::Numeric(format!(
            "insufficient range: {} nonempty annuli in the upper half of radius {radius}",
            fit.len()
        )));
    }
    let xs: Vec<f64> = fit.iter().map(|(n, _)| *n as f64).collect();
    let ys: Vec<f64> = fit.iter().map(|(_, v)| *v).collect();
    let (delta_hat, _, regression_r2) = fit_line(&xs, &ys);
    Ok(ExponentEstimate { delta_hat, window_c, l_max, regression_r2, annulus_table })
}

/// Estimate of `δ_{Γ,F}` from the slope of `log a_n` over the upper half of
/// the annuli of the ball.
pub fn critical_exponent(
    g: &GroupPresentation,
    f: &Potential,
    ball: &OrbitBall,
    window_c: f64,
) -> Result<ExponentEstimate> {
    if ball.radius < MIN_EXPONENT_RADIUS {
        return Err(Error::Domain(format!("critical_exponent needs ball radius >= {MIN_EXPONENT_RADIUS}")));
    }
    let ints = orbit_integrals(g, f, ball)?;
    let dists: Vec<f64> = ball.entries.iter().map(|e| e.displacement).collect();
    exponent_from_integrals(&dists, &ints, ball.radius, window_c)
}

/// Largest pairwise difference of the estimates over the windows `c_list`.
pub fn window_invariance_check(
    g: &GroupPresentation,
    f: &Potential,
    ball: &OrbitBall,
    c_list: &[f64],
) -> Result<f64> {
    if c_list.len() < 2 {
        return Err(Error::Domain("window check needs at least two windows".into()));
    }
    let ints = orbit_integrals(g, f, ball)?;
    let dists: Vec<f64> = ball.entries.iter().map(|e| e.displacement).collect();
    let est = c_list
        .iter()
        .map(|&c| exponent_from_integrals(&dists, &ints, ball.radius, c).map(|e| e.delta_hat))
        .collect::<Result<Vec<f64>>>()?;
    let hi = est.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = est.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(hi - lo)
}

/// Partial sums of `Σ_{0 < |n| ≤ n_max} d·exp(∫_x^{γⁿx} F − δ·d)`, `d = d(x, γⁿx)`,
/// over the cyclic parabolic group `⟨γ⟩`.
pub fn finiteness_series(g: &GroupPresentation, f: &Potential, delta: f64, n_max: usize) -> Result<SeriesReport> {
    if g.kind() != GroupKind::CyclicParabolic {
        return Err(Error::Domain("finiteness_series needs a cyclic parabolic group".into()));
    }
    if n_max == 0 {
        return Err(Error::Domain("finiteness_series needs n_max >= 1".into()));
    }
    let x = g.basepoint();
    let gen = g.generators()[0].matrix;
    let powers: Vec<i64> = (1..=n_max as i64).flat_map(|m| [m, -m]).collect();
    let terms: Vec<(f64, f64)> = powers
        .par_iter()
        .map(|&m| {
            let q = gen.pow(m).apply(x);
            let d = dist(x, q);
            line_integral(f, x, q).map(|i| (d, d.ln() + i - delta * d))
        })
        .collect::<Result<_>>()?;
    let dists: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let logs: Vec<f64> = terms.iter().map(|t| t.1).collect();
    // every term with d ≤ d(x, γ^{n_max} x) is present
    let complete = dists[dists.len() - 2].min(dists[dists.len() - 1]);
    Ok(series_report(&dists, &logs, complete, false))
}

/// Exponents of a group and of its parabolic subgroup under the same potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub delta_full: f64,
    pub delta_parab: f64,
    pub gap: f64,
}

pub fn spectral_gap_check(
    g_full: &GroupPresentation,
    g_parab: &GroupPresentation,
    f: &Potential,
    ball_full: &OrbitBall,
    ball_parab: &OrbitBall,
    window_c: f64,
) -> Result<GapReport> {
    let delta_full = critical_exponent(g_full, f, ball_full, window_c)?.delta_hat;
    let delta_parab = critical_exponent(g_parab, f, ball_parab, window_c)?.delta_hat;
    Ok(GapReport { delta_full, delta_parab, gap: delta_full - delta_parab })
}

/// One atom of a Patterson approximant.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    /// Angle of `γx₀` seen from the observer.
    pub angle: f64,
    pub weight: f64,
    pub word: Word,
    /// `∫_x^{γx₀} F − s·d(x, γx₀)`.
    pub log_weight: f64,
}

/// Atomic approximant of `μ_{x,s}` over an orbit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct PattersonAtoms {
    pub s: f64,
    /// `s − δ̂`.
    pub gap: f64,
    pub observer: HPoint,
    pub atoms: Vec<Atom>,
    pub normalized: bool,
    /// Log of the total unnormalized weight.
    pub log_total: f64,
}

impl PattersonAtoms {
    /// Mass of the atoms whose direction lies in the certificate intervals.
    pub fn mass_in(&self, g: &GroupPresentation) -> Result<f64> {
        let cert = g
            .certificate()
            .ok_or_else(|| Error::Domain("group has no ping-pong certificate".into()))?;
        let s: KahanSum = self
            .atoms
            .iter()
            .filter(|a| cert.contains(boundary_at_angle(self.observer, a.angle)))
            .map(|a| a.weight)
            .collect();
        Ok(s.value())
    }
}

/// Normalized atoms `exp(∫_x^{γx₀} F − s·d(x, γx₀))` at the directions of the
/// orbit points seen from `x`. The identity is left out so that builds at
/// different observers stay aligned; any other orbit point at `x` has no
/// direction and is an error.
pub fn patterson_atoms(
    g: &GroupPresentation,
    f: &Potential,
    s: f64,
    ball: &OrbitBall,
    x: HPoint,
    delta_hat: f64,
) -> Result<PattersonAtoms> {
    if !(s > delta_hat) {
        return Err(Error::Domain(format!("subcritical s: s = {s} is not above delta_hat = {delta_hat}")));
    }
    let x0 = g.basepoint();
    let raw: Vec<Option<(f64, f64)>> = ball
        .entries
        .par_iter()
        .map(|e| {
            if e.word.is_empty() {
                return Ok(None);
            }
            let q = e.matrix.apply(x0);
            let d = dist(x, q);
            if d < 1e-12 {
                return Err(Error::Domain("observer sits on a nontrivial orbit point".into()));
            }
            Ok(Some((direction_angle(x, q), line_integral(f, x, q)? - s * d)))
        })
        .collect::<Result<_>>()?;
    let logs: Vec<f64> = raw.iter().flatten().map(|r| r.1).collect();
    if logs.is_empty() {
        return Err(Error::Domain("ball has no orbit point away from the observer".into()));
    }
    let log_total = log_sum_exp(&logs);
    let atoms = ball
        .entries
        .iter()
        .zip(&raw)
        .filter_map(|(e, r)| {
            r.map(|(angle, lw)| Atom { angle, weight: (lw - log_total).exp(), word: e.word.clone(), log_weight: lw })
        })
        .collect();
    Ok(PattersonAtoms { s, gap: s - delta_hat, observer: x, atoms, normalized: true, log_total })
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Residuals `|log(w_x(γ)/w_y(γ)) + C_{F−s,ξ}(x, y)|` for each `ξ`, where `γ`
/// is the deepest-shell atom closest in direction to `ξ`.
///
/// `μx` and `μy` must be built over the same ball. Only atoms within one
/// largest generator displacement of the ball radius are candidates.
pub fn patterson_equivariance(
    g: &GroupPresentation,
    f: &Potential,
    mu_x: &PattersonAtoms,
    mu_y: &PattersonAtoms,
    ball: &OrbitBall,
    xis: &[BoundaryPoint],
) -> Result<Vec<f64>> {
    let (x, y, s) = (mu_x.observer, mu_y.observer, mu_x.s);
    if mu_x.atoms.len() != mu_y.atoms.len() || mu_y.s != s {
        return Err(Error::Domain("equivariance needs two builds over the same ball and s".into()));
    }
    let shell = ball.radius - g.max_generator_displacement();
    let x0 = g.basepoint();
    let deep: Vec<(usize, f64)> = mu_x
        .atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| dist(x0, g.word_matrix(&a.word).apply(x0)) >= shell)
        .map(|(k, a)| (k, a.angle))
        .collect();
    if deep.is_empty() {
        return Err(Error::Domain("no atoms in the outer shell of the ball".into()));
    }
    xis.par_iter()
        .map(|&xi| {
            let theta = boundary_angle(x, xi);
            let (k, _) = deep
                .iter()
                .copied()
                .min_by(|a, b| angle_gap(a.1, theta).total_cmp(&angle_gap(b.1, theta)))
                .expect("nonempty");
            if mu_x.atoms[k].word != mu_y.atoms[k].word {
                return Err(Error::Domain("atom lists are not aligned".into()));
            }
            let ratio = mu_x.atoms[k].log_weight - mu_y.atoms[k].log_weight;
            let c = gibbs_cocycle_auto(f, xi, x, y)?.value - s * busemann(xi, x, y);
            Ok((ratio + c).abs())
        })
        .collect()
}

/// One row of the bump-family sandwich.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichRow {
    pub n: usize,
    pub c_n: f64,
    pub delta_hat: f64,
    pub tol: f64,
    /// Exponent witnessed by `⟨h⟩` alone at the ball radius.
    pub witness: f64,
    /// `c_n (1 − ℓ(h)/R)`.
    pub witness_bound: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub witness_ok: bool,
}

/// Sandwich tolerance `0.1·max(1, 0.05·c_n)`.
pub fn sandwich_tol(c_n: f64) -> f64 {
    0.1 * (1.0f64).max(0.05 * c_n)
}

/// Checks `c_n − tol ≤ δ̂(F_n) ≤ δ̂₀ + c_n + tol` for each `(n, c_n, F_n)`.
///
/// The lower bound is witnessed by the orbit of `x₀` under `⟨h⟩`: on the
/// annulus `(R − ℓ(h), R]` it contributes at least `e^{c_n(R − ℓ(h))}`.
pub fn sandwich_check_fn(
    g: &GroupPresentation,
    family: &[(usize, f64, Potential)],
    ball: &OrbitBall,
    delta_0: f64,
    h: &Mobius,
    window_c: f64,
) -> Result<Vec<SandwichRow>> {
    let ell = h.translation_length()?;
    let radius = ball.radius;
    let x0 = g.basepoint();
    let dists: Vec<f64> = ball.entries.iter().map(|e| e.displacement).collect();
    let mut rows = Vec::with_capacity(family.len());
    let mut unit_cache: Option<(Potential, Vec<f64>)> = None;
    for (n, c_n, f) in family {
        let ints = match f.as_scaled_unit_bump() {
            Some((c, unit)) => {
                let reuse = matches!(
                    (&unit_cache, &unit),
                    (Some((Potential::OrbitBump(a), _)), Potential::OrbitBump(b)) if a.orbit_axis == b.orbit_axis
                );
                if !reuse {
                    let ints = orbit_integrals(g, &unit, ball)?;
                    unit_cache = Some((unit, ints));
                }
                unit_cache.as_ref().expect("cached").1.iter().map(|v| c * v).collect()
            }
            None => orbit_integrals(g, f, ball)?,
        };
        let est = exponent_from_integrals(&dists, &ints, radius, window_c)?;
        let mut shell = Vec::new();
        let mut k = 1i64;
        loop {
            let q = h.pow(k).apply(x0);
            let d = dist(x0, q);
            if d > radius {
                break;
            }
            if d > radius - ell {
                shell.push(line_integral(f, x0, q)?);
                shell.push(line_integral(f, x0, h.pow(-k).apply(x0))?);
            }
            k += 1;
        }
        let witness = if shell.is_empty() { f64::NEG_INFINITY } else { log_sum_exp(&shell) / radius };
        let witness_bound = c_n * (1.0 - ell / radius);
        let tol = sandwich_tol(*c_n);
        rows.push(SandwichRow {
            n: *n,
            c_n: *c_n,
            delta_hat: est.delta_hat,
            tol,
            witness,
            witness_bound,
            lower_ok: est.delta_hat >= c_n - tol,
            upper_ok: est.delta_hat <= delta_0 + c_n + tol,
            witness_ok: witness >= witness_bound - 1e-9,
        });
    }
    Ok(rows)
}

/// Outcome of the length-spectrum gcd test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Arithmeticity {
    ArithmeticLikely(f64),
    NonArithmeticLikely,
}

const GCD_TOL: f64 = 1e-7;
const GCD_MAX_ITER: usize = 200;
const GCD_MIN: f64 = 1e-5;

/// Euclidean real gcd; `None` when it does not settle within the budget.
fn real_gcd(a: f64, b: f64) -> Option<f64> {
    let (mut a, mut b) = if a >= b { (a, b) } else { (b, a) };
    for _ in 0..GCD_MAX_ITER {
        if b <= GCD_TOL * a.max(1.0) {
            return Some(a);
        }
        let r = a - (a / b).floor() * b;
        // a remainder within tolerance of b is a full step
        let r = if b - r <= GCD_TOL * a.max(1.0) { 0.0 } else { r };
        (a, b) = (b, r);
    }
    None
}

/// Real-gcd test on a list of positive lengths.
pub fn arithmeticity_diagnostic(lengths: &[f64]) -> Result<Arithmeticity> {
    if lengths.is_empty() {
        return Err(Error::Domain("arithmeticity needs at least one length".into()));
    }
    if lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::Domain("lengths must be positive and finite".into()));
    }
    let mut g = lengths[0];
    for &l in &lengths[1..] {
        match real_gcd(g, l) {
            Some(d) if d > GCD_MIN => g = d,
            _ => return Ok(Arithmeticity::NonArithmeticLikely),
        }
    }
    Ok(Arithmeticity::ArithmeticLikely(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{orbit_ball, BallOptions};

    fn ball(g: &GroupPresentation, r: f64) -> OrbitBall {
        orbit_ball(g, r, &BallOptions::default()).unwrap()
    }

    fn cyclic2() -> GroupPresentation {
        GroupPresentation::cyclic_hyperbolic(Mobius::diagonal(2.0).unwrap()).unwrap()
    }

    #[test]
    fn cyclic_series_limit() {
        let g = cyclic2();
        let b = ball(&g, 40.0);
        let r = poincare_partial(&g, &Potential::Zero, 1.0, &b).unwrap();
        assert!((r.total() - 5.0 / 3.0).abs() < 1e-6);
        assert_eq!(r.verdict, Verdict::ConvergesLikely);
        for w in r.partial_sums.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
        let big = poincare_partial(&g, &Potential::Zero, 60.0, &b).unwrap();
        assert!((big.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_shifts_series_parameter() {
        let g = GroupPresentation::schottky_symmetric(3.0).unwrap();
        let b = ball(&g, 7.0);
        let a = poincare_partial(&g, &Potential::Constant(0.4), 1.5, &b).unwrap();
        let z = poincare_partial(&g, &Potential::Zero, 1.1, &b).unwrap();
        for (p, q) in a.partial_sums.iter().zip(&z.partial_sums) {
            assert!((p.1 - q.1).abs() <= 1e-12 * q.1);
        }
    }

    #[test]
    fn exponent_examples() {
        let g = cyclic2();
        let e = critical_exponent(&g, &Potential::Zero, &ball(&g, 14.0), 1.0).unwrap();
        assert!(e.delta_hat.abs() <= 0.02, "{}", e.delta_hat);
        let p = GroupPresentation::parabolic_cyclic();
        let e = critical_exponent(&p, &Potential::Zero, &ball(&p, 14.0), 1.0).unwrap();
        assert!((0.45..=0.55).contains(&e.delta_hat), "{}", e.delta_hat);
        assert!(matches!(
            critical_exponent(&g, &Potential::Zero, &ball(&g, 8.0), 0.2),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn identical_windows_agree() {
        let g = GroupPresentation::schottky_symmetric(3.0).unwrap();
        let d = window_invariance_check(&g, &Potential::Zero, &ball(&g, 9.0), &[1.0, 1.0]).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn finiteness_examples() {
        let g = GroupPresentation::parabolic_cyclic();
        let one = finiteness_series(&g, &Potential::Zero, 0.7, 1).unwrap();
        let d = 1.5f64.acosh();
        assert!((one.total() - 2.0 * d * (-0.7 * d).exp()).abs() < 1e-12);
        let conv = finiteness_series(&g, &Potential::Zero, 1.0, 2000).unwrap();
        assert_eq!(conv.verdict, Verdict::ConvergesLikely);
        let div = finiteness_series(&g, &Potential::Zero, 0.5, 2000).unwrap();
        assert_eq!(div.verdict, Verdict::DivergesLikely);
    }

    #[test]
    fn patterson_normalized_and_subcritical_rejected() {
        let g = GroupPresentation::schottky_symmetric(3.0).unwrap();
        let b = ball(&g, 8.0);
        let mu = patterson_atoms(&g, &Potential::Zero, 1.0, &b, g.basepoint(), 0.7).unwrap();
        let total: KahanSum = mu.atoms.iter().map(|a| a.weight).collect();
        assert!((total.value() - 1.0).abs() < 1e-12);
        assert!(mu.atoms.iter().all(|a| a.weight > 0.0));
        assert!(patterson_atoms(&g, &Potential::Zero, 0.5, &b, g.basepoint(), 0.7).is_err());
    }

    #[test]
    fn arithmeticity_examples() {
        assert_eq!(arithmeticity_diagnostic(&[1.0, 2.0, 3.0]).unwrap(), Arithmeticity::ArithmeticLikely(1.0));
        assert_eq!(
            arithmeticity_diagnostic(&[4f64.ln(), 9f64.ln()]).unwrap(),
            Arithmeticity::NonArithmeticLikely
        );
        assert_eq!(arithmeticity_diagnostic(&[0.7]).unwrap(), Arithmeticity::ArithmeticLikely(0.7));
        assert!(arithmeticity_diagnostic(&[]).is_err());
    }
}
