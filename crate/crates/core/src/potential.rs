//! Potentials on the plane: functions of the base point only, evaluated
//! Γ-invariantly through a [`Tiling`] of the group.
//!
//! Line integrals run along arclength-parametrized segments. Along a segment
//! every ingredient is of the form `A cosh s + B sinh s` (distance to a
//! geodesic, horocyclic height), so the points where an integrand stops
//! being smooth are solved for in closed form and handed to the quadrature.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{dist, geodesic_normal, poisson_kernel, GeodesicChart, Hyperboloid, IsometryKind, RaySegment};
use crate::group::{GroupPresentation, Tiling};
use crate::quadrature;
use crate::{BoundaryPoint, Geodesic, HPoint, Mobius};

/// Relative tolerance of [`line_integral`].
pub const LINE_TOL: f64 = 1e-9;
/// Tighter tolerance used inside cocycles, which difference two integrals.
const COCYCLE_LINE_TOL: f64 = 1e-12;
/// Increment below which a Gibbs cocycle counts as converged.
pub const COCYCLE_TOL: f64 = 1e-7;
/// Arclength between samples when collecting translates along a segment.
const SAMPLE_SPACING: f64 = 0.5;
/// Critical exponent of a parabolic cyclic group.
pub const PARABOLIC_DELTA: f64 = 0.5;

type Seg = RaySegment<f64>;

/// Height profile in a cusp: the sequence `t_n` of levels and `Y_n` of band
/// boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspSchedule {
    pub xi_p: BoundaryPoint,
    pub u0: HPoint,
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub delta_parabolic: f64,
    /// `Σ e^{d(x₀,γx₀)(t_n − δ)}` over the parabolic elements of band `n`.
    pub band_sums: Vec<f64>,
}

impl CuspSchedule {
    /// Checks `t` positive strictly decreasing and `Y_{n+1} ≥ Y_n + t_n − t_{n+1}`.
    pub fn new(xi_p: BoundaryPoint, u0: HPoint, t: Vec<f64>, y: Vec<f64>, delta_parabolic: f64) -> Result<Self> {
        if t.is_empty() || t.len() != y.len() {
            return Err(Error::Domain("schedule needs equally many levels t and boundaries Y".into()));
        }
        if t.iter().any(|&v| !(v > 0.0)) || t.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Domain("t must be positive and strictly decreasing".into()));
        }
        for n in 0..y.len() - 1 {
            if y[n + 1] < y[n] + t[n] - t[n + 1] {
                return Err(Error::Domain(format!("band {n} is shorter than t_n - t_(n+1)")));
            }
        }
        Ok(Self { xi_p, u0, t, y, delta_parabolic, band_sums: Vec::new() })
    }

    /// `ρ(p) = β_ξp(p, u₀)`, positive inside the horoball through `u₀`.
    pub fn height(&self, p: HPoint) -> f64 {
        (poisson_kernel(p, self.xi_p) / poisson_kernel(self.u0, self.xi_p)).ln()
    }

    /// Null vector `w` with `ρ(z) = −log⟨z, w⟩`.
    fn height_form(&self) -> Hyperboloid<f64> {
        let n = Hyperboloid::null(self.xi_p);
        n.scale(Hyperboloid::from_point(self.u0).minkowski(&n).recip())
    }

    /// The profile as a function of height: `outside` up to `Y₀`, then on
    /// each band a unit-slope descent from `t_n` to `t_{n+1}` followed by the
    /// plateau `t_{n+1}`. Constant `t_last` beyond the last band.
    pub fn profile(&self, rho: f64, outside: f64) -> f64 {
        if rho <= self.y[0] {
            return outside;
        }
        for n in 0..self.y.len() - 1 {
            if rho <= self.y[n + 1] {
                let edge = self.y[n] + self.t[n] - self.t[n + 1];
                return if rho <= edge { self.t[n] + self.y[n] - rho } else { self.t[n + 1] };
            }
        }
        self.t[self.t.len() - 1]
    }

    /// Heights where the profile has a kink.
    fn levels(&self) -> Vec<f64> {
        let mut out = vec![self.y[0]];
        for n in 0..self.y.len() - 1 {
            out.push(self.y[n] + self.t[n] - self.t[n + 1]);
            out.push(self.y[n + 1]);
        }
        out
    }
}

/// Height potential of a cusp (`H`): the schedule profile applied to the
/// largest height over the horoball translates.
#[derive(Debug, Clone)]
pub struct CuspHeight {
    pub schedule: CuspSchedule,
    pub outside_value: f64,
    pub tiling: Option<Arc<Tiling>>,
}

/// Bump of height `c_n` around the Γ-orbit of a closed geodesic (`F_n`).
#[derive(Debug, Clone)]
pub struct OrbitBump {
    pub n: usize,
    pub c_n: f64,
    pub orbit_axis: Geodesic,
    pub period: f64,
    pub base: Box<Potential>,
    pub tiling: Option<Arc<Tiling>>,
}

#[derive(Debug, Clone)]
pub enum Potential {
    Zero,
    Constant(f64),
    CuspHeight(CuspHeight),
    OrbitBump(OrbitBump),
    Max(Vec<Potential>),
}

/// Anything that can be integrated along geodesic segments.
pub trait Field {
    fn eval(&self, p: HPoint) -> f64;

    /// Arclength positions in `[0, seg.length]` where the integrand may fail
    /// to be smooth.
    fn breakpoints(&self, _seg: &Seg) -> Vec<f64> {
        Vec::new()
    }
}

/// `∫_seg f` over `[0, seg.length]` for a generic field.
pub fn integrate_field<F: Field + ?Sized>(f: &F, seg: &Seg, rel_tol: f64) -> Result<f64> {
    let bps = f.breakpoints(seg);
    quadrature::integrate(|s| f.eval(seg.point_at(s)), 0.0, seg.length, &bps, rel_tol)
}

fn translates(tiling: &Option<Arc<Tiling>>, seg: &Seg) -> Vec<Mobius> {
    match tiling {
        Some(t) => t.near_segment(seg, SAMPLE_SPACING),
        None => vec![Mobius::identity()],
    }
}

fn translates_at(tiling: &Option<Arc<Tiling>>, p: HPoint) -> Vec<Mobius> {
    match tiling {
        Some(t) => t.near_point(p),
        None => vec![Mobius::identity()],
    }
}

#[inline]
fn form(ab: (f64, f64), s: f64) -> f64 {
    ab.0 * s.cosh() + ab.1 * s.sinh()
}

/// Roots in `(0, len)` of `A cosh s + B sinh s = C`.
fn solve_form(a: f64, b: f64, c: f64, len: f64, out: &mut Vec<f64>) {
    // With u = e^s: (A + B) u² − 2 C u + (A − B) = 0.
    let p = a + b;
    let q = a - b;
    let mut push = |u: f64| {
        if u > 0.0 && u.is_finite() {
            let s = u.ln();
            if s > 0.0 && s < len {
                out.push(s);
            }
        }
    };
    let scale = a.abs().max(b.abs()).max(c.abs());
    if p.abs() <= 1e-15 * scale {
        if c != 0.0 {
            push(q / (2.0 * c));
        }
        return;
    }
    let disc = c * c - p * q;
    if disc < 0.0 {
        return;
    }
    let r = c + c.signum() * disc.sqrt();
    if r == 0.0 {
        return;
    }
    push(r / p);
    push(q / r);
}

/// Minimum of `|A cosh s + B sinh s|` on `[0, len]`.
fn min_abs_form(ab: (f64, f64), len: f64) -> f64 {
    let mut roots = Vec::new();
    solve_form(ab.0, ab.1, 0.0, len, &mut roots);
    if !roots.is_empty() {
        return 0.0;
    }
    let mut m = form(ab, 0.0).abs().min(form(ab, len).abs());
    if ab.1.abs() < ab.0.abs() {
        let s = (-ab.1 / ab.0).atanh();
        if s > 0.0 && s < len {
            m = m.min(form(ab, s).abs());
        }
    }
    m
}

/// A potential restricted to one segment, with its translates resolved.
enum Prepared<'a> {
    Const(f64),
    Bump {
        c: f64,
        forms: Vec<(f64, f64)>,
        base: Box<Prepared<'a>>,
    },
    Cusp {
        schedule: &'a CuspSchedule,
        outside: f64,
        forms: Vec<(f64, f64)>,
    },
    Max(Vec<Prepared<'a>>),
}

impl Prepared<'_> {
    fn value(&self, s: f64) -> f64 {
        match self {
            Prepared::Const(k) => *k,
            Prepared::Bump { c, forms, base } => {
                let d = forms.iter().map(|&ab| form(ab, s).abs()).fold(f64::INFINITY, f64::min);
                let bump = if d.is_finite() { c * (1.0 - d.asinh()) } else { f64::NEG_INFINITY };
                bump.max(base.value(s))
            }
            Prepared::Cusp { schedule, outside, forms } => {
                let f = forms.iter().map(|&ab| form(ab, s)).fold(f64::INFINITY, f64::min);
                if f.is_finite() {
                    schedule.profile(-f.ln(), *outside)
                } else {
                    *outside
                }
            }
            Prepared::Max(parts) => parts.iter().map(|p| p.value(s)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn constant(&self) -> Option<f64> {
        match self {
            Prepared::Const(k) => Some(*k),
            _ => None,
        }
    }

    fn breakpoints(&self, len: f64, out: &mut Vec<f64>) {
        match self {
            Prepared::Const(_) => {}
            Prepared::Bump { c, forms, base } => {
                for &(a, b) in forms {
                    solve_form(a, b, 0.0, len, out);
                }
                for (i, &(ai, bi)) in forms.iter().enumerate() {
                    for &(aj, bj) in &forms[i + 1..] {
                        solve_form(ai - aj, bi - bj, 0.0, len, out);
                        solve_form(ai + aj, bi + bj, 0.0, len, out);
                    }
                }
                match base.constant() {
                    Some(k) => {
                        let level = 1.0 - k / c;
                        if level > 0.0 {
                            let h = level.sinh();
                            for &(a, b) in forms {
                                solve_form(a, b, h, len, out);
                                solve_form(a, b, -h, len, out);
                            }
                        }
                    }
                    None => {
                        base.breakpoints(len, out);
                        let env = Prepared::Bump { c: *c, forms: forms.clone(), base: Box::new(Prepared::Const(f64::NEG_INFINITY)) };
                        crossings(&env, base, len, out);
                    }
                }
            }
            Prepared::Cusp { schedule, forms, .. } => {
                for level in schedule.levels() {
                    let target = (-level).exp();
                    for &(a, b) in forms {
                        solve_form(a, b, target, len, out);
                    }
                }
                for (i, &(ai, bi)) in forms.iter().enumerate() {
                    for &(aj, bj) in &forms[i + 1..] {
                        solve_form(ai - aj, bi - bj, 0.0, len, out);
                    }
                }
            }
            Prepared::Max(parts) => {
                for p in parts {
                    p.breakpoints(len, out);
                }
                for i in 0..parts.len() {
                    for j in i + 1..parts.len() {
                        crossings(&parts[i], &parts[j], len, out);
                    }
                }
            }
        }
    }
}

/// Sign changes of `f − g` on `[0, len]`, located by sampling and bisection.
fn crossings(f: &Prepared, g: &Prepared, len: f64, out: &mut Vec<f64>) {
    if f.constant().is_some() && g.constant().is_some() {
        return;
    }
    let n = ((len / 0.05).ceil() as usize).max(32);
    let h = |s: f64| f.value(s) - g.value(s);
    let mut s0 = 0.0;
    let mut h0 = h(0.0);
    for k in 1..=n {
        let s1 = len * k as f64 / n as f64;
        let h1 = h(s1);
        if (h0 < 0.0) != (h1 < 0.0) {
            let (mut lo, mut hi, hlo) = (s0, s1, h0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (h(mid) < 0.0) == (hlo < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        s0 = s1;
        h0 = h1;
    }
}

impl Potential {
    /// `F_n`: bump of height `c_n` around the Γ-orbit of the axis of `h`,
    /// maxed with `base`.
    pub fn orbit_bump(n: usize, c_n: f64, h: &Mobius, base: Potential, tiling: Option<Arc<Tiling>>) -> Result<Self> {
        if !(c_n >= 0.0) || !c_n.is_finite() {
            return Err(Error::Domain(format!("bump height must be finite and nonnegative, got {c_n}")));
        }
        Ok(Potential::OrbitBump(OrbitBump {
            n,
            c_n,
            orbit_axis: h.axis()?,
            period: h.translation_length()?,
            base: Box::new(base),
            tiling,
        }))
    }

    /// Cusp potential with continuity-matched outside value `t₀`.
    pub fn cusp_height(schedule: CuspSchedule, tiling: Option<Arc<Tiling>>) -> Self {
        let outside_value = schedule.t[0];
        Potential::CuspHeight(CuspHeight { schedule, outside_value, tiling })
    }

    pub fn eval(&self, p: HPoint) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(k) => *k,
            Potential::CuspHeight(h) => {
                let x = Hyperboloid::from_point(p);
                let w = h.schedule.height_form();
                let rho = translates_at(&h.tiling, p)
                    .iter()
                    .map(|g| -x.minkowski(&transform_vector(g, &w)).ln())
                    .fold(f64::NEG_INFINITY, f64::max);
                h.schedule.profile(rho, h.outside_value)
            }
            Potential::OrbitBump(b) => {
                let x = Hyperboloid::from_point(p);
                let d = translates_at(&b.tiling, p)
                    .iter()
                    .map(|g| x.minkowski(&geodesic_normal(&b.orbit_axis.transformed(g))).abs().asinh())
                    .fold(f64::INFINITY, f64::min);
                (b.c_n - b.c_n * d).max(b.base.eval(p))
            }
            Potential::Max(parts) => parts.iter().map(|f| f.eval(p)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Lipschitz constant of `eval`.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Potential::Zero | Potential::Constant(_) => 0.0,
            Potential::CuspHeight(_) => 1.0,
            Potential::OrbitBump(b) => b.c_n.max(b.base.lipschitz()),
            Potential::Max(parts) => parts.iter().map(Potential::lipschitz).fold(0.0, f64::max),
        }
    }

    /// `sup F`.
    pub fn sup(&self) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(k) => *k,
            Potential::CuspHeight(h) => h.outside_value.max(h.schedule.t[0]),
            Potential::OrbitBump(b) => b.c_n.max(b.base.sup()),
            Potential::Max(parts) => parts.iter().map(Potential::sup).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// `inf F`.
    pub fn inf(&self) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(k) => *k,
            Potential::CuspHeight(h) => h.outside_value.min(*h.schedule.t.last().expect("nonempty")),
            Potential::OrbitBump(b) => b.base.inf(),
            Potential::Max(parts) => parts.iter().map(Potential::inf).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// `sup |F|`.
    pub fn sup_abs(&self) -> f64 {
        self.sup().abs().max(self.inf().abs())
    }

    fn prepare(&self, seg: &Seg) -> Prepared<'_> {
        match self {
            Potential::Zero => Prepared::Const(0.0),
            Potential::Constant(k) => Prepared::Const(*k),
            Potential::CuspHeight(h) => {
                let w = h.schedule.height_form();
                let cutoff = (-h.schedule.y[0]).exp();
                let forms: Vec<(f64, f64)> = translates(&h.tiling, seg)
                    .iter()
                    .map(|g| seg.linear_form(&transform_vector(g, &w)))
                    .filter(|&ab| min_abs_form(ab, seg.length) < cutoff * (1.0 + 1e-9))
                    .collect();
                if forms.is_empty() {
                    Prepared::Const(h.outside_value)
                } else {
                    Prepared::Cusp { schedule: &h.schedule, outside: h.outside_value, forms }
                }
            }
            Potential::OrbitBump(b) => {
                let base = b.base.prepare(seg);
                if b.c_n == 0.0 {
                    return Prepared::Max(vec![Prepared::Const(0.0), base]);
                }
                // translates whose bump cannot exceed the base are dropped
                let reach = (1.0 - b.base.inf() / b.c_n).max(0.0);
                let cutoff = reach.sinh() * (1.0 + 1e-9) + 1e-12;
                let forms: Vec<(f64, f64)> = translates(&b.tiling, seg)
                    .iter()
                    .map(|g| seg.linear_form(&geodesic_normal(&b.orbit_axis.transformed(g))))
                    .filter(|&ab| min_abs_form(ab, seg.length) < cutoff)
                    .collect();
                if forms.is_empty() {
                    return base;
                }
                Prepared::Bump { c: b.c_n, forms, base: Box::new(base) }
            }
            Potential::Max(parts) => {
                let prepared: Vec<Prepared> = parts.iter().map(|p| p.prepare(seg)).collect();
                if prepared.iter().all(|p| p.constant().is_some()) {
                    return Prepared::Const(
                        prepared.iter().filter_map(Prepared::constant).fold(f64::NEG_INFINITY, f64::max),
                    );
                }
                Prepared::Max(prepared)
            }
        }
    }

    /// For a bump over a zero base, `F = c·B` with `B` the unit bump:
    /// returns `(c, B)`, so integrals of a whole family share one pass.
    pub fn as_scaled_unit_bump(&self) -> Option<(f64, Potential)> {
        match self {
            Potential::OrbitBump(b) if b.base.constant_value() == Some(0.0) => {
                let mut unit = b.clone();
                unit.c_n = 1.0;
                Some((b.c_n, Potential::OrbitBump(unit)))
            }
            _ => None,
        }
    }

    /// The tiling of the first Γ-invariant ingredient.
    pub fn tiling(&self) -> Option<&Arc<Tiling>> {
        match self {
            Potential::Zero | Potential::Constant(_) => None,
            Potential::CuspHeight(h) => h.tiling.as_ref(),
            Potential::OrbitBump(b) => b.tiling.as_ref().or_else(|| b.base.tiling()),
            Potential::Max(parts) => parts.iter().find_map(Potential::tiling),
        }
    }

    fn constant_value(&self) -> Option<f64> {
        match self {
            Potential::Zero => Some(0.0),
            Potential::Constant(k) => Some(*k),
            Potential::Max(parts) => parts
                .iter()
                .map(Potential::constant_value)
                .try_fold(f64::NEG_INFINITY, |m, v| v.map(|v| m.max(v))),
            _ => None,
        }
    }

    /// `∫ F` over the first `len` of arclength of a chart.
    ///
    /// The geodesic is cut into pieces of length at most one, and each piece
    /// is moved next to the fundamental domain before integrating, so the
    /// hyperboloid coordinates stay of unit size. The moving isometry is
    /// carried from piece to piece and applied to exact chart coordinates:
    /// a far point is never rounded in half-plane coordinates.
    pub fn integrate_chart(&self, chart: &GeodesicChart<f64>, len: f64, rel_tol: f64) -> Result<f64> {
        if let Some(k) = self.constant_value() {
            return Ok(k * len);
        }
        let n = len.ceil().max(1.0) as usize;
        let mut total = crate::scalar::KahanSum::new();
        let mut m = chart.from_std();
        let mut a = chart.std_point(0.0);
        for k in 1..=n {
            let b = chart.std_point(len * k as f64 / n as f64);
            if let Some(t) = self.tiling() {
                let mid = chart.std_point(len * (k as f64 - 0.5) / n as f64);
                let (_, g) = t.group().reduce(m.apply(mid));
                m = (g * m).renormalized();
            }
            total.add(self.integrate_segment(&RaySegment::between(m.apply(a), m.apply(b)), rel_tol)?);
            a = b;
        }
        Ok(total.value())
    }

    /// `∫_p^q F`.
    pub fn integrate_between(&self, p: HPoint, q: HPoint, rel_tol: f64) -> Result<f64> {
        let len = dist(p, q);
        if let Some(k) = self.constant_value() {
            return Ok(k * len);
        }
        if len <= 1.0 && self.tiling().is_none() {
            return self.integrate_segment(&RaySegment::between(p, q), rel_tol);
        }
        self.integrate_chart(&GeodesicChart::through(p, q), len, rel_tol)
    }

    /// `∫ F` over `[0, seg.length]`.
    pub fn integrate_segment(&self, seg: &Seg, rel_tol: f64) -> Result<f64> {
        if seg.length <= 0.0 {
            return Ok(0.0);
        }
        let prepared = self.prepare(seg);
        if let Some(k) = prepared.constant() {
            return Ok(k * seg.length);
        }
        let mut bps = Vec::new();
        prepared.breakpoints(seg.length, &mut bps);
        quadrature::integrate(|s| prepared.value(s), 0.0, seg.length, &bps, rel_tol)
    }
}

impl Field for Potential {
    fn eval(&self, p: HPoint) -> f64 {
        Potential::eval(self, p)
    }

    fn breakpoints(&self, seg: &Seg) -> Vec<f64> {
        let mut out = Vec::new();
        self.prepare(seg).breakpoints(seg.length, &mut out);
        out
    }
}

/// Distance from `p` to the Γ-orbit of `axis`, over the translates the
/// tiling sees around `p`.
pub fn orbit_distance(axis: &Geodesic, tiling: &Tiling, p: HPoint) -> f64 {
    let x = Hyperboloid::from_point(p);
    tiling
        .near_point(p)
        .iter()
        .map(|g| x.minkowski(&geodesic_normal(&axis.transformed(g))).abs().asinh())
        .fold(f64::INFINITY, f64::min)
}

/// Image of a hyperboloid vector under an isometry: with
/// `M = [[t + v, u], [u, t − v]]` the action is `M ↦ g M gᵀ`.
fn transform_vector(g: &Mobius, w: &Hyperboloid<f64>) -> Hyperboloid<f64> {
    let (p, q, r) = (w.t + w.v, w.u, w.t - w.v);
    // g M = [[a p + b q, a q + b r], [c p + d q, c q + d r]]
    let (m11, m12) = (g.a * p + g.b * q, g.a * q + g.b * r);
    let (m21, m22) = (g.c * p + g.d * q, g.c * q + g.d * r);
    let p2 = m11 * g.a + m12 * g.b;
    let q2 = m11 * g.c + m12 * g.d;
    let r2 = m21 * g.c + m22 * g.d;
    Hyperboloid { t: 0.5 * (p2 + r2), u: q2, v: 0.5 * (p2 - r2) }
}

/// `∫_p^q F` along the geodesic segment.
pub fn line_integral(f: &Potential, p: HPoint, q: HPoint) -> Result<f64> {
    f.integrate_between(p, q, LINE_TOL)
}

/// Value of a Gibbs cocycle at a finite horizon and its convergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CocycleReport {
    /// Value at horizon `2T`.
    pub value: f64,
    pub horizon: f64,
    /// `|C(2T) − C(T)|`.
    pub increment: f64,
    pub converged: bool,
}

fn cocycle_at(f: &Potential, xi: BoundaryPoint, x: HPoint, y: HPoint, t: f64) -> Result<f64> {
    // In the standard coordinates of the ray from y, ξ is ∞ and the ray
    // from x is vertical; it is stopped on the horocycle through ξ(T).
    let ray = GeodesicChart::ray(y, xi);
    let from_std = ray.from_std();
    let xs = from_std.inverse().apply(x);
    let start_y = ray.std_point(0.0).im.ln();
    let start_x = xs.im.ln();
    let top = start_y + t;
    if !(top >= start_x) {
        return Err(Error::Domain(format!("cocycle horizon {t} does not reach past x")));
    }
    if let Some(k) = f.constant_value() {
        return Ok(k * (start_x - start_y));
    }
    // Both rays are cut at the same log-heights and each level is moved by
    // the same isometry, so rounding cannot pull their endpoints apart.
    let lo = start_y.min(start_x);
    let n = (top - lo).ceil().max(1.0) as usize;
    let mut m = from_std;
    let mut from_y = crate::scalar::KahanSum::new();
    let mut from_x = crate::scalar::KahanSum::new();
    for j in 0..n {
        let a = lo + (top - lo) * j as f64 / n as f64;
        let b = lo + (top - lo) * (j + 1) as f64 / n as f64;
        if let Some(tl) = f.tiling() {
            let (_, g) = tl.group().reduce(m.apply(HPoint { re: 0.0, im: (0.5 * (a + b)).exp() }));
            m = (g * m).renormalized();
        }
        for (re, start, acc) in [(0.0, start_y, &mut from_y), (xs.re, start_x, &mut from_x)] {
            let a = a.max(start);
            if a >= b {
                continue;
            }
            let (p, q) = (HPoint { re, im: a.exp() }, HPoint { re, im: b.exp() });
            // low on a ray far from the other one, reduce afresh
            let mm = match f.tiling() {
                Some(tl) if re.abs() > a.exp() => {
                    let (_, g) = tl.group().reduce(from_std.apply(HPoint { re, im: (0.5 * (a + b)).exp() }));
                    (g * from_std).renormalized()
                }
                _ => m,
            };
            acc.add(f.integrate_segment(&RaySegment::between(mm.apply(p), mm.apply(q)), COCYCLE_LINE_TOL)?);
        }
    }
    Ok(from_y.value() - from_x.value())
}

/// `C_{F,ξ}(x, y) ≈ ∫_y^{ξ(T)} F − ∫_x^{ξ'(T)} F`, where `ξ(T)` is the point
/// at distance `T` from `y` on the ray to `ξ` and `ξ'(T)` is where the ray
/// from `x` to `ξ` meets the horocycle at `ξ` through `ξ(T)`; evaluated at
/// `T` and `2T`.
pub fn gibbs_cocycle(f: &Potential, xi: BoundaryPoint, x: HPoint, y: HPoint, t: f64) -> Result<CocycleReport> {
    if !(t > 0.0) {
        return Err(Error::Domain("cocycle horizon must be positive".into()));
    }
    if x == y {
        return Ok(CocycleReport { value: 0.0, horizon: t, increment: 0.0, converged: true });
    }
    let a = cocycle_at(f, xi, x, y, t)?;
    let b = cocycle_at(f, xi, x, y, 2.0 * t)?;
    let increment = (b - a).abs();
    Ok(CocycleReport { value: b, horizon: t, increment, converged: increment < COCYCLE_TOL })
}

/// `∫_y^{ξ(T)} F − ∫_x^{ξ'(T)} F` at the single horizon `T`.
pub fn gibbs_cocycle_at(f: &Potential, xi: BoundaryPoint, x: HPoint, y: HPoint, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain("cocycle horizon must be positive".into()));
    }
    if x == y {
        return Ok(0.0);
    }
    cocycle_at(f, xi, x, y, t)
}

/// Horizons tried by [`gibbs_cocycle_auto`]. For Lipschitz potentials the
/// truncation error decays like `e^{-T}`, so `T = 20` is the first horizon
/// with a chance at the tolerance.
const HORIZONS: [f64; 5] = [4.0, 8.0, 12.0, 16.0, 20.0];

/// Gibbs cocycle at the first horizon whose report converges, else at the
/// horizon with the smallest increment: past it rounding noise outgrows the
/// truncation error.
pub fn gibbs_cocycle_auto(f: &Potential, xi: BoundaryPoint, x: HPoint, y: HPoint) -> Result<CocycleReport> {
    let mut best: Option<CocycleReport> = None;
    for t in HORIZONS {
        let r = gibbs_cocycle(f, xi, x, y, t)?;
        if r.converged {
            return Ok(r);
        }
        if best.is_none_or(|b| r.increment < b.increment) {
            best = Some(r);
        }
    }
    Ok(best.expect("nonempty horizon list"))
}

/// `max |C_{F,ξ}(x, y) + ∫_x^y F|` over `samples` points `ξ` of the shadow
/// of `B(y, r)` seen from `x`.
pub fn cocycle_shadow_residual(f: &Potential, x: HPoint, y: HPoint, r: f64, samples: usize) -> Result<f64> {
    if !(r > 0.0) || dist(x, y) <= r {
        return Err(Error::Domain("cocycle_shadow_residual needs dist(x, y) > r > 0".into()));
    }
    let arc = crate::geometry::shadow(x, y, r)?;
    let integral = line_integral(f, x, y)?;
    let n = samples.max(1);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let frac = if n == 1 { 0.5 } else { k as f64 / (n - 1) as f64 };
        let theta = arc.lo + frac * (arc.hi - arc.lo);
        let xi = crate::geometry::boundary_at_angle(x, theta);
        let c = gibbs_cocycle_auto(f, xi, x, y)?;
        worst = worst.max((c.value + integral).abs());
    }
    Ok(worst)
}

/// Largest height `ρ` along the segment `[p, q]`.
fn max_height_on_segment(s: &CuspSchedule, p: HPoint, q: HPoint) -> f64 {
    let seg = RaySegment::between(p, q);
    let ab = seg.linear_form(&s.height_form());
    -min_abs_form(ab, seg.length).ln()
}

/// Parabolic generator of a presentation, if any.
pub fn parabolic_generator(g: &GroupPresentation) -> Option<Mobius> {
    g.generators()
        .iter()
        .map(|gen| gen.matrix)
        .find(|m| m.classify() == IsometryKind::Parabolic)
}

/// Greedy construction of band boundaries `Y_n` for levels `t_n`.
///
/// A parabolic element `γ` belongs to band `n` when the largest height of
/// the segment `[x₀, γ x₀]` lies in `(Y_n, Y_{n+1}]`. Starting from `y0`,
/// `Y_{n+1}` is the first value `Y_n + t_n − t_{n+1} + 0.25 k` at which the
/// band sum `Σ e^{d(x₀,γx₀)(t_n − δ)}` reaches 1.
pub fn build_cusp_schedule(t: &[f64], group: &GroupPresentation, u0: HPoint, y0: f64) -> Result<CuspSchedule> {
    const STEP: f64 = 0.25;
    const MAX_STEPS: usize = 400;
    const MAX_POWER: i64 = 5_000_000;
    let gen = parabolic_generator(group)
        .ok_or_else(|| Error::Domain("cusp schedule needs a parabolic generator".into()))?;
    if t.len() < 2 {
        return Err(Error::Domain("cusp schedule needs at least two levels".into()));
    }
    if t.iter().any(|&v| !(v > 0.0)) || t.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("t must be positive and strictly decreasing".into()));
    }
    let xi_p = gen.attracting_fixed_point()?;
    let x0 = group.basepoint();
    let delta = PARABOLIC_DELTA;
    let frame = CuspSchedule { xi_p, u0, t: vec![1.0], y: vec![y0], delta_parabolic: delta, band_sums: vec![] };
    // (height, distance) of γ = gen^m for |m| = 1, 2, ...; both signs
    let mut elems: Vec<(f64, f64)> = Vec::new();
    let mut pos = Mobius::identity();
    let mut neg = Mobius::identity();
    let inv = gen.inverse();
    let mut m = 0i64;
    let mut reach = f64::NEG_INFINITY;
    let mut extend = |upto: f64, elems: &mut Vec<(f64, f64)>, frame: &CuspSchedule| -> Result<()> {
        while reach <= upto + 1.0 {
            m += 1;
            if m > MAX_POWER {
                return Err(Error::Numeric("parabolic enumeration budget exhausted".into()));
            }
            pos = pos * gen;
            neg = neg * inv;
            let mut lo = f64::INFINITY;
            for e in [pos, neg] {
                let q = e.apply(x0);
                let h = max_height_on_segment(frame, x0, q);
                elems.push((h, dist(x0, q)));
                lo = lo.min(h);
            }
            reach = reach.max(lo);
        }
        Ok(())
    };
    let mut y = vec![y0];
    let mut sums = Vec::new();
    for n in 0..t.len() - 1 {
        let lower = y[n] + t[n] - t[n + 1];
        let mut found = None;
        for k in 0..MAX_STEPS {
            let cand = lower + STEP * k as f64;
            extend(cand, &mut elems, &frame)?;
            let sum: crate::scalar::KahanSum = elems
                .iter()
                .filter(|(h, _)| *h > y[n] && *h <= cand)
                .map(|(_, d)| (d * (t[n] - delta)).exp())
                .collect();
            if sum.value() >= 1.0 {
                found = Some((cand, sum.value()));
                break;
            }
        }
        let (next, sum) = found.ok_or_else(|| Error::Numeric(format!("schedule stalled at band {n}")))?;
        y.push(next);
        sums.push(sum);
    }
    let mut s = CuspSchedule::new(xi_p, u0, t.to_vec(), y, delta)?;
    s.band_sums = sums;
    Ok(s)
}

/// Recomputes the band sums of a schedule from the parabolic orbit.
pub fn recompute_band_sums(s: &CuspSchedule, group: &GroupPresentation) -> Result<Vec<f64>> {
    let gen = parabolic_generator(group)
        .ok_or_else(|| Error::Domain("group has no parabolic generator".into()))?;
    let x0 = group.basepoint();
    let top = *s.y.last().expect("nonempty");
    let mut sums = vec![crate::scalar::KahanSum::new(); s.y.len() - 1];
    for sign in [1i64, -1] {
        let step = if sign > 0 { gen } else { gen.inverse() };
        let mut e = Mobius::identity();
        let mut below = 0usize;
        for _ in 0..5_000_000 {
            e = e * step;
            let q = e.apply(x0);
            let h = max_height_on_segment(s, x0, q);
            if h > top + 1.0 {
                below += 1;
                if below > 3 {
                    break;
                }
                continue;
            }
            let d = dist(x0, q);
            for n in 0..s.y.len() - 1 {
                if h > s.y[n] && h <= s.y[n + 1] {
                    sums[n].add((d * (s.t[n] - s.delta_parabolic)).exp());
                }
            }
        }
    }
    Ok(sums.iter().map(|k| k.value()).collect())
}

/// `t_n = 2^{-n}` for `n = 0..=n_max`.
pub fn dyadic_levels(n_max: usize) -> Vec<f64> {
    (0..=n_max).map(|n| 0.5f64.powi(n as i32)).collect()
}
