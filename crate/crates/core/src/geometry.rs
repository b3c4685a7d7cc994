//! Upper half-plane model of the hyperbolic plane (curvature -1).
//!
//! Points live in `{im > 0}`, the circle at infinity is the extended real
//! line, and isometries are `PSL(2, R)` matrices acting by fractional-linear
//! maps. A hyperboloid embedding is provided for the closed forms used by
//! quadrature breakpoints (distance to a geodesic, horocyclic height).

use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point `re + i im` of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint<T> {
    pub re: T,
    pub im: T,
}

impl<T: Scalar> HPoint<T> {
    /// Checked constructor; `im` must be positive and finite.
    pub fn new(re: T, im: T) -> Result<Self> {
        if !(im > T::zero()) || !im.is_finite() || !re.is_finite() {
            return Err(Error::Domain(format!(
                "not a point of the upper half-plane: ({re}, {im})"
            )));
        }
        Ok(Self { re, im })
    }

    /// The imaginary unit, the default origin.
    pub fn i() -> Self {
        Self { re: T::zero(), im: T::one() }
    }

    /// Point on the imaginary axis at height `y`.
    pub fn vertical(y: T) -> Self {
        Self { re: T::zero(), im: y }
    }
}

impl<T: Scalar> fmt::Display for HPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}i", self.re, self.im)
    }
}

/// A point of the circle at infinity `R ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint<T> {
    Finite(T),
    Infinity,
}

impl<T: Scalar> BoundaryPoint<T> {
    /// Equality up to `tol`, treating very large finite values as distinct
    /// from infinity.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        match (self, other) {
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => true,
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => (*a - *b).abs() <= tol,
            _ => false,
        }
    }
}

/// Oriented geodesic from `neg` (backward endpoint) to `pos` (forward endpoint).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic<T> {
    pub neg: BoundaryPoint<T>,
    pub pos: BoundaryPoint<T>,
}

impl<T: Scalar> Geodesic<T> {
    pub fn new(neg: BoundaryPoint<T>, pos: BoundaryPoint<T>) -> Result<Self> {
        if neg.approx_eq(&pos, T::zero()) {
            return Err(Error::Domain("geodesic endpoints coincide".into()));
        }
        Ok(Self { neg, pos })
    }

    /// Hyperbolic distance from `p` to this (complete) geodesic.
    pub fn distance_to(&self, p: HPoint<T>) -> T {
        let n = geodesic_normal(self);
        let x = Hyperboloid::from_point(p);
        x.minkowski(&n).abs().asinh()
    }

    /// Image under an isometry.
    pub fn transformed(&self, m: &Mobius<T>) -> Self {
        Self {
            neg: m.apply_boundary(self.neg),
            pos: m.apply_boundary(self.pos),
        }
    }
}

/// Unit tangent vector in Hopf coordinates `(v-, v+, t)`.
///
/// `time` is the Busemann time measured from the horocycle through the origin
/// `i` centred at `pos`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitTangent<T> {
    pub neg: BoundaryPoint<T>,
    pub pos: BoundaryPoint<T>,
    pub time: T,
}

impl<T: Scalar> UnitTangent<T> {
    pub fn new(neg: BoundaryPoint<T>, pos: BoundaryPoint<T>, time: T) -> Result<Self> {
        Geodesic::new(neg, pos)?;
        Ok(Self { neg, pos, time })
    }

    /// Base point of the vector: the point of the geodesic `(neg, pos)` lying
    /// `time` closer to `pos` than the horocycle through `origin`.
    pub fn base_point(&self, origin: HPoint<T>) -> HPoint<T> {
        point_at_busemann_time(Geodesic { neg: self.neg, pos: self.pos }, origin, self.time)
    }
}

/// Classification of a non-trivial orientation-preserving isometry by trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IsometryKind {
    Hyperbolic,
    Parabolic,
    Elliptic,
    Identity,
}

/// An element of `PSL(2, R)` acting on the upper half-plane.
///
/// Stored normalized (`ad - bc = 1`) with the sign of `±M` fixed so that the
/// first nonzero entry among `(a, b, c)` is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> Mobius<T> {
    /// Builds a normalized isometry from any matrix with positive determinant.
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > T::zero()) || !det.is_finite() {
            return Err(Error::Domain(format!(
                "matrix [[{a}, {b}], [{c}, {d}]] has non-positive determinant"
            )));
        }
        let k = det.sqrt().recip();
        Ok(Self { a: a * k, b: b * k, c: c * k, d: d * k }.canonical())
    }

    pub fn identity() -> Self {
        Self { a: T::one(), b: T::zero(), c: T::zero(), d: T::one() }
    }

    /// `z ↦ z + t`.
    pub fn translation(t: T) -> Self {
        Self { a: T::one(), b: t, c: T::zero(), d: T::one() }
    }

    /// `diag(λ, 1/λ)`, i.e. `z ↦ λ² z`.
    pub fn diagonal(lambda: T) -> Result<Self> {
        Self::new(lambda, T::zero(), T::zero(), lambda.recip())
    }

    /// Elliptic rotation fixing `i`: `z ↦ (cos θ z + sin θ)/(-sin θ z + cos θ)`.
    pub fn rotation(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self { a: c, b: s, c: -s, d: c }.canonical()
    }

    /// `self · other · self⁻¹`.
    pub fn conjugate(&self, other: &Self) -> Self {
        *self * *other * self.inverse()
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }.canonical()
    }

    pub fn trace(&self) -> T {
        self.a + self.d
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    /// Integer power (negative powers invert).
    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { *self };
        let mut acc = Self::identity();
        for _ in 0..k.unsigned_abs() {
            acc = acc * base;
        }
        acc
    }

    /// Rescales to unit determinant, removing accumulated drift. Skipped when
    /// `ad − bc` cannot be resolved against the size of the entries.
    pub fn renormalized(&self) -> Self {
        let det = self.det();
        let size = (self.a * self.d).abs() + (self.b * self.c).abs();
        if !(det > T::zero()) || size * T::epsilon() > T::lit(1e-6) * det {
            return self.canonical();
        }
        let k = det.sqrt().recip();
        Self { a: self.a * k, b: self.b * k, c: self.c * k, d: self.d * k }.canonical()
    }

    fn canonical(self) -> Self {
        let scale = self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs());
        let eps = scale * T::lit(1e-13);
        let lead = [self.a, self.b, self.c]
            .into_iter()
            .find(|x| x.abs() > eps)
            .unwrap_or(self.d);
        if lead < T::zero() {
            Self { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            self
        }
    }

    /// Entrywise comparison after canonicalization.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        (self.a - other.a).abs() <= tol
            && (self.b - other.b).abs() <= tol
            && (self.c - other.c).abs() <= tol
            && (self.d - other.d).abs() <= tol
    }

    /// Image of a point. Uses `ad − bc = 1`, so the imaginary part keeps full
    /// relative precision even for products with huge entries.
    pub fn apply(&self, p: HPoint<T>) -> HPoint<T> {
        let (x, y) = (p.re, p.im);
        let dr = self.c * x + self.d;
        let di = self.c * y;
        let den = dr * dr + di * di;
        let nr = self.a * x + self.b;
        let ni = self.a * y;
        HPoint {
            re: (nr * dr + ni * di) / den,
            im: y / den,
        }
    }

    pub fn apply_boundary(&self, xi: BoundaryPoint<T>) -> BoundaryPoint<T> {
        match xi {
            BoundaryPoint::Infinity => {
                if self.c == T::zero() {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(self.a / self.c)
                }
            }
            BoundaryPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den == T::zero() {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    pub fn classify(&self) -> IsometryKind {
        let t = self.trace().abs();
        let two = T::lit(2.0);
        let tol = T::lit(1e-9).max(T::tol());
        if (t - two).abs() <= tol {
            if self.approx_eq(&Self::identity(), tol) {
                IsometryKind::Identity
            } else {
                IsometryKind::Parabolic
            }
        } else if t > two {
            IsometryKind::Hyperbolic
        } else {
            IsometryKind::Elliptic
        }
    }

    /// `ℓ = 2 arccosh(|tr| / 2)` for hyperbolic elements.
    pub fn translation_length(&self) -> Result<T> {
        match self.classify() {
            IsometryKind::Hyperbolic => Ok(T::lit(2.0) * (self.trace().abs() / T::lit(2.0)).acosh()),
            _ => Err(Error::Domain("no positive translation length".into())),
        }
    }

    /// Fixed points on the boundary: roots of `c z² + (d - a) z - b = 0`.
    fn boundary_fixed_points(&self) -> Vec<BoundaryPoint<T>> {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
        if c.abs() <= scale * T::lit(1e-15) {
            // z ↦ (a z + b)/d: ∞ is fixed; the finite one exists unless a = d.
            let mut out = vec![BoundaryPoint::Infinity];
            if (a - d).abs() > scale * T::lit(1e-15) {
                out.push(BoundaryPoint::Finite(b / (d - a)));
            }
            return out;
        }
        let half = (a - d) / (T::lit(2.0) * c);
        let disc = (a + d) * (a + d) - T::lit(4.0);
        let root = disc.max(T::zero()).sqrt() / (T::lit(2.0) * c);
        if disc <= T::zero() {
            vec![BoundaryPoint::Finite(half)]
        } else {
            vec![BoundaryPoint::Finite(half - root), BoundaryPoint::Finite(half + root)]
        }
    }

    /// Axis of a hyperbolic element, oriented from repelling to attracting
    /// fixed point.
    pub fn axis(&self) -> Result<Geodesic<T>> {
        if self.classify() != IsometryKind::Hyperbolic {
            return Err(Error::Domain("axis requires a hyperbolic isometry".into()));
        }
        let fps = self.boundary_fixed_points();
        if fps.len() != 2 {
            return Err(Error::Numeric("hyperbolic element without two fixed points".into()));
        }
        // Derivative at a finite fixed point x is 1/(cx + d)²; attracting iff < 1.
        let attracting = |xi: &BoundaryPoint<T>| match xi {
            BoundaryPoint::Infinity => self.a.abs() > self.d.abs(),
            BoundaryPoint::Finite(x) => (self.c * *x + self.d).abs() > T::one(),
        };
        let (att, rep) = if attracting(&fps[0]) { (fps[0], fps[1]) } else { (fps[1], fps[0]) };
        Ok(Geodesic { neg: rep, pos: att })
    }

    /// Attracting fixed point for hyperbolic elements, the unique fixed point
    /// for parabolic ones.
    pub fn attracting_fixed_point(&self) -> Result<BoundaryPoint<T>> {
        match self.classify() {
            IsometryKind::Hyperbolic => Ok(self.axis()?.pos),
            IsometryKind::Parabolic => Ok(self.boundary_fixed_points()[0]),
            _ => Err(Error::Domain("no boundary fixed point".into())),
        }
    }
}

impl<T: Scalar> Mul for Mobius<T> {
    type Output = Mobius<T>;

    fn mul(self, o: Mobius<T>) -> Mobius<T> {
        Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
        .canonical()
    }
}

/// Hyperbolic distance, `cosh d = 1 + |p - q|² / (2 im p im q)`.
///
/// Evaluated as `2 asinh(|p - q| / (2 sqrt(im p im q)))`, which is the same
/// quantity without cancellation near the diagonal.
pub fn dist<T: Scalar>(p: HPoint<T>, q: HPoint<T>) -> T {
    let dx = p.re - q.re;
    let dy = p.im - q.im;
    let chord = (dx * dx + dy * dy).sqrt();
    T::lit(2.0) * (chord / (T::lit(2.0) * (p.im * q.im).sqrt())).asinh()
}

/// Poisson kernel `P(z, ξ) = im z / |z - ξ|²`, with `P(z, ∞) = im z`.
pub fn poisson_kernel<T: Scalar>(z: HPoint<T>, xi: BoundaryPoint<T>) -> T {
    match xi {
        BoundaryPoint::Infinity => z.im,
        BoundaryPoint::Finite(x) => {
            let dx = z.re - x;
            z.im / (dx * dx + z.im * z.im)
        }
    }
}

/// Busemann cocycle `β_ξ(x, y) = lim [d(y, ξ(t)) - d(x, ξ(t))]`, so that
/// `β_∞(x, y) = log(im x / im y)`.
pub fn busemann<T: Scalar>(xi: BoundaryPoint<T>, x: HPoint<T>, y: HPoint<T>) -> T {
    (poisson_kernel(x, xi) / poisson_kernel(y, xi)).ln()
}

/// Angle of the boundary point `xi` in the disk model centred at `x`
/// (`w = (ξ - x)/(ξ - x̄)`), with `∞ ↦ 0`.
pub fn boundary_angle<T: Scalar>(x: HPoint<T>, xi: BoundaryPoint<T>) -> T {
    match xi {
        BoundaryPoint::Infinity => T::zero(),
        BoundaryPoint::Finite(r) => {
            // (r - x)/(r - x̄) = ((r - a) - i b)/((r - a) + i b)
            let u = r - x.re;
            let v = x.im;
            let re = u * u - v * v;
            let im = -T::lit(2.0) * u * v;
            im.atan2(re)
        }
    }
}

/// Angle, seen from `x`, of the geodesic ray from `x` through `q != x`.
pub fn direction_angle<T: Scalar>(x: HPoint<T>, q: HPoint<T>) -> T {
    // w = (q - x)/(q - x̄)
    let nr = q.re - x.re;
    let ni = q.im - x.im;
    let dr = q.re - x.re;
    let di = q.im + x.im;
    let re = nr * dr + ni * di;
    let im = ni * dr - nr * di;
    im.atan2(re)
}

/// Boundary point whose angle seen from `x` is `theta`.
pub fn boundary_at_angle<T: Scalar>(x: HPoint<T>, theta: T) -> BoundaryPoint<T> {
    // z = (w x̄ - x)/(w - 1), w = e^{iθ}
    let (s, c) = theta.sin_cos();
    let wr = c - T::one();
    if wr.abs() < T::lit(1e-300).max(T::min_positive_value()) && s.abs() < T::lit(1e-15) {
        return BoundaryPoint::Infinity;
    }
    // numerator: (c + i s)(a - i b) - (a + i b)
    let nr = c * x.re + s * x.im - x.re;
    let ni = s * x.re - c * x.im - x.im;
    let den = wr * wr + s * s;
    if den == T::zero() {
        return BoundaryPoint::Infinity;
    }
    // real part of (nr + i ni)/(wr + i s)
    BoundaryPoint::Finite((nr * wr + ni * s) / den)
}

/// Shadow of the closed ball `B(center, r)` seen from `x`, as an angular
/// interval `[lo, hi]` in the disk model centred at `x` (may extend outside
/// `(-π, π]`; `lo <= hi`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowArc<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> ShadowArc<T> {
    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn mid(&self) -> T {
        (self.lo + self.hi) / T::lit(2.0)
    }

    /// Whether `theta` (any representative) lies in the arc.
    pub fn contains(&self, theta: T) -> bool {
        let two_pi = T::lit(2.0) * T::PI();
        let mut t = theta;
        while t < self.lo {
            t = t + two_pi;
        }
        while t - two_pi >= self.lo {
            t = t - two_pi;
        }
        t <= self.hi
    }
}

/// Minimum distance from `center` to the geodesic ray leaving `x` at angle `theta`.
fn ray_distance<T: Scalar>(x: HPoint<T>, theta: T, center: HPoint<T>) -> T {
    let xi = boundary_at_angle(x, theta);
    let seg = RaySegment::new(x, xi);
    let c = Hyperboloid::from_point(center);
    // cosh d(s) = A cosh s + B sinh s, s >= 0
    let a = seg.origin.minkowski(&c);
    let b = seg.tangent.minkowski(&c);
    let m = if b >= T::zero() { a } else { (a * a - b * b).max(T::one()).sqrt() };
    m.max(T::one()).acosh()
}

/// Shadow `O_x B(center, r)`, found by bisection on the ray angle to `1e-9`.
pub fn shadow<T: Scalar>(x: HPoint<T>, center: HPoint<T>, r: T) -> Result<ShadowArc<T>> {
    if !(r > T::zero()) {
        return Err(Error::Domain("shadow radius must be positive".into()));
    }
    if dist(x, center) <= r {
        return Err(Error::Domain("observer inside ball".into()));
    }
    let mid = direction_angle(x, center);
    let tol = T::lit(1e-9).max(T::lit(4.0) * T::epsilon());
    let hits = |th: T| ray_distance(x, th, center) <= r;
    let edge = |sign: T| {
        let (mut inside, mut outside) = (T::zero(), T::PI());
        while outside - inside > tol {
            let m = (inside + outside) / T::lit(2.0);
            if hits(mid + sign * m) {
                inside = m;
            } else {
                outside = m;
            }
        }
        (inside + outside) / T::lit(2.0)
    };
    let up = edge(T::one());
    let down = edge(-T::one());
    Ok(ShadowArc { lo: mid - down, hi: mid + up })
}

/// Vector of the hyperboloid model `t² - u² - v² = 1` (or the null cone
/// for boundary points), Minkowski signature `(+, -, -)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperboloid<T> {
    pub t: T,
    pub u: T,
    pub v: T,
}

impl<T: Scalar> Hyperboloid<T> {
    pub fn from_point(p: HPoint<T>) -> Self {
        let r2 = p.re * p.re + p.im * p.im;
        let two_y = T::lit(2.0) * p.im;
        Self {
            t: (T::one() + r2) / two_y,
            u: p.re / p.im,
            v: (r2 - T::one()) / two_y,
        }
    }

    /// Null vector representing a boundary point (defined up to scale).
    pub fn null(xi: BoundaryPoint<T>) -> Self {
        match xi {
            BoundaryPoint::Infinity => Self { t: T::one(), u: T::zero(), v: T::one() },
            BoundaryPoint::Finite(x) => Self {
                t: T::one() + x * x,
                u: T::lit(2.0) * x,
                v: x * x - T::one(),
            },
        }
    }

    pub fn to_point(&self) -> HPoint<T> {
        let y = (self.t - self.v).recip();
        HPoint { re: self.u * y, im: y }
    }

    pub fn minkowski(&self, o: &Self) -> T {
        self.t * o.t - self.u * o.u - self.v * o.v
    }

    pub fn scale(&self, k: T) -> Self {
        Self { t: self.t * k, u: self.u * k, v: self.v * k }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { t: self.t + o.t, u: self.u + o.u, v: self.v + o.v }
    }
}

/// Unit spacelike normal `n` of a geodesic: `sinh d(p, γ) = |⟨p, n⟩|`.
pub fn geodesic_normal<T: Scalar>(g: &Geodesic<T>) -> Hyperboloid<T> {
    let a = Hyperboloid::null(g.neg);
    let b = Hyperboloid::null(g.pos);
    // n = J (a × b), J = diag(1, -1, -1): then ⟨n, a⟩ = ⟨n, b⟩ = 0.
    let cx = a.u * b.v - a.v * b.u;
    let cy = a.v * b.t - a.t * b.v;
    let cz = a.t * b.u - a.u * b.t;
    let n = Hyperboloid { t: cx, u: -cy, v: -cz };
    let norm = (-n.minkowski(&n)).sqrt();
    n.scale(norm.recip())
}

/// Arclength-parametrized geodesic `p(s) = cosh s · origin + sinh s · tangent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySegment<T> {
    pub origin: Hyperboloid<T>,
    pub tangent: Hyperboloid<T>,
    /// Length of the segment; infinite for rays.
    pub length: T,
}

impl<T: Scalar> RaySegment<T> {
    /// Ray from `x` towards the boundary point `xi`.
    pub fn new(x: HPoint<T>, xi: BoundaryPoint<T>) -> Self {
        let p = Hyperboloid::from_point(x);
        let n = Hyperboloid::null(xi);
        // tangent ∝ n - ⟨p, n⟩ p, normalized to ⟨v, v⟩ = -1
        let k = p.minkowski(&n);
        let v = n.add(&p.scale(-k));
        let norm = (-v.minkowski(&v)).sqrt();
        Self { origin: p, tangent: v.scale(norm.recip()), length: T::infinity() }
    }

    /// Segment from `p` to `q`.
    pub fn between(p: HPoint<T>, q: HPoint<T>) -> Self {
        let a = Hyperboloid::from_point(p);
        let b = Hyperboloid::from_point(q);
        let len = dist(p, q);
        if len <= T::epsilon() {
            return Self {
                origin: a,
                tangent: Hyperboloid { t: T::zero(), u: T::one(), v: T::zero() },
                length: T::zero(),
            };
        }
        let ch = len.cosh();
        let sh = len.sinh();
        let v = b.add(&a.scale(-ch)).scale(sh.recip());
        Self { origin: a, tangent: v, length: len }
    }

    pub fn at(&self, s: T) -> Hyperboloid<T> {
        self.origin.scale(s.cosh()).add(&self.tangent.scale(s.sinh()))
    }

    pub fn point_at(&self, s: T) -> HPoint<T> {
        self.at(s).to_point()
    }

    /// Segment between two hyperboloid points. Stays accurate when `b` is far
    /// out, where half-plane coordinates would have lost the position.
    pub fn between_vectors(a: Hyperboloid<T>, b: Hyperboloid<T>) -> Self {
        let c = a.minkowski(&b);
        let len = if c > T::lit(2.0) {
            c.acosh()
        } else {
            let diff = b.add(&a.scale(-T::one()));
            let half = (-diff.minkowski(&diff)).max(T::zero()).sqrt() / T::lit(2.0);
            T::lit(2.0) * half.asinh()
        };
        if len <= T::epsilon() {
            return Self {
                origin: a,
                tangent: Hyperboloid { t: T::zero(), u: T::one(), v: T::zero() },
                length: T::zero(),
            };
        }
        let v = b.add(&a.scale(-len.cosh())).scale(len.sinh().recip());
        Self { origin: a, tangent: v, length: len }
    }

    /// Coefficients `(A, B)` with `⟨p(s), w⟩ = A cosh s + B sinh s`.
    pub fn linear_form(&self, w: &Hyperboloid<T>) -> (T, T) {
        (self.origin.minkowski(w), self.tangent.minkowski(w))
    }
}

/// Boundary point of a null vector.
fn boundary_of_null<T: Scalar>(n: &Hyperboloid<T>) -> BoundaryPoint<T> {
    let w = n.t - n.v;
    if w.abs() <= T::lit(1e-14) * n.t.abs() {
        BoundaryPoint::Infinity
    } else {
        BoundaryPoint::Finite(n.u / w)
    }
}

/// Half-plane parametrization of a geodesic by arclength, through the
/// isometry that moves it onto the imaginary axis.
///
/// Unlike [`RaySegment::point_at`], far points keep the accuracy allowed by
/// their half-plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicChart<T> {
    from_std: Mobius<T>,
    height: T,
}

impl<T: Scalar> GeodesicChart<T> {
    fn from_segment(seg: &RaySegment<T>, start: HPoint<T>) -> Self {
        let back = boundary_of_null(&seg.origin.add(&seg.tangent.scale(-T::one())));
        let fwd = boundary_of_null(&seg.origin.add(&seg.tangent));
        let to_std = standardizing_map(&Geodesic { neg: back, pos: fwd });
        let h = to_std.apply(start);
        Self { from_std: to_std.inverse(), height: (h.re * h.re + h.im * h.im).sqrt() }
    }

    /// Geodesic from `p` through `q`.
    pub fn through(p: HPoint<T>, q: HPoint<T>) -> Self {
        Self::from_segment(&RaySegment::between(p, q), p)
    }

    /// Ray from `p` towards `xi`.
    pub fn ray(p: HPoint<T>, xi: BoundaryPoint<T>) -> Self {
        // The forward end is exact; the backward end is the foot of the
        // vertical through `p` once `xi` is sent to ∞.
        let back = match xi {
            BoundaryPoint::Infinity => BoundaryPoint::Finite(p.re),
            BoundaryPoint::Finite(x) => {
                let (dx, dy) = (p.re - x, p.im);
                let r2 = dx * dx + dy * dy;
                // image of p under z ↦ -1/(z - x) has real part -dx/r2
                let re = -dx / r2;
                if re.abs() <= T::lit(1e-14) * (dy / r2) {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(x - re.recip())
                }
            }
        };
        let to_std = standardizing_map(&Geodesic { neg: back, pos: xi });
        let h = to_std.apply(p);
        Self { from_std: to_std.inverse(), height: (h.re * h.re + h.im * h.im).sqrt() }
    }

    pub fn point_at(&self, s: T) -> HPoint<T> {
        self.from_std.apply(self.std_point(s))
    }

    /// The point at arclength `s` in standard coordinates, where the
    /// geodesic is the imaginary axis run upwards.
    pub fn std_point(&self, s: T) -> HPoint<T> {
        HPoint { re: T::zero(), im: self.height * s.exp() }
    }

    /// Isometry from standard coordinates to the half-plane.
    pub fn from_std(&self) -> Mobius<T> {
        self.from_std
    }
}

/// Point on `g` at Busemann time `t` (towards `g.pos`) from the horocycle
/// through `origin` centred at `g.pos`.
pub fn point_at_busemann_time<T: Scalar>(g: Geodesic<T>, origin: HPoint<T>, t: T) -> HPoint<T> {
    // Move g to the imaginary axis with pos at ∞, where β_∞ is log of height.
    let to_std = standardizing_map(&g);
    let o = to_std.apply(origin);
    let p = HPoint { re: T::zero(), im: o.im * t.exp() };
    to_std.inverse().apply(p)
}

/// Isometry sending `g.neg ↦ 0` and `g.pos ↦ ∞`.
pub fn standardizing_map<T: Scalar>(g: &Geodesic<T>) -> Mobius<T> {
    match (g.neg, g.pos) {
        (BoundaryPoint::Finite(a), BoundaryPoint::Infinity) => Mobius::translation(-a),
        (BoundaryPoint::Infinity, BoundaryPoint::Finite(b)) => {
            // z ↦ -1/(z - b): b ↦ ∞, ∞ ↦ 0
            Mobius::new(T::zero(), -T::one(), T::one(), -b).expect("det 1")
        }
        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
            // z ↦ (z - a)/(z - b) up to orientation: det = a - b.
            if b > a {
                Mobius::new(-T::one(), a, T::one(), -b).expect("det b - a > 0")
            } else {
                Mobius::new(T::one(), -a, T::one(), -b).expect("det a - b > 0")
            }
        }
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => Mobius::identity(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = HPoint<f64>;

    fn p(re: f64, im: f64) -> P {
        HPoint::new(re, im).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dist(P::i(), P::i()), 0.0);
        assert!((dist(P::i(), p(0.0, 4.0)) - 4f64.ln()).abs() < 1e-12);
        assert!((dist(P::i(), p(1.0, 1.0)) - 1.5f64.acosh()).abs() < 1e-12);
        assert!((dist(P::i(), p(1.0, 1.0)) - 0.9624236501).abs() < 1e-10);
    }

    #[test]
    fn action_examples() {
        let z = p(0.3, 2.0);
        assert_eq!(Mobius::identity().apply(z), z);
        let t = Mobius::translation(1.0).apply(P::i());
        assert!((t.re - 1.0).abs() < 1e-15 && (t.im - 1.0).abs() < 1e-15);
        let d = Mobius::diagonal(2.0).unwrap().apply(P::i());
        assert!(d.re.abs() < 1e-15 && (d.im - 4.0).abs() < 1e-14);
    }

    #[test]
    fn classification() {
        assert_eq!(Mobius::diagonal(2.0).unwrap().classify(), IsometryKind::Hyperbolic);
        assert_eq!(Mobius::translation(1.0).classify(), IsometryKind::Parabolic);
        assert_eq!(Mobius::rotation(std::f64::consts::FRAC_PI_2).classify(), IsometryKind::Elliptic);
        assert_eq!(Mobius::<f64>::identity().classify(), IsometryKind::Identity);
    }

    #[test]
    fn translation_lengths() {
        let m = Mobius::diagonal(2.0).unwrap();
        let l = m.translation_length().unwrap();
        assert!((l - 4f64.ln()).abs() < 1e-12);
        assert!((m.inverse().translation_length().unwrap() - l).abs() < 1e-12);
        assert!((m.pow(3).translation_length().unwrap() - 3.0 * l).abs() < 1e-11);
        assert!(Mobius::translation(1.0).translation_length().is_err());
    }

    #[test]
    fn axis_examples() {
        let m = Mobius::diagonal(2.0).unwrap();
        let ax = m.axis().unwrap();
        assert_eq!(ax.neg, BoundaryPoint::Finite(0.0));
        assert_eq!(ax.pos, BoundaryPoint::Infinity);

        let t = Mobius::translation(1.0);
        let conj = t.conjugate(&m);
        let ax2 = conj.axis().unwrap();
        assert!(ax2.neg.approx_eq(&BoundaryPoint::Finite(1.0), 1e-12));
        assert_eq!(ax2.pos, BoundaryPoint::Infinity);

        let g = Mobius::rotation(0.4).conjugate(&m);
        let ax3 = g.axis().unwrap();
        assert!(g.apply_boundary(ax3.pos).approx_eq(&ax3.pos, 1e-12));
        // attracting: iterates of a generic point approach pos
        let mut z = BoundaryPoint::Finite(0.123);
        for _ in 0..60 {
            z = g.apply_boundary(z);
        }
        assert!(z.approx_eq(&ax3.pos, 1e-9));
    }

    #[test]
    fn busemann_examples() {
        let e = std::f64::consts::E;
        assert_eq!(busemann(BoundaryPoint::Infinity, P::i(), P::i()), 0.0);
        assert!((busemann(BoundaryPoint::Infinity, p(0.0, e), P::i()) - 1.0).abs() < 1e-15);
        // truncated-limit definition at t = 30
        let x = p(0.3, 0.7);
        let y = p(-1.2, 2.1);
        for xi in [BoundaryPoint::Infinity, BoundaryPoint::Finite(0.8)] {
            let ray = point_at_busemann_time(Geodesic::new(BoundaryPoint::Finite(-5.0), xi).unwrap(), P::i(), 30.0);
            let lim = dist(y, ray) - dist(x, ray);
            assert!((busemann(xi, x, y) - lim).abs() < 1e-8, "{xi:?}");
        }
    }

    #[test]
    fn busemann_isometry_invariance() {
        let g = Mobius::new(1.3, 0.4, 0.7, 1.0).unwrap();
        let xi = BoundaryPoint::Finite(0.25);
        let x = p(0.1, 0.5);
        let y = p(2.0, 3.0);
        let lhs = busemann(g.apply_boundary(xi), g.apply(x), g.apply(y));
        assert!((lhs - busemann(xi, x, y)).abs() < 1e-10);
    }

    #[test]
    fn shadow_examples() {
        let x = P::i();
        let c = p(0.0, 4.0);
        let s = shadow(x, c, 0.3).unwrap();
        // symmetric about the direction of ∞ (angle 0)
        assert!(s.mid().abs() < 1e-8);
        // closed form: sin(half-angle) = sinh r / sinh D
        let half = (0.3f64.sinh() / 4f64.ln().sinh()).asin();
        assert!((s.width() / 2.0 - half).abs() < 1e-8);
        let w: Vec<f64> = [0.1, 0.2, 0.4].iter().map(|&r| shadow(x, c, r).unwrap().width()).collect();
        assert!(w[0] < w[1] && w[1] < w[2]);
        let tiny = shadow(x, c, 1e-6).unwrap();
        assert!(tiny.width() < 1e-5 && tiny.contains(0.0));
        assert!(matches!(shadow(x, c, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn hyperboloid_round_trip_and_normals() {
        let z = p(0.7, 0.2);
        let h = Hyperboloid::from_point(z);
        assert!((h.minkowski(&h) - 1.0).abs() < 1e-12);
        let back = h.to_point();
        assert!((back.re - z.re).abs() < 1e-12 && (back.im - z.im).abs() < 1e-12);

        let unit = Geodesic::new(BoundaryPoint::Finite(-1.0), BoundaryPoint::Finite(1.0)).unwrap();
        assert!(unit.distance_to(P::i()).abs() < 1e-12);
        assert!((unit.distance_to(p(0.0, 2.0)) - 2f64.ln()).abs() < 1e-12);
        let vert = Geodesic::new(BoundaryPoint::Finite(0.0), BoundaryPoint::Infinity).unwrap();
        // brute-force minimum over the axis
        let q = p(1.0, 0.5);
        let brute = (0..20001)
            .map(|k| dist(q, p(0.0, (-5.0 + k as f64 * 5e-4).exp())))
            .fold(f64::INFINITY, f64::min);
        assert!((vert.distance_to(q) - brute).abs() < 1e-6);
    }

    #[test]
    fn segment_parametrization() {
        let a = p(-0.4, 0.9);
        let b = p(2.0, 0.3);
        let seg = RaySegment::between(a, b);
        let end = seg.point_at(seg.length);
        assert!((end.re - b.re).abs() < 1e-10 && (end.im - b.im).abs() < 1e-10);
        let m = seg.point_at(seg.length / 2.0);
        assert!((dist(a, m) - dist(m, b)).abs() < 1e-10);
        let far = RaySegment::new(a, BoundaryPoint::Finite(0.7)).at(40.0);
        let v = RaySegment::between_vectors(Hyperboloid::from_point(b), far);
        assert!((v.length - (far.minkowski(&Hyperboloid::from_point(b))).acosh()).abs() < 1e-9);
        let back = v.at(v.length);
        assert!(((back.t - far.t) / far.t).abs() < 1e-12);
    }

    #[test]
    fn chart_matches_segment_and_stays_accurate() {
        let (a, b) = (p(-0.4, 0.9), p(2.0, 0.3));
        let chart = GeodesicChart::through(a, b);
        let seg = RaySegment::between(a, b);
        for s in [0.0, 0.7, seg.length] {
            let (u, v) = (chart.point_at(s), seg.point_at(s));
            assert!(dist(u, v) < 1e-10);
        }
        let ray = GeodesicChart::ray(a, BoundaryPoint::Finite(0.3));
        for s in [5.0, 15.0, 25.0] {
            let far = ray.point_at(s);
            assert!((dist(a, far) - s).abs() < 1e-9);
            assert!((dist(ray.point_at(s - 1.0), far) - 1.0).abs() < 1e-4);
        }
        let up = GeodesicChart::ray(a, BoundaryPoint::Infinity);
        assert!((up.point_at(30.0).im / a.im - 30f64.exp()).abs() < 1e-3 * 30f64.exp());
    }

    #[test]
    fn f32_instantiation() {
        let q: HPoint<f32> = HPoint::new(0.0, 4.0).unwrap();
        assert!((dist(HPoint::i(), q) - 4f32.ln()).abs() < 1e-5);
        let m: Mobius<f32> = Mobius::diagonal(2.0).unwrap();
        assert!((m.translation_length().unwrap() - 4f32.ln()).abs() < 1e-5);
    }
}
