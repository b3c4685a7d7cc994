//! Closed-form and derived examples of every module, run as assertions.

use std::f64::consts::{E, LN_2, PI};
use std::sync::Arc;

use crate::cli::config::{parabolic_subgroup, ExperimentConfig};
use crate::cli::output::{flag, num, Table};
use crate::coding::{
    birkhoff_roof, bowen_solve, build_coding, entropy_mass_bound_check, equilibrium_measure, flow_mass_near_orbit,
    pressure, roof_and_weight, shift_invariance_residual, RoofAndWeight, SubshiftCoding,
};
use crate::error::Result;
use crate::geometry::{
    busemann, dist, point_at_busemann_time, shadow, IsometryKind, RaySegment,
};
use crate::group::{
    conjugacy_lengths, dirichlet_margin, limit_set_sample, orbit_ball, reduced_words, verify_ping_pong, BallOptions,
    GroupPresentation, OrbitBall, Tiling, Word,
};
use crate::orbitsum::{
    arithmeticity_diagnostic, critical_exponent, exponent_from_integrals, finiteness_series,
    patterson_atoms, patterson_equivariance, poincare_partial, sandwich_check_fn, spectral_gap_check, Arithmeticity,
    Verdict,
};
use crate::potential::{
    build_cusp_schedule, cocycle_shadow_residual, dyadic_levels, gibbs_cocycle, gibbs_cocycle_auto, integrate_field,
    line_integral, parabolic_generator, recompute_band_sums, Field, Potential,
};
use crate::scalar::KahanSum;
use crate::{BoundaryPoint, Geodesic, HPoint, Mobius};

type Check = (&'static str, Box<dyn Fn() -> Result<(f64, bool)>>);

/// One row per example: name, observed value, pass flag. A check that
/// errors is recorded as failed with its message.
pub fn run(cfg: &ExperimentConfig) -> (Table, Vec<String>) {
    let mut t = Table::new("selftest", &["check", "value", "ok"]);
    let mut failures = Vec::new();
    for (name, f) in checks(cfg) {
        match f() {
            Ok((v, ok)) => {
                t.push(vec![name.into(), num(v), flag(ok)]);
                if !ok {
                    failures.push(format!("{name}: value {v}"));
                }
            }
            Err(e) => {
                t.push(vec![name.into(), String::new(), flag(false)]);
                failures.push(format!("{name}: {e}"));
            }
        }
    }
    (t, failures)
}

fn pt(re: f64, im: f64) -> HPoint {
    HPoint::new(re, im).expect("upper half-plane literal")
}

fn close(v: f64, want: f64, tol: f64) -> (f64, bool) {
    (v, (v - want).abs() <= tol)
}

fn ball(g: &GroupPresentation, r: f64) -> Result<OrbitBall> {
    orbit_ball(g, r, &BallOptions::default())
}

fn schottky() -> Result<GroupPresentation> {
    GroupPresentation::schottky_symmetric(E)
}

fn cyclic2() -> Result<GroupPresentation> {
    GroupPresentation::cyclic_hyperbolic(Mobius::diagonal(2.0)?)
}

fn flat(c: &SubshiftCoding) -> RoofAndWeight {
    RoofAndWeight { tau: vec![1.0; c.len()], phi: vec![0.0; c.len()], approx_depth: c.depth }
}

fn full_two_shift() -> Result<SubshiftCoding> {
    SubshiftCoding::from_transition(vec!["0".into(), "1".into()], vec![vec![true; 2]; 2], 1)
}

struct ImProbe;

impl Field for ImProbe {
    fn eval(&self, p: HPoint) -> f64 {
        p.im
    }
}

fn checks(cfg: &ExperimentConfig) -> Vec<Check> {
    let seed = cfg.numerics.seed;
    let radius = cfg.numerics.ball_radius.max(10.0);
    let mut v: Vec<Check> = Vec::new();

    // geometry
    v.push(("dist(i, i) = 0", Box::new(|| Ok(close(dist(HPoint::i(), HPoint::i()), 0.0, 0.0)))));
    v.push(("dist(i, 4i) = log 4", Box::new(|| Ok(close(dist(HPoint::i(), pt(0.0, 4.0)), 4f64.ln(), 1e-12)))));
    v.push(("dist(i, 1+i) = arccosh 1.5", Box::new(|| Ok(close(dist(HPoint::i(), pt(1.0, 1.0)), 1.5f64.acosh(), 1e-12)))));
    v.push((
        "z -> z+1 maps i to 1+i",
        Box::new(|| {
            let q = Mobius::translation(1.0).apply(HPoint::i());
            Ok(close((q.re - 1.0).abs() + (q.im - 1.0).abs(), 0.0, 1e-15))
        }),
    ));
    v.push((
        "diag(2, 1/2) maps i to 4i",
        Box::new(|| {
            let q = Mobius::diagonal(2.0)?.apply(HPoint::i());
            Ok(close(q.im, 4.0, 1e-12))
        }),
    ));
    v.push((
        "classification by trace",
        Box::new(|| {
            let ok = Mobius::diagonal(2.0)?.classify() == IsometryKind::Hyperbolic
                && Mobius::translation(1.0).classify() == IsometryKind::Parabolic
                && Mobius::rotation(PI / 2.0).classify() == IsometryKind::Elliptic;
            Ok((0.0, ok))
        }),
    ));
    v.push((
        "translation length of diag(2, 1/2)",
        Box::new(|| Ok(close(Mobius::diagonal(2.0)?.translation_length()?, 2.0 * LN_2, 1e-12))),
    ));
    v.push((
        "translation length of m^3 and m^-1",
        Box::new(|| {
            let m = Mobius::new(1.3, 0.4, 0.7, 1.0)?;
            let l = m.translation_length()?;
            let ok = (m.inverse().translation_length()? - l).abs() < 1e-12;
            let (v, close3) = close(m.pow(3).translation_length()?, 3.0 * l, 1e-10);
            Ok((v, ok && close3))
        }),
    ));
    v.push((
        "axis of diag(2, 1/2) and its translate",
        Box::new(|| {
            let m = Mobius::diagonal(2.0)?;
            let ax = m.axis()?;
            let ok = ax.neg == BoundaryPoint::Finite(0.0) && ax.pos == BoundaryPoint::Infinity;
            let moved = Mobius::translation(1.0).conjugate(&m).axis()?;
            let shifted = moved.neg.approx_eq(&BoundaryPoint::Finite(1.0), 1e-12) && moved.pos == BoundaryPoint::Infinity;
            let att = m.attracting_fixed_point()?;
            Ok((0.0, ok && shifted && m.apply_boundary(att) == att))
        }),
    ));
    v.push(("busemann at equal points", Box::new(|| Ok(close(busemann(BoundaryPoint::Infinity, HPoint::i(), HPoint::i()), 0.0, 0.0)))));
    v.push((
        "busemann(inf; e i, i) = 1 and truncated limit",
        Box::new(|| {
            let b = busemann(BoundaryPoint::Infinity, pt(0.0, E), HPoint::i());
            let geo = Geodesic::new(BoundaryPoint::Finite(-5.0), BoundaryPoint::Infinity)?;
            let z = point_at_busemann_time(geo, HPoint::i(), 30.0);
            let lim = dist(HPoint::i(), z) - dist(pt(0.0, E), z);
            Ok((b, (b - 1.0).abs() < 1e-12 && (lim - b).abs() < 1e-8))
        }),
    ));
    v.push((
        "busemann isometry invariance",
        Box::new(|| {
            let g = Mobius::new(1.3, 0.4, 0.7, 1.0)?;
            let xi = BoundaryPoint::Finite(0.25);
            let (x, y) = (pt(0.3, 0.9), pt(-1.0, 2.0));
            let a = busemann(xi, x, y);
            let b = busemann(g.apply_boundary(xi), g.apply(x), g.apply(y));
            Ok(close(b - a, 0.0, 1e-10))
        }),
    ));
    v.push((
        "shadow symmetric about infinity and nested",
        Box::new(|| {
            let c = pt(0.0, 4.0);
            let s = shadow(HPoint::i(), c, 0.3)?;
            let w: Vec<f64> = [0.1, 0.2, 0.4]
                .iter()
                .map(|&r| shadow(HPoint::i(), c, r).map(|a| a.width()))
                .collect::<Result<_>>()?;
            let tiny = shadow(HPoint::i(), c, 1e-6)?;
            Ok((s.mid(), s.mid().abs() < 1e-8 && w[0] < w[1] && w[1] < w[2] && tiny.contains(0.0)))
        }),
    ));

    // group
    v.push((
        "reduced word counts 1, 5, 53",
        Box::new(|| {
            let g = schottky()?;
            let n: Vec<usize> = [0, 1, 3].iter().map(|&k| reduced_words(&g, k).count()).collect();
            Ok((n[2] as f64, n == [1, 5, 53]))
        }),
    ));
    v.push((
        "orbit ball below min displacement",
        Box::new(|| {
            let g = schottky()?;
            let b = ball(&g, 0.5 * g.min_generator_displacement())?;
            Ok((b.len() as f64, b.len() == 1))
        }),
    ));
    v.push((
        "cyclic orbit ball R = 4.2 has 7 points",
        Box::new(|| {
            let b = ball(&cyclic2()?, 4.2)?;
            Ok((b.len() as f64, b.len() == 7))
        }),
    ));
    v.push((
        "Schottky ball size increasing in R",
        Box::new(|| {
            let g = schottky()?;
            let n: Vec<usize> = [4.0, 5.0, 6.0].iter().map(|&r| ball(&g, r).map(|b| b.len())).collect::<Result<_>>()?;
            Ok((n[2] as f64, n[0] < n[1] && n[1] < n[2]))
        }),
    ));
    v.push((
        "ping-pong certification examples",
        Box::new(|| {
            let g1 = Mobius::diagonal(2.0)?;
            let single = verify_ping_pong(&[g1], HPoint::i()).ok;
            let shared = Mobius::translation(1.0).conjugate(&Mobius::diagonal(3.0)?);
            let fails_shared = !verify_ping_pong(&[g1, shared], HPoint::i()).ok;
            let h = Mobius::rotation(PI / 4.0).conjugate(&g1);
            let fails_once = !verify_ping_pong(&[g1, h], HPoint::i()).ok;
            let later = (2..10).any(|n| verify_ping_pong(&[g1.pow(n), h.pow(n)], HPoint::i()).ok);
            Ok((0.0, single && fails_shared && fails_once && later))
        }),
    ));
    v.push((
        "Dirichlet margin examples",
        Box::new(|| {
            let g = schottky()?;
            let x0 = g.basepoint();
            let m = dirichlet_margin(&g, x0, 3)?;
            let a = g.letter_matrix(0);
            let mid = pt(0.0, a.apply(x0).im.sqrt());
            let on = dirichlet_margin(&g, mid, 4)?;
            let moved = dirichlet_margin(&g, a.apply(pt(0.1, 1.2)), 3)?;
            Ok((on, (m - g.min_generator_displacement()).abs() < 1e-12 && on.abs() < 1e-9 && moved <= 0.0))
        }),
    ));
    v.push((
        "conjugacy classes and trace lengths",
        Box::new(|| {
            let g = schottky()?;
            let one = conjugacy_lengths(&g, 1).len() == 2;
            let ab = Word(vec![0, 2]);
            let cyc = ab.cyclic_canonical() == Word(vec![2, 0]).cyclic_canonical();
            let m = g.word_matrix(&ab);
            let l = m.translation_length()?;
            let back = crate::geometry::standardizing_map(&m.axis()?).inverse();
            let brute = (0..1000)
                .map(|k| {
                    let p = back.apply(pt(0.0, (-3.0 + 6e-3 * k as f64).exp()));
                    dist(p, m.apply(p))
                })
                .fold(f64::INFINITY, f64::min);
            Ok((brute - l, one && cyc && (brute - l).abs() < 1e-6))
        }),
    ));
    v.push((
        "limit set samples nested in the certificate",
        Box::new(|| {
            let g = schottky()?;
            let cert = g.certificate().expect("Schottky preset is certified").clone();
            let nested = [1usize, 3].iter().all(|&k| {
                reduced_words(&g, k)
                    .filter(|w| w.len() == k)
                    .zip(limit_set_sample(&g, k))
                    .all(|(w, xi)| cert.intervals[w.0[0] as usize].contains(xi, 1e-9))
            });
            let two = limit_set_sample(&cyclic2()?, 4).len() == 2;
            Ok((0.0, nested && two))
        }),
    ));

    // potential
    v.push((
        "bump at distance 1 falls to the base",
        Box::new(|| {
            let f = Potential::orbit_bump(1, 3.0, &Mobius::diagonal(2.0)?, Potential::Constant(0.1), None)?;
            Ok(close(f.eval(pt(1f64.sinh(), 1.0)), 0.1, 1e-12))
        }),
    ));
    v.push((
        "cusp height examples",
        Box::new(|| {
            let g = GroupPresentation::parabolic_cyclic();
            let s = build_cusp_schedule(&dyadic_levels(6), &g, HPoint::i(), 0.5)?;
            let p = pt(0.37, 2.4);
            let gp = parabolic_generator(&g).expect("parabolic preset");
            let inv = (s.height(gp.apply(p)) - s.height(p)).abs() < 1e-10;
            let (v, at_e) = close(s.height(pt(0.0, E)), 1.0, 1e-12);
            Ok((v, s.height(HPoint::i()) == 0.0 && at_e && inv))
        }),
    ));
    v.push((
        "line integrals: zero, constant, im probe",
        Box::new(|| {
            let (p, q) = (pt(-0.3, 0.8), pt(1.7, 2.5));
            let z = line_integral(&Potential::Zero, p, q)? == 0.0;
            let k = (line_integral(&Potential::Constant(0.7), p, q)? - 0.7 * dist(p, q)).abs() < 1e-12;
            let probe = integrate_field(&ImProbe, &RaySegment::between(HPoint::i(), pt(0.0, E)), 1e-12)?;
            Ok((probe, z && k && (probe - (E - 1.0)).abs() < 1e-10))
        }),
    ));
    v.push((
        "cocycle examples",
        Box::new(|| {
            let xi = BoundaryPoint::Finite(0.4);
            let (x, y) = (pt(0.1, 1.1), pt(-0.5, 0.7));
            let zero = gibbs_cocycle(&Potential::Zero, xi, x, y, 5.0)?.value == 0.0;
            let same = gibbs_cocycle(&Potential::Constant(2.0), xi, x, x, 5.0)?.value == 0.0;
            let c = gibbs_cocycle_auto(&Potential::Constant(-1.0), BoundaryPoint::Infinity, HPoint::i(), pt(0.0, E))?;
            Ok((c.value, zero && same && (c.value - 1.0).abs() < 1e-6))
        }),
    ));
    v.push((
        "shadow residual shrinks with r",
        Box::new(|| {
            let g = schottky()?;
            let t = Arc::new(Tiling::new(g.clone(), 3));
            let f = Potential::orbit_bump(1, 1.0, &g.letter_matrix(0), Potential::Zero, Some(t))?;
            let (x, y) = (pt(0.0, 1.0), pt(0.4, 0.2));
            let r: Vec<f64> = [0.4, 0.2, 0.1]
                .iter()
                .map(|&r| cocycle_shadow_residual(&f, x, y, r, 5))
                .collect::<Result<_>>()?;
            Ok((r[2], r[0] > r[1] && r[1] > r[2]))
        }),
    ));
    v.push((
        "cusp schedule constraints under recomputation",
        Box::new(|| {
            let g = GroupPresentation::parabolic_cyclic();
            let s = build_cusp_schedule(&dyadic_levels(6), &g, HPoint::i(), 0.5)?;
            let again = recompute_band_sums(&s, &g)?;
            let spacing = (0..s.y.len() - 1).all(|n| s.y[n + 1] >= s.y[n] + s.t[n] - s.t[n + 1]);
            let min = again.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((min, spacing && min >= 1.0 - 1e-12))
        }),
    ));

    // orbitsum
    v.push((
        "cyclic Poincare series at s = 1 is 5/3",
        Box::new(|| {
            let g = cyclic2()?;
            let r = poincare_partial(&g, &Potential::Zero, 1.0, &ball(&g, 40.0)?)?;
            let (v, ok) = close(r.total(), 5.0 / 3.0, 1e-6);
            Ok((v, ok && r.verdict == Verdict::ConvergesLikely))
        }),
    ));
    v.push((
        "Poincare series at large s is 1",
        Box::new(|| {
            let g = cyclic2()?;
            Ok(close(poincare_partial(&g, &Potential::Zero, 60.0, &ball(&g, 40.0)?)?.total(), 1.0, 1e-12))
        }),
    ));
    v.push((
        "constant potential shifts the series parameter",
        Box::new(|| {
            let g = schottky()?;
            let b = ball(&g, 7.0)?;
            let a = poincare_partial(&g, &Potential::Constant(0.4), 1.5, &b)?;
            let z = poincare_partial(&g, &Potential::Zero, 1.1, &b)?;
            let worst = a
                .partial_sums
                .iter()
                .zip(&z.partial_sums)
                .map(|(p, q)| (p.1 - q.1).abs() / q.1)
                .fold(0.0, f64::max);
            Ok((worst, worst <= 1e-12))
        }),
    ));
    v.push((
        "cyclic hyperbolic exponent is 0",
        Box::new(|| {
            let g = cyclic2()?;
            let e = critical_exponent(&g, &Potential::Zero, &ball(&g, 14.0)?, 1.0)?.delta_hat;
            Ok((e, e.abs() <= 0.02))
        }),
    ));
    v.push((
        "cyclic parabolic exponent is 1/2",
        Box::new(|| {
            let g = GroupPresentation::parabolic_cyclic();
            let e = critical_exponent(&g, &Potential::Zero, &ball(&g, 14.0)?, 1.0)?.delta_hat;
            Ok((e, (0.45..=0.55).contains(&e)))
        }),
    ));
    v.push((
        "Schottky exponent: constant shift and windows",
        Box::new(move || {
            let g = schottky()?;
            let b = ball(&g, radius)?;
            let d: Vec<f64> = b.entries.iter().map(|e| e.displacement).collect();
            let zero = vec![0.0; d.len()];
            let shifted: Vec<f64> = d.iter().map(|x| 0.5 * x).collect();
            let e0 = exponent_from_integrals(&d, &zero, b.radius, 1.0)?.delta_hat;
            let e1 = exponent_from_integrals(&d, &shifted, b.radius, 1.0)?.delta_hat;
            let est: Vec<f64> = [0.5, 1.0, 2.0]
                .iter()
                .map(|&c| exponent_from_integrals(&d, &zero, b.radius, c).map(|e| e.delta_hat))
                .collect::<Result<_>>()?;
            let spread = est.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - est.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((spread, (e1 - e0 - 0.5).abs() <= 0.02 && spread <= 0.03))
        }),
    ));
    v.push((
        "finiteness series verdicts and two-term value",
        Box::new(|| {
            let g = GroupPresentation::parabolic_cyclic();
            let d = 1.5f64.acosh();
            let one = finiteness_series(&g, &Potential::Zero, 0.7, 1)?.total();
            let conv = finiteness_series(&g, &Potential::Zero, 1.0, 2000)?.verdict == Verdict::ConvergesLikely;
            let div = finiteness_series(&g, &Potential::Zero, 0.5, 2000)?.verdict == Verdict::DivergesLikely;
            Ok((one, (one - 2.0 * d * (-0.7 * d).exp()).abs() < 1e-12 && conv && div))
        }),
    ));
    v.push((
        "spectral gap on the cusped ping-pong group",
        Box::new(|| {
            let g = GroupPresentation::pingpong_cusp()?;
            let cyc = parabolic_subgroup(&g)?;
            let (bf, bp) = (ball(&g, 10.0)?, ball(&cyc, 10.0)?);
            let r = spectral_gap_check(&g, &cyc, &Potential::Zero, &bf, &bp, 1.0)?;
            let same = spectral_gap_check(&cyc, &cyc, &Potential::Zero, &bp, &bp, 1.0)?;
            Ok((r.gap, r.gap > 0.2 && same.gap.abs() < 1e-12))
        }),
    ));
    v.push((
        "Patterson atoms: normalization, support, equivariance",
        Box::new(move || {
            let g = schottky()?;
            let b = ball(&g, radius)?;
            let f = Potential::Zero;
            let d: Vec<f64> = b.entries.iter().map(|e| e.displacement).collect();
            let delta = exponent_from_integrals(&d, &vec![0.0; d.len()], b.radius, 1.0)?.delta_hat;
            let s = delta + 0.1;
            let x = g.basepoint();
            let mu_x = patterson_atoms(&g, &f, s, &b, x, delta)?;
            let mu_y = patterson_atoms(&g, &f, s, &b, pt(0.0, E), delta)?;
            let total: KahanSum = mu_x.atoms.iter().map(|a| a.weight).collect();
            let inside = mu_x.mass_in(&g)?;
            let xis: Vec<BoundaryPoint> = limit_set_sample(&g, 3).into_iter().take(8).collect();
            let worst = patterson_equivariance(&g, &f, &mu_x, &mu_y, &b, &xis)?.into_iter().fold(0.0, f64::max);
            let sub = patterson_atoms(&g, &f, delta - 0.1, &b, x, delta).is_err();
            Ok((worst, (total.value() - 1.0).abs() < 1e-12 && inside >= 0.99 && worst <= 0.05 && sub))
        }),
    ));
    v.push((
        "sandwich for c = 2, degenerate c = 0, and witness",
        Box::new(move || {
            let g = schottky()?;
            let b = ball(&g, radius)?;
            let t = Arc::new(Tiling::new(g.clone(), 3));
            let h = g.letter_matrix(0);
            let fam = vec![
                (0, 0.0, Potential::orbit_bump(0, 0.0, &h, Potential::Zero, Some(t.clone()))?),
                (1, 2.0, Potential::orbit_bump(1, 2.0, &h, Potential::Zero, Some(t))?),
            ];
            let d: Vec<f64> = b.entries.iter().map(|e| e.displacement).collect();
            let delta0 = exponent_from_integrals(&d, &vec![0.0; d.len()], b.radius, 1.0)?.delta_hat;
            let rows = sandwich_check_fn(&g, &fam, &b, delta0, &h, 1.0)?;
            let degenerate = rows[0].delta_hat <= delta0 + 1e-12;
            let r = &rows[1];
            Ok((r.delta_hat, degenerate && r.lower_ok && r.upper_ok && r.witness_ok))
        }),
    ));
    v.push((
        "arithmeticity examples",
        Box::new(|| {
            let a = arithmeticity_diagnostic(&[1.0, 2.0, 3.0])? == Arithmeticity::ArithmeticLikely(1.0);
            let n = arithmeticity_diagnostic(&[4f64.ln(), 9f64.ln()])? == Arithmeticity::NonArithmeticLikely;
            let s = arithmeticity_diagnostic(&[0.7])? == Arithmeticity::ArithmeticLikely(0.7);
            Ok((0.0, a && n && s))
        }),
    ));

    // coding
    v.push((
        "cylinder counts 12 and 4",
        Box::new(|| {
            let g = schottky()?;
            let c2 = build_coding(&g, 2)?;
            let ok = c2.len() == 12
                && build_coding(&g, 1)?.len() == 4
                && c2.cylinders.iter().all(|w| w[1] != crate::group::inverse_letter(w[0]));
            Ok((c2.len() as f64, ok))
        }),
    ));
    v.push((
        "roof Birkhoff sums match translation lengths",
        Box::new(|| {
            let g = schottky()?;
            let c = build_coding(&g, 6)?;
            let rw = roof_and_weight(&c, &g, &Potential::Zero, 18)?;
            let mut worst = 0.0f64;
            for (w, ell) in conjugacy_lengths(&g, 3) {
                worst = worst.max((birkhoff_roof(&c, &rw, &w)? - ell).abs());
            }
            Ok((worst, worst <= 1e-4 && rw.phi.iter().all(|&p| p == 0.0)))
        }),
    ));
    v.push((
        "probe pressures log 2 and log 3",
        Box::new(|| {
            let two = full_two_shift()?;
            let p2 = pressure(&two, &flat(&two), 0.0)?.pressure;
            let c = build_coding(&schottky()?, 3)?;
            let rw = flat(&c);
            let p3 = pressure(&c, &rw, 0.0)?.pressure;
            let dec = pressure(&c, &rw, 0.5)?.pressure > pressure(&c, &rw, 1.0)?.pressure && p3 > pressure(&c, &rw, 0.5)?.pressure;
            let root = bowen_solve(&c, &rw)?;
            Ok((p3, (p2 - LN_2).abs() < 1e-10 && (p3 - 3f64.ln()).abs() < 1e-10 && dec && (root - 3f64.ln()).abs() < 1e-9))
        }),
    ));
    v.push((
        "Bowen root: constant shift and depth stability",
        Box::new(|| {
            let g = schottky()?;
            let c6 = build_coding(&g, 6)?;
            let c8 = build_coding(&g, 8)?;
            let s6 = bowen_solve(&c6, &roof_and_weight(&c6, &g, &Potential::Zero, 18)?)?;
            let s8 = bowen_solve(&c8, &roof_and_weight(&c8, &g, &Potential::Zero, 20)?)?;
            let k = bowen_solve(&c6, &roof_and_weight(&c6, &g, &Potential::Constant(0.5), 18)?)?;
            Ok((s8 - s6, (s8 - s6).abs() <= 0.01 && (k - s6 - 0.5).abs() <= 1e-6))
        }),
    ));
    v.push((
        "equilibrium measure: symmetry, normalization, invariance",
        Box::new(|| {
            let two = full_two_shift()?;
            let m2 = equilibrium_measure(&two, &flat(&two), LN_2)?;
            let g = schottky()?;
            let c = build_coding(&g, 4)?;
            let rw = roof_and_weight(&c, &g, &Potential::Zero, 16)?;
            let m = equilibrium_measure(&c, &rw, bowen_solve(&c, &rw)?)?;
            let total: KahanSum = m.shift_weights.iter().copied().collect();
            let res = shift_invariance_residual(&c, &rw, &m);
            Ok((res, (m2.shift_weights[0] - 0.5).abs() < 1e-12 && (total.value() - 1.0).abs() < 1e-12 && res <= 1e-8))
        }),
    ));
    v.push((
        "flow mass: full space and support",
        Box::new(move || {
            let g = schottky()?;
            let c = build_coding(&g, 4)?;
            let rw = roof_and_weight(&c, &g, &Potential::Zero, 12)?;
            let m = equilibrium_measure(&c, &rw, bowen_solve(&c, &rw)?)?;
            let t = Tiling::new(g.clone(), 3);
            let h = Word::new(vec![0])?;
            let full = flow_mass_near_orbit(&c, &rw, &m, &t, &h, 1e3, 2, seed)?.mass == 1.0;
            let small = flow_mass_near_orbit(&c, &rw, &m, &t, &h, 0.1, 8, seed)?;
            Ok((1.0 - small.mass, full && small.mass < 1.0))
        }),
    ));
    v.push((
        "entropy mass bound examples",
        Box::new(|| {
            let two = full_two_shift()?;
            let m = equilibrium_measure(&two, &flat(&two), LN_2)?;
            let trivial = entropy_mass_bound_check(&m, 2.0, 1.0, 0.0, 0.0)?;
            let mut zero = m.clone();
            zero.entropy = 0.0;
            let forced = !entropy_mass_bound_check(&zero, 2.0, 1.0, 1e-3, 0.0)?;
            let bad = entropy_mass_bound_check(&m, 1.0, 1.0, 0.0, 0.0).is_err();
            Ok((0.0, trivial && forced && bad))
        }),
    ));
    v
}
