//! Randomized invariants of the geometry, group, potential, orbit-sum and
//! symbolic layers.

use std::collections::BTreeSet;
use std::f64::consts::E;

use gibbslab::cli::config::ExperimentConfig;
use gibbslab::cli::output::num;
use gibbslab::coding::{bowen_solve, build_coding, equilibrium_measure, pressure, roof_and_weight, shift_invariance_residual};
use gibbslab::geometry::{busemann, dist, point_at_busemann_time, shadow, standardizing_map};
use gibbslab::group::{limit_set_sample, orbit_ball, reduced_words, BallOptions, GroupPresentation, Word};
use gibbslab::orbitsum::{exponent_from_integrals, patterson_atoms, patterson_equivariance, poincare_partial};
use gibbslab::potential::{build_cusp_schedule, dyadic_levels, gibbs_cocycle_auto, Potential};
use gibbslab::{BoundaryPoint, Geodesic, HPoint, HPointF32, Mobius};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = HPoint> {
    (-3.0..3.0f64, 0.2..4.0f64).prop_map(|(x, y)| HPoint::new(x, y).unwrap())
}

fn near_point() -> impl Strategy<Value = HPoint> {
    (-1.0..1.0f64, 0.5..2.0f64).prop_map(|(x, y)| HPoint::new(x, y).unwrap())
}

fn boundary() -> impl Strategy<Value = BoundaryPoint> {
    prop_oneof![1 => Just(BoundaryPoint::Infinity), 4 => (-3.0..3.0f64).prop_map(BoundaryPoint::Finite)]
}

/// Products of a few elementary isometries with moderate entries.
fn isometry() -> impl Strategy<Value = Mobius> {
    (-2.0..2.0f64, 0.3..3.0f64, -3.0..3.0f64).prop_map(|(t, l, th)| {
        Mobius::translation(t) * Mobius::diagonal(l).unwrap() * Mobius::rotation(th)
    })
}

fn schottky() -> GroupPresentation {
    GroupPresentation::schottky_symmetric(E).unwrap()
}

fn word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..4, 0..max_len).prop_map(|ls| Word::empty().concat(&Word(ls)))
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(n) }
}

proptest! {
    #![proptest_config(cases(200))]

    #[test]
    fn distance_is_isometry_invariant(m in isometry(), p in point(), q in point()) {
        prop_assert!((dist(m.apply(p), m.apply(q)) - dist(p, q)).abs() <= 1e-10);
    }

    #[test]
    fn busemann_is_a_cocycle(xi in boundary(), x in point(), y in point(), z in point()) {
        let lhs = busemann(xi, x, z);
        prop_assert!((lhs - busemann(xi, x, y) - busemann(xi, y, z)).abs() <= 1e-10);
    }

    #[test]
    fn busemann_matches_truncated_limit(xi in boundary(), x in near_point(), y in near_point()) {
        let origin = match xi {
            BoundaryPoint::Finite(v) if (v + 5.0).abs() < 1.0 => BoundaryPoint::Finite(5.0),
            _ => BoundaryPoint::Finite(-5.0),
        };
        let z = point_at_busemann_time(Geodesic::new(origin, xi).unwrap(), HPoint::i(), 30.0);
        prop_assert!((dist(y, z) - dist(x, z) - busemann(xi, x, y)).abs() <= 1e-8);
    }

    #[test]
    fn translation_length_is_minimal_displacement(m in isometry()) {
        prop_assume!(m.trace().abs() > 2.05);
        let ell = m.translation_length().unwrap();
        let back = standardizing_map(&m.axis().unwrap()).inverse();
        let brute = (0..1000)
            .map(|k| {
                let p = back.apply(HPoint::new(0.0, (-3.0 + 6e-3 * k as f64).exp()).unwrap());
                dist(p, m.apply(p))
            })
            .fold(f64::INFINITY, f64::min);
        prop_assert!((brute - ell).abs() <= 1e-6);
    }

    #[test]
    fn shadows_are_nested(x in near_point(), c in point(), r in 0.05..0.4f64) {
        prop_assume!(dist(x, c) > 1.0);
        let small = shadow(x, c, r).unwrap();
        let big = shadow(x, c, 2.0 * r).unwrap();
        prop_assert!(big.contains(small.lo) && big.contains(small.hi) && big.width() >= small.width());
    }

    #[test]
    fn single_precision_agrees(x in -2.0..2.0f64, y in 0.5..2.0f64) {
        let d64 = dist(HPoint::i(), HPoint::new(x, y).unwrap());
        let d32 = dist(HPointF32::i(), HPointF32::new(x as f32, y as f32).unwrap());
        prop_assert!((d64 - d32 as f64).abs() <= 1e-4);
    }

    #[test]
    fn word_matrix_is_a_homomorphism(u in word(6), v in word(6)) {
        let g = schottky();
        let lhs = g.word_matrix(&u.concat(&v));
        let rhs = g.word_matrix(&u) * g.word_matrix(&v);
        prop_assert!(lhs.approx_eq(&rhs, 1e-10 * (1.0 + rhs.trace().abs())));
    }

    #[test]
    fn displacement_is_subadditive(u in word(5), v in word(5)) {
        let g = schottky();
        let (mu, mv) = (g.word_matrix(&u), g.word_matrix(&v));
        prop_assert!(g.displacement(&(mu * mv)) <= g.displacement(&mu) + g.displacement(&mv) + 1e-9);
    }

    #[test]
    fn float_text_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn gibbs_cocycle_is_additive(x in near_point(), y in near_point(), z in near_point(), k in 0usize..6) {
        let g = schottky();
        let cfg = ExperimentConfig::parse("[group]\npreset = \"schottky-symmetric\"\n[potential]\nh_word = \"a\"\n").unwrap();
        let f = cfg.bump(&g, 1, 2.0).unwrap();
        let xi = limit_set_sample(&g, 2)[k];
        let c = |p, q| gibbs_cocycle_auto(&f, xi, p, q).unwrap().value;
        let err = (c(x, z) - c(x, y) - c(y, z)).abs();
        prop_assert!(err <= 2e-7, "residual {err:e} at {xi:?}");
    }

    #[test]
    fn lipschitz_certificate_holds(p in point(), dx in -0.05..0.05f64, dy in -0.05..0.05f64, c in 0.5..8.0f64) {
        let g = schottky();
        let cfg = ExperimentConfig::parse("[group]\npreset = \"schottky-symmetric\"\n[potential]\nh_word = \"a b\"\n").unwrap();
        let q = HPoint::new(p.re + dx, p.im + dy).unwrap();
        for f in [cfg.bump(&g, 1, c).unwrap(), Potential::Constant(c)] {
            prop_assert!((f.eval(p) - f.eval(q)).abs() <= f.lipschitz() * dist(p, q) + 1e-9);
        }
    }

    #[test]
    fn cusp_height_is_the_constant_cocycle(x in -2.0..2.0f64, y in 1.2..6.0f64) {
        let g = GroupPresentation::parabolic_cyclic();
        let s = build_cusp_schedule(&dyadic_levels(6), &g, HPoint::i(), 0.5).unwrap();
        let u = HPoint::new(x, y).unwrap();
        let c = gibbs_cocycle_auto(&Potential::Constant(-1.0), BoundaryPoint::Infinity, HPoint::i(), u).unwrap().value;
        prop_assert!((c - s.height(u)).abs() <= 1e-6);
    }

    #[test]
    fn bumps_grow_with_height(t in -1.0..1.0f64, c in 0.5..10.0f64) {
        let g = schottky();
        let h = g.letter_matrix(0);
        let on_axis = h.axis().unwrap();
        let p = standardizing_map(&on_axis).inverse().apply(HPoint::new(0.0, t.exp()).unwrap());
        let lo = Potential::orbit_bump(1, c, &h, Potential::Zero, None).unwrap();
        let hi = Potential::orbit_bump(2, 2.0 * c, &h, Potential::Zero, None).unwrap();
        prop_assert!(hi.eval(p) > lo.eval(p));
    }
}

#[test]
fn pruning_loses_no_orbit_point() {
    let g = schottky();
    for r in [2.5, 4.0, 6.0] {
        let pruned: BTreeSet<Vec<u8>> =
            orbit_ball(&g, r, &BallOptions::default()).unwrap().entries.into_iter().map(|e| e.word.0).collect();
        let brute: BTreeSet<Vec<u8>> = reduced_words(&g, 8)
            .filter(|w| g.displacement(&g.word_matrix(w)) <= r)
            .map(|w| w.0)
            .collect();
        assert_eq!(pruned, brute, "radius {r}");
    }
}

#[test]
fn certified_group_acts_injectively() {
    let g = schottky();
    assert!(g.certificate().is_some_and(|c| c.ok));
    let words: Vec<Word> = reduced_words(&g, 6).collect();
    let mats: Vec<Mobius> = words.iter().map(|w| g.word_matrix(w)).collect();
    let mut keys: Vec<[i64; 4]> = mats
        .iter()
        .map(|m| [m.a, m.b, m.c, m.d].map(|v| (v * 1e8).round() as i64))
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), words.len());
}

#[test]
fn constant_shift_moves_the_exponent() {
    let g = schottky();
    let b = orbit_ball(&g, 13.0, &BallOptions::default()).unwrap();
    let d: Vec<f64> = b.entries.iter().map(|e| e.displacement).collect();
    let base = exponent_from_integrals(&d, &vec![0.0; d.len()], b.radius, 1.0).unwrap().delta_hat;
    for kappa in [-1.0, 0.5, 2.0] {
        let ints: Vec<f64> = d.iter().map(|x| kappa * x).collect();
        let shifted = exponent_from_integrals(&d, &ints, b.radius, 1.0).unwrap().delta_hat;
        assert!((shifted - base - kappa).abs() <= 0.02, "kappa {kappa}: {shifted} vs {base}");
    }
}

#[test]
fn series_monotone_in_radius_and_parameter() {
    let g = schottky();
    let b = orbit_ball(&g, 9.0, &BallOptions::default()).unwrap();
    let totals: Vec<f64> =
        [5.0, 7.0, 9.0].iter().map(|&r| poincare_partial(&g, &Potential::Zero, 1.2, &b.restricted(r)).unwrap().total()).collect();
    assert!(totals.windows(2).all(|w| w[1] >= w[0]));
    let in_s: Vec<f64> =
        [1.0, 1.5, 2.0].iter().map(|&s| poincare_partial(&g, &Potential::Zero, s, &b).unwrap().total()).collect();
    assert!(in_s.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn patterson_equivariance_improves_with_radius() {
    let g = schottky();
    let x = g.basepoint();
    let y = HPoint::new(x.re, x.im * E).unwrap();
    let xis: Vec<BoundaryPoint> = limit_set_sample(&g, 3).into_iter().take(8).collect();
    let mut worst = Vec::new();
    for r in [8.0, 10.0, 12.0] {
        let b = orbit_ball(&g, r, &BallOptions::default()).unwrap();
        let s = 0.85;
        let mx = patterson_atoms(&g, &Potential::Zero, s, &b, x, 0.75).unwrap();
        let my = patterson_atoms(&g, &Potential::Zero, s, &b, y, 0.75).unwrap();
        let total: f64 = mx.atoms.iter().map(|a| a.weight).sum();
        assert!((total - 1.0).abs() < 1e-12 && mx.atoms.iter().all(|a| a.weight > 0.0));
        let res = patterson_equivariance(&g, &Potential::Zero, &mx, &my, &b, &xis).unwrap();
        worst.push(res.into_iter().fold(0.0, f64::max));
    }
    assert!(worst.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{worst:?}");
}

#[test]
fn pressure_is_convex_decreasing() {
    let g = schottky();
    let c = build_coding(&g, 5).unwrap();
    let rw = roof_and_weight(&c, &g, &Potential::Zero, 15).unwrap();
    let p: Vec<f64> = (0..5).map(|k| pressure(&c, &rw, 0.25 * k as f64 + 0.25).unwrap().pressure).collect();
    assert!(p.windows(2).all(|w| w[1] < w[0]));
    assert!(p.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= -1e-8));
    let m = equilibrium_measure(&c, &rw, bowen_solve(&c, &rw).unwrap()).unwrap();
    assert!(shift_invariance_residual(&c, &rw, &m) <= 1e-8);
}
