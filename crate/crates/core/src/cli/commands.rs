//! The named experiments. Each returns its tables and the list of checks
//! that failed; the runner writes the tables and maps failures to exit 1.

use crate::cli::config::{parabolic_subgroup, ExperimentConfig};
use crate::cli::output::{flag, num, Table};
use crate::coding::{
    bowen_solve, build_coding, entropy_mass_bound_check, equilibrium_measure, flow_mass_near_orbit, pressure_curve,
    roof_and_weight, RoofAndWeight, SubshiftCoding,
};
use crate::error::{Error, Result};
use crate::group::{conjugacy_lengths, limit_set_sample, orbit_ball, BallOptions, GroupPresentation, OrbitBall};
use crate::orbitsum::{
    arithmeticity_diagnostic, exponent_from_integrals, finiteness_series, orbit_integrals, patterson_atoms,
    patterson_equivariance, sandwich_check_fn, spectral_gap_check, Arithmeticity, ExponentEstimate,
};
use crate::potential::{recompute_band_sums, Potential};

/// Tables produced by a command and the checks it failed.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub failures: Vec<String>,
}

impl Outcome {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn ball(g: &GroupPresentation, radius: f64) -> Result<OrbitBall> {
    orbit_ball(g, radius, &BallOptions::default())
}

fn displacements(b: &OrbitBall) -> Vec<f64> {
    b.entries.iter().map(|e| e.displacement).collect()
}

/// Estimates at every configured window from one integration pass; the
/// first element is at `window_c`.
fn exponents(cfg: &ExperimentConfig, b: &OrbitBall, ints: &[f64]) -> Result<(ExponentEstimate, f64)> {
    let d = displacements(b);
    let main = exponent_from_integrals(&d, ints, b.radius, cfg.numerics.window_c)?;
    let est = cfg
        .numerics
        .windows
        .iter()
        .map(|&c| exponent_from_integrals(&d, ints, b.radius, c).map(|e| e.delta_hat))
        .collect::<Result<Vec<_>>>()?;
    let hi = est.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = est.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((main, hi - lo))
}

pub fn exponent(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = cfg.group()?;
    let f = cfg.potential(&g)?;
    let b = ball(&g, cfg.numerics.ball_radius)?;
    let ints = orbit_integrals(&g, &f, &b)?;
    let (est, spread) = exponents(cfg, &b, &ints)?;
    let mut annuli = Table::new("exponent_annuli", &["n", "log_a_n"]);
    for (n, v) in &est.annulus_table {
        annuli.push(vec![n.to_string(), num(*v)]);
    }
    let mut summary = Table::new(
        "exponent_summary",
        &["delta_hat", "window_c", "l_max", "regression_r2", "window_spread", "ball_radius", "ball_size"],
    );
    summary.push(vec![
        num(est.delta_hat),
        num(est.window_c),
        est.l_max.to_string(),
        num(est.regression_r2),
        num(spread),
        num(b.radius),
        b.len().to_string(),
    ]);
    Ok(Outcome { tables: vec![annuli, summary], failures: vec![] })
}

fn coding_and_roof(cfg: &ExperimentConfig, g: &GroupPresentation, k: usize, f: &Potential) -> Result<(SubshiftCoding, RoofAndWeight)> {
    let c = build_coding(g, k)?;
    let extra = cfg.numerics.approx_depth - cfg.numerics.coding_depth;
    let rw = roof_and_weight(&c, g, f, k + extra)?;
    Ok((c, rw))
}

pub fn pressure(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = cfg.group()?;
    let f = cfg.potential(&g)?;
    let k = cfg.numerics.coding_depth;
    let (c, rw) = coding_and_roof(cfg, &g, k, &f)?;
    let s_star = bowen_solve(&c, &rw)?;
    let m = cfg.numerics.pressure_points;
    let span = cfg.numerics.pressure_span;
    let grid: Vec<f64> = (0..m)
        .map(|i| s_star - span + 2.0 * span * i as f64 / (m.max(2) - 1) as f64)
        .collect();
    let mut curve = Table::new("pressure_curve", &["s", "pressure"]);
    for (s, p) in pressure_curve(&c, &rw, &grid)? {
        curve.push(vec![num(s), num(p)]);
    }
    let mut bowen = Table::new("bowen", &["depth", "s_star", "coarse_depth", "coarse_s_star", "depth_stability"]);
    if k > 2 {
        let (c2, rw2) = coding_and_roof(cfg, &g, k - 2, &f)?;
        let s2 = bowen_solve(&c2, &rw2)?;
        bowen.push(vec![k.to_string(), num(s_star), (k - 2).to_string(), num(s2), num((s_star - s2).abs())]);
    } else {
        bowen.push(vec![k.to_string(), num(s_star), String::new(), String::new(), String::new()]);
    }
    Ok(Outcome { tables: vec![curve, bowen], failures: vec![] })
}

/// Roof and weight for each family member, sharing one pass when the
/// members are multiples of one unit bump.
fn family_roofs(
    cfg: &ExperimentConfig,
    g: &GroupPresentation,
    c: &SubshiftCoding,
    family: &[(usize, f64, Potential)],
) -> Result<Vec<RoofAndWeight>> {
    let depth = cfg.numerics.approx_depth - cfg.numerics.coding_depth + c.depth;
    let units: Option<Vec<(f64, Potential)>> = family.iter().map(|(_, _, f)| f.as_scaled_unit_bump()).collect();
    if let Some(units) = units {
        let unit = roof_and_weight(c, g, &units[0].1, depth)?;
        return Ok(units.iter().map(|(k, _)| unit.scaled(*k)).collect());
    }
    family.iter().map(|(_, _, f)| roof_and_weight(c, g, f, depth)).collect()
}

pub fn family(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = cfg.group()?;
    let fam = cfg.family(&g)?;
    let base = cfg.base_potential(&g)?;
    let h_word = cfg.h_word(&g)?;
    let h = g.word_matrix(&h_word);
    let eps = cfg.numerics.epsilon;
    let mut out = Outcome::default();

    let b = ball(&g, cfg.numerics.ball_radius)?;
    let d = displacements(&b);
    let zero_ints = vec![0.0; b.len()];
    let delta_gamma = exponent_from_integrals(&d, &zero_ints, b.radius, cfg.numerics.window_c)?.delta_hat;
    let delta_0 = match base {
        Potential::Zero => delta_gamma,
        _ => {
            let ints = orbit_integrals(&g, &base, &b)?;
            exponent_from_integrals(&d, &ints, b.radius, cfg.numerics.window_c)?.delta_hat
        }
    };
    let rows = sandwich_check_fn(&g, &fam, &b, delta_0, &h, cfg.numerics.window_c)?;
    let mut sandwich = Table::new(
        "sandwich",
        &["n", "c_n", "delta_hat", "tol", "witness", "witness_bound", "lower_ok", "upper_ok", "witness_ok"],
    );
    for r in &rows {
        sandwich.push(vec![
            r.n.to_string(),
            num(r.c_n),
            num(r.delta_hat),
            num(r.tol),
            num(r.witness),
            num(r.witness_bound),
            flag(r.lower_ok),
            flag(r.upper_ok),
            flag(r.witness_ok),
        ]);
        out.check(r.lower_ok && r.upper_ok && r.witness_ok, || format!("sandwich row n = {}", r.n));
    }

    let coding = build_coding(&g, cfg.numerics.coding_depth)?;
    let roofs = family_roofs(cfg, &g, &coding, &fam)?;
    let c0 = base.sup();
    let mut conc = Table::new(
        "concentration",
        &[
            "n", "c_n", "s_star", "entropy", "mass", "stderr", "complement", "bound", "bound_ok", "entropy_bound",
            "entropy_ok",
        ],
    );
    let mut prev: Option<(f64, f64)> = None;
    for ((n, c_n, _), rw) in fam.iter().zip(&roofs) {
        let s = bowen_solve(&coding, rw)?;
        let meas = equilibrium_measure(&coding, rw, s)?;
        let fm = flow_mass_near_orbit(&coding, rw, &meas, &cfg.tiling(&g), &h_word, eps, cfg.numerics.samples, cfg.numerics.seed)?;
        let complement = 1.0 - fm.mass;
        let bound = delta_gamma / (c_n * eps);
        let bound_ok = *n < 3 || complement <= bound + 3.0 * fm.stderr;
        let c_prime = c0.max(c_n * (1.0 - eps));
        let slack = 3.0 * fm.stderr;
        let entropy_ok = entropy_mass_bound_check(&meas, *c_n, c_prime, complement, slack)?;
        conc.push(vec![
            n.to_string(),
            num(*c_n),
            num(s),
            num(meas.entropy),
            num(fm.mass),
            num(fm.stderr),
            num(complement),
            num(bound),
            flag(bound_ok),
            num(meas.entropy / (c_n - c_prime)),
            flag(entropy_ok),
        ]);
        out.check(bound_ok, || format!("complement bound at n = {n}"));
        out.check(entropy_ok, || format!("entropy bound at n = {n}"));
        if let Some((m, se)) = prev {
            out.check(fm.mass >= m - 2.0 * se.max(fm.stderr), || format!("mass decreases at n = {n}"));
        }
        prev = Some((fm.mass, fm.stderr));
    }
    out.tables = vec![sandwich, conc];
    Ok(out)
}

pub fn finiteness(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = cfg.group()?;
    let cyc = parabolic_subgroup(&g)?;
    let mut potentials = vec![("zero".to_string(), Potential::Zero)];
    if cfg.potential.name != "zero" {
        potentials.push((cfg.potential.name.clone(), cfg.potential(&g)?));
    }
    let mut series = Table::new("finiteness_series", &["potential", "delta", "r", "partial_sum"]);
    let mut summary = Table::new("finiteness_summary", &["potential", "delta", "verdict", "slope", "total"]);
    for (name, f) in &potentials {
        for &delta in &cfg.numerics.finiteness_deltas {
            let rep = finiteness_series(&cyc, f, delta, cfg.numerics.n_max)?;
            for (r, v) in &rep.partial_sums {
                series.push(vec![name.clone(), num(delta), num(*r), num(*v)]);
            }
            summary.push(vec![
                name.clone(),
                num(delta),
                format!("{:?}", rep.verdict),
                num(rep.slope),
                num(rep.total()),
            ]);
        }
    }
    let mut tables = vec![series, summary];
    if g.alphabet_size() > cyc.alphabet_size() {
        let bf = ball(&g, cfg.numerics.ball_radius)?;
        let bp = ball(&cyc, cfg.numerics.ball_radius)?;
        let mut gap = Table::new("spectral_gap", &["potential", "delta_full", "delta_parab", "gap"]);
        for (name, f) in &potentials {
            let r = spectral_gap_check(&g, &cyc, f, &bf, &bp, cfg.numerics.window_c)?;
            gap.push(vec![name.clone(), num(r.delta_full), num(r.delta_parab), num(r.gap)]);
        }
        tables.push(gap);
    }
    Ok(Outcome { tables, failures: vec![] })
}

pub fn schedule(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = cfg.group()?;
    let cyc = parabolic_subgroup(&g)?;
    let s = cfg.cusp_schedule(&g)?;
    let again = recompute_band_sums(&s, &cyc)?;
    let mut out = Outcome::default();
    let mut t = Table::new(
        "schedule",
        &["n", "t_n", "y_n", "y_next", "band_sum", "recomputed_sum", "spacing_ok", "sum_ok"],
    );
    for n in 0..s.y.len() - 1 {
        let spacing_ok = s.y[n + 1] >= s.y[n] + s.t[n] - s.t[n + 1];
        let sum_ok = again[n] >= 1.0 - 1e-12;
        t.push(vec![
            n.to_string(),
            num(s.t[n]),
            num(s.y[n]),
            num(s.y[n + 1]),
            num(s.band_sums[n]),
            num(again[n]),
            flag(spacing_ok),
            flag(sum_ok),
        ]);
        out.check(spacing_ok, || format!("band spacing at n = {n}"));
        out.check(sum_ok, || format!("band sum at n = {n}"));
    }
    out.tables.push(t);
    Ok(out)
}

pub fn mixing(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = cfg.group()?;
    let spectrum = conjugacy_lengths(&g, cfg.numerics.max_word_length);
    let mut t = Table::new("length_spectrum", &["word", "length"]);
    for (w, l) in &spectrum {
        t.push(vec![g.format_word(w), num(*l)]);
    }
    let lengths: Vec<f64> = spectrum.iter().map(|(_, l)| *l).collect();
    let mut v = Table::new("arithmeticity", &["verdict", "generator"]);
    match arithmeticity_diagnostic(&lengths)? {
        Arithmeticity::ArithmeticLikely(x) => v.push(vec!["ArithmeticLikely".into(), num(x)]),
        Arithmeticity::NonArithmeticLikely => v.push(vec!["NonArithmeticLikely".into(), String::new()]),
    }
    Ok(Outcome { tables: vec![t, v], failures: vec![] })
}

pub fn patterson(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = cfg.group()?;
    let f = cfg.potential(&g)?;
    let b = ball(&g, cfg.numerics.ball_radius)?;
    let ints = orbit_integrals(&g, &f, &b)?;
    let delta_hat = exponent_from_integrals(&displacements(&b), &ints, b.radius, cfg.numerics.window_c)?.delta_hat;
    let s = delta_hat + cfg.numerics.patterson_gap;
    let x = g.basepoint();
    // second observer: one unit along the imaginary direction
    let y = crate::HPoint::new(x.re, x.im * std::f64::consts::E)?;
    let mu_x = patterson_atoms(&g, &f, s, &b, x, delta_hat)?;
    let mu_y = patterson_atoms(&g, &f, s, &b, y, delta_hat)?;
    let mut atoms = Table::new("patterson_atoms", &["word", "angle", "weight"]);
    for a in &mu_x.atoms {
        atoms.push(vec![g.format_word(&a.word), num(a.angle), num(a.weight)]);
    }
    let sample: Vec<_> = limit_set_sample(&g, 3).into_iter().take(cfg.numerics.patterson_samples).collect();
    if sample.is_empty() {
        return Err(Error::Domain("no limit points to test equivariance at".into()));
    }
    let residuals = patterson_equivariance(&g, &f, &mu_x, &mu_y, &b, &sample)?;
    let mut eq = Table::new("patterson_equivariance", &["xi", "residual"]);
    for (xi, r) in sample.iter().zip(&residuals) {
        let label = match xi {
            crate::BoundaryPoint::Finite(v) => num(*v),
            crate::BoundaryPoint::Infinity => "inf".into(),
        };
        eq.push(vec![label, num(*r)]);
    }
    let mut summary = Table::new("patterson_summary", &["s", "delta_hat", "atoms", "mass_in_certificate"]);
    let mass = match g.certificate() {
        Some(_) => num(mu_x.mass_in(&g)?),
        None => String::new(),
    };
    summary.push(vec![num(s), num(delta_hat), mu_x.atoms.len().to_string(), mass]);
    Ok(Outcome { tables: vec![atoms, eq, summary], failures: vec![] })
}
