//! Symbolic model of the geodesic flow on a Schottky quotient.
//!
//! States are admissible words of a fixed depth `k` (cylinders). The flow is
//! the suspension of the shift under a roof `τ`, and a potential enters as
//! the per-cylinder increment `φ` of its line integral. Pressure is the log
//! of the Perron eigenvalue of the transfer matrix `exp(φ − sτ)`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dist, point_at_busemann_time};
use crate::group::{inverse_letter, GroupPresentation, Letter, Tiling, Word};
use crate::potential::{gibbs_cocycle_at, gibbs_cocycle_auto, orbit_distance, Potential};
use crate::scalar::KahanSum;
use crate::{BoundaryPoint, Geodesic};

/// Power iteration stops when successive eigenvalue estimates agree to this
/// relative precision.
pub const RAYLEIGH_TOL: f64 = 1e-12;
/// Iteration budget of [`pressure`].
pub const MAX_POWER_ITERATIONS: usize = 100_000;
/// `|P(s*)|` accepted by [`bowen_solve`].
pub const BOWEN_TOL: f64 = 1e-10;
/// Neighbourhoods at least this wide cover everything.
pub const DIAMETER_PROXY: f64 = 1e3;
/// Default cylinder depth.
pub const DEFAULT_DEPTH: usize = 8;
/// Default extra letters used to realize a cylinder.
pub const DEFAULT_EXTRA_DEPTH: usize = 12;
/// Ray length used for the potential increment of a cylinder.
const PHI_HORIZON: f64 = 18.0;

/// Subshift of finite type on words of length `depth`.
#[derive(Debug, Clone)]
pub struct SubshiftCoding {
    pub alphabet: Vec<String>,
    /// `transition[a][b]`: letter `b` may follow letter `a`.
    pub transition: Vec<Vec<bool>>,
    pub depth: usize,
    /// Admissible words of length `depth`, lexicographic.
    pub cylinders: Vec<Vec<Letter>>,
    successors: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
}

impl SubshiftCoding {
    /// Coding for an arbitrary transition matrix.
    pub fn from_transition(alphabet: Vec<String>, transition: Vec<Vec<bool>>, depth: usize) -> Result<Self> {
        let n = alphabet.len();
        if n == 0 || n > Letter::MAX as usize || transition.len() != n || transition.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("transition matrix must be square over a nonempty alphabet".into()));
        }
        if depth == 0 {
            return Err(Error::Domain("coding depth must be at least 1".into()));
        }
        let mut cylinders: Vec<Vec<Letter>> = (0..n as Letter).map(|l| vec![l]).collect();
        let tr = &transition;
        for _ in 1..depth {
            cylinders = cylinders
                .into_iter()
                .flat_map(|w| {
                    let last = w[w.len() - 1] as usize;
                    (0..n as Letter).filter(move |&b| tr[last][b as usize]).map(move |b| {
                        let mut v = w.clone();
                        v.push(b);
                        v
                    })
                })
                .collect();
        }
        if cylinders.is_empty() {
            return Err(Error::Domain("no admissible words of the requested depth".into()));
        }
        let index = |w: &[Letter]| cylinders.binary_search_by(|c| c.as_slice().cmp(w)).ok();
        let mut successors = vec![Vec::new(); cylinders.len()];
        let mut predecessors = vec![Vec::new(); cylinders.len()];
        for (i, w) in cylinders.iter().enumerate() {
            let last = w[depth - 1] as usize;
            for b in 0..n as Letter {
                if !transition[last][b as usize] {
                    continue;
                }
                let mut next: Vec<Letter> = w[1..].to_vec();
                next.push(b);
                if let Some(j) = index(&next) {
                    successors[i].push(j);
                    predecessors[j].push(i);
                }
            }
        }
        Ok(Self { alphabet, transition, depth, cylinders, successors, predecessors })
    }

    pub fn len(&self) -> usize {
        self.cylinders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    /// Cylinders reachable in one shift step, in increasing index order.
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.successors[i]
    }

    pub fn predecessors(&self, j: usize) -> &[usize] {
        &self.predecessors[j]
    }

    pub fn index_of(&self, w: &[Letter]) -> Option<usize> {
        self.cylinders.binary_search_by(|c| c.as_slice().cmp(w)).ok()
    }
}

/// Coding of a certified Schottky group: a letter may follow any letter but
/// its inverse.
pub fn build_coding(g: &GroupPresentation, k: usize) -> Result<SubshiftCoding> {
    if !g.certificate().is_some_and(|c| c.ok) {
        return Err(Error::Domain("coding requires Schottky certificate".into()));
    }
    let n = g.alphabet_size();
    let alphabet = (0..n as Letter).map(|l| g.letter_label(l)).collect();
    let transition = (0..n)
        .map(|a| (0..n).map(|b| b != inverse_letter(a as Letter) as usize).collect())
        .collect();
    SubshiftCoding::from_transition(alphabet, transition, k)
}

/// Roof and induced potential per cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct RoofAndWeight {
    pub tau: Vec<f64>,
    pub phi: Vec<f64>,
    pub approx_depth: usize,
}

impl RoofAndWeight {
    /// Same roof with the potential scaled by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self { tau: self.tau.clone(), phi: self.phi.iter().map(|p| k * p).collect(), approx_depth: self.approx_depth }
    }
}

/// Smallest period of `w`.
fn minimal_period(w: &[Letter]) -> usize {
    (1..=w.len())
        .find(|&p| (p..w.len()).all(|i| w[i] == w[i - p]))
        .unwrap_or(w.len())
}

/// `w` continued to `len` letters by repeating its minimal period, replacing
/// a letter that would cancel by the smallest one that does not.
pub fn periodic_extension(coding: &SubshiftCoding, w: &[Letter], len: usize) -> Vec<Letter> {
    let p = minimal_period(w);
    let mut out = w.to_vec();
    while out.len() < len {
        let last = out[out.len() - 1] as usize;
        let want = out[out.len() - p];
        let next = if coding.transition[last][want as usize] {
            want
        } else {
            (0..coding.alphabet.len() as Letter)
                .find(|&b| coding.transition[last][b as usize])
                .expect("every letter has a follower")
        };
        out.push(next);
    }
    out
}

/// `τ(w) = d(x₀, a₀…a_m x₀) − d(x₀, a₁…a_m x₀)` and the same difference of
/// line integrals `φ(w)`, on the periodic extension `a₀…a_m` of each
/// cylinder.
pub fn roof_and_weight(
    coding: &SubshiftCoding,
    g: &GroupPresentation,
    f: &Potential,
    approx_depth: usize,
) -> Result<RoofAndWeight> {
    if approx_depth < coding.depth {
        return Err(Error::Domain("approx_depth must be at least the coding depth".into()));
    }
    if coding.alphabet.len() != g.alphabet_size() {
        return Err(Error::Domain("coding alphabet does not match the group".into()));
    }
    let x0 = g.basepoint();
    let constant = match f {
        Potential::Zero => Some(0.0),
        Potential::Constant(k) => Some(*k),
        _ => None,
    };
    let pairs: Vec<(f64, f64)> = coding
        .cylinders
        .par_iter()
        .map(|w| {
            let ext = periodic_extension(coding, w, approx_depth + 1);
            let full = g.word_matrix(&Word(ext.clone())).apply(x0);
            let tail = g.word_matrix(&Word(ext[1..].to_vec())).apply(x0);
            let tau = dist(x0, full) - dist(x0, tail);
            // The far points are only known to about ε·e^d hyperbolic units,
            // too coarse to integrate along. By invariance the difference is
            // the cocycle C_{F,ξ}(x₀, a₀⁻¹x₀) at the tail's endpoint ξ,
            // truncated at PHI_HORIZON (error about Lip(F)·e^{-PHI_HORIZON}).
            let phi = match constant {
                Some(k) => k * tau,
                None => {
                    let xi = word_endpoint(g, &ext[1..])?;
                    let back = g.letter_matrix(inverse_letter(ext[0])).apply(x0);
                    gibbs_cocycle_at(f, xi, x0, back, PHI_HORIZON)?
                }
            };
            Ok((tau, phi))
        })
        .collect::<Result<_>>()?;
    let tau: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    if let Some(i) = tau.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::Numeric(format!(
            "roof not positive; increase depth or powers of generators (cylinder {i}, tau = {:e})",
            tau[i]
        )));
    }
    Ok(RoofAndWeight { tau, phi: pairs.iter().map(|p| p.1).collect(), approx_depth })
}

/// Sum of `τ` over one period of `u^∞`, `u` cyclically reduced.
pub fn birkhoff_roof(coding: &SubshiftCoding, rw: &RoofAndWeight, u: &Word) -> Result<f64> {
    if u.is_empty() || !u.is_cyclically_reduced() {
        return Err(Error::Domain("periodic word must be nonempty and cyclically reduced".into()));
    }
    let p = u.len();
    let k = coding.depth;
    let mut acc = KahanSum::new();
    for j in 0..p {
        let window: Vec<Letter> = (0..k).map(|i| u.0[(j + i) % p]).collect();
        let idx = coding
            .index_of(&window)
            .ok_or_else(|| Error::Domain(format!("window {window:?} is not a cylinder")))?;
        acc.add(rw.tau[idx]);
    }
    Ok(acc.value())
}

/// Perron eigendata of the transfer matrix at parameter `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureResult {
    pub s: f64,
    pub pressure: f64,
    pub left_vec: Vec<f64>,
    pub right_vec: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Log-weights `φ(w) − sτ(w)` and their maximum.
fn log_weights(rw: &RoofAndWeight, s: f64) -> (Vec<f64>, f64) {
    let lw: Vec<f64> = rw.phi.iter().zip(&rw.tau).map(|(p, t)| p - s * t).collect();
    let m = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lw, m)
}

/// One application of `M` (or `Mᵀ`) with weights `e^{lw − shift}`.
fn apply_transfer(coding: &SubshiftCoding, w: &[f64], v: &[f64], transpose: bool) -> Vec<f64> {
    (0..coding.len())
        .into_par_iter()
        .map(|i| {
            if transpose {
                coding.predecessors(i).iter().map(|&j| v[j]).sum::<f64>() * w[i]
            } else {
                coding.successors(i).iter().map(|&j| w[j] * v[j]).sum::<f64>()
            }
        })
        .collect()
}

fn power_iteration(coding: &SubshiftCoding, w: &[f64], transpose: bool) -> Result<(f64, Vec<f64>, usize)> {
    let n = coding.len();
    let mut v = vec![1.0 / n as f64; n];
    let mut lambda = f64::NAN;
    for it in 1..=MAX_POWER_ITERATIONS {
        let mv = apply_transfer(coding, w, &v, transpose);
        let total: f64 = mv.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Numeric("transfer operator lost positivity".into()));
        }
        // v sums to one, so the new total is the eigenvalue estimate
        let next = total;
        v = mv.into_iter().map(|x| x / total).collect();
        if (next - lambda).abs() < RAYLEIGH_TOL * next {
            return Ok((next, v, it));
        }
        lambda = next;
    }
    Err(Error::Numeric(format!(
        "power iteration stagnated after {MAX_POWER_ITERATIONS} iterations (spectral gap too small at this depth)"
    )))
}

/// Pressure `P(φ − sτ)` as the log Perron eigenvalue, with left and right
/// eigenvectors normalized so that `⟨left, right⟩ = 1`.
pub fn pressure(coding: &SubshiftCoding, rw: &RoofAndWeight, s: f64) -> Result<PressureResult> {
    if rw.tau.len() != coding.len() || rw.phi.len() != coding.len() {
        return Err(Error::Domain("roof and weight do not match the coding".into()));
    }
    let (lw, shift) = log_weights(rw, s);
    let w: Vec<f64> = lw.iter().map(|x| (x - shift).exp()).collect();
    let (lambda, mut right, it_r) = power_iteration(coding, &w, false)?;
    let (_, mut left, it_l) = power_iteration(coding, &w, true)?;
    let mv = apply_transfer(coding, &w, &right, false);
    let norm: f64 = right.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let residual = mv
        .iter()
        .zip(&right)
        .map(|(a, b)| (a - lambda * b).abs())
        .fold(0.0, f64::max)
        / (lambda * norm);
    let ip: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    let k = ip.sqrt().recip();
    left.iter_mut().for_each(|x| *x *= k);
    right.iter_mut().for_each(|x| *x *= k);
    Ok(PressureResult {
        s,
        pressure: lambda.ln() + shift,
        left_vec: left,
        right_vec: right,
        iterations: it_r.max(it_l),
        residual,
    })
}

/// `(s, P(s))` at each `s`.
pub fn pressure_curve(coding: &SubshiftCoding, rw: &RoofAndWeight, s_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    s_list.iter().map(|&s| pressure(coding, rw, s).map(|p| (s, p.pressure))).collect()
}

/// Root `s*` of `P(φ − sτ) = 0` by Newton's method.
///
/// `P` is convex and decreasing with `P' = −⟨τ⟩`, so after the first step
/// every iterate lies left of the root and the iteration is monotone. This
/// keeps every probe near the root, where the transfer operator is well
/// conditioned; far-off parameters can make two loops nearly degenerate.
pub fn bowen_solve(coding: &SubshiftCoding, rw: &RoofAndWeight) -> Result<f64> {
    let mut s = 0.0f64;
    let mut last_step = f64::INFINITY;
    for _ in 0..200 {
        let r = pressure(coding, rw, s)?;
        if r.pressure.abs() < BOWEN_TOL {
            return Ok(s);
        }
        let mean_tau: f64 = r.left_vec.iter().zip(&r.right_vec).zip(&rw.tau).map(|((l, rv), t)| l * rv * t).sum();
        if !(mean_tau > 0.0) || !mean_tau.is_finite() {
            return Err(Error::Numeric("mean roof not positive".into()));
        }
        let step = r.pressure / mean_tau;
        if step.abs() < 1e-15 * (1.0 + s.abs()) || (step.abs() >= last_step && step > 0.0 && last_step < 1e-9) {
            return Ok(s + step);
        }
        last_step = step.abs();
        s += step;
    }
    Err(Error::Numeric("Newton iteration did not reach the pressure tolerance".into()))
}

/// Shift-invariant equilibrium measure on cylinders and its flow statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsCylinderMeasure {
    pub s: f64,
    pub shift_weights: Vec<f64>,
    /// `Σ π τ`.
    pub mean_roof: f64,
    /// Normalizer of the suspension flow measure (the mean roof).
    pub flow_normalizer: f64,
    /// Entropy of the flow measure, `s* − ∫F`.
    pub entropy: f64,
    /// `∫F` against the flow measure, `⟨φ⟩ / ⟨τ⟩`.
    pub mean_potential: f64,
    /// Entropy of the shift measure computed from its transition law.
    pub shift_entropy: f64,
    pub eigen: PressureResult,
}

/// Markov measure `π(w) ∝ left(w)·right(w)` at the Bowen parameter.
pub fn equilibrium_measure(coding: &SubshiftCoding, rw: &RoofAndWeight, s_star: f64) -> Result<GibbsCylinderMeasure> {
    let eig = pressure(coding, rw, s_star)?;
    let raw: Vec<f64> = eig.left_vec.iter().zip(&eig.right_vec).map(|(a, b)| a * b).collect();
    let total: KahanSum = raw.iter().copied().collect();
    let pi: Vec<f64> = raw.iter().map(|x| x / total.value()).collect();
    let mean_roof: KahanSum = pi.iter().zip(&rw.tau).map(|(p, t)| p * t).collect();
    let mean_phi: KahanSum = pi.iter().zip(&rw.phi).map(|(p, f)| p * f).collect();
    let mean_roof = mean_roof.value();

    // h = −Σ π(w) P(w→w′) log P(w→w′)
    let (lw, _) = log_weights(rw, s_star);
    let log_lambda = eig.pressure;
    let mut h = KahanSum::new();
    for (i, &pw) in pi.iter().enumerate() {
        for &j in coding.successors(i) {
            let logp = lw[j] + eig.right_vec[j].ln() - eig.right_vec[i].ln() - log_lambda;
            let prob = logp.exp();
            if prob > 0.0 {
                h.add(-pw * prob * logp);
            }
        }
    }
    let mean_potential = mean_phi.value() / mean_roof;
    Ok(GibbsCylinderMeasure {
        s: s_star,
        shift_weights: pi,
        mean_roof,
        flow_normalizer: mean_roof,
        entropy: s_star - mean_potential,
        mean_potential,
        shift_entropy: h.value(),
        eigen: eig,
    })
}

/// `max_w |π(w) − Σ_{v→w} π(v) P(v→w)|`.
pub fn shift_invariance_residual(coding: &SubshiftCoding, rw: &RoofAndWeight, meas: &GibbsCylinderMeasure) -> f64 {
    let (lw, _) = log_weights(rw, meas.s);
    let r = &meas.eigen.right_vec;
    let log_lambda = meas.eigen.pressure;
    (0..coding.len())
        .map(|j| {
            let inflow: f64 = coding
                .predecessors(j)
                .iter()
                .map(|&i| meas.shift_weights[i] * (lw[j] + r[j].ln() - r[i].ln() - log_lambda).exp())
                .sum();
            (inflow - meas.shift_weights[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// Monte Carlo estimate of a flow-measure mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowMass {
    pub mass: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn uniform(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seed of the generator for cylinder `i`.
fn cylinder_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Boundary point `lim a₁…a_n x₀` of a reduced word, realized at the
/// attracting fixed point of its last letter.
fn word_endpoint(g: &GroupPresentation, w: &[Letter]) -> Result<BoundaryPoint> {
    let last = g.letter_matrix(w[w.len() - 1]).attracting_fixed_point()?;
    Ok(g.word_matrix(&Word(w.to_vec())).apply_boundary(last))
}

/// Index drawn with probability proportional to `weights`.
fn pick_weighted(rng: &mut SplitMix64, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = uniform(rng) * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Continuation of cylinder `i` under the Markov law of the measure:
/// forward steps `i → j` with odds `w_j·right_j`, backward steps `j → i`
/// with odds `left_j`. Returns the letters of the future (cylinder word
/// first) and of the past as seen from the basepoint (inverses of the
/// preceding letters, nearest first).
fn markov_extension(
    rng: &mut SplitMix64,
    coding: &SubshiftCoding,
    weights: &[f64],
    eig: &PressureResult,
    i: usize,
    len: usize,
) -> (Vec<Letter>, Vec<Letter>) {
    let mut fut = coding.cylinders[i].clone();
    let mut cur = i;
    while fut.len() < len {
        let succ = coding.successors(cur);
        let odds: Vec<f64> = succ.iter().map(|&j| weights[j] * eig.right_vec[j]).collect();
        cur = succ[pick_weighted(rng, &odds)];
        fut.push(coding.cylinders[cur][coding.depth - 1]);
    }
    let mut past = Vec::with_capacity(len);
    cur = i;
    while past.len() < len {
        let pred = coding.predecessors(cur);
        let odds: Vec<f64> = pred.iter().map(|&j| eig.left_vec[j]).collect();
        cur = pred[pick_weighted(rng, &odds)];
        past.push(inverse_letter(coding.cylinders[cur][0]));
    }
    (fut, past)
}

/// Mass of `V_ε`, the flow points within `epsilon` of the Γ-orbit of the
/// axis of `h_word`, under the suspension of the equilibrium measure.
///
/// Each cylinder draws `samples_per_cylinder` geodesics whose future and
/// past continue the cylinder under the Markov law of `meas`, and a uniform
/// time in `[0, τ)` measured by the Busemann function of the forward
/// endpoint from the horocycle through `x₀`. The generator is reseeded per cylinder.
#[allow(clippy::too_many_arguments)]
pub fn flow_mass_near_orbit(
    coding: &SubshiftCoding,
    rw: &RoofAndWeight,
    meas: &GibbsCylinderMeasure,
    tiling: &Tiling,
    h_word: &Word,
    epsilon: f64,
    samples_per_cylinder: usize,
    seed: u64,
) -> Result<FlowMass> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain("epsilon must be positive".into()));
    }
    if samples_per_cylinder == 0 {
        return Err(Error::Domain("samples_per_cylinder must be positive".into()));
    }
    if h_word.is_empty() || !h_word.is_cyclically_reduced() {
        return Err(Error::Domain("h_word must be nonempty and cyclically reduced".into()));
    }
    let g = tiling.group();
    let samples = samples_per_cylinder * coding.len();
    if epsilon >= DIAMETER_PROXY {
        return Ok(FlowMass { mass: 1.0, stderr: 0.0, samples });
    }
    let axis = g.word_matrix(h_word).axis()?;
    let x0 = g.basepoint();
    let len = rw.approx_depth + 1;
    let (lw, shift) = log_weights(rw, meas.s);
    let weights: Vec<f64> = lw.iter().map(|x| (x - shift).exp()).collect();
    let fractions: Vec<f64> = (0..coding.len())
        .into_par_iter()
        .map(|i| {
            let mut rng = SplitMix64::seed_from_u64(cylinder_seed(seed, i));
            let mut hits = 0usize;
            for _ in 0..samples_per_cylinder {
                let (fut, past) = markov_extension(&mut rng, coding, &weights, &meas.eigen, i, len);
                let geo = Geodesic::new(word_endpoint(g, &past)?, word_endpoint(g, &fut)?)?;
                let t = uniform(&mut rng) * rw.tau[i];
                let p = point_at_busemann_time(geo, x0, t);
                if orbit_distance(&axis, tiling, p) <= epsilon {
                    hits += 1;
                }
            }
            Ok(hits as f64 / samples_per_cylinder as f64)
        })
        .collect::<Result<_>>()?;
    let mut mass = KahanSum::new();
    let mut var = KahanSum::new();
    for (i, f) in fractions.iter().enumerate() {
        let w = meas.shift_weights[i] * rw.tau[i] / meas.mean_roof;
        mass.add(w * f);
        var.add(w * w * f * (1.0 - f) / samples_per_cylinder as f64);
    }
    Ok(FlowMass { mass: mass.value().clamp(0.0, 1.0), stderr: var.value().max(0.0).sqrt(), samples })
}

/// `complement_mass ≤ entropy/(c − c′) + slack`.
pub fn entropy_mass_bound_check(
    meas: &GibbsCylinderMeasure,
    c: f64,
    c_prime: f64,
    complement_mass: f64,
    slack: f64,
) -> Result<bool> {
    if !(c > c_prime) {
        return Err(Error::Domain(format!("entropy bound needs c > c', got c = {c}, c' = {c_prime}")));
    }
    if !meas.entropy.is_finite() {
        return Err(Error::Numeric("entropy is not finite".into()));
    }
    Ok(complement_mass <= meas.entropy.max(0.0) / (c - c_prime) + slack)
}

/// Potential gap of a flow line evaluated at several points of it.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfProbe {
    /// `C_{F,ξ₋}(x₀, p) + C_{F,ξ₊}(x₀, p)` at each sampled `p`.
    pub gap: Vec<f64>,
    /// The same with `F − δ`.
    pub gap_shifted: Vec<f64>,
    /// Largest deviation of `gap` from its first value.
    pub spread: f64,
}

/// Evaluates the density integrand's potential gap along the geodesic
/// `(ξ₋, ξ₊)` at the Busemann times `times`. The gap should not depend on
/// the point, and its spread measures how far the finite-horizon cocycles
/// are from that.
pub fn hopf_density_probe(
    g: &GroupPresentation,
    f: &Potential,
    delta: f64,
    xi_minus: BoundaryPoint,
    xi_plus: BoundaryPoint,
    times: &[f64],
) -> Result<HopfProbe> {
    let geo = Geodesic::new(xi_minus, xi_plus)?;
    let x0 = g.basepoint();
    let mut gap = Vec::with_capacity(times.len());
    let mut gap_shifted = Vec::with_capacity(times.len());
    for &t in times {
        let p = point_at_busemann_time(geo, x0, t);
        let a = gibbs_cocycle_auto(f, xi_minus, x0, p)?.value;
        let b = gibbs_cocycle_auto(f, xi_plus, x0, p)?.value;
        let shift = delta
            * (crate::geometry::busemann(xi_minus, x0, p) + crate::geometry::busemann(xi_plus, x0, p));
        gap.push(a + b);
        gap_shifted.push(a + b - shift);
    }
    let spread = gap.iter().map(|v| (v - gap[0]).abs()).fold(0.0, f64::max);
    Ok(HopfProbe { gap, gap_shifted, spread })
}
