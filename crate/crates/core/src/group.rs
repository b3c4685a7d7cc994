//! Finitely generated groups of Möbius isometries given by generators.
//!
//! Words are reduced sequences over the alphabet `g₀, g₀⁻¹, g₁, g₁⁻¹, ...`;
//! letter `2i` is generator `i` and letter `2i + 1` its inverse, and this is
//! also the lexicographic order used everywhere.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{boundary_angle, dist, direction_angle, IsometryKind};
use crate::{BoundaryPoint, HPoint, Mobius};

/// Letter index: `2i` for generator `i`, `2i + 1` for its inverse.
pub type Letter = u8;

#[inline]
pub fn inverse_letter(l: Letter) -> Letter {
    l ^ 1
}

/// A reduced word in the generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        let w = Word(letters);
        if !w.is_reduced() {
            return Err(Error::Domain(format!("word {:?} is not reduced", w.0)));
        }
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[1] != inverse_letter(w[0]))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(&f), Some(&l)) => self.0.len() == 1 || l != inverse_letter(f),
                _ => true,
            }
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| inverse_letter(l)).collect())
    }

    /// Free product `self · other` with cancellation.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&inverse_letter(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Representative of the cyclic class of a cyclically reduced word, up to
    /// rotation and inversion: the lexicographically least candidate.
    pub fn cyclic_canonical(&self) -> Word {
        let n = self.0.len();
        let inv = self.inverse();
        let mut best = self.0.clone();
        for src in [&self.0, &inv.0] {
            for r in 0..n {
                let cand: Vec<Letter> = src[r..].iter().chain(src[..r].iter()).copied().collect();
                if cand < best {
                    best = cand;
                }
            }
        }
        Word(best)
    }

    /// Length-then-lexicographic order.
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

/// Kind of presentation, used for preconditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    Schottky,
    CyclicHyperbolic,
    CyclicParabolic,
    PingPongSubgroup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub label: String,
    pub matrix: Mobius,
}

/// Generators, presentation kind and origin `x₀`.
#[derive(Debug, Clone)]
pub struct GroupPresentation {
    generators: Vec<Generator>,
    letters: Vec<Mobius>,
    kind: GroupKind,
    basepoint: HPoint,
    certificate: Option<PingPongCertificate>,
}

impl GroupPresentation {
    pub fn new(generators: Vec<Generator>, kind: GroupKind, basepoint: HPoint) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Domain("at least one generator required".into()));
        }
        if generators.len() > 64 {
            return Err(Error::Domain("too many generators".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            if generators[..i].iter().any(|h| h.label == g.label) {
                return Err(Error::Domain(format!("duplicate generator label {}", g.label)));
            }
            if g.matrix.classify() == IsometryKind::Identity {
                return Err(Error::Domain(format!("generator {} is the identity", g.label)));
            }
        }
        match kind {
            GroupKind::CyclicHyperbolic | GroupKind::CyclicParabolic if generators.len() != 1 => {
                return Err(Error::Domain("cyclic presentation needs exactly one generator".into()))
            }
            GroupKind::CyclicHyperbolic if generators[0].matrix.classify() != IsometryKind::Hyperbolic => {
                return Err(Error::Domain("cyclic hyperbolic generator is not hyperbolic".into()))
            }
            GroupKind::CyclicParabolic if generators[0].matrix.classify() != IsometryKind::Parabolic => {
                return Err(Error::Domain("cyclic parabolic generator is not parabolic".into()))
            }
            _ => {}
        }
        let letters = generators
            .iter()
            .flat_map(|g| [g.matrix, g.matrix.inverse()])
            .collect();
        let mut out = Self { generators, letters, kind, basepoint, certificate: None };
        if matches!(kind, GroupKind::Schottky | GroupKind::PingPongSubgroup) {
            let mats: Vec<Mobius> = out.generators.iter().map(|g| g.matrix).collect();
            let cert = verify_ping_pong(&mats, basepoint);
            if !cert.ok {
                return Err(Error::Domain(format!(
                    "no ping-pong certificate for Schottky presentation: {}",
                    cert.diagnostic
                )));
            }
            out.certificate = Some(cert);
        }
        Ok(out)
    }

    /// Convenience constructor from labelled matrices.
    pub fn from_matrices(mats: &[(&str, Mobius)], kind: GroupKind, basepoint: HPoint) -> Result<Self> {
        Self::new(
            mats.iter()
                .map(|(l, m)| Generator { label: l.to_string(), matrix: *m })
                .collect(),
            kind,
            basepoint,
        )
    }

    /// Symmetric two-generator Schottky group: `diag(λ, 1/λ)` and its
    /// conjugate by the quarter turn about `i`, whose axes cross at `i`.
    pub fn schottky_symmetric(lambda: f64) -> Result<Self> {
        let g1 = Mobius::diagonal(lambda)?;
        let g2 = Mobius::rotation(PI / 4.0).conjugate(&g1);
        Self::from_matrices(&[("a", g1), ("b", g2)], GroupKind::Schottky, HPoint::i())
    }

    /// `⟨z ↦ z + 1⟩`.
    pub fn parabolic_cyclic() -> Self {
        Self::from_matrices(&[("p", Mobius::translation(1.0))], GroupKind::CyclicParabolic, HPoint::i())
            .expect("translation is parabolic")
    }

    /// `⟨m⟩` for a hyperbolic `m`.
    pub fn cyclic_hyperbolic(m: Mobius) -> Result<Self> {
        Self::from_matrices(&[("h", m)], GroupKind::CyclicHyperbolic, HPoint::i())
    }

    /// Ping-pong group with a cusp: `z ↦ z + 1` together with the hyperbolic
    /// `z ↦ 1/4 - 1/(25 (z + 1/4))`, which pairs the circles of radius `1/5`
    /// about `∓1/4`.
    pub fn pingpong_cusp() -> Result<Self> {
        let p = Mobius::translation(1.0);
        let h = Mobius::new(1.25, 0.1125, 5.0, 1.25)?;
        Self::from_matrices(&[("p", p), ("h", h)], GroupKind::PingPongSubgroup, HPoint::new(0.0, 2.0)?)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn basepoint(&self) -> HPoint {
        self.basepoint
    }

    pub fn certificate(&self) -> Option<&PingPongCertificate> {
        self.certificate.as_ref()
    }

    /// Number of letters (generators and inverses).
    pub fn alphabet_size(&self) -> usize {
        self.letters.len()
    }

    pub fn letter_matrix(&self, l: Letter) -> Mobius {
        self.letters[l as usize]
    }

    pub fn letter_label(&self, l: Letter) -> String {
        let g = &self.generators[(l / 2) as usize].label;
        if l % 2 == 0 {
            g.clone()
        } else {
            format!("{g}^-1")
        }
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "id".into();
        }
        w.0.iter().map(|&l| self.letter_label(l)).collect::<Vec<_>>().join(" ")
    }

    /// Inverse of [`format_word`](Self::format_word): whitespace-separated
    /// labels, `^-1` marking inverses; `id` is the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        if text == "id" {
            return Ok(Word::empty());
        }
        let letters = text
            .split_whitespace()
            .map(|tok| {
                let (label, inv) = match tok.strip_suffix("^-1") {
                    Some(l) => (l, 1),
                    None => (tok, 0),
                };
                self.generators
                    .iter()
                    .position(|g| g.label == label)
                    .map(|i| (2 * i + inv) as Letter)
                    .ok_or_else(|| Error::Domain(format!("unknown generator label {label:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters)
    }

    /// Matrix of a word, multiplied from scratch with determinant
    /// renormalization every 64 letters.
    pub fn word_matrix(&self, w: &Word) -> Mobius {
        let mut m = Mobius::identity();
        for (i, &l) in w.0.iter().enumerate() {
            m = m * self.letters[l as usize];
            if (i + 1) % 64 == 0 {
                m = m.renormalized();
            }
        }
        m
    }

    /// `d(x₀, γ x₀)`.
    pub fn displacement(&self, m: &Mobius) -> f64 {
        dist(self.basepoint, m.apply(self.basepoint))
    }

    pub fn max_generator_displacement(&self) -> f64 {
        self.generators
            .iter()
            .map(|g| self.displacement(&g.matrix))
            .fold(0.0, f64::max)
    }

    pub fn min_generator_displacement(&self) -> f64 {
        self.generators
            .iter()
            .map(|g| self.displacement(&g.matrix))
            .fold(f64::INFINITY, f64::min)
    }

    /// Greedy reduction of `x` towards the generator-Dirichlet polygon of `x₀`.
    ///
    /// Returns `(y, g)` with `y = g · x`.
    pub fn reduce(&self, x: HPoint) -> (HPoint, Mobius) {
        let mut y = x;
        let mut acc = Mobius::identity();
        let mut d = dist(y, self.basepoint);
        for _ in 0..100_000 {
            let mut best: Option<(f64, usize, HPoint)> = None;
            for (i, m) in self.letters.iter().enumerate() {
                let z = m.apply(y);
                let dz = dist(z, self.basepoint);
                if dz < d - 1e-12 && best.is_none_or(|(bd, _, _)| dz < bd) {
                    best = Some((dz, i, z));
                }
            }
            match best {
                Some((dz, i, z)) => {
                    y = z;
                    d = dz;
                    acc = self.letters[i] * acc;
                }
                None => break,
            }
        }
        (y, acc)
    }

    /// Matrices of all reduced words of length at most `max_len` (identity first).
    pub fn short_elements(&self, max_len: usize) -> Vec<Mobius> {
        reduced_words(self, max_len).map(|w| self.word_matrix(&w)).collect()
    }
}

/// Iterator over reduced words of length `<= max_len` in shortlex order.
pub struct ReducedWords {
    alphabet: usize,
    max_len: usize,
    level: Vec<Word>,
    pos: usize,
}

impl Iterator for ReducedWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.pos < self.level.len() {
            self.pos += 1;
            return Some(self.level[self.pos - 1].clone());
        }
        let cur_len = self.level.first().map(|w| w.len())?;
        if cur_len >= self.max_len {
            return None;
        }
        let mut next = Vec::with_capacity(self.level.len() * self.alphabet.saturating_sub(1).max(1));
        for w in &self.level {
            for l in 0..self.alphabet as Letter {
                if w.0.last() == Some(&inverse_letter(l)) {
                    continue;
                }
                let mut v = w.0.clone();
                v.push(l);
                next.push(Word(v));
            }
        }
        self.level = next;
        self.pos = 0;
        self.next()
    }
}

/// All reduced words of length `<= max_len`, each exactly once, in
/// length-then-lexicographic order.
pub fn reduced_words(g: &GroupPresentation, max_len: usize) -> ReducedWords {
    ReducedWords { alphabet: g.alphabet_size(), max_len, level: vec![Word::empty()], pos: 0 }
}

/// One orbit point `γ x₀`.
#[derive(Debug, Clone)]
pub struct OrbitEntry {
    pub word: Word,
    pub matrix: Mobius,
    pub displacement: f64,
}

/// All `γ` with `d(x₀, γ x₀) <= radius`, in shortlex word order.
#[derive(Debug, Clone)]
pub struct OrbitBall {
    pub entries: Vec<OrbitEntry>,
    pub radius: f64,
    pub truncated: bool,
}

/// Enumeration knobs for [`orbit_ball`].
#[derive(Debug, Clone, Copy)]
pub struct BallOptions {
    /// A prefix is abandoned once its displacement exceeds `radius + slack`.
    /// `None` means twice the largest generator displacement.
    pub prune_slack: Option<f64>,
    /// Maximum number of entries kept.
    pub max_entries: usize,
    /// Return a partial ball (with `truncated` set) instead of an error when
    /// the budget is hit.
    pub allow_truncation: bool,
}

impl Default for BallOptions {
    fn default() -> Self {
        Self { prune_slack: None, max_entries: 20_000_000, allow_truncation: false }
    }
}

impl OrbitBall {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sub-ball of the entries with displacement `<= r`.
    pub fn restricted(&self, r: f64) -> OrbitBall {
        OrbitBall {
            entries: self.entries.iter().filter(|e| e.displacement <= r).cloned().collect(),
            radius: r.min(self.radius),
            truncated: self.truncated,
        }
    }
}

struct Frame {
    letters: Vec<Letter>,
    matrix: Mobius,
}

fn dfs_from(
    g: &GroupPresentation,
    first: Letter,
    radius: f64,
    slack: f64,
    budget: usize,
) -> (Vec<OrbitEntry>, Option<f64>) {
    let mut out = Vec::new();
    let mut stack = vec![Frame { letters: vec![first], matrix: g.letter_matrix(first) }];
    while let Some(fr) = stack.pop() {
        let d = g.displacement(&fr.matrix);
        if d <= radius {
            if out.len() >= budget {
                // Words still pending have a prefix at displacement >= d(prefix).
                let pending = stack
                    .iter()
                    .map(|f| g.displacement(&f.matrix))
                    .chain(std::iter::once(d))
                    .fold(f64::INFINITY, f64::min);
                return (out, Some((pending - slack - 1e-9 * (1.0 + pending)).clamp(0.0, radius)));
            }
            out.push(OrbitEntry { word: Word(fr.letters.clone()), matrix: fr.matrix, displacement: d });
        }
        if d > radius + slack {
            continue;
        }
        let last = *fr.letters.last().expect("nonempty");
        for l in (0..g.alphabet_size() as Letter).rev() {
            if l == inverse_letter(last) {
                continue;
            }
            let mut m = fr.matrix * g.letter_matrix(l);
            if (fr.letters.len() + 1) % 64 == 0 {
                m = m.renormalized();
            }
            let mut letters = fr.letters.clone();
            letters.push(l);
            stack.push(Frame { letters, matrix: m });
        }
    }
    (out, None)
}

/// Orbit ball of radius `radius` about `x₀`, pruned depth-first search.
///
/// The search is split on the first letter and merged in shortlex order, so
/// the result does not depend on the number of worker threads.
pub fn orbit_ball(g: &GroupPresentation, radius: f64, opts: &BallOptions) -> Result<OrbitBall> {
    if !(radius > 0.0) {
        return Err(Error::Domain("orbit ball radius must be positive".into()));
    }
    let slack = opts.prune_slack.unwrap_or(2.0 * g.max_generator_displacement());
    let budget = opts.max_entries.max(1);
    let parts: Vec<(Vec<OrbitEntry>, Option<f64>)> = (0..g.alphabet_size() as Letter)
        .into_par_iter()
        .map(|l| dfs_from(g, l, radius, slack, budget))
        .collect();
    let mut completed = radius;
    let mut entries = vec![OrbitEntry { word: Word::empty(), matrix: Mobius::identity(), displacement: 0.0 }];
    for (part, trunc) in parts {
        if let Some(r) = trunc {
            completed = completed.min(r);
        }
        entries.extend(part);
    }
    let mut truncated = completed < radius;
    if entries.len() > budget {
        truncated = true;
        entries.sort_by(|a, b| a.displacement.total_cmp(&b.displacement));
        // stop strictly below the first dropped entry, and below any entry
        // that ties with it up to rounding
        let cut = entries[budget].displacement;
        completed = completed.min(cut - 1e-9 * (1.0 + cut));
        entries.truncate(budget);
    }
    if truncated {
        if !opts.allow_truncation {
            return Err(Error::Truncated { completed_radius: completed });
        }
        entries.retain(|e| e.displacement <= completed);
    }
    entries.sort_by(|a, b| a.word.shortlex_cmp(&b.word));
    Ok(OrbitBall { entries, radius: if truncated { completed } else { radius }, truncated })
}

/// A closed arc of the boundary, stored as its endpoints in counterclockwise
/// order seen from `observer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryArc {
    pub start: BoundaryPoint,
    pub end: BoundaryPoint,
    pub observer: HPoint,
}

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

impl BoundaryArc {
    fn angles(&self) -> (f64, f64) {
        let a = boundary_angle(self.observer, self.start);
        let mut b = boundary_angle(self.observer, self.end);
        while b < a {
            b += 2.0 * PI;
        }
        (a, b)
    }

    /// Angular width seen from the observer.
    pub fn width(&self) -> f64 {
        let (a, b) = self.angles();
        b - a
    }

    pub fn contains_angle(&self, theta: f64, tol: f64) -> bool {
        let (a, b) = self.angles();
        let mut t = theta;
        while t < a - tol {
            t += 2.0 * PI;
        }
        while t > a + 2.0 * PI - tol {
            t -= 2.0 * PI;
        }
        t <= b + tol
    }

    pub fn contains(&self, xi: BoundaryPoint, tol: f64) -> bool {
        self.contains_angle(boundary_angle(self.observer, xi), tol)
    }

    /// Overlap length of two arcs (0 if disjoint).
    fn overlap(&self, other: &BoundaryArc) -> f64 {
        let (a0, a1) = self.angles();
        let b0 = boundary_angle(self.observer, other.start);
        let bw = other.width();
        let mut best: f64 = 0.0;
        for k in -1..=1 {
            let s = b0 + 2.0 * PI * k as f64;
            let lo = a0.max(s);
            let hi = a1.min(s + bw);
            best = best.max(hi - lo);
        }
        best.max(0.0)
    }
}

/// Result of the ping-pong certification.
#[derive(Debug, Clone)]
pub struct PingPongCertificate {
    pub ok: bool,
    /// Arcs `I(s)` for each letter `s` (generator then inverse).
    pub intervals: Vec<BoundaryArc>,
    /// Point whose Dirichlet bisectors produced the arcs.
    pub center: HPoint,
    pub steps: usize,
    pub diagnostic: String,
}

impl PingPongCertificate {
    pub fn contains(&self, xi: BoundaryPoint) -> bool {
        self.intervals.iter().any(|a| a.contains(xi, 1e-9))
    }

    /// Index of the letter whose arc contains the angle (seen from the certificate centre).
    pub fn letter_of_angle(&self, theta: f64) -> Option<usize> {
        self.intervals.iter().position(|a| a.contains_angle(theta, 1e-9))
    }
}

/// Arc of boundary points closer to `s x` than to `x`: the bisector arc
/// about the direction of `s x`, of half-width `α` with `cos α = tanh(d/2)`.
fn bisector_arc(s: &Mobius, x: HPoint) -> BoundaryArc {
    let y = s.apply(x);
    let d = dist(x, y);
    let phi = direction_angle(x, y);
    let alpha = (d / 2.0).tanh().acos();
    BoundaryArc {
        start: crate::geometry::boundary_at_angle(x, wrap(phi - alpha)),
        end: crate::geometry::boundary_at_angle(x, wrap(phi + alpha)),
        observer: x,
    }
}

fn arcs_for(mats: &[Mobius], x: HPoint) -> Vec<BoundaryArc> {
    mats.iter()
        .flat_map(|m| [bisector_arc(m, x), bisector_arc(&m.inverse(), x)])
        .collect()
}

/// Total pairwise overlap of the arcs, ignoring the shared fixed point of a
/// parabolic pair `I(s), I(s⁻¹)`.
fn overlap_score(mats: &[Mobius], arcs: &[BoundaryArc]) -> f64 {
    let mut total = 0.0;
    for i in 0..arcs.len() {
        for j in (i + 1)..arcs.len() {
            let o = arcs[i].overlap(&arcs[j]);
            let parabolic_pair = i / 2 == j / 2 && mats[i / 2].classify() == IsometryKind::Parabolic;
            if parabolic_pair && o < 1e-9 {
                continue;
            }
            // closed arcs touching at a point count as intersecting
            total += if o >= -1e-15 && touches(&arcs[i], &arcs[j]) { o.max(1e-12) } else { o };
        }
    }
    total
}

fn touches(a: &BoundaryArc, b: &BoundaryArc) -> bool {
    a.overlap(b) > 0.0 || a.contains(b.start, 1e-12) || a.contains(b.end, 1e-12) || b.contains(a.start, 1e-12)
}

/// Checks that `s` maps the complement of `I(s⁻¹)` onto `I(s)`.
fn containment_holds(m: &Mobius, arc_s: &BoundaryArc, arc_inv: &BoundaryArc) -> bool {
    // complement of I(s⁻¹) runs from its end to its start; its image must be I(s)
    let img_start = m.apply_boundary(arc_inv.end);
    let img_end = m.apply_boundary(arc_inv.start);
    let x = arc_s.observer;
    let close = |p: BoundaryPoint, q: BoundaryPoint| {
        let d = wrap(boundary_angle(x, p) - boundary_angle(x, q)).abs();
        d < 1e-7
    };
    close(img_start, arc_s.start) && close(img_end, arc_s.end)
}

/// Ping-pong certification.
///
/// For each letter `s` the arc `I(s)` is the boundary of the half-plane of
/// points closer to `s x` than to `x`; `s` maps the complement of `I(s⁻¹)`
/// onto `I(s)`. The group is certified when all `2k` arcs are pairwise
/// disjoint (a parabolic pair may share its fixed point). Starting from the
/// given basepoint, up to 60 refinement steps move the centre `x` by pattern
/// search to reduce the total overlap. Inconclusive searches report `false`.
pub fn verify_ping_pong(mats: &[Mobius], basepoint: HPoint) -> PingPongCertificate {
    for m in mats {
        let k = m.classify();
        if k != IsometryKind::Hyperbolic && k != IsometryKind::Parabolic {
            return PingPongCertificate {
                ok: false,
                intervals: vec![],
                center: basepoint,
                steps: 0,
                diagnostic: format!("generator is {k:?}, not hyperbolic or parabolic"),
            };
        }
    }
    let mut x = basepoint;
    let mut arcs = arcs_for(mats, x);
    let mut score = overlap_score(mats, &arcs);
    let mut step = 0.5;
    let mut steps = 0;
    while score > 0.0 && steps < 60 {
        steps += 1;
        let mut improved = false;
        // moves in the hyperbolic metric: scale step by height
        for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let cand = HPoint { re: x.re + dx * step * x.im, im: x.im * (dy * step).exp() };
            let ca = arcs_for(mats, cand);
            let cs = overlap_score(mats, &ca);
            if cs < score {
                x = cand;
                arcs = ca;
                score = cs;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let contain_ok = mats
        .iter()
        .enumerate()
        .all(|(i, m)| containment_holds(m, &arcs[2 * i], &arcs[2 * i + 1]));
    let ok = score == 0.0 && contain_ok;
    let diagnostic = if ok {
        format!("certified after {steps} refinement steps")
    } else if !contain_ok {
        "arc pairing check failed".to_string()
    } else {
        format!("arcs still overlap (total {score:.3e}) after {steps} refinement steps")
    };
    PingPongCertificate { ok, intervals: arcs, center: x, steps, diagnostic }
}

/// `min over non-identity words |γ| <= max_len of d(x, γ x₀) - d(x, x₀)`.
pub fn dirichlet_margin(g: &GroupPresentation, x: HPoint, max_len: usize) -> Result<f64> {
    if max_len < 1 {
        return Err(Error::Domain("dirichlet_margin needs max_len >= 1".into()));
    }
    let x0 = g.basepoint();
    let base = dist(x, x0);
    Ok(reduced_words(g, max_len)
        .skip(1)
        .map(|w| dist(x, g.word_matrix(&w).apply(x0)) - base)
        .fold(f64::INFINITY, f64::min))
}

/// One entry per conjugacy class of cyclically reduced words (up to rotation
/// and inversion) of length `<= max_len`, with its translation length.
/// Non-hyperbolic classes are skipped.
pub fn conjugacy_lengths(g: &GroupPresentation, max_len: usize) -> Vec<(Word, f64)> {
    let mut classes: BTreeMap<(usize, Vec<Letter>), f64> = BTreeMap::new();
    for w in reduced_words(g, max_len).skip(1) {
        if !w.is_cyclically_reduced() {
            continue;
        }
        let key = w.cyclic_canonical();
        let k = (key.len(), key.0.clone());
        if classes.contains_key(&k) {
            continue;
        }
        if let Ok(l) = g.word_matrix(&key).translation_length() {
            classes.insert(k, l);
        }
    }
    classes.into_iter().map(|((_, letters), l)| (Word(letters), l)).collect()
}

/// Attracting fixed points of all words of length exactly `max_len`.
pub fn limit_set_sample(g: &GroupPresentation, max_len: usize) -> Vec<BoundaryPoint> {
    reduced_words(g, max_len)
        .filter(|w| w.len() == max_len)
        .filter_map(|w| g.word_matrix(&w).attracting_fixed_point().ok())
        .collect()
}

/// Locates the Γ-translates of the fundamental domain near a point, so that
/// Γ-invariant functions can be evaluated from finitely many translates.
#[derive(Debug, Clone)]
pub struct Tiling {
    group: GroupPresentation,
    short: Vec<Mobius>,
    nbhd_len: usize,
}

fn matrix_key(m: &Mobius) -> [i64; 4] {
    [m.a, m.b, m.c, m.d].map(|x| (x * 1e6).round() as i64)
}

fn dedup_matrices(mut ms: Vec<Mobius>) -> Vec<Mobius> {
    ms.sort_by_key(matrix_key);
    let mut out: Vec<Mobius> = Vec::with_capacity(ms.len());
    for m in ms {
        let scale = 1.0 + m.a.abs().max(m.b.abs()).max(m.c.abs()).max(m.d.abs());
        if out.last().is_none_or(|l| !l.approx_eq(&m, 1e-9 * scale)) {
            out.push(m);
        }
    }
    out
}

impl Tiling {
    /// `nbhd_len` bounds the word length of the neighbouring translates
    /// considered around the domain containing a point.
    pub fn new(group: GroupPresentation, nbhd_len: usize) -> Self {
        let short = group.short_elements(nbhd_len);
        Self { group, short, nbhd_len }
    }

    pub fn group(&self) -> &GroupPresentation {
        &self.group
    }

    pub fn nbhd_len(&self) -> usize {
        self.nbhd_len
    }

    /// Elements `γ` with `γ D` among the domains around `p`.
    pub fn near_point(&self, p: HPoint) -> Vec<Mobius> {
        let (_, g) = self.group.reduce(p);
        let gi = g.inverse();
        self.short.iter().map(|s| gi * *s).collect()
    }

    /// Elements `γ` with `γ D` among the domains around some point of the
    /// segment `[p, q]`, sampled every `spacing` of arclength.
    pub fn near_segment(&self, seg: &crate::geometry::RaySegment<f64>, spacing: f64) -> Vec<Mobius> {
        let n = (seg.length / spacing).ceil().max(1.0) as usize;
        let mut centers = Vec::with_capacity(n + 1);
        let mut last: Option<Mobius> = None;
        for k in 0..=n {
            let p = seg.point_at(seg.length * k as f64 / n as f64);
            let (_, g) = self.group.reduce(p);
            if last.is_none_or(|l| !l.approx_eq(&g, 1e-9 * (1.0 + g.a.abs() + g.d.abs()))) {
                centers.push(g.inverse());
                last = Some(g);
            }
        }
        let centers = dedup_matrices(centers);
        dedup_matrices(
            centers
                .iter()
                .flat_map(|c| self.short.iter().map(move |s| *c * *s))
                .collect(),
        )
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "id");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            let g = l / 2;
            if l % 2 == 0 {
                write!(f, "g{g}")?;
            } else {
                write!(f, "g{g}'")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schottky() -> GroupPresentation {
        GroupPresentation::schottky_symmetric(3.0).unwrap()
    }

    #[test]
    fn word_counts() {
        let g = schottky();
        assert_eq!(reduced_words(&g, 0).count(), 1);
        assert_eq!(reduced_words(&g, 1).count(), 5);
        assert_eq!(reduced_words(&g, 3).count(), 53);
        for n in 0..6usize {
            let expect = 1 + 4 * (3usize.pow(n as u32) - 1) / 2;
            assert_eq!(reduced_words(&g, n).count(), expect);
        }
        let ws: Vec<Word> = reduced_words(&g, 3).collect();
        assert!(ws.windows(2).all(|p| p[0].shortlex_cmp(&p[1]) == Ordering::Less));
        assert!(ws.iter().all(|w| w.is_reduced()));
    }

    #[test]
    fn cyclic_ball_closed_form() {
        let g = GroupPresentation::cyclic_hyperbolic(Mobius::diagonal(2.0).unwrap()).unwrap();
        let b = orbit_ball(&g, 4.2, &BallOptions::default()).unwrap();
        assert_eq!(b.len(), 7);
        for e in &b.entries {
            let n = e.word.len() as f64;
            assert!((e.displacement - n * 4f64.ln()).abs() < 1e-10);
        }
        let tiny = orbit_ball(&g, 0.5, &BallOptions::default()).unwrap();
        assert_eq!(tiny.len(), 1);
        assert!(tiny.entries[0].word.is_empty());
    }

    #[test]
    fn ball_monotone_and_pruning_complete() {
        let g = schottky();
        let mut prev = 0;
        for r in [2.0, 3.0, 4.0, 5.0, 6.0] {
            let b = orbit_ball(&g, r, &BallOptions::default()).unwrap();
            assert!(b.len() > prev);
            prev = b.len();
        }
        // unpruned: all words up to length 8 (displacement grows by >= ℓ/2 per letter)
        let full: Vec<Word> = reduced_words(&g, 8)
            .filter(|w| g.displacement(&g.word_matrix(w)) <= 6.0)
            .collect();
        let b = orbit_ball(&g, 6.0, &BallOptions::default()).unwrap();
        let got: Vec<Word> = b.entries.iter().map(|e| e.word.clone()).collect();
        assert_eq!(got, full);
    }

    #[test]
    fn truncation_reports_radius() {
        let g = schottky();
        let opts = BallOptions { max_entries: 50, ..Default::default() };
        match orbit_ball(&g, 8.0, &opts) {
            Err(Error::Truncated { completed_radius }) => assert!(completed_radius < 8.0),
            other => panic!("expected truncation, got {other:?}"),
        }
        let partial = orbit_ball(&g, 8.0, &BallOptions { allow_truncation: true, ..opts }).unwrap();
        assert!(partial.truncated && partial.radius < 8.0);
        let reference = orbit_ball(&g, partial.radius, &BallOptions::default()).unwrap();
        assert_eq!(reference.len(), partial.len());
    }

    #[test]
    fn ping_pong_examples() {
        let g1 = Mobius::diagonal(2.0).unwrap();
        assert!(verify_ping_pong(&[g1], HPoint::i()).ok);
        // shared fixed point at ∞
        let g2 = Mobius::translation(1.0).conjugate(&Mobius::diagonal(3.0).unwrap());
        assert!(!verify_ping_pong(&[g1, g2], HPoint::i()).ok);
        // crossing axes: fails at N = 1, certified for a larger power
        let r = Mobius::rotation(PI / 4.0);
        let h = r.conjugate(&g1);
        assert!(!verify_ping_pong(&[g1, h], HPoint::i()).ok);
        let n = (1..10)
            .find(|&n| verify_ping_pong(&[g1.pow(n), h.pow(n)], HPoint::i()).ok)
            .unwrap();
        assert_eq!(n, 2);
        assert!(schottky().certificate().unwrap().ok);
        assert!(GroupPresentation::pingpong_cusp().is_ok());
    }

    #[test]
    fn schottky_words_are_distinct() {
        let g = schottky();
        let mats: Vec<Mobius> = reduced_words(&g, 6).map(|w| g.word_matrix(&w)).collect();
        let mut keys: Vec<[i64; 4]> = mats
            .iter()
            .map(|m| [m.a, m.b, m.c, m.d].map(|x| (x * 1e7).round() as i64))
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), mats.len());
        for i in (0..mats.len()).step_by(97) {
            for j in (i + 1..mats.len()).step_by(89) {
                assert!(!mats[i].approx_eq(&mats[j], 1e-8));
            }
        }
    }

    #[test]
    fn homomorphism_and_subadditivity() {
        let g = schottky();
        let ws: Vec<Word> = reduced_words(&g, 4).collect();
        for (i, a) in ws.iter().enumerate().step_by(7) {
            for b in ws.iter().skip(i % 5).step_by(11) {
                let prod = g.word_matrix(&a.concat(b));
                let direct = g.word_matrix(a) * g.word_matrix(b);
                assert!(prod.approx_eq(&direct, 1e-10 * (1.0 + direct.a.abs().max(direct.d.abs()))));
                let d = g.displacement(&prod);
                assert!(d <= g.displacement(&g.word_matrix(a)) + g.displacement(&g.word_matrix(b)) + 1e-9);
            }
        }
    }

    #[test]
    fn dirichlet_examples() {
        let g = schottky();
        let x0 = g.basepoint();
        let m = dirichlet_margin(&g, x0, 3).unwrap();
        assert!((m - g.min_generator_displacement()).abs() < 1e-12);
        // midpoint of [x0, a x0] lies on the bisector
        let a = g.letter_matrix(0);
        let mid = HPoint::new(0.0, a.apply(x0).im.sqrt()).unwrap();
        assert!(dirichlet_margin(&g, mid, 4).unwrap().abs() < 1e-9);
        let moved = a.apply(HPoint::new(0.1, 1.2).unwrap());
        assert!(dirichlet_margin(&g, moved, 3).unwrap() <= 0.0);
        assert!(dirichlet_margin(&g, x0, 0).is_err());
    }

    #[test]
    fn conjugacy_classes() {
        let g = schottky();
        let one = conjugacy_lengths(&g, 1);
        assert_eq!(one.len(), 2);
        let ab = Word(vec![0, 2]);
        let ba = Word(vec![2, 0]);
        assert_eq!(ab.cyclic_canonical(), ba.cyclic_canonical());
        let two = conjugacy_lengths(&g, 2);
        assert_eq!(two.iter().filter(|(w, _)| w.len() == 2 && w.0[0] / 2 != w.0[1] / 2).count(), 2);
        // trace formula vs minimization along the axis
        let m = g.word_matrix(&ab);
        let l = m.translation_length().unwrap();
        let ax = m.axis().unwrap();
        let std = crate::geometry::standardizing_map(&ax);
        let back = std.inverse();
        let brute = (0..1000)
            .map(|k| {
                let p = back.apply(HPoint::new(0.0, (-3.0 + 6e-3 * k as f64).exp()).unwrap());
                dist(p, m.apply(p))
            })
            .fold(f64::INFINITY, f64::min);
        assert!((brute - l).abs() < 1e-6);
    }

    #[test]
    fn limit_set_nesting() {
        let g = schottky();
        let cert = g.certificate().unwrap();
        for depth in [1, 3, 5] {
            for (w, xi) in reduced_words(&g, depth).filter(|w| w.len() == depth).zip(limit_set_sample(&g, depth)) {
                assert!(cert.contains(xi));
                assert!(cert.intervals[w.0[0] as usize].contains(xi, 1e-9), "{w}");
            }
        }
        let cyc = GroupPresentation::cyclic_hyperbolic(Mobius::diagonal(2.0).unwrap()).unwrap();
        let pts = limit_set_sample(&cyc, 4);
        // words h^4 and h^-4: the two fixed points
        assert_eq!(pts.len(), 2);
        assert!(!pts[0].approx_eq(&pts[1], 1e-9));
    }
}
