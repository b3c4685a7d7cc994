//! Experiment configuration: a strict TOML file naming a group, a potential
//! and the numeric knobs shared by every command.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::group::{GroupKind, GroupPresentation, Tiling, Word};
use crate::potential::{build_cusp_schedule, dyadic_levels, parabolic_generator, CuspSchedule, Potential};
use crate::{HPoint, Mobius};

/// The shipped default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../../../../configs/default.toml");

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: GroupSpec,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    /// `schottky-symmetric`, `parabolic-cyclic` or `pingpong-cusp`.
    pub preset: Option<String>,
    /// Dilation of the symmetric Schottky preset.
    pub lambda: Option<f64>,
    /// Kind of a group given by explicit generators.
    pub kind: Option<GroupKind>,
    #[serde(default)]
    pub generators: Vec<GeneratorSpec>,
    /// `[re, im]`; defaults to the preset basepoint or `i`.
    pub basepoint: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub label: String,
    /// Row-major `[a, b, c, d]`.
    pub matrix: [f64; 4],
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSpec {
    /// `zero`, `constant`, `bump` or `cusp-height`.
    pub name: String,
    /// Value of `constant`, height of a single `bump`.
    pub value: f64,
    /// Base of the bump family: `zero` or `cusp-height`.
    pub base: String,
    /// Word whose axis carries the bumps, in generator labels.
    pub h_word: Option<String>,
    /// Bump heights `c_n`, `n = 1, 2, ...`.
    pub c_schedule: Vec<f64>,
    /// Cusp levels `t_n`, strictly decreasing.
    pub t_schedule: Vec<f64>,
    /// First band boundary `Y₀` of the cusp schedule.
    pub y0: f64,
    /// Word length of the neighbourhood searched for the nearest translate.
    pub nbhd_len: usize,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self {
            name: "zero".into(),
            value: 1.0,
            base: "zero".into(),
            h_word: None,
            c_schedule: (1..=6).map(|n| 2f64.powi(n)).collect(),
            t_schedule: dyadic_levels(6),
            y0: 0.5,
            nbhd_len: 3,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub max_word_length: usize,
    pub ball_radius: f64,
    pub window_c: f64,
    /// Windows compared by the window-invariance check.
    pub windows: Vec<f64>,
    pub coding_depth: usize,
    pub approx_depth: usize,
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    /// Largest power of the parabolic generator in finiteness series.
    pub n_max: usize,
    /// Exponents `δ` tried by the finiteness series.
    pub finiteness_deltas: Vec<f64>,
    /// Half-width of the pressure-curve grid around the Bowen root.
    pub pressure_span: f64,
    pub pressure_points: usize,
    /// `s − δ̂` of the Patterson approximant.
    pub patterson_gap: f64,
    /// Boundary points sampled by the equivariance check.
    pub patterson_samples: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            max_word_length: 3,
            ball_radius: 13.0,
            window_c: 1.0,
            windows: vec![0.5, 1.0, 2.0],
            coding_depth: 8,
            approx_depth: 20,
            epsilon: 0.3,
            samples: 4,
            seed: 0,
            n_max: 2000,
            finiteness_deltas: vec![1.0, 0.5],
            pressure_span: 0.5,
            pressure_points: 11,
            patterson_gap: 0.1,
            patterson_samples: 8,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub out_dir: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { out_dir: "out".into() }
    }
}

impl ExperimentConfig {
    /// Parses and validates; every failure is an [`Error::Config`].
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        let n = &self.numerics;
        let positive = [
            ("numerics.ball_radius", n.ball_radius),
            ("numerics.window_c", n.window_c),
            ("numerics.epsilon", n.epsilon),
            ("numerics.pressure_span", n.pressure_span),
            ("numerics.patterson_gap", n.patterson_gap),
            ("potential.y0", self.potential.y0),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{key} must be positive, got {v}")));
            }
        }
        let counts = [
            ("numerics.max_word_length", n.max_word_length),
            ("numerics.coding_depth", n.coding_depth),
            ("numerics.approx_depth", n.approx_depth),
            ("numerics.samples", n.samples),
            ("numerics.n_max", n.n_max),
            ("numerics.pressure_points", n.pressure_points),
            ("numerics.patterson_samples", n.patterson_samples),
            ("potential.nbhd_len", self.potential.nbhd_len),
        ];
        for (key, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{key} must be positive")));
            }
        }
        if n.approx_depth < n.coding_depth {
            return Err(Error::Config("numerics.approx_depth must be at least numerics.coding_depth".into()));
        }
        for (key, list) in [
            ("numerics.windows", &n.windows),
            ("numerics.finiteness_deltas", &n.finiteness_deltas),
            ("potential.c_schedule", &self.potential.c_schedule),
            ("potential.t_schedule", &self.potential.t_schedule),
        ] {
            if list.is_empty() || list.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::Config(format!("{key} must be a nonempty list of positive numbers")));
            }
        }
        if !["zero", "constant", "bump", "cusp-height"].contains(&self.potential.name.as_str()) {
            return Err(Error::Config(format!("unknown potential.name {:?}", self.potential.name)));
        }
        if !["zero", "cusp-height"].contains(&self.potential.base.as_str()) {
            return Err(Error::Config(format!("unknown potential.base {:?}", self.potential.base)));
        }
        let g = &self.group;
        match (&g.preset, g.generators.is_empty()) {
            (Some(_), false) => {
                return Err(Error::Config("group.preset and group.generators are exclusive".into()));
            }
            (None, true) => return Err(Error::Config("group needs a preset or generators".into())),
            _ => {}
        }
        if g.lambda.is_some() && g.preset.as_deref() != Some("schottky-symmetric") {
            return Err(Error::Config("group.lambda applies to the schottky-symmetric preset only".into()));
        }
        Ok(())
    }

    /// The configured group.
    pub fn group(&self) -> Result<GroupPresentation> {
        let g = &self.group;
        let base = match g.preset.as_deref() {
            Some("schottky-symmetric") => {
                GroupPresentation::schottky_symmetric(g.lambda.unwrap_or(std::f64::consts::E))?
            }
            Some("parabolic-cyclic") => GroupPresentation::parabolic_cyclic(),
            Some("pingpong-cusp") => GroupPresentation::pingpong_cusp()?,
            Some(other) => return Err(Error::Config(format!("unknown group.preset {other:?}"))),
            None => {
                let kind = g.kind.ok_or_else(|| Error::Config("group.kind is required with generators".into()))?;
                let mats = g
                    .generators
                    .iter()
                    .map(|s| {
                        let [a, b, c, d] = s.matrix;
                        Mobius::new(a, b, c, d).map(|m| (s.label.as_str(), m))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let bp = g.basepoint.unwrap_or([0.0, 1.0]);
                return GroupPresentation::from_matrices(&mats, kind, HPoint::new(bp[0], bp[1])?);
            }
        };
        match g.basepoint {
            None => Ok(base),
            Some([re, im]) => {
                let mats: Vec<(&str, Mobius)> =
                    base.generators().iter().map(|s| (s.label.as_str(), s.matrix)).collect();
                GroupPresentation::from_matrices(&mats, base.kind(), HPoint::new(re, im)?)
            }
        }
    }

    /// Tiling used by Γ-invariant potentials.
    pub fn tiling(&self, g: &GroupPresentation) -> Arc<Tiling> {
        Arc::new(Tiling::new(g.clone(), self.potential.nbhd_len))
    }

    /// Word `h` whose axis carries the bumps; the first generator by default.
    pub fn h_word(&self, g: &GroupPresentation) -> Result<Word> {
        let w = match &self.potential.h_word {
            Some(text) => g.parse_word(text)?,
            None => Word::new(vec![0])?,
        };
        if w.is_empty() || !w.is_cyclically_reduced() {
            return Err(Error::Config("potential.h_word must be nonempty and cyclically reduced".into()));
        }
        Ok(w)
    }

    /// Cusp schedule of the parabolic subgroup of `g`.
    pub fn cusp_schedule(&self, g: &GroupPresentation) -> Result<CuspSchedule> {
        let cyc = parabolic_subgroup(g)?;
        build_cusp_schedule(&self.potential.t_schedule, &cyc, g.basepoint(), self.potential.y0)
    }

    /// The cusp potential `H` of `g`.
    pub fn cusp_height(&self, g: &GroupPresentation) -> Result<Potential> {
        let s = self.cusp_schedule(g)?;
        let tiling = (g.kind() != GroupKind::CyclicParabolic).then(|| self.tiling(g));
        Ok(Potential::cusp_height(s, tiling))
    }

    /// Base `H` of the bump family.
    pub fn base_potential(&self, g: &GroupPresentation) -> Result<Potential> {
        match self.potential.base.as_str() {
            "cusp-height" => self.cusp_height(g),
            _ => Ok(Potential::Zero),
        }
    }

    /// `F_n = H + bump of height c` on the orbit of the axis of `h`.
    pub fn bump(&self, g: &GroupPresentation, n: usize, c: f64) -> Result<Potential> {
        let h = g.word_matrix(&self.h_word(g)?);
        Potential::orbit_bump(n, c, &h, self.base_potential(g)?, Some(self.tiling(g)))
    }

    /// `(n, c_n, F_n)` for the configured schedule.
    pub fn family(&self, g: &GroupPresentation) -> Result<Vec<(usize, f64, Potential)>> {
        self.potential
            .c_schedule
            .iter()
            .enumerate()
            .map(|(i, &c)| self.bump(g, i + 1, c).map(|f| (i + 1, c, f)))
            .collect()
    }

    /// The single potential named by `potential.name`.
    pub fn potential(&self, g: &GroupPresentation) -> Result<Potential> {
        match self.potential.name.as_str() {
            "zero" => Ok(Potential::Zero),
            "constant" => Ok(Potential::Constant(self.potential.value)),
            "bump" => self.bump(g, 1, self.potential.value),
            "cusp-height" => self.cusp_height(g),
            other => Err(Error::Config(format!("unknown potential.name {other:?}"))),
        }
    }
}

/// Cyclic group generated by the parabolic generator of `g`, with the same
/// basepoint.
pub fn parabolic_subgroup(g: &GroupPresentation) -> Result<GroupPresentation> {
    if g.kind() == GroupKind::CyclicParabolic {
        return Ok(g.clone());
    }
    let p = parabolic_generator(g).ok_or_else(|| Error::Domain("group has no parabolic generator".into()))?;
    GroupPresentation::from_matrices(&[("p", p)], GroupKind::CyclicParabolic, g.basepoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_parses() {
        let cfg = ExperimentConfig::parse(DEFAULT_CONFIG).unwrap();
        assert_eq!(cfg.numerics.seed, 0);
        assert_eq!(cfg.group().unwrap().kind(), GroupKind::Schottky);
        assert_eq!(cfg.family(&cfg.group().unwrap()).unwrap().len(), 6);
    }

    #[test]
    fn unknown_keys_and_bad_knobs_rejected() {
        let bad = "[group]\npreset = \"parabolic-cyclic\"\ncolour = 3\n";
        let err = ExperimentConfig::parse(bad).unwrap_err().to_string();
        assert!(err.contains("colour") && err.contains("line 3"), "{err}");
        let neg = "[group]\npreset = \"parabolic-cyclic\"\n[numerics]\nepsilon = -1.0\n";
        assert!(matches!(ExperimentConfig::parse(neg), Err(Error::Config(_))));
        let both = "[group]\npreset = \"parabolic-cyclic\"\ngenerators = [{ label = \"a\", matrix = [2.0, 0.0, 0.0, 0.5] }]\n";
        assert!(ExperimentConfig::parse(both).is_err());
    }

    #[test]
    fn explicit_generators() {
        let text = "[group]\nkind = \"cyclic-hyperbolic\"\ngenerators = [{ label = \"h\", matrix = [2.0, 0.0, 0.0, 0.5] }]\n";
        let g = ExperimentConfig::parse(text).unwrap().group().unwrap();
        assert_eq!(g.alphabet_size(), 2);
        assert_eq!(g.parse_word("h^-1 h^-1").unwrap(), Word(vec![1, 1]));
        assert!(g.parse_word("q").is_err());
    }
}
