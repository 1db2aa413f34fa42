use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ch::{ChParams, ChScheme, Shape};
use crate::dense::{default_dt_grid, ToyProblem, ToySpec};
use crate::error::{Error, Result};
use crate::linop::{Scheme, SchemeOptions};
use crate::spectral::GridSpec;

/// Experiment families. Each fills its own defaults when parsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ToyConsistency,
    ToyStability,
    Ch2dDisk,
    Mch2d,
    Nmn2d,
    Nmn3dTube,
    Nmn3dPlate,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::ToyConsistency,
        Experiment::ToyStability,
        Experiment::Ch2dDisk,
        Experiment::Mch2d,
        Experiment::Nmn2d,
        Experiment::Nmn3dTube,
        Experiment::Nmn3dPlate,
        Experiment::Custom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::ToyConsistency => "toy-consistency",
            Experiment::ToyStability => "toy-stability",
            Experiment::Ch2dDisk => "ch2d-disk",
            Experiment::Mch2d => "mch2d",
            Experiment::Nmn2d => "nmn2d",
            Experiment::Nmn3dTube => "nmn3d-tube",
            Experiment::Nmn3dPlate => "nmn3d-plate",
            Experiment::Custom => "custom",
        }
    }

    pub fn is_toy(&self) -> bool {
        matches!(self, Experiment::ToyConsistency | Experiment::ToyStability)
    }

    /// One-line description for `mobsav presets`.
    pub fn description(&self) -> &'static str {
        match self {
            Experiment::ToyConsistency => {
                "2x2 linear flow: final-time error against the matrix exponential for 10 step sizes, all five generic schemes"
            }
            Experiment::ToyStability => {
                "2x2 linear flow up to T = 200 with dt in {0.1, 1, 4}: E, J, J~ and r traces"
            }
            Experiment::Ch2dDisk => "disk relaxation on a 256^2 grid, any Cahn-Hilliard stepper",
            Experiment::Mch2d => {
                "disk on a 128^2 grid with the degenerate mobility 36 s^2 (1-s)^2; pair with nmn2d"
            }
            Experiment::Nmn2d => "same disk with the N M N mobility; its profile stays close to [0, 1]",
            Experiment::Nmn3dTube => {
                "perturbed thin tube on 128x32x32 under the N M N model, stopped at pinch-off"
            }
            Experiment::Nmn3dPlate => "thin plate with a central bump on 64x64x32 under the N M N model",
            Experiment::Custom => "grid, params, shape, scheme and n_steps all given explicitly",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown experiment `{s}`")))
    }
}

/// Every stepper reachable from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Cvx,
    Mbsav1,
    Mbsav1plus,
    Mbsav2,
    Mbsav2plus,
    Eyre,
    Savclassic,
    Mchsav1,
    Nmnsav1,
}

impl SchemeName {
    /// The generic-flow scheme, for toy experiments.
    pub fn generic(&self) -> Option<Scheme> {
        match self {
            SchemeName::Cvx => Some(Scheme::CvxSplit),
            SchemeName::Mbsav1 => Some(Scheme::MbSav1),
            SchemeName::Mbsav1plus => Some(Scheme::MbSav1Plus),
            SchemeName::Mbsav2 => Some(Scheme::MbSav2(Default::default())),
            SchemeName::Mbsav2plus => Some(Scheme::MbSav2Plus(Default::default())),
            _ => None,
        }
    }

    /// The Cahn-Hilliard stepper, for phase-field experiments.
    pub fn cahn_hilliard(&self) -> Option<ChScheme> {
        match self {
            SchemeName::Eyre => Some(ChScheme::Eyre),
            SchemeName::Savclassic => Some(ChScheme::SavClassic),
            SchemeName::Mchsav1 => Some(ChScheme::MchSav1),
            SchemeName::Nmnsav1 => Some(ChScheme::NmnSav1),
            _ => None,
        }
    }
}

impl From<ChScheme> for SchemeName {
    fn from(s: ChScheme) -> Self {
        match s {
            ChScheme::Eyre => SchemeName::Eyre,
            ChScheme::SavClassic => SchemeName::Savclassic,
            ChScheme::MchSav1 => SchemeName::Mchsav1,
            ChScheme::NmnSav1 => SchemeName::Nmnsav1,
        }
    }
}

/// Model and scheme scalars; anything left out is filled from the grid and
/// the experiment preset.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_over_eps2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clamp_r: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allow_negative_j2: Option<bool>,
}

/// A run description. After [`parse_config`] every field the experiment
/// uses is filled in, and serialising then re-parsing gives the same value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Stepper; omitted for toy experiments to run all five generic schemes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub params: ParamSpec,
    /// Toy matrices; the built-in 2×2 problem when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toy: Option<ToySpec>,
    /// Draws a random valid toy problem of this size from `seed` instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toy_random_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    /// Horizon; for phase-field runs it is converted to `n_steps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_time: Option<f64>,
    /// Step sizes of the toy experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Stop once `{u > ½}` has more connected components than initially.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_on_pinch_off: Option<bool>,
    /// Steps between component counts when `stop_on_pinch_off` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pinch_check_every: Option<usize>,
}

/// Implicit mobility bound of the presets, `sup 36 s²(1−s)²`.
pub const PRESET_M: f64 = 2.25;

fn config_err(message: impl Into<String>) -> Error {
    Error::Config {
        path: String::new(),
        message: message.into(),
    }
}

fn field_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Parses strict JSON and fills the experiment's defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    raw.resolve()
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

impl RunConfig {
    /// The preset of `experiment` with every default filled in.
    pub fn preset(experiment: Experiment) -> Result<Self> {
        RunConfig::bare(experiment).resolve()
    }

    fn bare(experiment: Experiment) -> Self {
        RunConfig {
            experiment,
            scheme: None,
            grid: None,
            params: ParamSpec::default(),
            toy: None,
            toy_random_dim: None,
            shape: None,
            n_steps: None,
            final_time: None,
            dt_grid: None,
            output_dir: None,
            snapshot_every: None,
            seed: None,
            stop_on_pinch_off: None,
            pinch_check_every: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Fills defaults and checks consistency; idempotent.
    pub fn resolve(mut self) -> Result<Self> {
        self.output_dir
            .get_or_insert_with(|| PathBuf::from(format!("runs/{}", self.experiment)));
        self.seed.get_or_insert(0);
        if self.experiment.is_toy() {
            self.resolve_toy()?;
        } else {
            self.resolve_ch()?;
        }
        Ok(self)
    }

    fn resolve_toy(&mut self) -> Result<()> {
        for (name, present) in [
            ("grid", self.grid.is_some()),
            ("shape", self.shape.is_some()),
            ("n_steps", self.n_steps.is_some()),
            ("stop_on_pinch_off", self.stop_on_pinch_off.is_some()),
            ("pinch_check_every", self.pinch_check_every.is_some()),
            ("params.eps", self.params.eps.is_some()),
            ("params.dt", self.params.dt.is_some()),
            ("params.alpha_over_eps2", self.params.alpha_over_eps2.is_some()),
            ("params.m", self.params.m.is_some()),
            ("params.beta", self.params.beta.is_some()),
            ("params.dealias", self.params.dealias.is_some()),
            ("params.allow_negative_j2", self.params.allow_negative_j2.is_some()),
        ] {
            if present {
                return Err(field_err(name, format!("not used by {}", self.experiment)));
            }
        }
        if let Some(s) = self.scheme {
            if s.generic().is_none() {
                return Err(field_err(
                    "scheme",
                    format!("{s:?} is a Cahn-Hilliard stepper; {} needs a generic scheme", self.experiment)
                        .to_lowercase(),
                ));
            }
        }
        if self.toy.is_some() && self.toy_random_dim.is_some() {
            return Err(field_err("toy_random_dim", "give either toy or toy_random_dim"));
        }
        let consistency = self.experiment == Experiment::ToyConsistency;
        self.final_time
            .get_or_insert(if consistency { 5.0 } else { 200.0 });
        self.dt_grid.get_or_insert_with(|| {
            if consistency {
                default_dt_grid()
            } else {
                vec![0.1, 1.0, 4.0]
            }
        });
        self.params.c0.get_or_insert(0.0);
        self.params.clamp_r.get_or_insert(true);
        self.snapshot_every.get_or_insert(0);

        let t = self.final_time.unwrap_or_default();
        if !(t > 0.0 && t.is_finite()) {
            return Err(field_err("final_time", format!("must be positive, got {t}")));
        }
        let grid = self.dt_grid.as_deref().unwrap_or_default();
        if grid.is_empty() || grid.iter().any(|dt| !(*dt > 0.0 && dt.is_finite())) {
            return Err(field_err("dt_grid", "needs at least one positive step size"));
        }
        let c0 = self.params.c0.unwrap_or_default();
        if !(c0 >= 0.0) {
            return Err(field_err("params.c0", format!("must be nonnegative, got {c0}")));
        }
        if let Some(n) = self.toy_random_dim {
            if !(1..=8).contains(&n) {
                return Err(field_err("toy_random_dim", format!("must be in 1..=8, got {n}")));
            }
        }
        self.toy_problem().map(|_| ())
    }

    fn resolve_ch(&mut self) -> Result<()> {
        if self.toy.is_some() || self.toy_random_dim.is_some() || self.dt_grid.is_some() {
            return Err(config_err(format!(
                "toy fields are not used by {}",
                self.experiment
            )));
        }
        let e = self.experiment;
        let default_scheme = match e {
            Experiment::Ch2dDisk | Experiment::Mch2d => Some(SchemeName::Mchsav1),
            Experiment::Nmn2d | Experiment::Nmn3dTube | Experiment::Nmn3dPlate => {
                Some(SchemeName::Nmnsav1)
            }
            _ => None,
        };
        let scheme = match (self.scheme, default_scheme) {
            (Some(s), _) | (None, Some(s)) => s,
            (None, None) => return Err(field_err("scheme", "required for custom runs")),
        };
        self.scheme = Some(scheme);
        let ch = scheme.cahn_hilliard().ok_or_else(|| {
            field_err("scheme", format!("{scheme:?} is a generic scheme; {e} needs a Cahn-Hilliard stepper").to_lowercase())
        })?;
        let fixed = match e {
            Experiment::Mch2d => Some(ChScheme::MchSav1),
            Experiment::Nmn2d | Experiment::Nmn3dTube | Experiment::Nmn3dPlate => Some(ChScheme::NmnSav1),
            _ => None,
        };
        if let Some(f) = fixed {
            if f != ch {
                return Err(field_err("scheme", format!("{e} runs {f} only, got {ch}")));
            }
        }

        let grid = match (self.grid, e) {
            (Some(g), _) => g,
            (None, Experiment::Ch2dDisk) => GridSpec::cube(2, 256)?,
            (None, Experiment::Mch2d | Experiment::Nmn2d) => GridSpec::cube(2, 128)?,
            (None, Experiment::Nmn3dTube) => GridSpec::new(&[128, 32, 32], &[1.0, 0.25, 0.25])?,
            (None, Experiment::Nmn3dPlate) => GridSpec::new(&[64, 64, 32], &[1.0, 1.0, 0.5])?,
            (None, _) => return Err(field_err("grid", "required for custom runs")),
        };
        self.grid = Some(grid);
        let h = grid.spacing(0);

        let p = &mut self.params;
        let eps = *p.eps.get_or_insert(2.0 * h);
        p.dt.get_or_insert(eps.powi(4));
        p.alpha_over_eps2.get_or_insert(2.0 / (eps * eps));
        p.m.get_or_insert(PRESET_M);
        p.beta.get_or_insert(if ch == ChScheme::NmnSav1 { 2.0 / (eps * eps) } else { 0.0 });
        p.c0.get_or_insert(1e-12);
        p.clamp_r.get_or_insert(true);
        // The pseudospectral N M N operator needs the 2/3 rule to keep its
        // explicit part nonnegative; the paired degenerate-mobility runs use
        // the same setting.
        p.dealias.get_or_insert(matches!(
            e,
            Experiment::Mch2d | Experiment::Nmn2d | Experiment::Nmn3dTube | Experiment::Nmn3dPlate
        ) || ch == ChScheme::NmnSav1);
        p.allow_negative_j2.get_or_insert(false);
        let params = self.ch_params()?;
        params.validate().map_err(|err| field_err("params", err.to_string()))?;

        let shape = match (self.shape.take(), e) {
            (Some(s), _) => s,
            (None, Experiment::Ch2dDisk) => Shape::Disk {
                center: vec![0.5, 0.5],
                radius: 0.25,
            },
            (None, Experiment::Mch2d | Experiment::Nmn2d) => Shape::Disk {
                center: vec![0.5, 0.5],
                radius: 0.15,
            },
            (None, Experiment::Nmn3dTube) => Shape::Tube {
                axis: 0,
                center: [0.125, 0.125],
                radius: 0.06,
                amplitude: 0.15,
                wavelength: 0.5,
            },
            (None, Experiment::Nmn3dPlate) => Shape::Plate {
                axis: 2,
                center: vec![0.5, 0.5, 0.25],
                thickness: 0.1,
                bump_radius: 0.12,
            },
            (None, _) => return Err(field_err("shape", "required for custom runs")),
        };
        shape
            .validate(&grid)
            .map_err(|err| field_err("shape", err.to_string()))?;
        self.shape = Some(shape);

        if let Some(t) = self.final_time.take() {
            if self.n_steps.is_some() {
                return Err(field_err("final_time", "give either n_steps or final_time"));
            }
            if !(t > 0.0 && t.is_finite()) {
                return Err(field_err("final_time", format!("must be positive, got {t}")));
            }
            self.n_steps = Some((t / params.dt).round().max(1.0) as usize);
        }
        let default_steps = match e {
            Experiment::Ch2dDisk => Some(500),
            Experiment::Mch2d | Experiment::Nmn2d => Some(2048),
            Experiment::Nmn3dTube | Experiment::Nmn3dPlate => Some(20_000),
            _ => None,
        };
        if self.n_steps.is_none() {
            self.n_steps = Some(default_steps.ok_or_else(|| field_err("n_steps", "required for custom runs"))?);
        }
        if self.n_steps == Some(0) {
            return Err(field_err("n_steps", "must be positive"));
        }
        self.snapshot_every.get_or_insert(0);
        self.stop_on_pinch_off
            .get_or_insert(matches!(e, Experiment::Nmn3dTube | Experiment::Nmn3dPlate));
        let every = *self.pinch_check_every.get_or_insert(10);
        if every == 0 {
            return Err(field_err("pinch_check_every", "must be positive"));
        }
        Ok(())
    }

    /// Stepper of a phase-field run.
    pub fn ch_scheme(&self) -> Option<ChScheme> {
        self.scheme.and_then(|s| s.cahn_hilliard())
    }

    /// Generic schemes of a toy run: the configured one or all five.
    pub fn generic_schemes(&self) -> Vec<Scheme> {
        match self.scheme.and_then(|s| s.generic()) {
            Some(s) => vec![s],
            None => Scheme::ALL.to_vec(),
        }
    }

    /// `ChParams` of a resolved phase-field config.
    pub fn ch_params(&self) -> Result<ChParams> {
        let p = &self.params;
        let missing = |name: &str| field_err(&format!("params.{name}"), "missing");
        Ok(ChParams {
            eps: p.eps.ok_or_else(|| missing("eps"))?,
            dt: p.dt.ok_or_else(|| missing("dt"))?,
            alpha_over_eps2: p.alpha_over_eps2.ok_or_else(|| missing("alpha_over_eps2"))?,
            m: p.m.ok_or_else(|| missing("m"))?,
            beta: p.beta.unwrap_or(0.0),
            c0: p.c0.unwrap_or(1e-12),
            clamp_r: p.clamp_r.unwrap_or(true),
            dealias: p.dealias.unwrap_or(false),
            allow_negative_j2: p.allow_negative_j2.unwrap_or(false),
        })
    }

    /// Scheme options of a toy run.
    pub fn scheme_options(&self) -> SchemeOptions {
        SchemeOptions {
            clamp: self.params.clamp_r.unwrap_or(true),
            c0: self.params.c0.unwrap_or(0.0),
            j2_floor: None,
        }
    }

    /// The toy problem: explicit matrices, a seeded random draw, or the
    /// built-in 2×2 problem.
    pub fn toy_problem(&self) -> Result<ToyProblem> {
        if let Some(spec) = &self.toy {
            return ToyProblem::from_spec(spec).map_err(|e| field_err("toy", e.to_string()));
        }
        if let Some(n) = self.toy_random_dim {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(0));
            return Ok(ToyProblem::random(n, &mut rng));
        }
        Ok(ToyProblem::default())
    }

    pub fn output_dir(&self) -> &Path {
        self.output_dir.as_deref().unwrap_or(Path::new("."))
    }
}
