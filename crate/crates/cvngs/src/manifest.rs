use std::path::Path;

use cvngs_core::gaussian::SigmaMatrix;
use cvngs_core::gaussian::{from_db, SqueezeSpec};
use cvngs_core::metrics::{SqueezeMethod, TargetFamily, TargetState};
use cvngs_core::phase_space::{Axis, GridSpec, Measurement};
use cvngs_core::pulse::{PulseSpec, SystemParams};
use cvngs_core::synthesis::{solve_gain, EpsStage, PipelineSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EntanglementSweep,
    Eps,
    GainSolve,
    FourCat,
    Imperfections,
    Oracle,
    Figures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EntanglementSweep => "entanglement-sweep",
            Command::Eps => "eps",
            Command::GainSolve => "gain-solve",
            Command::FourCat => "four-cat",
            Command::Imperfections => "imperfections",
            Command::Oracle => "oracle",
            Command::Figures => "figures",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: Command,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageSection>,
    #[serde(default)]
    pub measurement: MeasurementSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub four_cat: Option<FourCatSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub figures: Vec<String>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Rates are `rate/2π` in MHz. Give either `gamma_mhz` or `cooperativity`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default = "default_g")]
    pub g_mhz: f64,
    #[serde(default = "default_kappa")]
    pub kappa_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooperativity: Option<f64>,
    #[serde(default)]
    pub n_m: f64,
    #[serde(default = "default_squeeze")]
    pub squeeze_db: f64,
}

fn default_g() -> f64 {
    3.0
}
fn default_kappa() -> f64 {
    7.0
}
fn default_squeeze() -> f64 {
    -6.0
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            g_mhz: default_g(),
            kappa_mhz: default_kappa(),
            gamma_mhz: None,
            cooperativity: None,
            n_m: 0.0,
            squeeze_db: default_squeeze(),
        }
    }
}

impl SystemSection {
    pub fn with_cooperativity(c: f64) -> Self {
        SystemSection {
            cooperativity: Some(c),
            ..Default::default()
        }
    }

    pub fn params(&self) -> CliResult<SystemParams> {
        self.params_with_squeeze(self.squeeze_db)
    }

    pub fn params_with_squeeze(&self, squeeze_db: f64) -> CliResult<SystemParams> {
        let s = SqueezeSpec::from_db(squeeze_db)?;
        let mhz = 2.0 * std::f64::consts::PI * 1e6;
        Ok(match (self.gamma_mhz, self.cooperativity) {
            (Some(_), Some(_)) => {
                return Err(CliError::validation(
                    "system: give gamma_mhz or cooperativity, not both",
                ));
            }
            (None, Some(c)) => SystemParams::with_cooperativity(
                self.g_mhz * mhz,
                self.kappa_mhz * mhz,
                c,
                self.n_m,
                s,
            )?,
            (gamma, None) => SystemParams::from_mhz(
                self.g_mhz,
                self.kappa_mhz,
                gamma.unwrap_or(1.6),
                self.n_m,
                s,
            )?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflectivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

impl PulseSection {
    pub fn reflectivity(r: f64) -> Self {
        PulseSection {
            reflectivity: Some(r),
            duration_s: None,
        }
    }

    pub fn spec(&self) -> CliResult<PulseSpec> {
        match (self.reflectivity, self.duration_s) {
            (Some(r), None) => Ok(PulseSpec::Reflectivity(r)),
            (None, Some(t)) => Ok(PulseSpec::Duration(t)),
            _ => Err(CliError::validation(
                "pulse: give exactly one of reflectivity or duration_s",
            )),
        }
    }
}

/// One EPS stage. The gain is either given in dB or solved from `xi`
/// against the lossless post-pulse state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default)]
    pub noise: f64,
    pub photons: usize,
}

impl StageSection {
    pub fn xi(xi: f64, photons: usize) -> Self {
        StageSection {
            gain_db: None,
            xi: Some(xi),
            noise: 0.0,
            photons,
        }
    }

    pub fn gain_db(db: f64, photons: usize) -> Self {
        StageSection {
            gain_db: Some(db),
            xi: None,
            noise: 0.0,
            photons,
        }
    }

    pub fn resolve(&self, sigma: &SigmaMatrix) -> CliResult<EpsStage> {
        let gain = match (self.gain_db, self.xi) {
            (Some(db), None) => from_db(db),
            (None, Some(xi)) => solve_gain(sigma, xi)?,
            _ => {
                return Err(CliError::validation(
                    "stage: give exactly one of gain_db or xi",
                ))
            }
        };
        Ok(EpsStage::new(gain, self.noise, self.photons)?)
    }
}

/// Homodyne setting; `theta` in radians, 0 measures `X_C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub zeta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "one")]
    pub efficiency: f64,
}

fn default_epsilon() -> f64 {
    0.1
}
fn one() -> f64 {
    1.0
}

impl Default for MeasurementSection {
    fn default() -> Self {
        MeasurementSection {
            theta: 0.0,
            zeta: 0.0,
            epsilon: default_epsilon(),
            efficiency: 1.0,
        }
    }
}

impl MeasurementSection {
    pub fn spec(&self) -> CliResult<Measurement> {
        if self.epsilon == 0.0 {
            // sharp slice; the pipeline checks the remaining fields
            let mut m = Measurement::new(self.theta, self.zeta, 1.0, self.efficiency)?;
            m.epsilon = 0.0;
            return Ok(m);
        }
        Ok(Measurement::new(
            self.theta,
            self.zeta,
            self.epsilon,
            self.efficiency,
        )?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default = "one")]
    pub nu: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection { eta: 1.0, nu: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridSection {
    pub fn spec(&self) -> CliResult<GridSpec> {
        let g = GridSpec::square(self.min, self.max, self.n);
        g.validate()
            .map_err(|e| CliError::validation(format!("grid: {e}")))?;
        Ok(g)
    }

    /// Parses `"xmin,xmax,n"`.
    pub fn parse(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || CliError::validation(format!("--grid expects \"xmin,xmax,n\", got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(GridSection {
            min: parts[0].parse().map_err(|_| bad())?,
            max: parts[1].parse().map_err(|_| bad())?,
            n: parts[2].parse().map_err(|_| bad())?,
        })
    }
}

/// Either an explicit list or `n` evenly spaced points, both ends included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Range {
    List(Vec<f64>),
    Span { start: f64, stop: f64, n: usize },
}

impl Range {
    pub fn points(&self, what: &str) -> CliResult<Vec<f64>> {
        let pts = match self {
            Range::List(v) => v.clone(),
            Range::Span { start, stop, n } => match *n {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..n)
                    .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                    .collect(),
            },
        };
        if pts.is_empty() {
            return Err(CliError::validation(format!("sweep.{what}: empty grid")));
        }
        if pts.iter().any(|x| !x.is_finite()) {
            return Err(CliError::validation(format!(
                "sweep.{what}: non-finite value"
            )));
        }
        Ok(pts)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflectivity: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeeze_db: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooperativity: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse_cooperativity: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Range>,
    /// Added noise of a unit-gain amplifier on the optical mode.
    #[serde(default)]
    pub amplifier_noise: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisChoice {
    X,
    P,
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSection {
    Cat {
        alpha_re: f64,
        #[serde(default)]
        alpha_im: f64,
        parity: i32,
        #[serde(default)]
        squeeze_db: f64,
    },
    Fock {
        n: usize,
        #[serde(default)]
        squeeze_db: f64,
    },
    FourCat {
        alpha0: f64,
        #[serde(default)]
        squeeze_db: f64,
    },
    BestCat {
        axis: AxisChoice,
        parity: i32,
    },
    BestFock {
        n: usize,
    },
}

/// A resolved target: fixed, or the best member of a family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    Fixed(TargetState),
    Best(TargetFamily),
}

impl TargetSection {
    pub fn resolve(&self, auto_axis: impl FnOnce() -> CliResult<Axis>) -> CliResult<Target> {
        let t = match *self {
            TargetSection::Cat {
                alpha_re,
                alpha_im,
                parity,
                squeeze_db,
            } => Target::Fixed(TargetState::Cat {
                alpha: cvngs_core::metrics::Complex64::new(alpha_re, alpha_im),
                parity,
                squeeze_db,
            }),
            TargetSection::Fock { n, squeeze_db } => {
                Target::Fixed(TargetState::Fock { n, squeeze_db })
            }
            TargetSection::FourCat { alpha0, squeeze_db } => {
                Target::Fixed(TargetState::FourCat { alpha0, squeeze_db })
            }
            TargetSection::BestCat { axis, parity } => {
                let axis = match axis {
                    AxisChoice::X => Axis::XM,
                    AxisChoice::P => Axis::PM,
                    AxisChoice::Auto => auto_axis()?,
                };
                Target::Best(TargetFamily::Cat { axis, parity })
            }
            TargetSection::BestFock { n } => Target::Best(TargetFamily::Fock { n }),
        };
        if let Target::Fixed(s) = &t {
            s.validate()?;
        }
        Ok(t)
    }

    /// Squeezing estimate that matches the target family.
    pub fn squeeze_method(&self, axis: Axis) -> SqueezeMethod {
        match *self {
            TargetSection::Fock { n, .. } | TargetSection::BestFock { n } => {
                SqueezeMethod::FockVariance(n)
            }
            _ => SqueezeMethod::LobeVariance(axis),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourCatSection {
    pub xi1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_truncation")]
    pub truncation: usize,
}

fn default_truncation() -> usize {
    40
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl Manifest {
    pub fn new(command: Command) -> Self {
        Manifest {
            command,
            system: SystemSection::default(),
            pulse: None,
            stages: Vec::new(),
            measurement: MeasurementSection::default(),
            channel: ChannelSection::default(),
            grid: None,
            sweep: None,
            target: None,
            four_cat: None,
            oracle: None,
            figures: Vec::new(),
            output: OutputSection::default(),
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let m: Manifest = serde_json::from_str(text)
            .map_err(|e| CliError::validation(format!("manifest: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Range checks that do not need any numerics.
    pub fn validate(&self) -> CliResult<()> {
        let s = &self.system;
        for (name, v) in [("g_mhz", s.g_mhz), ("kappa_mhz", s.kappa_mhz)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::validation(format!("system.{name} must be > 0")));
            }
        }
        if s.gamma_mhz.is_some_and(|g| !(g >= 0.0 && g.is_finite())) {
            return Err(CliError::validation("system.gamma_mhz must be >= 0"));
        }
        if s.cooperativity.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
            return Err(CliError::validation("system.cooperativity must be > 0"));
        }
        if !(s.n_m >= 0.0 && s.n_m.is_finite()) || !s.squeeze_db.is_finite() {
            return Err(CliError::validation(
                "system.n_m must be >= 0 and squeeze_db finite",
            ));
        }
        s.params()?;
        if let Some(p) = &self.pulse {
            let spec = p.spec()?;
            spec.resolve(1.0)?;
        }
        for st in &self.stages {
            if st.gain_db.is_some() == st.xi.is_some() {
                return Err(CliError::validation(
                    "stage: give exactly one of gain_db or xi",
                ));
            }
            if !(st.noise >= 0.0) {
                return Err(CliError::validation("stage.noise must be >= 0"));
            }
        }
        self.pipeline_measurement()?;
        let c = &self.channel;
        if !(c.eta > 0.0 && c.eta <= 1.0) {
            return Err(CliError::validation("channel.eta must lie in (0, 1]"));
        }
        if !(c.nu >= 0.0 && c.nu <= 1.0) {
            return Err(CliError::validation("channel.nu must lie in [0, 1]"));
        }
        if let Some(g) = &self.grid {
            g.spec()?;
        }
        if let Some(sw) = &self.sweep {
            if let Some(r) = &sw.reflectivity {
                if r.points("reflectivity")?
                    .iter()
                    .any(|&x| !(x > 0.0 && x <= 1.0))
                {
                    return Err(CliError::validation(
                        "sweep.reflectivity must lie in (0, 1]",
                    ));
                }
            }
            if let Some(r) = &sw.squeeze_db {
                r.points("squeeze_db")?;
            }
            if let Some(r) = &sw.cooperativity {
                if r.points("cooperativity")?.iter().any(|&x| !(x > 0.0)) {
                    return Err(CliError::validation("sweep.cooperativity must be > 0"));
                }
            }
            if let Some(r) = &sw.inverse_cooperativity {
                if r.points("inverse_cooperativity")?
                    .iter()
                    .any(|&x| !(x >= 0.0))
                {
                    return Err(CliError::validation(
                        "sweep.inverse_cooperativity must be >= 0",
                    ));
                }
            }
            if let Some(r) = &sw.eta {
                if r.points("eta")?.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
                    return Err(CliError::validation("sweep.eta must lie in (0, 1]"));
                }
            }
            if !(sw.amplifier_noise >= 0.0) {
                return Err(CliError::validation("sweep.amplifier_noise must be >= 0"));
            }
        }
        if let Some(o) = &self.oracle {
            if o.truncation < 4 {
                return Err(CliError::validation("oracle.truncation must be >= 4"));
            }
        }
        match self.command {
            Command::EntanglementSweep | Command::GainSolve => {
                if self
                    .sweep
                    .as_ref()
                    .and_then(|s| s.reflectivity.as_ref())
                    .is_none()
                    && self.pulse.is_none()
                {
                    return Err(CliError::validation(format!(
                        "{}: needs sweep.reflectivity or pulse",
                        self.command.name()
                    )));
                }
            }
            Command::Eps | Command::Imperfections | Command::Oracle => {
                if self.pulse.is_none() {
                    return Err(CliError::validation(format!(
                        "{}: needs pulse",
                        self.command.name()
                    )));
                }
                if self.stages.is_empty() {
                    return Err(CliError::validation(format!(
                        "{}: needs at least one stage",
                        self.command.name()
                    )));
                }
            }
            Command::FourCat => {
                if self.pulse.is_none() || self.four_cat.is_none() {
                    return Err(CliError::validation(
                        "four-cat: needs pulse and four_cat.xi1",
                    ));
                }
            }
            Command::Figures => {
                if self.figures.is_empty() {
                    return Err(CliError::validation("figures: list at least one figure id"));
                }
            }
        }
        Ok(())
    }

    pub fn pulse_spec(&self) -> CliResult<PulseSpec> {
        self.pulse
            .as_ref()
            .ok_or_else(|| CliError::validation("pulse section missing"))?
            .spec()
    }

    pub fn grid_spec(&self) -> CliResult<GridSpec> {
        match &self.grid {
            Some(g) => g.spec(),
            None => Ok(GridSpec::default()),
        }
    }

    pub fn pipeline_measurement(&self) -> CliResult<Measurement> {
        self.measurement.spec()
    }

    /// Stages resolved against `sigma`, plus the channel and measurement.
    pub fn pipeline(&self, sigma: &SigmaMatrix) -> CliResult<PipelineSpec> {
        let stages = self
            .stages
            .iter()
            .map(|s| s.resolve(sigma))
            .collect::<CliResult<Vec<_>>>()?;
        Ok(PipelineSpec {
            stages,
            measurement: self.pipeline_measurement()?,
            eta: self.channel.eta,
            nu: self.channel.nu,
        })
    }
}
