use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hvqe::ansatz::{AnsatzDescriptor, Family};
use hvqe::hamiltonian::HubbardSpec;
use hvqe::measure::{CompareConfig, NoiseModel};
use hvqe::optimize::{AnnealConfig, AnnealMode, GlobalConfig, InexactConfig};
use serde::{Deserialize, Serialize};

/// One experiment: problem, ansatz, optimizer, measurement and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base name of the output files; defaults to the config file's stem.
    #[serde(default)]
    pub name: Option<String>,
    pub problem: ProblemConfig,
    pub ansatz: AnsatzDescriptor,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub measurement: MeasurementConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    Hubbard {
        n_sites: usize,
        #[serde(default = "one")]
        t: f64,
        u: f64,
        #[serde(default)]
        flux: bool,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        /// `(n_up, n_down)`; defaults to the ladder's default sector.
        #[serde(default)]
        sector: Option<(usize, usize)>,
    },
    Chemistry {
        fcidump: PathBuf,
        /// Overrides the electron counts implied by the file header.
        #[serde(default)]
        sector: Option<(usize, usize)>,
    },
}

fn one() -> f64 {
    1.0
}

fn default_epsilon() -> f64 {
    HubbardSpec::new(4, 1.0, 0.0).epsilon
}

impl ProblemConfig {
    pub fn hubbard_spec(&self) -> Option<HubbardSpec> {
        match *self {
            ProblemConfig::Hubbard {
                n_sites,
                t,
                u,
                flux,
                epsilon,
                ..
            } => Some(
                HubbardSpec::new(n_sites, t, u)
                    .with_flux(flux)
                    .with_epsilon(epsilon),
            ),
            ProblemConfig::Chemistry { .. } => None,
        }
    }

    /// Short label used to group table rows.
    pub fn label(&self) -> String {
        match self {
            ProblemConfig::Hubbard {
                n_sites,
                u,
                flux,
                sector,
                ..
            } => {
                let mut s = format!("N={n_sites}{} U={u}", if *flux { "*" } else { "" });
                if let Some((a, b)) = sector {
                    s.push_str(&format!(" ({a},{b})"));
                }
                s
            }
            ProblemConfig::Chemistry { fcidump, .. } => fcidump.file_stem().map_or_else(
                || fcidump.display().to_string(),
                |s| s.to_string_lossy().into_owned(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Multi-start greedy and Powell search over all angles.
    Global,
    /// Sequential fits along the interpolation path, then a joint search.
    Annealed,
    /// Coordinate search driven by pairwise comparisons.
    Inexact,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Global => "global",
            Method::Annealed => "annealed",
            Method::Inexact => "inexact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    pub anneal_mode: AnnealMode,
    pub global: GlobalConfig,
    pub anneal: AnnealConfig,
    pub inexact: InexactConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Global,
            anneal_mode: AnnealMode::StepwiseTarget,
            global: GlobalConfig::default(),
            anneal: AnnealConfig::default(),
            inexact: InexactConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    #[default]
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementConfig {
    pub noise: Noise,
    pub model: NoiseModel,
    pub compare: CompareConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Evaluations between checkpoint flushes.
    pub checkpoint_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            checkpoint_every: 1000,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub noise: Option<Noise>,
    pub out: Option<PathBuf>,
    pub name_suffix: Option<String>,
}

/// Reads a TOML config, or a JSON config or archived result file.
pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ctx = || format!("parsing {}", path.display());
    if path.extension().is_some_and(|e| e == "json") {
        let mut value: serde_json::Value = serde_json::from_str(&text).with_context(ctx)?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value).with_context(ctx)
    } else {
        toml::from_str(&text).with_context(ctx)
    }
}

impl ExperimentConfig {
    /// Applies overrides, fills the name and makes file references absolute.
    pub fn resolve(mut self, source: &Path, ov: &Overrides) -> Result<Self> {
        if let Some(seed) = ov.seed {
            self.seed = seed;
        }
        if let Some(noise) = ov.noise {
            self.measurement.noise = noise;
        }
        if let Some(out) = &ov.out {
            self.output.dir = out.clone();
        }
        let mut name = match self.name.take() {
            Some(n) => n,
            None => source
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .context("config path has no file name")?,
        };
        if let Some(suffix) = &ov.name_suffix {
            name.push_str(suffix);
        }
        self.name = Some(name);
        if let ProblemConfig::Chemistry { fcidump, .. } = &mut self.problem {
            let base = source.parent().unwrap_or(Path::new("."));
            let full = base.join(&*fcidump);
            *fcidump = full
                .canonicalize()
                .with_context(|| format!("integral file {}", full.display()))?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("experiment")
    }

    pub fn validate(&self) -> Result<()> {
        let family = self.ansatz.family;
        let method = self.optimizer.method;
        match &self.problem {
            ProblemConfig::Hubbard { .. } => {
                if family != Family::HubbardHv {
                    bail!("a Hubbard problem needs the hubbard_hv ansatz, not {family:?}");
                }
                if method == Method::Annealed && self.ansatz.merge_u {
                    bail!("the annealed optimizer does not support merge_u");
                }
            }
            ProblemConfig::Chemistry { .. } => {
                if family == Family::HubbardHv {
                    bail!("a chemistry problem needs chem_hv3, chem_hv4 or rxx");
                }
                if family == Family::Rxx && self.ansatz.rxx_variant.is_none() {
                    bail!("the rxx ansatz needs rxx_variant");
                }
                if method == Method::Annealed {
                    bail!("the annealed optimizer is defined for Hubbard problems only");
                }
                if self.measurement.noise == Noise::Sampled {
                    bail!("sampled measurement is available for Hubbard problems only");
                }
            }
        }
        if self.measurement.noise == Noise::Sampled && method != Method::Inexact {
            bail!("sampled measurement needs the inexact optimizer");
        }
        Ok(())
    }
}
