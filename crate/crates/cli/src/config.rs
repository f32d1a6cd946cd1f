//! Experiment configuration: a versioned JSON document with one section per
//! mode.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use cauchyborn_core::geometry::Domain;
use cauchyborn_core::lattice::{CircuitSpec, GateCircuit, LatticeCut, StateSpec, StateVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    GeometryApprox,
    BoostBand,
    AxiomCheck,
    Detect,
    Converge,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::GeometryApprox => "geometry-approx",
            Mode::BoostBand => "boost-band",
            Mode::AxiomCheck => "axiom-check",
            Mode::Detect => "detect",
            Mode::Converge => "converge",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub mode: Mode,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub geometry: Option<GeometrySection>,
    #[serde(default)]
    pub boost: Option<BoostSection>,
    #[serde(default)]
    pub axioms: Option<AxiomsSection>,
    #[serde(default)]
    pub detect: Option<DetectSection>,
    #[serde(default)]
    pub converge: Option<ConvergeSection>,
    /// Directory of the config file, for resolving relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if config.schema_version != 1 {
            bail!("unsupported schema_version {}", config.schema_version);
        }
        config.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(config)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub surface: SurfaceSpec,
    pub domain: DomainSpec,
    pub resolution: usize,
    pub level_min: u32,
    pub level_max: u32,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceSpec {
    Flat {
        height: f64,
    },
    Sine {
        amplitude: f64,
    },
    Bump {
        height: f64,
    },
    RandomLipschitz {
        bound: f64,
    },
    /// A serialized surface document (domain, grid, height samples).
    File {
        file: PathBuf,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub periodic: bool,
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        let mut lower = [0.0; 3];
        let mut upper = [0.0; 3];
        for i in 0..self.dim.min(3) {
            lower[i] = self.lower[i];
            upper[i] = self.upper[i];
        }
        Ok(Domain::new(self.dim, lower, upper, self.periodic)?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoostSection {
    pub surface: SurfaceSpec,
    pub domain: DomainSpec,
    pub resolution: usize,
    pub betas: Vec<f64>,
    pub epsilons: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    512
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomsSection {
    pub circuit: CircuitSource,
    pub pl: Vec<PlCheckSpec>,
    pub il: Vec<IlCheckSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_trials() -> usize {
    8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlCheckSpec {
    pub name: String,
    pub region: Vec<usize>,
    pub from: CutSpec,
    pub to: CutSpec,
    /// The check is expected to fail (negative control).
    #[serde(default)]
    pub expect_fail: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IlCheckSpec {
    pub name: String,
    pub region: Vec<usize>,
    pub from: CutSpec,
    pub to: CutSpec,
    /// The precondition is expected to reject (negative control).
    #[serde(default)]
    pub expect_reject: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectSection {
    pub circuit: CircuitSource,
    pub initial_cut: CutSpec,
    pub target_cut: CutSpec,
    pub regions: Vec<Vec<usize>>,
    pub state: StateSource,
    #[serde(default)]
    pub shots: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub circuit: CircuitSource,
    pub initial_cut: CutSpec,
    pub sigma: CutSpec,
    pub upsilons: Vec<CutSpec>,
    pub regions: Vec<Vec<usize>>,
    pub state: StateSource,
    #[serde(default = "default_strong_trials")]
    pub strong_trials: usize,
}

fn default_strong_trials() -> usize {
    20
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum CircuitSource {
    File { file: PathBuf },
    Random { random: RandomCircuit },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCircuit {
    pub num_sites: usize,
    pub depth: usize,
    pub seed: u64,
}

impl CircuitSource {
    pub fn build(&self, base_dir: &Path) -> Result<GateCircuit> {
        match self {
            CircuitSource::File { file } => {
                let path = if file.is_absolute() {
                    file.clone()
                } else {
                    base_dir.join(file)
                };
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading circuit {}", path.display()))?;
                let spec: CircuitSpec = serde_json::from_str(&text)
                    .with_context(|| format!("parsing circuit {}", path.display()))?;
                Ok(spec.build()?)
            }
            CircuitSource::Random { random } => Ok(GateCircuit::random(
                random.num_sites,
                random.depth,
                random.seed,
            )?),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum CutSpec {
    Constant { constant: u32 },
    Levels(Vec<u32>),
}

impl CutSpec {
    pub fn build(&self, num_sites: usize) -> LatticeCut {
        match self {
            CutSpec::Constant { constant } => LatticeCut::constant(num_sites, *constant),
            CutSpec::Levels(levels) => LatticeCut::from_levels(levels.clone()),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSource {
    /// Random state with a fixed particle number, drawn from the run seed.
    RandomFixed { particles: usize },
    /// Explicit amplitude table.
    Amplitudes {
        #[serde(flatten)]
        spec: StateSpec,
    },
}

impl StateSource {
    pub fn build(&self, num_sites: usize, seed: u64) -> Result<StateVector> {
        match self {
            StateSource::RandomFixed { particles } => {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                Ok(StateVector::random_fixed_number(
                    num_sites, *particles, &mut rng,
                ))
            }
            StateSource::Amplitudes { spec } => {
                if spec.num_sites != num_sites {
                    bail!("state has {} sites, circuit {num_sites}", spec.num_sites);
                }
                Ok(spec.build()?)
            }
        }
    }
}

pub fn build_surface(
    spec: &SurfaceSpec,
    domain: &DomainSpec,
    resolution: usize,
    seed: u64,
    base_dir: &Path,
) -> Result<cauchyborn_core::geometry::CauchySurfaceGraph> {
    use cauchyborn_core::geometry::catalog;
    if let SurfaceSpec::File { file } = spec {
        let path = if file.is_absolute() {
            file.clone()
        } else {
            base_dir.join(file)
        };
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading surface {}", path.display()))?;
        let surface: cauchyborn_core::geometry::CauchySurfaceGraph =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        surface.revalidate()?;
        return Ok(surface);
    }
    let domain = domain.build()?;
    Ok(match spec {
        SurfaceSpec::Flat { height } => catalog::flat(domain, resolution, *height),
        SurfaceSpec::Sine { amplitude } => catalog::sine(domain, resolution, *amplitude)?,
        SurfaceSpec::Bump { height } => catalog::bump(domain, resolution, *height)?,
        SurfaceSpec::RandomLipschitz { bound } => {
            catalog::random_lipschitz(domain, resolution, *bound, seed)?
        }
        SurfaceSpec::File { .. } => unreachable!("handled above"),
    })
}
