//! Experiment configuration: the JSON file schema and the command-line flags
//! that mirror it.
//!
//! A config file looks like
//!
//! ```json
//! {
//!   "seed": 7,
//!   "out_dir": "runs/shell",
//!   "experiment": { "subcommand": "shell-prob", "params": { "n": [1000], "alpha": [0.01] } }
//! }
//! ```
//!
//! Every parameter is optional; missing ones take the defaults listed in
//! each subcommand's `--help`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 over the seed and experiment block; the output directory does
    /// not take part.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&(self.seed, &self.experiment)).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| Path::new("hdg-out").join(self.experiment.name()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeChoice {
    Box,
    Ellipsoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DilationModeArg {
    InverseN,
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingModeArg {
    Idealized,
    Trained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusLaw {
    /// Ball of radius `scale * sqrt(n)`.
    SqrtN,
    /// Ball of radius `scale`.
    Constant,
    /// Cube spanning the `bits`-bit intensity range.
    KBit,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ShellProbParams {
    /// Dimensions [default: 2,10,100,1000]
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Relative shell widths [default: 0.01,0.1,0.5]
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// Ball radius [default: 1]
    #[arg(long)]
    pub radius: Option<f64>,
    /// Monte-Carlo samples per point of the grid [default: 100000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Allowed deviation in standard errors [default: 4]
    #[arg(long)]
    pub k_sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDistanceParams {
    /// Dimensions [default: 2,10,100,1000]
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Ball radius [default: 1]
    #[arg(long)]
    pub radius: Option<f64>,
    /// Samples per dimension [default: 100000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Allowed deviation in standard errors [default: 4]
    #[arg(long)]
    pub k_sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct IsoperimetricParams {
    /// Dimensions [default: 2,10,50]
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Longest over shortest axis; half the axes are 1, the rest this [default: 1.5]
    #[arg(long)]
    pub aspect: Option<f64>,
    /// Bodies to compare [default: box,ellipsoid]
    #[arg(long, value_delimiter = ',')]
    pub shapes: Option<Vec<ShapeChoice>>,
    /// Samples per body [default: 100000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Required margin in combined standard errors [default: 3]
    #[arg(long)]
    pub k_sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct DilationParams {
    /// Dilation strengths [default: 0.5,1,2]
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// Dilation radius law [default: inverse-n]
    #[arg(long)]
    pub mode: Option<DilationModeArg>,
    /// Largest dimension; the grid is 1, 10, 100, ... up to it [default: 10000]
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Relative tolerance against e^alpha at n_max [default: 0.01]
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct CountingParams {
    /// Log of the starting universe count [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub log_u: Option<f64>,
    /// Log of the starting class count [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub log_c: Option<f64>,
    /// Starting pixel count [default: 1]
    #[arg(long)]
    pub pixels: Option<u64>,
    /// Joint values of three new pixels [default: 16777216]
    #[arg(long)]
    pub k: Option<u64>,
    /// Joint values inside the class [default: 16777215]
    #[arg(long)]
    pub t: Option<u64>,
    /// Resolution quadruplings [default: 5]
    #[arg(long)]
    pub steps: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct SpectraFitParams {
    /// Levels; images are 2^m pixels wide [default: 3,4,5,6,7,8]
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Images per level in each radius fit [default: 30]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Independent radius fits [default: 10]
    #[arg(long)]
    pub seeds: Option<u64>,
    /// LL energy per pixel [default: 1]
    #[arg(long)]
    pub l_ll: Option<f64>,
    /// Coarsest LH energy per pixel [default: 1]
    #[arg(long)]
    pub h_lh: Option<f64>,
    /// Coarsest HL energy per pixel [default: 1]
    #[arg(long)]
    pub h_hl: Option<f64>,
    /// Coarsest HH energy per pixel [default: 1]
    #[arg(long)]
    pub h_hh: Option<f64>,
    /// Accepted slope range [default: 0.45,0.55]
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub slope_range: Option<Vec<f64>>,
    /// Images per level in the energy check [default: 2000]
    #[arg(long)]
    pub energy_draws: Option<usize>,
    /// Relative tolerance of the energy check [default: 0.05]
    #[arg(long)]
    pub energy_tol: Option<f64>,
    /// Images per level in the isometry check [default: 100]
    #[arg(long)]
    pub isometry_images: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct LandscapeCensusParams {
    /// Numbers of variables [default: 1,2,3]
    #[arg(long, value_delimiter = ',')]
    pub n_vars: Option<Vec<usize>>,
    /// Degrees [default: 3,4,5]
    #[arg(long, value_delimiter = ',')]
    pub degrees: Option<Vec<u32>>,
    /// Random polynomials per cell [default: 200]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Degree at which the minima trend is checked [default: 4]
    #[arg(long)]
    pub minima_degree: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ReluApproxParams {
    /// Polynomial degrees [default: 2,4,8,16,32]
    #[arg(long, value_delimiter = ',')]
    pub degrees: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct LidParams {
    /// Intrinsic dimensions of the test flats [default: 1,2,5]
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Ambient dimension [default: 10]
    #[arg(long)]
    pub ambient: Option<usize>,
    /// Points per cloud [default: 10000]
    #[arg(long)]
    pub points: Option<usize>,
    /// Neighbors for the maximum-likelihood estimate [default: 50]
    #[arg(long)]
    pub k: Option<usize>,
    /// Interior query points [default: 200]
    #[arg(long)]
    pub queries: Option<usize>,
    /// Relative tolerance [default: 0.15]
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct AdvScalingParams {
    /// Exact flips against the true shape, or search on trained networks [default: idealized]
    #[arg(long)]
    pub mode: Option<ScalingModeArg>,
    /// Positive-class geometry [default: sqrt-n]
    #[arg(long)]
    pub law: Option<RadiusLaw>,
    /// Radius scale of the ball laws [default: 1]
    #[arg(long)]
    pub scale: Option<f64>,
    /// Bit depth of the k-bit law [default: 8]
    #[arg(long)]
    pub bits: Option<u32>,
    /// Dimensions [default: 4,16,64,256]
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Attacked points per dimension [default: 10000 idealized, 100 trained]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Independent repetitions [default: 1 idealized, 5 trained]
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Expected exponent [default: -0.5]
    #[arg(long, allow_hyphen_values = true)]
    pub exponent: Option<f64>,
    /// Allowed deviation of each fitted exponent [default: 0.02 idealized, 0.1 trained]
    #[arg(long)]
    pub exponent_tol: Option<f64>,
    /// Hidden units [default: 64]
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Training points per class [default: 5000]
    #[arg(long)]
    pub train_per_class: Option<usize>,
    /// Validation points per class [default: 200]
    #[arg(long)]
    pub val_per_class: Option<usize>,
    /// Negative shell, as multiples of the positive radius [default: 1,1.5]
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub shell: Option<Vec<f64>>,
    /// SGD epochs [default: 30]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning rate [default: 0.05]
    #[arg(long)]
    pub lr: Option<f64>,
    /// Momentum [default: 0.9]
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Mini-batch size [default: 32]
    #[arg(long)]
    pub batch: Option<usize>,
    /// Relative tolerance of the perturbation search [default: 0.001]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random linear classifiers in the exactness check; 0 skips it [default: 1000]
    #[arg(long)]
    pub linear_instances: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct FakeAscentParams {
    /// Dimensions [default: 16,64]
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Trained systems per dimension [default: 10]
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Successful ascents required per dimension [default: 8]
    #[arg(long)]
    pub required: Option<u64>,
    /// Radius scale of the positive ball, `scale * sqrt(n)` [default: 1]
    #[arg(long)]
    pub scale: Option<f64>,
    /// Half-width of the starting noise, in units of `scale` [default: 2.5]
    #[arg(long)]
    pub noise: Option<f64>,
    /// Ascent step size [default: 0.1]
    #[arg(long)]
    pub step: Option<f64>,
    /// Step budget [default: 10000]
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Class to ascend [default: 1]
    #[arg(long)]
    pub target: Option<usize>,
    /// Hidden units [default: 64]
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Training points per class [default: 2000]
    #[arg(long)]
    pub train_per_class: Option<usize>,
    /// SGD epochs [default: 30]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning rate [default: 0.05]
    #[arg(long)]
    pub lr: Option<f64>,
    /// Momentum [default: 0.9]
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Mini-batch size [default: 32]
    #[arg(long)]
    pub batch: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ReportParams {
    /// Run directories to summarize
    #[arg(value_name = "DIR")]
    pub dirs: Option<Vec<PathBuf>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON experiment config; flags given alongside override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: hdg-out/<subcommand>]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

macro_rules! experiments {
    ($($variant:ident($params:ty) = $name:literal, $about:literal;)*) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(tag = "subcommand", content = "params", deny_unknown_fields)]
        pub enum Experiment {
            $(#[serde(rename = $name)] $variant($params),)*
        }

        impl Experiment {
            pub fn name(&self) -> &'static str {
                match self {
                    $(Experiment::$variant(_) => $name,)*
                }
            }

            pub const NAMES: &'static [&'static str] = &[$($name),*];

            /// Fields set in `over` replace those of `self`; both must be
            /// the same subcommand.
            fn overlay(&self, over: &Experiment) -> Result<Experiment, CliError> {
                match (self, over) {
                    $((Experiment::$variant(a), Experiment::$variant(b)) => Ok(Experiment::$variant(overlay(a, b)?)),)*
                    _ => Err(CliError::Config(format!(
                        "config file describes `{}` but the command line asked for `{}`",
                        self.name(),
                        over.name()
                    ))),
                }
            }
        }

        #[derive(Debug, Subcommand)]
        pub enum Command {
            $(
                #[command(name = $name, about = $about)]
                $variant {
                    #[command(flatten)]
                    common: Common,
                    #[command(flatten)]
                    params: $params,
                },
            )*
            /// Run the experiment named in a config file
            Run {
                #[command(flatten)]
                common: Common,
            },
        }

        impl Command {
            fn split(self) -> (Common, Option<Experiment>) {
                match self {
                    $(Command::$variant { common, params } => (common, Some(Experiment::$variant(params))),)*
                    Command::Run { common } => (common, None),
                }
            }
        }
    };
}

experiments! {
    ShellProb(ShellProbParams) = "shell-prob", "Monte-Carlo shell probability of the n-ball against 1 - (1 - alpha)^n";
    SurfaceDistance(SurfaceDistanceParams) = "surface-distance", "Monte-Carlo mean distance to the sphere against R / (n + 1)";
    Isoperimetric(IsoperimetricParams) = "isoperimetric", "Boxes and ellipsoids against the ball of equal volume";
    Dilation(DilationParams) = "dilation", "Volume growth of a dilated ball";
    Counting(CountingParams) = "counting", "Class fraction of the image universe under resolution quadrupling";
    SpectraFit(SpectraFitParams) = "spectra-fit", "Haar isometry, ensemble energy and radius growth of synthesized images";
    LandscapeCensus(LandscapeCensusParams) = "landscape-census", "Critical points of random polynomials against the expected-count bound";
    ReluApprox(ReluApproxParams) = "relu-approx", "Best uniform polynomial approximations of ReLU";
    Lid(LidParams) = "lid", "Intrinsic-dimension estimators on flats of known dimension";
    AdvScaling(AdvScalingParams) = "adv-scaling", "Minimal adversarial perturbation against resolution";
    FakeAscent(FakeAscentParams) = "fake-ascent", "Gradient ascent from noise to a confident class";
    Report(ReportParams) = "report", "Collect run directories into one markdown and CSV report";
}

fn overlay<T: Serialize + DeserializeOwned>(base: &T, over: &T) -> Result<T, CliError> {
    let mut b = serde_json::to_value(base).map_err(|e| CliError::Config(e.to_string()))?;
    let o = serde_json::to_value(over).map_err(|e| CliError::Config(e.to_string()))?;
    if let (Some(b), Some(o)) = (b.as_object_mut(), o.as_object()) {
        for (k, v) in o {
            if !v.is_null() {
                b.insert(k.clone(), v.clone());
            }
        }
    }
    serde_json::from_value(b).map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Debug, Parser)]
#[command(name = "hdg", version, about = "Geometry of high-dimensional image classes, as runnable experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    /// Merges the optional config file with the flags into one config.
    pub fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let (common, flags) = self.command.split();
        let file = common.config.as_deref().map(ExperimentConfig::load).transpose()?;
        let experiment = match (&file, flags) {
            (Some(f), Some(flags)) => f.experiment.overlay(&flags)?,
            (Some(f), None) => f.experiment.clone(),
            (None, Some(flags)) => flags,
            (None, None) => return Err(CliError::Config("`run` needs --config".into())),
        };
        Ok(ExperimentConfig {
            seed: common.seed.or(file.as_ref().map(|f| f.seed)).unwrap_or(0),
            out_dir: common.out_dir.or(file.and_then(|f| f.out_dir)),
            experiment,
        })
    }
}
