use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use zigzag_ising::spectral::{x_to_theta, AngleSequence};
use zigzag_ising::{Error, Result};

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "zzi", version, about = "Layered zig-zag Ising magnetization and cross-checks")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Output stem; writes `<out>.csv` (or `<out>.json`) plus a provenance sidecar.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
}

impl RunConfig {
    /// Canonical JSON form of the parsed configuration.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_canonical(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// M_0..M_m for a layered angle sequence.
    Magnetization(MagnetizationArgs),
    /// Fully homogeneous subcritical products and their limits.
    Homogeneous(HomogeneousArgs),
    /// Critical row correlations D_n from orthogonal polynomial norms.
    CriticalChain(CriticalChainArgs),
    /// Closed-form critical diagonal correlations and zig-zag magnetization.
    ExactCritical(ExactCriticalArgs),
    /// Boundary-field magnetization by the Toeplitz+Hankel determinant.
    Wetting(WettingArgs),
    /// Integrated density of states of a periodic critical block.
    Ids(IdsArgs),
    /// Canonical s-embedding of a periodic critical block.
    Sembedding(SembeddingArgs),
    /// Finite-strip transfer-matrix magnetization table.
    Oracle(OracleArgs),
    /// Agreement report between independent computation paths.
    Crosscheck(CrosscheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Magnetization(_) => "magnetization",
            Command::Homogeneous(_) => "homogeneous",
            Command::CriticalChain(_) => "critical-chain",
            Command::ExactCritical(_) => "exact-critical",
            Command::Wetting(_) => "wetting",
            Command::Ids(_) => "ids",
            Command::Sembedding(_) => "sembedding",
            Command::Oracle(_) => "oracle",
            Command::Crosscheck(_) => "crosscheck",
        }
    }
}

/// Angles theta_1, theta_2, ... in radians, or x = tan(theta/2) weights.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
pub struct AngleArgs {
    /// Same angle between every pair of columns.
    #[arg(long, group = "angle_source")]
    pub theta_const: Option<f64>,
    /// Comma separated angles theta_1,theta_2,...
    #[arg(long, value_delimiter = ',', group = "angle_source")]
    pub theta_list: Option<Vec<f64>>,
    /// File of angles separated by whitespace or commas.
    #[arg(long, group = "angle_source")]
    pub theta_file: Option<PathBuf>,
    /// Comma separated weights x_p = tan(theta_p / 2).
    #[arg(long, value_delimiter = ',', group = "angle_source")]
    pub x: Option<Vec<f64>>,
    /// Repeat the list as a periodic block.
    #[arg(long)]
    pub periodic: bool,
    /// Angle used after the list runs out.
    #[arg(long)]
    pub tail: Option<f64>,
    /// Different first angle in front of --theta-const.
    #[arg(long)]
    pub first: Option<f64>,
}

impl AngleArgs {
    pub fn is_set(&self) -> bool {
        self.theta_const.is_some()
            || self.theta_list.is_some()
            || self.theta_file.is_some()
            || self.x.is_some()
    }

    fn list(&self) -> Result<Option<Vec<f64>>> {
        if let Some(l) = &self.theta_list {
            return Ok(Some(l.clone()));
        }
        if let Some(x) = &self.x {
            return Ok(Some(x.iter().map(|&w| x_to_theta(w)).collect()));
        }
        if let Some(path) = &self.theta_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
            let values = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Domain(format!("bad angle {s:?} in {}", path.display())))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Some(values));
        }
        Ok(None)
    }

    pub fn sequence(&self) -> Result<AngleSequence> {
        if let Some(theta) = self.theta_const {
            return match self.first {
                Some(first) => AngleSequence::with_first(first, theta),
                None => AngleSequence::homogeneous(theta),
            };
        }
        if self.first.is_some() {
            return Err(Error::Domain("--first needs --theta-const".into()));
        }
        let list = self
            .list()?
            .ok_or_else(|| Error::Domain("no angles given (use --theta-const, --theta-list, --theta-file or --x)".into()))?;
        match (self.periodic, self.tail) {
            (true, Some(_)) => Err(Error::Domain("--periodic and --tail exclude each other".into())),
            (true, None) => AngleSequence::periodic(list),
            (false, Some(t)) => AngleSequence::prefixed(list, t),
            (false, None) => AngleSequence::explicit(list),
        }
    }
}

/// A periodic block theta_1..theta_2n, as angles or as x weights.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
pub struct BlockArgs {
    /// Comma separated block angles.
    #[arg(long, value_delimiter = ',', group = "block_source")]
    pub block: Option<Vec<f64>>,
    /// Comma separated block weights x = tan(theta/2).
    #[arg(long = "block-x", value_delimiter = ',', group = "block_source")]
    pub block_x: Option<Vec<f64>>,
}

impl BlockArgs {
    pub fn angles(&self) -> Result<Vec<f64>> {
        match (&self.block, &self.block_x) {
            (Some(b), _) => Ok(b.clone()),
            (None, Some(x)) => Ok(x.iter().map(|&w| x_to_theta(w)).collect()),
            (None, None) => Err(Error::Domain("no block given (use --block or --block-x)".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Hankel,
    Sqrt,
    Polar,
    All,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MagnetizationArgs {
    #[command(flatten)]
    pub angles: AngleArgs,
    #[arg(long, default_value_t = 4)]
    pub m_max: usize,
    #[arg(long, value_enum, default_value_t = MethodChoice::Sqrt)]
    pub method: MethodChoice,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Fixed truncation size instead of the adaptive schedule.
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Largest truncation of the adaptive schedule.
    #[arg(long, default_value_t = 1 << 14)]
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HomogeneousArgs {
    #[arg(long)]
    pub theta_h: f64,
    /// Defaults to --theta-h.
    #[arg(long)]
    pub theta_v: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub m_max: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CriticalChainArgs {
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub theta: f64,
    #[arg(long, default_value_t = 30)]
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExactCriticalArgs {
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
}

/// Boundary field given either as (q, r) or as the angles (theta, theta_1).
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
pub struct WettingModelArgs {
    #[arg(long, requires = "r", conflicts_with_all = ["theta", "theta_1"])]
    pub q: Option<f64>,
    #[arg(long, requires = "q")]
    pub r: Option<f64>,
    #[arg(long, requires = "theta_1")]
    pub theta: Option<f64>,
    #[arg(long = "theta-1", requires = "theta")]
    pub theta_1: Option<f64>,
}

impl WettingModelArgs {
    pub fn model(&self) -> Result<zigzag_ising::wetting::WettingModel> {
        use zigzag_ising::wetting::WettingModel;
        match (self.q, self.r, self.theta, self.theta_1) {
            (Some(q), Some(r), _, _) => WettingModel::from_qr(q, r),
            (_, _, Some(t), Some(t1)) => WettingModel::new(t, t1),
            _ => Err(Error::Domain("give --q and --r, or --theta and --theta-1".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct WettingArgs {
    #[command(flatten)]
    pub model: WettingModelArgs,
    #[arg(long, default_value_t = 4)]
    pub m_max: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct IdsArgs {
    #[command(flatten)]
    pub block: BlockArgs,
    /// Number of periods; defaults to about 1024 sites.
    #[arg(long)]
    pub periods: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 4000)]
    pub points: usize,
    /// Twist used for the lowest-eigenvalue check.
    #[arg(long, default_value_t = 1e-2)]
    pub twist: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SembeddingArgs {
    #[command(flatten)]
    pub block: BlockArgs,
    /// Columns to embed; defaults to four periods.
    #[arg(long)]
    pub columns: Option<usize>,
    /// Rows drawn in the SVG.
    #[arg(long, default_value_t = 4)]
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OracleArgs {
    #[command(flatten)]
    pub angles: AngleArgs,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![6, 8, 10, 12])]
    pub heights: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![20])]
    pub widths: Vec<usize>,
    /// Also report the half-plane value from the layered engine.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Layered engine at theta = pi/4 against the factorial formula.
    Exact,
    /// Hankel, sqrt and polar paths against each other.
    Methods,
    /// Toeplitz+Hankel determinant against the layered engine.
    Wetting,
    /// Strip transfer matrix against the layered engine.
    Oracle,
    /// Period width of the s-embedding against n C_J.
    Geometry,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CrosscheckArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 4)]
    pub m_max: usize,
    #[command(flatten)]
    pub angles: AngleArgs,
    #[command(flatten)]
    pub model: WettingModelArgs,
    #[command(flatten)]
    pub block: BlockArgs,
    /// Convergence tolerance for the layered engine.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 12)]
    pub height: usize,
    #[arg(long, default_value_t = 20)]
    pub width: usize,
}
