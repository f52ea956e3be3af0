use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use symdyn::metricspace::{BasedMetric, CoefficientScheme, CoverRadius, MetricSpec};
use symdyn::netgraph::{
    cayley_zd, cayley_zdne, counterexample_graph, odometer_graph, shortcut_graph, unit_shift_graph, GraphSpec,
    SharedGraph, VertexId,
};
use symdyn::symsys::{load_system, NamedSystem, PatternSpace, SymbolicSystem, SystemFile};

use crate::report::Format;
use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "symdyn",
    version,
    about = "Experiments on symbolic dynamical systems over countable digraphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sizes of B(v, r) for r = 0..=R.
    GraphBall(GraphBallArgs),
    /// Ball growth exponents and the log-log fit slope.
    GraphDim(GraphDimArgs),
    /// d(v, τⁿv)/n for a translation τ.
    GraphSpeed(GraphSpeedArgs),
    /// Light-cone sizes ρ_v(t).
    SysPropagation(SysPropagationArgs),
    /// Panorama layers W^t by exhaustive enumeration.
    SysPanorama(SysPanoramaArgs),
    /// Envelope search for an equicontinuous window.
    SysEquicontinuity(SysEquicontinuityArgs),
    /// Finite-horizon inverse-limit check on nested windows {0..n}.
    SysOdometerChain(SysOdometerChainArgs),
    /// Entropy ratios over balls.
    EntropyBall(EntropyBallArgs),
    /// Pattern counts along the orbit of a ball under a translation.
    EntropyTau(EntropyTauArgs),
    /// Simulate, decode and compare on random configurations.
    CexRoundtrip(CexRoundtripArgs),
    /// Exact light-cone sizes of cell 0 against the quadratic lower bound.
    CexPropagation(CexPropagationArgs),
    /// Cylinder-cover bounds on log N_ε.
    MetricDim(MetricDimArgs),
    /// Sampled Lipschitz ratios of one step of the system.
    MetricLipschitz(MetricLipschitzArgs),
    /// Sampled Hölder bound for one step of the system between two metrics.
    HolderCheck(HolderCheckArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[value(name = "cayley_zd")]
    CayleyZd,
    #[value(name = "cayley_zdne")]
    CayleyZdne,
    #[value(name = "unit_shift")]
    UnitShift,
    #[value(name = "odometer")]
    Odometer,
    #[value(name = "shortcut")]
    Shortcut,
    #[value(name = "counterexample")]
    Counterexample,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GraphArgs {
    #[arg(long, value_enum, default_value_t = Family::CayleyZd)]
    pub family: Family,
    #[arg(long = "D", default_value_t = 2)]
    pub d: usize,
    #[arg(long = "E", default_value_t = 0)]
    pub e: usize,
    #[arg(long)]
    pub two_sided: bool,
    /// JSON graph descriptor; overrides the family flags.
    #[arg(long)]
    pub graph_file: Option<PathBuf>,
}

impl GraphArgs {
    pub fn build(&self) -> Result<SharedGraph, CliError> {
        if let Some(path) = &self.graph_file {
            let spec: GraphSpec =
                serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            return Ok(spec.build());
        }
        Ok(match self.family {
            Family::CayleyZd => Arc::new(cayley_zd(self.d)),
            Family::CayleyZdne => Arc::new(cayley_zdne(self.d, self.e)),
            Family::UnitShift => Arc::new(unit_shift_graph(self.two_sided)),
            Family::Odometer => Arc::new(odometer_graph()),
            Family::Shortcut => Arc::new(shortcut_graph()),
            Family::Counterexample => Arc::new(counterexample_graph()),
        })
    }

    /// The family's natural base vertex.
    pub fn origin(&self) -> VertexId {
        match self.family {
            Family::CayleyZd => VertexId::new(&vec![0; self.d]),
            Family::CayleyZdne => VertexId::new(&vec![0; self.d + self.e]),
            Family::Shortcut => VertexId::from([0, 0]),
            _ => VertexId::index(0),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemName {
    #[value(name = "odometer")]
    Odometer,
    #[value(name = "full_shift")]
    FullShift,
    #[value(name = "ca")]
    Ca,
    #[value(name = "counterexample")]
    Counterexample,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SystemArgs {
    #[arg(long, value_enum)]
    pub system: Option<SystemName>,
    /// Odometer digit moduli, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub m: Vec<usize>,
    /// Alphabet size for the shift and CA families.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long)]
    pub two_sided: bool,
    /// Lattice dimension for `ca`.
    #[arg(long = "D", default_value_t = 1)]
    pub d: usize,
    /// CA neighbourhood offsets, `;` separated, e.g. `1,0;-1,0`.
    #[arg(long, value_delimiter = ';', allow_hyphen_values = true)]
    pub neighborhood: Vec<VertexId>,
    /// CA table, comma separated, row-major in neighbourhood order.
    #[arg(long, value_delimiter = ',')]
    pub table: Vec<u8>,
    /// Draw a random CA table from this seed when `--table` is absent.
    #[arg(long)]
    pub table_seed: Option<u64>,
    /// JSON system file; overrides `--system`.
    #[arg(long)]
    pub system_file: Option<PathBuf>,
}

impl SystemArgs {
    pub fn build(&self) -> Result<(SymbolicSystem, PatternSpace), CliError> {
        if let Some(path) = &self.system_file {
            return load_system(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())));
        }
        let named = match self.system {
            None => return Err(CliError::Usage("one of --system or --system-file is required".into())),
            Some(SystemName::Odometer) => NamedSystem::Odometer { m: self.m.clone() },
            Some(SystemName::FullShift) => NamedSystem::FullShift {
                k: self.k,
                two_sided: self.two_sided,
            },
            Some(SystemName::Counterexample) => NamedSystem::Counterexample,
            Some(SystemName::Ca) => {
                if self.neighborhood.is_empty() {
                    return Err(CliError::Usage("--system ca needs --neighborhood".into()));
                }
                let rows = self.k.checked_pow(self.neighborhood.len() as u32).unwrap_or(usize::MAX);
                let table = match (&self.table.is_empty(), self.table_seed) {
                    (false, _) => self.table.clone(),
                    (true, Some(seed)) if rows <= 1 << 20 => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        (0..rows).map(|_| rng.gen_range(0..self.k) as u8).collect()
                    }
                    _ => return Err(CliError::Usage("--system ca needs --table or --table-seed".into())),
                };
                NamedSystem::Ca {
                    k: self.k,
                    d: self.d,
                    neighborhood: self.neighborhood.iter().map(|v| v.coords().to_vec()).collect(),
                    table,
                }
            }
        };
        SystemFile::Named(named)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MetricArgs {
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    /// Estuary vertices, `;` separated; defaults to the base vertex.
    #[arg(long, value_delimiter = ';', allow_hyphen_values = true)]
    pub estuary: Vec<VertexId>,
    /// Weights for the estuary vertices; defaults to uniform.
    #[arg(long, value_delimiter = ',')]
    pub coeffs: Vec<f64>,
    /// Double-exponential weights on the estuary `u_j = j`.
    #[arg(long)]
    pub double_exponential: bool,
    /// JSON metric descriptor; overrides the flags above.
    #[arg(long)]
    pub metric_file: Option<PathBuf>,
}

impl MetricArgs {
    pub fn build(&self, graph: SharedGraph, base: VertexId) -> Result<BasedMetric, CliError> {
        let usage = |e: symdyn::metricspace::MetricError| CliError::Usage(e.to_string());
        let (scheme, lambda) = if let Some(path) = &self.metric_file {
            let spec: MetricSpec =
                serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            (spec.scheme().map_err(usage)?, spec.lambda)
        } else if self.double_exponential {
            (
                CoefficientScheme::double_exponential(|j| VertexId::index(j as i64)),
                self.lambda,
            )
        } else {
            let estuary = if self.estuary.is_empty() {
                vec![base]
            } else {
                self.estuary.clone()
            };
            let coeffs = if self.coeffs.is_empty() {
                vec![1.0 / estuary.len() as f64; estuary.len()]
            } else {
                self.coeffs.clone()
            };
            (CoefficientScheme::finite(estuary, coeffs).map_err(usage)?, self.lambda)
        };
        BasedMetric::new(scheme, lambda, graph).map_err(usage)
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

#[derive(Args, Debug, Serialize)]
pub struct GraphBallArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Centre; defaults to the family's base vertex.
    #[arg(long, allow_hyphen_values = true)]
    pub vertex: Option<VertexId>,
    #[arg(long)]
    pub r: usize,
    /// Also list the members of B(v, R).
    #[arg(long)]
    pub members: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct GraphDimArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub vertex: Option<VertexId>,
    #[arg(long)]
    pub rmin: usize,
    #[arg(long)]
    pub rmax: usize,
    /// Fail (exit 1) unless the fit slope is within `--tol` of this value.
    #[arg(long)]
    pub expect: Option<f64>,
    #[arg(long, default_value_t = 0.15)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct GraphSpeedArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub vertex: Option<VertexId>,
    /// Translation vector of τ, e.g. `1,0`.
    #[arg(long, allow_hyphen_values = true)]
    pub translate: VertexId,
    #[arg(long, default_value_t = 8)]
    pub nmax: u64,
    /// Search cap for each distance.
    #[arg(long, default_value_t = 1024)]
    pub cap: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SysPropagationArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub vertex: VertexId,
    #[arg(long = "T")]
    pub t: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SysPanoramaArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_delimiter = ';', allow_hyphen_values = true, required = true)]
    pub window: Vec<VertexId>,
    #[arg(long = "T")]
    pub t: usize,
    /// Fail (exit 1) unless W^T covers these vertices.
    #[arg(long, value_delimiter = ';', allow_hyphen_values = true)]
    pub target: Vec<VertexId>,
    /// Enumeration budget in patterns.
    #[arg(long, default_value_t = symdyn::symsys::DEFAULT_PATTERN_CAP)]
    pub cap: u128,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SysEquicontinuityArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_delimiter = ';', allow_hyphen_values = true, required = true)]
    pub window: Vec<VertexId>,
    #[arg(long, default_value_t = 8)]
    pub probe_horizon: usize,
    #[arg(long, default_value_t = 64)]
    pub reach_cap: usize,
    #[arg(long, default_value_t = symdyn::symsys::DEFAULT_PATTERN_CAP)]
    pub cap: u128,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SysOdometerChainArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Number of nested windows {0}, {0,1}, ...
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Horizon shared by all levels; defaults to 2^(levels+1).
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long, default_value_t = symdyn::symsys::DEFAULT_PATTERN_CAP)]
    pub cap: u128,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct EntropyBallArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub vertex: VertexId,
    #[arg(long, default_value_t = 2)]
    pub rmin: usize,
    #[arg(long)]
    pub rmax: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct EntropyTauArgs {
    /// Graph and alphabet of the full shift `A^V`.
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub translate: VertexId,
    /// F = B(center, radius); the centre defaults to the base vertex.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<VertexId>,
    #[arg(long, default_value_t = 2)]
    pub radius: usize,
    #[arg(long, default_value_t = 20)]
    pub nmax: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct CexRoundtripArgs {
    #[arg(long = "J")]
    pub j: u32,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Emit the trace of trial 0 as `t,a,b` rows instead of per-trial rows.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct CexPropagationArgs {
    #[arg(long = "T")]
    pub t: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct MetricDimArgs {
    /// Full shift over a graph family; ignored when `--system` is given.
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Use the pattern space and network of this system instead.
    #[arg(long, value_enum)]
    pub system: Option<SystemName>,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Smallest and largest k in ε = 2^{-k}.
    #[arg(long, default_value_t = 8)]
    pub kmin: i32,
    #[arg(long, default_value_t = 32)]
    pub kmax: i32,
    #[arg(long, value_enum, default_value_t = CoverChoice::Tight)]
    pub cover: CoverChoice,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverChoice {
    Tight,
    Conservative,
}

impl From<CoverChoice> for CoverRadius {
    fn from(c: CoverChoice) -> Self {
        match c {
            CoverChoice::Tight => CoverRadius::Tight,
            CoverChoice::Conservative => CoverRadius::Conservative,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct MetricLipschitzArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Pairs live on B(U, radius + 1); images are compared on B(U, radius).
    #[arg(long, default_value_t = 8)]
    pub radius: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct HolderCheckArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// λ of the target metric d'.
    #[arg(long)]
    pub lambda_out: f64,
    #[arg(long)]
    pub eta: f64,
    #[arg(long)]
    pub constant: f64,
    #[arg(long, default_value_t = 8)]
    pub radius: usize,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}
