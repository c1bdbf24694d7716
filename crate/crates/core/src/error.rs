use thiserror::Error;

/// Errors produced by network construction, solves and the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resistance {0} is not strictly positive and finite")]
    InvalidResistance(f64),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("unknown edge {0}")]
    UnknownEdge(usize),

    #[error("vertex sets must be nonempty")]
    EmptySet,

    #[error("vertex sets overlap at `{0}`")]
    Overlap(String),

    #[error("exhaustion generator failed at n = {n}: {reason}")]
    Generator { n: usize, reason: String },

    #[error("network is disconnected")]
    Disconnected,

    #[error("terminals must be distinct")]
    SameTerminal,

    #[error("terminal `{name}` is not contained in V_{n}")]
    TerminalOutside { name: String, n: usize },

    #[error("boundary condition must name at least one vertex")]
    EmptyBoundary,

    #[error("walk is not a closed directed walk in the network: {0}")]
    NotClosedWalk(String),

    #[error("cut must be a nonempty proper vertex subset")]
    TrivialCut,

    #[error("Kirchhoff node law violated at `{vertex}` (accumulation {accumulation:e})")]
    NotAFlow { vertex: String, accumulation: f64 },

    #[error("query edge carries non-positive value {0:e}")]
    NonPositiveEdge(f64),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("feasible set is empty: {0}")]
    Infeasible(String),

    #[error("no convergence after {iterations} iterations (last change {change:e})")]
    NonConvergence { iterations: usize, change: f64 },

    #[error("sequence not monotone at n = {n}: {previous} then {next}")]
    NonMonotone { n: usize, previous: f64, next: f64 },

    #[error("potential takes equal values at the two terminals")]
    LevelTerminals,

    #[error("potential is constant")]
    ConstantPotential,

    #[error("positive-current reachability sets intersect at `{0}`; the edge function violates the cycle law")]
    CycleLawViolated(String),

    #[error("clip bounds reversed: upper {upper} < lower {lower}")]
    ClipOrder { upper: f64, lower: f64 },

    #[error("cut layers are not nested at layer {0}")]
    LayersNotNested(usize),

    #[error("vertex sets are not separated by the given cut")]
    NotSeparated,

    #[error("conductance sum over the edge set is infinite")]
    DivergentConductance,

    #[error("conductance sum over the edge set is not known to be finite")]
    UnknownConductance,

    #[error("subgraph is not a barricade: {0}")]
    NotBarricade(String),

    #[error("anchor edge lies in the barricade")]
    AnchorInBarricade,

    #[error("invalid input: {0}")]
    InvalidSpec(String),

    #[error("convergence of the series tail cannot be decided")]
    UndecidableTail,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
