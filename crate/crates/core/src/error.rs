use thiserror::Error;

/// Errors raised by the grid, pde, dual and primal layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid has no interior node")]
    EmptyGrid,

    #[error("grid would have {nodes} nodes, above the limit of {limit}")]
    GridTooLarge { nodes: usize, limit: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear solve stalled at relative residual {residual:.3e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("obstacle solve hit the budget of {budget} sweeps with update {residual:.3e}")]
    MaxIterations { budget: usize, residual: f64 },

    #[error("obstacle solve failed for source node {source_node}: {inner}")]
    RowFailed {
        source_node: usize,
        #[source]
        inner: Box<Error>,
    },

    #[error("cost is not subharmonic in y (min discrete Laplacian {min_laplacian:.3e}); apply a subharmonizing shift")]
    SubharmonicityRequired { min_laplacian: f64 },

    #[error("mu does not precede nu in the subharmonic order (witness gap {gap:.3e})")]
    NotInSubharmonicOrder { gap: f64 },

    #[error("dual ascent stopped ({:?}) before meeting its tolerance; objective {:.6e}", .0.stop, .0.objective)]
    BudgetExhausted(Box<crate::dual::DualState>),

    #[error("linear program failed: {0}")]
    LpNumericalFailure(String),

    #[error("LP instance has {interior} interior nodes, above the cap of {cap}")]
    InstanceTooLarge { interior: usize, cap: usize },

    #[error("LP is infeasible: mu does not precede nu in the subharmonic order (witness gap {gap:.3e})")]
    Infeasible { gap: f64 },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
