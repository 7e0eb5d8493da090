use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("requested degree {requested} exceeds table capacity {capacity}")]
    Capacity { requested: usize, capacity: usize },

    #[error("leading coefficient c_{degree} is zero")]
    DegreeDeficient { degree: usize },

    #[error(
        "recurrence discretization did not converge after {refinements} refinements \
         ({nodes} nodes): max change {max_change:.3e} at k = {worst_index}"
    )]
    RecurrenceNotConverged {
        refinements: usize,
        nodes: usize,
        max_change: f64,
        worst_index: usize,
    },

    #[error(
        "adaptive quadrature on [{a}, {b}] hit {subdivisions} subdivisions; \
         error estimate {achieved:.3e} > tolerance {tolerance:.3e}"
    )]
    Quadrature {
        a: f64,
        b: f64,
        subdivisions: usize,
        achieved: f64,
        tolerance: f64,
    },

    #[error("full-line integral did not stabilize after {extensions} extensions (last change {last_change:.3e})")]
    NotStabilized { extensions: usize, last_change: f64 },

    #[error("QR iteration failed to converge; stuck block rows {lo}..={hi} after {iterations} iterations")]
    Eigen { lo: usize, hi: usize, iterations: usize },

    #[error("trial {trial} (seed {seed:#018x}) failed: {source}")]
    Trial {
        trial: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
