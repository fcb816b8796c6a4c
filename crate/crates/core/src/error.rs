use std::fmt;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("unsupported quadrature degree {0}")]
    UnsupportedDegree(u32),
    #[error("invalid boundary condition: {0}")]
    BoundaryCondition(String),
    #[error("flow integration failed at x = ({x:.6}, {y:.6}): {reason}", x = .point[0], y = .point[1])]
    Integration { point: [f64; 2], reason: String },
    #[error("singular Cauchy-Green tensor at ({x:.6}, {y:.6}), condition number {cond:e}", x = .point[0], y = .point[1])]
    SingularJacobian { point: [f64; 2], cond: f64 },
    #[error("element {element}: {source}")]
    Element {
        element: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("eigensolver did not converge after {iterations} restarts (residuals {residuals:?})")]
    NoConvergence { iterations: usize, residuals: Vec<f64> },
    #[error("bordered system is singular: eigenvalue {lambda} is not simple")]
    SingularBordered { lambda: f64 },
    #[error("eigenvalue tracking failed at eps = {eps}: {reason}")]
    Tracking { eps: f64, reason: String },
    #[error("degenerate field: {0}")]
    DegenerateField(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stages, used to tag errors surfaced from [`crate::experiment::run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Mesh,
    Dynamics,
    Assembly,
    Eigensolve,
    Response,
    Perturbed,
    LevelSet,
    Export,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Mesh => "mesh",
            Stage::Dynamics => "dynamics",
            Stage::Assembly => "assembly",
            Stage::Eigensolve => "eigensolve",
            Stage::Response => "response",
            Stage::Perturbed => "perturbed re-solve",
            Stage::LevelSet => "level set",
            Stage::Export => "export",
        };
        f.write_str(s)
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
