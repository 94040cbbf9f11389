use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("obj parse error at line {line}: {msg}")]
    ObjParse { line: usize, msg: String },
    #[error("non-manifold edge ({a}, {b}): shared by more than two faces")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("non-manifold vertex {v}: more than one boundary fan")]
    NonManifoldVertex { v: usize },
    #[error("inconsistent winding: directed edge ({a}, {b}) appears in two faces")]
    InconsistentWinding { a: usize, b: usize },
    #[error("face {face} is degenerate (zero area)")]
    DegenerateFace { face: usize },
    #[error("vertex {v} is isolated (no incident faces)")]
    IsolatedVertex { v: usize },
    #[error("operation requires a scalar field, got a vector field")]
    FieldKind,
    #[error("field length {got} does not match vertex count {expect}")]
    FieldLength { got: usize, expect: usize },
    #[error("probe length {got} does not match vertex count {expect}")]
    ProbeLength { got: usize, expect: usize },
    #[error("chart point ({u}, {v}) is outside the surface domain")]
    OutsideDomain { u: f64, v: f64 },
    #[error("degenerate metric at chart point ({u}, {v})")]
    DegenerateMetric { u: f64, v: f64 },
    #[error("resolution {0} is too small (need at least 2)")]
    Resolution(usize),
    #[error("face {face} inverted during the step; try a smaller dt")]
    FaceInversion { face: usize },
    #[error("displacement degenerates face {face}; try a smaller epsilon")]
    DegenerateDisplacement { face: usize },
    #[error("sparse solve failed: {0}")]
    Solver(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("polynomial parse error: {0}")]
    PolyParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
