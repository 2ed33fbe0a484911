use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("λ = {0} is a singular point (sin 2λ · sin 3λ = 0)")]
    SingularLambda(f64),
    #[error("({a}, {b}) is not an admissible coprime pair")]
    InvalidRoot { a: u32, b: u32 },
    #[error("system width must be positive")]
    InvalidWidth,
    #[error("expected {expected} inhomogeneities, got {got}")]
    InvalidXi { expected: usize, got: usize },
    #[error("defect count {d} out of range for N = {n}")]
    InvalidSector { n: usize, d: usize },
    #[error("malformed diagram: {0}")]
    MalformedDiagram(String),
    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("index out of range for {id}: {detail}")]
    IndexOutOfRange { id: String, detail: String },
    #[error("near-singular spectral parameter: |f_{k}| = {value:e}")]
    NearSingularU { k: i32, value: f64 },
    #[error("degenerate spectrum: diagonality defect {0:e}")]
    DegenerateSpectrum(f64),
    #[error("degenerate bracket [{0}] in projector prefactors")]
    DegenerateBracket(i32),
    #[error("unsupported projector label ({0}, {1})")]
    UnsupportedLabel(usize, usize),
    #[error("eigenvalue mismatch: measured {measured}, expected {expected}")]
    EigenvalueMismatch { measured: String, expected: String },
    #[error("colliding roots in sl(3) Chebyshev evaluation")]
    DegenerateRoots,
    #[error("root-of-unity context required")]
    NotRootOfUnity,
}

pub type Result<T> = std::result::Result<T, Error>;
