use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Jacobi identity violated at basis indices (a={a}, b={b}, c={c}) in component {d}")]
    JacobiViolation { a: usize, b: usize, c: usize, d: usize },

    #[error("grading not closed: bracket of basis {a} (grade {grade_a}) and {b} (grade {grade_b}) has component {c} of grade {grade_c}")]
    GradingNotClosed {
        a: usize,
        b: usize,
        c: usize,
        grade_a: usize,
        grade_b: usize,
        grade_c: usize,
    },

    #[error("antisymmetry violated: f^{c}_({a},{b}) != -f^{c}_({b},{a})")]
    AntisymmetryViolation { a: usize, b: usize, c: usize },

    #[error("invariant form is not ad-invariant at basis indices ({a}, {b}, {c})")]
    FormNotInvariant { a: usize, b: usize, c: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grade {grade} out of range for a Z_{order} grading")]
    GradeOutOfRange { grade: usize, order: usize },

    #[error("{part} part fails its Killing (anti)symmetry check")]
    SymmetryClassViolation { part: &'static str },

    #[error("invariant bilinear form is degenerate")]
    DegenerateForm,

    #[error("operator pair is not grading-diagonal")]
    NotGradingDiagonal,

    #[error("kernel component of the derivative equation at basis pair ({a}, {b}) is not covered by any constraint")]
    UnresolvedKernelComponent { a: usize, b: usize },

    #[error("connection is stored as a truncated series, not as a Laurent polynomial")]
    NotExact,

    #[error("unknown model {0:?}")]
    UnknownModel(String),

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("no closed-form connection for {0}")]
    NoClosedForm(String),

    #[error("unsupported grading {grading:?} for preset {preset:?}")]
    UnsupportedGrading { preset: String, grading: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
