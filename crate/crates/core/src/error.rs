use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty support")]
    EmptySupport,

    #[error("unbounded below: covector has a negative entry")]
    UnboundedBelow,

    #[error("not full-dimensional")]
    NotFullDimensional,

    #[error("coordinate-axis condition violated: f(0,..,x{0},..,0) = 0")]
    AxisCondition(usize),

    #[error("regularization not implemented for n = {0}; supply fan")]
    RegularizationUnsupported(usize),

    #[error("regularization did not terminate after {iterations} steps ({rays} rays inserted)")]
    RegularizationCap { iterations: usize, rays: usize },

    #[error("cone {0} is not simplicial")]
    NonSimplicial(usize),

    #[error("missing coordinate ray e{0}")]
    MissingCoordinateRay(usize),

    #[error("cone is not in the fan")]
    NotInFan,

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("no grading form: 0 lies in the affine hull of the face")]
    NoGradingForm,

    #[error("non-positive grading")]
    NonPositiveGrading,

    #[error("degenerate face data: {0}")]
    DegenerateFaceData(String),

    #[error("not a system of parameters: {0}")]
    NotSystemOfParameters(String),

    #[error("not homogeneous for the grading")]
    NotHomogeneous,

    #[error("coefficient field mismatch: {0}")]
    FieldMismatch(String),

    #[error("order too small: f must lie in m^2")]
    OrderTooSmall,

    #[error("Monte Carlo disagreement across primes: {0}")]
    MonteCarloDisagreement(String),

    #[error("increase truncation: {0}")]
    IncreaseTruncation(String),

    #[error("infinite colength")]
    InfiniteColength,

    #[error("raise truncation: residue unstable up to D = {0}")]
    Unstable(usize),

    #[error("(iv) violated: {0}")]
    ConditionIv(String),

    #[error("resample cap exceeded: {0}")]
    ResampleCap(String),

    #[error("not generic enough: {0}")]
    NotGeneric(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Errors caused by malformed or inadmissible input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Dimension(_)
                | Error::EmptySupport
                | Error::ZeroPolynomial
                | Error::UnboundedBelow
                | Error::OrderTooSmall
                | Error::AxisCondition(_)
                | Error::Precondition(_)
                | Error::NotFullDimensional
                | Error::NotInFan
                | Error::MissingCoordinateRay(_)
                | Error::NonSimplicial(_)
                | Error::RegularizationUnsupported(_)
        )
    }

    /// Errors that mean a computational budget (truncation, iteration cap) ran out.
    pub fn is_resource_error(&self) -> bool {
        matches!(
            self,
            Error::IncreaseTruncation(_)
                | Error::Unstable(_)
                | Error::RegularizationCap { .. }
                | Error::ResampleCap(_)
                | Error::InfiniteColength
        )
    }
}
