use thiserror::Error;

/// Failures raised by the numerical and update routines.
///
/// The variant name is the stable identifier reported by the CLI (see
/// [`Error::name`]); the message carries the detail.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error("NonFinite: matrix `{0}` contains NaN or infinite entries")]
    NonFinite(String),
    #[error("SingularMatrix: reciprocal condition {rcond:.3e}")]
    SingularMatrix { rcond: f64 },
    #[error("SingularPencil: det(λM+K) vanishes identically")]
    SingularPencil,
    #[error("NotHermitian: relative skew part {residual:.3e}")]
    NotHermitian { residual: f64 },
    #[error("StructureViolation: {0}")]
    StructureViolation(String),
    #[error("RankDeficient: `{0}` does not have full column rank")]
    RankDeficient(String),
    #[error("MissingStar: an unstructured pencil needs an explicit adjoint")]
    MissingStar,
    #[error("IsotropicVector: x⋆Mx = {value:.3e} is numerically zero")]
    IsotropicVector { value: f64 },
    #[error("NotEigenpair: {0}")]
    NotEigenpair(String),
    #[error("SelfPairedEigenvalue: λ equals its structural partner")]
    SelfPairedEigenvalue,
    #[error("RealEigenvalue: realification needs a nonreal eigenvalue")]
    RealEigenvalue,
    #[error("SingularG1: X1⋆MX1 is singular")]
    SingularG1,
    #[error("SingularM: M is singular")]
    SingularM,
    #[error("BadCompletionBasis: [X1 X] is singular")]
    BadCompletionBasis,
    #[error("NotPositiveDefinite: `{what}` has minimum eigenvalue {min_eig:.3e}")]
    NotPositiveDefinite { what: String, min_eig: f64 },
    #[error("NotNormalized: Gramian deviates from its normal form by {deviation:.3e}")]
    NotNormalized { deviation: f64 },
    #[error("MissingFixedPair: this update needs the fixed deflating pair")]
    MissingFixedPair,
    #[error("RankDeficientA: [XfΛf XaΛa; Xf Xa] is rank deficient")]
    RankDeficientA,
    #[error("SingularBasis: [Xa Xf] is singular")]
    SingularBasis,
    #[error("SingularG: X_c⋆MX_c has reciprocal condition {rcond:.3e}")]
    SingularG { rcond: f64 },
    #[error("SingularKGramian: X_c⋆KX_c has reciprocal condition {rcond:.3e}")]
    SingularKGramian { rcond: f64 },
    #[error("SingularZ: similarity transform is singular")]
    SingularZ,
    #[error("CoreEquationViolated: M̂Λa+K̂ misses G(Λc−Λa) by {residual:.3e}")]
    CoreEquationViolated { residual: f64 },
    #[error("NotRealDiagonal: `{0}` must be a real diagonal matrix")]
    NotRealDiagonal(String),
    #[error("NotImaginaryDiagonal: `{0}` must be a purely imaginary diagonal matrix")]
    NotImaginaryDiagonal(String),
    #[error("PositiveTargetEigenvalue: aimed eigenvalue {0} is not negative")]
    PositiveTargetEigenvalue(f64),
    #[error("ComplexInput: `{0}` must be real")]
    ComplexInput(String),
    #[error("BadBlockShape: {0}")]
    BadBlockShape(String),
    #[error("ZeroChangeEigenvalue: change eigenvalues must be nonzero")]
    ZeroChangeEigenvalue,
    #[error("EigenvalueOutsideClass: {0}")]
    EigenvalueOutsideClass(String),
    #[error("NotSHH: {0}")]
    NotShh(String),
    #[error("NotSimpleEigenvalues: {0}")]
    NotSimpleEigenvalues(String),
    #[error("BadBlockPattern: {0}")]
    BadBlockPattern(String),
    #[error("RepeatedEigenvalue: {0}")]
    RepeatedEigenvalue(String),
    #[error("BadParameters: {0}")]
    BadParameters(String),
}

impl Error {
    /// Stable variant identifier.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonFinite(_) => "NonFinite",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::SingularPencil => "SingularPencil",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::StructureViolation(_) => "StructureViolation",
            Error::RankDeficient(_) => "RankDeficient",
            Error::MissingStar => "MissingStar",
            Error::IsotropicVector { .. } => "IsotropicVector",
            Error::NotEigenpair(_) => "NotEigenpair",
            Error::SelfPairedEigenvalue => "SelfPairedEigenvalue",
            Error::RealEigenvalue => "RealEigenvalue",
            Error::SingularG1 => "SingularG1",
            Error::SingularM => "SingularM",
            Error::BadCompletionBasis => "BadCompletionBasis",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::MissingFixedPair => "MissingFixedPair",
            Error::RankDeficientA => "RankDeficientA",
            Error::SingularBasis => "SingularBasis",
            Error::SingularG { .. } => "SingularG",
            Error::SingularKGramian { .. } => "SingularKGramian",
            Error::SingularZ => "SingularZ",
            Error::CoreEquationViolated { .. } => "CoreEquationViolated",
            Error::NotRealDiagonal(_) => "NotRealDiagonal",
            Error::NotImaginaryDiagonal(_) => "NotImaginaryDiagonal",
            Error::PositiveTargetEigenvalue(_) => "PositiveTargetEigenvalue",
            Error::ComplexInput(_) => "ComplexInput",
            Error::BadBlockShape(_) => "BadBlockShape",
            Error::ZeroChangeEigenvalue => "ZeroChangeEigenvalue",
            Error::EigenvalueOutsideClass(_) => "EigenvalueOutsideClass",
            Error::NotShh(_) => "NotSHH",
            Error::NotSimpleEigenvalues(_) => "NotSimpleEigenvalues",
            Error::BadBlockPattern(_) => "BadBlockPattern",
            Error::RepeatedEigenvalue(_) => "RepeatedEigenvalue",
            Error::BadParameters(_) => "BadParameters",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
