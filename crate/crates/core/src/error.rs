use num_complex::Complex64;
use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("degenerate parameter: lambda = {0} is excluded (0 or rho/2)")]
    DegenerateParameter(Complex64),
    #[error("multiplier modulus {0} outside (0, 1)")]
    BadMultiplier(f64),
    #[error("no preimage: {0} is an asymptotic value of the slice")]
    AsymptoticValueHit(Complex64),
    #[error("branch index of {0} unresolvable within |j| <= {1}")]
    Unresolvable(Complex64, i64),
    #[error("iteration failed to converge: {0}")]
    NoConvergence(&'static str),
    #[error("fixed point at {0} is not attracting (|multiplier| = {1})")]
    NotAttracting(Complex64, f64),
    #[error("point {0} is not in the attracting basin")]
    NotInBasin(Complex64),
    #[error("|zeta| = {0} exceeds the injectivity level {1}")]
    OutsideInjectivityDisk(f64, f64),
    #[error("no model parameter found in the scan window")]
    NoSolutionInWindow,
    #[error("point {0} is not attracted to the model fixed point")]
    NotInK0(Complex64),
    #[error("inadmissible word/level combination: {0}")]
    InadmissibleWord(String),
    #[error("parameter {0} does not classify as shift locus")]
    NotInShiftLocus(Complex64),
    #[error("parameter {0} has the wrong normalization side (S0_mu or S_*)")]
    WrongNormalizationSide(Complex64),
    #[error("continuation iterate left the shift locus near {0}")]
    LeftShiftLocus(Complex64),
    #[error("solver collapsed onto an attracting cycle (|multiplier| = {0})")]
    CollapsedToAttracting(f64),
    #[error("landing cycle is not repelling (|multiplier| = {0})")]
    NotRepelling(f64),
    #[error("continuation stalled at path parameter t = {0}")]
    ContinuationStalled(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
