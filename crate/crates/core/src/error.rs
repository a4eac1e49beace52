use thiserror::Error;

/// Errors raised by symbol evaluation, operator assembly and the numerical
/// diagnostics built on top of them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A meromorphic denominator is smaller than the pole tolerance at the
    /// evaluated phase. `site` is set when the phase came from an orbit.
    #[error("pole proximity at phase {phase} (|den| = {den_abs:e}){}", site_suffix(.site))]
    PoleProximity {
        site: Option<i64>,
        phase: f64,
        den_abs: f64,
    },

    #[error("degenerate symbol: all Fourier coefficients vanish")]
    DegenerateSymbol,

    #[error("coefficient table is not Hermitian at frequency {k}: c(-k) != conj(c(k))")]
    NotHermitian { k: i64 },

    #[error("nondegeneracy fails: det[(F(x) - tI)M(x)] has no witness on the grid for t = {t}")]
    AllDegenerate { t: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("near-singular resolvent (residual {residual:e}, max |G| {max_entry:e})")]
    NearSingular { residual: f64, max_entry: f64 },

    #[error("{excluded} of {total} quadrature nodes underflowed (limit 1%)")]
    TooManyExclusions { excluded: usize, total: usize },

    #[error("every bad fraction is zero; decay too fast to fit")]
    AllZero,

    #[error("too few points for a fit: {found} (need {needed})")]
    TooFewPoints { found: usize, needed: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn site_suffix(site: &Option<i64>) -> String {
    match site {
        Some(n) => format!(" at site {n}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
