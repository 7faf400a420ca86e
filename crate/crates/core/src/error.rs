use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("shadowed-Rician series did not converge after {terms} terms (tail {tail:e})")]
    SeriesNonConvergence { terms: usize, partial: f64, tail: f64 },

    #[error("quadrature hit {subdivisions} subdivisions: estimate {estimate} with error {error:e}")]
    Quadrature { estimate: f64, error: f64, subdivisions: usize },

    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root search stopped after {iterations} iterations (residual {residual:e})")]
    RootNotConverged { iterations: usize, root: f64, residual: f64 },

    #[error("{value} is not a valid {what}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error(
        "leader budget {total_w} W cannot feed {n_followers} followers at {isl_w} W each"
    )]
    InfeasibleBudget { total_w: f64, isl_w: f64, n_followers: u32 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }
}
