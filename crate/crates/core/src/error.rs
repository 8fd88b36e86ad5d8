use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A value that must be finite was NaN or infinite.
    NonFinite {
        field: &'static str,
    },
    NonPositiveLinewidth {
        field: &'static str,
    },
    InputCouplingExceedsTotal {
        field: &'static str,
    },
    NegativePower {
        field: &'static str,
    },
    /// Generic positivity/range violation for fields without a dedicated variant.
    OutOfRange {
        field: &'static str,
        constraint: &'static str,
    },
    /// `|−iΔ + κ/2 − iχ|` fell below the singularity threshold (lasing threshold).
    SingularResponse {
        modulus: f64,
    },
    DegenerateDenominator,
    GridTooCoarse,
    GridTooNarrow {
        p_max: f64,
        required: f64,
    },
    /// Total mechanical damping `Γ_opt + γ_m` is not positive.
    ParametricInstability {
        total_damping: f64,
    },
    NoConvergence {
        t_end: f64,
    },
    StepSizeUnderflow {
        t: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { field } => write!(f, "{field}: value is not finite"),
            Error::NonPositiveLinewidth { field } => {
                write!(f, "{field}: linewidth must be strictly positive")
            }
            Error::InputCouplingExceedsTotal { field } => {
                write!(f, "{field}: input coupling exceeds total decay rate")
            }
            Error::NegativePower { field } => write!(f, "{field}: power must be nonnegative"),
            Error::OutOfRange { field, constraint } => write!(f, "{field}: must satisfy {constraint}"),
            Error::SingularResponse { modulus } => write!(f, "singular cavity response (|denominator| = {modulus:e}); gain reaches loss"),
            Error::DegenerateDenominator => write!(f, "degenerate susceptibility denominator"),
            Error::GridTooCoarse => write!(f, "scan grid cannot bracket the feature"),
            Error::GridTooNarrow { p_max, required } => write!(f, "momentum grid half-width {p_max} is below the required {required}"),
            Error::ParametricInstability { total_damping } => {
                write!(f, "parametric instability: total mechanical damping {total_damping:e} rad/s is not positive")
            }
            Error::NoConvergence { t_end } => {
                write!(f, "no steady state reached by t = {t_end:e} s")
            }
            Error::StepSizeUnderflow { t } => write!(f, "step size underflow at t = {t:e} s"),
        }
    }
}

impl core::error::Error for Error {}
