use alloc::string::String;
use core::fmt;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes disagree.
    Dimension {
        expected: usize,
        found: usize,
    },
    /// NaN or infinity where a finite value is required.
    NonFinite,
    /// Jacobi sweeps hit the cap without meeting the off-diagonal tolerance.
    NoConvergence {
        dim: usize,
    },
    /// Every eigenvalue of the Gram matrix fell below the truncation threshold.
    DegenerateGram,
    NoNonIdentityPermutation,
    GroupCapExceeded {
        cap: usize,
        partial: usize,
    },
    InvalidPermutation,
    ZeroTrace,
    ZeroMatrix,
    NotSkewHermitian,
    InsufficientSnapshots {
        needed: usize,
        found: usize,
    },
    UnstableAr,
    Divergence {
        step: f64,
    },
    NotDivisible {
        len: usize,
        block: usize,
    },
    ZeroOutputs,
    EmptyBasis,
    OrbitSizeBias,
    Infeasible(String),
    InvalidParameter(String),
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonFinite => f.write_str("non-finite value in input"),
            Error::NoConvergence { dim } => {
                write!(f, "Hermitian eigensolver did not converge for a {dim}x{dim} matrix")
            }
            Error::DegenerateGram => f.write_str("degenerate Gram matrix: every eigenvalue below tolerance"),
            Error::NoNonIdentityPermutation => f.write_str("no non-identity permutation exists in dimension 1"),
            Error::GroupCapExceeded { cap, partial } => {
                write!(f, "group order cap exceeded: {partial} elements found, cap {cap}")
            }
            Error::InvalidPermutation => f.write_str("map is not a bijection"),
            Error::ZeroTrace => f.write_str("matrix has zero trace"),
            Error::ZeroMatrix => f.write_str("matrix is zero"),
            Error::NotSkewHermitian => f.write_str("matrix is not skew-Hermitian"),
            Error::InsufficientSnapshots { needed, found } => {
                if *needed == 2 {
                    write!(f, "cross-validation requires at least two snapshots (found {found})")
                } else {
                    write!(f, "need at least {needed} snapshots, found {found}")
                }
            }
            Error::UnstableAr => f.write_str("unstable AR coefficients: a pole lies on or outside the unit circle"),
            Error::Divergence { step } => write!(f, "equalizer divergence with step size {step}"),
            Error::NotDivisible { len, block } => {
                write!(f, "stream length {len} is not divisible by {block}; truncate to {}", len - len % block)
            }
            Error::ZeroOutputs => f.write_str("all equalizer outputs are zero"),
            Error::EmptyBasis => f.write_str("generator basis is empty after dropping dependent members"),
            Error::OrbitSizeBias => f.write_str(
                "psi criterion compares groups of different order; orbit-size bias makes the comparison invalid",
            ),
            Error::Infeasible(msg) => write!(f, "infeasible request: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
