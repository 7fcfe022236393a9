use std::fmt;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// `a` has no inverse modulo `q`.
    NonInvertible { a: i64, q: u64 },
    /// Moduli that were required to be coprime are not.
    NonCoprime { a: u64, b: u64 },
    /// 64-bit checked arithmetic overflowed.
    Range(&'static str),
    /// A rational phase whose denominator vanishes identically mod p.
    DegenerateDenominator { p: u64 },
    /// A pair (a, b) that is (0, 0) modulo some prime of the modulus.
    MalformedPoint { p: u64 },
    /// A precondition of an operation does not hold.
    Precondition(String),
    /// Unknown named object (cutoff shape, claim set, audit family, ...).
    Unknown { kind: &'static str, name: String },
    /// Malformed textual input (claims file, grid file, CLI flag, ...).
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonInvertible { a, q } => write!(f, "{a} is not invertible mod {q}"),
            Error::NonCoprime { a, b } => write!(f, "moduli {a} and {b} are not coprime"),
            Error::Range(what) => write!(f, "64-bit overflow in {what}"),
            Error::DegenerateDenominator { p } => {
                write!(f, "denominator vanishes identically mod {p}")
            }
            Error::MalformedPoint { p } => {
                write!(f, "point reduces to (0, 0) mod {p}")
            }
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Unknown { kind, name } => write!(f, "unknown {kind}: {name}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
