use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    UnknownWorld(String),
    DuplicateWorld(String),
    TooManyWorlds(usize),
    /// The generated order has a cycle through the two named worlds.
    NotAntisymmetric(String, String),
    NotAnUpset,
    NotRooted,
    NonMonotoneColoring { lower: String, upper: String },
    UnboundVariable(String),
    VarsMismatch,
    Syntax { pos: usize, msg: String },
    CapExceeded { what: &'static str, limit: u64 },
    InvalidParameter(String),
    UnknownName(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownWorld(w) => write!(f, "unknown world `{w}`"),
            Error::DuplicateWorld(w) => write!(f, "duplicate world `{w}`"),
            Error::TooManyWorlds(n) => {
                write!(f, "{n} worlds exceeds the supported maximum of {}", crate::MAX_WORLDS)
            }
            Error::NotAntisymmetric(a, b) => {
                write!(f, "order is not antisymmetric: `{a}` and `{b}` lie on a cycle")
            }
            Error::NotAnUpset => f.write_str("set is not an upset of the poset"),
            Error::NotRooted => f.write_str("poset has no least element"),
            Error::NonMonotoneColoring { lower, upper } => {
                write!(f, "coloring is not monotone: `{lower}` <= `{upper}` but its color is not included")
            }
            Error::UnboundVariable(v) => write!(f, "variable `{v}` is not bound by the model"),
            Error::VarsMismatch => f.write_str("models are over different variable lists"),
            Error::Syntax { pos, msg } => write!(f, "syntax error at {pos}: {msg}"),
            Error::CapExceeded { what, limit } => write!(f, "{what} exceeds cap {limit}"),
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::UnknownName(n) => write!(f, "unknown name `{n}`"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
