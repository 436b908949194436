use std::fmt;

use thiserror::Error;

use crate::entropy::TheoremReport;
use crate::spectral::SpectralResult;

/// Line/column of a token in a `.kss` source (both 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Coarse classification used to map errors onto CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input: syntax, digit ranges, dead states, bad files.
    Spec,
    /// A configured size cap was hit.
    Budget,
    /// The spectral iteration did not certify the requested tolerance.
    Tolerance,
    /// A verification check found a violated inequality.
    Verification,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("the described set is empty")]
    EmptySet,
    #[error("alphabet mismatch: base {left_k} dim {left_d} vs base {right_k} dim {right_d}")]
    BaseMismatch {
        left_k: u32,
        left_d: u32,
        right_k: u32,
        right_d: u32,
    },
    #[error("unsupported alphabet: base {k}, dimension {d}")]
    UnsupportedAlphabet { k: u64, d: u64 },
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("{pos}: syntax error: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    #[error("{pos}: digit {digit} out of range for base {k}")]
    DigitRange { pos: Pos, digit: String, k: u32 },
    #[error("{pos}: tuple has {found} entries, dimension is {expected}")]
    ArityMismatch {
        pos: Pos,
        expected: usize,
        found: usize,
    },
    #[error("{pos}: state `{name}` declared twice")]
    DuplicateState { pos: Pos, name: String },
    #[error("{pos}: no initial state")]
    NoInitial { pos: Pos },
    #[error("{pos}: state `{name}` is a second initial state")]
    MultipleInitial { pos: Pos, name: String },
    #[error("{pos}: unknown state `{name}`")]
    UnknownState { pos: Pos, name: String },
    #[error("{pos}: `allow` cannot be mixed with explicit states and edges")]
    MixedForms { pos: Pos },
    #[error("{pos}: {message}")]
    UnsupportedHeader { pos: Pos, message: String },
    #[error("{pos}: state `{name}` is dead (no infinite path leaves it)")]
    DeadState { pos: Pos, name: String },

    #[error("kernel exceeded {cap} elements")]
    KernelOverflow { cap: usize },
    #[error("base {base} exceeds the supported maximum {max}")]
    BaseOverflow { base: u64, max: u32 },
    #[error("path budget of {cap} cubes exceeded")]
    PathBudgetExceeded { cap: usize },
    #[error("box budget of {cap} cubes exceeded")]
    BudgetExceeded { cap: usize },

    #[error("tolerance not reached after {} iterations (width {})", .0.iterations, .0.width_f64())]
    ToleranceNotReached(Box<SpectralResult>),
    #[error("verification failed: {}", .0.violations.join("; "))]
    VerificationFailed(Box<TheoremReport>),

    #[error("unknown built-in set `{0}`")]
    UnknownSet(String),
    #[error("element index {index} out of range ({n} elements)")]
    InvalidElement { index: usize, n: usize },
    #[error("rendering dimension {d} requires a slice fixing {} coordinates", .d.saturating_sub(2))]
    UnsupportedDimension { d: u32 },
    #[error("resolution {resolution} is not a multiple of the grid size {grid}")]
    ResolutionMismatch { resolution: u64, grid: u64 },
    #[error("malformed kernel file: {0}")]
    InvalidKernel(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::KernelOverflow { .. }
            | Error::BaseOverflow { .. }
            | Error::PathBudgetExceeded { .. }
            | Error::BudgetExceeded { .. } => ErrorKind::Budget,
            Error::ToleranceNotReached(_) => ErrorKind::Tolerance,
            Error::VerificationFailed(_) => ErrorKind::Verification,
            _ => ErrorKind::Spec,
        }
    }

    /// Source position for errors raised while reading `.kss` text.
    pub fn pos(&self) -> Option<Pos> {
        match self {
            Error::Syntax { pos, .. }
            | Error::DigitRange { pos, .. }
            | Error::ArityMismatch { pos, .. }
            | Error::DuplicateState { pos, .. }
            | Error::NoInitial { pos }
            | Error::MultipleInitial { pos, .. }
            | Error::UnknownState { pos, .. }
            | Error::MixedForms { pos }
            | Error::UnsupportedHeader { pos, .. }
            | Error::DeadState { pos, .. } => Some(*pos),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
