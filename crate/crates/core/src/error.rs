//! Error types shared by every analysis stage.

use thiserror::Error;

/// Location of a problem inside region DSL source text (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourcePos {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for SourcePos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// The region text does not follow the grammar.
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: SourcePos, message: String },

    /// The region text parses but describes an invalid region.
    #[error("semantic error at {pos}: {message}")]
    Semantic { pos: SourcePos, message: String },

    /// A grid, resolution, or sampling parameter is out of range.
    #[error("invalid resolution: {0}")]
    Resolution(String),

    /// An operation received inputs whose shapes or values are inconsistent.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested Fourier order cannot be represented on the grid.
    #[error("spectrum order {requested} exceeds the grid limit {limit}")]
    SpectrumOrder { requested: usize, limit: usize },

    /// The high-frequency tail never drops below the requested threshold.
    #[error("tail bound {threshold:.3e} unreachable: best tail {best_tail:.3e} at the largest resolvable order N = {max_order}")]
    TailUnreachable {
        threshold: f64,
        best_tail: f64,
        max_order: usize,
    },

    /// Exhaustive search was requested on a grid that is too large.
    #[error("exhaustive search needs n <= {limit}, got n = {n}")]
    TooLarge { n: usize, limit: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {message}")]
    Image { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
