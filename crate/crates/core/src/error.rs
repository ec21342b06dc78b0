use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown primitive `{name}` at offset {offset}")]
    UnknownPrimitive { name: String, offset: usize },

    #[error("`{name}` expects {expected} argument(s), got {got} (offset {offset})")]
    Arity {
        name: String,
        expected: String,
        got: usize,
        offset: usize,
    },

    #[error("evaluation failed: {0}")]
    Eval(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("derivative order {requested} exceeds closure order {closure}")]
    ClosureExceeded { requested: u32, closure: u32 },

    #[error("invalid cone: {0}")]
    Cone(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
