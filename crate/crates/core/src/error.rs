use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("identically zero operator: G({0},{0})")]
    ZeroOperator(u8),
    #[error("point index {index} out of range (point count {n})")]
    PointOutOfRange { index: u8, n: usize },
    #[error("degree/coverage violation: point {0} is never used")]
    UnusedPoint(usize),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("missing derivative symbol f{0}{1} in jet")]
    MissingSymbol(u8, u8),
    #[error("unbound variable DI{0}")]
    Unbound(u32),
    #[error("singular linear map (ad - bc = 0)")]
    SingularMap,
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("chain must be G-only, found {0} F operators")]
    NotGOnly(usize),
    #[error("invalid kernel: {0}")]
    Kernel(String),
    #[error("kernel footprint {size}x{size} at ({x},{y}) overflows a {w}x{h} patch")]
    Footprint { size: usize, x: usize, y: usize, w: usize, h: usize },
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("catalog entry {id}: {msg}")]
    Catalog { id: u32, msg: String },
    #[error("invalid set request: {0}")]
    Set(String),
    #[error("image: {0}")]
    Image(String),
    #[error("class ({k1},{k2}) instance {inst}: {msg}")]
    Patch { k1: usize, k2: usize, inst: usize, msg: String },
    #[error("database: {0}")]
    Database(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
