use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LabError {
    #[error("sphere parameter k = {0} outside supported range 1..=3")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("point is off the unit sphere (|p| - 1 = {deviation:e})")]
    OffSphere { deviation: f64 },

    #[error("vector is not tangent at base point (<w, p> = {inner:e})")]
    NotTangent { inner: f64 },

    #[error("vector is not unit length (|u| = {norm})")]
    NotUnit { norm: f64 },

    #[error("frame completion found only {found} of {needed} directions")]
    DegenerateFrame { found: usize, needed: usize },

    #[error("finite-difference derivative is not smooth (h vs h/2 discrepancy {discrepancy:e})")]
    NonSmooth { discrepancy: f64 },

    #[error("field '{label}' is degenerate at {point:?}: {reason}")]
    DegenerateField {
        label: String,
        point: Vec<f64>,
        reason: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expression error at line {line}: {message}")]
    Expression { line: usize, message: String },

    #[error("integrand failed at node {coords:?}: {source}")]
    AtNode {
        coords: Vec<f64>,
        #[source]
        source: Box<LabError>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl LabError {
    pub(crate) fn at_node(coords: &[f64], source: LabError) -> Self {
        match source {
            // keep the innermost location
            e @ LabError::AtNode { .. } => e,
            e => LabError::AtNode {
                coords: coords.to_vec(),
                source: Box::new(e),
            },
        }
    }
}
