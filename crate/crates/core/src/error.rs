use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input parameter is outside its admissible domain.
    #[error("invalid {field}: {reason}")]
    ParameterDomain { field: &'static str, reason: String },

    /// The object sits at or inside the focal point, so no real image exists.
    #[error("object distance {object_mm} mm is not beyond the focal length {focal_mm} mm")]
    FocusDomain { object_mm: f64, focal_mm: f64 },

    #[error("image distance {image_mm} mm is not beyond the focal length {focal_mm} mm")]
    ImageDomain { image_mm: f64, focal_mm: f64 },

    /// The requested near limit is only reached as the focus distance goes to infinity.
    #[error("near limit {near_mm} mm has no finite focus distance (must be below {bound_mm} mm)")]
    NoFiniteFocus { near_mm: f64, bound_mm: f64 },

    #[error("invalid plan: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("slicing did not terminate within {0} slices")]
    TooManySlices(usize),
}

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::ParameterDomain {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
