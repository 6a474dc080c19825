//! Focus planning for camera modules.
//!
//! Given a lens (focal length, f-number, acceptable circle of confusion and a
//! practical near focus limit), [`slice_forward`] computes the smallest set of
//! focus distances whose depth-of-field slices tile the range from the near
//! limit out to infinity (or a finite far target), together with the
//! thin-lens image distance the actuator must reach for each. The same plan
//! serves as the coarse grid of a contrast autofocus search and as the frame
//! list of a focus bracket.
//!
//! - [`optics`]: thin-lens, hyperfocal and depth-of-field formulas plus the
//!   blur-circle model used to check them.
//! - [`slicer`]: forward and backward slicing and coverage verification.
//! - [`actuator`]: two-point linear mapping between image distance and
//!   driver codes.
//! - [`af`]: a deterministic coarse-plus-fine autofocus simulator.
//! - [`io`]: CSV and JSON encodings of plans, calibrations and traces.

pub mod actuator;
pub mod af;
pub mod distance;
pub mod error;
pub mod io;
pub mod optics;
pub mod slicer;

pub use actuator::{
    from_code, quantization_report, to_code, ActuatorCalibration, CodeMapping, QuantizationReport,
    QuantizedSlice,
};
pub use af::{
    coarse_search, fine_search, sharpness, simulate, CoarseOutcome, Evaluation, SceneProbe,
    SearchTrace, SimulatedScene, Simulation,
};
pub use distance::Distance;
pub use error::{Error, Result};
pub use optics::{
    blur_diameter, coc_from_sensor, hyperfocal, image_blur_diameter, image_to_object,
    object_to_image, DerivedOptics, ImageDistance, LensSpec, Optics,
};
pub use slicer::{
    slice_backward, slice_forward, verify_coverage, CoverageReport, Direction, FocusPlan,
    FocusSlice,
};
