//! Two-point linear calibration between image-plane distance and integer
//! lens-driver codes.

use serde::{Deserialize, Serialize};

use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::optics::{image_blur_diameter, Optics};
use crate::slicer::FocusPlan;

/// Code-space slack under which a value counts as an exact half-code tie.
/// Decimal calibration endpoints rarely land on a tie in binary floating
/// point; without it `511.5` arrives as `511.4999999999993`.
const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorCalibration {
    /// Image distance at `code_max` (macro end).
    pub lens_at_code_max: f64,
    /// Image distance at code 0 (infinity end).
    pub lens_at_code_min: f64,
    pub code_max: u32,
}

/// Result of mapping an image distance onto a code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeMapping {
    pub code: u32,
    /// Set when the input fell outside the calibrated span.
    pub clamped: bool,
}

impl ActuatorCalibration {
    pub fn new(lens_at_code_max: f64, lens_at_code_min: f64, code_max: u32) -> Result<Self> {
        let cal = ActuatorCalibration {
            lens_at_code_max,
            lens_at_code_min,
            code_max,
        };
        cal.validate()?;
        Ok(cal)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lens_at_code_min.is_finite() && self.lens_at_code_min > 0.0) {
            return Err(Error::domain(
                "lens_at_code_min",
                "must be a positive finite length",
            ));
        }
        if !(self.lens_at_code_max.is_finite() && self.lens_at_code_max > self.lens_at_code_min) {
            return Err(Error::domain(
                "lens_at_code_max",
                "must exceed lens_at_code_min",
            ));
        }
        if self.code_max < 1 {
            return Err(Error::domain("code_max", "must be at least 1"));
        }
        Ok(())
    }

    pub fn span(&self) -> f64 {
        self.lens_at_code_max - self.lens_at_code_min
    }

    /// Image-plane distance covered by one code.
    pub fn code_step(&self) -> f64 {
        self.span() / self.code_max as f64
    }

    /// A calibration spanning a plan's hyperfocal and near-limit image
    /// distances.
    pub fn spanning(lens_at_hyperfocal: f64, lens_at_near: f64, code_max: u32) -> Result<Self> {
        Self::new(lens_at_near, lens_at_hyperfocal, code_max)
    }
}

/// Nearest code for image distance `image`, ties away from zero. Distances
/// outside the calibrated span clamp to the nearer endpoint.
pub fn to_code(image: f64, cal: &ActuatorCalibration) -> Result<CodeMapping> {
    cal.validate()?;
    if !image.is_finite() {
        return Err(Error::domain(
            "image_distance",
            format!("must be finite, got {image}"),
        ));
    }
    if image <= cal.lens_at_code_min {
        return Ok(CodeMapping {
            code: 0,
            clamped: image < cal.lens_at_code_min,
        });
    }
    if image >= cal.lens_at_code_max {
        return Ok(CodeMapping {
            code: cal.code_max,
            clamped: image > cal.lens_at_code_max,
        });
    }
    let exact = cal.code_max as f64 * (image - cal.lens_at_code_min) / cal.span();
    let code = (exact + TIE_EPSILON).round().min(cal.code_max as f64) as u32;
    Ok(CodeMapping {
        code,
        clamped: false,
    })
}

pub fn from_code(code: u32, cal: &ActuatorCalibration) -> Result<f64> {
    cal.validate()?;
    if code > cal.code_max {
        return Err(Error::domain(
            "code",
            format!("{code} exceeds code_max {}", cal.code_max),
        ));
    }
    if code == cal.code_max {
        return Ok(cal.lens_at_code_max);
    }
    Ok(cal.lens_at_code_min + cal.span() * code as f64 / cal.code_max as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedSlice {
    pub step: i64,
    pub code: u32,
    pub clamped: bool,
    pub realized_lens_distance: f64,
    /// Object distance in focus at the realized lens position; infinite when
    /// the lens sits at or inside the focal length.
    pub realized_focus_distance: Distance,
    /// Blur of the slice's intended focus distance at the realized position.
    pub blur_at_focus: f64,
    /// True when quantization leaves the intended focus distance outside
    /// the realized depth of field.
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct QuantizationReport {
    pub slices: Vec<QuantizedSlice>,
    /// Pairs of neighbouring steps that map onto the same code.
    pub collisions: Vec<(i64, i64)>,
}

impl QuantizationReport {
    pub fn violations(&self) -> impl Iterator<Item = &QuantizedSlice> {
        self.slices.iter().filter(|s| s.violation)
    }

    pub fn is_clean(&self) -> bool {
        self.collisions.is_empty() && self.violations().next().is_none()
    }
}

/// Quantizes every slice of `plan` through `cal` and reports what the
/// driver would actually realize.
pub fn quantization_report(
    plan: &FocusPlan,
    cal: &ActuatorCalibration,
) -> Result<QuantizationReport> {
    cal.validate()?;
    if plan.slices.is_empty() {
        return Ok(QuantizationReport::default());
    }
    let optics = Optics::new(plan.spec)?;
    let f = optics.focal_length();
    let mut slices = Vec::with_capacity(plan.slices.len());
    for s in &plan.slices {
        let mapping = to_code(s.lens_distance, cal)?;
        let realized = from_code(mapping.code, cal)?;
        let realized_focus = if realized > f {
            optics.focus_for_lens(realized)?
        } else {
            Distance::Infinity
        };
        let blur = image_blur_diameter(&plan.spec, Distance::Finite(s.focus_distance), realized)?;
        slices.push(QuantizedSlice {
            step: s.step,
            code: mapping.code,
            clamped: mapping.clamped,
            realized_lens_distance: realized,
            realized_focus_distance: realized_focus,
            blur_at_focus: blur,
            violation: blur > plan.spec.coc,
        });
    }
    let collisions = slices
        .windows(2)
        .filter(|w| w[0].code == w[1].code)
        .map(|w| (w[0].step, w[1].step))
        .collect();
    Ok(QuantizationReport { slices, collisions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::LensSpec;
    use crate::slicer::slice_forward;
    use approx::assert_relative_eq;

    fn cal() -> ActuatorCalibration {
        ActuatorCalibration::new(27.78, 25.09, 1023).unwrap()
    }

    #[test]
    fn endpoints_map_to_extreme_codes() {
        let cal = cal();
        assert_eq!(
            to_code(27.78, &cal).unwrap(),
            CodeMapping {
                code: 1023,
                clamped: false
            }
        );
        assert_eq!(
            to_code(25.09, &cal).unwrap(),
            CodeMapping {
                code: 0,
                clamped: false
            }
        );
        assert_eq!(from_code(0, &cal).unwrap(), 25.09);
        assert_eq!(from_code(1023, &cal).unwrap(), 27.78);
    }

    #[test]
    fn half_code_rounds_away_from_zero() {
        // 1023 * 1.345 / 2.69 = 511.5
        assert_eq!(to_code(26.435, &cal()).unwrap().code, 512);
        assert_relative_eq!(from_code(512, &cal()).unwrap(), 26.4363, epsilon = 1e-4);
    }

    #[test]
    fn out_of_range_clamps_and_flags() {
        let cal = cal();
        assert_eq!(
            to_code(30.0, &cal).unwrap(),
            CodeMapping {
                code: 1023,
                clamped: true
            }
        );
        assert_eq!(
            to_code(25.0, &cal).unwrap(),
            CodeMapping {
                code: 0,
                clamped: true
            }
        );
        assert!(to_code(f64::NAN, &cal).is_err());
        assert!(from_code(1024, &cal).is_err());
    }

    #[test]
    fn invalid_calibrations() {
        assert!(ActuatorCalibration::new(25.0, 26.0, 1023).is_err());
        assert!(ActuatorCalibration::new(27.0, 0.0, 1023).is_err());
        assert!(ActuatorCalibration::new(27.0, 25.0, 0).is_err());
    }

    #[test]
    fn experiment_plan_quantizes_cleanly_at_ten_bits() {
        let plan = slice_forward(&LensSpec::new(25.0, 4.6, 0.02, 250.0).unwrap()).unwrap();
        let report = quantization_report(&plan, &cal()).unwrap();
        assert_eq!(report.slices.len(), 15);
        assert!(report.is_clean(), "{report:?}");
        assert!(report.slices.iter().all(|s| s.blur_at_focus < 0.002));
    }

    #[test]
    fn coarse_drivers_collide() {
        let plan = slice_forward(&LensSpec::new(25.0, 4.6, 0.02, 250.0).unwrap()).unwrap();
        // A 4-bit step (0.179 mm) is still finer than the closest slice
        // spacing (0.19 mm), so codes stay distinct.
        let four_bit = ActuatorCalibration::new(27.78, 25.09, 15).unwrap();
        let report = quantization_report(&plan, &four_bit).unwrap();
        assert!(report.collisions.is_empty());
        // Eight codes cannot hold fifteen positions.
        let three_bit = ActuatorCalibration::new(27.78, 25.09, 7).unwrap();
        let report = quantization_report(&plan, &three_bit).unwrap();
        assert!(!report.collisions.is_empty());
        assert!(!report.is_clean());
    }

    #[test]
    fn empty_plan_gives_empty_report() {
        let mut plan = slice_forward(&LensSpec::new(25.0, 4.6, 0.02, 250.0).unwrap()).unwrap();
        plan.slices.clear();
        assert_eq!(
            quantization_report(&plan, &cal()).unwrap(),
            QuantizationReport::default()
        );
    }
}
