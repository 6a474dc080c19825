//! Closed-form thin-lens optics: hyperfocal distance, depth-of-field limits
//! and their inverses, thin-lens conversions, and the geometric blur circle.
//!
//! All lengths are millimeters. The hyperfocal distance uses the
//! `H = f^2 / (N c) + f` convention; with it the limit formulas place the
//! blur circle at exactly `c` on both depth-of-field boundaries.

use serde::{Deserialize, Serialize};

use crate::distance::Distance;
use crate::error::{Error, Result};

/// Physical parameters of a camera module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensSpec {
    pub focal_length: f64,
    pub f_number: f64,
    /// Acceptable circle-of-confusion diameter.
    pub coc: f64,
    /// Nearest practically focusable object distance.
    pub near_focus_limit: f64,
    /// Distance beyond which coverage is not required.
    #[serde(default = "infinity")]
    pub far_target: Distance,
}

fn infinity() -> Distance {
    Distance::Infinity
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            field,
            format!("must be a positive finite number, got {value}"),
        ))
    }
}

impl LensSpec {
    pub fn new(focal_length: f64, f_number: f64, coc: f64, near_focus_limit: f64) -> Result<Self> {
        let spec = LensSpec {
            focal_length,
            f_number,
            coc,
            near_focus_limit,
            far_target: Distance::Infinity,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_far_target(mut self, far_target: Distance) -> Result<Self> {
        self.far_target = far_target;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_aperture()?;
        positive("near_focus_limit", self.near_focus_limit)?;
        if self.near_focus_limit <= self.focal_length {
            return Err(Error::domain(
                "near_focus_limit",
                "near focus limit must exceed focal length",
            ));
        }
        if let Distance::Finite(far) = self.far_target {
            positive("far_target", far)?;
            if far <= self.near_focus_limit {
                return Err(Error::domain(
                    "far_target",
                    "far target must exceed near focus limit",
                ));
            }
        }
        Ok(())
    }

    /// Checks only the fields the hyperfocal distance depends on.
    fn validate_aperture(&self) -> Result<()> {
        positive("focal_length", self.focal_length)?;
        positive("f_number", self.f_number)?;
        positive("coc", self.coc)
    }
}

/// Values derived once per spec and reported alongside every plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedOptics {
    pub hyperfocal: f64,
    pub lens_at_near: f64,
    pub lens_at_hyperfocal: f64,
}

/// Hyperfocal distance `f^2 / (N c) + f`.
pub fn hyperfocal(spec: &LensSpec) -> Result<f64> {
    spec.validate_aperture()?;
    let f = spec.focal_length;
    Ok(f * f / (spec.f_number * spec.coc) + f)
}

/// Circle of confusion from the sensor diagonal and a viewing constant
/// (commonly 1730).
pub fn coc_from_sensor(sensor_diagonal: f64, k: f64) -> Result<f64> {
    positive("sensor_diagonal", sensor_diagonal)?;
    positive("k", k)?;
    Ok(sensor_diagonal / k)
}

/// Lens-to-sensor distance, stored as the focal length plus the extension
/// past it.
///
/// Far objects image just behind the focal plane, where `d_i - f` is many
/// orders of magnitude below `f`. Keeping the extension separately keeps the
/// thin-lens conversion exactly invertible there; a bare millimeter value
/// would round most of it away.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageDistance {
    focal_length: f64,
    extension: f64,
}

impl ImageDistance {
    /// Image distance from an absolute lens-to-sensor length, which must lie
    /// beyond the focal length.
    pub fn from_mm(image: f64, focal_length: f64) -> Result<Self> {
        positive("focal_length", focal_length)?;
        if image.is_finite() && image > focal_length {
            Ok(ImageDistance {
                focal_length,
                extension: image - focal_length,
            })
        } else {
            Err(Error::ImageDomain {
                image_mm: image,
                focal_mm: focal_length,
            })
        }
    }

    pub fn mm(&self) -> f64 {
        self.focal_length + self.extension
    }

    /// Distance past the focal plane; zero for an object at infinity.
    pub fn extension(&self) -> f64 {
        self.extension
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }
}

/// Thin-lens image distance for an object at `object`. An object at
/// infinity images at the focal plane.
pub fn object_to_image(object: Distance, focal_length: f64) -> Result<ImageDistance> {
    positive("focal_length", focal_length)?;
    let f = focal_length;
    match object {
        Distance::Infinity => Ok(ImageDistance {
            focal_length: f,
            extension: 0.0,
        }),
        Distance::Finite(d) if d > f => Ok(ImageDistance {
            focal_length: f,
            extension: f * f / (d - f),
        }),
        Distance::Finite(d) => Err(Error::FocusDomain {
            object_mm: d,
            focal_mm: f,
        }),
    }
}

/// Inverse of [`object_to_image`]: `d_o = f + f^2 / (d_i - f)`.
pub fn image_to_object(image: ImageDistance) -> Distance {
    let f = image.focal_length;
    if image.extension == 0.0 {
        Distance::Infinity
    } else {
        Distance::Finite(f + f * f / image.extension)
    }
}

/// Depth-of-field calculator bound to one validated [`LensSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optics {
    spec: LensSpec,
    hyperfocal: f64,
}

impl Optics {
    pub fn new(spec: LensSpec) -> Result<Self> {
        spec.validate()?;
        let hyperfocal = hyperfocal(&spec)?;
        Ok(Optics { spec, hyperfocal })
    }

    pub fn spec(&self) -> &LensSpec {
        &self.spec
    }

    pub fn focal_length(&self) -> f64 {
        self.spec.focal_length
    }

    pub fn hyperfocal(&self) -> f64 {
        self.hyperfocal
    }

    pub fn derived(&self) -> DerivedOptics {
        let f = self.focal_length();
        let lens = |d: f64| f + f * f / (d - f);
        DerivedOptics {
            hyperfocal: self.hyperfocal,
            lens_at_near: lens(self.spec.near_focus_limit),
            lens_at_hyperfocal: lens(self.hyperfocal),
        }
    }

    fn check_focus(&self, focus: f64) -> Result<()> {
        if focus.is_finite() && focus > self.focal_length() {
            Ok(())
        } else {
            Err(Error::FocusDomain {
                object_mm: focus,
                focal_mm: self.focal_length(),
            })
        }
    }

    /// Near limit of acceptable sharpness when focused at `focus`.
    pub fn near_limit(&self, focus: f64) -> Result<f64> {
        self.check_focus(focus)?;
        let (h, f) = (self.hyperfocal, self.focal_length());
        Ok(focus * (h - f) / (h + focus - 2.0 * f))
    }

    /// Far limit of acceptable sharpness; infinite once `focus` reaches the
    /// hyperfocal distance.
    pub fn far_limit(&self, focus: f64) -> Result<Distance> {
        self.check_focus(focus)?;
        let (h, f) = (self.hyperfocal, self.focal_length());
        if focus >= h {
            Ok(Distance::Infinity)
        } else {
            Ok(Distance::Finite(focus * (h - f) / (h - focus)))
        }
    }

    /// Depth of field as the difference of the two limits.
    pub fn dof(&self, focus: f64) -> Result<Distance> {
        let near = self.near_limit(focus)?;
        Ok(match self.far_limit(focus)? {
            Distance::Finite(far) => Distance::Finite(far - near),
            Distance::Infinity => Distance::Infinity,
        })
    }

    /// Focus distance whose near limit is `near`. Defined for
    /// `0 < near < H - f`.
    pub fn object_from_near_limit(&self, near: f64) -> Result<f64> {
        positive("near_limit", near)?;
        let (h, f) = (self.hyperfocal, self.focal_length());
        let denom = h - f - near;
        if denom <= 0.0 {
            return Err(Error::NoFiniteFocus {
                near_mm: near,
                bound_mm: h - f,
            });
        }
        Ok(near * (h - 2.0 * f) / denom)
    }

    /// Focus distance whose far limit is `far`; the hyperfocal distance for
    /// an infinite far limit.
    pub fn object_from_far_limit(&self, far: Distance) -> Result<f64> {
        let (h, f) = (self.hyperfocal, self.focal_length());
        match far {
            Distance::Infinity => Ok(h),
            Distance::Finite(far) => {
                positive("far_limit", far)?;
                Ok(far * h / (h - f + far))
            }
        }
    }

    /// Diameter of the defocus blur disc on the image plane for an object at
    /// `object` while the lens is focused at `focus`:
    /// `f^2 |d - d_o| / (N d (d_o - f))`.
    ///
    /// This is the geometric blur-circle model, independent of the limit
    /// formulas above; it is used to check them.
    pub fn blur_diameter(&self, object: Distance, focus: f64) -> Result<f64> {
        blur_diameter(&self.spec, object, focus)
    }

    /// Lens-to-sensor distance in millimeters that focuses `object`.
    pub fn lens_distance(&self, object: Distance) -> Result<f64> {
        Ok(object_to_image(object, self.focal_length())?.mm())
    }

    /// Object distance in focus with the sensor `image` millimeters behind
    /// the lens.
    pub fn focus_for_lens(&self, image: f64) -> Result<Distance> {
        Ok(image_to_object(ImageDistance::from_mm(
            image,
            self.focal_length(),
        )?))
    }
}

/// Free-standing form of [`Optics::blur_diameter`]. An object at infinity
/// gives the limiting value `f^2 / (N (d_o - f))`.
pub fn blur_diameter(spec: &LensSpec, object: Distance, focus: f64) -> Result<f64> {
    let (f, n) = (spec.focal_length, spec.f_number);
    positive("focal_length", f)?;
    positive("f_number", n)?;
    if !(focus.is_finite() && focus > f) {
        return Err(Error::FocusDomain {
            object_mm: focus,
            focal_mm: f,
        });
    }
    match object {
        Distance::Infinity => Ok(f * f / (n * (focus - f))),
        Distance::Finite(d) => {
            positive("object", d)?;
            Ok(f * f * (d - focus).abs() / (n * d * (focus - f)))
        }
    }
}

/// Blur circle for an object at `object` with the sensor at image distance
/// `image`: the aperture diameter `f / N` scaled by the relative image-plane
/// defocus. Agrees with [`blur_diameter`] whenever `image > f`, and stays
/// defined for a lens parked at or inside the focal length.
pub fn image_blur_diameter(spec: &LensSpec, object: Distance, image: f64) -> Result<f64> {
    let (f, n) = (spec.focal_length, spec.f_number);
    positive("image_distance", image)?;
    let sharp = object_to_image(object, f)?;
    Ok(f / n * (image - sharp.mm()).abs() / sharp.mm())
}
