//! Partitioning of the focus range into adjacent depth-of-field slices.
//!
//! Forward slicing starts at the practical near limit and chains
//! `far_limit -> object_from_near_limit` until the next focus distance would
//! pass the hyperfocal distance (or the distance whose far limit reaches a
//! finite far target); that last slice is clamped, so any overlap lands at
//! the far end. Backward slicing runs the mirror chain from the far end and
//! clamps at the near focus limit instead.

use serde::{Deserialize, Serialize};

use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::optics::{DerivedOptics, LensSpec, Optics};

/// Hard guard against runaway loops. Slice counts grow like
/// `(d_i(S_n) - f) / (2 N c)`, so realistic modules stay far below this.
pub const MAX_SLICES: usize = 1_000_000;

/// Step number given to the slice focused at the near focus limit itself in
/// a forward plan. Iterated slices are numbered from 0.
pub const PREAMBLE_STEP: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    NearToFar,
    FarToNear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusSlice {
    pub step: i64,
    #[serde(rename = "focus_distance_mm")]
    pub focus_distance: f64,
    #[serde(rename = "near_limit_mm")]
    pub near: f64,
    #[serde(rename = "far_limit_mm")]
    pub far: Distance,
    #[serde(rename = "lens_distance_mm")]
    pub lens_distance: f64,
}

impl FocusSlice {
    pub fn contains(&self, object: f64) -> bool {
        self.near <= object && Distance::Finite(object) <= self.far
    }

    pub fn is_preamble(&self) -> bool {
        self.step == PREAMBLE_STEP
    }
}

/// Ordered, gap-free sequence of slices, sorted by increasing focus distance
/// regardless of the direction it was generated in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusPlan {
    pub spec: LensSpec,
    pub derived: DerivedOptics,
    pub direction: Direction,
    pub slices: Vec<FocusSlice>,
}

impl FocusPlan {
    /// Number of slices produced by the iteration, excluding the preamble.
    pub fn iterated_count(&self) -> usize {
        self.slices.iter().filter(|s| !s.is_preamble()).count()
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// Checks the structural invariants of the plan. Adjacency is left to
    /// [`verify_coverage`], which reports gaps as coverage failures.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let optics = match Optics::new(self.spec) {
            Ok(o) => Some(o),
            Err(e) => {
                problems.push(format!("spec: {e}"));
                None
            }
        };
        if self.slices.is_empty() {
            problems.push("plan has no slices".to_string());
        }
        for s in &self.slices {
            if !(s.near < s.focus_distance && Distance::Finite(s.focus_distance) < s.far) {
                problems.push(format!(
                    "step {}: limits {} < {} < {} out of order",
                    s.step, s.near, s.focus_distance, s.far
                ));
            }
            if let Some(o) = &optics {
                match o.lens_distance(Distance::Finite(s.focus_distance)) {
                    Ok(lens) if ((lens - s.lens_distance) / lens).abs() <= 1e-9 => {}
                    Ok(lens) => problems.push(format!(
                        "step {}: lens distance {} disagrees with thin-lens value {lens}",
                        s.step, s.lens_distance
                    )),
                    Err(e) => problems.push(format!("step {}: {e}", s.step)),
                }
            }
        }
        for pair in self.slices.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.step >= b.step {
                problems.push(format!("steps {} and {} not increasing", a.step, b.step));
            }
            if a.focus_distance >= b.focus_distance {
                problems.push(format!("focus distance not increasing at step {}", b.step));
            }
            if a.lens_distance <= b.lens_distance {
                problems.push(format!("lens distance not decreasing at step {}", b.step));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

struct SliceBuilder {
    optics: Optics,
}

impl SliceBuilder {
    fn slice(&self, step: i64, focus: f64, near: f64, far: Distance) -> Result<FocusSlice> {
        Ok(FocusSlice {
            step,
            focus_distance: focus,
            near,
            far,
            lens_distance: self.optics.lens_distance(Distance::Finite(focus))?,
        })
    }

    /// A slice whose limits are computed from its own focus distance.
    fn standalone(&self, step: i64, focus: f64) -> Result<FocusSlice> {
        let near = self.optics.near_limit(focus)?;
        let far = self.optics.far_limit(focus)?;
        self.slice(step, focus, near, far)
    }

    fn plan(&self, direction: Direction, slices: Vec<FocusSlice>) -> FocusPlan {
        FocusPlan {
            spec: *self.optics.spec(),
            derived: self.optics.derived(),
            direction,
            slices,
        }
    }
}

/// Slices from the near focus limit towards the far target.
pub fn slice_forward(spec: &LensSpec) -> Result<FocusPlan> {
    let optics = Optics::new(*spec)?;
    let builder = SliceBuilder { optics };
    let near_focus = spec.near_focus_limit;
    // Smallest focus distance whose far limit reaches the far target.
    let clamp = optics.object_from_far_limit(spec.far_target)?;

    if near_focus >= clamp {
        let only = builder.standalone(0, clamp)?;
        return Ok(builder.plan(Direction::NearToFar, vec![only]));
    }

    let preamble = builder.standalone(PREAMBLE_STEP, near_focus)?;
    let mut prev_far = preamble.far;
    let mut slices = vec![preamble];
    let bound = optics.hyperfocal() - optics.focal_length();

    for step in 0.. {
        if slices.len() > MAX_SLICES {
            return Err(Error::TooManySlices(MAX_SLICES));
        }
        let Distance::Finite(near) = prev_far else {
            break;
        };
        if prev_far >= spec.far_target {
            break;
        }
        let next = if near < bound {
            optics.object_from_near_limit(near)?
        } else {
            f64::INFINITY
        };
        if next >= clamp {
            slices.push(builder.standalone(step, clamp)?);
            break;
        }
        let far = optics.far_limit(next)?;
        slices.push(builder.slice(step, next, near, far)?);
        prev_far = far;
    }

    Ok(builder.plan(Direction::NearToFar, slices))
}

/// Slices from the far target back towards the near focus limit. The result
/// is re-sorted into increasing focus distance and numbered from 0.
pub fn slice_backward(spec: &LensSpec) -> Result<FocusPlan> {
    let optics = Optics::new(*spec)?;
    let builder = SliceBuilder { optics };
    let near_focus = spec.near_focus_limit;
    let first = optics.object_from_far_limit(spec.far_target)?;

    if near_focus >= first {
        let only = builder.standalone(0, first)?;
        return Ok(builder.plan(Direction::FarToNear, vec![only]));
    }

    let first = builder.standalone(0, first)?;
    let mut cur_near = first.near;
    let mut slices = vec![first];

    loop {
        if slices.len() > MAX_SLICES {
            return Err(Error::TooManySlices(MAX_SLICES));
        }
        let next = optics.object_from_far_limit(Distance::Finite(cur_near))?;
        if next <= near_focus {
            slices.push(builder.standalone(0, near_focus)?);
            break;
        }
        let near = optics.near_limit(next)?;
        slices.push(builder.slice(0, next, near, Distance::Finite(cur_near))?);
        cur_near = near;
    }

    slices.reverse();
    for (i, s) in slices.iter_mut().enumerate() {
        s.step = i as i64;
    }
    Ok(builder.plan(Direction::FarToNear, slices))
}

/// Result of sweeping the blur oracle across a plan's range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub passed: bool,
    pub coc: f64,
    /// Largest best-slice blur seen over all sampled distances.
    pub max_blur: f64,
    pub worst_distance: Distance,
    pub samples: usize,
    /// Non-fatal observations, such as stored limits that leave a gap.
    pub warnings: Vec<String>,
}

/// Relative slack allowed on `c` when judging coverage.
pub const COVERAGE_TOLERANCE: f64 = 1e-9;

/// Far end of the sampled tail when a plan extends to infinity, as a
/// multiple of the hyperfocal distance. Infinity itself is always checked.
const TAIL_FACTOR: f64 = 1e6;

/// Sweeps log-spaced object distances across the plan's range and checks
/// that at every one of them some slice keeps the blur circle within `c`.
///
/// Sampling runs between every pair of consecutive stored limits, so a
/// missing slice still gets sampled through the gap it leaves.
pub fn verify_coverage(plan: &FocusPlan, samples_per_slice: usize) -> Result<CoverageReport> {
    if samples_per_slice == 0 {
        return Err(Error::domain("samples_per_slice", "must be positive"));
    }
    plan.validate()?;
    let optics = Optics::new(plan.spec)?;
    let coc = plan.spec.coc;
    let focuses: Vec<f64> = plan.slices.iter().map(|s| s.focus_distance).collect();

    let mut warnings = Vec::new();
    for pair in plan.slices.windows(2) {
        if Distance::Finite(pair[1].near) > pair[0].far {
            warnings.push(format!(
                "gap between step {} (far {}) and step {} (near {})",
                pair[0].step, pair[0].far, pair[1].step, pair[1].near
            ));
        }
    }

    let mut bounds: Vec<f64> = plan
        .slices
        .iter()
        .flat_map(|s| [Some(s.near), s.far.finite()])
        .flatten()
        .collect();
    let infinite_tail = plan.slices.iter().any(|s| s.far.is_infinite());
    if infinite_tail {
        bounds.push(optics.hyperfocal() * TAIL_FACTOR);
    }
    bounds.sort_by(f64::total_cmp);
    bounds.dedup();

    let mut max_blur = 0.0_f64;
    let mut worst = Distance::Finite(bounds[0]);
    let mut samples = 0;
    let mut probe = |d: Distance| -> Result<()> {
        let b = best_blur(&optics, &focuses, d)?;
        samples += 1;
        if b > max_blur {
            max_blur = b;
            worst = d;
        }
        Ok(())
    };

    if bounds.len() == 1 {
        probe(Distance::Finite(bounds[0]))?;
    }
    for pair in bounds.windows(2) {
        let (lo, hi) = (pair[0].ln(), pair[1].ln());
        for i in 0..=samples_per_slice {
            let t = i as f64 / samples_per_slice as f64;
            let d = if i == samples_per_slice {
                pair[1]
            } else {
                (lo + t * (hi - lo)).exp()
            };
            probe(Distance::Finite(d))?;
        }
    }
    if infinite_tail {
        probe(Distance::Infinity)?;
    }

    let mut passed = max_blur <= coc * (1.0 + COVERAGE_TOLERANCE);

    let required_near = optics.near_limit(plan.spec.near_focus_limit)?;
    let first = &plan.slices[0];
    if first.near > required_near * (1.0 + COVERAGE_TOLERANCE) {
        warnings.push(format!(
            "plan starts at {} but the near focus limit needs coverage from {}",
            first.near, required_near
        ));
        passed = false;
    }
    let last_far = plan
        .slices
        .iter()
        .map(|s| s.far)
        .fold(Distance::Finite(0.0), |a, b| if b > a { b } else { a });
    if last_far.as_f64() < plan.spec.far_target.as_f64() * (1.0 - COVERAGE_TOLERANCE) {
        warnings.push(format!(
            "plan ends at {last_far} short of the far target {}",
            plan.spec.far_target
        ));
        passed = false;
    }

    Ok(CoverageReport {
        passed,
        coc,
        max_blur,
        worst_distance: worst,
        samples,
        warnings,
    })
}

/// Minimum blur over all slices for an object at `object`.
///
/// For a fixed object, blur grows as the focus moves away from it on either
/// side, so the minimum is attained by one of the focus distances that
/// bracket the object in sorted order.
fn best_blur(optics: &Optics, focuses: &[f64], object: Distance) -> Result<f64> {
    let idx = focuses.partition_point(|&f| Distance::Finite(f) < object);
    let lo = idx.saturating_sub(2);
    let hi = (idx + 2).min(focuses.len());
    focuses[lo..hi]
        .iter()
        .map(|&f| optics.blur_diameter(object, f))
        .try_fold(f64::INFINITY, |acc, b| b.map(|b| acc.min(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn experiment() -> LensSpec {
        LensSpec::new(25.0, 4.6, 0.02, 250.0).unwrap()
    }

    #[test]
    fn forward_reproduces_experiment_table() {
        let plan = slice_forward(&experiment()).unwrap();
        let expected_focus = [
            267.8, 288.5, 312.9, 342.0, 377.3, 421.1, 476.9, 550.5, 651.6, 799.7, 1037.1, 1479.7,
            2595.1,
        ];
        assert_eq!(plan.iterated_count(), 14);
        assert!(plan.slices[0].is_preamble());
        assert_relative_eq!(plan.slices[0].lens_distance, 27.78, epsilon = 0.01);
        for (s, want) in plan.slices[1..].iter().zip(expected_focus) {
            assert!(
                (s.focus_distance - want).abs() <= 0.1,
                "step {}: {}",
                s.step,
                s.focus_distance
            );
        }
        let last = plan.slices.last().unwrap();
        assert_eq!(last.step, 13);
        assert_eq!(last.focus_distance, plan.derived.hyperfocal);
        assert_eq!(last.far, Distance::Infinity);
        assert_relative_eq!(last.lens_distance, 25.0920, epsilon = 5e-4);
    }

    #[test]
    fn forward_limits_are_shared_between_neighbours() {
        let plan = slice_forward(&experiment()).unwrap();
        let n = plan.len();
        for pair in plan.slices[..n - 1].windows(2) {
            assert_eq!(pair[0].far, Distance::Finite(pair[1].near));
        }
        // The clamped hyperfocal slice overlaps its predecessor.
        assert!(Distance::Finite(plan.slices[n - 1].near) < plan.slices[n - 2].far);
    }

    #[test]
    fn start_beyond_hyperfocal_gives_single_slice() {
        let spec = LensSpec::new(25.0, 4.6, 0.02, 7000.0).unwrap();
        for plan in [
            slice_forward(&spec).unwrap(),
            slice_backward(&spec).unwrap(),
        ] {
            assert_eq!(plan.len(), 1);
            assert_eq!(plan.slices[0].focus_distance, plan.derived.hyperfocal);
        }
    }

    #[test]
    fn larger_coc_needs_fewer_slices() {
        let count = |c| {
            slice_forward(&LensSpec::new(25.0, 4.6, c, 250.0).unwrap())
                .unwrap()
                .iterated_count()
        };
        assert!(count(0.04) < count(0.02));
        let plan = slice_forward(&LensSpec::new(25.0, 4.6, 0.04, 250.0).unwrap()).unwrap();
        assert!(verify_coverage(&plan, 50).unwrap().passed);
    }

    #[test]
    fn near_limit_inside_focal_length_is_rejected() {
        let spec = LensSpec {
            near_focus_limit: 20.0,
            ..experiment()
        };
        assert!(matches!(
            slice_forward(&spec),
            Err(Error::ParameterDomain { .. })
        ));
        assert!(matches!(
            slice_backward(&spec),
            Err(Error::ParameterDomain { .. })
        ));
    }

    #[test]
    fn backward_starts_at_hyperfocal_and_covers() {
        let spec = experiment();
        let plan = slice_backward(&spec).unwrap();
        let last = plan.slices.last().unwrap();
        assert_eq!(last.focus_distance, plan.derived.hyperfocal);
        assert_eq!(plan.slices[0].focus_distance, spec.near_focus_limit);
        let forward = slice_forward(&spec).unwrap();
        assert!(plan.len().abs_diff(forward.len()) <= 1);
        assert!(plan.len().abs_diff(forward.iterated_count()) <= 1);
        let report = verify_coverage(&plan, 100).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn finite_far_target_clamps_last_slice() {
        let spec = experiment()
            .with_far_target(Distance::Finite(1000.0))
            .unwrap();
        let plan = slice_forward(&spec).unwrap();
        let last = plan.slices.last().unwrap();
        assert_relative_eq!(last.far.as_f64(), 1000.0, max_relative = 1e-9);
        assert!(plan.slices[..plan.len() - 1]
            .iter()
            .all(|s| s.far < Distance::Finite(1000.0)));
        assert!(verify_coverage(&plan, 50).unwrap().passed);

        let back = slice_backward(&spec).unwrap();
        assert_relative_eq!(
            back.slices.last().unwrap().far.as_f64(),
            1000.0,
            max_relative = 1e-9
        );
        assert!(verify_coverage(&back, 50).unwrap().passed);
    }

    #[test]
    fn coverage_passes_for_experiment_plan() {
        let plan = slice_forward(&experiment()).unwrap();
        let report = verify_coverage(&plan, 100).unwrap();
        assert!(report.passed);
        assert!(report.max_blur <= 0.02 * (1.0 + 1e-9));
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn coverage_fails_inside_deleted_slice() {
        let mut plan = slice_forward(&experiment()).unwrap();
        let removed = plan.slices.remove(6);
        let report = verify_coverage(&plan, 100).unwrap();
        assert!(!report.passed);
        assert!(removed.contains(report.worst_distance.as_f64()));
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn hyperfocal_slice_alone_covers_half_to_infinity() {
        let spec = experiment();
        let optics = Optics::new(spec).unwrap();
        let h = optics.hyperfocal();
        let plan = FocusPlan {
            spec: LensSpec {
                near_focus_limit: h,
                ..spec
            },
            derived: optics.derived(),
            direction: Direction::NearToFar,
            slices: vec![FocusSlice {
                step: 0,
                focus_distance: h,
                near: h / 2.0,
                far: Distance::Infinity,
                lens_distance: optics.lens_distance(Distance::Finite(h)).unwrap(),
            }],
        };
        assert!(verify_coverage(&plan, 100).unwrap().passed);
    }

    #[test]
    fn malformed_plan_is_a_validation_error() {
        let mut plan = slice_forward(&experiment()).unwrap();
        plan.slices.swap(2, 3);
        plan.slices[5].lens_distance += 0.1;
        match verify_coverage(&plan, 10) {
            Err(Error::Validation(problems)) => assert!(problems.len() >= 3, "{problems:?}"),
            other => panic!("expected validation error, got {other:?}"),
        }
        plan.slices.clear();
        assert!(matches!(
            verify_coverage(&plan, 10),
            Err(Error::Validation(_))
        ));
    }
}
