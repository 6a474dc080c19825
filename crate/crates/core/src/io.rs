//! Text encodings: plan CSV/JSON, calibration JSON, and plot data.
//!
//! CSV numbers are written in plain decimal with ten significant digits and
//! infinity as the literal `inf`. JSON uses shortest round-trip floats, with
//! infinity as the string `"inf"`.

use serde::Serialize;

use crate::actuator::ActuatorCalibration;
use crate::distance::{format_sig, Distance};
use crate::error::{Error, Result};
use crate::optics::Optics;
use crate::slicer::{FocusPlan, FocusSlice};

pub const PLAN_CSV_HEADER: [&str; 5] = [
    "step",
    "focus_distance_mm",
    "near_limit_mm",
    "far_limit_mm",
    "lens_distance_mm",
];

pub const PLOTDATA_CSV_HEADER: [&str; 3] = ["distance_mm", "slice_index", "blur_mm"];

fn format_error(e: impl std::fmt::Display) -> Error {
    Error::Format(e.to_string())
}

fn write_csv<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).map_err(format_error)?;
    for row in rows {
        writer.write_record(row).map_err(format_error)?;
    }
    let bytes = writer.into_inner().map_err(format_error)?;
    String::from_utf8(bytes).map_err(format_error)
}

pub fn plan_to_csv(plan: &FocusPlan) -> Result<String> {
    write_csv(
        &PLAN_CSV_HEADER,
        plan.slices.iter().map(|s| {
            [
                s.step.to_string(),
                format_sig(s.focus_distance),
                format_sig(s.near),
                s.far.to_string(),
                format_sig(s.lens_distance),
            ]
        }),
    )
}

/// Reads the slice table of a plan CSV. The CSV does not carry the lens
/// spec, so callers pair the slices with one to rebuild a [`FocusPlan`].
pub fn slices_from_csv(text: &str) -> Result<Vec<FocusSlice>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(format_error)?;
    if header.iter().ne(PLAN_CSV_HEADER) {
        return Err(Error::Format(format!(
            "unexpected plan header {:?}, expected {}",
            header.iter().collect::<Vec<_>>(),
            PLAN_CSV_HEADER.join(",")
        )));
    }
    reader
        .records()
        .map(|record| {
            let record = record.map_err(format_error)?;
            let field = |i: usize| -> Result<&str> {
                record
                    .get(i)
                    .ok_or_else(|| Error::Format(format!("missing column {}", PLAN_CSV_HEADER[i])))
            };
            let number = |i: usize| -> Result<f64> {
                field(i)?.trim().parse().map_err(|_| {
                    Error::Format(format!(
                        "bad {} value {:?}",
                        PLAN_CSV_HEADER[i],
                        record.get(i)
                    ))
                })
            };
            Ok(FocusSlice {
                step: field(0)?.trim().parse().map_err(format_error)?,
                focus_distance: number(1)?,
                near: number(2)?,
                far: field(3)?.parse::<Distance>()?,
                lens_distance: number(4)?,
            })
        })
        .collect()
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(format_error)?;
    text.push('\n');
    Ok(text)
}

pub fn plan_to_json(plan: &FocusPlan) -> Result<String> {
    to_json(plan)
}

pub fn plan_from_json(text: &str) -> Result<FocusPlan> {
    serde_json::from_str(text).map_err(format_error)
}

pub fn calibration_from_json(text: &str) -> Result<ActuatorCalibration> {
    let cal: ActuatorCalibration = serde_json::from_str(text).map_err(format_error)?;
    cal.validate()?;
    Ok(cal)
}

/// Blur of every slice over a log-uniform sweep of object distances, for
/// plotting. The sweep spans the plan's range; an infinite tail is cut at
/// ten times the hyperfocal distance.
pub fn plotdata_csv(plan: &FocusPlan, samples_per_slice: usize) -> Result<String> {
    if samples_per_slice == 0 {
        return Err(Error::domain("samples_per_slice", "must be positive"));
    }
    plan.validate()?;
    let optics = Optics::new(plan.spec)?;
    let lo = plan.slices[0].near;
    let hi = match plan.slices[plan.len() - 1].far {
        Distance::Finite(far) => far,
        Distance::Infinity => 10.0 * optics.hyperfocal(),
    };
    let count = samples_per_slice * plan.len();
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());

    let mut rows = Vec::with_capacity(count * plan.len());
    for i in 0..count {
        let t = if count == 1 {
            0.0
        } else {
            i as f64 / (count - 1) as f64
        };
        let d = (ln_lo + t * (ln_hi - ln_lo)).exp();
        for s in &plan.slices {
            let blur = optics.blur_diameter(Distance::Finite(d), s.focus_distance)?;
            rows.push([format_sig(d), s.step.to_string(), format_sig(blur)]);
        }
    }
    write_csv(&PLOTDATA_CSV_HEADER, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::LensSpec;
    use crate::slicer::slice_forward;

    fn plan() -> FocusPlan {
        slice_forward(&LensSpec::new(25.0, 4.6, 0.02, 250.0).unwrap()).unwrap()
    }

    #[test]
    fn csv_layout() {
        let text = plan_to_csv(&plan()).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,focus_distance_mm,near_limit_mm,far_limit_mm,lens_distance_mm"
        );
        assert!(lines
            .next()
            .unwrap()
            .starts_with("-1,250.0000000,241.9854422,258.5636273,27.77777778"));
        assert!(lines.next().unwrap().starts_with("0,267.80"));
        assert!(text.lines().last().unwrap().starts_with("13,6818.478261,"));
        assert!(text.lines().last().unwrap().contains(",inf,25.09200000"));
    }

    #[test]
    fn csv_reads_back() {
        let plan = plan();
        let slices = slices_from_csv(&plan_to_csv(&plan).unwrap()).unwrap();
        assert_eq!(slices.len(), plan.len());
        for (a, b) in slices.iter().zip(&plan.slices) {
            assert_eq!(a.step, b.step);
            assert!(((a.focus_distance - b.focus_distance) / b.focus_distance).abs() < 1e-9);
            assert_eq!(a.far.is_infinite(), b.far.is_infinite());
        }
    }

    #[test]
    fn csv_rejects_wrong_header() {
        assert!(matches!(
            slices_from_csv("a,b\n1,2\n"),
            Err(Error::Format(_))
        ));
        let bad = "step,focus_distance_mm,near_limit_mm,far_limit_mm,lens_distance_mm\n0,x,1,2,3\n";
        assert!(matches!(slices_from_csv(bad), Err(Error::Format(_))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let plan = plan();
        let text = plan_to_json(&plan).unwrap();
        assert!(text.contains("\"far_limit_mm\": \"inf\""));
        assert!(text.contains("\"direction\": \"near_to_far\""));
        assert_eq!(plan_from_json(&text).unwrap(), plan);
    }

    #[test]
    fn calibration_json() {
        let cal = calibration_from_json(
            r#"{"lens_at_code_max": 27.78, "lens_at_code_min": 25.09, "code_max": 1023}"#,
        )
        .unwrap();
        assert_eq!(cal.code_max, 1023);
        assert!(calibration_from_json(
            r#"{"lens_at_code_max": 1, "lens_at_code_min": 2, "code_max": 3}"#
        )
        .is_err());
        assert!(calibration_from_json("{").is_err());
    }

    #[test]
    fn plotdata_rows() {
        let plan = plan();
        let text = plotdata_csv(&plan, 4).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "distance_mm,slice_index,blur_mm");
        assert_eq!(lines.count(), 4 * plan.len() * plan.len());
    }
}
