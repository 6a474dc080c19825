use focusplan::{
    from_code, image_to_object, object_to_image, slice_backward, slice_forward, to_code,
    verify_coverage, ActuatorCalibration, Distance, LensSpec, Optics,
};
use proptest::prelude::*;

/// Lens parameters over the ranges a camera module realistically spans.
fn aperture() -> impl Strategy<Value = (f64, f64, f64)> {
    (2.0..100.0_f64, 1.0..16.0_f64, 0.001..0.05_f64)
}

fn hyperfocal_of(f: f64, n: f64, c: f64) -> f64 {
    f * f / (n * c) + f
}

fn log_lerp(lo: f64, hi: f64, t: f64) -> f64 {
    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
}

/// A spec together with a focus distance drawn log-uniformly in (1.01 f, 0.999 H).
fn spec_and_focus() -> impl Strategy<Value = (Optics, f64)> {
    (aperture(), 0.0..=1.0_f64).prop_map(|((f, n, c), t)| {
        let h = hyperfocal_of(f, n, c);
        let spec = LensSpec::new(f, n, c, 1.5 * f).unwrap();
        (Optics::new(spec).unwrap(), log_lerp(1.01 * f, 0.999 * h, t))
    })
}

/// A spec with its near focus limit drawn log-uniformly in (1.5 f, 0.9 H).
fn planning_spec() -> impl Strategy<Value = LensSpec> {
    (aperture(), 0.001..0.999_f64).prop_map(|((f, n, c), t)| {
        let h = hyperfocal_of(f, n, c);
        LensSpec::new(f, n, c, log_lerp(1.5 * f, 0.9 * h, t)).unwrap()
    })
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

proptest! {
    #[test]
    fn blur_equals_coc_on_both_limits((optics, d) in spec_and_focus()) {
        let c = optics.spec().coc;
        let near = optics.near_limit(d).unwrap();
        let far = optics.far_limit(d).unwrap();
        prop_assert!(rel(optics.blur_diameter(Distance::Finite(near), d).unwrap(), c) <= 1e-9);
        prop_assert!(rel(optics.blur_diameter(far, d).unwrap(), c) <= 1e-9);
    }

    #[test]
    fn hyperfocal_blur_at_far_distance((f, n, c) in aperture()) {
        let optics = Optics::new(LensSpec::new(f, n, c, 1.5 * f).unwrap()).unwrap();
        let h = optics.hyperfocal();
        prop_assert!(rel(optics.blur_diameter(Distance::Infinity, h).unwrap(), c) <= 1e-12);
        // At a finite distance D the blur is c (1 - H / D).
        let b = optics.blur_diameter(Distance::Finite(1e12), h).unwrap();
        prop_assert!(rel(b, c * (1.0 - h / 1e12)) <= 1e-9);
        if h <= 1e6 {
            prop_assert!(rel(b, c) <= 1e-6);
        }
    }

    #[test]
    fn limit_inverses_round_trip((optics, d) in spec_and_focus()) {
        let near = optics.near_limit(d).unwrap();
        prop_assert!(rel(optics.object_from_near_limit(near).unwrap(), d) <= 1e-9);
        let far = optics.far_limit(d).unwrap();
        prop_assert!(rel(optics.object_from_far_limit(far).unwrap(), d) <= 1e-9);
    }

    #[test]
    fn limits_bracket_and_increase((optics, d) in spec_and_focus(), bump in 1e-6..0.5_f64) {
        let near = optics.near_limit(d).unwrap();
        let far = optics.far_limit(d).unwrap();
        prop_assert!(near < d);
        prop_assert!(Distance::Finite(d) < far);

        let d2 = d + bump * (optics.hyperfocal() - d);
        prop_assert!(optics.near_limit(d2).unwrap() > near);
        prop_assert!(optics.far_limit(d2).unwrap() > far);
        let extension = |d: f64| object_to_image(Distance::Finite(d), optics.focal_length()).unwrap().extension();
        prop_assert!(extension(d2) < extension(d));
    }

    #[test]
    fn thin_lens_round_trip(f in 2.0..100.0_f64, t in 0.0..=1.0_f64) {
        let d = log_lerp(1.01 * f, 1e9, t);
        let image = object_to_image(Distance::Finite(d), f).unwrap();
        prop_assert!(image.mm() > f);
        prop_assert!(rel(image_to_object(image).as_f64(), d) <= 1e-9);
    }

    #[test]
    fn slicing_terminates_within_image_space_bound(spec in planning_spec()) {
        let plan = slice_forward(&spec).unwrap();
        let f = spec.focal_length;
        let lens_at_near = object_to_image(Distance::Finite(spec.near_focus_limit), f).unwrap().mm();
        let bound = (lens_at_near - f) / (2.0 * spec.f_number * spec.coc) + 2.0;
        prop_assert!((plan.iterated_count() as f64) <= bound);
        prop_assert!((slice_backward(&spec).unwrap().len() as f64) <= bound + 1.0);
    }

    #[test]
    fn plans_keep_table_ordering(spec in planning_spec()) {
        for plan in [slice_forward(&spec).unwrap(), slice_backward(&spec).unwrap()] {
            prop_assert!(plan.validate().is_ok());
            prop_assert_eq!(plan.slices.last().unwrap().far, Distance::Infinity);
            for pair in plan.slices.windows(2) {
                prop_assert!(pair[0].focus_distance < pair[1].focus_distance);
                prop_assert!(pair[0].lens_distance > pair[1].lens_distance);
                prop_assert!(pair[0].far >= Distance::Finite(pair[1].near));
            }
        }
    }

    #[test]
    fn coc_ladder_never_adds_slices(spec in planning_spec()) {
        let mut previous = usize::MAX;
        for scale in [0.5, 1.0, 2.0, 4.0] {
            let scaled = LensSpec { coc: spec.coc * scale, ..spec };
            let count = slice_forward(&scaled).unwrap().iterated_count();
            prop_assert!(count <= previous);
            previous = count;
        }
    }

    #[test]
    fn far_target_is_reached(spec in planning_spec(), t in 0.05..20.0_f64) {
        let optics = Optics::new(spec).unwrap();
        let target = spec.near_focus_limit + t * (optics.hyperfocal() - spec.near_focus_limit);
        let spec = spec.with_far_target(Distance::Finite(target)).unwrap();
        for plan in [slice_forward(&spec).unwrap(), slice_backward(&spec).unwrap()] {
            let report = verify_coverage(&plan, 8).unwrap();
            prop_assert!(report.passed, "{:?}", report);
        }
    }

    #[test]
    fn codes_round_trip_within_half_step(
        lo in 1.0..50.0_f64,
        span in 0.01..10.0_f64,
        code_max in 1u32..4096,
        t in 0.0..=1.0_f64,
    ) {
        let cal = ActuatorCalibration::new(lo + span, lo, code_max).unwrap();
        let d = lo + t * span;
        let back = from_code(to_code(d, &cal).unwrap().code, &cal).unwrap();
        prop_assert!((back - d).abs() <= cal.code_step() / 2.0 * (1.0 + 1e-9));
    }

    #[test]
    fn codes_are_monotone(lo in 1.0..50.0_f64, span in 0.01..10.0_f64, code_max in 1u32..4096,
                          a in -0.2..1.2_f64, b in -0.2..1.2_f64) {
        let cal = ActuatorCalibration::new(lo + span, lo, code_max).unwrap();
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(to_code(lo + a * span, &cal).unwrap().code <= to_code(lo + b * span, &cal).unwrap().code);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn every_plan_is_gap_free(spec in planning_spec()) {
        for plan in [slice_forward(&spec).unwrap(), slice_backward(&spec).unwrap()] {
            let report = verify_coverage(&plan, 8).unwrap();
            prop_assert!(report.passed, "{:?}", report);
            prop_assert!(report.warnings.is_empty());
        }
    }
}
