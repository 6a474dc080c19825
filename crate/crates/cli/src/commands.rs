use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use focusplan::io::{
    calibration_from_json, plan_from_json, plan_to_csv, plan_to_json, plotdata_csv,
    slices_from_csv, to_json,
};
use focusplan::{
    simulate, slice_backward, slice_forward, verify_coverage, ActuatorCalibration, Direction,
    FocusPlan, LensSpec, Optics, SimulatedScene,
};
use rayon::prelude::*;

use crate::args::{DirectionArg, Format, PlanArgs, PlotArgs, SimulateArgs, VerifyArgs};
use crate::config::{self, ModuleConfig};
use crate::error::CliError;

const DEFAULT_CODE_MAX: u32 = 1023;

fn build_plan(spec: &LensSpec, direction: DirectionArg) -> Result<FocusPlan, CliError> {
    Ok(match direction {
        DirectionArg::Forward => slice_forward(spec)?,
        DirectionArg::Backward => slice_backward(spec)?,
    })
}

fn render(plan: &FocusPlan, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Csv => plan_to_csv(plan)?,
        Format::Json => plan_to_json(plan)?,
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(CliError::Usage)
}

pub fn plan(args: &PlanArgs, require_far: bool) -> Result<String, CliError> {
    if let Some(dir) = &args.config_dir {
        let out_dir = args
            .out_dir
            .as_deref()
            .expect("clap requires --out-dir with --config-dir");
        return plan_batch(args, dir, out_dir, require_far);
    }
    let module = config::resolve(&args.lens)?;
    let spec = bracket_checked(&module, require_far)?;
    render(&build_plan(&spec, args.direction)?, args.format)
}

fn bracket_checked(module: &ModuleConfig, require_far: bool) -> Result<LensSpec, CliError> {
    let spec = module.lens_spec()?;
    if require_far && spec.far_target.is_infinite() {
        return Err(CliError::Usage(anyhow!("bracket needs a finite --far-mm")));
    }
    Ok(spec)
}

/// Plans every config in `dir` in parallel and writes `<stem>.csv|json`
/// into `out_dir`. Reports the first failure after all configs ran.
fn plan_batch(
    args: &PlanArgs,
    dir: &Path,
    out_dir: &Path,
    require_far: bool,
) -> Result<String, CliError> {
    let mut configs: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))
        .map_err(CliError::Usage)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    configs.sort();
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))
        .map_err(CliError::Usage)?;
    let ext = match args.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };

    let results: Vec<Result<PathBuf, CliError>> = configs
        .par_iter()
        .map(|path| {
            let module = ModuleConfig::load(path)?.merged(&args.lens);
            let spec = bracket_checked(&module, require_far)?;
            let text = render(&build_plan(&spec, args.direction)?, args.format)?;
            let stem = path.file_stem().unwrap_or_default();
            let target = out_dir.join(stem).with_extension(ext);
            fs::write(&target, text)
                .with_context(|| format!("cannot write {}", target.display()))
                .map_err(CliError::Usage)?;
            Ok(target)
        })
        .collect();

    let mut listing = String::new();
    let mut first_error = None;
    for (path, result) in configs.iter().zip(results) {
        match result {
            Ok(target) => listing.push_str(&format!("{}\n", target.display())),
            Err(e) => {
                eprintln!("focusplan: {}: {e}", path.display());
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(listing),
    }
}

pub fn verify(args: &VerifyArgs) -> Result<(String, bool), CliError> {
    let text = read(&args.plan)?;
    let is_csv = args
        .plan
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let plan = if is_csv {
        let spec = config::resolve(&args.lens)?.lens_spec()?;
        let slices = slices_from_csv(&text)?;
        let optics = Optics::new(spec)?;
        FocusPlan {
            spec,
            derived: optics.derived(),
            direction: Direction::NearToFar,
            slices,
        }
    } else {
        plan_from_json(&text)?
    };
    let report = verify_coverage(&plan, args.samples_per_slice)?;
    Ok((to_json(&report)?, report.passed))
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<(String, bool), CliError> {
    let module = config::resolve(&args.lens)?;
    let spec = module.lens_spec()?;
    let plan = build_plan(&spec, args.direction)?;
    let cal = match (&args.calibration, module.calibration) {
        (Some(path), _) => calibration_from_json(&read(path)?)?,
        (None, Some(cal)) => {
            cal.validate()?;
            cal
        }
        (None, None) => ActuatorCalibration::spanning(
            plan.derived.lens_at_hyperfocal,
            plan.derived.lens_at_near,
            DEFAULT_CODE_MAX,
        )?,
    };
    let scene = SimulatedScene {
        true_distance: args.distance_mm,
        noise_sigma: args.noise_sigma,
        seed: args.seed,
    };
    let run = simulate(&plan, scene, &cal, args.max_evals)?;
    Ok((to_json(&run)?, run.in_focus))
}

pub fn plotdata(args: &PlotArgs) -> Result<String, CliError> {
    let spec = config::resolve(&args.lens)?.lens_spec()?;
    let plan = build_plan(&spec, args.direction)?;
    Ok(plotdata_csv(&plan, args.samples_per_slice)?)
}
