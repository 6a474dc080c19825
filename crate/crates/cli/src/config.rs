use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use focusplan::{coc_from_sensor, ActuatorCalibration, Distance, LensSpec};
use serde::Deserialize;

use crate::args::LensArgs;
use crate::error::CliError;

/// Module description as read from `--config`. Either `coc` or the pair
/// `sensor_diagonal` + `k` supplies the circle of confusion.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleConfig {
    pub focal_length: Option<f64>,
    pub f_number: Option<f64>,
    pub coc: Option<f64>,
    pub sensor_diagonal: Option<f64>,
    pub k: Option<f64>,
    pub near_focus_limit: Option<f64>,
    pub far_target: Option<Distance>,
    pub calibration: Option<ActuatorCalibration>,
}

impl ModuleConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))
            .map_err(CliError::Usage)?;
        serde_json::from_str(&text)
            .with_context(|| format!("malformed config {}", path.display()))
            .map_err(CliError::Usage)
    }

    /// Overlays command-line flags. A CoC given on the command line replaces
    /// whichever CoC source the file used.
    pub fn merged(mut self, flags: &LensArgs) -> Self {
        macro_rules! take {
            ($flag:expr => $field:ident) => {
                if let Some(v) = $flag {
                    self.$field = Some(v);
                }
            };
        }
        take!(flags.focal_mm => focal_length);
        take!(flags.aperture => f_number);
        take!(flags.near_mm => near_focus_limit);
        take!(flags.far_mm => far_target);
        if flags.coc_mm.is_some() {
            self.coc = flags.coc_mm;
            self.sensor_diagonal = None;
            self.k = None;
        }
        if flags.sensor_diagonal_mm.is_some() {
            self.coc = None;
            self.sensor_diagonal = flags.sensor_diagonal_mm;
            self.k = flags.k;
        }
        self
    }

    fn coc(&self) -> anyhow::Result<Result<f64, focusplan::Error>> {
        match (self.coc, self.sensor_diagonal, self.k) {
            (Some(c), None, None) => Ok(Ok(c)),
            (None, Some(d), Some(k)) => Ok(coc_from_sensor(d, k)),
            (None, None, None) => {
                bail!("missing circle of confusion: give --coc-mm or --sensor-diagonal-mm with --k")
            }
            (None, _, _) => bail!("--sensor-diagonal-mm and --k must be given together"),
            (Some(_), _, _) => {
                bail!("conflicting CoC sources: give either coc or sensor_diagonal with k")
            }
        }
    }

    /// Builds the validated lens spec. Missing or conflicting inputs are
    /// usage errors; values outside the physical domain are validation
    /// errors.
    pub fn lens_spec(&self) -> Result<LensSpec, CliError> {
        let missing = |what: &str| CliError::Usage(anyhow!("missing {what}"));
        let focal_length = self.focal_length.ok_or_else(|| missing("--focal-mm"))?;
        let f_number = self.f_number.ok_or_else(|| missing("--aperture"))?;
        let near_focus_limit = self.near_focus_limit.ok_or_else(|| missing("--near-mm"))?;
        let coc = self
            .coc()
            .map_err(CliError::Usage)?
            .map_err(CliError::from)?;
        let spec = LensSpec {
            focal_length,
            f_number,
            coc,
            near_focus_limit,
            far_target: self.far_target.unwrap_or(Distance::Infinity),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Resolves the module config from `--config` (if any) and the flags.
pub fn resolve(flags: &LensArgs) -> Result<ModuleConfig, CliError> {
    let base = match &flags.config {
        Some(path) => ModuleConfig::load(path)?,
        None => ModuleConfig::default(),
    };
    Ok(base.merged(flags))
}
