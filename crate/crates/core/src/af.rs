//! Deterministic contrast-autofocus simulator: a coarse pass over the plan's
//! lens positions followed by a golden-section fine search inside the
//! winning slice.
//!
//! The sharpness model `1 / (1 + (b / c)^2)` over the geometric blur `b` is a
//! stand-in for a real contrast metric. It is unimodal in image distance with
//! its peak where the true object is in focus, and reads 0.5 exactly when the
//! blur equals the circle of confusion.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::actuator::{from_code, to_code, ActuatorCalibration};
use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::optics::{image_blur_diameter, LensSpec, Optics};
use crate::slicer::FocusPlan;

const INV_PHI: f64 = 0.618_033_988_749_895;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedScene {
    /// Ground-truth object distance.
    pub true_distance: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SimulatedScene {
    pub fn noiseless(true_distance: f64) -> Self {
        SimulatedScene {
            true_distance,
            noise_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self, spec: &LensSpec) -> Result<()> {
        if !(self.true_distance.is_finite() && self.true_distance > spec.focal_length) {
            return Err(Error::FocusDomain {
                object_mm: self.true_distance,
                focal_mm: spec.focal_length,
            });
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::domain("noise_sigma", "must be non-negative"));
        }
        Ok(())
    }
}

/// Noise-free sharpness of `scene` with the sensor at image distance `image`.
pub fn sharpness(scene: &SimulatedScene, image: f64, spec: &LensSpec) -> Result<f64> {
    let optics = Optics::new(*spec)?;
    scene.validate(spec)?;
    let blur = match optics.focus_for_lens(image)? {
        Distance::Finite(focus) => {
            optics.blur_diameter(Distance::Finite(scene.true_distance), focus)?
        }
        Distance::Infinity => {
            image_blur_diameter(spec, Distance::Finite(scene.true_distance), image)?
        }
    };
    let ratio = blur / spec.coc;
    Ok(1.0 / (1.0 + ratio * ratio))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub code: u32,
    pub score: f64,
}

/// Measurement source for one simulated run. Noise is drawn from a single
/// seeded stream in evaluation order, so a run is reproducible end to end.
pub struct SceneProbe {
    scene: SimulatedScene,
    spec: LensSpec,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
}

impl SceneProbe {
    pub fn new(scene: SimulatedScene, spec: LensSpec) -> Result<Self> {
        spec.validate()?;
        scene.validate(&spec)?;
        let noise = if scene.noise_sigma > 0.0 {
            Some(
                Normal::new(0.0, scene.noise_sigma)
                    .map_err(|e| Error::domain("noise_sigma", e.to_string()))?,
            )
        } else {
            None
        };
        Ok(SceneProbe {
            scene,
            spec,
            rng: ChaCha8Rng::seed_from_u64(scene.seed),
            noise,
        })
    }

    pub fn scene(&self) -> &SimulatedScene {
        &self.scene
    }

    /// Sharpness with noise, truncated to `(0, 1]`.
    pub fn measure(&mut self, image: f64) -> Result<f64> {
        let clean = sharpness(&self.scene, image, &self.spec)?;
        Ok(match &self.noise {
            Some(normal) => (clean + normal.sample(&mut self.rng)).clamp(f64::MIN_POSITIVE, 1.0),
            None => clean,
        })
    }

    pub fn measure_code(&mut self, code: u32, cal: &ActuatorCalibration) -> Result<Evaluation> {
        let image = from_code(code, cal)?;
        Ok(Evaluation {
            code,
            score: self.measure(image)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseOutcome {
    /// Index into `plan.slices`.
    pub winner: usize,
    pub evaluations: Vec<Evaluation>,
}

/// Measures every plan position (through the driver's codes) and picks the
/// sharpest; ties go to the nearer focus.
pub fn coarse_search(
    plan: &FocusPlan,
    probe: &mut SceneProbe,
    cal: &ActuatorCalibration,
) -> Result<CoarseOutcome> {
    if plan.slices.is_empty() {
        return Err(Error::Validation(vec!["plan has no slices".to_string()]));
    }
    let mut evaluations = Vec::with_capacity(plan.slices.len());
    let mut winner = 0;
    for (i, slice) in plan.slices.iter().enumerate() {
        let code = to_code(slice.lens_distance, cal)?.code;
        let eval = probe.measure_code(code, cal)?;
        if eval.score
            > evaluations
                .get(winner)
                .map_or(f64::NEG_INFINITY, |e: &Evaluation| e.score)
        {
            winner = i;
        }
        evaluations.push(eval);
    }
    Ok(CoarseOutcome {
        winner,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    /// Fine-search evaluations in the order they were taken.
    pub evaluations: Vec<Evaluation>,
    pub coarse_winner: usize,
    pub final_code: u32,
    /// Image distance realized by `final_code`.
    pub fine_result: f64,
    /// Ground-truth blur of the scene at the final lens position.
    pub final_blur: f64,
}

/// Golden-section search over driver codes spanning the image distances of
/// slice `winner`. Stops once the bracket is down to adjacent codes or after
/// `max_evals` measurements, and settles on the sharpest code measured.
pub fn fine_search(
    plan: &FocusPlan,
    winner: usize,
    probe: &mut SceneProbe,
    cal: &ActuatorCalibration,
    max_evals: usize,
) -> Result<SearchTrace> {
    let slice = plan.slices.get(winner).ok_or_else(|| {
        Error::domain(
            "winner",
            format!(
                "index {winner} out of range for {} slices",
                plan.slices.len()
            ),
        )
    })?;
    if max_evals < 3 {
        return Err(Error::domain("max_evals", "must be at least 3"));
    }
    let optics = Optics::new(plan.spec)?;
    // Farther objects image closer to the lens, so the far limit is the low end.
    let mut lo = to_code(optics.lens_distance(slice.far)?, cal)?.code;
    let mut hi = to_code(optics.lens_distance(Distance::Finite(slice.near))?, cal)?.code;

    let mut seen: BTreeMap<u32, f64> = BTreeMap::new();
    let mut evaluations = Vec::new();
    let mut measure = |code: u32, probe: &mut SceneProbe| -> Result<Option<f64>> {
        if let Some(&score) = seen.get(&code) {
            return Ok(Some(score));
        }
        if evaluations.len() >= max_evals {
            return Ok(None);
        }
        let eval = probe.measure_code(code, cal)?;
        seen.insert(code, eval.score);
        evaluations.push(eval);
        Ok(Some(eval.score))
    };

    while hi - lo > 2 {
        let reach = ((hi - lo) as f64 * INV_PHI).round() as u32;
        let left = hi - reach;
        let mut right = lo + reach;
        if right <= left {
            right = left + 1;
        }
        let (Some(fl), Some(fr)) = (measure(left, probe)?, measure(right, probe)?) else {
            break;
        };
        if fl >= fr {
            hi = right;
        } else {
            lo = left;
        }
    }
    for code in lo..=hi {
        if measure(code, probe)?.is_none() {
            break;
        }
    }

    let best = evaluations
        .iter()
        .fold(None::<Evaluation>, |best, e| match best {
            Some(b) if b.score >= e.score => Some(b),
            _ => Some(*e),
        })
        .expect("at least one evaluation is always taken");
    let fine_result = from_code(best.code, cal)?;
    let final_blur = image_blur_diameter(
        &plan.spec,
        Distance::Finite(probe.scene().true_distance),
        fine_result,
    )?;
    Ok(SearchTrace {
        evaluations,
        coarse_winner: winner,
        final_code: best.code,
        fine_result,
        final_blur,
    })
}

/// A complete coarse-plus-fine run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub scene: SimulatedScene,
    pub coarse: CoarseOutcome,
    pub trace: SearchTrace,
    /// Whether the final blur is within the circle of confusion.
    pub in_focus: bool,
}

pub fn simulate(
    plan: &FocusPlan,
    scene: SimulatedScene,
    cal: &ActuatorCalibration,
    max_evals: usize,
) -> Result<Simulation> {
    let mut probe = SceneProbe::new(scene, plan.spec)?;
    let coarse = coarse_search(plan, &mut probe, cal)?;
    let trace = fine_search(plan, coarse.winner, &mut probe, cal, max_evals)?;
    Ok(Simulation {
        scene,
        in_focus: trace.final_blur <= plan.spec.coc,
        coarse,
        trace,
    })
}
