use crate::crystal::{find_equilibrium, mean_field, Equilibrium, EquilibriumOptions, IonConfiguration, Structure};
use crate::error::{Error, Result};
use crate::params::Model;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepDirection {
    Up,
    Down,
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub power_min: f64,
    pub power_max: f64,
    pub steps: usize,
    /// Amplitude of the uniform transverse jitter added to each warm start.
    pub noise: f64,
    pub seed: u64,
    pub equilibrium: EquilibriumOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            power_min: 0.0,
            power_max: 300.0,
            steps: 201,
            noise: 1e-4,
            seed: 0,
            equilibrium: EquilibriumOptions::default(),
        }
    }
}

impl SweepOptions {
    pub fn grid(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.power_min];
        }
        let h = (self.power_max - self.power_min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.power_min + h * i as f64).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub power: f64,
    pub outcome: Result<Equilibrium, String>,
}

impl SweepPoint {
    pub fn structure(&self) -> Option<Structure> {
        self.outcome.as_ref().ok().map(|e| e.config.structure())
    }

    pub fn output_intensity(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|e| e.mean_field.output_intensity)
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub direction: SweepDirection,
    /// Ordered by the sweep direction.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Points sorted by increasing pump power.
    pub fn ascending(&self) -> Vec<&SweepPoint> {
        let mut v: Vec<&SweepPoint> = self.points.iter().collect();
        v.sort_by(|a, b| a.power.total_cmp(&b.power));
        v
    }
}

fn jitter(cfg: &IonConfiguration, rng: &mut ChaCha8Rng, amplitude: f64) -> IonConfiguration {
    if amplitude == 0.0 {
        return cfg.clone();
    }
    let positions = cfg.positions().iter().map(|p| [p[0] + rng.random_range(-amplitude..=amplitude), p[1]]).collect();
    IonConfiguration::new(positions)
}

/// Warm-started sequence of equilibria over the pump-power grid.
///
/// Each point is seeded from the previous equilibrium plus a small
/// transverse jitter; the first point is seeded from `start`. Failed points
/// are recorded and the sweep continues from the last good configuration.
pub fn hysteresis_sweep(
    model: &Model,
    start: &IonConfiguration,
    direction: SweepDirection,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if opts.steps == 0 {
        return Err(Error::InvalidParameter { name: "steps", reason: "need at least one step".into() });
    }
    let mut grid = opts.grid();
    if direction == SweepDirection::Down {
        grid.reverse();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut seed_cfg = start.clone();
    let mut m = model.clone();
    let mut points = Vec::with_capacity(grid.len());
    for (i, &power) in grid.iter().enumerate() {
        m.set_pump_power(power);
        let guess = if i == 0 { seed_cfg.clone() } else { jitter(&seed_cfg, &mut rng, opts.noise) };
        let outcome = find_equilibrium(&m, &guess, &opts.equilibrium).map_err(|e| e.to_string());
        if let Ok(eq) = &outcome {
            seed_cfg = eq.config.clone();
        }
        points.push(SweepPoint { power, outcome });
    }
    Ok(SweepResult { direction, points })
}

/// `I_1`: output intensity of `linear` at pump power one.
pub fn reference_intensity(model: &Model, linear: &IonConfiguration) -> Result<f64> {
    let m = model.clone().with_pump_power(1.0);
    Ok(mean_field(&m, linear)?.output_intensity)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BistableWindow {
    pub lower: f64,
    pub upper: f64,
    /// Grid powers at which the up branch is linear and the down branch zigzag.
    pub powers: Vec<f64>,
}

/// Powers where the two sweep directions disagree in the linear/zigzag
/// sense. `None` when the branches coincide.
pub fn bistable_window(up: &SweepResult, down: &SweepResult) -> Option<BistableWindow> {
    let down_pts = down.ascending();
    let powers: Vec<f64> = up
        .ascending()
        .into_iter()
        .filter_map(|u| {
            let d = down_pts.iter().find(|d| (d.power - u.power).abs() <= 1e-12 * u.power.abs().max(1.0))?;
            (u.structure() == Some(Structure::Linear) && d.structure() == Some(Structure::Zigzag)).then_some(u.power)
        })
        .collect();
    let lower = powers.first().copied()?;
    let upper = powers.last().copied()?;
    Some(BistableWindow { lower, upper, powers })
}
