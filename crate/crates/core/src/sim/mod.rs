//! Figure-8 mixed-autonomy intersection simulator.
//!
//! The track is one closed single-lane loop that crosses itself once, so it
//! splits into two lobes, `A` and `B`, each `loop_length` long. Both lobes end
//! at the same two-way-stop intersection; a vehicle that crosses leaves its
//! lobe and continues on the other one. Positions are measured along the
//! current lobe from the point where the intersection's conflict zone ends,
//! so the zone occupies the last `2·stop_offset` of every lobe and the stop
//! line sits at `loop_length − 2·stop_offset`.
//!
//! Each run is single-threaded and fully determined by its [`SimConfig`],
//! including the seed.

mod crossing;
mod metrics;
mod trace;
mod world;

pub use crossing::{
    draw_intent, resolve_crossing, resolve_encounter, AvBehavior, Crosser, CrossingEvent,
    Encounter, Outcome, Resolution,
};
pub use metrics::{metrics, MetricsReport};
pub use trace::{metrics_from_toml, metrics_to_toml, read_trace, write_trace};
pub use world::{init_world, Lobe, Phase, VehicleKind, VehicleState, WorldState};

use serde::{Deserialize, Serialize};

use crate::signal::{IntersectionParams, LikelihoodModel};
use crate::{Error, Result};

/// Which AV strategy to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    /// Never signal; yield to every human driver.
    NoEbp,
    /// Commit to the scheme built for a fully trusting human.
    NoTrust,
    /// Commit to the scheme built for the human's actual trust.
    Taebp,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::NoEbp => "no-ebp",
            PolicyKind::NoTrust => "no-trust",
            PolicyKind::Taebp => "taebp",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no-ebp" => Ok(PolicyKind::NoEbp),
            "no-trust" => Ok(PolicyKind::NoTrust),
            "taebp" => Ok(PolicyKind::Taebp),
            other => Err(Error::Config(format!("unknown policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub policy: PolicyKind,
    pub params: IntersectionParams,
    pub model: LikelihoodModel,
    pub n_av: usize,
    pub n_hv: usize,
    /// Units per second.
    pub cruise_speed: f64,
    /// Minimum bumper-to-bumper spacing along the track.
    pub follow_gap: f64,
    /// Distance from the stop line to the intersection center.
    pub stop_offset: f64,
    /// Length of each lobe.
    pub loop_length: f64,
    /// Simulated seconds.
    pub duration: f64,
    pub dt: f64,
    /// Two vehicles whose stop-line arrivals are at most this many seconds
    /// apart arrive "at the same time".
    pub arrival_window: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            policy: PolicyKind::Taebp,
            params: IntersectionParams::default(),
            model: LikelihoodModel::linear(2.0).expect("positive s_max"),
            n_av: 8,
            n_hv: 8,
            cruise_speed: 4.0,
            follow_gap: 2.0,
            stop_offset: 1.7,
            loop_length: 50.0,
            duration: 3600.0,
            dt: 0.05,
            arrival_window: 0.5,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_av == 0 || self.n_hv == 0 {
            return Err(Error::Config("need at least one AV and one HV".into()));
        }
        let positive = [
            ("cruise_speed", self.cruise_speed),
            ("follow_gap", self.follow_gap),
            ("stop_offset", self.stop_offset),
            ("loop_length", self.loop_length),
            ("dt", self.dt),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::Config(format!(
                "duration must be nonnegative, got {}",
                self.duration
            )));
        }
        if !(self.arrival_window >= 0.0) {
            return Err(Error::Config("arrival_window must be nonnegative".into()));
        }
        // Every vehicle must be able to queue on one lobe without spilling
        // back into the conflict zone, or the loop can gridlock.
        let n = (self.n_av + self.n_hv) as f64;
        let zone = 2.0 * self.stop_offset;
        if n * self.follow_gap + zone >= self.loop_length {
            return Err(Error::Config(format!(
                "{n} vehicles at gap {} do not fit on a lobe of length {}",
                self.follow_gap, self.loop_length
            )));
        }
        // Initial even spacing must keep every vehicle short of the stop line.
        let max_per_lobe = self.n_av.max(self.n_hv) as f64;
        if self.loop_length / max_per_lobe <= zone.max(self.follow_gap) {
            return Err(Error::Config(format!(
                "{max_per_lobe} vehicles cannot be spaced evenly ahead of the stop line"
            )));
        }
        Ok(())
    }

    pub fn stop_line(&self) -> f64 {
        self.loop_length - 2.0 * self.stop_offset
    }
}

/// Runs a full simulation and returns the metrics and the crossing trace.
pub fn run(config: &SimConfig) -> Result<(MetricsReport, Vec<CrossingEvent>)> {
    let mut world = init_world(config)?;
    let ticks = (config.duration / config.dt).round() as u64;
    for _ in 0..ticks {
        world.step(config.dt);
    }
    let (av_passes, hv_passes) = world.passes();
    let events = world.into_events();
    let report = metrics(&events, config.duration).with_passes(av_passes, hv_passes);
    Ok((report, events))
}
