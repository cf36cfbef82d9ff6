use serde::{Deserialize, Serialize};

use super::crossing::{Crosser, CrossingEvent, Outcome};
use crate::signal::DriverAction;

/// Aggregate statistics over AV–HV encounters.
///
/// Throughputs count, per simulated hour, the encounters in which that kind
/// of vehicle entered the intersection first (a collision counts for both).
/// `av_passes`/`hv_passes` count every completed pass through the
/// intersection, encounter or not. `wall_time` is simulated seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub crossings: u64,
    pub collisions: u64,
    pub dc_count: u64,
    pub collision_rate: f64,
    pub dc_rate: f64,
    pub av_throughput: f64,
    pub hv_throughput: f64,
    pub av_passes: u64,
    pub hv_passes: u64,
    pub wall_time: f64,
    /// Set when there were no encounters and the rates are placeholders.
    pub empty_trace: bool,
}

impl MetricsReport {
    pub fn with_passes(self, av_passes: u64, hv_passes: u64) -> Self {
        Self {
            av_passes,
            hv_passes,
            ..self
        }
    }
}

pub fn metrics(events: &[CrossingEvent], duration: f64) -> MetricsReport {
    let crossings = events.len() as u64;
    let collisions = events
        .iter()
        .filter(|e| e.outcome == Outcome::Collision)
        .count() as u64;
    let dc_count = events
        .iter()
        .filter(|e| e.hv_action == DriverAction::DC)
        .count() as u64;
    let first = |kind: Crosser| {
        events
            .iter()
            .filter(|e| e.crosser == kind || e.crosser == Crosser::Both)
            .count() as f64
    };
    let hours = duration / 3600.0;
    let per_hour = |count: f64| if hours > 0.0 { count / hours } else { 0.0 };
    let rate = |count: u64| {
        if crossings == 0 {
            0.0
        } else {
            count as f64 / crossings as f64
        }
    };
    MetricsReport {
        crossings,
        collisions,
        dc_count,
        collision_rate: rate(collisions),
        dc_rate: rate(dc_count),
        av_throughput: per_hour(first(Crosser::AV)),
        hv_throughput: per_hour(first(Crosser::HV)),
        av_passes: 0,
        hv_passes: 0,
        wall_time: duration,
        empty_trace: crossings == 0,
    }
}
