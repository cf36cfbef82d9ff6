use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::crossing::{resolve_crossing, AvBehavior, CrossingEvent, Resolution};
use super::{PolicyKind, SimConfig};
use crate::persuasion::{PersuasionGame, TrustLevel};
use crate::signal::{build_no_trust_policy, build_taebp_policy};
use crate::Result;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VehicleKind {
    Av,
    Hv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lobe {
    A,
    B,
}

impl Lobe {
    pub fn other(self) -> Lobe {
        match self {
            Lobe::A => Lobe::B,
            Lobe::B => Lobe::A,
        }
    }

    fn offset(self, loop_length: f64) -> f64 {
        match self {
            Lobe::A => 0.0,
            Lobe::B => loop_length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Cruising,
    /// Held back by the vehicle ahead.
    Queued,
    StoppedAtLine,
    Crossing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: usize,
    pub kind: VehicleKind,
    pub lobe: Lobe,
    pub arc_pos: f64,
    pub speed: f64,
    pub phase: Phase,
    /// When the vehicle reached the stop line, while it waits there.
    pub arrival_time: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct WorldState {
    config: SimConfig,
    game: PersuasionGame,
    trust: TrustLevel,
    behavior: AvBehavior,
    vehicles: Vec<VehicleState>,
    time: f64,
    rng: ChaCha8Rng,
    /// Last time the conflict zone emptied.
    release_time: f64,
    /// Vehicle that enters as soon as the zone is free.
    granted: Option<usize>,
    events: Vec<CrossingEvent>,
    av_passes: u64,
    hv_passes: u64,
}

/// AVs evenly spaced on lobe A, HVs on lobe B, all cruising.
pub fn init_world(config: &SimConfig) -> Result<WorldState> {
    config.validate()?;
    let params = config.params;
    let behavior = match config.policy {
        PolicyKind::NoEbp => AvBehavior::Yield,
        PolicyKind::NoTrust => AvBehavior::Commit(build_no_trust_policy(
            params.lambda,
            params.r,
            &config.model,
        )?),
        PolicyKind::Taebp => {
            let policy = build_taebp_policy(&params, &config.model)?;
            if policy.persuadable {
                AvBehavior::Commit(policy)
            } else {
                AvBehavior::Yield
            }
        }
    };
    let place = |kind, lobe, count: usize, first_id: usize| {
        let spacing = config.loop_length / count as f64;
        (0..count).map(move |k| VehicleState {
            id: first_id + k,
            kind,
            lobe,
            arc_pos: k as f64 * spacing,
            speed: config.cruise_speed,
            phase: Phase::Cruising,
            arrival_time: None,
        })
    };
    let vehicles = place(VehicleKind::Av, Lobe::A, config.n_av, 0)
        .chain(place(VehicleKind::Hv, Lobe::B, config.n_hv, config.n_av))
        .collect();
    Ok(WorldState {
        config: config.clone(),
        game: params.game(),
        trust: TrustLevel::new(params.theta)?,
        behavior,
        vehicles,
        time: 0.0,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        release_time: 0.0,
        granted: None,
        events: Vec::new(),
        av_passes: 0,
        hv_passes: 0,
    })
}

impl WorldState {
    pub fn vehicles(&self) -> &[VehicleState] {
        &self.vehicles
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn behavior(&self) -> &AvBehavior {
        &self.behavior
    }

    pub fn events(&self) -> &[CrossingEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<CrossingEvent> {
        self.events
    }

    /// Completed intersection passes by AVs and by HVs.
    pub fn passes(&self) -> (u64, u64) {
        (self.av_passes, self.hv_passes)
    }

    /// Distance from each vehicle to the one ahead of it along the track.
    pub fn headways(&self) -> Vec<f64> {
        let ring = 2.0 * self.config.loop_length;
        let pos: Vec<f64> = self.vehicles.iter().map(|v| self.ring_pos(v)).collect();
        (0..pos.len())
            .map(|i| self.leader_distance(&pos, i, ring))
            .collect()
    }

    /// Admits vehicles to the intersection, then moves everyone by `dt`.
    pub fn step(&mut self, dt: f64) {
        self.control();
        self.advance(dt);
        self.time += dt;
    }

    fn ring_pos(&self, v: &VehicleState) -> f64 {
        v.lobe.offset(self.config.loop_length) + v.arc_pos
    }

    fn leader_distance(&self, pos: &[f64], i: usize, ring: f64) -> f64 {
        (0..pos.len())
            .filter(|&j| j != i)
            .map(|j| (pos[j] - pos[i]).rem_euclid(ring))
            .fold(f64::INFINITY, f64::min)
    }

    fn zone_busy(&self) -> bool {
        self.vehicles.iter().any(|v| v.phase == Phase::Crossing)
    }

    fn head(&self, lobe: Lobe) -> Option<usize> {
        self.vehicles
            .iter()
            .position(|v| v.lobe == lobe && v.phase == Phase::StoppedAtLine)
    }

    /// The next vehicle due at `lobe`'s stop line, if it is still moving.
    fn approaching(&self, lobe: Lobe) -> Option<usize> {
        let line = self.config.stop_line();
        self.vehicles
            .iter()
            .enumerate()
            .filter(|(_, v)| v.lobe == lobe && v.phase != Phase::Crossing && v.arc_pos < line)
            .max_by(|a, b| a.1.arc_pos.total_cmp(&b.1.arc_pos))
            .filter(|(_, v)| v.phase == Phase::Cruising)
            .map(|(i, _)| i)
    }

    /// Arrival time for simultaneity: a vehicle that waited for the zone to
    /// clear counts as arriving when it cleared.
    fn ready_time(&self, i: usize) -> f64 {
        self.vehicles[i]
            .arrival_time
            .unwrap_or(self.time)
            .max(self.release_time)
    }

    fn yields(&self, i: usize) -> bool {
        self.vehicles[i].kind == VehicleKind::Av && self.behavior == AvBehavior::Yield
    }

    fn enter(&mut self, i: usize) {
        let v = &mut self.vehicles[i];
        v.phase = Phase::Crossing;
        v.arrival_time = None;
    }

    fn control(&mut self) {
        if self.zone_busy() {
            return;
        }
        if let Some(i) = self.granted.take() {
            self.enter(i);
            return;
        }
        match (self.head(Lobe::A), self.head(Lobe::B)) {
            (None, None) => {}
            (Some(h), None) | (None, Some(h)) => self.lone_head(h),
            (Some(a), Some(b)) => self.two_heads(a, b),
        }
    }

    fn lone_head(&mut self, h: usize) {
        let lobe = self.vehicles[h].lobe.other();
        if let Some(o) = self.approaching(lobe) {
            let other = &self.vehicles[o];
            let distance = self.config.stop_line() - other.arc_pos;
            if self.yields(h) && other.kind == VehicleKind::Hv && distance <= self.config.follow_gap
            {
                return;
            }
            if other.kind != self.vehicles[h].kind {
                let eta = self.time + distance / self.config.cruise_speed;
                if eta - self.ready_time(h) <= self.config.arrival_window + EPS {
                    return;
                }
            }
        }
        self.enter(h);
    }

    fn first_arrived(&self, a: usize, b: usize) -> usize {
        let key = |i: usize| (self.vehicles[i].arrival_time.unwrap_or(self.time), i);
        if key(a).0 < key(b).0 || (key(a).0 == key(b).0 && a < b) {
            a
        } else {
            b
        }
    }

    fn two_heads(&mut self, a: usize, b: usize) {
        if self.vehicles[a].kind == self.vehicles[b].kind {
            let first = self.first_arrived(a, b);
            self.enter(first);
            return;
        }
        let (av, hv) = if self.vehicles[a].kind == VehicleKind::Av {
            (a, b)
        } else {
            (b, a)
        };
        // A yielding AV is still waiting when the HV shows up, so they always
        // meet; otherwise they only meet if they arrived together.
        let gap = (self.ready_time(av) - self.ready_time(hv)).abs();
        if !self.yields(av) && gap > self.config.arrival_window + EPS {
            let first = if self.ready_time(av) < self.ready_time(hv) {
                av
            } else {
                hv
            };
            self.enter(first);
            return;
        }
        let encounter = resolve_crossing(
            &self.behavior,
            &self.game,
            self.trust,
            &self.vehicles[av],
            &self.vehicles[hv],
            self.time,
            &mut self.rng,
        );
        self.events.push(encounter.event);
        match encounter.resolution {
            Resolution::Collision => {
                self.enter(av);
                self.enter(hv);
            }
            Resolution::AvFirst => {
                self.enter(av);
                self.granted = Some(hv);
            }
            Resolution::HvFirst { av_next } => {
                self.enter(hv);
                if av_next {
                    self.granted = Some(av);
                }
            }
        }
    }

    fn advance(&mut self, dt: f64) {
        let cfg = &self.config;
        let (l, line, ring) = (cfg.loop_length, cfg.stop_line(), 2.0 * cfg.loop_length);
        let free_run = cfg.cruise_speed * dt;
        let pos: Vec<f64> = self.vehicles.iter().map(|v| self.ring_pos(v)).collect();
        let headway: Vec<f64> = (0..pos.len())
            .map(|i| self.leader_distance(&pos, i, ring))
            .collect();

        let mut last_exit: Option<f64> = None;
        for (i, v) in self.vehicles.iter_mut().enumerate() {
            if v.phase == Phase::StoppedAtLine {
                v.speed = 0.0;
                continue;
            }
            let follow_cap = (headway[i] - cfg.follow_gap).max(0.0);
            let mut step = free_run.min(follow_cap);
            let mut at_line = false;
            if v.phase != Phase::Crossing && v.arc_pos < line {
                let to_line = line - v.arc_pos;
                if to_line <= step + EPS {
                    step = to_line;
                    at_line = true;
                }
            }
            let old = v.arc_pos;
            v.speed = step / dt;
            if at_line {
                v.arc_pos = line;
                v.phase = Phase::StoppedAtLine;
                v.arrival_time = Some(self.time + step / cfg.cruise_speed);
                continue;
            }
            v.arc_pos += step;
            if v.phase == Phase::Crossing {
                if v.arc_pos >= l {
                    v.arc_pos -= l;
                    v.lobe = v.lobe.other();
                    v.phase = Phase::Cruising;
                    match v.kind {
                        VehicleKind::Av => self.av_passes += 1,
                        VehicleKind::Hv => self.hv_passes += 1,
                    }
                    let exit = self.time + dt * (l - old) / step;
                    last_exit = Some(last_exit.map_or(exit, |t: f64| t.max(exit)));
                }
            } else {
                v.phase = if step < free_run - EPS {
                    Phase::Queued
                } else {
                    Phase::Cruising
                };
            }
        }
        if let Some(exit) = last_exit {
            if !self.zone_busy() {
                self.release_time = exit;
            }
        }
    }
}
