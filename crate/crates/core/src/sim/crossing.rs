use rand::Rng;
use serde::{Deserialize, Serialize};

use super::world::{VehicleKind, VehicleState};
use crate::persuasion::{PersuasionGame, SignalingScheme, TieBreak, TrustLevel};
use crate::signal::{DriverAction, Intent, TaebpPolicy};

/// What an AV does when it meets a human driver.
#[derive(Debug, Clone, PartialEq)]
pub enum AvBehavior {
    /// Never signal and always yield.
    Yield,
    /// Draw an intent, signal through the committed scheme and act on it.
    Commit(TaebpPolicy),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Crossed,
    Collision,
}

/// Who entered the intersection first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crosser {
    AV,
    HV,
    Both,
}

/// One AV–HV encounter at the intersection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub time: f64,
    pub av_id: usize,
    pub hv_id: usize,
    pub av_intent: Intent,
    pub signal: f64,
    pub hv_posterior_go: f64,
    pub hv_action: DriverAction,
    pub outcome: Outcome,
    pub crosser: Crosser,
}

/// How the controller lets the pair through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    /// Both enter now.
    Collision,
    /// The AV enters now and the HV goes next.
    AvFirst,
    /// The HV enters now; the AV goes next only if `av_next`.
    HvFirst { av_next: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encounter {
    pub event: CrossingEvent,
    pub resolution: Resolution,
}

/// `Go` with probability `lambda`.
pub fn draw_intent<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Intent {
    if rng.random::<f64>() < lambda {
        Intent::Go
    } else {
        Intent::Stop
    }
}

/// Resolves an encounter between `av` and `hv` at time `time`. Yielding AVs
/// draw nothing; committed AVs draw their intent from the prior.
#[allow(clippy::too_many_arguments)]
pub fn resolve_crossing<R: Rng + ?Sized>(
    behavior: &AvBehavior,
    game: &PersuasionGame,
    trust: TrustLevel,
    av: &VehicleState,
    hv: &VehicleState,
    time: f64,
    rng: &mut R,
) -> Encounter {
    let intent = match behavior {
        AvBehavior::Yield => Intent::Stop,
        AvBehavior::Commit(_) => draw_intent(game.prior().get(0), rng),
    };
    resolve_encounter(behavior, game, trust, av, hv, time, intent, rng)
}

/// As [`resolve_crossing`] with the AV's intent fixed.
///
/// The human reads the signal through the announced scheme with their own trust
/// and best-responds, choosing DC at exact indifference. A committed AV with
/// intent Go proceeds believing it has persuaded them, so it collides with a
/// DR driver.
#[allow(clippy::too_many_arguments)]
pub fn resolve_encounter<R: Rng + ?Sized>(
    behavior: &AvBehavior,
    game: &PersuasionGame,
    trust: TrustLevel,
    av: &VehicleState,
    hv: &VehicleState,
    time: f64,
    intent: Intent,
    rng: &mut R,
) -> Encounter {
    debug_assert!(av.kind == VehicleKind::Av && hv.kind == VehicleKind::Hv);
    let silent;
    let (scheme, signal, label) = match behavior {
        AvBehavior::Yield => {
            silent = SignalingScheme::uninformative(2);
            (&silent, 0.0, "none")
        }
        AvBehavior::Commit(policy) => {
            let magnitude = policy.emit(intent, rng);
            let scheme = policy
                .scheme
                .as_ref()
                .expect("committed policies carry a scheme");
            (scheme, magnitude, policy.signal_label(magnitude))
        }
    };
    let posterior = game
        .trust_posterior(scheme, label, trust)
        .expect("emitted signals have positive probability");
    let hv_action = match game.best_response(&posterior, TieBreak::FavorSender) {
        "DC" => DriverAction::DC,
        _ => DriverAction::DR,
    };

    let (outcome, crosser, resolution) = match (behavior, intent, hv_action) {
        (AvBehavior::Yield, _, _) => (
            Outcome::Crossed,
            Crosser::HV,
            Resolution::HvFirst { av_next: false },
        ),
        (AvBehavior::Commit(_), Intent::Go, DriverAction::DR) => {
            (Outcome::Collision, Crosser::Both, Resolution::Collision)
        }
        (AvBehavior::Commit(_), Intent::Go, DriverAction::DC) => {
            (Outcome::Crossed, Crosser::AV, Resolution::AvFirst)
        }
        (AvBehavior::Commit(_), Intent::Stop, _) => (
            Outcome::Crossed,
            Crosser::HV,
            Resolution::HvFirst { av_next: true },
        ),
    };

    Encounter {
        event: CrossingEvent {
            time,
            av_id: av.id,
            hv_id: hv.id,
            av_intent: intent,
            signal,
            hv_posterior_go: posterior.get(0),
            hv_action,
            outcome,
            crosser,
        },
        resolution,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{
        build_no_trust_policy, build_taebp_policy, IntersectionParams, LikelihoodModel,
    };
    use crate::sim::world::{Lobe, Phase};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vehicle(id: usize, kind: VehicleKind, lobe: Lobe) -> VehicleState {
        VehicleState {
            id,
            kind,
            lobe,
            arc_pos: 46.6,
            speed: 0.0,
            phase: Phase::StoppedAtLine,
            arrival_time: Some(0.0),
        }
    }

    fn setup() -> (
        PersuasionGame,
        TrustLevel,
        VehicleState,
        VehicleState,
        LikelihoodModel,
    ) {
        let params = IntersectionParams::default();
        (
            params.game(),
            TrustLevel::new(0.6).unwrap(),
            vehicle(0, VehicleKind::Av, Lobe::A),
            vehicle(1, VehicleKind::Hv, Lobe::B),
            LikelihoodModel::linear(2.0).unwrap(),
        )
    }

    #[test]
    fn taebp_go_persuades() {
        let (game, trust, av, hv, model) = setup();
        let policy = build_taebp_policy(&IntersectionParams::default(), &model).unwrap();
        let behavior = AvBehavior::Commit(policy);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = resolve_encounter(&behavior, &game, trust, &av, &hv, 1.0, Intent::Go, &mut rng);
        assert!((e.event.signal - 1.641).abs() < 1e-3);
        assert!((e.event.hv_posterior_go - 0.4).abs() < 1e-9);
        assert_eq!(e.event.hv_action, DriverAction::DC);
        assert_eq!(e.event.outcome, Outcome::Crossed);
        assert_eq!(e.resolution, Resolution::AvFirst);
    }

    #[test]
    fn no_trust_go_collides() {
        let (game, trust, av, hv, model) = setup();
        let policy = build_no_trust_policy(0.2, 3.0, &model).unwrap();
        let behavior = AvBehavior::Commit(policy);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = resolve_encounter(&behavior, &game, trust, &av, &hv, 1.0, Intent::Go, &mut rng);
        assert!((e.event.signal - 1.4545).abs() < 1e-4);
        assert!((e.event.hv_posterior_go - 0.32).abs() < 1e-12);
        assert_eq!(e.event.hv_action, DriverAction::DR);
        assert_eq!(e.event.outcome, Outcome::Collision);
        assert_eq!(e.event.crosser, Crosser::Both);
    }

    #[test]
    fn yielding_av_lets_reckless_hv_through() {
        let (game, trust, av, hv, _) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let e = resolve_crossing(&AvBehavior::Yield, &game, trust, &av, &hv, 0.0, &mut rng);
            assert_eq!(e.event.av_intent, Intent::Stop);
            assert_eq!(e.event.signal, 0.0);
            assert!((e.event.hv_posterior_go - 0.2).abs() < 1e-15);
            assert_eq!(e.event.hv_action, DriverAction::DR);
            assert_eq!(e.event.crosser, Crosser::HV);
            assert_eq!(e.resolution, Resolution::HvFirst { av_next: false });
        }
    }

    #[test]
    fn stop_intent_never_collides() {
        let (game, trust, av, hv, model) = setup();
        let policy = build_no_trust_policy(0.2, 3.0, &model).unwrap();
        let behavior = AvBehavior::Commit(policy);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let e = resolve_encounter(
                &behavior,
                &game,
                trust,
                &av,
                &hv,
                0.0,
                Intent::Stop,
                &mut rng,
            );
            assert_eq!(e.event.outcome, Outcome::Crossed);
            assert_eq!(e.resolution, Resolution::HvFirst { av_next: true });
        }
    }
}
