use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taebp_core::persuasion::{SignalingScheme, TieBreak, TrustLevel};
use taebp_core::signal::{
    build_no_trust_policy, build_taebp_policy, DriverAction, Intent, IntersectionParams,
    LikelihoodModel,
};
use taebp_core::sim::{
    init_world, metrics, run, write_trace, AvBehavior, Crosser, CrossingEvent, Lobe, Outcome,
    Phase, PolicyKind, SimConfig, VehicleKind,
};

fn config(policy: PolicyKind, seed: u64, duration: f64) -> SimConfig {
    SimConfig {
        policy,
        seed,
        duration,
        ..SimConfig::default()
    }
}

fn trace_bytes(events: &[CrossingEvent]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trace(events, &mut buf).unwrap();
    buf
}

#[test]
fn initial_layout() {
    let world = init_world(&SimConfig::default()).unwrap();
    let vehicles = world.vehicles();
    assert_eq!(vehicles.len(), 16);
    for (k, v) in vehicles.iter().enumerate() {
        let (kind, lobe) = if k < 8 {
            (VehicleKind::Av, Lobe::A)
        } else {
            (VehicleKind::Hv, Lobe::B)
        };
        assert_eq!((v.kind, v.lobe, v.phase), (kind, lobe, Phase::Cruising));
        assert_eq!(v.arc_pos, (k % 8) as f64 * 6.25);
        assert_eq!(v.speed, 4.0);
    }

    let single = SimConfig {
        n_av: 1,
        n_hv: 1,
        ..SimConfig::default()
    };
    let world = init_world(&single).unwrap();
    assert!(world.vehicles().iter().all(|v| v.arc_pos == 0.0));
}

#[test]
fn crowded_track_is_rejected() {
    let crowded = SimConfig {
        n_av: 20,
        n_hv: 20,
        ..SimConfig::default()
    };
    assert!(init_world(&crowded).is_err());
}

#[test]
fn lone_vehicle_cruises() {
    let cfg = SimConfig {
        n_av: 1,
        n_hv: 1,
        ..SimConfig::default()
    };
    let mut world = init_world(&cfg).unwrap();
    world.step(0.05);
    for v in world.vehicles() {
        assert!((v.arc_pos - 0.2).abs() < 1e-12);
    }
}

#[test]
fn same_seed_is_bitwise_identical() {
    for policy in [PolicyKind::NoEbp, PolicyKind::NoTrust, PolicyKind::Taebp] {
        let cfg = config(policy, 42, 600.0);
        let (m1, e1) = run(&cfg).unwrap();
        let (m2, e2) = run(&cfg).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(trace_bytes(&e1), trace_bytes(&e2));
    }
    let (_, a) = run(&config(PolicyKind::Taebp, 1, 600.0)).unwrap();
    let (_, b) = run(&config(PolicyKind::Taebp, 2, 600.0)).unwrap();
    assert_ne!(trace_bytes(&a), trace_bytes(&b));
}

#[test]
fn taebp_never_collides() {
    for seed in 0..6 {
        for theta in [0.25, 0.4, 0.6, 0.9] {
            let mut cfg = config(PolicyKind::Taebp, seed, 900.0);
            cfg.params = cfg.params.with_theta(theta);
            let (m, _) = run(&cfg).unwrap();
            assert!(m.crossings > 0);
            assert_eq!(m.collisions, 0, "seed {seed}, theta {theta}");
        }
    }
}

#[test]
fn followers_keep_their_gap() {
    for policy in [PolicyKind::NoEbp, PolicyKind::NoTrust, PolicyKind::Taebp] {
        let cfg = config(policy, 7, 600.0);
        let mut world = init_world(&cfg).unwrap();
        for _ in 0..(cfg.duration / cfg.dt) as usize {
            world.step(cfg.dt);
            let min = world.headways().into_iter().fold(f64::INFINITY, f64::min);
            assert!(
                min >= cfg.follow_gap - 1e-9,
                "{policy:?} at t={}: {min}",
                world.time()
            );
            assert!(world
                .vehicles()
                .iter()
                .all(|v| (0.0..cfg.loop_length).contains(&v.arc_pos)));
        }
    }
}

#[test]
fn rates_sit_in_binomial_bands() {
    let (lambda, b) = (0.2, 0.21875);
    let band = |p: f64, n: u64| 3.0 * (p * (1.0 - p) / n as f64).sqrt();

    let (m, _) = run(&config(PolicyKind::NoTrust, 5, 7200.0)).unwrap();
    assert!(m.crossings >= 1000);
    assert!(
        (m.collision_rate - lambda).abs() <= band(lambda, m.crossings),
        "{m:?}"
    );
    assert_eq!(m.dc_count, 0);

    let p = lambda + b * (1.0 - lambda);
    let (m, _) = run(&config(PolicyKind::Taebp, 5, 3600.0)).unwrap();
    assert!(m.crossings >= 1000);
    assert!((m.dc_rate - p).abs() <= band(p, m.crossings), "{m:?}");

    let (m, _) = run(&config(PolicyKind::NoEbp, 5, 3600.0)).unwrap();
    assert_eq!((m.collisions, m.dc_count), (0, 0));
    assert!(m.av_throughput < 0.1 * m.hv_throughput);
}

/// Replays every event through the persuasion primitives.
#[test]
fn every_event_is_recomputable() {
    let params = IntersectionParams::default();
    let model = LikelihoodModel::linear(2.0).unwrap();
    let game = params.game();
    let trust = TrustLevel::new(params.theta).unwrap();
    for policy in [PolicyKind::NoEbp, PolicyKind::NoTrust, PolicyKind::Taebp] {
        let committed = match policy {
            PolicyKind::NoEbp => None,
            PolicyKind::NoTrust => Some(build_no_trust_policy(0.2, 3.0, &model).unwrap()),
            PolicyKind::Taebp => Some(build_taebp_policy(&params, &model).unwrap()),
        };
        let (_, events) = run(&config(policy, 9, 900.0)).unwrap();
        assert!(!events.is_empty());
        for e in &events {
            let (scheme, label) = match &committed {
                None => (SignalingScheme::uninformative(2), "none"),
                Some(p) => (p.scheme.clone().unwrap(), p.signal_label(e.signal)),
            };
            let post = game.trust_posterior(&scheme, label, trust).unwrap();
            assert_eq!(post.get(0), e.hv_posterior_go);
            let action = game.best_response(&post, TieBreak::FavorSender);
            let expected = if action == "DC" {
                DriverAction::DC
            } else {
                DriverAction::DR
            };
            assert_eq!(e.hv_action, expected);
            let collided =
                committed.is_some() && e.av_intent == Intent::Go && expected == DriverAction::DR;
            assert_eq!(e.outcome == Outcome::Collision, collided);
            assert_eq!(e.crosser == Crosser::Both, collided);
        }
    }
}

#[test]
fn unpersuadable_taebp_falls_back_to_yielding() {
    let mut cfg = config(PolicyKind::Taebp, 1, 600.0);
    cfg.params = cfg.params.with_theta(0.1);
    assert_eq!(init_world(&cfg).unwrap().behavior(), &AvBehavior::Yield);
    let (m, events) = run(&cfg).unwrap();
    assert_eq!((m.collisions, m.dc_count), (0, 0));
    assert!(events
        .iter()
        .all(|e| e.signal == 0.0 && e.crosser == Crosser::HV));
}

#[test]
fn dc_rate_of_iid_trace_matches_persuaded_fraction() {
    let p = 0.375;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let events: Vec<CrossingEvent> = (0..100_000)
        .map(|k| {
            let dc = rng.random::<f64>() < p;
            CrossingEvent {
                time: k as f64,
                av_id: 0,
                hv_id: 1,
                av_intent: Intent::Stop,
                signal: 0.0,
                hv_posterior_go: 0.0,
                hv_action: if dc {
                    DriverAction::DC
                } else {
                    DriverAction::DR
                },
                outcome: Outcome::Crossed,
                crosser: Crosser::HV,
            }
        })
        .collect();
    let m = metrics(&events, 3600.0);
    assert!((m.dc_rate - p).abs() < 0.005, "{}", m.dc_rate);
}
