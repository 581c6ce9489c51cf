use neurorl::actor_critic::{ActorCriticParams, EpsilonSchedule};
use neurorl::agent::Agent;
use neurorl::baselines::IdentityEncoder;
use neurorl::env::{EnvKind, Environment, LinearTrack};
use neurorl::harness::demos::track_value_iteration;
use neurorl::harness::{run_campaign, run_episode, AgentSpec, ExperimentConfig};
use neurorl::presets;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn windowed_mean(config: &ExperimentConfig, seeds: &[u64]) -> f64 {
    let campaign = run_campaign(config, seeds, false);
    assert!(campaign.failures.is_empty());
    let records = campaign.records();
    let total: f64 = records
        .iter()
        .map(|r| r.latencies[r.latencies.len() - config.window..].iter().sum::<usize>() as f64 / config.window as f64)
        .sum();
    total / records.len() as f64
}

#[test]
fn value_iteration_matches_closed_form() {
    let v = track_value_iteration(0.9);
    for (p, value) in v.iter().enumerate().skip(1) {
        let expected = if p < 90 { 0.9f64.powi(89 - p as i32) } else { 0.0 };
        assert!((value - expected).abs() < 1e-12, "position {p}");
    }
    assert!((v[50] - 0.016423203268260675).abs() < 1e-15);
}

#[test]
fn tabular_critic_learns_track_values() {
    let params = ActorCriticParams {
        gamma: 0.9,
        eta_a: 0.1,
        eta_c: 0.1,
        tau_a: 5.0,
        tau_c: 5.0,
    };
    let exploration = EpsilonSchedule {
        epsilon_min: 0.0,
        decay_episodes: 1,
    };
    let mut agent = Agent::new(IdentityEncoder::new(100, 1.0), 1, params, exploration).unwrap();
    let mut env = LinearTrack::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut policy = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..500 {
        let (latency, ret) = run_episode(&mut env, &mut agent, &mut rng, &mut policy).unwrap();
        assert_eq!((latency, ret), (99, 1.0));
    }
    let oracle = track_value_iteration(0.9);
    let learned = agent.actor_critic().value_weights();
    for p in 70..90 {
        let err = (learned[p - 1] - oracle[p]).abs() / oracle[p];
        assert!(err < 0.05, "position {p}: {} vs {}", learned[p - 1], oracle[p]);
    }
    assert_eq!(env.spec().action_count, 1);
}

#[test]
fn tabular_cart_pole_beats_random() {
    let seeds = [0, 1, 2];
    let short = presets::tac_experiment('b').unwrap();
    let random = ExperimentConfig {
        id: "random-b".into(),
        agent: AgentSpec::Random,
        ..short.clone()
    };
    let long = ExperimentConfig {
        episodes: 3000,
        ..short.clone()
    };
    let r = windowed_mean(&random, &seeds);
    let (s, l) = (windowed_mean(&short, &seeds), windowed_mean(&long, &seeds));
    assert!(s > 1.5 * r, "tabular after 1000 episodes {s} vs random {r}");
    assert!(l > 3.0 * r, "tabular after 3000 episodes {l} vs random {r}");
}

#[test]
fn random_agent_always_truncates_mountain_car() {
    let config = ExperimentConfig {
        id: "random-a".into(),
        episodes: 100,
        window: 100,
        agent: AgentSpec::Random,
        ..presets::proposed_experiment('a').unwrap()
    };
    let campaign = run_campaign(&config, &(0..10).collect::<Vec<_>>(), false);
    for record in campaign.records() {
        assert!(record.latencies.iter().all(|&l| l == 200));
        assert!(record.returns.iter().all(|&r| r == -200.0));
    }
    assert_eq!(EnvKind::MountainCar.spec().time_limit, 200);
}
