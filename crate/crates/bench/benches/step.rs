use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use neurorl::agent::Agent;
use neurorl::baselines::TacAgent;
use neurorl::clustering::{ClusterLayer, LayerParams, OpenScope};
use neurorl::env::EnvKind;
use neurorl::presets;
use neurorl::schedule::DecaySchedule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn layer_params() -> LayerParams {
    LayerParams {
        eta: DecaySchedule::constant(1e-3),
        eta_th: 1e-3,
        theta_open: DecaySchedule::constant(1e-2),
        eta_td: 1e-3,
        tau_trace: 5.0,
        open_scope: OpenScope::Group,
    }
}

fn inputs(dim: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..256).map(|_| (0..dim).map(|_| rng.gen()).collect()).collect()
}

fn layer_forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("layer_forward");
    for (name, dim, neurons, per_dim) in [("fc_4x100", 4, 100, false), ("per_dim_6x20", 6, 20, true)] {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut layer = if per_dim {
            ClusterLayer::per_dimension(dim, neurons, layer_params(), &mut rng).unwrap()
        } else {
            ClusterLayer::fully_connected(dim, neurons, layer_params(), &mut rng).unwrap()
        };
        let xs = inputs(dim);
        let mut i = 0;
        group.bench_function(name, |b| {
            b.iter(|| {
                i = (i + 1) % xs.len();
                black_box(layer.forward(&xs[i], true).unwrap());
                layer.modulate_td(0.5).unwrap();
                layer.decay_traces();
            })
        });
    }
    group.finish();
}

fn episode(c: &mut Criterion) {
    let mut group = c.benchmark_group("episode");
    group.sample_size(20);
    for (name, letter, kind) in [("proposed_b", 'b', EnvKind::CartPole), ("proposed_c", 'c', EnvKind::Acrobot)] {
        let config = presets::proposed(letter).unwrap();
        group.bench_function(name, |b| {
            b.iter_batched(
                || {
                    let mut rng = ChaCha8Rng::seed_from_u64(0);
                    (Agent::proposed(&config, &kind.spec(), &mut rng).unwrap(), kind.make(), rng)
                },
                |(mut agent, mut env, mut rng)| run(&mut agent, env.as_mut(), &mut rng),
                BatchSize::SmallInput,
            )
        });
    }
    let config = presets::tac('c').unwrap();
    let spec = EnvKind::Acrobot.spec();
    group.bench_function("tac_c", |b| {
        b.iter_batched(
            || (TacAgent::tac(&config, &spec).unwrap(), EnvKind::Acrobot.make(), ChaCha8Rng::seed_from_u64(0)),
            |(mut agent, mut env, mut rng)| run(&mut agent, env.as_mut(), &mut rng),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn run<E: neurorl::agent::StateEncoder>(
    agent: &mut Agent<E>,
    env: &mut dyn neurorl::env::Environment,
    rng: &mut ChaCha8Rng,
) -> usize {
    let obs = env.reset(rng);
    let mut steps = 0;
    let mut action = agent.step(&obs, 0.0, false, false, rng).unwrap();
    while let Some(a) = action {
        let r = env.step(a).unwrap();
        steps += 1;
        action = agent.step(&r.observation, r.reward, r.terminal, r.truncated, rng).unwrap();
    }
    steps
}

criterion_group!(benches, layer_forward, episode);
criterion_main!(benches);
