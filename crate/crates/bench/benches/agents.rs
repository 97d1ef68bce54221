use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eubrl_bench::eubrl_agent;
use eubrl_core::agents::Agent;
use eubrl_core::belief::UncertaintyMode;
use eubrl_core::envs::{EnvInstance, EnvSpec};

/// One hundred act/observe steps, replanning included.
fn steps(c: &mut Criterion) {
    let envs = [
        EnvSpec::Chain {
            slip: 0.2,
            back_reward: 2.0,
            stay_reward: true,
        },
        EnvSpec::DeepSea {
            size: 10,
            stochastic: false,
        },
    ];
    let mut g = c.benchmark_group("eubrl_100_steps");
    for spec in envs {
        for (tag, mode) in [
            ("variance", UncertaintyMode::Variance),
            ("mi", UncertaintyMode::MutualInformation),
            ("count", UncertaintyMode::CountBased),
        ] {
            let id = BenchmarkId::new(spec.name(), tag);
            g.bench_function(id, |b| {
                b.iter(|| {
                    let discount = spec.default_discount();
                    let mut agent =
                        Agent::with_seed(eubrl_agent(mode), &spec, discount, 1).unwrap();
                    let mut env = EnvInstance::new(spec.clone(), 0).unwrap();
                    for _ in 0..100 {
                        let s = env.state();
                        let a = agent.act(s).unwrap();
                        let tr = env.step(a).unwrap();
                        agent
                            .observe(s, a, tr.next_state, tr.reward, tr.episode_end)
                            .unwrap();
                        if tr.terminated {
                            env.reset();
                        }
                    }
                    agent.plans()
                })
            });
        }
    }
    g.finish();
}

criterion_group!(benches, steps);
criterion_main!(benches);
