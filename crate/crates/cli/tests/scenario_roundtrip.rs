use std::path::Path;

use proptest::prelude::*;
use vagueness_cli::scenario::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, Just(0.0), Just(1.9), any::<i32>().prop_map(f64::from)]
}

fn bound() -> impl Strategy<Value = Bound> {
    prop_oneof![
        4 => finite().prop_map(Bound),
        1 => Just(Bound(f64::INFINITY)),
        1 => Just(Bound(f64::NEG_INFINITY)),
    ]
}

fn entry(d: usize) -> impl Strategy<Value = SystemEntry> {
    (
        "[a-z][a-z0-9_-]{0,8}",
        prop::collection::vec(finite(), d),
        prop::option::of(prop_oneof![Just(ProvenanceTag::Apriori), Just(ProvenanceTag::DeterminedByMetric)]),
    )
        .prop_map(|(id, features, provenance)| SystemEntry { id, features, provenance })
}

fn leaf_metric(d: usize) -> impl Strategy<Value = MetricBlock> {
    prop_oneof![
        (prop::collection::vec(finite(), d), finite(), bound(), bound())
            .prop_map(|(weights, bias, lower, upper)| MetricBlock::Linear { weights, bias, lower, upper }),
        (prop::collection::btree_map("[a-z]{1,4}", finite(), 0..4), bound(), bound())
            .prop_map(|(table, lower, upper)| MetricBlock::Tabulated { table, lower, upper }),
        (bound(), bound()).prop_map(|(lower, upper)| MetricBlock::TrivialFaithful { lower, upper }),
    ]
}

fn metric(d: usize) -> impl Strategy<Value = MetricBlock> {
    leaf_metric(d).prop_recursive(2, 4, 1, |inner| {
        prop_oneof![
            (inner.clone(), finite()).prop_map(|(b, eta0)| MetricBlock::Binarized { base: Box::new(b), eta0 }),
            (inner, finite(), finite()).prop_map(|(b, gamma0, eta0)| MetricBlock::Rescaled {
                base: Box::new(b),
                map: LandmarkBlock { gamma0, eta0 },
            }),
        ]
    })
}

fn sampler() -> impl Strategy<Value = SamplerBlock> {
    prop_oneof![
        (finite(), finite()).prop_map(|(low, high)| SamplerBlock::Uniform { low, high }),
        (finite(), finite()).prop_map(|(mean, std_dev)| SamplerBlock::Normal { mean, std_dev }),
    ]
}

fn simulation(d: usize) -> impl Strategy<Value = SimulationBlock> {
    (
        any::<u64>(),
        0..1000u64,
        (0.0..5.0f64, 0.0..5.0f64, 0.0..5.0f64),
        prop::collection::vec(sampler(), d),
        prop::collection::vec(sampler(), d),
        prop::option::of(prop::collection::vec(sampler(), d)),
        0.0..1.0f64,
        any::<bool>(),
        prop::option::of("[a-z]{1,5}-"),
    )
        .prop_map(|(seed, steps, w, clear, clear_non, borderline, frac, skip, prefix)| SimulationBlock {
            seed,
            steps,
            weights: WeightsBlock {
                clear: w.0,
                clear_non: w.1,
                borderline: w.2,
            },
            clear,
            clear_non,
            borderline: borderline.unwrap_or_default(),
            determined_fraction: frac,
            on_violation: if skip { OnViolationTag::SkipAndContinue } else { OnViolationTag::Halt },
            id_prefix: prefix,
        })
}

fn scenario() -> impl Strategy<Value = ScenarioFile> {
    (1usize..4).prop_flat_map(|d| {
        let sets = (
            prop::collection::vec(entry(d), 0..4),
            prop::collection::vec(entry(d), 0..4),
            prop::collection::vec(entry(d), 0..4),
        );
        (
            "[A-Za-z0-9 ]{1,10}",
            "[a-z']{1,10}",
            prop::collection::vec(("[a-z_]{1,8}", "[a-z]{0,3}"), d),
            metric(d),
            sets,
            prop::collection::vec(entry(d), 0..3),
            prop::option::of(simulation(d)),
            prop::option::of(0.0..1e-3f64),
        )
            .prop_map(|(observer, property, features, metric, (clear, clear_non, borderline), probes, simulation, epsilon)| {
                ScenarioFile {
                    version: SCENARIO_VERSION.into(),
                    observer,
                    property,
                    schema: SchemaBlock {
                        features: features.into_iter().map(|(name, unit)| FeatureSpec { name, unit }).collect(),
                    },
                    metric,
                    exemplars: ExemplarBlock {
                        clear,
                        clear_non,
                        borderline,
                    },
                    probes,
                    simulation,
                    epsilon,
                }
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_serialize_parse_is_identity(s in scenario()) {
        let text = s.to_json();
        let parsed = ScenarioFile::parse(Path::new("p.json"), &text).unwrap();
        prop_assert_eq!(&parsed, &s);
        prop_assert_eq!(parsed.to_json(), text);
    }
}

#[test]
fn shipped_examples_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    for name in ["tall.scenario.json", "tall_b.scenario.json", "iit.scenario.json"] {
        let path = dir.join(name);
        let text = std::fs::read_to_string(&path).unwrap();
        let a = ScenarioFile::parse(&path, &text).unwrap();
        let b = ScenarioFile::parse(&path, &a.to_json()).unwrap();
        assert_eq!(a, b, "{name}");
        b.into_scenario(&path, None).unwrap();
    }
}
