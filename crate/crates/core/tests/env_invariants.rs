mod common;

use common::{fuzz, Script};
use neorl_core::EnvParams;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = EnvParams> {
    (1usize..9, 0.01f64..0.08, 0.01f64..0.08, 0.0005f64..0.02, 0.0f64..=1.0, 0.6f64..2.0).prop_map(
        |(count, ra, ro, speed, green, width)| EnvParams {
            object_count: count,
            agent_radius: ra,
            object_radius: ro,
            object_speed_range: [speed, speed * 2.0],
            green_probability: green,
            arena_width: width,
            ..EnvParams::default()
        },
    )
}

fn script() -> impl Strategy<Value = Script> {
    prop_oneof![Just(Script::Uniform), Just(Script::Sticky), (1u64..200).prop_map(Script::Cycle)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants_hold_for_any_arena(p in params(), seed in any::<u64>(), s in script()) {
        if let Err(e) = fuzz(p, seed, 3_000, s) {
            prop_assert!(false, "{}", e);
        }
    }
}

#[test]
fn long_default_run() {
    let stats = fuzz(EnvParams::default(), 11, 100_000, Script::Uniform).unwrap();
    assert!(stats.greens > 0 && stats.reds > 0 && stats.resets > 0 && stats.bounces > 0, "{stats:?}");
}

#[test]
fn reset_counts_on_degenerate_boards() {
    let p = EnvParams {
        green_probability: 1.0,
        ..EnvParams::default()
    };
    let stats = fuzz(p, 3, 20_000, Script::Sticky).unwrap();
    assert_eq!(stats.reds, 0);
    // With one object every green capture is also the last green.
    let single = EnvParams {
        object_count: 1,
        ..EnvParams::default()
    };
    let s = fuzz(single, 9, 20_000, Script::Uniform).unwrap();
    assert_eq!(s.resets, s.greens);
}
