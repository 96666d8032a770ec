mod common;

use common::{enumerate_paths, path_weight};
use lpp_shape::engine::EnvironmentSpec;
use lpp_shape::field::StepGrid;
use lpp_shape::SpeedField;
use proptest::prelude::*;

fn fields() -> Vec<SpeedField> {
    vec![
        SpeedField::constant(1.0).unwrap(),
        SpeedField::two_phase(0.5, 1.0).unwrap(),
        SpeedField::corner_power(0.5, 1.2, 3.0, 3.0).unwrap(),
        SpeedField::step_grid(StepGrid::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0], vec![1.0, 0.4, 2.0, 0.7]).unwrap()),
    ]
}

#[test]
fn dp_equals_enumeration_on_small_rectangles() {
    let fs = fields();
    for seed in 0..50u64 {
        let env = EnvironmentSpec::new(fs[seed as usize % fs.len()].clone(), 4, seed).unwrap();
        for w in 1..=6u64 {
            for h in 1..=6u64 {
                for start in [(0, 0), (3, 5)] {
                    let target = (start.0 + w - 1, start.1 + h - 1);
                    let dp = env.last_passage(start, target, true).unwrap();
                    assert_eq!(dp.value, enumerate_paths(&env, start, target), "seed {seed} {start:?} {target:?}");
                    assert!(dp.path_is_valid());
                    assert_eq!(path_weight(&env, dp.path.as_ref().unwrap()), dp.value);
                }
            }
        }
    }
}

#[test]
fn weights_are_shared_across_scales() {
    let f = SpeedField::constant(2.0).unwrap();
    let a = EnvironmentSpec::new(f.clone(), 10, 77).unwrap();
    let b = EnvironmentSpec::new(f, 1000, 77).unwrap();
    for (i, j) in [(0, 0), (5, 3), (9, 9)] {
        assert_eq!(a.weight(i, j).unwrap(), b.weight(i, j).unwrap());
    }
}

fn site() -> impl Strategy<Value = (u64, u64)> {
    (0u64..60, 0u64..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn micro_superadditive_with_overlap(a in site(), b in site(), c in site(), seed in any::<u64>(), k in 0usize..4) {
        let mut xs = [a.0, b.0, c.0];
        let mut ys = [a.1, b.1, c.1];
        xs.sort();
        ys.sort();
        let (u, v, w) = ((xs[0], ys[0]), (xs[1], ys[1]), (xs[2], ys[2]));
        let env = EnvironmentSpec::new(fields()[k].clone(), 25, seed).unwrap();
        let uw = env.last_passage(u, w, false).unwrap().value;
        let uv = env.last_passage(u, v, false).unwrap().value;
        let vw = env.last_passage(v, w, false).unwrap().value;
        let tau = env.weight(v.0, v.1).unwrap();
        prop_assert!(uw >= uv + vw - tau - 1e-12 * uw);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn returned_paths_are_valid(start in site(), dx in 0u64..40, dy in 0u64..40, seed in any::<u64>(), k in 0usize..4) {
        let env = EnvironmentSpec::new(fields()[k].clone(), 40, seed).unwrap();
        let target = (start.0 + dx, start.1 + dy);
        let res = env.last_passage(start, target, true).unwrap();
        prop_assert!(res.path_is_valid());
        let path = res.path.as_ref().unwrap();
        prop_assert_eq!(path.len() as u64, dx + dy + 1);
        prop_assert!((path_weight(&env, path) - res.value).abs() <= 1e-12 * res.value);
        let ck = env.last_passage_checkpointed(start, target, 7).unwrap();
        prop_assert_eq!(ck, res);
    }

    #[test]
    fn value_grows_with_the_rectangle(seed in any::<u64>(), x in 1u64..30, y in 1u64..30) {
        let env = EnvironmentSpec::new(fields()[1].clone(), 10, seed).unwrap();
        let small = env.last_passage((0, 0), (x, y), false).unwrap().value;
        let wide = env.last_passage((0, 0), (x + 1, y), false).unwrap().value;
        let tall = env.last_passage((0, 0), (x, y + 1), false).unwrap().value;
        prop_assert!(wide > small && tall > small);
    }
}
