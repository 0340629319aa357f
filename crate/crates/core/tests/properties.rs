use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use deltasr::explain::agreement_probability;
use deltasr::format::{deserialize, serialize};
use deltasr::harness::hoeffding_bound;
use deltasr::reduce::{amplify, build_l, build_t1, choose_params, AmplifierParams, GapSource};
use deltasr::tree::random_tree;
use deltasr::{eval_partial, DyadicRational, FeatureSet, PartialInput, Prob, Ratio};

fn partial(rng: &mut ChaCha8Rng, n: usize) -> PartialInput {
    PartialInput::new(
        (0..n)
            .map(|_| match rng.gen_range(0..3) {
                0 => None,
                1 => Some(false),
                _ => Some(true),
            })
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialisation_round_trip(seed in any::<u64>(), n in 1usize..=12, depth in 0usize..8, repeats in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, n, depth, repeats);
        let text = serialize(&tree);
        let back = deserialize(&text).unwrap();
        prop_assert_eq!(serialize(&back), text);
        for _ in 0..4 {
            let y = partial(&mut rng, n);
            prop_assert_eq!(eval_partial(&tree, &y).unwrap(), eval_partial(&back, &y).unwrap());
        }
    }

    #[test]
    fn value_is_a_probability_and_flips(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, n, 6, true);
        let y = partial(&mut rng, n);
        let v = eval_partial(&tree, &y).unwrap();
        prop_assert!(v.is_probability());
        let w = eval_partial(&tree.with_flipped_labels(), &y).unwrap();
        prop_assert_eq!(v + w, DyadicRational::from_u64(1, 0));
    }

    #[test]
    fn full_set_always_agrees(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, n, 5, false);
        let x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let a = agreement_probability(&tree, &x, &FeatureSet::full(n)).unwrap();
        prop_assert_eq!(a, DyadicRational::from_u64(1, 0));
    }

    /// T ≤ T₁ ≤ T + 2^{-u}, with u the undefined block coordinates.
    #[test]
    fn t1_union_bound(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, n, 4, false);
        let t1 = build_t1(&tree, &Ratio::new(1.into(), 2.into()), Some(m), 64).unwrap().tree;
        let y = partial(&mut rng, n);
        let block: Vec<Option<bool>> = (0..m).map(|_| rng.gen_bool(0.5).then_some(true)).collect();
        let undefined = block.iter().filter(|b| b.is_none()).count() as u64;
        let z = y.concat(&PartialInput::new(block));
        let base = eval_partial(&tree, &y).unwrap();
        let lifted = eval_partial(&t1, &z).unwrap();
        prop_assert!(lifted >= base);
        prop_assert!(lifted <= base + DyadicRational::pow2_inv(undefined));
    }

    /// The amplified tree only depends on each block through its own value.
    #[test]
    fn amplified_blocks_are_independent(seed in any::<u64>(), k in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha: Vec<bool> = (0..6).map(|i| i % 3 == 0).collect();
        let inst = deltasr::instance::generate_random(6, 3, 3, seed, Some(&alpha)).unwrap();
        let (l, layout) = build_l(&inst).unwrap();
        let t = rng.gen_range(0..=k);
        let amp = amplify(&l, &AmplifierParams::custom(k, t).unwrap(), 1 << 20).unwrap();
        let blocks: Vec<PartialInput> = (0..k).map(|_| partial(&mut rng, layout.width())).collect();
        let ys = blocks.iter().skip(1).fold(blocks[0].clone(), |a, b| a.concat(b));
        let per: Vec<Prob> = blocks.iter().map(|b| eval_partial(&l, b).unwrap()).collect();
        prop_assert_eq!(eval_partial(&amp, &ys).unwrap(), deltasr::reduce::bernoulli_tail(&per, t));
    }
}

/// Simulated K-copy runs at per-copy success 7/8 fall below the threshold no
/// more often than the Hoeffding bound allows.
#[test]
fn hoeffding_against_simulation() {
    let kappa = Ratio::new(1.into(), 2.into());
    let params =
        choose_params(&kappa, GapSource::Explicit(Ratio::new(1.into(), 4.into()))).unwrap();
    let (k, t) = (params.copies, params.threshold);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 10_000;
    let below = (0..trials)
        .filter(|_| (0..k).filter(|_| rng.gen_ratio(7, 8)).count() < t)
        .count();
    let observed = below as f64 / trials as f64;
    // failing runs have a success fraction of at most (t − 1)/K
    let dev = 7.0 / 8.0 - (t as f64 - 1.0) / k as f64;
    let bound = hoeffding_bound(dev, k as f64);
    assert!(observed <= bound, "observed {observed}, bound {bound}");
    // the exact tail, for scale
    let exact = deltasr::reduce::bernoulli_tail(&vec![Ratio::new(7.into(), 8.into()); k], t);
    let miss = (BigRational::one() - exact).to_f64().unwrap();
    assert!(
        (observed - miss).abs() < 0.01,
        "simulated {observed}, exact {miss}"
    );
    assert!(miss <= (-(k as f64) * 0.25 * 0.25 / 2.0).exp());
}
