//! Seeded end-to-end suite behind `verify all`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use deltasr::harness::checks::{fat_probability_one_fixed_formula, general_soundness_reports};
use deltasr::harness::{
    fat_probability_exact, soundness_profile, verify_completeness, verify_lemma_cases,
    verify_t1_claims, Relation, T1Options, VerificationReport, DEFAULT_ENUM_BUDGET,
};
use deltasr::instance::generate_random;
use deltasr::rational::ratio;
use deltasr::reduce::amplify::DEFAULT_AMPLIFY_NODE_BUDGET;
use deltasr::reduce::{choose_params, GapSource};
use deltasr::tree::random_tree;
use deltasr::{Ratio, Result};

fn tag(
    mut reports: Vec<VerificationReport>,
    key: &str,
    value: impl ToString + Copy,
) -> Vec<VerificationReport> {
    for r in &mut reports {
        r.id = format!("{}/{key}{}", r.id, value.to_string());
    }
    reports
}

pub fn full_suite(seed: u64) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();

    for k in 2..=6 {
        out.extend(verify_lemma_cases(k)?);
    }

    for l in 1..=8 {
        let p: Ratio = fat_probability_exact(l, 1)?;
        out.push(
            VerificationReport::check(
                format!("fat-prob/one-fixed/l{l:02}"),
                Relation::Eq,
                &fat_probability_one_fixed_formula(l),
                &p,
            )
            .param("l", l),
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..6 {
        let tree = random_tree(&mut rng, 4, 4, false);
        let opts = T1Options {
            m_override: Some(6),
            ..T1Options::default()
        };
        out.extend(tag(
            verify_t1_claims(&tree, &ratio(1, 2), &opts)?,
            "tree",
            i,
        ));
    }

    let params = choose_params(&ratio(1, 2), GapSource::Explicit(ratio(1, 4)))?;
    for i in 0..4u64 {
        let planted: Vec<bool> = (0..6).map(|v| (v + i as usize).is_multiple_of(3)).collect();
        let inst = generate_random(6, 4, 3, seed.wrapping_add(i), Some(&planted))?;
        out.extend(tag(
            verify_completeness(&inst, &planted, Some(&params), DEFAULT_AMPLIFY_NODE_BUDGET)?,
            "instance",
            i,
        ));
        let profile = soundness_profile(&inst, DEFAULT_ENUM_BUDGET)?;
        out.extend(tag(general_soundness_reports(&profile), "instance", i));
    }
    Ok(out)
}
