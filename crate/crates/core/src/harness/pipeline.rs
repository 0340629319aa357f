//! End-to-end run: build `L`, pick amplifier parameters, amplify, check.

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::checks::{
    certified_soundness_reports, general_soundness_reports, soundness_profile, verify_completeness,
    SoundnessProfile,
};
use crate::harness::report::{Bundle, Relation, VerificationReport};
use crate::instance::{max_sat_fraction_bruteforce, HittingSetInstance, MAX_SAT_VAR_CAP};
use crate::reduce::{
    amplified_node_estimate, bernoulli_tail, build_l, choose_params, AmplifierParams, GapSource,
};

#[derive(Clone, Debug, PartialEq)]
pub enum PipelineGap {
    Explicit(BigRational),
    Floor,
    /// `7/8 − max L`, measured on this instance.
    Measured,
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub gap: PipelineGap,
    /// Hand-picked `(copies, threshold)`; overrides the gap-derived values.
    pub copies: Option<(usize, usize)>,
    /// Satisfying assignment for the completeness side; found by brute
    /// force when absent and `n` is small.
    pub alpha: Option<Vec<bool>>,
    pub node_budget: u128,
    pub enum_budget: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            gap: PipelineGap::Measured,
            copies: None,
            alpha: None,
            node_budget: crate::reduce::amplify::DEFAULT_AMPLIFY_NODE_BUDGET,
            enum_budget: crate::harness::checks::DEFAULT_ENUM_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineStats {
    pub width_l: usize,
    pub depth_l: usize,
    pub nodes_l: usize,
    pub copies: usize,
    pub threshold: usize,
    pub num_vars_t: usize,
    pub depth_t: usize,
    /// Arena size of the amplified tree, when it was built.
    pub nodes_t: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub bundle: Bundle,
    pub params: AmplifierParams,
    pub stats: PipelineStats,
}

pub fn run_full_pipeline(
    inst: &HittingSetInstance,
    kappa: &BigRational,
    opts: &PipelineOptions,
) -> Result<PipelineRun> {
    let (l, layout) = build_l(inst)?;
    let mut reports = Vec::new();
    let profile: Option<SoundnessProfile> = match soundness_profile(inst, opts.enum_budget) {
        Ok(p) => Some(p),
        Err(e) if e.is_budget() => None,
        Err(e) => return Err(e),
    };
    let params = match (&opts.copies, &opts.gap) {
        (Some((k, t)), _) => AmplifierParams::custom(*k, *t)?,
        (None, PipelineGap::Explicit(g)) => choose_params(kappa, GapSource::Explicit(g.clone()))?,
        (None, PipelineGap::Floor) => choose_params(kappa, GapSource::Floor)?,
        (None, PipelineGap::Measured) => {
            let p = profile.as_ref().ok_or_else(|| {
                Error::budget("gap measurement (inputs)", "over budget", opts.enum_budget)
            })?;
            let gap = p.gap();
            if gap <= BigRational::from_integer(0.into()) {
                return Err(Error::Parameter(format!(
                    "measured gap {gap} is not positive: max L(p) = {}",
                    p.max_all
                )));
            }
            choose_params(kappa, GapSource::Measured(gap))?
        }
    };
    let params = AmplifierParams {
        kappa: params.kappa.or_else(|| Some(kappa.clone())),
        ..params
    };

    let alpha = match &opts.alpha {
        Some(a) => Some(a.clone()),
        None if inst.num_vars() <= MAX_SAT_VAR_CAP => {
            let best = max_sat_fraction_bruteforce(inst)?;
            (best.satisfied == inst.num_clauses()).then_some(best.witness)
        }
        None => None,
    };
    match &alpha {
        Some(a) => reports.extend(verify_completeness(
            inst,
            a,
            Some(&params),
            opts.node_budget,
        )?),
        None => reports.push(VerificationReport::skipped(
            "completeness/L",
            "no satisfying assignment known",
        )),
    }

    match &profile {
        Some(p) => {
            reports.extend(general_soundness_reports(p));
            if p.certified() {
                reports.extend(certified_soundness_reports(p));
                // T(Y) is increasing in every block value, so its maximum is
                // the tail at the per-block maximum
                let tail =
                    bernoulli_tail(&vec![p.max_all.clone(); params.copies], params.threshold);
                reports.push(
                    VerificationReport::check(
                        "soundness/T",
                        Relation::Lt,
                        kappa,
                        &tail.to_rational(),
                    )
                    .param("copies", params.copies)
                    .param("threshold", params.threshold),
                );
            } else {
                reports.push(VerificationReport::skipped(
                    "soundness/T",
                    format!("max-sat fraction {} is above 1/2", p.max_sat.fraction),
                ));
            }
        }
        None => reports.push(VerificationReport::skipped(
            "soundness/L",
            "enumeration over budget",
        )),
    }

    let (nodes_t, depth_t, note) = if amplified_node_estimate(&l, params.copies) <= opts.node_budget
    {
        let t = crate::reduce::amplify(&l, &params, opts.node_budget)?;
        (
            Some(t.node_count()),
            t.depth(),
            "measured on the built tree",
        )
    } else {
        (
            None,
            l.depth() * params.copies,
            "tree over budget; depth(L)·K",
        )
    };
    reports.push(
        VerificationReport::check(
            "pipeline/depth",
            Relation::Eq,
            &BigRational::from_integer(((layout.depth()) * params.copies).into()),
            &BigRational::from_integer(depth_t.into()),
        )
        .param("copies", params.copies)
        .with_note(note),
    );
    Ok(PipelineRun {
        bundle: Bundle::new(reports),
        stats: PipelineStats {
            width_l: layout.width(),
            depth_l: l.depth(),
            nodes_l: l.node_count(),
            copies: params.copies,
            threshold: params.threshold,
            num_vars_t: layout.width() * params.copies,
            depth_t,
            nodes_t,
        },
        params,
    })
}
