//! `deltasr`: evaluate trees on partial inputs, check and search δ-sufficient
//! reasons, build the reduction gadgets and run the exhaustive checks.
//!
//! Exit codes: 0 pass, 1 claim failed, 2 usage or input error, 3 budget.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use deltasr::explain::{
    agreement_probability, min_sr_exhaustive, min_sr_greedy, FeatureSet, SearchLimits,
    SolverRecord, Threshold,
};
use deltasr::format::{deserialize, serialize};
use deltasr::harness::{
    fat_probability_exact, run_full_pipeline, verify_completeness, verify_lemma_cases,
    verify_soundness_bruteforce, verify_t1_claims, Bundle, PipelineGap, PipelineOptions, Relation,
    T1Options, VerificationReport, DEFAULT_ENUM_BUDGET,
};
use deltasr::instance::{emit_instance, generate_random, parse_instance, HittingSetInstance};
use deltasr::partial::{parse_bits, PartialInput};
use deltasr::rational::{parse_rational, parse_unit_rational};
use deltasr::reduce::{
    amplify, build_l, build_lc, build_t1, choose_params, AmplifierParams, GapSource,
};
use deltasr::{eval_partial, DecisionTree, Error, Ratio, SearchOutcome};

mod suite;

#[derive(Parser)]
#[command(
    name = "deltasr",
    version,
    about = "Exact δ-sufficient reasons on decision trees"
)]
struct Cli {
    /// Worker threads for parallel enumeration (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Report layout for `verify`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Records)]
    format: Format,

    /// Seed for every random choice (ChaCha8 generator).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Include wall-clock times in reports (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Records,
}

#[derive(Subcommand)]
enum Command {
    /// Exact T(y) for a partial input over {0,1,*}.
    Eval { tree: PathBuf, input: String },
    /// Decide whether a set is a δ-sufficient reason; exit 1 when it is not.
    CheckSr {
        tree: PathBuf,
        /// Complete input over {0,1}.
        input: String,
        /// Comma-separated 1-based coordinates.
        #[arg(long, default_value = "")]
        set: String,
        #[arg(long)]
        delta: String,
    },
    /// Smallest (or greedy) δ-sufficient reason.
    MinSr {
        tree: PathBuf,
        input: String,
        #[arg(long)]
        delta: String,
        #[arg(long, value_enum, default_value_t = Method::Exhaustive)]
        method: Method,
        /// Largest set size examined (default: number of variables).
        #[arg(long)]
        size_cap: Option<usize>,
        #[arg(long, default_value_t = 22)]
        max_candidates: usize,
        #[arg(long, default_value_t = 1 << 24)]
        max_checks: u64,
    },
    /// Seeded random 1-in-k hitting set instance (ChaCha8 generator).
    Gen {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long)]
        width: usize,
        /// Assignment over {0,1} every clause is satisfied by.
        #[arg(long)]
        planted: Option<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    #[command(subcommand)]
    Reduce(ReduceCmd),
    #[command(subcommand)]
    Gadget(GadgetCmd),
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exhaustive,
    Greedy,
}

#[derive(Subcommand)]
enum ReduceCmd {
    /// T₁ = T ∨ (conjunction of m fresh variables).
    T1 {
        tree: PathBuf,
        #[arg(long)]
        epsilon: String,
        /// Use this m instead of the formula; marked non-canonical.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 1 << 16)]
        max_m: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// The amplified selector tree for an instance.
    Hardness {
        instance: PathBuf,
        #[command(flatten)]
        amp: AmpArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct AmpArgs {
    #[arg(long)]
    kappa: Option<String>,
    /// Per-copy gap: a rational, `floor` (1/128) or `measured`.
    #[arg(long)]
    gap: Option<String>,
    #[arg(long)]
    copies: Option<usize>,
    #[arg(long)]
    threshold: Option<usize>,
    #[arg(long, default_value_t = 1 << 22)]
    node_budget: u128,
}

#[derive(Subcommand)]
enum GadgetCmd {
    /// Clause gadget over x1..xk and z = x(k+1), or a given clause.
    Lc {
        #[arg(long)]
        width: usize,
        /// 1-based clause positions (default 1..=width).
        #[arg(long)]
        clause: Option<String>,
        /// 1-based position of z (default width+1).
        #[arg(long)]
        z: Option<usize>,
        /// Number of variables (default: largest position).
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Selector tree for an instance.
    L {
        instance: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// K copies of a tree with a count threshold.
    Amplify {
        tree: PathBuf,
        #[command(flatten)]
        amp: AmpArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Good/bad dichotomy of the clause gadget.
    LemmaCases {
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// L(p) = 7/8 for a satisfying assignment, optionally amplified.
    Completeness {
        instance: PathBuf,
        /// Satisfying assignment over {0,1}; found by brute force if omitted.
        #[arg(long)]
        assignment: Option<String>,
        #[command(flatten)]
        amp: AmpArgs,
    },
    /// Exhaustive maximisation of L over {1,⊥} inputs.
    Soundness {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ENUM_BUDGET)]
        budget: u64,
        /// Only the bounds that hold on every instance (no max-sat precondition).
        #[arg(long)]
        general: bool,
    },
    /// Both claims of the conjunction lift.
    T1 {
        tree: PathBuf,
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Exact probability that the y-word is fat.
    FatProb {
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 1)]
        ones: usize,
    },
    /// End-to-end run on one instance.
    Pipeline {
        instance: PathBuf,
        #[command(flatten)]
        amp: AmpArgs,
        #[arg(long)]
        assignment: Option<String>,
    },
    /// The full seeded suite.
    All,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn load_tree(path: &Path) -> Result<DecisionTree, Failure> {
    deserialize(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<HittingSetInstance, Failure> {
    parse_instance(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string(v).expect("serialisable"));
}

/// Solver record with 1-based coordinates, as everywhere on the command line.
fn solver_json(rec: SolverRecord) -> Value {
    let one_based = rec.set.as_ref().map(FeatureSet::one_based);
    let mut v = serde_json::to_value(rec).expect("record");
    v["set"] = json!(one_based);
    v
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Eval { tree, input } => {
            let tree = load_tree(tree)?;
            let y: PartialInput = input.parse()?;
            let v = eval_partial(&tree, &y)?;
            print_json(&json!({
                "value": v.to_string(),
                "pow2": v.pow2_form(),
                "decimal": v.to_decimal(),
                "complete": y.is_complete(),
            }));
            Ok(0)
        }
        Command::CheckSr {
            tree,
            input,
            set,
            delta,
        } => {
            let tree = load_tree(tree)?;
            let x = parse_bits(input)?;
            let s = FeatureSet::parse(set, tree.num_vars())?;
            let delta = Threshold::new(parse_unit_rational(delta)?)?;
            let a = agreement_probability(&tree, &x, &s)?;
            let ok = delta.is_met_by(&a);
            print_json(&json!({
                "set": s.one_based(),
                "delta": delta.to_string(),
                "agreement": a.to_string(),
                "sufficient": ok,
            }));
            Ok(if ok { 0 } else { 1 })
        }
        Command::MinSr {
            tree,
            input,
            delta,
            method,
            size_cap,
            max_candidates,
            max_checks,
        } => {
            let tree = load_tree(tree)?;
            let x = parse_bits(input)?;
            let delta = Threshold::new(parse_unit_rational(delta)?)?;
            match method {
                Method::Greedy => {
                    let (s, a) = min_sr_greedy(&tree, &x, &delta)?;
                    print_json(&solver_json(SolverRecord::greedy(s, a)));
                    Ok(0)
                }
                Method::Exhaustive => {
                    let limits = SearchLimits {
                        max_candidates: *max_candidates,
                        max_checks: *max_checks,
                    };
                    let cap = size_cap.unwrap_or(tree.num_vars());
                    let outcome = min_sr_exhaustive(&tree, &x, &delta, cap, limits);
                    match &outcome {
                        Err(e) if !e.is_budget() => return Err(e.clone().into()),
                        _ => print_json(&solver_json(SolverRecord::exhaustive(&outcome))),
                    }
                    match outcome {
                        Ok(SearchOutcome::Found { .. }) => Ok(0),
                        Ok(SearchOutcome::NoneWithinCap { .. }) => Ok(1),
                        Err(e) => Err(e.into()),
                    }
                }
            }
        }
        Command::Gen {
            vars,
            clauses,
            width,
            planted,
            out,
        } => {
            let seed = &cli.seed;
            let planted = planted.as_deref().map(parse_bits).transpose()?;
            let inst = generate_random(*vars, *clauses, *width, *seed, planted.as_deref())?;
            let text = format!(
                "c generated with seed {seed} (ChaCha8)\n{}",
                emit_instance(&inst)
            );
            match out {
                Some(p) => {
                    write(p, &text)?;
                    print_json(
                        &json!({"vars": vars, "clauses": clauses, "width": width, "seed": seed, "out": p}),
                    );
                }
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Reduce(cmd) => run_reduce(cmd),
        Command::Gadget(cmd) => run_gadget(cmd),
        Command::Verify(cmd) => run_verify(cmd, cli),
    }
}

fn opt_rational(s: &Option<String>) -> Result<Option<Ratio>, Failure> {
    Ok(s.as_deref().map(parse_rational).transpose()?)
}

/// Amplifier parameters from flags; `measured` needs the instance.
fn amp_params(
    args: &AmpArgs,
    inst: Option<&HittingSetInstance>,
) -> Result<Option<AmplifierParams>, Failure> {
    if let Some(k) = args.copies {
        let t = args
            .threshold
            .ok_or_else(|| usage("--copies needs --threshold"))?;
        let mut p = AmplifierParams::custom(k, t)?;
        p.kappa = opt_rational(&args.kappa)?;
        return Ok(Some(p));
    }
    let Some(kappa) = opt_rational(&args.kappa)? else {
        return match args.gap {
            Some(_) => Err(usage("--gap needs --kappa")),
            None => Ok(None),
        };
    };
    let gap = match args.gap.as_deref() {
        None => return Err(usage("--kappa needs --gap or --copies")),
        Some("floor") => GapSource::Floor,
        Some("measured") => {
            let inst = inst.ok_or_else(|| usage("--gap measured needs an instance"))?;
            let p = deltasr::harness::soundness_profile(inst, DEFAULT_ENUM_BUDGET)?;
            GapSource::Measured(p.gap())
        }
        Some(g) => GapSource::Explicit(parse_rational(g)?),
    };
    Ok(Some(choose_params(&kappa, gap)?))
}

fn run_reduce(cmd: &ReduceCmd) -> Outcome {
    match cmd {
        ReduceCmd::T1 {
            tree,
            epsilon,
            m,
            max_m,
            out,
        } => {
            let tree = load_tree(tree)?;
            let eps = parse_rational(epsilon)?;
            let built = build_t1(&tree, &eps, *m, *max_m)?;
            write(out, &serialize(&built.tree))?;
            print_json(&json!({
                "kind": "t1",
                "out": out,
                "params": built.meta,
                "canonical": built.meta.canonical,
                "vars": built.tree.num_vars(),
                "nodes": built.tree.node_count(),
                "depth": built.tree.depth(),
            }));
            Ok(0)
        }
        ReduceCmd::Hardness { instance, amp, out } => {
            let inst = load_instance(instance)?;
            let params = amp_params(amp, Some(&inst))?
                .ok_or_else(|| usage("give --kappa with --gap, or --copies with --threshold"))?;
            let (l, layout) = build_l(&inst)?;
            let t = amplify(&l, &params, amp.node_budget)?;
            write(out, &serialize(&t))?;
            print_json(&json!({
                "kind": "hardness",
                "out": out,
                "layout": layout,
                "params": params,
                "canonical": params.gap_source.is_some(),
                "vars": t.num_vars(),
                "nodes": t.node_count(),
                "depth": t.depth(),
                "depth_l": l.depth(),
            }));
            Ok(0)
        }
    }
}

fn run_gadget(cmd: &GadgetCmd) -> Outcome {
    match cmd {
        GadgetCmd::Lc {
            width,
            clause,
            z,
            vars,
            out,
        } => {
            let clause: Vec<usize> = match clause {
                Some(c) => c
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<usize>()
                            .ok()
                            .filter(|&v| v > 0)
                            .map(|v| v - 1)
                    })
                    .collect::<Option<_>>()
                    .ok_or_else(|| usage(format!("bad clause list {c:?}")))?,
                None => (0..*width).collect(),
            };
            if clause.len() != *width {
                return Err(usage(format!(
                    "clause has {} positions, --width is {width}",
                    clause.len()
                )));
            }
            let z = match z {
                Some(0) => return Err(usage("z is 1-based")),
                Some(z) => z - 1,
                None => *width,
            };
            let n =
                vars.unwrap_or_else(|| clause.iter().copied().chain([z]).max().unwrap_or(0) + 1);
            let t = build_lc(n, &clause, z)?;
            write(out, &serialize(&t))?;
            print_json(&json!({
                "kind": "lc",
                "out": out,
                "clause": clause.iter().map(|v| v + 1).collect::<Vec<_>>(),
                "z": z + 1,
                "vars": n,
                "depth": t.depth(),
                "canonical": true,
            }));
            Ok(0)
        }
        GadgetCmd::L { instance, out } => {
            let inst = load_instance(instance)?;
            let (t, layout) = build_l(&inst)?;
            write(out, &serialize(&t))?;
            print_json(&json!({
                "kind": "l",
                "out": out,
                "layout": layout,
                "vars": t.num_vars(),
                "nodes": t.node_count(),
                "depth": t.depth(),
                "canonical": true,
            }));
            Ok(0)
        }
        GadgetCmd::Amplify { tree, amp, out } => {
            let l = load_tree(tree)?;
            let params = amp_params(amp, None)?
                .ok_or_else(|| usage("give --kappa with --gap, or --copies with --threshold"))?;
            let t = amplify(&l, &params, amp.node_budget)?;
            write(out, &serialize(&t))?;
            print_json(&json!({
                "kind": "amplify",
                "out": out,
                "params": params,
                "canonical": params.gap_source.is_some(),
                "vars": t.num_vars(),
                "nodes": t.node_count(),
                "depth": t.depth(),
            }));
            Ok(0)
        }
    }
}

fn emit(bundle: &Bundle, cli: &Cli) -> u8 {
    let bundle = if cli.timing {
        bundle.clone()
    } else {
        bundle.without_timing()
    };
    match cli.format {
        Format::Table => print!("{}", bundle.to_table()),
        Format::Records => print!("{}", bundle.to_records()),
    }
    let failed = bundle.failures().count();
    if failed > 0 {
        eprintln!("{failed} of {} claims failed", bundle.reports.len());
        1
    } else {
        0
    }
}

fn run_verify(cmd: &VerifyCmd, cli: &Cli) -> Outcome {
    let reports: Vec<VerificationReport> = match cmd {
        VerifyCmd::LemmaCases { k } => deltasr::harness::timed(|| verify_lemma_cases(*k))?,
        VerifyCmd::Completeness {
            instance,
            assignment,
            amp,
        } => {
            let inst = load_instance(instance)?;
            let alpha = match assignment {
                Some(a) => parse_bits(a)?,
                None => {
                    let best = deltasr::instance::max_sat_fraction_bruteforce(&inst)?;
                    if best.satisfied != inst.num_clauses() {
                        return Err(Failure::from(Error::Precondition(format!(
                            "instance is not satisfiable (max fraction {})",
                            best.fraction
                        ))));
                    }
                    best.witness
                }
            };
            let params = amp_params(amp, Some(&inst))?;
            deltasr::harness::timed(|| {
                verify_completeness(&inst, &alpha, params.as_ref(), amp.node_budget)
            })?
        }
        VerifyCmd::Soundness {
            instance,
            budget,
            general,
        } => {
            let inst = load_instance(instance)?;
            if *general {
                deltasr::harness::timed(|| {
                    deltasr::harness::soundness_profile(&inst, *budget)
                        .map(|p| deltasr::harness::checks::general_soundness_reports(&p))
                })?
            } else {
                deltasr::harness::timed(|| verify_soundness_bruteforce(&inst, *budget))?
            }
        }
        VerifyCmd::T1 { tree, epsilon, m } => {
            let tree = load_tree(tree)?;
            let eps = parse_rational(epsilon)?;
            let opts = T1Options {
                m_override: *m,
                ..T1Options::default()
            };
            deltasr::harness::timed(|| verify_t1_claims(&tree, &eps, &opts))?
        }
        VerifyCmd::FatProb { l, ones } => {
            let p: Ratio = fat_probability_exact(*l, *ones)?;
            let mut out = vec![
                VerificationReport::check("fat-prob/value", Relation::Eq, &p, &p)
                    .param("l", l)
                    .param("ones", ones),
            ];
            if *ones == 1 {
                out.push(
                    VerificationReport::check(
                        "fat-prob/one-fixed",
                        Relation::Eq,
                        &deltasr::harness::checks::fat_probability_one_fixed_formula(*l),
                        &p,
                    )
                    .param("l", l),
                );
            }
            out
        }
        VerifyCmd::Pipeline {
            instance,
            amp,
            assignment,
        } => {
            let inst = load_instance(instance)?;
            let kappa = opt_rational(&amp.kappa)?.ok_or_else(|| usage("pipeline needs --kappa"))?;
            let gap = match amp.gap.as_deref() {
                None | Some("measured") => PipelineGap::Measured,
                Some("floor") => PipelineGap::Floor,
                Some(g) => PipelineGap::Explicit(parse_rational(g)?),
            };
            let opts = PipelineOptions {
                gap,
                copies: amp.copies.zip(amp.threshold),
                alpha: assignment.as_deref().map(parse_bits).transpose()?,
                node_budget: amp.node_budget,
                ..PipelineOptions::default()
            };
            let run = run_full_pipeline(&inst, &kappa, &opts)?;
            eprintln!("{}", serde_json::to_string(&run.stats).expect("stats"));
            run.bundle.reports
        }
        VerifyCmd::All => suite::full_suite(cli.seed)?,
    };
    Ok(emit(&Bundle::new(reports), cli))
}
