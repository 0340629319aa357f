//! 1-in-k exact hitting set instances.
//!
//! Every clause lists exactly `k` distinct positive variables and is
//! satisfied when exactly one of them is set to 1.
//!
//! Text format, DIMACS style:
//!
//! ```text
//! c optional comments
//! p 1inkhs <vars> <clauses> <width>
//! 1 2 3 0
//! 2 4 5 0
//! ```

use std::fmt::Write as _;

use num_rational::BigRational;
use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HittingSetInstance {
    num_vars: usize,
    width: usize,
    /// 0-based variable indices, in the order given.
    clauses: Vec<Vec<usize>>,
}

impl HittingSetInstance {
    /// Clauses use 0-based indices.
    pub fn new(num_vars: usize, width: usize, clauses: Vec<Vec<usize>>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::Domain(
                "an instance needs at least one clause".into(),
            ));
        }
        if width == 0 {
            return Err(Error::Domain("clause width must be positive".into()));
        }
        for (j, clause) in clauses.iter().enumerate() {
            validate_clause(clause, num_vars, width)
                .map_err(|m| Error::Domain(format!("clause {}: {m}", j + 1)))?;
        }
        Ok(HittingSetInstance {
            num_vars,
            width,
            clauses,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<usize>] {
        &self.clauses
    }

    /// Number of clauses with exactly one variable set to 1.
    pub fn count_satisfied(&self, alpha: &[bool]) -> Result<usize> {
        check_len(self.num_vars, alpha.len())?;
        Ok(self
            .clauses
            .iter()
            .filter(|c| c.iter().filter(|&&v| alpha[v]).count() == 1)
            .count())
    }

    pub fn is_satisfied_by(&self, alpha: &[bool]) -> Result<bool> {
        Ok(self.count_satisfied(alpha)? == self.num_clauses())
    }
}

fn validate_clause(
    clause: &[usize],
    num_vars: usize,
    width: usize,
) -> std::result::Result<(), String> {
    if clause.len() != width {
        return Err(format!("has {} variables, expected {width}", clause.len()));
    }
    for (i, &v) in clause.iter().enumerate() {
        if v >= num_vars {
            return Err(format!("variable {} outside 1..={num_vars}", v + 1));
        }
        if clause[..i].contains(&v) {
            return Err(format!("variable {} listed twice", v + 1));
        }
    }
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<HittingSetInstance> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut pending: Vec<(usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::parse(line_no, 1, "duplicate header"));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 5 || toks[0] != "p" || toks[1] != "1inkhs" {
                return Err(Error::parse(
                    line_no,
                    1,
                    "expected `p 1inkhs <vars> <clauses> <width>`",
                ));
            }
            let num = |i: usize| -> Result<usize> {
                toks[i].parse().map_err(|_| {
                    Error::parse(line_no, 1, format!("bad number {:?} in header", toks[i]))
                })
            };
            header = Some((num(2)?, num(3)?, num(4)?));
            continue;
        }
        let (num_vars, _, width) =
            header.ok_or_else(|| Error::parse(line_no, 1, "clause before `p 1inkhs` header"))?;
        let mut column = 1;
        for tok in line.split_whitespace() {
            column = raw[column - 1..]
                .find(tok)
                .map(|o| o + column)
                .unwrap_or(column);
            let v: usize = tok.parse().map_err(|_| {
                Error::parse(
                    line_no,
                    column,
                    format!("expected a positive variable, found {tok:?}"),
                )
            })?;
            if v == 0 {
                let clause: Vec<usize> = pending.iter().map(|&(v, _)| v - 1).collect();
                validate_clause(&clause, num_vars, width)
                    .map_err(|m| Error::parse(line_no, column, m))?;
                clauses.push(clause);
                pending.clear();
            } else {
                pending.push((v, column));
            }
            column += tok.len();
        }
        if let Some(&(_, col)) = pending.first() {
            return Err(Error::parse(line_no, col, "clause not terminated by 0"));
        }
    }
    let (num_vars, num_clauses, width) = header
        .ok_or_else(|| Error::parse(text.lines().count().max(1), 1, "missing `p 1inkhs` header"))?;
    if clauses.len() != num_clauses {
        return Err(Error::parse(
            text.lines().count().max(1),
            1,
            format!(
                "header declares {num_clauses} clauses, found {}",
                clauses.len()
            ),
        ));
    }
    HittingSetInstance::new(num_vars, width, clauses).map_err(|e| Error::parse(1, 1, e.to_string()))
}

pub fn emit_instance(inst: &HittingSetInstance) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "p 1inkhs {} {} {}",
        inst.num_vars,
        inst.num_clauses(),
        inst.width
    )
    .unwrap();
    for clause in &inst.clauses {
        for v in clause {
            write!(out, "{} ", v + 1).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

/// Largest fraction of satisfiable clauses, by trying all `2^n` assignments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxSat {
    pub satisfied: usize,
    pub fraction: BigRational,
    /// Lexicographically smallest assignment attaining the maximum, reading
    /// `α₁` as the most significant position.
    pub witness: Vec<bool>,
}

pub const MAX_SAT_VAR_CAP: usize = 24;

pub fn max_sat_fraction_bruteforce(inst: &HittingSetInstance) -> Result<MaxSat> {
    let n = inst.num_vars;
    if n > MAX_SAT_VAR_CAP {
        return Err(Error::budget(
            "max-sat enumeration (variables)",
            n,
            MAX_SAT_VAR_CAP,
        ));
    }
    // rank r encodes α with α₁ as the top bit, so increasing r is lexicographic
    let masks: Vec<u32> = inst
        .clauses
        .iter()
        .map(|c| c.iter().fold(0u32, |m, &v| m | 1 << (n - 1 - v)))
        .collect();
    let score = |r: u32| masks.iter().filter(|&&m| (r & m).count_ones() == 1).count();
    let total: u64 = 1 << n;
    let chunk: u64 = 1 << 12;
    let (satisfied, rank) = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut best = (0usize, u32::MAX);
            for r in c * chunk..((c + 1) * chunk).min(total) {
                let s = score(r as u32);
                if s > best.0 || best.1 == u32::MAX {
                    best = (s, r as u32);
                }
            }
            best
        })
        .reduce(
            || (0, u32::MAX),
            |a, b| {
                // larger count wins; among equals, smaller rank
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );
    let witness = (0..n).map(|i| rank >> (n - 1 - i) & 1 == 1).collect();
    Ok(MaxSat {
        satisfied,
        fraction: BigRational::new(satisfied.into(), inst.num_clauses().into()),
        witness,
    })
}

/// Seeded random instance. Randomness is ChaCha8 seeded from `seed`.
///
/// With a planted assignment every clause takes exactly one variable that is
/// 1 under it, so the instance is satisfied by the plant.
pub fn generate_random(
    num_vars: usize,
    num_clauses: usize,
    width: usize,
    seed: u64,
    planted: Option<&[bool]>,
) -> Result<HittingSetInstance> {
    if width == 0 || width > num_vars {
        return Err(Error::Parameter(format!(
            "width {width} must lie in 1..={num_vars}"
        )));
    }
    if num_clauses == 0 {
        return Err(Error::Parameter("need at least one clause".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = match planted {
        None => (0..num_clauses)
            .map(|_| {
                let mut c = sample(&mut rng, num_vars, width).into_vec();
                c.sort_unstable();
                c
            })
            .collect(),
        Some(alpha) => {
            check_len(num_vars, alpha.len())?;
            let ones: Vec<usize> = (0..num_vars).filter(|&i| alpha[i]).collect();
            let zeros: Vec<usize> = (0..num_vars).filter(|&i| !alpha[i]).collect();
            if ones.is_empty() {
                return Err(Error::Parameter("planted assignment has no 1s".into()));
            }
            if zeros.len() < width - 1 {
                return Err(Error::Parameter(format!(
                    "planted assignment has {} zeros, clauses need {}",
                    zeros.len(),
                    width - 1
                )));
            }
            (0..num_clauses)
                .map(|_| {
                    let mut c: Vec<usize> = sample(&mut rng, zeros.len(), width - 1)
                        .into_iter()
                        .map(|i| zeros[i])
                        .collect();
                    c.push(ones[rng.gen_range(0..ones.len())]);
                    c.sort_unstable();
                    c
                })
                .collect()
        }
    };
    HittingSetInstance::new(num_vars, width, clauses)
}
