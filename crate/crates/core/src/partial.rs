use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};

/// A vector over `{0, 1, ⊥}`; `None` is ⊥.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialInput(Vec<Option<bool>>);

impl PartialInput {
    pub fn new(values: Vec<Option<bool>>) -> Self {
        PartialInput(values)
    }

    pub fn undefined(len: usize) -> Self {
        PartialInput(vec![None; len])
    }

    pub fn complete(x: &[bool]) -> Self {
        PartialInput(x.iter().map(|&b| Some(b)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Option<bool>] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: Option<bool>) {
        self.0[i] = value;
    }

    pub fn with(&self, i: usize, value: Option<bool>) -> Self {
        let mut y = self.clone();
        y.0[i] = value;
        y
    }

    pub fn is_complete(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    pub fn undefined_count(&self) -> usize {
        self.0.iter().filter(|v| v.is_none()).count()
    }

    /// The defined coordinates as a complete input, if there are no ⊥.
    pub fn to_complete(&self) -> Option<Vec<bool>> {
        self.0.iter().copied().collect()
    }

    /// Concatenation `self ∥ other`.
    pub fn concat(&self, other: &PartialInput) -> PartialInput {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        PartialInput(v)
    }

    /// `self` repeated `times` times.
    pub fn repeat(&self, times: usize) -> PartialInput {
        PartialInput(self.0.repeat(times))
    }
}

/// True iff no coordinate carries two distinct defined values.
pub fn consistent(x: &PartialInput, y: &PartialInput) -> Result<bool> {
    check_len(x.len(), y.len())?;
    Ok(x.0
        .iter()
        .zip(&y.0)
        .all(|(a, b)| !matches!((a, b), (Some(p), Some(q)) if p != q)))
}

impl fmt::Display for PartialInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            f.write_str(match v {
                Some(false) => "0",
                Some(true) => "1",
                None => "*",
            })?;
        }
        Ok(())
    }
}

impl FromStr for PartialInput {
    type Err = Error;

    /// Parses a string over `{0, 1, *}`; position `j` is variable `j`.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(Some(false)),
                '1' => Ok(Some(true)),
                '*' => Ok(None),
                other => Err(Error::parse(
                    1,
                    i + 1,
                    format!("unexpected {other:?} in partial input"),
                )),
            })
            .collect::<Result<Vec<_>>>()
            .map(PartialInput)
    }
}

/// Parses a bit string over `{0, 1}`.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    let p: PartialInput = s.parse()?;
    p.to_complete()
        .ok_or_else(|| Error::Domain(format!("{s:?} contains undefined positions")))
}

pub fn format_bits(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}
