//! JSON-lines transcript format: one object per round,
//! `{"t": 1, "atoms": [[[coords], label|null, weight], ...], "outcome": [coords]}`.
//!
//! Floats are written in shortest round-trip form, so reading back is bit-exact.
//! Lines carrying an `"event"` key (engine trace events) are skipped on read.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::transcript::{Atom, Forecast, Label, Round, Transcript};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub atoms: Vec<(Vec<f64>, Option<Label>, f64)>,
    pub outcome: Vec<f64>,
}

impl RoundRecord {
    pub fn from_round(t: usize, round: &Round) -> Self {
        RoundRecord {
            t,
            atoms: round
                .forecast
                .atoms()
                .iter()
                .map(|a| (a.point.to_vec(), a.label.clone(), a.weight))
                .collect(),
            outcome: round.outcome.to_vec(),
        }
    }

    pub fn into_round(self) -> Result<Round> {
        let atoms = self
            .atoms
            .into_iter()
            .map(|(p, label, weight)| Ok(Atom { point: Vector::new(p)?, label, weight }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Round { forecast: Forecast::new(atoms)?, outcome: Vector::new(self.outcome)? })
    }
}

pub fn write_round_jsonl<W: Write>(w: &mut W, t: usize, round: &Round) -> Result<()> {
    serde_json::to_writer(&mut *w, &RoundRecord::from_round(t, round))?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_jsonl<W: Write>(w: &mut W, tr: &Transcript) -> Result<()> {
    for (i, round) in tr.rounds().iter().enumerate() {
        write_round_jsonl(w, i + 1, round)?;
    }
    Ok(())
}

/// Reads rounds in file order, validating membership against `domain`.
pub fn read_jsonl<R: BufRead>(r: R, domain: Domain) -> Result<Transcript> {
    let mut tr = Transcript::new(domain);
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)?;
        if value.get("event").is_some() {
            continue;
        }
        let rec: RoundRecord = serde_json::from_value(value)?;
        if rec.t != tr.len() + 1 {
            return Err(Error::domain(format!(
                "line {}: expected round {}, found {}",
                lineno + 1,
                tr.len() + 1,
                rec.t
            )));
        }
        let round = rec.into_round()?;
        tr.push(round.forecast, round.outcome)?;
    }
    Ok(tr)
}
