use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Vector};

/// Tree-node identifier attached to an atom: the digit prefix of the node that played it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub Vec<u32>);

impl Label {
    pub fn from_digits(digits: &[usize]) -> Self {
        Label(digits.iter().map(|&h| h as u32).collect())
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: Vector,
    pub label: Option<Label>,
    pub weight: f64,
}

/// A finite-support distribution over (optionally labeled) points.
#[derive(Clone, Debug, PartialEq)]
pub struct Forecast {
    atoms: Vec<Atom>,
}

impl Forecast {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("forecast has no atoms"));
        }
        let d = atoms[0].point.dim();
        let mut total = 0.0;
        for a in &atoms {
            a.point.check_dim(d, "forecast atom")?;
            if !(a.weight >= 0.0) {
                return Err(Error::domain(format!("negative atom weight {}", a.weight)));
            }
            total += a.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("forecast weights sum to {total}")));
        }
        let mut labels: Vec<&Label> = atoms.iter().filter_map(|a| a.label.as_ref()).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("duplicate labels within one forecast"));
        }
        Ok(Forecast { atoms })
    }

    pub fn point_mass(p: Vector) -> Self {
        Forecast { atoms: vec![Atom { point: p, label: None, weight: 1.0 }] }
    }

    /// Uniform mixture over `points`, unlabeled.
    pub fn uniform(points: Vec<Vector>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        Forecast::new(points.into_iter().map(|point| Atom { point, label: None, weight: w }).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].point.dim()
    }

    /// Weighted mean of the atom points.
    pub fn mean(&self) -> Vector {
        let mut m = Vector::zeros(self.dim());
        for a in &self.atoms {
            m.add_scaled(a.weight, &a.point);
        }
        m
    }

    /// Same atoms with labels dropped.
    pub fn unlabeled(&self) -> Forecast {
        Forecast {
            atoms: self.atoms.iter().map(|a| Atom { label: None, ..a.clone() }).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Round {
    pub forecast: Forecast,
    pub outcome: Vector,
}

/// A complete interaction record `(x_t, y_t)` over a fixed domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    domain: Domain,
    rounds: Vec<Round>,
}

impl Transcript {
    pub fn new(domain: Domain) -> Self {
        Transcript { domain, rounds: Vec::new() }
    }

    pub fn from_rounds(domain: Domain, rounds: Vec<Round>) -> Result<Self> {
        let mut tr = Transcript::with_capacity(domain, rounds.len());
        for r in rounds {
            tr.push(r.forecast, r.outcome)?;
        }
        Ok(tr)
    }

    pub fn with_capacity(domain: Domain, n: usize) -> Self {
        Transcript { domain, rounds: Vec::with_capacity(n) }
    }

    pub fn push(&mut self, forecast: Forecast, outcome: Vector) -> Result<()> {
        for a in forecast.atoms() {
            self.domain.check_member(&a.point, "forecast atom")?;
        }
        self.domain.check_member(&outcome, "outcome")?;
        self.rounds.push(Round { forecast, outcome });
        Ok(())
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &Vector> {
        self.rounds.iter().map(|r| &r.outcome)
    }

    /// Applies `f` to every atom point and outcome, landing in `target`.
    pub fn map_points<F>(&self, target: Domain, mut f: F) -> Result<Transcript>
    where
        F: FnMut(&Vector) -> Result<Vector>,
    {
        let mut out = Transcript::with_capacity(target, self.len());
        for r in &self.rounds {
            let atoms = r
                .forecast
                .atoms()
                .iter()
                .map(|a| Ok(Atom { point: f(&a.point)?, label: a.label.clone(), weight: a.weight }))
                .collect::<Result<Vec<_>>>()?;
            out.push(Forecast::new(atoms)?, f(&r.outcome)?)?;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureRound {
    pub prediction: Vector,
    pub outcome: Vector,
}

/// Point predictions `p_t` with outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct PureTranscript {
    domain: Domain,
    rounds: Vec<PureRound>,
}

impl PureTranscript {
    pub fn new(domain: Domain) -> Self {
        PureTranscript { domain, rounds: Vec::new() }
    }

    pub fn push(&mut self, prediction: Vector, outcome: Vector) -> Result<()> {
        self.domain.check_member(&prediction, "prediction")?;
        self.domain.check_member(&outcome, "outcome")?;
        self.rounds.push(PureRound { prediction, outcome });
        Ok(())
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn rounds(&self) -> &[PureRound] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// View as a transcript of point-mass forecasts.
    pub fn to_transcript(&self) -> Transcript {
        Transcript {
            domain: self.domain,
            rounds: self
                .rounds
                .iter()
                .map(|r| Round { forecast: Forecast::point_mass(r.prediction.clone()), outcome: r.outcome.clone() })
                .collect(),
        }
    }
}
