//! Outcome-stream generators.
//!
//! All randomness comes from ChaCha8 seeded with `seed_from_u64` and split by
//! stream number (see [`child_rng`]), so streams are identical across platforms.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, Domain, NormKind, Vector};
use crate::metrics::Forecast;

/// RNG stream used by the adversary within a run.
pub const STREAM_ADVERSARY: u64 = 1;
/// RNG stream used for sampling pure predictions within a run.
pub const STREAM_SAMPLER: u64 = 2;

/// Portable generator for `(seed, stream)`. Distinct streams are independent.
pub fn child_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversarySpec {
    /// The same outcome every round.
    Constant { point: Vec<f64> },
    /// Domain vertices `0, 1, .., period-1` in turn.
    VertexCycle { period: usize },
    /// Independent vertex draws; empty `weights` means uniform over all vertices.
    IidVertices { weights: Vec<f64> },
    /// Independent symmetric Dirichlet draws (simplex only).
    IidDirichlet { alpha: f64 },
    /// Deterministic linear path from `start` (round 1) to `end` (last round).
    DriftingMean { start: Vec<f64>, end: Vec<f64> },
    /// Adaptive: the vertex farthest in L1 from the forecast mean (ties within 1e-12 go to
    /// the lowest index).
    FarthestVertex,
}

impl AdversarySpec {
    pub fn is_adaptive(&self) -> bool {
        matches!(self, AdversarySpec::FarthestVertex)
    }

    pub fn name(&self) -> &'static str {
        match self {
            AdversarySpec::Constant { .. } => "constant",
            AdversarySpec::VertexCycle { .. } => "vertex-cycle",
            AdversarySpec::IidVertices { .. } => "iid-vertices",
            AdversarySpec::IidDirichlet { .. } => "iid-dirichlet",
            AdversarySpec::DriftingMean { .. } => "drifting-mean",
            AdversarySpec::FarthestVertex => "farthest-vertex",
        }
    }
}

enum Source {
    Fixed(Vector),
    Cycle(usize),
    Vertices(WeightedIndex<f64>),
    Dirichlet(Gamma<f64>),
    Drift(Vector, Vector),
    Farthest,
}

pub struct Adversary {
    domain: Domain,
    horizon: usize,
    source: Source,
    rng: ChaCha8Rng,
}

impl Adversary {
    pub fn new(spec: &AdversarySpec, domain: Domain, horizon: usize, seed: u64) -> Result<Self> {
        let member = |coords: &[f64], what: &str| -> Result<Vector> {
            let v = Vector::new(coords.to_vec())?;
            domain.check_member(&v, what)?;
            Ok(v)
        };
        let source = match spec {
            AdversarySpec::Constant { point } => Source::Fixed(member(point, "constant outcome")?),
            AdversarySpec::VertexCycle { period } => {
                if *period == 0 || *period > domain.vertex_count() {
                    return Err(Error::config(format!(
                        "vertex-cycle period {period} must be in 1..={}",
                        domain.vertex_count()
                    )));
                }
                Source::Cycle(*period)
            }
            AdversarySpec::IidVertices { weights } => {
                let n = domain.vertex_count();
                let w = if weights.is_empty() { vec![1.0; n] } else { weights.clone() };
                if w.len() != n {
                    return Err(Error::config(format!("expected {n} vertex weights, got {}", w.len())));
                }
                let index = WeightedIndex::new(&w)
                    .map_err(|e| Error::config(format!("invalid vertex weights: {e}")))?;
                Source::Vertices(index)
            }
            AdversarySpec::IidDirichlet { alpha } => {
                if !matches!(domain, Domain::Simplex { .. }) {
                    return Err(Error::Unsupported(format!(
                        "iid-dirichlet needs a simplex domain, got {}",
                        domain.name()
                    )));
                }
                let gamma = Gamma::new(*alpha, 1.0)
                    .map_err(|e| Error::config(format!("invalid dirichlet alpha {alpha}: {e}")))?;
                Source::Dirichlet(gamma)
            }
            AdversarySpec::DriftingMean { start, end } => {
                Source::Drift(member(start, "drift start")?, member(end, "drift end")?)
            }
            AdversarySpec::FarthestVertex => Source::Farthest,
        };
        Ok(Adversary { domain, horizon, source, rng: child_rng(seed, STREAM_ADVERSARY) })
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self.source, Source::Farthest)
    }

    /// Outcome for round `t`. Only adaptive adversaries read `forecast`.
    pub fn next_outcome(&mut self, t: usize, forecast: Option<&Forecast>) -> Result<Vector> {
        let d = self.domain.dim();
        let y = match &self.source {
            Source::Fixed(y) => y.clone(),
            Source::Cycle(period) => self.domain.vertex((t - 1) % period)?,
            Source::Vertices(index) => self.domain.vertex(index.sample(&mut self.rng))?,
            Source::Dirichlet(gamma) => {
                let draws: Vec<f64> = (0..d).map(|_| gamma.sample(&mut self.rng)).collect();
                let total: f64 = draws.iter().sum();
                if total > 0.0 && total.is_finite() {
                    Vector::new(draws.iter().map(|g| g / total).collect())?
                } else {
                    // every gamma draw underflowed; fall back to a vertex
                    let i = draws.iter().enumerate().fold(0, |b, (i, g)| if *g > draws[b] { i } else { b });
                    Vector::basis(d, i)
                }
            }
            Source::Drift(start, end) => {
                let s = if self.horizon > 1 { (t - 1) as f64 / (self.horizon - 1) as f64 } else { 0.0 };
                let mut y = start.scaled(1.0 - s);
                y.add_scaled(s, end);
                y
            }
            Source::Farthest => {
                let forecast = forecast
                    .ok_or_else(|| Error::protocol("adaptive adversary needs the round's forecast"))?;
                let mean = forecast.mean();
                let mut best = (0, f64::NEG_INFINITY);
                for i in 0..self.domain.vertex_count() {
                    let dist = distance(&self.domain.vertex(i)?, &mean, NormKind::L1);
                    // rounding in the mean must not break exact ties
                    if dist > best.1 + 1e-12 {
                        best = (i, dist);
                    }
                }
                self.domain.vertex(best.0)?
            }
        };
        self.domain.check_member(&y, "adversary outcome")?;
        Ok(y)
    }
}

/// Full outcome sequence of an oblivious adversary, as needed by oracle-mode runs.
pub fn outcome_stream(spec: &AdversarySpec, domain: Domain, horizon: usize, seed: u64) -> Result<Vec<Vector>> {
    if spec.is_adaptive() {
        return Err(Error::config("an adaptive adversary has no precomputable outcome stream"));
    }
    let mut adv = Adversary::new(spec, domain, horizon, seed)?;
    (1..=horizon).map(|t| adv.next_outcome(t, None)).collect()
}
