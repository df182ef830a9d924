//! Run manifests: a flat TOML table with one key per parameter.
//!
//! ```toml
//! domain = "simplex"       # simplex | l2ball | l1ball | box
//! d = 3
//! adversary = "iid-dirichlet"
//! alpha = 1.0
//! algorithm = "treecal"    # treecal | treeswap-ftl | treeswap-btl | sample-treecal
//! H = 4
//! L = 3                    # T defaults to H^L (S * H^L for sample-treecal)
//! regularizer = "negentropy"
//! norms = ["l1", "l2"]
//! seed = 7
//! sweep_L = [2, 3, 4]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversaries::AdversarySpec;
use crate::engine::TreeParams;
use crate::error::{Error, Result};
use crate::geometry::{Domain, NormKind, TreeShape, Vector};
use crate::scoring::Regularizer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    TreeCal,
    TreeSwapFtl,
    TreeSwapBtl,
    SampleTreeCal,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::TreeCal => "treecal",
            Algorithm::TreeSwapFtl => "treeswap-ftl",
            Algorithm::TreeSwapBtl => "treeswap-btl",
            Algorithm::SampleTreeCal => "sample-treecal",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "treecal" => Algorithm::TreeCal,
            "treeswap-ftl" => Algorithm::TreeSwapFtl,
            "treeswap-btl" => Algorithm::TreeSwapBtl,
            "sample-treecal" => Algorithm::SampleTreeCal,
            other => return Err(Error::config(format!("unknown algorithm {other:?}"))),
        })
    }
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: String,
    pub d: usize,
    pub radius: f64,
    pub lo: f64,
    pub hi: f64,
    pub adversary: String,
    pub alpha: f64,
    pub period: Option<usize>,
    pub vertex_weights: Vec<f64>,
    pub constant_point: Option<Vec<f64>>,
    pub drift_start: Option<Vec<f64>>,
    pub drift_end: Option<Vec<f64>>,
    pub algorithm: String,
    pub H: usize,
    pub L: usize,
    pub T: Option<usize>,
    pub S: usize,
    pub base_point: Option<Vec<f64>>,
    pub regularizer: String,
    pub norms: Vec<String>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub sweep_H: Vec<usize>,
    pub sweep_L: Vec<usize>,
    pub sweep_T: Vec<usize>,
    pub sweep_d: Vec<usize>,
    pub sweep_seeds: Vec<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: "simplex".into(),
            d: 3,
            radius: 1.0,
            lo: 0.0,
            hi: 1.0,
            adversary: "iid-dirichlet".into(),
            alpha: 1.0,
            period: None,
            vertex_weights: Vec::new(),
            constant_point: None,
            drift_start: None,
            drift_end: None,
            algorithm: "treecal".into(),
            H: 4,
            L: 3,
            T: None,
            S: 1,
            base_point: None,
            regularizer: "euclidean".into(),
            norms: vec!["l1".into(), "l2".into()],
            seed: 0,
            out: None,
            sweep_H: Vec::new(),
            sweep_L: Vec::new(),
            sweep_T: Vec::new(),
            sweep_d: Vec::new(),
            sweep_seeds: Vec::new(),
        }
    }
}

/// A validated configuration ready to execute.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedRun {
    pub domain: Domain,
    pub adversary: AdversarySpec,
    pub algorithm: Algorithm,
    /// Total rounds, including every sample of a block.
    pub horizon: usize,
    /// Block size (1 unless sampling).
    pub block: usize,
    /// Tree parameters of the (inner) forecaster.
    pub tree: TreeParams,
    pub base_point: Option<Vector>,
    pub regularizer: Regularizer,
    pub norms: Vec<NormKind>,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_toml_str(&text)
    }

    /// Fails for values TOML cannot hold, such as seeds above `i64::MAX`.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("config not representable in TOML: {e}")))
    }

    pub fn has_sweep(&self) -> bool {
        !(self.sweep_H.is_empty()
            && self.sweep_L.is_empty()
            && self.sweep_T.is_empty()
            && self.sweep_d.is_empty()
            && self.sweep_seeds.is_empty())
    }

    fn build_domain(&self) -> Result<Domain> {
        let dom = match self.domain.as_str() {
            "simplex" => Domain::simplex(self.d),
            "l2ball" => Domain::l2_ball(self.d, self.radius),
            "l1ball" => Domain::l1_ball(self.d, self.radius),
            "box" => Domain::cube(self.d, self.lo, self.hi),
            other => return Err(Error::config(format!("unknown domain {other:?}"))),
        };
        dom.map_err(|e| Error::config(format!("invalid domain: {e}")))
    }

    fn build_adversary(&self, domain: &Domain) -> Result<AdversarySpec> {
        let point = |given: &Option<Vec<f64>>, fallback: Vector, key: &str| -> Result<Vec<f64>> {
            let p = given.clone().unwrap_or_else(|| fallback.into_inner());
            if p.len() != domain.dim() || !domain.contains(&p) {
                return Err(Error::config(format!("{key} must be a member of the {}-dimensional domain", domain.dim())));
            }
            Ok(p)
        };
        Ok(match self.adversary.as_str() {
            "constant" => AdversarySpec::Constant { point: point(&self.constant_point, domain.base_point(), "constant_point")? },
            "vertex-cycle" => AdversarySpec::VertexCycle { period: self.period.unwrap_or_else(|| domain.vertex_count()) },
            "iid-vertices" => AdversarySpec::IidVertices { weights: self.vertex_weights.clone() },
            "iid-dirichlet" => {
                if !matches!(domain, Domain::Simplex { .. }) {
                    return Err(Error::config("adversary iid-dirichlet requires domain = \"simplex\""));
                }
                AdversarySpec::IidDirichlet { alpha: self.alpha }
            }
            "drifting-mean" => AdversarySpec::DriftingMean {
                start: point(&self.drift_start, domain.vertex(0)?, "drift_start")?,
                end: point(&self.drift_end, domain.vertex(domain.vertex_count() - 1)?, "drift_end")?,
            },
            "farthest-vertex" => AdversarySpec::FarthestVertex,
            other => return Err(Error::config(format!("unknown adversary {other:?}"))),
        })
    }

    /// Checks every constraint and names the first one violated.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        let domain = self.build_domain()?;
        let adversary = self.build_adversary(&domain)?;
        let algorithm: Algorithm = self.algorithm.parse()?;
        if self.H < 2 {
            return Err(Error::config(format!("H = {} violates H >= 2", self.H)));
        }
        if self.L < 1 {
            return Err(Error::config("L = 0 violates L >= 1"));
        }
        let capacity = TreeShape::new(self.H, self.L)?.capacity();
        let block = if algorithm == Algorithm::SampleTreeCal { self.S } else { 1 };
        if algorithm != Algorithm::SampleTreeCal && self.S != 1 {
            return Err(Error::config("S applies only to algorithm = \"sample-treecal\""));
        }
        if block == 0 {
            return Err(Error::config("S = 0 violates S >= 1"));
        }
        let horizon = self.T.unwrap_or(capacity * block);
        if !horizon.is_multiple_of(block) {
            return Err(Error::config(format!("S = {block} does not divide T = {horizon}")));
        }
        let tree = TreeParams::new(horizon / block, self.H, self.L)
            .map_err(|e| match e {
                Error::Config(msg) => Error::config(format!("H^(L-1) <= T/S <= H^L violated: {msg}")),
                other => other,
            })?;
        if algorithm == Algorithm::TreeSwapBtl && adversary.is_adaptive() {
            return Err(Error::config("treeswap-btl needs the full outcome stream; adaptive adversaries are refused"));
        }
        let base_point = match &self.base_point {
            None => None,
            Some(p) => {
                let v = Vector::new(p.clone())?;
                if v.dim() != domain.dim() || !domain.contains(&v) {
                    return Err(Error::config("base_point must be a domain member"));
                }
                Some(v)
            }
        };
        let regularizer: Regularizer = self.regularizer.parse()?;
        if !matches!(domain, Domain::Simplex { .. }) && matches!(regularizer, Regularizer::NegativeEntropy { .. }) {
            return Err(Error::config("regularizer negentropy requires domain = \"simplex\""));
        }
        let norms = self.norms.iter().map(|n| n.parse()).collect::<Result<Vec<NormKind>>>()?;
        Ok(ResolvedRun {
            domain,
            adversary,
            algorithm,
            horizon,
            block,
            tree,
            base_point,
            regularizer,
            norms,
            seed: self.seed,
        })
    }
}
