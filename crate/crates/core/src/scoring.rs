//! Convex regularizers, their Bregman divergences, and the proper-scoring-rule
//! decomposition that makes the mean outcome the optimal response.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, distance, Domain, NormKind, Vector};

/// Default floor applied to coordinates inside the logarithm of the negative entropy gradient.
pub const DEFAULT_ENTROPY_CLAMP: f64 = 1e-12;

/// A differentiable convex function `R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    /// `R(p) = ‖p‖₂²`
    Euclidean,
    /// `R(p) = Σ p_i log p_i` with `0 log 0 = 0`. The gradient evaluates
    /// `log max(p_i, clamp)` so boundary points stay finite.
    NegativeEntropy { clamp: f64 },
    /// `R(p) - R(a) - ⟨∇R(a), p - a⟩`; shares the base's Bregman divergence and vanishes at `a`.
    Centered { base: Box<Regularizer>, anchor: Vector },
    /// `4 R(p / 2)`
    Scaled { base: Box<Regularizer> },
}

impl Regularizer {
    pub fn negative_entropy() -> Self {
        Regularizer::NegativeEntropy { clamp: DEFAULT_ENTROPY_CLAMP }
    }

    pub fn name(&self) -> String {
        match self {
            Regularizer::Euclidean => "euclidean".into(),
            Regularizer::NegativeEntropy { .. } => "negentropy".into(),
            Regularizer::Centered { base, .. } => format!("centered({})", base.name()),
            Regularizer::Scaled { base } => format!("scaled({})", base.name()),
        }
    }

    /// Whether `R` is defined at `p` (negative entropy needs nonnegative coordinates).
    pub fn accepts(&self, p: &[f64]) -> bool {
        match self {
            Regularizer::Euclidean => true,
            Regularizer::NegativeEntropy { .. } => p.iter().all(|&x| x >= -1e-12),
            Regularizer::Centered { base, anchor } => anchor.dim() == p.len() && base.accepts(p),
            Regularizer::Scaled { base } => {
                let half: Vec<f64> = p.iter().map(|x| 0.5 * x).collect();
                base.accepts(&half)
            }
        }
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        match self {
            Regularizer::Euclidean => dot(p, p),
            Regularizer::NegativeEntropy { .. } => p.iter().map(|&x| xlogx(x)).sum(),
            Regularizer::Centered { base, anchor } => {
                let g = base.gradient(anchor);
                let shift: f64 = p.iter().zip(anchor.iter()).zip(g.iter()).map(|((x, a), gi)| gi * (x - a)).sum();
                base.value(p) - base.value(anchor) - shift
            }
            Regularizer::Scaled { base } => {
                let half: Vec<f64> = p.iter().map(|x| 0.5 * x).collect();
                4.0 * base.value(&half)
            }
        }
    }

    pub fn gradient(&self, p: &[f64]) -> Vector {
        let coords = match self {
            Regularizer::Euclidean => p.iter().map(|x| 2.0 * x).collect(),
            Regularizer::NegativeEntropy { clamp } => {
                p.iter().map(|&x| x.max(*clamp).ln() + 1.0).collect()
            }
            Regularizer::Centered { base, anchor } => {
                let ga = base.gradient(anchor);
                let gp = base.gradient(p);
                return &gp - &ga;
            }
            Regularizer::Scaled { base } => {
                let half: Vec<f64> = p.iter().map(|x| 0.5 * x).collect();
                return base.gradient(&half).scaled(2.0);
            }
        };
        Vector::new(coords).expect("finite gradient")
    }

    /// Nominal bound on the Bregman range over `domain`: `diam₂(P)²` for the Euclidean
    /// regularizer, `log d` for negative entropy, and `4×` the base value for scaled
    /// regularizers.
    pub fn nominal_rho(&self, domain: &Domain) -> Result<f64> {
        match self {
            Regularizer::Euclidean => Ok(domain.diameter(NormKind::L2)?.powi(2)),
            Regularizer::NegativeEntropy { .. } => match domain {
                Domain::Simplex { d } => Ok((*d as f64).ln()),
                other => Err(Error::Unsupported(format!(
                    "negative entropy is defined on the simplex, not on {}",
                    other.name()
                ))),
            },
            Regularizer::Centered { base, .. } => base.nominal_rho(domain),
            Regularizer::Scaled { base } => Ok(4.0 * base.nominal_rho(domain)?),
        }
    }
}

impl std::str::FromStr for Regularizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2sq" => Ok(Regularizer::Euclidean),
            "negentropy" | "negative-entropy" | "entropy" => Ok(Regularizer::negative_entropy()),
            other => Err(Error::config(format!("unknown regularizer `{other}`"))),
        }
    }
}

pub(crate) fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `D_R(y | p) = R(y) - R(p) - ⟨∇R(p), y - p⟩`.
pub fn bregman(r: &Regularizer, y: &[f64], p: &[f64]) -> Result<f64> {
    if y.len() != p.len() {
        return Err(Error::domain(format!(
            "bregman: dimension mismatch {} vs {}",
            y.len(),
            p.len()
        )));
    }
    if !r.accepts(y) || !r.accepts(p) {
        return Err(Error::domain(format!("bregman: point outside the domain of {}", r.name())));
    }
    Ok(bregman_unchecked(r, y, p))
}

pub(crate) fn bregman_unchecked(r: &Regularizer, y: &[f64], p: &[f64]) -> f64 {
    if y == p {
        return 0.0;
    }
    match r {
        Regularizer::Euclidean => y.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum(),
        Regularizer::NegativeEntropy { clamp } => y
            .iter()
            .zip(p)
            .map(|(&yi, &pi)| {
                let lp = pi.max(*clamp).ln();
                // xlogx(p) - p ln(max(p, clamp)) is zero unless p sits below the clamp.
                xlogx(yi) - yi * lp - yi + pi + (pi * lp - xlogx(pi))
            })
            .sum(),
        _ => {
            let g = r.gradient(p);
            let lin: f64 = g.iter().zip(y.iter().zip(p)).map(|(gi, (a, b))| gi * (a - b)).sum();
            r.value(y) - r.value(p) - lin
        }
    }
}

/// Minimizer of the mixture loss `p ↦ Σ w_i D_R(y_i | p)` and the value it attains there.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureMinimizer {
    pub mean: Vector,
    /// `Σ w_i R(y_i) - R(mean)`
    pub jensen_gap: f64,
}

pub fn mixture_minimizer(points: &[Vector], weights: &[f64], r: &Regularizer) -> Result<MixtureMinimizer> {
    let first = points.first().ok_or_else(|| Error::domain("mixture of zero points"))?;
    if points.len() != weights.len() {
        return Err(Error::domain("points and weights differ in length"));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::domain("mixture weights must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("mixture weights sum to {total}, not 1")));
    }
    let d = first.dim();
    let mut mean = Vector::zeros(d);
    let mut avg_value = 0.0;
    for (y, &w) in points.iter().zip(weights) {
        y.check_dim(d, "mixture point")?;
        if !r.accepts(y) {
            return Err(Error::domain(format!("mixture point outside the domain of {}", r.name())));
        }
        mean.add_scaled(w, y);
        avg_value += w * r.value(y);
    }
    let jensen_gap = avg_value - r.value(&mean);
    Ok(MixtureMinimizer { mean, jensen_gap })
}

/// Subtracts the tangent plane at `anchor`; the Bregman divergence is unchanged and
/// the result vanishes at `anchor`.
pub fn center_regularizer(r: &Regularizer, anchor: Vector) -> Regularizer {
    Regularizer::Centered { base: Box::new(r.clone()), anchor }
}

/// `R'(p) = 4 R(p/2)`, preserving strong convexity on centrally symmetric domains.
pub fn scale_regularizer(r: &Regularizer, domain: &Domain) -> Result<Regularizer> {
    if !domain.is_centrally_symmetric() {
        return Err(Error::Unsupported(format!(
            "scaling requires a centrally symmetric domain, got {}",
            domain.name()
        )));
    }
    Ok(Regularizer::Scaled { base: Box::new(r.clone()) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexityProbe {
    /// `min D_R(y|p) / ‖y - p‖²` over sampled pairs.
    pub min_ratio: f64,
    pub max_bregman: f64,
    pub pairs: usize,
}

/// Measures strong-convexity and range constants of `r` on random member pairs.
pub fn strong_convexity_probe(
    r: &Regularizer,
    kind: NormKind,
    domain: &Domain,
    n_samples: usize,
    seed: u64,
) -> Result<ConvexityProbe> {
    if n_samples == 0 {
        return Err(Error::domain("probe needs at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_ratio = f64::INFINITY;
    let mut max_bregman: f64 = 0.0;
    let mut pairs = 0;
    for _ in 0..n_samples {
        let y = domain.sample_member(&mut rng);
        let p = domain.sample_member(&mut rng);
        let div = bregman(r, &y, &p)?;
        max_bregman = max_bregman.max(div);
        let dist = distance(&y, &p, kind);
        if dist > 1e-6 {
            min_ratio = min_ratio.min(div / (dist * dist));
            pairs += 1;
        }
    }
    Ok(ConvexityProbe { min_ratio, max_bregman, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn kl(y: &[f64], p: &[f64]) -> f64 {
        y.iter().zip(p).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).ln()).sum()
    }

    #[test]
    fn bregman_examples() {
        let e = Regularizer::Euclidean;
        assert_eq!(bregman(&e, &[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(bregman(&e, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        let ne = Regularizer::negative_entropy();
        let got = bregman(&ne, &[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert!((got - kl(&[0.5, 0.5], &[0.25, 0.75])).abs() < 1e-15);
    }

    #[test]
    fn negentropy_matches_kl_on_random_pairs() {
        let dom = Domain::simplex(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ne = Regularizer::negative_entropy();
        for _ in 0..500 {
            let y = dom.sample_member(&mut rng);
            let p = dom.sample_member(&mut rng);
            if p.contains(&0.0) {
                continue;
            }
            let got = bregman(&ne, &y, &p).unwrap();
            assert!((got - kl(&y, &p)).abs() < 1e-12, "{got} vs {}", kl(&y, &p));
        }
    }

    #[test]
    fn negentropy_boundary_is_finite() {
        let ne = Regularizer::negative_entropy();
        let got = bregman(&ne, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(got.is_finite());
        assert!((got - (1.0 / DEFAULT_ENTROPY_CLAMP).ln()).abs() < 1e-9);
    }

    #[test]
    fn bregman_rejects_outside_points() {
        let ne = Regularizer::negative_entropy();
        assert!(matches!(bregman(&ne, &[-0.5, 1.5], &[0.5, 0.5]), Err(Error::Domain(_))));
        assert!(bregman(&Regularizer::Euclidean, &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mixture_examples() {
        let e = Regularizer::Euclidean;
        let single = mixture_minimizer(&[v(&[0.2, 0.8])], &[1.0], &e).unwrap();
        assert_eq!(single.mean, v(&[0.2, 0.8]));
        assert_eq!(single.jensen_gap, 0.0);

        let m = mixture_minimizer(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])], &[0.5, 0.5], &e).unwrap();
        assert_eq!(m.mean, v(&[0.5, 0.5]));
        assert!((m.jensen_gap - 0.5).abs() < 1e-15);

        assert!(matches!(mixture_minimizer(&[], &[], &e), Err(Error::Domain(_))));
        assert!(mixture_minimizer(&[v(&[1.0])], &[0.7], &e).is_err());
    }

    #[test]
    fn decomposition_holds_on_random_probes() {
        let dom = Domain::simplex(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for r in [Regularizer::Euclidean, Regularizer::negative_entropy()] {
            for _ in 0..100 {
                let n = rng.gen_range(1..6);
                let pts: Vec<Vector> = (0..n).map(|_| dom.sample_member(&mut rng)).collect();
                let mut w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.01).collect();
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= s);
                let mm = mixture_minimizer(&pts, &w, &r).unwrap();
                assert!(mm.jensen_gap >= -1e-9);
                let p = dom.sample_member(&mut rng);
                let lhs: f64 = pts.iter().zip(&w).map(|(y, wi)| wi * bregman(&r, y, &p).unwrap()).sum();
                let rhs = bregman(&r, &mm.mean, &p).unwrap() + mm.jensen_gap;
                assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn centering_preserves_divergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ball = Domain::l2_ball(3, 1.0).unwrap();
        let simplex = Domain::simplex(3).unwrap();
        for (r, dom) in [(Regularizer::Euclidean, ball), (Regularizer::negative_entropy(), simplex)] {
            let c = center_regularizer(&r, dom.base_point());
            assert!(c.value(&dom.base_point()).abs() < 1e-15);
            for _ in 0..100 {
                let y = dom.sample_member(&mut rng);
                let p = dom.sample_member(&mut rng);
                let a = bregman(&r, &y, &p).unwrap();
                let b = bregman(&c, &y, &p).unwrap();
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
        // gradient at the origin is zero, so centring the Euclidean regularizer there is a no-op
        let c = center_regularizer(&Regularizer::Euclidean, Vector::zeros(2));
        assert_eq!(c.value(&[0.3, -0.4]), Regularizer::Euclidean.value(&[0.3, -0.4]));
    }

    #[test]
    fn scaling() {
        let ball = Domain::l2_ball(2, 1.0).unwrap();
        let s = scale_regularizer(&Regularizer::Euclidean, &ball).unwrap();
        assert!((s.value(&[1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((s.value(&[0.3, 0.4]) - 0.25).abs() < 1e-15);
        assert!(matches!(
            scale_regularizer(&Regularizer::Euclidean, &Domain::simplex(2).unwrap()),
            Err(Error::Unsupported(_))
        ));
        let base = strong_convexity_probe(&Regularizer::Euclidean, NormKind::L2, &ball, 500, 1).unwrap();
        let scaled = strong_convexity_probe(&s, NormKind::L2, &ball, 500, 1).unwrap();
        assert!(scaled.min_ratio >= base.min_ratio - 1e-6);
    }

    #[test]
    fn probe_constants() {
        let ball = Domain::l2_ball(3, 1.0).unwrap();
        let e = strong_convexity_probe(&Regularizer::Euclidean, NormKind::L2, &ball, 1000, 2).unwrap();
        assert!((e.min_ratio - 1.0).abs() < 1e-9);

        let simplex = Domain::simplex(4).unwrap();
        let ne = Regularizer::negative_entropy();
        let probe = strong_convexity_probe(&ne, NormKind::L1, &simplex, 2000, 3).unwrap();
        assert!(probe.min_ratio >= 0.5 - 1e-6, "Pinsker violated: {}", probe.min_ratio);
        assert!(probe.max_bregman <= (1.0 / DEFAULT_ENTROPY_CLAMP).ln() + 4f64.ln());
        assert!(strong_convexity_probe(&ne, NormKind::L1, &simplex, 0, 3).is_err());
    }
}
