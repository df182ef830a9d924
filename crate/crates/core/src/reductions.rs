//! From calibration to swap regret, and from the L1 ball to the simplex.
//!
//! A calibrated forecaster of loss vectors becomes a low swap-regret player over a
//! finite menu by best-responding to each forecast point. Calibration over the
//! unit L1 ball in `R^d` reduces to calibration over the simplex in `R^(2d+1)`
//! through the splitting map `φ` and its linear left inverse `ψ`.

use std::collections::BTreeSet;

use crate::engine::{run_forecaster, Forecaster};
use crate::error::{Error, Result};
use crate::geometry::{distance, dot, Domain, NormKind, Vector, BALL_TOL};
use crate::metrics::{calibration_error, swap_regret_finite, Distance, Forecast, Quantizer, Transcript};

/// A non-empty finite action set with pairwise distinct elements.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMenu {
    elements: Vec<Vector>,
}

impl FiniteMenu {
    pub fn new(elements: Vec<Vector>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::domain("empty menu"))?;
        let d = first.dim();
        let q = Quantizer::default();
        let mut seen = BTreeSet::new();
        for e in &elements {
            e.check_dim(d, "menu element")?;
            if !seen.insert(q.key(e, None)) {
                return Err(Error::domain(format!("duplicate menu element {e}")));
            }
        }
        Ok(FiniteMenu { elements })
    }

    /// The `2^d` vertices of `[0, 1]^d`.
    pub fn cube_vertices(d: usize) -> Result<Self> {
        let dom = Domain::cube(d, 0.0, 1.0)?;
        FiniteMenu::new((0..dom.vertex_count()).map(|i| dom.vertex(i)).collect::<Result<_>>()?)
    }

    pub fn elements(&self) -> &[Vector] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        FiniteMenu::new(self.elements.iter().map(|e| e.scaled(c)).collect())
    }

    /// Diameter of the menu's convex hull, attained at a pair of elements.
    pub fn diameter(&self, kind: NormKind) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.elements.iter().enumerate() {
            for b in &self.elements[i + 1..] {
                best = best.max(distance(a, b, kind));
            }
        }
        best
    }
}

/// Index of the menu element minimizing `⟨q, p⟩`, lowest index on ties.
pub fn best_response_index(p: &[f64], menu: &FiniteMenu) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, q) in menu.elements.iter().enumerate() {
        let v = dot(q, p);
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

pub fn best_response<'a>(p: &[f64], menu: &'a FiniteMenu) -> &'a Vector {
    &menu.elements[best_response_index(p, menu)]
}

/// Best-response pushforward of a forecast: the mass each menu element receives.
pub fn pushforward(x: &Forecast, menu: &FiniteMenu) -> Vec<f64> {
    let mut dist = vec![0.0; menu.len()];
    for a in x.atoms() {
        dist[best_response_index(&a.point, menu)] += a.weight;
    }
    dist
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwapReduction {
    /// Distribution over the menu played at each round.
    pub dists: Vec<Vec<f64>>,
    /// Realized full swap regret against the linear losses `⟨y_t, ·⟩`.
    pub regret: f64,
    /// Unlabeled calibration error of the forecasts under `norm`.
    pub calibration: f64,
    /// Menu diameter under the dual norm.
    pub menu_diameter: f64,
    /// `menu_diameter · calibration`.
    pub bound: f64,
}

impl SwapReduction {
    pub fn holds(&self, tol: f64) -> bool {
        self.regret <= self.bound + tol
    }
}

/// Applies the reduction to a recorded transcript whose outcomes are the loss vectors.
pub fn reduce_transcript(tr: &Transcript, menu: &FiniteMenu, norm: NormKind) -> Result<SwapReduction> {
    if menu.dim() != tr.domain().dim() {
        return Err(Error::domain(format!(
            "menu dimension {} differs from loss dimension {}",
            menu.dim(),
            tr.domain().dim()
        )));
    }
    let dists: Vec<Vec<f64>> = tr.rounds().iter().map(|r| pushforward(&r.forecast, menu)).collect();
    let losses: Vec<Vector> = tr.outcomes().cloned().collect();
    let regret = swap_regret_finite(&dists, menu.elements(), &losses)?;
    let calibration = calibration_error(tr, &Distance::Norm { norm }, false)?;
    let menu_diameter = menu.diameter(norm.dual());
    Ok(SwapReduction { dists, regret, calibration, menu_diameter, bound: menu_diameter * calibration })
}

/// Runs `calibrator` over `domain` with outcomes from `next`, then applies the reduction.
pub fn calibrated_to_swap<F, N>(
    calibrator: &mut F,
    domain: Domain,
    menu: &FiniteMenu,
    next: N,
    norm: NormKind,
) -> Result<(Transcript, SwapReduction)>
where
    F: Forecaster + ?Sized,
    N: FnMut(usize, &Forecast) -> Result<Vector>,
{
    let tr = run_forecaster(calibrator, domain, next)?;
    let red = reduce_transcript(&tr, menu, norm)?;
    Ok((tr, red))
}

/// `φ`: splits each coordinate into positive and negative parts and appends the slack
/// `1 - ‖y‖₁`, landing in the simplex of dimension `2d + 1`.
pub fn embed_l1ball_to_simplex(y: &[f64]) -> Result<Vector> {
    let n1: f64 = y.iter().map(|v| v.abs()).sum();
    if !(n1 <= 1.0 + BALL_TOL) {
        return Err(Error::domain(format!("‖y‖₁ = {n1} exceeds 1")));
    }
    let mut z = Vec::with_capacity(2 * y.len() + 1);
    for &v in y {
        z.push(v.max(0.0));
        z.push((-v).max(0.0));
    }
    z.push((1.0 - n1).max(0.0));
    Vector::new(z)
}

/// `ψ(z)_i = z_{2i-1} - z_{2i}`, the linear map back to the L1 ball.
pub fn project_simplex_to_l1ball(z: &[f64]) -> Result<Vector> {
    if z.len().is_multiple_of(2) {
        return Err(Error::domain(format!("expected odd dimension 2d+1, got {}", z.len())));
    }
    Domain::simplex(z.len())?.check_member(z, "simplex point")?;
    Vector::new(z.chunks_exact(2).map(|c| c[0] - c[1]).collect())
}

/// Maps every point of a transcript on the L1 ball through `φ`.
pub fn embed_transcript(tr: &Transcript) -> Result<Transcript> {
    let target = Domain::simplex(2 * tr.domain().dim() + 1)?;
    tr.map_points(target, |p| embed_l1ball_to_simplex(p))
}

/// Maps every point of a transcript on the simplex through `ψ`.
pub fn project_transcript(tr: &Transcript) -> Result<Transcript> {
    let d = tr.domain().dim();
    if d.is_multiple_of(2) {
        return Err(Error::domain(format!("expected odd dimension 2d+1, got {d}")));
    }
    let target = Domain::l1_ball(d / 2, 1.0)?;
    tr.map_points(target, |z| project_simplex_to_l1ball(z))
}
