//! Exact calibration error and full swap regret over recorded transcripts.
//!
//! Every metric groups forecast mass by the point it was placed on (and, for
//! labeled metrics, by the atom label), forms the mass-weighted mean outcome `ν`
//! of each group, and sums `mass · D(ν, p)`. Contributions inside a group are
//! summed in a canonical order so that permuting rounds never changes a result.

mod io;
mod transcript;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use io::{read_jsonl, write_jsonl, write_round_jsonl, RoundRecord};
pub use transcript::{Atom, Forecast, Label, PureRound, PureTranscript, Round, Transcript};

use crate::error::{Error, Result};
use crate::geometry::{distance, dot, Domain, NormKind, Vector};
use crate::scoring::{bregman, bregman_unchecked, xlogx, Regularizer};

/// Decimal digits kept when keying forecast points.
pub const DEFAULT_KEY_DIGITS: i32 = 12;

/// Rounds coordinates to a fixed number of decimals so that equal averages computed
/// along different paths collide.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantizer {
    scale: f64,
}

impl Quantizer {
    pub fn new(digits: i32) -> Self {
        Quantizer { scale: 10f64.powi(digits) }
    }

    pub fn key(&self, point: &[f64], label: Option<&Label>) -> GroupKey {
        GroupKey {
            coords: point.iter().map(|x| (x * self.scale).round() as i64).collect(),
            label: label.cloned(),
        }
    }
}

impl Default for Quantizer {
    fn default() -> Self {
        Quantizer::new(DEFAULT_KEY_DIGITS)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupKey {
    pub coords: Vec<i64>,
    pub label: Option<Label>,
}

/// One realized forecast point with its total mass and conditional mean outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Group {
    pub key: GroupKey,
    pub point: Vector,
    pub mass: f64,
    pub nu: Vector,
}

struct Contribution<'a> {
    weight: f64,
    outcome: &'a [f64],
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

struct Pending<'a> {
    point: &'a [f64],
    contribs: Vec<Contribution<'a>>,
}

fn collect_groups<'a, I>(entries: I, d: usize) -> Vec<Group>
where
    I: Iterator<Item = (GroupKey, &'a [f64], f64, &'a [f64])>,
{
    let mut pending: BTreeMap<GroupKey, Pending<'a>> = BTreeMap::new();
    for (key, point, weight, outcome) in entries {
        if weight <= 0.0 {
            continue;
        }
        let slot = pending.entry(key).or_insert_with(|| Pending { point, contribs: Vec::new() });
        if lex_cmp(point, slot.point).is_lt() {
            slot.point = point;
        }
        slot.contribs.push(Contribution { weight, outcome });
    }
    pending
        .into_iter()
        .map(|(key, mut p)| {
            p.contribs.sort_by(|a, b| {
                a.weight.total_cmp(&b.weight).then_with(|| lex_cmp(a.outcome, b.outcome))
            });
            // incremental mean: a group whose outcomes all equal y gets ν = y exactly
            let mut mass = 0.0;
            let mut nu = Vector::zeros(d);
            for c in &p.contribs {
                mass += c.weight;
                nu.move_towards(c.weight / mass, c.outcome);
            }
            Group { key, point: Vector::new(p.point.to_vec()).expect("finite point"), mass, nu }
        })
        .collect()
}

fn require_rounds(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("metrics need a non-empty transcript"))
    } else {
        Ok(())
    }
}

/// Groups of the transcript keyed by quantized point (and label when `labeled`).
pub fn conditional_means(tr: &Transcript, labeled: bool) -> Result<Vec<Group>> {
    conditional_means_with(tr, labeled, Quantizer::default())
}

pub fn conditional_means_with(tr: &Transcript, labeled: bool, q: Quantizer) -> Result<Vec<Group>> {
    require_rounds(tr.len())?;
    let entries = tr.rounds().iter().flat_map(|r| {
        r.forecast.atoms().iter().map(move |a| {
            let label = if labeled { a.label.as_ref() } else { None };
            (q.key(&a.point, label), a.point.as_slice(), a.weight, r.outcome.as_slice())
        })
    });
    Ok(collect_groups(entries, tr.domain().dim()))
}

/// Groups of a pure transcript with indicator masses.
pub fn pure_conditional_means(tr: &PureTranscript) -> Result<Vec<Group>> {
    require_rounds(tr.len())?;
    let q = Quantizer::default();
    let entries = tr
        .rounds()
        .iter()
        .map(|r| (q.key(&r.prediction, None), r.prediction.as_slice(), 1.0, r.outcome.as_slice()));
    Ok(collect_groups(entries, tr.domain().dim()))
}

/// Distance measure `D(ν, p)` used by calibration error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distance {
    Norm { norm: NormKind },
    SquaredNorm { norm: NormKind },
    Bregman { regularizer: Regularizer },
}

impl Distance {
    pub fn eval(&self, nu: &[f64], p: &[f64]) -> Result<f64> {
        Ok(match self {
            Distance::Norm { norm } => distance(nu, p, *norm),
            Distance::SquaredNorm { norm } => distance(nu, p, *norm).powi(2),
            Distance::Bregman { regularizer } => bregman(regularizer, nu, p)?,
        })
    }

    pub fn name(&self) -> String {
        match self {
            Distance::Norm { norm } => norm.name().to_string(),
            Distance::SquaredNorm { norm } => format!("{}^2", norm.name()),
            Distance::Bregman { regularizer } => format!("bregman:{}", regularizer.name()),
        }
    }
}

fn sum_over_groups(groups: &[Group], dist: &Distance) -> Result<f64> {
    groups.iter().map(|g| Ok(g.mass * dist.eval(&g.nu, &g.point)?)).sum()
}

/// `Cal_T^D = Σ_p mass(p) · D(ν_p, p)`.
pub fn calibration_error(tr: &Transcript, dist: &Distance, labeled: bool) -> Result<f64> {
    sum_over_groups(&conditional_means(tr, labeled)?, dist)
}

pub fn pure_calibration_error(tr: &PureTranscript, dist: &Distance) -> Result<f64> {
    sum_over_groups(&pure_conditional_means(tr)?, dist)
}

/// Full swap regret against the proper-scoring losses `ℓ_t(p) = D_R(y_t | p)`, in closed form.
pub fn swap_regret_bregman(tr: &Transcript, r: &Regularizer, labeled: bool) -> Result<f64> {
    calibration_error(tr, &Distance::Bregman { regularizer: r.clone() }, labeled)
}

/// Swap regret recomputed from per-round losses rather than the closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapAudit {
    pub closed_form: f64,
    /// `Σ_p Σ_t x_t(p) (ℓ_t(p) - ℓ_t(ν_p))`, evaluated round by round.
    pub best_response: f64,
    /// Best swap found by grid search over candidate targets, when requested.
    pub grid: Option<f64>,
}

impl SwapAudit {
    pub fn agrees(&self, tol: f64) -> bool {
        (self.closed_form - self.best_response).abs() <= tol
            && self.grid.is_none_or(|g| g <= self.closed_form + tol)
    }
}

/// Audits [`swap_regret_bregman`]. With `grid_step`, each group's swap target is also
/// searched over a grid of domain members (`d ≤ 3` only).
pub fn swap_regret_audit(
    tr: &Transcript,
    r: &Regularizer,
    labeled: bool,
    grid_step: Option<f64>,
) -> Result<SwapAudit> {
    let groups = conditional_means(tr, labeled)?;
    let closed_form = sum_over_groups(&groups, &Distance::Bregman { regularizer: r.clone() })?;
    let q = Quantizer::default();
    let index: BTreeMap<&GroupKey, usize> = groups.iter().enumerate().map(|(i, g)| (&g.key, i)).collect();
    let mut members: Vec<Vec<(f64, &[f64])>> = vec![Vec::new(); groups.len()];
    for round in tr.rounds() {
        for a in round.forecast.atoms() {
            if a.weight <= 0.0 {
                continue;
            }
            let key = q.key(&a.point, if labeled { a.label.as_ref() } else { None });
            members[index[&key]].push((a.weight, round.outcome.as_slice()));
        }
    }
    let swap_gain = |g: &Group, m: &[(f64, &[f64])], target: &[f64]| -> Result<f64> {
        m.iter()
            .map(|&(w, y)| Ok(w * (bregman(r, y, &g.point)? - bregman(r, y, target)?)))
            .sum()
    };
    let mut best_response = 0.0;
    for (g, m) in groups.iter().zip(&members) {
        best_response += swap_gain(g, m, &g.nu)?;
    }
    let grid = match grid_step {
        None => None,
        Some(step) => {
            let candidates = domain_grid(tr.domain(), step)?;
            let mut total = 0.0;
            for (g, m) in groups.iter().zip(&members) {
                let mut best: f64 = 0.0;
                for c in &candidates {
                    best = best.max(swap_gain(g, m, c)?);
                }
                total += best;
            }
            Some(total)
        }
    };
    Ok(SwapAudit { closed_form, best_response, grid })
}

/// Members of `domain` on a regular grid of spacing `step` (simplex: barycentric grid).
pub fn domain_grid(domain: &Domain, step: f64) -> Result<Vec<Vector>> {
    let d = domain.dim();
    if d > 3 {
        return Err(Error::Unsupported(format!("grid search limited to d <= 3, got {d}")));
    }
    if !(step > 0.0) {
        return Err(Error::domain("grid step must be positive"));
    }
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        let n = ((hi - lo) / step).round() as usize;
        (0..=n).map(|i| (lo + i as f64 * step).min(hi)).collect()
    };
    let mut out = Vec::new();
    match *domain {
        Domain::Simplex { d } => {
            let n = (1.0 / step).round() as usize;
            let mut counts = vec![0usize; d];
            fill_compositions(&mut counts, 0, n, &mut |c| {
                out.push(Vector::new(c.iter().map(|&k| k as f64 / n as f64).collect()).expect("finite"));
            });
        }
        Domain::L2Ball { radius, .. } | Domain::L1Ball { radius, .. } => {
            cartesian(&axis(-radius, radius), d, &mut |p| {
                if domain.contains(p) {
                    out.push(Vector::new(p.to_vec()).expect("finite"));
                }
            });
        }
        Domain::Box { lo, hi, .. } => {
            cartesian(&axis(lo, hi), d, &mut |p| out.push(Vector::new(p.to_vec()).expect("finite")));
        }
    }
    Ok(out)
}

fn fill_compositions(counts: &mut [usize], i: usize, left: usize, f: &mut dyn FnMut(&[usize])) {
    if i + 1 == counts.len() {
        counts[i] = left;
        f(counts);
        return;
    }
    for k in 0..=left {
        counts[i] = k;
        fill_compositions(counts, i + 1, left - k, f);
    }
}

fn cartesian(axis: &[f64], d: usize, f: &mut dyn FnMut(&[f64])) {
    let mut idx = vec![0usize; d];
    let mut p = vec![axis[0]; d];
    loop {
        f(&p);
        let mut j = 0;
        loop {
            if j == d {
                return;
            }
            idx[j] += 1;
            if idx[j] < axis.len() {
                p[j] = axis[idx[j]];
                break;
            }
            idx[j] = 0;
            p[j] = axis[0];
            j += 1;
        }
    }
}

/// Full swap regret of distributions over a finite menu against linear losses `⟨v_t, ·⟩`.
///
/// `dists[t][i]` is the mass on `menu[i]` at round `t`. Computed exactly via the
/// per-element best response.
pub fn swap_regret_finite(dists: &[Vec<f64>], menu: &[Vector], losses: &[Vector]) -> Result<f64> {
    let first = menu.first().ok_or_else(|| Error::domain("empty menu"))?;
    if dists.len() != losses.len() {
        return Err(Error::domain(format!(
            "{} distributions but {} losses",
            dists.len(),
            losses.len()
        )));
    }
    let d = first.dim();
    // g[i] = Σ_t dist_t(i) v_t
    let mut g = vec![Vector::zeros(d); menu.len()];
    for (dist, v) in dists.iter().zip(losses) {
        if dist.len() != menu.len() {
            return Err(Error::domain("distribution length differs from menu size"));
        }
        v.check_dim(d, "loss vector")?;
        for (gi, &w) in g.iter_mut().zip(dist) {
            if w != 0.0 {
                gi.add_scaled(w, v);
            }
        }
    }
    let mut total = 0.0;
    for (gi, m) in g.iter().zip(menu) {
        let played = dot(gi, m);
        let best = menu.iter().map(|q| dot(gi, q)).fold(f64::INFINITY, f64::min);
        total += (played - best).max(0.0);
    }
    Ok(total)
}

/// Largest realized loss `D_R(y_t | p)` over every played point `p` and the overall
/// mean outcome, against every outcome of the transcript.
pub fn realized_loss_cap(tr: &Transcript, r: &Regularizer) -> Result<f64> {
    require_rounds(tr.len())?;
    let q = Quantizer::default();
    let mut points: BTreeMap<GroupKey, &[f64]> = BTreeMap::new();
    for round in tr.rounds() {
        for a in round.forecast.atoms() {
            points.entry(q.key(&a.point, None)).or_insert(a.point.as_slice());
        }
    }
    let mut mean = Vector::zeros(tr.domain().dim());
    for y in tr.outcomes() {
        mean.add_scaled(1.0 / tr.len() as f64, y);
    }
    let mut outcomes: BTreeMap<GroupKey, &[f64]> = BTreeMap::new();
    for y in tr.outcomes() {
        outcomes.entry(q.key(y, None)).or_insert(y.as_slice());
    }
    let entropy_terms: Vec<f64> =
        outcomes.values().map(|y| y.iter().map(|&yi| xlogx(yi) - yi).sum()).collect();
    let mut cap: f64 = 0.0;
    for p in points.values().copied().chain(std::iter::once(mean.as_slice())) {
        if !r.accepts(p) {
            return Err(Error::domain("played point outside the regularizer's domain"));
        }
        if let Regularizer::NegativeEntropy { clamp } = r {
            // D(y|p) = A(y) + B(p) - <y, ln p>, so each pair costs one dot product.
            let lp: Vec<f64> = p.iter().map(|&pi| pi.max(*clamp).ln()).collect();
            let b: f64 = p.iter().zip(&lp).map(|(&pi, &l)| pi + pi * l - xlogx(pi)).sum();
            for (y, a) in outcomes.values().zip(&entropy_terms) {
                cap = cap.max(if *y == p { 0.0 } else { a + b - dot(y, &lp) });
            }
        } else {
            for y in outcomes.values() {
                cap = cap.max(bregman_unchecked(r, y, p));
            }
        }
    }
    Ok(cap)
}
