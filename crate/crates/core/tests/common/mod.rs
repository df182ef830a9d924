//! Reference computations written directly from the definitions, kept independent of
//! the library's own grouping and divergence code.

#![allow(dead_code)]

use std::collections::BTreeMap;

use treecal::geometry::{Domain, NormKind};
use treecal::metrics::{PureTranscript, Transcript};
use treecal::scoring::Regularizer;

pub const ENTROPY_CLAMP: f64 = 1e-12;

pub fn norm(v: &[f64], k: NormKind) -> f64 {
    match k {
        NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
        NormKind::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormKind::LInf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64], k: NormKind) -> f64 {
    norm(&sub(a, b), k)
}

/// Closed-form diameters of the supported domains.
pub fn diameter(dom: &Domain, k: NormKind) -> f64 {
    match *dom {
        Domain::Simplex { .. } => match k {
            NormKind::L1 => 2.0,
            NormKind::L2 => 2f64.sqrt(),
            NormKind::LInf => 1.0,
        },
        Domain::Box { d, lo, hi } => {
            let w = hi - lo;
            match k {
                NormKind::L1 => d as f64 * w,
                NormKind::L2 => (d as f64).sqrt() * w,
                NormKind::LInf => w,
            }
        }
        Domain::L2Ball { d, radius } => match k {
            NormKind::L1 => 2.0 * radius * (d as f64).sqrt(),
            _ => 2.0 * radius,
        },
        // ±r·e_1 realize every norm's diameter
        Domain::L1Ball { radius, .. } => 2.0 * radius,
    }
}

/// `‖y - p‖₂²`
pub fn sq_euclid(y: &[f64], p: &[f64]) -> f64 {
    y.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Generalized KL divergence `Σ y ln(y/p) - y + p`, with `p` floored at the entropy clamp.
pub fn kl(y: &[f64], p: &[f64]) -> f64 {
    y.iter()
        .zip(p)
        .map(|(&a, &b)| {
            let t = if a > 0.0 { a * (a / b.max(ENTROPY_CLAMP)).ln() } else { 0.0 };
            t - a + b
        })
        .sum()
}

pub fn breg(r: &Regularizer, y: &[f64], p: &[f64]) -> f64 {
    match r {
        Regularizer::Euclidean => sq_euclid(y, p),
        Regularizer::NegativeEntropy { .. } => kl(y, p),
        other => panic!("no reference divergence for {}", other.name()),
    }
}

type Key = (Vec<i64>, Option<Vec<u32>>);

fn key(p: &[f64], label: Option<&Vec<u32>>) -> Key {
    (p.iter().map(|x| (x * 1e9).round() as i64).collect(), label.cloned())
}

/// Per group: the first point seen, total mass and the weighted outcome sum.
struct Acc {
    point: Vec<f64>,
    mass: f64,
    sum: Vec<f64>,
}

fn groups<'a>(entries: impl Iterator<Item = (&'a [f64], Option<&'a Vec<u32>>, f64, &'a [f64])>) -> Vec<Acc> {
    let mut map: BTreeMap<Key, Acc> = BTreeMap::new();
    for (p, label, w, y) in entries {
        if w <= 0.0 {
            continue;
        }
        let acc = map.entry(key(p, label)).or_insert_with(|| Acc { point: p.to_vec(), mass: 0.0, sum: vec![0.0; y.len()] });
        acc.mass += w;
        for (s, v) in acc.sum.iter_mut().zip(y) {
            *s += w * v;
        }
    }
    map.into_values().collect()
}

/// `Σ_p mass_p · D(ν_p, p)` where `D` takes `(ν, p)`.
pub fn calibration(tr: &Transcript, labeled: bool, d: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let entries = tr.rounds().iter().flat_map(|r| {
        r.forecast.atoms().iter().map(move |a| {
            let label = if labeled { a.label.as_ref().map(|l| &l.0) } else { None };
            (a.point.as_slice(), label, a.weight, r.outcome.as_slice())
        })
    });
    groups(entries)
        .iter()
        .map(|g| {
            let nu: Vec<f64> = g.sum.iter().map(|s| s / g.mass).collect();
            g.mass * d(&nu, &g.point)
        })
        .sum()
}

pub fn norm_calibration(tr: &Transcript, labeled: bool, k: NormKind, squared: bool) -> f64 {
    calibration(tr, labeled, |nu, p| {
        let v = dist(nu, p, k);
        if squared {
            v * v
        } else {
            v
        }
    })
}

pub fn pure_calibration(tr: &PureTranscript, k: NormKind) -> f64 {
    let entries = tr.rounds().iter().map(|r| (r.prediction.as_slice(), None, 1.0, r.outcome.as_slice()));
    groups(entries)
        .iter()
        .map(|g| {
            let nu: Vec<f64> = g.sum.iter().map(|s| s / g.mass).collect();
            g.mass * dist(&nu, &g.point, k)
        })
        .sum()
}

pub fn mean_outcome(tr: &Transcript) -> Vec<f64> {
    let d = tr.domain().dim();
    let mut m = vec![0.0; d];
    for y in tr.outcomes() {
        for (a, b) in m.iter_mut().zip(y.as_slice()) {
            *a += b;
        }
    }
    m.iter().map(|x| x / tr.len() as f64).collect()
}

/// Largest `D(y_s | p)` over outcomes `y_s` and the played points together with the
/// mean outcome.
pub fn loss_cap(tr: &Transcript, r: &Regularizer) -> f64 {
    let mut points: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    for round in tr.rounds() {
        for a in round.forecast.atoms() {
            points.entry(key(&a.point, None)).or_insert_with(|| a.point.as_slice().to_vec());
        }
    }
    let mut outcomes: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    for y in tr.outcomes() {
        outcomes.entry(key(y, None)).or_insert_with(|| y.as_slice().to_vec());
    }
    let mean = mean_outcome(tr);
    let mut cap: f64 = 0.0;
    for p in points.values().chain(std::iter::once(&mean)) {
        for y in outcomes.values() {
            cap = cap.max(breg(r, y, p));
        }
    }
    cap
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var.sqrt())
}
