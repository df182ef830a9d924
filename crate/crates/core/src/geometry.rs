//! Vectors, norms, convex prediction domains and base-H tree index arithmetic.
//!
//! Rounds `t = 1..=H^L` are addressed by the base-`H` digits of `t - 1`, most
//! significant first. A prefix of `l` digits names a node at level `l` of the
//! `H`-ary tree; its interval is the contiguous block of rounds sharing that prefix.

use std::fmt;
use std::ops::{Add, Deref, Mul, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the coordinate sum for simplex membership.
pub const SIMPLEX_SUM_TOL: f64 = 1e-9;
/// Coordinates below this are rejected as negative for the simplex.
pub const SIMPLEX_NEG_TOL: f64 = 1e-12;
/// Slack allowed on norm-ball and box constraints.
pub const BALL_TOL: f64 = 1e-12;

/// A point in `R^d` with finite coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::domain(format!("coordinate {i} is not finite")));
        }
        Ok(Vector(coords))
    }

    pub fn zeros(d: usize) -> Self {
        Vector(vec![0.0; d])
    }

    pub fn filled(d: usize, value: f64) -> Self {
        Vector(vec![value; d])
    }

    /// Standard basis vector `e_i` (zero-based `i`).
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn scaled(&self, c: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * c).collect())
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, c: f64, other: &[f64]) {
        debug_assert_eq!(self.0.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += c * b;
        }
    }

    /// `self += c (other - self)`. Leaves `self` bit-identical when `other == self`, so
    /// running means of a constant stream stay exact.
    pub fn move_towards(&mut self, c: f64, other: &[f64]) {
        debug_assert_eq!(self.0.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += c * (b - *a);
        }
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        norm_value(&self.0, kind)
    }

    pub fn check_dim(&self, d: usize, what: &str) -> Result<()> {
        if self.dim() != d {
            return Err(Error::domain(format!(
                "{what}: expected dimension {d}, got {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl<'a> Add<&'a Vector> for &'a Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a Vector> for &'a Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;

    fn mul(self, c: f64) -> Vector {
        self.scaled(c)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    #[serde(rename = "linf")]
    LInf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::L1, NormKind::L2, NormKind::LInf];

    pub fn dual(self) -> NormKind {
        match self {
            NormKind::L1 => NormKind::LInf,
            NormKind::L2 => NormKind::L2,
            NormKind::LInf => NormKind::L1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::LInf => "linf",
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(NormKind::L1),
            "l2" => Ok(NormKind::L2),
            "linf" | "l-inf" | "inf" => Ok(NormKind::LInf),
            other => Err(Error::config(format!("unknown norm `{other}`"))),
        }
    }
}

pub fn norm_value(v: &[f64], kind: NormKind) -> f64 {
    match kind {
        NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
        NormKind::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormKind::LInf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

/// `‖a - b‖` without allocating.
pub fn distance(a: &[f64], b: &[f64], kind: NormKind) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let diffs = a.iter().zip(b).map(|(x, y)| x - y);
    match kind {
        NormKind::L1 => diffs.map(f64::abs).sum(),
        NormKind::L2 => diffs.map(|x| x * x).sum::<f64>().sqrt(),
        NormKind::LInf => diffs.fold(0.0, |m, x| m.max(x.abs())),
    }
}

/// The convex prediction set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Simplex { d: usize },
    L2Ball { d: usize, radius: f64 },
    L1Ball { d: usize, radius: f64 },
    /// The cube `[lo, hi]^d`.
    Box { d: usize, lo: f64, hi: f64 },
}

impl Domain {
    pub fn simplex(d: usize) -> Result<Self> {
        Domain::Simplex { d }.validated()
    }

    pub fn l2_ball(d: usize, radius: f64) -> Result<Self> {
        Domain::L2Ball { d, radius }.validated()
    }

    pub fn l1_ball(d: usize, radius: f64) -> Result<Self> {
        Domain::L1Ball { d, radius }.validated()
    }

    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Domain::Box { d, lo, hi }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.dim() == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        match &self {
            Domain::Simplex { .. } => {}
            Domain::L2Ball { radius, .. } | Domain::L1Ball { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::domain(format!("ball radius must be positive, got {radius}")));
                }
            }
            Domain::Box { lo, hi, .. } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::domain(format!("invalid box bounds [{lo}, {hi}]")));
                }
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        match *self {
            Domain::Simplex { d } => d,
            Domain::L2Ball { d, .. } | Domain::L1Ball { d, .. } | Domain::Box { d, .. } => d,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::Simplex { .. } => "simplex",
            Domain::L2Ball { .. } => "l2ball",
            Domain::L1Ball { .. } => "l1ball",
            Domain::Box { .. } => "box",
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        if p.len() != self.dim() || p.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match *self {
            Domain::Simplex { .. } => {
                p.iter().all(|&x| x >= -SIMPLEX_NEG_TOL)
                    && (p.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_SUM_TOL
            }
            Domain::L2Ball { radius, .. } => norm_value(p, NormKind::L2) <= radius + BALL_TOL,
            Domain::L1Ball { radius, .. } => norm_value(p, NormKind::L1) <= radius + BALL_TOL,
            Domain::Box { lo, hi, .. } => p.iter().all(|&x| x >= lo - BALL_TOL && x <= hi + BALL_TOL),
        }
    }

    pub fn check_member(&self, p: &[f64], what: &str) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::domain(format!("{what} is not a member of the {} domain", self.name())))
        }
    }

    /// Deterministic interior point: simplex centroid, ball centre, box midpoint.
    pub fn base_point(&self) -> Vector {
        match *self {
            Domain::Simplex { d } => Vector::filled(d, 1.0 / d as f64),
            Domain::L2Ball { d, .. } | Domain::L1Ball { d, .. } => Vector::zeros(d),
            Domain::Box { d, lo, hi } => Vector::filled(d, 0.5 * (lo + hi)),
        }
    }

    /// Whether `p ∈ P ⇔ -p ∈ P`.
    pub fn is_centrally_symmetric(&self) -> bool {
        match *self {
            Domain::Simplex { .. } => false,
            Domain::L2Ball { .. } | Domain::L1Ball { .. } => true,
            Domain::Box { lo, hi, .. } => lo == -hi,
        }
    }

    /// Exact `sup ‖a - b‖` over member pairs.
    pub fn diameter(&self, kind: NormKind) -> Result<f64> {
        let d = self.dim() as f64;
        let diam = match (*self, kind) {
            (Domain::Simplex { d: 1 }, _) => 0.0,
            (Domain::Simplex { .. }, NormKind::L1) => 2.0,
            (Domain::Simplex { .. }, NormKind::L2) => std::f64::consts::SQRT_2,
            (Domain::Simplex { .. }, NormKind::LInf) => 1.0,
            (Domain::L2Ball { radius, .. }, NormKind::L1) => 2.0 * radius * d.sqrt(),
            (Domain::L2Ball { radius, .. }, NormKind::L2 | NormKind::LInf) => 2.0 * radius,
            (Domain::L1Ball { radius, .. }, _) => 2.0 * radius,
            (Domain::Box { lo, hi, .. }, NormKind::L1) => d * (hi - lo),
            (Domain::Box { lo, hi, .. }, NormKind::L2) => d.sqrt() * (hi - lo),
            (Domain::Box { lo, hi, .. }, NormKind::LInf) => hi - lo,
        };
        Ok(diam)
    }

    /// Number of canonical extreme points (see [`Domain::vertex`]).
    pub fn vertex_count(&self) -> usize {
        match *self {
            Domain::Simplex { d } => d,
            Domain::L2Ball { d, .. } | Domain::L1Ball { d, .. } => 2 * d,
            Domain::Box { d, .. } => 1usize.checked_shl(d as u32).unwrap_or(usize::MAX),
        }
    }

    /// Canonical extreme points: `e_i` for the simplex, `±r e_i` for the balls and
    /// the `2^d` corners of the box (bit `j` of `i` selects `hi` in coordinate `j`).
    pub fn vertex(&self, i: usize) -> Result<Vector> {
        if i >= self.vertex_count() {
            return Err(Error::bounds(format!(
                "vertex index {i} out of range for {} vertices",
                self.vertex_count()
            )));
        }
        Ok(match *self {
            Domain::Simplex { d } => Vector::basis(d, i),
            Domain::L2Ball { d, radius } | Domain::L1Ball { d, radius } => {
                let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
                Vector::basis(d, i / 2).scaled(sign * radius)
            }
            Domain::Box { d, lo, hi } => Vector(
                (0..d)
                    .map(|j| if (i >> j) & 1 == 1 { hi } else { lo })
                    .collect(),
            ),
        })
    }

    /// Draws a member point. Simplex points are Dirichlet(1); a small fraction of
    /// draws land on a face so boundary behaviour is exercised.
    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        match *self {
            Domain::Simplex { d } => {
                if rng.gen_bool(0.05) {
                    return Vector::basis(d, rng.gen_range(0..d));
                }
                let mut e: Vec<f64> = (0..d).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                let s: f64 = e.iter().sum();
                e.iter_mut().for_each(|x| *x /= s);
                Vector(e)
            }
            Domain::L2Ball { d, radius } => {
                let g: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
                let n = norm_value(&g, NormKind::L2).max(f64::MIN_POSITIVE);
                let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
                Vector(g.into_iter().map(|x| x / n * r).collect())
            }
            Domain::L1Ball { d, radius } => {
                let e: Vec<f64> = (0..=d).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                let s: f64 = e.iter().sum();
                Vector(
                    e[..d]
                        .iter()
                        .map(|x| {
                            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                            sign * radius * x / s
                        })
                        .collect(),
                )
            }
            Domain::Box { d, lo, hi } => Vector((0..d).map(|_| rng.gen_range(lo..=hi)).collect()),
        }
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Shape of the `H`-ary, depth-`L` tree over rounds `1..=H^L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeShape {
    arity: usize,
    depth: usize,
    capacity: usize,
}

impl TreeShape {
    pub fn new(arity: usize, depth: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::config(format!("arity H must be at least 2, got {arity}")));
        }
        if depth < 1 {
            return Err(Error::config("depth L must be at least 1"));
        }
        let capacity = u32::try_from(depth)
            .ok()
            .and_then(|l| arity.checked_pow(l))
            .ok_or_else(|| Error::config(format!("H^L overflows for H={arity}, L={depth}")))?;
        Ok(TreeShape { arity, depth, capacity })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `H^L`
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// `H^(L-l)`, the length of a level-`l` interval.
    pub fn interval_len(&self, level: usize) -> usize {
        self.arity.pow((self.depth - level) as u32)
    }

    pub fn digits(&self, t: usize) -> Result<Vec<usize>> {
        if t < 1 || t > self.capacity {
            return Err(Error::bounds(format!(
                "round {t} outside [1, {}]",
                self.capacity
            )));
        }
        let mut rest = t - 1;
        let mut digits = vec![0; self.depth];
        for slot in digits.iter_mut().rev() {
            *slot = rest % self.arity;
            rest /= self.arity;
        }
        Ok(digits)
    }

    /// Inverse of [`TreeShape::digits`].
    pub fn round_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.depth {
            return Err(Error::bounds(format!(
                "expected {} digits, got {}",
                self.depth,
                digits.len()
            )));
        }
        let (start, _) = self.interval(digits)?;
        Ok(start)
    }

    /// Inclusive round range `Γ_k` of the node with the given prefix.
    pub fn interval(&self, prefix: &[usize]) -> Result<(usize, usize)> {
        if prefix.len() > self.depth {
            return Err(Error::bounds(format!(
                "prefix of length {} deeper than L={}",
                prefix.len(),
                self.depth
            )));
        }
        let mut offset = 0usize;
        for &h in prefix {
            if h >= self.arity {
                return Err(Error::bounds(format!("digit {h} not in [0, {}]", self.arity - 1)));
            }
            offset = offset * self.arity + h;
        }
        let len = self.interval_len(prefix.len());
        let start = offset * len + 1;
        Ok((start, start + len - 1))
    }
}

/// Base-`H` digits of `t - 1`, most significant first.
pub fn digits_base_h(t: usize, arity: usize, depth: usize) -> Result<Vec<usize>> {
    TreeShape::new(arity, depth)?.digits(t)
}

/// Inclusive round interval of the level-`prefix.len()` node named by `prefix`.
pub fn interval_of(prefix: &[usize], arity: usize, depth: usize) -> Result<(usize, usize)> {
    TreeShape::new(arity, depth)?.interval(prefix)
}
