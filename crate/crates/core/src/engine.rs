//! Tree-structured forecasters.
//!
//! Rounds `1..=T` are the leaves of an H-ary tree of depth L, indexed by the
//! base-H digits of `t - 1`. Each node at level `l` holds one action; the forecast
//! at round `t` is the uniform mixture of the L actions along the path to leaf
//! `t`, each atom labeled by its node prefix.
//!
//! [`TreeCal`] assigns child `h > 0` the mean of all outcomes observed in its
//! elder siblings and child `0` the base point. [`TreeSwap`] runs a fresh
//! [`Subroutine`] instance per internal node and feeds it interval-averaged
//! losses; with [`Ftl`] it reproduces `TreeCal` exactly. Both keep only the
//! current root-to-leaf path in memory.

use rand::distributions::{Distribution, WeightedIndex};

use crate::adversaries::{child_rng, Adversary, AdversarySpec, STREAM_SAMPLER};
use crate::error::{Error, Result};
use crate::geometry::{distance, Domain, NormKind, TreeShape, Vector};
use crate::metrics::{Atom, Forecast, Label, PureTranscript, Transcript};
use crate::scoring::{bregman_unchecked, Regularizer};

/// Horizon and tree shape. Valid when `H ≥ 2`, `L ≥ 1` and `H^(L-1) ≤ T ≤ H^L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeParams {
    pub horizon: usize,
    pub arity: usize,
    pub depth: usize,
}

impl TreeParams {
    pub fn new(horizon: usize, arity: usize, depth: usize) -> Result<Self> {
        let p = TreeParams { horizon, arity, depth };
        p.shape()?;
        Ok(p)
    }

    /// The untruncated tree `T = H^L`.
    pub fn full(arity: usize, depth: usize) -> Result<Self> {
        let shape = TreeShape::new(arity, depth)?;
        TreeParams::new(shape.capacity(), arity, depth)
    }

    pub fn shape(&self) -> Result<TreeShape> {
        let shape = TreeShape::new(self.arity, self.depth)?;
        let lower = shape.capacity() / self.arity;
        if self.horizon > shape.capacity() {
            return Err(Error::config(format!(
                "T = {} exceeds H^L = {}",
                self.horizon,
                shape.capacity()
            )));
        }
        if self.horizon < lower.max(1) {
            return Err(Error::config(format!(
                "T = {} is below H^(L-1) = {lower}; use a smaller depth",
                self.horizon
            )));
        }
        Ok(shape)
    }
}

/// Sequential forecast/observe protocol shared by the tree forecasters.
pub trait Forecaster {
    fn horizon(&self) -> usize;
    /// The round awaiting a forecast or an observation.
    fn round(&self) -> usize;
    fn forecast(&mut self, t: usize) -> Result<Forecast>;
    fn observe(&mut self, t: usize, y: &Vector) -> Result<()>;
}

/// Drives `f` for its full horizon, asking `next` for each outcome after the forecast.
pub fn run_forecaster<F, N>(f: &mut F, domain: Domain, mut next: N) -> Result<Transcript>
where
    F: Forecaster + ?Sized,
    N: FnMut(usize, &Forecast) -> Result<Vector>,
{
    let mut tr = Transcript::with_capacity(domain, f.horizon());
    for t in 1..=f.horizon() {
        let x = f.forecast(t)?;
        let y = next(t, &x)?;
        f.observe(t, &y)?;
        tr.push(x, y)?;
    }
    Ok(tr)
}

/// Runs `f` against `adversary`, passing the forecast to adaptive specs.
pub fn run_against<F: Forecaster + ?Sized>(f: &mut F, domain: Domain, adversary: &mut Adversary) -> Result<Transcript> {
    run_forecaster(f, domain, |t, x| adversary.next_outcome(t, Some(x)))
}

/// An action assignment: node `prefix` (length `level`) received `action`, first used at round `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssignEvent {
    pub t: usize,
    pub level: usize,
    pub prefix: Vec<usize>,
    pub action: Vector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Forecast,
    Observe,
    Done,
}

fn check_phase(phase: Phase, want: Phase, round: usize, t: usize) -> Result<()> {
    if phase == Phase::Done {
        return Err(Error::protocol(format!("horizon exhausted, got call for round {t}")));
    }
    if phase != want || round != t {
        let what = if phase == Phase::Forecast { "forecast" } else { "observe" };
        return Err(Error::protocol(format!("expected {what} for round {round}, got call for round {t}")));
    }
    Ok(())
}

/// Index of the shallowest level whose digit differs; levels from it down start new nodes.
fn first_changed(old: &[usize], new: &[usize]) -> usize {
    old.iter().zip(new).position(|(a, b)| a != b).unwrap_or(old.len())
}

fn path_forecast(actions: &[&Vector], digits: &[usize]) -> Forecast {
    let w = 1.0 / actions.len() as f64;
    let atoms = actions
        .iter()
        .enumerate()
        .map(|(i, p)| Atom { point: (*p).clone(), label: Some(Label::from_digits(&digits[..=i])), weight: w })
        .collect();
    Forecast::new(atoms).expect("path forecast is a valid distribution")
}

#[derive(Clone, Debug)]
struct CalLevel {
    action: Vector,
    sibling_mean: Vector,
    sibling_count: usize,
    node_mean: Vector,
    node_count: usize,
}

/// The calibration forecaster with running-mean node actions.
#[derive(Clone, Debug)]
pub struct TreeCal {
    domain: Domain,
    params: TreeParams,
    shape: TreeShape,
    base: Vector,
    t: usize,
    phase: Phase,
    digits: Vec<usize>,
    levels: Vec<CalLevel>,
    events: Option<Vec<AssignEvent>>,
    skip_mean_update: bool,
}

impl TreeCal {
    pub fn new(domain: Domain, params: TreeParams) -> Result<Self> {
        let base = domain.base_point();
        TreeCal::with_base_point(domain, params, base)
    }

    /// Uses `base` instead of the domain's canonical base point for first children.
    pub fn with_base_point(domain: Domain, params: TreeParams, base: Vector) -> Result<Self> {
        let shape = params.shape()?;
        domain.check_member(&base, "base point")?;
        let d = domain.dim();
        let level = CalLevel {
            action: base.clone(),
            sibling_mean: Vector::zeros(d),
            sibling_count: 0,
            node_mean: Vector::zeros(d),
            node_count: 0,
        };
        Ok(TreeCal {
            domain,
            params,
            shape,
            base,
            t: 1,
            phase: Phase::Forecast,
            digits: vec![0; params.depth],
            levels: vec![level; params.depth],
            events: None,
            skip_mean_update: false,
        })
    }

    /// Starts recording [`AssignEvent`]s, including the initial base-point assignments.
    pub fn record_assignments(&mut self) {
        let mut events = Vec::new();
        for (i, lvl) in self.levels.iter().enumerate() {
            events.push(AssignEvent {
                t: self.t,
                level: i + 1,
                prefix: self.digits[..=i].to_vec(),
                action: lvl.action.clone(),
            });
        }
        self.events = Some(events);
    }

    pub fn assignments(&self) -> &[AssignEvent] {
        self.events.as_deref().unwrap_or(&[])
    }

    /// Fault injection for mutation checks: later siblings keep the previous action.
    #[doc(hidden)]
    pub fn inject_skip_mean_update(&mut self) {
        self.skip_mean_update = true;
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    /// Current path actions, shallowest first.
    pub fn path_actions(&self) -> Vec<Vector> {
        self.levels.iter().map(|l| l.action.clone()).collect()
    }

    fn advance(&mut self) -> Result<()> {
        let next = self.shape.digits(self.t + 1)?;
        let j = first_changed(&self.digits, &next);
        let d = self.domain.dim();
        for i in j..self.levels.len() {
            let lvl = &mut self.levels[i];
            if i == j {
                let done = std::mem::replace(&mut lvl.node_mean, Vector::zeros(d));
                lvl.sibling_count += lvl.node_count;
                lvl.sibling_mean.move_towards(lvl.node_count as f64 / lvl.sibling_count as f64, &done);
                if !self.skip_mean_update {
                    lvl.action = lvl.sibling_mean.clone();
                }
            } else {
                lvl.sibling_mean = Vector::zeros(d);
                lvl.sibling_count = 0;
                lvl.node_mean = Vector::zeros(d);
                lvl.action = self.base.clone();
            }
            lvl.node_count = 0;
            if let Some(ev) = self.events.as_mut() {
                ev.push(AssignEvent {
                    t: self.t + 1,
                    level: i + 1,
                    prefix: next[..=i].to_vec(),
                    action: lvl.action.clone(),
                });
            }
        }
        self.digits = next;
        Ok(())
    }
}

impl Forecaster for TreeCal {
    fn horizon(&self) -> usize {
        self.params.horizon
    }

    fn round(&self) -> usize {
        self.t
    }

    fn forecast(&mut self, t: usize) -> Result<Forecast> {
        check_phase(self.phase, Phase::Forecast, self.t, t)?;
        self.phase = Phase::Observe;
        let actions: Vec<&Vector> = self.levels.iter().map(|l| &l.action).collect();
        Ok(path_forecast(&actions, &self.digits))
    }

    fn observe(&mut self, t: usize, y: &Vector) -> Result<()> {
        check_phase(self.phase, Phase::Observe, self.t, t)?;
        self.domain.check_member(y, "outcome")?;
        for lvl in &mut self.levels {
            lvl.node_count += 1;
            lvl.node_mean.move_towards(1.0 / lvl.node_count as f64, y);
        }
        if self.t == self.params.horizon {
            self.phase = Phase::Done;
            return Ok(());
        }
        self.advance()?;
        self.t += 1;
        self.phase = Phase::Forecast;
        Ok(())
    }
}

/// Average Bregman loss over one child interval, represented by its sufficient statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalLoss {
    /// Level of the child node whose interval this is.
    pub level: usize,
    pub prefix: Vec<usize>,
    /// Rounds actually present (smaller than `H^(L-l)` only in a truncated tree).
    pub count: usize,
    pub mean_outcome: Vector,
    /// Mean of `R(y_s)` over the interval.
    pub mean_value: f64,
}

impl IntervalLoss {
    /// `(1/count) Σ_s D_R(y_s | p)`, evaluated through the mean outcome.
    pub fn loss_at(&self, p: &[f64], r: &Regularizer) -> f64 {
        bregman_unchecked(r, &self.mean_outcome, p) + self.mean_value - r.value(&self.mean_outcome)
    }
}

/// What a subroutine sees when asked for a child's action.
#[derive(Clone, Debug)]
pub struct NodeContext<'a> {
    pub domain: &'a Domain,
    pub regularizer: &'a Regularizer,
    pub base: &'a Vector,
    /// Level of the child being assigned.
    pub level: usize,
    /// Prefix of the parent node.
    pub prefix: &'a [usize],
    pub arity: usize,
}

/// External-regret algorithm run at one internal node over its H children.
pub trait Subroutine: Send {
    /// Whether the list passed to [`Subroutine::next_action`] includes the current child's loss.
    fn lookahead(&self) -> bool {
        false
    }

    fn next_action(&mut self, ctx: &NodeContext<'_>, losses: &[IntervalLoss]) -> Result<Vector>;
}

/// Count-weighted mean of `(mean, count)` pairs; `None` for an empty or zero-count list.
fn weighted_mean<'a, I>(items: I, d: usize) -> Option<Vector>
where
    I: IntoIterator<Item = (&'a [f64], usize)>,
{
    let mut sum = Vector::zeros(d);
    let mut n = 0usize;
    for (m, c) in items {
        sum.add_scaled(c as f64, m);
        n += c;
    }
    (n > 0).then(|| sum.scaled(1.0 / n as f64))
}

/// Follow-the-leader on Bregman losses: the count-weighted mean of completed intervals.
pub fn ftl_action(completed: &[(Vector, usize)], base: &Vector) -> Vector {
    weighted_mean(completed.iter().map(|(m, c)| (m.as_slice(), *c)), base.dim()).unwrap_or_else(|| base.clone())
}

/// Be-the-leader: like FTL but including the current interval.
pub fn btl_action(including_current: &[(Vector, usize)]) -> Result<Vector> {
    let d = including_current.first().map(|(m, _)| m.dim()).unwrap_or(0);
    weighted_mean(including_current.iter().map(|(m, c)| (m.as_slice(), *c)), d)
        .ok_or_else(|| Error::domain("be-the-leader needs at least one interval"))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Ftl;

impl Subroutine for Ftl {
    fn next_action(&mut self, ctx: &NodeContext<'_>, losses: &[IntervalLoss]) -> Result<Vector> {
        Ok(weighted_mean(losses.iter().map(|l| (l.mean_outcome.as_slice(), l.count)), ctx.domain.dim())
            .unwrap_or_else(|| ctx.base.clone()))
    }
}

/// Clairvoyant be-the-leader; only usable in oracle mode.
#[derive(Clone, Copy, Debug, Default)]
pub struct Btl;

impl Subroutine for Btl {
    fn lookahead(&self) -> bool {
        true
    }

    fn next_action(&mut self, ctx: &NodeContext<'_>, losses: &[IntervalLoss]) -> Result<Vector> {
        weighted_mean(losses.iter().map(|l| (l.mean_outcome.as_slice(), l.count)), ctx.domain.dim())
            .ok_or_else(|| Error::domain("be-the-leader needs at least one interval"))
    }
}

/// Always plays the base point.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConstantBase;

impl Subroutine for ConstantBase {
    fn next_action(&mut self, ctx: &NodeContext<'_>, _losses: &[IntervalLoss]) -> Result<Vector> {
        Ok(ctx.base.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubroutineKind {
    Ftl,
    Btl,
    ConstantBase,
}

impl SubroutineKind {
    pub fn factory(self) -> SubroutineFactory {
        match self {
            SubroutineKind::Ftl => Box::new(|| Box::new(Ftl)),
            SubroutineKind::Btl => Box::new(|| Box::new(Btl)),
            SubroutineKind::ConstantBase => Box::new(|| Box::new(ConstantBase)),
        }
    }
}

pub type SubroutineFactory = Box<dyn Fn() -> Box<dyn Subroutine> + Send + Sync>;

/// The actions played by one internal node's subroutine and the losses of its children.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord {
    /// Level of the children.
    pub level: usize,
    pub prefix: Vec<usize>,
    pub actions: Vec<Vector>,
    pub losses: Vec<IntervalLoss>,
}

impl NodeRecord {
    /// `Σ_h w_h ℓ_h(a_h) - min_p Σ_h w_h ℓ_h(p)` with count weights `w_h`. The minimizer
    /// of a weighted sum of Bregman losses is the weighted mean outcome.
    pub fn external_regret(&self, r: &Regularizer) -> f64 {
        let d = self.actions.first().map_or(0, |a| a.dim());
        let Some(best) = weighted_mean(self.losses.iter().map(|l| (l.mean_outcome.as_slice(), l.count)), d) else {
            return 0.0;
        };
        self.actions
            .iter()
            .zip(&self.losses)
            .map(|(a, l)| {
                l.count as f64 * (bregman_unchecked(r, &l.mean_outcome, a) - bregman_unchecked(r, &l.mean_outcome, &best))
            })
            .sum()
    }

    /// `Σ_h ‖p_h - p̃_h‖²` between the FTL and BTL actions implied by this node's losses.
    pub fn ftl_btl_movement(&self, base: &Vector, kind: NormKind) -> f64 {
        let stats: Vec<(Vector, usize)> = self.losses.iter().map(|l| (l.mean_outcome.clone(), l.count)).collect();
        (0..stats.len())
            .map(|h| {
                let ftl = ftl_action(&stats[..h], base);
                let btl = btl_action(&stats[..=h]).expect("non-empty prefix");
                distance(&ftl, &btl, kind).powi(2)
            })
            .sum()
    }
}

struct SwapLevel {
    sub: Box<dyn Subroutine>,
    completed: Vec<IntervalLoss>,
    action: Vector,
    cur_sum: Vector,
    cur_count: usize,
    cur_value: f64,
    played: Vec<Vector>,
}

/// The swap-regret meta-algorithm over a tree of subroutine instances, with labeled forecasts.
pub struct TreeSwap {
    domain: Domain,
    params: TreeParams,
    shape: TreeShape,
    regularizer: Regularizer,
    base: Vector,
    factory: SubroutineFactory,
    oracle: Option<Vec<Vector>>,
    t: usize,
    phase: Phase,
    digits: Vec<usize>,
    levels: Vec<SwapLevel>,
    records: Option<Vec<NodeRecord>>,
    started: bool,
}

impl TreeSwap {
    /// Causal mode. Refuses lookahead subroutines.
    pub fn new(domain: Domain, params: TreeParams, regularizer: Regularizer, factory: SubroutineFactory) -> Result<Self> {
        TreeSwap::build(domain, params, regularizer, factory, None)
    }

    /// Oracle mode: the full outcome stream is known up front, as lookahead subroutines need.
    pub fn with_oracle(
        domain: Domain,
        params: TreeParams,
        regularizer: Regularizer,
        factory: SubroutineFactory,
        outcomes: Vec<Vector>,
    ) -> Result<Self> {
        if outcomes.len() != params.horizon {
            return Err(Error::config(format!(
                "oracle stream has {} outcomes for horizon {}",
                outcomes.len(),
                params.horizon
            )));
        }
        for y in &outcomes {
            domain.check_member(y, "oracle outcome")?;
        }
        TreeSwap::build(domain, params, regularizer, factory, Some(outcomes))
    }

    fn build(
        domain: Domain,
        params: TreeParams,
        regularizer: Regularizer,
        factory: SubroutineFactory,
        oracle: Option<Vec<Vector>>,
    ) -> Result<Self> {
        let shape = params.shape()?;
        let base = domain.base_point();
        if factory().lookahead() && oracle.is_none() {
            return Err(Error::config("a lookahead subroutine requires oracle mode with the full outcome stream"));
        }
        let d = domain.dim();
        let mut ts = TreeSwap {
            domain,
            params,
            shape,
            regularizer,
            base,
            factory,
            oracle,
            t: 1,
            phase: Phase::Forecast,
            digits: vec![0; params.depth],
            levels: Vec::with_capacity(params.depth),
            records: None,
            started: false,
        };
        for _ in 0..params.depth {
            let sub = (ts.factory)();
            ts.levels.push(SwapLevel {
                sub,
                completed: Vec::new(),
                action: ts.base.clone(),
                cur_sum: Vector::zeros(d),
                cur_count: 0,
                cur_value: 0.0,
                played: Vec::new(),
            });
        }
        Ok(ts)
    }

    /// Replaces the base point handed to subroutines. Only allowed before the first forecast.
    pub fn set_base_point(&mut self, base: Vector) -> Result<()> {
        if self.started {
            return Err(Error::protocol("base point fixed once forecasting has started"));
        }
        self.domain.check_member(&base, "base point")?;
        for lvl in &mut self.levels {
            lvl.action = base.clone();
        }
        self.base = base;
        Ok(())
    }

    /// Keeps a [`NodeRecord`] for every internal node once it closes.
    pub fn record_nodes(&mut self) {
        self.records = Some(Vec::new());
    }

    pub fn node_records(&self) -> &[NodeRecord] {
        self.records.as_deref().unwrap_or(&[])
    }

    pub fn base_point(&self) -> &Vector {
        &self.base
    }

    /// Loss of the current child interval at level index `i`, read from the oracle stream.
    fn lookahead_loss(&self, i: usize) -> Result<IntervalLoss> {
        let oracle = self.oracle.as_ref().ok_or_else(|| Error::config("lookahead outside oracle mode"))?;
        let prefix = self.digits[..=i].to_vec();
        let (start, end) = self.shape.interval(&prefix)?;
        let end = end.min(self.params.horizon);
        let slice = &oracle[start - 1..end];
        Ok(self.interval_loss(i + 1, prefix, slice.iter().map(|y| y.as_slice())))
    }

    fn interval_loss<'a, I: Iterator<Item = &'a [f64]>>(&self, level: usize, prefix: Vec<usize>, ys: I) -> IntervalLoss {
        let mut sum = Vector::zeros(self.domain.dim());
        let mut value = 0.0;
        let mut count = 0;
        for y in ys {
            sum.add_scaled(1.0, y);
            value += self.regularizer.value(y);
            count += 1;
        }
        IntervalLoss {
            level,
            prefix,
            count,
            mean_outcome: sum.scaled(1.0 / count as f64),
            mean_value: value / count as f64,
        }
    }

    fn assign(&mut self, i: usize) -> Result<()> {
        let current = if self.levels[i].sub.lookahead() { Some(self.lookahead_loss(i)?) } else { None };
        let ctx = NodeContext {
            domain: &self.domain,
            regularizer: &self.regularizer,
            base: &self.base,
            level: i + 1,
            prefix: &self.digits[..i],
            arity: self.params.arity,
        };
        let lvl = &mut self.levels[i];
        let action = match current {
            Some(cur) => {
                lvl.completed.push(cur);
                let a = lvl.sub.next_action(&ctx, &lvl.completed);
                lvl.completed.pop();
                a?
            }
            None => lvl.sub.next_action(&ctx, &lvl.completed)?,
        };
        if action.dim() != self.domain.dim() || !self.domain.contains(&action) {
            return Err(Error::protocol(format!(
                "subroutine at level {} returned non-member action {action}",
                i + 1
            )));
        }
        lvl.played.push(action.clone());
        lvl.action = action;
        Ok(())
    }

    /// Closes the current child at level index `i`, appending its loss.
    fn complete_child(&mut self, i: usize) {
        let lvl = &mut self.levels[i];
        let n = lvl.cur_count as f64;
        let loss = IntervalLoss {
            level: i + 1,
            prefix: self.digits[..=i].to_vec(),
            count: lvl.cur_count,
            mean_outcome: lvl.cur_sum.scaled(1.0 / n),
            mean_value: lvl.cur_value / n,
        };
        lvl.completed.push(loss);
        lvl.cur_sum = Vector::zeros(self.domain.dim());
        lvl.cur_count = 0;
        lvl.cur_value = 0.0;
    }

    fn close_node(&mut self, i: usize) {
        let lvl = &mut self.levels[i];
        let losses = std::mem::take(&mut lvl.completed);
        let actions = std::mem::take(&mut lvl.played);
        if let Some(records) = self.records.as_mut() {
            records.push(NodeRecord { level: i + 1, prefix: self.digits[..i].to_vec(), actions, losses });
        }
    }
}

impl Forecaster for TreeSwap {
    fn horizon(&self) -> usize {
        self.params.horizon
    }

    fn round(&self) -> usize {
        self.t
    }

    fn forecast(&mut self, t: usize) -> Result<Forecast> {
        check_phase(self.phase, Phase::Forecast, self.t, t)?;
        if !self.started {
            for i in 0..self.levels.len() {
                self.assign(i)?;
            }
            self.started = true;
        }
        self.phase = Phase::Observe;
        let actions: Vec<&Vector> = self.levels.iter().map(|l| &l.action).collect();
        Ok(path_forecast(&actions, &self.digits))
    }

    fn observe(&mut self, t: usize, y: &Vector) -> Result<()> {
        check_phase(self.phase, Phase::Observe, self.t, t)?;
        self.domain.check_member(y, "outcome")?;
        if let Some(oracle) = &self.oracle {
            if oracle[t - 1] != *y {
                return Err(Error::protocol(format!("round {t} outcome differs from the oracle stream")));
            }
        }
        let value = self.regularizer.value(y);
        for lvl in &mut self.levels {
            lvl.cur_sum.add_scaled(1.0, y);
            lvl.cur_count += 1;
            lvl.cur_value += value;
        }
        let depth = self.levels.len();
        if self.t == self.params.horizon {
            for i in 0..depth {
                self.complete_child(i);
            }
            for i in (0..depth).rev() {
                self.close_node(i);
            }
            self.phase = Phase::Done;
            return Ok(());
        }
        let next = self.shape.digits(self.t + 1)?;
        let j = first_changed(&self.digits, &next);
        for i in j..depth {
            self.complete_child(i);
        }
        // deeper nodes close before the digits move on, so records carry the old prefixes
        for i in (j + 1..depth).rev() {
            self.close_node(i);
            self.levels[i].sub = (self.factory)();
        }
        self.digits = next;
        self.t += 1;
        for i in j..depth {
            self.assign(i)?;
        }
        self.phase = Phase::Forecast;
        Ok(())
    }
}

/// Runs the block-sampled forecaster: `T/S` inner rounds, each emitting `S` pure
/// predictions drawn from the inner forecast and feeding the block's mean outcome back.
pub fn sample_treecal_run(
    domain: Domain,
    horizon: usize,
    arity: usize,
    depth: usize,
    block: usize,
    adversary: &AdversarySpec,
    seed: u64,
) -> Result<(PureTranscript, Transcript)> {
    if block == 0 || !horizon.is_multiple_of(block) {
        return Err(Error::config(format!("block size S = {block} must divide T = {horizon}")));
    }
    let inner = TreeCal::new(domain, TreeParams::new(horizon / block, arity, depth)?)?;
    sample_treecal_with(inner, domain, block, adversary, seed)
}

/// [`sample_treecal_run`] around a prepared inner forecaster; the total horizon is
/// `block` times the inner one.
pub fn sample_treecal_with(
    mut inner: TreeCal,
    domain: Domain,
    block: usize,
    adversary: &AdversarySpec,
    seed: u64,
) -> Result<(PureTranscript, Transcript)> {
    if block == 0 {
        return Err(Error::config("block size S must be positive"));
    }
    let inner_t = inner.params().horizon;
    let horizon = inner_t * block;
    let mut adv = Adversary::new(adversary, domain, horizon, seed)?;
    let mut sampler = child_rng(seed, STREAM_SAMPLER);
    let mut pure = PureTranscript::new(domain);
    let mut tr = Transcript::with_capacity(domain, inner_t);
    for i in 1..=inner_t {
        let x = inner.forecast(i)?;
        let index = WeightedIndex::new(x.atoms().iter().map(|a| a.weight))
            .map_err(|e| Error::domain(format!("unsamplable forecast: {e}")))?;
        let mut sum = Vector::zeros(domain.dim());
        for s in 0..block {
            let p = x.atoms()[index.sample(&mut sampler)].point.clone();
            let y = adv.next_outcome((i - 1) * block + s + 1, Some(&x))?;
            sum.add_scaled(1.0, &y);
            pure.push(p, y)?;
        }
        let ybar = sum.scaled(1.0 / block as f64);
        inner.observe(i, &ybar)?;
        tr.push(x, ybar)?;
    }
    Ok((pure, tr))
}
