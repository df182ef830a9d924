//! Randomized invariant suite behind `treecal verify`.
//!
//! Each invariant is checked on freshly generated instances; the summary lists how
//! many instances were checked and how many failed. The fast suite uses smaller
//! instance counts and shallower trees than the full one.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::adversaries::{child_rng, outcome_stream, Adversary, AdversarySpec};
use crate::engine::{run_against, run_forecaster, SubroutineKind, TreeCal, TreeParams, TreeSwap};
use crate::error::Result;
use crate::geometry::{distance, norm_value, Domain, NormKind, TreeShape, Vector};
use crate::harness::{paired_regularizer, proof_chain_bound};
use crate::metrics::{
    calibration_error, realized_loss_cap, swap_regret_audit, swap_regret_finite, Distance, Forecast, Transcript,
};
use crate::reductions::{embed_l1ball_to_simplex, project_simplex_to_l1ball, project_transcript, reduce_transcript, FiniteMenu};
use crate::scoring::{bregman, center_regularizer, mixture_minimizer, Regularizer};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Fast,
    Full,
}

impl std::str::FromStr for Suite {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            other => Err(crate::error::Error::config(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub seed: u64,
    /// Runs TreeCal with its prefix-mean update disabled, to confirm the suite notices.
    pub inject_fault: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantResult {
    pub name: &'static str,
    pub checked: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summary {
    pub results: Vec<InvariantResult>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.failed == 0)
    }

    pub fn get(&self, name: &str) -> Option<&InvariantResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            let status = if r.failed == 0 { "ok" } else { "FAIL" };
            writeln!(f, "{status:4} {:32} checked {:6} failed {}", r.name, r.checked, r.failed)?;
            if let Some(msg) = &r.first_failure {
                writeln!(f, "     first failure: {msg}")?;
            }
        }
        let failed = self.results.iter().filter(|r| r.failed > 0).count();
        write!(f, "{} invariants, {} failed", self.results.len(), failed)
    }
}

struct Tally {
    result: InvariantResult,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { result: InvariantResult { name, checked: 0, failed: 0, first_failure: None } }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.result.checked += 1;
        if !ok {
            self.result.failed += 1;
            if self.result.first_failure.is_none() {
                self.result.first_failure = Some(detail());
            }
        }
    }

    /// Records an error from the code under test as a failure.
    fn check_result<T>(&mut self, res: Result<T>) -> Option<T> {
        match res {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(false, || e.to_string());
                None
            }
        }
    }
}

struct Ctx {
    rng: ChaCha8Rng,
    full: bool,
    fault: bool,
    results: Vec<InvariantResult>,
}

impl Ctx {
    fn n(&self, fast: usize, full: usize) -> usize {
        if self.full {
            full
        } else {
            fast
        }
    }

    fn push(&mut self, t: Tally) {
        self.results.push(t.result);
    }
}

pub fn verify(opts: VerifyOptions) -> Summary {
    let mut ctx = Ctx {
        rng: child_rng(opts.seed, 0),
        full: opts.suite == Suite::Full,
        fault: opts.inject_fault,
        results: Vec::new(),
    };
    geometry_checks(&mut ctx);
    scoring_checks(&mut ctx);
    metric_checks(&mut ctx);
    engine_checks(&mut ctx);
    adversary_checks(&mut ctx);
    reduction_checks(&mut ctx);
    Summary { results: ctx.results }
}

fn random_domain(rng: &mut ChaCha8Rng) -> Domain {
    match rng.gen_range(0..4) {
        0 | 1 => Domain::simplex(rng.gen_range(2..=5)).unwrap(),
        2 => Domain::cube(rng.gen_range(1..=3), 0.0, 1.0).unwrap(),
        _ => Domain::l1_ball(rng.gen_range(1..=3), 1.0).unwrap(),
    }
}

fn random_adversary(rng: &mut ChaCha8Rng, domain: &Domain, allow_adaptive: bool) -> AdversarySpec {
    loop {
        let spec = match rng.gen_range(0..5) {
            0 => AdversarySpec::IidVertices { weights: vec![] },
            1 => AdversarySpec::VertexCycle { period: rng.gen_range(1..=domain.vertex_count().min(6)) },
            2 => AdversarySpec::DriftingMean {
                start: domain.sample_member(rng).into_inner(),
                end: domain.sample_member(rng).into_inner(),
            },
            3 if matches!(domain, Domain::Simplex { .. }) => AdversarySpec::IidDirichlet { alpha: rng.gen_range(0.2..2.0) },
            4 if allow_adaptive => AdversarySpec::FarthestVertex,
            _ => continue,
        };
        return spec;
    }
}

fn random_params(rng: &mut ChaCha8Rng, max_h: usize, max_l: usize) -> TreeParams {
    let h = rng.gen_range(2..=max_h);
    let l = rng.gen_range(2..=max_l);
    let cap = h.pow(l as u32);
    TreeParams::new(rng.gen_range(cap / h..=cap), h, l).unwrap()
}

fn geometry_checks(ctx: &mut Ctx) {
    let mut digits = Tally::new("tree_digits_roundtrip");
    let mut parts = Tally::new("tree_interval_partition");
    for h in 2..=4 {
        for l in 1..=4 {
            let shape = TreeShape::new(h, l).unwrap();
            for t in 1..=shape.capacity() {
                let ds = shape.digits(t).unwrap();
                digits.check(shape.round_of(&ds).unwrap() == t, || format!("H={h} L={l} t={t}"));
                for lvl in 0..=l {
                    let (s, e) = shape.interval(&ds[..lvl]).unwrap();
                    parts.check(s <= t && t <= e && e - s + 1 == shape.interval_len(lvl), || {
                        format!("H={h} L={l} t={t} level {lvl}")
                    });
                }
            }
        }
    }
    ctx.push(digits);
    ctx.push(parts);

    let mut norms = Tally::new("norm_axioms");
    for _ in 0..ctx.n(1000, 10_000) {
        let d = ctx.rng.gen_range(1..6);
        let a: Vec<f64> = (0..d).map(|_| ctx.rng.gen_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..d).map(|_| ctx.rng.gen_range(-2.0..2.0)).collect();
        let c: f64 = ctx.rng.gen_range(-3.0..3.0);
        for k in NormKind::ALL {
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let scaled: Vec<f64> = a.iter().map(|x| c * x).collect();
            let tri = norm_value(&sum, k) <= norm_value(&a, k) + norm_value(&b, k) + 1e-12;
            let hom = (norm_value(&scaled, k) - c.abs() * norm_value(&a, k)).abs() <= 1e-12;
            norms.check(tri && hom, || format!("{k:?} a={a:?} b={b:?} c={c}"));
        }
    }
    ctx.push(norms);

    let mut diam = Tally::new("diameter_dominates_pairs");
    let pairs = ctx.n(1000, 10_000);
    for dom in [
        Domain::simplex(4).unwrap(),
        Domain::l2_ball(3, 1.5).unwrap(),
        Domain::l1_ball(3, 1.0).unwrap(),
        Domain::cube(3, -1.0, 2.0).unwrap(),
    ] {
        for k in NormKind::ALL {
            let dk = dom.diameter(k).unwrap();
            let mut worst: f64 = 0.0;
            for _ in 0..pairs {
                let a = dom.sample_member(&mut ctx.rng);
                let b = dom.sample_member(&mut ctx.rng);
                worst = worst.max(distance(&a, &b, k));
            }
            diam.check(worst <= dk + 1e-12, || format!("{} {k:?}: {worst} > {dk}", dom.name()));
        }
    }
    ctx.push(diam);
}

fn scoring_checks(ctx: &mut Ctx) {
    let regs = [Regularizer::Euclidean, Regularizer::negative_entropy()];
    let mut basic = Tally::new("bregman_zero_and_nonnegative");
    let mut decomposition = Tally::new("bias_variance_identity");
    let mut centered = Tally::new("center_invariance");
    for _ in 0..ctx.n(200, 1000) {
        let dom = Domain::simplex(ctx.rng.gen_range(2..=5)).unwrap();
        let k = ctx.rng.gen_range(1..=5);
        let pts: Vec<Vector> = (0..k).map(|_| dom.sample_member(&mut ctx.rng)).collect();
        let raw: Vec<f64> = (0..k).map(|_| ctx.rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let probe = dom.sample_member(&mut ctx.rng);
        for r in &regs {
            let Some(mm) = basic.check_result(mixture_minimizer(&pts, &w, r)) else { continue };
            let lhs: f64 = pts.iter().zip(&w).map(|(y, wi)| wi * bregman(r, y, &probe).unwrap()).sum();
            let rhs = bregman(r, &mm.mean, &probe).unwrap() + mm.jensen_gap;
            decomposition.check((lhs - rhs).abs() <= 1e-9, || format!("{}: {lhs} vs {rhs}", r.name()));
            for y in &pts {
                let zero = bregman(r, y, y).unwrap();
                let d = bregman(r, y, &probe).unwrap();
                basic.check(zero == 0.0 && d >= -1e-9, || format!("{}: D(y|y)={zero} D(y|p)={d}", r.name()));
            }
            let anchor = dom.base_point();
            let c = center_regularizer(r, anchor.clone());
            let same = (bregman(&c, &pts[0], &probe).unwrap() - bregman(r, &pts[0], &probe).unwrap()).abs() <= 1e-10;
            centered.check(same && c.value(&anchor).abs() <= 1e-12, || r.name().to_string());
        }
    }
    ctx.push(basic);
    ctx.push(decomposition);
    ctx.push(centered);
}

fn random_small_transcript(rng: &mut ChaCha8Rng, dom: &Domain, max_t: usize) -> Transcript {
    let menu: Vec<Vector> = (0..3).map(|_| dom.sample_member(rng)).collect();
    let mut tr = Transcript::new(*dom);
    for _ in 0..rng.gen_range(1..=max_t) {
        let k = rng.gen_range(1..=3);
        let atoms = (0..k).map(|_| menu.choose(rng).unwrap().clone()).collect();
        tr.push(Forecast::uniform(atoms).unwrap(), dom.sample_member(rng)).unwrap();
    }
    tr
}

fn metric_checks(ctx: &mut Ctx) {
    let mut audit = Tally::new("swap_equals_calibration");
    for _ in 0..ctx.n(20, 100) {
        let dom = Domain::simplex(ctx.rng.gen_range(2..=3)).unwrap();
        let tr = random_small_transcript(&mut ctx.rng, &dom, 8);
        for r in [Regularizer::Euclidean, Regularizer::negative_entropy()] {
            if let Some(a) = audit.check_result(swap_regret_audit(&tr, &r, false, Some(0.02))) {
                audit.check(a.agrees(1e-9), || format!("{a:?}"));
            }
        }
    }
    ctx.push(audit);

    let mut finite = Tally::new("finite_swap_enumeration");
    for _ in 0..ctx.n(50, 200) {
        let m = ctx.rng.gen_range(1..=3);
        let t = ctx.rng.gen_range(1..=5);
        let menu: Vec<Vector> =
            (0..m).map(|_| Vector::new((0..2).map(|_| ctx.rng.gen_range(-1.0..1.0)).collect()).unwrap()).collect();
        let losses: Vec<Vector> =
            (0..t).map(|_| Vector::new((0..2).map(|_| ctx.rng.gen_range(-1.0..1.0)).collect()).unwrap()).collect();
        let dists: Vec<Vec<f64>> = (0..t)
            .map(|_| {
                let raw: Vec<f64> = (0..m).map(|_| ctx.rng.gen_range(0.0..1.0)).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|x| x / s).collect()
            })
            .collect();
        let fast = swap_regret_finite(&dists, &menu, &losses).unwrap();
        let brute = enumerate_swaps(&dists, &menu, &losses);
        finite.check((fast - brute).abs() <= 1e-12, || format!("{fast} vs {brute}"));
    }
    ctx.push(finite);
}

/// Maximum swap gain over all `m^m` swap functions.
pub(crate) fn enumerate_swaps(dists: &[Vec<f64>], menu: &[Vector], losses: &[Vector]) -> f64 {
    let m = menu.len();
    let mut best = f64::NEG_INFINITY;
    let mut pi = vec![0usize; m];
    loop {
        let mut gain = 0.0;
        for (dist, v) in dists.iter().zip(losses) {
            for i in 0..m {
                gain += dist[i] * (v.dot(&menu[i]) - v.dot(&menu[pi[i]]));
            }
        }
        best = best.max(gain);
        let mut j = 0;
        loop {
            if j == m {
                return best;
            }
            pi[j] += 1;
            if pi[j] < m {
                break;
            }
            pi[j] = 0;
            j += 1;
        }
    }
}

fn transcript_checks(tr: &Transcript, cauchy: &mut Tally, refine: &mut Tally, perm: &mut Tally, rng: &mut ChaCha8Rng) {
    for k in [NormKind::L1, NormKind::L2] {
        let t = tr.len() as f64;
        let cal = calibration_error(tr, &Distance::Norm { norm: k }, false).unwrap();
        let sq = calibration_error(tr, &Distance::SquaredNorm { norm: k }, false).unwrap();
        cauchy.check((cal / t).powi(2) <= sq / t + 1e-9, || format!("{k:?}: {cal} {sq}"));
        let sq_lab = calibration_error(tr, &Distance::SquaredNorm { norm: k }, true).unwrap();
        refine.check(sq_lab >= sq - 1e-9, || format!("{k:?}: labeled {sq_lab} < {sq}"));
    }
    let mut rounds = tr.rounds().to_vec();
    rounds.shuffle(rng);
    let shuffled = Transcript::from_rounds(*tr.domain(), rounds).unwrap();
    for dist in [
        Distance::Norm { norm: NormKind::L1 },
        Distance::SquaredNorm { norm: NormKind::L2 },
    ] {
        for labeled in [false, true] {
            let a = calibration_error(tr, &dist, labeled).unwrap();
            let b = calibration_error(&shuffled, &dist, labeled).unwrap();
            perm.check(a == b, || format!("{}: {a} vs {b}", dist.name()));
        }
    }
}

/// Checks that every assignment with last digit `h > 0` is the mean of the outcomes of
/// its elder siblings, and that first children sit at the base point.
fn prefix_means_hold(tc: &TreeCal, outcomes: &[Vector], base: &Vector) -> std::result::Result<(), String> {
    let p = tc.params();
    let shape = p.shape().map_err(|e| e.to_string())?;
    for ev in tc.assignments() {
        let h = *ev.prefix.last().unwrap();
        if h == 0 {
            if ev.action != *base {
                return Err(format!("first child {:?} not at base point", ev.prefix));
            }
            continue;
        }
        let mut first = ev.prefix.clone();
        *first.last_mut().unwrap() = 0;
        let mut last = ev.prefix.clone();
        *last.last_mut().unwrap() = h - 1;
        let (s, _) = shape.interval(&first).unwrap();
        let (_, e) = shape.interval(&last).unwrap();
        let mut mean = Vector::zeros(base.dim());
        for y in &outcomes[s - 1..e] {
            mean.add_scaled(1.0 / (e - s + 1) as f64, y);
        }
        if distance(&mean, &ev.action, NormKind::LInf) > 1e-9 {
            return Err(format!("node {:?}: action {} vs slice mean {mean}", ev.prefix, ev.action));
        }
    }
    Ok(())
}

fn engine_checks(ctx: &mut Ctx) {
    let mut equiv = Tally::new("treecal_equals_treeswap_ftl");
    let mut prefix = Tally::new("prefix_mean_assignment");
    let mut determinism = Tally::new("replay_determinism");
    let mut cauchy = Tally::new("cauchy_relation");
    let mut refine = Tally::new("labeled_refines_unlabeled");
    let mut perm = Tally::new("permutation_invariance");
    for _ in 0..ctx.n(40, 200) {
        let dom = random_domain(&mut ctx.rng);
        let params = random_params(&mut ctx.rng, 4, 4);
        let spec = random_adversary(&mut ctx.rng, &dom, true);
        let seed = ctx.rng.gen();
        let run_tc = |fault: bool| -> Result<(TreeCal, Transcript)> {
            let mut tc = TreeCal::new(dom, params)?;
            tc.record_assignments();
            if fault {
                tc.inject_skip_mean_update();
            }
            let mut adv = Adversary::new(&spec, dom, params.horizon, seed)?;
            let tr = run_against(&mut tc, dom, &mut adv)?;
            Ok((tc, tr))
        };
        let Some((tc, a)) = equiv.check_result(run_tc(ctx.fault)) else { continue };
        let swap = (|| -> Result<Transcript> {
            let mut ts = TreeSwap::new(dom, params, Regularizer::Euclidean, SubroutineKind::Ftl.factory())?;
            let mut adv = Adversary::new(&spec, dom, params.horizon, seed)?;
            run_against(&mut ts, dom, &mut adv)
        })();
        let Some(b) = equiv.check_result(swap) else { continue };
        equiv.check(transcripts_match(&a, &b, 1e-12), || format!("{} {params:?} {spec:?}", dom.name()));
        let outcomes: Vec<Vector> = a.outcomes().cloned().collect();
        let res = prefix_means_hold(&tc, &outcomes, &dom.base_point());
        prefix.check(res.is_ok(), || res.unwrap_err());
        if let Some((_, again)) = determinism.check_result(run_tc(ctx.fault)) {
            determinism.check(again == a, || "rerun differs".into());
        }
        transcript_checks(&a, &mut cauchy, &mut refine, &mut perm, &mut ctx.rng);
    }
    ctx.push(equiv);
    ctx.push(prefix);
    ctx.push(determinism);

    let mut node_regret = Tally::new("btl_node_regret_nonpositive");
    let mut movement = Tally::new("btl_movement_bound");
    let mut swap_bound = Tally::new("treeswap_btl_bound");
    let max_l = if ctx.full { 5 } else { 4 };
    for _ in 0..ctx.n(10, 50) {
        let dom = Domain::simplex(ctx.rng.gen_range(2..=4)).unwrap();
        let h: usize = ctx.rng.gen_range(2..=4);
        let l = ctx.rng.gen_range(2..=max_l);
        let cap = h.pow(l as u32);
        let params = TreeParams::new(ctx.rng.gen_range(cap / h..=cap), h, l).unwrap();
        let spec = random_adversary(&mut ctx.rng, &dom, false);
        let r = if ctx.rng.gen_bool(0.5) { Regularizer::Euclidean } else { Regularizer::negative_entropy() };
        let seed = ctx.rng.gen();
        let run = (|| -> Result<(TreeSwap, Transcript)> {
            let ys = outcome_stream(&spec, dom, params.horizon, seed)?;
            let mut ts = TreeSwap::with_oracle(dom, params, r.clone(), SubroutineKind::Btl.factory(), ys.clone())?;
            ts.record_nodes();
            let tr = run_forecaster(&mut ts, dom, |t, _| Ok(ys[t - 1].clone()))?;
            Ok((ts, tr))
        })();
        let Some((ts, tr)) = swap_bound.check_result(run) else { continue };
        for rec in ts.node_records() {
            let reg = rec.external_regret(&r);
            node_regret.check(reg <= 1e-9, || format!("node {:?}: regret {reg}", rec.prefix));
            for k in [NormKind::L1, NormKind::L2] {
                let lim = 2.0 * dom.diameter(k).unwrap().powi(2);
                let mv = rec.ftl_btl_movement(ts.base_point(), k);
                movement.check(mv <= lim + 1e-9, || format!("node {:?} {k:?}: {mv} > {lim}", rec.prefix));
            }
        }
        let swap = calibration_error(&tr, &Distance::Bregman { regularizer: r.clone() }, true).unwrap();
        let b = realized_loss_cap(&tr, &r).unwrap();
        let bound = 3.0 * b * tr.len() as f64 / l as f64;
        swap_bound.check(swap <= bound + 1e-6, || format!("{swap} > {bound}"));
    }
    ctx.push(node_regret);
    ctx.push(movement);
    ctx.push(swap_bound);

    let mut chain = Tally::new("proof_chain_bound");
    let depths: Vec<usize> = if ctx.full { (2..=5).collect() } else { (2..=4).collect() };
    let dom = Domain::simplex(3).unwrap();
    for &l in &depths {
        for s in 0..ctx.n(2, 10) {
            let params = TreeParams::full(4, l).unwrap();
            let mut tc = TreeCal::new(dom, params).unwrap();
            if ctx.fault {
                tc.inject_skip_mean_update();
            }
            let mut adv = Adversary::new(&AdversarySpec::IidDirichlet { alpha: 1.0 }, dom, params.horizon, s as u64).unwrap();
            let Some(tr) = chain.check_result(run_against(&mut tc, dom, &mut adv)) else { continue };
            for k in [NormKind::L1, NormKind::L2] {
                let (r, factor) = paired_regularizer(k, &dom);
                let b = factor * realized_loss_cap(&tr, &r).unwrap();
                let bound = proof_chain_bound(b, dom.diameter(k).unwrap(), &params, tr.len(), 1);
                let sq = calibration_error(&tr, &Distance::SquaredNorm { norm: k }, true).unwrap();
                chain.check(sq <= bound + 1e-9, || format!("L={l} {k:?}: {sq} > {bound}"));
            }
            transcript_checks(&tr, &mut cauchy, &mut refine, &mut perm, &mut ctx.rng);
        }
    }
    ctx.push(chain);
    ctx.push(cauchy);
    ctx.push(refine);
    ctx.push(perm);
}

fn transcripts_match(a: &Transcript, b: &Transcript, tol: f64) -> bool {
    a.len() == b.len()
        && a.rounds().iter().zip(b.rounds()).all(|(ra, rb)| {
            ra.outcome == rb.outcome
                && ra.forecast.atoms().len() == rb.forecast.atoms().len()
                && ra.forecast.atoms().iter().zip(rb.forecast.atoms()).all(|(x, y)| {
                    x.label == y.label && x.weight == y.weight && distance(&x.point, &y.point, NormKind::LInf) <= tol
                })
        })
}

fn adversary_checks(ctx: &mut Ctx) {
    let mut member = Tally::new("adversary_membership");
    let mut replay = Tally::new("adversary_replay");
    let n = ctx.n(2000, 10_000);
    for dom in [
        Domain::simplex(4).unwrap(),
        Domain::cube(2, -1.0, 1.0).unwrap(),
        Domain::l2_ball(3, 2.0).unwrap(),
    ] {
        for _ in 0..3 {
            let spec = random_adversary(&mut ctx.rng, &dom, false);
            let seed = ctx.rng.gen();
            let a = outcome_stream(&spec, dom, n, seed).unwrap();
            for y in &a {
                member.check(dom.contains(y), || format!("{spec:?} emitted {y}"));
            }
            replay.check(outcome_stream(&spec, dom, n, seed).unwrap() == a, || format!("{spec:?}"));
        }
    }
    ctx.push(member);
    ctx.push(replay);

    let mut constant = Tally::new("constant_outcome_calibrated");
    for _ in 0..ctx.n(5, 20) {
        let dom = Domain::simplex(ctx.rng.gen_range(2..=4)).unwrap();
        let y = dom.sample_member(&mut ctx.rng);
        let params = random_params(&mut ctx.rng, 4, 4);
        let mut tc = TreeCal::new(dom, params).unwrap();
        let tr = run_forecaster(&mut tc, dom, |_, _| Ok(y.clone())).unwrap();
        let groups = crate::metrics::conditional_means(&tr, true).unwrap();
        let base = dom.base_point();
        let off: f64 = groups
            .iter()
            .filter(|g| g.point != base)
            .map(|g| g.mass * distance(&g.nu, &g.point, NormKind::L1))
            .sum();
        constant.check(off == 0.0, || format!("non-base contribution {off}"));
    }
    ctx.push(constant);
}

fn reduction_checks(ctx: &mut Ctx) {
    let mut roundtrip = Tally::new("embedding_roundtrip");
    let ball = Domain::l1_ball(3, 1.0).unwrap();
    for _ in 0..ctx.n(200, 1000) {
        let y = ball.sample_member(&mut ctx.rng);
        let back = project_simplex_to_l1ball(&embed_l1ball_to_simplex(&y).unwrap()).unwrap();
        roundtrip.check(distance(&y, &back, NormKind::LInf) <= 1e-15, || format!("{y} -> {back}"));
    }
    ctx.push(roundtrip);

    let mut nonexp = Tally::new("projection_nonexpansive");
    let simplex = Domain::simplex(7).unwrap();
    for _ in 0..ctx.n(5, 20) {
        let tr = random_small_transcript(&mut ctx.rng, &simplex, 12);
        let before = calibration_error(&tr, &Distance::Norm { norm: NormKind::L1 }, false).unwrap();
        let projected = project_transcript(&tr).unwrap();
        let after = calibration_error(&projected, &Distance::Norm { norm: NormKind::L1 }, false).unwrap();
        nonexp.check(after <= before + 1e-9, || format!("{after} > {before}"));
    }
    ctx.push(nonexp);

    let mut reduction = Tally::new("reduction_inequality");
    let dom = Domain::simplex(3).unwrap();
    let menu = FiniteMenu::cube_vertices(3).unwrap();
    for _ in 0..ctx.n(5, 20) {
        let params = random_params(&mut ctx.rng, 3, 4);
        let spec = random_adversary(&mut ctx.rng, &dom, true);
        let mut tc = TreeCal::new(dom, params).unwrap();
        let mut adv = Adversary::new(&spec, dom, params.horizon, ctx.rng.gen()).unwrap();
        let tr = run_against(&mut tc, dom, &mut adv).unwrap();
        let red = reduce_transcript(&tr, &menu, NormKind::L1).unwrap();
        reduction.check(red.holds(1e-6), || format!("{} > {}", red.regret, red.bound));
    }
    ctx.push(reduction);
}
