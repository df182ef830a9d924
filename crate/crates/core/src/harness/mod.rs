//! Experiment runner: executes configured runs and sweeps, computes every metric
//! with its bound check, and emits plot-ready rows.

pub mod config;
pub mod report;
pub mod verify;

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{Algorithm, ResolvedRun, RunConfig};
pub use report::{read_csv, write_csv, write_json, ReportRow, CSV_COLUMNS};

use crate::adversaries::{outcome_stream, Adversary};
use crate::engine::{
    run_against, run_forecaster, sample_treecal_with, AssignEvent, NodeRecord, SubroutineKind, TreeCal, TreeParams,
    TreeSwap,
};
use crate::error::{Error, Result};
use crate::geometry::{Domain, NormKind};
use crate::metrics::{
    calibration_error, pure_calibration_error, realized_loss_cap, write_round_jsonl, Distance, PureTranscript,
    Transcript,
};
use crate::scoring::Regularizer;

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct RunOutput {
    /// The forecaster's transcript (the inner one for sample-treecal).
    pub transcript: Transcript,
    pub pure: Option<PureTranscript>,
    pub node_records: Vec<NodeRecord>,
    pub assignments: Vec<AssignEvent>,
}

fn treecal_for(run: &ResolvedRun) -> Result<TreeCal> {
    match &run.base_point {
        Some(b) => TreeCal::with_base_point(run.domain, run.tree, b.clone()),
        None => TreeCal::new(run.domain, run.tree),
    }
}

/// Executes the protocol for `run`. With `trace`, assignment events are kept.
pub fn execute(run: &ResolvedRun, trace: bool) -> Result<RunOutput> {
    let domain = run.domain;
    let mut out = RunOutput {
        transcript: Transcript::new(domain),
        pure: None,
        node_records: Vec::new(),
        assignments: Vec::new(),
    };
    match run.algorithm {
        Algorithm::TreeCal => {
            let mut tc = treecal_for(run)?;
            if trace {
                tc.record_assignments();
            }
            let mut adv = Adversary::new(&run.adversary, domain, run.horizon, run.seed)?;
            out.transcript = run_against(&mut tc, domain, &mut adv)?;
            out.assignments = tc.assignments().to_vec();
        }
        Algorithm::TreeSwapFtl => {
            let mut ts = TreeSwap::new(domain, run.tree, run.regularizer.clone(), SubroutineKind::Ftl.factory())?;
            if let Some(b) = &run.base_point {
                ts.set_base_point(b.clone())?;
            }
            ts.record_nodes();
            let mut adv = Adversary::new(&run.adversary, domain, run.horizon, run.seed)?;
            out.transcript = run_against(&mut ts, domain, &mut adv)?;
            out.node_records = ts.node_records().to_vec();
        }
        Algorithm::TreeSwapBtl => {
            let ys = outcome_stream(&run.adversary, domain, run.horizon, run.seed)?;
            let mut ts = TreeSwap::with_oracle(
                domain,
                run.tree,
                run.regularizer.clone(),
                SubroutineKind::Btl.factory(),
                ys.clone(),
            )?;
            if let Some(b) = &run.base_point {
                ts.set_base_point(b.clone())?;
            }
            ts.record_nodes();
            out.transcript = run_forecaster(&mut ts, domain, |t, _| Ok(ys[t - 1].clone()))?;
            out.node_records = ts.node_records().to_vec();
        }
        Algorithm::SampleTreeCal => {
            let mut tc = treecal_for(run)?;
            if trace {
                tc.record_assignments();
            }
            let (pure, inner) = sample_treecal_with(tc, domain, run.block, &run.adversary, run.seed)?;
            out.transcript = inner;
            out.pure = Some(pure);
        }
    }
    Ok(out)
}

/// Regularizer whose realized range stands in for `ρ` in the bound for `norm`, with the
/// factor that makes it 1-strongly convex for that norm.
///
/// Negative entropy serves L1 on the simplex. Elsewhere the squared Euclidean norm is
/// used, scaled by `d` for L1 since `‖v‖₁² ≤ d‖v‖₂²`.
pub fn paired_regularizer(norm: NormKind, domain: &Domain) -> (Regularizer, f64) {
    match (norm, domain) {
        (NormKind::L1, Domain::Simplex { .. }) => (Regularizer::negative_entropy(), 1.0),
        (NormKind::L1, _) => (Regularizer::Euclidean, domain.dim() as f64),
        _ => (Regularizer::Euclidean, 1.0),
    }
}

/// `6ρT/L + 2·diam²·T/H^exp`.
pub fn proof_chain_bound(rho: f64, diam: f64, tree: &TreeParams, rounds: usize, h_exponent: i32) -> f64 {
    let t = rounds as f64;
    6.0 * rho * t / tree.depth as f64 + 2.0 * diam * diam * t / (tree.arity as f64).powi(h_exponent)
}

struct Metric {
    norm: String,
    metric: String,
    value: f64,
    b_realized: Option<f64>,
    bound: Option<f64>,
    bound_ok: Option<bool>,
}

impl Metric {
    fn plain(norm: &str, metric: &str, value: f64) -> Self {
        Metric { norm: norm.into(), metric: metric.into(), value, b_realized: None, bound: None, bound_ok: None }
    }

    fn checked(norm: &str, metric: &str, value: f64, b: Option<f64>, bound: f64, tol: f64) -> Self {
        Metric {
            norm: norm.into(),
            metric: metric.into(),
            value,
            b_realized: b,
            bound: Some(bound),
            bound_ok: Some(value <= bound + tol),
        }
    }
}

fn compute_metrics(run: &ResolvedRun, out: &RunOutput) -> Result<Vec<Metric>> {
    let tr = &out.transcript;
    let rounds = tr.len() as f64;
    let chain = matches!(run.algorithm, Algorithm::TreeCal | Algorithm::TreeSwapFtl | Algorithm::SampleTreeCal);
    let mut rows = Vec::new();
    for &k in &run.norms {
        let n = k.name();
        let diam = run.domain.diameter(k)?;
        let cal = calibration_error(tr, &Distance::Norm { norm: k }, false)?;
        let cal_sq = calibration_error(tr, &Distance::SquaredNorm { norm: k }, false)?;
        let cal_lab = calibration_error(tr, &Distance::Norm { norm: k }, true)?;
        let cal_sq_lab = calibration_error(tr, &Distance::SquaredNorm { norm: k }, true)?;
        rows.push(Metric::plain(n, "cal", cal));
        rows.push(Metric::plain(n, "cal_labeled", cal_lab));
        if chain {
            let (r, factor) = paired_regularizer(k, &run.domain);
            let b = factor * realized_loss_cap(tr, &r)?;
            let bound = proof_chain_bound(b, diam, &run.tree, tr.len(), 1);
            rows.push(Metric::checked(n, "cal_sq", cal_sq, Some(b), bound, 1e-9));
            rows.push(Metric::checked(n, "cal_sq_labeled", cal_sq_lab, Some(b), bound, 1e-9));
            let tight = proof_chain_bound(b, diam, &run.tree, tr.len(), 2);
            rows.push(Metric::checked(n, "cal_sq_h2_flag", cal_sq_lab, Some(b), tight, 1e-9));
        } else {
            rows.push(Metric::plain(n, "cal_sq", cal_sq));
            rows.push(Metric::plain(n, "cal_sq_labeled", cal_sq_lab));
        }
        rows.push(Metric::checked(n, "cauchy", (cal / rounds).powi(2), None, cal_sq / rounds, 1e-9));
        if let Some(pure) = &out.pure {
            let pt = pure.len() as f64;
            let pc = pure_calibration_error(pure, &Distance::Norm { norm: k })?;
            let pc_sq = pure_calibration_error(pure, &Distance::SquaredNorm { norm: k })?;
            rows.push(Metric::plain(n, "pure_cal", pc));
            rows.push(Metric::plain(n, "pure_cal_sq", pc_sq));
            rows.push(Metric::plain(n, "pure_gap", (pc / pt - cal / rounds).abs()));
            rows.push(Metric::checked(n, "pure_cauchy", (pc / pt).powi(2), None, pc_sq / pt, 1e-9));
        }
        if run.algorithm == Algorithm::TreeSwapBtl {
            let base = run.base_point.clone().unwrap_or_else(|| run.domain.base_point());
            let moved = out
                .node_records
                .iter()
                .map(|rec| rec.ftl_btl_movement(&base, k))
                .fold(0.0, f64::max);
            rows.push(Metric::checked(n, "btl_movement_max", moved, None, 2.0 * diam * diam, 1e-9));
        }
    }
    let r = &run.regularizer;
    let cal_breg = calibration_error(tr, &Distance::Bregman { regularizer: r.clone() }, false)?;
    rows.push(Metric::plain("", "cal_bregman", cal_breg));
    let swap = calibration_error(tr, &Distance::Bregman { regularizer: r.clone() }, true)?;
    if run.algorithm == Algorithm::TreeSwapBtl {
        let b = realized_loss_cap(tr, r)?;
        let bound = 3.0 * b * rounds / run.tree.depth as f64;
        rows.push(Metric::checked("", "swap_regret", swap, Some(b), bound, 1e-6));
        let worst = out.node_records.iter().map(|rec| rec.external_regret(r)).fold(f64::NEG_INFINITY, f64::max);
        rows.push(Metric::checked("", "btl_node_regret_max", worst, None, 0.0, 1e-9));
    } else {
        rows.push(Metric::plain("", "swap_regret", swap));
    }
    Ok(rows)
}

/// Stable identifier built from the configuration echo.
pub fn run_id(run: &ResolvedRun) -> String {
    format!(
        "{}-{}{}-H{}-L{}-T{}-S{}-{}-s{}",
        run.algorithm.name(),
        run.domain.name(),
        run.domain.dim(),
        run.tree.arity,
        run.tree.depth,
        run.horizon,
        run.block,
        run.adversary.name(),
        run.seed
    )
}

/// Runs one configuration and reports one row per metric.
pub fn run_experiment(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let run = cfg.resolve()?;
    let start = Instant::now();
    let out = execute(&run, false)?;
    let metrics = compute_metrics(&run, &out)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let id = run_id(&run);
    Ok(metrics
        .into_iter()
        .map(|m| ReportRow {
            run_id: id.clone(),
            algorithm: run.algorithm.name().into(),
            domain: run.domain.name().into(),
            d: run.domain.dim(),
            H: run.tree.arity,
            L: run.tree.depth,
            T: run.horizon,
            S: run.block,
            adversary: run.adversary.name().into(),
            regularizer: run.regularizer.name(),
            norm: m.norm,
            metric: m.metric,
            value: m.value,
            b_realized: m.b_realized,
            bound: m.bound,
            bound_ok: m.bound_ok,
            seed: run.seed,
            wall_ms,
        })
        .collect())
}

/// The Cartesian product of the sweep axes, in lexicographic order over
/// `(H, L, T, d)` and then seed. Empty axes keep the base value.
pub fn sweep_points(base: &RunConfig) -> Vec<RunConfig> {
    fn axis<T: Clone>(values: &[T], fallback: T) -> Vec<T> {
        if values.is_empty() {
            vec![fallback]
        } else {
            values.to_vec()
        }
    }
    let mut points = Vec::new();
    for &h in &axis(&base.sweep_H, base.H) {
        for &l in &axis(&base.sweep_L, base.L) {
            for &t in &axis(&base.sweep_T.iter().map(|&t| Some(t)).collect::<Vec<_>>(), base.T) {
                for &d in &axis(&base.sweep_d, base.d) {
                    for &seed in &axis(&base.sweep_seeds, base.seed) {
                        points.push(RunConfig {
                            H: h,
                            L: l,
                            T: t,
                            d,
                            seed,
                            sweep_H: Vec::new(),
                            sweep_L: Vec::new(),
                            sweep_T: Vec::new(),
                            sweep_d: Vec::new(),
                            sweep_seeds: Vec::new(),
                            ..base.clone()
                        });
                    }
                }
            }
        }
    }
    points
}

/// Runs every sweep point in parallel and returns rows in sweep order. Points whose
/// configuration is invalid are skipped with a warning.
pub fn run_sweep(base: &RunConfig) -> Result<Vec<ReportRow>> {
    let points = sweep_points(base);
    let results: Vec<Result<Vec<ReportRow>>> = points.par_iter().map(run_experiment).collect();
    let mut rows = Vec::new();
    for (cfg, res) in points.iter().zip(results) {
        match res {
            Ok(r) => rows.extend(r),
            Err(Error::Config(reason)) => {
                log::warn!("skipping H={} L={} T={:?} d={} seed={}: {reason}", cfg.H, cfg.L, cfg.T, cfg.d, cfg.seed);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

/// Writes the run's transcript as JSON lines, preceded at each round by that round's
/// assignment events.
pub fn write_trace<W: Write>(w: &mut W, out: &RunOutput) -> Result<()> {
    let mut events = out.assignments.iter().peekable();
    for (i, round) in out.transcript.rounds().iter().enumerate() {
        let t = i + 1;
        while let Some(ev) = events.next_if(|e| e.t == t) {
            let line = serde_json::json!({
                "event": "assign",
                "t": ev.t,
                "level": ev.level,
                "prefix": ev.prefix,
                "action": ev.action,
            });
            serde_json::to_writer(&mut *w, &line)?;
            w.write_all(b"\n")?;
        }
        write_round_jsonl(w, t, round)?;
    }
    Ok(())
}
