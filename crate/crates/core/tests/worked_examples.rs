//! Small hand-checkable cases across the public API.

mod common;

use treecal::adversaries::{Adversary, AdversarySpec};
use treecal::engine::{
    ftl_action, run_against, run_forecaster, sample_treecal_run, Forecaster, SubroutineKind, TreeCal, TreeParams,
    TreeSwap,
};
use treecal::geometry::{digits_base_h, interval_of, Domain, NormKind, Vector};
use treecal::harness::verify::{verify, Suite, VerifyOptions};
use treecal::harness::{run_experiment, run_sweep, RunConfig};
use treecal::metrics::{
    calibration_error, conditional_means, pure_calibration_error, swap_regret_bregman, swap_regret_finite, Atom,
    Distance, Forecast, Label, PureTranscript, Transcript,
};
use treecal::reductions::{
    best_response, embed_l1ball_to_simplex, project_simplex_to_l1ball, reduce_transcript, FiniteMenu,
};
use treecal::scoring::{
    bregman, center_regularizer, mixture_minimizer, scale_regularizer, strong_convexity_probe, Regularizer,
};

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

#[test]
fn norms_duals_and_diameters() {
    for k in NormKind::ALL {
        assert_eq!(v(&[0.0, 0.0, 0.0]).norm(k), 0.0);
        assert_eq!(v(&[1.0, 0.0]).norm(k), 1.0);
        assert_eq!(k.dual().dual(), k);
    }
    assert!(close(v(&[0.3, -0.4]).norm(NormKind::L2), 0.5));
    assert_eq!(NormKind::L1.dual(), NormKind::LInf);
    assert_eq!(NormKind::L2.dual(), NormKind::L2);
    assert_eq!(Domain::simplex(4).unwrap().diameter(NormKind::L1).unwrap(), 2.0);
    assert_eq!(Domain::l2_ball(3, 1.0).unwrap().diameter(NormKind::L2).unwrap(), 2.0);
    assert_eq!(Domain::cube(2, 0.0, 1.0).unwrap().diameter(NormKind::L1).unwrap(), 2.0);
    for dom in [Domain::simplex(3).unwrap(), Domain::cube(3, -1.0, 2.0).unwrap(), Domain::l2_ball(2, 1.5).unwrap()] {
        for k in NormKind::ALL {
            assert!(close(dom.diameter(k).unwrap(), common::diameter(&dom, k)), "{dom:?} {k:?}");
        }
    }
}

#[test]
fn base_points() {
    let third = 1.0 / 3.0;
    assert_eq!(Domain::simplex(3).unwrap().base_point(), v(&[third, third, third]));
    assert_eq!(Domain::l2_ball(2, 1.0).unwrap().base_point(), v(&[0.0, 0.0]));
    assert_eq!(Domain::cube(2, 0.0, 1.0).unwrap().base_point(), v(&[0.5, 0.5]));
}

#[test]
fn digits_and_intervals() {
    assert_eq!(digits_base_h(1, 3, 3).unwrap(), vec![0, 0, 0]);
    assert_eq!(digits_base_h(27, 3, 3).unwrap(), vec![2, 2, 2]);
    assert_eq!(digits_base_h(5, 2, 3).unwrap(), vec![1, 0, 0]);
    assert_eq!(interval_of(&[], 3, 3).unwrap(), (1, 27));
    assert_eq!(interval_of(&[0], 3, 3).unwrap(), (1, 9));
    assert_eq!(interval_of(&[1, 2], 3, 3).unwrap(), (16, 18));
}

#[test]
fn bregman_cases() {
    let e = Regularizer::Euclidean;
    assert_eq!(bregman(&e, &[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
    assert!(close(bregman(&e, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0));
    let kl = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
    assert!(close(bregman(&Regularizer::negative_entropy(), &[0.5, 0.5], &[0.25, 0.75]).unwrap(), kl));
}

#[test]
fn mixture_minimizer_cases() {
    let one = mixture_minimizer(&[v(&[0.2, 0.8])], &[1.0], &Regularizer::Euclidean).unwrap();
    assert_eq!(one.mean, v(&[0.2, 0.8]));
    assert!(close(one.jensen_gap, 0.0));
    let two = mixture_minimizer(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])], &[0.5, 0.5], &Regularizer::Euclidean).unwrap();
    assert_eq!(two.mean, v(&[0.5, 0.5]));
    assert!(close(two.jensen_gap, 0.5));
}

#[test]
fn centering_and_scaling() {
    let ball = Domain::l2_ball(2, 1.0).unwrap();
    let e = Regularizer::Euclidean;
    let c = center_regularizer(&e, v(&[0.0, 0.0]));
    assert!(close(c.value(&[0.6, 0.8]), e.value(&[0.6, 0.8])));
    let anchor = v(&[0.2, -0.1]);
    let c = center_regularizer(&e, anchor.clone());
    assert!(close(c.value(anchor.as_slice()), 0.0));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    use rand::SeedableRng;
    for _ in 0..100 {
        let (y, p) = (ball.sample_member(&mut rng), ball.sample_member(&mut rng));
        let want = bregman(&e, y.as_slice(), p.as_slice()).unwrap();
        assert!((bregman(&c, y.as_slice(), p.as_slice()).unwrap() - want).abs() < 1e-10);
    }
    let s = scale_regularizer(&e, &ball).unwrap();
    assert!(close(s.value(&[1.0, 0.0]), 1.0));
    assert!(close(s.value(&[0.3, -0.4]), e.value(&[0.3, -0.4])));
    assert!(scale_regularizer(&e, &Domain::simplex(2).unwrap()).is_err());
    let base = strong_convexity_probe(&e, NormKind::L2, &ball, 200, 1).unwrap();
    let scaled = strong_convexity_probe(&s, NormKind::L2, &ball, 200, 1).unwrap();
    assert!(scaled.min_ratio >= base.min_ratio - 1e-6);
}

#[test]
fn convexity_probes() {
    let ball = Domain::l2_ball(3, 1.0).unwrap();
    let p = strong_convexity_probe(&Regularizer::Euclidean, NormKind::L2, &ball, 300, 2).unwrap();
    assert!((p.min_ratio - 1.0).abs() < 1e-9);
    let d = 4;
    let simplex = Domain::simplex(d).unwrap();
    let r = Regularizer::negative_entropy();
    let p = strong_convexity_probe(&r, NormKind::L1, &simplex, 300, 3).unwrap();
    assert!(p.min_ratio >= 0.5 - 1e-6);
    let clamp = treecal::scoring::DEFAULT_ENTROPY_CLAMP;
    assert!(p.max_bregman <= (1.0 / clamp).ln() + (d as f64).ln());
}

fn two_round() -> Transcript {
    let s2 = Domain::simplex(2).unwrap();
    let mut tr = Transcript::new(s2);
    tr.push(Forecast::point_mass(v(&[0.7, 0.3])), v(&[1.0, 0.0])).unwrap();
    tr.push(Forecast::point_mass(v(&[0.7, 0.3])), v(&[0.0, 1.0])).unwrap();
    tr
}

#[test]
fn conditional_means_and_calibration() {
    let s2 = Domain::simplex(2).unwrap();
    let mut one = Transcript::new(s2);
    one.push(Forecast::point_mass(v(&[0.4, 0.6])), v(&[1.0, 0.0])).unwrap();
    let g = conditional_means(&one, false).unwrap();
    assert_eq!((g.len(), g[0].mass, g[0].nu.clone()), (1, 1.0, v(&[1.0, 0.0])));

    let tr = two_round();
    let g = conditional_means(&tr, false).unwrap();
    assert_eq!((g.len(), g[0].mass, g[0].nu.clone()), (1, 2.0, v(&[0.5, 0.5])));
    assert!(close(calibration_error(&tr, &Distance::Norm { norm: NormKind::L1 }, false).unwrap(), 0.8));
    assert!(close(calibration_error(&tr, &Distance::SquaredNorm { norm: NormKind::L1 }, false).unwrap(), 0.32));

    let mut labeled = Transcript::new(s2);
    for (lab, y) in [(0u32, [1.0, 0.0]), (1, [0.0, 1.0])] {
        let atom = Atom { point: v(&[0.7, 0.3]), label: Some(Label(vec![lab])), weight: 1.0 };
        labeled.push(Forecast::new(vec![atom]).unwrap(), v(&y)).unwrap();
    }
    let g = conditional_means(&labeled, true).unwrap();
    assert_eq!(g.len(), 2);
    assert!(g.iter().all(|g| g.mass == 1.0));

    let mut constant = Transcript::new(s2);
    for _ in 0..5 {
        constant.push(Forecast::point_mass(v(&[0.25, 0.75])), v(&[0.25, 0.75])).unwrap();
    }
    for k in NormKind::ALL {
        assert_eq!(calibration_error(&constant, &Distance::Norm { norm: k }, false).unwrap(), 0.0);
    }
    assert_eq!(swap_regret_bregman(&constant, &Regularizer::Euclidean, true).unwrap(), 0.0);
    let sq = calibration_error(&tr, &Distance::SquaredNorm { norm: NormKind::L2 }, false).unwrap();
    assert!(close(swap_regret_bregman(&tr, &Regularizer::Euclidean, false).unwrap(), sq));
}

#[test]
fn pure_calibration_cases() {
    let s2 = Domain::simplex(2).unwrap();
    let mut one = PureTranscript::new(s2);
    one.push(v(&[0.4, 0.6]), v(&[1.0, 0.0])).unwrap();
    assert!(close(pure_calibration_error(&one, &Distance::Norm { norm: NormKind::L1 }).unwrap(), 1.2));

    let p = [0.9, 0.1];
    let mut alt = PureTranscript::new(s2);
    for t in 0..6 {
        alt.push(v(&p), if t % 2 == 0 { v(&[1.0, 0.0]) } else { v(&[0.0, 1.0]) }).unwrap();
    }
    for k in NormKind::ALL {
        let want = 6.0 * common::dist(&p, &[0.5, 0.5], k);
        assert!(close(pure_calibration_error(&alt, &Distance::Norm { norm: k }).unwrap(), want));
    }

    let mut distinct = PureTranscript::new(s2);
    let mut want = 0.0;
    for t in 0..5 {
        let p = [0.1 * t as f64, 1.0 - 0.1 * t as f64];
        let y = if t % 2 == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
        want += common::dist(&p, &y, NormKind::L1);
        distinct.push(v(&p), v(&y)).unwrap();
    }
    assert!(close(pure_calibration_error(&distinct, &Distance::Norm { norm: NormKind::L1 }).unwrap(), want));
}

#[test]
fn finite_swap_regret_cases() {
    let menu = [v(&[1.0, 0.0]), v(&[0.0, 1.0])];
    let losses = [v(&[0.3, 0.5])];
    assert_eq!(swap_regret_finite(&[vec![1.0, 0.0]], &menu, &losses).unwrap(), 0.0);
    let losses = [v(&[1.0, 0.0]), v(&[1.0, 0.0])];
    let r = swap_regret_finite(&[vec![1.0, 0.0], vec![1.0, 0.0]], &menu, &losses).unwrap();
    assert!(close(r, 2.0));
    let losses = [v(&[1.0, -1.0]), v(&[-1.0, 1.0])];
    let r = swap_regret_finite(&[vec![0.5, 0.5], vec![0.5, 0.5]], &menu, &losses).unwrap();
    assert!(close(r, 0.0));
}

#[test]
fn treecal_hand_traces() {
    let s3 = Domain::simplex(3).unwrap();
    assert!(TreeCal::new(s3, TreeParams { horizon: 27, arity: 3, depth: 3 }).is_ok());
    assert!(TreeCal::new(s3, TreeParams { horizon: 27, arity: 3, depth: 2 }).is_err());

    let b1 = Domain::cube(1, 0.0, 1.0).unwrap();
    let tc = TreeCal::new(b1, TreeParams::new(4, 2, 2).unwrap()).unwrap();
    assert_eq!(tc.path_actions(), vec![v(&[0.5]), v(&[0.5])]);

    let mut tc = TreeCal::new(b1, TreeParams::full(2, 2).unwrap()).unwrap();
    tc.record_assignments();
    let x1 = tc.forecast(1).unwrap();
    let labels: Vec<_> = x1.atoms().iter().map(|a| a.label.clone().unwrap().0).collect();
    assert_eq!(labels, vec![vec![0], vec![0, 0]]);
    assert!(x1.atoms().iter().all(|a| a.point == v(&[0.5]) && a.weight == 0.5));
    tc.observe(1, &v(&[1.0])).unwrap();
    let x2 = tc.forecast(2).unwrap();
    let got: Vec<_> = x2.atoms().iter().map(|a| (a.point.clone(), a.label.clone().unwrap().0, a.weight)).collect();
    assert_eq!(got, vec![(v(&[0.5]), vec![0], 0.5), (v(&[1.0]), vec![0, 1], 0.5)]);
    tc.observe(2, &v(&[0.0])).unwrap();
    let x3 = tc.forecast(3).unwrap();
    assert_eq!(x3.atoms()[0].point, v(&[0.5]));
    assert_eq!(x3.atoms()[1].point, v(&[0.5]));
    tc.observe(3, &v(&[1.0])).unwrap();
    tc.forecast(4).unwrap();
    tc.observe(4, &v(&[1.0])).unwrap();
    let find = |prefix: &[usize]| tc.assignments().iter().rev().find(|e| e.prefix == prefix).unwrap().action.clone();
    assert_eq!(find(&[0, 1]), v(&[1.0]));
    assert_eq!(find(&[1]), v(&[0.5]));
    assert_eq!(find(&[1, 1]), v(&[1.0]));
}

#[test]
fn prefix_means_and_constant_streams() {
    let s3 = Domain::simplex(3).unwrap();
    let params = TreeParams::full(3, 3).unwrap();
    let mut tc = TreeCal::new(s3, params).unwrap();
    tc.record_assignments();
    let spec = AdversarySpec::IidDirichlet { alpha: 0.7 };
    let mut adv = Adversary::new(&spec, s3, 27, 11).unwrap();
    let tr = run_against(&mut tc, s3, &mut adv).unwrap();
    let ys: Vec<&Vector> = tr.outcomes().collect();
    for ev in tc.assignments() {
        let h = *ev.prefix.last().unwrap();
        if h == 0 {
            assert_eq!(ev.action, s3.base_point());
            continue;
        }
        let parent = &ev.prefix[..ev.prefix.len() - 1];
        let (start, _) = interval_of(parent, 3, 3).unwrap();
        let (_, end) = interval_of(&[parent, &[h - 1]].concat(), 3, 3).unwrap();
        let mut mean = [0.0; 3];
        for y in &ys[start - 1..end] {
            for (m, c) in mean.iter_mut().zip(y.as_slice()) {
                *m += c / (end + 1 - start) as f64;
            }
        }
        assert!(common::dist(&mean, ev.action.as_slice(), NormKind::LInf) < 1e-12);
    }

    let star = [0.2, 0.5, 0.3];
    let mut tc = TreeCal::new(s3, params).unwrap();
    tc.record_assignments();
    let mut adv = Adversary::new(&AdversarySpec::Constant { point: star.to_vec() }, s3, 27, 0).unwrap();
    run_against(&mut tc, s3, &mut adv).unwrap();
    for ev in tc.assignments().iter().filter(|e| *e.prefix.last().unwrap() > 0) {
        assert_eq!(ev.action, v(&star));
    }
}

#[test]
fn treeswap_subroutines() {
    let s2 = Domain::simplex(2).unwrap();
    let params = TreeParams::full(2, 3).unwrap();
    let mut ts = TreeSwap::new(s2, params, Regularizer::Euclidean, SubroutineKind::ConstantBase.factory()).unwrap();
    let tr = run_forecaster(&mut ts, s2, |t, _| Ok(v(if t % 2 == 0 { &[1.0, 0.0] } else { &[0.0, 1.0] }))).unwrap();
    for r in tr.rounds() {
        assert_eq!(r.forecast.atoms().len(), 3);
        assert!(r.forecast.atoms().iter().all(|a| a.point == s2.base_point()));
    }
    assert!(TreeSwap::new(s2, params, Regularizer::Euclidean, SubroutineKind::Btl.factory()).is_err());
}

#[test]
fn ftl_actions() {
    let base = v(&[0.5, 0.5]);
    assert_eq!(ftl_action(&[], &base), base);
    assert_eq!(ftl_action(&[(v(&[0.2, 0.8]), 4)], &base), v(&[0.2, 0.8]));
    assert_eq!(ftl_action(&[(v(&[1.0, 0.0]), 3), (v(&[0.0, 1.0]), 1)], &base), v(&[0.75, 0.25]));
}

#[test]
fn sampling_blocks() {
    let s3 = Domain::simplex(3).unwrap();
    let spec = AdversarySpec::IidDirichlet { alpha: 1.0 };
    let (pure, inner) = sample_treecal_run(s3, 27, 3, 3, 1, &spec, 4).unwrap();
    for (p, r) in pure.rounds().iter().zip(inner.rounds()) {
        assert!(r.forecast.atoms().iter().any(|a| a.point == p.prediction));
        assert_eq!(p.outcome, r.outcome);
    }
    let s = 8;
    let (pure, inner) = sample_treecal_run(s3, 27 * s, 3, 3, s, &spec, 4).unwrap();
    assert_eq!((pure.len(), inner.len()), (27 * s, 27));
    for (i, r) in inner.rounds().iter().enumerate() {
        let mut mean = [0.0; 3];
        for p in &pure.rounds()[i * s..(i + 1) * s] {
            assert!(r.forecast.atoms().iter().any(|a| a.point == p.prediction));
            for (m, c) in mean.iter_mut().zip(p.outcome.as_slice()) {
                *m += c / s as f64;
            }
        }
        assert!(common::dist(&mean, r.outcome.as_slice(), NormKind::LInf) < 1e-12);
    }
    let (pure, _) =
        sample_treecal_run(s3, 27 * 4, 3, 3, 4, &AdversarySpec::Constant { point: vec![0.0, 1.0, 0.0] }, 9).unwrap();
    for p in &pure.rounds()[4 * 9..] {
        assert!(p.prediction == s3.base_point() || p.prediction == v(&[0.0, 1.0, 0.0]));
    }
}

#[test]
fn adversary_cases() {
    let s3 = Domain::simplex(3).unwrap();
    let mut c = Adversary::new(&AdversarySpec::Constant { point: vec![0.2, 0.2, 0.6] }, s3, 5, 0).unwrap();
    let mut cyc = Adversary::new(&AdversarySpec::VertexCycle { period: 3 }, s3, 7, 0).unwrap();
    for t in 1..=5 {
        assert_eq!(c.next_outcome(t, None).unwrap(), v(&[0.2, 0.2, 0.6]));
        assert_eq!(cyc.next_outcome(t, None).unwrap(), Vector::basis(3, (t - 1) % 3));
    }
    let mut far = Adversary::new(&AdversarySpec::FarthestVertex, s3, 3, 0).unwrap();
    let x = Forecast::uniform(vec![v(&[0.6, 0.3, 0.1]), v(&[0.4, 0.1, 0.5])]).unwrap();
    // mean (0.5, 0.2, 0.3): L1 distances to e_1, e_2, e_3 are 1.0, 1.6, 1.4
    assert_eq!(far.next_outcome(1, Some(&x)).unwrap(), Vector::basis(3, 1));
    let tie = Forecast::point_mass(s3.base_point());
    assert_eq!(far.next_outcome(2, Some(&tie)).unwrap(), Vector::basis(3, 0));
}

#[test]
fn best_response_and_reduction() {
    let menu = FiniteMenu::new(vec![v(&[0.0, 1.0]), v(&[1.0, 0.0]), v(&[-1.0, 0.0])]).unwrap();
    assert_eq!(best_response(&[0.0, 0.0], &menu), &v(&[0.0, 1.0]));
    assert_eq!(best_response(&[1.0, 0.0], &menu), &v(&[-1.0, 0.0]));
    let single = FiniteMenu::new(vec![v(&[0.3, 0.3])]).unwrap();
    assert_eq!(best_response(&[5.0, -2.0], &single), &v(&[0.3, 0.3]));

    let b2 = Domain::cube(2, -1.0, 1.0).unwrap();
    let cube = FiniteMenu::cube_vertices(2).unwrap();
    let mut tr = Transcript::new(b2);
    for _ in 0..4 {
        tr.push(Forecast::point_mass(v(&[0.5, -0.5])), v(&[0.5, -0.5])).unwrap();
    }
    let red = reduce_transcript(&tr, &cube, NormKind::L1).unwrap();
    assert_eq!(red.calibration, 0.0);
    assert!(red.regret <= 1e-6);
    assert!(red.dists.iter().all(|d| d == &vec![0.0, 1.0, 0.0, 0.0] || d.iter().filter(|&&m| m == 1.0).count() == 1));

    let s3 = Domain::simplex(3).unwrap();
    let mut tc = TreeCal::new(s3, TreeParams::full(3, 3).unwrap()).unwrap();
    let mut adv = Adversary::new(&AdversarySpec::VertexCycle { period: 3 }, s3, 27, 0).unwrap();
    let tr = run_against(&mut tc, s3, &mut adv).unwrap();
    let cube3 = FiniteMenu::cube_vertices(3).unwrap();
    let red = reduce_transcript(&tr, &cube3, NormKind::L1).unwrap();
    assert!(red.holds(1e-6));
    let scaled = reduce_transcript(&tr, &cube3.scaled(2.5).unwrap(), NormKind::L1).unwrap();
    assert!((scaled.regret - 2.5 * red.regret).abs() < 1e-9);
    assert!((scaled.bound - 2.5 * red.bound).abs() < 1e-9);
}

#[test]
fn embedding_cases() {
    assert_eq!(embed_l1ball_to_simplex(&[0.0, 0.0]).unwrap(), v(&[0.0, 0.0, 0.0, 0.0, 1.0]));
    assert_eq!(embed_l1ball_to_simplex(&[0.5, -0.25]).unwrap(), v(&[0.5, 0.0, 0.0, 0.25, 0.25]));
    assert_eq!(project_simplex_to_l1ball(&[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap(), v(&[0.0, 0.0]));
    assert!(project_simplex_to_l1ball(&[0.2; 5]).unwrap().as_slice().iter().all(|&x| x.abs() < 1e-15));
    let (a, b) = ([0.1, 0.3, 0.2, 0.0, 0.4], [0.5, 0.0, 0.1, 0.2, 0.2]);
    let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.3 * x + 0.7 * y).collect();
    let lhs = project_simplex_to_l1ball(&mix).unwrap();
    let (pa, pb) = (project_simplex_to_l1ball(&a).unwrap(), project_simplex_to_l1ball(&b).unwrap());
    for i in 0..2 {
        assert!((lhs.as_slice()[i] - (0.3 * pa.as_slice()[i] + 0.7 * pb.as_slice()[i])).abs() < 1e-12);
    }
}

fn cfg(algorithm: &str, adversary: &str) -> RunConfig {
    RunConfig { algorithm: algorithm.into(), adversary: adversary.into(), H: 3, L: 3, seed: 2, ..RunConfig::default() }
}

#[test]
fn harness_rows() {
    let constant = RunConfig { constant_point: Some(vec![0.0, 0.0, 1.0]), ..cfg("treecal", "constant") };
    let rows = run_experiment(&constant).unwrap();
    // Only base-point atoms are miscalibrated: per level, the first child of each
    // internal node, which is 1/3 of the mass.
    let base = Domain::simplex(3).unwrap().base_point();
    let gap = common::dist(base.as_slice(), &[0.0, 0.0, 1.0], NormKind::L1);
    let cal = rows.iter().find(|r| r.metric == "cal_labeled" && r.norm == "l1").unwrap();
    assert!((cal.value - 27.0 / 3.0 * gap).abs() < 1e-12);

    let a = run_experiment(&cfg("treecal", "iid-dirichlet")).unwrap();
    let b = run_experiment(&cfg("treeswap-ftl", "iid-dirichlet")).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((&x.norm, &x.metric), (&y.norm, &y.metric));
        let near = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
        assert!(near(x.value, y.value), "{x:?} {y:?}");
        assert_eq!(x.bound.is_some(), y.bound.is_some());
        if let (Some(a), Some(b)) = (x.bound, y.bound) {
            assert!(near(a, b), "{x:?} {y:?}");
        }
    }

    let btl = run_experiment(&cfg("treeswap-btl", "iid-dirichlet")).unwrap();
    let swap = btl.iter().find(|r| r.metric == "swap_regret").unwrap();
    let b = swap.b_realized.unwrap();
    assert_eq!(swap.bound, Some(3.0 * b * 27.0 / 3.0));
    assert_eq!(swap.bound_ok, Some(true));
    assert!(btl.iter().all(|r| !r.is_failure()));
}

#[test]
fn sweeps() {
    let single = run_sweep(&cfg("treecal", "iid-dirichlet")).unwrap();
    assert_eq!(single, {
        let mut r = run_experiment(&cfg("treecal", "iid-dirichlet")).unwrap();
        for (a, b) in r.iter_mut().zip(&single) {
            a.wall_ms = b.wall_ms;
        }
        r
    });
    let seeds = RunConfig { sweep_seeds: vec![1, 2, 3], ..cfg("treecal", "vertex-cycle") };
    let rows = run_sweep(&seeds).unwrap();
    let per_run = rows.len() / 3;
    assert_eq!(rows.len(), 3 * per_run);
    for i in 0..per_run {
        let (a, b, c) = (&rows[i], &rows[per_run + i], &rows[2 * per_run + i]);
        assert_eq!((a.seed, b.seed, c.seed), (1, 2, 3));
        // vertex-cycle is deterministic, so only the seed column differs
        assert_eq!((a.metric.clone(), a.value), (b.metric.clone(), b.value));
        assert_eq!((a.metric.clone(), a.value), (c.metric.clone(), c.value));
    }
}

#[test]
fn verify_suites() {
    let start = std::time::Instant::now();
    let fast = verify(VerifyOptions { suite: Suite::Fast, seed: 0, inject_fault: false });
    assert!(fast.passed(), "{fast}");
    assert!(start.elapsed().as_secs() < 60);
    let faulty = verify(VerifyOptions { suite: Suite::Fast, seed: 0, inject_fault: true });
    assert!(faulty.get("treecal_equals_treeswap_ftl").unwrap().failed > 0);
    assert!(faulty.get("prefix_mean_assignment").unwrap().failed > 0);
    let full = |seed| verify(VerifyOptions { suite: Suite::Full, seed, inject_fault: false });
    let (a, b) = (full(7), full(7));
    assert!(a.passed(), "{a}");
    assert_eq!(a, b);
}
