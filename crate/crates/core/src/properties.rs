//! Property tests over randomly generated instances.

use std::prelude::v1::*;

use crate::are::{make_tuning, select_branch, split_sample, AreEvaluator, Branch};
use crate::check_loss::{
    bayes_predict, cumulative_loss, g_fn, predict_class, total_risk, ClassTag, HyperParams, ProblemInstance, Tau,
    TruthInstance,
};
use crate::competitors::{ebml_origin, ebmm_origin, oracle_select, Objective, RiskSurface};
use crate::experiments::relative_efficiency;
use crate::grids::{build_grid_datadriven, build_grid_origin, m_hat_interval, Grid};
use crate::stats::{hermite_eval, norm_cdf, norm_quantile};
use crate::RngSeed;
use proptest::prelude::*;

fn instance(n: usize) -> impl Strategy<Value = (TruthInstance, ProblemInstance)> {
    (
        prop::collection::vec(-3.0..3.0f64, n),
        prop::collection::vec(-1.0..1.0f64, n),
        prop::collection::vec(0.05..1.0f64, n),
        prop::collection::vec(0.5..2.0f64, n),
        prop::collection::vec(0.05..0.95f64, n),
        0.5..3.0f64,
    )
        .prop_map(|(theta, noise, sp, sf, bt, scale)| {
            let x: Vec<f64> = theta.iter().zip(&noise).zip(&sp).map(|((t, e), s)| t + e * s.sqrt()).collect();
            let b: Vec<f64> = bt.iter().map(|t| t * scale).collect();
            let h: Vec<f64> = bt.iter().map(|t| (1.0 - t) * scale).collect();
            (TruthInstance::new(theta), ProblemInstance::new(x, sp, sf, b, h).unwrap())
        })
}

fn tau() -> impl Strategy<Value = Tau> {
    prop_oneof![Just(Tau::ZERO), Just(Tau::INFINITY), (0.0..20.0f64).prop_map(|t| Tau::new(t).unwrap())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermite_recurrence(k in 1u32..60, x in -10.0..10.0f64) {
        let (hm, h0, hp) = (hermite_eval(k - 1, x).value, hermite_eval(k, x).value, hermite_eval(k + 1, x).value);
        let resid = hp - x * h0 + f64::from(k) * hm;
        let scale = hp.abs().max((x * h0).abs()).max((f64::from(k) * hm).abs()).max(1.0);
        prop_assert!(resid.abs() / scale < 1e-9);
    }

    #[test]
    fn quantile_roundtrip(lp in -6.0..-1e-9f64, upper in any::<bool>()) {
        let p0 = 10f64.powf(lp);
        let p = if upper { 1.0 - p0 } else { p0 };
        let q = norm_quantile(p).unwrap();
        prop_assert!((norm_cdf(q) - p).abs() < 1e-9);
    }

    #[test]
    fn g_convex(beta in 0.01..0.99f64, w0 in -45.0..45.0f64) {
        let hstep = 1e-2;
        let d2 = g_fn(w0 + hstep, beta) - 2.0 * g_fn(w0, beta) + g_fn(w0 - hstep, beta);
        prop_assert!(d2 >= -1e-10);
    }

    #[test]
    fn bayes_rule_hits_critical_ratio(x in -5.0..5.0f64, eta in -2.0..2.0f64, t in tau(),
        sp in 0.05..2.0f64, sf in 0.2..2.0f64, b in 0.1..2.0f64, h in 0.1..2.0f64) {
        let q = bayes_predict(x, eta, t, sp, sf, b, h);
        let a = t.alpha(sp);
        let m = a * x + (1.0 - a) * eta;
        let s = (sf + a * sp).sqrt();
        prop_assert!((norm_cdf((q - m) / s) - b / (b + h)).abs() < 1e-12);
    }

    #[test]
    fn location_equivariance((_, inst) in instance(12), eta in -2.0..2.0f64, t in tau(), c in -64i32..64) {
        // quarter-integer shifts keep the differences exact
        let c = f64::from(c) / 4.0;
        let shifted = inst.with_x(inst.x().iter().map(|v| v + c).collect()).unwrap();
        let q0 = predict_class(&inst, &HyperParams::data_driven(eta, t));
        let q1 = predict_class(&shifted, &HyperParams::data_driven(eta + c, t));
        for (a, b) in q0.iter().zip(&q1) {
            prop_assert!((b - (a + c)).abs() <= 1e-12 * (1.0 + a.abs() + c.abs()));
        }
    }

    #[test]
    fn branch_exhaustive(v in -3.0..3.0f64, lambda in 0.0..2.0f64) {
        let b = select_branch(v, lambda);
        let expect = if v < -lambda { Branch::Lower } else if v > lambda { Branch::Upper } else { Branch::Middle };
        prop_assert_eq!(b, expect);
        prop_assert_eq!(select_branch(lambda, lambda), Branch::Middle);
        prop_assert_eq!(select_branch(-lambda, lambda), Branch::Middle);
    }

    #[test]
    fn split_identities(x in -5.0..5.0f64, sp in 0.01..4.0f64, z in -4.0..4.0f64) {
        let p = split_sample(x, sp, z);
        prop_assert!((p.u + p.v - 2.0 * x).abs() < 1e-12);
        prop_assert!((p.u - p.v - 2.0 * sp.sqrt() * z).abs() < 1e-12);
    }

    #[test]
    fn grid_roundtrip((_, inst) in instance(20), n in 3usize..100_000) {
        let g = build_grid_origin(&inst, n, None).unwrap();
        prop_assert!(g.tau_points.len() >= 2);
        prop_assert!(g.tau_points.windows(2).all(|w| w[0].value() < w[1].value()));
        prop_assert_eq!(g.tau_points[0], Tau::ZERO);
        prop_assert!(g.tau_points.last().unwrap().is_infinite());
        for t in &g.tau_points[..g.tau_points.len() - 1] {
            let tt = t.tilde(1.0);
            prop_assert!((Tau::from_tilde(tt, 1.0).tilde(1.0) - tt).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_grid_inside_clip_interval((_, inst) in instance(25), n in 3usize..10_000) {
        let g = build_grid_datadriven(&inst, n, None).unwrap();
        let (lo, hi) = m_hat_interval(&inst).unwrap();
        for e in g.eta_points.unwrap() {
            prop_assert!(e >= lo && e <= hi);
        }
    }

    #[test]
    fn ebmm_nonnegative((_, inst) in instance(15)) {
        let tau = ebmm_origin(&inst).hp.tau.value();
        let m: f64 = inst.x().iter().zip(inst.sigma_p()).map(|(x, s)| x * x - s).sum::<f64>() / inst.len() as f64;
        prop_assert!(tau >= 0.0);
        prop_assert_eq!(tau == 0.0, m <= 0.0);
    }

    #[test]
    fn ebml_permutation_invariant((_, inst) in instance(10), rot in 1usize..10) {
        let perm = |v: &[f64]| { let mut w = v.to_vec(); w.rotate_left(rot); w };
        let p = ProblemInstance::new(perm(inst.x()), perm(inst.sigma_p()), perm(inst.sigma_f()), perm(inst.b()), perm(inst.h())).unwrap();
        let (a, b) = (ebml_origin(&inst).hp.tau.value(), ebml_origin(&p).hp.tau.value());
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()) || (a.is_infinite() && b.is_infinite()));
    }

    #[test]
    fn oracle_loss_is_grid_minimum((truth, inst) in instance(8)) {
        let grid = Grid::fine(&inst, 101).unwrap();
        let sel = oracle_select(&truth, &inst, ClassTag::Origin, Objective::Loss, &grid).unwrap();
        for &t in &grid.tau_points {
            let l = cumulative_loss(&truth, &inst, &predict_class(&inst, &HyperParams::origin(t))).unwrap();
            prop_assert!(sel.objective_value <= l);
        }
    }

    #[test]
    fn inefficiency_bracketed((truth, inst) in instance(8), k in 0usize..101) {
        let grid = Grid::fine(&inst, 101).unwrap();
        if let Ok(surface) = RiskSurface::new(&truth, &inst, ClassTag::Origin, &grid) {
            let hp = HyperParams::origin(grid.tau_points[k]);
            let v = surface.inefficiency(&truth, &inst, &hp).unwrap();
            prop_assert!((0.0..=100.0).contains(&v));
            prop_assert_eq!(surface.inefficiency(&truth, &inst, &surface.argmin).unwrap(), 0.0);
        }
    }

    #[test]
    fn relative_efficiency_algebra(a in 0.1..10.0f64, b in 0.1..10.0f64) {
        prop_assert_eq!(relative_efficiency(a, a), 0.0);
        let (x, y) = (relative_efficiency(a, b) * b, relative_efficiency(b, a) * a);
        prop_assert!((x + y).abs() <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn risk_nonnegative((truth, inst) in instance(6), t in tau()) {
        for hp in [HyperParams::origin(t), HyperParams::grand_mean(t), HyperParams::data_driven(0.3, t)] {
            prop_assert!(total_risk(&truth, &inst, &hp).unwrap() >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn grand_mean_shift_invariance((_, inst) in instance(16), c in -32i32..32, seed in any::<u64>(), t in tau()) {
        let c = f64::from(c) / 8.0;
        let shifted = inst.with_x(inst.x().iter().map(|v| v + c).collect()).unwrap();
        let tun = make_tuning(&inst, 0.5, 3, RngSeed::new(seed)).unwrap();
        let a = AreEvaluator::new(&inst, &tun).unwrap().grand_mean(t);
        let b = AreEvaluator::new(&shifted, &tun).unwrap().grand_mean(t);
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn are_deterministic((_, inst) in instance(10), seed in any::<u64>(), t in tau()) {
        let t1 = make_tuning(&inst, 0.5, 3, RngSeed::new(seed)).unwrap();
        let t2 = make_tuning(&inst, 0.5, 3, RngSeed::new(seed)).unwrap();
        let a = AreEvaluator::new(&inst, &t1).unwrap().origin(t);
        let b = AreEvaluator::new(&inst, &t2).unwrap().origin(t);
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
}
