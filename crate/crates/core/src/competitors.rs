//! Hyperparameter selectors: the ARE minimizer, marginal likelihood and
//! moment estimators, oracles that see the truth, and the inefficiency
//! metric used to compare them.

use alloc::string::String;
use alloc::vec::Vec;

use crate::are::{AreEvaluator, AreTuning};
use crate::check_loss::{
    cumulative_loss, predict_class, shifted_risk, total_risk, ClassTag, HyperParams, ProblemInstance, Tau,
    TruthInstance,
};
use crate::error::{domain, Error, Result};
use crate::grids::{build_grid_datadriven, build_grid_origin, m_hat_interval, Grid};
use crate::stats::{mean, NeumaierSum};

/// Points of the coarse scan before golden-section refinement.
pub const ML_SCAN_POINTS: usize = 1000;
/// Width (in `tau / (tau + mean sigma_p)`) at which refinement stops.
pub const ML_TOLERANCE: f64 = 1e-8;
pub const MM_TOLERANCE: f64 = 1e-8;
pub const MM_MAX_ITER: usize = 1000;
/// Denominators below this make the inefficiency undefined.
pub const FLAT_RISK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    Are,
    EbMl,
    EbMm,
    OracleLoss,
    OracleRisk,
    Unshrunken,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelectionResult {
    pub method: Method,
    pub hp: HyperParams,
    /// Value of the criterion the method minimized at `hp` (0 for the
    /// unshrunken rule, which minimizes nothing).
    pub objective_value: f64,
    pub grid_used: Option<Grid>,
    pub warnings: Vec<String>,
}

impl SelectionResult {
    fn new(method: Method, hp: HyperParams, objective_value: f64) -> Self {
        Self { method, hp, objective_value, grid_used: None, warnings: Vec::new() }
    }
}

// ---------------------------------------------------------------------------
// ARE

/// Grid on which the ARE of `class` is minimized. The grand-mean grid is
/// built from the centered data so that it is shift invariant.
pub fn are_grid(inst: &ProblemInstance, class: ClassTag, min_points: Option<usize>) -> Result<Grid> {
    match class {
        ClassTag::Origin => build_grid_origin(inst, inst.len(), min_points),
        ClassTag::GrandMean => build_grid_origin(&inst.centered_at(inst.x_mean()), inst.len(), min_points),
        ClassTag::DataDriven => build_grid_datadriven(inst, inst.len(), min_points),
    }
}

/// Minimizes the ARE over `grid`; ties go to the smaller `tau`, then the
/// smaller location.
pub fn are_select(inst: &ProblemInstance, class: ClassTag, tuning: &AreTuning, grid: &Grid) -> Result<SelectionResult> {
    let eval = AreEvaluator::new(inst, tuning)?;
    let etas: Vec<f64> = match class {
        ClassTag::Origin => alloc::vec![0.0],
        ClassTag::GrandMean => alloc::vec![inst.x_mean()],
        ClassTag::DataDriven => {
            grid.eta_points.clone().ok_or_else(|| domain("data-driven selection needs a grid with location points"))?
        }
    };
    let mut best: Option<(f64, f64, Tau)> = None;
    for &tau in &grid.tau_points {
        for &eta in &etas {
            let v = eval.value_at(eta, tau);
            if best.is_none_or(|(b, _, _)| v < b) {
                best = Some((v, eta, tau));
            }
        }
    }
    let (value, eta, tau) = best.ok_or(Error::Empty("ARE grid"))?;
    let hp = match class {
        ClassTag::Origin => HyperParams::origin(tau),
        ClassTag::GrandMean => HyperParams { eta, ..HyperParams::grand_mean(tau) },
        ClassTag::DataDriven => HyperParams::data_driven(eta, tau),
    };
    let mut r = SelectionResult::new(Method::Are, hp, value);
    r.grid_used = Some(grid.clone());
    r.warnings = tuning.warnings();
    Ok(r)
}

// ---------------------------------------------------------------------------
// Marginal likelihood

/// `(1/n) sum ((x_i - eta)^2 / (tau + sigma_p_i) + ln(tau + sigma_p_i))`.
pub fn marginal_nll(inst: &ProblemInstance, eta: f64, tau: Tau) -> f64 {
    if tau.is_infinite() {
        return f64::INFINITY;
    }
    let t = tau.value();
    let s: NeumaierSum = inst
        .x()
        .iter()
        .zip(inst.sigma_p())
        .map(|(x, sp)| {
            let v = t + sp;
            (x - eta) * (x - eta) / v + libm::log(v)
        })
        .collect();
    s.value() / inst.len() as f64
}

/// Precision-weighted mean of `x` at scale `tau`.
pub fn weighted_location(inst: &ProblemInstance, tau: Tau) -> f64 {
    if tau.is_infinite() {
        return inst.x_mean();
    }
    let (mut num, mut den) = (NeumaierSum::new(), NeumaierSum::new());
    for (x, sp) in inst.x().iter().zip(inst.sigma_p()) {
        let w = 1.0 / (tau.value() + sp);
        num.add(w * x);
        den.add(w);
    }
    num.value() / den.value()
}

/// Grid scan over `t = tau / (tau + scale)` followed by golden-section search
/// on the bracket around the best scan point.
fn minimize_scale(scale: f64, f: impl Fn(Tau) -> f64) -> (Tau, f64) {
    let m = ML_SCAN_POINTS;
    let at = |t: f64| Tau::from_tilde(t, scale);
    let ts: Vec<f64> = (0..m).map(|j| j as f64 / (m - 1) as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| f(at(t))).collect();
    let mut j = 0;
    for (k, v) in vals.iter().enumerate() {
        if *v < vals[j] {
            j = k;
        }
    }
    let (mut a, mut b) = (ts[j.saturating_sub(1)], ts[(j + 1).min(m - 1)]);
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(at(x1)), f(at(x2)));
    while b - a > ML_TOLERANCE {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(at(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(at(x2));
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(at(mid));
    if fm < vals[j] {
        (at(mid), fm)
    } else {
        (at(ts[j]), vals[j])
    }
}

/// Likelihood estimate of `tau` with the prior centered at 0.
pub fn ebml_origin(inst: &ProblemInstance) -> SelectionResult {
    let (tau, v) = minimize_scale(mean(inst.sigma_p()), |t| marginal_nll(inst, 0.0, t));
    SelectionResult::new(Method::EbMl, HyperParams::origin(tau), v)
}

/// Likelihood estimate of `tau` with the prior centered at the sample mean.
pub fn ebml_grandmean(inst: &ProblemInstance) -> SelectionResult {
    let xbar = inst.x_mean();
    let (tau, v) = minimize_scale(mean(inst.sigma_p()), |t| marginal_nll(inst, xbar, t));
    SelectionResult::new(Method::EbMl, HyperParams { eta: xbar, ..HyperParams::grand_mean(tau) }, v)
}

/// Profile likelihood with the location set to the weighted mean clipped to
/// the quantile interval.
pub fn ebml_datadriven(inst: &ProblemInstance) -> Result<SelectionResult> {
    let (lo, hi) = m_hat_interval(inst)?;
    let loc = |t: Tau| weighted_location(inst, t).clamp(lo, hi);
    let (tau, v) = minimize_scale(mean(inst.sigma_p()), |t| marginal_nll(inst, loc(t), t));
    Ok(SelectionResult::new(Method::EbMl, HyperParams::data_driven(loc(tau), tau), v))
}

// ---------------------------------------------------------------------------
// Method of moments

/// `max((1/n) sum (x_i^2 - sigma_p_i), 0)`.
pub fn ebmm_origin(inst: &ProblemInstance) -> SelectionResult {
    let s: NeumaierSum = inst.x().iter().zip(inst.sigma_p()).map(|(x, sp)| x * x - sp).collect();
    let tau = Tau::new((s.value() / inst.len() as f64).max(0.0)).unwrap_or(Tau::ZERO);
    SelectionResult::new(Method::EbMm, HyperParams::origin(tau), marginal_nll(inst, 0.0, tau))
}

fn moment_tau(inst: &ProblemInstance, eta: f64) -> Tau {
    let n = inst.len() as f64;
    let ss: NeumaierSum = inst.x().iter().map(|x| (x - eta) * (x - eta)).collect();
    let sp: NeumaierSum = inst.sigma_p().iter().copied().collect();
    let v = (ss.value() - (1.0 - 1.0 / n) * sp.value()) / (n - 1.0);
    Tau::new(v.max(0.0)).unwrap_or(Tau::ZERO)
}

/// Moment estimate with the prior centered at the sample mean.
pub fn ebmm_grandmean(inst: &ProblemInstance) -> SelectionResult {
    let xbar = inst.x_mean();
    let tau = if inst.len() < 2 { Tau::ZERO } else { moment_tau(inst, xbar) };
    SelectionResult::new(
        Method::EbMm,
        HyperParams { eta: xbar, ..HyperParams::grand_mean(tau) },
        marginal_nll(inst, xbar, tau),
    )
}

/// Alternates `tau <- moment equation at eta` and `eta <- clipped weighted
/// mean at tau`, starting from the origin moment estimate.
pub fn ebmm_datadriven(inst: &ProblemInstance) -> Result<SelectionResult> {
    let (lo, hi) = m_hat_interval(inst)?;
    let loc = |t: Tau| weighted_location(inst, t).clamp(lo, hi);
    let mut warnings = Vec::new();
    if inst.len() < 2 {
        let eta = loc(Tau::ZERO);
        let mut r = SelectionResult::new(Method::EbMm, HyperParams::data_driven(eta, Tau::ZERO), 0.0);
        r.objective_value = marginal_nll(inst, eta, Tau::ZERO);
        r.warnings.push(String::from("moment estimate needs n >= 2; returned tau = 0"));
        return Ok(r);
    }
    let mut tau = ebmm_origin(inst).hp.tau;
    let mut eta = loc(tau);
    let mut converged = false;
    for _ in 0..MM_MAX_ITER {
        let next = moment_tau(inst, eta);
        let step = (next.value() - tau.value()).abs();
        tau = next;
        eta = loc(tau);
        if step < MM_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(alloc::format!("moment fixed point did not converge in {MM_MAX_ITER} iterations"));
    }
    let mut r = SelectionResult::new(Method::EbMm, HyperParams::data_driven(eta, tau), marginal_nll(inst, eta, tau));
    r.warnings = warnings;
    Ok(r)
}

pub fn ebml(inst: &ProblemInstance, class: ClassTag) -> Result<SelectionResult> {
    match class {
        ClassTag::Origin => Ok(ebml_origin(inst)),
        ClassTag::GrandMean => Ok(ebml_grandmean(inst)),
        ClassTag::DataDriven => ebml_datadriven(inst),
    }
}

pub fn ebmm(inst: &ProblemInstance, class: ClassTag) -> Result<SelectionResult> {
    match class {
        ClassTag::Origin => Ok(ebmm_origin(inst)),
        ClassTag::GrandMean => Ok(ebmm_grandmean(inst)),
        ClassTag::DataDriven => ebmm_datadriven(inst),
    }
}

/// The `tau = inf` rule, which ignores the prior.
pub fn unshrunken(inst: &ProblemInstance, class: ClassTag) -> SelectionResult {
    let hp = match class {
        ClassTag::Origin => HyperParams::origin(Tau::INFINITY),
        ClassTag::GrandMean => HyperParams { eta: inst.x_mean(), ..HyperParams::grand_mean(Tau::INFINITY) },
        ClassTag::DataDriven => HyperParams::data_driven(0.0, Tau::INFINITY),
    };
    SelectionResult::new(Method::Unshrunken, hp, 0.0)
}

// ---------------------------------------------------------------------------
// Oracles and inefficiency

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Objective {
    /// Expected loss of the realized predictions.
    Loss,
    /// Risk (surrogate risk for the grand-mean class).
    Risk,
}

fn grid_params(grid: &Grid, class: ClassTag, inst: &ProblemInstance) -> Result<Vec<HyperParams>> {
    let mut out = Vec::with_capacity(grid.len());
    match class {
        ClassTag::Origin => out.extend(grid.tau_points.iter().map(|&t| HyperParams::origin(t))),
        ClassTag::GrandMean => {
            let xbar = inst.x_mean();
            out.extend(grid.tau_points.iter().map(|&t| HyperParams { eta: xbar, ..HyperParams::grand_mean(t) }))
        }
        ClassTag::DataDriven => {
            let etas = grid.eta_points.as_ref().ok_or_else(|| domain("data-driven oracle needs location points"))?;
            for &t in &grid.tau_points {
                out.extend(etas.iter().map(|&e| HyperParams::data_driven(e, t)));
            }
        }
    }
    Ok(out)
}

fn objective_value(truth: &TruthInstance, inst: &ProblemInstance, hp: &HyperParams, obj: Objective) -> Result<f64> {
    match obj {
        Objective::Loss => cumulative_loss(truth, inst, &predict_class(inst, hp)),
        Objective::Risk => total_risk(truth, inst, hp),
    }
}

/// Exhaustive minimization over `fine_grid` of the objective computed from
/// the truth. Ties go to the smaller `tau`, then the smaller location.
pub fn oracle_select(
    truth: &TruthInstance,
    inst: &ProblemInstance,
    class: ClassTag,
    objective: Objective,
    fine_grid: &Grid,
) -> Result<SelectionResult> {
    let params = grid_params(fine_grid, class, inst)?;
    let mut best: Option<(f64, HyperParams)> = None;
    for hp in params {
        let v = objective_value(truth, inst, &hp, objective)?;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, hp));
        }
    }
    let (v, hp) = best.ok_or(Error::Empty("oracle grid"))?;
    let method = match objective {
        Objective::Loss => Method::OracleLoss,
        Objective::Risk => Method::OracleRisk,
    };
    let mut r = SelectionResult::new(method, hp, v);
    r.grid_used = Some(fine_grid.clone());
    Ok(r)
}

/// Risk of every grid rule, for repeated inefficiency evaluations.
#[derive(Debug, Clone)]
pub struct RiskSurface {
    pub class: ClassTag,
    pub min: f64,
    pub max: f64,
    pub argmin: HyperParams,
    shift: f64,
}

impl RiskSurface {
    pub fn new(truth: &TruthInstance, inst: &ProblemInstance, class: ClassTag, grid: &Grid) -> Result<Self> {
        if truth.len() != inst.len() {
            return Err(Error::LengthMismatch { expected: inst.len(), found: truth.len() });
        }
        let shift = if class == ClassTag::GrandMean { truth.mean() } else { 0.0 };
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut argmin = None;
        for hp in grid_params(grid, class, inst)? {
            let eta = if class == ClassTag::DataDriven { hp.eta } else { shift };
            let v = shifted_risk(&truth.theta, inst, eta, hp.tau);
            if v < min {
                min = v;
                argmin = Some(hp);
            }
            max = max.max(v);
        }
        let argmin = argmin.ok_or(Error::Empty("risk grid"))?;
        Ok(Self { class, min, max, argmin, shift })
    }

    /// `(risk - min) / (max - min) * 100`.
    pub fn inefficiency_of(&self, risk: f64) -> Result<f64> {
        let range = self.max - self.min;
        if !(range >= FLAT_RISK) {
            return Err(Error::FlatRiskCurve { range });
        }
        Ok((risk - self.min) / range * 100.0)
    }

    pub fn inefficiency(&self, truth: &TruthInstance, inst: &ProblemInstance, hp: &HyperParams) -> Result<f64> {
        let eta = if self.class == ClassTag::DataDriven { hp.eta } else { self.shift };
        self.inefficiency_of(shifted_risk(&truth.theta, inst, eta, hp.tau))
    }
}

/// Inefficiency (in percent) of `hp` relative to the best and worst rules of
/// its class on `grid`.
pub fn inefficiency(truth: &TruthInstance, inst: &ProblemInstance, hp: &HyperParams, grid: &Grid) -> Result<f64> {
    RiskSurface::new(truth, inst, hp.class, grid)?.inefficiency(truth, inst, hp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::are::make_tuning;
    use crate::rng::{standard_normal, RngSeed};
    use alloc::vec;

    fn homo(x: Vec<f64>, sp: f64) -> ProblemInstance {
        let n = x.len();
        ProblemInstance::new(x, vec![sp; n], vec![1.0; n], vec![0.7; n], vec![0.3; n]).unwrap()
    }

    fn normals(n: usize, seed: u64, sd: f64, shift: f64) -> Vec<f64> {
        let mut rng = RngSeed::new(seed).rng();
        (0..n).map(|_| shift + sd * standard_normal(&mut rng)).collect()
    }

    #[test]
    fn ml_matches_closed_form_homoscedastic() {
        let x = normals(200, 1, 1.4, 0.0);
        let inst = homo(x.clone(), 0.5);
        let closed = (x.iter().map(|v| v * v).sum::<f64>() / 200.0 - 0.5).max(0.0);
        let r = ebml_origin(&inst);
        assert!((r.hp.tau.value() - closed).abs() < 1e-6, "{} vs {closed}", r.hp.tau.value());
        assert_eq!(ebml_origin(&homo(vec![0.0; 20], 0.5)).hp.tau, Tau::ZERO);
    }

    #[test]
    fn mm_closed_form() {
        assert_eq!(ebmm_origin(&homo(vec![0.0; 5], 0.5)).hp.tau, Tau::ZERO);
        let sp = [0.25, 1.0, 2.25];
        let inst =
            ProblemInstance::new(vec![0.5, -1.0, 1.5], sp.to_vec(), vec![1.0; 3], vec![0.6; 3], vec![0.4; 3]).unwrap();
        assert_eq!(ebmm_origin(&inst).hp.tau, Tau::ZERO);
        let x = normals(50, 2, 2.0, 0.0);
        let inst = homo(x.clone(), 1.0);
        let expect = x.iter().map(|v| v * v - 1.0).sum::<f64>() / 50.0;
        assert!((ebmm_origin(&inst).hp.tau.value() - expect.max(0.0)).abs() < 1e-12);
    }

    #[test]
    fn datadriven_ml_against_brute_force() {
        let n = 40;
        let mut rng = RngSeed::new(3).rng();
        let sp: Vec<f64> = (0..n).map(|i| 0.2 + 0.8 * (i % 7) as f64 / 6.0).collect();
        let x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 1.2 * standard_normal(&mut rng) + libm::sqrt(sp[i]) * standard_normal(&mut rng))
            .collect();
        let b: Vec<f64> = (0..n).map(|i| 0.3 + 0.5 * i as f64 / n as f64).collect();
        let h: Vec<f64> = b.iter().map(|b| 1.0 - b).collect();
        let inst = ProblemInstance::new(x, sp, vec![1.0; n], b, h).unwrap();
        let r = ebml_datadriven(&inst).unwrap();

        let (lo, hi) = m_hat_interval(&inst).unwrap();
        let scale = mean(inst.sigma_p());
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for j in 0..100_000 {
            let t = j as f64 / 100_000.0;
            let tau = Tau::from_tilde(t, scale);
            let eta = weighted_location(&inst, tau).clamp(lo, hi);
            let v = marginal_nll(&inst, eta, tau);
            if v < best.0 {
                best = (v, eta, tau.value());
            }
        }
        assert!(r.objective_value <= best.0 + 1e-12);
        assert!((r.hp.tau.value() - best.2).abs() < 1e-3, "{:?} vs {}", r.hp.tau, best.2);
        assert!((r.hp.eta - best.1).abs() < 1e-3);
    }

    #[test]
    fn datadriven_location_is_clipped() {
        // nearly all b~ = 0.2 -> clipping interval sits in the lower tail
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let inst = ProblemInstance::new(x, vec![1.0; 30], vec![1.0; 30], vec![0.2; 30], vec![0.8; 30]).unwrap();
        let (lo, hi) = m_hat_interval(&inst).unwrap();
        assert_eq!(lo, hi);
        let r = ebml_datadriven(&inst).unwrap();
        assert_eq!(r.hp.eta, lo);
        assert!(inst.x_mean() > hi);
    }

    #[test]
    fn moment_fixed_point_homoscedastic() {
        let x = normals(60, 4, 1.5, 0.3);
        let n = x.len() as f64;
        let inst = ProblemInstance::new(x.clone(), vec![0.4; 60], vec![1.0; 60], vec![0.5; 60], vec![0.5; 60]).unwrap();
        let r = ebmm_datadriven(&inst).unwrap();
        let xbar = inst.x_mean();
        let (lo, hi) = m_hat_interval(&inst).unwrap();
        assert!(xbar >= lo - 0.5 && xbar <= hi + 0.5);
        let eta = xbar.clamp(lo, hi);
        let s2 = x.iter().map(|v| (v - eta) * (v - eta)).sum::<f64>() / (n - 1.0);
        let expect = (s2 - 0.4 * (n - 1.0) / (n - 1.0)).max(0.0);
        assert!(r.warnings.is_empty());
        assert!((r.hp.tau.value() - expect).abs() < 1e-9);
        assert_eq!(r.hp.eta, eta);

        let flat = inst.with_x(vec![2.0; 60]).unwrap();
        let r = ebmm_datadriven(&flat).unwrap();
        assert_eq!(r.hp.tau, Tau::ZERO);
        assert_eq!(r.hp.eta, 2.0);
    }

    #[test]
    fn oracle_and_inefficiency_basics() {
        let inst = homo(normals(30, 5, 0.6, 0.0), 0.5);
        let truth = TruthInstance::new(vec![0.0; 30]);
        let grid = Grid::fine(&inst, 401).unwrap();
        let r = oracle_select(&truth, &inst, ClassTag::Origin, Objective::Risk, &grid).unwrap();
        assert_eq!(r.hp.tau, Tau::ZERO);
        assert_eq!(inefficiency(&truth, &inst, &r.hp, &grid).unwrap(), 0.0);
        let worst = grid
            .tau_points
            .iter()
            .copied()
            .max_by(|a, b| {
                let ra = total_risk(&truth, &inst, &HyperParams::origin(*a)).unwrap();
                let rb = total_risk(&truth, &inst, &HyperParams::origin(*b)).unwrap();
                ra.total_cmp(&rb)
            })
            .unwrap();
        let e = inefficiency(&truth, &inst, &HyperParams::origin(worst), &grid).unwrap();
        assert!((e - 100.0).abs() < 1e-9);

        let loss = oracle_select(&truth, &inst, ClassTag::Origin, Objective::Loss, &grid).unwrap();
        for &t in &grid.tau_points {
            let v = cumulative_loss(&truth, &inst, &predict_class(&inst, &HyperParams::origin(t))).unwrap();
            assert!(loss.objective_value <= v);
        }
    }

    #[test]
    fn flat_curve_is_an_error() {
        // one coordinate at theta where all alphas tie is hard to build; a
        // two-point grid with identical risk does it
        let inst = homo(vec![0.0], 0.5);
        let truth = TruthInstance::new(vec![0.0]);
        let grid = Grid { tau_points: vec![Tau::INFINITY], eta_points: None, delta: 1.0, a_n: None, constants: None };
        let e = inefficiency(&truth, &inst, &HyperParams::origin(Tau::INFINITY), &grid);
        assert!(matches!(e, Err(Error::FlatRiskCurve { .. })));
    }

    #[test]
    fn are_select_runs_each_class() {
        let n = 50;
        let x = normals(n, 6, 1.0, 0.5);
        let b: Vec<f64> = (0..n).map(|i| 0.51 + 0.48 * i as f64 / (n - 1) as f64).collect();
        let h: Vec<f64> = b.iter().map(|b| 1.0 - b).collect();
        let inst = ProblemInstance::new(x, vec![0.05; n], vec![1.0; n], b, h).unwrap();
        let tuning = make_tuning(&inst, 0.5, 3, RngSeed::new(7)).unwrap();
        for class in [ClassTag::Origin, ClassTag::GrandMean, ClassTag::DataDriven] {
            let grid = are_grid(&inst, class, None).unwrap();
            let r = are_select(&inst, class, &tuning, &grid).unwrap();
            assert_eq!(r.hp.class, class);
            assert!(r.objective_value.is_finite());
            assert!(grid.tau_points.contains(&r.hp.tau));
        }
    }
}
