//! Asymptotic risk estimate (ARE) of the shrinkage rules.
//!
//! Each coordinate's risk `(b + h) s G(c + d theta, b~)` is estimated from
//! one observation. Adding and subtracting auxiliary noise splits `X` into
//! two independent pieces `U, V`. `V` decides whether `c + d theta` is far
//! from the kink of `G` (then `G` is linear and `U` estimates it without
//! bias) or close to it, where an unbiased estimate of a truncated Taylor
//! expansion of `G` is used instead. Averaging over several noise draws
//! removes most of the extra variance.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::check_loss::{g_fn, ProblemInstance, RiskCoefficients, Tau};
use crate::error::{domain, Error, Result};
use crate::rng::{standard_normal, RngSeed};
use crate::stats::normal::FRAC_1_SQRT_2PI;
use crate::stats::NeumaierSum;

const E2: f64 = 7.389_056_098_930_65;
// 1 / sqrt(2e)
const GAMMA_CEILING: f64 = 0.428_881_942_480_353_4;

/// User-facing tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TuningConfig {
    /// Fraction of the admissible upper bound used for `gamma`.
    pub rho: f64,
    /// Number of auxiliary noise draws averaged per coordinate.
    pub rb_reps: usize,
    pub seed: RngSeed,
    /// `gamma` used where the bound is not positive (`sigma_p / sigma_f`
    /// too large for the theory).
    pub fallback_gamma: f64,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self { rho: 0.5, rb_reps: 5, seed: RngSeed::new(0), fallback_gamma: 0.8 }
    }
}

/// Per-coordinate threshold and truncation order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AreTuning {
    pub gamma: Vec<f64>,
    pub lambda_n: Vec<f64>,
    pub k_n: Vec<u32>,
    pub rb_reps: usize,
    pub rho: f64,
    pub seed: RngSeed,
    /// Coordinates that fell back to `fallback_gamma`.
    pub fallback: Vec<bool>,
    /// Bound applied to the Taylor estimate (the dimension `n`).
    pub truncation: f64,
}

impl AreTuning {
    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn fallback_count(&self) -> usize {
        self.fallback.iter().filter(|&&f| f).count()
    }

    pub fn warnings(&self) -> Vec<String> {
        let k = self.fallback_count();
        if k == 0 {
            return Vec::new();
        }
        vec![alloc::format!(
            "gamma bound not positive for {k} of {} coordinates (sigma_p/sigma_f too large); used fallback gamma",
            self.len()
        )]
    }

    pub fn coord(&self, i: usize) -> CoordTuning {
        CoordTuning { lambda: self.lambda_n[i], k: self.k_n[i], truncation: self.truncation }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordTuning {
    pub lambda: f64,
    pub k: u32,
    pub truncation: f64,
}

/// Tuning with the default fallback `gamma`.
pub fn make_tuning(inst: &ProblemInstance, rho: f64, rb_reps: usize, seed: RngSeed) -> Result<AreTuning> {
    make_tuning_with(inst, &TuningConfig { rho, rb_reps, seed, ..TuningConfig::default() })
}

pub fn make_tuning_with(inst: &ProblemInstance, cfg: &TuningConfig) -> Result<AreTuning> {
    if !(cfg.rho > 0.0 && cfg.rho < 1.0) {
        return Err(domain(alloc::format!("rho must lie in (0, 1), got {}", cfg.rho)));
    }
    if cfg.rb_reps == 0 {
        return Err(domain("rb_reps must be at least 1"));
    }
    if !(cfg.fallback_gamma > 0.0 && cfg.fallback_gamma.is_finite()) {
        return Err(domain("fallback gamma must be positive"));
    }
    let n = inst.len();
    let two_log_n = 2.0 * libm::log(n as f64);
    let mut gamma = Vec::with_capacity(n);
    let mut lambda_n = Vec::with_capacity(n);
    let mut k_n = Vec::with_capacity(n);
    let mut fallback = Vec::with_capacity(n);
    for i in 0..n {
        let root = libm::sqrt(2.0 * inst.sigma_p()[i] / inst.sigma_f()[i]);
        let bound = GAMMA_CEILING - root;
        let (g, fb) = if bound > 0.0 { (cfg.rho * bound, false) } else { (cfg.fallback_gamma, true) };
        gamma.push(g);
        fallback.push(fb);
        lambda_n.push(g * libm::sqrt(two_log_n));
        k_n.push(truncation_order(g, root, n));
    }
    Ok(AreTuning {
        gamma,
        lambda_n,
        k_n,
        rb_reps: cfg.rb_reps,
        rho: cfg.rho,
        seed: cfg.seed,
        fallback,
        truncation: n as f64,
    })
}

/// `1 + ceil(e^2 (gamma + sqrt(2 sigma_p / sigma_f))^2 2 ln n)`, at least 2.
pub fn truncation_order(gamma: f64, root_ratio: f64, n: usize) -> u32 {
    let s = gamma + root_ratio;
    let raw = E2 * s * s * 2.0 * libm::log(n as f64);
    (1 + libm::ceil(raw).max(0.0) as u32).max(2)
}

/// Auxiliary split of one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPair {
    pub u: f64,
    pub v: f64,
}

#[inline]
pub fn split_sample(x: f64, sigma_p: f64, z: f64) -> SplitPair {
    let e = libm::sqrt(sigma_p) * z;
    SplitPair { u: x + e, v: x - e }
}

/// Branch of the threshold rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `V(tau) < -lambda`: `G` is `-b~ w` there.
    Lower,
    /// `|V(tau)| <= lambda`: Taylor estimate.
    Middle,
    /// `V(tau) > lambda`: `G` is `(1 - b~) w` there.
    Upper,
}

#[inline]
pub fn select_branch(v_tau: f64, lambda: f64) -> Branch {
    if v_tau < -lambda {
        Branch::Lower
    } else if v_tau > lambda {
        Branch::Upper
    } else {
        Branch::Middle
    }
}

/// Coefficients of the Taylor estimate up to a maximum order.
///
/// The estimate is
/// `phi(0) + (1/2 - b~) u + phi(0) sum_{l even, l <= K-2} H_l(0) / (l+2)! P_{l+2}(u; v)`
/// with `P_k(u; v) = v^{k/2} H_k(u / sqrt v)`, an unbiased estimate of the
/// order-K Taylor polynomial of `G(., b~)` at 0 when `u ~ N(mu, v)`.
///
/// `P_k` is carried normalized as `N_k = P_k / sqrt(k!)`, which obeys
/// `N_{k+1} = (u N_k - sqrt(k) v N_{k-1}) / sqrt(k+1)`; the matching
/// coefficients `phi(0) H_l(0) / sqrt((l+2)!)` stay within double range for
/// every order we use.
#[derive(Debug, Clone)]
pub struct TaylorSeries {
    coef: Vec<f64>,
    sqrt_k: Vec<f64>,
    inv_sqrt_k1: Vec<f64>,
}

const SCALE_EXP: i32 = 512;

impl TaylorSeries {
    pub fn new(max_order: u32) -> Self {
        let k = max_order.max(2) as usize;
        // coef[l / 2] for even l in 0..=k-2
        let coef = (0..=(k - 2) / 2)
            .map(|m| {
                let l = 2 * m;
                let log_dfact =
                    libm::lgamma(l as f64 + 1.0) - m as f64 * core::f64::consts::LN_2 - libm::lgamma(m as f64 + 1.0);
                let log_mag = log_dfact - 0.5 * libm::lgamma(l as f64 + 3.0);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * FRAC_1_SQRT_2PI * libm::exp(log_mag)
            })
            .collect();
        let sqrt_k = (0..=k).map(|j| libm::sqrt(j as f64)).collect();
        let inv_sqrt_k1 = (0..=k).map(|j| 1.0 / libm::sqrt(j as f64 + 1.0)).collect();
        Self { coef, sqrt_k, inv_sqrt_k1 }
    }

    pub fn max_order(&self) -> u32 {
        (self.sqrt_k.len() - 1) as u32
    }

    /// Untruncated estimate with `k <= max_order`.
    pub fn eval(&self, u: f64, var_u: f64, b_tilde: f64, k: u32) -> f64 {
        debug_assert!(k >= 2 && k <= self.max_order());
        let k = k as usize;
        let hi = libm::ldexp(1.0, SCALE_EXP);
        let mut acc = NeumaierSum::new();
        let mut exp_blocks: i32 = 0;
        let (mut prev, mut cur) = (1.0_f64, u); // N_0, N_1
        for j in 1..k {
            let next = (u * cur - self.sqrt_k[j] * var_u * prev) * self.inv_sqrt_k1[j];
            prev = cur;
            cur = next;
            // cur is N_{j+1}; even degrees >= 2 pair with coef[(j+1)/2 - 1]
            if (j + 1) % 2 == 0 {
                acc.add(self.coef[j.div_ceil(2) - 1] * cur);
            }
            if cur.abs() > hi || prev.abs() > hi {
                cur = libm::ldexp(cur, -SCALE_EXP);
                prev = libm::ldexp(prev, -SCALE_EXP);
                let v = libm::ldexp(acc.value(), -SCALE_EXP);
                acc = NeumaierSum::new();
                acc.add(v);
                exp_blocks += 1;
            }
        }
        let lead = FRAC_1_SQRT_2PI + (0.5 - b_tilde) * u;
        if exp_blocks == 0 {
            acc.add(lead);
            acc.value()
        } else {
            // at least 2^512 in magnitude: only the sign survives truncation
            let s = acc.value();
            if s == 0.0 {
                lead
            } else {
                s.signum() * f64::INFINITY
            }
        }
    }
}

/// Taylor estimate `S(u)` of `G(mu, b~)` from `u ~ N(mu, var_u)`.
pub fn taylor_estimate(u_tau: f64, var_u: f64, b_tilde: f64, k: u32) -> Result<f64> {
    if !(var_u > 0.0) {
        return Err(domain("variance of the split component must be positive (d = 0 has no series)"));
    }
    if k < 2 {
        return Err(domain("truncation order must be at least 2"));
    }
    Ok(TaylorSeries::new(k).eval(u_tau, var_u, b_tilde, k))
}

#[inline]
fn truncate(s: f64, bound: f64) -> f64 {
    if s.abs() > bound {
        s.signum() * bound
    } else {
        s
    }
}

/// Threshold estimate of `G(c + d theta, b~)` from one split pair.
///
/// At `d = 0` (no shrinkage) the target does not depend on `theta` and the
/// exact value `G(c, b~)` is returned.
pub fn threshold_estimate(
    pair: SplitPair,
    rc: &RiskCoefficients,
    b_tilde: f64,
    sigma_p: f64,
    ct: &CoordTuning,
    series: &TaylorSeries,
) -> f64 {
    if rc.d == 0.0 {
        return g_fn(rc.c, b_tilde);
    }
    let u_tau = rc.c + rc.d * pair.u;
    let v_tau = rc.c + rc.d * pair.v;
    match select_branch(v_tau, ct.lambda) {
        Branch::Lower => -b_tilde * u_tau,
        Branch::Upper => (1.0 - b_tilde) * u_tau,
        Branch::Middle => {
            let var_u = 2.0 * sigma_p * rc.d * rc.d;
            truncate(series.eval(u_tau, var_u, b_tilde, ct.k), ct.truncation)
        }
    }
}

/// Average of [`threshold_estimate`] over the given noise draws.
pub fn rao_blackwell_t(
    x: f64,
    rc: &RiskCoefficients,
    b_tilde: f64,
    sigma_p: f64,
    ct: &CoordTuning,
    z: &[f64],
    series: &TaylorSeries,
) -> f64 {
    let s = z
        .iter()
        .map(|&zj| threshold_estimate(split_sample(x, sigma_p, zj), rc, b_tilde, sigma_p, ct, series))
        .collect::<NeumaierSum>();
    s.value() / z.len() as f64
}

/// Noise draws for coordinate `i`: its own substream of the tuning seed.
pub fn coordinate_draws(seed: RngSeed, i: usize, reps: usize) -> Vec<f64> {
    let mut rng = seed.derive(i as u64).rng();
    (0..reps).map(|_| standard_normal(&mut rng)).collect()
}

/// Evaluates the ARE for one instance at any `tau` (and location) with the
/// noise draws fixed, so values at different hyperparameters share them.
#[derive(Debug, Clone)]
pub struct AreEvaluator<'a> {
    inst: &'a ProblemInstance,
    tuning: &'a AreTuning,
    z: Vec<f64>,
    series: TaylorSeries,
}

impl<'a> AreEvaluator<'a> {
    pub fn new(inst: &'a ProblemInstance, tuning: &'a AreTuning) -> Result<Self> {
        if tuning.len() != inst.len() {
            return Err(Error::LengthMismatch { expected: inst.len(), found: tuning.len() });
        }
        let reps = tuning.rb_reps;
        let mut z = Vec::with_capacity(inst.len() * reps);
        for i in 0..inst.len() {
            z.extend(coordinate_draws(tuning.seed, i, reps));
        }
        let k_max = tuning.k_n.iter().copied().max().unwrap_or(2);
        Ok(Self { inst, tuning, z, series: TaylorSeries::new(k_max) })
    }

    /// ARE of the origin rule on `x - eta`.
    pub fn value_at(&self, eta: f64, tau: Tau) -> f64 {
        let inst = self.inst;
        let reps = self.tuning.rb_reps;
        let mut acc = NeumaierSum::new();
        for i in 0..inst.len() {
            let sp = inst.sigma_p()[i];
            let rc = RiskCoefficients::new(tau, sp, inst.sigma_f()[i], inst.z_b()[i]);
            let t = rao_blackwell_t(
                inst.x()[i] - eta,
                &rc,
                inst.b_tilde()[i],
                sp,
                &self.tuning.coord(i),
                &self.z[i * reps..(i + 1) * reps],
                &self.series,
            );
            acc.add((inst.b()[i] + inst.h()[i]) * rc.scale * t);
        }
        acc.value() / inst.len() as f64
    }

    pub fn origin(&self, tau: Tau) -> f64 {
        self.value_at(0.0, tau)
    }

    pub fn grand_mean(&self, tau: Tau) -> f64 {
        self.value_at(self.inst.x_mean(), tau)
    }

    pub fn curve(&self, eta: f64, taus: &[Tau]) -> Vec<f64> {
        taus.iter().map(|&t| self.value_at(eta, t)).collect()
    }

    /// Fraction of middle-branch evaluations whose Taylor estimate exceeded
    /// the truncation bound, over the given `tau` values.
    pub fn truncation_rate(&self, eta: f64, taus: &[Tau]) -> f64 {
        let inst = self.inst;
        let reps = self.tuning.rb_reps;
        let (mut middle, mut clipped) = (0usize, 0usize);
        for &tau in taus {
            for i in 0..inst.len() {
                let sp = inst.sigma_p()[i];
                let rc = RiskCoefficients::new(tau, sp, inst.sigma_f()[i], inst.z_b()[i]);
                if rc.d == 0.0 {
                    continue;
                }
                let ct = self.tuning.coord(i);
                for &z in &self.z[i * reps..(i + 1) * reps] {
                    let p = split_sample(inst.x()[i] - eta, sp, z);
                    if select_branch(rc.c + rc.d * p.v, ct.lambda) == Branch::Middle {
                        middle += 1;
                        let s = self.series.eval(rc.c + rc.d * p.u, 2.0 * sp * rc.d * rc.d, inst.b_tilde()[i], ct.k);
                        if s.abs() > ct.truncation {
                            clipped += 1;
                        }
                    }
                }
            }
        }
        if middle == 0 {
            0.0
        } else {
            clipped as f64 / middle as f64
        }
    }
}

/// ARE of the origin-class rule.
pub fn are_origin(inst: &ProblemInstance, tau: Tau, tuning: &AreTuning) -> Result<f64> {
    Ok(AreEvaluator::new(inst, tuning)?.origin(tau))
}

/// ARE of the rule shrinking toward `eta`: the origin ARE of `x - eta`.
pub fn are_datadriven(inst: &ProblemInstance, eta: f64, tau: Tau, tuning: &AreTuning) -> Result<f64> {
    Ok(AreEvaluator::new(inst, tuning)?.value_at(eta, tau))
}

/// ARE of the rule shrinking toward the sample mean.
pub fn are_grandmean(inst: &ProblemInstance, tau: Tau, tuning: &AreTuning) -> Result<f64> {
    Ok(AreEvaluator::new(inst, tuning)?.grand_mean(tau))
}
