//! Check loss, the normal-prior Bayes rule and its closed-form risk.
//!
//! With `G(w, beta) = phi(w) + w Phi(w) - beta w`, predicting `q` for
//! `Y ~ N(theta, sigma_f)` costs `(b + h) sqrt(sigma_f) G((q - theta)/sqrt(sigma_f), b~)`
//! in expectation, where `b~ = b / (b + h)`.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::stats::normal::{norm_cdf, norm_pdf, probit};
use crate::stats::{mean, NeumaierSum};

/// Beyond this `|w|` the G function is replaced by its linear asymptotes.
pub const G_TAIL: f64 = 40.0;

/// Prior scale on the extended half line `[0, inf]`.
///
/// `Tau::INFINITY` means no shrinkage (`alpha = 1` in every coordinate).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tau(f64);

impl Tau {
    pub const ZERO: Tau = Tau(0.0);
    pub const INFINITY: Tau = Tau(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 {
            Ok(Self(value))
        } else {
            Err(domain(alloc::format!("tau must lie in [0, inf], got {value}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    /// Shrinkage factor `tau / (tau + sigma_p)`.
    #[inline]
    pub fn alpha(self, sigma_p: f64) -> f64 {
        if self.is_infinite() {
            1.0
        } else {
            self.0 / (self.0 + sigma_p)
        }
    }

    /// Map to `[0, 1]` by `tau / (tau + scale)`.
    #[inline]
    pub fn tilde(self, scale: f64) -> f64 {
        self.alpha(scale)
    }

    /// Inverse of [`Tau::tilde`]; `t >= 1` gives infinity.
    pub fn from_tilde(t: f64, scale: f64) -> Self {
        if t >= 1.0 {
            Self::INFINITY
        } else {
            Self(scale * t.max(0.0) / (1.0 - t.max(0.0)))
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Tau {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        // JSON has no infinity; `null` stands for tau = inf.
        if self.is_infinite() {
            s.serialize_none()
        } else {
            s.serialize_some(&self.0)
        }
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Tau {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let v = <Option<f64> as serde::Deserialize>::deserialize(d)?;
        match v {
            None => Ok(Tau::INFINITY),
            Some(x) => Tau::new(x).map_err(serde::de::Error::custom),
        }
    }
}

/// Which prior location the shrinkage rule uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ClassTag {
    /// Shrink toward 0.
    Origin,
    /// Shrink toward the sample mean of `x`.
    GrandMean,
    /// Shrink toward a tuned location `eta`.
    DataDriven,
}

impl ClassTag {
    pub fn label(self) -> &'static str {
        match self {
            ClassTag::Origin => "origin",
            ClassTag::GrandMean => "grand-mean",
            ClassTag::DataDriven => "data-driven",
        }
    }
}

/// Prior hyperparameters `(eta, tau)` of a shrinkage rule.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HyperParams {
    /// Location. Always 0 for `Origin`. For `GrandMean` it is informational
    /// only: predictions recompute the mean of `x`.
    pub eta: f64,
    pub tau: Tau,
    pub class: ClassTag,
}

impl HyperParams {
    pub fn origin(tau: Tau) -> Self {
        Self { eta: 0.0, tau, class: ClassTag::Origin }
    }

    pub fn grand_mean(tau: Tau) -> Self {
        Self { eta: 0.0, tau, class: ClassTag::GrandMean }
    }

    pub fn data_driven(eta: f64, tau: Tau) -> Self {
        Self { eta, tau, class: ClassTag::DataDriven }
    }

    /// Location actually used for predictions on `inst`.
    pub fn location(&self, inst: &ProblemInstance) -> f64 {
        match self.class {
            ClassTag::Origin => 0.0,
            ClassTag::GrandMean => inst.x_mean(),
            ClassTag::DataDriven => self.eta,
        }
    }
}

/// Per-coordinate model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordParams {
    pub sigma_p: f64,
    pub sigma_f: f64,
    pub b: f64,
    pub h: f64,
}

impl CoordParams {
    #[inline]
    pub fn b_tilde(&self) -> f64 {
        self.b / (self.b + self.h)
    }

    #[inline]
    pub fn weight(&self) -> f64 {
        self.b + self.h
    }
}

/// Observed data with per-coordinate variances and cost weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    x: Vec<f64>,
    sigma_p: Vec<f64>,
    sigma_f: Vec<f64>,
    b: Vec<f64>,
    h: Vec<f64>,
    b_tilde: Vec<f64>,
    z_b: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(x: Vec<f64>, sigma_p: Vec<f64>, sigma_f: Vec<f64>, b: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(Error::Empty("problem instance"));
        }
        for v in [&sigma_p, &sigma_f, &b, &h] {
            if v.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: v.len() });
            }
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(domain(alloc::format!("x[{i}] is not finite")));
        }
        for (name, v) in [("sigma_p", &sigma_p), ("sigma_f", &sigma_f), ("b", &b), ("h", &h)] {
            if let Some(i) = v.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
                return Err(domain(alloc::format!("{name}[{i}] = {} must be positive and finite", v[i])));
            }
        }
        let b_tilde: Vec<f64> = b.iter().zip(&h).map(|(b, h)| b / (b + h)).collect();
        if let Some(i) = b_tilde.iter().position(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(domain(alloc::format!("b/(b+h) at coordinate {i} is not inside (0, 1)")));
        }
        let z_b = b_tilde.iter().map(|&t| probit(t)).collect();
        Ok(Self { x, sigma_p, sigma_f, b, h, b_tilde, z_b })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn sigma_p(&self) -> &[f64] {
        &self.sigma_p
    }
    pub fn sigma_f(&self) -> &[f64] {
        &self.sigma_f
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn h(&self) -> &[f64] {
        &self.h
    }
    pub fn b_tilde(&self) -> &[f64] {
        &self.b_tilde
    }
    /// `Phi^{-1}(b~_i)` per coordinate.
    pub fn z_b(&self) -> &[f64] {
        &self.z_b
    }

    pub fn coord(&self, i: usize) -> CoordParams {
        CoordParams { sigma_p: self.sigma_p[i], sigma_f: self.sigma_f[i], b: self.b[i], h: self.h[i] }
    }

    pub fn x_mean(&self) -> f64 {
        mean(&self.x)
    }

    /// Same variances and weights, new observations.
    pub fn with_x(&self, x: Vec<f64>) -> Result<Self> {
        if x.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), found: x.len() });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(domain(alloc::format!("x[{i}] is not finite")));
        }
        Ok(Self { x, ..self.clone() })
    }

    /// Instance with `x_i - eta` in place of `x_i`.
    pub fn centered_at(&self, eta: f64) -> Self {
        Self { x: self.x.iter().map(|v| v - eta).collect(), ..self.clone() }
    }
}

/// True means of a simulated instance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TruthInstance {
    pub theta: Vec<f64>,
}

impl TruthInstance {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.theta)
    }

    fn check(&self, inst: &ProblemInstance) -> Result<()> {
        if self.len() != inst.len() {
            return Err(Error::LengthMismatch { expected: inst.len(), found: self.len() });
        }
        Ok(())
    }
}

/// `G(w, beta) = phi(w) + w Phi(w) - beta w`.
#[inline]
pub fn g_fn(w: f64, beta: f64) -> f64 {
    if w > G_TAIL {
        (1.0 - beta) * w
    } else if w < -G_TAIL {
        -beta * w
    } else {
        norm_pdf(w) + w * norm_cdf(w) - beta * w
    }
}

/// Pointwise check loss `b (y - q)^+ + h (q - y)^+`.
#[inline]
pub fn check_loss(y: f64, q: f64, b: f64, h: f64) -> f64 {
    if y >= q {
        b * (y - q)
    } else {
        h * (q - y)
    }
}

/// `E[b (Y - q)^+ + h (q - Y)^+]` for `Y ~ N(theta, sigma_f)`.
pub fn expected_check_loss(theta: f64, sigma_f: f64, b: f64, h: f64, q: f64) -> f64 {
    let s = libm::sqrt(sigma_f);
    (b + h) * s * g_fn((q - theta) / s, b / (b + h))
}

/// Bayes rule under the prior `N(eta, tau)`: the `b~` quantile of the
/// predictive `N(alpha x + (1 - alpha) eta, sigma_f + alpha sigma_p)`.
pub fn bayes_predict(x: f64, eta: f64, tau: Tau, sigma_p: f64, sigma_f: f64, b: f64, h: f64) -> f64 {
    predict_with_quantile(x, eta, tau.alpha(sigma_p), sigma_p, sigma_f, probit(b / (b + h)))
}

#[inline]
fn predict_with_quantile(x: f64, eta: f64, alpha: f64, sigma_p: f64, sigma_f: f64, z_b: f64) -> f64 {
    alpha * x + (1.0 - alpha) * eta + libm::sqrt(sigma_f + alpha * sigma_p) * z_b
}

/// Coordinate-wise Bayes predictions for the rule named by `hp`.
pub fn predict_class(inst: &ProblemInstance, hp: &HyperParams) -> Vec<f64> {
    let eta = hp.location(inst);
    (0..inst.len())
        .map(|i| {
            let sp = inst.sigma_p[i];
            predict_with_quantile(inst.x[i], eta, hp.tau.alpha(sp), sp, inst.sigma_f[i], inst.z_b[i])
        })
        .collect()
}

/// Mean expected check loss of predictions `q` given the truth.
pub fn cumulative_loss(truth: &TruthInstance, inst: &ProblemInstance, q: &[f64]) -> Result<f64> {
    truth.check(inst)?;
    if q.len() != inst.len() {
        return Err(Error::LengthMismatch { expected: inst.len(), found: q.len() });
    }
    let s: NeumaierSum = (0..inst.len())
        .map(|i| expected_check_loss(truth.theta[i], inst.sigma_f[i], inst.b[i], inst.h[i], q[i]))
        .collect();
    Ok(s.value() / inst.len() as f64)
}

/// Mean realized check loss of predictions `q` against outcomes `y`.
pub fn realized_loss(y: &[f64], inst: &ProblemInstance, q: &[f64]) -> Result<f64> {
    for len in [y.len(), q.len()] {
        if len != inst.len() {
            return Err(Error::LengthMismatch { expected: inst.len(), found: len });
        }
    }
    let s: NeumaierSum = (0..inst.len()).map(|i| check_loss(y[i], q[i], inst.b[i], inst.h[i])).collect();
    Ok(s.value() / inst.len() as f64)
}

/// Risk of the rule `alpha X + sqrt(sigma_f + alpha sigma_p) z_b` written as
/// `(b + h) scale G(c + d theta, b~)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskCoefficients {
    pub alpha: f64,
    /// `sqrt(sigma_f + alpha^2 sigma_p)`
    pub scale: f64,
    pub c: f64,
    pub d: f64,
}

impl RiskCoefficients {
    pub fn new(tau: Tau, sigma_p: f64, sigma_f: f64, z_b: f64) -> Self {
        let alpha = tau.alpha(sigma_p);
        let var = sigma_f + alpha * alpha * sigma_p;
        let scale = libm::sqrt(var);
        let c = libm::sqrt((sigma_f + alpha * sigma_p) / var) * z_b;
        let d = -(1.0 - alpha) / scale;
        Self { alpha, scale, c, d }
    }
}

/// Closed-form risk of the origin-class rule at `theta`. For the other
/// classes pass `theta - eta` (or `theta - mean(theta)` for the grand-mean
/// surrogate).
pub fn coord_risk(theta: f64, tau: Tau, sigma_p: f64, sigma_f: f64, b: f64, h: f64) -> f64 {
    let bt = b / (b + h);
    let rc = RiskCoefficients::new(tau, sigma_p, sigma_f, probit(bt));
    (b + h) * rc.scale * g_fn(rc.c + rc.d * theta, bt)
}

/// Mean risk over coordinates; the grand-mean class gets the surrogate risk
/// with `theta` centered at its own mean.
pub fn total_risk(truth: &TruthInstance, inst: &ProblemInstance, hp: &HyperParams) -> Result<f64> {
    truth.check(inst)?;
    let shift = match hp.class {
        ClassTag::Origin => 0.0,
        ClassTag::GrandMean => truth.mean(),
        ClassTag::DataDriven => hp.eta,
    };
    Ok(shifted_risk(&truth.theta, inst, shift, hp.tau))
}

pub(crate) fn shifted_risk(theta: &[f64], inst: &ProblemInstance, shift: f64, tau: Tau) -> f64 {
    let s: NeumaierSum = (0..inst.len())
        .map(|i| {
            let rc = RiskCoefficients::new(tau, inst.sigma_p[i], inst.sigma_f[i], inst.z_b[i]);
            (inst.b[i] + inst.h[i]) * rc.scale * g_fn(rc.c + rc.d * (theta[i] - shift), inst.b_tilde[i])
        })
        .collect();
    s.value() / inst.len() as f64
}

impl core::fmt::Display for Tau {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            f.write_str(&self.0.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{standard_normal, RngSeed};
    use alloc::vec;

    fn mc_loss(theta: f64, sigma: f64, b: f64, h: f64, q: f64, draws: usize, seed: u64) -> (f64, f64) {
        let mut rng = RngSeed::new(seed).rng();
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let y = theta + libm::sqrt(sigma) * standard_normal(&mut rng);
            let l = check_loss(y, q, b, h);
            s += l;
            s2 += l * l;
        }
        let m = s / draws as f64;
        (m, libm::sqrt((s2 / draws as f64 - m * m) / draws as f64))
    }

    #[test]
    fn g_basics() {
        assert!((g_fn(0.0, 0.7) - 0.398_942_280_4).abs() < 1e-10);
        for beta in [0.1, 0.51, 0.99] {
            let z = probit(beta);
            assert!((g_fn(z, beta) - norm_pdf(z)).abs() < 1e-14);
            for dw in [-0.01, 0.01] {
                assert!(g_fn(z + dw, beta) > g_fn(z, beta));
            }
        }
        // tails switch continuously
        let w = G_TAIL;
        assert!((g_fn(w + 1e-9, 0.3) - g_fn(w - 1e-9, 0.3)).abs() < 1e-8);
        assert!((g_fn(-w - 1e-9, 0.3) - g_fn(-w + 1e-9, 0.3)).abs() < 1e-8);
    }

    #[test]
    fn g_matches_mc_identity() {
        // G(w, beta) = E[beta (Z - w)^+ + (1 - beta)(w - Z)^+] for Z ~ N(0, 1)
        let (m, se) = mc_loss(0.0, 1.0, 0.4, 0.6, 2.0, 2_000_000, 3);
        assert!((m - g_fn(2.0, 0.4)).abs() < 3.5 * se, "{m} vs {}", g_fn(2.0, 0.4));
    }

    #[test]
    fn expected_loss_identities() {
        let (b, h) = (2.0, 1.0);
        let bt = b / (b + h);
        let z = probit(bt);
        assert!((expected_check_loss(0.0, 1.0, b, h, z) - (b + h) * norm_pdf(z)).abs() < 1e-14);
        let v = expected_check_loss(0.3, 4.0, b, h, 1.1);
        let half = expected_check_loss(0.15, 1.0, b, h, 0.55);
        assert!((v - 2.0 * half).abs() < 1e-13);
        let (m, se) = mc_loss(1.0, 0.5, 2.0, 1.0, 1.3, 2_000_000, 9);
        assert!((m - expected_check_loss(1.0, 0.5, 2.0, 1.0, 1.3)).abs() < 3.5 * se);
    }

    #[test]
    fn bayes_rule_limits() {
        let (sp, sf, b, h) = (1.0 / 3.0, 1.0, 0.51, 0.49);
        let z = probit(0.51);
        assert!((bayes_predict(2.0, 0.7, Tau::ZERO, sp, sf, b, h) - (0.7 + z)).abs() < 1e-15);
        let q = bayes_predict(2.0, 0.7, Tau::INFINITY, sp, sf, b, h);
        assert!((q - (2.0 + libm::sqrt(sf + sp) * z)).abs() < 1e-15);
        // tau = 0.35 at sigma_p = 1/3: alpha = 0.35 / (0.35 + 1/3)
        let alpha: f64 = 0.35 / (0.35 + 1.0 / 3.0);
        assert!((alpha - 0.512).abs() < 1e-3);
        let q = bayes_predict(1.0, 0.0, Tau::new(0.35).unwrap(), sp, sf, b, h);
        let expect = alpha + libm::sqrt(1.0 + alpha / 3.0) * z;
        assert!((q - expect).abs() < 1e-15);
    }

    #[test]
    fn predictions_by_class() {
        let one = ProblemInstance::new(vec![3.0], vec![0.5], vec![2.0], vec![0.8], vec![0.2]).unwrap();
        let q = predict_class(&one, &HyperParams::origin(Tau::ZERO));
        assert!((q[0] - libm::sqrt(2.0) * probit(0.8)).abs() < 1e-15);

        let inst = ProblemInstance::new(
            vec![1.5; 4],
            vec![0.2, 0.3, 0.4, 0.5],
            vec![1.0, 2.0, 0.5, 1.0],
            vec![0.6, 0.7, 0.8, 0.9],
            vec![0.4, 0.3, 0.2, 0.1],
        )
        .unwrap();
        let q = predict_class(&inst, &HyperParams::grand_mean(Tau::ZERO));
        for (i, qi) in q.iter().enumerate() {
            let expect = 1.5 + libm::sqrt(inst.sigma_f()[i]) * probit(inst.b_tilde()[i]);
            assert!((qi - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn loss_at_optimum() {
        let inst = ProblemInstance::new(
            vec![0.0; 3],
            vec![1.0; 3],
            vec![1.0, 2.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![1.0, 1.0, 0.8],
        )
        .unwrap();
        let truth = TruthInstance::new(vec![0.3, -1.0, 2.0]);
        let q: Vec<f64> = (0..3).map(|i| truth.theta[i] + libm::sqrt(inst.sigma_f()[i]) * inst.z_b()[i]).collect();
        let expect: f64 = (0..3)
            .map(|i| (inst.b()[i] + inst.h()[i]) * libm::sqrt(inst.sigma_f()[i]) * norm_pdf(inst.z_b()[i]))
            .sum::<f64>()
            / 3.0;
        assert!((cumulative_loss(&truth, &inst, &q).unwrap() - expect).abs() < 1e-14);
        assert!(matches!(cumulative_loss(&truth, &inst, &q[..2]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn risk_at_infinity_is_theta_free() {
        let a = coord_risk(5.0, Tau::INFINITY, 0.3, 1.2, 0.7, 0.3);
        let b = coord_risk(-2.0, Tau::INFINITY, 0.3, 1.2, 0.7, 0.3);
        assert_eq!(a, b);
        let z = probit(0.7);
        assert!((a - libm::sqrt(1.5) * g_fn(z, 0.7)).abs() < 1e-14);
    }

    #[test]
    fn risk_matches_simulation() {
        // closed form vs averaging the expected loss over simulated X
        let (theta, sp, sf, b, h) = (0.8, 0.4, 1.5, 0.7, 0.3);
        let tau = Tau::new(0.6).unwrap();
        let mut rng = RngSeed::new(21).rng();
        let draws = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let x = theta + libm::sqrt(sp) * standard_normal(&mut rng);
            let l = expected_check_loss(theta, sf, b, h, bayes_predict(x, 0.0, tau, sp, sf, b, h));
            s += l;
            s2 += l * l;
        }
        let m = s / draws as f64;
        let se = libm::sqrt((s2 / draws as f64 - m * m) / draws as f64);
        assert!((m - coord_risk(theta, tau, sp, sf, b, h)).abs() < 3.5 * se);
    }

    #[test]
    fn instance_validation() {
        let ok = |b: f64, h: f64| ProblemInstance::new(vec![0.0], vec![1.0], vec![1.0], vec![b], vec![h]);
        assert!(ok(1.0, 1.0).is_ok());
        assert!(ok(0.0, 1.0).is_err());
        assert!(ok(1.0, -1.0).is_err());
        assert!(ProblemInstance::new(vec![], vec![], vec![], vec![], vec![]).is_err());
        assert!(ProblemInstance::new(vec![0.0, 1.0], vec![1.0], vec![1.0], vec![1.0], vec![1.0]).is_err());
        assert!(Tau::new(-0.1).is_err());
        assert!(Tau::new(f64::NAN).is_err());
    }

    #[test]
    fn tau_tilde_roundtrip() {
        for t in [0.0, 0.1, 0.5, 0.9, 0.999] {
            let tau = Tau::from_tilde(t, 0.4);
            assert!((tau.tilde(0.4) - t).abs() < 1e-12);
        }
        assert!(Tau::from_tilde(1.0, 0.4).is_infinite());
    }
}
