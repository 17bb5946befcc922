//! Plot data: closed-form risk against the shrinkage factor and ARE against `tau`.

use alloc::vec::Vec;

use crate::are::{AreEvaluator, AreTuning};
use crate::check_loss::{shifted_risk, ClassTag, ProblemInstance, Tau, TruthInstance};
use crate::error::{domain, Result};
use crate::stats::mean;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvePoint {
    /// Shrinkage factor `tau / (tau + mean sigma_p)`.
    pub alpha: f64,
    pub tau: Tau,
    pub value: f64,
}

/// Risk at `resolution` equispaced shrinkage factors in `[0, 1]`. For the
/// data-driven class the rule shrinks toward `eta`.
pub fn risk_curve(
    truth: &TruthInstance,
    inst: &ProblemInstance,
    class: ClassTag,
    eta: f64,
    resolution: usize,
) -> Result<Vec<CurvePoint>> {
    if resolution < 2 {
        return Err(domain("a curve needs at least two points"));
    }
    if truth.len() != inst.len() {
        return Err(crate::error::Error::LengthMismatch { expected: inst.len(), found: truth.len() });
    }
    let s = mean(inst.sigma_p());
    let shift = match class {
        ClassTag::Origin => 0.0,
        ClassTag::GrandMean => truth.mean(),
        ClassTag::DataDriven => eta,
    };
    Ok((0..resolution)
        .map(|k| {
            let alpha = k as f64 / (resolution - 1) as f64;
            let tau = Tau::from_tilde(alpha, s);
            CurvePoint { alpha, tau, value: shifted_risk(&truth.theta, inst, shift, tau) }
        })
        .collect())
}

/// ARE of the class's rule at each `tau`.
pub fn are_curve(
    inst: &ProblemInstance,
    class: ClassTag,
    eta: f64,
    tuning: &AreTuning,
    taus: &[Tau],
) -> Result<Vec<CurvePoint>> {
    let eval = AreEvaluator::new(inst, tuning)?;
    let loc = match class {
        ClassTag::Origin => 0.0,
        ClassTag::GrandMean => inst.x_mean(),
        ClassTag::DataDriven => eta,
    };
    let s = mean(inst.sigma_p());
    Ok(taus.iter().map(|&tau| CurvePoint { alpha: tau.tilde(s), tau, value: eval.value_at(loc, tau) }).collect())
}
