//! Hyperparameter grids.
//!
//! The scale grid is equispaced in `tau~ = tau / (tau + 1)` on `[0, 1]`,
//! with `tau~ = 1` standing for `tau = inf`. Its spacing comes from bounds on
//! the instance constants and shrinks slowly (like `1 / ln ln n`) with `n`.

use alloc::vec::Vec;

use crate::check_loss::{ProblemInstance, Tau};
use crate::error::{domain, Result};
use crate::stats::normal::FRAC_1_SQRT_2PI;
use crate::stats::{mean, sample_quantile_sorted};

/// Instance-level bounds entering the grid spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridConstants {
    /// `max (b + h)`
    pub c1: f64,
    /// `max(max sigma_p, max 1/sigma_p)`
    pub c2: f64,
    /// `max(sigma_p/sigma_f) * max |Phi^{-1}(b~)|`
    pub c3: f64,
    /// `max(mean |x| / sqrt(a_n), 1)`, a data stand-in for the bound on `mean |theta|`
    pub c4: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    /// Strictly increasing; begins at 0 and ends at infinity.
    pub tau_points: Vec<Tau>,
    pub eta_points: Option<Vec<f64>>,
    /// Spacing in the mapped coordinate.
    pub delta: f64,
    /// `ln ln n` for grids derived from instance constants.
    pub a_n: Option<f64>,
    pub constants: Option<GridConstants>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.tau_points.len() * self.eta_points.as_ref().map_or(1, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Evaluation grid for oracles: `points` values of `tau / (tau + s)`
    /// equispaced on `[0, 1]`, `s` the mean of `sigma_p`. For equal
    /// variances these are equispaced shrinkage factors.
    pub fn fine(inst: &ProblemInstance, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(domain("a grid needs at least two points"));
        }
        let scale = mean(inst.sigma_p());
        let delta = 1.0 / (points - 1) as f64;
        let tau_points = (0..points)
            .map(|k| if k + 1 == points { Tau::INFINITY } else { Tau::from_tilde(k as f64 * delta, scale) })
            .collect();
        Ok(Self { tau_points, eta_points: None, delta, a_n: None, constants: None })
    }

    /// [`Grid::fine`] times `eta_points` locations equispaced over the
    /// clipping interval.
    pub fn fine_product(inst: &ProblemInstance, tau_points: usize, eta_points: usize) -> Result<Self> {
        let mut g = Self::fine(inst, tau_points)?;
        let (lo, hi) = m_hat_interval(inst)?;
        g.eta_points = Some(equispaced(lo, hi, eta_points.max(1)));
        Ok(g)
    }
}

fn equispaced(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if hi <= lo || k == 1 {
        return alloc::vec![lo];
    }
    (0..k).map(|j| lo + (hi - lo) * j as f64 / (k - 1) as f64).collect()
}

fn a_n_of(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(domain(alloc::format!("grid construction needs n >= 3, got {n}")));
    }
    Ok(libm::log(libm::log(n as f64)))
}

pub fn grid_constants(inst: &ProblemInstance) -> Result<GridConstants> {
    grid_constants_for(inst, inst.len())
}

fn grid_constants_for(inst: &ProblemInstance, n: usize) -> Result<GridConstants> {
    let a_n = a_n_of(n)?;
    let max = |v: &mut dyn Iterator<Item = f64>| v.fold(f64::NEG_INFINITY, f64::max);
    let c1 = max(&mut inst.b().iter().zip(inst.h()).map(|(b, h)| b + h));
    let c2 = max(&mut inst.sigma_p().iter().map(|&s| s.max(1.0 / s)));
    let ratio = max(&mut inst.sigma_p().iter().zip(inst.sigma_f()).map(|(p, f)| p / f));
    let zmax = max(&mut inst.z_b().iter().map(|z| z.abs()));
    let mean_abs = inst.x().iter().map(|x| x.abs()).sum::<f64>() / inst.len() as f64;
    let c4 = (mean_abs / libm::sqrt(a_n)).max(1.0);
    Ok(GridConstants { c1, c2, c3: ratio * zmax, c4 })
}

fn tau_points_for(delta: f64) -> Vec<Tau> {
    let mut pts = alloc::vec![Tau::ZERO];
    let mut k = 1usize;
    loop {
        let t = k as f64 * delta;
        if t >= 1.0 - 1e-12 {
            break;
        }
        pts.push(Tau::from_tilde(t, 1.0));
        k += 1;
    }
    pts.push(Tau::INFINITY);
    pts
}

fn refine(delta: f64, min_points: Option<usize>) -> f64 {
    match min_points {
        Some(m) if m >= 2 && tau_points_for(delta).len() < m => 1.0 / (m - 1) as f64,
        _ => delta,
    }
}

/// Scale grid for the origin (and grand-mean) class.
pub fn build_grid_origin(inst: &ProblemInstance, n: usize, min_points: Option<usize>) -> Result<Grid> {
    let a_n = a_n_of(n)?;
    let k = grid_constants_for(inst, n)?;
    let delta = 1.0 / (2.0 * k.c1 * k.c2 * (2.0 * FRAC_1_SQRT_2PI + k.c3 + libm::sqrt(a_n) * k.c4 + a_n));
    let delta = refine(delta, min_points);
    Ok(Grid { tau_points: tau_points_for(delta), eta_points: None, delta, a_n: Some(a_n), constants: Some(k) })
}

/// Product grid for the data-driven class: a finer scale grid and an
/// equispaced location grid on `[-a_n, a_n]` kept inside the clipping
/// interval (its two endpoints if nothing falls inside).
pub fn build_grid_datadriven(inst: &ProblemInstance, n: usize, min_points: Option<usize>) -> Result<Grid> {
    let a_n = a_n_of(n)?;
    let k = grid_constants_for(inst, n)?;
    let delta = 1.0 / (2.0 * k.c1 * k.c2 * (2.0 * FRAC_1_SQRT_2PI + k.c3 + libm::sqrt(a_n) * k.c4 + a_n + a_n * a_n));
    let delta = refine(delta, min_points);

    let step = 1.0 / (2.0 * k.c1 * a_n);
    let (lo, hi) = m_hat_interval(inst)?;
    let mut eta = Vec::new();
    let mut j = 0usize;
    loop {
        let e = -a_n + j as f64 * step;
        if e > a_n + 1e-12 {
            break;
        }
        if e >= lo && e <= hi {
            eta.push(e);
        }
        j += 1;
    }
    if eta.is_empty() {
        eta.push(lo);
        if hi > lo {
            eta.push(hi);
        }
    }
    Ok(Grid { tau_points: tau_points_for(delta), eta_points: Some(eta), delta, a_n: Some(a_n), constants: Some(k) })
}

/// `[quantile(x, min b~), quantile(x, max b~)]`.
pub fn m_hat_interval(inst: &ProblemInstance) -> Result<(f64, f64)> {
    let bt = inst.b_tilde();
    let a1 = bt.iter().copied().fold(f64::INFINITY, f64::min);
    let a2 = bt.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sorted = inst.x().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok((sample_quantile_sorted(&sorted, a1)?, sample_quantile_sorted(&sorted, a2)?))
}
