//! Newsvendor study: stocking levels for items with known prices, demand
//! observed in two past periods and scored on a third.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::runner::{run_scenario, EvalReport, MethodSpec};
use super::scenarios::{Scenario, ScenarioSpec};
use crate::check_loss::{ClassTag, ProblemInstance, TruthInstance};
use crate::error::{Error, Result};
use crate::rng::{standard_normal, uniform, RngSeed};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NewsvendorItem {
    /// Mean demand per period.
    pub theta: f64,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ItemSource {
    /// `count` items, a `high_fraction` share with mean demand in
    /// `(100, 300)` and the rest in `[10, 30]`; prices in `[5, 40]`.
    Synthetic {
        count: usize,
        high_fraction: f64,
    },
    Given(Vec<NewsvendorItem>),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NewsvendorConfig {
    pub items: ItemSource,
    /// Demand variance per period (no default: it depends on the data).
    pub sigma: f64,
    /// Retail markup `m`; the shortage cost is `m / (1 + m) * price`.
    pub markup: f64,
    /// Annual cost of capital; the holding cost is `b * rate / 12`.
    pub capital_rate: f64,
    /// Flat addition to the shortage cost of high-volume items.
    pub flat_cost: f64,
    /// Mean demand above which an item counts as high volume.
    pub high_volume_threshold: f64,
}

impl NewsvendorConfig {
    pub fn synthetic(sigma: f64) -> Self {
        Self {
            items: ItemSource::Synthetic { count: 200, high_fraction: 0.25 },
            sigma,
            markup: 0.15,
            capital_rate: 0.15,
            flat_cost: 0.0,
            high_volume_threshold: 100.0,
        }
    }

    pub fn item_count(&self) -> usize {
        match &self.items {
            ItemSource::Synthetic { count, .. } => *count,
            ItemSource::Given(v) => v.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Scenario(m.to_string()));
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("newsvendor demand variance sigma must be positive");
        }
        if !(self.markup > 0.0 && self.markup.is_finite()) {
            return bad("markup must be positive");
        }
        if !(self.capital_rate > 0.0 && self.capital_rate.is_finite()) {
            return bad("capital rate must be positive");
        }
        if !(self.flat_cost >= 0.0 && self.flat_cost.is_finite()) {
            return bad("flat cost must be non-negative");
        }
        match &self.items {
            ItemSource::Synthetic { high_fraction, .. } if !(0.0..=1.0).contains(high_fraction) => {
                bad("high-volume fraction must lie in [0, 1]")
            }
            ItemSource::Given(v) if v.iter().any(|i| !(i.price > 0.0) || !i.theta.is_finite()) => {
                bad("item prices must be positive and demands finite")
            }
            _ => Ok(()),
        }
    }

    /// Items, generating synthetic ones from a fixed substream of `seed`.
    pub fn resolve_items(&self, seed: RngSeed) -> Vec<NewsvendorItem> {
        match &self.items {
            ItemSource::Given(v) => v.clone(),
            ItemSource::Synthetic { count, high_fraction } => {
                synthetic_items(*count, *high_fraction, seed.derive(u64::MAX))
            }
        }
    }

    /// `(b, h)` for one item.
    pub fn costs(&self, item: &NewsvendorItem) -> (f64, f64) {
        let mut b = self.markup / (1.0 + self.markup) * item.price;
        if item.theta > self.high_volume_threshold {
            b += self.flat_cost;
        }
        (b, b * self.capital_rate / 12.0)
    }

    /// Truth, the instance built from the averaged past and the future draw.
    pub fn generate(
        &self,
        scenario_seed: RngSeed,
        rep_seed: RngSeed,
    ) -> Result<(TruthInstance, ProblemInstance, Vec<f64>)> {
        let items = self.resolve_items(scenario_seed);
        let mut rng = rep_seed.rng();
        let sd = libm::sqrt(self.sigma);
        let n = items.len();
        let (mut x, mut y, mut b, mut h) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for it in &items {
            let x1 = it.theta + sd * standard_normal(&mut rng);
            let x2 = it.theta + sd * standard_normal(&mut rng);
            y.push(it.theta + sd * standard_normal(&mut rng));
            x.push(0.5 * (x1 + x2));
            let (bi, hi) = self.costs(it);
            b.push(bi);
            h.push(hi);
        }
        let inst = ProblemInstance::new(x, alloc::vec![self.sigma / 2.0; n], alloc::vec![self.sigma; n], b, h)?;
        Ok((TruthInstance::new(items.iter().map(|i| i.theta).collect()), inst, y))
    }

    pub(crate) fn describe(&self, m: &mut BTreeMap<String, String>) {
        m.insert("sigma".to_string(), self.sigma.to_string());
        m.insert("markup".to_string(), self.markup.to_string());
        m.insert("capital_rate".to_string(), self.capital_rate.to_string());
        m.insert("flat_cost".to_string(), self.flat_cost.to_string());
        m.insert("items".to_string(), self.item_count().to_string());
        let src = match self.items {
            ItemSource::Synthetic { .. } => "synthetic",
            ItemSource::Given(_) => "file",
        };
        m.insert("item_source".to_string(), src.to_string());
    }
}

pub fn synthetic_items(count: usize, high_fraction: f64, seed: RngSeed) -> Vec<NewsvendorItem> {
    let mut rng = seed.rng();
    let high = libm::round(high_fraction * count as f64) as usize;
    (0..count)
        .map(|i| {
            let theta = if i < high {
                uniform(&mut rng, 100.0, 300.0).max(100.0 + 1e-9)
            } else {
                uniform(&mut rng, 10.0, 30.0)
            };
            NewsvendorItem { theta, price: uniform(&mut rng, 5.0, 40.0) }
        })
        .collect()
}

/// Default methods, in the given class: unshrunken, likelihood and ARE.
pub fn default_methods(class: ClassTag) -> Vec<MethodSpec> {
    alloc::vec![MethodSpec::Unshrunken, MethodSpec::Ebml, MethodSpec::are_for(class)]
}

/// Default comparisons: ARE over EBML, ARE over unshrunken, EBML over unshrunken.
pub fn default_comparisons(class: ClassTag) -> Vec<(MethodSpec, MethodSpec)> {
    let are = MethodSpec::are_for(class);
    alloc::vec![(are, MethodSpec::Ebml), (are, MethodSpec::Unshrunken), (MethodSpec::Ebml, MethodSpec::Unshrunken)]
}

/// Runs the study with the default methods and comparisons in `class`.
pub fn newsvendor_run(config: NewsvendorConfig, class: ClassTag, reps: usize, seed: RngSeed) -> Result<EvalReport> {
    let mut spec = ScenarioSpec::new(Scenario::Newsvendor(config), 0, reps, seed);
    spec.class = Some(class);
    spec.comparisons = default_comparisons(class);
    run_scenario(&spec, &default_methods(class))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_weights() {
        let cfg = NewsvendorConfig::synthetic(25.0);
        let (b, h) = cfg.costs(&NewsvendorItem { theta: 20.0, price: 23.0 });
        assert!((b - 0.15 / 1.15 * 23.0).abs() < 1e-14);
        assert!((h - b * 0.15 / 12.0).abs() < 1e-14);
        let cfg = NewsvendorConfig { flat_cost: 0.5, ..cfg };
        let (b_hi, _) = cfg.costs(&NewsvendorItem { theta: 150.0, price: 23.0 });
        assert!((b_hi - b - 0.5).abs() < 1e-14);
    }

    #[test]
    fn synthetic_groups() {
        let items = synthetic_items(200, 0.25, RngSeed::new(1));
        assert_eq!(items.len(), 200);
        assert_eq!(items.iter().filter(|i| i.theta > 100.0).count(), 50);
        assert!(items.iter().filter(|i| i.theta <= 100.0).all(|i| (10.0..=30.0).contains(&i.theta)));
    }

    #[test]
    fn instance_shapes() {
        let cfg = NewsvendorConfig::synthetic(16.0);
        let (t, inst, y) = cfg.generate(RngSeed::new(2), RngSeed::new(3)).unwrap();
        assert_eq!(t.len(), 200);
        assert_eq!(y.len(), 200);
        assert!(inst.sigma_p().iter().all(|&s| s == 8.0));
        assert!(inst.sigma_f().iter().all(|&s| s == 16.0));
        assert!(NewsvendorConfig::synthetic(0.0).validate().is_err());
    }
}
