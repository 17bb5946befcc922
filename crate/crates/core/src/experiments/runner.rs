//! Replication runner and report aggregation.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::scenarios::ScenarioSpec;
use crate::are::{make_tuning_with, AreTuning, TuningConfig};
use crate::check_loss::{
    cumulative_loss, predict_class, realized_loss, total_risk, ClassTag, HyperParams, ProblemInstance, Tau,
};
use crate::competitors::{are_grid, are_select, ebml, ebmm, oracle_select, unshrunken, Objective, RiskSurface};
use crate::error::{Error, Result};
use crate::grids::Grid;
use crate::stats::{mean, sample_quantile, std_dev, wilcoxon_signed_rank_with, Alternative, ZeroPolicy};

/// Methods a scenario can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MethodSpec {
    /// ARE, origin class.
    Are,
    /// ARE, grand-mean class.
    AreG,
    /// ARE, data-driven class.
    AreD,
    Ebml,
    Ebmm,
    OracleRisk,
    OracleLoss,
    Unshrunken,
}

impl MethodSpec {
    pub const ALL: [MethodSpec; 8] = [
        MethodSpec::Are,
        MethodSpec::AreG,
        MethodSpec::AreD,
        MethodSpec::Ebml,
        MethodSpec::Ebmm,
        MethodSpec::OracleRisk,
        MethodSpec::OracleLoss,
        MethodSpec::Unshrunken,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MethodSpec::Are => "ARE",
            MethodSpec::AreG => "ARE^G",
            MethodSpec::AreD => "ARE^D",
            MethodSpec::Ebml => "EBML",
            MethodSpec::Ebmm => "EBMM",
            MethodSpec::OracleRisk => "OracleRisk",
            MethodSpec::OracleLoss => "OracleLoss",
            MethodSpec::Unshrunken => "Unshrunken",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let k = s.to_ascii_lowercase().replace('_', "-");
        Some(match k.as_str() {
            "are" => MethodSpec::Are,
            "are-g" | "are^g" | "areg" => MethodSpec::AreG,
            "are-d" | "are^d" | "ared" => MethodSpec::AreD,
            "ebml" | "ml" => MethodSpec::Ebml,
            "ebmm" | "mm" => MethodSpec::Ebmm,
            "oracle-risk" | "oraclerisk" | "oracle" => MethodSpec::OracleRisk,
            "oracle-loss" | "oracleloss" => MethodSpec::OracleLoss,
            "unshrunken" | "us" => MethodSpec::Unshrunken,
            _ => return None,
        })
    }

    pub fn are_for(class: ClassTag) -> Self {
        match class {
            ClassTag::Origin => MethodSpec::Are,
            ClassTag::GrandMean => MethodSpec::AreG,
            ClassTag::DataDriven => MethodSpec::AreD,
        }
    }

    /// Class the method runs in; the ARE variants fix their own.
    pub fn class(self, default: ClassTag) -> ClassTag {
        match self {
            MethodSpec::Are => ClassTag::Origin,
            MethodSpec::AreG => ClassTag::GrandMean,
            MethodSpec::AreD => ClassTag::DataDriven,
            _ => default,
        }
    }

    pub fn is_are(self) -> bool {
        matches!(self, MethodSpec::Are | MethodSpec::AreG | MethodSpec::AreD)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MethodOutcome {
    pub method: MethodSpec,
    pub hp: HyperParams,
    /// Percent, against the class's risk range on the fine grid.
    pub inefficiency: f64,
    pub risk: f64,
    /// Realized loss when the scenario draws outcomes, expected loss otherwise.
    pub loss: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RepOutcome {
    pub rep: usize,
    pub methods: Vec<MethodOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReportRow {
    pub method: String,
    pub class: ClassTag,
    pub mean_inefficiency: f64,
    pub sd_inefficiency: f64,
    /// Over replications with finite `tau`; `None` if there were none.
    pub mean_tau: Option<f64>,
    pub sd_tau: Option<f64>,
    pub infinite_tau_count: usize,
    pub mean_eta: Option<f64>,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SummaryStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl SummaryStats {
    pub fn of(xs: &[f64]) -> Result<Self> {
        Ok(Self {
            min: sample_quantile(xs, 0.0)?,
            q1: sample_quantile(xs, 0.25)?,
            median: sample_quantile(xs, 0.5)?,
            mean: mean(xs),
            q3: sample_quantile(xs, 0.75)?,
            max: sample_quantile(xs, 1.0)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Comparison {
    /// e.g. `"ARE^G over EBML"`.
    pub pair: String,
    pub method: MethodSpec,
    pub baseline: MethodSpec,
    /// Mean of per-replication relative efficiencies (percent).
    pub mean_rel_efficiency: f64,
    pub summary: SummaryStats,
    /// One-sided signed-rank p-value for positive efficiencies; `None` with
    /// fewer than 5 replications.
    pub wilcoxon_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub scenario: String,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub rows: Vec<ReportRow>,
    pub comparisons: Vec<Comparison>,
    pub warnings: Vec<String>,
}

/// `(L_baseline - L_method) / L_baseline * 100`.
pub fn relative_efficiency(loss_method: f64, loss_baseline: f64) -> f64 {
    (loss_baseline - loss_method) / loss_baseline * 100.0
}

struct ClassCache {
    class: ClassTag,
    surface: RiskSurface,
    grid: Grid,
}

fn scaled(inst: &ProblemInstance, s: f64) -> Result<ProblemInstance> {
    let s2 = s * s;
    ProblemInstance::new(
        inst.x().iter().map(|v| v / s).collect(),
        inst.sigma_p().iter().map(|v| v / s2).collect(),
        inst.sigma_f().iter().map(|v| v / s2).collect(),
        inst.b().to_vec(),
        inst.h().to_vec(),
    )
}

/// Runs every method on replication `rep`.
pub fn run_replication(spec: &ScenarioSpec, methods: &[MethodSpec], rep: usize) -> Result<RepOutcome> {
    let data = spec.generate(rep)?;
    let (truth, inst) = (&data.truth, &data.inst);
    let default_class = spec.class();

    let scale = if spec.standardize { libm::sqrt(mean(inst.sigma_f())) } else { 1.0 };
    let are_inst = if scale != 1.0 { Some(scaled(inst, scale)?) } else { None };
    let are_data = are_inst.as_ref().unwrap_or(inst);
    let mut tuning: Option<AreTuning> = None;

    let mut caches: Vec<ClassCache> = Vec::new();
    let mut out = Vec::with_capacity(methods.len());
    for &m in methods {
        let class = m.class(default_class);
        if !caches.iter().any(|c| c.class == class) {
            let grid = match class {
                ClassTag::DataDriven => Grid::fine_product(inst, spec.fine_points, spec.fine_eta_points)?,
                _ => Grid::fine(inst, spec.fine_points)?,
            };
            let surface = RiskSurface::new(truth, inst, class, &grid)?;
            caches.push(ClassCache { class, surface, grid });
        }
        let cache = caches.iter().find(|c| c.class == class).ok_or(Error::Empty("class cache"))?;

        let (hp, warnings) = match m {
            MethodSpec::Are | MethodSpec::AreG | MethodSpec::AreD => {
                if tuning.is_none() {
                    let cfg = TuningConfig { seed: spec.tuning_seed(rep), ..spec.tuning };
                    tuning = Some(make_tuning_with(are_data, &cfg)?);
                }
                let t = tuning.as_ref().ok_or(Error::Empty("tuning"))?;
                let grid = are_grid(are_data, class, spec.grid_min_points)?;
                let sel = are_select(are_data, class, t, &grid)?;
                let hp = unscale(sel.hp, scale, inst);
                (hp, sel.warnings)
            }
            MethodSpec::Ebml => {
                let s = ebml(inst, class)?;
                (s.hp, s.warnings)
            }
            MethodSpec::Ebmm => {
                let s = ebmm(inst, class)?;
                (s.hp, s.warnings)
            }
            MethodSpec::OracleRisk => (cache.surface.argmin, Vec::new()),
            MethodSpec::OracleLoss => {
                let s = oracle_select(truth, inst, class, Objective::Loss, &cache.grid)?;
                (s.hp, s.warnings)
            }
            MethodSpec::Unshrunken => (unshrunken(inst, class).hp, Vec::new()),
        };
        let inefficiency = cache.surface.inefficiency(truth, inst, &hp)?;
        let risk = total_risk(truth, inst, &hp)?;
        let q = predict_class(inst, &hp);
        let loss = match &data.outcome {
            Some(y) => realized_loss(y, inst, &q)?,
            None => cumulative_loss(truth, inst, &q)?,
        };
        out.push(MethodOutcome { method: m, hp, inefficiency, risk, loss, warnings });
    }
    Ok(RepOutcome { rep, methods: out })
}

fn unscale(hp: HyperParams, scale: f64, inst: &ProblemInstance) -> HyperParams {
    if scale == 1.0 {
        return hp;
    }
    let tau = if hp.tau.is_infinite() {
        Tau::INFINITY
    } else {
        Tau::new(hp.tau.value() * scale * scale).unwrap_or(Tau::INFINITY)
    };
    match hp.class {
        ClassTag::Origin => HyperParams::origin(tau),
        ClassTag::GrandMean => HyperParams { eta: inst.x_mean(), ..HyperParams::grand_mean(tau) },
        ClassTag::DataDriven => HyperParams::data_driven(hp.eta * scale, tau),
    }
}

/// Folds replication outcomes (in any order) into a report.
pub fn aggregate(spec: &ScenarioSpec, methods: &[MethodSpec], mut outcomes: Vec<RepOutcome>) -> Result<EvalReport> {
    if outcomes.is_empty() {
        return Err(Error::Empty("replication outcomes"));
    }
    outcomes.sort_by_key(|o| o.rep);
    let default_class = spec.class();
    let pick = |m: MethodSpec| -> Result<Vec<&MethodOutcome>> {
        outcomes
            .iter()
            .map(|o| o.methods.iter().find(|r| r.method == m).ok_or(Error::Empty("method outcome")))
            .collect()
    };

    let mut rows = Vec::with_capacity(methods.len());
    for &m in methods {
        let res = pick(m)?;
        let ineff: Vec<f64> = res.iter().map(|r| r.inefficiency).collect();
        let finite: Vec<f64> = res.iter().filter(|r| !r.hp.tau.is_infinite()).map(|r| r.hp.tau.value()).collect();
        let class = m.class(default_class);
        let mean_eta = match class {
            ClassTag::Origin => None,
            _ => Some(mean(&res.iter().map(|r| r.hp.eta).collect::<Vec<_>>())),
        };
        rows.push(ReportRow {
            method: String::from(m.label()),
            class,
            mean_inefficiency: mean(&ineff),
            sd_inefficiency: std_dev(&ineff),
            mean_tau: (!finite.is_empty()).then(|| mean(&finite)),
            sd_tau: (!finite.is_empty()).then(|| std_dev(&finite)),
            infinite_tau_count: res.len() - finite.len(),
            mean_eta,
            mean_loss: mean(&res.iter().map(|r| r.loss).collect::<Vec<_>>()),
        });
    }

    let mut comparisons = Vec::with_capacity(spec.comparisons.len());
    for &(a, base) in &spec.comparisons {
        let la = pick(a)?;
        let lb = pick(base)?;
        let eff: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| relative_efficiency(x.loss, y.loss)).collect();
        let wilcoxon_p = match wilcoxon_signed_rank_with(&eff, Alternative::Greater, ZeroPolicy::Split) {
            Ok(r) => Some(r.p_value),
            Err(Error::TooFewSamples { .. }) => None,
            Err(e) => return Err(e),
        };
        comparisons.push(Comparison {
            pair: alloc::format!("{} over {}", a.label(), base.label()),
            method: a,
            baseline: base,
            mean_rel_efficiency: mean(&eff),
            summary: SummaryStats::of(&eff)?,
            wilcoxon_p,
        });
    }

    // distinct warnings with the number of replications raising them
    let mut counts: Vec<(String, usize)> = Vec::new();
    for o in &outcomes {
        let mut seen: Vec<&String> = Vec::new();
        for w in o.methods.iter().flat_map(|m| &m.warnings) {
            if seen.contains(&w) {
                continue;
            }
            seen.push(w);
            match counts.iter_mut().find(|(s, _)| s == w) {
                Some((_, c)) => *c += 1,
                None => counts.push((w.clone(), 1)),
            }
        }
    }
    let warnings =
        counts.into_iter().map(|(w, c)| alloc::format!("{w} [{c} of {} replications]", outcomes.len())).collect();

    Ok(EvalReport {
        scenario: spec.scenario.name(),
        n: spec.dimension(),
        reps: spec.reps,
        seed: spec.seed.seed,
        params: spec.params(),
        rows,
        comparisons,
        warnings,
    })
}

/// Serial run of all replications.
pub fn run_scenario(spec: &ScenarioSpec, methods: &[MethodSpec]) -> Result<EvalReport> {
    spec.validate()?;
    if methods.is_empty() {
        return Err(Error::Scenario(String::from("no methods requested")));
    }
    let outcomes = (0..spec.reps).map(|r| run_replication(spec, methods, r)).collect::<Result<Vec<_>>>()?;
    aggregate(spec, methods, outcomes)
}
