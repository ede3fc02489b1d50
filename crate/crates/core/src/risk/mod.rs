//! Additive aggregation and hybrid rule/cutoff sorting into risk categories.

mod mapping;
mod policy;

pub use mapping::{
    map_raw_to_performance, normalize_key, Deficiencies, MappedShip, MappingWarning, MissingDataPolicy,
    PerformanceRecord, Rating, RawShipRecord, ReferenceLists,
};
pub use policy::{Category, ClassificationPolicy, OVERRIDE_CRITERION, OVERRIDE_LEVEL};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, serde_ratio, Exact};
use crate::exec::{map_ordered, Execution};
use crate::framework::{CriteriaFramework, CriterionKind};
use crate::scale::{Performance, ValueFunction};
use crate::weights::WeightVector;

/// Everything needed to score a ship: criteria, value functions, weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionModel {
    pub framework: CriteriaFramework,
    pub value_functions: BTreeMap<String, ValueFunction>,
    pub weights: WeightVector,
}

impl DecisionModel {
    pub fn new(
        framework: CriteriaFramework,
        value_functions: BTreeMap<String, ValueFunction>,
        weights: WeightVector,
    ) -> Result<Self> {
        for c in framework.valued() {
            if !value_functions.contains_key(&c.id) {
                return Err(Error::MissingValueFunction(c.id.clone()));
            }
            if !weights.normalized.contains_key(&c.id) {
                return Err(Error::MissingWeight(c.id.clone()));
            }
        }
        Ok(DecisionModel {
            framework,
            value_functions,
            weights,
        })
    }

    pub fn with_weights(&self, weights: WeightVector) -> Result<Self> {
        DecisionModel::new(self.framework.clone(), self.value_functions.clone(), weights)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregation {
    /// Normalized weight times criterion value, valued criteria only.
    #[serde(with = "serde_ratio::map")]
    pub contributions: BTreeMap<String, Exact>,
    #[serde(with = "serde_ratio")]
    pub total: Exact,
    /// Levels on accept/reject criteria.
    pub flags: BTreeMap<String, String>,
}

fn performance_of<'a>(perf: &'a PerformanceRecord, criterion: &str) -> Result<&'a Performance> {
    perf.get(criterion).ok_or_else(|| Error::MissingPerformance {
        ship: perf.ship.clone(),
        criterion: criterion.to_string(),
    })
}

pub fn aggregate(perf: &PerformanceRecord, model: &DecisionModel) -> Result<Aggregation> {
    let mut contributions = BTreeMap::new();
    let mut flags = BTreeMap::new();
    for c in model.framework.criteria() {
        let p = performance_of(perf, &c.id)?;
        match c.kind {
            CriterionKind::Valued => {
                let vf = model
                    .value_functions
                    .get(&c.id)
                    .ok_or_else(|| Error::MissingValueFunction(c.id.clone()))?;
                let w = model
                    .weights
                    .normalized_of(&c.id)
                    .ok_or_else(|| Error::MissingWeight(c.id.clone()))?;
                contributions.insert(c.id.clone(), w * vf.evaluate(p)?);
            }
            CriterionKind::AcceptReject => {
                let level = p.as_level().ok_or_else(|| Error::UnknownLevel {
                    criterion: c.id.clone(),
                    level: p.to_string(),
                })?;
                if c.level_ordinal(level).is_none() {
                    return Err(Error::UnknownLevel {
                        criterion: c.id.clone(),
                        level: level.to_string(),
                    });
                }
                flags.insert(c.id.clone(), level.to_string());
            }
        }
    }
    let total = contributions.values().sum();
    Ok(Aggregation {
        contributions,
        total,
        flags,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    /// Worst level on the eligibility criterion forced C3.
    Override { criterion: String, level: String },
    RulePassed { criterion: String, required: String, actual: String },
    RuleFailed { criterion: String, required: String, actual: String },
    /// Hybrid mode C1 cutoff.
    AboveLambda12 { lambda_12: String, passed: bool },
    AboveLambda23 { lambda_23: String, passed: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub ship: String,
    #[serde(with = "serde_ratio::map")]
    pub contributions: BTreeMap<String, Exact>,
    #[serde(with = "serde_ratio")]
    pub total: Exact,
    pub flags: BTreeMap<String, String>,
    pub category: Category,
    pub rule_trace: Vec<TraceEvent>,
}

fn check_rule(
    framework: &CriteriaFramework,
    perf: &PerformanceRecord,
    criterion: &str,
    required: &str,
) -> Result<TraceEvent> {
    let c = framework.criterion(criterion)?;
    let actual = performance_of(perf, criterion)?;
    let actual_level = actual.as_level().unwrap_or_default();
    let ok = matches!(
        c.compare_levels(actual_level, required),
        Some(std::cmp::Ordering::Greater | std::cmp::Ordering::Equal)
    );
    let (criterion, required, actual) = (criterion.to_string(), required.to_string(), actual.to_string());
    Ok(if ok {
        TraceEvent::RulePassed { criterion, required, actual }
    } else {
        TraceEvent::RuleFailed { criterion, required, actual }
    })
}

/// Sorts an aggregated ship: override, then C1 rules (or the hybrid cutoff),
/// then the C2/C3 cutoff.
pub fn classify(
    aggregation: &Aggregation,
    perf: &PerformanceRecord,
    policy: &ClassificationPolicy,
    framework: &CriteriaFramework,
) -> Result<(Category, Vec<TraceEvent>)> {
    let mut trace = Vec::new();
    if policy.g3_high_override {
        if let Some(Performance::Level(level)) = perf.get(OVERRIDE_CRITERION) {
            if level == OVERRIDE_LEVEL {
                trace.push(TraceEvent::Override {
                    criterion: OVERRIDE_CRITERION.into(),
                    level: level.clone(),
                });
                return Ok((Category::C3, trace));
            }
        }
    }
    let eligible = match &policy.lambda_12 {
        None => {
            let mut all = true;
            for (criterion, required) in &policy.c1_rules {
                let event = check_rule(framework, perf, criterion, required)?;
                all &= matches!(event, TraceEvent::RulePassed { .. });
                trace.push(event);
            }
            all
        }
        Some(l12) => {
            let mut all = true;
            for (criterion, required) in policy.hybrid_rules(framework) {
                let event = check_rule(framework, perf, criterion, required)?;
                all &= matches!(event, TraceEvent::RulePassed { .. });
                trace.push(event);
            }
            let above = aggregation.total > *l12;
            trace.push(TraceEvent::AboveLambda12 {
                lambda_12: exact::to_ratio_string(l12),
                passed: above,
            });
            all && above
        }
    };
    if eligible {
        return Ok((Category::C1, trace));
    }
    let above = aggregation.total > policy.lambda_23;
    trace.push(TraceEvent::AboveLambda23 {
        lambda_23: exact::to_ratio_string(&policy.lambda_23),
        passed: above,
    });
    Ok((if above { Category::C2 } else { Category::C3 }, trace))
}

pub fn evaluate_ship(
    perf: &PerformanceRecord,
    model: &DecisionModel,
    policy: &ClassificationPolicy,
) -> Result<ClassificationResult> {
    let aggregation = aggregate(perf, model)?;
    let (category, rule_trace) = classify(&aggregation, perf, policy, &model.framework)?;
    Ok(ClassificationResult {
        ship: perf.ship.clone(),
        contributions: aggregation.contributions,
        total: aggregation.total,
        flags: aggregation.flags,
        category,
        rule_trace,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub c1: usize,
    pub c2: usize,
    pub c3: usize,
}

impl CategoryCounts {
    pub fn add(&mut self, category: Category) {
        match category {
            Category::C1 => self.c1 += 1,
            Category::C2 => self.c2 += 1,
            Category::C3 => self.c3 += 1,
        }
    }

    pub fn get(&self, category: Category) -> usize {
        match category {
            Category::C1 => self.c1,
            Category::C2 => self.c2,
            Category::C3 => self.c3,
        }
    }

    pub fn total(&self) -> usize {
        self.c1 + self.c2 + self.c3
    }
}

impl<'a> FromIterator<&'a Category> for CategoryCounts {
    fn from_iter<I: IntoIterator<Item = &'a Category>>(iter: I) -> Self {
        let mut counts = CategoryCounts::default();
        for c in iter {
            counts.add(*c);
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShipFailure {
    pub ship: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchOutcome {
    /// Successful results, in fleet order.
    pub results: Vec<ClassificationResult>,
    pub counts: CategoryCounts,
    pub failures: Vec<ShipFailure>,
}

impl BatchOutcome {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn classify_batch(
    fleet: &[PerformanceRecord],
    model: &DecisionModel,
    policy: &ClassificationPolicy,
    exec: Execution,
) -> Result<BatchOutcome> {
    policy.validate(&model.framework)?;
    let outcomes = map_ordered(fleet, exec, |perf| evaluate_ship(perf, model, policy));
    let mut results = Vec::with_capacity(fleet.len());
    let mut failures = Vec::new();
    for (perf, outcome) in fleet.iter().zip(outcomes) {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => failures.push(ShipFailure {
                ship: perf.ship.clone(),
                error: e.to_string(),
            }),
        }
    }
    let counts = results.iter().map(|r| &r.category).collect();
    Ok(BatchOutcome {
        results,
        counts,
        failures,
    })
}
