//! Elicitation sessions: every judgment needed to rebuild the model.
//!
//! Sessions are stored as pretty-printed JSON with exact numbers written as
//! `"n/d"` strings. The canonical form is what [`SessionDocument::to_canonical_string`]
//! produces; loading and saving it again gives the same bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, serde_ratio, Exact};
use crate::framework::CriteriaFramework;
use crate::risk::{ClassificationPolicy, DecisionModel};
use crate::scale::{
    ComparisonTable, ConsistencyReport, FunctionKind, Judgment, Performance, ReferenceAssignment,
    ValueFunction,
};
use crate::weights::{
    build_swings, closeness_report, compute_weights, elicit_z_from_indifference, ClosenessJudgments,
    SwingRanking, WeightVector, WeightingReference,
};

pub const SESSION_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modified: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

/// Judgments for one criterion's comparison table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleJudgments {
    pub criterion: String,
    /// Cards between consecutive levels, worst to best.
    pub adjacent_cards: Vec<i64>,
    /// Optional judgments between non-consecutive levels.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_judgments: Vec<Judgment>,
    pub reference: ReferenceAssignment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ZSource {
    /// The top swing lowered to `performance` on its own criterion is as good
    /// as the bottom swing.
    Indifference { performance: Performance },
    Explicit {
        #[serde(with = "serde_ratio")]
        z: Exact,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightingJudgments {
    pub references: Vec<WeightingReference>,
    pub ranking: SwingRanking,
    pub closeness: ClosenessJudgments,
    pub z_source: ZSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionDocument {
    pub version: u32,
    #[serde(default)]
    pub provenance: Provenance,
    pub framework: CriteriaFramework,
    pub scales: Vec<ScaleJudgments>,
    pub weighting: WeightingJudgments,
    pub policy: ClassificationPolicy,
    /// Decimal places to which elicited units and z are rounded; `None` keeps
    /// everything exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elicitation_rounding: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionDerived {
    pub value_functions: BTreeMap<String, ValueFunction>,
    #[serde(with = "serde_ratio")]
    pub z: Exact,
    pub weights: WeightVector,
}

/// Problems found in a session that still loaded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub scales: BTreeMap<String, ConsistencyReport>,
    pub closeness: ConsistencyReport,
    pub errors: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
            && self.closeness.is_consistent()
            && self.scales.values().all(ConsistencyReport::is_consistent)
    }
}

impl SessionDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        let found = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::Document("missing version".into()))?;
        if found != SESSION_VERSION as u64 {
            return Err(Error::VersionMismatch {
                found: found.try_into().unwrap_or(u32::MAX),
                expected: SESSION_VERSION,
            });
        }
        serde_json::from_value(value).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("session serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        SessionDocument::parse(&text)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_canonical_string()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn scale(&self, criterion: &str) -> Option<&ScaleJudgments> {
        self.scales.iter().find(|s| s.criterion == criterion)
    }

    pub fn scale_mut(&mut self, criterion: &str) -> Option<&mut ScaleJudgments> {
        self.scales.iter_mut().find(|s| s.criterion == criterion)
    }

    fn table(&self, scale: &ScaleJudgments) -> Result<ComparisonTable> {
        let c = self.framework.criterion(&scale.criterion)?;
        ComparisonTable::new(&c.id, c.levels.clone(), &scale.adjacent_cards)
    }

    /// Collects every consistency problem without stopping at the first.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if let Err(e) = self.framework.validate() {
            report.errors.push(e.to_string());
            return report;
        }
        for c in self.framework.valued() {
            if self.scale(&c.id).is_none() {
                report.errors.push(format!("no comparison table for {}", c.id));
            }
        }
        for scale in &self.scales {
            match self
                .table(scale)
                .and_then(|t| t.validate_consistency(&scale.extra_judgments))
            {
                Ok(r) => {
                    report.scales.insert(scale.criterion.clone(), r);
                }
                Err(e) => report.errors.push(format!("{}: {e}", scale.criterion)),
            }
        }
        match closeness_report(&self.weighting.ranking, &self.weighting.closeness) {
            Ok(r) => report.closeness = r,
            Err(e) => report.errors.push(e.to_string()),
        }
        if let Err(e) = self.policy.validate(&self.framework) {
            report.errors.push(e.to_string());
        }
        if report.is_valid() {
            if let Err(e) = self.derive() {
                report.errors.push(e.to_string());
            }
        }
        report
    }

    pub fn value_functions(&self) -> Result<BTreeMap<String, ValueFunction>> {
        self.framework.validate()?;
        let mut out = BTreeMap::new();
        for c in self.framework.valued() {
            let scale = self
                .scale(&c.id)
                .ok_or_else(|| Error::MissingValueFunction(c.id.clone()))?;
            let table = self.table(scale)?;
            let report = table.validate_consistency(&scale.extra_judgments)?;
            if !report.is_consistent() {
                return Err(Error::InconsistentTable {
                    criterion: c.id.clone(),
                    report,
                });
            }
            let kind = if c.continuous {
                FunctionKind::PiecewiseLinear
            } else {
                FunctionKind::Discrete
            };
            let mut vf = table.build_value_function(&scale.reference, kind, c.direction)?;
            if let Some(min) = &c.domain_min {
                vf = vf.with_domain_min(min.clone());
            }
            if let Some(dp) = self.elicitation_rounding {
                vf = vf.rounded(dp);
            }
            out.insert(c.id.clone(), vf);
        }
        Ok(out)
    }

    fn z_from_source(&self, value_functions: &BTreeMap<String, ValueFunction>) -> Result<Exact> {
        match &self.weighting.z_source {
            ZSource::Explicit { z } => Ok(z.clone()),
            ZSource::Indifference { performance } => {
                let ranking = &self.weighting.ranking;
                ranking.validate()?;
                let (top, bottom) = (ranking.top().expect("validated"), ranking.bottom().expect("validated"));
                let swings = build_swings(&self.weighting.references, value_functions)?;
                let find = |c: &String| {
                    swings
                        .iter()
                        .find(|s| &s.swung_criterion == c)
                        .ok_or_else(|| Error::MissingReference(c.clone()))
                };
                let top_vf = value_functions
                    .get(top)
                    .ok_or_else(|| Error::MissingValueFunction(top.clone()))?;
                let z = elicit_z_from_indifference(find(top)?, find(bottom)?, top_vf, performance)?;
                Ok(match self.elicitation_rounding {
                    Some(dp) => exact::round_half_up(&z, dp),
                    None => z,
                })
            }
        }
    }

    /// Value functions, z and weights. `z_override` replaces the session's z.
    pub fn derive_with(&self, z_override: Option<&Exact>) -> Result<SessionDerived> {
        let value_functions = self.value_functions()?;
        let z = match z_override {
            Some(z) => z.clone(),
            None => self.z_from_source(&value_functions)?,
        };
        let weights = compute_weights(&self.weighting.ranking, &self.weighting.closeness, &z)?;
        Ok(SessionDerived {
            value_functions,
            z,
            weights,
        })
    }

    pub fn derive(&self) -> Result<SessionDerived> {
        self.derive_with(None)
    }

    pub fn model(&self, derived: &SessionDerived) -> Result<DecisionModel> {
        DecisionModel::new(
            self.framework.clone(),
            derived.value_functions.clone(),
            derived.weights.clone(),
        )
    }
}
