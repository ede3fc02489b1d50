//! The criteria framework: points of view, significance axes and criteria.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, serde_ratio, Exact};
use crate::scale::{Direction, Performance, ScaleLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    /// Carries a value function and a weight.
    Valued,
    /// Pass/fail only; used by classification rules.
    AcceptReject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    pub code: String,
    pub name: String,
    pub direction: Direction,
    pub kind: CriterionKind,
    /// Continuous scales take numeric performances; their levels are breakpoints.
    #[serde(default)]
    pub continuous: bool,
    /// Worst to best.
    pub levels: Vec<ScaleLevel>,
    #[serde(default, with = "serde_ratio::option", skip_serializing_if = "Option::is_none")]
    pub domain_min: Option<Exact>,
}

fn normalize_token(s: &str) -> String {
    s.trim()
        .to_lowercase()
        .replace(['_', '-'], " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

impl Criterion {
    pub fn level_ordinal(&self, id: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.id == id)
    }

    /// Matches a level token ignoring case, `_`/`-` and repeated spaces.
    pub fn resolve_level(&self, token: &str) -> Option<&ScaleLevel> {
        let wanted = normalize_token(token);
        self.levels
            .iter()
            .find(|l| normalize_token(&l.id) == wanted || normalize_token(&l.label) == wanted)
    }

    pub fn worst_level(&self) -> &ScaleLevel {
        &self.levels[0]
    }

    pub fn best_level(&self) -> &ScaleLevel {
        self.levels.last().expect("criterion has levels")
    }

    /// Parses a cell of a performance table for this criterion.
    pub fn parse_performance(&self, token: &str) -> Result<Performance> {
        if self.continuous {
            let value = crate::exact::parse_exact(token).map_err(|e| Error::Document(e.to_string()))?;
            if let Some(min) = &self.domain_min {
                if value < *min {
                    return Err(Error::BelowDomain {
                        criterion: self.id.clone(),
                        value: token.trim().to_string(),
                        min: crate::exact::to_ratio_string(min),
                    });
                }
            }
            return Ok(Performance::Numeric(value));
        }
        self.resolve_level(token)
            .map(|l| Performance::Level(l.id.clone()))
            .ok_or_else(|| Error::UnknownLevel {
                criterion: self.id.clone(),
                level: token.to_string(),
            })
    }

    /// Orders two discrete levels by preference (`Greater` = better).
    pub fn compare_levels(&self, a: &str, b: &str) -> Option<Ordering> {
        Some(self.level_ordinal(a)?.cmp(&self.level_ordinal(b)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignificanceAxis {
    pub id: String,
    pub name: String,
    pub criteria: Vec<Criterion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointOfView {
    pub id: String,
    pub name: String,
    pub axes: Vec<SignificanceAxis>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaFramework {
    pub points_of_view: Vec<PointOfView>,
}

impl CriteriaFramework {
    pub fn criteria(&self) -> impl Iterator<Item = &Criterion> {
        self.points_of_view
            .iter()
            .flat_map(|pv| pv.axes.iter())
            .flat_map(|sa| sa.criteria.iter())
    }

    pub fn criterion(&self, id: &str) -> Result<&Criterion> {
        self.criteria()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::UnknownCriterion(id.to_string()))
    }

    pub fn valued(&self) -> impl Iterator<Item = &Criterion> {
        self.criteria().filter(|c| c.kind == CriterionKind::Valued)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        let mut codes = HashSet::new();
        for c in self.criteria() {
            if !ids.insert(&c.id) {
                return Err(Error::Document(format!("duplicate criterion id {}", c.id)));
            }
            if !codes.insert(&c.code) {
                return Err(Error::Document(format!("duplicate criterion code {}", c.code)));
            }
            if c.levels.len() < 2 {
                return Err(Error::TooFewLevels(c.levels.len()));
            }
            let mut seen = HashSet::new();
            for l in &c.levels {
                if !seen.insert(&l.id) {
                    return Err(Error::DuplicateLevel(l.id.clone()));
                }
            }
            if c.continuous && c.levels.iter().any(|l| l.anchor.is_none()) {
                return Err(Error::MissingAnchor {
                    criterion: c.id.clone(),
                    level: c.levels.iter().find(|l| l.anchor.is_none()).map(|l| l.id.clone()).unwrap_or_default(),
                });
            }
            if c.continuous && c.kind == CriterionKind::AcceptReject {
                return Err(Error::Document(format!("{} cannot be continuous and accept/reject", c.id)));
            }
        }
        Ok(())
    }

    /// The nine-criterion ship risk framework (g1..g9).
    pub fn port_state_control() -> Self {
        use CriterionKind::*;
        use Direction::*;
        let discrete = |id: &str, code: &str, name: &str, direction, kind, levels: &[&str]| Criterion {
            id: id.into(),
            code: code.into(),
            name: name.into(),
            direction,
            kind,
            continuous: false,
            levels: levels
                .iter()
                .enumerate()
                .map(|(i, l)| ScaleLevel {
                    ordinal: i,
                    ..ScaleLevel::new(*l, *l)
                })
                .collect(),
            domain_min: None,
        };
        let ages = Criterion {
            id: "g2".into(),
            code: "AGES".into(),
            name: "Age of ship".into(),
            direction: Minimize,
            kind: Valued,
            continuous: true,
            levels: [25, 20, 15, 10, 5, 0]
                .into_iter()
                .enumerate()
                .map(|(i, age)| {
                    let id = if age == 25 { "25+".to_string() } else { age.to_string() };
                    let label = if age == 25 {
                        "25 years old or older".to_string()
                    } else {
                        format!("{age} years old")
                    };
                    ScaleLevel {
                        ordinal: i,
                        ..ScaleLevel::anchored(id, label, int(age))
                    }
                })
                .collect(),
            domain_min: Some(int(0)),
        };
        CriteriaFramework {
            points_of_view: vec![
                PointOfView {
                    id: "PV-SC&H".into(),
                    name: "Ship Characteristics and History".into(),
                    axes: vec![
                        SignificanceAxis {
                            id: "SA-CHAR".into(),
                            name: "Ship Characteristics".into(),
                            criteria: vec![
                                discrete("g1", "ACCI", "Ship accident consequences", Minimize, Valued, &["high", "low"]),
                                ages,
                            ],
                        },
                        SignificanceAxis {
                            id: "SA-HIST".into(),
                            name: "Ship History".into(),
                            criteria: vec![
                                discrete("g3", "DEFC", "Deficiencies", Minimize, Valued, &["high", "medium", "low"]),
                                discrete("g4", "DETN", "Detentions", Minimize, Valued, &["more", "one", "no"]),
                            ],
                        },
                    ],
                },
                PointOfView {
                    id: "PV-SR&C".into(),
                    name: "Ship Registration and Classification".into(),
                    axes: vec![
                        SignificanceAxis {
                            id: "SA-COMP".into(),
                            name: "Ship Company".into(),
                            criteria: vec![discrete(
                                "g5",
                                "COPF",
                                "Company performance",
                                Maximize,
                                Valued,
                                &["low", "medium", "high"],
                            )],
                        },
                        SignificanceAxis {
                            id: "SA-FLAG".into(),
                            name: "Ship Flag State".into(),
                            criteria: vec![
                                discrete(
                                    "g6",
                                    "FLPF",
                                    "Flag performance",
                                    Maximize,
                                    Valued,
                                    &["very low", "low", "medium", "high"],
                                ),
                                discrete("g7", "FLIA", "Fulfilment of the IMO audit", Maximize, AcceptReject, &["no", "yes"]),
                            ],
                        },
                        SignificanceAxis {
                            id: "SA-RECO".into(),
                            name: "Recognised Organisation".into(),
                            criteria: vec![
                                discrete("g8", "ROPF", "RO performance", Maximize, Valued, &["low", "medium", "high"]),
                                discrete(
                                    "g9",
                                    "RORE",
                                    "RO recognised by at least one member State",
                                    Maximize,
                                    AcceptReject,
                                    &["no", "yes"],
                                ),
                            ],
                        },
                    ],
                },
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_framework_shape() {
        let fw = CriteriaFramework::port_state_control();
        fw.validate().unwrap();
        let ids: Vec<&str> = fw.criteria().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["g1", "g2", "g3", "g4", "g5", "g6", "g7", "g8", "g9"]);
        let valued: Vec<&str> = fw.valued().map(|c| c.id.as_str()).collect();
        assert_eq!(valued, ["g1", "g2", "g3", "g4", "g5", "g6", "g8"]);
        let codes: Vec<&str> = fw.criteria().map(|c| c.code.as_str()).collect();
        assert_eq!(codes, ["ACCI", "AGES", "DEFC", "DETN", "COPF", "FLPF", "FLIA", "ROPF", "RORE"]);
    }

    #[test]
    fn tokens_resolve_loosely() {
        let fw = CriteriaFramework::port_state_control();
        let g6 = fw.criterion("g6").unwrap();
        assert_eq!(g6.parse_performance("Very_Low").unwrap(), Performance::level("very low"));
        assert!(matches!(g6.parse_performance("purple"), Err(Error::UnknownLevel { .. })));
        let g2 = fw.criterion("g2").unwrap();
        assert_eq!(g2.parse_performance("7.5").unwrap(), Performance::Numeric(crate::exact::ratio(15, 2)));
        assert!(matches!(g2.parse_performance("-3"), Err(Error::BelowDomain { .. })));
        assert_eq!(g6.compare_levels("high", "low"), Some(Ordering::Greater));
    }

    #[test]
    fn duplicate_codes_rejected() {
        let mut fw = CriteriaFramework::port_state_control();
        fw.points_of_view[0].axes[0].criteria[0].code = "AGES".into();
        assert!(fw.validate().is_err());
    }
}
