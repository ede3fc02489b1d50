//! Raw inspection records to criterion performances.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{serde_ratio, Exact};
use crate::scale::Performance;

/// Deficiencies recorded in the last 36 months, or not eligible (no
/// inspection in that window).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Deficiencies {
    Count(u32),
    NotEligible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawShipRecord {
    pub ship: String,
    pub ship_type: String,
    #[serde(with = "serde_ratio")]
    pub age: Exact,
    pub deficiencies: Deficiencies,
    pub detentions: u32,
    pub ism_company: String,
    pub flag: String,
    pub recognised_organisation: String,
}

/// Published performance rating of a company, flag State or RO.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rating {
    VeryLow,
    Low,
    Medium,
    High,
}

impl Rating {
    pub fn parse(token: &str) -> Option<Rating> {
        match normalize_key(token).as_str() {
            "very low" => Some(Rating::VeryLow),
            "low" => Some(Rating::Low),
            "medium" => Some(Rating::Medium),
            "high" => Some(Rating::High),
            _ => None,
        }
    }

    /// Three-level scale used for company and RO performance.
    fn three_level(self) -> &'static str {
        match self {
            Rating::VeryLow | Rating::Low => "low",
            Rating::Medium => "medium",
            Rating::High => "high",
        }
    }

    /// Four-level flag performance scale.
    fn flag_level(self) -> &'static str {
        match self {
            Rating::VeryLow => "very low",
            Rating::Low => "low",
            Rating::Medium => "medium",
            Rating::High => "high",
        }
    }
}

/// Lookup keys are matched case-insensitively with collapsed whitespace.
pub fn normalize_key(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceLists {
    /// Ship types whose accidents carry high consequences.
    pub listed_ship_types: BTreeSet<String>,
    pub company_performance: BTreeMap<String, Rating>,
    pub flag_bgw: BTreeMap<String, Rating>,
    /// Flags that fulfil the IMO audit report requirement.
    pub flag_imo_audit: BTreeSet<String>,
    pub ro_performance: BTreeMap<String, Rating>,
    /// ROs recognised by at least one member State.
    pub ro_recognised: BTreeSet<String>,
}

impl ReferenceLists {
    /// Copy with every key normalized.
    pub fn normalized(&self) -> ReferenceLists {
        let set = |s: &BTreeSet<String>| s.iter().map(|k| normalize_key(k)).collect();
        let map = |m: &BTreeMap<String, Rating>| m.iter().map(|(k, v)| (normalize_key(k), *v)).collect();
        ReferenceLists {
            listed_ship_types: set(&self.listed_ship_types),
            company_performance: map(&self.company_performance),
            flag_bgw: map(&self.flag_bgw),
            flag_imo_audit: set(&self.flag_imo_audit),
            ro_performance: map(&self.ro_performance),
            ro_recognised: set(&self.ro_recognised),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingDataPolicy {
    /// Unknown company, flag or RO is an error.
    #[default]
    Strict,
    /// Unknown entries take the worst level and produce a warning.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerformanceRecord {
    pub ship: String,
    pub performances: BTreeMap<String, Performance>,
}

impl PerformanceRecord {
    pub fn new(ship: impl Into<String>) -> Self {
        PerformanceRecord {
            ship: ship.into(),
            performances: BTreeMap::new(),
        }
    }

    pub fn with(mut self, criterion: &str, performance: Performance) -> Self {
        self.performances.insert(criterion.to_string(), performance);
        self
    }

    pub fn get(&self, criterion: &str) -> Option<&Performance> {
        self.performances.get(criterion)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingWarning {
    pub ship: String,
    pub list: String,
    pub key: String,
    pub assigned: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedShip {
    pub record: PerformanceRecord,
    pub warnings: Vec<MappingWarning>,
}

/// Derives g1..g9 for one ship. `lists` must be normalized (see
/// [`ReferenceLists::normalized`]).
pub fn map_raw_to_performance(
    raw: &RawShipRecord,
    lists: &ReferenceLists,
    policy: MissingDataPolicy,
) -> Result<MappedShip> {
    if raw.age < Exact::from_integer(0.into()) {
        return Err(Error::BelowDomain {
            criterion: "g2".into(),
            value: crate::exact::to_ratio_string(&raw.age),
            min: "0".into(),
        });
    }
    let mut warnings = Vec::new();
    let mut lookup = |list: &'static str, map: &BTreeMap<String, Rating>, key: &str, worst: Rating| {
        match map.get(&normalize_key(key)) {
            Some(r) => Ok(*r),
            None => match policy {
                MissingDataPolicy::Strict => Err(Error::MissingListEntry {
                    ship: raw.ship.clone(),
                    list,
                    key: key.to_string(),
                }),
                MissingDataPolicy::Lenient => {
                    warnings.push(MappingWarning {
                        ship: raw.ship.clone(),
                        list: list.to_string(),
                        key: key.to_string(),
                        assigned: format!("{worst:?}"),
                    });
                    Ok(worst)
                }
            },
        }
    };
    let company = lookup("company_performance", &lists.company_performance, &raw.ism_company, Rating::VeryLow)?;
    let flag = lookup("flag_bgw", &lists.flag_bgw, &raw.flag, Rating::VeryLow)?;
    let ro = lookup("ro_performance", &lists.ro_performance, &raw.recognised_organisation, Rating::VeryLow)?;

    let yes_no = |b: bool| if b { "yes" } else { "no" };
    let acci = if lists.listed_ship_types.contains(&normalize_key(&raw.ship_type)) {
        "high"
    } else {
        "low"
    };
    let defc = match raw.deficiencies {
        Deficiencies::Count(n) if n <= 5 => "low",
        Deficiencies::Count(_) => "medium",
        Deficiencies::NotEligible => "high",
    };
    let detn = match raw.detentions {
        0 => "no",
        1 => "one",
        _ => "more",
    };
    let record = PerformanceRecord::new(&raw.ship)
        .with("g1", Performance::level(acci))
        .with("g2", Performance::Numeric(raw.age.clone()))
        .with("g3", Performance::level(defc))
        .with("g4", Performance::level(detn))
        .with("g5", Performance::level(company.three_level()))
        .with("g6", Performance::level(flag.flag_level()))
        .with("g7", Performance::level(yes_no(lists.flag_imo_audit.contains(&normalize_key(&raw.flag)))))
        .with("g8", Performance::level(ro.three_level()))
        .with(
            "g9",
            Performance::level(yes_no(lists.ro_recognised.contains(&normalize_key(&raw.recognised_organisation)))),
        );
    Ok(MappedShip { record, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn lists() -> ReferenceLists {
        ReferenceLists {
            listed_ship_types: ["Bulk carrier", "Oil tanker"].iter().map(|s| s.to_string()).collect(),
            company_performance: [("ISM 107".to_string(), Rating::High), ("ISM 24".to_string(), Rating::VeryLow)]
                .into_iter()
                .collect(),
            flag_bgw: [("Panama".to_string(), Rating::High), ("Barbados".to_string(), Rating::Medium)]
                .into_iter()
                .collect(),
            flag_imo_audit: ["Panama".to_string()].into_iter().collect(),
            ro_performance: [("NKK".to_string(), Rating::High), ("BV".to_string(), Rating::Medium)]
                .into_iter()
                .collect(),
            ro_recognised: ["NKK".to_string(), "BV".to_string()].into_iter().collect(),
        }
        .normalized()
    }

    fn a4() -> RawShipRecord {
        RawShipRecord {
            ship: "a4".into(),
            ship_type: "Bulk carrier".into(),
            age: int(2),
            deficiencies: Deficiencies::Count(0),
            detentions: 0,
            ism_company: "ISM 107".into(),
            flag: "Panama".into(),
            recognised_organisation: "NKK".into(),
        }
    }

    fn level(m: &MappedShip, c: &str) -> String {
        m.record.get(c).unwrap().to_string()
    }

    #[test]
    fn maps_a4() {
        let m = map_raw_to_performance(&a4(), &lists(), MissingDataPolicy::Strict).unwrap();
        let got: Vec<String> = (1..=9).map(|i| level(&m, &format!("g{i}"))).collect();
        assert_eq!(got, ["high", "2", "low", "no", "high", "high", "yes", "high", "yes"]);
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn audit_membership_and_company_collapse() {
        let raw = RawShipRecord {
            ship: "a9".into(),
            ship_type: "General cargo".into(),
            age: int(28),
            flag: "Barbados".into(),
            ism_company: "ism  24".into(),
            recognised_organisation: "BV".into(),
            ..a4()
        };
        let m = map_raw_to_performance(&raw, &lists(), MissingDataPolicy::Strict).unwrap();
        assert_eq!(level(&m, "g1"), "low");
        assert_eq!(level(&m, "g5"), "low");
        assert_eq!(level(&m, "g6"), "medium");
        assert_eq!(level(&m, "g7"), "no");
        assert_eq!(level(&m, "g8"), "medium");
    }

    #[test]
    fn deficiency_and_detention_boundaries() {
        let with = |d, det| {
            let raw = RawShipRecord { deficiencies: d, detentions: det, ..a4() };
            let m = map_raw_to_performance(&raw, &lists(), MissingDataPolicy::Strict).unwrap();
            (level(&m, "g3"), level(&m, "g4"))
        };
        assert_eq!(with(Deficiencies::Count(5), 0), ("low".into(), "no".into()));
        assert_eq!(with(Deficiencies::Count(6), 1), ("medium".into(), "one".into()));
        assert_eq!(with(Deficiencies::NotEligible, 2), ("high".into(), "more".into()));
    }

    #[test]
    fn missing_entries_strict_and_lenient() {
        let raw = RawShipRecord { ism_company: "ISM 999".into(), ..a4() };
        assert!(matches!(
            map_raw_to_performance(&raw, &lists(), MissingDataPolicy::Strict),
            Err(Error::MissingListEntry { list: "company_performance", .. })
        ));
        let empty = ReferenceLists::default();
        let m = map_raw_to_performance(&a4(), &empty, MissingDataPolicy::Lenient).unwrap();
        assert_eq!(m.warnings.len(), 3);
        assert_eq!(level(&m, "g5"), "low");
        assert_eq!(level(&m, "g6"), "very low");
        assert_eq!(level(&m, "g8"), "low");
        assert_eq!(level(&m, "g7"), "no");
        assert_eq!(level(&m, "g9"), "no");
    }

    #[test]
    fn negative_age_rejected() {
        let raw = RawShipRecord { age: int(-3), ..a4() };
        assert!(matches!(
            map_raw_to_performance(&raw, &lists(), MissingDataPolicy::Strict),
            Err(Error::BelowDomain { .. })
        ));
    }
}
