//! The reference-lists JSON document.
//!
//! ```json
//! {
//!   "listed_ship_types": ["Bulk carrier", "Oil tanker"],
//!   "company_performance": { "ISM 107": "high", "ISM 45": "low" },
//!   "flag_bgw": { "Panama": "high" },
//!   "flag_imo_audit": ["Panama"],
//!   "ro_performance": { "NKK": "high" },
//!   "ro_recognised": ["NKK"]
//! }
//! ```
//!
//! Keys are compared case-insensitively with collapsed whitespace; two keys
//! that normalize to the same string in one map are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::risk::{normalize_key, MissingDataPolicy, Rating, RawShipRecord, ReferenceLists};

/// Map entries in document order, duplicates preserved.
struct Pairs(Vec<(String, String)>);

impl<'de> Deserialize<'de> for Pairs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct PairsVisitor;
        impl<'de> Visitor<'de> for PairsVisitor {
            type Value = Pairs;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object of name to rating")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Pairs, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    out.push((k, v));
                }
                Ok(Pairs(out))
            }
        }
        d.deserialize_map(PairsVisitor)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ListsDocument {
    #[serde(default)]
    listed_ship_types: Vec<String>,
    #[serde(default = "empty_pairs")]
    company_performance: Pairs,
    #[serde(default = "empty_pairs")]
    flag_bgw: Pairs,
    #[serde(default)]
    flag_imo_audit: Vec<String>,
    #[serde(default = "empty_pairs")]
    ro_performance: Pairs,
    #[serde(default)]
    ro_recognised: Vec<String>,
}

fn empty_pairs() -> Pairs {
    Pairs(Vec::new())
}

fn rating_map(list: &str, pairs: Pairs) -> Result<BTreeMap<String, Rating>> {
    let mut out = BTreeMap::new();
    for (key, token) in pairs.0 {
        let rating = Rating::parse(&token.replace(['-', '_'], " "))
            .ok_or_else(|| Error::Document(format!("{list}: unknown performance {token:?} for {key:?}")))?;
        if out.insert(normalize_key(&key), rating).is_some() {
            return Err(Error::DuplicateKey {
                list: list.to_string(),
                key,
            });
        }
    }
    Ok(out)
}

fn key_set(items: Vec<String>) -> BTreeSet<String> {
    items.iter().map(|s| normalize_key(s)).collect()
}

/// Parses and normalizes a reference-lists document.
pub fn parse_reference_lists(text: &str) -> Result<ReferenceLists> {
    let doc: ListsDocument = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
    Ok(ReferenceLists {
        listed_ship_types: key_set(doc.listed_ship_types),
        company_performance: rating_map("company_performance", doc.company_performance)?,
        flag_bgw: rating_map("flag_bgw", doc.flag_bgw)?,
        flag_imo_audit: key_set(doc.flag_imo_audit),
        ro_performance: rating_map("ro_performance", doc.ro_performance)?,
        ro_recognised: key_set(doc.ro_recognised),
    })
}

#[derive(Serialize)]
struct ListsOut<'a> {
    listed_ship_types: &'a BTreeSet<String>,
    company_performance: BTreeMap<&'a str, &'static str>,
    flag_bgw: BTreeMap<&'a str, &'static str>,
    flag_imo_audit: &'a BTreeSet<String>,
    ro_performance: BTreeMap<&'a str, &'static str>,
    ro_recognised: &'a BTreeSet<String>,
}

fn rating_token(r: Rating) -> &'static str {
    match r {
        Rating::VeryLow => "very low",
        Rating::Low => "low",
        Rating::Medium => "medium",
        Rating::High => "high",
    }
}

fn tokens(m: &BTreeMap<String, Rating>) -> BTreeMap<&str, &'static str> {
    m.iter().map(|(k, r)| (k.as_str(), rating_token(*r))).collect()
}

pub fn write_reference_lists(lists: &ReferenceLists) -> String {
    let doc = ListsOut {
        listed_ship_types: &lists.listed_ship_types,
        company_performance: tokens(&lists.company_performance),
        flag_bgw: tokens(&lists.flag_bgw),
        flag_imo_audit: &lists.flag_imo_audit,
        ro_performance: tokens(&lists.ro_performance),
        ro_recognised: &lists.ro_recognised,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("lists serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MissingListEntry {
    pub ship: String,
    pub list: &'static str,
    pub key: String,
}

/// Ships whose company, flag or RO has no performance entry. Sets are
/// membership tests, so absence there is not reported.
pub fn check_totality(lists: &ReferenceLists, fleet: &[RawShipRecord]) -> Vec<MissingListEntry> {
    let mut out = Vec::new();
    for raw in fleet {
        let checks: [(&'static str, &BTreeMap<String, Rating>, &String); 3] = [
            ("company_performance", &lists.company_performance, &raw.ism_company),
            ("flag_bgw", &lists.flag_bgw, &raw.flag),
            ("ro_performance", &lists.ro_performance, &raw.recognised_organisation),
        ];
        for (list, map, key) in checks {
            if !map.contains_key(&normalize_key(key)) {
                out.push(MissingListEntry {
                    ship: raw.ship.clone(),
                    list,
                    key: key.clone(),
                });
            }
        }
    }
    out
}

/// Maps a whole raw fleet; strict mode stops at the first missing entry.
pub fn map_fleet(
    fleet: &[RawShipRecord],
    lists: &ReferenceLists,
    policy: MissingDataPolicy,
) -> Result<(Vec<crate::risk::PerformanceRecord>, Vec<crate::risk::MappingWarning>)> {
    let mut records = Vec::with_capacity(fleet.len());
    let mut warnings = Vec::new();
    for raw in fleet {
        let mapped = crate::risk::map_raw_to_performance(raw, lists, policy)?;
        records.push(mapped.record);
        warnings.extend(mapped.warnings);
    }
    Ok((records, warnings))
}
