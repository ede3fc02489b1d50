//! Bundled sample data: the ten-ship fleet, its reference lists, a baseline
//! sorting and the complete elicitation session for the nine-criterion model.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::framework::CriteriaFramework;
use crate::io::fleet::{parse_fleet, Fleet, FleetMode, Strictness};
use crate::io::lists::parse_reference_lists;
use crate::io::session::SessionDocument;
use crate::risk::{Category, PerformanceRecord, RawShipRecord, ReferenceLists};

pub const REFERENCE_SESSION: &str = include_str!("../../data/reference_session.json");
pub const SAMPLE_FLEET_RAW: &str = include_str!("../../data/sample_fleet_raw.csv");
pub const SAMPLE_FLEET_PERFORMANCE: &str = include_str!("../../data/sample_fleet_performance.csv");
pub const SAMPLE_LISTS: &str = include_str!("../../data/sample_lists.json");
pub const SAMPLE_BASELINE: &str = include_str!("../../data/sample_baseline.csv");

pub fn reference_session() -> SessionDocument {
    SessionDocument::parse(REFERENCE_SESSION).expect("bundled session parses")
}

pub fn sample_raw_fleet() -> Vec<RawShipRecord> {
    match parse_fleet(
        SAMPLE_FLEET_RAW.as_bytes(),
        Some(FleetMode::Raw),
        &CriteriaFramework::port_state_control(),
        Strictness::Strict,
    ) {
        Ok(Fleet::Raw(rows)) => rows,
        other => panic!("bundled raw fleet: {other:?}"),
    }
}

pub fn sample_performance_fleet() -> Vec<PerformanceRecord> {
    match parse_fleet(
        SAMPLE_FLEET_PERFORMANCE.as_bytes(),
        Some(FleetMode::Performance),
        &CriteriaFramework::port_state_control(),
        Strictness::Strict,
    ) {
        Ok(Fleet::Performance(rows)) => rows,
        other => panic!("bundled performance fleet: {other:?}"),
    }
}

pub fn sample_lists() -> ReferenceLists {
    parse_reference_lists(SAMPLE_LISTS).expect("bundled lists parse")
}

pub fn sample_baseline() -> BTreeMap<String, Category> {
    parse_baseline(SAMPLE_BASELINE).expect("bundled baseline parses")
}

/// Reads a `ship,category` CSV.
pub fn parse_baseline(text: &str) -> Result<BTreeMap<String, Category>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Document(e.to_string()))?
        .iter()
        .map(str::to_lowercase)
        .collect();
    if header != ["ship", "category"] {
        return Err(Error::Parse {
            line: 1,
            column: header.join(","),
            message: "expected header ship,category".into(),
        });
    }
    let mut out = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Document(e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let category = Category::parse(&rec[1]).ok_or_else(|| Error::Parse {
            line,
            column: "category".into(),
            message: format!("unknown category {:?}", &rec[1]),
        })?;
        if out.insert(rec[0].to_string(), category).is_some() {
            return Err(Error::DuplicateKey {
                list: "baseline".into(),
                key: rec[0].to_string(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;
    use crate::io::lists::map_fleet;
    use crate::io::session::{
        Provenance, ScaleJudgments, WeightingJudgments, ZSource, SESSION_VERSION,
    };
    use crate::risk::{ClassificationPolicy, MissingDataPolicy};
    use crate::scale::{Judgment, Performance, ReferenceAssignment};
    use crate::weights::{ClosenessJudgments, SwingRanking, WeightingReference};

    /// The session rebuilt judgment by judgment.
    pub(crate) fn build_reference_session() -> SessionDocument {
        let framework = CriteriaFramework::port_state_control();
        let cards: [(&str, &[i64]); 7] = [
            ("g1", &[0]),
            ("g2", &[0, 2, 3, 3, 4]),
            ("g3", &[2, 4]),
            ("g4", &[3, 4]),
            ("g5", &[2, 4]),
            ("g6", &[2, 4, 6]),
            ("g8", &[3, 3]),
        ];
        let mut scales = Vec::new();
        let mut references = Vec::new();
        for (id, adjacent) in cards {
            let c = framework.criterion(id).unwrap();
            let (worst, best) = (c.worst_level().clone(), c.best_level().clone());
            scales.push(ScaleJudgments {
                criterion: id.into(),
                adjacent_cards: adjacent.to_vec(),
                extra_judgments: vec![],
                reference: ReferenceAssignment::zero_to_hundred(&worst.id, &best.id),
            });
            let perf = |l: &crate::scale::ScaleLevel| match &l.anchor {
                Some(a) if c.continuous => Performance::Numeric(a.clone()),
                _ => Performance::level(&l.id),
            };
            references.push(WeightingReference::new(id, perf(&worst), perf(&best)));
        }
        let order = ["g3", "g4", "g6", "g1", "g8", "g5", "g2"];
        let full: [&[u32]; 6] = [&[1, 4, 7, 11, 14, 19], &[2, 5, 9, 12, 17], &[2, 6, 9, 14], &[3, 6, 11], &[2, 7], &[4]];
        let mut extra = Vec::new();
        for (p, row) in full.iter().enumerate() {
            for (o, &c) in row.iter().enumerate() {
                let q = p + o + 1;
                if q != order.len() - 1 {
                    extra.push(Judgment::new(order[p], order[q], c));
                }
            }
        }
        let closeness = ClosenessJudgments::new(
            order[..6].iter().zip(full.iter()).map(|(c, row)| (*c, *row.last().unwrap())),
        )
        .with_extra(extra);
        SessionDocument {
            version: SESSION_VERSION,
            provenance: Provenance {
                author: Some("port state control risk panel".into()),
                created: None,
                modified: None,
                description: Some("Ten-ship sample with the nine-criterion framework".into()),
            },
            framework,
            scales,
            weighting: WeightingJudgments {
                references,
                ranking: SwingRanking::strict(order),
                closeness,
                z_source: ZSource::Indifference {
                    performance: Performance::Numeric(int(15)),
                },
            },
            policy: ClassificationPolicy::port_state_control(),
            elicitation_rounding: None,
        }
    }

    #[test]
    fn bundled_session_matches_judgments() {
        let built = build_reference_session();
        if std::env::var_os("DCM_WRITE_FIXTURES").is_some() {
            std::fs::write(
                concat!(env!("CARGO_MANIFEST_DIR"), "/data/reference_session.json"),
                built.to_canonical_string(),
            )
            .unwrap();
        }
        assert_eq!(reference_session(), built);
        assert_eq!(built.to_canonical_string(), REFERENCE_SESSION);
    }

    #[test]
    fn lists_reconstruct_performance_table() {
        let (mapped, warnings) = map_fleet(&sample_raw_fleet(), &sample_lists(), MissingDataPolicy::Strict).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(mapped, sample_performance_fleet());
    }

    #[test]
    fn baseline_has_every_ship() {
        let baseline = sample_baseline();
        for ship in sample_raw_fleet() {
            assert!(baseline.contains_key(&ship.ship));
        }
        assert!(parse_baseline("ship,category\na1,C9\n").is_err());
        assert!(parse_baseline("ship,category\na1,C1\na1,C2\n").is_err());
    }
}
