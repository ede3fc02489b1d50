//! Criterion weights from ranked swing actions.
//!
//! Each weighted criterion gets a dummy action that sits at its best reference
//! on that criterion and at the worst reference everywhere else. The decision
//! maker ranks the swings, places blank cards between every swing and the top
//! one, and states one indifference that fixes the ratio `z` between the top
//! and bottom weights. The bottom raw weight is pinned to 1.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, serde_ratio, Exact};
use crate::scale::{ComparisonTable, ConsistencyReport, Judgment, Performance, ScaleLevel, ValueFunction};

/// Worst and best reference performances used to build a criterion's swing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightingReference {
    pub criterion: String,
    pub worst: Performance,
    pub best: Performance,
}

impl WeightingReference {
    pub fn new(criterion: impl Into<String>, worst: Performance, best: Performance) -> Self {
        WeightingReference {
            criterion: criterion.into(),
            worst,
            best,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwingAction {
    pub id: String,
    pub swung_criterion: String,
    pub worst_refs: BTreeMap<String, Performance>,
    pub best_ref: Performance,
    #[serde(with = "serde_ratio::map")]
    pub value_profile: BTreeMap<String, Exact>,
}

/// `g2` swings as `s2`; other ids get an `s:` prefix.
pub fn swing_id(criterion: &str) -> String {
    match criterion.strip_prefix('g') {
        Some(rest) if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) => {
            format!("s{rest}")
        }
        _ => format!("s:{criterion}"),
    }
}

pub fn build_swings(
    references: &[WeightingReference],
    value_functions: &BTreeMap<String, ValueFunction>,
) -> Result<Vec<SwingAction>> {
    let mut worst_values = BTreeMap::new();
    let mut best_values = BTreeMap::new();
    for r in references {
        let vf = value_functions
            .get(&r.criterion)
            .ok_or_else(|| Error::MissingReference(r.criterion.clone()))?;
        worst_values.insert(r.criterion.clone(), vf.evaluate(&r.worst)?);
        best_values.insert(r.criterion.clone(), vf.evaluate(&r.best)?);
    }
    let worst_refs: BTreeMap<String, Performance> = references
        .iter()
        .map(|r| (r.criterion.clone(), r.worst.clone()))
        .collect();
    Ok(references
        .iter()
        .map(|r| {
            let mut profile = worst_values.clone();
            profile.insert(r.criterion.clone(), best_values[&r.criterion].clone());
            SwingAction {
                id: swing_id(&r.criterion),
                swung_criterion: r.criterion.clone(),
                worst_refs: worst_refs.clone(),
                best_ref: r.best.clone(),
                value_profile: profile,
            }
        })
        .collect())
}

/// Ratio between the top and bottom weights implied by the decision maker
/// being indifferent between `bottom` and the top swing lowered to
/// `indifference` on its own criterion.
pub fn elicit_z_from_indifference(
    top: &SwingAction,
    bottom: &SwingAction,
    top_vf: &ValueFunction,
    indifference: &Performance,
) -> Result<Exact> {
    let top_c = &top.swung_criterion;
    let bottom_c = &bottom.swung_criterion;
    let lookup = |swing: &SwingAction, c: &String| {
        swing
            .value_profile
            .get(c)
            .cloned()
            .ok_or_else(|| Error::MissingReference(c.clone()))
    };
    let top_worst = lookup(bottom, top_c)?;
    let top_best = lookup(top, top_c)?;
    let bottom_gain = lookup(bottom, bottom_c)? - lookup(top, bottom_c)?;
    let lowered = top_vf.evaluate(indifference)?;
    if lowered <= top_worst || lowered > top_best {
        return Err(Error::IndifferenceOutOfRange);
    }
    Ok(bottom_gain / (lowered - top_worst))
}

/// Ordered worst to best; criteria inside one group are tied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwingRanking {
    pub groups: Vec<Vec<String>>,
}

impl SwingRanking {
    pub fn strict<S: Into<String>>(order: impl IntoIterator<Item = S>) -> Self {
        SwingRanking {
            groups: order.into_iter().map(|c| vec![c.into()]).collect(),
        }
    }

    pub fn criteria(&self) -> impl Iterator<Item = &String> {
        self.groups.iter().flatten()
    }

    pub fn top(&self) -> Option<&String> {
        self.groups.last().and_then(|g| g.first())
    }

    pub fn bottom(&self) -> Option<&String> {
        self.groups.first().and_then(|g| g.first())
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::InvalidRanking("no swings ranked".into()));
        }
        let mut seen = HashSet::new();
        for group in &self.groups {
            if group.is_empty() {
                return Err(Error::InvalidRanking("empty tie group".into()));
            }
            for c in group {
                if !seen.insert(c) {
                    return Err(Error::InvalidRanking(format!("{c} ranked twice")));
                }
            }
        }
        Ok(())
    }
}

/// Blank cards between every swing and the top-ranked one.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosenessJudgments {
    pub cards_to_reference: BTreeMap<String, u32>,
    /// Optional direct judgments between other pairs of swings.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<Judgment>,
}

impl ClosenessJudgments {
    pub fn new<S: Into<String>>(cards: impl IntoIterator<Item = (S, u32)>) -> Self {
        ClosenessJudgments {
            cards_to_reference: cards.into_iter().map(|(c, n)| (c.into(), n)).collect(),
            extra: Vec::new(),
        }
    }

    pub fn with_extra(mut self, extra: Vec<Judgment>) -> Self {
        self.extra = extra;
        self
    }
}

/// Per-group closeness cards, worst group first; the top group has none.
fn group_cards(ranking: &SwingRanking, closeness: &ClosenessJudgments) -> Result<Vec<u32>> {
    let (top, rest) = ranking.groups.split_last().expect("validated ranking");
    for c in top {
        if closeness.cards_to_reference.contains_key(c) {
            return Err(Error::InvalidRanking(format!(
                "reference swing {c} cannot carry closeness cards"
            )));
        }
    }
    let known: HashSet<&String> = ranking.criteria().collect();
    if let Some(stray) = closeness.cards_to_reference.keys().find(|c| !known.contains(c)) {
        return Err(Error::InvalidRanking(format!("{stray} is not ranked")));
    }
    rest.iter()
        .map(|group| {
            let mut cards = group.iter().map(|c| {
                closeness
                    .cards_to_reference
                    .get(c)
                    .copied()
                    .ok_or_else(|| Error::MissingCloseness(c.clone()))
            });
            let first = cards.next().expect("non-empty group")?;
            for other in cards {
                if other? != first {
                    return Err(Error::InvalidRanking("tied swings need equal closeness cards".into()));
                }
            }
            Ok(first)
        })
        .collect()
}

/// Checks the closeness judgments with the same transitivity condition used
/// for scale tables, over the table induced by the ranking.
pub fn closeness_report(
    ranking: &SwingRanking,
    closeness: &ClosenessJudgments,
) -> Result<ConsistencyReport> {
    ranking.validate()?;
    let cards = group_cards(ranking, closeness)?;
    let groups = &ranking.groups;
    if groups.len() < 2 {
        return Ok(ConsistencyReport::default());
    }
    let labels: Vec<String> = groups.iter().map(|g| g[0].clone()).collect();
    let mut adjacent: Vec<i64> = cards
        .windows(2)
        .map(|w| (w[0] as i64 - w[1] as i64 - 1).max(0))
        .collect();
    adjacent.push(*cards.last().expect("at least two groups") as i64);
    let levels = labels.iter().map(|l| ScaleLevel::new(l, l)).collect();
    let table = ComparisonTable::new("weights", levels, &adjacent)?;

    let member_of: HashMap<&String, usize> = groups
        .iter()
        .enumerate()
        .flat_map(|(i, g)| g.iter().map(move |c| (c, i)))
        .collect();
    let top = &labels[labels.len() - 1];
    let mut judgments: Vec<Judgment> = cards
        .iter()
        .zip(&labels)
        .map(|(&c, label)| Judgment::new(label, top, c))
        .collect();
    for j in &closeness.extra {
        let (a, b) = match (member_of.get(&j.from), member_of.get(&j.to)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => {
                return Err(Error::InvalidRanking(format!(
                    "judgment {} -> {} names an unranked swing",
                    j.from, j.to
                )))
            }
        };
        if a == b {
            return Err(Error::InvalidRanking(format!(
                "judgment {} -> {} is within one tie group",
                j.from, j.to
            )));
        }
        judgments.push(Judgment::new(&labels[a], &labels[b], j.cards));
    }
    table.validate_consistency(&judgments)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightVector {
    #[serde(with = "serde_ratio")]
    pub z: Exact,
    #[serde(with = "serde_ratio")]
    pub alpha_w: Exact,
    #[serde(with = "serde_ratio::map")]
    pub raw: BTreeMap<String, Exact>,
    #[serde(with = "serde_ratio::map")]
    pub normalized: BTreeMap<String, Exact>,
}

impl WeightVector {
    fn from_raw(z: Exact, alpha_w: Exact, raw: BTreeMap<String, Exact>) -> Self {
        let total: Exact = raw.values().sum();
        let normalized = raw.iter().map(|(c, w)| (c.clone(), w / &total)).collect();
        WeightVector {
            z,
            alpha_w,
            raw,
            normalized,
        }
    }

    /// Multiplies every raw weight by `factor`; normalized weights are unchanged.
    pub fn scaled(&self, factor: &Exact) -> WeightVector {
        let raw = self.raw.iter().map(|(c, w)| (c.clone(), w * factor)).collect();
        WeightVector::from_raw(self.z.clone(), &self.alpha_w * factor, raw)
    }

    pub fn normalized_of(&self, criterion: &str) -> Option<&Exact> {
        self.normalized.get(criterion)
    }
}

pub fn compute_weights(
    ranking: &SwingRanking,
    closeness: &ClosenessJudgments,
    z: &Exact,
) -> Result<WeightVector> {
    let report = closeness_report(ranking, closeness)?;
    if !report.is_consistent() {
        return Err(Error::InconsistentCloseness(report));
    }
    let cards = group_cards(ranking, closeness)?;
    let one = Exact::one();
    if ranking.groups.len() == 1 {
        if *z != one {
            return Err(Error::InvalidZ(crate::exact::to_ratio_string(z)));
        }
        let raw = ranking.criteria().map(|c| (c.clone(), one.clone())).collect();
        return Ok(WeightVector::from_raw(one, Exact::zero(), raw));
    }
    let lowest_cards = cards[0];
    if *z < one || (*z == one && lowest_cards > 0) {
        return Err(Error::InvalidZ(crate::exact::to_ratio_string(z)));
    }
    let alpha_w = (z - &one) / int(lowest_cards as i64 + 1);
    let mut raw = BTreeMap::new();
    for (group, &c) in ranking.groups.iter().zip(&cards) {
        let w = &one + &alpha_w * int(lowest_cards as i64 - c as i64);
        for criterion in group {
            raw.insert(criterion.clone(), w.clone());
        }
    }
    for criterion in ranking.groups.last().expect("non-empty") {
        raw.insert(criterion.clone(), z.clone());
    }
    Ok(WeightVector::from_raw(z.clone(), alpha_w, raw))
}
