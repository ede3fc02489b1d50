//! Criterion scales, blank-card comparison tables and the value functions
//! built from them.
//!
//! A comparison table holds, for each pair of consecutive levels (worst to
//! best), the number of blank cards the decision maker put between them.
//! `k` cards encode a preference difference of `k + 1` units. Non-adjacent
//! entries follow from `e(p, q) = e(p, k) + e(k, q) + 1`.

use std::collections::{BTreeMap, HashSet};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, int, serde_ratio, Exact};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleLevel {
    pub id: String,
    pub label: String,
    /// Position from the worst level (0) to the best (t - 1).
    #[serde(default)]
    pub ordinal: usize,
    #[serde(default, with = "serde_ratio::option", skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Exact>,
}

impl ScaleLevel {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        ScaleLevel {
            id: id.into(),
            label: label.into(),
            ordinal: 0,
            anchor: None,
        }
    }

    pub fn anchored(id: impl Into<String>, label: impl Into<String>, anchor: Exact) -> Self {
        ScaleLevel {
            anchor: Some(anchor),
            ..ScaleLevel::new(id, label)
        }
    }
}

/// A directly stated judgment between two levels, identified by level id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub from: String,
    pub to: String,
    pub cards: u32,
}

impl Judgment {
    pub fn new(from: impl Into<String>, to: impl Into<String>, cards: u32) -> Self {
        Judgment {
            from: from.into(),
            to: to.into(),
            cards,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleViolation {
    pub p: String,
    pub k: String,
    pub q: String,
    pub e_pq: u32,
    pub e_pk: u32,
    pub e_kq: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentConflict {
    pub from: String,
    pub to: String,
    pub supplied: u32,
    pub derived: u32,
}

/// Outcome of a consistency check. Violations are data, not failures.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// Triples `(p, k, q)` with `e(p, q) != e(p, k) + e(k, q) + 1`.
    pub violations: Vec<TripleViolation>,
    /// Supplied entries that disagree with the transitive fill.
    pub conflicts: Vec<JudgmentConflict>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty() && self.conflicts.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub criterion_id: String,
    /// Worst to best.
    pub levels: Vec<ScaleLevel>,
    pub adjacent_cards: Vec<u32>,
    /// Upper triangle, row `p` holds `e(p, q)` for `q = p + 1 .. t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_cards: Option<Vec<Vec<u32>>>,
}

impl ComparisonTable {
    pub fn new(
        criterion_id: impl Into<String>,
        levels: Vec<ScaleLevel>,
        adjacent_cards: &[i64],
    ) -> Result<Self> {
        let t = levels.len();
        if t < 2 {
            return Err(Error::TooFewLevels(t));
        }
        if adjacent_cards.len() != t - 1 {
            return Err(Error::LengthMismatch {
                expected: t - 1,
                got: adjacent_cards.len(),
            });
        }
        let mut seen = HashSet::new();
        for level in &levels {
            if !seen.insert(level.id.as_str()) {
                return Err(Error::DuplicateLevel(level.id.clone()));
            }
        }
        let mut cards = Vec::with_capacity(t - 1);
        for (index, &value) in adjacent_cards.iter().enumerate() {
            if value < 0 {
                return Err(Error::NegativeCardCount { index, value });
            }
            cards.push(u32::try_from(value).map_err(|_| Error::NegativeCardCount { index, value })?);
        }
        let levels = levels
            .into_iter()
            .enumerate()
            .map(|(ordinal, level)| ScaleLevel { ordinal, ..level })
            .collect();
        Ok(ComparisonTable {
            criterion_id: criterion_id.into(),
            levels,
            adjacent_cards: cards,
            full_cards: None,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level_index(&self, id: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.id == id)
    }

    fn index_or_err(&self, id: &str) -> Result<usize> {
        self.level_index(id).ok_or_else(|| Error::UnknownLevel {
            criterion: self.criterion_id.clone(),
            level: id.to_string(),
        })
    }

    /// Checks the structural invariants a deserialized table may violate.
    pub fn check_shape(&self) -> Result<()> {
        let t = self.levels.len();
        if t < 2 {
            return Err(Error::TooFewLevels(t));
        }
        if self.adjacent_cards.len() != t - 1 {
            return Err(Error::LengthMismatch {
                expected: t - 1,
                got: self.adjacent_cards.len(),
            });
        }
        let mut seen = HashSet::new();
        for level in &self.levels {
            if !seen.insert(level.id.as_str()) {
                return Err(Error::DuplicateLevel(level.id.clone()));
            }
        }
        Ok(())
    }

    /// Cards between levels `p < q` implied by the adjacent judgments.
    pub fn derived_cards(&self, p: usize, q: usize) -> u32 {
        debug_assert!(p < q);
        self.adjacent_cards[p..q].iter().map(|c| c + 1).sum::<u32>() - 1
    }

    /// Units (`cards + 1` summed along the chain) from the worst level to `k`.
    pub fn unit_position(&self, k: usize) -> u32 {
        self.adjacent_cards[..k].iter().map(|c| c + 1).sum()
    }

    /// Populates every `e(p, q)` from the adjacent diagonal.
    pub fn fill_transitive(&self) -> ComparisonTable {
        let t = self.levels.len();
        let mut rows: Vec<Vec<u32>> = (0..t.saturating_sub(1))
            .map(|p| {
                let mut row = vec![0; t - 1 - p];
                row[0] = self.adjacent_cards[p];
                row
            })
            .collect();
        for span in 2..t {
            for p in 0..t - span {
                let q = p + span;
                // e(p, q) = e(p, q - 1) + e(q - 1, q) + 1
                rows[p][q - p - 1] = rows[p][q - p - 2] + self.adjacent_cards[q - 1] + 1;
            }
        }
        ComparisonTable {
            full_cards: Some(rows),
            ..self.clone()
        }
    }

    /// Entry `e(p, q)` as currently stored (falls back to the derived value).
    pub fn cards(&self, p: usize, q: usize) -> u32 {
        self.full_cards
            .as_ref()
            .and_then(|rows| rows.get(p))
            .and_then(|row| row.get(q - p - 1))
            .copied()
            .unwrap_or_else(|| self.derived_cards(p, q))
    }

    /// Checks stored full-table entries and any extra judgments against the
    /// transitive fill of the adjacent cards.
    pub fn validate_consistency(&self, extra: &[Judgment]) -> Result<ConsistencyReport> {
        self.check_shape()?;
        let t = self.levels.len();
        let mut merged: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for p in 0..t {
            for q in p + 1..t {
                merged.insert((p, q), self.derived_cards(p, q));
            }
        }
        let mut report = ConsistencyReport::default();
        let mut overlay = |p: usize, q: usize, supplied: u32, report: &mut ConsistencyReport| {
            let derived = self.derived_cards(p, q);
            if supplied != derived {
                report.conflicts.push(JudgmentConflict {
                    from: self.levels[p].id.clone(),
                    to: self.levels[q].id.clone(),
                    supplied,
                    derived,
                });
            }
            merged.insert((p, q), supplied);
        };
        if let Some(rows) = &self.full_cards {
            for (p, row) in rows.iter().enumerate().take(t - 1) {
                for (offset, &value) in row.iter().enumerate() {
                    let q = p + offset + 1;
                    if q < t {
                        overlay(p, q, value, &mut report);
                    }
                }
            }
        }
        for judgment in extra {
            let a = self.index_or_err(&judgment.from)?;
            let b = self.index_or_err(&judgment.to)?;
            if a == b {
                return Err(Error::IdenticalReferences);
            }
            overlay(a.min(b), a.max(b), judgment.cards, &mut report);
        }
        for p in 0..t {
            for k in p + 1..t {
                for q in k + 1..t {
                    let (e_pq, e_pk, e_kq) = (merged[&(p, q)], merged[&(p, k)], merged[&(k, q)]);
                    if e_pq != e_pk + e_kq + 1 {
                        report.violations.push(TripleViolation {
                            p: self.levels[p].id.clone(),
                            k: self.levels[k].id.clone(),
                            q: self.levels[q].id.clone(),
                            e_pq,
                            e_pk,
                            e_kq,
                        });
                    }
                }
            }
        }
        Ok(report)
    }

    fn reference_indices(&self, refs: &ReferenceAssignment) -> Result<(usize, usize)> {
        if refs.low_level == refs.high_level {
            return Err(Error::IdenticalReferences);
        }
        let low = self.index_or_err(&refs.low_level)?;
        let high = self.index_or_err(&refs.high_level)?;
        if low > high {
            return Err(Error::ReferenceOrder {
                low: refs.low_level.clone(),
                high: refs.high_level.clone(),
            });
        }
        if refs.low_value >= refs.high_value {
            return Err(Error::ReferenceValues);
        }
        Ok((low, high))
    }

    /// The elementary unit: reference value span over the units between the
    /// two reference levels.
    pub fn compute_alpha(&self, refs: &ReferenceAssignment) -> Result<Exact> {
        self.check_shape()?;
        let (low, high) = self.reference_indices(refs)?;
        let units = self.unit_position(high) - self.unit_position(low);
        Ok((&refs.high_value - &refs.low_value) / int(units as i64))
    }

    pub fn build_value_function(
        &self,
        refs: &ReferenceAssignment,
        kind: FunctionKind,
        direction: Direction,
    ) -> Result<ValueFunction> {
        let report = self.validate_consistency(&[])?;
        if !report.is_consistent() {
            return Err(Error::InconsistentTable {
                criterion: self.criterion_id.clone(),
                report,
            });
        }
        let (low, _) = self.reference_indices(refs)?;
        let alpha = self.compute_alpha(refs)?;
        if kind == FunctionKind::PiecewiseLinear {
            let mut previous: Option<&Exact> = None;
            for level in &self.levels {
                let anchor = level.anchor.as_ref().ok_or_else(|| Error::MissingAnchor {
                    criterion: self.criterion_id.clone(),
                    level: level.id.clone(),
                })?;
                if let Some(prev) = previous {
                    let ordered = match direction {
                        Direction::Maximize => anchor > prev,
                        Direction::Minimize => anchor < prev,
                    };
                    if !ordered {
                        return Err(Error::AnchorsNotMonotone(self.criterion_id.clone()));
                    }
                }
                previous = Some(anchor);
            }
        }
        let origin = self.unit_position(low) as i64;
        let points = self
            .levels
            .iter()
            .enumerate()
            .map(|(k, level)| {
                let offset = self.unit_position(k) as i64 - origin;
                ValuePoint {
                    level: level.id.clone(),
                    anchor: level.anchor.clone(),
                    value: &refs.low_value + &alpha * int(offset),
                }
            })
            .collect();
        Ok(ValueFunction {
            criterion_id: self.criterion_id.clone(),
            kind,
            direction,
            points,
            alpha,
            low_reference: refs.low_level.clone(),
            high_reference: refs.high_level.clone(),
            domain_min: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceAssignment {
    pub low_level: String,
    pub high_level: String,
    #[serde(with = "serde_ratio")]
    pub low_value: Exact,
    #[serde(with = "serde_ratio")]
    pub high_value: Exact,
}

impl ReferenceAssignment {
    pub fn new(
        low_level: impl Into<String>,
        low_value: Exact,
        high_level: impl Into<String>,
        high_value: Exact,
    ) -> Self {
        ReferenceAssignment {
            low_level: low_level.into(),
            high_level: high_level.into(),
            low_value,
            high_value,
        }
    }

    /// The usual 0..100 anchoring on the given worst and best levels.
    pub fn zero_to_hundred(worst: impl Into<String>, best: impl Into<String>) -> Self {
        ReferenceAssignment::new(worst, int(0), best, int(100))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionKind {
    Discrete,
    PiecewiseLinear,
}

/// A criterion performance: a level id, or a number on a continuous scale.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Performance {
    Level(String),
    Numeric(#[serde(with = "serde_ratio")] Exact),
}

impl Performance {
    pub fn level(id: impl Into<String>) -> Self {
        Performance::Level(id.into())
    }

    pub fn as_level(&self) -> Option<&str> {
        match self {
            Performance::Level(id) => Some(id),
            Performance::Numeric(_) => None,
        }
    }
}

impl std::fmt::Display for Performance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Performance::Level(id) => f.write_str(id),
            Performance::Numeric(x) => {
                if x.is_integer() {
                    write!(f, "{}", x.numer())
                } else {
                    f.write_str(&exact::to_ratio_string(x))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuePoint {
    pub level: String,
    #[serde(default, with = "serde_ratio::option", skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Exact>,
    #[serde(with = "serde_ratio")]
    pub value: Exact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueFunction {
    pub criterion_id: String,
    pub kind: FunctionKind,
    pub direction: Direction,
    /// Worst to best.
    pub points: Vec<ValuePoint>,
    #[serde(with = "serde_ratio")]
    pub alpha: Exact,
    pub low_reference: String,
    pub high_reference: String,
    /// Numeric performances below this are rejected.
    #[serde(default, with = "serde_ratio::option", skip_serializing_if = "Option::is_none")]
    pub domain_min: Option<Exact>,
}

impl ValueFunction {
    pub fn with_domain_min(mut self, min: Exact) -> Self {
        self.domain_min = Some(min);
        self
    }

    /// Copy rebuilt from `alpha` rounded half-up to `dp` decimals, as when the
    /// unit is read off a printed scale. Both reference values are kept.
    pub fn rounded(&self, dp: u32) -> ValueFunction {
        let mut out = self.clone();
        let alpha = exact::round_half_up(&self.alpha, dp);
        let origin = self
            .value_of_level(&self.low_reference)
            .cloned()
            .unwrap_or_else(|| self.worst().value.clone());
        for point in &mut out.points {
            if point.level == self.low_reference || point.level == self.high_reference {
                continue;
            }
            let offset = (&point.value - &origin) / &self.alpha;
            point.value = &origin + &alpha * offset;
        }
        out.alpha = alpha;
        out
    }

    pub fn value_of_level(&self, id: &str) -> Option<&Exact> {
        self.points.iter().find(|p| p.level == id).map(|p| &p.value)
    }

    pub fn worst(&self) -> &ValuePoint {
        &self.points[0]
    }

    pub fn best(&self) -> &ValuePoint {
        self.points.last().expect("value function has points")
    }

    pub fn evaluate(&self, performance: &Performance) -> Result<Exact> {
        match performance {
            Performance::Level(id) => {
                self.value_of_level(id)
                    .cloned()
                    .ok_or_else(|| Error::UnknownLevel {
                        criterion: self.criterion_id.clone(),
                        level: id.clone(),
                    })
            }
            Performance::Numeric(x) => self.evaluate_numeric(x),
        }
    }

    pub fn evaluate_numeric(&self, x: &Exact) -> Result<Exact> {
        if self.kind == FunctionKind::Discrete {
            return Err(Error::NumericOnDiscrete(self.criterion_id.clone()));
        }
        if let Some(min) = &self.domain_min {
            if x < min {
                return Err(Error::BelowDomain {
                    criterion: self.criterion_id.clone(),
                    value: exact::to_ratio_string(x),
                    min: exact::to_ratio_string(min),
                });
            }
        }
        let mut curve: Vec<(&Exact, &Exact)> = self
            .points
            .iter()
            .filter_map(|p| p.anchor.as_ref().map(|a| (a, &p.value)))
            .collect();
        curve.sort_by(|a, b| a.0.cmp(b.0));
        let (first, last) = (curve[0], curve[curve.len() - 1]);
        if x <= first.0 {
            return Ok(first.1.clone());
        }
        if x >= last.0 {
            return Ok(last.1.clone());
        }
        let i = curve.windows(2).position(|w| x <= w[1].0).unwrap_or(0);
        let ((x0, y0), (x1, y1)) = (curve[i], curve[i + 1]);
        let span = x1 - x0;
        if span.is_zero() {
            return Ok(y0.clone());
        }
        Ok(y0 + (y1 - y0) * (x - x0) / span)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ratio, to_fixed};
    use proptest::prelude::*;

    fn g2_levels() -> Vec<ScaleLevel> {
        [("l2.6", 25), ("l2.5", 20), ("l2.4", 15), ("l2.3", 10), ("l2.2", 5), ("l2.1", 0)]
            .into_iter()
            .map(|(id, age)| ScaleLevel::anchored(id, format!("{age} years"), int(age)))
            .collect()
    }

    fn g2_table() -> ComparisonTable {
        ComparisonTable::new("g2", g2_levels(), &[0, 2, 3, 3, 4]).unwrap()
    }

    fn discrete(ids: &[&str], cards: &[i64]) -> ComparisonTable {
        let levels = ids.iter().map(|id| ScaleLevel::new(*id, *id)).collect();
        ComparisonTable::new("g", levels, cards).unwrap()
    }

    fn g2_function() -> ValueFunction {
        g2_table()
            .fill_transitive()
            .build_value_function(
                &ReferenceAssignment::zero_to_hundred("l2.6", "l2.1"),
                FunctionKind::PiecewiseLinear,
                Direction::Minimize,
            )
            .unwrap()
            .with_domain_min(int(0))
    }

    #[test]
    fn new_table_keeps_adjacent_diagonal() {
        let table = g2_table();
        assert_eq!(table.adjacent_cards, vec![0, 2, 3, 3, 4]);
        assert!(table.full_cards.is_none());
        assert_eq!(table.levels[5].ordinal, 5);
    }

    #[test]
    fn new_table_rejects_bad_input() {
        assert_eq!(
            ComparisonTable::new("g2", g2_levels(), &[0, 2, 3, 3, -1]),
            Err(Error::NegativeCardCount { index: 4, value: -1 })
        );
        assert_eq!(
            ComparisonTable::new("g2", g2_levels(), &[0, 2]),
            Err(Error::LengthMismatch { expected: 5, got: 2 })
        );
        let dup = vec![ScaleLevel::new("a", "a"), ScaleLevel::new("a", "b")];
        assert_eq!(
            ComparisonTable::new("g", dup, &[0]),
            Err(Error::DuplicateLevel("a".into()))
        );
        assert_eq!(
            ComparisonTable::new("g", vec![ScaleLevel::new("a", "a")], &[]),
            Err(Error::TooFewLevels(1))
        );
    }

    #[test]
    fn two_level_table_is_minimal() {
        let table = discrete(&["high", "low"], &[0]);
        assert_eq!(table.fill_transitive().full_cards, Some(vec![vec![0]]));
        let refs = ReferenceAssignment::zero_to_hundred("high", "low");
        assert_eq!(table.compute_alpha(&refs).unwrap(), int(100));
    }

    #[test]
    fn g2_fill_matches_comparison_table() {
        let filled = g2_table().fill_transitive();
        let expected = vec![
            vec![0, 3, 7, 11, 16],
            vec![2, 6, 10, 15],
            vec![3, 7, 12],
            vec![3, 8],
            vec![4],
        ];
        assert_eq!(filled.full_cards, Some(expected));
        assert_eq!(filled.cards(0, 2), 3);
        assert_eq!(filled.cards(0, 5), 16);
    }

    #[test]
    fn three_level_fill() {
        let filled = discrete(&["a", "b", "c"], &[4, 9]).fill_transitive();
        assert_eq!(filled.cards(0, 2), 4 + 9 + 1);
    }

    #[test]
    fn table4_closeness_matrix_is_consistent() {
        let ids = ["s3", "s4", "s6", "s1", "s8", "s5", "s2"];
        let table = discrete(&ids, &[1, 2, 2, 3, 2, 4]);
        let full = [
            vec![1, 4, 7, 11, 14, 19],
            vec![2, 5, 9, 12, 17],
            vec![2, 6, 9, 14],
            vec![3, 6, 11],
            vec![2, 7],
            vec![4],
        ];
        let mut extra = Vec::new();
        for (p, row) in full.iter().enumerate() {
            for (o, &c) in row.iter().enumerate() {
                extra.push(Judgment::new(ids[p], ids[p + o + 1], c));
            }
        }
        let report = table.validate_consistency(&extra).unwrap();
        assert!(report.is_consistent(), "{report:?}");
    }

    #[test]
    fn overridden_entry_is_flagged() {
        let report = g2_table()
            .validate_consistency(&[Judgment::new("l2.6", "l2.3", 5)])
            .unwrap();
        assert!(!report.is_consistent());
        assert_eq!(report.conflicts[0].derived, 7);
        assert!(report.violations.contains(&TripleViolation {
            p: "l2.6".into(),
            k: "l2.5".into(),
            q: "l2.3".into(),
            e_pq: 5,
            e_pk: 0,
            e_kq: 6,
        }));
    }

    #[test]
    fn tampered_full_cards_fail_value_function_build() {
        let mut table = g2_table().fill_transitive();
        table.full_cards.as_mut().unwrap()[0][4] = 15;
        let err = table
            .build_value_function(
                &ReferenceAssignment::zero_to_hundred("l2.6", "l2.1"),
                FunctionKind::PiecewiseLinear,
                Direction::Minimize,
            )
            .unwrap_err();
        assert!(matches!(err, Error::InconsistentTable { .. }));
    }

    #[test]
    fn fresh_fill_is_consistent() {
        let report = g2_table().fill_transitive().validate_consistency(&[]).unwrap();
        assert!(report.is_consistent());
    }

    #[test]
    fn alpha_examples() {
        let refs = ReferenceAssignment::zero_to_hundred("l2.6", "l2.1");
        assert_eq!(g2_table().compute_alpha(&refs).unwrap(), ratio(100, 17));
        let g3 = discrete(&["high", "medium", "low"], &[2, 4]);
        let refs = ReferenceAssignment::zero_to_hundred("high", "low");
        assert_eq!(g3.compute_alpha(&refs).unwrap(), ratio(25, 2));
        let same = ReferenceAssignment::zero_to_hundred("high", "high");
        assert_eq!(g3.compute_alpha(&same), Err(Error::IdenticalReferences));
        let reversed = ReferenceAssignment::zero_to_hundred("low", "high");
        assert!(matches!(g3.compute_alpha(&reversed), Err(Error::ReferenceOrder { .. })));
    }

    #[test]
    fn g2_value_function_points() {
        let vf = g2_function();
        let values: Vec<Exact> = vf.points.iter().map(|p| p.value.clone()).collect();
        assert_eq!(
            values,
            vec![int(0), ratio(100, 17), ratio(400, 17), ratio(800, 17), ratio(1200, 17), int(100)]
        );
        let shown: Vec<String> = values.iter().map(|v| to_fixed(v, 2)).collect();
        assert_eq!(shown, ["0.00", "5.88", "23.53", "47.06", "70.59", "100.00"]);
    }

    #[test]
    fn appendix_value_functions() {
        let build = |ids: &[&str], cards: &[i64]| {
            let t = discrete(ids, cards);
            let refs = ReferenceAssignment::zero_to_hundred(ids[0], ids[ids.len() - 1]);
            t.build_value_function(&refs, FunctionKind::Discrete, Direction::Maximize)
                .unwrap()
        };
        let g6 = build(&["very low", "low", "medium", "high"], &[2, 4, 6]);
        let shown: Vec<String> = g6.points.iter().map(|p| to_fixed(&p.value, 2)).collect();
        assert_eq!(shown, ["0.00", "20.00", "53.33", "100.00"]);
        let g8 = build(&["low", "medium", "high"], &[3, 3]);
        assert_eq!(g8.value_of_level("medium"), Some(&int(50)));
        let g4 = build(&["more", "one", "no"], &[3, 4]);
        assert_eq!(g4.value_of_level("one"), Some(&ratio(400, 9)));
    }

    #[test]
    fn g2_interpolation() {
        let vf = g2_function();
        let at = |x: Exact| vf.evaluate(&Performance::Numeric(x)).unwrap();
        assert_eq!(to_fixed(&at(int(3)), 2), "82.35");
        assert_eq!(to_fixed(&vf.rounded(2).evaluate_numeric(&int(3)).unwrap(), 2), "82.34");
        assert_eq!(at(int(0)), int(100));
        assert_eq!(at(int(22)), ratio(60, 17));
        assert_eq!(at(int(30)), int(0));
        assert_eq!(at(int(15)), ratio(400, 17));
        assert_eq!(at(ratio(5, 2)), (int(100) + ratio(1200, 17)) / int(2));
        assert!(matches!(
            vf.evaluate(&Performance::Numeric(int(-3))),
            Err(Error::BelowDomain { .. })
        ));
        assert_eq!(vf.evaluate(&Performance::level("l2.4")).unwrap(), ratio(400, 17));
        assert!(matches!(
            vf.evaluate(&Performance::level("nope")),
            Err(Error::UnknownLevel { .. })
        ));
    }

    #[test]
    fn discrete_rejects_numbers_and_piecewise_needs_anchors() {
        let t = discrete(&["a", "b"], &[0]);
        let refs = ReferenceAssignment::zero_to_hundred("a", "b");
        let vf = t
            .build_value_function(&refs, FunctionKind::Discrete, Direction::Maximize)
            .unwrap();
        assert_eq!(
            vf.evaluate(&Performance::Numeric(int(1))),
            Err(Error::NumericOnDiscrete("g".into()))
        );
        assert!(matches!(
            t.build_value_function(&refs, FunctionKind::PiecewiseLinear, Direction::Maximize),
            Err(Error::MissingAnchor { .. })
        ));
        // ages increasing from worst to best contradict minimisation
        let mut levels = g2_levels();
        levels.reverse();
        let bad = ComparisonTable::new("g2", levels, &[0, 0, 0, 0, 0]).unwrap();
        let refs = ReferenceAssignment::zero_to_hundred("l2.1", "l2.6");
        assert_eq!(
            bad.build_value_function(&refs, FunctionKind::PiecewiseLinear, Direction::Minimize),
            Err(Error::AnchorsNotMonotone("g2".into()))
        );
    }

    #[test]
    fn non_extreme_references_extrapolate() {
        // references on the middle levels; outer levels extend by the same unit
        let t = discrete(&["a", "b", "c", "d"], &[1, 2, 0]);
        let refs = ReferenceAssignment::new("b", int(0), "c", int(30));
        let vf = t
            .build_value_function(&refs, FunctionKind::Discrete, Direction::Maximize)
            .unwrap();
        assert_eq!(vf.alpha, int(10));
        let values: Vec<Exact> = vf.points.iter().map(|p| p.value.clone()).collect();
        assert_eq!(values, vec![int(-20), int(0), int(30), int(40)]);
    }

    #[test]
    fn zero_cards_give_uniform_staircase() {
        let t = discrete(&["a", "b", "c", "d", "e"], &[0, 0, 0, 0]);
        let vf = t
            .build_value_function(
                &ReferenceAssignment::zero_to_hundred("a", "e"),
                FunctionKind::Discrete,
                Direction::Maximize,
            )
            .unwrap();
        let values: Vec<Exact> = vf.points.iter().map(|p| p.value.clone()).collect();
        assert_eq!(values, vec![int(0), int(25), int(50), int(75), int(100)]);
    }

    fn table_strategy(max_t: usize) -> impl Strategy<Value = ComparisonTable> {
        (2..=max_t).prop_flat_map(|t| {
            proptest::collection::vec(0i64..12, t - 1).prop_map(move |cards| {
                let ids: Vec<String> = (0..t).map(|i| format!("l{i}")).collect();
                let levels = ids.iter().map(|id| ScaleLevel::new(id, id)).collect();
                ComparisonTable::new("g", levels, &cards).unwrap()
            })
        })
    }

    /// Values by walking unit steps from the worst level; independent of the
    /// table's fill and position helpers.
    fn staircase_oracle(cards: &[u32], low: usize, high: usize) -> Vec<Exact> {
        let mut steps = vec![0i64];
        for c in cards {
            let last = *steps.last().unwrap();
            steps.push(last + *c as i64 + 1);
        }
        let span = steps[high] - steps[low];
        steps
            .iter()
            .map(|s| ratio(100 * (s - steps[low]), span))
            .collect()
    }

    proptest! {
        #[test]
        fn fill_is_idempotent(table in table_strategy(8)) {
            let once = table.fill_transitive();
            prop_assert_eq!(once.fill_transitive(), once);
        }

        #[test]
        fn fill_is_path_independent(table in table_strategy(8)) {
            let filled = table.fill_transitive();
            let t = filled.len();
            for p in 0..t {
                for k in p + 1..t {
                    for q in k + 1..t {
                        prop_assert_eq!(filled.cards(p, q), filled.cards(p, k) + filled.cards(k, q) + 1);
                    }
                }
            }
        }

        #[test]
        fn values_strictly_increase(table in table_strategy(8)) {
            let refs = ReferenceAssignment::zero_to_hundred("l0", format!("l{}", table.len() - 1));
            let vf = table.build_value_function(&refs, FunctionKind::Discrete, Direction::Maximize).unwrap();
            for w in vf.points.windows(2) {
                prop_assert!(&w[1].value - &w[0].value >= vf.alpha);
            }
        }

        #[test]
        fn card_sensitivity(table in table_strategy(7), pick in 0usize..6) {
            let t = table.len();
            let i = pick % (t - 1);
            let refs = ReferenceAssignment::zero_to_hundred("l0", format!("l{}", t - 1));
            let mut cards: Vec<i64> = table.adjacent_cards.iter().map(|&c| c as i64).collect();
            cards[i] += 1;
            let bumped = ComparisonTable::new("g", table.levels.clone(), &cards).unwrap();
            let vf = bumped.build_value_function(&refs, FunctionKind::Discrete, Direction::Maximize).unwrap();
            // the bumped pair now spans one more unit of the recomputed alpha
            let gap = &vf.points[i + 1].value - &vf.points[i].value;
            prop_assert_eq!(gap, &vf.alpha * int(cards[i] + 1));
            for w in vf.points.windows(2) {
                prop_assert!(w[1].value > w[0].value);
            }
        }

        #[test]
        fn oracle_matches_build(table in table_strategy(6), lo in 0usize..6, hi in 0usize..6) {
            let t = table.len();
            let (low, high) = (lo % t, hi % t);
            prop_assume!(low < high);
            let refs = ReferenceAssignment::zero_to_hundred(format!("l{low}"), format!("l{high}"));
            let vf = table.build_value_function(&refs, FunctionKind::Discrete, Direction::Maximize).unwrap();
            let got: Vec<Exact> = vf.points.iter().map(|p| p.value.clone()).collect();
            prop_assert_eq!(got, staircase_oracle(&table.adjacent_cards, low, high));
        }

        #[test]
        fn interpolation_exact_at_anchors(cards in proptest::collection::vec(0i64..10, 5), base in 0i64..5) {
            let levels = (0..6).map(|i| ScaleLevel::anchored(format!("l{i}"), "", int(base + 3 * i as i64))).collect();
            let table = ComparisonTable::new("g", levels, &cards).unwrap();
            let vf = table.build_value_function(
                &ReferenceAssignment::zero_to_hundred("l0", "l5"),
                FunctionKind::PiecewiseLinear,
                Direction::Maximize,
            ).unwrap();
            for p in &vf.points {
                prop_assert_eq!(&vf.evaluate_numeric(p.anchor.as_ref().unwrap()).unwrap(), &p.value);
            }
        }
    }
}
