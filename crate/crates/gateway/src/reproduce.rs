//! Runs the bundled sample through the whole pipeline and compares every
//! published figure, table by table.

use std::collections::BTreeMap;

use dcm_core::exact::{parse_exact, ratio, round_half_up, to_fixed, Exact};
use dcm_core::io::SessionDocument;
use dcm_core::risk::{classify_batch, Category, PerformanceRecord};
use dcm_core::robustness::{sweep, ScenarioGrid};
use dcm_core::scale::Performance;
use dcm_core::Execution;

use crate::error::{GatewayError, Result};

pub const VALUE_FUNCTIONS: [(&str, &[&str]); 6] = [
    ("g2", &["0", "5.88", "23.53", "47.06", "70.59", "100"]),
    ("g3", &["0", "37.5", "100"]),
    ("g4", &["0", "44.44", "100"]),
    ("g5", &["0", "37.5", "100"]),
    ("g6", &["0", "20.00", "53.33", "100"]),
    ("g8", &["0", "50", "100"]),
];

/// Valued criteria in column order, then the published row for each ship:
/// contributions g1..g6, g8, then the total.
pub const VALUED: [&str; 7] = ["g1", "g2", "g3", "g4", "g5", "g6", "g8"];
pub const TABLE_RESULTS: [(&str, Category, [&str; 8]); 10] = [
    ("a4", Category::C1, ["0.00", "21.96", "5.86", "7.76", "20.13", "10.61", "17.28", "83.60"]),
    ("a10", Category::C1, ["0.00", "10.54", "5.86", "7.76", "20.13", "10.61", "17.28", "72.18"]),
    ("a1", Category::C2, ["13.47", "3.22", "5.86", "7.76", "7.55", "10.61", "17.28", "65.75"]),
    ("a2", Category::C2, ["13.47", "4.10", "5.86", "7.76", "7.55", "10.61", "17.28", "66.63"]),
    ("a3", Category::C2, ["13.47", "15.22", "2.20", "7.76", "7.55", "10.61", "17.28", "74.09"]),
    ("a5", Category::C2, ["13.47", "11.71", "5.86", "7.76", "7.55", "10.61", "17.28", "74.24"]),
    ("a7", Category::C2, ["0.00", "10.54", "5.86", "7.76", "7.55", "10.61", "17.28", "59.59"]),
    ("a8", Category::C2, ["0.00", "5.85", "2.20", "7.76", "7.55", "10.61", "17.28", "51.25"]),
    ("a9", Category::C2, ["13.47", "0.00", "5.86", "7.76", "7.55", "10.61", "17.28", "62.53"]),
    ("a6", Category::C3, ["0.00", "0.88", "2.20", "7.76", "0.00", "10.61", "17.28", "38.73"]),
];

pub const RAW_WEIGHTS: [(&str, &str); 7] = [
    ("g1", "2.3"),
    ("g2", "4.25"),
    ("g3", "1"),
    ("g4", "1.325"),
    ("g5", "3.4375"),
    ("g6", "1.8125"),
    ("g8", "2.95"),
];
pub const NORMALIZED_WEIGHTS: [(&str, &str); 7] = [
    ("g1", "0.13"),
    ("g2", "0.25"),
    ("g3", "0.06"),
    ("g4", "0.08"),
    ("g5", "0.20"),
    ("g6", "0.11"),
    ("g8", "0.17"),
];

/// Robustness grid for a6: z row, and the index of the first cutoff
/// (35, 36, ...) at which a6 is C3.
pub const SWEEP_SHIP: &str = "a6";
pub const SWEEP_FIRST_C3: [(&str, usize); 5] = [("3.25", 6), ("3.75", 5), ("4.25", 4), ("4.75", 4), ("5.25", 3)];
pub const SWEEP_TOTALS: [(&str, &str); 2] = [("3.25", "40.27"), ("5.25", "37.66")];
pub const HYBRID_LAMBDA_12: i64 = 70;
pub const HYBRID_C1: [&str; 4] = ["a3", "a4", "a5", "a10"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub table: String,
    pub cell: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    fn push(&mut self, table: &str, cell: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>, pass: bool) {
        self.checks.push(Check {
            table: table.into(),
            cell: cell.into(),
            expected: expected.into(),
            actual: actual.into(),
            pass,
        });
    }

    fn equal(&mut self, table: &str, cell: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>) {
        let (e, a) = (expected.into(), actual.into());
        let pass = e == a;
        self.push(table, cell, e, a, pass);
    }

    /// Displayed value within 0.01 of the published figure.
    fn near(&mut self, table: &str, cell: impl Into<String>, expected: &str, actual: &Exact) {
        let e = parse_exact(expected).expect("published figure");
        let shown = round_half_up(actual, 2);
        let diff = if shown > e { &shown - &e } else { &e - &shown };
        let pass = diff <= ratio(1, 100);
        self.push(table, cell, expected, to_fixed(actual, 2), pass);
    }

    /// One line per table plus one per mismatching cell.
    pub fn render(&self) -> String {
        let mut tables: Vec<&str> = Vec::new();
        for c in &self.checks {
            if !tables.contains(&c.table.as_str()) {
                tables.push(&c.table);
            }
        }
        let mut out = String::new();
        for t in tables {
            let rows: Vec<&Check> = self.checks.iter().filter(|c| c.table == t).collect();
            let bad: Vec<&&Check> = rows.iter().filter(|c| !c.pass).collect();
            let status = if bad.is_empty() { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {t} ({}/{} cells)\n", rows.len() - bad.len(), rows.len()));
            for c in bad {
                out.push_str(&format!("    {}: expected {}, got {}\n", c.cell, c.expected, c.actual));
            }
        }
        match self.first_failure() {
            None => out.push_str("PASS all published figures reproduced\n"),
            Some(c) => out.push_str(&format!(
                "FAIL first mismatch: {} / {}: expected {}, got {}\n",
                c.table, c.cell, c.expected, c.actual
            )),
        }
        out
    }
}

pub struct Scenario {
    pub z: Option<Exact>,
    pub lambda_23: Option<Exact>,
}

fn check_value_functions(report: &mut Report, session: &SessionDocument) -> Result<()> {
    let derived = session.derive().map_err(GatewayError::core("session"))?;
    for (criterion, expected) in VALUE_FUNCTIONS {
        let table = format!("value function {criterion}");
        let Some(vf) = derived.value_functions.get(criterion) else {
            report.equal(&table, "present", "yes", "no");
            continue;
        };
        if vf.points.len() != expected.len() {
            report.equal(&table, "levels", expected.len().to_string(), vf.points.len().to_string());
            continue;
        }
        for (p, e) in vf.points.iter().zip(expected) {
            report.near(&table, format!("level {}", p.level), e, &p.value);
        }
    }
    let g2 = &derived.value_functions["g2"];
    let at3 = g2.evaluate(&Performance::Numeric(ratio(3, 1))).map_err(GatewayError::core("g2"))?;
    report.near("value function g2", "age 3", "82.34", &at3);
    Ok(())
}

fn check_weights(report: &mut Report, session: &SessionDocument) -> Result<()> {
    let derived = session.derive().map_err(GatewayError::core("session"))?;
    let w = &derived.weights;
    let exact = |s: &str| parse_exact(s).expect("published figure");
    report.equal("weights", "z", "4.25", to_fixed(&derived.z, 2));
    report.push("weights", "z exact", "17/4", dcm_core::exact::to_ratio_string(&derived.z), derived.z == exact("4.25"));
    report.push("weights", "alpha", "0.1625", to_fixed(&w.alpha_w, 4), w.alpha_w == exact("0.1625"));
    for (c, e) in RAW_WEIGHTS {
        let actual = w.raw.get(c).cloned().unwrap_or_default();
        report.push("weights", format!("raw {c}"), e, to_fixed(&actual, 4), actual == exact(e));
    }
    for (c, e) in NORMALIZED_WEIGHTS {
        let actual = w.normalized.get(c).cloned().unwrap_or_default();
        report.equal("weights", format!("normalized {c}"), e, to_fixed(&actual, 2));
    }
    Ok(())
}

fn check_results(report: &mut Report, session: &SessionDocument, fleet: &[PerformanceRecord], exec: Execution, strict: bool) -> Result<()> {
    let table = if strict { "results (rounded elicitation)" } else { "results" };
    let derived = session.derive().map_err(GatewayError::core("session"))?;
    let model = session.model(&derived).map_err(GatewayError::core("session"))?;
    let outcome = classify_batch(fleet, &model, &session.policy, exec).map_err(GatewayError::core("classify"))?;
    let by_ship: BTreeMap<&str, _> = outcome.results.iter().map(|r| (r.ship.as_str(), r)).collect();
    for (ship, category, row) in TABLE_RESULTS {
        let Some(r) = by_ship.get(ship) else {
            report.equal(table, ship.to_string(), "present", "missing");
            continue;
        };
        report.equal(table, format!("{ship} category"), category.to_string(), r.category.to_string());
        let zero = Exact::default();
        for (i, c) in VALUED.iter().enumerate() {
            let v = r.contributions.get(*c).unwrap_or(&zero);
            let cell = format!("{ship} {c}");
            if strict {
                report.equal(table, cell, row[i], to_fixed(v, 2));
            } else {
                report.near(table, cell, row[i], v);
            }
        }
        if strict {
            report.equal(table, format!("{ship} total"), row[7], to_fixed(&r.total, 2));
        } else {
            report.near(table, format!("{ship} total"), row[7], &r.total);
        }
    }
    Ok(())
}

fn check_sweep(report: &mut Report, session: &SessionDocument, fleet: &[PerformanceRecord], exec: Execution, scenario: &Scenario) -> Result<()> {
    let derived = session.derive().map_err(GatewayError::core("session"))?;
    let model = session.model(&derived).map_err(GatewayError::core("session"))?;
    let mut grid = ScenarioGrid::default_grid();
    if let Some(z) = &scenario.z {
        grid.z_values = vec![z.clone()];
    }
    let w = &session.weighting;
    let result = sweep(fleet, &model, &w.ranking, &w.closeness, &grid, &session.policy, exec)
        .map_err(GatewayError::core("sweep"))?;
    let table = "robustness";
    for (zi, row) in result.rows().enumerate() {
        let z = to_fixed(&grid.z_values[zi], 2);
        let Some((_, first)) = SWEEP_FIRST_C3.iter().find(|(pz, _)| *pz == z) else {
            report.equal(table, format!("z={z}"), "a published row", "none");
            continue;
        };
        for (li, cell) in row.iter().enumerate() {
            // A fixed z checks its whole row; a cutoff alone checks its column.
            if let (None, Some(l)) = (&scenario.z, &scenario.lambda_23) {
                if &cell.lambda != l {
                    continue;
                }
            }
            let expected = if li >= *first { Category::C3 } else { Category::C2 };
            let actual = cell.category_of(SWEEP_SHIP).map(|c| c.to_string()).unwrap_or_default();
            report.equal(table, format!("z={z} lambda={}", cell.lambda), expected.to_string(), actual);
        }
        if let Some((_, total)) = SWEEP_TOTALS.iter().find(|(pz, _)| *pz == z) {
            if let Some(s) = row[0].ships.iter().find(|s| s.ship == SWEEP_SHIP) {
                report.near(table, format!("z={z} total"), total, &s.total);
            }
        }
    }
    if let Some(l) = &scenario.lambda_23 {
        if !grid.lambda_values.contains(l) {
            report.equal(table, format!("lambda={l}"), "a published column", "none");
        }
    }
    Ok(())
}

fn check_hybrid(report: &mut Report, session: &SessionDocument, fleet: &[PerformanceRecord], exec: Execution) -> Result<()> {
    let derived = session.derive().map_err(GatewayError::core("session"))?;
    let model = session.model(&derived).map_err(GatewayError::core("session"))?;
    let policy = session.policy.clone().with_lambda_12(Some(ratio(HYBRID_LAMBDA_12, 1)));
    let outcome = classify_batch(fleet, &model, &policy, exec).map_err(GatewayError::core("classify"))?;
    let c1: Vec<&str> = outcome
        .results
        .iter()
        .filter(|r| r.category == Category::C1)
        .map(|r| r.ship.as_str())
        .collect();
    report.equal("hybrid cutoff", "C1", HYBRID_C1.join(" "), c1.join(" "));
    Ok(())
}

/// Full comparison, or with a scenario only the matching robustness row or column.
pub fn reproduce(
    session: &SessionDocument,
    fleet: &[PerformanceRecord],
    scenario: &Scenario,
    exec: Execution,
) -> Result<Report> {
    let mut report = Report::default();
    if scenario.z.is_some() || scenario.lambda_23.is_some() {
        check_sweep(&mut report, session, fleet, exec, scenario)?;
        return Ok(report);
    }
    check_value_functions(&mut report, session)?;
    check_weights(&mut report, session)?;
    check_results(&mut report, session, fleet, exec, false)?;
    let mut rounded = session.clone();
    rounded.elicitation_rounding = Some(2);
    check_results(&mut report, &rounded, fleet, exec, true)?;
    check_sweep(&mut report, session, fleet, exec, scenario)?;
    check_hybrid(&mut report, session, fleet, exec)?;
    Ok(report)
}
