//! Result and sweep exports: a CSV at 2 decimal places for reading, plus a
//! JSON companion holding the exact ratios.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::exact::{to_fixed, Exact};
use crate::framework::{CriteriaFramework, CriterionKind};
use crate::risk::{Category, CategoryCounts, ClassificationResult};
use crate::robustness::{BaselineComparison, SweepResult};

/// Where the exported numbers came from. Deliberately free of timestamps so
/// identical inputs give identical bytes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportProvenance {
    pub engine: String,
    pub session_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elicitation_rounding: Option<u32>,
    /// Settings given on the command line or in the request, overriding the session.
    #[serde(default)]
    pub overrides: BTreeMap<String, String>,
}

impl ExportProvenance {
    pub fn new(session_version: u32) -> Self {
        ExportProvenance {
            engine: format!("dcm-core {}", env!("CARGO_PKG_VERSION")),
            session_version,
            ..Default::default()
        }
    }
}

fn display_number(x: &Exact) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        to_fixed(x, 2)
    }
}

fn write_csv(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

/// One row per ship grouped C1, C2, C3 (fleet order inside a group):
/// `category,ship,<criterion ids...>,total`. Valued criteria show the
/// weighted contribution, accept/reject criteria show their level.
pub fn results_csv(results: &[ClassificationResult], framework: &CriteriaFramework) -> String {
    let criteria: Vec<_> = framework.criteria().collect();
    let mut header = vec!["category".to_string(), "ship".to_string()];
    header.extend(criteria.iter().map(|c| c.id.clone()));
    header.push("total".into());
    let mut rows = vec![header];
    for category in Category::ALL {
        for r in results.iter().filter(|r| r.category == category) {
            let mut row = vec![category.to_string(), r.ship.clone()];
            for c in &criteria {
                row.push(match c.kind {
                    CriterionKind::Valued => r.contributions.get(&c.id).map(|v| to_fixed(v, 2)).unwrap_or_default(),
                    CriterionKind::AcceptReject => r.flags.get(&c.id).cloned().unwrap_or_default(),
                });
            }
            row.push(to_fixed(&r.total, 2));
            rows.push(row);
        }
    }
    write_csv(rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultsExport {
    pub provenance: ExportProvenance,
    pub counts: CategoryCounts,
    pub results: Vec<ClassificationResult>,
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("export serializes");
    s.push('\n');
    s
}

pub fn results_json(results: &[ClassificationResult], provenance: &ExportProvenance) -> String {
    pretty(&ResultsExport {
        provenance: provenance.clone(),
        counts: results.iter().map(|r| &r.category).collect(),
        results: results.to_vec(),
    })
}

pub fn parse_results_json(text: &str) -> crate::Result<ResultsExport> {
    serde_json::from_str(text).map_err(|e| crate::Error::Document(e.to_string()))
}

fn mark(cell: String, differs: bool) -> String {
    if differs {
        cell + "*"
    } else {
        cell
    }
}

/// Category of one ship per grid cell: rows are z values, columns cutoffs.
/// With a baseline, a trailing `baseline` column is added and differing
/// cells carry a `*`.
pub fn sweep_ship_csv(result: &SweepResult, ship: &str, baseline: Option<Category>) -> String {
    let mut header = vec!["z".to_string()];
    header.extend(result.grid.lambda_values.iter().map(display_number));
    if baseline.is_some() {
        header.push("baseline".into());
    }
    let mut rows = vec![header];
    for row_cells in result.rows() {
        let mut row = vec![to_fixed(&row_cells[0].z, 2)];
        for cell in row_cells {
            let cat = cell.category_of(ship);
            let text = cat.map(|c| c.to_string()).unwrap_or_default();
            row.push(mark(text, baseline.is_some() && cat != baseline));
        }
        if let Some(b) = baseline {
            row.push(b.to_string());
        }
        rows.push(row);
    }
    write_csv(rows)
}

/// Ship counts per category for every grid cell: three rows per z value.
pub fn sweep_counts_csv(result: &SweepResult, baseline: Option<CategoryCounts>) -> String {
    let mut header = vec!["z".to_string(), "category".to_string()];
    header.extend(result.grid.lambda_values.iter().map(display_number));
    if baseline.is_some() {
        header.push("baseline".into());
    }
    let mut rows = vec![header];
    for row_cells in result.rows() {
        for category in Category::ALL {
            let mut row = vec![to_fixed(&row_cells[0].z, 2), category.to_string()];
            for cell in row_cells {
                let n = cell.counts.get(category);
                row.push(mark(n.to_string(), baseline.is_some_and(|b| b.get(category) != n)));
            }
            if let Some(b) = baseline {
                row.push(b.get(category).to_string());
            }
            rows.push(row);
        }
    }
    write_csv(rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepExport {
    pub provenance: ExportProvenance,
    pub sweep: SweepResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<BaselineComparison>,
}

pub fn sweep_json(
    result: &SweepResult,
    comparison: Option<&BaselineComparison>,
    provenance: &ExportProvenance,
) -> String {
    pretty(&SweepExport {
        provenance: provenance.clone(),
        sweep: result.clone(),
        comparison: comparison.cloned(),
    })
}

pub fn parse_sweep_json(text: &str) -> crate::Result<SweepExport> {
    serde_json::from_str(text).map_err(|e| crate::Error::Document(e.to_string()))
}
