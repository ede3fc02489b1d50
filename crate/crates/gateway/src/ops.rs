//! Classification and sweep pipelines shared by the CLI and the HTTP service,
//! so both produce the same bytes for the same inputs.

use std::collections::BTreeMap;

use serde::Serialize;

use dcm_core::exact::{to_ratio_string, Exact};
use dcm_core::io::export::{self, ExportProvenance};
use dcm_core::io::fleet::{parse_fleet, Fleet, Strictness};
use dcm_core::io::lists::{map_fleet, parse_reference_lists};
use dcm_core::io::SessionDocument;
use dcm_core::risk::{classify_batch, Category, CategoryCounts, MappingWarning, MissingDataPolicy, PerformanceRecord};
use dcm_core::robustness::{compare_to_baseline, sweep, ScenarioGrid};
use dcm_core::Execution;

use crate::error::{GatewayError, Result};

/// Settings that take precedence over the session's stored values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub lambda_23: Option<Exact>,
    pub lambda_12: Option<Exact>,
    pub z: Option<Exact>,
    pub lenient: bool,
}

impl Overrides {
    fn record(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        if let Some(l) = &self.lambda_23 {
            out.insert("lambda_23".into(), to_ratio_string(l));
        }
        if let Some(l) = &self.lambda_12 {
            out.insert("lambda_12".into(), to_ratio_string(l));
        }
        if let Some(z) = &self.z {
            out.insert("z".into(), to_ratio_string(z));
        }
        if self.lenient {
            out.insert("missing_data".into(), "lenient".into());
        }
        out
    }
}

pub struct Inputs<'a> {
    pub session: &'a SessionDocument,
    pub fleet: &'a str,
    pub lists: Option<&'a str>,
    pub overrides: &'a Overrides,
}

pub struct Prepared {
    pub fleet: Vec<PerformanceRecord>,
    pub warnings: Vec<MappingWarning>,
    pub model: dcm_core::risk::DecisionModel,
    pub policy: dcm_core::risk::ClassificationPolicy,
    pub provenance: ExportProvenance,
}

pub fn prepare(inputs: &Inputs) -> Result<Prepared> {
    let session = inputs.session;
    let o = inputs.overrides;
    let strictness = if o.lenient { Strictness::Lenient } else { Strictness::Strict };
    let missing = if o.lenient { MissingDataPolicy::Lenient } else { MissingDataPolicy::Strict };
    let parsed = parse_fleet(inputs.fleet.as_bytes(), None, &session.framework, strictness)
        .map_err(GatewayError::core("fleet"))?;
    let (fleet, warnings) = match parsed {
        Fleet::Performance(p) => (p, Vec::new()),
        Fleet::Raw(raw) => {
            let text = inputs
                .lists
                .ok_or_else(|| GatewayError::Usage("a raw fleet needs reference lists".into()))?;
            let lists = parse_reference_lists(text).map_err(GatewayError::core("lists"))?;
            map_fleet(&raw, &lists, missing).map_err(GatewayError::core("fleet"))?
        }
    };
    let derived = session.derive_with(o.z.as_ref()).map_err(GatewayError::core("session"))?;
    let model = session.model(&derived).map_err(GatewayError::core("session"))?;
    let mut policy = session.policy.clone();
    if let Some(l) = &o.lambda_23 {
        policy.lambda_23 = l.clone();
    }
    if o.lambda_12.is_some() {
        policy.lambda_12 = o.lambda_12.clone();
    }
    let mut provenance = ExportProvenance::new(session.version);
    provenance.session_author = session.provenance.author.clone();
    provenance.elicitation_rounding = session.elicitation_rounding;
    provenance.overrides = o.record();
    Ok(Prepared {
        fleet,
        warnings,
        model,
        policy,
        provenance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyOutput {
    pub counts: CategoryCounts,
    pub results_csv: String,
    pub results_json: String,
    pub warnings: Vec<MappingWarning>,
}

pub fn classify(inputs: &Inputs, exec: Execution) -> Result<ClassifyOutput> {
    let p = prepare(inputs)?;
    let outcome = classify_batch(&p.fleet, &p.model, &p.policy, exec).map_err(GatewayError::core("classify"))?;
    if let Some(f) = outcome.failures.first() {
        return Err(GatewayError::Usage(format!("ship {}: {}", f.ship, f.error)));
    }
    Ok(ClassifyOutput {
        counts: outcome.counts,
        results_csv: export::results_csv(&outcome.results, &p.model.framework),
        results_json: export::results_json(&outcome.results, &p.provenance),
        warnings: p.warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub counts_csv: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ship_csv: Option<String>,
    pub sweep_json: String,
    pub changed_cells: usize,
}

pub struct SweepParams<'a> {
    pub grid: Option<ScenarioGrid>,
    /// `ship,category` CSV.
    pub baseline: Option<&'a str>,
    pub ship: Option<&'a str>,
}

pub fn run_sweep(inputs: &Inputs, params: &SweepParams, exec: Execution) -> Result<SweepOutput> {
    let p = prepare(inputs)?;
    let grid = params.grid.clone().unwrap_or_else(ScenarioGrid::default_grid);
    let w = &inputs.session.weighting;
    let result = sweep(&p.fleet, &p.model, &w.ranking, &w.closeness, &grid, &p.policy, exec)
        .map_err(GatewayError::core("sweep"))?;
    let baseline = params
        .baseline
        .map(dcm_core::io::fixtures::parse_baseline)
        .transpose()
        .map_err(GatewayError::core("baseline"))?;
    let comparison = baseline
        .as_ref()
        .map(|b| compare_to_baseline(&result, b))
        .transpose()
        .map_err(GatewayError::core("baseline"))?;
    let baseline_counts = baseline.as_ref().map(|b| {
        p.fleet
            .iter()
            .filter_map(|s| b.get(&s.ship))
            .collect::<CategoryCounts>()
    });
    let ship_csv = match params.ship {
        Some(ship) => {
            if !p.fleet.iter().any(|s| s.ship == ship) {
                return Err(GatewayError::Usage(format!("ship {ship} is not in the fleet")));
            }
            let base: Option<Category> = baseline.as_ref().and_then(|b| b.get(ship).copied());
            Some(export::sweep_ship_csv(&result, ship, base))
        }
        None => None,
    };
    Ok(SweepOutput {
        counts_csv: export::sweep_counts_csv(&result, baseline_counts),
        ship_csv,
        sweep_json: export::sweep_json(&result, comparison.as_ref(), &p.provenance),
        changed_cells: comparison.map(|c| c.changed.iter().filter(|x| **x).count()).unwrap_or(0),
    })
}
