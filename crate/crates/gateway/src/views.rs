//! Response shapes: exact ratios next to their 2-decimal display.

use std::collections::BTreeMap;

use serde::Serialize;

use dcm_core::exact::{to_fixed, to_ratio_string, Exact};
use dcm_core::io::{SessionDerived, ValidationReport};
use dcm_core::scale::ValueFunction;
use dcm_core::weights::WeightVector;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Number {
    pub exact: String,
    pub display: String,
}

impl From<&Exact> for Number {
    fn from(x: &Exact) -> Self {
        Number {
            exact: to_ratio_string(x),
            display: to_fixed(x, 2),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointView {
    pub level: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Number>,
    pub value: Number,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValueFunctionView {
    pub criterion: String,
    pub kind: dcm_core::scale::FunctionKind,
    pub alpha: Number,
    pub points: Vec<PointView>,
}

impl From<&ValueFunction> for ValueFunctionView {
    fn from(vf: &ValueFunction) -> Self {
        ValueFunctionView {
            criterion: vf.criterion_id.clone(),
            kind: vf.kind,
            alpha: (&vf.alpha).into(),
            points: vf
                .points
                .iter()
                .map(|p| PointView {
                    level: p.level.clone(),
                    anchor: p.anchor.as_ref().map(Number::from),
                    value: (&p.value).into(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightsView {
    pub z: Number,
    pub alpha_w: Number,
    pub raw: BTreeMap<String, Number>,
    pub normalized: BTreeMap<String, Number>,
}

impl From<&WeightVector> for WeightsView {
    fn from(w: &WeightVector) -> Self {
        let map = |m: &BTreeMap<String, Exact>| m.iter().map(|(k, v)| (k.clone(), v.into())).collect();
        WeightsView {
            z: (&w.z).into(),
            alpha_w: (&w.alpha_w).into(),
            raw: map(&w.raw),
            normalized: map(&w.normalized),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivedView {
    pub value_functions: BTreeMap<String, ValueFunctionView>,
    pub z: Number,
    pub weights: WeightsView,
}

impl From<&SessionDerived> for DerivedView {
    fn from(d: &SessionDerived) -> Self {
        DerivedView {
            value_functions: d.value_functions.iter().map(|(k, v)| (k.clone(), v.into())).collect(),
            z: (&d.z).into(),
            weights: (&d.weights).into(),
        }
    }
}

/// Plain-text summary used by `session show`.
pub fn render_derived(d: &SessionDerived, report: &ValidationReport) -> String {
    let mut out = String::new();
    for vf in d.value_functions.values() {
        out.push_str(&format!("{} (alpha {})\n", vf.criterion_id, to_fixed(&vf.alpha, 4)));
        for p in &vf.points {
            out.push_str(&format!("  {:<8} {:>7}   {}\n", p.level, to_fixed(&p.value, 2), to_ratio_string(&p.value)));
        }
    }
    out.push_str(&format!("z = {} ({})\n", to_fixed(&d.z, 2), to_ratio_string(&d.z)));
    out.push_str("weights\n");
    for (c, w) in &d.weights.normalized {
        out.push_str(&format!(
            "  {:<4} raw {:>7}  normalized {:>6}\n",
            c,
            to_fixed(&d.weights.raw[c], 4),
            to_fixed(w, 4)
        ));
    }
    out.push_str(if report.is_valid() { "valid\n" } else { "INVALID\n" });
    out
}
