//! Sensitivity of the sorting to the C2/C3 cutoff and the top/bottom weight ratio.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ratio, serde_ratio, Exact};
use crate::exec::{map_ordered, Execution};
use crate::risk::{
    evaluate_ship, Category, CategoryCounts, ClassificationPolicy, DecisionModel, PerformanceRecord,
};
use crate::weights::{compute_weights, ClosenessJudgments, SwingRanking, WeightVector};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioGrid {
    #[serde(with = "serde_ratio::vec")]
    pub lambda_values: Vec<Exact>,
    #[serde(with = "serde_ratio::vec")]
    pub z_values: Vec<Exact>,
}

impl ScenarioGrid {
    /// Cutoffs 35..=45 in steps of 1, ratios 3.25..=5.25 in steps of 0.5.
    pub fn default_grid() -> Self {
        ScenarioGrid {
            lambda_values: (35..=45).map(|l| ratio(l, 1)).collect(),
            z_values: (0..5).map(|i| ratio(13 + 2 * i, 4)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, values) in [("lambda", &self.lambda_values), ("z", &self.z_values)] {
            if values.is_empty() {
                return Err(Error::InvalidGrid(format!("no {name} values")));
            }
            if values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGrid(format!("{name} values must be strictly increasing")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShipOutcome {
    pub ship: String,
    pub category: Category,
    #[serde(with = "serde_ratio")]
    pub total: Exact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioCell {
    #[serde(with = "serde_ratio")]
    pub z: Exact,
    #[serde(with = "serde_ratio")]
    pub lambda: Exact,
    pub ships: Vec<ShipOutcome>,
    pub counts: CategoryCounts,
}

impl ScenarioCell {
    pub fn category_of(&self, ship: &str) -> Option<Category> {
        self.ships.iter().find(|s| s.ship == ship).map(|s| s.category)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: ScenarioGrid,
    /// Row-major: one row per z value, one column per lambda value.
    pub cells: Vec<ScenarioCell>,
    pub weights: Vec<WeightVector>,
}

impl SweepResult {
    pub fn cell(&self, z_index: usize, lambda_index: usize) -> &ScenarioCell {
        &self.cells[z_index * self.grid.lambda_values.len() + lambda_index]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[ScenarioCell]> {
        self.cells.chunks(self.grid.lambda_values.len())
    }
}

/// Reclassifies the fleet at every grid cell, recomputing weights per z.
/// Any ship that fails to evaluate aborts the sweep.
pub fn sweep(
    fleet: &[PerformanceRecord],
    model: &DecisionModel,
    ranking: &SwingRanking,
    closeness: &ClosenessJudgments,
    grid: &ScenarioGrid,
    policy: &ClassificationPolicy,
    exec: Execution,
) -> Result<SweepResult> {
    grid.validate()?;
    policy.validate(&model.framework)?;
    let weights: Vec<WeightVector> = grid
        .z_values
        .iter()
        .map(|z| compute_weights(ranking, closeness, z))
        .collect::<Result<_>>()?;
    let models: Vec<DecisionModel> = weights
        .iter()
        .map(|w| model.with_weights(w.clone()))
        .collect::<Result<_>>()?;
    let coords: Vec<(usize, usize)> = (0..grid.z_values.len())
        .flat_map(|zi| (0..grid.lambda_values.len()).map(move |li| (zi, li)))
        .collect();
    let cells = map_ordered(&coords, exec, |&(zi, li)| {
        let cell_policy = policy.clone().with_lambda_23(grid.lambda_values[li].clone());
        let ships = fleet
            .iter()
            .map(|perf| {
                evaluate_ship(perf, &models[zi], &cell_policy).map(|r| ShipOutcome {
                    ship: r.ship,
                    category: r.category,
                    total: r.total,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let counts = ships.iter().map(|s| &s.category).collect();
        Ok(ScenarioCell {
            z: grid.z_values[zi].clone(),
            lambda: grid.lambda_values[li].clone(),
            ships,
            counts,
        })
    });
    Ok(SweepResult {
        grid: grid.clone(),
        cells: cells.into_iter().collect::<Result<_>>()?,
        weights,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDifference {
    #[serde(with = "serde_ratio")]
    pub z: Exact,
    #[serde(with = "serde_ratio")]
    pub lambda: Exact,
    pub ship: String,
    pub baseline: Category,
    pub scenario: Category,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub differences: Vec<CellDifference>,
    /// Row-major flags aligned with `SweepResult::cells`.
    pub changed: Vec<bool>,
}

impl BaselineComparison {
    pub fn is_stable(&self) -> bool {
        self.differences.is_empty()
    }
}

pub fn compare_to_baseline(
    result: &SweepResult,
    baseline: &BTreeMap<String, Category>,
) -> Result<BaselineComparison> {
    let mut differences = Vec::new();
    let mut changed = Vec::with_capacity(result.cells.len());
    for cell in &result.cells {
        let mut any = false;
        for s in &cell.ships {
            let base = *baseline
                .get(&s.ship)
                .ok_or_else(|| Error::MissingBaseline(s.ship.clone()))?;
            if base != s.category {
                any = true;
                differences.push(CellDifference {
                    z: cell.z.clone(),
                    lambda: cell.lambda.clone(),
                    ship: s.ship.clone(),
                    baseline: base,
                    scenario: s.category,
                });
            }
        }
        changed.push(any);
    }
    Ok(BaselineComparison { differences, changed })
}
