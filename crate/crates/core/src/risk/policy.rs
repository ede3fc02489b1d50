use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, serde_ratio, Exact};
use crate::framework::{CriteriaFramework, CriterionKind};

/// Risk categories, best first: low, standard and high risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    C1,
    C2,
    C3,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::C1, Category::C2, Category::C3];

    pub fn parse(token: &str) -> Option<Category> {
        match token.trim().to_uppercase().as_str() {
            "C1" | "LRS" => Some(Category::C1),
            "C2" | "SRS" => Some(Category::C2),
            "C3" | "HRS" => Some(Category::C3),
            _ => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::C1 => "C1",
            Category::C2 => "C2",
            Category::C3 => "C3",
        })
    }
}

/// Criterion whose worst level sends a ship straight to C3 when the override is on.
pub const OVERRIDE_CRITERION: &str = "g3";
pub const OVERRIDE_LEVEL: &str = "high";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationPolicy {
    /// Minimum level per criterion for C1; criteria not listed accept any level.
    pub c1_rules: BTreeMap<String, String>,
    /// Totals at or below this value fall in C3.
    #[serde(with = "serde_ratio")]
    pub lambda_23: Exact,
    /// Hybrid mode: C1 by total above this value plus the accept/reject rules.
    #[serde(default, with = "serde_ratio::option", skip_serializing_if = "Option::is_none")]
    pub lambda_12: Option<Exact>,
    #[serde(default = "default_true")]
    pub g3_high_override: bool,
}

fn default_true() -> bool {
    true
}

impl ClassificationPolicy {
    /// Low-risk rule set with a C2/C3 cutoff of 40.
    pub fn port_state_control() -> Self {
        let rules = [
            ("g3", "low"),
            ("g4", "no"),
            ("g5", "high"),
            ("g6", "high"),
            ("g7", "yes"),
            ("g8", "high"),
            ("g9", "yes"),
        ];
        ClassificationPolicy {
            c1_rules: rules.iter().map(|(c, l)| (c.to_string(), l.to_string())).collect(),
            lambda_23: int(40),
            lambda_12: None,
            g3_high_override: true,
        }
    }

    pub fn with_lambda_23(mut self, lambda: Exact) -> Self {
        self.lambda_23 = lambda;
        self
    }

    pub fn with_lambda_12(mut self, lambda: Option<Exact>) -> Self {
        self.lambda_12 = lambda;
        self
    }

    pub fn validate(&self, framework: &CriteriaFramework) -> Result<()> {
        for (criterion, level) in &self.c1_rules {
            let c = framework.criterion(criterion)?;
            if c.continuous {
                return Err(Error::InvalidPolicy(format!("rule on continuous criterion {criterion}")));
            }
            if c.level_ordinal(level).is_none() {
                return Err(Error::UnknownLevel {
                    criterion: criterion.clone(),
                    level: level.clone(),
                });
            }
        }
        if let Some(l12) = &self.lambda_12 {
            if *l12 <= self.lambda_23 {
                return Err(Error::InvalidPolicy("lambda_12 must exceed lambda_23".into()));
            }
        }
        if self.g3_high_override {
            let c = framework.criterion(OVERRIDE_CRITERION)?;
            if c.level_ordinal(OVERRIDE_LEVEL).is_none() {
                return Err(Error::InvalidPolicy("override level missing from framework".into()));
            }
        }
        Ok(())
    }

    /// Rules that stay hard in hybrid mode.
    pub fn hybrid_rules<'a>(
        &'a self,
        framework: &'a CriteriaFramework,
    ) -> impl Iterator<Item = (&'a String, &'a String)> + 'a {
        self.c1_rules.iter().filter(move |(c, _)| {
            framework
                .criterion(c)
                .map(|c| c.kind == CriterionKind::AcceptReject)
                .unwrap_or(false)
        })
    }
}
