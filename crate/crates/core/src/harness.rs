//! Base scenario (three cases) and the two sensitivity sweeps.
//!
//! * Case 1: the count model, solved separately on each agent's pool.
//! * Case 2: the HLA-gated model, solved separately on each agent's pool.
//! * Case 3: the gated model on the merged pool with each agent's Case 1
//!   result as its floor. If the floors cannot be met, the status is kept and
//!   the merged model is solved again without floors.
//!
//! The threshold sweep reuses one instance for every row. The pool-size
//! sweep draws a fresh instance per row with seed `seed + size`, or, with
//! [`PoolSizing::Nested`], takes per-agent prefixes of one instance drawn at
//! the largest size.

use rayon::prelude::*;

use crate::compat::build_compat;
use crate::domain::{Instance, ModelConfig, ObjectiveMode};
use crate::error::{Error, Result};
use crate::generator::{generate, GenConfig};
use crate::models::{build_model1, build_model2, build_model3};
use crate::solver::{solve, SolveReport, SolveStatus};

#[derive(Debug, Clone)]
pub struct BaseScenario {
    pub l_hla: i64,
    pub objective_mode: ObjectiveMode,
    /// Case 1, one report per agent.
    pub model1: Vec<SolveReport>,
    /// Case 2, one report per agent.
    pub model2: Vec<SolveReport>,
    pub floors: Vec<u32>,
    /// Case 3.
    pub model3: SolveReport,
    /// Case 3 without floors, present only when the floors were infeasible.
    pub model3_relaxed: Option<SolveReport>,
}

impl BaseScenario {
    pub fn model1_per_agent(&self) -> Vec<u32> {
        standalone_counts(&self.model1)
    }

    pub fn model2_per_agent(&self) -> Vec<u32> {
        standalone_counts(&self.model2)
    }

    /// Floor-respecting Case 3 counts, or `None` if the floors were infeasible.
    pub fn model3_per_agent(&self) -> Option<Vec<u32>> {
        (self.model3.status == SolveStatus::Optimal)
            .then(|| self.model3.solution.transplants_per_agent.clone())
    }

    /// Case 3 counts as reported: floor-respecting if feasible, else without floors.
    pub fn model3_reported(&self) -> Vec<u32> {
        match &self.model3_relaxed {
            Some(r) if self.model3.status == SolveStatus::InfeasibleFloors => {
                r.solution.transplants_per_agent.clone()
            }
            _ => self.model3.solution.transplants_per_agent.clone(),
        }
    }
}

fn standalone_counts(reports: &[SolveReport]) -> Vec<u32> {
    reports.iter().map(|r| r.solution.transplants_total).collect()
}

pub fn run_base_scenario(cfg: &GenConfig, l_hla: i64, mode: ObjectiveMode) -> Result<BaseScenario> {
    run_base_scenario_on(&generate(cfg)?, l_hla, mode)
}

pub fn run_base_scenario_on(inst: &Instance, l_hla: i64, mode: ObjectiveMode) -> Result<BaseScenario> {
    let compat = build_compat(inst)?;
    let gated = ModelConfig::model2(l_hla, mode);

    let mut model1 = Vec::with_capacity(inst.num_agents());
    let mut model2 = Vec::with_capacity(inst.num_agents());
    for agent in 0..inst.num_agents() {
        let pool = inst.agent_pool(agent);
        model1.push(solve(&build_model1(inst, &compat, &pool)?)?);
        model2.push(solve(&build_model2(inst, &compat, &gated, &pool)?)?);
    }
    let floors = standalone_counts(&model1);

    let spec = build_model3(inst, &compat, &ModelConfig::model3(l_hla, floors.clone(), mode))?;
    let model3 = solve(&spec)?;
    let model3_relaxed = match model3.status {
        SolveStatus::Optimal => None,
        SolveStatus::InfeasibleFloors => Some(solve(&spec.without_floors())?),
    };
    Ok(BaseScenario {
        l_hla,
        objective_mode: mode,
        model1,
        model2,
        floors,
        model3,
        model3_relaxed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptParam {
    LHla,
    PairsPerAgent,
}

impl SweptParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweptParam::LHla => "l_hla",
            SweptParam::PairsPerAgent => "pairs_per_agent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoolSizing {
    /// A new instance per size, seeded with `seed + size`.
    #[default]
    Fresh,
    /// Per-agent prefixes of one instance drawn at the largest size.
    Nested,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub value: i64,
    pub model1_per_agent: Vec<u32>,
    pub model2_per_agent: Vec<u32>,
    /// Floor-respecting counts when `model3_status` is optimal, otherwise the
    /// counts without floors.
    pub model3_per_agent: Vec<u32>,
    pub model3_status: SolveStatus,
    pub floors: Vec<u32>,
}

impl SweepRow {
    fn from_base(value: i64, base: &BaseScenario) -> Self {
        SweepRow {
            value,
            model1_per_agent: base.model1_per_agent(),
            model2_per_agent: base.model2_per_agent(),
            model3_per_agent: base.model3_reported(),
            model3_status: base.model3.status,
            floors: base.floors.clone(),
        }
    }

    pub fn model1_total(&self) -> u32 {
        self.model1_per_agent.iter().sum()
    }

    pub fn model2_total(&self) -> u32 {
        self.model2_per_agent.iter().sum()
    }

    pub fn model3_total(&self) -> u32 {
        self.model3_per_agent.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepResult {
    pub swept_param: SweptParam,
    pub rows: Vec<SweepRow>,
}

fn check_ascending(values: &[i64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidConfig(format!("{what} list is empty")));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!(
            "{what} list must be strictly ascending"
        )));
    }
    Ok(())
}

pub fn sweep_lhla(cfg: &GenConfig, thresholds: &[i64], mode: ObjectiveMode) -> Result<SweepResult> {
    sweep_lhla_on(&generate(cfg)?, thresholds, mode)
}

/// Threshold sweep on a fixed instance.
pub fn sweep_lhla_on(inst: &Instance, thresholds: &[i64], mode: ObjectiveMode) -> Result<SweepResult> {
    check_ascending(thresholds, "threshold")?;
    let rows = thresholds
        .par_iter()
        .map(|&l| Ok(SweepRow::from_base(l, &run_base_scenario_on(inst, l, mode)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        swept_param: SweptParam::LHla,
        rows,
    })
}

pub fn sweep_pool_size(
    base_cfg: &GenConfig,
    sizes: &[usize],
    l_hla: i64,
    mode: ObjectiveMode,
    sizing: PoolSizing,
) -> Result<SweepResult> {
    check_ascending(&sizes.iter().map(|&s| s as i64).collect::<Vec<_>>(), "size")?;
    if sizes[0] == 0 {
        return Err(Error::InvalidConfig("pool sizes must be positive".into()));
    }
    let largest = match sizing {
        PoolSizing::Nested => Some(generate(&GenConfig {
            pairs_per_agent: *sizes.last().expect("checked nonempty"),
            ..base_cfg.clone()
        })?),
        PoolSizing::Fresh => None,
    };
    let rows = sizes
        .par_iter()
        .map(|&size| {
            let inst = match &largest {
                Some(full) => full.agent_prefix(size),
                None => generate(&GenConfig {
                    seed: base_cfg.seed.wrapping_add(size as u64),
                    pairs_per_agent: size,
                    ..base_cfg.clone()
                })?,
            };
            let base = run_base_scenario_on(&inst, l_hla, mode)?;
            Ok(SweepRow::from_base(size as i64, &base))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        swept_param: SweptParam::PairsPerAgent,
        rows,
    })
}
