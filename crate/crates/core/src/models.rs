//! Builds the three exchange models as explicit binary programs.
//!
//! Every model has one binary variable per unordered feasible pair `{i, j}`
//! (`i < j`): selecting it means patient `i` receives from donor `j` and
//! patient `j` from donor `i`. Since HLA scores are parameters, the HLA gate
//! of the gated models is resolved while building and simply removes
//! variables. What remains is
//!
//! * one degree cap per pair (each patient receives at most one kidney),
//! * for the multi-agent model, one lower bound per agent on the kidneys its
//!   patients receive: a match adds one kidney to the agent of each endpoint,
//!   so an intra-agent match adds two.

use crate::compat::CompatMatrix;
use crate::domain::{Instance, Match, ModelConfig, ModelKind, ObjectiveMode};
use crate::error::{Error, Result};
use crate::solver::{self, SolveStatus};

/// The variables touching one pair; at most one of them may be selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeCap {
    pub pair: usize,
    pub variables: Vec<usize>,
}

/// `sum(coef * x[var]) >= min_kidneys` for one agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentFloor {
    pub agent: usize,
    pub min_kidneys: u32,
    pub terms: Vec<(usize, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub objective_mode: ObjectiveMode,
    pub l_hla: Option<i64>,
    pub num_agents: usize,
    /// Owning agent of every pair of the instance (global indexing).
    pub pair_agent: Vec<usize>,
    /// Pairs in scope, ascending.
    pub pool: Vec<usize>,
    /// Canonical variables, lexicographically ordered.
    pub variables: Vec<Match>,
    pub objective_weight: Vec<i64>,
    pub degree_caps: Vec<DegreeCap>,
    pub agent_floors: Option<Vec<AgentFloor>>,
}

impl ModelSpec {
    pub fn num_pairs(&self) -> usize {
        self.pair_agent.len()
    }

    /// Checks a selection of variable indices against every constraint of the
    /// program, reading only the constraint rows.
    pub fn check(&self, selected: &[usize]) -> std::result::Result<(), String> {
        let mut chosen = vec![false; self.variables.len()];
        for &v in selected {
            if v >= self.variables.len() {
                return Err(format!("variable {v} does not exist"));
            }
            if std::mem::replace(&mut chosen[v], true) {
                return Err(format!("variable {v} selected twice"));
            }
        }
        for cap in &self.degree_caps {
            let used = cap.variables.iter().filter(|&&v| chosen[v]).count();
            if used > 1 {
                return Err(format!("pair {} receives {used} kidneys", cap.pair));
            }
        }
        for floor in self.agent_floors.iter().flatten() {
            let got: u32 = floor
                .terms
                .iter()
                .filter(|(v, _)| chosen[*v])
                .map(|(_, coef)| coef)
                .sum();
            if got < floor.min_kidneys {
                return Err(format!(
                    "agent {} receives {got} kidneys, floor {}",
                    floor.agent, floor.min_kidneys
                ));
            }
        }
        Ok(())
    }

    /// Objective value of a selection.
    pub fn objective(&self, selected: &[usize]) -> i64 {
        selected.iter().map(|&v| self.objective_weight[v]).sum()
    }

    /// The same program without agent floors.
    pub fn without_floors(&self) -> ModelSpec {
        ModelSpec {
            agent_floors: None,
            ..self.clone()
        }
    }
}

/// Whether both directions of `{i, j}` meet the HLA threshold. Both are
/// needed because a selected swap performs both transplants.
pub fn hla_gate_eligible(inst: &Instance, i: usize, j: usize, l_hla: i64) -> Result<bool> {
    inst.check_index(i)?;
    inst.check_index(j)?;
    if i == j {
        return Err(Error::SelfMatch(i));
    }
    Ok(inst.hla_score[i][j] >= l_hla && inst.hla_score[j][i] >= l_hla)
}

/// Count-maximising model restricted to `pool`.
pub fn build_model1(inst: &Instance, compat: &CompatMatrix, pool: &[usize]) -> Result<ModelSpec> {
    assemble(inst, compat, pool, &ModelConfig::model1())
}

/// HLA-gated model restricted to `pool`.
pub fn build_model2(
    inst: &Instance,
    compat: &CompatMatrix,
    cfg: &ModelConfig,
    pool: &[usize],
) -> Result<ModelSpec> {
    if cfg.kind != ModelKind::Model2 {
        return Err(Error::InvalidConfig(format!(
            "expected Model2 config, got {:?}",
            cfg.kind
        )));
    }
    assemble(inst, compat, pool, cfg)
}

/// HLA-gated model over every pair of every agent, with per-agent floors.
pub fn build_model3(inst: &Instance, compat: &CompatMatrix, cfg: &ModelConfig) -> Result<ModelSpec> {
    if cfg.kind != ModelKind::Model3 {
        return Err(Error::InvalidConfig(format!(
            "expected Model3 config, got {:?}",
            cfg.kind
        )));
    }
    let pool: Vec<usize> = (0..inst.len()).collect();
    assemble(inst, compat, &pool, cfg)
}

/// Builds whichever model `cfg` names; Model1/Model2 use `pool`, Model3 the
/// whole instance.
pub fn build_model(
    inst: &Instance,
    compat: &CompatMatrix,
    cfg: &ModelConfig,
    pool: &[usize],
) -> Result<ModelSpec> {
    match cfg.kind {
        ModelKind::Model1 => build_model1(inst, compat, pool),
        ModelKind::Model2 => build_model2(inst, compat, cfg, pool),
        ModelKind::Model3 => build_model3(inst, compat, cfg),
    }
}

/// Per-agent standalone optimum of the count model, in kidneys.
pub fn compute_fairness_floors(inst: &Instance, compat: &CompatMatrix) -> Result<Vec<u32>> {
    (0..inst.num_agents())
        .map(|agent| {
            let spec = build_model1(inst, compat, &inst.agent_pool(agent))?;
            let report = solver::solve(&spec)?;
            debug_assert_eq!(report.status, SolveStatus::Optimal);
            Ok(report.solution.transplants_total)
        })
        .collect()
}

fn assemble(inst: &Instance, compat: &CompatMatrix, pool: &[usize], cfg: &ModelConfig) -> Result<ModelSpec> {
    let n = inst.len();
    if compat.len() != n {
        return Err(Error::MalformedModel(format!(
            "compatibility matrix covers {} pairs, instance has {n}",
            compat.len()
        )));
    }
    let mut pool = pool.to_vec();
    pool.sort_unstable();
    pool.dedup();
    if let Some(&last) = pool.last() {
        inst.check_index(last)?;
    }

    let gate = match cfg.kind {
        ModelKind::Model1 => None,
        ModelKind::Model2 | ModelKind::Model3 => {
            let l = cfg
                .l_hla
                .ok_or_else(|| Error::InvalidConfig(format!("{:?} requires an HLA threshold", cfg.kind)))?;
            if l < 0 {
                return Err(Error::InvalidConfig(format!("negative HLA threshold {l}")));
            }
            Some(l)
        }
    };
    let mode = match cfg.kind {
        ModelKind::Model1 => ObjectiveMode::CountOnly,
        _ => cfg.objective_mode,
    };

    let mut variables = Vec::new();
    for (a, &i) in pool.iter().enumerate() {
        for &j in &pool[a + 1..] {
            if !compat.c[i][j] {
                continue;
            }
            if let Some(l) = gate {
                if !hla_gate_eligible(inst, i, j, l)? {
                    continue;
                }
            }
            variables.push((i, j));
        }
    }
    let objective_weight = variables
        .iter()
        .map(|&(i, j)| match mode {
            ObjectiveMode::CountOnly => 1,
            ObjectiveMode::AsWritten => compat.hla_total[i][j],
        })
        .collect();

    let degree_caps = pool
        .iter()
        .map(|&p| DegreeCap {
            pair: p,
            variables: variables
                .iter()
                .enumerate()
                .filter(|(_, &(i, j))| i == p || j == p)
                .map(|(v, _)| v)
                .collect(),
        })
        .collect();

    let pair_agent = inst.pair_agents();
    let agent_floors = match cfg.kind {
        ModelKind::Model3 => {
            let floors = cfg
                .fairness_floors
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("Model3 requires fairness floors".into()))?;
            if floors.len() != inst.num_agents() {
                return Err(Error::InvalidConfig(format!(
                    "{} fairness floors for {} agents",
                    floors.len(),
                    inst.num_agents()
                )));
            }
            Some(
                floors
                    .iter()
                    .enumerate()
                    .map(|(agent, &min_kidneys)| AgentFloor {
                        agent,
                        min_kidneys,
                        terms: variables
                            .iter()
                            .enumerate()
                            .filter_map(|(v, &(i, j))| {
                                let coef =
                                    u32::from(pair_agent[i] == agent) + u32::from(pair_agent[j] == agent);
                                (coef > 0).then_some((v, coef))
                            })
                            .collect(),
                    })
                    .collect(),
            )
        }
        _ => None,
    };

    Ok(ModelSpec {
        kind: cfg.kind,
        objective_mode: mode,
        l_hla: gate,
        num_agents: inst.num_agents(),
        pair_agent,
        pool,
        variables,
        objective_weight,
        degree_caps,
        agent_floors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::build_compat;
    use crate::solver::solve;
    use crate::testutil::graph_instance;

    fn all(inst: &Instance) -> Vec<usize> {
        (0..inst.len()).collect()
    }

    #[test]
    fn gate_requires_both_directions() {
        let mut inst = graph_instance(&[0, 0, 0], &[(1, 2)], 0);
        inst.hla_score[1][2] = 255;
        inst.hla_score[2][1] = 210;
        assert!(hla_gate_eligible(&inst, 1, 2, 210).unwrap());
        inst.hla_score[2][1] = 205;
        assert!(!hla_gate_eligible(&inst, 1, 2, 210).unwrap());
        assert!(hla_gate_eligible(&inst, 1, 2, 0).unwrap());
        assert!(matches!(
            hla_gate_eligible(&inst, 2, 2, 0),
            Err(Error::SelfMatch(2))
        ));
    }

    #[test]
    fn model1_two_pairs() {
        let inst = graph_instance(&[0, 0], &[(0, 1)], 100);
        let compat = build_compat(&inst).unwrap();
        let spec = build_model1(&inst, &compat, &all(&inst)).unwrap();
        assert_eq!(spec.variables, vec![(0, 1)]);
        assert_eq!(spec.objective_weight, vec![1]);
        assert!(spec.agent_floors.is_none());
        let r = solve(&spec).unwrap();
        assert_eq!(r.solution.transplants_total, 2);
    }

    #[test]
    fn model1_path_and_cycle() {
        // Brute force: the path 0-1-2 has matchings {}, {01}, {12}, max size 1.
        let inst = graph_instance(&[0; 3], &[(0, 1), (1, 2)], 100);
        let compat = build_compat(&inst).unwrap();
        let r = solve(&build_model1(&inst, &compat, &all(&inst)).unwrap()).unwrap();
        assert_eq!(r.solution.matches.len(), 1);
        assert_eq!(r.solution.transplants_total, 2);

        // The 4-cycle has two perfect matchings.
        let inst = graph_instance(&[0; 4], &[(0, 1), (1, 2), (2, 3), (3, 0)], 100);
        let compat = build_compat(&inst).unwrap();
        let r = solve(&build_model1(&inst, &compat, &all(&inst)).unwrap()).unwrap();
        assert_eq!(r.solution.matches, vec![(0, 1), (2, 3)]);
        assert_eq!(r.solution.transplants_total, 4);
    }

    #[test]
    fn model1_pool_restriction() {
        let inst = graph_instance(&[0, 0, 1, 1], &[(0, 1), (1, 2), (2, 3)], 100);
        let compat = build_compat(&inst).unwrap();
        let spec = build_model1(&inst, &compat, &inst.agent_pool(1)).unwrap();
        assert_eq!(spec.pool, vec![2, 3]);
        assert_eq!(spec.variables, vec![(2, 3)]);
        assert_eq!(spec.degree_caps.len(), 2);
    }

    #[test]
    fn model2_all_below_threshold() {
        let inst = graph_instance(&[0; 4], &[(0, 1), (2, 3)], 150);
        let compat = build_compat(&inst).unwrap();
        let cfg = ModelConfig::model2(210, ObjectiveMode::AsWritten);
        let spec = build_model2(&inst, &compat, &cfg, &all(&inst)).unwrap();
        assert!(spec.variables.is_empty());
        assert_eq!(solve(&spec).unwrap().solution.objective_value, 0);
    }

    #[test]
    fn model2_hla_objective() {
        // Enumerating {} (value 0) and {01} (value 255 + 210) gives 465.
        let mut inst = graph_instance(&[0, 0], &[(0, 1)], 0);
        inst.hla_score[0][1] = 255;
        inst.hla_score[1][0] = 210;
        let compat = build_compat(&inst).unwrap();
        let cfg = ModelConfig::model2(210, ObjectiveMode::AsWritten);
        let spec = build_model2(&inst, &compat, &cfg, &all(&inst)).unwrap();
        assert_eq!(spec.objective_weight, vec![465]);
        let r = solve(&spec).unwrap();
        assert_eq!(r.solution.matches, vec![(0, 1)]);
        assert_eq!(r.solution.objective_value, 465);
        assert_eq!(r.solution.hla_gates, vec![(0, 1), (1, 0)]);

        let count = build_model2(
            &inst,
            &compat,
            &ModelConfig::model2(210, ObjectiveMode::CountOnly),
            &all(&inst),
        )
        .unwrap();
        assert_eq!(count.objective_weight, vec![1]);
    }

    #[test]
    fn model2_gate_is_monotone() {
        let mut inst = graph_instance(&[0; 5], &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)], 0);
        let scores = [205, 210, 255, 150, 300, 360, 230, 225];
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    inst.hla_score[i][j] = scores[(3 * i + j) % scores.len()];
                }
            }
        }
        let compat = build_compat(&inst).unwrap();
        let vars = |l| {
            build_model2(
                &inst,
                &compat,
                &ModelConfig::model2(l, ObjectiveMode::AsWritten),
                &all(&inst),
            )
            .unwrap()
            .variables
        };
        let low = vars(205);
        let high = vars(230);
        assert!(high.iter().all(|v| low.contains(v)));
        assert!(high.len() < low.len());
        let m1 = build_model1(&inst, &compat, &all(&inst)).unwrap().variables;
        assert!(low.iter().all(|v| m1.contains(v)));
    }

    #[test]
    fn model_kind_checked() {
        let inst = graph_instance(&[0, 0], &[(0, 1)], 0);
        let compat = build_compat(&inst).unwrap();
        assert!(build_model2(&inst, &compat, &ModelConfig::model1(), &[0, 1]).is_err());
        assert!(build_model3(&inst, &compat, &ModelConfig::model2(0, ObjectiveMode::AsWritten)).is_err());
        let missing = ModelConfig {
            l_hla: None,
            ..ModelConfig::model2(0, ObjectiveMode::AsWritten)
        };
        assert!(build_model2(&inst, &compat, &missing, &[0, 1]).is_err());
        let wrong_len = ModelConfig::model3(0, vec![0, 0], ObjectiveMode::AsWritten);
        assert!(build_model3(&inst, &compat, &wrong_len).is_err());
        assert!(build_model1(&inst, &compat, &[0, 5]).is_err());
    }

    #[test]
    fn model3_single_agent_matches_model2_plus_floor() {
        let inst = graph_instance(&[0; 4], &[(0, 1), (1, 2), (2, 3)], 250);
        let compat = build_compat(&inst).unwrap();
        let m2 = build_model2(
            &inst,
            &compat,
            &ModelConfig::model2(210, ObjectiveMode::AsWritten),
            &all(&inst),
        )
        .unwrap();
        let m3 = build_model3(
            &inst,
            &compat,
            &ModelConfig::model3(210, vec![4], ObjectiveMode::AsWritten),
        )
        .unwrap();
        assert_eq!(m3.variables, m2.variables);
        assert_eq!(m3.objective_weight, m2.objective_weight);
        assert_eq!(m3.degree_caps, m2.degree_caps);
        assert_eq!(m3.agent_floors.as_ref().unwrap()[0].min_kidneys, 4);
        assert_eq!(
            m3.agent_floors.as_ref().unwrap()[0].terms,
            vec![(0, 2), (1, 2), (2, 2)]
        );
        let r = solve(&m3).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.solution.matches, vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn model3_single_agent_floor_unattainable_under_gate() {
        let mut inst = graph_instance(&[0; 4], &[(0, 1), (1, 2), (2, 3)], 250);
        inst.hla_score[0][1] = 100;
        let compat = build_compat(&inst).unwrap();
        let floors = compute_fairness_floors(&inst, &compat).unwrap();
        assert_eq!(floors, vec![4]);
        let m3 = build_model3(
            &inst,
            &compat,
            &ModelConfig::model3(210, floors, ObjectiveMode::AsWritten),
        )
        .unwrap();
        assert_eq!(solve(&m3).unwrap().status, SolveStatus::InfeasibleFloors);
    }

    #[test]
    fn model3_cross_edge_counts_one_per_agent() {
        // Only solutions: {} and {01}; floors (0, 0) admit both, {01} wins.
        let inst = graph_instance(&[0, 1], &[(0, 1)], 300);
        let compat = build_compat(&inst).unwrap();
        let spec = build_model3(
            &inst,
            &compat,
            &ModelConfig::model3(210, vec![0, 0], ObjectiveMode::AsWritten),
        )
        .unwrap();
        let floors = spec.agent_floors.as_ref().unwrap();
        assert_eq!(floors[0].terms, vec![(0, 1)]);
        assert_eq!(floors[1].terms, vec![(0, 1)]);
        let r = solve(&spec).unwrap();
        assert_eq!(r.solution.matches, vec![(0, 1)]);
        assert_eq!(r.solution.transplants_per_agent, vec![1, 1]);
    }

    #[test]
    fn model3_floor_forces_lighter_matching() {
        // Path 0-1-2-3, agents (0, 1, 1, 0), weights 01 = 600, 12 = 1300,
        // 23 = 600. Matchings: {} 0, {01} 600, {12} 1300, {23} 600,
        // {01,23} 1200. Only {01,23} gives agent 0 two kidneys.
        let mut inst = graph_instance(&[0, 1, 1, 0], &[(0, 1), (1, 2), (2, 3)], 300);
        inst.hla_score[1][2] = 650;
        inst.hla_score[2][1] = 650;
        let compat = build_compat(&inst).unwrap();
        let free = build_model3(
            &inst,
            &compat,
            &ModelConfig::model3(210, vec![0, 0], ObjectiveMode::AsWritten),
        )
        .unwrap();
        let r = solve(&free).unwrap();
        assert_eq!(r.solution.matches, vec![(1, 2)]);
        assert_eq!(r.solution.objective_value, 1300);

        let floored = build_model3(
            &inst,
            &compat,
            &ModelConfig::model3(210, vec![2, 0], ObjectiveMode::AsWritten),
        )
        .unwrap();
        let r = solve(&floored).unwrap();
        assert_eq!(r.solution.matches, vec![(0, 1), (2, 3)]);
        assert_eq!(r.solution.objective_value, 1200);
        assert_eq!(r.solution.transplants_per_agent, vec![2, 2]);
    }

    #[test]
    fn floors_from_standalone_counts() {
        // agent 0: no internal edge; agent 1: single edge; agent 2: five pairs
        // forming a 5-cycle, whose maximum matching has size 2.
        let mut agents = vec![0, 0, 1, 1];
        agents.extend([2; 5]);
        let edges = [(0, 2), (2, 3), (4, 5), (5, 6), (6, 7), (7, 8), (8, 4)];
        let inst = graph_instance(&agents, &edges, 100);
        let compat = build_compat(&inst).unwrap();
        assert_eq!(compute_fairness_floors(&inst, &compat).unwrap(), vec![0, 2, 4]);
    }

    #[test]
    fn variables_are_lexicographic() {
        let inst = graph_instance(&[0; 5], &[(3, 4), (0, 4), (1, 2), (0, 1)], 100);
        let compat = build_compat(&inst).unwrap();
        let spec = build_model1(&inst, &compat, &[4, 3, 2, 1, 0]).unwrap();
        assert_eq!(spec.variables, vec![(0, 1), (0, 4), (1, 2), (3, 4)]);
        assert_eq!(spec.degree_caps[0].variables, vec![0, 1]);
        assert!(spec.check(&[0, 3]).is_ok());
        assert!(spec.check(&[0, 1]).is_err());
    }
}
