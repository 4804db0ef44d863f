//! Core data types: blood types, donor–patient pairs, instances, model
//! configuration and solutions.
//!
//! Pairs carry a single dense global index (their position in
//! [`Instance::pairs`]). Agents own pairs through `agent_id`; an agent's pool
//! is recovered by filtering on it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BloodType {
    O,
    A,
    B,
    AB,
}

impl BloodType {
    /// All four types, in the fixed order used by categorical draws.
    pub const ALL: [BloodType; 4] = [BloodType::O, BloodType::A, BloodType::B, BloodType::AB];

    pub fn as_str(self) -> &'static str {
        match self {
            BloodType::O => "O",
            BloodType::A => "A",
            BloodType::B => "B",
            BloodType::AB => "AB",
        }
    }
}

impl fmt::Display for BloodType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BloodType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "O" => Ok(BloodType::O),
            "A" => Ok(BloodType::A),
            "B" => Ok(BloodType::B),
            "AB" => Ok(BloodType::AB),
            other => Err(Error::UnknownBloodType(other.to_string())),
        }
    }
}

/// A participating agent (hospital, region, country).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Agent {
    pub id: usize,
    pub name: String,
}

/// One incompatible donor–patient pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRecord {
    /// Index within the owning agent's pool.
    pub pair_id: usize,
    pub agent_id: usize,
    pub patient_blood: BloodType,
    pub donor_blood: BloodType,
}

/// A full exchange problem.
///
/// `pra_compat[i][j] == 1` iff the patient of pair `i` is PRA-compatible with
/// the donor of pair `j`. `hla_score[i][j]` is the directional HLA score
/// between patient `i` and donor `j`. Diagonal entries are never read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub agents: Vec<Agent>,
    pub pairs: Vec<PairRecord>,
    pub pra_compat: Vec<Vec<u8>>,
    pub hla_score: Vec<Vec<i64>>,
}

impl Instance {
    /// Number of pairs across all agents.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    /// Agent owning each global pair index.
    pub fn pair_agents(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.agent_id).collect()
    }

    /// Global indices of the pairs owned by `agent`, in index order.
    pub fn agent_pool(&self, agent: usize) -> Vec<usize> {
        self.pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.agent_id == agent)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn check_index(&self, index: usize) -> Result<(), Error> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            })
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_instance(self)
    }

    /// Keeps the first `per_agent` pairs of every agent (in index order) and
    /// the matching sub-matrices. Smaller prefixes are nested in larger ones.
    pub fn agent_prefix(&self, per_agent: usize) -> Instance {
        let mut seen = vec![0usize; self.num_agents()];
        let keep: Vec<usize> = self
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let slot = &mut seen[p.agent_id];
                *slot += 1;
                *slot <= per_agent
            })
            .map(|(i, _)| i)
            .collect();
        self.select(&keep)
    }

    /// Sub-instance on the given global indices, in the given order.
    pub fn select(&self, keep: &[usize]) -> Instance {
        Instance {
            agents: self.agents.clone(),
            pairs: keep.iter().map(|&i| self.pairs[i]).collect(),
            pra_compat: submatrix(&self.pra_compat, keep),
            hla_score: submatrix(&self.hla_score, keep),
        }
    }
}

fn submatrix<T: Copy>(m: &[Vec<T>], keep: &[usize]) -> Vec<Vec<T>> {
    keep.iter()
        .map(|&i| keep.iter().map(|&j| m[i][j]).collect())
        .collect()
}

/// A broken [`Instance`] invariant, naming the offending field and index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoAgents,
    AgentIdMismatch {
        position: usize,
        id: usize,
    },
    UnknownAgent {
        pair: usize,
        agent_id: usize,
    },
    DuplicatePairId {
        pair: usize,
        agent_id: usize,
        pair_id: usize,
    },
    RowCount {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    ColumnCount {
        field: &'static str,
        row: usize,
        expected: usize,
        found: usize,
    },
    NotBinary {
        row: usize,
        col: usize,
        value: u8,
    },
    NegativeScore {
        row: usize,
        col: usize,
        value: i64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "agents: at least one agent required"),
            Violation::AgentIdMismatch { position, id } => {
                write!(f, "agents[{position}]: id {id} does not match position")
            }
            Violation::UnknownAgent { pair, agent_id } => {
                write!(f, "pairs[{pair}].agent_id: no agent {agent_id}")
            }
            Violation::DuplicatePairId {
                pair,
                agent_id,
                pair_id,
            } => write!(
                f,
                "pairs[{pair}].pair_id: {pair_id} repeated within agent {agent_id}"
            ),
            Violation::RowCount {
                field,
                expected,
                found,
            } => write!(f, "{field}: expected {expected} rows, found {found}"),
            Violation::ColumnCount {
                field,
                row,
                expected,
                found,
            } => write!(f, "{field}[{row}]: expected {expected} columns, found {found}"),
            Violation::NotBinary { row, col, value } => {
                write!(f, "pra_compat[{row}][{col}]: {value} is not 0 or 1")
            }
            Violation::NegativeScore { row, col, value } => {
                write!(f, "hla_score[{row}][{col}]: negative score {value}")
            }
        }
    }
}

/// Lists every broken invariant of `inst`; empty iff the instance is valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = inst.len();

    if inst.agents.is_empty() {
        out.push(Violation::NoAgents);
    }
    for (position, agent) in inst.agents.iter().enumerate() {
        if agent.id != position {
            out.push(Violation::AgentIdMismatch {
                position,
                id: agent.id,
            });
        }
    }

    let mut seen = std::collections::HashSet::new();
    for (pair, rec) in inst.pairs.iter().enumerate() {
        if rec.agent_id >= inst.num_agents() {
            out.push(Violation::UnknownAgent {
                pair,
                agent_id: rec.agent_id,
            });
        }
        if !seen.insert((rec.agent_id, rec.pair_id)) {
            out.push(Violation::DuplicatePairId {
                pair,
                agent_id: rec.agent_id,
                pair_id: rec.pair_id,
            });
        }
    }

    check_shape(&mut out, "pra_compat", &inst.pra_compat, n);
    check_shape(&mut out, "hla_score", &inst.hla_score, n);

    for (row, values) in inst.pra_compat.iter().enumerate() {
        for (col, &value) in values.iter().enumerate() {
            if value > 1 {
                out.push(Violation::NotBinary { row, col, value });
            }
        }
    }
    for (row, values) in inst.hla_score.iter().enumerate() {
        for (col, &value) in values.iter().enumerate() {
            if value < 0 {
                out.push(Violation::NegativeScore { row, col, value });
            }
        }
    }
    out
}

fn check_shape<T>(out: &mut Vec<Violation>, field: &'static str, m: &[Vec<T>], n: usize) {
    if m.len() != n {
        out.push(Violation::RowCount {
            field,
            expected: n,
            found: m.len(),
        });
    }
    for (row, values) in m.iter().enumerate() {
        if values.len() != n {
            out.push(Violation::ColumnCount {
                field,
                row,
                expected: n,
                found: values.len(),
            });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Maximise the number of matches.
    Model1,
    /// HLA-gated matching, single pool.
    Model2,
    /// HLA-gated matching over the merged multi-agent pool with per-agent floors.
    Model3,
}

/// How gated models weigh a match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ObjectiveMode {
    /// Weight each match by its two-way HLA total.
    #[default]
    AsWritten,
    /// Weight each match by 1.
    CountOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Minimum directional HLA score; required for Model2 and Model3.
    pub l_hla: Option<i64>,
    /// Minimum kidneys per agent; required for Model3.
    pub fairness_floors: Option<Vec<u32>>,
    pub objective_mode: ObjectiveMode,
}

impl ModelConfig {
    pub fn model1() -> Self {
        ModelConfig {
            kind: ModelKind::Model1,
            l_hla: None,
            fairness_floors: None,
            objective_mode: ObjectiveMode::CountOnly,
        }
    }

    pub fn model2(l_hla: i64, objective_mode: ObjectiveMode) -> Self {
        ModelConfig {
            kind: ModelKind::Model2,
            l_hla: Some(l_hla),
            fairness_floors: None,
            objective_mode,
        }
    }

    pub fn model3(l_hla: i64, floors: Vec<u32>, objective_mode: ObjectiveMode) -> Self {
        ModelConfig {
            kind: ModelKind::Model3,
            l_hla: Some(l_hla),
            fairness_floors: Some(floors),
            objective_mode,
        }
    }
}

/// An unordered match between two pairs, stored with `.0 < .1`.
pub type Match = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Selected two-way swaps, sorted, each with `i < j`.
    pub matches: Vec<Match>,
    /// Directional (patient, donor) pairs of the selected matches that pass
    /// the HLA threshold. Empty for ungated models.
    pub hla_gates: Vec<(usize, usize)>,
    pub objective_value: i64,
    pub transplants_total: u32,
    pub transplants_per_agent: Vec<u32>,
    pub proven_optimal: bool,
}

impl Solution {
    pub fn empty(num_agents: usize) -> Self {
        Solution {
            matches: Vec::new(),
            hla_gates: Vec::new(),
            objective_value: 0,
            transplants_total: 0,
            transplants_per_agent: vec![0; num_agents],
            proven_optimal: false,
        }
    }

    /// True iff no pair index occurs in more than one match.
    pub fn is_matching(&self) -> bool {
        let mut used = std::collections::HashSet::new();
        self.matches
            .iter()
            .all(|&(i, j)| i != j && used.insert(i) && used.insert(j))
    }
}
