//! Instance files and result CSVs.
//!
//! An instance file is a TOML document written in one canonical layout:
//!
//! ```toml
//! [header]
//! format_version = 1
//! n = 2
//! num_agents = 1
//!
//! [[agents]]
//! id = 0
//! name = "agent-1"
//!
//! [[pairs]]
//! pair_id = 0
//! agent_id = 0
//! patient_blood = "A"
//! donor_blood = "O"
//!
//! [[pairs]]
//! pair_id = 1
//! agent_id = 0
//! patient_blood = "B"
//! donor_blood = "O"
//!
//! [matrices]
//! pra_compat = [
//!     [0, 1],
//!     [1, 0],
//! ]
//! hla_score = [
//!     [0, 255],
//!     [210, 0],
//! ]
//! ```
//!
//! Pairs appear in global index order. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::domain::{Agent, Instance, PairRecord};
use crate::error::{Error, Result};
use crate::harness::{BaseScenario, SweepResult};
use crate::solver::SolveStatus;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    header: Header,
    #[serde(default)]
    agents: Vec<Agent>,
    #[serde(default)]
    pairs: Vec<PairRecord>,
    matrices: Matrices,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format_version: u32,
    n: usize,
    num_agents: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Matrices {
    pra_compat: Vec<Vec<u8>>,
    hla_score: Vec<Vec<i64>>,
}

/// Renders `inst` in the canonical layout.
pub fn write_instance_string(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[header]");
    let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(out, "n = {}", inst.len());
    let _ = writeln!(out, "num_agents = {}", inst.num_agents());
    for agent in &inst.agents {
        let _ = writeln!(out, "\n[[agents]]");
        let _ = writeln!(out, "id = {}", agent.id);
        let _ = writeln!(out, "name = {}", toml_string(&agent.name));
    }
    for pair in &inst.pairs {
        let _ = writeln!(out, "\n[[pairs]]");
        let _ = writeln!(out, "pair_id = {}", pair.pair_id);
        let _ = writeln!(out, "agent_id = {}", pair.agent_id);
        let _ = writeln!(out, "patient_blood = \"{}\"", pair.patient_blood);
        let _ = writeln!(out, "donor_blood = \"{}\"", pair.donor_blood);
    }
    let _ = writeln!(out, "\n[matrices]");
    write_matrix(&mut out, "pra_compat", &inst.pra_compat);
    write_matrix(&mut out, "hla_score", &inst.hla_score);
    out
}

fn write_matrix<T: std::fmt::Display>(out: &mut String, key: &str, rows: &[Vec<T>]) {
    let _ = writeln!(out, "{key} = [");
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "    [{}],", cells.join(", "));
    }
    let _ = writeln!(out, "]");
}

fn toml_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Parses an instance document. Structural problems (version, declared
/// sizes, matrix shape) are errors; value-level invariants are left to
/// [`Instance::validate`].
pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let h = &file.header;
    if h.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            h.format_version
        )));
    }
    if h.n != file.pairs.len() {
        return Err(Error::Format(format!(
            "header declares n = {} but {} pairs are listed",
            h.n,
            file.pairs.len()
        )));
    }
    if h.num_agents != file.agents.len() {
        return Err(Error::Format(format!(
            "header declares num_agents = {} but {} agents are listed",
            h.num_agents,
            file.agents.len()
        )));
    }
    for (name, rows) in [
        (
            "pra_compat",
            file.matrices.pra_compat.iter().map(Vec::len).collect::<Vec<_>>(),
        ),
        (
            "hla_score",
            file.matrices.hla_score.iter().map(Vec::len).collect(),
        ),
    ] {
        if rows.len() != h.n || rows.iter().any(|&len| len != h.n) {
            return Err(Error::Format(format!("{name} must be {0}x{0}", h.n)));
        }
    }
    Ok(Instance {
        agents: file.agents,
        pairs: file.pairs,
        pra_compat: file.matrices.pra_compat,
        hla_score: file.matrices.hla_score,
    })
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    std::fs::write(path, write_instance_string(inst))?;
    Ok(())
}

pub const COUNTS_HEADER: &str = "model,agent_id,assigned_kidneys,total";
pub const SWEEP_HEADER: &str = "swept_param,value,model1_total,model2_total,model3_total,model3_status";

/// One block of `model,agent_id,assigned_kidneys,total` rows.
pub fn count_rows(out: &mut String, model: &str, per_agent: &[u32]) {
    let total: u32 = per_agent.iter().sum();
    for (agent, kidneys) in per_agent.iter().enumerate() {
        let _ = writeln!(out, "{model},{agent},{kidneys},{total}");
    }
}

/// Per-agent kidney table of the three cases. When the pooled model misses
/// its floors, its rows are replaced by `model3_nofloors` rows.
pub fn base_scenario_csv(base: &BaseScenario) -> String {
    let mut out = format!("{COUNTS_HEADER}\n");
    count_rows(&mut out, "model1", &base.model1_per_agent());
    count_rows(&mut out, "model2", &base.model2_per_agent());
    match base.model3.status {
        SolveStatus::Optimal => count_rows(&mut out, "model3", &base.model3.solution.transplants_per_agent),
        SolveStatus::InfeasibleFloors => {
            if let Some(relaxed) = &base.model3_relaxed {
                count_rows(
                    &mut out,
                    "model3_nofloors",
                    &relaxed.solution.transplants_per_agent,
                );
            }
        }
    }
    out
}

/// Sweep rows. `model3_total` is the floor-respecting total when
/// `model3_status` is `optimal`, otherwise the total without floors.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for row in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            result.swept_param.as_str(),
            row.value,
            row.model1_total(),
            row.model2_total(),
            row.model3_total(),
            row.model3_status.as_str()
        );
    }
    out
}
