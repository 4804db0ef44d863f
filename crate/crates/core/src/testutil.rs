use crate::domain::{Agent, BloodType, Instance, PairRecord};

pub(crate) fn two_pair_instance() -> Instance {
    Instance {
        agents: vec![Agent {
            id: 0,
            name: "agent-1".into(),
        }],
        pairs: vec![
            PairRecord {
                pair_id: 0,
                agent_id: 0,
                patient_blood: BloodType::A,
                donor_blood: BloodType::O,
            },
            PairRecord {
                pair_id: 1,
                agent_id: 0,
                patient_blood: BloodType::B,
                donor_blood: BloodType::O,
            },
        ],
        pra_compat: vec![vec![0, 1], vec![1, 0]],
        hla_score: vec![vec![0, 255], vec![210, 0]],
    }
}

/// Instance whose pairs are all O/O with full PRA compatibility except where
/// `edges` leaves gaps: `c[i][j] = 1` exactly for the listed unordered edges.
/// `agents[i]` assigns pair `i` to an agent. All HLA scores are `score`.
pub(crate) fn graph_instance(agents: &[usize], edges: &[(usize, usize)], score: i64) -> Instance {
    let n = agents.len();
    let num_agents = agents.iter().copied().max().map_or(1, |a| a + 1);
    let mut next_id = vec![0usize; num_agents];
    let pairs = agents
        .iter()
        .map(|&a| {
            let pair_id = next_id[a];
            next_id[a] += 1;
            PairRecord {
                pair_id,
                agent_id: a,
                patient_blood: BloodType::O,
                donor_blood: BloodType::O,
            }
        })
        .collect();
    let mut pra = vec![vec![0u8; n]; n];
    for &(i, j) in edges {
        pra[i][j] = 1;
        pra[j][i] = 1;
    }
    let mut hla = vec![vec![score; n]; n];
    for (i, row) in hla.iter_mut().enumerate() {
        row[i] = 0;
    }
    Instance {
        agents: (0..num_agents)
            .map(|id| Agent {
                id,
                name: format!("agent-{}", id + 1),
            })
            .collect(),
        pairs,
        pra_compat: pra,
        hla_score: hla,
    }
}
