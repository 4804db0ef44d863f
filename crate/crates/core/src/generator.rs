//! Seeded synthetic instances.
//!
//! The random stream is SplitMix64 with its state initialised to the seed.
//! Draws are mapped to values as follows, so that any implementation of the
//! same rules reproduces an instance bit for bit:
//!
//! * uniform index in `0..k`: the high 64 bits of the 128-bit product
//!   `next_u64() * k`;
//! * unit float: `(next_u64() >> 11) * 2^-53`;
//! * Bernoulli(p): `unit < p`;
//! * blood type: the first of O, A, B, AB whose cumulative weight exceeds
//!   `unit` (the last type with nonzero weight if rounding leaves none).
//!
//! Draw order: blood types agent-major (patient, then donor, for every pair),
//! then `pra_compat` row-major, then `hla_score` row-major. Diagonal entries
//! consume no draw and are 0.
//!
//! Pairs are not filtered for internal incompatibility; no model reads the
//! diagonal.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::domain::{Agent, BloodType, Instance, PairRecord};
use crate::error::{Error, Result};

/// Directional HLA scores drawn by default.
pub const DEFAULT_HLA_VALUES: [i64; 13] = [55, 110, 150, 160, 205, 210, 255, 300, 305, 310, 350, 355, 360];

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub num_agents: usize,
    pub pairs_per_agent: usize,
    pub hla_values: Vec<i64>,
    /// Weights over O, A, B, AB.
    pub blood_distribution: [f64; 4],
    pub pra_compat_probability: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            num_agents: 4,
            pairs_per_agent: 5,
            hla_values: DEFAULT_HLA_VALUES.to_vec(),
            blood_distribution: [0.25; 4],
            pra_compat_probability: 0.5,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        GenConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidGenConfig(msg));
        if self.num_agents == 0 {
            return fail("at least one agent required".into());
        }
        if self.pairs_per_agent == 0 {
            return fail("at least one pair per agent required".into());
        }
        if self.hla_values.is_empty() {
            return fail("HLA value set is empty".into());
        }
        if let Some(v) = self.hla_values.iter().find(|&&v| v < 0) {
            return fail(format!("negative HLA value {v}"));
        }
        let w = &self.blood_distribution;
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return fail("blood-type weights must be finite and nonnegative".into());
        }
        if (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return fail("blood-type weights must sum to 1".into());
        }
        let p = self.pra_compat_probability;
        if !(0.0..=1.0).contains(&p) {
            return fail(format!("PRA probability {p} outside [0, 1]"));
        }
        Ok(())
    }
}

/// The pinned random stream and its value mappings.
#[derive(Debug, Clone)]
pub struct Stream(SplitMix64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn index(&mut self, k: usize) -> usize {
        ((u128::from(self.next_u64()) * k as u128) >> 64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn blood(&mut self, weights: &[f64; 4]) -> BloodType {
        let u = self.unit();
        let mut acc = 0.0;
        for (t, &w) in BloodType::ALL.iter().zip(weights) {
            acc += w;
            if u < acc {
                return *t;
            }
        }
        let last = weights.iter().rposition(|&w| w > 0.0).unwrap_or(3);
        BloodType::ALL[last]
    }
}

pub fn generate(cfg: &GenConfig) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = Stream::new(cfg.seed);
    let n = cfg.num_agents * cfg.pairs_per_agent;

    let mut pairs = Vec::with_capacity(n);
    for agent_id in 0..cfg.num_agents {
        for pair_id in 0..cfg.pairs_per_agent {
            let patient_blood = rng.blood(&cfg.blood_distribution);
            let donor_blood = rng.blood(&cfg.blood_distribution);
            pairs.push(PairRecord {
                pair_id,
                agent_id,
                patient_blood,
                donor_blood,
            });
        }
    }

    let mut pra_compat = vec![vec![0u8; n]; n];
    for (i, row) in pra_compat.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                *cell = u8::from(rng.bernoulli(cfg.pra_compat_probability));
            }
        }
    }

    let mut hla_score = vec![vec![0i64; n]; n];
    for (i, row) in hla_score.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                *cell = cfg.hla_values[rng.index(cfg.hla_values.len())];
            }
        }
    }

    Ok(Instance {
        agents: (0..cfg.num_agents)
            .map(|id| Agent {
                id,
                name: format!("agent-{}", id + 1),
            })
            .collect(),
        pairs,
        pra_compat,
        hla_score,
    })
}
