//! Exact solver for [`ModelSpec`] programs and an enumeration oracle.
//!
//! Every program is a weighted matching over the pairs in scope, possibly
//! with per-agent lower bounds on matched kidneys. The solver works in two
//! phases:
//!
//! 1. Optimal value. Without floors this is the maximum-weight matching
//!    value. With floors, a depth-first branch and bound branches on a pair
//!    (match it to each available neighbour, heaviest first, or leave it
//!    unmatched). Nodes are pruned with the maximum-weight matching of the
//!    remaining edges (a relaxation of the floors) and a reachability test:
//!    an agent cannot gain more kidneys than it has open pairs with an
//!    available edge.
//! 2. Canonical solution. A second search walks the variables in
//!    lexicographic order, trying "stop here", then "take the variable", then
//!    "skip it", pruning every node that cannot reach the optimal value. The
//!    first hit is the optimal selection whose sorted variable list is
//!    lexicographically smallest.

use std::time::{Duration, Instant};

use mwmatching::{Matching, SENTINEL};

use crate::domain::{Instance, Solution};
use crate::error::{Error, Result};
use crate::models::ModelSpec;

/// Largest pool the enumeration oracle accepts.
pub const ORACLE_MAX_PAIRS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    /// No selection meets every agent floor. The reported solution is empty.
    InfeasibleFloors,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::InfeasibleFloors => "infeasible_floors",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Solution,
    pub nodes_explored: u64,
    pub wall_time: Duration,
    pub status: SolveStatus,
}

/// Finds the optimal selection of `spec`, breaking ties towards the
/// lexicographically smallest sorted variable list.
pub fn solve(spec: &ModelSpec) -> Result<SolveReport> {
    let start = Instant::now();
    validate_spec(spec)?;
    let mut search = Search::new(spec);

    let target = search.optimal_value();
    let (status, selected) = match target {
        None => (SolveStatus::InfeasibleFloors, None),
        Some(target) => {
            let selected = search
                .canonical(target)
                .expect("optimal value established but no selection reaches it");
            (SolveStatus::Optimal, Some(selected))
        }
    };
    Ok(SolveReport {
        solution: make_solution(spec, selected.as_deref()),
        nodes_explored: search.nodes,
        wall_time: start.elapsed(),
        status,
    })
}

/// Enumerates every matching of the pool. Floors are checked through the
/// explicit constraint rows of `spec`. Same tie-breaking as [`solve`].
pub fn brute_force_oracle(spec: &ModelSpec) -> Result<SolveReport> {
    let start = Instant::now();
    validate_spec(spec)?;
    if spec.pool.len() > ORACLE_MAX_PAIRS {
        return Err(Error::OracleTooLarge {
            pairs: spec.pool.len(),
            limit: ORACLE_MAX_PAIRS,
        });
    }

    struct Enum<'a> {
        spec: &'a ModelSpec,
        used: Vec<bool>,
        current: Vec<usize>,
        best: Option<(i64, Vec<usize>)>,
        count: u64,
    }

    impl Enum<'_> {
        fn walk(&mut self, pos: usize) {
            let pool = &self.spec.pool;
            let Some(offset) = (pos..pool.len()).find(|&k| !self.used[pool[k]]) else {
                self.count += 1;
                if self.spec.check(&self.current).is_err() {
                    return;
                }
                let value = self.spec.objective(&self.current);
                let mut sorted = self.current.clone();
                sorted.sort_unstable();
                let better = match &self.best {
                    None => true,
                    Some((v, list)) => value > *v || (value == *v && sorted < *list),
                };
                if better {
                    self.best = Some((value, sorted));
                }
                return;
            };
            let x = pool[offset];
            self.used[x] = true;
            self.walk(offset + 1);
            for (v, &(i, j)) in self.spec.variables.iter().enumerate() {
                let other = if i == x {
                    j
                } else if j == x {
                    i
                } else {
                    continue;
                };
                if self.used[other] {
                    continue;
                }
                self.used[other] = true;
                self.current.push(v);
                self.walk(offset + 1);
                self.current.pop();
                self.used[other] = false;
            }
            self.used[x] = false;
        }
    }

    let mut e = Enum {
        spec,
        used: vec![false; spec.num_pairs()],
        current: Vec::new(),
        best: None,
        count: 0,
    };
    e.walk(0);
    let (status, selected) = match e.best {
        Some((_, list)) => (SolveStatus::Optimal, Some(list)),
        None => (SolveStatus::InfeasibleFloors, None),
    };
    Ok(SolveReport {
        solution: make_solution(spec, selected.as_deref()),
        nodes_explored: e.count,
        wall_time: start.elapsed(),
        status,
    })
}

/// Kidneys received overall and per agent: each match gives one to the agent
/// of each endpoint.
pub fn extract_counts(solution: &Solution, inst: &Instance) -> Result<(u32, Vec<u32>)> {
    let mut per_agent = vec![0u32; inst.num_agents()];
    for &(i, j) in &solution.matches {
        for p in [i, j] {
            inst.check_index(p)?;
            let agent = inst.pairs[p].agent_id;
            match per_agent.get_mut(agent) {
                Some(slot) => *slot += 1,
                None => {
                    return Err(Error::IndexOutOfRange {
                        index: agent,
                        len: inst.num_agents(),
                    })
                }
            }
        }
    }
    Ok((2 * solution.matches.len() as u32, per_agent))
}

fn make_solution(spec: &ModelSpec, selected: Option<&[usize]>) -> Solution {
    let Some(selected) = selected else {
        return Solution::empty(spec.num_agents);
    };
    let matches: Vec<_> = selected.iter().map(|&v| spec.variables[v]).collect();
    let mut hla_gates = Vec::new();
    if spec.l_hla.is_some() {
        for &(i, j) in &matches {
            hla_gates.push((i, j));
            hla_gates.push((j, i));
        }
        hla_gates.sort_unstable();
    }
    let mut per_agent = vec![0u32; spec.num_agents];
    for &(i, j) in &matches {
        per_agent[spec.pair_agent[i]] += 1;
        per_agent[spec.pair_agent[j]] += 1;
    }
    Solution {
        objective_value: spec.objective(selected),
        transplants_total: 2 * matches.len() as u32,
        transplants_per_agent: per_agent,
        matches,
        hla_gates,
        proven_optimal: true,
    }
}

fn validate_spec(spec: &ModelSpec) -> Result<()> {
    let bad = |msg: String| Err(Error::MalformedModel(msg));
    let n = spec.num_pairs();
    if spec.objective_weight.len() != spec.variables.len() {
        return bad("one objective weight per variable required".into());
    }
    if spec.pool.windows(2).any(|w| w[0] >= w[1]) || spec.pool.last().is_some_and(|&p| p >= n) {
        return bad("pool must be ascending and within the instance".into());
    }
    if spec.pair_agent.iter().any(|&a| a >= spec.num_agents) {
        return bad("pair owned by an unknown agent".into());
    }
    let mut in_pool = vec![false; n];
    for &p in &spec.pool {
        in_pool[p] = true;
    }
    if spec.variables.windows(2).any(|w| w[0] >= w[1]) {
        return bad("variables must be strictly lexicographically ordered".into());
    }
    for &(i, j) in &spec.variables {
        if i >= j || j >= n || !in_pool[i] || !in_pool[j] {
            return bad(format!("variable ({i}, {j}) is not a pool pair with i < j"));
        }
    }
    let total: i64 = spec.objective_weight.iter().sum();
    if spec.objective_weight.iter().any(|&w| w < 0) || total > i64::from(i32::MAX / 4) {
        return bad("objective weights must be nonnegative and sum below 2^29".into());
    }
    if let Some(floors) = &spec.agent_floors {
        if floors.len() != spec.num_agents {
            return bad("one floor per agent required".into());
        }
        for (a, floor) in floors.iter().enumerate() {
            let expected: Vec<(usize, u32)> = spec
                .variables
                .iter()
                .enumerate()
                .filter_map(|(v, &(i, j))| {
                    let coef = u32::from(spec.pair_agent[i] == a) + u32::from(spec.pair_agent[j] == a);
                    (coef > 0).then_some((v, coef))
                })
                .collect();
            if floor.agent != a || floor.terms != expected {
                return bad(format!("floor row {a} does not count kidneys of agent {a}"));
            }
        }
    }
    Ok(())
}

/// Search state over local vertex indices `0..pool.len()`.
struct Search {
    ends: Vec<(usize, usize)>,
    weight: Vec<i64>,
    /// Variables incident to each vertex, ascending.
    incident: Vec<Vec<usize>>,
    agent: Vec<usize>,
    floors: Option<Vec<u32>>,

    free: Vec<bool>,
    /// Phase 1 only: vertex left unmatched by a branching decision.
    closed: Vec<bool>,
    /// Phase 2 only: variables below this index are decided.
    frontier: usize,
    kidneys: Vec<u32>,
    value: i64,
    chosen: Vec<usize>,
    nodes: u64,
}

impl Search {
    fn new(spec: &ModelSpec) -> Self {
        let mut local = vec![usize::MAX; spec.num_pairs()];
        for (k, &p) in spec.pool.iter().enumerate() {
            local[p] = k;
        }
        let k = spec.pool.len();
        let ends: Vec<_> = spec
            .variables
            .iter()
            .map(|&(i, j)| (local[i], local[j]))
            .collect();
        let mut incident = vec![Vec::new(); k];
        for (v, &(a, b)) in ends.iter().enumerate() {
            incident[a].push(v);
            incident[b].push(v);
        }
        Search {
            ends,
            weight: spec.objective_weight.clone(),
            incident,
            agent: spec.pool.iter().map(|&p| spec.pair_agent[p]).collect(),
            floors: spec
                .agent_floors
                .as_ref()
                .map(|f| f.iter().map(|r| r.min_kidneys).collect()),
            free: vec![true; k],
            closed: vec![false; k],
            frontier: 0,
            kidneys: vec![0; spec.num_agents],
            value: 0,
            chosen: Vec::new(),
            nodes: 0,
        }
    }

    fn available(&self, v: usize) -> bool {
        let (a, b) = self.ends[v];
        v >= self.frontier && self.free[a] && self.free[b] && !self.closed[a] && !self.closed[b]
    }

    fn take(&mut self, v: usize) {
        let (a, b) = self.ends[v];
        self.free[a] = false;
        self.free[b] = false;
        self.kidneys[self.agent[a]] += 1;
        self.kidneys[self.agent[b]] += 1;
        self.value += self.weight[v];
        self.chosen.push(v);
    }

    fn untake(&mut self, v: usize) {
        let (a, b) = self.ends[v];
        self.free[a] = true;
        self.free[b] = true;
        self.kidneys[self.agent[a]] -= 1;
        self.kidneys[self.agent[b]] -= 1;
        self.value -= self.weight[v];
        self.chosen.pop();
    }

    fn floors_met(&self) -> bool {
        match &self.floors {
            None => true,
            Some(f) => self.kidneys.iter().zip(f).all(|(k, m)| k >= m),
        }
    }

    /// Whether every floor can still be met by matching open pairs.
    fn floors_reachable(&self) -> bool {
        let Some(floors) = &self.floors else {
            return true;
        };
        let mut reach = self.kidneys.clone();
        for x in 0..self.free.len() {
            if self.incident[x].iter().any(|&v| self.available(v)) {
                reach[self.agent[x]] += 1;
            }
        }
        reach.iter().zip(floors).all(|(r, m)| r >= m)
    }

    /// Half the sum over vertices of their heaviest available edge.
    fn star_bound(&self) -> i64 {
        let mut sum = 0;
        for x in 0..self.free.len() {
            sum += self.incident[x]
                .iter()
                .filter(|&&v| self.available(v))
                .map(|&v| self.weight[v])
                .max()
                .unwrap_or(0);
        }
        sum / 2
    }

    /// Maximum-weight matching over available variables with positive weight.
    fn max_weight_completion(&self) -> (i64, Vec<usize>) {
        let mut compact = vec![usize::MAX; self.free.len()];
        let mut next = 0;
        let mut edges = Vec::new();
        let mut vars = Vec::new();
        for v in 0..self.ends.len() {
            if self.weight[v] <= 0 || !self.available(v) {
                continue;
            }
            let (a, b) = self.ends[v];
            for x in [a, b] {
                if compact[x] == usize::MAX {
                    compact[x] = next;
                    next += 1;
                }
            }
            edges.push((compact[a], compact[b], self.weight[v] as i32));
            vars.push(v);
        }
        if edges.is_empty() {
            return (0, Vec::new());
        }
        let mate = Matching::new(edges.clone()).solve();
        let mut value = 0;
        let mut picked = Vec::new();
        for (k, &(a, b, w)) in edges.iter().enumerate() {
            if mate.get(a).is_some_and(|&m| m != SENTINEL && m == b) {
                value += i64::from(w);
                picked.push(vars[k]);
            }
        }
        (value, picked)
    }

    /// Phase 1. `None` when the floors cannot be met.
    fn optimal_value(&mut self) -> Option<i64> {
        self.nodes += 1;
        let (relaxed, picked) = self.max_weight_completion();
        if self.floors.is_none() {
            return Some(relaxed);
        }
        if !self.floors_reachable() {
            return None;
        }
        if self.satisfies_floors_with(&picked) {
            return Some(relaxed);
        }
        let mut best = None;
        self.branch(&mut best);
        best
    }

    fn satisfies_floors_with(&self, extra: &[usize]) -> bool {
        let Some(floors) = &self.floors else {
            return true;
        };
        let mut k = self.kidneys.clone();
        for &v in extra {
            let (a, b) = self.ends[v];
            k[self.agent[a]] += 1;
            k[self.agent[b]] += 1;
        }
        k.iter().zip(floors).all(|(got, min)| got >= min)
    }

    fn branch(&mut self, best: &mut Option<i64>) {
        self.nodes += 1;
        if !self.floors_reachable() {
            return;
        }
        if best.is_some_and(|b| self.value + self.star_bound() <= b) {
            return;
        }
        let (relaxed, picked) = self.max_weight_completion();
        let bound = self.value + relaxed;
        if best.is_some_and(|b| bound <= b) {
            return;
        }
        if self.satisfies_floors_with(&picked) {
            // The relaxation's optimum is feasible, hence optimal here.
            *best = Some(bound);
            return;
        }

        let Some(x) = self.pick_vertex() else {
            if self.floors_met() && best.is_none_or(|b| self.value > b) {
                *best = Some(self.value);
            }
            return;
        };
        let mut options: Vec<usize> = self.incident[x]
            .iter()
            .copied()
            .filter(|&v| self.available(v))
            .collect();
        options.sort_by_key(|&v| (std::cmp::Reverse(self.weight[v]), v));
        for v in options {
            self.take(v);
            self.branch(best);
            self.untake(v);
        }
        self.closed[x] = true;
        self.branch(best);
        self.closed[x] = false;
    }

    /// Open vertex to branch on: prefer agents still short of their floor,
    /// then the fewest available edges, then the lowest index.
    fn pick_vertex(&self) -> Option<usize> {
        let short = |x: usize| match &self.floors {
            Some(f) => self.kidneys[self.agent[x]] < f[self.agent[x]],
            None => false,
        };
        (0..self.free.len())
            .filter_map(|x| {
                let degree = self.incident[x].iter().filter(|&&v| self.available(v)).count();
                (degree > 0).then_some((!short(x), degree, x))
            })
            .min()
            .map(|(_, _, x)| x)
    }

    /// Phase 2: lexicographically smallest selection with value `target`.
    fn canonical(&mut self, target: i64) -> Option<Vec<usize>> {
        self.closed.iter_mut().for_each(|c| *c = false);
        self.frontier = 0;
        self.lex(target)
    }

    fn lex(&mut self, target: i64) -> Option<Vec<usize>> {
        self.nodes += 1;
        if self.value == target && self.floors_met() {
            let mut out = self.chosen.clone();
            out.sort_unstable();
            return Some(out);
        }
        if !self.floors_reachable() || self.value + self.star_bound() < target {
            return None;
        }
        if self.value + self.max_weight_completion().0 < target {
            return None;
        }
        let next = (self.frontier..self.ends.len()).find(|&v| self.available(v))?;
        let saved = self.frontier;
        self.frontier = next + 1;
        self.take(next);
        let hit = self.lex(target);
        self.untake(next);
        let hit = hit.or_else(|| self.lex(target));
        self.frontier = saved;
        hit
    }
}
