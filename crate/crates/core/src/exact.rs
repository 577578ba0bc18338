//! Exact existence oracles for proportionally fair allocations on small
//! instances.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matching::{maximum_matching, BipartiteGraph};
use crate::model::{Allocation, Instance, FAIRNESS_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_agents: usize,
    pub max_goods: usize,
    pub node_budget: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_agents: 6,
            max_goods: 20,
            node_budget: 100_000_000,
        }
    }
}

impl SearchLimits {
    pub fn admits(&self, n: usize, m: usize) -> bool {
        n <= self.max_agents && m <= self.max_goods
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckerError {
    #[error("instance with {n} agents and {m} goods exceeds the search limits ({max_agents} agents, {max_goods} goods)")]
    TooLarge {
        n: usize,
        m: usize,
        max_agents: usize,
        max_goods: usize,
    },
    #[error("search limits must be positive")]
    InvalidLimits,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Yes { witness: Allocation },
    No,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MatchingCaseVerdict {
    Yes { witness: Allocation },
    No,
    NotApplicable,
}

enum Flow {
    Found,
    Exhausted,
    OutOfBudget,
}

struct Search<'a> {
    inst: &'a Instance,
    n: usize,
    order: Vec<usize>,
    shares: Vec<f64>,
    // remaining[i][k]: agent i's utility for order[k..]
    remaining: Vec<Vec<f64>>,
    bundle: Vec<f64>,
    owner: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn satisfied(&self, i: usize) -> bool {
        self.bundle[i] >= self.shares[i] - FAIRNESS_TOL
    }

    fn dfs(&mut self, k: usize) -> Flow {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Flow::OutOfBudget;
        }
        if (0..self.n).any(|i| self.bundle[i] + self.remaining[i][k] < self.shares[i] - FAIRNESS_TOL) {
            return Flow::Exhausted;
        }
        if (0..self.n).all(|i| self.satisfied(i)) {
            // extra goods never hurt anyone already satisfied
            for &g in &self.order[k..] {
                self.owner[g] = 0;
            }
            if self.inst.is_proportional(&Allocation::new(self.owner.clone())) == Ok(true) {
                return Flow::Found;
            }
        }
        if k == self.order.len() {
            return Flow::Exhausted;
        }
        let g = self.order[k];
        let mut agents: Vec<usize> = (0..self.n).collect();
        agents.sort_by(|&a, &b| self.inst.utility(b, g).total_cmp(&self.inst.utility(a, g)));
        for a in agents {
            let u = self.inst.utility(a, g);
            self.owner[g] = a;
            self.bundle[a] += u;
            let flow = self.dfs(k + 1);
            self.bundle[a] -= u;
            match flow {
                Flow::Exhausted => {}
                other => return other,
            }
        }
        Flow::Exhausted
    }
}

/// Decides whether a proportionally fair allocation exists.
///
/// Branch and bound over good-to-agent assignments. Goods are taken in
/// descending order of their highest utility; a branch is cut as soon as
/// some agent cannot reach her share even with every unassigned good.
/// `No` is only returned after the search is exhausted.
pub fn exists_proportional(inst: &Instance, limits: &SearchLimits) -> Result<Verdict, CheckerError> {
    if limits.max_agents == 0 || limits.max_goods == 0 || limits.node_budget == 0 {
        return Err(CheckerError::InvalidLimits);
    }
    let (n, m) = (inst.agents(), inst.goods());
    if !limits.admits(n, m) {
        return Err(CheckerError::TooLarge {
            n,
            m,
            max_agents: limits.max_agents,
            max_goods: limits.max_goods,
        });
    }
    let mut order: Vec<usize> = (0..m).collect();
    let best = |g: usize| (0..n).map(|i| inst.utility(i, g)).fold(0.0, f64::max);
    order.sort_by(|&a, &b| best(b).total_cmp(&best(a)).then(a.cmp(&b)));

    let remaining = (0..n)
        .map(|i| {
            let mut suffix = vec![0.0; m + 1];
            for k in (0..m).rev() {
                suffix[k] = suffix[k + 1] + inst.utility(i, order[k]);
            }
            suffix
        })
        .collect();

    let mut search = Search {
        inst,
        n,
        order,
        shares: inst.shares(),
        remaining,
        bundle: vec![0.0; n],
        owner: vec![0; m],
        nodes: 0,
        budget: limits.node_budget,
    };
    Ok(match search.dfs(0) {
        Flow::Found => Verdict::Yes {
            witness: Allocation::new(search.owner),
        },
        Flow::Exhausted => Verdict::No,
        Flow::OutOfBudget => Verdict::BudgetExceeded,
    })
}

/// Exact oracle for `m = n` with every share positive: each agent then needs
/// exactly one good, so existence is a perfect matching on the graph with an
/// edge `(i, g)` iff `u_i(g)` reaches agent `i`'s share.
pub fn exists_proportional_matching_case(inst: &Instance) -> MatchingCaseVerdict {
    let (n, m) = (inst.agents(), inst.goods());
    let shares = inst.shares();
    if m != n || shares.iter().any(|&s| s <= FAIRNESS_TOL) {
        return MatchingCaseVerdict::NotApplicable;
    }
    let adjacency = (0..n)
        .map(|i| {
            (0..m)
                .filter(|&g| inst.utility(i, g) >= shares[i] - FAIRNESS_TOL)
                .collect()
        })
        .collect();
    let graph = BipartiteGraph::new(n, m, adjacency).expect("adjacency built sorted and in range");
    let matching = maximum_matching(&graph);
    if !matching.is_perfect() {
        return MatchingCaseVerdict::No;
    }
    let mut owner = vec![0; m];
    for (agent, good) in matching.pairs().iter().enumerate() {
        owner[good.expect("perfect matching")] = agent;
    }
    MatchingCaseVerdict::Yes {
        witness: Allocation::new(owner),
    }
}
