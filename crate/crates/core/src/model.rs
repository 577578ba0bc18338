//! Agents, goods, additive utilities and the fairness predicates.
//!
//! An [`Instance`] holds an `n x m` utility matrix with entries in `[0, 1]`;
//! an [`Allocation`] maps each good to the agent that receives it. All
//! sums run in ascending good-index order so results are bit-reproducible.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute slack applied to every `>=` comparison in the fairness predicates.
pub const FAIRNESS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("instance must have at least one agent")]
    NoAgents,
    #[error("field `utilities`: expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("field `utilities[{row}]`: expected {expected} entries, found {found}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("field `utilities[{row}][{col}]`: value {value} outside [0, 1]")]
    OutOfRange { row: usize, col: usize, value: f64 },
    #[error("allocation covers {found} goods but the instance has {expected}")]
    AllocationLength { expected: usize, found: usize },
    #[error("allocation assigns good {good} to agent {agent}, but there are only {n} agents")]
    AllocationOwner { good: usize, agent: usize, n: usize },
    #[error("agent index {agent} out of range for {n} agents")]
    AgentIndex { agent: usize, n: usize },
}

/// Raw wire form, validated into [`Instance`] on deserialization.
#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    n: usize,
    m: usize,
    utilities: Vec<Vec<f64>>,
}

/// A fair-division instance with `n` agents, `m` goods and additive utilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    n: usize,
    m: usize,
    // row-major, agent-major
    utilities: Vec<f64>,
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = ModelError;

    fn try_from(r: InstanceRepr) -> Result<Self, ModelError> {
        Instance::from_rows(r.n, r.m, r.utilities)
    }
}

impl From<Instance> for InstanceRepr {
    fn from(inst: Instance) -> Self {
        InstanceRepr {
            n: inst.n,
            m: inst.m,
            utilities: inst.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl Instance {
    pub fn from_rows(n: usize, m: usize, rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::NoAgents);
        }
        if rows.len() != n {
            return Err(ModelError::RowCount {
                expected: n,
                found: rows.len(),
            });
        }
        let mut utilities = Vec::with_capacity(n * m);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != m {
                return Err(ModelError::RowLength {
                    row,
                    expected: m,
                    found: values.len(),
                });
            }
            utilities.extend(values);
        }
        Self::from_flat(n, m, utilities)
    }

    /// Builds an instance from a row-major buffer of length `n * m`.
    pub fn from_flat(n: usize, m: usize, utilities: Vec<f64>) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::NoAgents);
        }
        if utilities.len() != n * m {
            return Err(ModelError::RowCount {
                expected: n,
                found: utilities.len().checked_div(m).unwrap_or(0),
            });
        }
        if let Some(pos) = utilities.iter().position(|u| !(0.0..=1.0).contains(u)) {
            return Err(ModelError::OutOfRange {
                row: pos / m,
                col: pos % m,
                value: utilities[pos],
            });
        }
        Ok(Instance { n, m, utilities })
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn goods(&self) -> usize {
        self.m
    }

    /// Utility of `agent` for `good`. Panics on out-of-range indices.
    #[inline]
    pub fn utility(&self, agent: usize, good: usize) -> f64 {
        assert!(agent < self.n && good < self.m);
        self.utilities[agent * self.m + good]
    }

    pub fn row(&self, agent: usize) -> &[f64] {
        &self.utilities[agent * self.m..(agent + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    fn check_agent(&self, agent: usize) -> Result<(), ModelError> {
        if agent < self.n {
            Ok(())
        } else {
            Err(ModelError::AgentIndex { agent, n: self.n })
        }
    }

    /// `U_i`: the agent's utility for the whole set of goods.
    pub fn total_utility(&self, agent: usize) -> Result<f64, ModelError> {
        self.check_agent(agent)?;
        Ok(self.row(agent).iter().sum())
    }

    /// `U_i / n`.
    pub fn proportional_share(&self, agent: usize) -> Result<f64, ModelError> {
        Ok(self.total_utility(agent)? / self.n as f64)
    }

    /// Shares of every agent, in agent order.
    pub fn shares(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().sum::<f64>() / self.n as f64)
            .collect()
    }

    /// Utility `agent` derives from the bundle owned by `owner_of_bundle`.
    pub fn bundle_utility_of(
        &self,
        alloc: &Allocation,
        agent: usize,
        owner_of_bundle: usize,
    ) -> Result<f64, ModelError> {
        alloc.check_for(self)?;
        self.check_agent(agent)?;
        self.check_agent(owner_of_bundle)?;
        Ok(bundle_sum(self.row(agent), alloc, owner_of_bundle))
    }

    /// `u_agent(G_agent)`.
    pub fn bundle_utility(&self, alloc: &Allocation, agent: usize) -> Result<f64, ModelError> {
        self.bundle_utility_of(alloc, agent, agent)
    }

    /// Every agent gets at least `U_i / n`, up to [`FAIRNESS_TOL`].
    pub fn is_proportional(&self, alloc: &Allocation) -> Result<bool, ModelError> {
        Ok(self.first_unsatisfied(alloc)?.is_none())
    }

    /// First agent (ascending index) whose bundle falls short of her share.
    pub fn first_unsatisfied(&self, alloc: &Allocation) -> Result<Option<usize>, ModelError> {
        alloc.check_for(self)?;
        let shares = self.shares();
        Ok((0..self.n).find(|&i| bundle_sum(self.row(i), alloc, i) < shares[i] - FAIRNESS_TOL))
    }

    /// No agent prefers another agent's bundle, up to [`FAIRNESS_TOL`].
    pub fn is_envy_free(&self, alloc: &Allocation) -> Result<bool, ModelError> {
        alloc.check_for(self)?;
        for i in 0..self.n {
            let row = self.row(i);
            let mut per_bundle = vec![0.0; self.n];
            for (g, &owner) in alloc.owner.iter().enumerate() {
                per_bundle[owner] += row[g];
            }
            let own = per_bundle[i];
            if per_bundle.iter().any(|&other| own < other - FAIRNESS_TOL) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn bundle_sum(row: &[f64], alloc: &Allocation, owner: usize) -> f64 {
    alloc
        .owner
        .iter()
        .zip(row)
        .filter(|(&o, _)| o == owner)
        .map(|(_, &u)| u)
        .sum()
}

/// Total map from goods to agents; bundle `G_i` is the preimage of `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    owner: Vec<usize>,
}

impl Allocation {
    pub fn new(owner: Vec<usize>) -> Self {
        Allocation { owner }
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn owner_of(&self, good: usize) -> usize {
        self.owner[good]
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    /// Goods held by `agent`, ascending.
    pub fn bundle(&self, agent: usize) -> Vec<usize> {
        self.owner
            .iter()
            .enumerate()
            .filter(|(_, &o)| o == agent)
            .map(|(g, _)| g)
            .collect()
    }

    /// Number of goods held by each of `n` agents.
    pub fn bundle_sizes(&self, n: usize) -> Vec<usize> {
        let mut sizes = vec![0; n];
        for &o in &self.owner {
            sizes[o] += 1;
        }
        sizes
    }

    pub fn check_for(&self, inst: &Instance) -> Result<(), ModelError> {
        if self.owner.len() != inst.m {
            return Err(ModelError::AllocationLength {
                expected: inst.m,
                found: self.owner.len(),
            });
        }
        if let Some((good, &agent)) = self.owner.iter().enumerate().find(|(_, &a)| a >= inst.n) {
            return Err(ModelError::AllocationOwner {
                good,
                agent,
                n: inst.n,
            });
        }
        Ok(())
    }
}
