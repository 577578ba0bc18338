//! Block-partition and threshold-matching allocators.
//!
//! Goods are cut into consecutive blocks of `n`. In each block every agent
//! is adjacent to the goods she values at least `(1 + delta) * mean`, and a
//! perfect matching hands one such good to every agent. The allocators
//! report honest failure statuses; they never assume the high-probability
//! event happened.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::Margin;
use crate::matching::{maximum_matching, threshold_graph, Matching};
use crate::model::{Allocation, Instance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocatorError {
    #[error("the block construction needs m = k*n with k >= 1 (got n={n}, m={m}); use the superlinear allocator (theorem 2) instead")]
    NotMultiple { n: usize, m: usize },
    #[error("the superlinear allocator needs m >= n (got n={n}, m={m})")]
    TooFewGoods { n: usize, m: usize },
    #[error("invalid margin: delta={delta}, beta={beta}, mean={mean}")]
    Margin { delta: f64, beta: f64, mean: f64 },
    #[error("alpha {alpha} must lie strictly inside ({lo}, 1)")]
    Alpha { alpha: f64, lo: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocatorConfig {
    pub margin: Margin,
    pub alpha: f64,
    pub verify: bool,
}

/// Lower end of the admissible open interval for `alpha`.
pub fn alpha_lower_bound(delta: f64) -> f64 {
    (1.0 + delta / 2.0) / (1.0 + delta)
}

impl AllocatorConfig {
    /// Config with verification on and `alpha` at the midpoint of its interval.
    pub fn new(margin: Margin) -> Result<Self, AllocatorError> {
        if !margin.is_valid() {
            return Err(AllocatorError::Margin {
                delta: margin.delta,
                beta: margin.beta,
                mean: margin.mean,
            });
        }
        let lo = alpha_lower_bound(margin.delta);
        Ok(AllocatorConfig {
            margin,
            alpha: 0.5 * (lo + 1.0),
            verify: true,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self, AllocatorError> {
        let lo = alpha_lower_bound(self.margin.delta);
        if !(alpha > lo && alpha < 1.0) {
            return Err(AllocatorError::Alpha { alpha, lo });
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_verify(mut self, verify: bool) -> Self {
        self.verify = verify;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AllocatorStatus {
    Success,
    MatchingFailed { block: usize },
    InsufficientGroups { found: usize, required: usize },
    VerificationFailed { agent: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Maximum matching size found in each block, in block order.
    pub block_matching_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocatorOutcome {
    pub allocation: Option<Allocation>,
    #[serde(flatten)]
    pub status: AllocatorStatus,
    pub diagnostics: Diagnostics,
}

impl AllocatorOutcome {
    pub fn is_success(&self) -> bool {
        self.status == AllocatorStatus::Success
    }
}

/// Minimum number of perfectly matched blocks, `ceil((1 + delta/2) / (1 + delta) * m / n)`.
pub fn required_groups(m: usize, n: usize, margin: &Margin) -> usize {
    let x = alpha_lower_bound(margin.delta) * m as f64 / n as f64;
    let nearest = x.round();
    if (x - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        x.ceil() as usize
    }
}

fn match_blocks(inst: &Instance, margin: &Margin, blocks: usize) -> Vec<Matching> {
    let n = inst.agents();
    let thresholds = vec![margin.threshold(); n];
    (0..blocks)
        .map(|b| {
            let block: Vec<usize> = (b * n..(b + 1) * n).collect();
            maximum_matching(&threshold_graph(inst, &block, &thresholds))
        })
        .collect()
}

fn finish(
    inst: &Instance,
    cfg: &AllocatorConfig,
    allocation: Allocation,
    diagnostics: Diagnostics,
) -> AllocatorOutcome {
    let status = if cfg.verify {
        match inst
            .first_unsatisfied(&allocation)
            .expect("allocator output fits its instance")
        {
            Some(agent) => AllocatorStatus::VerificationFailed { agent },
            None => AllocatorStatus::Success,
        }
    } else {
        AllocatorStatus::Success
    };
    AllocatorOutcome {
        allocation: Some(allocation),
        status,
        diagnostics,
    }
}

fn single_agent(inst: &Instance, cfg: &AllocatorConfig) -> AllocatorOutcome {
    finish(
        inst,
        cfg,
        Allocation::new(vec![0; inst.goods()]),
        Diagnostics::default(),
    )
}

/// Allocator for `m = k * n`: one perfect threshold matching per block, so
/// every agent ends with exactly `k` goods.
pub fn theorem1_allocate(
    inst: &Instance,
    cfg: &AllocatorConfig,
) -> Result<AllocatorOutcome, AllocatorError> {
    let (n, m) = (inst.agents(), inst.goods());
    if n == 1 {
        return Ok(single_agent(inst, cfg));
    }
    if m == 0 || m % n != 0 {
        return Err(AllocatorError::NotMultiple { n, m });
    }
    let matchings = match_blocks(inst, &cfg.margin, m / n);
    let diagnostics = Diagnostics {
        block_matching_sizes: matchings.iter().map(Matching::size).collect(),
    };
    if let Some(block) = matchings.iter().position(|mm| !mm.is_perfect()) {
        return Ok(AllocatorOutcome {
            allocation: None,
            status: AllocatorStatus::MatchingFailed { block },
            diagnostics,
        });
    }
    let mut owner = vec![0; m];
    for (b, mm) in matchings.iter().enumerate() {
        for (agent, pos) in mm.pairs().iter().enumerate() {
            let pos = pos.expect("perfect matching");
            owner[b * n + pos] = agent;
        }
    }
    Ok(finish(inst, cfg, Allocation::new(owner), diagnostics))
}

/// Allocator for `m >= n`: match `floor(m / n)` blocks and succeed when at
/// least [`required_groups`] of them have perfect matchings. Goods outside
/// the perfectly matched blocks go round-robin by agent index.
pub fn theorem2_allocate(
    inst: &Instance,
    cfg: &AllocatorConfig,
) -> Result<AllocatorOutcome, AllocatorError> {
    let (n, m) = (inst.agents(), inst.goods());
    if n == 1 {
        return Ok(single_agent(inst, cfg));
    }
    if m < n {
        return Err(AllocatorError::TooFewGoods { n, m });
    }
    let matchings = match_blocks(inst, &cfg.margin, m / n);
    let diagnostics = Diagnostics {
        block_matching_sizes: matchings.iter().map(Matching::size).collect(),
    };
    let found = matchings.iter().filter(|mm| mm.is_perfect()).count();
    let required = required_groups(m, n, &cfg.margin);
    if found < required {
        return Ok(AllocatorOutcome {
            allocation: None,
            status: AllocatorStatus::InsufficientGroups { found, required },
            diagnostics,
        });
    }

    let mut owner: Vec<Option<usize>> = vec![None; m];
    for (b, mm) in matchings.iter().enumerate().filter(|(_, mm)| mm.is_perfect()) {
        for (agent, pos) in mm.pairs().iter().enumerate() {
            owner[b * n + pos.expect("perfect matching")] = Some(agent);
        }
    }
    let mut next = 0;
    let owner = owner
        .into_iter()
        .map(|o| {
            o.unwrap_or_else(|| {
                let agent = next % n;
                next += 1;
                agent
            })
        })
        .collect();
    Ok(finish(inst, cfg, Allocation::new(owner), diagnostics))
}
