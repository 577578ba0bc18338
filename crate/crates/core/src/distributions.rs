//! Utility distributions, seeded instance sampling, tail margins and the
//! Chernoff tail bound.
//!
//! Every distribution here is supported on `[0, 1]`. A [`Margin`] records a
//! pair `(delta, beta)` with `Pr[X >= (1 + delta) * mean] >= beta`, which is
//! what the allocators use to build their threshold graphs.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Instance;

/// Default lower bound on the tail probability when picking a margin.
pub const DEFAULT_BETA_FLOOR: f64 = 0.3;

const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("invalid distribution `{0}`: expected uniform:lo,hi | bernoulli:p | discrete:v1,p1;v2,p2;... | split:<spec>|<spec>")]
    Syntax(String),
    #[error("invalid distribution parameters: {0}")]
    Parameters(String),
    #[error("margin unavailable: the distribution puts all probability on a single point")]
    MarginUnavailable,
    #[error("no delta > 0 reaches tail probability {beta_floor}; the best achievable is below {achievable}")]
    BetaFloorUnattainable { beta_floor: f64, achievable: f64 },
    #[error("beta floor {0} must lie in (0, 1)")]
    BetaFloor(f64),
    #[error("delta {delta} is invalid: need delta > 0 and (1 + delta) * mean <= {support_max}")]
    Delta { delta: f64, support_max: f64 },
    #[error("chernoff bound needs epsilon in (0, 1) and expected >= 0, got epsilon={epsilon}, expected={expected}")]
    ChernoffDomain { epsilon: f64, expected: f64 },
}

/// A distribution of single-good utilities, supported on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    /// Continuous uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Value 0 with probability `p`, value 1 otherwise.
    Bernoulli { p: f64 },
    /// Finite support with the given probabilities.
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

impl DistributionSpec {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self, DistributionError> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(DistributionError::Parameters(format!(
                "uniform needs 0 <= lo <= hi <= 1, got [{lo}, {hi}]"
            )));
        }
        Ok(DistributionSpec::Uniform { lo, hi })
    }

    pub fn bernoulli(p: f64) -> Result<Self, DistributionError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(DistributionError::Parameters(format!(
                "bernoulli needs p in [0, 1], got {p}"
            )));
        }
        Ok(DistributionSpec::Bernoulli { p })
    }

    pub fn discrete(values: Vec<f64>, probs: Vec<f64>) -> Result<Self, DistributionError> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(DistributionError::Parameters(
                "discrete needs equally many values and probabilities (at least one)".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(DistributionError::Parameters(format!(
                "discrete value {v} outside [0, 1]"
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(DistributionError::Parameters(format!(
                "discrete probability {p} is negative"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(DistributionError::Parameters(format!(
                "discrete probabilities sum to {sum}, not 1"
            )));
        }
        Ok(DistributionSpec::Discrete { values, probs })
    }

    pub fn mean(&self) -> f64 {
        match self {
            DistributionSpec::Uniform { lo, hi } => 0.5 * (lo + hi),
            DistributionSpec::Bernoulli { p } => 1.0 - p,
            DistributionSpec::Discrete { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| v * p).sum()
            }
        }
    }

    /// Largest value with positive probability (or density).
    pub fn support_max(&self) -> f64 {
        match self {
            DistributionSpec::Uniform { hi, .. } => *hi,
            DistributionSpec::Bernoulli { p } => {
                if *p < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionSpec::Discrete { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(_, &p)| p > 0.0)
                .map(|(&v, _)| v)
                .fold(0.0, f64::max),
        }
    }

    /// True iff all probability sits on a single point.
    pub fn is_degenerate(&self) -> bool {
        match self {
            DistributionSpec::Uniform { lo, hi } => lo == hi,
            DistributionSpec::Bernoulli { p } => *p == 0.0 || *p == 1.0,
            DistributionSpec::Discrete { .. } => self.atoms().len() < 2,
        }
    }

    /// Distinct support points with positive mass, ascending, masses merged.
    fn atoms(&self) -> Vec<(f64, f64)> {
        let (values, probs): (Vec<f64>, Vec<f64>) = match self {
            DistributionSpec::Uniform { .. } => return Vec::new(),
            DistributionSpec::Bernoulli { p } => (vec![0.0, 1.0], vec![*p, 1.0 - p]),
            DistributionSpec::Discrete { values, probs } => (values.clone(), probs.clone()),
        };
        let mut pairs: Vec<(f64, f64)> = values
            .into_iter()
            .zip(probs)
            .filter(|(_, p)| *p > 0.0)
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        merged
    }

    /// Exact `Pr[X >= t]`.
    pub fn tail(&self, t: f64) -> f64 {
        match self {
            DistributionSpec::Uniform { lo, hi } => {
                if t <= *lo {
                    1.0
                } else if t > *hi {
                    0.0
                } else if lo == hi {
                    1.0
                } else {
                    (hi - t) / (hi - lo)
                }
            }
            _ => self
                .atoms()
                .iter()
                .filter(|(v, _)| *v >= t)
                .map(|(_, p)| p)
                .sum::<f64>()
                .min(1.0),
        }
    }

    /// Inverse-transform sample from `u` in `[0, 1)`.
    pub fn sample_from_unit(&self, u: f64) -> f64 {
        match self {
            DistributionSpec::Uniform { lo, hi } => (lo + (hi - lo) * u).clamp(*lo, *hi),
            DistributionSpec::Bernoulli { p } => {
                if u < *p {
                    0.0
                } else {
                    1.0
                }
            }
            DistributionSpec::Discrete { values, probs } => {
                let mut acc = 0.0;
                let mut fallback = values[0];
                for (&v, &p) in values.iter().zip(probs) {
                    if p <= 0.0 {
                        continue;
                    }
                    acc += p;
                    fallback = v;
                    if u < acc {
                        return v;
                    }
                }
                fallback
            }
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            DistributionSpec::Bernoulli { p } => write!(f, "bernoulli:{p}"),
            DistributionSpec::Discrete { values, probs } => {
                write!(f, "discrete:")?;
                for (k, (v, p)) in values.iter().zip(probs).enumerate() {
                    if k > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{v},{p}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_f64(s: &str, whole: &str) -> Result<f64, DistributionError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| DistributionError::Syntax(whole.to_string()))
}

impl FromStr for DistributionSpec {
    type Err = DistributionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, params) = s
            .split_once(':')
            .ok_or_else(|| DistributionError::Syntax(s.to_string()))?;
        match kind.trim() {
            "uniform" => {
                let (lo, hi) = params
                    .split_once(',')
                    .ok_or_else(|| DistributionError::Syntax(s.to_string()))?;
                DistributionSpec::uniform(parse_f64(lo, s)?, parse_f64(hi, s)?)
            }
            "bernoulli" => DistributionSpec::bernoulli(parse_f64(params, s)?),
            "discrete" => {
                let mut values = Vec::new();
                let mut probs = Vec::new();
                for pair in params.split(';').filter(|p| !p.trim().is_empty()) {
                    let (v, p) = pair
                        .split_once(',')
                        .ok_or_else(|| DistributionError::Syntax(s.to_string()))?;
                    values.push(parse_f64(v, s)?);
                    probs.push(parse_f64(p, s)?);
                }
                DistributionSpec::discrete(values, probs)
            }
            _ => Err(DistributionError::Syntax(s.to_string())),
        }
    }
}

impl Serialize for DistributionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DistributionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `(delta, beta)` together with the mean they refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub delta: f64,
    pub beta: f64,
    pub mean: f64,
}

impl Margin {
    /// The matching threshold `(1 + delta) * mean`.
    pub fn threshold(&self) -> f64 {
        (1.0 + self.delta) * self.mean
    }

    pub fn is_valid(&self) -> bool {
        self.delta > 0.0
            && self.delta.is_finite()
            && self.beta > 0.0
            && self.beta <= 1.0
            && self.mean > 0.0
            && self.threshold() <= 1.0
    }
}

/// Largest delta with `(1 + delta) * mean <= target`, nudged down across
/// rounding so the threshold never overshoots the target.
fn delta_reaching(target: f64, mean: f64) -> f64 {
    let mut delta = target / mean - 1.0;
    while (1.0 + delta) * mean > target {
        delta = delta.next_down();
    }
    delta
}

/// Largest-delta margin whose tail probability is at least `beta_floor`.
///
/// Uniform specs use the closed-form quantile, finite specs enumerate their
/// support points. Fails on degenerate specs and when no `delta > 0` can
/// reach the floor.
pub fn margin_for(spec: &DistributionSpec, beta_floor: f64) -> Result<Margin, DistributionError> {
    if !(beta_floor > 0.0 && beta_floor < 1.0) {
        return Err(DistributionError::BetaFloor(beta_floor));
    }
    if spec.is_degenerate() {
        return Err(DistributionError::MarginUnavailable);
    }
    let mean = spec.mean();
    let target = match spec {
        DistributionSpec::Uniform { lo, hi } => {
            let t = hi - beta_floor * (hi - lo);
            if t <= mean {
                return Err(DistributionError::BetaFloorUnattainable {
                    beta_floor,
                    achievable: 0.5,
                });
            }
            t
        }
        _ => {
            let atoms = spec.atoms();
            let above: Vec<f64> = atoms.iter().map(|a| a.0).filter(|&v| v > mean).collect();
            match above
                .iter()
                .rev()
                .find(|&&v| spec.tail(v) >= beta_floor)
            {
                Some(&v) => v,
                None => {
                    return Err(DistributionError::BetaFloorUnattainable {
                        beta_floor,
                        achievable: above.first().map_or(0.0, |&v| spec.tail(v)),
                    })
                }
            }
        }
    };
    let delta = delta_reaching(target, mean);
    let mut margin = Margin {
        delta,
        beta: spec.tail((1.0 + delta) * mean),
        mean,
    };
    // Rounding in the uniform quantile can leave the tail an ulp short.
    while margin.beta < beta_floor && margin.delta > 0.0 {
        margin.delta = margin.delta.next_down();
        margin.beta = spec.tail(margin.threshold());
    }
    Ok(margin)
}

/// Margin for a caller-chosen `delta`, with `beta` the exact tail there.
pub fn margin_with_delta(spec: &DistributionSpec, delta: f64) -> Result<Margin, DistributionError> {
    if spec.is_degenerate() {
        return Err(DistributionError::MarginUnavailable);
    }
    let mean = spec.mean();
    let margin = Margin {
        delta,
        beta: spec.tail((1.0 + delta) * mean),
        mean,
    };
    if !(delta > 0.0) || !margin.is_valid() {
        return Err(DistributionError::Delta {
            delta,
            support_max: spec.support_max(),
        });
    }
    Ok(margin)
}

/// Upper tail bound `exp(-epsilon^2 * expected / 3)` for a sum of
/// independent `[0, 1]` variables with the given expectation.
pub fn chernoff_bound(epsilon: f64, expected: f64) -> Result<f64, DistributionError> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(expected >= 0.0) {
        return Err(DistributionError::ChernoffDomain { epsilon, expected });
    }
    Ok((-epsilon * epsilon * expected / 3.0).exp())
}

/// Where the utilities of an instance come from.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilityModel {
    /// Every entry i.i.d. from one spec.
    Iid(DistributionSpec),
    /// Goods `0..m/2` from `first`, the rest from `second`; i.i.d. across agents.
    Split {
        first: DistributionSpec,
        second: DistributionSpec,
    },
}

impl UtilityModel {
    fn spec_for_good(&self, good: usize, m: usize) -> &DistributionSpec {
        match self {
            UtilityModel::Iid(spec) => spec,
            UtilityModel::Split { first, second } => {
                if good < m / 2 {
                    first
                } else {
                    second
                }
            }
        }
    }

    /// Mean of the equal-weight pooled distribution.
    pub fn mean(&self) -> f64 {
        match self {
            UtilityModel::Iid(spec) => spec.mean(),
            UtilityModel::Split { first, second } => 0.5 * (first.mean() + second.mean()),
        }
    }

    pub fn tail(&self, t: f64) -> f64 {
        match self {
            UtilityModel::Iid(spec) => spec.tail(t),
            UtilityModel::Split { first, second } => 0.5 * (first.tail(t) + second.tail(t)),
        }
    }

    pub fn support_max(&self) -> f64 {
        match self {
            UtilityModel::Iid(spec) => spec.support_max(),
            UtilityModel::Split { first, second } => first.support_max().max(second.support_max()),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match self {
            UtilityModel::Iid(spec) => spec.is_degenerate(),
            UtilityModel::Split { first, second } => {
                first.is_degenerate()
                    && second.is_degenerate()
                    && first.support_max() == second.support_max()
            }
        }
    }

    /// [`margin_for`] on the pooled distribution. Split sources bisect on
    /// the exact mixture tail.
    pub fn margin_for(&self, beta_floor: f64) -> Result<Margin, DistributionError> {
        if let UtilityModel::Iid(spec) = self {
            return margin_for(spec, beta_floor);
        }
        if !(beta_floor > 0.0 && beta_floor < 1.0) {
            return Err(DistributionError::BetaFloor(beta_floor));
        }
        if self.is_degenerate() {
            return Err(DistributionError::MarginUnavailable);
        }
        let mean = self.mean();
        let (mut ok, mut bad) = (mean, self.support_max());
        if self.tail(bad) >= beta_floor {
            ok = bad;
        } else {
            for _ in 0..200 {
                let mid = 0.5 * (ok + bad);
                if mid <= ok || mid >= bad {
                    break;
                }
                if self.tail(mid) >= beta_floor {
                    ok = mid;
                } else {
                    bad = mid;
                }
            }
        }
        if ok <= mean {
            return Err(DistributionError::BetaFloorUnattainable {
                beta_floor,
                achievable: self.tail(mean.next_up()),
            });
        }
        let delta = delta_reaching(ok, mean);
        Ok(Margin {
            delta,
            beta: self.tail((1.0 + delta) * mean),
            mean,
        })
    }

    pub fn margin_with_delta(&self, delta: f64) -> Result<Margin, DistributionError> {
        match self {
            UtilityModel::Iid(spec) => margin_with_delta(spec, delta),
            UtilityModel::Split { .. } => {
                let mean = self.mean();
                let margin = Margin {
                    delta,
                    beta: self.tail((1.0 + delta) * mean),
                    mean,
                };
                if !(delta > 0.0) || !margin.is_valid() {
                    return Err(DistributionError::Delta {
                        delta,
                        support_max: self.support_max(),
                    });
                }
                Ok(margin)
            }
        }
    }

    /// Samples an `n x m` instance. Entry `(i, g)` is the `g`-th word of
    /// ChaCha stream `i` under `seed`, so it does not depend on evaluation order.
    pub fn sample(&self, n: usize, m: usize, seed: u64) -> Instance {
        let base = ChaCha8Rng::seed_from_u64(seed);
        let mut utilities = Vec::with_capacity(n * m);
        for agent in 0..n {
            let mut rng = base.clone();
            rng.set_stream(agent as u64);
            rng.set_word_pos(0);
            for good in 0..m {
                let u = unit_f64(rng.next_u64());
                utilities.push(self.spec_for_good(good, m).sample_from_unit(u));
            }
        }
        Instance::from_flat(n, m, utilities).expect("sampled utilities lie in [0, 1]")
    }
}

impl fmt::Display for UtilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilityModel::Iid(spec) => write!(f, "{spec}"),
            UtilityModel::Split { first, second } => write!(f, "split:{first}|{second}"),
        }
    }
}

impl FromStr for UtilityModel {
    type Err = DistributionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().strip_prefix("split:") {
            Some(rest) => {
                let (a, b) = rest
                    .split_once('|')
                    .ok_or_else(|| DistributionError::Syntax(s.to_string()))?;
                Ok(UtilityModel::Split {
                    first: a.parse()?,
                    second: b.parse()?,
                })
            }
            None => Ok(UtilityModel::Iid(s.trim().parse()?)),
        }
    }
}

impl Serialize for UtilityModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for UtilityModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl From<DistributionSpec> for UtilityModel {
    fn from(spec: DistributionSpec) -> Self {
        UtilityModel::Iid(spec)
    }
}

/// Samples an `n x m` instance with i.i.d. entries from `spec`.
pub fn sample_instance(spec: &DistributionSpec, n: usize, m: usize, seed: u64) -> Instance {
    UtilityModel::Iid(spec.clone()).sample(n, m, seed)
}

/// Top 53 bits as a float in `[0, 1)`.
fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform01() -> DistributionSpec {
        DistributionSpec::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_instance(&uniform01(), 3, 3, 42);
        let b = sample_instance(&uniform01(), 3, 3, 42);
        assert_eq!(a, b);
        assert_ne!(a, sample_instance(&uniform01(), 3, 3, 43));
    }

    #[test]
    fn entries_do_not_depend_on_shape() {
        // entry (i, g) is keyed by (seed, i, g) only
        let small = sample_instance(&uniform01(), 2, 3, 9);
        let big = sample_instance(&uniform01(), 4, 7, 9);
        for i in 0..2 {
            for g in 0..3 {
                assert_eq!(small.utility(i, g), big.utility(i, g));
            }
        }
    }

    #[test]
    fn point_mass_at_zero_gives_zero_matrix() {
        let spec = DistributionSpec::bernoulli(1.0).unwrap();
        let inst = sample_instance(&spec, 4, 6, 1);
        assert!(inst.rows().flatten().all(|&u| u == 0.0));
    }

    #[test]
    fn narrow_uniform_stays_in_range() {
        let spec = DistributionSpec::uniform(0.4, 0.6).unwrap();
        for seed in 0..20 {
            let inst = sample_instance(&spec, 3, 5, seed);
            assert!(inst.rows().flatten().all(|&u| (0.4..=0.6).contains(&u)));
        }
    }

    #[test]
    fn margin_examples() {
        let m = margin_for(&uniform01(), 0.25).unwrap();
        assert_eq!(m.delta, 0.5);
        assert_eq!(m.beta, 0.25);
        assert_eq!(m.threshold(), 0.75);

        let b = margin_for(&DistributionSpec::bernoulli(0.5).unwrap(), 0.5).unwrap();
        assert!(b.delta <= 1.0 && b.delta > 0.99);
        assert_eq!(b.beta, 0.5);

        let point = DistributionSpec::discrete(vec![0.5], vec![1.0]).unwrap();
        assert_eq!(margin_for(&point, 0.3), Err(DistributionError::MarginUnavailable));
    }

    #[test]
    fn margin_rejects_unreachable_floor() {
        assert!(matches!(
            margin_for(&uniform01(), 0.6),
            Err(DistributionError::BetaFloorUnattainable { .. })
        ));
        assert!(matches!(
            margin_for(&DistributionSpec::bernoulli(0.8).unwrap(), 0.3),
            Err(DistributionError::BetaFloorUnattainable { .. })
        ));
        assert_eq!(margin_for(&uniform01(), 0.0), Err(DistributionError::BetaFloor(0.0)));
        assert_eq!(margin_for(&uniform01(), 1.0), Err(DistributionError::BetaFloor(1.0)));
    }

    #[test]
    fn discrete_margin_picks_largest_qualifying_atom() {
        // mean = 0.1*0 + 0.4*0.5 + 0.3*0.8 + 0.2*1 = 0.64
        let spec =
            DistributionSpec::discrete(vec![0.0, 0.5, 0.8, 1.0], vec![0.1, 0.4, 0.3, 0.2]).unwrap();
        let m = margin_for(&spec, 0.3).unwrap();
        assert!((m.threshold() - 0.8).abs() < 1e-12);
        assert!((m.beta - 0.5).abs() < 1e-12);
        let m = margin_for(&spec, 0.2).unwrap();
        assert!((m.threshold() - 1.0).abs() < 1e-12);
        assert!((m.beta - 0.2).abs() < 1e-12);
    }

    #[test]
    fn margin_with_explicit_delta() {
        let m = margin_with_delta(&uniform01(), 0.2).unwrap();
        assert!((m.beta - 0.4).abs() < 1e-12);
        assert!(margin_with_delta(&uniform01(), 1.5).is_err());
        assert!(margin_with_delta(&uniform01(), 0.0).is_err());
    }

    #[test]
    fn chernoff_examples() {
        let v = chernoff_bound(0.5, 12.0).unwrap();
        assert!((v - 0.36787944117144233).abs() < 1e-12);
        assert_eq!(chernoff_bound(0.3, 0.0).unwrap(), 1.0);
        assert!(chernoff_bound(0.999, 100.0).unwrap() < chernoff_bound(0.999, 10.0).unwrap());
        assert!(chernoff_bound(0.0, 1.0).is_err());
        assert!(chernoff_bound(1.0, 1.0).is_err());
        assert!(chernoff_bound(0.5, -1.0).is_err());
    }

    #[test]
    fn textual_forms() {
        let spec: DistributionSpec = "uniform:0.4,0.6".parse().unwrap();
        assert_eq!(spec, DistributionSpec::Uniform { lo: 0.4, hi: 0.6 });
        assert_eq!(spec.to_string(), "uniform:0.4,0.6");
        assert_eq!(
            "bernoulli:0.25".parse::<DistributionSpec>().unwrap(),
            DistributionSpec::Bernoulli { p: 0.25 }
        );
        let d: DistributionSpec = "discrete:0,0.5;1,0.5".parse().unwrap();
        assert_eq!(d.to_string(), "discrete:0,0.5;1,0.5");
        assert!("gauss:0,1".parse::<DistributionSpec>().is_err());
        assert!("uniform:0.7,0.2".parse::<DistributionSpec>().is_err());
        assert!("discrete:0.5,0.4".parse::<DistributionSpec>().is_err());
        assert!("discrete:1.5,1".parse::<DistributionSpec>().is_err());

        let split: UtilityModel = "split:uniform:0,0.1|uniform:0.9,1".parse().unwrap();
        assert_eq!(split.to_string(), "split:uniform:0,0.1|uniform:0.9,1");
        assert!((split.mean() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degeneracy_flags() {
        assert!(DistributionSpec::uniform(0.3, 0.3).unwrap().is_degenerate());
        assert!(DistributionSpec::bernoulli(0.0).unwrap().is_degenerate());
        assert!(DistributionSpec::discrete(vec![0.2, 0.2], vec![0.5, 0.5])
            .unwrap()
            .is_degenerate());
        assert!(DistributionSpec::discrete(vec![0.2, 0.9], vec![1.0, 0.0])
            .unwrap()
            .is_degenerate());
        assert!(!uniform01().is_degenerate());
    }

    #[test]
    fn split_margin_on_mixture() {
        let split: UtilityModel = "split:uniform:0,0.1|uniform:0.9,1".parse().unwrap();
        let m = split.margin_for(0.3).unwrap();
        // pooled tail at t in [0.9, 1] is (1 - t) * 5
        assert!((m.threshold() - 0.94).abs() < 1e-9);
        assert!(m.beta >= 0.3 - 1e-9);
        assert!(split.margin_for(0.6).is_err());
    }

    #[test]
    fn split_sampling_uses_column_halves() {
        let split: UtilityModel = "split:uniform:0,0.1|uniform:0.9,1".parse().unwrap();
        let inst = split.sample(4, 4, 3);
        for row in inst.rows() {
            assert!(row[..2].iter().all(|&u| u <= 0.1));
            assert!(row[2..].iter().all(|&u| u >= 0.9));
        }
    }
}
