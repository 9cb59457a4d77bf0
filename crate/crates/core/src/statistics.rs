//! Statistics as partitions of a finite sample space: sufficiency and
//! ancillarity checks with certificates, the minimal sufficient partition,
//! exhaustive ancillary enumeration and conditioning on an ancillary block.

use std::collections::HashMap;
use std::fmt;
use std::ops::AddAssign;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{Experiment, ModelError};
use crate::partitions::{blocks_of, RestrictedGrowth};
use crate::rational::Rational;

/// Default upper bound on |𝒳| for exhaustive ancillary enumeration.
pub const DEFAULT_ANCILLARY_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatisticsError {
    #[error("statistic `{statistic}` does not partition the sample space of `{experiment}`: {reason}")]
    NotAPartition {
        statistic: String,
        experiment: String,
        reason: String,
    },
    #[error("statistic `{statistic}` is not ancillary: {certificate}")]
    NotAncillary {
        statistic: String,
        certificate: AncillarityFailure,
    },
    #[error("block {block} of `{statistic}` has probability zero")]
    EmptyBlock { statistic: String, block: usize },
    #[error("statistic `{statistic}` has no block {block}")]
    UnknownBlock { statistic: String, block: String },
    #[error("sample space of `{experiment}` has {size} outcomes, above the enumeration cap {cap}")]
    TooLarge {
        experiment: String,
        size: usize,
        cap: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl StatisticsError {
    pub fn code(&self) -> &'static str {
        match self {
            StatisticsError::NotAPartition { .. } => "NOT_A_PARTITION",
            StatisticsError::NotAncillary { .. } => "NOT_ANCILLARY",
            StatisticsError::EmptyBlock { .. } => "EMPTY_BLOCK",
            StatisticsError::UnknownBlock { .. } => "UNKNOWN_BLOCK",
            StatisticsError::TooLarge { .. } => "TOO_LARGE",
            StatisticsError::Model(e) => e.code(),
        }
    }
}

/// A statistic identified with the partition it induces on 𝒳_E.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatisticPartition {
    pub id: String,
    pub blocks: Vec<Vec<String>>,
}

impl StatisticPartition {
    pub fn new(id: impl Into<String>, blocks: Vec<Vec<String>>) -> Self {
        Self {
            id: id.into(),
            blocks,
        }
    }

    pub fn from_indices(id: impl Into<String>, e: &Experiment, blocks: &[Vec<usize>]) -> Self {
        let blocks = blocks
            .iter()
            .map(|b| b.iter().map(|&j| e.outcomes()[j].clone()).collect())
            .collect();
        Self::new(id, blocks)
    }

    pub fn one_block(e: &Experiment) -> Self {
        Self::new("trivial", vec![e.outcomes().to_vec()])
    }

    pub fn singletons(e: &Experiment) -> Self {
        Self::new(
            "identity",
            e.outcomes().iter().map(|x| vec![x.clone()]).collect(),
        )
    }

    /// Index of the block holding `label`.
    pub fn block_of(&self, label: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.iter().any(|x| x == label))
    }

    /// Checks that the blocks partition 𝒳_E and maps labels to indices.
    pub fn resolve(&self, e: &Experiment) -> Result<Vec<Vec<usize>>, StatisticsError> {
        let fail = |reason: String| StatisticsError::NotAPartition {
            statistic: self.id.clone(),
            experiment: e.id().to_string(),
            reason,
        };
        let mut seen = vec![false; e.num_outcomes()];
        let mut resolved = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            if block.is_empty() {
                return Err(fail("empty block".into()));
            }
            let mut indices = Vec::with_capacity(block.len());
            for label in block {
                let j = e
                    .outcome_index(label)
                    .ok_or_else(|| fail(format!("unknown outcome `{label}`")))?;
                if std::mem::replace(&mut seen[j], true) {
                    return Err(fail(format!("outcome `{label}` appears twice")));
                }
                indices.push(j);
            }
            resolved.push(indices);
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(fail(format!("outcome `{}` is not covered", e.outcomes()[j])));
        }
        Ok(resolved)
    }
}

impl fmt::Display for StatisticPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self.blocks.iter().map(|b| fmt_block(b)).collect();
        write!(f, "{} = {}", self.id, blocks.join(" | "))
    }
}

/// `{(1,1),(1,2)}`
pub fn fmt_block(labels: &[String]) -> String {
    format!("{{{}}}", labels.join(","))
}

fn block_prob(e: &Experiment, param: usize, block: &[usize]) -> Rational {
    block.iter().map(|&j| e.prob(param, j)).sum()
}

/// Within-block conditional distribution that does not depend on θ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalBlock {
    pub outcomes: Vec<String>,
    pub conditionals: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficiencyFailure {
    pub block: usize,
    pub outcome: String,
    pub params: (String, String),
    pub conditionals: (Rational, Rational),
}

impl fmt::Display for SufficiencyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "in block {} the conditional of `{}` is {} under θ={} but {} under θ={}",
            self.block + 1,
            self.outcome,
            self.conditionals.0,
            self.params.0,
            self.conditionals.1,
            self.params.1
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sufficiency {
    /// θ-free conditional table, one entry per block.
    Sufficient(Vec<ConditionalBlock>),
    NotSufficient(SufficiencyFailure),
}

impl Sufficiency {
    pub fn holds(&self) -> bool {
        matches!(self, Sufficiency::Sufficient(_))
    }
}

pub fn is_sufficient(e: &Experiment, t: &StatisticPartition) -> Result<Sufficiency, StatisticsError> {
    let blocks = t.resolve(e)?;
    let mut table = Vec::with_capacity(blocks.len());
    for (b, block) in blocks.iter().enumerate() {
        // (param, conditional per member) for every θ giving the block mass
        let mut reference: Option<(usize, Vec<Rational>)> = None;
        for i in 0..e.num_params() {
            let mass = block_prob(e, i, block);
            if mass.is_zero() {
                continue;
            }
            let conditionals: Vec<Rational> = block.iter().map(|&j| e.prob(i, j) / &mass).collect();
            match &reference {
                None => reference = Some((i, conditionals)),
                Some((i0, expected)) => {
                    if let Some(k) = (0..block.len()).find(|&k| expected[k] != conditionals[k]) {
                        return Ok(Sufficiency::NotSufficient(SufficiencyFailure {
                            block: b,
                            outcome: e.outcomes()[block[k]].clone(),
                            params: (e.params()[*i0].clone(), e.params()[i].clone()),
                            conditionals: (expected[k].clone(), conditionals[k].clone()),
                        }));
                    }
                }
            }
        }
        let (_, conditionals) = reference.expect("validated experiments have no dead outcomes");
        table.push(ConditionalBlock {
            outcomes: block.iter().map(|&j| e.outcomes()[j].clone()).collect(),
            conditionals,
        });
    }
    Ok(Sufficiency::Sufficient(table))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AncillarityFailure {
    pub block: usize,
    pub params: (String, String),
    pub probs: (Rational, Rational),
}

impl fmt::Display for AncillarityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "block {} has probability {} under θ={} but {} under θ={}",
            self.block + 1,
            self.probs.0,
            self.params.0,
            self.probs.1,
            self.params.1
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ancillarity {
    /// θ-free block probabilities.
    Ancillary(Vec<Rational>),
    NotAncillary(AncillarityFailure),
}

impl Ancillarity {
    pub fn holds(&self) -> bool {
        matches!(self, Ancillarity::Ancillary(_))
    }
}

pub fn is_ancillary(e: &Experiment, t: &StatisticPartition) -> Result<Ancillarity, StatisticsError> {
    let blocks = t.resolve(e)?;
    Ok(ancillarity_of(e, &blocks))
}

fn ancillarity_of(e: &Experiment, blocks: &[Vec<usize>]) -> Ancillarity {
    let mut probs = Vec::with_capacity(blocks.len());
    for (b, block) in blocks.iter().enumerate() {
        let first = block_prob(e, 0, block);
        for i in 1..e.num_params() {
            let p = block_prob(e, i, block);
            if p != first {
                return Ancillarity::NotAncillary(AncillarityFailure {
                    block: b,
                    params: (e.params()[0].clone(), e.params()[i].clone()),
                    probs: (first, p),
                });
            }
        }
        probs.push(first);
    }
    Ancillarity::Ancillary(probs)
}

/// Block index of every outcome under the minimal sufficient partition.
/// Blocks are numbered by first appearance in the outcome order.
pub(crate) fn minimal_sufficient_assignment(e: &Experiment) -> Vec<usize> {
    let mut keys: HashMap<Vec<Rational>, usize> = HashMap::new();
    (0..e.num_outcomes())
        .map(|j| {
            let column = e.column(j);
            let pivot = column
                .iter()
                .find(|v| !v.is_zero())
                .cloned()
                .expect("validated experiments have no dead outcomes");
            let key: Vec<Rational> = column.iter().map(|v| v / &pivot).collect();
            let next = keys.len();
            *keys.entry(key).or_insert(next)
        })
        .collect()
}

/// Outcomes grouped by proportionality of their likelihood vectors.
pub fn minimal_sufficient(e: &Experiment) -> StatisticPartition {
    minimal_sufficient_from(e, &minimal_sufficient_assignment(e))
}

pub(crate) fn minimal_sufficient_from(e: &Experiment, assignment: &[usize]) -> StatisticPartition {
    StatisticPartition::from_indices(format!("T_min({})", e.id()), e, &blocks_of(assignment))
}

/// Every ancillary partition of 𝒳_E other than the one-block partition, in
/// lexicographic order of restricted growth strings.
pub fn enumerate_ancillaries(e: &Experiment, cap: usize) -> Result<Vec<StatisticPartition>, StatisticsError> {
    let n = e.num_outcomes();
    if n > cap {
        return Err(StatisticsError::TooLarge {
            experiment: e.id().to_string(),
            size: n,
            cap,
        });
    }
    let diffs = scaled_differences(e);
    let found = match narrow(&diffs, n) {
        Some(small) => ancillary_strings(&small, n),
        None => ancillary_strings(&diffs, n),
    };
    Ok(found
        .into_iter()
        .enumerate()
        .map(|(k, rgs)| StatisticPartition::from_indices(format!("anc{}", k + 1), e, &blocks_of(&rgs)))
        .collect())
}

/// Integer vectors d[i][j] ∝ p_{θ_{i+1}}(x_j) − p_{θ_0}(x_j), all scaled by
/// one common positive factor. A block is ancillary iff its column sums of
/// `d` vanish.
fn scaled_differences(e: &Experiment) -> Vec<Vec<BigInt>> {
    let lcm = e
        .pmf()
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let scaled: Vec<Vec<BigInt>> = e
        .pmf()
        .iter()
        .map(|row| row.iter().map(|p| p.numer() * (&lcm / p.denom())).collect())
        .collect();
    scaled[1..]
        .iter()
        .map(|row| row.iter().zip(&scaled[0]).map(|(a, b)| a - b).collect())
        .collect()
}

fn narrow(diffs: &[Vec<BigInt>], n: usize) -> Option<Vec<Vec<i128>>> {
    let limit = i128::MAX / (n as i128 + 1);
    diffs
        .iter()
        .map(|row| {
            row.iter()
                .map(|d| d.to_i128().filter(|v| v.abs() < limit))
                .collect::<Option<Vec<_>>>()
        })
        .collect()
}

fn ancillary_strings<T>(diffs: &[Vec<T>], n: usize) -> Vec<Vec<usize>>
where
    T: Clone + Zero + for<'a> AddAssign<&'a T>,
{
    let mut found = Vec::new();
    let mut sums: Vec<Vec<T>> = vec![vec![T::zero(); n]; diffs.len()];
    let mut partitions = RestrictedGrowth::new(n);
    // skip the one-block partition
    partitions.advance();
    while let Some(rgs) = partitions.advance() {
        let blocks = rgs.iter().max().map_or(0, |m| m + 1);
        let ancillary = diffs.iter().zip(sums.iter_mut()).all(|(row, sum)| {
            sum[..blocks].iter_mut().for_each(|s| *s = T::zero());
            for (j, &b) in rgs.iter().enumerate() {
                sum[b] += &row[j];
            }
            sum[..blocks].iter().all(Zero::is_zero)
        });
        if ancillary {
            found.push(rgs.to_vec());
        }
    }
    found
}

/// E conditioned on block `block` of the ancillary statistic `t`: outcomes
/// are the block members, pmf p_θ(x)/p_θ(block).
pub fn condition(e: &Experiment, t: &StatisticPartition, block: usize) -> Result<Experiment, StatisticsError> {
    let blocks = t.resolve(e)?;
    let members = blocks.get(block).ok_or_else(|| StatisticsError::UnknownBlock {
        statistic: t.id.clone(),
        block: format!("#{}", block + 1),
    })?;
    let mass = match ancillarity_of(e, &blocks) {
        Ancillarity::Ancillary(probs) => probs[block].clone(),
        Ancillarity::NotAncillary(certificate) => {
            return Err(StatisticsError::NotAncillary {
                statistic: t.id.clone(),
                certificate,
            })
        }
    };
    if !mass.is_positive() {
        return Err(StatisticsError::EmptyBlock {
            statistic: t.id.clone(),
            block,
        });
    }
    if members.len() == e.num_outcomes() {
        return Ok(e.clone());
    }
    let mut members = members.clone();
    members.sort_unstable();
    let rows = (0..e.num_params())
        .map(|i| members.iter().map(|&j| e.prob(i, j) / &mass).collect())
        .collect();
    let outcomes = members.iter().map(|&j| e.outcomes()[j].clone()).collect();
    let id = format!("{}|{}={}", e.id(), t.id, block + 1);
    Ok(Experiment::new(id, e.params().to_vec(), outcomes, rows)?)
}

/// Accuracy of the maximum-likelihood estimator within one experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MleAccuracy {
    /// Estimate (parameter index) per outcome; `None` when the maximum is tied.
    pub estimates: Vec<Option<usize>>,
    /// `table[i][k]` = P_{θ_i}(θ̂ = θ_k).
    pub table: Vec<Vec<Rational>>,
    /// P_{θ_i}(θ̂ is tied).
    pub tied: Vec<Rational>,
}

pub fn mle_accuracy(e: &Experiment) -> MleAccuracy {
    let m = e.num_params();
    let estimates: Vec<Option<usize>> = (0..e.num_outcomes())
        .map(|j| {
            let column = e.column(j);
            let best = column.iter().max().expect("at least one parameter");
            let argmax: Vec<usize> = (0..m).filter(|&i| &column[i] == best).collect();
            (argmax.len() == 1).then(|| argmax[0])
        })
        .collect();
    let mut table = vec![vec![Rational::zero(); m]; m];
    let mut tied = vec![Rational::zero(); m];
    for (j, estimate) in estimates.iter().enumerate() {
        for i in 0..m {
            match estimate {
                Some(k) => table[i][*k] += e.prob(i, j),
                None => tied[i] += e.prob(i, j),
            }
        }
    }
    MleAccuracy {
        estimates,
        table,
        tied,
    }
}
