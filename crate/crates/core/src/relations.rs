//! The set relations S, C, A and L on pairs of inference bases, their
//! equivalence closure over a finite universe, and explicit witness chains
//! that connect proportional-likelihood bases through one 50-50 mixture.
//!
//! * `S`: same experiment, outcomes in one block of the minimal sufficient
//!   partition.
//! * `C`: one side is a 50-50 mixture observed at `(j,x)`, the other is its
//!   component `j` observed at `x`.
//! * `A`: one side is the other's experiment conditioned on a block `B` of
//!   an ancillary statistic containing the observed outcome. Outcome labels
//!   either match verbatim or carry the mixture tag `(j,x)`, which covers
//!   the component indicator of any mixture.
//! * `L`: likelihood vectors proportional with a θ-free constant.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::model::{
    make_mixture, proportional, proportionality_constant, tag_label, untag_label, Experiment, InferenceBase,
    MixtureExperiment, ModelError,
};
use crate::rational::{half, Rational};
use crate::statistics::{
    is_sufficient, minimal_sufficient_assignment, minimal_sufficient_from, Sufficiency, StatisticPartition,
};
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    S,
    C,
    A,
    L,
}

impl RelationKind {
    pub const ALL: [RelationKind; 4] = [RelationKind::S, RelationKind::C, RelationKind::A, RelationKind::L];
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelationKind::S => "S",
            RelationKind::C => "C",
            RelationKind::A => "A",
            RelationKind::L => "L",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown relation kind `{0}` (expected S, C, A or L)")]
pub struct ParseKindError(pub String);

impl FromStr for RelationKind {
    type Err = ParseKindError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "S" | "s" => Ok(RelationKind::S),
            "C" | "c" => Ok(RelationKind::C),
            "A" | "a" => Ok(RelationKind::A),
            "L" | "l" => Ok(RelationKind::L),
            other => Err(ParseKindError(other.to_string())),
        }
    }
}

/// Parses `S,C` or `S,C,A,L`. An empty string gives the empty set.
pub fn parse_kinds(s: &str) -> Result<BTreeSet<RelationKind>, ParseKindError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(RelationKind::from_str)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{a} and {b} do not have proportional likelihoods")]
    NotLRelated { a: String, b: String },
    #[error("inference base {0} is already in the universe")]
    DuplicateBase(String),
    #[error("experiment id `{0}` is registered with a different model")]
    ConflictingExperiment(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("chain step {step} ({kind}) from {from} to {to} failed its relation check")]
    ChainStepFailed {
        step: usize,
        kind: RelationKind,
        from: String,
        to: String,
    },
}

impl RelationError {
    pub fn code(&self) -> &'static str {
        match self {
            RelationError::Model(e) => e.code(),
            RelationError::NotLRelated { .. } => "NOT_L_RELATED",
            RelationError::DuplicateBase(_) => "DUPLICATE_BASE",
            RelationError::ConflictingExperiment(_) => "CONFLICTING_EXPERIMENT",
            RelationError::UnknownExperiment(_) => "UNKNOWN_EXPERIMENT",
            RelationError::ChainStepFailed { .. } => "CHAIN_STEP_FAILED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// Evidence that a relation holds between two bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Both outcomes lie in block `block` of the minimal sufficient partition.
    Sufficiency { statistic: StatisticPartition, block: usize },
    /// The `mixture` side is a 50-50 mixture observed in component `component`.
    Conditionality { mixture: Side, component: u8 },
    /// The `conditioned` side's experiment, conditioned on block `block` of
    /// `statistic`, is the other side's experiment. `component` is set when
    /// the block is a mixture component and its labels carry the tag.
    Ancillarity {
        conditioned: Side,
        statistic: StatisticPartition,
        block: usize,
        block_prob: Rational,
        component: Option<u8>,
    },
    /// p_first = constant · p_second.
    Likelihood { constant: Rational },
}

impl Witness {
    pub fn kind(&self) -> RelationKind {
        match self {
            Witness::Sufficiency { .. } => RelationKind::S,
            Witness::Conditionality { .. } => RelationKind::C,
            Witness::Ancillarity { .. } => RelationKind::A,
            Witness::Likelihood { .. } => RelationKind::L,
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Sufficiency { statistic, block } => write!(
                f,
                "sufficiency witness: statistic {}, block {}",
                statistic.id,
                crate::statistics::fmt_block(&statistic.blocks[*block])
            ),
            Witness::Conditionality { mixture, component } => {
                let which = if *mixture == Side::First { "first" } else { "second" };
                write!(f, "conditionality witness: {which} base is the 50-50 mixture, component {component}")
            }
            Witness::Ancillarity {
                statistic, block, ..
            } => write!(
                f,
                "conditioning witness: statistic {}, block {}",
                statistic.id,
                crate::statistics::fmt_block(&statistic.blocks[*block])
            ),
            Witness::Likelihood { constant } => write!(f, "likelihood witness: c = {constant}"),
        }
    }
}

fn key(e: &Arc<Experiment>) -> usize {
    Arc::as_ptr(e) as usize
}

/// Outcomes of a tagged experiment split by component tag.
#[derive(Debug)]
struct TaggedView {
    /// (member index, stripped label) per tag 1 and 2.
    members: [Vec<(usize, String)>; 2],
    /// Component mass is 1/2 under every θ.
    half_mass: [bool; 2],
}

fn tagged_view(e: &Experiment) -> Option<TaggedView> {
    let mut members: [Vec<(usize, String)>; 2] = [Vec::new(), Vec::new()];
    for (j, label) in e.outcomes().iter().enumerate() {
        let (tag, rest) = untag_label(label)?;
        members[tag as usize - 1].push((j, rest.to_string()));
    }
    let half_mass = [0, 1].map(|t| {
        (0..e.num_params()).all(|i| {
            let mass: Rational = members[t].iter().map(|(j, _)| e.prob(i, *j)).sum();
            mass == half()
        })
    });
    Some(TaggedView { members, half_mass })
}

/// How outcomes of the smaller experiment map into the larger one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum LabelMap {
    Verbatim,
    Tagged(u8),
}

impl LabelMap {
    fn apply(self, label: &str) -> String {
        match self {
            LabelMap::Verbatim => label.to_string(),
            LabelMap::Tagged(j) => tag_label(j, label),
        }
    }
}

/// Result of conditioning `big` on the image of `small`'s outcomes.
#[derive(Debug, Clone)]
struct ConditionalMatch {
    block: Vec<usize>,
    mass: Rational,
}

/// Memoising relation checker; experiments are keyed by `Arc` identity, so
/// every base passed to one checker must stay alive for its lifetime.
#[derive(Debug, Default)]
struct Checker {
    min_suff: HashMap<usize, (Vec<usize>, StatisticPartition)>,
    tagged: HashMap<usize, Option<TaggedView>>,
    component: HashMap<(usize, usize, u8), bool>,
    conditional: HashMap<(usize, usize, LabelMap), Option<ConditionalMatch>>,
}

impl Checker {
    fn related(&mut self, kind: RelationKind, a: &InferenceBase, b: &InferenceBase) -> Result<Option<Witness>, RelationError> {
        a.experiment().check_same_params(b.experiment())?;
        Ok(match kind {
            RelationKind::S => self.sufficiency(a, b),
            RelationKind::C => self
                .conditionality(a, b)
                .map(|j| Witness::Conditionality {
                    mixture: Side::First,
                    component: j,
                })
                .or_else(|| {
                    self.conditionality(b, a).map(|j| Witness::Conditionality {
                        mixture: Side::Second,
                        component: j,
                    })
                }),
            RelationKind::A => self
                .ancillarity(a, b, Side::First)
                .or_else(|| self.ancillarity(b, a, Side::Second)),
            RelationKind::L => proportional(&a.experiment().column(a.outcome()), &b.experiment().column(b.outcome()))
                .map(|constant| Witness::Likelihood { constant }),
        })
    }

    fn sufficiency(&mut self, a: &InferenceBase, b: &InferenceBase) -> Option<Witness> {
        let (ea, eb) = (a.experiment(), b.experiment());
        if !(Arc::ptr_eq(ea, eb) || (ea.id() == eb.id() && ea == eb)) {
            return None;
        }
        let (assignment, statistic) = self
            .min_suff
            .entry(key(ea))
            .or_insert_with(|| {
                let assignment = minimal_sufficient_assignment(ea);
                let statistic = minimal_sufficient_from(ea, &assignment);
                (assignment, statistic)
            });
        let block = assignment[a.outcome()];
        if block != assignment[b.outcome()] {
            return None;
        }
        Some(Witness::Sufficiency {
            statistic: statistic.clone(),
            block,
        })
    }

    /// Component tag if `mix` is a 50-50 mixture observed at `(j,x)` and
    /// `comp` is its component `j` observed at `x`.
    fn conditionality(&mut self, mix: &InferenceBase, comp: &InferenceBase) -> Option<u8> {
        let (tag, rest) = untag_label(mix.outcome_label())?;
        if rest != comp.outcome_label() {
            return None;
        }
        let (em, ec) = (mix.experiment(), comp.experiment());
        let memo = (key(em), key(ec), tag);
        if let Some(&ok) = self.component.get(&memo) {
            return ok.then_some(tag);
        }
        let view = self.tagged.entry(key(em)).or_insert_with(|| tagged_view(em));
        let ok = view.as_ref().is_some_and(|view| {
            let t = tag as usize - 1;
            view.half_mass[t]
                && view.members[t].len() == ec.num_outcomes()
                && view.members[t].iter().all(|(k, label)| {
                    ec.outcome_index(label).is_some_and(|x| {
                        (0..em.num_params()).all(|i| em.prob(i, *k) * Rational::from_integer(2.into()) == *ec.prob(i, x))
                    })
                })
        });
        self.component.insert(memo, ok);
        ok.then_some(tag)
    }

    fn ancillarity(&mut self, big: &InferenceBase, small: &InferenceBase, side: Side) -> Option<Witness> {
        let maps = match untag_label(big.outcome_label()) {
            Some((j, rest)) if rest == small.outcome_label() => vec![LabelMap::Tagged(j)],
            _ if big.outcome_label() == small.outcome_label() => vec![LabelMap::Verbatim],
            _ => return None,
        };
        let (eg, es) = (big.experiment(), small.experiment());
        for map in maps {
            let memo = (key(eg), key(es), map);
            let found = self
                .conditional
                .entry(memo)
                .or_insert_with(|| conditional_match(eg, es, map))
                .clone();
            if let Some(m) = found {
                let mut rest: Vec<usize> = (0..eg.num_outcomes()).filter(|j| !m.block.contains(j)).collect();
                rest.sort_unstable();
                let mut blocks = vec![m.block.clone()];
                if !rest.is_empty() {
                    blocks.push(rest);
                }
                let id = match map {
                    LabelMap::Tagged(_) => "J",
                    LabelMap::Verbatim if blocks.len() == 1 => "trivial",
                    LabelMap::Verbatim => "1_B",
                };
                return Some(Witness::Ancillarity {
                    conditioned: side,
                    statistic: StatisticPartition::from_indices(id, eg, &blocks),
                    block: 0,
                    block_prob: m.mass,
                    component: match map {
                        LabelMap::Tagged(j) => Some(j),
                        LabelMap::Verbatim => None,
                    },
                });
            }
        }
        None
    }
}

/// The block `B` of `big` that `small`'s outcomes map onto, if `{B, 𝒳∖B}`
/// is ancillary for `big` and `big | B` equals `small` under the label map.
fn conditional_match(big: &Experiment, small: &Experiment, map: LabelMap) -> Option<ConditionalMatch> {
    let image: Vec<usize> = small
        .outcomes()
        .iter()
        .map(|x| big.outcome_index(&map.apply(x)))
        .collect::<Option<_>>()?;
    let mass: Rational = image.iter().map(|&j| big.prob(0, j)).sum();
    if !mass.is_positive() {
        return None;
    }
    for i in 0..big.num_params() {
        let mass_i: Rational = image.iter().map(|&j| big.prob(i, j)).sum();
        if mass_i != mass {
            return None;
        }
        for (x, &j) in image.iter().enumerate() {
            if *big.prob(i, j) != small.prob(i, x) * &mass {
                return None;
            }
        }
    }
    let mut block = image;
    block.sort_unstable();
    Some(ConditionalMatch { block, mass })
}

/// Checks whether `a` and `b` are related by `kind`, returning the witness.
pub fn related(kind: RelationKind, a: &InferenceBase, b: &InferenceBase) -> Result<Option<Witness>, RelationError> {
    Checker::default().related(kind, a, b)
}

/// A finite set of inference bases and the experiments they reference.
#[derive(Debug, Clone, Default)]
pub struct Universe {
    bases: Vec<InferenceBase>,
    experiments: BTreeMap<String, Arc<Experiment>>,
}

impl Universe {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `e`, returning the canonical shared instance for its id.
    pub fn register(&mut self, e: Arc<Experiment>) -> Result<Arc<Experiment>, RelationError> {
        match self.experiments.get(e.id()) {
            Some(existing) if **existing == *e => Ok(existing.clone()),
            Some(_) => Err(RelationError::ConflictingExperiment(e.id().to_string())),
            None => {
                self.experiments.insert(e.id().to_string(), e.clone());
                Ok(e)
            }
        }
    }

    pub fn add_base(&mut self, base: InferenceBase) -> Result<usize, RelationError> {
        if self.position(&base).is_some() {
            return Err(RelationError::DuplicateBase(base.to_string()));
        }
        let experiment = self.register(base.experiment().clone())?;
        self.bases.push(InferenceBase::from_index(experiment, base.outcome()));
        Ok(self.bases.len() - 1)
    }

    /// Adds `experiment_id:outcome`, the experiment being already registered.
    pub fn add(&mut self, experiment_id: &str, outcome: &str) -> Result<usize, RelationError> {
        let e = self
            .experiments
            .get(experiment_id)
            .cloned()
            .ok_or_else(|| RelationError::UnknownExperiment(experiment_id.to_string()))?;
        self.add_base(InferenceBase::new(e, outcome)?)
    }

    pub fn position(&self, base: &InferenceBase) -> Option<usize> {
        self.bases.iter().position(|b| b.same_base(base))
    }

    pub fn bases(&self) -> &[InferenceBase] {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn experiment(&self, id: &str) -> Option<&Arc<Experiment>> {
        self.experiments.get(id)
    }

    pub fn experiments(&self) -> impl Iterator<Item = &Arc<Experiment>> {
        self.experiments.values()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub kind: RelationKind,
    pub witness: Witness,
}

#[derive(Debug, Clone)]
pub struct ClosureResult {
    pub kinds_used: BTreeSet<RelationKind>,
    pub edges: Vec<Edge>,
    /// Connected components, each sorted, ordered by lowest member.
    pub classes: Vec<Vec<usize>>,
}

impl ClosureResult {
    pub fn class_of(&self, index: usize) -> usize {
        self.classes
            .iter()
            .position(|c| c.contains(&index))
            .expect("every base belongs to a class")
    }

    pub fn same_class(&self, a: usize, b: usize) -> bool {
        self.class_of(a) == self.class_of(b)
    }

    /// Pairs joined only through transitivity, not by a direct edge.
    pub fn added_pairs(&self) -> usize {
        let direct: BTreeSet<(usize, usize)> = self.edges.iter().map(|e| (e.from, e.to)).collect();
        let within: usize = self.classes.iter().map(|c| c.len() * (c.len() - 1) / 2).sum();
        within - direct.len()
    }

    /// Classes restricted to indices below `n`, empty ones dropped.
    pub fn restricted(&self, n: usize) -> Vec<Vec<usize>> {
        self.classes
            .iter()
            .map(|c| c.iter().copied().filter(|&i| i < n).collect::<Vec<_>>())
            .filter(|c| !c.is_empty())
            .collect()
    }
}

/// Smallest equivalence relation on the universe containing every pair
/// related by one of `kinds`. Pairs with different parameter lists are
/// never related.
pub fn closure(u: &Universe, kinds: &BTreeSet<RelationKind>) -> ClosureResult {
    closure_with(&mut Checker::default(), u, kinds)
}

fn closure_with(checker: &mut Checker, u: &Universe, kinds: &BTreeSet<RelationKind>) -> ClosureResult {
    let n = u.len();
    let mut edges = Vec::new();
    let mut uf = UnionFind::new(n);
    for &kind in kinds {
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&u.bases[i], &u.bases[j]);
                if a.experiment().params() != b.experiment().params() {
                    continue;
                }
                if let Some(witness) = checker.related(kind, a, b).expect("parameter lists already match") {
                    uf.union(i, j);
                    edges.push(Edge {
                        from: i,
                        to: j,
                        kind,
                        witness,
                    });
                }
            }
        }
    }
    ClosureResult {
        kinds_used: kinds.clone(),
        edges,
        classes: uf.classes(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub from: InferenceBase,
    pub to: InferenceBase,
    pub kind: RelationKind,
    pub witness: Witness,
}

/// C–S–C chain through the 50-50 mixture of the two experiments.
#[derive(Debug, Clone)]
pub struct WitnessChain {
    pub from: InferenceBase,
    pub to: InferenceBase,
    /// p_from = constant · p_to.
    pub constant: Rational,
    pub mixture: Option<MixtureExperiment>,
    pub steps: Vec<ChainStep>,
    /// The statistic pairing `(1,x_a)` with `(2,x_b)`, singletons elsewhere.
    pub birnbaum_statistic: Option<StatisticPartition>,
    /// θ-free conditional probability of `(1,x_a)` within its block.
    pub block_conditional: Option<Rational>,
}

impl WitnessChain {
    /// Re-checks every step, endpoint continuity and the sufficiency of the
    /// pairing statistic.
    pub fn verify(&self) -> Result<(), String> {
        let mut current = &self.from;
        for (k, step) in self.steps.iter().enumerate() {
            if !step.from.same_base(current) {
                return Err(format!("step {} starts at {} instead of {}", k + 1, step.from, current));
            }
            match related(step.kind, &step.from, &step.to) {
                Ok(Some(_)) => {}
                Ok(None) => return Err(format!("step {} ({}) does not hold", k + 1, step.kind)),
                Err(e) => return Err(format!("step {}: {e}", k + 1)),
            }
            current = &step.to;
        }
        if !current.same_base(&self.to) {
            return Err(format!("chain ends at {current} instead of {}", self.to));
        }
        if let (Some(mix), Some(t)) = (&self.mixture, &self.birnbaum_statistic) {
            match is_sufficient(&mix.experiment, t) {
                Ok(Sufficiency::Sufficient(table)) => {
                    let block = table
                        .iter()
                        .find(|b| b.outcomes.len() == 2)
                        .ok_or("pairing statistic lost its two-point block")?;
                    if Some(&block.conditionals[0]) != self.block_conditional.as_ref() {
                        return Err("block conditional disagrees with c/(1+c)".into());
                    }
                }
                Ok(Sufficiency::NotSufficient(f)) => return Err(format!("pairing statistic not sufficient: {f}")),
                Err(e) => return Err(e.to_string()),
            }
        }
        Ok(())
    }
}

/// Builds (E_a,x_a) —C— (E_mix,(1,x_a)) —S— (E_mix,(2,x_b)) —C— (E_b,x_b).
pub fn birnbaum_chain(a: &InferenceBase, b: &InferenceBase) -> Result<WitnessChain, RelationError> {
    let constant = proportionality_constant(a, b)?.ok_or_else(|| RelationError::NotLRelated {
        a: a.to_string(),
        b: b.to_string(),
    })?;
    if a.same_base(b) {
        return Ok(WitnessChain {
            from: a.clone(),
            to: b.clone(),
            constant,
            mixture: None,
            steps: Vec::new(),
            birnbaum_statistic: None,
            block_conditional: None,
        });
    }
    let mix = make_mixture(a.experiment().clone(), b.experiment().clone(), half())?;
    let em = mix.experiment.clone();
    let first = InferenceBase::new(em.clone(), &tag_label(1, a.outcome_label()))?;
    let second = InferenceBase::new(em.clone(), &tag_label(2, b.outcome_label()))?;
    let hops = [
        (a, &first, RelationKind::C),
        (&first, &second, RelationKind::S),
        (&second, b, RelationKind::C),
    ];
    let mut checker = Checker::default();
    let mut steps = Vec::with_capacity(3);
    for (k, (from, to, kind)) in hops.into_iter().enumerate() {
        let witness = checker.related(kind, from, to)?.ok_or_else(|| RelationError::ChainStepFailed {
            step: k + 1,
            kind,
            from: from.to_string(),
            to: to.to_string(),
        })?;
        steps.push(ChainStep {
            from: from.clone(),
            to: to.clone(),
            kind,
            witness,
        });
    }
    let pair = vec![first.outcome(), second.outcome()];
    let mut blocks = vec![pair.clone()];
    blocks.extend((0..em.num_outcomes()).filter(|j| !pair.contains(j)).map(|j| vec![j]));
    let statistic = StatisticPartition::from_indices("T_B", &em, &blocks);
    let block_conditional = &constant / (Rational::one() + &constant);
    Ok(WitnessChain {
        from: a.clone(),
        to: b.clone(),
        constant,
        mixture: Some(mix),
        steps,
        birnbaum_statistic: Some(statistic),
        block_conditional: Some(block_conditional),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LPair {
    pub a: usize,
    pub b: usize,
    pub constant: Rational,
}

#[derive(Debug, Clone)]
pub struct BirnbaumReport {
    pub original_len: usize,
    pub l_pairs: Vec<LPair>,
    /// One chain per L-pair, in `l_pairs` order.
    pub chains: Vec<WitnessChain>,
    pub augmented: Universe,
    pub l_classes: Vec<Vec<usize>>,
    /// closure({S,C}) on the augmented universe, restricted to the original bases.
    pub sc_classes: Vec<Vec<usize>>,
    pub classes_match: bool,
    /// No {S,C}-class of the augmented universe spans two L-classes.
    pub sound: bool,
    pub failures: Vec<String>,
}

impl BirnbaumReport {
    pub fn passed(&self) -> bool {
        self.classes_match && self.sound && self.failures.is_empty()
    }
}

/// Augments `u` with the mixtures needed to chain every L-related pair and
/// compares closure({S,C}) on the result with closure({L}) on `u`.
pub fn verify_birnbaum(u: &Universe, depth: usize) -> BirnbaumReport {
    let n = u.len();
    let mut checker = Checker::default();
    let l = closure_with(&mut checker, u, &BTreeSet::from([RelationKind::L]));
    let l_pairs: Vec<LPair> = l
        .edges
        .iter()
        .map(|e| LPair {
            a: e.from,
            b: e.to,
            constant: match &e.witness {
                Witness::Likelihood { constant } => constant.clone(),
                _ => unreachable!("L edges carry likelihood witnesses"),
            },
        })
        .collect();

    let mut augmented = u.clone();
    let mut chains = Vec::new();
    let mut failures = Vec::new();
    let sc_kinds = BTreeSet::from([RelationKind::S, RelationKind::C]);
    for round in 0..depth {
        let pending: Vec<&LPair> = if round == 0 {
            l_pairs.iter().collect()
        } else {
            let sc = closure_with(&mut Checker::default(), &augmented, &sc_kinds);
            l_pairs.iter().filter(|p| !sc.same_class(p.a, p.b)).collect()
        };
        if pending.is_empty() {
            break;
        }
        for pair in pending {
            let (a, b) = (&u.bases()[pair.a], &u.bases()[pair.b]);
            match birnbaum_chain(a, b) {
                Ok(chain) => {
                    if let Err(e) = chain.verify() {
                        failures.push(format!("chain {a} ~ {b}: {e}"));
                    }
                    for step in &chain.steps {
                        for base in [&step.from, &step.to] {
                            if augmented.position(base).is_none() {
                                if let Err(e) = augmented.add_base(base.clone()) {
                                    failures.push(format!("augmenting with {base}: {e}"));
                                }
                            }
                        }
                    }
                    if round == 0 {
                        chains.push(chain);
                    }
                }
                Err(e) => failures.push(format!("chain {a} ~ {b}: {e}")),
            }
        }
    }

    let mut checker = Checker::default();
    let sc = closure_with(&mut checker, &augmented, &sc_kinds);
    let sc_classes = sc.restricted(n);
    let sound = sc.classes.iter().all(|class| {
        let head = &augmented.bases()[class[0]];
        class[1..].iter().all(|&k| {
            let other = &augmented.bases()[k];
            head.experiment().params() == other.experiment().params()
                && proportional(&head.experiment().column(head.outcome()), &other.experiment().column(other.outcome()))
                    .is_some()
        })
    });
    BirnbaumReport {
        original_len: n,
        l_pairs,
        chains,
        augmented,
        classes_match: sc_classes == l.classes,
        l_classes: l.classes,
        sc_classes,
        sound,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{table1, table2, table3};
    use crate::rational::{int, rat};

    fn base(e: &Arc<Experiment>, x: &str) -> InferenceBase {
        InferenceBase::new(e.clone(), x).unwrap()
    }

    fn ex1() -> (Arc<Experiment>, Arc<Experiment>, Arc<Experiment>) {
        (Arc::new(table1()), Arc::new(table2()), Arc::new(table3()))
    }

    #[test]
    fn kinds_parse() {
        assert_eq!(parse_kinds("S,C").unwrap(), BTreeSet::from([RelationKind::S, RelationKind::C]));
        assert!(parse_kinds("").unwrap().is_empty());
        assert!(parse_kinds("S,X").is_err());
    }

    #[test]
    fn a_relation_on_example_one() {
        let (e, u, v) = ex1();
        let w = related(RelationKind::A, &base(&e, "(1,1)"), &base(&u, "(1,1)")).unwrap().unwrap();
        match w {
            Witness::Ancillarity {
                conditioned,
                statistic,
                block,
                block_prob,
                component,
            } => {
                assert_eq!(conditioned, Side::First);
                assert_eq!(statistic.blocks[block], vec!["(1,1)".to_string(), "(1,2)".to_string()]);
                assert_eq!(block_prob, rat(1, 3));
                assert_eq!(component, None);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(related(RelationKind::A, &base(&v, "(1,1)"), &base(&e, "(1,1)")).unwrap().is_some());
        assert!(related(RelationKind::A, &base(&u, "(1,1)"), &base(&v, "(1,1)")).unwrap().is_none());
        // observed outcomes must correspond
        assert!(related(RelationKind::A, &base(&e, "(1,2)"), &base(&u, "(1,1)")).unwrap().is_none());
    }

    #[test]
    fn l_relation_on_conditionals() {
        let (_, u, v) = ex1();
        let w = related(RelationKind::L, &base(&u, "(1,1)"), &base(&v, "(1,1)")).unwrap();
        assert_eq!(w, Some(Witness::Likelihood { constant: rat(3, 2) }));
    }

    #[test]
    fn c_relation_and_its_a_counterpart() {
        let (_, u, v) = ex1();
        let mix = make_mixture(u.clone(), v.clone(), half()).unwrap();
        let m = mix.experiment.clone();
        let c = related(RelationKind::C, &base(&u, "(1,2)"), &base(&m, "(1,(1,2))")).unwrap();
        assert_eq!(
            c,
            Some(Witness::Conditionality {
                mixture: Side::Second,
                component: 1
            })
        );
        assert!(related(RelationKind::C, &base(&m, "(2,(2,1))"), &base(&v, "(2,1)")).unwrap().is_some());
        assert!(related(RelationKind::C, &base(&m, "(2,(1,1))"), &base(&u, "(1,1)")).unwrap().is_none());
        let a = related(RelationKind::A, &base(&m, "(2,(2,1))"), &base(&v, "(2,1)")).unwrap().unwrap();
        assert!(matches!(a, Witness::Ancillarity { component: Some(2), .. }));
    }

    #[test]
    fn c_requires_equal_weights() {
        let (_, u, v) = ex1();
        let mix = make_mixture(u.clone(), v, rat(1, 3)).unwrap();
        let m = mix.experiment.clone();
        assert!(related(RelationKind::C, &base(&m, "(1,(1,1))"), &base(&u, "(1,1)")).unwrap().is_none());
        // the component indicator is still ancillary
        assert!(related(RelationKind::A, &base(&m, "(1,(1,1))"), &base(&u, "(1,1)")).unwrap().is_some());
    }

    #[test]
    fn s_relation_needs_same_experiment() {
        let (e, u, _) = ex1();
        assert!(related(RelationKind::S, &base(&e, "(1,1)"), &base(&e, "(1,2)")).unwrap().is_none());
        assert!(related(RelationKind::S, &base(&e, "(1,1)"), &base(&e, "(1,1)")).unwrap().is_some());
        assert!(related(RelationKind::S, &base(&e, "(1,1)"), &base(&u, "(1,1)")).unwrap().is_none());
    }

    #[test]
    fn param_mismatch_is_an_error() {
        let (e, _, _) = ex1();
        let other = Arc::new(Experiment::new("O", vec!["1".into()], vec!["(1,1)".into()], vec![vec![int(1)]]).unwrap());
        let err = related(RelationKind::L, &base(&e, "(1,1)"), &base(&other, "(1,1)")).unwrap_err();
        assert_eq!(err.code(), "PARAM_MISMATCH");
    }

    fn ex1_universe() -> Universe {
        let (e, u, v) = ex1();
        let mut uni = Universe::new();
        for (exp, x) in [(&e, "(1,1)"), (&u, "(1,1)"), (&v, "(1,1)")] {
            uni.add_base(base(exp, x)).unwrap();
        }
        uni
    }

    #[test]
    fn a_closure_is_not_transitive() {
        let uni = ex1_universe();
        let result = closure(&uni, &BTreeSet::from([RelationKind::A]));
        assert_eq!(result.classes, vec![vec![0, 1, 2]]);
        assert_eq!(result.edges.len(), 2);
        assert_eq!(result.added_pairs(), 1);
        let empty = closure(&uni, &BTreeSet::new());
        assert_eq!(empty.classes, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn universe_rejects_duplicates_and_conflicts() {
        let (e, _, _) = ex1();
        let mut uni = Universe::new();
        uni.add_base(base(&e, "(1,1)")).unwrap();
        assert_eq!(uni.add_base(base(&e, "(1,1)")).unwrap_err().code(), "DUPLICATE_BASE");
        let impostor = Arc::new(table2().with_id("E"));
        assert_eq!(uni.add_base(base(&impostor, "(1,2)")).unwrap_err().code(), "CONFLICTING_EXPERIMENT");
        assert_eq!(uni.add("nope", "x").unwrap_err().code(), "UNKNOWN_EXPERIMENT");
        assert_eq!(uni.add("E", "(2,2)").unwrap(), 1);
    }

    #[test]
    fn chain_between_conditionals() {
        let (_, u, v) = ex1();
        let chain = birnbaum_chain(&base(&u, "(1,1)"), &base(&v, "(1,1)")).unwrap();
        assert_eq!(chain.constant, rat(3, 2));
        assert_eq!(chain.block_conditional, Some(rat(3, 5)));
        assert_eq!(chain.steps.len(), 3);
        assert_eq!(
            chain.steps.iter().map(|s| s.kind).collect::<Vec<_>>(),
            vec![RelationKind::C, RelationKind::S, RelationKind::C]
        );
        chain.verify().unwrap();
    }

    #[test]
    fn chain_of_a_base_with_itself_is_empty() {
        let (e, _, _) = ex1();
        let chain = birnbaum_chain(&base(&e, "(1,1)"), &base(&e, "(1,1)")).unwrap();
        assert!(chain.steps.is_empty());
        assert_eq!(chain.constant, int(1));
        chain.verify().unwrap();
    }

    #[test]
    fn chain_requires_l() {
        let (_, u, _) = ex1();
        let err = birnbaum_chain(&base(&u, "(1,1)"), &base(&u, "(1,2)")).unwrap_err();
        assert_eq!(err.code(), "NOT_L_RELATED");
    }

    #[test]
    fn verify_birnbaum_on_conditionals() {
        let (_, u, v) = ex1();
        let mut uni = Universe::new();
        uni.add_base(base(&u, "(1,1)")).unwrap();
        uni.add_base(base(&v, "(1,1)")).unwrap();
        let report = verify_birnbaum(&uni, 1);
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.sc_classes, vec![vec![0, 1]]);
        assert_eq!(report.l_pairs.len(), 1);
        assert_eq!(report.augmented.len(), 4);
        // without augmentation the two bases stay apart
        let bare = verify_birnbaum(&uni, 0);
        assert!(!bare.classes_match);
        assert!(bare.sound);
    }

    #[test]
    fn verify_birnbaum_without_l_pairs() {
        let (_, u, _) = ex1();
        let mut uni = Universe::new();
        uni.add_base(base(&u, "(1,1)")).unwrap();
        uni.add_base(base(&u, "(1,2)")).unwrap();
        let report = verify_birnbaum(&uni, 1);
        assert!(report.passed());
        assert_eq!(report.augmented.len(), 2);
        assert_eq!(report.sc_classes, vec![vec![0], vec![1]]);
    }
}
