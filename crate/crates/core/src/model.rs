//! Finite statistical experiments, inference bases, likelihood vectors and
//! two-component mixtures.
//!
//! Every probability is an exact [`Rational`]. An [`Experiment`] can only be
//! obtained through validation, so downstream code may rely on rows summing
//! to one and on every outcome being possible under some parameter.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{fmt_exact, half, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    Parameter,
    Outcome,
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelKind::Parameter => f.write_str("parameter"),
            LabelKind::Outcome => f.write_str("outcome"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("experiment `{0}` needs at least one parameter and one outcome")]
    Empty(String),
    #[error("row for parameter `{param}` sums to {sum}, not 1")]
    RowSum { param: String, sum: Rational },
    #[error("negative probability {value} for parameter `{param}` at outcome `{outcome}`")]
    NegativeProb {
        param: String,
        outcome: String,
        value: Rational,
    },
    #[error("duplicate {kind} label `{label}`")]
    DuplicateLabel { kind: LabelKind, label: String },
    #[error("outcome `{0}` has probability 0 under every parameter")]
    DeadOutcome(String),
    #[error("row for parameter `{param}` has {found} entries, expected {expected}")]
    MismatchedRowLength {
        param: String,
        found: usize,
        expected: usize,
    },
    #[error("parameter lists differ: [{left}] vs [{right}]")]
    ParamMismatch { left: String, right: String },
    #[error("mixture weight {0} is not strictly between 0 and 1")]
    BadWeight(Rational),
    #[error("outcome `{outcome}` is not in the sample space of `{experiment}`")]
    UnknownOutcome { experiment: String, outcome: String },
}

impl ModelError {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::Empty(_) => "EMPTY_EXPERIMENT",
            ModelError::RowSum { .. } => "ROW_SUM",
            ModelError::NegativeProb { .. } => "NEGATIVE_PROB",
            ModelError::DuplicateLabel { .. } => "DUPLICATE_LABEL",
            ModelError::DeadOutcome(_) => "DEAD_OUTCOME",
            ModelError::MismatchedRowLength { .. } => "MISMATCHED_ROW_LENGTH",
            ModelError::ParamMismatch { .. } => "PARAM_MISMATCH",
            ModelError::BadWeight(_) => "BAD_WEIGHT",
            ModelError::UnknownOutcome { .. } => "UNKNOWN_OUTCOME",
        }
    }
}

/// Unvalidated experiment data, as read from a file or built by hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawExperiment {
    pub id: String,
    pub params: Vec<String>,
    pub outcomes: Vec<String>,
    /// `rows[i][j]` is the probability of outcome `j` under parameter `i`.
    pub rows: Vec<Vec<Rational>>,
}

impl RawExperiment {
    pub fn validate(self) -> Result<Experiment, ModelError> {
        validate_experiment(self)
    }
}

/// A validated finite experiment: sample space, parameter set and one pmf
/// row per parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Experiment {
    id: String,
    params: Vec<String>,
    outcomes: Vec<String>,
    pmf: Vec<Vec<Rational>>,
    index: BTreeMap<String, usize>,
}

pub fn validate_experiment(raw: RawExperiment) -> Result<Experiment, ModelError> {
    let RawExperiment {
        id,
        params,
        outcomes,
        rows,
    } = raw;
    if params.is_empty() || outcomes.is_empty() {
        return Err(ModelError::Empty(id));
    }
    check_unique(&params, LabelKind::Parameter)?;
    check_unique(&outcomes, LabelKind::Outcome)?;
    if rows.len() != params.len() {
        // A missing row is reported against the first parameter without one.
        let param = params
            .get(rows.len())
            .cloned()
            .unwrap_or_else(|| format!("#{}", rows.len()));
        return Err(ModelError::MismatchedRowLength {
            param,
            found: 0,
            expected: outcomes.len(),
        });
    }
    for (param, row) in params.iter().zip(&rows) {
        if row.len() != outcomes.len() {
            return Err(ModelError::MismatchedRowLength {
                param: param.clone(),
                found: row.len(),
                expected: outcomes.len(),
            });
        }
        if let Some((j, value)) = row.iter().enumerate().find(|(_, p)| p.is_negative()) {
            return Err(ModelError::NegativeProb {
                param: param.clone(),
                outcome: outcomes[j].clone(),
                value: value.clone(),
            });
        }
        let sum: Rational = row.iter().sum();
        if !sum.is_one() {
            return Err(ModelError::RowSum {
                param: param.clone(),
                sum,
            });
        }
    }
    for (j, outcome) in outcomes.iter().enumerate() {
        if rows.iter().all(|row| row[j].is_zero()) {
            return Err(ModelError::DeadOutcome(outcome.clone()));
        }
    }
    let index = outcomes
        .iter()
        .enumerate()
        .map(|(j, o)| (o.clone(), j))
        .collect();
    Ok(Experiment {
        id,
        params,
        outcomes,
        pmf: rows,
        index,
    })
}

fn check_unique(labels: &[String], kind: LabelKind) -> Result<(), ModelError> {
    let mut seen = HashSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(ModelError::DuplicateLabel {
                kind,
                label: label.clone(),
            });
        }
    }
    Ok(())
}

impl Experiment {
    pub fn new(
        id: impl Into<String>,
        params: Vec<String>,
        outcomes: Vec<String>,
        rows: Vec<Vec<Rational>>,
    ) -> Result<Self, ModelError> {
        validate_experiment(RawExperiment {
            id: id.into(),
            params,
            outcomes,
            rows,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    /// `pmf()[i][j]` is p_{θ_i}(x_j).
    pub fn pmf(&self) -> &[Vec<Rational>] {
        &self.pmf
    }

    pub fn prob(&self, param: usize, outcome: usize) -> &Rational {
        &self.pmf[param][outcome]
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn column(&self, outcome: usize) -> Vec<Rational> {
        self.pmf.iter().map(|row| row[outcome].clone()).collect()
    }

    /// Same parameters, outcomes and pmf, ignoring the id.
    pub fn same_model(&self, other: &Experiment) -> bool {
        self.params == other.params && self.outcomes == other.outcomes && self.pmf == other.pmf
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn into_raw(self) -> RawExperiment {
        RawExperiment {
            id: self.id,
            params: self.params,
            outcomes: self.outcomes,
            rows: self.pmf,
        }
    }

    pub fn check_same_params(&self, other: &Experiment) -> Result<(), ModelError> {
        if self.params == other.params {
            Ok(())
        } else {
            Err(ModelError::ParamMismatch {
                left: self.params.join(","),
                right: other.params.join(","),
            })
        }
    }
}

/// An experiment together with one observed outcome.
#[derive(Debug, Clone)]
pub struct InferenceBase {
    experiment: Arc<Experiment>,
    outcome: usize,
}

impl InferenceBase {
    pub fn new(experiment: Arc<Experiment>, outcome: &str) -> Result<Self, ModelError> {
        let index = experiment
            .outcome_index(outcome)
            .ok_or_else(|| ModelError::UnknownOutcome {
                experiment: experiment.id().to_string(),
                outcome: outcome.to_string(),
            })?;
        Ok(Self {
            experiment,
            outcome: index,
        })
    }

    pub fn from_index(experiment: Arc<Experiment>, outcome: usize) -> Self {
        assert!(outcome < experiment.num_outcomes(), "outcome index out of range");
        Self {
            experiment,
            outcome,
        }
    }

    pub fn experiment(&self) -> &Arc<Experiment> {
        &self.experiment
    }

    pub fn outcome(&self) -> usize {
        self.outcome
    }

    pub fn outcome_label(&self) -> &str {
        &self.experiment.outcomes()[self.outcome]
    }

    /// Same experiment id and outcome label.
    pub fn same_base(&self, other: &InferenceBase) -> bool {
        self.experiment.id() == other.experiment.id() && self.outcome_label() == other.outcome_label()
    }
}

impl PartialEq for InferenceBase {
    fn eq(&self, other: &Self) -> bool {
        self.outcome == other.outcome && *self.experiment == *other.experiment
    }
}

impl Eq for InferenceBase {}

impl fmt::Display for InferenceBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.experiment.id(), self.outcome_label())
    }
}

/// The vector (p_θ(x))_θ of an inference base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LikelihoodVector {
    pub params: Vec<String>,
    pub entries: Vec<Rational>,
}

impl LikelihoodVector {
    /// Divides through by the first non-zero entry, giving a representative
    /// shared by every proportional vector.
    pub fn normalized(&self) -> Vec<Rational> {
        let pivot = self
            .entries
            .iter()
            .find(|v| !v.is_zero())
            .cloned()
            .expect("likelihood vectors have a positive entry");
        self.entries.iter().map(|v| v / &pivot).collect()
    }
}

pub fn likelihood_vector(base: &InferenceBase) -> LikelihoodVector {
    let e = base.experiment();
    LikelihoodVector {
        params: e.params().to_vec(),
        entries: e.column(base.outcome()),
    }
}

/// Returns `c` with p_{θ,a}(x_a) = c · p_{θ,b}(x_b) for every θ, if one exists.
pub fn proportionality_constant(
    a: &InferenceBase,
    b: &InferenceBase,
) -> Result<Option<Rational>, ModelError> {
    a.experiment().check_same_params(b.experiment())?;
    Ok(proportional(
        &a.experiment().column(a.outcome()),
        &b.experiment().column(b.outcome()),
    ))
}

/// `Some(c)` when `left = c · right` componentwise with `c > 0`.
pub(crate) fn proportional(left: &[Rational], right: &[Rational]) -> Option<Rational> {
    let mut constant: Option<Rational> = None;
    for (l, r) in left.iter().zip(right) {
        match (l.is_zero(), r.is_zero()) {
            (true, true) => continue,
            (true, false) | (false, true) => return None,
            (false, false) => {
                let ratio = l / r;
                match &constant {
                    Some(c) if *c != ratio => return None,
                    Some(_) => {}
                    None => constant = Some(ratio),
                }
            }
        }
    }
    constant
}

/// Label of outcome `x` of component `j` inside a mixture: `(j,x)`.
pub fn tag_label(component: u8, outcome: &str) -> String {
    format!("({component},{outcome})")
}

/// Inverse of [`tag_label`]: `(2,(9,3))` gives `(2, "(9,3)")`.
pub fn untag_label(label: &str) -> Option<(u8, &str)> {
    let inner = label.strip_prefix('(')?.strip_suffix(')')?;
    let (tag, rest) = inner.split_once(',')?;
    let tag = match tag {
        "1" => 1,
        "2" => 2,
        _ => return None,
    };
    if rest.is_empty() {
        return None;
    }
    Some((tag, rest))
}

/// A two-component mixture with its components kept alongside the flattened
/// experiment whose outcomes are the tagged pairs `(j,x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixtureExperiment {
    pub experiment: Arc<Experiment>,
    pub components: [Arc<Experiment>; 2],
    pub weights: [Rational; 2],
}

pub fn mixture_id(e1: &Experiment, e2: &Experiment, w1: &Rational) -> String {
    if *w1 == half() {
        format!("mix({},{})", e1.id(), e2.id())
    } else {
        format!("mix({},{};{})", e1.id(), e2.id(), fmt_exact(w1))
    }
}

pub fn make_mixture(
    e1: Arc<Experiment>,
    e2: Arc<Experiment>,
    w1: Rational,
) -> Result<MixtureExperiment, ModelError> {
    let id = mixture_id(&e1, &e2, &w1);
    make_mixture_with_id(id, e1, e2, w1)
}

pub fn make_mixture_with_id(
    id: impl Into<String>,
    e1: Arc<Experiment>,
    e2: Arc<Experiment>,
    w1: Rational,
) -> Result<MixtureExperiment, ModelError> {
    e1.check_same_params(&e2)?;
    if !w1.is_positive() || w1 >= Rational::one() {
        return Err(ModelError::BadWeight(w1));
    }
    let w2 = Rational::one() - &w1;
    let outcomes = e1
        .outcomes()
        .iter()
        .map(|x| tag_label(1, x))
        .chain(e2.outcomes().iter().map(|x| tag_label(2, x)))
        .collect();
    let rows = (0..e1.num_params())
        .map(|i| {
            e1.pmf()[i]
                .iter()
                .map(|p| p * &w1)
                .chain(e2.pmf()[i].iter().map(|p| p * &w2))
                .collect()
        })
        .collect();
    let experiment = Experiment::new(id, e1.params().to_vec(), outcomes, rows)?;
    Ok(MixtureExperiment {
        experiment: Arc::new(experiment),
        components: [e1, e2],
        weights: [w1, w2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{table1, table2, table3};
    use crate::rational::{int, rat};

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn table1_validates() {
        let e = table1();
        assert_eq!(e.num_outcomes(), 4);
        assert_eq!(e.prob(1, 2), &rat(5, 12));
    }

    #[test]
    fn degenerate_single_outcome_is_valid() {
        let e = Experiment::new("D", labels(&["a", "b", "c"]), labels(&["x"]), vec![vec![int(1)]; 3]).unwrap();
        let base = InferenceBase::new(Arc::new(e), "x").unwrap();
        assert_eq!(likelihood_vector(&base).entries, vec![int(1); 3]);
    }

    #[test]
    fn row_sum_error() {
        let mut raw = table1().into_raw();
        raw.rows[1][3] = rat(4, 12);
        match validate_experiment(raw) {
            Err(ModelError::RowSum { param, sum }) => {
                assert_eq!(param, "2");
                assert_eq!(sum, rat(13, 12));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn other_validation_errors() {
        let p = labels(&["1"]);
        let err = Experiment::new("E", p.clone(), labels(&["a", "b"]), vec![vec![rat(3, 2), rat(-1, 2)]]).unwrap_err();
        assert_eq!(err.code(), "NEGATIVE_PROB");
        let err = Experiment::new("E", p.clone(), labels(&["a", "a"]), vec![vec![rat(1, 2), rat(1, 2)]]).unwrap_err();
        assert_eq!(err.code(), "DUPLICATE_LABEL");
        let err = Experiment::new("E", labels(&["1", "1"]), labels(&["a"]), vec![vec![int(1)], vec![int(1)]]).unwrap_err();
        assert_eq!(err.code(), "DUPLICATE_LABEL");
        let err = Experiment::new("E", p.clone(), labels(&["a", "b"]), vec![vec![int(1), int(0)]]).unwrap_err();
        assert_eq!(err, ModelError::DeadOutcome("b".into()));
        let err = Experiment::new("E", p.clone(), labels(&["a", "b"]), vec![vec![int(1)]]).unwrap_err();
        assert_eq!(err.code(), "MISMATCHED_ROW_LENGTH");
        let err = Experiment::new("E", labels(&["1", "2"]), labels(&["a"]), vec![vec![int(1)]]).unwrap_err();
        assert_eq!(err.code(), "MISMATCHED_ROW_LENGTH");
        let err = Experiment::new("E", vec![], labels(&["a"]), vec![]).unwrap_err();
        assert_eq!(err.code(), "EMPTY_EXPERIMENT");
    }

    #[test]
    fn likelihood_vectors_of_tables() {
        let b1 = InferenceBase::new(Arc::new(table1()), "(1,1)").unwrap();
        assert_eq!(likelihood_vector(&b1).entries, vec![rat(1, 6), rat(1, 12)]);
        let b2 = InferenceBase::new(Arc::new(table2()), "(1,1)").unwrap();
        assert_eq!(likelihood_vector(&b2).entries, vec![rat(1, 2), rat(1, 4)]);
    }

    #[test]
    fn proportionality_examples() {
        let t1 = Arc::new(table1());
        let t2 = Arc::new(table2());
        let a = InferenceBase::new(t1, "(1,1)").unwrap();
        let b = InferenceBase::new(t2.clone(), "(1,1)").unwrap();
        assert_eq!(proportionality_constant(&a, &b).unwrap(), Some(rat(1, 3)));
        assert_eq!(proportionality_constant(&b, &a).unwrap(), Some(int(3)));
        assert_eq!(proportionality_constant(&a, &a).unwrap(), Some(int(1)));
        let b2 = InferenceBase::new(t2, "(1,2)").unwrap();
        assert_eq!(proportionality_constant(&b, &b2).unwrap(), None);
    }

    #[test]
    fn zero_entries_must_line_up() {
        assert_eq!(proportional(&[rat(1, 2), int(0)], &[rat(1, 4), int(0)]), Some(int(2)));
        assert_eq!(proportional(&[rat(1, 2), int(0)], &[rat(1, 4), rat(1, 4)]), None);
    }

    #[test]
    fn param_mismatch() {
        let other = Experiment::new("O", labels(&["2", "1"]), labels(&["x"]), vec![vec![int(1)]; 2]).unwrap();
        let a = InferenceBase::new(Arc::new(table1()), "(1,1)").unwrap();
        let b = InferenceBase::new(Arc::new(other), "x").unwrap();
        assert_eq!(proportionality_constant(&a, &b).unwrap_err().code(), "PARAM_MISMATCH");
    }

    #[test]
    fn mixture_of_conditional_tables() {
        let mix = make_mixture(Arc::new(table2()), Arc::new(table3()), half()).unwrap();
        let e = &mix.experiment;
        assert_eq!(e.id(), "mix(E_u1,E_v1)");
        let j = e.outcome_index("(1,(1,1))").unwrap();
        assert_eq!(e.column(j), vec![rat(1, 4), rat(1, 8)]);
        assert_eq!(e.num_outcomes(), 4);
    }

    #[test]
    fn mixture_with_itself_halves() {
        let t = Arc::new(table1());
        let mix = make_mixture(t.clone(), t.clone(), half()).unwrap();
        for (j, x) in t.outcomes().iter().enumerate() {
            for tag in [1, 2] {
                let k = mix.experiment.outcome_index(&tag_label(tag, x)).unwrap();
                for i in 0..2 {
                    assert_eq!(mix.experiment.prob(i, k), &(t.prob(i, j) / int(2)));
                }
            }
        }
    }

    #[test]
    fn mixture_errors() {
        let t = Arc::new(table1());
        assert_eq!(make_mixture(t.clone(), t.clone(), int(1)).unwrap_err().code(), "BAD_WEIGHT");
        assert_eq!(make_mixture(t.clone(), t.clone(), int(0)).unwrap_err().code(), "BAD_WEIGHT");
        let other = Arc::new(Experiment::new("O", labels(&["1"]), labels(&["x"]), vec![vec![int(1)]]).unwrap());
        assert_eq!(make_mixture(t, other, half()).unwrap_err().code(), "PARAM_MISMATCH");
    }

    #[test]
    fn tags_round_trip() {
        assert_eq!(untag_label("(2,(9,3))"), Some((2, "(9,3)")));
        assert_eq!(untag_label(&tag_label(1, "a")), Some((1, "a")));
        assert_eq!(untag_label("(3,a)"), None);
        assert_eq!(untag_label("(1,)"), None);
        assert_eq!(untag_label("a"), None);
    }
}
