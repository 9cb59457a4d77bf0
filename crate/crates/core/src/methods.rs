//! One-sided p-values for binomial, negative-binomial and 50-50 mixture
//! experiments, and an audit that separates properties of a method's output
//! (M) from properties of the final inference (Ev).
//!
//! Parameterization: θ is the success probability. The binomial experiment
//! runs `n` trials; the negative-binomial experiment samples until the
//! `k`-th failure and records the number of successes `s`. Data are the pair
//! (successes, failures), written `(s,f)` as an outcome label, so that the
//! two experiments observed at `(s, n-s)` with `n-s = k` have proportional
//! likelihoods C(n,s)/C(s+k-1,k-1). Large success counts are extreme.

use std::sync::Arc;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::model::{
    make_mixture_with_id, proportional, tag_label, Experiment, InferenceBase, MixtureExperiment, ModelError,
};
use crate::rational::{binomial, fmt_exact, half, pow, Rational};
use crate::relations::{related, RelationError, RelationKind};
use crate::statistics::{is_sufficient, StatisticPartition, StatisticsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MethodError {
    #[error("θ0 = {0} must lie strictly between 0 and 1")]
    BadTheta(Rational),
    #[error("{0} must be a positive count")]
    BadCount(&'static str),
    #[error("observed x = {x} is outside 0..={n}")]
    XOutOfRange { x: u64, n: u64 },
    #[error("data ({successes} successes, {failures} failures) inconsistent with n = {n}, k = {k}")]
    InconsistentData {
        successes: u64,
        failures: u64,
        n: u64,
        k: u64,
    },
    #[error("the two components use different null values {0} and {1}")]
    NullMismatch(Rational, Rational),
    #[error("truncation bound {tail} must be at least the observed success count {successes}")]
    BadTail { tail: u64, successes: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Statistics(#[from] StatisticsError),
}

impl MethodError {
    pub fn code(&self) -> &'static str {
        match self {
            MethodError::BadTheta(_) => "BAD_THETA",
            MethodError::BadCount(_) => "BAD_COUNT",
            MethodError::XOutOfRange { .. } => "X_OUT_OF_RANGE",
            MethodError::InconsistentData { .. } | MethodError::NullMismatch(..) => "INCONSISTENT_DATA",
            MethodError::BadTail { .. } => "BAD_TAIL",
            MethodError::Model(e) => e.code(),
            MethodError::Relation(e) => e.code(),
            MethodError::Statistics(e) => e.code(),
        }
    }
}

fn check_theta(theta: &Rational) -> Result<(), MethodError> {
    if theta.is_positive() && theta < &Rational::one() {
        Ok(())
    } else {
        Err(MethodError::BadTheta(theta.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinomialSpec {
    pub n: u64,
    pub theta0: Rational,
}

impl BinomialSpec {
    pub fn new(n: u64, theta0: Rational) -> Result<Self, MethodError> {
        if n == 0 {
            return Err(MethodError::BadCount("n"));
        }
        check_theta(&theta0)?;
        Ok(Self { n, theta0 })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegBinomialSpec {
    /// Failures at which sampling stops.
    pub k: u64,
    pub theta0: Rational,
}

impl NegBinomialSpec {
    pub fn new(k: u64, theta0: Rational) -> Result<Self, MethodError> {
        if k == 0 {
            return Err(MethodError::BadCount("k"));
        }
        check_theta(&theta0)?;
        Ok(Self { k, theta0 })
    }
}

/// C(n,s) θ^s (1-θ)^(n-s)
pub fn binomial_pmf(n: u64, theta: &Rational, s: u64) -> Rational {
    Rational::from_integer(binomial(n, s)) * pow(theta, s) * pow(&(Rational::one() - theta), n - s)
}

/// P(s successes before the k-th failure) = C(s+k-1, k-1) θ^s (1-θ)^k
pub fn negative_binomial_pmf(k: u64, theta: &Rational, s: u64) -> Rational {
    Rational::from_integer(binomial(s + k - 1, k - 1)) * pow(theta, s) * pow(&(Rational::one() - theta), k)
}

/// P(Binomial(n, θ0) ≥ x)
pub fn binom_pvalue(spec: &BinomialSpec, x: u64) -> Result<Rational, MethodError> {
    if x > spec.n {
        return Err(MethodError::XOutOfRange { x, n: spec.n });
    }
    Ok((x..=spec.n).map(|j| binomial_pmf(spec.n, &spec.theta0, j)).sum())
}

/// P(S ≥ s) for S the successes before the k-th failure, as the finite
/// complement 1 - P(S < s).
pub fn negbinom_pvalue(spec: &NegBinomialSpec, s: u64) -> Rational {
    let below: Rational = (0..s).map(|j| negative_binomial_pmf(spec.k, &spec.theta0, j)).sum();
    Rational::one() - below
}

fn check_data(b: &BinomialSpec, nb: &NegBinomialSpec, data: (u64, u64)) -> Result<(), MethodError> {
    if b.theta0 != nb.theta0 {
        return Err(MethodError::NullMismatch(b.theta0.clone(), nb.theta0.clone()));
    }
    let (successes, failures) = data;
    if successes + failures != b.n || failures != nb.k {
        return Err(MethodError::InconsistentData {
            successes,
            failures,
            n: b.n,
            k: nb.k,
        });
    }
    Ok(())
}

/// ½ P(Binomial ≥ s) + ½ P(NegBinomial ≥ s); depends on the data only.
pub fn mixture_pvalue(b: &BinomialSpec, nb: &NegBinomialSpec, data: (u64, u64)) -> Result<Rational, MethodError> {
    check_data(b, nb, data)?;
    let (s, _) = data;
    Ok((binom_pvalue(b, s)? + negbinom_pvalue(nb, s)) * half())
}

pub fn outcome_label(successes: u64, failures: u64) -> String {
    format!("({successes},{failures})")
}

fn theta_labels(thetas: &[Rational]) -> Result<Vec<String>, MethodError> {
    thetas.iter().try_for_each(check_theta)?;
    Ok(thetas.iter().map(fmt_exact).collect())
}

/// Binomial(n, θ) over a finite parameter grid; outcomes `(s,n-s)`.
pub fn binomial_experiment(id: &str, n: u64, thetas: &[Rational]) -> Result<Experiment, MethodError> {
    let params = theta_labels(thetas)?;
    let outcomes = (0..=n).map(|s| outcome_label(s, n - s)).collect();
    let rows = thetas
        .iter()
        .map(|t| (0..=n).map(|s| binomial_pmf(n, t, s)).collect())
        .collect();
    Ok(Experiment::new(id, params, outcomes, rows)?)
}

/// Label of the folded tail outcome `(>tail,k)`.
pub fn tail_label(tail: u64, k: u64) -> String {
    format!("(>{tail},{k})")
}

/// Negative binomial with stopping at the k-th failure, outcomes `(s,k)` for
/// `s ≤ tail` plus a sink `(>tail,k)` holding the remaining mass.
pub fn negative_binomial_experiment(id: &str, k: u64, thetas: &[Rational], tail: u64) -> Result<Experiment, MethodError> {
    let params = theta_labels(thetas)?;
    let mut outcomes: Vec<String> = (0..=tail).map(|s| outcome_label(s, k)).collect();
    outcomes.push(tail_label(tail, k));
    let rows = thetas
        .iter()
        .map(|t| {
            let mut row: Vec<Rational> = (0..=tail).map(|s| negative_binomial_pmf(k, t, s)).collect();
            let rest = Rational::one() - row.iter().sum::<Rational>();
            row.push(rest);
            row
        })
        .collect();
    Ok(Experiment::new(id, params, outcomes, rows)?)
}

/// The 50-50 mixture of the binomial and truncated negative-binomial
/// experiments, with components `E1` and `E2`.
pub fn truncated_mixture(n: u64, k: u64, thetas: &[Rational], tail: u64) -> Result<MixtureExperiment, MethodError> {
    let e1 = Arc::new(binomial_experiment("E1", n, thetas)?);
    let e2 = Arc::new(negative_binomial_experiment("E2", k, thetas, tail)?);
    Ok(make_mixture_with_id("E_mix", e1, e2, half())?)
}

/// The statistic T(j,x) = (1,x): pairs `(1,x)` with `(2,x)` for every label
/// `x` present in both components.
pub fn untagging_statistic(mix: &MixtureExperiment) -> StatisticPartition {
    let [e1, e2] = &mix.components;
    let blocks = e1
        .outcomes()
        .iter()
        .map(|x| {
            let mut block = vec![tag_label(1, x)];
            if e2.outcome_index(x).is_some() {
                block.push(tag_label(2, x));
            }
            block
        })
        .chain(
            e2.outcomes()
                .iter()
                .filter(|x| e1.outcome_index(x).is_none())
                .map(|x| vec![tag_label(2, x)]),
        )
        .collect();
    StatisticPartition::new("T", blocks)
}

#[derive(Debug, Clone)]
pub struct AuditOptions {
    /// Parameter grid for the finite experiment objects.
    pub thetas: Vec<Rational>,
    /// Truncation bound for the negative-binomial sample space; `None` picks
    /// twelve past the observed success count.
    pub tail: Option<u64>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        use crate::rational::rat;
        Self {
            thetas: vec![rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3), rat(3, 4)],
            tail: None,
        }
    }
}

/// Method outputs M on the four inference bases of the example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodValues {
    /// M(E1, x)
    pub binomial: Rational,
    /// M(E2, x)
    pub negative_binomial: Rational,
    /// M(E_mix, (1,x))
    pub mixture_first: Rational,
    /// M(E_mix, (2,x))
    pub mixture_second: Rational,
}

/// Inferences under the conditional-report rule Ev(E_mix,(j,x)) = M(E_j,x).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceValues {
    pub component_first: Rational,
    pub component_second: Rational,
    pub mixture_first: Rational,
    pub mixture_second: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditVerdict {
    /// SP2 and WCP hold, yet Ev differs on an L-related pair.
    LikelihoodViolated,
    /// SP2 and WCP hold and Ev agrees at this data point.
    NoViolationAtData,
    /// One of the premises failed; see the individual checks.
    PremiseFailed,
}

impl AuditVerdict {
    pub fn code(self) -> &'static str {
        match self {
            AuditVerdict::LikelihoodViolated => "SP2_AND_WCP_HOLD_LP_VIOLATED",
            AuditVerdict::NoViolationAtData => "SP2_AND_WCP_HOLD_NO_LP_VIOLATION_AT_DATA",
            AuditVerdict::PremiseFailed => "PREMISE_FAILED",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodAuditReport {
    pub data: (u64, u64),
    pub theta0: Rational,
    pub tail: u64,
    pub m_values: MethodValues,
    pub ev_values: InferenceValues,
    /// C(n,s)/C(s+k-1,k-1)
    pub likelihood_constant: Rational,
    /// The constant matches the pmf ratio at θ0 and on every grid point.
    pub proportionality_verified: bool,
    pub sufficient_statistic: StatisticPartition,
    /// T is sufficient for the truncated mixture and M is constant on its blocks.
    pub sp2_check: bool,
    /// Ev(E_mix,(j,x)) = Ev(E_j,x) and the pair is C-related.
    pub wcp_check: bool,
    /// Ev(E_mix,(1,x)) = Ev(E_mix,(2,x)).
    pub lp_check: bool,
    /// (E_mix,(1,x)) and (E_mix,(2,x)) are S-related, so SP as a property of
    /// Ev demands equal inferences there.
    pub sp_related: bool,
    pub sp_violated: bool,
    pub verdict: AuditVerdict,
}

pub fn audit_sp2_wcp(
    b: &BinomialSpec,
    nb: &NegBinomialSpec,
    data: (u64, u64),
    options: &AuditOptions,
) -> Result<MethodAuditReport, MethodError> {
    check_data(b, nb, data)?;
    let (s, f) = data;
    let tail = options.tail.unwrap_or(s + 12);
    if tail < s {
        return Err(MethodError::BadTail { tail, successes: s });
    }

    let m_binomial = binom_pvalue(b, s)?;
    let m_negative = negbinom_pvalue(nb, s);
    // M(E_mix, (j,x)) is defined on the untagged data.
    let m_mix_first = mixture_pvalue(b, nb, data)?;
    let m_mix_second = mixture_pvalue(b, nb, data)?;
    let m_values = MethodValues {
        binomial: m_binomial.clone(),
        negative_binomial: m_negative.clone(),
        mixture_first: m_mix_first.clone(),
        mixture_second: m_mix_second.clone(),
    };
    let ev_values = InferenceValues {
        component_first: m_binomial.clone(),
        component_second: m_negative.clone(),
        mixture_first: m_binomial,
        mixture_second: m_negative,
    };

    let likelihood_constant =
        Rational::from_integer(binomial(b.n, s)) / Rational::from_integer(binomial(s + nb.k - 1, nb.k - 1));
    let mix = truncated_mixture(b.n, nb.k, &options.thetas, tail)?;
    let x = outcome_label(s, f);
    let [e1, e2] = &mix.components;
    let base1 = InferenceBase::new(e1.clone(), &x)?;
    let base2 = InferenceBase::new(e2.clone(), &x)?;
    let on_grid = proportional(&e1.column(base1.outcome()), &e2.column(base2.outcome()));
    let at_null = binomial_pmf(b.n, &b.theta0, s) == &likelihood_constant * negative_binomial_pmf(nb.k, &b.theta0, s);
    let proportionality_verified = on_grid.as_ref() == Some(&likelihood_constant) && at_null;

    let statistic = untagging_statistic(&mix);
    let sufficient = is_sufficient(&mix.experiment, &statistic)?.holds();
    let sp2_check = sufficient && m_mix_first == m_mix_second;

    let mixed1 = InferenceBase::new(mix.experiment.clone(), &tag_label(1, &x))?;
    let mixed2 = InferenceBase::new(mix.experiment.clone(), &tag_label(2, &x))?;
    let c_related = related(RelationKind::C, &base1, &mixed1)?.is_some() && related(RelationKind::C, &base2, &mixed2)?.is_some();
    let wcp_check = c_related
        && ev_values.mixture_first == ev_values.component_first
        && ev_values.mixture_second == ev_values.component_second;
    let lp_check = ev_values.mixture_first == ev_values.mixture_second;
    let sp_related = related(RelationKind::S, &mixed1, &mixed2)?.is_some();
    let sp_violated = sp_related && !lp_check;

    let verdict = match (sp2_check && wcp_check && proportionality_verified, lp_check) {
        (false, _) => AuditVerdict::PremiseFailed,
        (true, false) => AuditVerdict::LikelihoodViolated,
        (true, true) => AuditVerdict::NoViolationAtData,
    };
    Ok(MethodAuditReport {
        data,
        theta0: b.theta0.clone(),
        tail,
        m_values,
        ev_values,
        likelihood_constant,
        proportionality_verified,
        sufficient_statistic: statistic,
        sp2_check,
        wcp_check,
        lp_check,
        sp_related,
        sp_violated,
        verdict,
    })
}

/// Mass of the folded outcome `(>tail,k)` under θ.
pub fn tail_mass(k: u64, theta: &Rational, tail: u64) -> Rational {
    let below: Rational = (0..=tail).map(|s| negative_binomial_pmf(k, theta, s)).sum();
    Rational::one() - below
}
