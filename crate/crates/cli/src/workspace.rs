//! The `.bw` workspace format.
//!
//! ```text
//! # comment
//! experiment E
//!   outcomes (1,1) (1,2) (2,1) (2,2)
//!   theta 1 : 1/6 1/6 2/6 2/6
//!   theta 2 : 1/12 3/12 5/12 3/12
//! statistic U on E
//!   block (1,1) (1,2)
//!   block (2,1) (2,2)
//! universe ex1
//!   base E:(1,1)
//! binomial E1 n 12 thetas 1/4 1/2 3/4
//! negbinomial E2 k 3 tail 24 thetas 1/4 1/2 3/4
//! mixture E_mix of E1 E2 weight 1/2
//! ```
//!
//! Every line is whitespace-separated tokens; outcome labels are arbitrary
//! non-whitespace tokens. Body lines belong to the most recent header.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use birnbaum_core::methods::{binomial_experiment, negative_binomial_experiment};
use birnbaum_core::model::make_mixture_with_id;
use birnbaum_core::rational::{fmt_exact, half, parse_rational};
use birnbaum_core::statistics::StatisticPartition;
use birnbaum_core::{Experiment, InferenceBase, ModelError, Rational, StatisticsError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkspaceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Validation { line: usize, source: ModelError },
    #[error("line {line}: statistic `{statistic}`: {source}")]
    Statistic {
        line: usize,
        statistic: String,
        source: StatisticsError,
    },
    #[error("line {line}: unresolved reference `{name}`")]
    Unresolved { line: usize, name: String },
}

impl WorkspaceError {
    pub fn code(&self) -> &'static str {
        match self {
            WorkspaceError::Parse { .. } => "PARSE_ERROR",
            WorkspaceError::Validation { .. } | WorkspaceError::Statistic { .. } => "VALIDATION_ERROR",
            WorkspaceError::Unresolved { .. } => "UNRESOLVED_REFERENCE",
        }
    }

    /// Code of the underlying model or statistic error, if any.
    pub fn detail_code(&self) -> Option<&'static str> {
        match self {
            WorkspaceError::Validation { source, .. } => Some(source.code()),
            WorkspaceError::Statistic { source, .. } => Some(source.code()),
            _ => None,
        }
    }

    pub fn line(&self) -> usize {
        match self {
            WorkspaceError::Parse { line, .. }
            | WorkspaceError::Validation { line, .. }
            | WorkspaceError::Statistic { line, .. }
            | WorkspaceError::Unresolved { line, .. } => *line,
        }
    }
}

/// How an experiment was declared; kept so serialization reproduces the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExperimentSource {
    Table,
    Binomial {
        n: u64,
        thetas: Vec<Rational>,
    },
    NegBinomial {
        k: u64,
        tail: u64,
        thetas: Vec<Rational>,
    },
    Mixture {
        first: String,
        second: String,
        weight: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentDef {
    pub experiment: Arc<Experiment>,
    pub source: ExperimentSource,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatisticDef {
    pub experiment: String,
    pub statistic: StatisticPartition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseDef {
    pub id: String,
    pub bases: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Item {
    Experiment(String),
    Statistic(String),
    Universe(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Workspace {
    pub experiments: BTreeMap<String, ExperimentDef>,
    pub statistics: BTreeMap<String, StatisticDef>,
    pub universes: BTreeMap<String, UniverseDef>,
    order: Vec<Item>,
}

/// Splits `exp:label` at the first colon.
pub fn split_base(text: &str) -> Option<(&str, &str)> {
    let (e, x) = text.split_once(':')?;
    (!e.is_empty() && !x.is_empty()).then_some((e, x))
}

impl Workspace {
    pub fn experiment(&self, id: &str) -> Option<&Arc<Experiment>> {
        self.experiments.get(id).map(|d| &d.experiment)
    }

    pub fn base(&self, text: &str) -> Result<InferenceBase, String> {
        let (e, x) = split_base(text).ok_or_else(|| format!("base `{text}` is not of the form <experiment>:<outcome>"))?;
        let experiment = self.experiment(e).ok_or_else(|| format!("unknown experiment `{e}`"))?;
        InferenceBase::new(experiment.clone(), x).map_err(|err| err.to_string())
    }

    /// Statistics declared on experiment `id`, in name order.
    pub fn statistics_on<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a StatisticPartition> + 'a {
        self.statistics
            .values()
            .filter(move |d| d.experiment == id)
            .map(|d| &d.statistic)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, item) in self.order.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            match item {
                Item::Experiment(id) => {
                    let def = &self.experiments[id];
                    write_experiment(&mut out, def);
                }
                Item::Statistic(id) => {
                    let def = &self.statistics[id];
                    let _ = writeln!(out, "statistic {id} on {}", def.experiment);
                    for block in &def.statistic.blocks {
                        let _ = writeln!(out, "  block {}", block.join(" "));
                    }
                }
                Item::Universe(id) => {
                    let _ = writeln!(out, "universe {id}");
                    for (e, x) in &self.universes[id].bases {
                        let _ = writeln!(out, "  base {e}:{x}");
                    }
                }
            }
        }
        out
    }
}

fn join_rationals(values: &[Rational]) -> String {
    values.iter().map(fmt_exact).collect::<Vec<_>>().join(" ")
}

fn write_experiment(out: &mut String, def: &ExperimentDef) {
    let e = &def.experiment;
    let id = e.id();
    match &def.source {
        ExperimentSource::Table => {
            let _ = writeln!(out, "experiment {id}");
            let _ = writeln!(out, "  outcomes {}", e.outcomes().join(" "));
            for (param, row) in e.params().iter().zip(e.pmf()) {
                let _ = writeln!(out, "  theta {param} : {}", join_rationals(row));
            }
        }
        ExperimentSource::Binomial { n, thetas } => {
            let _ = writeln!(out, "binomial {id} n {n} thetas {}", join_rationals(thetas));
        }
        ExperimentSource::NegBinomial { k, tail, thetas } => {
            let _ = writeln!(out, "negbinomial {id} k {k} tail {tail} thetas {}", join_rationals(thetas));
        }
        ExperimentSource::Mixture { first, second, weight } => {
            if *weight == half() {
                let _ = writeln!(out, "mixture {id} of {first} {second}");
            } else {
                let _ = writeln!(out, "mixture {id} of {first} {second} weight {}", fmt_exact(weight));
            }
        }
    }
}

struct PendingExperiment {
    id: String,
    line: usize,
    outcomes: Option<Vec<String>>,
    rows: Vec<(usize, String, Vec<Rational>)>,
}

struct PendingStatistic {
    id: String,
    experiment: String,
    line: usize,
    blocks: Vec<Vec<String>>,
}

struct PendingUniverse {
    id: String,
    bases: Vec<(usize, String, String)>,
}

enum Open {
    None,
    Experiment(PendingExperiment),
    Statistic(PendingStatistic),
    Universe(PendingUniverse),
}

struct Parser {
    ws: Workspace,
    open: Open,
}

fn parse_error(line: usize, message: impl Into<String>) -> WorkspaceError {
    WorkspaceError::Parse {
        line,
        message: message.into(),
    }
}

fn rational_token(line: usize, token: &str) -> Result<Rational, WorkspaceError> {
    parse_rational(token).map_err(|e| parse_error(line, e.to_string()))
}

fn count_token(line: usize, token: Option<&&str>, what: &str) -> Result<u64, WorkspaceError> {
    let token = token.ok_or_else(|| parse_error(line, format!("missing value for `{what}`")))?;
    token
        .parse()
        .map_err(|_| parse_error(line, format!("`{what}` expects a non-negative integer, got `{token}`")))
}

impl Parser {
    fn define_id(&self, line: usize, id: &str) -> Result<(), WorkspaceError> {
        if id.contains(':') {
            return Err(parse_error(line, format!("identifier `{id}` may not contain ':'")));
        }
        let taken = self.ws.experiments.contains_key(id)
            || self.ws.statistics.contains_key(id)
            || self.ws.universes.contains_key(id);
        if taken {
            return Err(parse_error(line, format!("duplicate definition of `{id}`")));
        }
        Ok(())
    }

    fn add_experiment(&mut self, experiment: Experiment, source: ExperimentSource) {
        let id = experiment.id().to_string();
        self.ws.order.push(Item::Experiment(id.clone()));
        self.ws.experiments.insert(
            id,
            ExperimentDef {
                experiment: Arc::new(experiment),
                source,
            },
        );
    }

    fn close(&mut self) -> Result<(), WorkspaceError> {
        match std::mem::replace(&mut self.open, Open::None) {
            Open::None => Ok(()),
            Open::Experiment(p) => {
                let outcomes = p
                    .outcomes
                    .ok_or_else(|| parse_error(p.line, format!("experiment `{}` has no `outcomes` line", p.id)))?;
                let params: Vec<String> = p.rows.iter().map(|(_, label, _)| label.clone()).collect();
                let lines: Vec<usize> = p.rows.iter().map(|(l, _, _)| *l).collect();
                let rows = p.rows.into_iter().map(|(_, _, r)| r).collect();
                let experiment = Experiment::new(p.id, params.clone(), outcomes, rows).map_err(|source| {
                    let line = match &source {
                        ModelError::RowSum { param, .. } => {
                            params.iter().position(|q| q == param).map_or(p.line, |i| lines[i])
                        }
                        _ => p.line,
                    };
                    WorkspaceError::Validation { line, source }
                })?;
                self.add_experiment(experiment, ExperimentSource::Table);
                Ok(())
            }
            Open::Statistic(p) => {
                let e = self
                    .ws
                    .experiment(&p.experiment)
                    .ok_or_else(|| WorkspaceError::Unresolved {
                        line: p.line,
                        name: p.experiment.clone(),
                    })?
                    .clone();
                let statistic = StatisticPartition::new(p.id.clone(), p.blocks);
                statistic.resolve(&e).map_err(|source| WorkspaceError::Statistic {
                    line: p.line,
                    statistic: p.id.clone(),
                    source,
                })?;
                self.ws.order.push(Item::Statistic(p.id.clone()));
                self.ws.statistics.insert(
                    p.id,
                    StatisticDef {
                        experiment: p.experiment,
                        statistic,
                    },
                );
                Ok(())
            }
            Open::Universe(p) => {
                let mut bases = Vec::with_capacity(p.bases.len());
                for (line, e, x) in p.bases {
                    let experiment = self.ws.experiment(&e).ok_or_else(|| WorkspaceError::Unresolved {
                        line,
                        name: e.clone(),
                    })?;
                    if experiment.outcome_index(&x).is_none() {
                        return Err(WorkspaceError::Unresolved {
                            line,
                            name: format!("{e}:{x}"),
                        });
                    }
                    if bases.contains(&(e.clone(), x.clone())) {
                        return Err(parse_error(line, format!("base {e}:{x} listed twice")));
                    }
                    bases.push((e, x));
                }
                self.ws.order.push(Item::Universe(p.id.clone()));
                self.ws.universes.insert(p.id.clone(), UniverseDef { id: p.id, bases });
                Ok(())
            }
        }
    }

    fn header(&mut self, line: usize, tokens: &[&str]) -> Result<bool, WorkspaceError> {
        match tokens[0] {
            "experiment" => {
                let [_, id] = tokens else {
                    return Err(parse_error(line, "expected `experiment <id>`"));
                };
                self.close()?;
                self.define_id(line, id)?;
                self.open = Open::Experiment(PendingExperiment {
                    id: id.to_string(),
                    line,
                    outcomes: None,
                    rows: Vec::new(),
                });
            }
            "statistic" => {
                let [_, id, "on", exp] = tokens else {
                    return Err(parse_error(line, "expected `statistic <id> on <experiment>`"));
                };
                self.close()?;
                self.define_id(line, id)?;
                self.open = Open::Statistic(PendingStatistic {
                    id: id.to_string(),
                    experiment: exp.to_string(),
                    line,
                    blocks: Vec::new(),
                });
            }
            "universe" => {
                let [_, id] = tokens else {
                    return Err(parse_error(line, "expected `universe <id>`"));
                };
                self.close()?;
                self.define_id(line, id)?;
                self.open = Open::Universe(PendingUniverse {
                    id: id.to_string(),
                    bases: Vec::new(),
                });
            }
            "binomial" | "negbinomial" => {
                self.close()?;
                self.family(line, tokens)?;
            }
            "mixture" => {
                self.close()?;
                self.mixture(line, tokens)?;
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn family(&mut self, line: usize, tokens: &[&str]) -> Result<(), WorkspaceError> {
        let binomial = tokens[0] == "binomial";
        let id = *tokens.get(1).ok_or_else(|| parse_error(line, format!("expected `{} <id> …`", tokens[0])))?;
        self.define_id(line, id)?;
        let mut count = None;
        let mut tail = None;
        let mut thetas = None;
        let mut rest = tokens[2..].iter();
        while let Some(key) = rest.next() {
            match *key {
                "n" if binomial => count = Some(count_token(line, rest.next(), "n")?),
                "k" if !binomial => count = Some(count_token(line, rest.next(), "k")?),
                "tail" if !binomial => tail = Some(count_token(line, rest.next(), "tail")?),
                "thetas" => {
                    let values = rest.by_ref().map(|t| rational_token(line, t)).collect::<Result<Vec<_>, _>>()?;
                    thetas = Some(values);
                }
                other => return Err(parse_error(line, format!("unexpected `{other}` in {} declaration", tokens[0]))),
            }
        }
        let count = count.ok_or_else(|| parse_error(line, format!("missing `{}`", if binomial { "n" } else { "k" })))?;
        let thetas = thetas.filter(|t| !t.is_empty()).ok_or_else(|| parse_error(line, "missing `thetas`"))?;
        let built = if binomial {
            binomial_experiment(id, count, &thetas).map(|e| (e, ExperimentSource::Binomial { n: count, thetas }))
        } else {
            let tail = tail.ok_or_else(|| parse_error(line, "missing `tail`"))?;
            if count == 0 {
                return Err(parse_error(line, "`k` must be positive"));
            }
            negative_binomial_experiment(id, count, &thetas, tail)
                .map(|e| (e, ExperimentSource::NegBinomial { k: count, tail, thetas }))
        };
        let (experiment, source) = built.map_err(|e| match e {
            birnbaum_core::MethodError::Model(source) => WorkspaceError::Validation { line, source },
            other => parse_error(line, other.to_string()),
        })?;
        self.add_experiment(experiment, source);
        Ok(())
    }

    fn mixture(&mut self, line: usize, tokens: &[&str]) -> Result<(), WorkspaceError> {
        let (id, first, second, weight) = match tokens {
            [_, id, "of", a, b] => (id, a, b, half()),
            [_, id, "of", a, b, "weight", w] => (id, a, b, rational_token(line, w)?),
            _ => return Err(parse_error(line, "expected `mixture <id> of <e1> <e2> [weight <w>]`")),
        };
        self.define_id(line, id)?;
        let resolve = |name: &str| {
            self.ws.experiment(name).cloned().ok_or_else(|| WorkspaceError::Unresolved {
                line,
                name: name.to_string(),
            })
        };
        let (e1, e2) = (resolve(first)?, resolve(second)?);
        let mix = make_mixture_with_id(*id, e1, e2, weight.clone())
            .map_err(|source| WorkspaceError::Validation { line, source })?;
        let experiment = Arc::try_unwrap(mix.experiment).unwrap_or_else(|shared| (*shared).clone());
        self.add_experiment(
            experiment,
            ExperimentSource::Mixture {
                first: first.to_string(),
                second: second.to_string(),
                weight,
            },
        );
        Ok(())
    }

    fn body(&mut self, line: usize, tokens: &[&str]) -> Result<(), WorkspaceError> {
        match (&mut self.open, tokens[0]) {
            (Open::Experiment(p), "outcomes") => {
                if p.outcomes.is_some() {
                    return Err(parse_error(line, "second `outcomes` line"));
                }
                p.outcomes = Some(tokens[1..].iter().map(|t| t.to_string()).collect());
            }
            (Open::Experiment(p), "theta") => {
                let [_, label, ":", values @ ..] = tokens else {
                    return Err(parse_error(line, "expected `theta <label> : <p> …`"));
                };
                let expected = p
                    .outcomes
                    .as_ref()
                    .ok_or_else(|| parse_error(line, "`theta` row before `outcomes`"))?
                    .len();
                if values.len() != expected {
                    return Err(parse_error(
                        line,
                        format!("row has {} probabilities for {expected} outcomes", values.len()),
                    ));
                }
                let row = values.iter().map(|t| rational_token(line, t)).collect::<Result<Vec<_>, _>>()?;
                p.rows.push((line, label.to_string(), row));
            }
            (Open::Statistic(p), "block") => {
                p.blocks.push(tokens[1..].iter().map(|t| t.to_string()).collect());
            }
            (Open::Universe(p), "base") => {
                let [_, text] = tokens else {
                    return Err(parse_error(line, "expected `base <experiment>:<outcome>`"));
                };
                let (e, x) = split_base(text)
                    .ok_or_else(|| parse_error(line, format!("base `{text}` is not of the form <experiment>:<outcome>")))?;
                p.bases.push((line, e.to_string(), x.to_string()));
            }
            (_, other) => return Err(parse_error(line, format!("unexpected `{other}`"))),
        }
        Ok(())
    }
}

pub fn parse_workspace(text: &str) -> Result<Workspace, WorkspaceError> {
    let mut parser = Parser {
        ws: Workspace::default(),
        open: Open::None,
    };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if !parser.header(line, &tokens)? {
            parser.body(line, &tokens)?;
        }
    }
    parser.close()?;
    Ok(parser.ws)
}

pub const EXAMPLE1: &str = include_str!("../fixtures/example1.bw");
pub const MAYO: &str = include_str!("../fixtures/mayo.bw");

/// Bundled fixtures by name.
pub fn fixture(name: &str) -> Option<&'static str> {
    match name {
        "example1" | "example1.bw" => Some(EXAMPLE1),
        "mayo" | "mayo.bw" => Some(MAYO),
        _ => None,
    }
}
