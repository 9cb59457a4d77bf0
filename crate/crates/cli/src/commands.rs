//! One function per subcommand, each producing a [`Report`].

use std::collections::BTreeSet;
use std::sync::Arc;

use birnbaum_core::freq::{
    self, grid_best_allocation, perturbation_gain, reproduction_sweep, AllocationResult, Conditioning, InstrumentSpec,
    TwoPointCoverage, TwoPointModel,
};
use birnbaum_core::methods::{
    audit_sp2_wcp, binom_pvalue, mixture_pvalue, negbinom_pvalue, AuditOptions, BinomialSpec, MethodAuditReport,
    NegBinomialSpec,
};
use birnbaum_core::rational::{fmt_exact, parse_rational};
use birnbaum_core::relations::{parse_kinds, Side, WitnessChain};
use birnbaum_core::statistics::{fmt_block, Ancillarity, Sufficiency, DEFAULT_ANCILLARY_CAP};
use birnbaum_core::{
    birnbaum_chain, closure, condition, enumerate_ancillaries, is_ancillary, is_sufficient, minimal_sufficient, related,
    verify_birnbaum, Experiment, InferenceBase, Rational, RelationKind, StatisticPartition, Universe, Witness,
};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::{optional_rational, rational, show, show_f64, show_optional, Report};
use crate::workspace::Workspace;

fn experiment<'a>(ws: &'a Workspace, id: &str) -> Result<&'a Arc<Experiment>, CliError> {
    ws.experiment(id)
        .ok_or_else(|| CliError::domain("UNRESOLVED_REFERENCE", format!("unknown experiment `{id}`")))
}

fn base(ws: &Workspace, text: &str) -> Result<InferenceBase, CliError> {
    if crate::workspace::split_base(text).is_none() {
        return Err(CliError::usage(format!("base `{text}` is not of the form <experiment>:<outcome>")));
    }
    ws.base(text).map_err(|m| CliError::domain("UNRESOLVED_REFERENCE", m))
}

pub fn parse_rational_arg(name: &str, text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::usage(format!("{name}: {e}")))
}

fn same_block(a: &[String], b: &[String]) -> bool {
    let a: BTreeSet<&String> = a.iter().collect();
    let b: BTreeSet<&String> = b.iter().collect();
    a == b
}

/// Workspace statistic on `experiment` with a block equal to `block`.
fn named_statistic<'a>(ws: &'a Workspace, experiment: &'a str, block: &[String]) -> Option<(&'a StatisticPartition, usize)> {
    ws.statistics_on(experiment)
        .find_map(|t| t.blocks.iter().position(|b| same_block(b, block)).map(|k| (t, k)))
}

/// Replaces a synthesized conditioning statistic by a declared one with the
/// same block, when the workspace has one.
fn rename_witness(ws: &Workspace, a: &InferenceBase, b: &InferenceBase, witness: Witness) -> Witness {
    match witness {
        Witness::Ancillarity {
            conditioned,
            statistic,
            block,
            block_prob,
            component: None,
        } => {
            let host = if conditioned == Side::First { a } else { b };
            match named_statistic(ws, host.experiment().id(), &statistic.blocks[block]) {
                Some((named, k)) => Witness::Ancillarity {
                    conditioned,
                    statistic: named.clone(),
                    block: k,
                    block_prob,
                    component: None,
                },
                None => Witness::Ancillarity {
                    conditioned,
                    statistic,
                    block,
                    block_prob,
                    component: None,
                },
            }
        }
        other => other,
    }
}

pub fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::Sufficiency { statistic, block } => json!({
            "kind": "S",
            "statistic": statistic.id,
            "block": statistic.blocks[*block],
        }),
        Witness::Conditionality { mixture, component } => json!({
            "kind": "C",
            "mixture_side": if *mixture == Side::First { "first" } else { "second" },
            "component": component,
        }),
        Witness::Ancillarity {
            conditioned,
            statistic,
            block,
            block_prob,
            component,
        } => json!({
            "kind": "A",
            "conditioned_side": if *conditioned == Side::First { "first" } else { "second" },
            "statistic": statistic.id,
            "block": statistic.blocks[*block],
            "block_probability": rational(block_prob),
            "component": component,
        }),
        Witness::Likelihood { constant } => json!({ "kind": "L", "constant": rational(constant) }),
    }
}

fn pmf_lines(report: &mut Report, e: &Experiment) {
    report.line(format!("  outcomes: {}", e.outcomes().join(" ")));
    for (param, row) in e.params().iter().zip(e.pmf()) {
        let cells: Vec<String> = row.iter().map(fmt_exact).collect();
        report.line(format!("  theta {param}: {}", cells.join(" ")));
    }
}

fn pmf_json(e: &Experiment) -> Value {
    json!({
        "id": e.id(),
        "params": e.params(),
        "outcomes": e.outcomes(),
        "pmf": e.pmf().iter().map(|row| row.iter().map(fmt_exact).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn validate(ws: &Workspace, source: &str) -> Report {
    let mut r = Report::new("validate");
    r.input("workspace", source);
    r.line(format!("workspace {source}: valid"));
    r.line(format!("experiments: {}", ws.experiments.len()));
    let mut experiments = Vec::new();
    for (id, def) in &ws.experiments {
        let e = &def.experiment;
        r.line(format!("  {id}: {} parameters, {} outcomes", e.num_params(), e.num_outcomes()));
        experiments.push(json!({ "id": id, "params": e.num_params(), "outcomes": e.num_outcomes() }));
    }
    r.line(format!("statistics: {}", ws.statistics.len()));
    let mut statistics = Vec::new();
    for (id, def) in &ws.statistics {
        let e = &ws.experiments[&def.experiment].experiment;
        let ancillary = is_ancillary(e, &def.statistic).map(|a| a.holds()).unwrap_or(false);
        let sufficient = is_sufficient(e, &def.statistic).map(|s| s.holds()).unwrap_or(false);
        r.line(format!(
            "  {id} on {}: {} blocks, ancillary: {ancillary}, sufficient: {sufficient}",
            def.experiment,
            def.statistic.blocks.len()
        ));
        statistics.push(json!({
            "id": id,
            "experiment": def.experiment,
            "blocks": def.statistic.blocks.len(),
            "ancillary": ancillary,
            "sufficient": sufficient,
        }));
    }
    r.line(format!("universes: {}", ws.universes.len()));
    let mut universes = Vec::new();
    for (id, def) in &ws.universes {
        r.line(format!("  {id}: {} bases", def.bases.len()));
        universes.push(json!({ "id": id, "bases": def.bases.len() }));
    }
    r.value("valid", true)
        .value("experiments", experiments)
        .value("statistics", statistics)
        .value("universes", universes);
    r
}

pub fn suff_min(ws: &Workspace, id: &str) -> Result<Report, CliError> {
    let e = experiment(ws, id)?;
    let t = minimal_sufficient(e);
    let mut r = Report::new("suff-min");
    r.input("experiment", id);
    r.line(format!("minimal sufficient partition of {id}: {} blocks", t.blocks.len()));
    let table = match is_sufficient(e, &t)? {
        Sufficiency::Sufficient(table) => table,
        Sufficiency::NotSufficient(f) => {
            return Err(CliError::domain("INTERNAL", format!("minimal partition failed sufficiency: {f}")))
        }
    };
    let mut blocks = Vec::new();
    for (k, block) in table.iter().enumerate() {
        let conditionals: Vec<String> = block
            .outcomes
            .iter()
            .zip(&block.conditionals)
            .map(|(x, c)| format!("{x}: {}", fmt_exact(c)))
            .collect();
        r.line(format!(
            "  block {} {}  conditionals {}",
            k + 1,
            fmt_block(&block.outcomes),
            conditionals.join(", ")
        ));
        blocks.push(json!({
            "outcomes": block.outcomes,
            "conditionals": block.conditionals.iter().map(rational).collect::<Vec<_>>(),
        }));
    }
    r.value("statistic", t.id.clone()).value("blocks", blocks);
    Ok(r)
}

pub fn ancillary_cap(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var("BW_ANCILLARY_CAP") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("BW_ANCILLARY_CAP must be a non-negative integer, got `{text}`"))),
        Err(_) => Ok(DEFAULT_ANCILLARY_CAP),
    }
}

pub fn ancillaries(ws: &Workspace, id: &str, cap: usize) -> Result<Report, CliError> {
    let e = experiment(ws, id)?;
    let found = enumerate_ancillaries(e, cap)?;
    let mut r = Report::new("ancillaries");
    r.input("experiment", id).input("cap", cap);
    r.line(format!("non-trivial ancillary partitions of {id}: {}", found.len()));
    let mut list = Vec::new();
    for t in &found {
        let probs = match is_ancillary(e, t)? {
            Ancillarity::Ancillary(p) => p,
            Ancillarity::NotAncillary(f) => {
                return Err(CliError::domain("INTERNAL", format!("enumerated partition not ancillary: {f}")))
            }
        };
        let declared = ws
            .statistics_on(id)
            .find(|d| d.blocks.len() == t.blocks.len() && t.blocks.iter().all(|b| d.blocks.iter().any(|c| same_block(b, c))))
            .map(|d| d.id.clone());
        let blocks: Vec<String> = t
            .blocks
            .iter()
            .zip(&probs)
            .map(|(b, p)| format!("{} p={}", fmt_block(b), fmt_exact(p)))
            .collect();
        let name = declared.as_ref().map_or(String::new(), |d| format!(" (= {d})"));
        r.line(format!("  {}{name}: {}", t.id, blocks.join(" | ")));
        list.push(json!({
            "id": t.id,
            "declared_as": declared,
            "blocks": t.blocks,
            "probabilities": probs.iter().map(rational).collect::<Vec<_>>(),
        }));
    }
    r.value("count", found.len()).value("ancillaries", list);
    Ok(r)
}

pub fn condition_cmd(ws: &Workspace, id: &str, statistic: &str, block: &str) -> Result<Report, CliError> {
    let e = experiment(ws, id)?;
    let def = ws
        .statistics
        .get(statistic)
        .filter(|d| d.experiment == id)
        .ok_or_else(|| CliError::domain("UNRESOLVED_REFERENCE", format!("no statistic `{statistic}` on `{id}`")))?;
    let t = &def.statistic;
    let index = match block.strip_prefix('#') {
        Some(k) => {
            let k: usize = k
                .parse()
                .map_err(|_| CliError::usage(format!("block `{block}`: expected #<number>")))?;
            if k == 0 || k > t.blocks.len() {
                return Err(CliError::domain("UNKNOWN_BLOCK", format!("statistic `{statistic}` has {} blocks", t.blocks.len())));
            }
            k - 1
        }
        None => t.block_of(block).ok_or_else(|| {
            CliError::domain("UNKNOWN_BLOCK", format!("`{block}` is not an outcome of statistic `{statistic}`"))
        })?,
    };
    let conditional = condition(e, t, index)?;
    let mut r = Report::new("condition");
    r.input("experiment", id).input("statistic", statistic).input("block", block);
    r.line(format!(
        "{} = {id} conditioned on {statistic} block {} {}",
        conditional.id(),
        index + 1,
        fmt_block(&t.blocks[index])
    ));
    pmf_lines(&mut r, &conditional);
    let matches: Vec<String> = ws
        .experiments
        .values()
        .filter(|d| d.experiment.same_model(&conditional))
        .map(|d| d.experiment.id().to_string())
        .collect();
    if !matches.is_empty() {
        r.line(format!("matches workspace experiment: {}", matches.join(", ")));
    }
    r.value("conditional", pmf_json(&conditional)).value("matches", matches);
    Ok(r)
}

pub fn relate(ws: &Workspace, kind: &str, a: &str, b: &str) -> Result<Report, CliError> {
    let kind: RelationKind = kind
        .parse()
        .map_err(|_| CliError::usage(format!("unknown relation `{kind}` (expected S, C, A or L)")))?;
    let (x, y) = (base(ws, a)?, base(ws, b)?);
    let witness = related(kind, &x, &y)?.map(|w| rename_witness(ws, &x, &y, w));
    let mut r = Report::new("relate");
    r.input("kind", kind.to_string()).input("first", a).input("second", b);
    match &witness {
        Some(w) => {
            r.line(format!("related: true ({w})"));
            r.witness(witness_json(w));
        }
        None => {
            r.line("related: false");
        }
    }
    r.value("related", witness.is_some());
    Ok(r)
}

fn universe(ws: &Workspace, id: &str) -> Result<Universe, CliError> {
    let def = ws
        .universes
        .get(id)
        .ok_or_else(|| CliError::domain("UNRESOLVED_REFERENCE", format!("unknown universe `{id}`")))?;
    let mut u = Universe::new();
    for (e, x) in &def.bases {
        let base = InferenceBase::new(experiment(ws, e)?.clone(), x)?;
        u.add_base(base)?;
    }
    Ok(u)
}

fn class_text(u: &Universe, class: &[usize]) -> String {
    let names: Vec<String> = class.iter().map(|&i| u.bases()[i].to_string()).collect();
    format!("{{{}}}", names.join(", "))
}

pub fn closure_cmd(ws: &Workspace, id: &str, kinds: &str) -> Result<Report, CliError> {
    let kinds = parse_kinds(kinds).map_err(|e| CliError::usage(e.to_string()))?;
    let u = universe(ws, id)?;
    let result = closure(&u, &kinds);
    let kind_list: Vec<String> = kinds.iter().map(|k| k.to_string()).collect();
    let mut r = Report::new("closure");
    r.input("universe", id).input("kinds", kind_list.join(","));
    let classes = result.classes.len();
    r.line(format!(
        "closure of {id} under {{{}}}: {classes} class{}",
        kind_list.join(","),
        if classes == 1 { "" } else { "es" }
    ));
    for (k, class) in result.classes.iter().enumerate() {
        r.line(format!("  class {}: {}", k + 1, class_text(&u, class)));
    }
    let direct: BTreeSet<(usize, usize)> = result.edges.iter().map(|e| (e.from, e.to)).collect();
    r.line(format!("direct edges: {}", direct.len()));
    for edge in &result.edges {
        let (a, b) = (&u.bases()[edge.from], &u.bases()[edge.to]);
        let w = rename_witness(ws, a, b, edge.witness.clone());
        r.line(format!("  {a} ~{} {b}  ({w})", edge.kind));
        let mut value = witness_json(&w);
        value["from"] = json!(a.to_string());
        value["to"] = json!(b.to_string());
        r.witness(value);
    }
    let added = result.added_pairs();
    if added > 0 {
        r.line(format!(
            "note: relation not transitive; closure added {added} pair{}",
            if added == 1 { "" } else { "s" }
        ));
    }
    let class_values: Vec<Vec<String>> = result
        .classes
        .iter()
        .map(|c| c.iter().map(|&i| u.bases()[i].to_string()).collect())
        .collect();
    r.value("classes", class_values)
        .value("direct_edges", direct.len())
        .value("added_pairs", added);
    Ok(r)
}

fn chain_lines(r: &mut Report, chain: &WitnessChain) -> Value {
    r.line(format!("chain {} ~ {}: constant c = {}", chain.from, chain.to, show(&chain.constant)));
    if let Some(mix) = &chain.mixture {
        r.line(format!("  mixture: {} (weights 1/2, 1/2)", mix.experiment.id()));
    }
    let mut steps = Vec::new();
    for (k, step) in chain.steps.iter().enumerate() {
        r.line(format!("  {}. {} ~{} {}  ({})", k + 1, step.from, step.kind, step.to, step.witness));
        let mut value = witness_json(&step.witness);
        value["from"] = json!(step.from.to_string());
        value["to"] = json!(step.to.to_string());
        steps.push(value);
    }
    if let (Some(t), Some(c)) = (&chain.birnbaum_statistic, &chain.block_conditional) {
        let block = t.blocks.iter().find(|b| b.len() == 2).cloned().unwrap_or_default();
        r.line(format!(
            "  pairing statistic {}: block {} sufficient, P(first | block) = {} under every θ",
            t.id,
            fmt_block(&block),
            show(c)
        ));
    }
    let verified = chain.verify();
    r.line(format!(
        "  re-verified: {}",
        match &verified {
            Ok(()) => "true".to_string(),
            Err(e) => format!("false ({e})"),
        }
    ));
    json!({
        "from": chain.from.to_string(),
        "to": chain.to.to_string(),
        "constant": rational(&chain.constant),
        "mixture": chain.mixture.as_ref().map(|m| m.experiment.id().to_string()),
        "steps": steps,
        "block_conditional": optional_rational(&chain.block_conditional),
        "verified": verified.is_ok(),
    })
}

pub fn chain_cmd(ws: &Workspace, a: &str, b: &str) -> Result<Report, CliError> {
    let (x, y) = (base(ws, a)?, base(ws, b)?);
    let chain = birnbaum_chain(&x, &y)?;
    let mut r = Report::new("chain");
    r.input("first", a).input("second", b);
    let value = chain_lines(&mut r, &chain);
    r.value("verified", chain.verify().is_ok())
        .value("constant", rational(&chain.constant))
        .value("block_conditional", optional_rational(&chain.block_conditional));
    r.witness(value);
    if chain.verify().is_err() {
        return Err(CliError::domain("CHAIN_VERIFICATION_FAILED", r.lines.join("\n")));
    }
    Ok(r)
}

pub fn verify_birnbaum_cmd(ws: &Workspace, id: &str, depth: usize) -> Result<Report, CliError> {
    let u = universe(ws, id)?;
    let report = verify_birnbaum(&u, depth);
    let mut r = Report::new("verify-birnbaum");
    r.input("universe", id).input("depth", depth);
    r.line(format!("universe {id}: {} bases, {} L-related pairs", u.len(), report.l_pairs.len()));
    for pair in &report.l_pairs {
        r.line(format!(
            "  {} ~L {}  c = {}",
            u.bases()[pair.a],
            u.bases()[pair.b],
            fmt_exact(&pair.constant)
        ));
    }
    r.line(format!(
        "augmented universe: {} bases ({} chains)",
        report.augmented.len(),
        report.chains.len()
    ));
    r.line("L classes:");
    for class in &report.l_classes {
        r.line(format!("  {}", class_text(&u, class)));
    }
    r.line("closure({S,C}) classes restricted to the original bases:");
    for class in &report.sc_classes {
        r.line(format!("  {}", class_text(&u, class)));
    }
    r.line(format!("classes match: {}", report.classes_match));
    r.line(format!("sound (no S/C class spans two L classes): {}", report.sound));
    for failure in &report.failures {
        r.warn(failure.clone());
    }
    r.line(format!("result: {}", if report.passed() { "PASS" } else { "FAIL" }));
    let names = |classes: &[Vec<usize>]| -> Vec<Vec<String>> {
        classes
            .iter()
            .map(|c| c.iter().map(|&i| u.bases()[i].to_string()).collect())
            .collect()
    };
    for chain in &report.chains {
        let mut scratch = Report::default();
        r.witness(chain_lines(&mut scratch, chain));
    }
    r.value("l_classes", names(&report.l_classes))
        .value("sc_classes", names(&report.sc_classes))
        .value("classes_match", report.classes_match)
        .value("sound", report.sound)
        .value("augmented_size", report.augmented.len())
        .value("passed", report.passed());
    Ok(r)
}

pub fn pvalue_binom(n: u64, theta0: &Rational, x: u64) -> Result<Report, CliError> {
    let spec = BinomialSpec::new(n, theta0.clone())?;
    let p = binom_pvalue(&spec, x)?;
    let mut r = Report::new("pvalue binom");
    r.input("n", n).input("theta0", fmt_exact(theta0)).input("successes", x);
    r.line(show(&p));
    r.value("pvalue", rational(&p));
    Ok(r)
}

pub fn pvalue_negbinom(k: u64, theta0: &Rational, s: u64) -> Result<Report, CliError> {
    let spec = NegBinomialSpec::new(k, theta0.clone())?;
    let p = negbinom_pvalue(&spec, s);
    let mut r = Report::new("pvalue negbinom");
    r.input("k", k).input("theta0", fmt_exact(theta0)).input("successes", s);
    r.line(show(&p));
    r.value("pvalue", rational(&p));
    Ok(r)
}

pub fn pvalue_mixture(n: u64, k: u64, theta0: &Rational, s: u64) -> Result<Report, CliError> {
    let b = BinomialSpec::new(n, theta0.clone())?;
    let nb = NegBinomialSpec::new(k, theta0.clone())?;
    let failures = n.checked_sub(s).ok_or_else(|| {
        CliError::domain("INCONSISTENT_DATA", format!("{s} successes exceed n = {n}"))
    })?;
    let p = mixture_pvalue(&b, &nb, (s, failures))?;
    let mut r = Report::new("pvalue mixture");
    r.input("n", n).input("k", k).input("theta0", fmt_exact(theta0)).input("successes", s);
    r.line(show(&p));
    r.value("pvalue", rational(&p));
    Ok(r)
}

pub fn audit_lines(r: &mut Report, a: &MethodAuditReport) {
    let (s, f) = a.data;
    r.line(format!(
        "data: {s} successes, {f} failures; θ0 = {}; negative-binomial tail truncated at {}",
        fmt_exact(&a.theta0),
        a.tail
    ));
    r.line(format!("likelihood constant C(n,s)/C(s+k-1,k-1) = {} (verified: {})", fmt_exact(&a.likelihood_constant), a.proportionality_verified));
    r.line("method output M (one-sided p-values):");
    r.line(format!("  M(E1, x)          = {}", show(&a.m_values.binomial)));
    r.line(format!("  M(E2, x)          = {}", show(&a.m_values.negative_binomial)));
    r.line(format!("  M(E_mix, (1,x))   = {}", show(&a.m_values.mixture_first)));
    r.line(format!("  M(E_mix, (2,x))   = {}", show(&a.m_values.mixture_second)));
    r.line("inference Ev (report the component p-value):");
    r.line(format!("  Ev(E_mix, (1,x))  = {}", show(&a.ev_values.mixture_first)));
    r.line(format!("  Ev(E_mix, (2,x))  = {}", show(&a.ev_values.mixture_second)));
    r.line(format!(
        "SP2 (T = {} sufficient, M constant on its blocks): {}",
        a.sufficient_statistic.id, a.sp2_check
    ));
    r.line(format!("WCP (Ev of mixture equals Ev of component, C-related): {}", a.wcp_check));
    r.line(format!("LP (Ev(E_mix,(1,x)) = Ev(E_mix,(2,x))): {}", a.lp_check));
    r.line(format!(
        "SP on Ev: bases S-related: {}; reporting the conditional p-value violates SP: {}",
        a.sp_related, a.sp_violated
    ));
    r.line(format!("verdict: {}", a.verdict.code()));
}

pub fn audit_json(a: &MethodAuditReport) -> Value {
    json!({
        "m": {
            "binomial": rational(&a.m_values.binomial),
            "negative_binomial": rational(&a.m_values.negative_binomial),
            "mixture_first": rational(&a.m_values.mixture_first),
            "mixture_second": rational(&a.m_values.mixture_second),
        },
        "ev": {
            "component_first": rational(&a.ev_values.component_first),
            "component_second": rational(&a.ev_values.component_second),
            "mixture_first": rational(&a.ev_values.mixture_first),
            "mixture_second": rational(&a.ev_values.mixture_second),
        },
        "likelihood_constant": rational(&a.likelihood_constant),
        "proportionality_verified": a.proportionality_verified,
        "sp2": a.sp2_check,
        "wcp": a.wcp_check,
        "lp": a.lp_check,
        "sp_related": a.sp_related,
        "sp_violated": a.sp_violated,
        "verdict": a.verdict.code(),
        "tail": a.tail,
    })
}

pub fn audit_mayo(n: u64, k: u64, theta0: &Rational, s: u64, options: &AuditOptions) -> Result<Report, CliError> {
    let b = BinomialSpec::new(n, theta0.clone())?;
    let nb = NegBinomialSpec::new(k, theta0.clone())?;
    let failures = n.checked_sub(s).ok_or_else(|| {
        CliError::domain("INCONSISTENT_DATA", format!("{s} successes exceed n = {n}"))
    })?;
    let audit = audit_sp2_wcp(&b, &nb, (s, failures), options)?;
    let mut r = Report::new("audit-mayo");
    r.input("n", n)
        .input("k", k)
        .input("theta0", fmt_exact(theta0))
        .input("successes", s)
        .input("thetas", options.thetas.iter().map(fmt_exact).collect::<Vec<_>>());
    audit_lines(&mut r, &audit);
    r.values = audit_json(&audit).as_object().cloned().unwrap_or_default();
    r.witness(json!({
        "kind": "S",
        "statistic": audit.sufficient_statistic.id,
        "block": [format!("(1,({s},{failures}))"), format!("(2,({s},{failures}))")],
    }));
    Ok(r)
}

pub fn coverage_ex3(theta: &Rational, conditioning: Conditioning) -> Result<Report, CliError> {
    let value = freq::example3_coverage(theta, conditioning)?;
    let mut r = Report::new("coverage-ex3");
    r.input("theta", fmt_exact(theta)).input("conditioning", conditioning.to_string());
    let event = match conditioning {
        Conditioning::Unconditional => String::new(),
        Conditioning::GivenXPositive => " | X > 0".to_string(),
        Conditioning::GivenXZero => " | X = 0".to_string(),
    };
    r.line(format!("P(θ ∈ {{X}}{event}) = {} at θ = {}", show(&value), fmt_exact(theta)));
    r.value("coverage", rational(&value));
    Ok(r)
}

fn coverage_json(c: &TwoPointCoverage) -> Value {
    json!({
        "given_distinct": optional_rational(&c.given_distinct),
        "given_tie_minus_only": optional_rational(&c.given_tie_minus_only),
        "given_tie_plus_only": optional_rational(&c.given_tie_plus_only),
        "given_tie_both": optional_rational(&c.given_tie_both),
        "unconditional": rational(&c.unconditional),
        "given_d1": optional_rational(&c.given_d1),
        "given_d0": optional_rational(&c.given_d0),
        "p_d1": rational(&c.p_d1),
        "modified_unconditional": rational(&c.modified_unconditional),
    })
}

pub fn twopoint(epsilon: &Rational, theta: &Rational) -> Result<Report, CliError> {
    let model = TwoPointModel::new(epsilon.clone(), theta.clone())?;
    let a = freq::example4_analysis(&model)?;
    let mut r = Report::new("twopoint");
    r.input("epsilon", fmt_exact(epsilon)).input("theta", fmt_exact(theta));
    r.line(format!(
        "model: ε = {}, θ = {}; P(X = θ+1) = {}, P(X = θ-1) = {}",
        fmt_exact(epsilon),
        fmt_exact(theta),
        fmt_exact(&model.p_up()),
        fmt_exact(&model.p_down())
    ));
    r.line(format!("A_(θ-1) = {}, A_(θ+1) = {}", a.a_minus, a.a_plus));
    let c = &a.closed_form;
    r.line("coverage of T = X_(1) + 1:");
    r.line(format!("  P(T=θ | X_(1) ≠ X_(2))                  = {}", show_optional(&c.given_distinct)));
    r.line(format!("  P(T=θ | tie, X_(1) in A_(θ-1) \\ A_(θ+1)) = {}", show_optional(&c.given_tie_minus_only)));
    r.line(format!("  P(T=θ | tie, X_(1) in A_(θ+1) \\ A_(θ-1)) = {}", show_optional(&c.given_tie_plus_only)));
    r.line(format!("  P(T=θ | tie, X_(1) in both)              = {}", show_optional(&c.given_tie_both)));
    r.line(format!("  P(T=θ)                                   = {}", show(&c.unconditional)));
    r.line(format!("  P(T=θ | D=1) = {}, P(T=θ | D=0) = {}", show_optional(&c.given_d1), show_optional(&c.given_d0)));
    r.line(format!("  modified estimator: P(T'=θ) = {}", show(&c.modified_unconditional)));
    r.line(format!("tie value from (1/2-θε)²/((1/2-θε)²+(1/2+θε)²) = {}", show(&a.intersection_formula)));
    r.line(format!("D ancillary: {}", a.d_ancillary));
    r.line(format!("A-sets disjoint (ε > 1/2, θ recoverable from any data): {}", a.disjoint));
    r.line(format!("closed form equals 4-outcome enumeration: {}", a.verified));
    r.value("closed_form", coverage_json(&a.closed_form))
        .value("enumeration", coverage_json(&a.enumeration))
        .value("verified", a.verified)
        .value("intersection_formula", rational(&a.intersection_formula))
        .value("d_ancillary", a.d_ancillary)
        .value("disjoint", a.disjoint);
    if !a.verified {
        r.warn("closed form disagrees with enumeration");
    }
    Ok(r)
}

pub fn allocation_json(a: &AllocationResult) -> Value {
    json!({
        "alpha1": a.alpha1,
        "alpha2": a.alpha2,
        "power1": a.power1,
        "power2": a.power2,
        "avg_alpha": a.avg_alpha,
        "avg_power": a.avg_power,
        "lr_cutoff": a.lr_cutoff,
    })
}

fn allocation_line(label: &str, a: &AllocationResult) -> String {
    format!(
        "{label}: α = ({}, {}), power = ({}, {}), average power {}",
        show_f64(a.alpha1),
        show_f64(a.alpha2),
        show_f64(a.power1),
        show_f64(a.power2),
        show_f64(a.avg_power)
    )
}

pub fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<u32>, CliError> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| CliError::usage(format!("range `{text}`: expected a..b")))?;
    let parse = |s: &str| {
        s.trim_start_matches('=')
            .parse::<u32>()
            .map_err(|_| CliError::usage(format!("range `{text}`: bounds must be positive integers")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a == 0 || a > b {
        return Err(CliError::usage(format!("range `{text}`: need 1 ≤ a ≤ b")));
    }
    Ok(a..=b)
}

#[allow(clippy::too_many_arguments)]
pub fn np_mixture(
    sigma1: f64,
    sigma2: f64,
    mu0: f64,
    mu1: f64,
    n: u32,
    alpha: f64,
    sweep: Option<std::ops::RangeInclusive<u32>>,
) -> Result<Report, CliError> {
    let inst1 = InstrumentSpec::new(sigma1, mu0, mu1, n)?;
    let inst2 = InstrumentSpec::new(sigma2, mu0, mu1, n)?;
    let equal = freq::equal_level_test(&inst1, &inst2, alpha)?;
    let optimal = freq::optimal_mixture_test(&inst1, &inst2, alpha)?;
    let gain = perturbation_gain(&inst1, &inst2, &optimal, 1e-3, 5);
    let grid = grid_best_allocation(&inst1, &inst2, alpha, 1e-3);
    let mut r = Report::new("np-mixture");
    r.input("sigma1", sigma1)
        .input("sigma2", sigma2)
        .input("mu0", mu0)
        .input("mu1", mu1)
        .input("n", n)
        .input("alpha", alpha);
    r.line(format!(
        "instruments: σ = ({sigma1}, {sigma2}), μ0 = {mu0}, μ1 = {mu1}, n = {n}, δ = ({}, {})",
        show_f64(inst1.delta()),
        show_f64(inst2.delta())
    ));
    r.line(allocation_line("equal-level test", &equal));
    r.line(allocation_line("most powerful test", &optimal));
    r.line(format!(
        "  common log-LR cutoff {}; size error {:.1e}; gain over equal levels {}",
        show_f64(optimal.lr_cutoff.unwrap_or(f64::NAN)),
        (optimal.avg_alpha - alpha).abs(),
        show_f64(optimal.avg_power - equal.avg_power)
    ));
    r.line(format!(
        "  allocation perturbation ±1e-3 (5 steps) best gain {:.2e}; coarse grid best α1 {} (power {})",
        gain,
        show_f64(grid.alpha1),
        show_f64(grid.avg_power)
    ));
    r.value("equal_level", allocation_json(&equal))
        .value("optimal", allocation_json(&optimal))
        .value("perturbation_gain", gain)
        .value("grid_best", allocation_json(&grid));
    if let Some(range) = sweep {
        sweep_section(&mut r, sigma1, sigma2, mu0, mu1, alpha, range)?;
    }
    Ok(r)
}

pub fn sweep_section(
    r: &mut Report,
    sigma1: f64,
    sigma2: f64,
    mu0: f64,
    mu1: f64,
    alpha: f64,
    range: std::ops::RangeInclusive<u32>,
) -> Result<(), CliError> {
    let sweep = reproduction_sweep(sigma1, sigma2, mu0, mu1, alpha, range)?;
    let reference = sweep.reference;
    r.line(format!(
        "reference figures (unreconciled): equal-level power {}, most powerful {}, levels ({}, {})",
        reference.equal_power, reference.optimal_power, reference.alpha_old, reference.alpha_new
    ));
    r.line("   n  equal power  best power   alpha1     alpha2     max deviation");
    let mut rows = Vec::new();
    for row in &sweep.rows {
        r.line(format!(
            "  {:>2}  {:.6}     {:.6}     {:.6}   {:.6}   {:.4}",
            row.n, row.equal.avg_power, row.optimal.avg_power, row.optimal.alpha1, row.optimal.alpha2, row.max_deviation
        ));
        rows.push(json!({
            "n": row.n,
            "equal_power": row.equal.avg_power,
            "optimal_power": row.optimal.avg_power,
            "alpha1": row.optimal.alpha1,
            "alpha2": row.optimal.alpha2,
            "max_deviation": row.max_deviation,
        }));
    }
    let closest = &sweep.rows[sweep.closest];
    r.line(format!(
        "closest sample size n = {} (max deviation {:.4}); reconciled: {}",
        closest.n, closest.max_deviation, sweep.reconciled
    ));
    if !sweep.reconciled {
        r.warn("reference figures not reproduced by any sample size in the sweep");
    }
    r.value(
        "sweep",
        json!({
            "reference": {
                "equal_power": reference.equal_power,
                "optimal_power": reference.optimal_power,
                "alpha_old": reference.alpha_old,
                "alpha_new": reference.alpha_new,
            },
            "rows": rows,
            "closest_n": closest.n,
            "reconciled": sweep.reconciled,
        }),
    );
    Ok(())
}

pub fn parse_conditioning(text: &str) -> Result<Conditioning, CliError> {
    text.parse().map_err(CliError::usage)
}

pub fn parse_thetas(text: &str) -> Result<Vec<Rational>, CliError> {
    text.split(',').map(|t| parse_rational_arg("thetas", t.trim())).collect()
}
