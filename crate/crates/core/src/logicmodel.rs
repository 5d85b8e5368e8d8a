//! Staged logic models (inputs → activities → outputs → outcomes →
//! impacts) with linear propagation and left-side fact coupling.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coupling::topological_order;
use crate::error::{Error, Result};
use crate::format::NamedValues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Inputs,
    Activities,
    Outputs,
    Outcomes,
    Impacts,
}

impl Stage {
    /// Stages where objective facts may be coupled in.
    pub fn accepts_facts(self) -> bool {
        matches!(self, Stage::Inputs | Stage::Activities | Stage::Outputs)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Inputs => "inputs",
            Stage::Activities => "activities",
            Stage::Outputs => "outputs",
            Stage::Outcomes => "outcomes",
            Stage::Impacts => "impacts",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmNode {
    pub name: String,
    pub stage: Stage,
    #[serde(default)]
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmEdge {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LogicModel {
    pub nodes: Vec<LmNode>,
    pub edges: Vec<LmEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    DuplicateNode {
        name: String,
    },
    UnknownEndpoint {
        from: String,
        to: String,
        missing: String,
    },
    StageOrder {
        from: String,
        to: String,
        from_stage: Stage,
        to_stage: Stage,
    },
    Cycle {
        nodes: Vec<String>,
    },
    NoImpactNode,
    NonFiniteValue {
        item: String,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::DuplicateNode { name } => write!(f, "duplicate node {name:?}"),
            Finding::UnknownEndpoint { from, to, missing } => {
                write!(f, "edge {from} -> {to} references unknown node {missing:?}")
            }
            Finding::StageOrder {
                from,
                to,
                from_stage,
                to_stage,
            } => {
                write!(
                    f,
                    "edge {from} -> {to} goes backwards ({from_stage} -> {to_stage})"
                )
            }
            Finding::Cycle { nodes } => write!(f, "cycle through {}", nodes.join(", ")),
            Finding::NoImpactNode => write!(f, "model has no impacts-stage node"),
            Finding::NonFiniteValue { item } => write!(f, "non-finite value in {item}"),
        }
    }
}

/// Structural findings; an empty list means the model is valid.
pub fn validate(model: &LogicModel) -> Vec<Finding> {
    let mut findings = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, n) in model.nodes.iter().enumerate() {
        if index.insert(n.name.as_str(), i).is_some() {
            findings.push(Finding::DuplicateNode {
                name: n.name.clone(),
            });
        }
        if !n.baseline.is_finite() {
            findings.push(Finding::NonFiniteValue {
                item: format!("baseline of {}", n.name),
            });
        }
    }
    let mut known_edges = Vec::new();
    for e in &model.edges {
        let from = index.get(e.from.as_str()).copied();
        let to = index.get(e.to.as_str()).copied();
        if !e.weight.is_finite() {
            findings.push(Finding::NonFiniteValue {
                item: format!("edge {} -> {}", e.from, e.to),
            });
        }
        match (from, to) {
            (Some(a), Some(b)) => {
                let (sa, sb) = (model.nodes[a].stage, model.nodes[b].stage);
                if sb < sa {
                    findings.push(Finding::StageOrder {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        from_stage: sa,
                        to_stage: sb,
                    });
                }
                known_edges.push((a, b));
            }
            (a, _) => findings.push(Finding::UnknownEndpoint {
                from: e.from.clone(),
                to: e.to.clone(),
                missing: if a.is_none() {
                    e.from.clone()
                } else {
                    e.to.clone()
                },
            }),
        }
    }
    if topological_order(model.nodes.len(), &known_edges).is_none() {
        findings.push(Finding::Cycle {
            nodes: cyclic_nodes(model, &known_edges),
        });
    }
    if !model.nodes.iter().any(|n| n.stage == Stage::Impacts) {
        findings.push(Finding::NoImpactNode);
    }
    findings
}

/// Nodes left over after repeatedly peeling sources and sinks: exactly the
/// nodes on or between cycles.
fn cyclic_nodes(model: &LogicModel, edges: &[(usize, usize)]) -> Vec<String> {
    let mut alive: BTreeSet<usize> = (0..model.nodes.len()).collect();
    loop {
        let before = alive.len();
        let live_edges: Vec<_> = edges
            .iter()
            .filter(|(a, b)| alive.contains(a) && alive.contains(b))
            .collect();
        alive.retain(|i| {
            live_edges.iter().any(|(_, b)| b == i) && live_edges.iter().any(|(a, _)| a == i)
        });
        if alive.len() == before {
            break;
        }
    }
    alive
        .into_iter()
        .map(|i| model.nodes[i].name.clone())
        .collect()
}

fn ensure_valid(model: &LogicModel) -> Result<()> {
    let findings = validate(model);
    if findings.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidModel(
            findings.iter().map(ToString::to_string).collect(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeValue {
    pub name: String,
    pub stage: Stage,
    pub value: f64,
}

/// Per-node values in declaration order plus the impact vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactReport {
    pub nodes: Vec<NodeValue>,
    pub impacts: NamedValues,
}

/// Propagate with every node's exogenous term given explicitly: each node
/// takes `baseline + exogenous + Σ weight × upstream`, evaluated in `order`.
fn propagate_inner(model: &LogicModel, exogenous: &[f64], order: &[usize]) -> ImpactReport {
    let index: HashMap<&str, usize> = model
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.nodes.len()];
    for e in &model.edges {
        incoming[index[e.to.as_str()]].push((index[e.from.as_str()], e.weight));
    }
    let mut values = vec![0.0; model.nodes.len()];
    for &i in order {
        let mut acc = model.nodes[i].baseline + exogenous[i];
        for &(u, w) in &incoming[i] {
            acc += w * values[u];
        }
        values[i] = acc;
    }
    ImpactReport {
        nodes: model
            .nodes
            .iter()
            .zip(&values)
            .map(|(n, v)| NodeValue {
                name: n.name.clone(),
                stage: n.stage,
                value: *v,
            })
            .collect(),
        impacts: NamedValues(
            model
                .nodes
                .iter()
                .zip(&values)
                .filter(|(n, _)| n.stage == Stage::Impacts)
                .map(|(n, v)| (n.name.clone(), *v))
                .collect(),
        ),
    }
}

fn default_order(model: &LogicModel) -> Vec<usize> {
    let index: HashMap<&str, usize> = model
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    let edges: Vec<_> = model
        .edges
        .iter()
        .map(|e| (index[e.from.as_str()], index[e.to.as_str()]))
        .collect();
    topological_order(model.nodes.len(), &edges).expect("validated model is acyclic")
}

fn input_vector(
    model: &LogicModel,
    inputs: &BTreeMap<String, f64>,
    overridden: &BTreeSet<&str>,
) -> Result<Vec<f64>> {
    let unknown: Vec<String> = inputs
        .keys()
        .filter(|k| {
            !model
                .nodes
                .iter()
                .any(|n| &n.name == *k && n.stage == Stage::Inputs)
        })
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownNode(unknown));
    }
    let missing: Vec<String> = model
        .nodes
        .iter()
        .filter(|n| {
            n.stage == Stage::Inputs
                && !overridden.contains(n.name.as_str())
                && !inputs.contains_key(&n.name)
        })
        .map(|n| n.name.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::invalid(
            "inputs",
            format!("missing values for {}", missing.join(", ")),
        ));
    }
    let v: Vec<f64> = model
        .nodes
        .iter()
        .map(|n| inputs.get(&n.name).copied().unwrap_or(0.0))
        .collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("logic model inputs".into()));
    }
    Ok(v)
}

/// Inputs-stage nodes take `baseline + given value` plus any upstream
/// contributions; every other node takes `baseline + Σ weight × upstream`.
pub fn propagate(model: &LogicModel, inputs: &BTreeMap<String, f64>) -> Result<ImpactReport> {
    ensure_valid(model)?;
    let exo = input_vector(model, inputs, &BTreeSet::new())?;
    Ok(propagate_inner(model, &exo, &default_order(model)))
}

/// [`propagate`] evaluated in a caller-supplied order of node indices,
/// which must be a topological order of the model.
pub fn propagate_with_order(
    model: &LogicModel,
    inputs: &BTreeMap<String, f64>,
    order: &[usize],
) -> Result<ImpactReport> {
    ensure_valid(model)?;
    let n = model.nodes.len();
    let mut pos = vec![usize::MAX; n];
    for (p, &i) in order.iter().enumerate() {
        if i >= n || pos[i] != usize::MAX {
            return Err(Error::invalid("order", "not a permutation of node indices"));
        }
        pos[i] = p;
    }
    if order.len() != n {
        return Err(Error::invalid("order", "not a permutation of node indices"));
    }
    let index: HashMap<&str, usize> = model
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    if model
        .edges
        .iter()
        .any(|e| pos[index[e.from.as_str()]] > pos[index[e.to.as_str()]])
    {
        return Err(Error::invalid("order", "not a topological order"));
    }
    let exo = input_vector(model, inputs, &BTreeSet::new())?;
    Ok(propagate_inner(model, &exo, order))
}

/// Node → fact bindings with the fact vector in `fact_names` layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactBinding {
    pub bindings: BTreeMap<String, String>,
    pub fact_names: Vec<String>,
    pub values: Vec<f64>,
}

impl FactBinding {
    pub fn validate(&self, model: &LogicModel) -> Result<()> {
        if self.values.len() != self.fact_names.len() {
            return Err(Error::dimension(
                "fact values",
                self.fact_names.len(),
                self.values.len(),
            ));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("fact values".into()));
        }
        for (node, fact) in &self.bindings {
            let n = model
                .nodes
                .iter()
                .find(|n| &n.name == node)
                .ok_or_else(|| Error::UnknownNode(vec![node.clone()]))?;
            if !n.stage.accepts_facts() {
                return Err(Error::invalid(
                    "fact_binding",
                    format!("node {node:?} is in the {} stage; facts bind only to inputs, activities or outputs", n.stage),
                ));
            }
            if !self.fact_names.contains(fact) {
                return Err(Error::invalid(
                    "fact_binding",
                    format!("unknown fact element {fact:?}"),
                ));
            }
        }
        Ok(())
    }

    fn value_of(&self, fact: &str) -> f64 {
        let i = self
            .fact_names
            .iter()
            .position(|f| f == fact)
            .expect("validated binding");
        self.values[i]
    }
}

/// Couple fact values into the model: bound inputs-stage nodes have their
/// given value replaced by the fact; bound activities/outputs nodes receive
/// the fact as an added exogenous injection. Unbound inputs-stage nodes
/// take their values from `inputs`.
pub fn couple_facts(
    model: &LogicModel,
    binding: &FactBinding,
    inputs: &BTreeMap<String, f64>,
) -> Result<ImpactReport> {
    ensure_valid(model)?;
    binding.validate(model)?;
    let overridden: BTreeSet<&str> = binding
        .bindings
        .keys()
        .filter(|k| {
            model
                .nodes
                .iter()
                .any(|n| &n.name == *k && n.stage == Stage::Inputs)
        })
        .map(String::as_str)
        .collect();
    let mut exo = input_vector(model, inputs, &overridden)?;
    for (i, n) in model.nodes.iter().enumerate() {
        if let Some(fact) = binding.bindings.get(&n.name) {
            let v = binding.value_of(fact);
            if n.stage == Stage::Inputs {
                exo[i] = v;
            } else {
                exo[i] += v;
            }
        }
    }
    Ok(propagate_inner(model, &exo, &default_order(model)))
}
