//! Scenario documents: one JSON file describing every input of an
//! experiment, validated as a whole before anything runs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coupling::{
    CouplingMode, ElementSet, FactCoupling, LinearMap, NetworkNode, NodeRole, Nonlinearity,
    ParameterNetwork, WeightedEdge, DEFAULT_CONSENSUS_TOL,
};
use crate::error::{Error, Result};
use crate::evaluator::WeightingProfile;
use crate::logicmodel::{self, LmEdge, LmNode, LogicModel};
use crate::matrix::Matrix;
use crate::sim::{DynamicsConfig, Indicators, PolicyKnobs, SweepGrid};
use crate::survey::{ConstructMap, LikertScale, SyntheticSurvey};
use crate::valuefn::LayerFunction;
use crate::we_model::{linspace, WeLayer, WellbeingModel};

pub const WIDE_SET: &str = "X_w";
pub const FACT_SET: &str = "X_c";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub value_functions: BTreeMap<String, LayerFunction>,
    #[serde(default)]
    pub layers: Vec<LayerDef>,
    #[serde(default)]
    pub element_sets: Vec<ElementSet>,
    #[serde(default)]
    pub mapping_f: Option<MapDef>,
    #[serde(default)]
    pub fact_coupling: Option<FactCoupling>,
    #[serde(default)]
    pub parameter_network: Option<NetworkDef>,
    #[serde(default)]
    pub survey: Option<SurveyDef>,
    #[serde(default)]
    pub dynamics: Option<DynamicsConfig>,
    #[serde(default)]
    pub sweep_grid: Option<SweepGrid>,
    #[serde(default)]
    pub weighting_profiles: Vec<WeightingProfile>,
    #[serde(default)]
    pub logic_model: Option<LogicModelDef>,
    #[serde(default)]
    pub surface: Option<SurfaceDef>,
    #[serde(default)]
    pub consensus: Option<ConsensusDef>,
    #[serde(default)]
    pub output: OutputOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDef {
    pub scope: String,
    pub value_function: String,
    pub weight: f64,
    #[serde(default)]
    pub element_set: Option<String>,
    #[serde(default)]
    pub aggregator: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDef {
    pub source: String,
    pub target: String,
    pub matrix: Matrix,
    #[serde(default)]
    pub offset: Option<Vec<f64>>,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDef {
    pub nodes: Vec<NetworkNode>,
    pub edges: Vec<WeightedEdge>,
    #[serde(default)]
    pub delta_facts: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurveySource {
    File(PathBuf),
    Synthetic(SyntheticSurvey),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyDef {
    pub source: SurveySource,
    pub scale: u32,
    /// Question column (e.g. `q4`) holding the overall well-being answer.
    pub wellbeing_question: String,
    /// Rows follow `X_w`; columns are the remaining questions in order.
    pub construct_map: Matrix,
}

impl SurveyDef {
    /// 0-based index of the well-being question.
    pub fn wellbeing_index(&self) -> Result<usize> {
        self.wellbeing_question
            .strip_prefix('q')
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|n| *n >= 1)
            .map(|n| n - 1)
            .ok_or_else(|| {
                Error::invalid(
                    "survey.wellbeing_question",
                    format!(
                        "expected a column name like \"q3\", got {:?}",
                        self.wellbeing_question
                    ),
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactBindingDef {
    pub bindings: BTreeMap<String, String>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    /// Take the fact vector from the policy selected under this profile.
    #[serde(default)]
    pub from_selection: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogicModelDef {
    pub nodes: Vec<LmNode>,
    pub edges: Vec<LmEdge>,
    #[serde(default)]
    pub inputs: BTreeMap<String, f64>,
    #[serde(default)]
    pub fact_binding: Option<FactBindingDef>,
}

impl LogicModelDef {
    pub fn model(&self) -> LogicModel {
        LogicModel {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Range { min: f64, max: f64, steps: usize },
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Axis::Values(v) => v.clone(),
            Axis::Range { min, max, steps } => linspace(*min, *max, *steps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDef {
    pub x_n: Axis,
    pub x_w: Axis,
    #[serde(default)]
    pub curve: Option<Axis>,
    #[serde(default)]
    pub curve_layer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeGrid {
    Points(Vec<Vec<f64>>),
    /// Regular lattice over every dimension of the wide set.
    Lattice {
        min: f64,
        max: f64,
        steps: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsensusDef {
    pub narrow: String,
    pub wide: String,
    pub probes: ProbeGrid,
    #[serde(default = "default_consensus_tol")]
    pub tol: f64,
}

fn default_consensus_tol() -> f64 {
    DEFAULT_CONSENSUS_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    #[serde(default)]
    pub format: Option<TableFormat>,
}

/// A parsed scenario plus where it came from.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub path: PathBuf,
    pub digest: String,
}

impl LoadedScenario {
    pub fn base_dir(&self) -> &Path {
        self.path.parent().unwrap_or_else(|| Path::new("."))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir().join(p)
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse(format!("{path}: {inner}"))
    })
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::Parse(format!("{} is not valid UTF-8", path.display())))?;
    Ok(LoadedScenario {
        scenario: parse_scenario(&text)?,
        path: path.to_path_buf(),
        digest: digest(&bytes),
    })
}

impl Scenario {
    pub fn element_set(&self, name: &str) -> Option<&ElementSet> {
        self.element_sets.iter().find(|s| s.name == name)
    }

    /// Names of the wide-scope elements; falls back to positional names.
    pub fn wide_names(&self, n: usize) -> Vec<String> {
        self.element_set(WIDE_SET)
            .map(ElementSet::names)
            .unwrap_or_else(|| (1..=n).map(|i| format!("x_w{i}")).collect())
    }

    pub fn fact_names(&self) -> Vec<String> {
        self.element_set(FACT_SET)
            .map(ElementSet::names)
            .unwrap_or_else(|| Indicators::NAMES.iter().map(|s| s.to_string()).collect())
    }

    pub fn build_layers(&self) -> Result<Vec<WeLayer>> {
        self.layers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let f = self.value_functions.get(&l.value_function).ok_or_else(|| {
                    Error::invalid(
                        format!("layers[{i}].value_function"),
                        format!("unknown value function {:?}", l.value_function),
                    )
                })?;
                let mut layer = WeLayer::new(&l.scope, *f, l.weight)?;
                layer.aggregator = l.aggregator.clone();
                Ok(layer)
            })
            .collect()
    }

    pub fn build_model(&self) -> Result<WellbeingModel> {
        WellbeingModel::new(self.build_layers()?)
    }

    pub fn build_map(&self) -> Result<LinearMap> {
        let def = self
            .mapping_f
            .as_ref()
            .ok_or_else(|| Error::invalid("mapping_f", "section is required"))?;
        let offset = def
            .offset
            .clone()
            .unwrap_or_else(|| vec![0.0; def.matrix.rows()]);
        LinearMap::new(def.matrix.clone(), offset, def.nonlinearity)
    }

    pub fn build_network(&self) -> Result<ParameterNetwork> {
        let def = self
            .parameter_network
            .as_ref()
            .ok_or_else(|| Error::invalid("parameter_network", "section is required"))?;
        ParameterNetwork::new(def.nodes.clone(), def.edges.clone())
    }

    /// Declared weighting profiles, or the single `fact_coupling` as
    /// profile `default`.
    pub fn profiles(&self) -> Vec<WeightingProfile> {
        if !self.weighting_profiles.is_empty() {
            return self.weighting_profiles.clone();
        }
        self.fact_coupling
            .iter()
            .map(|c| WeightingProfile {
                name: "default".into(),
                coupling: c.clone(),
            })
            .collect()
    }

    /// Apply a `--seed` override to every seeded section.
    pub fn override_seed(&mut self, seed: u64) {
        if let Some(d) = self.dynamics.as_mut() {
            d.seed = seed;
        }
        if let Some(SurveyDef {
            source: SurveySource::Synthetic(s),
            ..
        }) = self.survey.as_mut()
        {
            s.seed = seed;
        }
    }

    pub fn effective_seed(&self) -> Option<u64> {
        self.dynamics
            .as_ref()
            .map(|d| d.seed)
            .or(match &self.survey {
                Some(SurveyDef {
                    source: SurveySource::Synthetic(s),
                    ..
                }) => Some(s.seed),
                _ => None,
            })
    }

    pub fn probe_points(&self, def: &ConsensusDef, dim: usize) -> Vec<Vec<f64>> {
        match &def.probes {
            ProbeGrid::Points(p) => p.clone(),
            ProbeGrid::Lattice { min, max, steps } => {
                let axis = linspace(*min, *max, *steps);
                let mut points = vec![Vec::new()];
                for _ in 0..dim {
                    points = points
                        .into_iter()
                        .flat_map(|p| {
                            axis.iter().map(move |x| {
                                let mut q = p.clone();
                                q.push(*x);
                                q
                            })
                        })
                        .collect();
                }
                points
            }
        }
    }

    /// Cross-section consistency check. Returns every finding, not just the
    /// first.
    pub fn validate(&self) -> Vec<Error> {
        let mut out = Vec::new();
        let mut push = |r: Result<()>| {
            if let Err(e) = r {
                out.push(e);
            }
        };

        for (name, f) in &self.value_functions {
            push(
                f.validate()
                    .map_err(|e| Error::invalid(format!("value_functions.{name}"), e.to_string())),
            );
        }

        let mut set_names = BTreeSet::new();
        for s in &self.element_sets {
            push(s.validate());
            if !set_names.insert(s.name.as_str()) {
                push(Err(Error::invalid(
                    "element_sets",
                    format!("duplicate set {:?}", s.name),
                )));
            }
        }

        if !self.layers.is_empty() {
            push(self.build_model().map(|_| ()));
            for (i, l) in self.layers.iter().enumerate() {
                match (&l.element_set, &l.aggregator) {
                    (Some(set), Some(agg)) => match self.element_set(set) {
                        Some(s) if s.len() != agg.len() => push(Err(Error::invalid(
                            format!("layers[{i}].aggregator"),
                            format!(
                                "has {} weights for the {}-element set {set}",
                                agg.len(),
                                s.len()
                            ),
                        ))),
                        None => push(Err(Error::invalid(
                            format!("layers[{i}].element_set"),
                            format!("unknown element set {set:?}"),
                        ))),
                        _ => {}
                    },
                    (Some(_), None) => push(Err(Error::invalid(
                        format!("layers[{i}].aggregator"),
                        "a layer bound to an element set needs an aggregator",
                    ))),
                    _ => {}
                }
            }
        }

        if let Some(def) = &self.mapping_f {
            push(self.build_map().map(|_| ()));
            for (role, name, dim) in [
                ("source", &def.source, def.matrix.cols()),
                ("target", &def.target, def.matrix.rows()),
            ] {
                match self.element_set(name) {
                    Some(s) if s.len() != dim => push(Err(Error::invalid(
                        format!("mapping_f.{role}"),
                        format!(
                            "set {name} has {} elements but the matrix expects {dim}",
                            s.len()
                        ),
                    ))),
                    None => push(Err(Error::invalid(
                        format!("mapping_f.{role}"),
                        format!("unknown element set {name:?}"),
                    ))),
                    _ => {}
                }
            }
        }

        let wide_len = self.element_set(WIDE_SET).map(ElementSet::len);
        let fact_len = self.element_set(FACT_SET).map(ElementSet::len);
        let check_coupling = |field: &str, c: &FactCoupling| -> Result<()> {
            c.validate()
                .map_err(|e| Error::invalid(field, e.to_string()))?;
            if let Some(w) = wide_len {
                if c.matrix.rows() != w {
                    return Err(Error::invalid(
                        field,
                        format!(
                            "matrix has {} rows, {WIDE_SET} has {w} elements",
                            c.matrix.rows()
                        ),
                    ));
                }
            }
            if let Some(x) = fact_len {
                if c.matrix.cols() != x {
                    return Err(Error::invalid(
                        field,
                        format!(
                            "matrix has {} columns, {FACT_SET} has {x} elements",
                            c.matrix.cols()
                        ),
                    ));
                }
            }
            if c.mode == CouplingMode::Multiplicative && c.matrix.rows() == 0 {
                return Err(Error::invalid(field, "empty coupling matrix"));
            }
            Ok(())
        };
        if let Some(c) = &self.fact_coupling {
            push(check_coupling("fact_coupling", c));
        }
        let mut profile_names = BTreeSet::new();
        for (i, p) in self.weighting_profiles.iter().enumerate() {
            push(check_coupling(
                &format!("weighting_profiles[{i}].coupling"),
                &p.coupling,
            ));
            if !profile_names.insert(p.name.as_str()) {
                push(Err(Error::invalid(
                    "weighting_profiles",
                    format!("duplicate profile {:?}", p.name),
                )));
            }
        }

        if let Some(net) = &self.parameter_network {
            match self.build_network() {
                Ok(built) => {
                    let facts: BTreeSet<&str> = built
                        .nodes()
                        .iter()
                        .filter(|n| n.role == NodeRole::Fact)
                        .map(|n| n.name.as_str())
                        .collect();
                    let bad: Vec<String> = net
                        .delta_facts
                        .keys()
                        .filter(|k| !facts.contains(k.as_str()))
                        .cloned()
                        .collect();
                    if !bad.is_empty() {
                        push(Err(Error::invalid(
                            "parameter_network.delta_facts",
                            format!("not fact nodes: {}", bad.join(", ")),
                        )));
                    }
                }
                Err(e) => push(Err(Error::invalid("parameter_network", e.to_string()))),
            }
        }

        if let Some(s) = &self.survey {
            push(self.validate_survey(s));
        }

        if let Some(d) = &self.dynamics {
            push(d.validate());
            if let Some(x) = fact_len {
                if x != Indicators::NAMES.len() {
                    push(Err(Error::invalid(
                        "element_sets",
                        format!(
                            "{FACT_SET} must list the {} simulated indicators, has {x}",
                            Indicators::NAMES.len()
                        ),
                    )));
                }
            }
        }
        if let Some(g) = &self.sweep_grid {
            if g.s.is_empty() || g.t.is_empty() || g.v.is_empty() {
                push(Err(Error::invalid(
                    "sweep_grid",
                    "every knob needs at least one value",
                )));
            }
            for &s in &g.s {
                for &t in &g.t {
                    for &v in &g.v {
                        // out-of-range values are errors; budget overruns are only skipped
                        if let Err(e) = PolicyKnobs::new(s, t, v) {
                            if !matches!(&e, Error::Invalid { field, .. } if field == "knobs") {
                                push(Err(Error::invalid("sweep_grid", e.to_string())));
                            }
                        }
                    }
                }
            }
        }

        if let Some(lm) = &self.logic_model {
            let model = lm.model();
            for f in logicmodel::validate(&model) {
                push(Err(Error::invalid("logic_model", f.to_string())));
            }
            if let Some(b) = &lm.fact_binding {
                push(self.validate_binding(&model, b));
            }
        }

        if let Some(sf) = &self.surface {
            if self.layers.len() != 2 {
                push(Err(Error::invalid(
                    "surface",
                    format!("needs exactly 2 layers, found {}", self.layers.len()),
                )));
            }
            if sf.x_n.points().is_empty() || sf.x_w.points().is_empty() {
                push(Err(Error::invalid("surface", "axes must be non-empty")));
            }
            if let Some(l) = &sf.curve_layer {
                if !self.layers.iter().any(|x| &x.scope == l) {
                    push(Err(Error::invalid(
                        "surface.curve_layer",
                        format!("unknown scope {l:?}"),
                    )));
                }
            }
        }

        if let Some(c) = &self.consensus {
            for (role, scope) in [("narrow", &c.narrow), ("wide", &c.wide)] {
                match self.layers.iter().find(|l| &l.scope == scope) {
                    None => push(Err(Error::invalid(
                        format!("consensus.{role}"),
                        format!("unknown scope {scope:?}"),
                    ))),
                    Some(l) if l.aggregator.is_none() => push(Err(Error::invalid(
                        format!("consensus.{role}"),
                        format!("layer {scope:?} needs an element_set and aggregator"),
                    ))),
                    _ => {}
                }
            }
            if self.mapping_f.is_none() {
                push(Err(Error::invalid("mapping_f", "required by consensus")));
            }
            if c.tol.is_nan() || c.tol < 0.0 {
                push(Err(Error::invalid("consensus.tol", "must be >= 0")));
            }
        }
        out
    }

    fn validate_survey(&self, s: &SurveyDef) -> Result<()> {
        let scale =
            LikertScale::new(s.scale).map_err(|e| Error::invalid("survey.scale", e.to_string()))?;
        let map = ConstructMap::new(s.construct_map.clone())
            .map_err(|e| Error::invalid("survey.construct_map", e.to_string()))?;
        let wb = s.wellbeing_index()?;
        if wb > map.questions() {
            return Err(Error::invalid(
                "survey.wellbeing_question",
                format!(
                    "{} is beyond the {} questionnaire columns",
                    s.wellbeing_question,
                    map.questions() + 1
                ),
            ));
        }
        if let Some(set) = self.element_set(WIDE_SET) {
            if set.len() != map.constructs() {
                return Err(Error::invalid(
                    "survey.construct_map",
                    format!(
                        "has {} construct rows, {WIDE_SET} has {} elements",
                        map.constructs(),
                        set.len()
                    ),
                ));
            }
        }
        if let SurveySource::Synthetic(syn) = &s.source {
            if wb != map.questions() {
                return Err(Error::invalid(
                    "survey.wellbeing_question",
                    format!(
                        "synthetic surveys put well-being last, expected q{}",
                        map.questions() + 1
                    ),
                ));
            }
            if syn.respondents == 0 {
                return Err(Error::invalid(
                    "survey.source.synthetic.respondents",
                    "must be >= 1",
                ));
            }
            if syn.questions.len() != map.questions() {
                return Err(Error::invalid(
                    "survey.source.synthetic.questions",
                    format!(
                        "{} distributions for {} construct questions",
                        syn.questions.len(),
                        map.questions()
                    ),
                ));
            }
            if let Some((i, _)) = syn
                .questions
                .iter()
                .enumerate()
                .find(|(_, p)| p.len() != scale.levels() as usize)
            {
                return Err(Error::invalid(
                    "survey.source.synthetic.questions",
                    format!(
                        "distribution {i} must have {} probabilities",
                        scale.levels()
                    ),
                ));
            }
            if syn.wellbeing.coefficients.len() != map.constructs() {
                return Err(Error::invalid(
                    "survey.source.synthetic.wellbeing.coefficients",
                    format!("expected {} coefficients", map.constructs()),
                ));
            }
        }
        Ok(())
    }

    fn validate_binding(&self, model: &LogicModel, b: &FactBindingDef) -> Result<()> {
        let facts = self.fact_names();
        match (&b.values, &b.from_selection) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(Error::invalid(
                    "logic_model.fact_binding",
                    "give exactly one of `values` or `from_selection`",
                ))
            }
            (Some(v), None) if v.len() != facts.len() => {
                return Err(Error::invalid(
                    "logic_model.fact_binding.values",
                    format!("expected {} values ({})", facts.len(), facts.join(", ")),
                ))
            }
            (None, Some(p)) if !self.profiles().iter().any(|x| &x.name == p) => {
                return Err(Error::invalid(
                    "logic_model.fact_binding.from_selection",
                    format!("unknown weighting profile {p:?}"),
                ))
            }
            _ => {}
        }
        let binding = logicmodel::FactBinding {
            bindings: b.bindings.clone(),
            fact_names: facts.clone(),
            values: vec![0.0; facts.len()],
        };
        binding
            .validate(model)
            .map_err(|e| Error::invalid("logic_model.fact_binding", e.to_string()))
    }
}
