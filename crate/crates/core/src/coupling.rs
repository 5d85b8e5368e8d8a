//! Element sets, the narrow/wide mapping, consensus checking, and the
//! coupling of objective facts into the agreed subjective vector.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{inf_norm, Matrix};
use crate::we_model::WeLayer;

pub const DEFAULT_PERTURBATION_THRESHOLD: f64 = 0.2;
pub const DEFAULT_CONSENSUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub name: String,
    #[serde(default)]
    pub units: String,
}

/// Named, ordered set of real-valued elements. Order fixes vector layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementSet {
    pub name: String,
    pub variables: Vec<Element>,
}

impl ElementSet {
    pub fn new(name: &str, variables: &[&str]) -> Result<Self> {
        let set = Self {
            name: name.to_string(),
            variables: variables
                .iter()
                .map(|v| Element {
                    name: v.to_string(),
                    units: String::new(),
                })
                .collect(),
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::invalid("element_sets", "set name must be non-empty"));
        }
        let mut seen = BTreeSet::new();
        for v in &self.variables {
            if !seen.insert(v.name.as_str()) {
                return Err(Error::invalid(
                    "element_sets",
                    format!("duplicate variable {:?} in {}", v.name, self.name),
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    #[default]
    None,
    /// `scale · tanh(y / scale)`: identity near zero, saturating at `±scale`.
    Tanh { scale: f64 },
}

impl Nonlinearity {
    fn apply(self, y: f64) -> f64 {
        match self {
            Nonlinearity::None => y,
            Nonlinearity::Tanh { scale } => scale * (y / scale).tanh(),
        }
    }
}

/// Affine map `matrix · x + offset` with an optional elementwise saturator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub matrix: Matrix,
    pub offset: Vec<f64>,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
}

impl LinearMap {
    pub fn new(matrix: Matrix, offset: Vec<f64>, nonlinearity: Nonlinearity) -> Result<Self> {
        let map = Self {
            matrix,
            offset,
            nonlinearity,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: Matrix::identity(n),
            offset: vec![0.0; n],
            nonlinearity: Nonlinearity::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.offset.len() != self.matrix.rows() {
            return Err(Error::dimension(
                "map offset",
                self.matrix.rows(),
                self.offset.len(),
            ));
        }
        if !self.matrix.is_finite() || self.offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("map coefficients".into()));
        }
        if let Nonlinearity::Tanh { scale } = self.nonlinearity {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::invalid(
                    "nonlinearity",
                    "tanh scale must be finite and > 0",
                ));
            }
        }
        Ok(())
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.rows()
    }
}

pub fn apply_map(map: &LinearMap, x: &[f64]) -> Result<Vec<f64>> {
    let mut y = map.matrix.mul_vec(x)?;
    for (yi, o) in y.iter_mut().zip(&map.offset) {
        *yi = map.nonlinearity.apply(*yi + o);
    }
    Ok(y)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusReport {
    pub holds: bool,
    pub max_deviation: f64,
    pub worst_point: Vec<f64>,
    pub tol: f64,
    pub probes: usize,
}

/// Check `W_n ∘ f ≡ W_w` on a finite probe grid of wide-scope vectors.
pub fn check_consensus(
    narrow: &WeLayer,
    f: &LinearMap,
    wide: &WeLayer,
    probe_grid: &[Vec<f64>],
    tol: f64,
) -> Result<ConsensusReport> {
    if probe_grid.is_empty() {
        return Err(Error::Empty("consensus probe grid".into()));
    }
    let mut max_deviation = 0.0f64;
    let mut worst_point = probe_grid[0].clone();
    for probe in probe_grid {
        if probe.len() != f.source_dim() {
            return Err(Error::dimension(
                "consensus probe",
                f.source_dim(),
                probe.len(),
            ));
        }
        let mapped = apply_map(f, probe)?;
        let dev = (narrow.evaluate_vector(&mapped)? - wide.evaluate_vector(probe)?).abs();
        // NaN deviations are treated as the worst possible point.
        if dev > max_deviation || dev.is_nan() {
            max_deviation = if dev.is_nan() { f64::INFINITY } else { dev };
            worst_point = probe.clone();
        }
    }
    Ok(ConsensusReport {
        holds: max_deviation <= tol,
        max_deviation,
        worst_point,
        tol,
        probes: probe_grid.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    Additive,
    Multiplicative,
}

/// Perturbative coupling `x_w' = g(x_w, x_c)` through a `|X_w| × |X_c|`
/// matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactCoupling {
    pub mode: CouplingMode,
    pub matrix: Matrix,
    #[serde(default = "default_threshold")]
    pub perturbation_warn_threshold: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_PERTURBATION_THRESHOLD
}

impl FactCoupling {
    pub fn new(mode: CouplingMode, matrix: Matrix) -> Self {
        Self {
            mode,
            matrix,
            perturbation_warn_threshold: DEFAULT_PERTURBATION_THRESHOLD,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.perturbation_warn_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.matrix.is_finite() {
            return Err(Error::NonFinite("coupling matrix".into()));
        }
        if self.perturbation_warn_threshold.is_nan() || self.perturbation_warn_threshold < 0.0 {
            return Err(Error::invalid(
                "perturbation_warn_threshold",
                "must be >= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingResult {
    pub x_w_prime: Vec<f64>,
    pub perturbation_ratio: f64,
    pub warned: bool,
}

pub fn apply_fact_coupling(g: &FactCoupling, x_w: &[f64], x_c: &[f64]) -> Result<CouplingResult> {
    if x_w.len() != g.matrix.rows() {
        return Err(Error::dimension("coupling x_w", g.matrix.rows(), x_w.len()));
    }
    if x_c.len() != g.matrix.cols() {
        return Err(Error::dimension("coupling x_c", g.matrix.cols(), x_c.len()));
    }
    if x_w.iter().chain(x_c).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fact coupling inputs".into()));
    }
    let shift = g.matrix.mul_vec(x_c)?;
    let x_w_prime: Vec<f64> = match g.mode {
        CouplingMode::Additive => x_w.iter().zip(&shift).map(|(w, s)| w + s).collect(),
        CouplingMode::Multiplicative => {
            x_w.iter().zip(&shift).map(|(w, s)| w * (1.0 + s)).collect()
        }
    };
    let delta: Vec<f64> = x_w_prime.iter().zip(x_w).map(|(a, b)| a - b).collect();
    let perturbation_ratio = inf_norm(&delta) / inf_norm(x_w).max(1e-9);
    Ok(CouplingResult {
        warned: perturbation_ratio > g.perturbation_warn_threshold,
        x_w_prime,
        perturbation_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Fact,
    Intermediate,
    Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub name: String,
    pub role: NodeRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NetworkDef {
    nodes: Vec<NetworkNode>,
    edges: Vec<WeightedEdge>,
}

/// Directed acyclic graph from fact parameters to value parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDef", into = "NetworkDef")]
pub struct ParameterNetwork {
    nodes: Vec<NetworkNode>,
    edges: Vec<WeightedEdge>,
    order: Vec<usize>,
}

impl TryFrom<NetworkDef> for ParameterNetwork {
    type Error = Error;
    fn try_from(def: NetworkDef) -> Result<Self> {
        Self::new(def.nodes, def.edges)
    }
}

impl From<ParameterNetwork> for NetworkDef {
    fn from(net: ParameterNetwork) -> Self {
        NetworkDef {
            nodes: net.nodes,
            edges: net.edges,
        }
    }
}

impl ParameterNetwork {
    pub fn new(nodes: Vec<NetworkNode>, edges: Vec<WeightedEdge>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.name.as_str(), i).is_some() {
                return Err(Error::invalid(
                    "parameter_network",
                    format!("duplicate node {:?}", n.name),
                ));
            }
        }
        let unknown: Vec<String> = edges
            .iter()
            .flat_map(|e| [&e.from, &e.to])
            .filter(|n| !index.contains_key(n.as_str()))
            .cloned()
            .collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownNode(unknown));
        }
        for e in &edges {
            if !e.weight.is_finite() {
                return Err(Error::NonFinite(format!("edge {} -> {}", e.from, e.to)));
            }
            if nodes[index[e.to.as_str()]].role == NodeRole::Fact {
                return Err(Error::invalid(
                    "parameter_network",
                    format!("fact node {:?} cannot have incoming edges", e.to),
                ));
            }
        }
        let adjacency: Vec<(usize, usize)> = edges
            .iter()
            .map(|e| (index[e.from.as_str()], index[e.to.as_str()]))
            .collect();
        let order = topological_order(nodes.len(), &adjacency)
            .ok_or_else(|| Error::invalid("parameter_network", "graph contains a cycle"))?;
        Ok(Self {
            nodes,
            edges,
            order,
        })
    }

    pub fn nodes(&self) -> &[NetworkNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }
}

/// Kahn's algorithm; ties broken by declaration index. `None` on a cycle.
pub(crate) fn topological_order(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        indegree[b] += 1;
        out[a].push(b);
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &j in &out[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.insert(j);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Linear propagation of fact deltas; returns deltas at every value node.
pub fn propagate_network(
    net: &ParameterNetwork,
    delta_facts: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>> {
    let bad: Vec<String> = delta_facts
        .keys()
        .filter(|k| {
            net.position(k)
                .is_none_or(|i| net.nodes[i].role != NodeRole::Fact)
        })
        .cloned()
        .collect();
    if !bad.is_empty() {
        return Err(Error::UnknownNode(bad));
    }
    let mut delta = vec![0.0; net.nodes.len()];
    for (name, v) in delta_facts {
        delta[net.position(name).expect("checked above")] = *v;
    }
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); net.nodes.len()];
    for e in &net.edges {
        let from = net.position(&e.from).expect("validated");
        let to = net.position(&e.to).expect("validated");
        incoming[to].push((from, e.weight));
    }
    for &i in &net.order {
        if net.nodes[i].role == NodeRole::Fact {
            continue;
        }
        delta[i] = incoming[i].iter().map(|&(u, w)| w * delta[u]).sum();
    }
    Ok(net
        .nodes
        .iter()
        .zip(delta)
        .filter(|(n, _)| n.role == NodeRole::Value)
        .map(|(n, d)| (n.name.clone(), d))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuefn::{AsymmetricSpec, LayerFunction};
    use proptest::prelude::*;

    fn m(rows: Vec<Vec<f64>>) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn apply_map_examples() {
        let id = LinearMap::identity(2);
        assert_eq!(apply_map(&id, &[0.3, -0.7]).unwrap(), vec![0.3, -0.7]);
        let sum = LinearMap::new(m(vec![vec![1.0, 1.0]]), vec![0.0], Nonlinearity::None).unwrap();
        assert_eq!(apply_map(&sum, &[2.0, 3.0]).unwrap(), vec![5.0]);
        let aff = LinearMap::new(
            m(vec![vec![2.0, 0.0], vec![0.0, 2.0]]),
            vec![1.0, 1.0],
            Nonlinearity::None,
        )
        .unwrap();
        assert_eq!(apply_map(&aff, &[1.0, 1.0]).unwrap(), vec![3.0, 3.0]);
        assert!(matches!(
            apply_map(&aff, &[1.0]),
            Err(Error::Dimension { .. })
        ));
        assert!(LinearMap::new(m(vec![vec![1.0]]), vec![0.0, 0.0], Nonlinearity::None).is_err());
    }

    #[test]
    fn tanh_saturator() {
        let sat = LinearMap::new(
            m(vec![vec![1.0]]),
            vec![0.0],
            Nonlinearity::Tanh { scale: 2.0 },
        )
        .unwrap();
        let y = apply_map(&sat, &[100.0]).unwrap()[0];
        assert!((y - 2.0).abs() < 1e-12);
        let small = apply_map(&sat, &[1e-6]).unwrap()[0];
        assert!((small - 1e-6).abs() < 1e-15);
        assert!(LinearMap::new(
            m(vec![vec![1.0]]),
            vec![0.0],
            Nonlinearity::Tanh { scale: 0.0 }
        )
        .is_err());
    }

    fn asym_layer(name: &str, agg: Vec<f64>) -> WeLayer {
        WeLayer::new(
            name,
            LayerFunction::Asymmetric(AsymmetricSpec::default()),
            0.5,
        )
        .unwrap()
        .with_aggregator(agg)
    }

    fn probes() -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for i in -3..=3 {
            for j in -3..=3 {
                out.push(vec![i as f64 * 0.7, j as f64 * 0.4]);
            }
        }
        out
    }

    #[test]
    fn consensus_identity_holds() {
        let w = asym_layer("n", vec![0.5, 0.5]);
        let rep = check_consensus(&w, &LinearMap::identity(2), &w, &probes(), 1e-9).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.max_deviation, 0.0);
        assert_eq!(rep.probes, 49);
    }

    #[test]
    fn consensus_offset_mismatch_detected() {
        use crate::valuefn::{Family, MirroredFamily, ValueFunctionSpec};
        let linear = LayerFunction::Family(MirroredFamily {
            spec: ValueFunctionSpec::new(Family::Linear, 0.0, 0.0).unwrap(),
            loss_lambda: 1.0,
        });
        let narrow = WeLayer::new("n", linear, 0.5)
            .unwrap()
            .with_aggregator(vec![1.0, 1.0]);
        let wide = WeLayer::new("w", linear, 0.5)
            .unwrap()
            .with_aggregator(vec![1.0, 1.0]);
        // W_n(f(x)) = W_w(x) + 0.1 everywhere
        let f = LinearMap::new(Matrix::identity(2), vec![0.1, 0.0], Nonlinearity::None).unwrap();
        let rep = check_consensus(&narrow, &f, &wide, &probes(), 1e-6).unwrap();
        assert!(!rep.holds);
        assert!((rep.max_deviation - 0.1).abs() < 1e-9);
    }

    #[test]
    fn consensus_errors() {
        let w = asym_layer("n", vec![0.5, 0.5]);
        assert!(check_consensus(&w, &LinearMap::identity(2), &w, &[], 1e-9).is_err());
        assert!(check_consensus(&w, &LinearMap::identity(2), &w, &[vec![1.0]], 1e-9).is_err());
    }

    #[test]
    fn fact_coupling_examples() {
        let g = FactCoupling::new(CouplingMode::Additive, m(vec![vec![0.1]]));
        let r = apply_fact_coupling(&g, &[1.0], &[1.0]).unwrap();
        assert!((r.x_w_prime[0] - 1.1).abs() < 1e-15);
        assert!((r.perturbation_ratio - 0.1).abs() < 1e-12);
        assert!(!r.warned);
        let big = FactCoupling::new(CouplingMode::Additive, m(vec![vec![0.5]]));
        assert!(apply_fact_coupling(&big, &[1.0], &[1.0]).unwrap().warned);
        let mult = FactCoupling::new(CouplingMode::Multiplicative, m(vec![vec![0.5, 0.5]]));
        let r = apply_fact_coupling(&mult, &[2.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.x_w_prime, vec![4.0]);
        assert!(apply_fact_coupling(&mult, &[2.0], &[1.0]).is_err());
        assert!(apply_fact_coupling(&mult, &[2.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(matches!(
            apply_fact_coupling(&mult, &[f64::NAN], &[1.0, 1.0]),
            Err(Error::NonFinite(_))
        ));
    }

    proptest! {
        #[test]
        fn zero_facts_are_identity(
            xw in proptest::collection::vec(-5.0f64..5.0, 3),
            c in proptest::collection::vec(-2.0f64..2.0, 6),
            additive in any::<bool>(),
        ) {
            let mode = if additive { CouplingMode::Additive } else { CouplingMode::Multiplicative };
            let g = FactCoupling::new(mode, m(vec![c[0..2].to_vec(), c[2..4].to_vec(), c[4..6].to_vec()]));
            let r = apply_fact_coupling(&g, &xw, &[0.0, 0.0]).unwrap();
            prop_assert_eq!(r.x_w_prime, xw);
            prop_assert_eq!(r.perturbation_ratio, 0.0);
        }

        #[test]
        fn homogeneous_map_is_linear(
            a in -3.0f64..3.0, b in -3.0f64..3.0,
            x in proptest::collection::vec(-5.0f64..5.0, 3),
            y in proptest::collection::vec(-5.0f64..5.0, 3),
            mat in proptest::collection::vec(-2.0f64..2.0, 6),
        ) {
            let f = LinearMap::new(m(vec![mat[0..3].to_vec(), mat[3..6].to_vec()]), vec![0.0, 0.0], Nonlinearity::None).unwrap();
            let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = apply_map(&f, &combo).unwrap();
            let fx = apply_map(&f, &x).unwrap();
            let fy = apply_map(&f, &y).unwrap();
            for i in 0..2 {
                prop_assert!((lhs[i] - (a * fx[i] + b * fy[i])).abs() < 1e-10);
            }
        }
    }

    fn node(name: &str, role: NodeRole) -> NetworkNode {
        NetworkNode {
            name: name.into(),
            role,
        }
    }

    fn edge(from: &str, to: &str, weight: f64) -> WeightedEdge {
        WeightedEdge {
            from: from.into(),
            to: to.into(),
            weight,
        }
    }

    #[test]
    fn network_examples() {
        let single = ParameterNetwork::new(
            vec![node("f", NodeRole::Fact), node("v", NodeRole::Value)],
            vec![edge("f", "v", 0.4)],
        )
        .unwrap();
        let out = propagate_network(&single, &BTreeMap::from([("f".into(), 1.0)])).unwrap();
        assert_eq!(out["v"], 0.4);
        let zero = propagate_network(&single, &BTreeMap::from([("f".into(), 0.0)])).unwrap();
        assert_eq!(zero["v"], 0.0);

        let diamond = ParameterNetwork::new(
            vec![
                node("f", NodeRole::Fact),
                node("m1", NodeRole::Intermediate),
                node("m2", NodeRole::Intermediate),
                node("v", NodeRole::Value),
            ],
            vec![
                edge("f", "m1", 0.5),
                edge("f", "m2", 0.5),
                edge("m1", "v", 1.0),
                edge("m2", "v", 1.0),
            ],
        )
        .unwrap();
        let out = propagate_network(&diamond, &BTreeMap::from([("f".into(), 2.0)])).unwrap();
        assert_eq!(out["v"], 2.0);
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn network_errors() {
        let net = ParameterNetwork::new(
            vec![node("f", NodeRole::Fact), node("v", NodeRole::Value)],
            vec![edge("f", "v", 1.0)],
        )
        .unwrap();
        assert!(matches!(
            propagate_network(&net, &BTreeMap::from([("ghost".into(), 1.0)])),
            Err(Error::UnknownNode(v)) if v == vec!["ghost".to_string()]
        ));
        assert!(propagate_network(&net, &BTreeMap::from([("v".into(), 1.0)])).is_err());
        assert!(matches!(
            ParameterNetwork::new(vec![node("f", NodeRole::Fact)], vec![edge("f", "x", 1.0)]),
            Err(Error::UnknownNode(_))
        ));
        let cyc = ParameterNetwork::new(
            vec![
                node("a", NodeRole::Intermediate),
                node("b", NodeRole::Value),
            ],
            vec![edge("a", "b", 1.0), edge("b", "a", 1.0)],
        );
        assert!(cyc.is_err());
        let into_fact = ParameterNetwork::new(
            vec![node("f", NodeRole::Fact), node("g", NodeRole::Fact)],
            vec![edge("f", "g", 1.0)],
        );
        assert!(into_fact.is_err());
    }

    #[test]
    fn network_serde_roundtrip_validates() {
        let json = r#"{"nodes":[{"name":"a","role":"fact"},{"name":"b","role":"value"}],
                       "edges":[{"from":"a","to":"b","weight":0.5}]}"#;
        let net: ParameterNetwork = serde_json::from_str(json).unwrap();
        assert_eq!(net.edges().len(), 1);
        let bad =
            r#"{"nodes":[{"name":"a","role":"fact"}],"edges":[{"from":"a","to":"z","weight":1}]}"#;
        assert!(serde_json::from_str::<ParameterNetwork>(bad).is_err());
    }
}
