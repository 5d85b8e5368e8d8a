//! Independent reference implementations shared by the integration and
//! acceptance targets. Nothing here calls the code under test except to
//! build inputs.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wepolicy::coupling::{NetworkNode, NodeRole, ParameterNetwork, WeightedEdge};
use wepolicy::logicmodel::{LmEdge, LmNode, LogicModel, Stage};
use wepolicy::matrix::Matrix;
use wepolicy::sim::SweepTable;
use wepolicy::survey::RegressionModel;

pub const STAGES: [Stage; 5] = [
    Stage::Inputs,
    Stage::Activities,
    Stage::Outputs,
    Stage::Outcomes,
    Stage::Impacts,
];

/// Random staged DAG: stages never decrease with node index and every edge
/// points forward, so it is acyclic and stage-consistent by construction.
/// The first node is an input and the last an impact.
pub fn random_logic_model(rng: &mut ChaCha8Rng, n: usize) -> (LogicModel, BTreeMap<String, f64>) {
    assert!(n >= 2);
    let mut stages: Vec<usize> = (0..n).map(|_| rng.gen_range(0..5)).collect();
    stages.sort_unstable();
    stages[0] = 0;
    stages[n - 1] = 4;
    let nodes: Vec<LmNode> = stages
        .iter()
        .enumerate()
        .map(|(i, &s)| LmNode {
            name: format!("n{i}"),
            stage: STAGES[s],
            baseline: if rng.gen_bool(0.5) {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            },
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.35) {
                edges.push(LmEdge {
                    from: format!("n{i}"),
                    to: format!("n{j}"),
                    weight: rng.gen_range(-1.5..1.5),
                });
            }
        }
    }
    let inputs = nodes
        .iter()
        .filter(|n| n.stage == Stage::Inputs)
        .map(|n| (n.name.clone(), rng.gen_range(-2.0..2.0)))
        .collect();
    (LogicModel { nodes, edges }, inputs)
}

/// Every node's value as a sum over all source nodes u and all paths u → v
/// of (baseline_u + input_u) times the product of edge weights.
pub fn logic_path_sum(model: &LogicModel, inputs: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let idx: BTreeMap<&str, usize> = model
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    let n = model.nodes.len();
    let mut out_edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in &model.edges {
        out_edges[idx[e.from.as_str()]].push((idx[e.to.as_str()], e.weight));
    }
    let mut value = vec![0.0; n];
    for (u, node) in model.nodes.iter().enumerate() {
        let source = node.baseline + inputs.get(&node.name).copied().unwrap_or(0.0);
        enumerate_paths(u, 1.0, &out_edges, &mut |v, w| value[v] += source * w);
    }
    model
        .nodes
        .iter()
        .map(|n| n.name.clone())
        .zip(value)
        .collect()
}

fn enumerate_paths(
    at: usize,
    product: f64,
    out_edges: &[Vec<(usize, f64)>],
    visit: &mut dyn FnMut(usize, f64),
) {
    visit(at, product);
    for &(next, w) in &out_edges[at] {
        enumerate_paths(next, product * w, out_edges, visit);
    }
}

/// Layered network: `sizes[0]` fact nodes, interior intermediate layers,
/// `sizes.last()` value nodes, edges only between consecutive layers.
/// Returns the network and its per-layer weight matrices (next × previous).
pub fn random_layered_network(
    rng: &mut ChaCha8Rng,
    sizes: &[usize],
) -> (ParameterNetwork, Vec<Matrix>) {
    let name = |layer: usize, i: usize| format!("L{layer}_{i}");
    let mut nodes = Vec::new();
    for (l, &size) in sizes.iter().enumerate() {
        let role = if l == 0 {
            NodeRole::Fact
        } else if l + 1 == sizes.len() {
            NodeRole::Value
        } else {
            NodeRole::Intermediate
        };
        for i in 0..size {
            nodes.push(NetworkNode {
                name: name(l, i),
                role,
            });
        }
    }
    let mut edges = Vec::new();
    let mut mats = Vec::new();
    for l in 1..sizes.len() {
        let mut m = Matrix::zeros(sizes[l], sizes[l - 1]);
        for j in 0..sizes[l] {
            for i in 0..sizes[l - 1] {
                if rng.gen_bool(0.6) {
                    let w = rng.gen_range(-1.0..1.0);
                    m[(j, i)] = w;
                    edges.push(WeightedEdge {
                        from: name(l - 1, i),
                        to: name(l, j),
                        weight: w,
                    });
                }
            }
        }
        mats.push(m);
    }
    // shuffle declaration order so propagation cannot rely on it
    for i in (1..edges.len()).rev() {
        edges.swap(i, rng.gen_range(0..=i));
    }
    (ParameterNetwork::new(nodes, edges).unwrap(), mats)
}

pub fn layered_product(mats: &[Matrix], delta: &[f64]) -> Vec<f64> {
    mats.iter().fold(delta.to_vec(), |x, m| {
        (0..m.rows())
            .map(|j| (0..m.cols()).map(|i| m[(j, i)] * x[i]).sum())
            .collect()
    })
}

/// Value-node deltas by enumerating every fact → value path.
pub fn network_path_sum(
    net: &ParameterNetwork,
    delta_facts: &BTreeMap<String, f64>,
) -> BTreeMap<String, f64> {
    let nodes = net.nodes();
    let idx: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    let mut out_edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes.len()];
    for e in net.edges() {
        out_edges[idx[e.from.as_str()]].push((idx[e.to.as_str()], e.weight));
    }
    let mut acc = vec![0.0; nodes.len()];
    for (name, d) in delta_facts {
        enumerate_paths(idx[name.as_str()], 1.0, &out_edges, &mut |v, w| {
            acc[v] += d * w
        });
    }
    nodes
        .iter()
        .zip(acc)
        .filter(|(n, _)| n.role == NodeRole::Value)
        .map(|(n, v)| (n.name.clone(), v))
        .collect()
}

/// Additive-coupling score computed from scratch.
pub fn score(target: &RegressionModel, baseline: &[f64], coupling: &Matrix, facts: &[f64]) -> f64 {
    let mut w = target.intercept;
    for i in 0..baseline.len() {
        let mut shift = 0.0;
        for j in 0..facts.len() {
            shift += coupling[(i, j)] * facts[j];
        }
        w += target.coefficients[i] * (baseline[i] + shift);
    }
    w
}

/// First policy id reaching the maximum score in a linear scan.
pub fn brute_force_best(
    target: &RegressionModel,
    baseline: &[f64],
    coupling: &Matrix,
    sweep: &SweepTable,
) -> usize {
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for row in &sweep.rows {
        let w = score(target, baseline, coupling, &row.indicators.to_vec());
        if w > best.0 {
            best = (w, row.policy_id);
        }
    }
    best.1
}

/// Least squares through the normal equations, solved with partially
/// pivoted Gaussian elimination. Returns intercept first.
pub fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = rows[0].len() + 1;
    let mut a = vec![vec![0.0; p + 1]; p];
    for (r, &yi) in rows.iter().zip(y) {
        let x: Vec<f64> = std::iter::once(1.0).chain(r.iter().copied()).collect();
        for i in 0..p {
            for j in 0..p {
                a[i][j] += x[i] * x[j];
            }
            a[i][p] += x[i] * yi;
        }
    }
    for c in 0..p {
        let piv = (c..p)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, piv);
        for r in 0..p {
            if r != c {
                let f = a[r][c] / a[c][c];
                let pivot_row = a[c].clone();
                for (dst, src) in a[r].iter_mut().zip(&pivot_row).skip(c) {
                    *dst -= f * src;
                }
            }
        }
    }
    (0..p).map(|i| a[i][p] / a[i][i]).collect()
}
