use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::beaver::{beaver_multiply, provision_triples, TripleDims};
use super::distribute::{collect_result, share_secrets, NoiseParams, ShareJob};
use super::ops::{add_shares, scale_share};
use crate::error::{AmpcError, Result};
use crate::exec::Execution;
use crate::network::{NetworkHandle, Tag};
use crate::numerics::RealMatrix;
use crate::sharing::{Reconstruction, Share};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Add,
    Scale,
    Mul,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub op: Op,
    pub args: Vec<String>,
    #[serde(rename = "const", default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
}

/// Arithmetic DAG over named client inputs.
///
/// ```json
/// {"nodes": [{"id": "s", "op": "add", "args": ["x1", "x2"]},
///            {"id": "y", "op": "mul", "args": ["s", "x3"]}],
///  "inputs": {"x1": 1, "x2": 2, "x3": 3},
///  "outputs": {"y": 1},
///  "values": {"x1": [[1.0]], "x2": [[2.0]], "x3": [[0.5]]}}
/// ```
///
/// `values` is optional; the CLI uses it, library callers usually pass
/// inputs to [`orchestrate`] directly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Program {
    pub nodes: Vec<Node>,
    /// Input name → owning client.
    pub inputs: BTreeMap<String, usize>,
    /// Node or input name → client that learns it.
    pub outputs: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple_budget: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ProgramResult {
    /// Output name → (receiving client, reconstruction).
    pub outputs: BTreeMap<String, (usize, Reconstruction)>,
    pub rounds: u64,
    pub triples_used: usize,
}

impl Program {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Values embedded in the document, as matrices.
    pub fn embedded_values(&self) -> Result<BTreeMap<String, RealMatrix>> {
        self.values.iter().map(|(k, rows)| Ok((k.clone(), RealMatrix::from_rows(rows)?))).collect()
    }

    /// Node indices in dependency order; rejects unknown names and cycles.
    fn topo_order(&self) -> Result<Vec<usize>> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if self.inputs.contains_key(&n.id) || index.insert(&n.id, i).is_some() {
                return Err(AmpcError::invalid(format!("duplicate name '{}'", n.id)));
            }
            let arity = match n.op {
                Op::Scale => 1,
                Op::Add | Op::Mul => 2,
            };
            if n.args.len() != arity {
                return Err(AmpcError::invalid(format!("node '{}' takes {arity} args", n.id)));
            }
            if n.op == Op::Scale && !n.constant.is_some_and(f64::is_finite) {
                return Err(AmpcError::invalid(format!("scale node '{}' needs a finite const", n.id)));
            }
        }
        let mut indeg = vec![0usize; self.nodes.len()];
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for a in &n.args {
                if let Some(&j) = index.get(a.as_str()) {
                    indeg[i] += 1;
                    users[j].push(i);
                } else if !self.inputs.contains_key(a) {
                    return Err(AmpcError::invalid(format!("unknown input name '{a}' in node '{}'", n.id)));
                }
            }
        }
        for (name, &c) in self.outputs.iter() {
            if !index.contains_key(name.as_str()) && !self.inputs.contains_key(name) {
                return Err(AmpcError::invalid(format!("unknown output '{name}'")));
            }
            let _ = c;
        }
        let mut queue: VecDeque<usize> = (0..self.nodes.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for &u in &users[i] {
                indeg[u] -= 1;
                if indeg[u] == 0 {
                    queue.push_back(u);
                }
            }
        }
        if order.len() != self.nodes.len() {
            return Err(AmpcError::invalid("program graph has a cycle"));
        }
        Ok(order)
    }

    /// Evaluates the program on plaintext values; the reference semantics.
    pub fn evaluate_plain(&self, values: &BTreeMap<String, RealMatrix>) -> Result<BTreeMap<String, RealMatrix>> {
        let mut env: HashMap<String, RealMatrix> = HashMap::new();
        for name in self.inputs.keys() {
            let v = values.get(name).ok_or_else(|| AmpcError::invalid(format!("no value for input '{name}'")))?;
            env.insert(name.clone(), v.clone());
        }
        for i in self.topo_order()? {
            let n = &self.nodes[i];
            let arg = |k: usize| &env[&n.args[k]];
            let v = match n.op {
                Op::Add => arg(0).add(arg(1))?,
                Op::Scale => arg(0).scale(n.constant.unwrap_or_default()),
                Op::Mul => arg(0).matmul(arg(1))?,
            };
            env.insert(n.id.clone(), v);
        }
        Ok(self.outputs.keys().map(|k| (k.clone(), env[k].clone())).collect())
    }
}

/// Runs the three stages: secret sharing of inputs, share-level computation
/// (one fresh triple per multiplication, provisioned before any input is
/// shared), and output reconstruction at the designated clients.
pub fn orchestrate(
    net: &mut NetworkHandle,
    exec: Execution,
    program: &Program,
    values: &BTreeMap<String, RealMatrix>,
    noise: NoiseParams,
) -> Result<ProgramResult> {
    let order = program.topo_order()?;
    let n = net.n_clients();
    for (name, &owner) in &program.inputs {
        if owner == 0 || owner > n {
            return Err(AmpcError::invalid(format!("input '{name}' owned by unknown client {owner}")));
        }
        if !values.contains_key(name) {
            return Err(AmpcError::invalid(format!("no value for input '{name}'")));
        }
    }
    for (name, &c) in &program.outputs {
        if c == 0 || c > n {
            return Err(AmpcError::invalid(format!("output '{name}' sent to unknown client {c}")));
        }
    }

    // Shape propagation also catches dimension errors before any traffic.
    let mut shapes: HashMap<&str, (usize, usize)> =
        program.inputs.keys().map(|k| (k.as_str(), values[k].shape())).collect();
    let mut mul_dims = Vec::new();
    for &i in &order {
        let nd = &program.nodes[i];
        let s0 = shapes[nd.args[0].as_str()];
        let shape = match nd.op {
            Op::Scale => s0,
            Op::Add => {
                let s1 = shapes[nd.args[1].as_str()];
                if s0 != s1 {
                    return Err(AmpcError::invalid(format!("add node '{}': {s0:?} vs {s1:?}", nd.id)));
                }
                s0
            }
            Op::Mul => {
                let d = TripleDims::for_product(s0, shapes[nd.args[1].as_str()])?;
                mul_dims.push(d);
                (d.m, d.n)
            }
        };
        shapes.insert(&nd.id, shape);
    }
    if let Some(budget) = program.triple_budget {
        if mul_dims.len() > budget {
            return Err(AmpcError::violation(format!(
                "triple budget exhausted: program needs {} multiplications, budget is {budget}",
                mul_dims.len()
            )));
        }
    }

    let start_round = net.round();
    let mut triples = provision_triples(net, exec, &mul_dims, noise)?.into_iter();

    let jobs = program
        .inputs
        .iter()
        .map(|(name, &owner)| ShareJob { owner, label: format!("input/{name}"), secret: values[name].to_complex() })
        .collect();
    let shared = share_secrets(net, exec, jobs, noise, Tag::DataShare)?;
    let mut env: HashMap<String, Vec<Share>> = program.inputs.keys().cloned().zip(shared).collect();

    for &i in &order {
        let nd = &program.nodes[i];
        let out = match nd.op {
            Op::Add => env[&nd.args[0]]
                .iter()
                .zip(&env[&nd.args[1]])
                .map(|(a, b)| add_shares(a, b))
                .collect::<Result<Vec<_>>>()?,
            Op::Scale => {
                let c = nd.constant.unwrap_or_default();
                env[&nd.args[0]].iter().map(|a| scale_share(c, a)).collect::<Result<Vec<_>>>()?
            }
            Op::Mul => {
                let t = triples.next().ok_or_else(|| AmpcError::violation("triple budget exhausted"))?;
                let (u, v) = (env[&nd.args[0]].clone(), env[&nd.args[1]].clone());
                beaver_multiply(net, exec, &format!("node/{}", nd.id), u, v, t)?.shares
            }
        };
        env.insert(nd.id.clone(), out);
    }

    let mut outputs = BTreeMap::new();
    for (name, &c) in &program.outputs {
        let rec = collect_result(net, &env[name], c, &format!("output/{name}"))?;
        outputs.insert(name.clone(), (c, rec));
    }
    Ok(ProgramResult { outputs, rounds: net.round() - start_round, triples_used: mul_dims.len() })
}
