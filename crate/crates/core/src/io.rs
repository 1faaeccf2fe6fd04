//! JSON instance format. Potentially huge integers (k, r, multiplicities)
//! travel as decimal strings; plain JSON numbers are accepted on input.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::Zero;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::directed::gen_tightness_directed;
use crate::graph::{Digraph, MultiDigraph, MultiUGraph, UGraph, Walk};
use crate::packing::{Kernel, PackingInstance};
use crate::undirected::gen_grid_pendant;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid instance at {at}: {message}")]
    Validation { at: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

fn invalid(at: impl Into<String>, message: impl Into<String>) -> InstanceError {
    InstanceError::Validation { at: at.into(), message: message.into() }
}

/// A graph plus the optional k and r of a path query; `extra` keeps any
/// other top-level fields (generator metadata such as `k_opt`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphInstance<G> {
    pub graph: G,
    pub k: Option<BigUint>,
    pub r: Option<BigUint>,
    pub extra: BTreeMap<String, Value>,
}

impl<G> GraphInstance<G> {
    pub fn new(graph: G, k: Option<BigUint>, r: Option<BigUint>) -> Self {
        GraphInstance { graph, k, r, extra: BTreeMap::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Digraph(GraphInstance<Digraph>),
    Graph(GraphInstance<UGraph>),
    MultiDigraph(GraphInstance<MultiDigraph>),
    MultiGraph(GraphInstance<MultiUGraph>),
    Packing(PackingInstance),
}

fn parse_value(text: &str) -> Result<Value, InstanceError> {
    serde_json::from_str(text).map_err(|e| InstanceError::Parse { line: e.line(), column: e.column(), message: e.to_string() })
}

fn big(v: &Value, at: &str) -> Result<BigUint, InstanceError> {
    match v {
        Value::Number(n) => n.as_u64().map(BigUint::from).ok_or_else(|| invalid(at, "expected a non-negative integer")),
        Value::String(s) => s.parse::<BigUint>().map_err(|_| invalid(at, format!("'{s}' is not a decimal integer"))),
        _ => Err(invalid(at, "expected an integer or a decimal string")),
    }
}

fn uint(v: &Value, at: &str) -> Result<usize, InstanceError> {
    let b = big(v, at)?;
    usize::try_from(b).map_err(|_| invalid(at, "integer too large"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, InstanceError> {
    obj.get(key).ok_or_else(|| invalid(key, "missing field"))
}

fn positive(obj: &Map<String, Value>, key: &str) -> Result<Option<BigUint>, InstanceError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => {
            let x = big(v, key)?;
            if x.is_zero() {
                return Err(invalid(key, format!("{key} must be at least 1")));
            }
            Ok(Some(x))
        }
    }
}

fn pairs(obj: &Map<String, Value>) -> Result<Vec<(usize, usize)>, InstanceError> {
    let list = field(obj, "edges")?.as_array().ok_or_else(|| invalid("edges", "expected an array"))?;
    list.iter()
        .enumerate()
        .map(|(i, e)| {
            let at = format!("edges[{i}]");
            match e.as_array().map(|a| a.as_slice()) {
                Some([u, v]) => Ok((uint(u, &at)?, uint(v, &at)?)),
                _ => Err(invalid(at, "expected a pair [u, v]")),
            }
        })
        .collect()
}

fn mults(obj: &Map<String, Value>, count: usize) -> Result<Vec<BigUint>, InstanceError> {
    let Some(v) = obj.get("mult") else {
        return Ok(vec![BigUint::from(1u32); count]);
    };
    let list = v.as_array().ok_or_else(|| invalid("mult", "expected an array"))?;
    if list.len() != count {
        return Err(invalid("mult", format!("{} entries for {} edges or sets", list.len(), count)));
    }
    list.iter().enumerate().map(|(i, m)| big(m, &format!("mult[{i}]"))).collect()
}

const KNOWN: [&str; 7] = ["type", "n", "edges", "mult", "k", "r", "sets"];

fn graph_instance<G>(obj: &Map<String, Value>, build: impl FnOnce(usize, Vec<(usize, usize)>, Vec<BigUint>) -> Result<G, String>) -> Result<GraphInstance<G>, InstanceError> {
    let n = uint(field(obj, "n")?, "n")?;
    let edges = pairs(obj)?;
    let m = mults(obj, edges.len())?;
    let graph = build(n, edges, m).map_err(|e| invalid("edges", e))?;
    let extra = obj.iter().filter(|(key, _)| !KNOWN.contains(&key.as_str())).map(|(key, v)| (key.clone(), v.clone())).collect();
    Ok(GraphInstance { graph, k: positive(obj, "k")?, r: positive(obj, "r")?, extra })
}

fn packing(obj: &Map<String, Value>) -> Result<PackingInstance, InstanceError> {
    let universe = uint(field(obj, "universe")?, "universe")?;
    let p = uint(field(obj, "p")?, "p")?;
    let q = u64::try_from(big(field(obj, "q")?, "q")?).map_err(|_| invalid("q", "integer too large"))?;
    let r = big(field(obj, "r")?, "r")?;
    if r.is_zero() {
        return Err(invalid("r", "r must be at least 1"));
    }
    let list = field(obj, "sets")?.as_array().ok_or_else(|| invalid("sets", "expected an array"))?;
    let mut sets = Vec::with_capacity(list.len());
    for (i, s) in list.iter().enumerate() {
        let at = format!("sets[{i}]");
        let elems = s.as_array().ok_or_else(|| invalid(&at, "expected an array"))?;
        let set = elems.iter().map(|x| uint(x, &at)).collect::<Result<Vec<_>, _>>()?;
        if let Some(&x) = set.iter().find(|&&x| x >= universe) {
            return Err(invalid(at, format!("element {x} outside the universe of size {universe}")));
        }
        sets.push(set);
    }
    let mult = mults(obj, sets.len())?;
    PackingInstance::new(universe, p, q, r, sets, mult).map_err(|e| invalid("sets", e.to_string()))
}

/// Parses and validates one instance. The `type` field selects the kind;
/// objects with `sets` and no `type` are packing instances.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let v = parse_value(text)?;
    let obj = v.as_object().ok_or_else(|| invalid("$", "expected a JSON object"))?;
    let kind = match obj.get("type") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(invalid("type", "expected a string")),
        None if obj.contains_key("sets") => "packing",
        None => return Err(invalid("type", "missing field")),
    };
    let simple = |m: &[BigUint]| {
        if m.iter().any(|x| x != &BigUint::from(1u32)) {
            Err("simple graphs take no multiplicities".to_string())
        } else {
            Ok(())
        }
    };
    Ok(match kind {
        "digraph" => Instance::Digraph(graph_instance(obj, |n, e, m| {
            simple(&m)?;
            Digraph::new(n, e).map_err(|e| e.to_string())
        })?),
        "graph" => Instance::Graph(graph_instance(obj, |n, e, m| {
            simple(&m)?;
            UGraph::new(n, e).map_err(|e| e.to_string())
        })?),
        "multidigraph" => Instance::MultiDigraph(graph_instance(obj, |n, e, m| MultiDigraph::new(n, e.into_iter().zip(m)).map_err(|e| e.to_string()))?),
        "multigraph" => Instance::MultiGraph(graph_instance(obj, |n, e, m| MultiUGraph::new(n, e.into_iter().zip(m)).map_err(|e| e.to_string()))?),
        "packing" => Instance::Packing(packing(obj)?),
        other => return Err(invalid("type", format!("unknown instance type '{other}'"))),
    })
}

/// Reads from `path`, or from stdin when `path` is `None` or "-".
pub fn read_text(path: Option<&Path>) -> Result<String, InstanceError> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p).map_err(|e| InstanceError::Io(format!("{}: {e}", p.display()))),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| InstanceError::Io(e.to_string()))?;
            Ok(s)
        }
    }
}

pub fn read_instance(path: Option<&Path>) -> Result<Instance, InstanceError> {
    parse_instance(&read_text(path)?)
}

fn graph_json<G>(kind: &str, inst: &GraphInstance<G>, n: usize, edges: Vec<(usize, usize)>, mult: Option<Vec<String>>) -> Value {
    let mut obj = Map::new();
    obj.insert("type".into(), json!(kind));
    obj.insert("n".into(), json!(n));
    obj.insert("edges".into(), json!(edges.into_iter().map(|(u, v)| [u, v]).collect::<Vec<_>>()));
    if let Some(m) = mult {
        obj.insert("mult".into(), json!(m));
    }
    if let Some(k) = &inst.k {
        obj.insert("k".into(), json!(k.to_string()));
    }
    if let Some(r) = &inst.r {
        obj.insert("r".into(), json!(r.to_string()));
    }
    for (key, v) in &inst.extra {
        obj.insert(key.clone(), v.clone());
    }
    Value::Object(obj)
}

pub fn packing_json(p: &PackingInstance) -> Value {
    json!({
        "type": "packing",
        "universe": p.universe,
        "p": p.p,
        "q": p.q,
        "r": p.r.to_string(),
        "sets": p.sets,
        "mult": p.mult.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
    })
}

pub fn to_json(inst: &Instance) -> Value {
    match inst {
        Instance::Digraph(i) => graph_json("digraph", i, i.graph.n(), i.graph.arcs(), None),
        Instance::Graph(i) => graph_json("graph", i, i.graph.n(), i.graph.edges(), None),
        Instance::MultiDigraph(i) => {
            let (e, m): (Vec<_>, Vec<_>) = i.graph.arcs().map(|(&e, m)| (e, m.to_string())).unzip();
            graph_json("multidigraph", i, i.graph.n(), e, Some(m))
        }
        Instance::MultiGraph(i) => {
            let (e, m): (Vec<_>, Vec<_>) = i.graph.edges().map(|(&e, m)| (e, m.to_string())).unzip();
            graph_json("multigraph", i, i.graph.n(), e, Some(m))
        }
        Instance::Packing(p) => packing_json(p),
    }
}

pub fn serialize_instance(inst: &Instance) -> String {
    to_json(inst).to_string()
}

pub fn kernel_json(k: &Kernel) -> Value {
    let mut v = packing_json(&k.instance);
    let obj = v.as_object_mut().expect("object");
    obj.insert("bit_size".into(), json!(k.bit_size.to_string()));
    obj.insert("bit_bound".into(), json!(k.bit_bound.to_string()));
    obj.insert("decided".into(), json!(k.decided));
    v
}

/// Either a bare array of vertices or `{"walk": [...]}`.
pub fn parse_walk(text: &str) -> Result<Walk, InstanceError> {
    let v = parse_value(text)?;
    let list = match &v {
        Value::Array(a) => a,
        Value::Object(o) => o.get("walk").and_then(Value::as_array).ok_or_else(|| invalid("walk", "missing array"))?,
        _ => return Err(invalid("$", "expected an array or an object with 'walk'")),
    };
    let verts = list.iter().enumerate().map(|(i, x)| uint(x, &format!("walk[{i}]"))).collect::<Result<Vec<_>, _>>()?;
    Ok(Walk(verts))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    /// Directed tightness construction for the given r.
    TightnessDirected { r: usize },
    /// Subdivided torus grid with pendants.
    GridPendant { c: usize, r: u64 },
}

pub fn generate(g: Generator) -> Result<Instance, InstanceError> {
    match g {
        Generator::TightnessDirected { r } => {
            if r == 0 {
                return Err(invalid("r", "r must be at least 1"));
            }
            let (graph, k) = gen_tightness_directed(r);
            let mut inst = GraphInstance::new(graph, Some(k.clone()), Some(BigUint::from(r)));
            inst.extra.insert("k_opt".into(), json!(k.to_string()));
            Ok(Instance::Digraph(inst))
        }
        Generator::GridPendant { c, r } => {
            if c < 2 {
                return Err(invalid("c", "grid side must be at least 2"));
            }
            if r < 5 {
                return Err(invalid("r", "the construction needs r at least 5"));
            }
            let gp = gen_grid_pendant(c, r);
            let mut inst = GraphInstance::new(gp.graph, None, Some(BigUint::from(r)));
            inst.extra.insert("base_vertices".into(), json!(gp.base_vertices));
            inst.extra.insert("base_edges".into(), json!(gp.base_edges));
            Ok(Instance::Graph(inst))
        }
    }
}
