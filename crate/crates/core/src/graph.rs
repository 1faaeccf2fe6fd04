//! Simple and multi (di)graphs, SCCs, matchings and Euler trails.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {v} out of range for n = {n}")]
    OutOfRange { v: usize, n: usize },
    #[error("zero multiplicity on ({0}, {1})")]
    ZeroMultiplicity(usize, usize),
    #[error("color vector has length {got}, expected {expected}")]
    ColorLength { got: usize, expected: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EulerError {
    #[error("total multiplicity exceeds the cap")]
    TooLarge,
    #[error("no Euler trail between the given endpoints")]
    PreconditionViolated,
}

fn check_pair(n: usize, u: usize, v: usize) -> Result<(), GraphError> {
    for x in [u, v] {
        if x >= n {
            return Err(GraphError::OutOfRange { v: x, n });
        }
    }
    if u == v {
        return Err(GraphError::SelfLoop(u));
    }
    Ok(())
}

/// Anything a walk can be taken on: `succ(v)` lists the vertices reachable in one step.
pub trait Adjacency {
    fn n(&self) -> usize;
    fn succ(&self, v: usize) -> &[usize];
    fn has_step(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.succ(u).binary_search(&v).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Digraph {
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new<I: IntoIterator<Item = (usize, usize)>>(n: usize, arcs: I) -> Result<Self, GraphError> {
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for (u, v) in arcs {
            check_pair(n, u, v)?;
            out[u].push(v);
            inn[v].push(u);
        }
        for l in out.iter_mut().chain(inn.iter_mut()) {
            l.sort_unstable();
            l.dedup();
        }
        Ok(Digraph { out, inn })
    }

    pub fn empty(n: usize) -> Self {
        Digraph { out: vec![Vec::new(); n], inn: vec![Vec::new(); n] }
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn out(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn inn(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.out[u].binary_search(&v).is_ok()
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Arcs in lexicographic order.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut a = Vec::with_capacity(self.arc_count());
        for (u, l) in self.out.iter().enumerate() {
            a.extend(l.iter().map(|&v| (u, v)));
        }
        a
    }

    /// Adds a fresh vertex and returns its id.
    pub fn add_vertex(&mut self) -> usize {
        self.out.push(Vec::new());
        self.inn.push(Vec::new());
        self.out.len() - 1
    }

    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        check_pair(self.n(), u, v)?;
        if let Err(p) = self.out[u].binary_search(&v) {
            self.out[u].insert(p, v);
            let q = self.inn[v].binary_search(&u).unwrap_err();
            self.inn[v].insert(q, u);
        }
        Ok(())
    }

    /// Subgraph induced by `verts`; vertex `verts[i]` becomes `i`.
    pub fn induced(&self, verts: &[usize]) -> Digraph {
        let mut pos = vec![usize::MAX; self.n()];
        for (i, &v) in verts.iter().enumerate() {
            pos[v] = i;
        }
        let mut arcs = Vec::new();
        for (i, &v) in verts.iter().enumerate() {
            for &w in &self.out[v] {
                if pos[w] != usize::MAX {
                    arcs.push((i, pos[w]));
                }
            }
        }
        Digraph::new(verts.len(), arcs).expect("induced arcs are valid")
    }
}

impl Adjacency for Digraph {
    fn n(&self) -> usize {
        self.out.len()
    }
    fn succ(&self, v: usize) -> &[usize] {
        &self.out[v]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UGraph {
    adj: Vec<Vec<usize>>,
}

impl UGraph {
    pub fn new<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            check_pair(n, u, v)?;
            adj[u].push(v);
            adj[v].push(u);
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        Ok(UGraph { adj })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for (u, l) in self.adj.iter().enumerate() {
            e.extend(l.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        e
    }

    pub fn induced(&self, verts: &[usize]) -> UGraph {
        let mut pos = vec![usize::MAX; self.n()];
        for (i, &v) in verts.iter().enumerate() {
            pos[v] = i;
        }
        let mut edges = Vec::new();
        for (i, &v) in verts.iter().enumerate() {
            for &w in &self.adj[v] {
                if pos[w] != usize::MAX && i < pos[w] {
                    edges.push((i, pos[w]));
                }
            }
        }
        UGraph::new(verts.len(), edges).expect("induced edges are valid")
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Each edge replaced by two opposite arcs.
    pub fn bidirected(&self) -> Digraph {
        let mut arcs = Vec::new();
        for (u, v) in self.edges() {
            arcs.push((u, v));
            arcs.push((v, u));
        }
        Digraph::new(self.n(), arcs).expect("edges are valid")
    }
}

impl Adjacency for UGraph {
    fn n(&self) -> usize {
        self.adj.len()
    }
    fn succ(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }
}

/// Directed multigraph with arbitrary-precision arc multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiDigraph {
    n: usize,
    mult: BTreeMap<(usize, usize), BigUint>,
}

impl MultiDigraph {
    /// Repeated arcs are merged by adding their multiplicities.
    pub fn new<I: IntoIterator<Item = ((usize, usize), BigUint)>>(n: usize, arcs: I) -> Result<Self, GraphError> {
        let mut mult: BTreeMap<(usize, usize), BigUint> = BTreeMap::new();
        for ((u, v), m) in arcs {
            check_pair(n, u, v)?;
            if m.is_zero() {
                return Err(GraphError::ZeroMultiplicity(u, v));
            }
            *mult.entry((u, v)).or_default() += m;
        }
        Ok(MultiDigraph { n, mult })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> impl Iterator<Item = (&(usize, usize), &BigUint)> {
        self.mult.iter()
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> BigUint {
        self.mult.get(&(u, v)).cloned().unwrap_or_default()
    }

    pub fn total_multiplicity(&self) -> BigUint {
        self.mult.values().sum()
    }

    pub fn out_degree(&self, v: usize) -> BigUint {
        self.mult.iter().filter(|((a, _), _)| *a == v).map(|(_, m)| m).sum()
    }

    pub fn in_degree(&self, v: usize) -> BigUint {
        self.mult.iter().filter(|((_, b), _)| *b == v).map(|(_, m)| m).sum()
    }
}

/// Undirected multigraph; keys are stored as `(min, max)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiUGraph {
    n: usize,
    mult: BTreeMap<(usize, usize), BigUint>,
}

impl MultiUGraph {
    pub fn new<I: IntoIterator<Item = ((usize, usize), BigUint)>>(n: usize, edges: I) -> Result<Self, GraphError> {
        let mut mult: BTreeMap<(usize, usize), BigUint> = BTreeMap::new();
        for ((u, v), m) in edges {
            check_pair(n, u, v)?;
            if m.is_zero() {
                return Err(GraphError::ZeroMultiplicity(u, v));
            }
            *mult.entry((u.min(v), u.max(v))).or_default() += m;
        }
        Ok(MultiUGraph { n, mult })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (&(usize, usize), &BigUint)> {
        self.mult.iter()
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> BigUint {
        self.mult.get(&(u.min(v), u.max(v))).cloned().unwrap_or_default()
    }

    pub fn total_multiplicity(&self) -> BigUint {
        self.mult.values().sum()
    }

    pub fn degree(&self, v: usize) -> BigUint {
        self.mult.iter().filter(|((a, b), _)| *a == v || *b == v).map(|(_, m)| m).sum()
    }
}

/// Vertex coloring with colors in `1..=c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coloring {
    pub colors: Vec<u32>,
    pub c: u32,
}

impl Coloring {
    pub fn color(&self, v: usize) -> u32 {
        self.colors[v]
    }

    pub fn is_injective_on(&self, verts: &[usize]) -> bool {
        let mut seen: Vec<u32> = verts.iter().map(|&v| self.colors[v]).collect();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredDigraph {
    pub graph: Digraph,
    pub colors: Vec<u32>,
}

impl ColoredDigraph {
    pub fn new(graph: Digraph, colors: Vec<u32>) -> Result<Self, GraphError> {
        if colors.len() != graph.n() {
            return Err(GraphError::ColorLength { got: colors.len(), expected: graph.n() });
        }
        Ok(ColoredDigraph { graph, colors })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn color(&self, v: usize) -> u32 {
        self.colors[v]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredUGraph {
    pub graph: UGraph,
    pub colors: Vec<u32>,
}

impl ColoredUGraph {
    pub fn new(graph: UGraph, colors: Vec<u32>) -> Result<Self, GraphError> {
        if colors.len() != graph.n() {
            return Err(GraphError::ColorLength { got: colors.len(), expected: graph.n() });
        }
        Ok(ColoredUGraph { graph, colors })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn color(&self, v: usize) -> u32 {
        self.colors[v]
    }
}

/// Explicit vertex sequence; its size is the number of vertex visits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Walk(pub Vec<usize>);

impl Walk {
    pub fn size(&self) -> usize {
        self.0.len()
    }
}

/// Strongly connected components in topological order: no arc leads from a
/// later component to an earlier one. Iterative Tarjan.
pub fn scc(g: &Digraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0usize;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < g.out(v).len() {
                let w = g.out(v)[*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    // Tarjan emits sinks first.
    comps.reverse();
    comps
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Support connected (ignoring isolated vertices) and containing `s` when
/// there is at least one arc.
fn support_connected<'a, I: Iterator<Item = &'a (usize, usize)>>(n: usize, pairs: I, s: usize) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    let mut touched = vec![false; n];
    let mut any = false;
    for &(u, v) in pairs {
        any = true;
        touched[u] = true;
        touched[v] = true;
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    if !any {
        return true;
    }
    if !touched[s] {
        return false;
    }
    let root = find(&mut parent, s);
    (0..n).filter(|&v| touched[v]).all(|v| find(&mut parent, v) == root)
}

pub fn euler_trail_exists(g: &MultiDigraph, s: usize, t: usize) -> bool {
    let n = g.n();
    if s >= n || t >= n {
        return false;
    }
    if g.mult.is_empty() {
        return s == t;
    }
    let mut outd = vec![BigUint::zero(); n];
    let mut ind = vec![BigUint::zero(); n];
    for (&(u, v), m) in &g.mult {
        outd[u] += m;
        ind[v] += m;
    }
    for v in 0..n {
        let ok = if s != t && v == s {
            outd[v] == &ind[v] + 1u32
        } else if s != t && v == t {
            ind[v] == &outd[v] + 1u32
        } else {
            outd[v] == ind[v]
        };
        if !ok {
            return false;
        }
    }
    support_connected(n, g.mult.keys(), s)
}

pub fn euler_trail_exists_undirected(g: &MultiUGraph, s: usize, t: usize) -> bool {
    let n = g.n();
    if s >= n || t >= n {
        return false;
    }
    if g.mult.is_empty() {
        return s == t;
    }
    let mut deg = vec![BigUint::zero(); n];
    for (&(u, v), m) in &g.mult {
        deg[u] += m;
        deg[v] += m;
    }
    let two = BigUint::from(2u32);
    for (v, d) in deg.iter().enumerate() {
        let odd = (d % &two).is_one();
        let want_odd = s != t && (v == s || v == t);
        if odd != want_odd {
            return false;
        }
    }
    support_connected(n, g.mult.keys(), s)
}

fn small_counts<'a, I: Iterator<Item = &'a BigUint>>(total: BigUint, cap: &BigUint, ms: I) -> Result<Vec<u64>, EulerError> {
    if &total > cap || total.to_usize().is_none() {
        return Err(EulerError::TooLarge);
    }
    Ok(ms.map(|m| m.to_u64().expect("bounded by total")).collect())
}

/// Hierholzer; `cap` bounds the total multiplicity (the walk has one more vertex).
pub fn euler_trail_construct(g: &MultiDigraph, s: usize, t: usize, cap: &BigUint) -> Result<Walk, EulerError> {
    if !euler_trail_exists(g, s, t) {
        return Err(EulerError::PreconditionViolated);
    }
    let keys: Vec<(usize, usize)> = g.mult.keys().copied().collect();
    let mut rem = small_counts(g.total_multiplicity(), cap, g.mult.values())?;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (i, &(u, _)) in keys.iter().enumerate() {
        adj[u].push(i);
    }
    let mut ptr = vec![0usize; g.n()];
    let mut stack = vec![s];
    let mut path = Vec::new();
    while let Some(&v) = stack.last() {
        while ptr[v] < adj[v].len() && rem[adj[v][ptr[v]]] == 0 {
            ptr[v] += 1;
        }
        if ptr[v] < adj[v].len() {
            let a = adj[v][ptr[v]];
            rem[a] -= 1;
            stack.push(keys[a].1);
        } else {
            path.push(stack.pop().unwrap());
        }
    }
    path.reverse();
    Ok(Walk(path))
}

pub fn euler_trail_construct_undirected(g: &MultiUGraph, s: usize, t: usize, cap: &BigUint) -> Result<Walk, EulerError> {
    if !euler_trail_exists_undirected(g, s, t) {
        return Err(EulerError::PreconditionViolated);
    }
    let keys: Vec<(usize, usize)> = g.mult.keys().copied().collect();
    let mut rem = small_counts(g.total_multiplicity(), cap, g.mult.values())?;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (i, &(u, v)) in keys.iter().enumerate() {
        adj[u].push(i);
        adj[v].push(i);
    }
    let mut ptr = vec![0usize; g.n()];
    let mut stack = vec![s];
    let mut path = Vec::new();
    while let Some(&v) = stack.last() {
        while ptr[v] < adj[v].len() && rem[adj[v][ptr[v]]] == 0 {
            ptr[v] += 1;
        }
        if ptr[v] < adj[v].len() {
            let e = adj[v][ptr[v]];
            rem[e] -= 1;
            let (a, b) = keys[e];
            stack.push(if a == v { b } else { a });
        } else {
            path.push(stack.pop().unwrap());
        }
    }
    // Odd-degree trails are found from s, so the reversed path ends at t.
    path.reverse();
    Ok(Walk(path))
}

/// Greedy maximal matching over edges in lexicographic order.
pub fn maximal_matching(g: &UGraph) -> Vec<(usize, usize)> {
    let mut used = vec![false; g.n()];
    let mut m = Vec::new();
    for (u, v) in g.edges() {
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            m.push((u, v));
        }
    }
    m
}

pub fn vertex_cover_from(matching: &[(usize, usize)]) -> Vec<usize> {
    let mut c: Vec<usize> = matching.iter().flat_map(|&(u, v)| [u, v]).collect();
    c.sort_unstable();
    c.dedup();
    c
}
