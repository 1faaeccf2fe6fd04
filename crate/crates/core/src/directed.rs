//! Directed r-simple k-path: SCC decomposition, the niceness shortcut,
//! color coding over topologies of the pendant graph, flow-based
//! enrichment and the recursive enriched-topology test.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::colorings::{default_trials, family_with_budget, ColoringError, ColoringFamily, ColoringKind, DEFAULT_BUDGET};
use crate::flow::{max_value_circulation_with_lower_bounds, Capacity, FlowArc, FlowNetwork};
use crate::graph::{scc, ColoredDigraph, Digraph};
use crate::longpath::{niceness_directed, Niceness};

pub const DEFAULT_TOPOLOGY_BUDGET: u64 = 500_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("r must be at least 1")]
    ZeroR,
    #[error("bound override {given} exceeds the default bound {default}")]
    BadOverride { given: u64, default: BigUint },
    #[error("special pipeline requires r^2 > k")]
    SpecialNeedsLargeR,
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error("work budget of {0} exceeded")]
    BudgetExceeded(u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ColoringChoice {
    #[default]
    Auto,
    Exhaustive,
    Injective,
    Randomized,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverParams {
    pub bound_override: Option<u64>,
    pub coloring: ColoringChoice,
    pub trials: Option<u64>,
    pub seed: u64,
    /// Cap on the size of an exhaustive or randomized coloring family.
    pub family_budget: u64,
    /// Cap on the number of topologies (or occurrence sequences) examined.
    pub work_budget: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            bound_override: None,
            coloring: ColoringChoice::Auto,
            trials: None,
            seed: 0,
            family_budget: DEFAULT_BUDGET,
            work_budget: DEFAULT_TOPOLOGY_BUDGET,
        }
    }
}

/// 30·⌈k/r⌉² + 1.
pub fn default_bound(k: &BigUint, r: &BigUint) -> BigUint {
    let q = k.div_ceil(r);
    &q * &q * 30u32 + 1u32
}

pub(crate) fn resolve_bound(default: BigUint, params: &SolverParams) -> Result<BigUint, SolveError> {
    match params.bound_override {
        None => Ok(default),
        Some(b) if BigUint::from(b) <= default && b >= 1 => Ok(BigUint::from(b)),
        Some(b) => Err(SolveError::BadOverride { given: b, default }),
    }
}

/// Picks the coloring family for `n` vertices and `colors` available colors.
pub(crate) fn choose_family(n: usize, colors: &BigUint, params: &SolverParams) -> Result<ColoringFamily, SolveError> {
    let enough = colors >= &BigUint::from(n);
    let small = colors.to_u32().unwrap_or(u32::MAX).min(n.max(1) as u32).max(1);
    let budget = params.family_budget;
    let randomized = |c: u32| {
        let trials = params.trials.unwrap_or_else(|| default_trials(n, c));
        family_with_budget(n, c, ColoringKind::Randomized { trials, seed: params.seed }, budget)
    };
    let fam = match params.coloring {
        ColoringChoice::Auto if enough => family_with_budget(n, n.max(1) as u32, ColoringKind::Injective, budget)?,
        ColoringChoice::Auto => match family_with_budget(n, small, ColoringKind::Exhaustive, budget) {
            Ok(f) => f,
            Err(ColoringError::BudgetExceeded(_)) => randomized(small)?,
            Err(e) => return Err(e.into()),
        },
        ColoringChoice::Injective if enough => family_with_budget(n, n.max(1) as u32, ColoringKind::Injective, budget)?,
        ColoringChoice::Injective => return Err(ColoringError::InvalidKind { n, c: small }.into()),
        ColoringChoice::Exhaustive => family_with_budget(n, small, ColoringKind::Exhaustive, budget)?,
        ColoringChoice::Randomized => randomized(small)?,
    };
    Ok(fam)
}

/// A colored digraph whose vertices are its colors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Topology {
    /// Sorted, every vertex incident to an arc.
    pub vertices: Vec<u32>,
    pub arcs: Vec<(u32, u32)>,
}

impl Topology {
    pub fn from_arcs(arcs: Vec<(u32, u32)>) -> Self {
        let vertices: BTreeSet<u32> = arcs.iter().flat_map(|&(a, b)| [a, b]).collect();
        Topology { vertices: vertices.into_iter().collect(), arcs }
    }

    fn index(&self, c: u32) -> Option<usize> {
        self.vertices.binary_search(&c).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enrichment {
    /// Aligned with the topology's arcs.
    pub phi: Vec<BigUint>,
    pub s: u32,
    pub t: u32,
}

impl Enrichment {
    pub fn total(&self) -> BigUint {
        self.phi.iter().sum()
    }
}

/// Distinct color pairs (a, b), a ≠ b, realized by arcs of g.
pub fn color_quotient(g: &ColoredDigraph) -> Vec<(u32, u32)> {
    let set: BTreeSet<(u32, u32)> = g.graph.arcs().into_iter().map(|(u, v)| (g.color(u), g.color(v))).filter(|(a, b)| a != b).collect();
    set.into_iter().collect()
}

/// Enumerates weakly connected arc subsets of a small digraph, each once.
struct ArcSubsets {
    ends: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    max: usize,
    deg_cap: usize,
    nodes: usize,
}

struct SubsetState {
    sub: Vec<usize>,
    closed: Vec<u32>,
    outd: Vec<usize>,
    ind: Vec<usize>,
}

impl ArcSubsets {
    fn new(ends: Vec<(usize, usize)>, nodes: usize, max: usize, deg_cap: usize) -> Self {
        let m = ends.len();
        let mut by_node = vec![Vec::new(); nodes];
        for (i, &(a, b)) in ends.iter().enumerate() {
            by_node[a].push(i);
            by_node[b].push(i);
        }
        let adj = (0..m)
            .map(|i| {
                let (a, b) = ends[i];
                let mut s: Vec<usize> = by_node[a].iter().chain(&by_node[b]).copied().filter(|&j| j != i).collect();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        ArcSubsets { ends, adj, max, deg_cap, nodes }
    }

    fn for_each<B>(&self, mut f: impl FnMut(&[usize]) -> ControlFlow<B>) -> ControlFlow<B> {
        if self.max == 0 {
            return ControlFlow::Continue(());
        }
        let m = self.ends.len();
        let mut st = SubsetState { sub: Vec::new(), closed: vec![0; m], outd: vec![0; self.nodes], ind: vec![0; self.nodes] };
        for v in 0..m {
            if !self.push(&mut st, v) {
                self.pop(&mut st);
                continue;
            }
            let ext: Vec<usize> = self.adj[v].iter().copied().filter(|&u| u > v).collect();
            let res = self.extend(&mut st, ext, v, &mut f);
            self.pop(&mut st);
            res?;
        }
        ControlFlow::Continue(())
    }

    /// Adds arc `w`; false when a degree cap is violated (the caller still pops).
    fn push(&self, st: &mut SubsetState, w: usize) -> bool {
        st.sub.push(w);
        st.closed[w] += 1;
        for &u in &self.adj[w] {
            st.closed[u] += 1;
        }
        let (a, b) = self.ends[w];
        st.outd[a] += 1;
        st.ind[b] += 1;
        st.outd[a] <= self.deg_cap && st.ind[b] <= self.deg_cap
    }

    fn pop(&self, st: &mut SubsetState) {
        let w = st.sub.pop().expect("nonempty");
        st.closed[w] -= 1;
        for &u in &self.adj[w] {
            st.closed[u] -= 1;
        }
        let (a, b) = self.ends[w];
        st.outd[a] -= 1;
        st.ind[b] -= 1;
    }

    fn extend<B>(&self, st: &mut SubsetState, mut ext: Vec<usize>, root: usize, f: &mut impl FnMut(&[usize]) -> ControlFlow<B>) -> ControlFlow<B> {
        f(&st.sub)?;
        if st.sub.len() >= self.max {
            return ControlFlow::Continue(());
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            next.extend(self.adj[w].iter().copied().filter(|&u| u > root && st.closed[u] == 0));
            if self.push(st, w) {
                let res = self.extend(st, next, root, f);
                self.pop(st);
                res?;
            } else {
                self.pop(st);
            }
        }
        ControlFlow::Continue(())
    }
}

fn dense_arcs(arcs: &[(u32, u32)]) -> (Vec<u32>, Vec<(usize, usize)>) {
    let verts: Vec<u32> = arcs.iter().flat_map(|&(a, b)| [a, b]).collect::<BTreeSet<_>>().into_iter().collect();
    let idx = |c: u32| verts.binary_search(&c).expect("vertex present");
    let ends = arcs.iter().map(|&(a, b)| (idx(a), idx(b))).collect();
    (verts, ends)
}

/// Every weakly connected, nonempty arc subset of g's color quotient with at
/// most `l` arcs.
pub fn enumerate_topologies(g: &ColoredDigraph, l: usize) -> Vec<Topology> {
    let quotient = color_quotient(g);
    let (verts, ends) = dense_arcs(&quotient);
    let subsets = ArcSubsets::new(ends, verts.len(), l, usize::MAX);
    let mut out = Vec::new();
    let _ = subsets.for_each::<()>(|sub| {
        out.push(Topology::from_arcs(sub.iter().map(|&i| quotient[i]).collect()));
        ControlFlow::Continue(())
    });
    out
}

/// φ maximizing ∑φ subject to the balance and throughput conditions with
/// endpoints (i, j), or `None` when no such φ exists.
pub fn enrich(t: &Topology, r: &BigUint, i: u32, j: u32) -> Option<Enrichment> {
    if i == j || t.arcs.is_empty() {
        return None;
    }
    let (si, ti) = (t.index(i)?, t.index(j)?);
    let mut net = FlowNetwork::new(2 * t.vertices.len());
    for x in 0..t.vertices.len() {
        net.add_arc(FlowArc { from: 2 * x, to: 2 * x + 1, lower: BigUint::zero(), upper: Capacity::Finite(r.clone()), cost: 0 });
    }
    let objective: Vec<usize> = t
        .arcs
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (t.index(a).expect("arc endpoint"), t.index(b).expect("arc endpoint"));
            net.add_arc(FlowArc { from: 2 * a + 1, to: 2 * b, lower: BigUint::one(), upper: Capacity::Finite(r.clone()), cost: 0 })
        })
        .collect();
    net.add_arc(FlowArc::new(2 * ti + 1, 2 * si, 1, 1.into(), 0));
    let sol = max_value_circulation_with_lower_bounds(&net, &objective).ok()?;
    Some(Enrichment { phi: objective.iter().map(|&a| sol.flow[a].clone()).collect(), s: i, t: j })
}

/// Colored digraph plus pendant vertices appended by the recursion. Each
/// extra vertex has a single in-arc and no out-arcs.
struct Host<'a> {
    g: &'a ColoredDigraph,
    extra: Vec<(usize, u32)>,
}

impl Host<'_> {
    fn n(&self) -> usize {
        self.g.n() + self.extra.len()
    }

    fn color(&self, v: usize) -> u32 {
        if v < self.g.n() {
            self.g.color(v)
        } else {
            self.extra[v - self.g.n()].1
        }
    }

    fn preds(&self, v: usize) -> Vec<usize> {
        if v < self.g.n() {
            self.g.graph.inn(v).to_vec()
        } else {
            vec![self.extra[v - self.g.n()].0]
        }
    }

    fn succs(&self, v: usize) -> Vec<usize> {
        let mut out = if v < self.g.n() { self.g.graph.out(v).to_vec() } else { Vec::new() };
        out.extend(self.extra.iter().enumerate().filter(|(_, &(p, _))| p == v).map(|(i, _)| self.g.n() + i));
        out
    }

    fn has_arc(&self, u: usize, w: usize) -> bool {
        if w < self.g.n() {
            u < self.g.n() && self.g.graph.has_arc(u, w)
        } else {
            self.extra[w - self.g.n()].0 == u
        }
    }

    fn max_color(&self) -> u32 {
        (0..self.n()).map(|v| self.color(v)).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
struct Enriched {
    topo: Topology,
    phi: Vec<BigUint>,
}

impl Enriched {
    fn degrees(&self) -> (Vec<BigUint>, Vec<BigUint>) {
        let k = self.topo.vertices.len();
        let (mut out, mut inn) = (vec![BigUint::zero(); k], vec![BigUint::zero(); k]);
        for (&(a, b), f) in self.topo.arcs.iter().zip(&self.phi) {
            out[self.topo.index(a).expect("endpoint")] += f;
            inn[self.topo.index(b).expect("endpoint")] += f;
        }
        (out, inn)
    }

    fn weakly_connected(&self) -> bool {
        let k = self.topo.vertices.len();
        if k == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); k];
        for &(a, b) in &self.topo.arcs {
            let (a, b) = (self.topo.index(a).expect("endpoint"), self.topo.index(b).expect("endpoint"));
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; k];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.iter().all(|&b| b)
    }

    fn is_dag(&self) -> bool {
        let k = self.topo.vertices.len();
        let mut indeg = vec![0usize; k];
        let mut adj = vec![Vec::new(); k];
        for &(a, b) in &self.topo.arcs {
            let (a, b) = (self.topo.index(a).expect("endpoint"), self.topo.index(b).expect("endpoint"));
            adj[a].push(b);
            indeg[b] += 1;
        }
        let mut queue: Vec<usize> = (0..k).filter(|&x| indeg[x] == 0).collect();
        let mut seen = 0;
        while let Some(x) = queue.pop() {
            seen += 1;
            for &y in &adj[x] {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    queue.push(y);
                }
            }
        }
        seen == k
    }

    /// Shortest directed cycle; ties go to the lexicographically smallest
    /// color sequence starting at its smallest color.
    fn pick_cycle(&self) -> Vec<u32> {
        let verts = &self.topo.vertices;
        let k = verts.len();
        let mut adj = vec![Vec::new(); k];
        for &(a, b) in &self.topo.arcs {
            adj[self.topo.index(a).expect("endpoint")].push(self.topo.index(b).expect("endpoint"));
        }
        adj.iter_mut().for_each(|l| l.sort_unstable());
        let mut best_len = usize::MAX;
        for s in 0..k {
            let mut dist = vec![usize::MAX; k];
            let mut queue = VecDeque::from([s]);
            dist[s] = 0;
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    if y == s {
                        best_len = best_len.min(dist[x] + 1);
                    } else if dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
        }
        fn dfs(adj: &[Vec<usize>], start: usize, len: usize, path: &mut Vec<usize>) -> bool {
            let x = *path.last().expect("nonempty");
            for &y in &adj[x] {
                if path.len() == len {
                    if y == start {
                        return true;
                    }
                } else if y > start && !path.contains(&y) {
                    path.push(y);
                    if dfs(adj, start, len, path) {
                        return true;
                    }
                    path.pop();
                }
            }
            false
        }
        for s in 0..k {
            let mut path = vec![s];
            if dfs(&adj, s, best_len, &mut path) {
                return path.into_iter().map(|i| verts[i]).collect();
            }
        }
        unreachable!("pick_cycle called on an acyclic topology")
    }
}

struct Solver<'a> {
    host: Host<'a>,
}

impl Solver<'_> {
    fn valid(&self, s: usize, t: usize, e: &Enriched, a: &[usize]) -> bool {
        let (cs, ct) = (self.host.color(s), self.host.color(t));
        if s == t || cs == ct || e.topo.index(cs).is_none() || e.topo.index(ct).is_none() || e.topo.arcs.is_empty() {
            return false;
        }
        if e.phi.iter().any(Zero::is_zero) || !e.weakly_connected() {
            return false;
        }
        let (out, inn) = e.degrees();
        for (x, &c) in e.topo.vertices.iter().enumerate() {
            let balanced = if c == cs {
                out[x] == &inn[x] + 1u32
            } else if c == ct {
                inn[x] == &out[x] + 1u32
            } else {
                out[x] == inn[x]
            };
            if !balanced {
                return false;
            }
        }
        let mut seen = HashSet::new();
        a.iter().all(|&v| {
            let c = self.host.color(v);
            e.topo.index(c).is_some() && seen.insert(c)
        })
    }

    fn solve(&mut self, s: usize, t: usize, e: &Enriched, a: &[usize]) -> bool {
        if !self.valid(s, t, e, a) {
            return false;
        }
        if e.is_dag() {
            self.base(s, t, e, a)
        } else {
            self.step(s, t, e, a)
        }
    }

    fn base(&self, s: usize, t: usize, e: &Enriched, a: &[usize]) -> bool {
        if e.phi.iter().any(|f| !f.is_one()) {
            return false;
        }
        let (out, inn) = e.degrees();
        if out.iter().chain(&inn).any(|d| d > &BigUint::one()) {
            return false;
        }
        let pinned: HashMap<u32, usize> = a.iter().map(|&v| (self.host.color(v), v)).collect();
        let allowed = |v: usize| {
            let c = self.host.color(v);
            e.topo.index(c).is_some() && pinned.get(&c).is_none_or(|&p| p == v)
        };
        if !allowed(s) || !allowed(t) {
            return false;
        }
        let pairs: HashSet<(u32, u32)> = e.topo.arcs.iter().copied().collect();
        let mut seen = vec![false; self.host.n()];
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(x) = queue.pop_front() {
            if x == t {
                return true;
            }
            let cx = self.host.color(x);
            for y in self.host.succs(x) {
                if !seen[y] && allowed(y) && pairs.contains(&(cx, self.host.color(y))) {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        false
    }

    fn step(&mut self, s: usize, t: usize, e: &Enriched, a: &[usize]) -> bool {
        let (cs, ct) = (self.host.color(s), self.host.color(t));
        let cycle = e.pick_cycle();
        let q = cycle.len();
        let on_cycle: Vec<(u32, u32)> = (0..q).map(|i| (cycle[i], cycle[(i + 1) % q])).collect();
        let m = on_cycle
            .iter()
            .map(|p| &e.phi[e.topo.arcs.iter().position(|x| x == p).expect("cycle arc")])
            .min()
            .expect("nonempty cycle")
            .clone();
        let mut rest: Vec<((u32, u32), BigUint)> = Vec::new();
        for (&arc, f) in e.topo.arcs.iter().zip(&e.phi) {
            let f = if on_cycle.contains(&arc) { f - &m } else { f.clone() };
            if !f.is_zero() {
                rest.push((arc, f));
            }
        }
        // Weak components over all topology vertices.
        let k = e.topo.vertices.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for ((a_, b_), _) in &rest {
            let (x, y) = (e.topo.index(*a_).expect("endpoint"), e.topo.index(*b_).expect("endpoint"));
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            parent[rx] = ry;
        }
        let roots: Vec<usize> = (0..k).map(|x| find(&mut parent, x)).collect();
        struct Part {
            verts: BTreeSet<u32>,
            enriched: Enriched,
            both: bool,
            f_a: Vec<usize>,
        }
        let mut anchors: HashMap<u32, Part> = HashMap::new();
        let distinct: BTreeSet<usize> = roots.iter().copied().collect();
        for root in distinct {
            let verts: BTreeSet<u32> = (0..k).filter(|&x| roots[x] == root).map(|x| e.topo.vertices[x]).collect();
            let (arcs, phi): (Vec<_>, Vec<_>) = rest.iter().filter(|((x, _), _)| verts.contains(x)).cloned().unzip();
            let anchor = *cycle.iter().filter(|c| verts.contains(c)).min().expect("every component meets the cycle");
            let f_a = a.iter().copied().filter(|&v| verts.contains(&self.host.color(v))).collect();
            let topo = Topology { vertices: verts.iter().copied().collect(), arcs };
            let both = verts.contains(&cs) && verts.contains(&ct);
            anchors.insert(anchor, Part { verts, enriched: Enriched { topo, phi }, both, f_a });
        }
        let mut memo: HashMap<(u32, usize), bool> = HashMap::new();
        let mut check = |this: &mut Self, color: u32, u: usize| -> bool {
            let Some(part) = anchors.get(&color) else {
                return true;
            };
            if let Some(&r) = memo.get(&(color, u)) {
                return r;
            }
            let mut req = vec![u];
            req.extend(part.f_a.iter().copied().filter(|&v| v != u));
            let res = if part.both {
                this.solve(s, t, &part.enriched, &req)
            } else {
                let fresh = this.host.max_color().max(*part.verts.last().expect("nonempty")) + 1;
                this.host.extra.push((u, fresh));
                let x = this.host.n() - 1;
                let mut arcs = part.enriched.topo.arcs.clone();
                let mut phi = part.enriched.phi.clone();
                arcs.push((color, fresh));
                phi.push(BigUint::one());
                let ext = Enriched { topo: Topology::from_arcs(arcs), phi };
                let r = this.solve(u, x, &ext, &req);
                this.host.extra.pop();
                r
            };
            memo.insert((color, u), res);
            res
        };
        let n = self.host.n();
        let mut members: HashMap<u32, Vec<usize>> = HashMap::new();
        for v in 0..n {
            members.entry(self.host.color(v)).or_default().push(v);
        }
        let by_color = |c: u32| -> Vec<usize> { members.get(&c).cloned().unwrap_or_default() };
        let first = by_color(cycle[0]);
        let w_count = first.len();
        let mut pos = vec![usize::MAX; n];
        let mut prev_verts = first.clone();
        let mut prev: Vec<Vec<bool>> = Vec::with_capacity(w_count);
        for (i, &u) in first.iter().enumerate() {
            let mut row = vec![false; w_count];
            row[i] = check(self, cycle[0], u);
            prev.push(row);
        }
        for &c in &cycle[1..] {
            for (i, &v) in prev_verts.iter().enumerate() {
                pos[v] = i;
            }
            let cur_verts = by_color(c);
            let mut cur = Vec::with_capacity(cur_verts.len());
            for &u in &cur_verts {
                let mut row = vec![false; w_count];
                for p in self.host.preds(u) {
                    if pos[p] != usize::MAX {
                        for (x, &b) in row.iter_mut().zip(&prev[pos[p]]) {
                            *x |= b;
                        }
                    }
                }
                if row.iter().any(|&b| b) && !check(self, c, u) {
                    row.iter_mut().for_each(|b| *b = false);
                }
                cur.push(row);
            }
            for &v in &prev_verts {
                pos[v] = usize::MAX;
            }
            prev = cur;
            prev_verts = cur_verts;
        }
        prev_verts.iter().zip(&prev).any(|(&u, row)| first.iter().zip(row).any(|(&w, &b)| b && self.host.has_arc(u, w)))
    }
}

/// Decides the annotated enriched-topology problem: true when an r-simple
/// s-t walk complies with (T, φ) and visits every vertex of `a`; false when
/// no walk even weakly complies.
pub fn solve_enriched(g: &ColoredDigraph, r: &BigUint, s: usize, t: usize, topo: &Topology, phi: &[BigUint], a: &[usize]) -> bool {
    if s >= g.n() || t >= g.n() || phi.len() != topo.arcs.len() || a.iter().any(|&v| v >= g.n()) {
        return false;
    }
    let e = Enriched { topo: Topology::from_arcs(topo.arcs.clone()), phi: phi.to_vec() };
    let (out, inn) = e.degrees();
    if out.iter().zip(&inn).any(|(o, i)| o.max(i) > r) {
        return false;
    }
    let mut solver = Solver { host: Host { g, extra: Vec::new() } };
    solver.solve(s, t, &e, a)
}

/// Adds a pendant v' = n + v with the arc (v, v') for every vertex v.
pub fn pendant_graph(g: &Digraph) -> Digraph {
    let n = g.n();
    let arcs = g.arcs().into_iter().chain((0..n).map(|v| (v, n + v)));
    Digraph::new(2 * n, arcs).expect("valid arcs")
}

/// True when the topology plus the extra arc (back_from, back_to) is strongly connected.
fn strongly_connected_with(verts: &[u32], arcs: &[(u32, u32)], back: (u32, u32)) -> bool {
    let k = verts.len();
    let idx = |c: u32| verts.binary_search(&c).expect("vertex present");
    let mut fwd = vec![Vec::new(); k];
    let mut rev = vec![Vec::new(); k];
    for &(a, b) in arcs.iter().chain([&back]) {
        if a != b {
            fwd[idx(a)].push(idx(b));
            rev[idx(b)].push(idx(a));
        }
    }
    let all = |adj: &Vec<Vec<usize>>| {
        let mut seen = vec![false; k];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.iter().all(|&b| b)
    };
    k > 0 && all(&fwd) && all(&rev)
}

fn degree_cap(r: &BigUint) -> usize {
    r.to_usize().unwrap_or(usize::MAX)
}

/// Largest size k* of an r-simple s-t walk certified through some enriched
/// topology with at most `b` arcs. No colorful r-simple s-t walk with fewer
/// than b distinct arcs is larger than k*. Stops early once k* ≥ k.
pub fn colorful_rsls(g: &ColoredDigraph, k: &BigUint, r: &BigUint, s: usize, t: usize, b: usize) -> Result<BigUint, SolveError> {
    colorful_rsls_budget(g, k, r, s, t, b, DEFAULT_TOPOLOGY_BUDGET)
}

pub fn colorful_rsls_budget(g: &ColoredDigraph, k: &BigUint, r: &BigUint, s: usize, t: usize, b: usize, budget: u64) -> Result<BigUint, SolveError> {
    if s >= g.n() || t >= g.n() || s == t || g.color(s) == g.color(t) {
        return Ok(BigUint::zero());
    }
    let (cs, ct) = (g.color(s), g.color(t));
    let quotient = color_quotient(g);
    let (verts, ends) = dense_arcs(&quotient);
    let subsets = ArcSubsets::new(ends, verts.len(), b, degree_cap(r));
    let mut best = BigUint::zero();
    let mut visited = 0u64;
    let flow = subsets.for_each(|sub| {
        visited += 1;
        if visited > budget {
            return ControlFlow::Break(Err(SolveError::BudgetExceeded(budget)));
        }
        let topo = Topology::from_arcs(sub.iter().map(|&i| quotient[i]).collect());
        if topo.index(cs).is_none() || topo.index(ct).is_none() || !strongly_connected_with(&topo.vertices, &topo.arcs, (ct, cs)) {
            return ControlFlow::Continue(());
        }
        if let Some(en) = enrich(&topo, r, cs, ct) {
            let size = en.total() + 1u32;
            if size > best && solve_enriched(g, r, s, t, &topo, &en.phi, &[]) {
                best = size;
                if &best >= k {
                    return ControlFlow::Break(Ok(()));
                }
            }
        }
        ControlFlow::Continue(())
    });
    match flow {
        ControlFlow::Break(Err(e)) => Err(e),
        _ => Ok(best),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rsls {
    FoundKPath,
    /// `table[u][v]`: largest certified size of an r-simple u-v walk (below k).
    Table(Vec<Vec<BigUint>>),
}

/// All-pairs r-simple walk sizes on a strongly connected nice digraph via
/// color coding on the pendant graph.
pub fn rsls(g: &Digraph, k: &BigUint, r: &BigUint, params: &SolverParams) -> Result<Rsls, SolveError> {
    let n = g.n();
    let b = resolve_bound(default_bound(k, r), params)?;
    let colors = if b.is_zero() { BigUint::zero() } else { &b - 1u32 };
    let fam = choose_family(n, &colors, params)?;
    let arc_budget = b.to_usize().unwrap_or(usize::MAX);
    let pendant = pendant_graph(g);
    let found = AtomicBool::new(false);
    let visited = AtomicU64::new(0);
    let error: Mutex<Option<SolveError>> = Mutex::new(None);
    let mut init = vec![vec![BigUint::zero(); n]; n];
    for (u, row) in init.iter_mut().enumerate() {
        row[u] = BigUint::one();
    }
    let tables: Vec<Vec<Vec<BigUint>>> = fam
        .iter()
        .par_bridge()
        .map(|col| {
            let mut table = init.clone();
            if found.load(Ordering::Relaxed) || error.lock().expect("lock").is_some() {
                return table;
            }
            let sink = fam.c + 1;
            let mut colors = col.colors.clone();
            colors.extend(std::iter::repeat(sink).take(n));
            let gp = ColoredDigraph::new(pendant.clone(), colors).expect("total coloring");
            let quotient: Vec<(u32, u32)> =
                g.arcs().into_iter().map(|(u, v)| (col.colors[u], col.colors[v])).filter(|(a, b)| a != b).collect::<BTreeSet<_>>().into_iter().collect();
            let mut members: HashMap<u32, Vec<usize>> = HashMap::new();
            for v in 0..n {
                members.entry(col.colors[v]).or_default().push(v);
            }
            let (verts, ends) = dense_arcs(&quotient);
            let subsets = ArcSubsets::new(ends, verts.len(), arc_budget.saturating_sub(1), degree_cap(r));
            let _ = subsets.for_each::<()>(|sub| {
                if found.load(Ordering::Relaxed) {
                    return ControlFlow::Break(());
                }
                if visited.fetch_add(1, Ordering::Relaxed) >= params.work_budget {
                    *error.lock().expect("lock") = Some(SolveError::BudgetExceeded(params.work_budget));
                    return ControlFlow::Break(());
                }
                let h: Vec<(u32, u32)> = sub.iter().map(|&i| quotient[i]).collect();
                let hv: Vec<u32> = h.iter().flat_map(|&(a, b)| [a, b]).collect::<BTreeSet<_>>().into_iter().collect();
                for &c in &hv {
                    let mut arcs = h.clone();
                    arcs.push((c, sink));
                    let topo = Topology::from_arcs(arcs);
                    for &i in &hv {
                        if !strongly_connected_with(&hv, &h, (c, i)) {
                            continue;
                        }
                        let Some(en) = enrich(&topo, r, i, sink) else {
                            continue;
                        };
                        let total = en.total();
                        for &u in &members[&i] {
                            for &v in &members[&c] {
                                if total > table[u][v] && solve_enriched(&gp, r, u, n + v, &topo, &en.phi, &[]) {
                                    table[u][v] = total.clone();
                                    if &total >= k {
                                        found.store(true, Ordering::Relaxed);
                                        return ControlFlow::Break(());
                                    }
                                }
                            }
                        }
                    }
                }
                ControlFlow::Continue(())
            });
            table
        })
        .collect();
    if let Some(e) = error.into_inner().expect("lock") {
        return Err(e);
    }
    if found.load(Ordering::Relaxed) {
        return Ok(Rsls::FoundKPath);
    }
    let mut table = init;
    for t in tables {
        for (row, trow) in table.iter_mut().zip(t) {
            for (x, y) in row.iter_mut().zip(trow) {
                if y > *x {
                    *x = y;
                }
            }
        }
    }
    Ok(Rsls::Table(table))
}

/// Decides whether g has an r-simple walk of size at least k.
pub fn solve_directed(g: &Digraph, k: &BigUint, r: &BigUint, params: &SolverParams) -> Result<bool, SolveError> {
    if k.is_zero() {
        return Err(SolveError::ZeroK);
    }
    if r.is_zero() {
        return Err(SolveError::ZeroR);
    }
    let n = g.n();
    if n == 0 {
        return Ok(false);
    }
    if k.is_one() {
        return Ok(true);
    }
    let comps = scc(g);
    let mut comp_of = vec![0usize; n];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    let mut best: Vec<BigUint> = vec![BigUint::zero(); n];
    for (ci, comp) in comps.iter().enumerate() {
        let table = if comp.len() == 1 {
            vec![vec![BigUint::one()]]
        } else {
            let sub = g.induced(comp);
            if niceness_directed(&sub, k, r) == Niceness::NotNice {
                return Ok(true);
            }
            match rsls(&sub, k, r, params)? {
                Rsls::FoundKPath => return Ok(true),
                Rsls::Table(t) => t,
            }
        };
        for (j, &v) in comp.iter().enumerate() {
            let mut m = (0..comp.len()).map(|i| table[i][j].clone()).max().expect("nonempty");
            for (a, &w) in comp.iter().enumerate() {
                if table[a][j].is_zero() {
                    continue;
                }
                for &x in g.inn(w) {
                    if comp_of[x] != ci {
                        let cand = &best[x] + &table[a][j];
                        if cand > m {
                            m = cand;
                        }
                    }
                }
            }
            if &m >= k {
                return Ok(true);
            }
            best[v] = m;
        }
    }
    Ok(false)
}

/// Hub with r cycles of length r+1 and a 2-cycle hanging off each cycle's
/// first vertex. Returns the graph and the optimum 3r² − r.
pub fn gen_tightness_directed(r: usize) -> (Digraph, BigUint) {
    let hub = 0;
    let mut arcs = Vec::new();
    let mut next = 1;
    let mut firsts = Vec::new();
    for _ in 0..r {
        let cyc: Vec<usize> = (next..next + r).collect();
        next += r;
        arcs.push((hub, cyc[0]));
        for w in cyc.windows(2) {
            arcs.push((w[0], w[1]));
        }
        arcs.push((cyc[r - 1], hub));
        firsts.push(cyc[0]);
    }
    for &f in &firsts {
        let w = next;
        next += 1;
        arcs.push((w, f));
        arcs.push((f, w));
    }
    let k = BigUint::from(3 * r * r - r);
    (Digraph::new(next, arcs).expect("valid construction"), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_rsimple_max;

    fn b(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn solve(g: &Digraph, k: u64, r: u64) -> bool {
        solve_directed(g, &b(k), &b(r), &SolverParams::default()).unwrap()
    }

    #[test]
    fn triangle_boundary() {
        let c3 = Digraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(solve(&c3, 6, 2));
        assert!(!solve(&c3, 7, 2));
    }

    #[test]
    fn two_triangles_with_bridge() {
        let g = Digraph::new(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]).unwrap();
        assert_eq!(brute_rsimple_max(&g, &b(1), &b(100)).unwrap(), b(6));
        assert!(solve(&g, 6, 1));
        assert!(solve(&g, 4, 1));
        assert!(!solve(&g, 7, 1));
    }

    #[test]
    fn rsls_examples() {
        let two = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let p = SolverParams::default();
        assert_eq!(rsls(&two, &b(4), &b(2), &p).unwrap(), Rsls::FoundKPath);
        let Rsls::Table(t) = rsls(&two, &b(5), &b(2), &p).unwrap() else { panic!("expected a table") };
        assert_eq!(t[0][1], b(4));
        assert_eq!(t[0][0], b(3));
    }

    #[test]
    fn colorful_rsls_examples() {
        let arc = ColoredDigraph::new(Digraph::new(2, [(0, 1)]).unwrap(), vec![1, 2]).unwrap();
        assert_eq!(colorful_rsls(&arc, &b(100), &b(3), 0, 1, 10).unwrap(), b(2));
        let tri = ColoredDigraph::new(Digraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap(), vec![1, 2, 3]).unwrap();
        assert_eq!(colorful_rsls(&tri, &b(100), &b(1), 0, 2, 10).unwrap(), b(3));
        let none = ColoredDigraph::new(Digraph::new(2, [(1, 0)]).unwrap(), vec![1, 2]).unwrap();
        assert_eq!(colorful_rsls(&none, &b(100), &b(1), 0, 1, 10).unwrap(), b(0));
    }

    #[test]
    fn topology_enumeration() {
        let two = ColoredDigraph::new(Digraph::new(2, [(0, 1), (1, 0)]).unwrap(), vec![1, 2]).unwrap();
        assert_eq!(enumerate_topologies(&two, 2).len(), 3);
        let mono = ColoredDigraph::new(Digraph::new(2, [(0, 1)]).unwrap(), vec![1, 1]).unwrap();
        assert!(enumerate_topologies(&mono, 5).is_empty());
        let arc = ColoredDigraph::new(Digraph::new(2, [(0, 1)]).unwrap(), vec![1, 2]).unwrap();
        assert_eq!(enumerate_topologies(&arc, 5).len(), 1);
    }

    #[test]
    fn enrich_examples() {
        let two = Topology::from_arcs(vec![(1, 2), (2, 1)]);
        let e = enrich(&two, &b(5), 1, 2).unwrap();
        assert_eq!(e.phi, vec![b(5), b(4)]);
        let arc = Topology::from_arcs(vec![(1, 2)]);
        assert_eq!(enrich(&arc, &b(3), 1, 2).unwrap().phi, vec![b(1)]);
        assert!(enrich(&arc, &b(3), 2, 1).is_none());
    }

    #[test]
    fn solve_enriched_examples() {
        let two = Topology::from_arcs(vec![(1, 2), (2, 1)]);
        let g = ColoredDigraph::new(Digraph::new(2, [(0, 1), (1, 0)]).unwrap(), vec![1, 2]).unwrap();
        assert!(solve_enriched(&g, &b(2), 0, 1, &two, &[b(2), b(1)], &[]));
        let one_way = ColoredDigraph::new(Digraph::new(2, [(0, 1)]).unwrap(), vec![1, 2]).unwrap();
        assert!(!solve_enriched(&one_way, &b(2), 0, 1, &two, &[b(2), b(1)], &[]));
        let path = Topology::from_arcs(vec![(1, 2), (2, 3)]);
        let g = ColoredDigraph::new(Digraph::new(3, [(0, 1), (1, 2)]).unwrap(), vec![1, 2, 3]).unwrap();
        assert!(solve_enriched(&g, &b(1), 0, 2, &path, &[b(1), b(1)], &[1]));
    }

    #[test]
    fn tightness_sizes() {
        let (g, k) = gen_tightness_directed(2);
        assert_eq!(k, b(10));
        assert_eq!(g.n(), 7);
        assert_eq!(g.arc_count(), 10);
        assert_eq!(gen_tightness_directed(3).1, b(24));
    }
}
