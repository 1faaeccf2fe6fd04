//! Integral flows with lower bounds, infinite capacities and exact
//! arithmetic. Every problem is turned into a min-cost circulation and
//! solved by a primal-dual method: Dijkstra on reduced costs, then a Dinic
//! blocking flow over the zero reduced-cost arcs.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("no feasible flow")]
    Infeasible,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("arc {0} has lower bound above its upper bound")]
    BadBounds(usize),
    #[error("node {0} out of range")]
    OutOfRange(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Capacity {
    Finite(BigUint),
    Infinite,
}

impl From<u64> for Capacity {
    fn from(x: u64) -> Self {
        Capacity::Finite(BigUint::from(x))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub lower: BigUint,
    pub upper: Capacity,
    pub cost: i64,
}

impl FlowArc {
    pub fn new(from: usize, to: usize, lower: u64, upper: Capacity, cost: i64) -> Self {
        FlowArc { from, to, lower: BigUint::from(lower), upper, cost }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlowNetwork {
    pub nodes: usize,
    pub arcs: Vec<FlowArc>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { nodes, arcs: Vec::new() }
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    /// Returns the arc index.
    pub fn add_arc(&mut self, arc: FlowArc) -> usize {
        self.arcs.push(arc);
        self.arcs.len() - 1
    }

    fn validate(&self) -> Result<(), FlowError> {
        for (i, a) in self.arcs.iter().enumerate() {
            for x in [a.from, a.to] {
                if x >= self.nodes {
                    return Err(FlowError::OutOfRange(x));
                }
            }
            if let Capacity::Finite(u) = &a.upper {
                if u < &a.lower {
                    return Err(FlowError::BadBounds(i));
                }
            }
        }
        Ok(())
    }

    /// Sum of lower bounds and finite upper bounds plus `extra` plus one.
    fn infinity(&self, extra: &BigUint) -> BigUint {
        let mut s = extra + 1u32;
        for a in &self.arcs {
            s += &a.lower;
            if let Capacity::Finite(u) = &a.upper {
                s += u;
            }
        }
        s
    }

    /// True when the integral assignment meets every bound and conserves
    /// flow at every node.
    pub fn check_circulation(&self, flow: &[BigUint]) -> bool {
        if flow.len() != self.arcs.len() {
            return false;
        }
        let mut bal = vec![BigInt::zero(); self.nodes];
        for (a, f) in self.arcs.iter().zip(flow) {
            if f < &a.lower {
                return false;
            }
            if let Capacity::Finite(u) = &a.upper {
                if f > u {
                    return false;
                }
            }
            let f = BigInt::from(f.clone());
            bal[a.to] += &f;
            bal[a.from] -= &f;
        }
        bal.iter().all(Zero::is_zero)
    }

    pub fn flow_cost(&self, flow: &[BigUint]) -> BigInt {
        self.arcs.iter().zip(flow).map(|(a, f)| BigInt::from(a.cost) * BigInt::from(f.clone())).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowSolution {
    pub value: BigUint,
    pub cost: BigInt,
    pub flow: Vec<BigUint>,
}

trait FlowNum: Clone + Ord + std::fmt::Debug {
    fn nil() -> Self;
    fn from_big(x: &BigUint) -> Self;
    fn to_big(&self) -> BigInt;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn is_pos(&self) -> bool {
        *self > Self::nil()
    }
}

impl FlowNum for i128 {
    fn nil() -> Self {
        0
    }
    fn from_big(x: &BigUint) -> Self {
        x.to_i128().expect("checked magnitude")
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
}

impl FlowNum for BigInt {
    fn nil() -> Self {
        Zero::zero()
    }
    fn from_big(x: &BigUint) -> Self {
        BigInt::from(x.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
}

struct Edge<N> {
    to: usize,
    cap: N,
    cost: i64,
}

struct Engine<N> {
    n: usize,
    edges: Vec<Edge<N>>,
    adj: Vec<Vec<usize>>,
}

impl<N: FlowNum> Engine<N> {
    fn new(n: usize) -> Self {
        Engine { n, edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    fn add(&mut self, u: usize, v: usize, cap: N, cost: i64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to: v, cap, cost });
        self.edges.push(Edge { to: u, cap: N::nil(), cost: -cost });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    /// Pushes up to `limit` units (unbounded when `None`) from s to t at
    /// minimum cost. All edge costs must be nonnegative.
    fn run(&mut self, s: usize, t: usize, limit: Option<N>) -> N {
        let n = self.n;
        let mut pot = vec![0i64; n];
        let mut total = N::nil();
        loop {
            if let Some(l) = &limit {
                if &total >= l {
                    break;
                }
            }
            // Dijkstra on reduced costs.
            let mut dist = vec![i64::MAX; n];
            let mut heap = std::collections::BinaryHeap::new();
            dist[s] = 0;
            heap.push(std::cmp::Reverse((0i64, s)));
            while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &e in &self.adj[u] {
                    let ed = &self.edges[e];
                    if ed.cap.is_pos() {
                        let nd = d + ed.cost + pot[u] - pot[ed.to];
                        if nd < dist[ed.to] {
                            dist[ed.to] = nd;
                            heap.push(std::cmp::Reverse((nd, ed.to)));
                        }
                    }
                }
            }
            if dist[t] == i64::MAX {
                break;
            }
            let dt = dist[t];
            for v in 0..n {
                pot[v] += dist[v].min(dt);
            }
            let want = limit.as_ref().map(|l| l.sub(&total));
            let pushed = self.blocking(s, t, &pot, want);
            if !pushed.is_pos() {
                break;
            }
            total = total.add(&pushed);
        }
        total
    }

    fn admissible(&self, u: usize, e: usize, pot: &[i64]) -> bool {
        let ed = &self.edges[e];
        ed.cap.is_pos() && ed.cost + pot[u] - pot[ed.to] == 0
    }

    /// Max flow restricted to zero reduced-cost arcs.
    fn blocking(&mut self, s: usize, t: usize, pot: &[i64], mut want: Option<N>) -> N {
        let mut total = N::nil();
        loop {
            if want.as_ref().is_some_and(|w| !w.is_pos()) {
                break;
            }
            let mut level = vec![usize::MAX; self.n];
            level[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.edges[e].to;
                    if level[v] == usize::MAX && self.admissible(u, e, pot) {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[t] == usize::MAX {
                break;
            }
            let mut it = vec![0usize; self.n];
            loop {
                let f = self.dfs(s, t, want.clone(), &level, &mut it, pot);
                if !f.is_pos() {
                    break;
                }
                total = total.add(&f);
                if let Some(w) = &mut want {
                    *w = w.sub(&f);
                    if !w.is_pos() {
                        break;
                    }
                }
            }
        }
        total
    }

    fn dfs(&mut self, u: usize, t: usize, lim: Option<N>, level: &[usize], it: &mut [usize], pot: &[i64]) -> N {
        if u == t {
            return lim.expect("sink reached with a finite bottleneck");
        }
        while it[u] < self.adj[u].len() {
            let e = self.adj[u][it[u]];
            let v = self.edges[e].to;
            if level[v] == level[u] + 1 && self.admissible(u, e, pot) {
                let cap = self.edges[e].cap.clone();
                let l = match &lim {
                    Some(x) if x < &cap => x.clone(),
                    _ => cap,
                };
                let f = self.dfs(v, t, Some(l), level, it, pot);
                if f.is_pos() {
                    self.edges[e].cap = self.edges[e].cap.sub(&f);
                    self.edges[e ^ 1].cap = self.edges[e ^ 1].cap.add(&f);
                    return f;
                }
            }
            it[u] += 1;
        }
        N::nil()
    }
}

fn to_biguint(x: BigInt) -> BigUint {
    debug_assert!(x.sign() != Sign::Minus);
    x.to_biguint().expect("nonnegative")
}

/// Min-cost circulation honoring all bounds. `inf` stands in for infinite
/// capacities.
fn circulation<N: FlowNum>(net: &FlowNetwork, inf: &BigUint) -> Result<(Vec<BigUint>, BigInt), FlowError> {
    let n = net.nodes;
    let (ss, tt) = (n, n + 1);
    let mut eng: Engine<N> = Engine::new(n + 2);
    let mut excess = vec![BigInt::zero(); n];
    let mut handles = Vec::with_capacity(net.arcs.len());
    let mut base_cost = BigInt::zero();
    for a in &net.arcs {
        let upper = match &a.upper {
            Capacity::Finite(u) => u.clone(),
            Capacity::Infinite => inf.clone(),
        };
        let span = N::from_big(&(&upper - &a.lower));
        let base = if a.cost >= 0 { a.lower.clone() } else { upper.clone() };
        let id = if a.cost >= 0 { eng.add(a.from, a.to, span, a.cost) } else { eng.add(a.to, a.from, span, -a.cost) };
        let b = BigInt::from(base.clone());
        excess[a.to] += &b;
        excess[a.from] -= &b;
        base_cost += &b * a.cost;
        handles.push((id, base));
    }
    let mut need = BigUint::zero();
    for (v, e) in excess.iter().enumerate() {
        match e.sign() {
            Sign::Plus => {
                let m = e.magnitude();
                need += m;
                eng.add(ss, v, N::from_big(m), 0);
            }
            Sign::Minus => {
                eng.add(v, tt, N::from_big(e.magnitude()), 0);
            }
            Sign::NoSign => {}
        }
    }
    let need_n = N::from_big(&need);
    let got = eng.run(ss, tt, Some(need_n.clone()));
    if got < need_n {
        return Err(FlowError::Infeasible);
    }
    let mut flow = Vec::with_capacity(net.arcs.len());
    let mut cost = base_cost;
    for (a, (id, base)) in net.arcs.iter().zip(handles) {
        let moved = eng.edges[id ^ 1].cap.to_big();
        cost += &moved * a.cost.abs();
        let f = if a.cost >= 0 { BigInt::from(base) + moved } else { BigInt::from(base) - moved };
        flow.push(to_biguint(f));
    }
    Ok((flow, cost))
}

fn solve_circulation(net: &FlowNetwork, inf: &BigUint) -> Result<(Vec<BigUint>, BigInt), FlowError> {
    // Every intermediate value is bounded by `inf` times the arc count.
    let spread = 64 - (net.arcs.len() as u64 + net.nodes as u64 + 4).leading_zeros() as u64;
    if inf.bits() + spread < 120 {
        circulation::<i128>(net, inf)
    } else {
        circulation::<BigInt>(net, inf)
    }
}

/// True when some cycle of infinite-capacity arcs has negative total cost.
fn negative_infinite_cycle(net: &FlowNetwork) -> bool {
    let inf_arcs: Vec<&FlowArc> = net.arcs.iter().filter(|a| a.upper == Capacity::Infinite).collect();
    let mut dist = vec![0i128; net.nodes];
    for _ in 0..=net.nodes {
        let mut changed = false;
        for a in &inf_arcs {
            let nd = dist[a.from] + a.cost as i128;
            if nd < dist[a.to] {
                dist[a.to] = nd;
                changed = true;
            }
        }
        if !changed {
            return false;
        }
    }
    true
}

/// Maximum s-t flow; lower bounds must be zero.
pub fn max_flow(net: &FlowNetwork, s: usize, t: usize) -> Result<FlowSolution, FlowError> {
    net.validate()?;
    for x in [s, t] {
        if x >= net.nodes {
            return Err(FlowError::OutOfRange(x));
        }
    }
    if net.arcs.iter().any(|a| !a.lower.is_zero()) {
        return Err(FlowError::BadBounds(net.arcs.iter().position(|a| !a.lower.is_zero()).unwrap_or(0)));
    }
    if s == t {
        return Ok(FlowSolution { value: BigUint::zero(), cost: BigInt::zero(), flow: vec![BigUint::zero(); net.arcs.len()] });
    }
    let inf = net.infinity(&BigUint::zero());
    let mut aux = net.clone();
    aux.arcs.iter_mut().for_each(|a| a.cost = 0);
    aux.add_arc(FlowArc { from: t, to: s, lower: BigUint::zero(), upper: Capacity::Infinite, cost: -1 });
    // The return arc is capped at `inf`, so a saturated one means unbounded.
    let (mut flow, _) = solve_circulation(&aux, &inf)?;
    let value = flow.pop().expect("return arc");
    if value >= inf {
        return Err(FlowError::Unbounded);
    }
    Ok(FlowSolution { value, cost: BigInt::zero(), flow })
}

/// Minimum cost of an integral s-t flow of value exactly `f` honoring all
/// bounds. Every other node is conserved.
pub fn min_cost_flow(net: &FlowNetwork, s: usize, t: usize, f: &BigUint) -> Result<FlowSolution, FlowError> {
    net.validate()?;
    for x in [s, t] {
        if x >= net.nodes {
            return Err(FlowError::OutOfRange(x));
        }
    }
    if negative_infinite_cycle(net) {
        return Err(FlowError::Unbounded);
    }
    let inf = net.infinity(f);
    let mut aux = net.clone();
    if s != t {
        aux.add_arc(FlowArc { from: t, to: s, lower: f.clone(), upper: Capacity::Finite(f.clone()), cost: 0 });
    } else if !f.is_zero() {
        return Err(FlowError::Infeasible);
    }
    let (mut flow, cost) = solve_circulation(&aux, &inf)?;
    if s != t {
        flow.pop();
    }
    Ok(FlowSolution { value: f.clone(), cost, flow })
}

/// Feasible circulation maximizing the total flow on `objective` arcs.
/// `value` of the result holds that maximum.
pub fn max_value_circulation_with_lower_bounds(net: &FlowNetwork, objective: &[usize]) -> Result<FlowSolution, FlowError> {
    net.validate()?;
    let mut aux = net.clone();
    aux.arcs.iter_mut().for_each(|a| a.cost = 0);
    for &i in objective {
        if i >= aux.arcs.len() {
            return Err(FlowError::OutOfRange(i));
        }
        aux.arcs[i].cost = -1;
    }
    if negative_infinite_cycle(&aux) {
        // Still report infeasibility first.
        let inf = aux.infinity(&BigUint::zero());
        let mut probe = net.clone();
        probe.arcs.iter_mut().for_each(|a| a.cost = 0);
        solve_circulation(&probe, &inf)?;
        return Err(FlowError::Unbounded);
    }
    let inf = aux.infinity(&BigUint::zero());
    let (flow, cost) = solve_circulation(&aux, &inf)?;
    let value = to_biguint(-cost);
    Ok(FlowSolution { value, cost: BigInt::zero(), flow })
}
