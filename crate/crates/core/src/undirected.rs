//! Undirected r-simple k-path: niceness shortcut, then either the
//! occurrence-sequence pipeline with the treewidth-2 component DP, or (when
//! r² > k) the vertex-cover pipeline that splits a solution into a short walk
//! and an edge-multiplicity function decided by min-cost flow.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::colorings::ColoringFamily;
use crate::directed::{choose_family, resolve_bound, SolveError, SolverParams};
use crate::flow::{min_cost_flow, Capacity, FlowArc, FlowNetwork};
use crate::graph::{vertex_cover_from, ColoredUGraph, UGraph};
use crate::longpath::{niceness_undirected, Niceness};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Pipeline {
    #[default]
    Auto,
    General,
    Special,
}

/// Size threshold used by the edge-fit test. `Half` requires
/// Σd + ½Σφ ≥ k, `Full` requires Σd + Σφ ≥ k.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FitThreshold {
    #[default]
    Half,
    Full,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UndirSolverParams {
    pub base: SolverParams,
    pub pipeline: Pipeline,
    pub fit: FitThreshold,
}

/// Per-color visit counts; `d[i]` belongs to color `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccurrenceSequence {
    pub d: Vec<u64>,
}

impl OccurrenceSequence {
    pub fn get(&self, color: u32) -> u64 {
        self.d.get(color as usize - 1).copied().unwrap_or(0)
    }

    pub fn sum(&self) -> u64 {
        self.d.iter().sum()
    }
}

/// 30·⌈k/r⌉ + 1.
pub fn default_bound_undirected(k: &BigUint, r: &BigUint) -> BigUint {
    k.div_ceil(r) * 30u32 + 1u32
}

struct Meter {
    used: u64,
    limit: u64,
}

impl Meter {
    fn new(limit: u64) -> Self {
        Meter { used: 0, limit }
    }

    fn tick(&mut self, n: u64) -> Result<(), SolveError> {
        self.used = self.used.saturating_add(n);
        if self.used > self.limit {
            Err(SolveError::BudgetExceeded(self.limit))
        } else {
            Ok(())
        }
    }
}

/// Colors of `g` mapped to dense indices `0..m`, plus the palette itself.
fn dense_colors(colors: &[u32]) -> (Vec<usize>, Vec<u32>) {
    let mut palette: Vec<u32> = colors.to_vec();
    palette.sort_unstable();
    palette.dedup();
    let idx = colors.iter().map(|c| palette.binary_search(c).expect("present")).collect();
    (idx, palette)
}

fn small(x: &BigUint, limit: u64) -> Result<u64, SolveError> {
    x.to_u64().ok_or(SolveError::BudgetExceeded(limit))
}

/// Odometer over sequences with support in the active colors.
pub struct OccurrenceSequences {
    b: usize,
    r: u64,
    active: Vec<usize>,
    cur: Vec<u64>,
    sum: u64,
    done: bool,
}

impl Iterator for OccurrenceSequences {
    type Item = OccurrenceSequence;

    fn next(&mut self) -> Option<OccurrenceSequence> {
        if self.done {
            return None;
        }
        let mut d = vec![0u64; self.b];
        for (&pos, &x) in self.active.iter().zip(&self.cur) {
            d[pos] = x;
        }
        let out = OccurrenceSequence { d };
        let limit = 2 * self.b as u64;
        let mut i = 0;
        loop {
            if i == self.cur.len() {
                self.done = true;
                break;
            }
            if self.cur[i] < self.r && self.sum < limit {
                self.cur[i] += 1;
                self.sum += 1;
                break;
            }
            self.sum -= self.cur[i];
            self.cur[i] = 0;
            i += 1;
        }
        Some(out)
    }
}

/// All sequences of length b with d_i ≤ r, Σd ≤ 2b and support inside
/// `active` (colors in `1..=b`).
pub fn enumerate_occurrence_sequences(b: usize, r: u64, active: &[u32]) -> OccurrenceSequences {
    let mut pos: Vec<usize> = active.iter().filter(|&&c| c >= 1 && (c as usize) <= b).map(|&c| c as usize - 1).collect();
    pos.sort_unstable();
    pos.dedup();
    let n = pos.len();
    OccurrenceSequences { b, r, active: pos, cur: vec![0; n], sum: 0, done: false }
}

/// Every per-color count vector realized by some walk with at most `smax`
/// visits and at most `rcap` visits per color (and at most `limit[c]` when given).
fn walk_reach(
    g: &UGraph,
    col: &[usize],
    m: usize,
    rcap: u32,
    smax: u32,
    limit: Option<&[u32]>,
    meter: &mut Meter,
) -> Result<Vec<Vec<u32>>, SolveError> {
    let caps: Vec<u32> = (0..m).map(|c| limit.map_or(rcap, |l| l[c].min(rcap))).collect();
    let top = caps.iter().copied().max().unwrap_or(0).min(smax);
    let bits = 32 - top.leading_zeros();
    if bits as usize * m <= 128 {
        walk_reach_packed(g, col, &caps, smax, bits.max(1), meter)
    } else {
        walk_reach_vec(g, col, &caps, smax, meter)
    }
}

fn walk_reach_packed(g: &UGraph, col: &[usize], caps: &[u32], smax: u32, bits: u32, meter: &mut Meter) -> Result<Vec<Vec<u32>>, SolveError> {
    let m = caps.len();
    let mask = (1u128 << bits) - 1;
    let get = |key: u128, c: usize| ((key >> (c as u32 * bits)) & mask) as u32;
    let one = |c: usize| 1u128 << (c as u32 * bits);
    let mut seen: FxHashSet<(u32, u128)> = FxHashSet::default();
    let mut stack = Vec::new();
    if smax >= 1 {
        for v in 0..g.n() {
            if caps[col[v]] >= 1 && seen.insert((v as u32, one(col[v]))) {
                stack.push((v, one(col[v]), 1u32));
            }
        }
    }
    while let Some((v, key, s)) = stack.pop() {
        meter.tick(1)?;
        if s == smax {
            continue;
        }
        for &u in g.neighbors(v) {
            let c = col[u];
            if get(key, c) < caps[c] {
                let next = key + one(c);
                if seen.insert((u as u32, next)) {
                    stack.push((u, next, s + 1));
                }
            }
        }
    }
    let keys: FxHashSet<u128> = seen.into_iter().map(|(_, k)| k).collect();
    Ok(keys.into_iter().map(|k| (0..m).map(|c| get(k, c)).collect()).collect())
}

fn walk_reach_vec(g: &UGraph, col: &[usize], caps: &[u32], smax: u32, meter: &mut Meter) -> Result<Vec<Vec<u32>>, SolveError> {
    let m = caps.len();
    let mut seen: FxHashSet<(u32, Vec<u32>)> = FxHashSet::default();
    let mut stack = Vec::new();
    if smax >= 1 {
        for v in 0..g.n() {
            if caps[col[v]] >= 1 {
                let mut d = vec![0u32; m];
                d[col[v]] = 1;
                if seen.insert((v as u32, d.clone())) {
                    stack.push((v, d, 1u32));
                }
            }
        }
    }
    while let Some((v, d, s)) = stack.pop() {
        meter.tick(1)?;
        if s == smax {
            continue;
        }
        for &u in g.neighbors(v) {
            let c = col[u];
            if d[c] < caps[c] {
                let mut e = d.clone();
                e[c] += 1;
                if seen.insert((u as u32, e.clone())) {
                    stack.push((u, e, s + 1));
                }
            }
        }
    }
    let keys: FxHashSet<Vec<u32>> = seen.into_iter().map(|(_, d)| d).collect();
    Ok(keys.into_iter().collect())
}

/// True when g has a walk visiting color i exactly `d_i` times.
pub fn walk_fit_exists(g: &ColoredUGraph, d: &OccurrenceSequence) -> bool {
    let (col, palette) = dense_colors(&g.colors);
    let target: Vec<u32> = palette.iter().map(|&c| g_u32(d.get(c))).collect();
    let total: u64 = target.iter().map(|&x| x as u64).sum();
    if total == 0 || total != d.sum() {
        return false;
    }
    let mut meter = Meter::new(u64::MAX);
    let smax = total.min(u32::MAX as u64) as u32;
    walk_reach(&g.graph, &col, palette.len(), u32::MAX, smax, Some(&target), &mut meter)
        .map(|set| set.contains(&target))
        .unwrap_or(false)
}

fn g_u32(x: u64) -> u32 {
    x.min(u32::MAX as u64) as u32
}

// ---------------------------------------------------------------------------
// Treewidth-2 component DP over hidden nice tree decompositions.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
struct Bag {
    len: u8,
    u: [u8; 3],
    f: [u32; 3],
    g: [u32; 3],
    s: [u8; 3],
}

/// Slot of the position pair (i, j), i < j, in `Bag::g`.
fn pair(i: usize, j: usize) -> usize {
    i + j - 1
}

impl Bag {
    fn pos(&self, v: u8) -> Option<usize> {
        (0..self.len as usize).find(|&i| self.u[i] == v)
    }

    fn mult(&self, a: u8, b: u8) -> u32 {
        match (self.pos(a), self.pos(b)) {
            (Some(i), Some(j)) if i != j => self.g[pair(i.min(j), i.max(j))],
            _ => 0,
        }
    }

    fn gsum(&self) -> u32 {
        self.g.iter().sum()
    }
}

/// Canonical bag from (vertex, degree, block label) triples.
fn bag_from(items: &mut [(u8, u32, u8)], mult: impl Fn(u8, u8) -> u32) -> Bag {
    items.sort_unstable_by_key(|x| x.0);
    let mut b = Bag { len: items.len() as u8, ..Bag::default() };
    let mut relabel = [u8::MAX; 8];
    let mut next = 0;
    for (i, &(v, f, lab)) in items.iter().enumerate() {
        b.u[i] = v;
        b.f[i] = f;
        if relabel[lab as usize] == u8::MAX {
            relabel[lab as usize] = next;
            next += 1;
        }
        b.s[i] = relabel[lab as usize];
    }
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            b.g[pair(i, j)] = mult(b.u[i], b.u[j]);
        }
    }
    b
}

type Entry = (u64, Bag);
type GroupKey = (u8, [u8; 3], [u32; 3]);

struct Tw2<'a> {
    adj: &'a [Vec<bool>],
    bit: Vec<u64>,
    cap: Vec<u32>,
    meter: &'a mut Meter,
}

impl Tw2<'_> {
    fn colmask(&self, b: &Bag) -> u64 {
        (0..b.len as usize).fold(0, |m, i| m | self.bit[b.u[i] as usize])
    }

    fn put(&mut self, map: &mut FxHashMap<Entry, u64>, key: Entry, m: u64) -> Result<(), SolveError> {
        self.meter.tick(1)?;
        let e = map.entry(key).or_insert(m);
        if *e < m {
            *e = m;
        }
        Ok(())
    }

    fn introduce(&mut self, c: u64, b: &Bag, m: u64, v: u8, out: &mut FxHashMap<Entry, u64>) -> Result<(), SolveError> {
        let vi = v as usize;
        let len = b.len as usize;
        let nb: Vec<usize> = (0..len).filter(|&i| self.adj[b.u[i] as usize][vi]).collect();
        let cv = self.cap[vi];
        let rooms: Vec<u32> = (0..len).map(|i| self.cap[b.u[i] as usize] - b.f[i]).collect();
        let room = |i: usize| rooms[i];
        let r0 = nb.first().map_or(0, |&i| room(i).min(cv));
        for g0 in 0..=r0 {
            let r1 = nb.get(1).map_or(0, |&i| room(i).min(cv - g0));
            for g1 in 0..=r1 {
                let gv = |i: usize| {
                    if nb.first() == Some(&i) {
                        g0
                    } else if nb.get(1) == Some(&i) {
                        g1
                    } else {
                        0
                    }
                };
                let mut labels: Vec<u8> = (0..len).map(|i| b.s[i]).collect();
                labels.push(3);
                for i in 0..len {
                    if gv(i) >= 1 {
                        let old = labels[i];
                        for l in labels.iter_mut() {
                            if *l == old {
                                *l = 3;
                            }
                        }
                    }
                }
                let mut items: Vec<(u8, u32, u8)> = (0..len).map(|i| (b.u[i], b.f[i] + gv(i), labels[i])).collect();
                items.push((v, g0 + g1, 3));
                let nbag = bag_from(&mut items, |x, y| {
                    if x == v || y == v {
                        let o = if x == v { y } else { x };
                        b.pos(o).map_or(0, gv)
                    } else {
                        b.mult(x, y)
                    }
                });
                self.put(out, (c | self.bit[vi], nbag), m + (g0 + g1) as u64)?;
            }
        }
        Ok(())
    }

    fn forget(&self, b: &Bag, p: usize) -> Option<Bag> {
        let len = b.len as usize;
        if len < 2 || b.f[p] % 2 != 0 || (0..len).filter(|&i| b.s[i] == b.s[p]).count() < 2 {
            return None;
        }
        let mut items: Vec<(u8, u32, u8)> = (0..len).filter(|&i| i != p).map(|i| (b.u[i], b.f[i], b.s[i])).collect();
        Some(bag_from(&mut items, |x, y| b.mult(x, y)))
    }

    fn join(&self, a: (u64, &Bag, u64), b: (u64, &Bag, u64)) -> Option<(Entry, u64)> {
        let (c1, b1, m1) = a;
        let (c2, b2, m2) = b;
        let cu = self.colmask(b1);
        if c1 & c2 != cu || c1 == cu || c2 == cu {
            return None;
        }
        let len = b1.len as usize;
        let mut out = *b1;
        for i in 0..len {
            let gs: u32 = (0..len).filter(|&j| j != i).map(|j| b1.g[pair(i.min(j), i.max(j))]).sum();
            let f = b1.f[i] + b2.f[i] - gs;
            if f > self.cap[b1.u[i] as usize] {
                return None;
            }
            out.f[i] = f;
        }
        let mut lab = [0u8, 1, 2];
        for i in 0..len {
            for j in i + 1..len {
                if b1.s[i] == b1.s[j] || b2.s[i] == b2.s[j] {
                    let (from, to) = (lab[j], lab[i]);
                    for l in lab.iter_mut() {
                        if *l == from {
                            *l = to;
                        }
                    }
                }
            }
        }
        let mut items: Vec<(u8, u32, u8)> = (0..len).map(|i| (out.u[i], out.f[i], lab[i])).collect();
        let nbag = bag_from(&mut items, |x, y| b1.mult(x, y));
        Some(((c1 | c2, nbag), m1 + m2 - b1.gsum() as u64))
    }

    /// Best edge count of a connected even colorful multigraph of
    /// treewidth ≤ 2, keyed by its exact color set.
    fn run(&mut self) -> Result<FxHashMap<u64, u64>, SolveError> {
        let n = self.cap.len();
        let all: u64 = self.bit.iter().fold(0, |m, b| m | b);
        let levels = all.count_ones() as usize;
        let mut pending: Vec<FxHashMap<Entry, u64>> = (0..=levels).map(|_| FxHashMap::default()).collect();
        let mut groups: FxHashMap<GroupKey, Vec<(u64, Bag, u64)>> = FxHashMap::default();
        let mut prev: FxHashMap<Entry, u64> = FxHashMap::default();
        prev.insert((0, Bag::default()), 0);
        let mut exact: FxHashMap<u64, u64> = FxHashMap::default();
        for level in 1..=levels {
            let mut cur = std::mem::take(&mut pending[level]);
            for (&(c, b), &m) in &prev {
                if b.len >= 3 {
                    continue;
                }
                for v in 0..n {
                    if c & self.bit[v] == 0 && b.pos(v as u8).is_none() {
                        self.introduce(c, &b, m, v as u8, &mut cur)?;
                    }
                }
            }
            for size in [3u8, 2] {
                let snapshot: Vec<(Entry, u64)> = cur.iter().filter(|((_, b), _)| b.len == size).map(|(k, &m)| (*k, m)).collect();
                for ((c, b), m) in snapshot {
                    for p in 0..size as usize {
                        if let Some(nb) = self.forget(&b, p) {
                            self.put(&mut cur, (c, nb), m)?;
                        }
                    }
                }
            }
            for (&(c, b), &m) in &cur {
                let len = b.len as usize;
                if len >= 1 && (0..len).all(|i| b.s[i] == 0 && b.f[i] % 2 == 0) {
                    let e = exact.entry(c).or_insert(m);
                    *e = (*e).max(m);
                }
                let key = (b.len, b.u, b.g);
                let group = groups.entry(key).or_default();
                self.meter.tick(group.len() as u64)?;
                for &(c2, ref b2, m2) in group.iter() {
                    if let Some(((jc, jb), jm)) = self.join((c, &b, m), (c2, b2, m2)) {
                        let slot = &mut pending[jc.count_ones() as usize];
                        let e = slot.entry((jc, jb)).or_insert(jm);
                        *e = (*e).max(jm);
                    }
                }
                group.push((c, b, m));
            }
            prev = cur;
        }
        Ok(exact)
    }
}

/// Exact-color-set table for the multigraphs built on `verts` (vertices of
/// `g`) with degree caps `cap`.
fn tw2_table(g: &UGraph, verts: &[usize], bit: &[u64], cap: &[u32], meter: &mut Meter) -> Result<FxHashMap<u64, u64>, SolveError> {
    let adj: Vec<Vec<bool>> = verts.iter().map(|&a| verts.iter().map(|&b| g.has_edge(a, b)).collect()).collect();
    let mut dp = Tw2 { adj: &adj, bit: verts.iter().map(|&v| bit[v]).collect(), cap: verts.iter().map(|&v| cap[v]).collect(), meter };
    dp.run()
}

/// Degree cap 2(r − d_c) per vertex, saturated at `ceiling`.
fn degree_caps(col: &[usize], d: &[u32], r: u64, ceiling: u64) -> Vec<u32> {
    col.iter().map(|&c| (2 * r.saturating_sub(d[c] as u64)).min(ceiling).min(u32::MAX as u64 / 4) as u32).collect()
}

/// Largest edge count (with multiplicities) of a connected, even, colorful
/// multigraph of treewidth at most 2 that contains `v_star`, uses only
/// colors from `colors`, and gives each color-i vertex degree at most
/// 2(r − d_i). `None` when no such multigraph exists.
pub fn tw2_component_max(
    g: &ColoredUGraph,
    colors: &[u32],
    v_star: usize,
    d: &OccurrenceSequence,
    r: &BigUint,
) -> Result<Option<u64>, SolveError> {
    let limit = u64::MAX;
    if v_star >= g.n() || !colors.contains(&g.color(v_star)) {
        return Ok(None);
    }
    let rv = small(r, limit)?;
    let (col, palette) = dense_colors(&g.colors);
    if palette.len() > 64 {
        return Err(SolveError::BudgetExceeded(limit));
    }
    let dd: Vec<u32> = palette.iter().map(|&c| g_u32(d.get(c))).collect();
    let cap = degree_caps(&col, &dd, rv, u64::MAX);
    let bit: Vec<u64> = col.iter().map(|&c| 1u64 << c).collect();
    let sc = g.color(v_star);
    let verts: Vec<usize> = (0..g.n()).filter(|&v| v == v_star || (colors.contains(&g.color(v)) && g.color(v) != sc)).collect();
    let mut meter = Meter::new(limit);
    let exact = tw2_table(&g.graph, &verts, &bit, &cap, &mut meter)?;
    let want = bit[v_star];
    let best = exact.iter().filter(|(&c, _)| c & want != 0).map(|(_, &m)| m).max();
    Ok(Some(best.unwrap_or(0)))
}

// ---------------------------------------------------------------------------
// Walk / treewidth-2 partition.

struct Partition<'a> {
    g: &'a UGraph,
    col: &'a [usize],
    bit: Vec<u64>,
    cap: Vec<u32>,
    stride: Vec<u64>,
    /// Exact tables, shared by color classes of size one under key `usize::MAX`.
    tables: FxHashMap<usize, FxHashMap<u64, u64>>,
    class_size: Vec<usize>,
    comp: FxHashMap<(u32, u64), u64>,
    memo: FxHashMap<(u32, u64, u64), Option<u64>>,
    meter: &'a mut Meter,
}

impl Partition<'_> {
    /// A_{C'}(v): best component at v using colors inside `c`, or 0.
    fn component(&mut self, v: usize, c: u64) -> Result<u64, SolveError> {
        if let Some(&a) = self.comp.get(&(v as u32, c)) {
            return Ok(a);
        }
        let key = if self.class_size[self.col[v]] == 1 { usize::MAX } else { v };
        if !self.tables.contains_key(&key) {
            let verts: Vec<usize> = (0..self.g.n())
                .filter(|&w| self.cap[w] > 0 && (key == usize::MAX || w == v || self.col[w] != self.col[v]))
                .collect();
            let t = tw2_table(self.g, &verts, &self.bit, &self.cap, self.meter)?;
            self.tables.insert(key, t);
        }
        let want = self.bit[v];
        let a = self.tables[&key].iter().filter(|(&x, _)| x & want != 0 && x & !c == 0).map(|(_, &m)| m).max().unwrap_or(0);
        self.comp.insert((v as u32, c), a);
        Ok(a)
    }

    /// Largest (walk edges + H edges) for walks ending at v with counts `d`
    /// and components colored inside `c`; `None` is the absent value.
    fn value(&mut self, v: usize, d: &mut [u32], idx: u64, sum: u32, c: u64) -> Result<Option<u64>, SolveError> {
        let cv = self.col[v];
        if d[cv] == 0 {
            return Ok(None);
        }
        if sum == 1 {
            return Ok(Some(if c & self.bit[v] != 0 { self.component(v, c)? } else { 0 }));
        }
        let key = (v as u32, idx, c);
        if let Some(&x) = self.memo.get(&key) {
            return Ok(x);
        }
        self.meter.tick(1)?;
        d[cv] -= 1;
        let nidx = idx - self.stride[cv];
        let mut best: Option<u64> = None;
        let nbrs: Vec<usize> = self.g.neighbors(v).to_vec();
        for u in nbrs {
            if let Some(x) = self.value(u, d, nidx, sum - 1, c)? {
                best = Some(best.map_or(x + 1, |b| b.max(x + 1)));
            }
            if c & self.bit[v] == 0 {
                continue;
            }
            let rest = c & !self.bit[v];
            let mut sub = rest;
            loop {
                let cp = sub | self.bit[v];
                let a = self.component(v, cp)?;
                if a > 0 {
                    if let Some(x) = self.value(u, d, nidx, sum - 1, c & !cp)? {
                        let cand = a + 1 + x;
                        best = Some(best.map_or(cand, |b| b.max(cand)));
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        d[cv] += 1;
        self.memo.insert(key, best);
        Ok(best)
    }
}

fn partition_dense(g: &UGraph, col: &[usize], m: usize, k: u64, r: u64, d: &[u32], meter: &mut Meter) -> Result<bool, SolveError> {
    if m > 64 {
        return Err(SolveError::BudgetExceeded(meter.limit));
    }
    let sum: u32 = d.iter().sum();
    if sum == 0 {
        return Ok(k == 0);
    }
    let mut stride = vec![0u64; m];
    let mut acc: u64 = 1;
    for c in 0..m {
        stride[c] = acc;
        acc = acc.checked_mul(d[c] as u64 + 1).ok_or(SolveError::BudgetExceeded(meter.limit))?;
    }
    let idx: u64 = (0..m).map(|c| stride[c] * d[c] as u64).sum();
    let mut class_size = vec![0usize; m];
    for &c in col {
        class_size[c] += 1;
    }
    let all: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut p = Partition {
        g,
        col,
        bit: col.iter().map(|&c| 1u64 << c).collect(),
        cap: degree_caps(col, d, r, 2 * k),
        stride,
        tables: FxHashMap::default(),
        class_size,
        comp: FxHashMap::default(),
        memo: FxHashMap::default(),
        meter,
    };
    let mut dd = d.to_vec();
    for v in 0..g.n() {
        if let Some(x) = p.value(v, &mut dd, idx, sum, all)? {
            if x + 1 >= k {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Decides whether a good pair (W, H) complying with d̄ exists: W visits
/// color i exactly d_i times, H is a colorful even multigraph of treewidth
/// ≤ 2 whose components all touch W, color-i vertices have H-degree at most
/// 2(r − d_i), and W's edges plus H's edges number at least k − 1.
pub fn walk_tw2_partition(g: &ColoredUGraph, k: &BigUint, r: &BigUint, d: &OccurrenceSequence) -> Result<bool, SolveError> {
    walk_tw2_partition_budget(g, k, r, d, u64::MAX)
}

pub fn walk_tw2_partition_budget(g: &ColoredUGraph, k: &BigUint, r: &BigUint, d: &OccurrenceSequence, budget: u64) -> Result<bool, SolveError> {
    let kv = small(k, budget)?;
    let rv = small(r, budget)?;
    let (col, palette) = dense_colors(&g.colors);
    let dd: Vec<u32> = palette.iter().map(|&c| g_u32(d.get(c))).collect();
    if dd.iter().map(|&x| x as u64).sum::<u64>() != d.sum() || dd.iter().any(|&x| x as u64 > rv) {
        return Ok(false);
    }
    let mut meter = Meter::new(budget);
    partition_dense(&g.graph, &col, palette.len(), kv, rv, &dd, &mut meter)
}

fn general_colorful(g: &ColoredUGraph, k: u64, r: u64, b: u64, budget: u64) -> Result<bool, SolveError> {
    let (col, palette) = dense_colors(&g.colors);
    let m = palette.len();
    if (m as u64).saturating_mul(r) < k {
        return Ok(false);
    }
    let smax = (2 * b).min(k).min(u32::MAX as u64) as u32;
    let rcap = r.min(u32::MAX as u64) as u32;
    let mut meter = Meter::new(budget);
    let mut seqs = walk_reach(&g.graph, &col, m, rcap, smax, None, &mut meter)?;
    seqs.sort_unstable_by(|a, b| b.iter().sum::<u32>().cmp(&a.iter().sum::<u32>()).then_with(|| a.cmp(b)));
    for d in seqs {
        if partition_dense(&g.graph, &col, m, k, r, &d, &mut meter)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Runs `f` on every coloring of `fam` until one accepts or one fails.
fn any_coloring(fam: &ColoringFamily, f: impl Fn(&[u32]) -> Result<bool, SolveError> + Sync) -> Result<bool, SolveError> {
    let stop = AtomicBool::new(false);
    let error: Mutex<Option<SolveError>> = Mutex::new(None);
    let found = fam.iter().par_bridge().any(|col| {
        if stop.load(Ordering::Relaxed) {
            return false;
        }
        match f(&col.colors) {
            Ok(x) => x,
            Err(e) => {
                stop.store(true, Ordering::Relaxed);
                error.lock().expect("lock").get_or_insert(e);
                false
            }
        }
    });
    if found {
        return Ok(true);
    }
    match error.into_inner().expect("lock") {
        Some(e) => Err(e),
        None => Ok(false),
    }
}

/// General pipeline on one connected nice graph: every coloring of `fam`,
/// every walk-realizable occurrence sequence, then the partition DP.
pub fn colorful_wrapper(g: &UGraph, k: &BigUint, r: &BigUint, b: u64, fam: &ColoringFamily, params: &SolverParams) -> Result<bool, SolveError> {
    let budget = params.work_budget;
    let kv = small(k, budget)?;
    let rv = small(r, budget)?;
    any_coloring(fam, |colors| {
        let cg = ColoredUGraph::new(g.clone(), colors.to_vec()).expect("total coloring");
        general_colorful(&cg, kv, rv, b, budget)
    })
}

// ---------------------------------------------------------------------------
// Special pipeline (r² > k).

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchingOutcome {
    Yes,
    VertexCover(Vec<usize>),
}

/// Maximum matching (Edmonds) as vertex pairs.
fn maximum_matching(g: &UGraph) -> Vec<(usize, usize)> {
    let pg = petgraph::graph::UnGraph::<(), ()>::from_edges(g.edges().into_iter().map(|(u, v)| (u as u32, v as u32)));
    let mut m: Vec<(usize, usize)> = petgraph::algo::maximum_matching(&pg).edges().map(|(a, b)| (a.index(), b.index())).collect();
    m.sort_unstable();
    m
}

/// Yes when a maximum matching has at least ⌈k/r⌉ edges, otherwise its
/// matched vertices as a vertex cover.
pub fn matching_shortcut(g: &UGraph, k: &BigUint, r: &BigUint) -> MatchingOutcome {
    let m = maximum_matching(g);
    if BigUint::from(m.len()) >= k.div_ceil(r) {
        MatchingOutcome::Yes
    } else {
        MatchingOutcome::VertexCover(vertex_cover_from(&m))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitSpec {
    pub graph: ColoredUGraph,
    pub d: OccurrenceSequence,
    pub cover: Vec<usize>,
    pub k: BigUint,
    pub r: BigUint,
    pub threshold: FitThreshold,
}

/// Required Σφ for the threshold, or `None` when any φ (including 0) will do.
fn required_phi(k: &BigUint, sum_d: u64, threshold: FitThreshold) -> Option<BigUint> {
    let sd = BigUint::from(sum_d);
    if &sd >= k {
        return None;
    }
    let gap = k - sd;
    Some(match threshold {
        FitThreshold::Half => gap * 2u32,
        FitThreshold::Full => gap,
    })
}

/// Min-cost flow test: F units through the split network, accept iff the
/// cost C satisfies C ≤ F − ℓ.
fn edge_fit_flow(g: &UGraph, caps: &[BigUint], ell: &BigInt) -> bool {
    let n = g.n();
    let mut net = FlowNetwork::new(2 * n + 2);
    let (s, t) = (2 * n, 2 * n + 1);
    let mut total = BigUint::zero();
    for v in 0..n {
        net.add_arc(FlowArc::new(2 * v, 2 * v + 1, 0, Capacity::Infinite, 1));
        net.add_arc(FlowArc::new(s, 2 * v, 0, Capacity::Finite(caps[v].clone()), 0));
        net.add_arc(FlowArc::new(2 * v + 1, t, 0, Capacity::Finite(caps[v].clone()), 0));
        total += &caps[v];
    }
    for (u, v) in g.edges() {
        net.add_arc(FlowArc::new(2 * u, 2 * v + 1, 0, Capacity::Infinite, 0));
        net.add_arc(FlowArc::new(2 * v, 2 * u + 1, 0, Capacity::Infinite, 0));
    }
    match min_cost_flow(&net, s, t, &total) {
        Ok(sol) => sol.cost <= BigInt::from(total) - ell,
        Err(_) => false,
    }
}

/// True when some φ: E → ℕ has every vertex's incident sum even and at most
/// 2(r − d_i), and meets the size threshold.
pub fn edge_fit_exists(spec: &FitSpec) -> bool {
    let g = &spec.graph;
    let mut caps = Vec::with_capacity(g.n());
    for v in 0..g.n() {
        let d = BigUint::from(spec.d.get(g.color(v)));
        if d > spec.r {
            return false;
        }
        caps.push(&spec.r - d);
    }
    let ell = match required_phi(&spec.k, spec.d.sum(), spec.threshold) {
        Some(x) => BigInt::from(x),
        None => BigInt::zero(),
    };
    edge_fit_flow(&g.graph, &caps, &ell)
}

/// Special colorful step: for every U' ⊆ U, delete X and search occurrence
/// sequences positive on U' for a walk fit and an edge fit.
pub fn special_colorful(g: &ColoredUGraph, k: &BigUint, r: &BigUint, cover: &[usize], b: u64, fit: FitThreshold) -> Result<bool, SolveError> {
    special_colorful_budget(g, k, r, cover, b, fit, u64::MAX)
}

pub fn special_colorful_budget(
    g: &ColoredUGraph,
    k: &BigUint,
    r: &BigUint,
    cover: &[usize],
    b: u64,
    fit: FitThreshold,
    budget: u64,
) -> Result<bool, SolveError> {
    let n = g.n();
    let mut cover = cover.to_vec();
    cover.sort_unstable();
    cover.dedup();
    let ucolors: Vec<u32> = cover.iter().map(|&u| g.color(u)).collect();
    let mut sorted = ucolors.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != ucolors.len() {
        return Ok(false);
    }
    if cover.len() >= 63 {
        return Err(SolveError::BudgetExceeded(budget));
    }
    let in_cover: Vec<bool> = (0..n).map(|v| cover.binary_search(&v).is_ok()).collect();
    let smax64 = b.saturating_mul(2).min(k.to_u64().unwrap_or(u64::MAX));
    let smax = smax64.min(u32::MAX as u64) as u32;
    let rcap = r.to_u64().unwrap_or(u64::MAX).min(smax as u64) as u32;
    let mut meter = Meter::new(budget);
    let kk = k.to_u64().unwrap_or(u64::MAX);
    let rr = r.to_u64().unwrap_or(u64::MAX);
    for mask in (0u64..(1u64 << cover.len())).rev() {
        meter.tick(1)?;
        // Every φ-edge touches U' and every other walk visit sits next to a
        // U' visit, so the size is at most 2|U'|r + 1.
        let size = mask.count_ones() as u64;
        if size.saturating_mul(2).saturating_mul(rr).saturating_add(1) < kk {
            continue;
        }
        let chosen: Vec<usize> = (0..cover.len()).filter(|&i| mask >> i & 1 == 1).map(|i| cover[i]).collect();
        let chosen_colors: Vec<u32> = chosen.iter().map(|&u| g.color(u)).collect();
        let keep: Vec<usize> = (0..n)
            .filter(|&v| if in_cover[v] { chosen.contains(&v) } else { !chosen_colors.contains(&g.color(v)) })
            .collect();
        if keep.is_empty() {
            continue;
        }
        let sub = g.graph.induced(&keep);
        let sub_colors: Vec<u32> = keep.iter().map(|&v| g.color(v)).collect();
        let (col, palette) = dense_colors(&sub_colors);
        let must: Vec<usize> = chosen_colors.iter().map(|c| palette.binary_search(c).expect("kept")).collect();
        let seqs = walk_reach(&sub, &col, palette.len(), rcap, smax, None, &mut meter)?;
        let mut seqs: Vec<Vec<u32>> = seqs.into_iter().filter(|d| must.iter().all(|&c| d[c] >= 1)).collect();
        seqs.sort_unstable_by(|a, b| b.iter().sum::<u32>().cmp(&a.iter().sum::<u32>()).then_with(|| a.cmp(b)));
        let cover_pos: Vec<usize> = (0..keep.len()).filter(|&i| in_cover[keep[i]]).collect();
        let has_edge: Vec<bool> = (0..keep.len()).map(|i| sub.degree(i) > 0).collect();
        for d in seqs {
            meter.tick(1)?;
            let sum_d: u64 = d.iter().map(|&x| x as u64).sum();
            let Some(need) = required_phi(k, sum_d, fit) else {
                return Ok(true);
            };
            let caps: Vec<BigUint> = col.iter().map(|&c| r - BigUint::from(d[c])).collect();
            // Σφ ≤ Σ c_v over non-isolated vertices, and every edge touches the cover.
            let by_all: BigUint = (0..keep.len()).filter(|&i| has_edge[i]).map(|i| caps[i].clone()).sum();
            let by_cover: BigUint = cover_pos.iter().map(|&i| caps[i].clone()).sum::<BigUint>() * 2u32;
            if by_all.min(by_cover) < need {
                continue;
            }
            if edge_fit_flow(&sub, &caps, &BigInt::from(need)) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// Dispatcher.

/// Decides whether g has an r-simple walk of size at least k.
pub fn solve_undirected(g: &UGraph, k: &BigUint, r: &BigUint, params: &UndirSolverParams) -> Result<bool, SolveError> {
    if k.is_zero() {
        return Err(SolveError::ZeroK);
    }
    if r.is_zero() {
        return Err(SolveError::ZeroR);
    }
    let large_r = r * r > *k;
    let special = match params.pipeline {
        Pipeline::Auto => large_r,
        Pipeline::General => false,
        Pipeline::Special if large_r => true,
        Pipeline::Special => return Err(SolveError::SpecialNeedsLargeR),
    };
    if g.n() == 0 {
        return Ok(false);
    }
    if k <= &BigUint::from(1u32) {
        return Ok(true);
    }
    let b = resolve_bound(default_bound_undirected(k, r), &params.base)?;
    let bv = small(&b, params.base.work_budget)?;
    for comp in g.components() {
        if comp.len() < 2 {
            continue;
        }
        let sub = g.induced(&comp);
        if niceness_undirected(&sub, k, r) == Niceness::NotNice {
            return Ok(true);
        }
        let fam = choose_family(sub.n(), &b, &params.base)?;
        let found = if special {
            match matching_shortcut(&sub, k, r) {
                MatchingOutcome::Yes => true,
                MatchingOutcome::VertexCover(cover) => any_coloring(&fam, |colors| {
                    let cg = ColoredUGraph::new(sub.clone(), colors.to_vec()).expect("total coloring");
                    special_colorful_budget(&cg, k, r, &cover, bv, params.fit, params.base.work_budget)
                })?,
            }
        } else {
            colorful_wrapper(&sub, k, r, bv, &fam, &params.base)?
        };
        if found {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Torus grid with every edge subdivided twice and a pendant on every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridPendant {
    pub graph: UGraph,
    pub base_vertices: usize,
    pub base_edges: usize,
    pub r: u64,
}

/// c × c torus grid (a 4-regular multigraph when c = 2), each edge uv
/// replaced by a path u–x–y–v, then one pendant per vertex. Requires c ≥ 2.
pub fn gen_grid_pendant(c: usize, r: u64) -> GridPendant {
    assert!(c >= 2, "grid side must be at least 2");
    let id = |i: usize, j: usize| (i % c) * c + (j % c);
    let mut base = Vec::new();
    for i in 0..c {
        for j in 0..c {
            base.push((id(i, j), id(i + 1, j)));
            base.push((id(i, j), id(i, j + 1)));
        }
    }
    let mut next = c * c;
    let mut edges = Vec::new();
    for &(u, v) in &base {
        let (x, y) = (next, next + 1);
        next += 2;
        edges.extend([(u, x), (x, y), (y, v)]);
    }
    let inner = next;
    for v in 0..inner {
        edges.push((v, next));
        next += 1;
    }
    GridPendant { graph: UGraph::new(next, edges).expect("valid construction"), base_vertices: c * c, base_edges: base.len(), r }
}
