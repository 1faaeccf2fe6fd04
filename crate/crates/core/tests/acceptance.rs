//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines always reach stdout; exits non-zero when a criterion
//! other than the documented red one fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsimple_core::colorings::ColoringKind;
use rsimple_core::directed::{enrich, gen_tightness_directed, solve_directed, ColoringChoice, SolverParams, Topology};
use rsimple_core::flow::{max_flow, min_cost_flow, Capacity, FlowArc, FlowError, FlowNetwork};
use rsimple_core::graph::*;
use rsimple_core::oracle::{brute_packing, brute_rsimple_max, verify_walk};
use rsimple_core::packing::{binomial, reduce, representative_family, solve_packing, PackingInstance, Reduced};
use rsimple_core::undirected::*;

type Outcome = Result<String, String>;

fn b(x: u64) -> BigUint {
    BigUint::from(x)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Collects mismatches and reports the first few.
struct Tally {
    checks: u64,
    bad: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checks: 0, bad: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.bad.push(what());
        }
    }

    fn finish(self, summary: String) -> Outcome {
        if self.bad.is_empty() {
            Ok(format!("{summary}, {} checks, 0 disagreements", self.checks))
        } else {
            let shown: Vec<_> = self.bad.iter().take(3).cloned().collect();
            Err(format!("{summary}, {} of {} checks failed, e.g. {}", self.bad.len(), self.checks, shown.join("; ")))
        }
    }
}

fn all_ugraphs(n: usize) -> Vec<UGraph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0u32..1 << pairs.len())
        .map(|mask| UGraph::new(n, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e)).unwrap())
        .collect()
}

/// Digraphs on n ≤ 3 vertices, one per isomorphism class.
fn nonisomorphic_digraphs(n: usize) -> Vec<Digraph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).filter(|(u, v)| u != v).collect();
    let perms: Vec<Vec<usize>> = permutations(n);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        let arcs: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let canon = perms
            .iter()
            .map(|p| {
                let mut a: Vec<(usize, usize)> = arcs.iter().map(|&(u, v)| (p[u], p[v])).collect();
                a.sort_unstable();
                a
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(Digraph::new(n, arcs).unwrap());
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn random_connected(rng: &mut ChaCha8Rng, n: usize, p: f64) -> UGraph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    UGraph::new(n, edges).unwrap()
}

fn criterion1() -> Outcome {
    let mut t = Tally::new();
    let mut graphs: Vec<Digraph> = (1..=3).flat_map(nonisomorphic_digraphs).collect();
    let small = graphs.len();
    let mut r = rng(1);
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|u| (0..4).map(move |v| (u, v))).filter(|(u, v)| u != v).collect();
    for _ in 0..200 {
        let p = r.gen_range(0.15..0.7);
        graphs.push(Digraph::new(4, pairs.iter().copied().filter(|_| r.gen_bool(p))).unwrap());
    }
    for (gi, g) in graphs.iter().enumerate() {
        for rr in 1..=3u64 {
            let max = brute_rsimple_max(g, &b(rr), &b(11)).unwrap();
            for k in 1..=10u64 {
                let want = max >= b(k);
                let got = solve_directed(g, &b(k), &b(rr), &SolverParams::default()).unwrap();
                t.check(got == want, || format!("{:?} r={rr} k={k} solver={got} oracle max={max}", g.arcs()));
                if gi < small {
                    let exh = SolverParams { coloring: ColoringChoice::Exhaustive, ..SolverParams::default() };
                    let got = solve_directed(g, &b(k), &b(rr), &exh).unwrap();
                    t.check(got == want, || format!("exhaustive {:?} r={rr} k={k} solver={got}", g.arcs()));
                }
            }
        }
    }
    t.finish(format!("{small} non-isomorphic digraphs with n <= 3 and 200 random with n = 4"))
}

fn criterion2() -> Outcome {
    let mut t = Tally::new();
    let mut graphs = 0;
    for n in 1..=4 {
        for g in all_ugraphs(n).into_iter().filter(UGraph::is_connected) {
            graphs += 1;
            for r in 2..=3u64 {
                let max = brute_rsimple_max(&g, &b(r), &b(11)).unwrap();
                let fam = rsimple_core::colorings::family(n, n as u32, ColoringKind::Injective).unwrap();
                for k in 1..=10u64 {
                    let want = max >= b(k);
                    let p = UndirSolverParams { pipeline: Pipeline::General, ..Default::default() };
                    let got = solve_undirected(&g, &b(k), &b(r), &p).unwrap();
                    t.check(got == want, || format!("{:?} r={r} k={k} solver={got} max={max}", g.edges()));
                    // Straight into the DP, without the niceness shortcut.
                    let bound = 30 * k.div_ceil(r) + 1;
                    let got = colorful_wrapper(&g, &b(k), &b(r), bound, &fam, &SolverParams::default()).unwrap();
                    t.check(got == want, || format!("wrapper {:?} r={r} k={k} got={got} max={max}", g.edges()));
                }
            }
        }
    }
    t.finish(format!("{graphs} connected labeled graphs, general pipeline and bare colorful wrapper"))
}

fn criterion3() -> Outcome {
    let mut r = rng(3);
    let mut per_fit: BTreeMap<&str, Tally> = BTreeMap::new();
    let mut queries = 0;
    for _ in 0..100 {
        let n = r.gen_range(2..=8usize);
        let g = random_connected(&mut r, n, 0.15);
        let rr = r.gen_range(4..=8u64);
        let max = brute_rsimple_max(&g, &b(rr), &b(rr * rr)).unwrap();
        // The boundary pair when it lies below r², else one random k.
        let ks: Vec<u64> = if max < b(rr * rr) {
            let m = max.to_u64().unwrap();
            [m, m + 1].into_iter().filter(|&k| k < rr * rr).collect()
        } else {
            vec![r.gen_range(1..rr * rr)]
        };
        for k in ks {
            queries += 1;
            for (name, fit) in [("half", FitThreshold::Half), ("full", FitThreshold::Full)] {
                let p = UndirSolverParams { pipeline: Pipeline::Special, fit, ..Default::default() };
                let got = solve_undirected(&g, &b(k), &b(rr), &p).unwrap();
                let want = max >= b(k);
                per_fit.entry(name).or_insert_with(Tally::new).check(got == want, || format!("{:?} r={rr} k={k} solver={got} max={max}", g.edges()));
            }
        }
    }
    let half = per_fit.remove("half").unwrap();
    let full = per_fit.remove("full").unwrap();
    let full_bad = full.bad.len();
    half.finish(format!("100 random graphs, {queries} queries, default half threshold (full threshold: {full_bad} disagreements)"))
}

fn criterion4() -> Outcome {
    let mut notes = Vec::new();
    let mut sub_ok = true;
    let mut boundary_ok = true;
    for (rr, closed_k) in [(2usize, 10u64), (3, 24)] {
        let (g, k) = gen_tightness_directed(rr);
        sub_ok &= k == b(closed_k);
        let r = b(rr as u64);
        let max = brute_rsimple_max(&g, &r, &b(closed_k + 3)).unwrap();
        let solve = |k: u64| solve_directed(&g, &b(k), &r, &SolverParams::default()).unwrap();
        let at = solve(closed_k);
        let above = solve(closed_k + 1);
        sub_ok &= at;
        // Solver must agree with the oracle around its true maximum.
        let m = max.to_u64().unwrap();
        sub_ok &= solve(m) && !solve(m + 1);
        boundary_ok &= !above;
        notes.push(format!("r={rr}: generator k={k}, solver yes at {closed_k}, solver {} at {}, oracle max {max}", if above { "yes" } else { "no" }, closed_k + 1));
    }
    let detail = notes.join("; ");
    if sub_ok && boundary_ok {
        Ok(detail)
    } else if sub_ok {
        Err(format!("{detail}; the closed form undercounts the optimum, solver and oracle agree (see README)"))
    } else {
        Err(format!("{detail}; a verifiable sub-part failed"))
    }
}

fn criterion5() -> Outcome {
    let c3 = Digraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
    let r = BigUint::from(10u64.pow(12));
    let k = &r * 3u32;
    let inj = SolverParams { coloring: ColoringChoice::Injective, ..SolverParams::default() };
    let t0 = Instant::now();
    let yes = solve_directed(&c3, &k, &r, &inj).unwrap();
    let t_yes = t0.elapsed();
    let t1 = Instant::now();
    let no = solve_directed(&c3, &(&k + 1u32), &r, &inj).unwrap();
    let t_no = t1.elapsed();
    let limit = Duration::from_secs(60);
    let detail = format!("k=3r {} in {t_yes:.2?}, k=3r+1 {} in {t_no:.2?}", yes, no);
    if yes && !no && t_yes < limit && t_no < limit {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Max Σφ over φ ∈ {1..r}^arcs meeting the endpoint balance and throughput
/// conditions, or None.
fn brute_enrich(t: &Topology, r: u64, s: u32, e: u32) -> Option<u64> {
    if !t.vertices.contains(&s) || !t.vertices.contains(&e) {
        return None;
    }
    let m = t.arcs.len();
    let mut phi = vec![1u64; m];
    let mut best = None;
    loop {
        let ok = t.vertices.iter().all(|&v| {
            let out: u64 = t.arcs.iter().zip(&phi).filter(|((a, _), _)| *a == v).map(|(_, &f)| f).sum();
            let inn: u64 = t.arcs.iter().zip(&phi).filter(|((_, c), _)| *c == v).map(|(_, &f)| f).sum();
            if v == s {
                inn + 1 == out && out <= r
            } else if v == e {
                inn == out + 1 && inn <= r
            } else {
                inn == out && inn <= r
            }
        });
        if ok {
            let total = phi.iter().sum::<u64>();
            best = Some(best.map_or(total, |x: u64| x.max(total)));
        }
        let mut i = 0;
        while i < m && phi[i] == r {
            phi[i] = 1;
            i += 1;
        }
        if i == m {
            return best;
        }
        phi[i] += 1;
    }
}

fn criterion6() -> Outcome {
    let mut t = Tally::new();
    let mut r = rng(6);
    for _ in 0..100 {
        let count = r.gen_range(1..=4);
        let mut arcs = Vec::new();
        while arcs.len() < count {
            let (a, c) = (r.gen_range(1..=4u32), r.gen_range(1..=4u32));
            if a != c && !arcs.contains(&(a, c)) {
                arcs.push((a, c));
            }
        }
        let topo = Topology::from_arcs(arcs);
        for rr in 1..=5u64 {
            for i in 1..=4u32 {
                for j in 1..=4u32 {
                    if i == j {
                        continue;
                    }
                    let want = brute_enrich(&topo, rr, i, j);
                    let got = enrich(&topo, &b(rr), i, j);
                    let got_total = got.as_ref().map(|e| e.total().to_u64().unwrap());
                    t.check(got_total == want, || format!("{:?} r={rr} ends=({i},{j}) flow={got_total:?} exhaustive={want:?}", topo.arcs));
                }
            }
        }
    }
    t.finish("100 random topologies, r in 1..=5, all endpoint pairs".into())
}

/// Minimum cost over integral flows within bounds, conserved away from
/// s and t, with net outflow f at s.
fn brute_min_cost(net: &FlowNetwork, s: usize, t: usize, f: i64) -> Option<i64> {
    let bounds: Vec<(i64, i64)> = net
        .arcs
        .iter()
        .map(|a| {
            let hi = match &a.upper {
                Capacity::Finite(u) => u.to_i64().unwrap(),
                Capacity::Infinite => unreachable!(),
            };
            (a.lower.to_i64().unwrap(), hi)
        })
        .collect();
    let mut x: Vec<i64> = bounds.iter().map(|b| b.0).collect();
    let mut best: Option<i64> = None;
    loop {
        let mut bal = vec![0i64; net.nodes];
        for (a, &v) in net.arcs.iter().zip(&x) {
            bal[a.from] -= v;
            bal[a.to] += v;
        }
        let ok = (0..net.nodes).all(|v| {
            if s == t {
                bal[v] == 0
            } else if v == s {
                bal[v] == -f
            } else if v == t {
                bal[v] == f
            } else {
                bal[v] == 0
            }
        }) && (s != t || f == 0);
        if ok {
            let c: i64 = net.arcs.iter().zip(&x).map(|(a, &v)| a.cost * v).sum();
            best = Some(best.map_or(c, |m: i64| m.min(c)));
        }
        let mut i = 0;
        while i < x.len() && x[i] == bounds[i].1 {
            x[i] = bounds[i].0;
            i += 1;
        }
        if i == x.len() {
            return best;
        }
        x[i] += 1;
    }
}

fn criterion7() -> Outcome {
    let mut t = Tally::new();
    let mut r = rng(7);
    for _ in 0..100 {
        let nodes = r.gen_range(2..=6usize);
        let mut net = FlowNetwork::new(nodes);
        let mut plain = FlowNetwork::new(nodes);
        for _ in 0..r.gen_range(1..=6) {
            let (u, v) = (r.gen_range(0..nodes), r.gen_range(0..nodes));
            if u == v {
                continue;
            }
            let cap = r.gen_range(0..=6u64);
            let low = if r.gen_bool(0.25) { r.gen_range(0..=cap) } else { 0 };
            let cost = r.gen_range(-3..=3i64);
            net.add_arc(FlowArc::new(u, v, low, Capacity::from(cap), cost));
            plain.add_arc(FlowArc::new(u, v, 0, Capacity::from(cap), cost));
        }
        let (s, tt) = (0, nodes - 1);
        for f in 0..=6i64 {
            let want = brute_min_cost(&net, s, tt, f);
            match min_cost_flow(&net, s, tt, &b(f as u64)) {
                Ok(sol) => {
                    let mut closed = net.clone();
                    closed.add_arc(FlowArc::new(tt, s, f as u64, Capacity::from(f as u64), 0));
                    let mut flow = sol.flow.clone();
                    flow.push(b(f as u64));
                    let conserving = closed.check_circulation(&flow) && net.flow_cost(&sol.flow) == sol.cost;
                    t.check(conserving && Some(sol.cost.clone()) == want.map(BigInt::from), || format!("{:?} f={f} cost={} brute={want:?}", net.arcs, sol.cost));
                }
                Err(e) => t.check(e == FlowError::Infeasible && want.is_none(), || format!("{:?} f={f} error {e} brute={want:?}", net.arcs)),
            }
        }
        let maxv = (0..=36).rev().find(|&f| brute_min_cost(&plain, s, tt, f).is_some()).unwrap_or(0);
        let got = max_flow(&plain, s, tt).unwrap();
        t.check(got.value == b(maxv as u64), || format!("max flow {:?}: {} vs {maxv}", plain.arcs, got.value));
    }
    let big = BigUint::from(10u64.pow(15));
    let mut two = FlowNetwork::new(2);
    two.add_arc(FlowArc { from: 0, to: 1, lower: BigUint::from(0u32), upper: Capacity::Finite(big.clone()), cost: 1 });
    let t0 = Instant::now();
    let sol = min_cost_flow(&two, 0, 1, &big).unwrap();
    let mf = max_flow(&two, 0, 1).unwrap();
    let took = t0.elapsed();
    t.check(sol.cost == BigInt::from(big.clone()) && mf.value == big && took < Duration::from_secs(1), || format!("capacity 1e15 took {took:?}"));
    t.finish(format!("100 random networks with lower bounds and costs in -3..=3, 1e15 instance in {took:.2?}"))
}

fn brute_phi_options(g: &UGraph, r: u64) -> Vec<(Vec<u64>, u64)> {
    let edges = g.edges();
    let m = edges.len();
    let top = 2 * r;
    let mut phi = vec![0u64; m];
    let mut out = Vec::new();
    loop {
        let mut deg = vec![0u64; g.n()];
        for (&(u, v), &f) in edges.iter().zip(&phi) {
            deg[u] += f;
            deg[v] += f;
        }
        if deg.iter().all(|d| d % 2 == 0 && *d <= top) {
            out.push((deg, phi.iter().sum()));
        }
        let mut i = 0;
        while i < m && phi[i] == top {
            phi[i] = 0;
            i += 1;
        }
        if i == m {
            return out;
        }
        phi[i] += 1;
    }
}

fn criterion8() -> Outcome {
    let mut t = Tally::new();
    for n in 1..=4usize {
        for g in all_ugraphs(n).into_iter().filter(UGraph::is_connected) {
            let colors: Vec<u32> = (1..=n as u32).collect();
            let cg = ColoredUGraph::new(g.clone(), colors).unwrap();
            for r in 1..=3u64 {
                let options = brute_phi_options(&g, r);
                let mut d = vec![0u64; n];
                loop {
                    let caps: Vec<u64> = d.iter().map(|&x| 2 * (r - x)).collect();
                    let best = options.iter().filter(|(deg, _)| deg.iter().zip(&caps).all(|(a, c)| a <= c)).map(|(_, s)| *s).max().unwrap();
                    let sd: u64 = d.iter().sum();
                    for (fit, score) in [(FitThreshold::Half, 2 * sd + best), (FitThreshold::Full, sd + best)] {
                        // score is in the threshold's own units: half units for Half.
                        let boundary = match fit {
                            FitThreshold::Half => score / 2,
                            FitThreshold::Full => score,
                        };
                        for k in [1, boundary, boundary + 1] {
                            let k = k.max(1);
                            let want = match fit {
                                FitThreshold::Half => score >= 2 * k,
                                FitThreshold::Full => score >= k,
                            };
                            let spec = FitSpec { graph: cg.clone(), d: OccurrenceSequence { d: d.clone() }, cover: (0..n).collect(), k: b(k), r: b(r), threshold: fit };
                            let got = edge_fit_exists(&spec);
                            t.check(got == want, || format!("{:?} r={r} d={d:?} k={k} {fit:?} flow={got} brute={want}", g.edges()));
                        }
                    }
                    let mut i = 0;
                    while i < n && d[i] == r {
                        d[i] = 0;
                        i += 1;
                    }
                    if i == n {
                        break;
                    }
                    d[i] += 1;
                }
            }
        }
    }
    t.finish("all connected graphs n <= 4, r <= 3, every d, both thresholds".into())
}

/// Treewidth at most 2 by series-parallel reduction: drop vertices of degree
/// at most 1, bypass vertices of degree 2; succeeds iff nothing remains.
fn treewidth_at_most_2(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    for &(u, v) in edges {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    let mut alive = vec![true; n];
    loop {
        let Some(v) = (0..n).find(|&v| alive[v] && adj[v].len() <= 2) else {
            return !alive.iter().any(|&a| a);
        };
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for &w in &nb {
            adj[w].remove(&v);
        }
        if let [a, c] = nb[..] {
            adj[a].insert(c);
            adj[c].insert(a);
        }
        adj[v].clear();
        alive[v] = false;
    }
}

struct Candidate {
    verts: Vec<usize>,
    deg: Vec<u64>,
    total: u64,
}

fn tw2_candidates(g: &UGraph, r: u64) -> Vec<Candidate> {
    let edges = g.edges();
    let m = edges.len();
    let top = 2 * r;
    let mut phi = vec![0u64; m];
    let mut out = Vec::new();
    loop {
        let mut deg = vec![0u64; g.n()];
        let support: Vec<(usize, usize)> = edges.iter().zip(&phi).filter(|(_, &f)| f > 0).map(|(&e, _)| e).collect();
        for (&(u, v), &f) in edges.iter().zip(&phi) {
            deg[u] += f;
            deg[v] += f;
        }
        if !support.is_empty() && deg.iter().all(|d| d % 2 == 0 && *d <= top) {
            let verts: Vec<usize> = (0..g.n()).filter(|&v| deg[v] > 0).collect();
            let sub = UGraph::new(g.n(), support.clone()).unwrap().induced(&verts);
            if sub.is_connected() && treewidth_at_most_2(g.n(), &support) {
                out.push(Candidate { verts, deg, total: phi.iter().sum() });
            }
        }
        let mut i = 0;
        while i < m && phi[i] == top {
            phi[i] = 0;
            i += 1;
        }
        if i == m {
            return out;
        }
        phi[i] += 1;
    }
}

fn criterion9() -> Outcome {
    let mut t = Tally::new();
    let mut r = rng(9);
    // Triangle, r = 2: every edge doubled.
    let tri = ColoredUGraph::new(UGraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap(), vec![1, 2, 3]).unwrap();
    let got = tw2_component_max(&tri, &[1, 2, 3], 0, &OccurrenceSequence { d: vec![0, 0, 0] }, &b(2)).unwrap();
    t.check(got == Some(6), || format!("triangle gave {got:?}"));
    for n in 1..=4usize {
        for g in all_ugraphs(n) {
            let mut colorings: Vec<Vec<u32>> = vec![(1..=n as u32).collect()];
            colorings.push((0..n).map(|v| (v % 2) as u32 + 1).collect());
            colorings.push((0..n).map(|_| r.gen_range(1..=3)).collect());
            for rr in 1..=2u64 {
                let cands = tw2_candidates(&g, rr);
                for colors in &colorings {
                    let palette = *colors.iter().max().unwrap() as usize;
                    let cg = ColoredUGraph::new(g.clone(), colors.clone()).unwrap();
                    for v_star in 0..n {
                        for cmask in 1u32..1 << palette {
                            let cset: Vec<u32> = (1..=palette as u32).filter(|c| cmask >> (c - 1) & 1 == 1).collect();
                            let mut ds = vec![vec![0u64; palette]];
                            for _ in 0..3 {
                                ds.push((0..palette).map(|_| r.gen_range(0..=rr)).collect());
                            }
                            for d in ds {
                                let cap = |v: usize| 2 * (rr - d[colors[v] as usize - 1]);
                                let want = if !cset.contains(&colors[v_star]) {
                                    None
                                } else {
                                    let best = cands
                                        .iter()
                                        .filter(|c| c.verts.contains(&v_star))
                                        .filter(|c| c.verts.iter().all(|&v| cset.contains(&colors[v])))
                                        .filter(|c| {
                                            let mut cs: Vec<u32> = c.verts.iter().map(|&v| colors[v]).collect();
                                            cs.sort_unstable();
                                            cs.windows(2).all(|w| w[0] != w[1])
                                        })
                                        .filter(|c| c.verts.iter().all(|&v| c.deg[v] <= cap(v)))
                                        .map(|c| c.total)
                                        .max();
                                    Some(best.unwrap_or(0))
                                };
                                let got = tw2_component_max(&cg, &cset, v_star, &OccurrenceSequence { d: d.clone() }, &b(rr)).unwrap();
                                t.check(got == want, || format!("{:?} colors={colors:?} v*={v_star} C={cset:?} d={d:?} r={rr} dp={got:?} brute={want:?}", g.edges()));
                            }
                        }
                    }
                }
            }
        }
    }
    t.finish("all graphs n <= 4, r <= 2, injective and repeated colorings".into())
}

fn random_packing(r: &mut ChaCha8Rng, universe: usize) -> PackingInstance {
    let p = r.gen_range(1..=3usize);
    let q = r.gen_range(1..=5u64);
    let rr = r.gen_range(1..=3u64);
    let count = r.gen_range(1..=12);
    let elems: Vec<usize> = (0..universe).collect();
    let sets: Vec<Vec<usize>> = (0..count)
        .map(|_| {
            let size = r.gen_range(1..=p);
            elems.choose_multiple(r, size).copied().collect()
        })
        .collect();
    PackingInstance::from_sets(universe, p, q, rr, sets).unwrap()
}

fn criterion10() -> Outcome {
    let mut t = Tally::new();
    let mut r = rng(10);
    for _ in 0..200 {
        let inst = random_packing(&mut r, 8);
        let want = brute_packing(&inst).unwrap();
        match reduce(&inst) {
            Ok(Reduced::Trivial(a)) => t.check(a == want, || format!("trivial {a} vs {want} on {inst:?}")),
            Ok(Reduced::Instance(red)) => {
                let kappa = red.kappa() as u32;
                let bound = kappa as u128 * 4u128.pow(kappa);
                t.check((red.used_elements() as u128) < bound, || format!("n'={} bound {bound}", red.used_elements()));
                let got = brute_packing(&red).unwrap();
                t.check(got == want, || format!("reduced {got} vs {want} on {inst:?}"));
            }
            Err(e) => t.check(false, || format!("reduce failed: {e}")),
        }
        let got = solve_packing(&inst).unwrap();
        t.check(got == want, || format!("solve {got} vs {want} on {inst:?}"));
    }
    // Representative sets, checked against every small blocker set B.
    for _ in 0..100 {
        let ground = r.gen_range(3..=8usize);
        let p = r.gen_range(1..=3usize.min(ground));
        let kappa = r.gen_range(1..=3usize);
        let all: Vec<usize> = (0..ground).collect();
        let fam: Vec<Vec<usize>> = (0..r.gen_range(1..=20))
            .map(|_| {
                let mut s: Vec<usize> = all.choose_multiple(&mut r, p).copied().collect();
                s.sort_unstable();
                s
            })
            .collect();
        let cert = representative_family(&fam, p, kappa, ground).unwrap();
        let limit = binomial((p + kappa) as u64, p as u64);
        t.check(cert.selected.len() as u128 <= limit, || format!("|H*| = {} > {limit}", cert.selected.len()));
        for bmask in 0u32..1 << ground {
            if bmask.count_ones() as usize > kappa {
                continue;
            }
            let disjoint = |s: &Vec<usize>| s.iter().all(|&x| bmask >> x & 1 == 0);
            let in_h = fam.iter().any(disjoint);
            let in_star = cert.selected.iter().any(|&i| disjoint(&fam[i]));
            t.check(!in_h || in_star, || format!("B={bmask:b} not represented in {fam:?}"));
        }
    }
    t.finish("200 packing instances and 100 representative families".into())
}

fn degrees_ok_directed(n: usize, arcs: &BTreeMap<(usize, usize), u64>, s: usize, t: usize) -> bool {
    if arcs.is_empty() {
        return s == t;
    }
    let mut bal = vec![0i64; n];
    for (&(u, v), &m) in arcs {
        bal[u] += m as i64;
        bal[v] -= m as i64;
    }
    let balanced = (0..n).all(|v| {
        let want = if s != t && v == s {
            1
        } else if s != t && v == t {
            -1
        } else {
            0
        };
        bal[v] == want
    });
    balanced && support_reaches(n, arcs.keys().copied(), s)
}

fn degrees_ok_undirected(n: usize, edges: &BTreeMap<(usize, usize), u64>, s: usize, t: usize) -> bool {
    if edges.is_empty() {
        return s == t;
    }
    let mut deg = vec![0u64; n];
    for (&(u, v), &m) in edges {
        deg[u] += m;
        deg[v] += m;
    }
    let parity = (0..n).all(|v| (deg[v] % 2 == 1) == (s != t && (v == s || v == t)));
    parity && support_reaches(n, edges.keys().copied(), s)
}

/// Every vertex touched by `pairs` is connected to s, ignoring direction.
fn support_reaches(n: usize, pairs: impl Iterator<Item = (usize, usize)>, s: usize) -> bool {
    let mut adj = vec![Vec::new(); n];
    let mut touched = vec![false; n];
    for (u, v) in pairs {
        adj[u].push(v);
        adj[v].push(u);
        touched[u] = true;
        touched[v] = true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..n).all(|v| !touched[v] || seen[v])
}

fn random_walk_counts(r: &mut ChaCha8Rng, n: usize, directed: bool) -> (BTreeMap<(usize, usize), u64>, usize, usize) {
    let len = r.gen_range(2..30);
    let mut seq = vec![r.gen_range(0..n)];
    while seq.len() < len {
        let v = r.gen_range(0..n);
        if v != *seq.last().unwrap() {
            seq.push(v);
        }
    }
    let closed = r.gen_bool(0.5);
    if closed && seq[0] != *seq.last().unwrap() {
        seq.push(seq[0]);
    }
    let mut m = BTreeMap::new();
    for w in seq.windows(2) {
        let key = if directed || w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
        *m.entry(key).or_insert(0) += 1;
    }
    // Closed walks stay Eulerian when every multiplicity is scaled.
    if seq[0] == *seq.last().unwrap() {
        let total: u64 = m.values().sum();
        let factor = r.gen_range(1..=10_000 / total);
        m.values_mut().for_each(|x| *x *= factor);
    }
    (m, seq[0], *seq.last().unwrap())
}

fn walk_usage(w: &Walk, directed: bool) -> BTreeMap<(usize, usize), u64> {
    let mut m = BTreeMap::new();
    for p in w.0.windows(2) {
        let key = if directed || p[0] < p[1] { (p[0], p[1]) } else { (p[1], p[0]) };
        *m.entry(key).or_insert(0) += 1;
    }
    m
}

fn criterion11() -> Outcome {
    let mut t = Tally::new();
    let mut r = rng(11);
    let cap = b(100_000);
    for i in 0..500 {
        let directed = i % 2 == 0;
        let n = r.gen_range(2..=7usize);
        let (mut counts, s, e) = random_walk_counts(&mut r, n, directed);
        // A third of the cases get one multiplicity nudged, usually breaking the degree conditions.
        if i % 3 == 0 {
            let key = *counts.keys().nth(r.gen_range(0..counts.len())).unwrap();
            *counts.get_mut(&key).unwrap() += 1;
        }
        let total: u64 = counts.values().sum();
        let big: Vec<((usize, usize), BigUint)> = counts.iter().map(|(&k, &m)| (k, b(m))).collect();
        for qs in 0..n {
            for qt in 0..n {
                let (exists, want) = if directed {
                    let g = MultiDigraph::new(n, big.clone()).unwrap();
                    (euler_trail_exists(&g, qs, qt), degrees_ok_directed(n, &counts, qs, qt))
                } else {
                    let g = MultiUGraph::new(n, big.clone()).unwrap();
                    (euler_trail_exists_undirected(&g, qs, qt), degrees_ok_undirected(n, &counts, qs, qt))
                };
                t.check(exists == want, || format!("existence({qs},{qt}) {exists} vs degree test {want} on {counts:?}"));
            }
        }
        {
            let (qs, qt) = (s, e);
            let walk = if directed {
                let g = MultiDigraph::new(n, big.clone()).unwrap();
                euler_trail_exists(&g, qs, qt).then(|| euler_trail_construct(&g, qs, qt, &cap).unwrap())
            } else {
                let g = MultiUGraph::new(n, big.clone()).unwrap();
                euler_trail_exists_undirected(&g, qs, qt).then(|| euler_trail_construct_undirected(&g, qs, qt, &cap).unwrap())
            };
            let Some(w) = walk else { continue };
            let support: Vec<(usize, usize)> = counts.keys().copied().collect();
            let check = if directed {
                verify_walk(&Digraph::new(n, support).unwrap(), &w, &b(total + 1))
            } else {
                verify_walk(&UGraph::new(n, support).unwrap(), &w, &b(total + 1))
            };
            t.check(check.valid && check.size as u64 == total + 1, || format!("walk invalid or wrong size {}", check.size));
            t.check(walk_usage(&w, directed) == counts, || "per-edge usage differs from multiplicities".into());
            t.check(w.0[0] == qs && *w.0.last().unwrap() == qt, || "wrong endpoints".into());
        }
    }
    t.finish("500 multigraphs (total multiplicity up to 1e4), all endpoint pairs".into())
}

/// Maximum matching size by exhaustive branching.
fn max_matching(edges: &[(usize, usize)]) -> usize {
    fn go(edges: &[(usize, usize)], used: u32) -> usize {
        match edges.split_first() {
            None => 0,
            Some((&(u, v), rest)) => {
                let skip = go(rest, used);
                if used >> u & 1 == 0 && used >> v & 1 == 0 {
                    skip.max(1 + go(rest, used | 1 << u | 1 << v))
                } else {
                    skip
                }
            }
        }
    }
    go(edges, 0)
}

fn criterion12() -> Outcome {
    let mut t = Tally::new();
    let mut r = rng(12);
    let mut done = 0;
    while done < 50 {
        let n = r.gen_range(2..=10usize);
        let g = random_connected(&mut r, n, 0.2);
        let rr = r.gen_range(2..=4u64);
        let m = max_matching(&g.edges()) as u64;
        let top = (rr * m).min(rr * rr - 1);
        let k = r.gen_range(1..=top);
        done += 1;
        let yes = matching_shortcut(&g, &b(k), &b(rr)) == MatchingOutcome::Yes;
        let max = brute_rsimple_max(&g, &b(rr), &b(k)).unwrap();
        t.check(yes && max >= b(k), || format!("{:?} r={rr} k={k} shortcut={yes} oracle={max}", g.edges()));
    }
    t.finish("50 random connected graphs with a matching of size ceil(k/r)".into())
}

fn main() {
    let criteria: Vec<(u32, fn() -> Outcome)> = vec![
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
        (9, criterion9),
        (10, criterion10),
        (11, criterion11),
        (12, criterion12),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    // Criterion 4 cannot pass as stated; its verifiable parts are still enforced.
    let known_red = [4];
    let mut unexpected = 0;
    for (id, f) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let t0 = Instant::now();
        let res = f();
        let took = t0.elapsed();
        match &res {
            Ok(d) => println!("criterion {id:>2}: PASS ({took:.1?}) {d}"),
            Err(d) => println!("criterion {id:>2}: FAIL ({took:.1?}) {d}"),
        }
        let sub_parts_hold = id == 4 && res.as_ref().err().is_some_and(|d| d.contains("solver and oracle agree"));
        if res.is_err() && !(known_red.contains(&id) && sub_parts_hold) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
