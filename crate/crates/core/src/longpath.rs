//! Long simple paths through color coding, and the niceness tests built on
//! top of them.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::colorings::{default_trials, family, ColoringFamily, ColoringKind};
use crate::graph::{Digraph, UGraph};

/// Largest vertex count for which niceness runs on the injective coloring.
pub const INJECTIVE_NICENESS_LIMIT: usize = 16;
/// Trial cap for the randomized fallback in the niceness tests.
pub const NICENESS_TRIALS_CAP: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Niceness {
    Nice,
    NotNice,
}

/// `best[v]` is the vertex count of the longest colorful path from one of
/// `starts` to v (0 when none).
fn colorful_best(g: &Digraph, colors: &[u32], c: u32, starts: &[usize]) -> Vec<u32> {
    let n = g.n();
    let full = 1usize << c;
    let bit = |v: usize| 1usize << (colors[v] - 1);
    let mut reach = vec![false; full * n];
    let mut best = vec![0u32; n];
    for &s in starts {
        reach[bit(s) * n + s] = true;
    }
    for mask in 1..full {
        let size = mask.count_ones();
        for v in 0..n {
            if !reach[mask * n + v] {
                continue;
            }
            best[v] = best[v].max(size);
            for &w in g.out(v) {
                if mask & bit(w) == 0 {
                    reach[(mask | bit(w)) * n + w] = true;
                }
            }
        }
    }
    best
}

/// True when some coloring of `fam` admits a colorful s-t path on at
/// least `l` vertices.
pub fn detect_long_path(g: &Digraph, s: usize, t: usize, l: usize, fam: &ColoringFamily) -> bool {
    if s >= g.n() || t >= g.n() || l > g.n() || l as u32 > fam.c {
        return false;
    }
    fam.iter().par_bridge().any(|col| colorful_best(g, &col.colors, fam.c, &[s])[t] as usize >= l)
}

/// True when some coloring of `fam` admits a colorful path on at least `l` vertices.
pub fn detect_any_long_path(g: &Digraph, l: usize, fam: &ColoringFamily) -> bool {
    if l > g.n() || l as u32 > fam.c {
        return false;
    }
    let all: Vec<usize> = (0..g.n()).collect();
    fam.iter().par_bridge().any(|col| colorful_best(g, &col.colors, fam.c, &all).iter().any(|&b| b as usize >= l))
}

fn niceness_family(n: usize, c: usize) -> ColoringFamily {
    if n <= INJECTIVE_NICENESS_LIMIT {
        family(n, n as u32, ColoringKind::Injective).expect("c = n")
    } else {
        let c = c.clamp(1, n) as u32;
        let trials = default_trials(n, c).min(NICENESS_TRIALS_CAP);
        family(n, c, ColoringKind::Randomized { trials, seed: 0 }).expect("within budget")
    }
}

/// Smallest L with L·r ≥ num.
fn ceil_ratio(num: &BigUint, r: &BigUint) -> BigUint {
    num.div_ceil(r)
}

/// NotNice when g has a cycle on at least k/r vertices or a path on at least
/// 2k/r vertices. Graphs with fewer than two vertices are NotNice only for k ≤ 1.
pub fn niceness_directed(g: &Digraph, k: &BigUint, r: &BigUint) -> Niceness {
    let n = g.n();
    if n < 2 {
        return if k <= &BigUint::one() { Niceness::NotNice } else { Niceness::Nice };
    }
    let l1 = ceil_ratio(k, r).to_usize().unwrap_or(usize::MAX).max(1);
    let l2 = ceil_ratio(&(k * 2u32), r).to_usize().unwrap_or(usize::MAX).max(1);
    if l1 > n {
        return Niceness::Nice;
    }
    // Without a path on l2 vertices every cycle has fewer than l2 vertices,
    // so l2 colors (or n) suffice for both tests.
    let fam = niceness_family(n, l2.min(n));
    if l2 <= n && detect_any_long_path(g, l2, &fam) {
        return Niceness::NotNice;
    }
    let found = fam.iter().par_bridge().any(|col| {
        (0..n).any(|u| {
            let best = colorful_best(g, &col.colors, fam.c, &[u]);
            g.inn(u).iter().any(|&v| best[v] as usize >= l1)
        })
    });
    if found {
        Niceness::NotNice
    } else {
        Niceness::Nice
    }
}

/// NotNice when g has a simple path with at least k/r edges.
pub fn niceness_undirected(g: &UGraph, k: &BigUint, r: &BigUint) -> Niceness {
    let n = g.n();
    let edges = ceil_ratio(k, r);
    let Some(l) = edges.to_usize().and_then(|e| e.checked_add(1)) else {
        return Niceness::Nice;
    };
    if l > n {
        return Niceness::Nice;
    }
    let fam = niceness_family(n, l);
    if detect_any_long_path(&g.bidirected(), l, &fam) {
        Niceness::NotNice
    } else {
        Niceness::Nice
    }
}
