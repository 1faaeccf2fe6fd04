//! Brute-force ground truth: exhaustive walk search, packing enumeration and
//! walk verification. Kept deliberately plain.

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::graph::{Adjacency, Walk};
use crate::packing::PackingInstance;

pub const DEFAULT_STATE_BUDGET: usize = 30_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle state budget of {0} exceeded")]
    BudgetExceeded(usize),
}

struct Packer {
    bits: u32,
    mask: u128,
}

impl Packer {
    fn new(n: usize, lim: u64, budget: usize) -> Result<Self, OracleError> {
        let bits = 64 - lim.leading_zeros();
        if bits as usize * n > 120 {
            return Err(OracleError::BudgetExceeded(budget));
        }
        Ok(Packer { bits: bits.max(1), mask: (1u128 << bits.max(1)) - 1 })
    }
    fn get(&self, key: u128, v: usize) -> u64 {
        ((key >> (v as u32 * self.bits)) & self.mask) as u64
    }
    fn inc(&self, key: u128, v: usize) -> u128 {
        key + (1u128 << (v as u32 * self.bits))
    }
}

struct MaxSearch<'a, G: Adjacency> {
    g: &'a G,
    lim: u64,
    cap: u64,
    pk: Packer,
    memo: FxHashMap<(u32, u128), u64>,
    budget: usize,
}

impl<G: Adjacency> MaxSearch<'_, G> {
    /// Largest number of further visits after standing on `v` with counts `key`.
    fn ext(&mut self, v: usize, key: u128, size: u64) -> Result<u64, OracleError> {
        if size >= self.cap {
            return Ok(0);
        }
        if let Some(&e) = self.memo.get(&(v as u32, key)) {
            return Ok(e);
        }
        let mut best = 0;
        for &w in self.g.succ(v) {
            if self.pk.get(key, w) < self.lim {
                let e = 1 + self.ext(w, self.pk.inc(key, w), size + 1)?;
                best = best.max(e);
                if size + best >= self.cap {
                    break;
                }
            }
        }
        if self.memo.len() >= self.budget {
            return Err(OracleError::BudgetExceeded(self.budget));
        }
        self.memo.insert((v as u32, key), best);
        Ok(best)
    }
}

pub fn brute_rsimple_max<G: Adjacency>(g: &G, r: &BigUint, cap: &BigUint) -> Result<BigUint, OracleError> {
    brute_rsimple_max_budget(g, r, cap, DEFAULT_STATE_BUDGET)
}

/// Maximum size of an r-simple walk in `g`, truncated at `cap`.
pub fn brute_rsimple_max_budget<G: Adjacency>(g: &G, r: &BigUint, cap: &BigUint, budget: usize) -> Result<BigUint, OracleError> {
    let n = g.n();
    let cap_u = cap.to_u64().unwrap_or(u64::MAX);
    // Visiting a vertex more than `cap` times already exceeds the cap.
    let lim = r.to_u64().unwrap_or(u64::MAX).min(cap_u);
    if n == 0 || lim == 0 {
        return Ok(BigUint::from(0u32));
    }
    if (n as u128) * (lim as u128) > budget as u128 {
        return Err(OracleError::BudgetExceeded(budget));
    }
    let pk = Packer::new(n, lim, budget)?;
    let mut s = MaxSearch { g, lim, cap: cap_u, pk, memo: FxHashMap::default(), budget };
    let mut best = 0u64;
    for v in 0..n {
        let total = 1 + s.ext(v, s.pk.inc(0, v), 1)?;
        best = best.max(total);
        if best >= cap_u {
            break;
        }
    }
    Ok(BigUint::from(best.min(cap_u)))
}

/// A maximum-size r-simple walk, truncated at `cap` visits; `None` on an
/// empty graph.
pub fn brute_rsimple_witness<G: Adjacency>(g: &G, r: &BigUint, cap: &BigUint, budget: usize) -> Result<Option<Walk>, OracleError> {
    let n = g.n();
    let cap_u = cap.to_u64().unwrap_or(u64::MAX);
    let lim = r.to_u64().unwrap_or(u64::MAX).min(cap_u);
    if n == 0 || lim == 0 {
        return Ok(None);
    }
    if (n as u128) * (lim as u128) > budget as u128 {
        return Err(OracleError::BudgetExceeded(budget));
    }
    let pk = Packer::new(n, lim, budget)?;
    let mut s = MaxSearch { g, lim, cap: cap_u, pk, memo: FxHashMap::default(), budget };
    let mut best = (0u64, 0usize);
    for v in 0..n {
        let total = 1 + s.ext(v, s.pk.inc(0, v), 1)?;
        if total > best.0 {
            best = (total, v);
        }
        if total >= cap_u {
            break;
        }
    }
    let (total, start) = best;
    let target = total.min(cap_u);
    let mut walk = vec![start];
    let mut key = s.pk.inc(0, start);
    let mut v = start;
    while (walk.len() as u64) < target {
        let need = target - walk.len() as u64;
        let size = walk.len() as u64;
        let mut next = None;
        for &w in g.succ(v) {
            if s.pk.get(key, w) < s.lim {
                let k2 = s.pk.inc(key, w);
                if 1 + s.ext(w, k2, size + 1)? >= need {
                    next = Some((w, k2));
                    break;
                }
            }
        }
        let (w, k2) = next.expect("memoized optimum is realizable");
        walk.push(w);
        key = k2;
        v = w;
    }
    Ok(Some(Walk(walk)))
}

/// Decides whether an r-simple walk of size at least `k` exists.
pub fn brute_has_rsimple_path<G: Adjacency>(g: &G, r: &BigUint, k: &BigUint) -> Result<bool, OracleError> {
    Ok(&brute_rsimple_max(g, r, k)? >= k)
}

struct StSearch<'a, G: Adjacency> {
    g: &'a G,
    lim: u64,
    t: usize,
    pk: Packer,
    memo: FxHashMap<(u32, u128), Option<u64>>,
    budget: usize,
}

impl<G: Adjacency> StSearch<'_, G> {
    fn ext(&mut self, v: usize, key: u128) -> Result<Option<u64>, OracleError> {
        if let Some(&e) = self.memo.get(&(v as u32, key)) {
            return Ok(e);
        }
        let mut best = if v == self.t { Some(0) } else { None };
        for &w in self.g.succ(v) {
            if self.pk.get(key, w) < self.lim {
                if let Some(e) = self.ext(w, self.pk.inc(key, w))? {
                    best = Some(best.map_or(e + 1, |b: u64| b.max(e + 1)));
                }
            }
        }
        if self.memo.len() >= self.budget {
            return Err(OracleError::BudgetExceeded(self.budget));
        }
        self.memo.insert((v as u32, key), best);
        Ok(best)
    }
}

pub fn brute_rsimple_st_max<G: Adjacency>(g: &G, r: &BigUint, s: usize, t: usize, cap: &BigUint) -> Result<Option<BigUint>, OracleError> {
    brute_rsimple_st_max_budget(g, r, s, t, cap, DEFAULT_STATE_BUDGET)
}

/// Maximum size of an r-simple walk from `s` to `t`, truncated at `cap`;
/// `None` when no such walk exists.
pub fn brute_rsimple_st_max_budget<G: Adjacency>(
    g: &G,
    r: &BigUint,
    s: usize,
    t: usize,
    cap: &BigUint,
    budget: usize,
) -> Result<Option<BigUint>, OracleError> {
    let n = g.n();
    let lim = r.to_u64().unwrap_or(u64::MAX);
    if s >= n || t >= n || lim == 0 {
        return Ok(None);
    }
    if (n as u128) * (lim as u128) > budget as u128 {
        return Err(OracleError::BudgetExceeded(budget));
    }
    let pk = Packer::new(n, lim, budget)?;
    let mut st = StSearch { g, lim, t, pk, memo: FxHashMap::default(), budget };
    let start = st.pk.inc(0, s);
    let res = st.ext(s, start)?;
    let cap_u = cap.to_u64().unwrap_or(u64::MAX);
    Ok(res.map(|e| BigUint::from((e + 1).min(cap_u))))
}

pub fn brute_packing(inst: &PackingInstance) -> Result<bool, OracleError> {
    brute_packing_budget(inst, DEFAULT_STATE_BUDGET)
}

/// Tries every q-subcollection of the set copies.
pub fn brute_packing_budget(inst: &PackingInstance, budget: usize) -> Result<bool, OracleError> {
    let q = inst.q as usize;
    if q == 0 {
        return Ok(true);
    }
    let mut copies: Vec<&[usize]> = Vec::new();
    for (set, m) in inst.sets.iter().zip(&inst.mult) {
        let m = m.to_usize().unwrap_or(usize::MAX).min(q);
        copies.extend(std::iter::repeat(set.as_slice()).take(m));
    }
    if copies.len() < q {
        return Ok(false);
    }
    let mut combos: u128 = 1;
    for i in 0..q as u128 {
        combos = combos * (copies.len() as u128 - i) / (i + 1);
        if combos > budget as u128 {
            return Err(OracleError::BudgetExceeded(budget));
        }
    }
    let r = inst.r.to_u64().unwrap_or(u64::MAX);
    let mut count = vec![0u64; inst.universe];
    for pick in (0..copies.len()).combinations(q) {
        count.iter_mut().for_each(|c| *c = 0);
        let mut ok = true;
        'outer: for &i in &pick {
            for &x in copies[i] {
                count[x] += 1;
                if count[x] > r {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct WalkCheck {
    pub valid: bool,
    pub size: usize,
}

pub fn verify_walk<G: Adjacency>(g: &G, walk: &Walk, r: &BigUint) -> WalkCheck {
    let w = &walk.0;
    let size = w.len();
    let n = g.n();
    let lim = r.to_u64().unwrap_or(u64::MAX);
    let mut valid = size > 0 && w.iter().all(|&v| v < n);
    if valid {
        valid = w.windows(2).all(|p| g.has_step(p[0], p[1]));
    }
    if valid {
        let mut count = vec![0u64; n];
        for &v in w {
            count[v] += 1;
        }
        valid = count.iter().all(|&c| c <= lim);
    }
    WalkCheck { valid, size }
}
