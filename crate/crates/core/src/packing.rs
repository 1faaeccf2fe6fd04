//! p-Set (r,q)-Packing: reduction rules, representative families over a
//! prime field, kernel encoding and an exact multiplicity search.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PackingError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("no prime field large enough for a ground set of {0} elements")]
    FieldTooSmall(usize),
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("reduced ground set has {n} elements, bound kappa*4^kappa is {bound}")]
    BoundViolated { n: usize, bound: u128 },
}

/// Multiset of sets over `0..universe`, stored as distinct sets with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingInstance {
    pub universe: usize,
    pub p: usize,
    pub q: u64,
    pub r: BigUint,
    pub sets: Vec<Vec<usize>>,
    pub mult: Vec<BigUint>,
}

impl PackingInstance {
    /// Validates and normalizes: elements sorted, identical sets merged.
    pub fn new(universe: usize, p: usize, q: u64, r: BigUint, sets: Vec<Vec<usize>>, mult: Vec<BigUint>) -> Result<Self, PackingError> {
        if sets.len() != mult.len() {
            return Err(PackingError::Invalid(format!("{} sets but {} multiplicities", sets.len(), mult.len())));
        }
        if r.is_zero() {
            return Err(PackingError::Invalid("r must be positive".into()));
        }
        let mut merged: BTreeMap<Vec<usize>, BigUint> = BTreeMap::new();
        for (mut s, m) in sets.into_iter().zip(mult) {
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(PackingError::Invalid(format!("set {s:?} repeats an element")));
            }
            if let Some(&x) = s.iter().find(|&&x| x >= universe) {
                return Err(PackingError::Invalid(format!("element {x} outside universe {universe}")));
            }
            if s.len() > p {
                return Err(PackingError::Invalid(format!("set {s:?} larger than p = {p}")));
            }
            if m.is_zero() {
                return Err(PackingError::Invalid("multiplicities must be positive".into()));
            }
            *merged.entry(s).or_default() += m;
        }
        let (sets, mult) = merged.into_iter().unzip();
        Ok(PackingInstance { universe, p, q, r, sets, mult })
    }

    /// All sets given with multiplicity one.
    pub fn from_sets(universe: usize, p: usize, q: u64, r: u64, sets: Vec<Vec<usize>>) -> Result<Self, PackingError> {
        let mult = vec![BigUint::from(1u32); sets.len()];
        Self::new(universe, p, q, BigUint::from(r), sets, mult)
    }

    /// ⌈pq/r⌉.
    pub fn kappa(&self) -> u64 {
        let pq = BigUint::from(self.p as u64) * self.q;
        pq.div_ceil(&self.r).to_u64().unwrap_or(u64::MAX)
    }

    pub fn total_sets(&self) -> BigUint {
        self.mult.iter().sum()
    }

    /// Elements occurring in at least one set.
    pub fn used_elements(&self) -> usize {
        let mut seen = vec![false; self.universe];
        self.sets.iter().flatten().for_each(|&x| seen[x] = true);
        seen.iter().filter(|&&b| b).count()
    }

    fn r_small(&self) -> u64 {
        self.r.to_u64().unwrap_or(u64::MAX)
    }
}

/// Drops elements occurring in at most r set copies, then removes emptied
/// sets and lowers q by their multiplicity (q saturates at zero).
pub fn rule1(inst: &PackingInstance) -> PackingInstance {
    let mut occ = vec![BigUint::zero(); inst.universe];
    for (s, m) in inst.sets.iter().zip(&inst.mult) {
        for &x in s {
            occ[x] += m;
        }
    }
    let keep: Vec<bool> = occ.iter().map(|o| o > &inst.r).collect();
    let mut q = BigUint::from(inst.q);
    let mut sets = Vec::new();
    let mut mult = Vec::new();
    for (s, m) in inst.sets.iter().zip(&inst.mult) {
        let t: Vec<usize> = s.iter().copied().filter(|&x| keep[x]).collect();
        if t.is_empty() {
            q = if q > *m { q - m } else { BigUint::zero() };
        } else {
            sets.push(t);
            mult.push(m.clone());
        }
    }
    let q = q.to_u64().expect("q only decreases");
    PackingInstance::new(inst.universe, inst.p, q, inst.r.clone(), sets, mult).expect("rule 1 keeps the instance valid")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepFamilyCertificate {
    /// Indices into the input family.
    pub selected: Vec<usize>,
    pub bound: u128,
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    acc
}

fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= x {
        if x % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn det_mod(mut m: Vec<Vec<u64>>, p: u64) -> u64 {
    let n = m.len();
    let mut det = 1u64;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| m[r][c] != 0) else {
            return 0;
        };
        if piv != c {
            m.swap(piv, c);
            det = (p - det) % p;
        }
        det = det * m[c][c] % p;
        let inv = pow_mod(m[c][c], p - 2, p);
        for r in c + 1..n {
            let f = m[r][c] * inv % p;
            if f != 0 {
                for j in c..n {
                    m[r][j] = (m[r][j] + p - f * m[c][j] % p) % p;
                }
            }
        }
    }
    det
}

/// Representative subfamily of a p-uniform family over ground set
/// `0..ground`: each set maps to its vector of p×p minors of the Vandermonde
/// columns (1, a, a², …, a^(p+κ-1)), and a linearly independent maximal
/// subfamily is kept.
pub fn representative_family(family: &[Vec<usize>], p: usize, kappa: usize, ground: usize) -> Result<RepFamilyCertificate, PackingError> {
    let bound = binomial((p + kappa) as u64, p as u64);
    let sq = (ground as u64).checked_mul(ground as u64).filter(|&x| x < (1 << 31)).ok_or(PackingError::FieldTooSmall(ground))?;
    let mut prime = sq.max(2) + 1;
    while !is_prime(prime) {
        prime += 1;
    }
    let rows = p + kappa;
    let coords: Vec<Vec<usize>> = (0..rows).combinations(p).collect();
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut selected = Vec::new();
    for (idx, set) in family.iter().enumerate() {
        if set.len() != p {
            return Err(PackingError::Invalid(format!("set {set:?} is not of size {p}")));
        }
        // Element e is the field point e + 1, so points are distinct and nonzero.
        let mut v: Vec<u64> = coords
            .iter()
            .map(|rs| {
                let m = rs.iter().map(|&i| set.iter().map(|&e| pow_mod(e as u64 + 1, i as u64, prime)).collect()).collect();
                det_mod(m, prime)
            })
            .collect();
        for (piv, b) in &basis {
            if v[*piv] != 0 {
                let f = v[*piv];
                for (x, y) in v.iter_mut().zip(b) {
                    *x = (*x + prime - f * y % prime) % prime;
                }
            }
        }
        if let Some(piv) = v.iter().position(|&x| x != 0) {
            let inv = pow_mod(v[piv], prime - 2, prime);
            v.iter_mut().for_each(|x| *x = *x * inv % prime);
            for (_, b) in basis.iter_mut() {
                if b[piv] != 0 {
                    let f = b[piv];
                    for (x, y) in b.iter_mut().zip(&v) {
                        *x = (*x + prime - f * y % prime) % prime;
                    }
                }
            }
            basis.push((piv, v));
            selected.push(idx);
        }
    }
    debug_assert!(selected.len() as u128 <= bound);
    Ok(RepFamilyCertificate { selected, bound })
}

/// Pads every set to size p with fresh dummies, extracts q successive
/// representative families (each from what earlier rounds left) and keeps
/// only the set copies they chose.
pub fn rule2(inst: &PackingInstance, kappa: u64) -> Result<PackingInstance, PackingError> {
    let p = inst.p;
    let mut next_dummy = inst.universe;
    let padded: Vec<Vec<usize>> = inst
        .sets
        .iter()
        .map(|s| {
            let mut t = s.clone();
            while t.len() < p {
                t.push(next_dummy);
                next_dummy += 1;
            }
            t
        })
        .collect();
    let q = inst.q;
    let mut remaining: Vec<u64> = inst.mult.iter().map(|m| m.to_u64().unwrap_or(u64::MAX).min(q)).collect();
    let mut kept = vec![0u64; padded.len()];
    for _ in 0..q {
        let live: Vec<usize> = (0..padded.len()).filter(|&i| remaining[i] > 0).collect();
        if live.is_empty() {
            break;
        }
        let fam: Vec<Vec<usize>> = live.iter().map(|&i| padded[i].clone()).collect();
        let cert = representative_family(&fam, p, kappa as usize, next_dummy)?;
        for j in cert.selected {
            remaining[live[j]] -= 1;
            kept[live[j]] += 1;
        }
    }
    let mut sets = Vec::new();
    let mut mult = Vec::new();
    for (i, &k) in kept.iter().enumerate() {
        if k > 0 {
            sets.push(inst.sets[i].clone());
            mult.push(BigUint::from(k));
        }
    }
    PackingInstance::new(inst.universe, p, q, inst.r.clone(), sets, mult)
}

/// Outcome of exhaustive rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduced {
    /// q ≤ r or q reached zero: decided without search.
    Trivial(bool),
    Instance(PackingInstance),
}

/// Applies both rules until nothing changes and checks n′ < κ·4^κ.
pub fn reduce(inst: &PackingInstance) -> Result<Reduced, PackingError> {
    let mut cur = inst.clone();
    loop {
        if cur.q == 0 {
            return Ok(Reduced::Trivial(true));
        }
        if BigUint::from(cur.q) <= cur.r {
            return Ok(Reduced::Trivial(cur.total_sets() >= BigUint::from(cur.q)));
        }
        let next = rule2(&rule1(&cur), cur.kappa())?;
        if next == cur {
            break;
        }
        cur = next;
    }
    let n = cur.used_elements();
    let kappa = cur.kappa() as u128;
    let bound = kappa.saturating_mul(4u128.saturating_pow(kappa.min(63) as u32));
    if n as u128 >= bound {
        return Err(PackingError::BoundViolated { n, bound });
    }
    Ok(Reduced::Instance(cur))
}

struct Search<'a> {
    sets: &'a [Vec<usize>],
    mult: Vec<u64>,
    cap: Vec<u64>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn max_copies(&self, i: usize, need: u64) -> u64 {
        let c = self.sets[i].iter().map(|&x| self.cap[x]).min().unwrap_or(u64::MAX);
        self.mult[i].min(need).min(c)
    }

    fn go(&mut self, i: usize, need: u64) -> Result<bool, PackingError> {
        if need == 0 {
            return Ok(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(PackingError::BudgetExceeded(self.budget));
        }
        if i == self.sets.len() {
            return Ok(false);
        }
        let room: u64 = (i..self.sets.len()).map(|j| self.max_copies(j, need)).sum();
        if room < need {
            return Ok(false);
        }
        let top = self.max_copies(i, need);
        for x in (0..=top).rev() {
            for &e in &self.sets[i] {
                self.cap[e] -= x;
            }
            let ok = self.go(i + 1, need - x)?;
            for &e in &self.sets[i] {
                self.cap[e] += x;
            }
            if ok {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

pub fn solve_packing(inst: &PackingInstance) -> Result<bool, PackingError> {
    solve_packing_budget(inst, DEFAULT_SEARCH_BUDGET)
}

/// Reduces, then searches multiplicities x_E ∈ [0, mult_E] with ∑x = q and
/// every element used at most r times. Larger sets are branched on first.
pub fn solve_packing_budget(inst: &PackingInstance, budget: u64) -> Result<bool, PackingError> {
    let red = match reduce(inst)? {
        Reduced::Trivial(b) => return Ok(b),
        Reduced::Instance(i) => i,
    };
    let mut order: Vec<usize> = (0..red.sets.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(red.sets[i].len()));
    let sets: Vec<Vec<usize>> = order.iter().map(|&i| red.sets[i].clone()).collect();
    let mult = order.iter().map(|&i| red.mult[i].to_u64().unwrap_or(u64::MAX)).collect();
    let r = red.r_small();
    let mut s = Search { sets: &sets, mult, cap: vec![r; red.universe], nodes: 0, budget };
    s.go(0, red.q)
}

/// Multiplicity-encoded kernel: each distinct set type with min(mult, r) copies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    pub instance: PackingInstance,
    /// Distinct set types times ⌈log₂(r+1)⌉.
    pub bit_size: u128,
    /// (n+1)^p · ⌈log₂(r+1)⌉ for the kernel's ground set.
    pub bit_bound: u128,
    /// Set when the reduction already decided the instance.
    pub decided: Option<bool>,
}

pub fn kernelize(inst: &PackingInstance) -> Result<Kernel, PackingError> {
    let (base, decided) = match reduce(inst)? {
        Reduced::Trivial(b) => (inst.clone(), Some(b)),
        Reduced::Instance(i) => (i, None),
    };
    let mult: Vec<BigUint> = base.mult.iter().map(|m| m.min(&base.r).clone()).collect();
    let k = PackingInstance::new(base.universe, base.p, base.q, base.r.clone(), base.sets.clone(), mult)?;
    let bits = k.r.bits() as u128;
    let n = k.used_elements() as u128;
    let bit_bound = (n + 1).saturating_pow(k.p as u32).saturating_mul(bits);
    Ok(Kernel { bit_size: k.sets.len() as u128 * bits, bit_bound, instance: k, decided })
}
