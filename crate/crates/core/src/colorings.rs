//! Coloring families standing in for perfect hash families.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::Coloring;

pub const DEFAULT_BUDGET: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ColoringError {
    #[error("family or check exceeds the budget of {0}")]
    BudgetExceeded(u64),
    #[error("injective coloring needs c >= n (c = {c}, n = {n})")]
    InvalidKind { n: usize, c: u32 },
    #[error("at least one color is required")]
    NoColors,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColoringKind {
    Exhaustive,
    Injective,
    Randomized { trials: u64, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct ColoringFamily {
    pub n: usize,
    pub c: u32,
    pub kind: ColoringKind,
}

pub fn family(n: usize, c: u32, kind: ColoringKind) -> Result<ColoringFamily, ColoringError> {
    family_with_budget(n, c, kind, DEFAULT_BUDGET)
}

pub fn family_with_budget(n: usize, c: u32, kind: ColoringKind, budget: u64) -> Result<ColoringFamily, ColoringError> {
    if c == 0 {
        return Err(ColoringError::NoColors);
    }
    match kind {
        ColoringKind::Exhaustive => {
            let size = (c as u64).checked_pow(n as u32);
            if size.map_or(true, |s| s > budget) {
                return Err(ColoringError::BudgetExceeded(budget));
            }
        }
        ColoringKind::Injective => {
            if (c as usize) < n {
                return Err(ColoringError::InvalidKind { n, c });
            }
        }
        ColoringKind::Randomized { trials, .. } => {
            if trials > budget {
                return Err(ColoringError::BudgetExceeded(budget));
            }
        }
    }
    Ok(ColoringFamily { n, c, kind })
}

/// ⌈e^c · c · ln(max(n, 2))⌉.
pub fn default_trials(n: usize, c: u32) -> u64 {
    let v = (c as f64).exp() * c as f64 * (n.max(2) as f64).ln();
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v.ceil() as u64
    }
}

impl ColoringFamily {
    pub fn len(&self) -> u64 {
        match self.kind {
            ColoringKind::Exhaustive => (self.c as u64).pow(self.n as u32),
            ColoringKind::Injective => 1,
            ColoringKind::Randomized { trials, .. } => trials,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Restartable; randomized families replay the same stream for the same seed.
    pub fn iter(&self) -> Box<dyn Iterator<Item = Coloring> + Send + '_> {
        let (n, c) = (self.n, self.c);
        match self.kind {
            ColoringKind::Injective => Box::new(std::iter::once(Coloring { colors: (1..=n as u32).collect(), c })),
            ColoringKind::Exhaustive => {
                let total = self.len();
                Box::new((0..total).map(move |mut idx| {
                    let mut colors = vec![1u32; n];
                    for col in colors.iter_mut() {
                        *col = (idx % c as u64) as u32 + 1;
                        idx /= c as u64;
                    }
                    Coloring { colors, c }
                }))
            }
            ColoringKind::Randomized { trials, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Box::new((0..trials).map(move |_| Coloring { colors: (0..n).map(|_| rng.gen_range(1..=c)).collect(), c }))
            }
        }
    }

    pub fn to_vec(&self) -> Vec<Coloring> {
        self.iter().collect()
    }
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k.min(n));
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

pub fn phf_verify(fam: &ColoringFamily, k: usize) -> Result<bool, ColoringError> {
    phf_verify_with_budget(fam, k, DEFAULT_BUDGET)
}

/// Exhaustive over all k-subsets of `[0, n)`.
pub fn phf_verify_with_budget(fam: &ColoringFamily, k: usize, budget: u64) -> Result<bool, ColoringError> {
    if k > fam.n {
        return Ok(true);
    }
    let subsets = binomial(fam.n as u64, k as u64).ok_or(ColoringError::BudgetExceeded(budget))?;
    if subsets > budget {
        return Err(ColoringError::BudgetExceeded(budget));
    }
    let funcs = fam.to_vec();
    Ok((0..fam.n).combinations(k).all(|sub| funcs.iter().any(|f| f.is_injective_on(&sub))))
}
