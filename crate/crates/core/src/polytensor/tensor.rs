use std::collections::BTreeMap;

use num_complex::Complex64;

use super::polynomial::{total_degree, MultiIndex, Polynomial};
use crate::error::{Error, Result};

/// Fully symmetric rank-`k` complex tensor over `n` coordinates.
///
/// Only sorted index tuples `i₁ ≤ … ≤ i_k` (0-based) are stored, without
/// multiplicity weights; the entry at any unsorted tuple is the stored value
/// at its sorted rearrangement. Absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    nvars: usize,
    rank: usize,
    entries: BTreeMap<Vec<usize>, Complex64>,
}

impl SymTensor {
    pub fn zeros(nvars: usize, rank: usize) -> Self {
        Self {
            nvars,
            rank,
            entries: BTreeMap::new(),
        }
    }

    pub fn scalar(nvars: usize, value: Complex64) -> Self {
        let mut t = Self::zeros(nvars, 0);
        t.set(&[], value).expect("rank-0 index");
        t
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, Complex64> {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value at an arbitrary (not necessarily sorted) index tuple.
    pub fn get(&self, idx: &[usize]) -> Complex64 {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.entries.get(&key).copied().unwrap_or_default()
    }

    /// Overwrites the entry at `idx` (and hence at all its permutations).
    pub fn set(&mut self, idx: &[usize], value: Complex64) -> Result<()> {
        let key = self.key(idx)?;
        if value == Complex64::default() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
        Ok(())
    }

    pub fn add_at(&mut self, idx: &[usize], value: Complex64) -> Result<()> {
        let current = self.get(idx);
        self.set(idx, current + value)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zeros(self.nvars, self.rank);
        for (k, v) in &self.entries {
            let w = v * c;
            if w != Complex64::default() {
                out.entries.insert(k.clone(), w);
            }
        }
        out
    }

    /// Largest entrywise `|self − other|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if (self.nvars, self.rank) != (other.nvars, other.rank) {
            return Err(Error::shape(format!(
                "comparing rank-{} tensor over {} vars with rank-{} over {}",
                self.rank, self.nvars, other.rank, other.nvars
            )));
        }
        let mut worst: f64 = 0.0;
        for (k, v) in &self.entries {
            worst = worst.max((v - other.entries.get(k).copied().unwrap_or_default()).norm());
        }
        for (k, v) in &other.entries {
            if !self.entries.contains_key(k) {
                worst = worst.max(v.norm());
            }
        }
        Ok(worst)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Full contraction `Σ_{j₁…j_k} T_{j₁…j_k} v₁[j₁] ⋯ v_k[j_k]` over all
    /// unsorted index tuples.
    pub fn contract(&self, funcs: &[&[Complex64]]) -> Result<Complex64> {
        if funcs.len() != self.rank {
            return Err(Error::shape(format!(
                "contracting rank-{} tensor with {} vectors",
                self.rank,
                funcs.len()
            )));
        }
        if let Some(v) = funcs.iter().find(|v| v.len() != self.nvars) {
            return Err(Error::shape(format!(
                "vector of length {} against {} vars",
                v.len(),
                self.nvars
            )));
        }
        let mut total = Complex64::default();
        for (key, value) in &self.entries {
            let mut perm = key.clone();
            let mut orbit = Complex64::default();
            loop {
                orbit += perm
                    .iter()
                    .zip(funcs)
                    .map(|(&j, v)| v[j])
                    .product::<Complex64>();
                if !next_permutation(&mut perm) {
                    break;
                }
            }
            total += value * orbit;
        }
        Ok(total)
    }

    /// `⟨T, v^{⊗k}⟩`: contraction with the same vector in every slot.
    pub fn contract_power(&self, v: &[Complex64]) -> Result<Complex64> {
        if v.len() != self.nvars {
            return Err(Error::shape(format!(
                "vector of length {} against {} vars",
                v.len(),
                self.nvars
            )));
        }
        Ok(self
            .entries
            .iter()
            .map(|(key, value)| {
                let prod: Complex64 = key.iter().map(|&j| v[j]).product();
                value * prod * multinomial(&counts(key, self.nvars))
            })
            .sum())
    }

    /// `⟨S, T⟩ = Σ` over all unsorted tuples of `S·T` (bilinear, no conjugation).
    pub fn pair(&self, other: &Self) -> Result<Complex64> {
        if (self.nvars, self.rank) != (other.nvars, other.rank) {
            return Err(Error::shape(format!(
                "pairing rank-{} tensor over {} vars with rank-{} over {}",
                self.rank, self.nvars, other.rank, other.nvars
            )));
        }
        let (small, large) = if self.entries.len() <= other.entries.len() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(small
            .entries
            .iter()
            .filter_map(|(key, a)| {
                large
                    .entries
                    .get(key)
                    .map(|b| a * b * multinomial(&counts(key, self.nvars)))
            })
            .sum())
    }

    fn key(&self, idx: &[usize]) -> Result<Vec<usize>> {
        if idx.len() != self.rank {
            return Err(Error::shape(format!(
                "index of length {} into rank-{} tensor",
                idx.len(),
                self.rank
            )));
        }
        if let Some(&j) = idx.iter().find(|&&j| j >= self.nvars) {
            return Err(Error::shape(format!("index {j} out of range for {} vars", self.nvars)));
        }
        let mut key = idx.to_vec();
        key.sort_unstable();
        Ok(key)
    }
}

/// Lexicographic successor; returns `false` once the last arrangement is reached.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All sorted index tuples `i₁ ≤ … ≤ i_rank` over `nvars` coordinates, in
/// lexicographic order.
pub fn sorted_tuples(nvars: usize, rank: usize) -> Vec<Vec<usize>> {
    if rank == 0 {
        return vec![Vec::new()];
    }
    if nvars == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; rank];
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..rank).rev().find(|&p| cur[p] + 1 < nvars) else {
            return out;
        };
        let next = cur[pos] + 1;
        for slot in &mut cur[pos..] {
            *slot = next;
        }
    }
}

/// Multiplicity vector of a sorted index tuple.
pub(crate) fn counts(key: &[usize], nvars: usize) -> MultiIndex {
    let mut alpha = vec![0u32; nvars];
    for &j in key {
        alpha[j] += 1;
    }
    alpha
}

pub(crate) fn sorted_key(alpha: &[u32]) -> Vec<usize> {
    alpha
        .iter()
        .enumerate()
        .flat_map(|(j, &e)| std::iter::repeat_n(j, e as usize))
        .collect()
}

/// Number of distinct orderings `k!/∏αⱼ!` of the multiset with multiplicities `α`.
pub(crate) fn multinomial(alpha: &[u32]) -> f64 {
    let mut result = 1.0;
    let mut seen = 0u32;
    for &e in alpha {
        for t in 1..=e {
            seen += 1;
            result = result * f64::from(seen) / f64::from(t);
        }
    }
    result.round()
}

/// Coefficient isomorphism `Pol(ℝⁿ) → ⊕ₖ Symᵏ`: returns `T₀, …, T_D` with
/// `P(s) = Σₖ ⟨Tₖ, s^{⊗k}⟩`.
///
/// No `i` powers or delta-function factors are attached here; the only place
/// those enter is the Green-function map.
pub fn fourier_poly(p: &Polynomial) -> Vec<SymTensor> {
    let n = p.nvars();
    let mut tensors: Vec<SymTensor> = (0..=p.degree()).map(|k| SymTensor::zeros(n, k)).collect();
    for (alpha, c) in p.terms() {
        let k = total_degree(alpha);
        let value = c / multinomial(alpha);
        tensors[k].entries.insert(sorted_key(alpha), value);
    }
    tensors
}

/// Inverse of [`fourier_poly`].
pub fn poly_from_tensors(tensors: &[SymTensor]) -> Result<Polynomial> {
    let Some(first) = tensors.first() else {
        return Ok(Polynomial::zero(0));
    };
    let n = first.nvars();
    if let Some(t) = tensors.iter().find(|t| t.nvars() != n) {
        return Err(Error::shape(format!(
            "mixed tensor arities {} and {}",
            n,
            t.nvars()
        )));
    }
    let mut p = Polynomial::zero(n);
    for t in tensors {
        for (key, value) in &t.entries {
            let alpha = counts(key, n);
            let c = value * multinomial(&alpha);
            p.add_term(alpha, c)?;
        }
    }
    Ok(p)
}
