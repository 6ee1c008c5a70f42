use crate::error::{Error, Result};

/// Largest Wick order enumerated by default: 11!! = 10395 matchings.
pub const MAX_WICK_ORDER: usize = 12;

/// All perfect matchings of `{0, …, order−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingSet {
    order: usize,
    pairings: Vec<Vec<(usize, usize)>>,
}

impl PairingSet {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Matchings in lexicographic order; each is a list of `(a, b)` with
    /// `a < b`, sorted by `a`.
    pub fn pairings(&self) -> &[Vec<(usize, usize)>] {
        &self.pairings
    }

    pub fn len(&self) -> usize {
        self.pairings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairings.is_empty()
    }
}

/// `(k−1)!!`, with `(−1)!! = 1`.
pub fn double_factorial_odd(k: usize) -> u64 {
    (1..k as u64).step_by(2).product()
}

/// Enumerates all `(k−1)!!` perfect matchings, capped at [`MAX_WICK_ORDER`].
pub fn wick_pairings(k: usize) -> Result<PairingSet> {
    wick_pairings_capped(k, MAX_WICK_ORDER)
}

pub fn wick_pairings_capped(k: usize, cap: usize) -> Result<PairingSet> {
    if k % 2 != 0 {
        return Err(Error::Domain(format!("no perfect matchings of an odd set ({k})")));
    }
    if k > cap {
        return Err(Error::Resource(format!("Wick order {k} exceeds cap {cap}")));
    }
    let mut pairings = Vec::with_capacity(double_factorial_odd(k) as usize);
    let mut current = Vec::with_capacity(k / 2);
    let remaining: Vec<usize> = (0..k).collect();
    extend(&remaining, &mut current, &mut pairings);
    Ok(PairingSet { order: k, pairings })
}

fn extend(
    remaining: &[usize],
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    let Some((&first, rest)) = remaining.split_first() else {
        out.push(current.clone());
        return;
    };
    for (pos, &partner) in rest.iter().enumerate() {
        let others: Vec<usize> = rest
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != pos)
            .map(|(_, &v)| v)
            .collect();
        current.push((first, partner));
        extend(&others, current, out);
        current.pop();
    }
}
