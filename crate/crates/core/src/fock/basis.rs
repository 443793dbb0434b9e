use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Default cap on the number of occupation states.
pub const DEFAULT_DIMENSION_CAP: usize = 5_000_000;

/// Occupation-number basis of the bosonic Fock space over `modes` modes,
/// truncated at total boson number `n_max`.
///
/// States are ordered by total number first, then lexicographically (ascending)
/// within a sector, so every sector is a contiguous index range and the vacuum
/// is index 0. Bases with the same mode count nest: the states of a smaller
/// cutoff are exactly the leading states of a larger one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationBasis {
    modes: usize,
    n_max: usize,
    occupations: Vec<u16>,
    totals: Vec<u16>,
    sector_offsets: Vec<usize>,
    /// `compositions[n][k]` = number of ways to write n as an ordered sum of k parts.
    compositions: Vec<Vec<usize>>,
}

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// `C(modes + n_max, n_max)`, or `None` on overflow.
pub fn fock_dimension(modes: usize, n_max: usize) -> Option<u128> {
    binomial_u128((modes + n_max) as u128, n_max as u128)
}

impl OccupationBasis {
    pub fn new(modes: usize, n_max: usize) -> Result<Self> {
        Self::with_cap(modes, n_max, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(modes: usize, n_max: usize, cap: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::invalid("modes", "at least one mode is required"));
        }
        if n_max > u16::MAX as usize {
            return Err(Error::invalid("n_max", "cutoff exceeds 65535"));
        }
        let dim = fock_dimension(modes, n_max).unwrap_or(u128::MAX);
        if dim > cap as u128 {
            return Err(Error::DimensionCap {
                requested: dim,
                cap,
                modes,
                n_max,
            });
        }
        let dim = dim as usize;

        let mut compositions = vec![vec![0usize; modes + 1]; n_max + 1];
        for (n, row) in compositions.iter_mut().enumerate() {
            row[0] = usize::from(n == 0);
            for (k, slot) in row.iter_mut().enumerate().skip(1) {
                *slot = binomial_u128((n + k - 1) as u128, (k - 1) as u128).unwrap() as usize;
            }
        }

        let mut occupations = Vec::with_capacity(dim * modes);
        let mut totals = Vec::with_capacity(dim);
        let mut sector_offsets = Vec::with_capacity(n_max + 2);
        let mut current = vec![0u16; modes];
        for (n, row) in compositions.iter().enumerate().take(n_max + 1) {
            sector_offsets.push(totals.len());
            push_compositions(&mut current, 0, n, &mut occupations);
            totals.extend(core::iter::repeat_n(n as u16, row[modes]));
        }
        sector_offsets.push(totals.len());
        debug_assert_eq!(totals.len(), dim);

        Ok(Self {
            modes,
            n_max,
            occupations,
            totals,
            sector_offsets,
            compositions,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.totals.len()
    }

    pub fn state(&self, i: usize) -> &[u16] {
        &self.occupations[i * self.modes..(i + 1) * self.modes]
    }

    pub fn total(&self, i: usize) -> usize {
        self.totals[i] as usize
    }

    pub fn sector_range(&self, n: usize) -> Range<usize> {
        self.sector_offsets[n]..self.sector_offsets[n + 1]
    }

    pub fn sector_offsets(&self) -> &[usize] {
        &self.sector_offsets
    }

    /// Position of an occupation vector, or `None` if it lies outside the cutoff.
    pub fn index_of(&self, occ: &[u16]) -> Option<usize> {
        if occ.len() != self.modes {
            return None;
        }
        let n: usize = occ.iter().map(|&x| x as usize).sum();
        if n > self.n_max {
            return None;
        }
        let mut idx = self.sector_offsets[n];
        let mut remaining = n;
        for (i, &o) in occ.iter().enumerate().take(self.modes - 1) {
            let parts_left = self.modes - i - 1;
            for v in 0..o as usize {
                idx += self.compositions[remaining - v][parts_left];
            }
            remaining -= o as usize;
        }
        Some(idx)
    }

    pub fn vacuum_index(&self) -> usize {
        0
    }
}

fn push_compositions(current: &mut [u16], pos: usize, remaining: usize, out: &mut Vec<u16>) {
    if pos == current.len() - 1 {
        current[pos] = remaining as u16;
        out.extend_from_slice(current);
        return;
    }
    for v in 0..=remaining {
        current[pos] = v as u16;
        push_compositions(current, pos + 1, remaining - v, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    /// Brute-force enumeration of all occupation vectors with total <= n_max.
    fn brute_force(modes: usize, n_max: usize) -> Vec<Vec<u16>> {
        let mut out = Vec::new();
        let mut occ = vec![0u16; modes];
        loop {
            if occ.iter().map(|&x| x as usize).sum::<usize>() <= n_max {
                out.push(occ.clone());
            }
            let mut i = 0;
            loop {
                if i == modes {
                    return out;
                }
                if (occ[i] as usize) < n_max {
                    occ[i] += 1;
                    break;
                }
                occ[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn single_mode_ladder() {
        let b = OccupationBasis::new(1, 4).unwrap();
        assert_eq!(b.dim(), 5);
        for i in 0..5 {
            assert_eq!(b.state(i), &[i as u16]);
        }
    }

    #[test]
    fn small_dimensions() {
        assert_eq!(OccupationBasis::new(2, 2).unwrap().dim(), 6);
        let brute = brute_force(3, 3);
        assert_eq!(brute.len(), 20);
        assert_eq!(OccupationBasis::new(3, 3).unwrap().dim(), brute.len());
    }

    #[test]
    fn index_map_is_a_bijection() {
        for (modes, n_max) in [(1, 5), (2, 3), (3, 3), (4, 2), (5, 4)] {
            let b = OccupationBasis::new(modes, n_max).unwrap();
            let brute: BTreeSet<Vec<u16>> = brute_force(modes, n_max).into_iter().collect();
            assert_eq!(brute.len(), b.dim());
            for i in 0..b.dim() {
                assert!(brute.contains(b.state(i)));
                assert_eq!(b.index_of(b.state(i)), Some(i));
            }
        }
    }

    #[test]
    fn ordering_is_sector_major_then_lexicographic() {
        let b = OccupationBasis::new(3, 3).unwrap();
        assert_eq!(b.vacuum_index(), 0);
        for i in 1..b.dim() {
            let (a, c) = (b.state(i - 1), b.state(i));
            let (ta, tc) = (b.total(i - 1), b.total(i));
            assert!(ta < tc || (ta == tc && a < c));
        }
        for n in 0..=3 {
            for i in b.sector_range(n) {
                assert_eq!(b.total(i), n);
            }
        }
    }

    #[test]
    fn smaller_cutoff_is_a_prefix() {
        let small = OccupationBasis::new(3, 2).unwrap();
        let big = OccupationBasis::new(3, 4).unwrap();
        for i in 0..small.dim() {
            assert_eq!(small.state(i), big.state(i));
        }
    }

    #[test]
    fn out_of_cutoff_is_none() {
        let b = OccupationBasis::new(2, 2).unwrap();
        assert_eq!(b.index_of(&[2, 1]), None);
        assert_eq!(b.index_of(&[1]), None);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let err = OccupationBasis::with_cap(40, 10, 1000).unwrap_err();
        assert!(matches!(err, Error::DimensionCap { cap: 1000, .. }));
        assert!(OccupationBasis::new(200, 200).is_err());
    }
}
