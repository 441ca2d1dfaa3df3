//! Dense subsets of `F_2^n` as bitmaps. `n <= 30`, so the universe fits in
//! at most `2^30` bits (128 MiB); desk-scale instances are far smaller.

use crate::gf2::{Coset, GroupElement};
use crate::{Error, Result, MAX_N};

#[derive(Clone, PartialEq, Eq)]
pub struct SetF2 {
    n: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for SetF2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SetF2(n={}, |A|={})", self.n, self.count())
    }
}

impl SetF2 {
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::Dimension(format!("ambient dimension {n} out of range 1..={MAX_N}")));
        }
        let words = vec![0u64; (1usize << n).div_ceil(64)];
        Ok(SetF2 { n, words })
    }

    pub fn from_elements(n: usize, elems: &[u32]) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for &e in elems {
            if e >> n != 0 {
                return Err(Error::Dimension(format!("element {e:#x} does not fit in {n} bits")));
            }
            s.insert_bits(e);
        }
        Ok(s)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `N = 2^n`.
    #[inline]
    pub fn universe(&self) -> u64 {
        1u64 << self.n
    }

    #[inline]
    pub fn contains_bits(&self, x: u32) -> bool {
        debug_assert!(x >> self.n == 0);
        self.words[(x >> 6) as usize] >> (x & 63) & 1 == 1
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.n() == self.n && self.contains_bits(x.bits())
    }

    #[inline]
    pub fn insert_bits(&mut self, x: u32) {
        debug_assert!(x >> self.n == 0);
        self.words[(x >> 6) as usize] |= 1u64 << (x & 63);
    }

    #[inline]
    pub fn remove_bits(&mut self, x: u32) {
        debug_assert!(x >> self.n == 0);
        self.words[(x >> 6) as usize] &= !(1u64 << (x & 63));
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Ascending iterator over the elements.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some((wi as u32) << 6 | b)
            })
        })
    }

    pub fn elements(&self) -> Vec<u32> {
        self.iter().collect()
    }

    pub fn is_subset_of(&self, other: &SetF2) -> bool {
        self.n == other.n
            && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Set difference `self \ other`.
    pub fn minus(&self, other: &SetF2) -> Result<SetF2> {
        if self.n != other.n {
            return Err(Error::Dimension("set difference: dimension mismatch".into()));
        }
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect();
        Ok(SetF2 { n: self.n, words })
    }

    pub fn union(&self, other: &SetF2) -> Result<SetF2> {
        if self.n != other.n {
            return Err(Error::Dimension("set union: dimension mismatch".into()));
        }
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        Ok(SetF2 { n: self.n, words })
    }

    /// `self ∩ (H + rep)` as a set in the same ambient group.
    pub fn intersect_coset(&self, coset: &Coset) -> Result<SetF2> {
        if coset.rep().n() != self.n {
            return Err(Error::Dimension("intersect_coset: dimension mismatch".into()));
        }
        let mut out = SetF2::empty(self.n)?;
        let rep = coset.rep().bits();
        for h in coset.subgroup().elements_coord_order() {
            let x = h ^ rep;
            if self.contains_bits(x) {
                out.insert_bits(x);
            }
        }
        Ok(out)
    }

    /// Number of elements of `self` in the coset.
    pub fn coset_count(&self, coset: &Coset) -> Result<u64> {
        if coset.rep().n() != self.n {
            return Err(Error::Dimension("coset_count: dimension mismatch".into()));
        }
        let rep = coset.rep().bits();
        let mut c = 0u64;
        for h in coset.subgroup().elements_coord_order() {
            c += self.contains_bits(h ^ rep) as u64;
        }
        Ok(c)
    }
}
