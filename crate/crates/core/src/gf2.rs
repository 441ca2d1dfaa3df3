//! Linear algebra over GF(2): subgroups of `F_2^n` as row-reduced bases,
//! cosets with canonical representatives, and the dual group.
//!
//! A subgroup is stored as a reduced-echelon basis with pivots taken at the
//! most significant set bit: rows are ordered by strictly decreasing pivot,
//! and each pivot bit occurs in exactly one row.  This form is unique per
//! subgroup, so `==` on bases is subgroup equality.

use crate::{Error, Result, MAX_N};

/// Position of the most significant set bit. `x` must be nonzero.
#[inline]
fn msb(x: u32) -> u32 {
    31 - x.leading_zeros()
}

/// An element of `F_2^n`, carried with its ambient dimension.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    n: usize,
    bits: u32,
}

impl std::fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.n.max(1))
    }
}

impl GroupElement {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::Dimension(format!("ambient dimension {n} out of range 1..={MAX_N}")));
        }
        if bits >> n != 0 {
            return Err(Error::Dimension(format!("element {bits:#x} does not fit in {n} bits")));
        }
        Ok(GroupElement { n, bits })
    }

    pub fn zero(n: usize) -> Self {
        GroupElement { n, bits: 0 }
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }
}

/// Group addition is XOR.
///
/// # Panics
/// If the operands live in different ambient groups.
impl std::ops::Add for GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: GroupElement) -> GroupElement {
        assert_eq!(self.n, rhs.n, "ambient dimension mismatch");
        GroupElement { n: self.n, bits: self.bits ^ rhs.bits }
    }
}

/// Basis of the null space of the linear forms `rows` on `F_2^width`:
/// all `y` with `<r, y> = 0` for every row `r`.
fn nullspace(rows: &[u32], width: usize) -> Vec<u32> {
    // Fully row-reduce the forms, then read a kernel vector off each free
    // column.  The read-off below relies on every pivot bit occurring in
    // exactly one row, so back-substitution is required.
    let mut reduced: Vec<u32> = Vec::new();
    for &g in rows {
        let mut r = g;
        for &b in &reduced {
            if r >> msb(b) & 1 == 1 {
                r ^= b;
            }
        }
        if r != 0 {
            reduced.push(r);
            reduced.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    for i in 0..reduced.len() {
        let p = msb(reduced[i]);
        for j in 0..reduced.len() {
            if j != i && reduced[j] >> p & 1 == 1 {
                reduced[j] ^= reduced[i];
            }
        }
    }
    let pivot_mask: u32 = reduced.iter().map(|&b| 1 << msb(b)).sum();
    let mut basis = Vec::with_capacity(width - reduced.len());
    for f in 0..width as u32 {
        if pivot_mask >> f & 1 == 1 {
            continue;
        }
        let mut y = 1u32 << f;
        for &row in &reduced {
            if row >> f & 1 == 1 {
                y |= 1 << msb(row);
            }
        }
        basis.push(y);
    }
    basis
}

/// A subgroup of `F_2^n` in canonical reduced-echelon form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subgroup {
    n: usize,
    /// Rows ordered by strictly decreasing pivot; each pivot bit is set in
    /// exactly one row.
    basis: Vec<u32>,
}

impl std::fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Subgroup(n={}, dim={}, basis=[", self.n, self.dim())?;
        for (i, b) in self.basis.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:0width$b}", b, width = self.n)?;
        }
        write!(f, "])")
    }
}

impl Subgroup {
    /// Canonicalize arbitrary generators (duplicates and zero are fine).
    pub fn from_generators(n: usize, gens: &[GroupElement]) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::Dimension(format!("ambient dimension {n} out of range 1..={MAX_N}")));
        }
        let mut basis: Vec<u32> = Vec::new();
        for g in gens {
            if g.n != n {
                return Err(Error::Dimension(format!(
                    "generator in F_2^{} cannot span a subgroup of F_2^{}",
                    g.n, n
                )));
            }
            let mut r = g.bits;
            for &b in &basis {
                if r >> msb(b) & 1 == 1 {
                    r ^= b;
                }
            }
            if r != 0 {
                basis.push(r);
                basis.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        // Back-substitute: clear every pivot bit from all other rows.
        for i in 0..basis.len() {
            let p = msb(basis[i]);
            for j in 0..basis.len() {
                if j != i && basis[j] >> p & 1 == 1 {
                    basis[j] ^= basis[i];
                }
            }
        }
        basis.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Subgroup { n, basis })
    }

    pub fn from_bits(n: usize, gens: &[u32]) -> Result<Self> {
        let elems = gens
            .iter()
            .map(|&b| GroupElement::new(n, b))
            .collect::<Result<Vec<_>>>()?;
        Self::from_generators(n, &elems)
    }

    /// The whole group `F_2^n`.
    pub fn full(n: usize) -> Self {
        let basis = (0..n as u32).rev().map(|i| 1 << i).collect();
        Subgroup { n, basis }
    }

    /// The trivial subgroup `{0}`.
    pub fn trivial(n: usize) -> Self {
        Subgroup { n, basis: Vec::new() }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `|H| = 2^dim`.
    #[inline]
    pub fn size(&self) -> u64 {
        1u64 << self.dim()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.n
    }

    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    /// Canonical representative of the coset `x + H`: eliminate every pivot
    /// bit of the basis from `x`.  The result is the minimum of the coset
    /// under integer order.
    #[inline]
    pub fn reduce_bits(&self, x: u32) -> u32 {
        let mut r = x;
        for &b in &self.basis {
            if r >> msb(b) & 1 == 1 {
                r ^= b;
            }
        }
        r
    }

    #[inline]
    pub fn contains_bits(&self, x: u32) -> bool {
        self.reduce_bits(x) == 0
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.n == self.n && self.contains_bits(x.bits)
    }

    /// Coordinates of `x` in the canonical basis: bit `i` of the result is
    /// the coefficient of `basis()[i]`.
    pub fn coords(&self, x: &GroupElement) -> Result<u32> {
        if x.n != self.n {
            return Err(Error::Dimension("coords: ambient dimension mismatch".into()));
        }
        let mut r = x.bits;
        let mut c = 0u32;
        for (i, &b) in self.basis.iter().enumerate() {
            if r >> msb(b) & 1 == 1 {
                r ^= b;
                c |= 1 << i;
            }
        }
        if r != 0 {
            return Err(Error::NotInSubgroup(format!("{:?} is not in {:?}", x, self)));
        }
        Ok(c)
    }

    /// Element with the given coordinates (inverse of [`coords`](Self::coords)).
    pub fn element_from_coords(&self, c: u32) -> Result<GroupElement> {
        if c >> self.dim() != 0 && self.dim() < 32 {
            return Err(Error::Dimension(format!(
                "coordinate word {c:#x} does not fit in dim {}",
                self.dim()
            )));
        }
        let mut bits = 0u32;
        for (i, &b) in self.basis.iter().enumerate() {
            if c >> i & 1 == 1 {
                bits ^= b;
            }
        }
        Ok(GroupElement { n: self.n, bits })
    }

    /// All `2^dim` elements in coordinate order: entry `c` is the element
    /// with coordinates `c`.  Intended for `dim` small enough to enumerate.
    pub fn elements_coord_order(&self) -> Vec<u32> {
        let k = self.dim();
        let mut out = vec![0u32; 1 << k];
        for c in 1..(1usize << k) {
            out[c] = out[c & (c - 1)] ^ self.basis[c.trailing_zeros() as usize];
        }
        out
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.n == other.n && self.basis.iter().all(|&b| other.contains_bits(b))
    }

    /// Intersection of two subgroups of the same ambient group, via the
    /// annihilator: `(H1 ∩ H2)^⊥ = H1^⊥ + H2^⊥`.
    pub fn intersect(&self, other: &Subgroup) -> Result<Subgroup> {
        if self.n != other.n {
            return Err(Error::Dimension("intersect: ambient dimension mismatch".into()));
        }
        let mut forms = nullspace(&self.basis, self.n);
        forms.extend(nullspace(&other.basis, self.n));
        Subgroup::from_bits(self.n, &nullspace(&forms, self.n))
    }

    /// All characters of `self` that are trivial on the subgroup `sub`,
    /// i.e. the annihilator of `sub` inside the dual of `self`.  Returns
    /// exactly `2^(dim self - dim sub)` characters, with ascending
    /// coefficient words (so the trivial character comes first).
    pub fn annihilator_of(&self, sub: &Subgroup) -> Result<Vec<DualCharacter>> {
        if !sub.is_subgroup_of(self) {
            return Err(Error::NotSubgroup(format!("{:?} is not a subgroup of {:?}", sub, self)));
        }
        let rows: Vec<u32> = sub
            .basis
            .iter()
            .map(|&b| self.coords(&GroupElement { n: self.n, bits: b }))
            .collect::<Result<_>>()?;
        let null_basis = nullspace(&rows, self.dim());
        let k = null_basis.len();
        let mut coeff_words = vec![0u32; 1 << k];
        for c in 1..(1usize << k) {
            coeff_words[c] = coeff_words[c & (c - 1)] ^ null_basis[c.trailing_zeros() as usize];
        }
        coeff_words.sort_unstable();
        Ok(coeff_words
            .into_iter()
            .map(|w| DualCharacter { subgroup: self.clone(), coeffs: w })
            .collect())
    }

    /// Canonical representatives of the `sub`-cosets inside `self`, in
    /// ascending order.  Representatives are coset minima.
    pub fn coset_representatives(&self, sub: &Subgroup) -> Result<Vec<u32>> {
        if !sub.is_subgroup_of(self) {
            return Err(Error::NotSubgroup(format!("{:?} is not a subgroup of {:?}", sub, self)));
        }
        // Extend sub's basis to a basis of self; the added vectors span a
        // transversal of the sub-cosets.
        let mut elim = sub.basis.clone();
        elim.sort_unstable_by(|a, b| b.cmp(a));
        let mut added: Vec<u32> = Vec::new();
        for &g in &self.basis {
            let mut r = g;
            for &b in &elim {
                if r >> msb(b) & 1 == 1 {
                    r ^= b;
                }
            }
            if r != 0 {
                added.push(r);
                elim.push(r);
                elim.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        let k = added.len();
        debug_assert_eq!(k, self.dim() - sub.dim());
        let mut combo = vec![0u32; 1 << k];
        for c in 1..(1usize << k) {
            combo[c] = combo[c & (c - 1)] ^ added[c.trailing_zeros() as usize];
        }
        let mut reps: Vec<u32> = combo.into_iter().map(|w| sub.reduce_bits(w)).collect();
        reps.sort_unstable();
        Ok(reps)
    }

    /// Kernel of a character of this subgroup: `{x in H : chi(x) = 1}`.
    /// Has index 2 for a nontrivial character.
    pub fn kernel_of_character(&self, chi: &DualCharacter) -> Result<Subgroup> {
        if chi.subgroup != *self {
            return Err(Error::Dimension("character does not belong to this subgroup".into()));
        }
        if chi.coeffs == 0 {
            return Ok(self.clone());
        }
        let coord_basis = nullspace(&[chi.coeffs], self.dim());
        let gens: Vec<u32> = coord_basis
            .iter()
            .map(|&c| self.element_from_coords(c).map(|e| e.bits))
            .collect::<Result<_>>()?;
        Subgroup::from_bits(self.n, &gens)
    }
}

/// A coset `H + rep` with the canonical (minimum) representative.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Coset {
    subgroup: Subgroup,
    rep: GroupElement,
}

impl Coset {
    /// The coset of `H` through `g`; `g` is reduced to the canonical
    /// representative.
    pub fn new(subgroup: Subgroup, g: &GroupElement) -> Result<Self> {
        if g.n != subgroup.n {
            return Err(Error::Dimension("coset: ambient dimension mismatch".into()));
        }
        let rep = GroupElement { n: g.n, bits: subgroup.reduce_bits(g.bits) };
        Ok(Coset { subgroup, rep })
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn rep(&self) -> GroupElement {
        self.rep
    }

    pub fn contains_bits(&self, x: u32) -> bool {
        self.subgroup.reduce_bits(x) == self.rep.bits
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.n == self.rep.n && self.contains_bits(x.bits)
    }
}

/// A character of a subgroup `H`, written in the canonical-basis
/// coordinates: `chi(x) = (-1)^{<coords(x), coeffs>}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DualCharacter {
    subgroup: Subgroup,
    coeffs: u32,
}

impl DualCharacter {
    pub fn new(subgroup: Subgroup, coeffs: u32) -> Result<Self> {
        if subgroup.dim() < 32 && coeffs >> subgroup.dim() != 0 {
            return Err(Error::Dimension(format!(
                "character word {coeffs:#x} does not fit in dim {}",
                subgroup.dim()
            )));
        }
        Ok(DualCharacter { subgroup, coeffs })
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    #[inline]
    pub fn coeffs(&self) -> u32 {
        self.coeffs
    }

    #[inline]
    pub fn is_trivial(&self) -> bool {
        self.coeffs == 0
    }

    /// Value on an element given by its coordinates. Exact `+1` or `-1`.
    #[inline]
    pub fn eval_coords(&self, c: u32) -> i64 {
        1 - 2 * ((c & self.coeffs).count_ones() as i64 & 1)
    }

    /// Value on a subgroup element.
    pub fn eval(&self, x: &GroupElement) -> Result<i64> {
        Ok(self.eval_coords(self.subgroup.coords(x)?))
    }
}
