//! Triangle counting, packing and removal-distance bounds.
//!
//! Ordered triangle count of `A`: the number of triples `(x, y, z) in A^3`
//! with `x + y + z = 0`, *including* degenerate ones.  Degenerate triples
//! all involve `0`, which gives the exact ledger
//!
//! ```text
//! ordered = 6 * distinct + 3 * (|A| - 1) * [0 in A] + [0 in A]
//! ```
//!
//! where `distinct` counts unordered triangles with three distinct
//! (necessarily nonzero) elements.  All counters here are exact; two of
//! them are algorithmically independent and must agree bit for bit.

use crate::fourier::spectrum_with_base;
use crate::gf2::{GroupElement, Subgroup};
use crate::set::SetF2;
use crate::{rat_int, Error, Rat, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// An unordered triangle with distinct elements, stored sorted
/// `x < y < z`.  Distinctness forces all three to be nonzero.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Triangle {
    x: GroupElement,
    y: GroupElement,
    z: GroupElement,
}

impl Triangle {
    pub fn new(a: GroupElement, b: GroupElement, c: GroupElement) -> Result<Self> {
        if a.n() != b.n() || b.n() != c.n() {
            return Err(Error::Dimension("triangle: mixed ambient dimensions".into()));
        }
        if !(a + b + c).is_zero() {
            return Err(Error::Precondition("triangle: elements do not sum to zero".into()));
        }
        let mut v = [a, b, c];
        v.sort();
        if v[0] == v[1] || v[1] == v[2] {
            return Err(Error::Precondition("triangle: elements are not distinct".into()));
        }
        Ok(Triangle { x: v[0], y: v[1], z: v[2] })
    }

    pub fn x(&self) -> GroupElement {
        self.x
    }

    pub fn y(&self) -> GroupElement {
        self.y
    }

    pub fn z(&self) -> GroupElement {
        self.z
    }

    pub fn elements(&self) -> [GroupElement; 3] {
        [self.x, self.y, self.z]
    }
}

/// Ordered count by the definition: for each `(x, y) in A^2` test
/// `x + y in A`.  `O(|A|^2)` with a parallel outer loop.
pub fn count_ordered_bruteforce(a: &SetF2) -> u64 {
    let elems = a.elements();
    elems
        .par_iter()
        .map(|&x| elems.iter().filter(|&&y| a.contains_bits(x ^ y)).count() as u64)
        .sum()
}

/// Ordered count through the spectrum: `N^2 * sum_eta Ahat(eta)^3` equals
/// `(sum_eta raw[eta]^3) / N` exactly, where `raw` is the unnormalized
/// spectrum over the full group with natural bit indexing.
pub fn count_ordered_fourier(a: &SetF2) -> Result<u64> {
    let n = a.n();
    let mut vals: Vec<i64> = (0..1u32 << n).map(|x| a.contains_bits(x) as i64).collect();
    crate::fourier::wht_in_place(&mut vals)?;
    let total: i128 = vals.iter().map(|&v| (v as i128).pow(3)).sum();
    let nn = 1i128 << n;
    if total < 0 || total % nn != 0 {
        return Err(Error::Internal(format!(
            "cubic spectrum sum {total} is not a nonnegative multiple of N = {nn}"
        )));
    }
    Ok((total / nn) as u64)
}

/// Exact ledger between the ordered and the distinct count.
pub fn ordered_from_distinct(distinct: u64, set_size: u64, contains_zero: bool) -> u64 {
    let z = contains_zero as u64;
    6 * distinct + 3 * set_size.saturating_sub(1) * z + z
}

/// All distinct-element triangles of `A` as sorted triples. `O(|A|^2)`.
pub fn distinct_triangles(a: &SetF2) -> Vec<Triangle> {
    let elems = a.elements();
    let n = a.n();
    let mut out = Vec::new();
    for (i, &x) in elems.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for &y in &elems[i + 1..] {
            let z = x ^ y;
            if z > y && a.contains_bits(z) {
                out.push(
                    Triangle::new(
                        GroupElement::new(n, x).unwrap(),
                        GroupElement::new(n, y).unwrap(),
                        GroupElement::new(n, z).unwrap(),
                    )
                    .unwrap(),
                );
            }
        }
    }
    out
}

/// Number of triples `(a, b, c)` with `a in A ∩ (Hp + g1 + z1)`,
/// `b in B ∩ (H + g2)`, `c in C ∩ (H + g3)` and `a + b + c = 0`, computed
/// by the double Fourier sum in exact integers: summing
/// `Ahat(beta|Hp) * Bhat(beta) * Chat(beta) * chi_beta(z1)` over all
/// characters `beta` of `H` enumerates exactly the lemma's pairs
/// `(alpha, eta)` with `alpha` a character of `Hp` and `eta` ranging over
/// the annihilator of `Hp` in the dual of `H`.
#[allow(clippy::too_many_arguments)]
pub fn count_three_cosets(
    a: &SetF2,
    b: &SetF2,
    c: &SetF2,
    hp: &Subgroup,
    h: &Subgroup,
    g1: &GroupElement,
    g2: &GroupElement,
    g3: &GroupElement,
    z1: &GroupElement,
) -> Result<u64> {
    if a.n() != b.n() || b.n() != c.n() || h.n() != a.n() {
        return Err(Error::Dimension("count_three_cosets: dimension mismatch".into()));
    }
    if !hp.is_subgroup_of(h) {
        return Err(Error::NotSubgroup("count_three_cosets: Hp must refine H".into()));
    }
    if !(*g1 + *g2 + *g3).is_zero() {
        return Err(Error::Precondition("count_three_cosets: g1 + g2 + g3 != 0".into()));
    }
    let z1_coords = h
        .coords(z1)
        .map_err(|_| Error::NotInSubgroup("count_three_cosets: z1 must lie in H".into()))?;

    let raw_a = spectrum_with_base(a, hp, &(*g1 + *z1))?;
    let raw_b = spectrum_with_base(b, h, g2)?;
    let raw_c = spectrum_with_base(c, h, g3)?;

    // Restriction of a character of H to Hp, as a matrix of coordinate rows.
    let restrict_rows: Vec<u32> = hp
        .basis()
        .iter()
        .map(|&v| h.coords(&GroupElement::new(h.n(), v).unwrap()))
        .collect::<Result<_>>()?;

    let mut total: i128 = 0;
    for beta in 0..raw_b.len() as u32 {
        let mut alpha = 0u32;
        for (j, &row) in restrict_rows.iter().enumerate() {
            alpha |= ((row & beta).count_ones() & 1) << j;
        }
        let sign = (1 - 2 * ((beta & z1_coords).count_ones() as i128 & 1)) as i128;
        total += raw_a[alpha as usize] as i128
            * raw_b[beta as usize] as i128
            * raw_c[beta as usize] as i128
            * sign;
    }
    let hsize = h.size() as i128;
    if total < 0 || total % hsize != 0 {
        return Err(Error::Internal(format!(
            "three-coset character sum {total} is not a nonnegative multiple of |H| = {hsize}"
        )));
    }
    Ok((total / hsize) as u64)
}

/// A set of pairwise disjoint distinct-element triangles of one set.
#[derive(Clone, Debug)]
pub struct Packing {
    n: usize,
    triangles: Vec<Triangle>,
}

impl Packing {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Union of the packed triangles' elements.
    pub fn support(&self) -> SetF2 {
        let mut s = SetF2::empty(self.n).expect("packing dimension is valid");
        for t in &self.triangles {
            for e in t.elements() {
                s.insert_bits(e.bits());
            }
        }
        s
    }
}

/// Greedy maximal packing: visit unordered pairs of distinct elements of
/// `A` in a seeded random order; for a pair `{x, y}` (relabeled `x < y`)
/// accept the triangle when `z = x + y` satisfies `z > y`, `z in A`, and
/// all three are still unused.  The result is maximal: no distinct-element
/// triangle of `A` is disjoint from the support.
pub fn greedy_max_packing(a: &SetF2, seed: u64) -> Packing {
    let n = a.n();
    let mut elems: Vec<u32> = a.iter().filter(|&x| x != 0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    elems.shuffle(&mut rng);

    let mut used = SetF2::empty(n).expect("valid dimension");
    let mut triangles = Vec::new();
    for i in 0..elems.len() {
        let ei = elems[i];
        if used.contains_bits(ei) {
            continue;
        }
        for &ej in &elems[i + 1..] {
            if used.contains_bits(ei) {
                break;
            }
            if used.contains_bits(ej) {
                continue;
            }
            let (x, y) = (ei.min(ej), ei.max(ej));
            let z = x ^ y;
            if z > y && a.contains_bits(z) && !used.contains_bits(z) {
                triangles.push(
                    Triangle::new(
                        GroupElement::new(n, x).unwrap(),
                        GroupElement::new(n, y).unwrap(),
                        GroupElement::new(n, z).unwrap(),
                    )
                    .unwrap(),
                );
                used.insert_bits(x);
                used.insert_bits(y);
                used.insert_bits(z);
            }
        }
    }
    triangles.sort();
    Packing { n, triangles }
}

/// Sandwich on the removal distance ("farness") of `A`: the fraction of
/// `G` that must be deleted from `A` to destroy every triangle, including
/// degenerate ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarnessBounds {
    pub lower: Rat,
    pub upper: Rat,
    pub packing_size: u64,
}

/// `m/N <= farness <= (3m + [0 in A])/N` for a maximal packing of size
/// `m`: each packed triangle needs one deletion, and deleting the packing
/// support plus `0` leaves nothing to build a triangle from.
pub fn farness_bounds(a: &SetF2, packing: &Packing) -> Result<FarnessBounds> {
    validate_packing(a, packing)?;
    let m = packing.len() as u64;
    let nn = a.universe() as i64;
    let zero = a.contains_bits(0) as i64;
    Ok(FarnessBounds {
        lower: crate::rat(m as i64, nn),
        upper: crate::rat(3 * m as i64 + zero, nn),
        packing_size: m,
    })
}

/// Checks the packing is well-formed for `A` *and* maximal.
fn validate_packing(a: &SetF2, packing: &Packing) -> Result<()> {
    if packing.n != a.n() {
        return Err(Error::Dimension("packing: dimension mismatch".into()));
    }
    let mut seen = SetF2::empty(a.n())?;
    for t in &packing.triangles {
        for e in t.elements() {
            if !a.contains(&e) {
                return Err(Error::Precondition(format!("packed element {e:?} is not in A")));
            }
            if seen.contains_bits(e.bits()) {
                return Err(Error::Precondition(format!("packed triangles overlap at {e:?}")));
            }
            seen.insert_bits(e.bits());
        }
    }
    // maximality: no distinct-element triangle of A avoids the support
    let elems = a.elements();
    for (i, &x) in elems.iter().enumerate() {
        if x == 0 || seen.contains_bits(x) {
            continue;
        }
        for &y in &elems[i + 1..] {
            if seen.contains_bits(y) {
                continue;
            }
            let z = x ^ y;
            if z > y && a.contains_bits(z) && !seen.contains_bits(z) {
                return Err(Error::Precondition(format!(
                    "packing is not maximal: triangle {x:#x},{y:#x},{z:#x} is disjoint from it"
                )));
            }
        }
    }
    Ok(())
}

/// Exact farness by exhaustive search, for `|A| <= 20`.  A set containing
/// `0` always needs `0` deleted (the triple `(0,0,0)`); the rest is a
/// minimum hitting set over the distinct-element triangles, found by
/// branching on the three vertices of an unhit triangle.
pub fn exact_farness_small(a: &SetF2) -> Result<Rat> {
    let size = a.count();
    if size > 20 {
        return Err(Error::Precondition(format!(
            "exact farness supports |A| <= 20, got {size}"
        )));
    }
    let zero_cost = a.contains_bits(0) as u64;
    let mut work = a.clone();
    work.remove_bits(0);
    let tris: Vec<[u32; 3]> = distinct_triangles(&work)
        .iter()
        .map(|t| [t.x().bits(), t.y().bits(), t.z().bits()])
        .collect();

    fn search(tris: &[[u32; 3]], deleted: &mut Vec<u32>, best: &mut u64) {
        if deleted.len() as u64 >= *best {
            return;
        }
        match tris.iter().find(|t| t.iter().all(|v| !deleted.contains(v))) {
            None => *best = deleted.len() as u64,
            Some(t) => {
                for &v in t {
                    deleted.push(v);
                    search(tris, deleted, best);
                    deleted.pop();
                }
            }
        }
    }

    let mut best = size; // deleting everything certainly works
    search(&tris, &mut Vec::new(), &mut best);
    Ok(crate::rat((zero_cost + best) as i64, a.universe() as i64))
}

/// Monte Carlo triangle tester: draws `trials` uniform pairs `(x, y)` and
/// reports the hit fraction of `x, y, x + y all in A` as an exact rational.
/// Triangle-free sets yield exactly zero.
pub fn sample_tester(a: &SetF2, trials: u64, seed: u64) -> Result<Rat> {
    if trials == 0 {
        return Err(Error::Precondition("sample_tester needs at least one trial".into()));
    }
    let n = a.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..trials {
        let x = rng.random_range(0..1u32 << n);
        let y = rng.random_range(0..1u32 << n);
        if a.contains_bits(x) && a.contains_bits(y) && a.contains_bits(x ^ y) {
            hits += 1;
        }
    }
    Ok(rat_int(hits) / rat_int(trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::Coset;

    fn random_set(n: usize, density_pct: u32, rng: &mut ChaCha8Rng) -> SetF2 {
        let mut s = SetF2::empty(n).unwrap();
        for x in 0..1u32 << n {
            if rng.random_range(0..100) < density_pct {
                s.insert_bits(x);
            }
        }
        s
    }

    #[test]
    fn small_counting_examples() {
        // empty set
        let a = SetF2::empty(4).unwrap();
        assert_eq!(count_ordered_bruteforce(&a), 0);
        assert_eq!(count_ordered_fourier(&a).unwrap(), 0);

        // {0}: only (0,0,0)
        let a = SetF2::from_elements(4, &[0]).unwrap();
        assert_eq!(count_ordered_bruteforce(&a), 1);
        assert_eq!(count_ordered_fourier(&a).unwrap(), 1);

        // {0, a}: (0,0,0) and three orderings of (a,a,0)
        let a = SetF2::from_elements(4, &[0, 5]).unwrap();
        assert_eq!(count_ordered_bruteforce(&a), 4);
        assert_eq!(count_ordered_fourier(&a).unwrap(), 4);

        // a subgroup of size 2^k: every pair closes, count = |A|^2
        let h = Subgroup::from_bits(5, &[0b00111, 0b01001, 0b10000]).unwrap();
        let a = SetF2::from_elements(5, &h.elements_coord_order()).unwrap();
        assert_eq!(count_ordered_bruteforce(&a), 64);
        assert_eq!(count_ordered_fourier(&a).unwrap(), 64);

        // the smallest distinct triangle
        let a = SetF2::from_elements(3, &[0b001, 0b010, 0b011]).unwrap();
        assert_eq!(count_ordered_bruteforce(&a), 6);
        assert_eq!(count_ordered_fourier(&a).unwrap(), 6);
    }

    #[test]
    fn counters_agree_and_obey_the_degeneracy_ledger() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = rng.random_range(1..=6usize);
            let a = random_set(n, rng.random_range(0..=100), &mut rng);
            let brute = count_ordered_bruteforce(&a);
            let fourier = count_ordered_fourier(&a).unwrap();
            assert_eq!(brute, fourier);
            let distinct = distinct_triangles(&a).len() as u64;
            assert_eq!(brute, ordered_from_distinct(distinct, a.count(), a.contains_bits(0)));
        }
    }

    #[test]
    fn three_coset_count_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..100 {
            let n = rng.random_range(2..=10usize);
            let hg: Vec<u32> =
                (0..rng.random_range(1..=7)).map(|_| rng.random_range(0..1u32 << n)).collect();
            let h = Subgroup::from_bits(n, &hg).unwrap();
            let helems = h.elements_coord_order();
            let pg: Vec<u32> =
                (0..rng.random_range(0..4)).map(|_| *helems.choose(&mut rng).unwrap()).collect();
            let hp = Subgroup::from_bits(n, &pg).unwrap();

            let a = random_set(n, rng.random_range(10..95), &mut rng);
            let b = random_set(n, rng.random_range(10..95), &mut rng);
            let c = random_set(n, rng.random_range(10..95), &mut rng);
            let g1 = GroupElement::new(n, rng.random_range(0..1u32 << n)).unwrap();
            let g2 = GroupElement::new(n, rng.random_range(0..1u32 << n)).unwrap();
            let g3 = g1 + g2;
            let z1 = GroupElement::new(n, *helems.choose(&mut rng).unwrap()).unwrap();

            let fast = count_three_cosets(&a, &b, &c, &hp, &h, &g1, &g2, &g3, &z1).unwrap();

            // oracle: loop over the first two cosets, close the third
            let base_a = g1.bits() ^ z1.bits();
            let mut slow = 0u64;
            for &p in &hp.elements_coord_order() {
                let av = p ^ base_a;
                if !a.contains_bits(av) {
                    continue;
                }
                for &x in &helems {
                    let bv = x ^ g2.bits();
                    if b.contains_bits(bv) && c.contains_bits(av ^ bv) {
                        slow += 1;
                    }
                }
            }
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn three_coset_count_rejects_bad_inputs() {
        let h = Subgroup::full(4);
        let hp = Subgroup::from_bits(4, &[0b0001]).unwrap();
        let other = Subgroup::from_bits(4, &[0b0011]).unwrap();
        let a = SetF2::empty(4).unwrap();
        let g = |b| GroupElement::new(4, b).unwrap();
        // g1 + g2 + g3 != 0
        assert!(matches!(
            count_three_cosets(&a, &a, &a, &hp, &h, &g(1), &g(2), &g(0), &g(0)),
            Err(Error::Precondition(_))
        ));
        // Hp not inside H
        assert!(matches!(
            count_three_cosets(&a, &a, &a, &h, &other, &g(0), &g(0), &g(0), &g(0)),
            Err(Error::NotSubgroup(_))
        ));
        // z1 outside H
        assert!(matches!(
            count_three_cosets(&a, &a, &a, &other, &other, &g(1), &g(2), &g(3), &g(0b0100)),
            Err(Error::NotInSubgroup(_))
        ));
    }

    #[test]
    fn greedy_packing_is_valid_maximal_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for round in 0..60 {
            let n = rng.random_range(2..=8usize);
            let a = random_set(n, rng.random_range(5..=100), &mut rng);
            let p1 = greedy_max_packing(&a, round);
            let p2 = greedy_max_packing(&a, round);
            assert_eq!(p1.triangles(), p2.triangles(), "same seed, same packing");
            // validity + maximality is exactly what farness_bounds checks
            let fb = farness_bounds(&a, &p1).unwrap();
            assert_eq!(fb.packing_size, p1.len() as u64);
            assert!(fb.lower <= fb.upper);
            // support size is 3m
            assert_eq!(p1.support().count(), 3 * p1.len() as u64);
        }
    }

    #[test]
    fn farness_bounds_reject_invalid_packings() {
        let a = SetF2::from_elements(3, &[0b001, 0b010, 0b011, 0b100, 0b110, 0b111]).unwrap();
        // an empty packing is not maximal here (a triangle exists)
        let empty = Packing { n: 3, triangles: vec![] };
        assert!(matches!(farness_bounds(&a, &empty), Err(Error::Precondition(_))));
        // a packed element outside A
        let t = Triangle::new(
            GroupElement::new(3, 0b001).unwrap(),
            GroupElement::new(3, 0b100).unwrap(),
            GroupElement::new(3, 0b101).unwrap(),
        )
        .unwrap();
        let bad = Packing { n: 3, triangles: vec![t] };
        assert!(matches!(farness_bounds(&a, &bad), Err(Error::Precondition(_))));
    }

    /// Oracle for the exact farness: try all subsets in increasing size.
    fn farness_subset_oracle(a: &SetF2) -> Rat {
        let elems = a.elements();
        let k = elems.len();
        for del in 0..=k {
            // all subsets of size `del`
            let mut found = false;
            for mask in 0..1u32 << k {
                if mask.count_ones() as usize != del {
                    continue;
                }
                let mut b = a.clone();
                for (i, &e) in elems.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        b.remove_bits(e);
                    }
                }
                if count_ordered_bruteforce(&b) == 0 {
                    found = true;
                    break;
                }
            }
            if found {
                return crate::rat(del as i64, a.universe() as i64);
            }
        }
        unreachable!("deleting everything leaves no triangles")
    }

    #[test]
    fn exact_farness_matches_subset_oracle_and_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for round in 0..40 {
            let n = rng.random_range(3..=5usize);
            let mut a = random_set(n, 40, &mut rng);
            while a.count() > 10 {
                let e = *a.elements().choose(&mut rng).unwrap();
                a.remove_bits(e);
            }
            let exact = exact_farness_small(&a).unwrap();
            assert_eq!(exact, farness_subset_oracle(&a));
            let packing = greedy_max_packing(&a, round);
            let fb = farness_bounds(&a, &packing).unwrap();
            assert!(fb.lower <= exact && exact <= fb.upper, "sandwich violated");
        }
        // guard on the size precondition
        let big = SetF2::from_elements(6, &(0..21).collect::<Vec<_>>()).unwrap();
        assert!(matches!(exact_farness_small(&big), Err(Error::Precondition(_))));
    }

    #[test]
    fn sample_tester_hits_zero_and_one_exactly() {
        // halfspace: triangle-free, so never a hit
        let mut half = SetF2::empty(6).unwrap();
        for x in 0..1u32 << 6 {
            if x >> 3 & 1 == 1 {
                half.insert_bits(x);
            }
        }
        assert_eq!(sample_tester(&half, 100_000, 7).unwrap(), crate::rat(0, 1));

        // the full group: every draw is a triangle
        let mut full = SetF2::empty(4).unwrap();
        for x in 0..16 {
            full.insert_bits(x);
        }
        assert_eq!(sample_tester(&full, 10_000, 7).unwrap(), crate::rat(1, 1));

        assert!(sample_tester(&full, 0, 7).is_err());
    }

    #[test]
    fn coset_restriction_helpers() {
        let h = Subgroup::from_bits(4, &[0b0011, 0b0100]).unwrap();
        let g = GroupElement::new(4, 0b1000).unwrap();
        let coset = Coset::new(h.clone(), &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let a = random_set(4, 60, &mut rng);
        let restricted = a.intersect_coset(&coset).unwrap();
        assert!(restricted.is_subset_of(&a));
        for x in restricted.elements() {
            assert!(coset.contains_bits(x));
        }
        assert_eq!(restricted.count(), a.coset_count(&coset).unwrap());
    }
}
