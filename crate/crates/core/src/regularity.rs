//! Superregular parts and decompositions.
//!
//! A set `A ⊆ H + g` is *rho-superregular* on the coset when every
//! nontrivial spectrum coefficient is small against the main one:
//! `|raw[eta]| <= rho * raw[0]` for all `eta != 0`.  When some coefficient
//! is too large, splitting the coset along that character's kernel and
//! keeping the denser half boosts the density by a factor `(1 + rho)`, so
//! iterating must stop within `ceil(log_{1+rho}(1/d))` halvings.  Peeling
//! parts off until less than a `d`-fraction is left yields the
//! decomposition used by the shattering dichotomy.

use crate::fourier::coset_spectrum;
use crate::gf2::{Coset, DualCharacter, GroupElement, Subgroup};
use crate::set::SetF2;
use crate::{rat_int, Error, Rat, Result};
use num_traits::{One, Signed};

/// Smallest `k >= 0` with `(1 + rho)^k >= 1/d`, i.e. the ceiling of
/// `log_{1+rho}(1/d)`, computed exactly.
pub fn halving_iteration_bound(rho: &Rat, d: &Rat) -> u64 {
    let target = d.recip();
    let growth = Rat::one() + rho;
    let mut acc = Rat::one();
    let mut k = 0u64;
    while acc < target {
        acc *= &growth;
        k += 1;
    }
    k
}

fn check_regularity_params(rho: &Rat, d: &Rat) -> Result<()> {
    if !rho.is_positive() {
        return Err(Error::Precondition(format!("rho must be positive, got {rho}")));
    }
    if !d.is_positive() || *d > Rat::one() {
        return Err(Error::Precondition(format!("d must lie in (0, 1], got {d}")));
    }
    Ok(())
}

fn check_subset_of_coset(a: &SetF2, coset: &Coset) -> Result<()> {
    for x in a.iter() {
        if !coset.contains_bits(x) {
            return Err(Error::Precondition(format!(
                "set element {x:#x} lies outside the coset"
            )));
        }
    }
    Ok(())
}

/// If `A` fails to be `rho`-superregular on the coset, the offending
/// character: the nonzero `eta` of largest `|raw[eta]|` (ties broken by
/// the smallest coefficient word) with `|raw[eta]| > rho * raw[0]`.
/// `None` certifies superregularity.
pub fn superregularity_witness(
    a: &SetF2,
    coset: &Coset,
    rho: &Rat,
) -> Result<Option<DualCharacter>> {
    if !rho.is_positive() {
        return Err(Error::Precondition(format!("rho must be positive, got {rho}")));
    }
    let sp = coset_spectrum(a, coset)?;
    let mut best: Option<(i64, u32)> = None;
    for (eta, &v) in sp.raw().iter().enumerate().skip(1) {
        let mag = v.abs();
        if best.map_or(true, |(m, _)| mag > m) {
            best = Some((mag, eta as u32));
        }
    }
    match best {
        Some((mag, eta)) if rat_int(mag as u64) > rho * rat_int(sp.count() as u64) => Ok(Some(
            DualCharacter::new(coset.subgroup().clone(), eta).expect("eta indexes the spectrum"),
        )),
        _ => Ok(None),
    }
}

/// A `rho`-superregular subset of `A` living on the sub-coset
/// `subgroup + base_shift + shift`.
#[derive(Clone, Debug)]
pub struct SuperregularPart {
    pub part: SetF2,
    pub subgroup: Subgroup,
    /// `z`: canonical representative (w.r.t. `subgroup`) of the sub-coset
    /// inside `H`; an element of the ambient `H`.
    pub shift: GroupElement,
    /// The original coset shift `g`.
    pub base_shift: GroupElement,
    pub rho: Rat,
    /// `|part| / |subgroup|`, exact.
    pub density: Rat,
}

/// One halving step of the finder, for tests and traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalvingRecord {
    pub dim: usize,
    pub count: u64,
}

/// Like [`find_superregular_part`], also returning the density trace
/// (initial state plus one record per halving).
pub fn find_superregular_part_traced(
    a: &SetF2,
    h: &Subgroup,
    g: &GroupElement,
    rho: &Rat,
    d: &Rat,
) -> Result<(SuperregularPart, Vec<HalvingRecord>)> {
    check_regularity_params(rho, d)?;
    let base = Coset::new(h.clone(), g)?;
    check_subset_of_coset(a, &base)?;
    if rat_int(a.count()) < d * rat_int(h.size()) {
        return Err(Error::Precondition(format!(
            "need |A| >= d * |H|: {} < {} * {}",
            a.count(),
            d,
            h.size()
        )));
    }

    let iter_bound = halving_iteration_bound(rho, d);
    let mut cur = a.clone();
    let mut sub = h.clone();
    let mut z = GroupElement::zero(h.n());
    let mut trace = vec![HalvingRecord { dim: sub.dim(), count: cur.count() }];

    loop {
        let coset = Coset::new(sub.clone(), &(*g + z))?;
        let Some(eta) = superregularity_witness(&cur, &coset, rho)? else {
            break;
        };
        // Split along the kernel; `t` is the smallest basis vector of the
        // current subgroup that the character does not kill, so `t`
        // translates between the two halves.
        let kernel = sub.kernel_of_character(&eta)?;
        let t = sub
            .basis()
            .iter()
            .enumerate()
            .filter(|&(i, _)| eta.coeffs() >> i & 1 == 1)
            .map(|(_, &b)| b)
            .min()
            .ok_or_else(|| Error::Internal("nontrivial character kills every basis vector".into()))?;

        let base_bits = g.bits() ^ z.bits();
        let mut count_keep = 0u64;
        for x in kernel.elements_coord_order() {
            count_keep += cur.contains_bits(x ^ base_bits) as u64;
        }
        let count_move = cur.count() - count_keep;
        // Move only when the other half is strictly denser.
        let z_bits = if count_move > count_keep { z.bits() ^ t } else { z.bits() };
        z = GroupElement::new(h.n(), kernel.reduce_bits(z_bits))?;

        let half = Coset::new(kernel.clone(), &(*g + z))?;
        let next = cur.intersect_coset(&half)?;
        // density grows by at least (1 + rho): with |H2| = |H1|/2 this is
        // 2 * |A2| >= (1 + rho) * |A1| after clearing denominators
        let grew = rat_int(2 * next.count()) >= (Rat::one() + rho) * rat_int(cur.count());
        if !grew {
            return Err(Error::Internal(format!(
                "halving did not gain (1+rho): {} of {} kept",
                next.count(),
                cur.count()
            )));
        }
        cur = next;
        sub = kernel;
        trace.push(HalvingRecord { dim: sub.dim(), count: cur.count() });
        if trace.len() as u64 - 1 > iter_bound {
            return Err(Error::Internal(format!(
                "halving exceeded its iteration bound {iter_bound}"
            )));
        }
    }

    let density = rat_int(cur.count()) / rat_int(sub.size());
    if density < *d {
        return Err(Error::Internal(format!("final density {density} dropped below d = {d}")));
    }
    let part = SuperregularPart {
        part: cur,
        subgroup: sub,
        shift: z,
        base_shift: *g,
        rho: rho.clone(),
        density,
    };
    Ok((part, trace))
}

/// Find a `rho`-superregular part of `A ⊆ H + g` of density at least `d`,
/// on a sub-coset of index at most `2^ceil(log_{1+rho}(1/d))`, by
/// repeatedly keeping the denser half along a witness character.
pub fn find_superregular_part(
    a: &SetF2,
    h: &Subgroup,
    g: &GroupElement,
    rho: &Rat,
    d: &Rat,
) -> Result<SuperregularPart> {
    find_superregular_part_traced(a, h, g, rho, d).map(|(p, _)| p)
}

/// Decomposition of `A ⊆ H + g` into disjoint superregular parts plus a
/// small leftover.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub parts: Vec<SuperregularPart>,
    pub leftover: SetF2,
    pub subgroup: Subgroup,
    pub base_shift: GroupElement,
    pub rho: Rat,
    pub d: Rat,
}

/// Peel superregular parts off `A` until at most `d * |H|` elements are
/// left.  Each part has density at least `d` on its own sub-coset, so the
/// loop strictly shrinks the remainder and terminates.
pub fn superregular_decomposition(
    a: &SetF2,
    h: &Subgroup,
    g: &GroupElement,
    rho: &Rat,
    d: &Rat,
) -> Result<Decomposition> {
    check_regularity_params(rho, d)?;
    let base = Coset::new(h.clone(), g)?;
    check_subset_of_coset(a, &base)?;

    let cutoff = d * rat_int(h.size());
    let mut rest = a.clone();
    let mut parts = Vec::new();
    while rat_int(rest.count()) > cutoff {
        let part = find_superregular_part(&rest, h, g, rho, d)?;
        rest = rest.minus(&part.part)?;
        parts.push(part);
    }
    Ok(Decomposition {
        parts,
        leftover: rest,
        subgroup: h.clone(),
        base_shift: *g,
        rho: rho.clone(),
        d: d.clone(),
    })
}
