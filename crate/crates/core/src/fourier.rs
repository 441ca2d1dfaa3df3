//! Walsh–Hadamard spectra of set indicators restricted to cosets.
//!
//! Spectra are kept *unnormalized* as exact integers: for a coset `H + g`
//! and character index `eta` (a coefficient word in the canonical basis of
//! `H`, see [`crate::gf2::DualCharacter`]),
//!
//! ```text
//! raw[eta] = sum_{x in H} A(x + g) * chi_eta(x)      (an integer)
//! ```
//!
//! so the analytic Fourier coefficient is `raw[eta] / |H|`.  All
//! comparisons against rational thresholds are done by clearing
//! denominators, never through floats.

use crate::gf2::{Coset, DualCharacter, GroupElement, Subgroup};
use crate::set::SetF2;
use crate::{rat_int, Error, Rat, Result};

/// In-place Walsh–Hadamard transform. The length must be a power of two.
///
/// Self-inverse up to the factor `len`: applying it twice multiplies every
/// entry by `len`.  For 0/1 inputs of length `2^k`, `k <= 30`, intermediate
/// values stay far below `i64` overflow.
pub fn wht_in_place(vals: &mut [i64]) -> Result<()> {
    let len = vals.len();
    if len == 0 || len & (len - 1) != 0 {
        return Err(Error::Precondition(format!("wht length {len} is not a power of two")));
    }
    let mut h = 1;
    while h < len {
        for block in vals.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    Ok(())
}

/// The exact spectrum of `A` restricted to a coset.
#[derive(Clone, Debug)]
pub struct CosetSpectrum {
    coset: Coset,
    raw: Vec<i64>,
}

impl CosetSpectrum {
    pub fn coset(&self) -> &Coset {
        &self.coset
    }

    /// Unnormalized coefficients, indexed by character coefficient word.
    pub fn raw(&self) -> &[i64] {
        &self.raw
    }

    /// `raw[0] = |A ∩ (H + g)|`.
    pub fn count(&self) -> i64 {
        self.raw[0]
    }

    pub fn value_of(&self, chi: &DualCharacter) -> Result<i64> {
        if chi.subgroup() != self.coset.subgroup() {
            return Err(Error::Dimension("character belongs to a different subgroup".into()));
        }
        Ok(self.raw[chi.coeffs() as usize])
    }
}

/// Raw spectrum of `x -> A(x + base)` on the subgroup `h`, with the base
/// point taken literally (not reduced to the canonical coset
/// representative).  Replacing `base` by `base + h0` with `h0 in H`
/// multiplies `raw[eta]` by `chi_eta(h0)`, so callers that combine spectra
/// of related cosets (triangle counting) need this exact-base variant.
pub fn spectrum_with_base(a: &SetF2, h: &Subgroup, base: &GroupElement) -> Result<Vec<i64>> {
    if base.n() != a.n() || h.n() != a.n() {
        return Err(Error::Dimension("spectrum_with_base: dimension mismatch".into()));
    }
    let b = base.bits();
    let mut raw: Vec<i64> =
        h.elements_coord_order().iter().map(|&x| a.contains_bits(x ^ b) as i64).collect();
    wht_in_place(&mut raw)?;
    Ok(raw)
}

/// Spectrum of the indicator of `A` on the coset `H + g`, via one gather
/// pass in coordinate order and an in-place transform.
pub fn coset_spectrum(a: &SetF2, coset: &Coset) -> Result<CosetSpectrum> {
    let raw = spectrum_with_base(a, coset.subgroup(), &coset.rep())?;
    Ok(CosetSpectrum { coset: coset.clone(), raw })
}

/// Per-sub-coset counts of `A` on `H + g`, split along `Hp <= H`: for each
/// canonical representative `v` of an `Hp`-coset within `H`, the exact
/// count `|A ∩ (Hp + g + v)|`.  Returned in ascending representative order.
pub fn sub_coset_counts(
    a: &SetF2,
    h: &Subgroup,
    hp: &Subgroup,
    g: &GroupElement,
) -> Result<Vec<(u32, u64)>> {
    if g.n() != a.n() || h.n() != a.n() {
        return Err(Error::Dimension("sub_coset_counts: dimension mismatch".into()));
    }
    let reps = h.coset_representatives(hp)?;
    let hp_elems = hp.elements_coord_order();
    let g = g.bits();
    Ok(reps
        .into_iter()
        .map(|v| {
            let c = hp_elems.iter().filter(|&&p| a.contains_bits(p ^ v ^ g)).count() as u64;
            (v, c)
        })
        .collect())
}

/// Densities of `A` on the `Hp`-sub-cosets of `H + g`, keyed by canonical
/// representative: `v -> |A ∩ (Hp + g + v)| / |Hp|`, exact rationals.
pub fn averaged_density(
    a: &SetF2,
    h: &Subgroup,
    hp: &Subgroup,
    g: &GroupElement,
) -> Result<Vec<(u32, Rat)>> {
    let size = rat_int(hp.size());
    Ok(sub_coset_counts(a, h, hp, g)?
        .into_iter()
        .map(|(v, c)| (v, rat_int(c) / &size))
        .collect())
}
