//! Entropy bookkeeping, the shattering predicate, and the dichotomy that
//! either counts triangles across three cosets or produces a shattering
//! certificate.
//!
//! The potential is `f(x) = x ln x` (natural log, `f(0) = 0`).  The base
//! matters: the refinement accounting needs
//! `(1 - 3/4 + f(3/4)) / 20 >= 1/600`, which holds for the natural log
//! (~0.0017119) and fails for base 2.  Entropy is the only floating-point
//! quantity here — densities, counts and thresholds stay exact rationals,
//! so every tolerance question is confined to `f` itself.

use std::collections::BTreeSet;

use crate::fourier::sub_coset_counts;
use crate::gf2::{Coset, GroupElement, Subgroup};
use crate::regularity::superregular_decomposition;
use crate::set::SetF2;
use crate::triangles::count_three_cosets;
use crate::{rat, rat_int, Error, Rat, Result};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `x ln x` extended by continuity to `0` at `x = 0`, for any `x >= 0`.
fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub(crate) fn rat_f64(x: &Rat) -> f64 {
    x.to_f64().expect("rational within f64 range")
}

/// The entropy summand `f(x) = x ln x`, with `f(0) = 0`.  Nonpositive on
/// `[0, 1]`, with minimum `-1/e`.
pub fn entropy(x: &Rat) -> Result<f64> {
    if x.is_negative() || *x > Rat::one() {
        return Err(Error::Precondition(format!("entropy domain is [0,1], got {x}")));
    }
    Ok(xlnx(rat_f64(x)))
}

/// Mean of `f(density of A)` over the `Hp`-cosets that partition `outer`.
/// Elements of `A` outside `outer` are ignored; densities are exact and
/// only the final `f` evaluation is floating point.
pub fn mean_entropy(a: &SetF2, outer: &Coset, hp: &Subgroup) -> Result<f64> {
    if a.n() != outer.subgroup().n() {
        return Err(Error::Dimension("mean_entropy: dimension mismatch".into()));
    }
    if !hp.is_subgroup_of(outer.subgroup()) {
        return Err(Error::NotSubgroup("mean_entropy: Hp must refine the outer subgroup".into()));
    }
    let cells = (outer.subgroup().size() / hp.size()) as f64;
    let mut sum = 0.0;
    for (_, cnt) in sub_coset_counts(a, outer.subgroup(), hp, &outer.rep())? {
        sum += xlnx(cnt as f64 / hp.size() as f64);
    }
    Ok(sum / cells)
}

/// [`mean_entropy`] over the whole group: the potential driving the
/// refinement loop.
pub fn mean_entropy_full(a: &SetF2, hp: &Subgroup) -> Result<f64> {
    let full = Coset::new(Subgroup::full(a.n()), &GroupElement::zero(a.n()))?;
    mean_entropy(a, &full, hp)
}

/// Witness that `Hp` (alpha, beta, k)-shatters `A` on the target coset: at
/// least an `alpha`-fraction of the `Hp`-cosets hold at most a `beta`
/// fraction of the average density, while `[H : Hp] <= 2^k`.
#[derive(Clone, Debug)]
pub struct ShatterCertificate {
    pub refining_subgroup: Subgroup,
    pub target_coset: Coset,
    pub alpha: Rat,
    pub beta: Rat,
    pub k: f64,
    /// Exact fraction of `Hp`-cosets with `|A ∩ cell| <= beta * d * |Hp|`.
    pub measured_low_fraction: Rat,
    /// Density `d` of `A` on the target coset.
    pub base_density: Rat,
}

impl ShatterCertificate {
    /// Re-derive every claim in the certificate from `A` alone.
    pub fn verify(&self, a: &SetF2) -> Result<()> {
        let again = check_shatter(
            a,
            self.target_coset.subgroup(),
            &self.target_coset.rep(),
            &self.refining_subgroup,
            &self.alpha,
            &self.beta,
            self.k,
        )?
        .ok_or_else(|| Error::Internal("certificate does not reproduce".into()))?;
        if again.measured_low_fraction != self.measured_low_fraction
            || again.base_density != self.base_density
        {
            return Err(Error::Internal("certificate quantities do not reproduce".into()));
        }
        Ok(())
    }
}

/// Decide whether `Hp` (alpha, beta, k)-shatters `A` on `H + g`, returning
/// the certificate when it does.  The density comparisons are exact; the
/// index gate `[H : Hp] <= 2^k` compares against the real `k` with 1e-12
/// slack.
pub fn check_shatter(
    a: &SetF2,
    h: &Subgroup,
    g: &GroupElement,
    hp: &Subgroup,
    alpha: &Rat,
    beta: &Rat,
    k: f64,
) -> Result<Option<ShatterCertificate>> {
    if !alpha.is_positive() || *alpha > Rat::one() || !beta.is_positive() || *beta > Rat::one() {
        return Err(Error::Precondition(format!(
            "alpha and beta must lie in (0,1], got {alpha}, {beta}"
        )));
    }
    if !hp.is_subgroup_of(h) {
        return Err(Error::NotSubgroup("check_shatter: Hp must refine H".into()));
    }
    let coset = Coset::new(h.clone(), g)?;
    let density = rat_int(a.coset_count(&coset)?) / rat_int(h.size());

    if ((h.dim() - hp.dim()) as f64) > k + 1e-12 {
        return Ok(None);
    }
    let cell_threshold = beta * &density * rat_int(hp.size());
    let counts = sub_coset_counts(a, h, hp, g)?;
    let low = counts.iter().filter(|(_, c)| rat_int(*c) <= cell_threshold).count();
    let fraction = rat(low as i64, counts.len() as i64);
    if fraction < *alpha {
        return Ok(None);
    }
    Ok(Some(ShatterCertificate {
        refining_subgroup: hp.clone(),
        target_coset: coset,
        alpha: alpha.clone(),
        beta: beta.clone(),
        k,
        measured_low_fraction: fraction,
        base_density: density,
    }))
}

/// The guaranteed potential gain from a shattering certificate:
/// `(1 - beta + f(beta)) * alpha * density`.
pub fn entropy_increment_lower_bound(alpha: &Rat, beta: &Rat, density: &Rat) -> Result<f64> {
    for (name, v) in [("alpha", alpha), ("beta", beta), ("density", density)] {
        if v.is_negative() || *v > Rat::one() {
            return Err(Error::Precondition(format!("{name} must lie in [0,1], got {v}")));
        }
    }
    Ok((1.0 - rat_f64(beta) + xlnx(rat_f64(beta))) * rat_f64(alpha) * rat_f64(density))
}

/// Test oracle for the defect form of Jensen's inequality: with weights
/// `w` summing to 1, values `x`, weighted mean `a`, and a set of indices
/// whose values sit at or below `beta * a` carrying total weight `c`,
/// checks `sum w_i f(x_i) >= f(a) + (1 - beta + f(beta)) * c * a` with
/// slack 1e-9.
pub fn defect_jensen_check(
    weights: &[Rat],
    values: &[Rat],
    beta: &Rat,
    low_index_set: &BTreeSet<usize>,
) -> Result<bool> {
    if weights.len() != values.len() {
        return Err(Error::Precondition("weights and values must have equal length".into()));
    }
    if weights.iter().any(|w| w.is_negative()) || values.iter().any(|x| x.is_negative()) {
        return Err(Error::Precondition("weights and values must be nonnegative".into()));
    }
    if weights.iter().sum::<Rat>() != Rat::one() {
        return Err(Error::Precondition("weights must sum to 1".into()));
    }
    if !beta.is_positive() || *beta > Rat::one() {
        return Err(Error::Precondition(format!("beta must lie in (0,1], got {beta}")));
    }
    let a: Rat = weights.iter().zip(values).map(|(w, x)| w * x).sum();
    let threshold = beta * &a;
    let mut c = Rat::zero();
    for &i in low_index_set {
        if i >= values.len() {
            return Err(Error::Precondition(format!("low index {i} out of range")));
        }
        if values[i] > threshold {
            return Err(Error::Precondition(format!(
                "value at low index {i} exceeds beta * mean"
            )));
        }
        c += &weights[i];
    }
    let lhs: f64 = weights.iter().zip(values).map(|(w, x)| rat_f64(w) * xlnx(rat_f64(x))).sum();
    let rhs =
        xlnx(rat_f64(&a)) + (1.0 - rat_f64(beta) + xlnx(rat_f64(beta))) * rat_f64(&c) * rat_f64(&a);
    Ok(lhs >= rhs - 1e-9)
}

/// A verified lower bound on the number of cross-coset triangles: pairs
/// `(x, y)` with `x` in the counted portion of `A ∩ (H+g1)`,
/// `y ∈ A ∩ (H+g2)` and `x + y ∈ A ∩ (H+g3)`.
#[derive(Clone, Debug)]
pub struct TriangleCert {
    pub count: u64,
    /// `d1 d2 d3 |H|^2 / 8`, which `count` provably meets.
    pub threshold: Rat,
}

/// Outcome of the dichotomy: either many triangles or a shattering.
#[derive(Clone, Debug)]
pub enum DichotomyResult {
    TriangleCert(TriangleCert),
    Shatter(ShatterCertificate),
}

/// Either find a subgroup that (1/20, 3/4, log_{1+rho}(2/d1))-shatters `A`
/// on `H+g2` or `H+g3` (with `rho = d2 d3 / 4`), or certify at least
/// `d1 d2 d3 |H|^2 / 8` triangles across the three cosets.
///
/// The first coset is decomposed into superregular parts at `(rho, d1/2)`.
/// Each part is first tried as a shattering refinement of the second and
/// third cosets (in that order; when both would shatter we keep the
/// second-coset certificate).  If no part shatters, each part's triangles
/// are counted exactly through its coset spectrum, and three facts are
/// asserted along the way: every part contributes at least
/// `d2 d3 |A_i| |H| / 4` pairs, the off-diagonal spectral term stays above
/// `-(1/4) d1' d2 d3 sqrt(d2 d3) |H| |H_i|`, and the grand total meets the
/// threshold.
pub fn shatter_or_count(
    a: &SetF2,
    h: &Subgroup,
    g1: &GroupElement,
    g2: &GroupElement,
    g3: &GroupElement,
) -> Result<DichotomyResult> {
    if a.n() != h.n() {
        return Err(Error::Dimension("shatter_or_count: dimension mismatch".into()));
    }
    if !(*g1 + *g2 + *g3).is_zero() {
        return Err(Error::Precondition("shatter_or_count: g1 + g2 + g3 != 0".into()));
    }
    let cosets = [
        Coset::new(h.clone(), g1)?,
        Coset::new(h.clone(), g2)?,
        Coset::new(h.clone(), g3)?,
    ];
    let mut dens = Vec::with_capacity(3);
    for c in &cosets {
        let d = rat_int(a.coset_count(c)?) / rat_int(h.size());
        if d.is_zero() {
            return Err(Error::Precondition(format!(
                "shatter_or_count: zero density on coset with representative {:#x}",
                c.rep().bits()
            )));
        }
        dens.push(d);
    }
    let (d1, d2, d3) = (&dens[0], &dens[1], &dens[2]);

    let rho = d2 * d3 / rat_int(4);
    let a1 = a.intersect_coset(&cosets[0])?;
    let dec = superregular_decomposition(&a1, h, g1, &rho, &(d1 / rat_int(2)))?;

    let alpha = rat(1, 20);
    let beta = rat(3, 4);
    let k = rat_f64(&(rat_int(2) / d1)).ln() / rat_f64(&(Rat::one() + &rho)).ln();

    let mut total: u64 = 0;
    for part in &dec.parts {
        for g_target in [g2, g3] {
            if let Some(cert) = check_shatter(a, h, g_target, &part.subgroup, &alpha, &beta, k)? {
                return Ok(DichotomyResult::Shatter(cert));
            }
        }

        let cnt = count_three_cosets(&part.part, a, a, &part.subgroup, h, g1, g2, g3, &part.shift)?;
        let part_size = rat_int(part.part.count());
        if rat_int(cnt) * rat_int(4) < d2 * d3 * &part_size * rat_int(h.size()) {
            return Err(Error::Internal(format!(
                "unshattered part fell short of its triangle floor: {cnt} pairs"
            )));
        }
        // Off-diagonal spectral mass: everything beyond the main term
        // |A_i| |A∩(H+g2)| |A∩(H+g3)| / |H| must stay above the
        // Cauchy-Schwarz floor.  sqrt is irrational, so this one check is
        // floating point with scale-proportional slack.
        let main = &part_size * (d2 * d3) * rat_int(h.size());
        let off = rat_int(cnt) - main;
        let scale = rat_f64(&(rat_int(h.size()) * rat_int(part.subgroup.size())));
        let floor = -0.25
            * rat_f64(&(&part.density * d2 * d3))
            * rat_f64(&(d2 * d3)).sqrt()
            * scale;
        if rat_f64(&off) < floor - 1e-9 * scale.max(1.0) {
            return Err(Error::Internal(format!(
                "off-diagonal spectral term {} broke the Cauchy-Schwarz floor {floor}",
                rat_f64(&off)
            )));
        }
        total += cnt;
    }

    let threshold = d1 * d2 * d3 * rat_int(h.size()) * rat_int(h.size()) / rat_int(8);
    if rat_int(total) < threshold {
        return Err(Error::Internal(format!(
            "unshattered decomposition undercounts: {total} < {threshold}"
        )));
    }
    Ok(DichotomyResult::TriangleCert(TriangleCert { count: total, threshold }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn full_coset(n: usize) -> Coset {
        Coset::new(Subgroup::full(n), &GroupElement::zero(n)).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&rat(0, 1)).unwrap(), 0.0);
        assert_eq!(entropy(&rat(1, 1)).unwrap(), 0.0);
        let e34 = entropy(&rat(3, 4)).unwrap();
        assert!((e34 - 0.75 * 0.75f64.ln()).abs() < 1e-15);
        assert!((e34 + 0.215_761_554_338_835_66).abs() < 1e-12);
        assert!(entropy(&rat(-1, 2)).is_err());
        assert!(entropy(&rat(5, 4)).is_err());

        // the constant that forces the natural log: with base e the gain
        // per shattered coset clears 1/600, with base 2 it would not
        let gain = (1.0 - 0.75 + e34) / 20.0;
        assert!((gain - 0.001_711_922_283_058_216).abs() < 1e-12);
        assert!(gain >= 1.0 / 600.0);
        assert!((0.25 + 0.75 * 0.75f64.log2()) / 20.0 < 1.0 / 600.0);
    }

    #[test]
    fn mean_entropy_examples() {
        let n = 4;
        let h = Subgroup::from_bits(n, &[0b0001, 0b0010]).unwrap();
        let hp = Subgroup::from_bits(n, &[0b0001]).unwrap();
        let coset = Coset::new(h.clone(), &GroupElement::new(n, 0b0100).unwrap()).unwrap();

        // single-cell partition: f(density on the coset)
        let a = SetF2::from_elements(n, &[0b0100, 0b0101, 0b0110]).unwrap();
        let single = mean_entropy(&a, &coset, &h).unwrap();
        assert!((single - entropy(&rat(3, 4)).unwrap()).abs() < 1e-12);

        // the whole group has density 1 everywhere
        let full: Vec<u32> = (0..1u32 << n).collect();
        let g = SetF2::from_elements(n, &full).unwrap();
        assert_eq!(mean_entropy(&g, &full_coset(n), &hp).unwrap(), 0.0);

        // density 1/2 on every Hp-cell
        let a = SetF2::from_elements(n, &[0b0100, 0b0110]).unwrap();
        let half = mean_entropy(&a, &coset, &hp).unwrap();
        assert!((half - 0.5 * 0.5f64.ln()).abs() < 1e-12);
        assert!((half + 0.346_573_590_279_972_6).abs() < 1e-12);

        // Hp not inside H
        let stranger = Subgroup::from_bits(n, &[0b1000]).unwrap();
        assert!(mean_entropy(&a, &coset, &stranger).is_err());
    }

    #[test]
    fn mean_entropy_is_monotone_under_refinement_and_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..100 {
            let n = rng.random_range(2..=8usize);
            let elems: Vec<u32> =
                (0..1u32 << n).filter(|_| rng.random_range(0..100) < 50).collect();
            let a = SetF2::from_elements(n, &elems).unwrap();
            let h = Subgroup::from_bits(
                n,
                &(0..rng.random_range(1..=n)).map(|_| rng.random_range(0..1u32 << n)).collect::<Vec<_>>(),
            )
            .unwrap();
            // a random subgroup of h
            let helems = h.elements_coord_order();
            let hp = Subgroup::from_bits(
                n,
                &(0..rng.random_range(1..=3))
                    .map(|_| *helems.choose(&mut rng).unwrap())
                    .collect::<Vec<_>>(),
            )
            .unwrap();

            let coarse = mean_entropy_full(&a, &h).unwrap();
            let fine = mean_entropy_full(&a, &hp).unwrap();
            assert!(fine >= coarse - 1e-9, "refinement must not lower the mean entropy");

            let global = entropy(&rat(a.count() as i64, 1i64 << n)).unwrap();
            assert!(coarse <= 1e-12);
            assert!(coarse >= global - 1e-9);
        }
    }

    #[test]
    fn check_shatter_examples() {
        let n = 4;
        let h = Subgroup::full(n);
        let hp = Subgroup::from_bits(n, &[0b0001, 0b0010]).unwrap();
        let g = GroupElement::zero(n);
        let alpha = rat(1, 20);
        let beta = rat(3, 4);

        // uniform densities: no cell is beta-low
        let uniform = SetF2::from_elements(n, &[0b0000, 0b0100, 0b1000, 0b1100]).unwrap();
        assert!(check_shatter(&uniform, &h, &g, &hp, &alpha, &beta, 10.0).unwrap().is_none());

        // concentrated on one of 4 cells: the other 3 are low
        let conc = SetF2::from_elements(n, &[0b0000, 0b0001, 0b0010, 0b0011]).unwrap();
        let cert = check_shatter(&conc, &h, &g, &hp, &alpha, &beta, 10.0).unwrap().unwrap();
        assert_eq!(cert.measured_low_fraction, rat(3, 4));
        assert_eq!(cert.base_density, rat(1, 4));
        cert.verify(&conc).unwrap();

        // index gate: [H : Hp] = 4 > 2^k for k = 1.5
        assert!(check_shatter(&conc, &h, &g, &hp, &alpha, &beta, 1.5).unwrap().is_none());
        // boundary passes thanks to the 1e-12 slack
        assert!(check_shatter(&conc, &h, &g, &hp, &alpha, &beta, 2.0).unwrap().is_some());

        // parameter and subgroup violations
        assert!(check_shatter(&conc, &h, &g, &hp, &rat(0, 1), &beta, 10.0).is_err());
        assert!(check_shatter(&conc, &h, &g, &hp, &alpha, &rat(3, 2), 10.0).is_err());
        let hp_bad = Subgroup::from_bits(5, &[1]).unwrap();
        assert!(check_shatter(&conc, &h, &g, &hp_bad, &alpha, &beta, 10.0).is_err());
    }

    #[test]
    fn certificates_realize_the_entropy_increment() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let mut found = 0;
        for _ in 0..300 {
            let n = rng.random_range(3..=8usize);
            let h = Subgroup::from_bits(
                n,
                &(0..rng.random_range(2..=n)).map(|_| rng.random_range(0..1u32 << n)).collect::<Vec<_>>(),
            )
            .unwrap();
            if h.dim() < 2 {
                continue;
            }
            let helems = h.elements_coord_order();
            let hp = Subgroup::from_bits(
                n,
                &(0..rng.random_range(1..=2))
                    .map(|_| *helems.choose(&mut rng).unwrap())
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let g = GroupElement::new(n, rng.random_range(0..1u32 << n)).unwrap();
            let coset = Coset::new(h.clone(), &g).unwrap();
            // skew the distribution to make shattering likely
            let mut a = SetF2::empty(n).unwrap();
            for x in h.elements_coord_order() {
                let cell = hp.reduce_bits(x);
                let p = if cell.count_ones() % 2 == 0 { 70 } else { 10 };
                if rng.random_range(0..100) < p {
                    a.insert_bits(x ^ coset.rep().bits());
                }
            }
            let alpha = rat(1, 20);
            let beta = rat(3, 4);
            let Some(cert) =
                check_shatter(&a, &h, &g, &hp, &alpha, &beta, h.dim() as f64).unwrap()
            else {
                continue;
            };
            found += 1;
            cert.verify(&a).unwrap();

            let fine = mean_entropy(&a, &coset, &hp).unwrap();
            let coarse = mean_entropy(&a, &coset, &h).unwrap();
            let bound =
                entropy_increment_lower_bound(&alpha, &beta, &cert.base_density).unwrap();
            assert!(
                fine - coarse >= bound - 1e-9,
                "increment {} below guaranteed {bound}",
                fine - coarse
            );
        }
        assert!(found >= 30, "only {found} certificates found; test is vacuous");
    }

    #[test]
    fn entropy_increment_bound_examples() {
        assert_eq!(
            entropy_increment_lower_bound(&rat(1, 20), &rat(1, 1), &rat(1, 2)).unwrap(),
            0.0
        );
        assert_eq!(
            entropy_increment_lower_bound(&rat(0, 1), &rat(3, 4), &rat(1, 2)).unwrap(),
            0.0
        );
        let v = entropy_increment_lower_bound(&rat(1, 20), &rat(3, 4), &rat(1, 1)).unwrap();
        assert!((v - 0.001_711_922_283_058_216).abs() < 1e-12);
        assert!(v >= 1.0 / 600.0);
        assert!(entropy_increment_lower_bound(&rat(3, 2), &rat(3, 4), &rat(1, 1)).is_err());
    }

    #[test]
    fn defect_jensen_examples_and_random_instances() {
        let w4 = vec![rat(1, 4); 4];

        // empty low set: plain Jensen
        let vals = vec![rat(1, 2), rat(1, 4), rat(3, 4), rat(1, 8)];
        assert!(defect_jensen_check(&w4, &vals, &rat(3, 4), &BTreeSet::new()).unwrap());

        // all values equal with beta = 1: equality case
        let eq = vec![rat(1, 3); 4];
        let all: BTreeSet<usize> = (0..4).collect();
        assert!(defect_jensen_check(&w4, &eq, &rat(1, 1), &all).unwrap());

        // preconditions
        assert!(defect_jensen_check(&w4[..3], &vals, &rat(3, 4), &BTreeSet::new()).is_err());
        assert!(defect_jensen_check(&w4, &vals, &rat(3, 4), &BTreeSet::from([9])).is_err());
        // index 2 holds the largest value; it cannot be in the low set
        assert!(defect_jensen_check(&w4, &vals, &rat(3, 4), &BTreeSet::from([2])).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..200 {
            let s = rng.random_range(1..=12usize);
            let raw: Vec<i64> = (0..s).map(|_| rng.random_range(1..50)).collect();
            let total: i64 = raw.iter().sum();
            let weights: Vec<Rat> = raw.iter().map(|&r| rat(r, total)).collect();
            let values: Vec<Rat> =
                (0..s).map(|_| rat(rng.random_range(0..=40), 40)).collect();
            let beta = rat(rng.random_range(1..=8), 8);
            let a: Rat = weights.iter().zip(&values).map(|(w, x)| w * x).sum();
            let threshold = &beta * &a;
            let low: BTreeSet<usize> =
                (0..s).filter(|&i| values[i] <= threshold).collect();
            assert!(defect_jensen_check(&weights, &values, &beta, &low).unwrap());
        }
    }

    #[test]
    fn dichotomy_on_three_full_cosets_counts_everything() {
        let n = 5;
        let h = Subgroup::from_bits(n, &[0b00001, 0b00010, 0b00100]).unwrap();
        let g1 = GroupElement::new(n, 0b01000).unwrap();
        let g2 = GroupElement::new(n, 0b10000).unwrap();
        let g3 = g1 + g2;
        let mut a = SetF2::empty(n).unwrap();
        for g in [g1, g2, g3] {
            for x in h.elements_coord_order() {
                a.insert_bits(x ^ g.bits());
            }
        }
        match shatter_or_count(&a, &h, &g1, &g2, &g3).unwrap() {
            DichotomyResult::TriangleCert(cert) => {
                assert_eq!(cert.count, h.size() * h.size());
                assert_eq!(cert.threshold, rat_int(h.size() * h.size()) / rat_int(8));
            }
            DichotomyResult::Shatter(_) => panic!("full cosets cannot shatter"),
        }
    }

    #[test]
    fn dichotomy_shatters_a_concentrated_instance() {
        let n = 6;
        let h = Subgroup::from_bits(n, &[0b0001, 0b0010, 0b0100, 0b1000]).unwrap();
        let hp = Subgroup::from_bits(n, &[0b0001, 0b0010]).unwrap();
        let g1 = GroupElement::new(n, 0b010000).unwrap();
        let g2 = GroupElement::new(n, 0b100000).unwrap();
        let g3 = g1 + g2;
        let mut a = SetF2::empty(n).unwrap();
        // one full Hp-cell inside H+g1 and inside H+g2, everything on H+g3
        for x in hp.elements_coord_order() {
            a.insert_bits(x ^ g1.bits());
            a.insert_bits(x ^ g2.bits());
        }
        for x in h.elements_coord_order() {
            a.insert_bits(x ^ g3.bits());
        }
        match shatter_or_count(&a, &h, &g1, &g2, &g3).unwrap() {
            DichotomyResult::Shatter(cert) => {
                // by convention the second coset is certified first
                assert_eq!(cert.target_coset.rep().bits(), g2.bits());
                assert_eq!(cert.measured_low_fraction, rat(3, 4));
                assert_eq!(cert.base_density, rat(1, 4));
                cert.verify(&a).unwrap();
            }
            DichotomyResult::TriangleCert(_) => panic!("expected a shattering certificate"),
        }
    }

    #[test]
    fn dichotomy_certificates_reverify_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let (mut counts, mut shatters) = (0, 0);
        for _ in 0..50 {
            let n = rng.random_range(4..=9usize);
            let h = Subgroup::from_bits(
                n,
                &(0..rng.random_range(3..=n)).map(|_| rng.random_range(0..1u32 << n)).collect::<Vec<_>>(),
            )
            .unwrap();
            if h.dim() < 3 {
                continue;
            }
            let g1 = GroupElement::new(n, rng.random_range(0..1u32 << n)).unwrap();
            let g2 = GroupElement::new(n, rng.random_range(0..1u32 << n)).unwrap();
            let g3 = g1 + g2;
            let mut a = SetF2::empty(n).unwrap();
            for g in [g1, g2, g3] {
                let skew = rng.random_range(0..3) == 0;
                for x in h.elements_coord_order() {
                    let p = if skew && x & 1 == 0 { 85 } else { 35 };
                    if rng.random_range(0..100) < p {
                        a.insert_bits(x ^ g.bits());
                    }
                }
            }
            if [g1, g2, g3].iter().any(|g| {
                a.coset_count(&Coset::new(h.clone(), g).unwrap()).unwrap() == 0
            }) {
                continue;
            }

            match shatter_or_count(&a, &h, &g1, &g2, &g3).unwrap() {
                DichotomyResult::TriangleCert(cert) => {
                    counts += 1;
                    // reproduce the count by brute force over the counted parts
                    let c1 = Coset::new(h.clone(), &g1).unwrap();
                    let d1 = rat_int(a.coset_count(&c1).unwrap()) / rat_int(h.size());
                    let d2 = rat_int(
                        a.coset_count(&Coset::new(h.clone(), &g2).unwrap()).unwrap(),
                    ) / rat_int(h.size());
                    let d3 = rat_int(
                        a.coset_count(&Coset::new(h.clone(), &g3).unwrap()).unwrap(),
                    ) / rat_int(h.size());
                    let rho = &d2 * &d3 / rat_int(4);
                    let a1 = a.intersect_coset(&c1).unwrap();
                    let dec =
                        superregular_decomposition(&a1, &h, &g1, &rho, &(&d1 / rat_int(2)))
                            .unwrap();
                    let mut brute = 0u64;
                    for part in &dec.parts {
                        for x in part.part.iter() {
                            for yh in h.elements_coord_order() {
                                let y = yh ^ g2.bits();
                                brute += (a.contains_bits(y) && a.contains_bits(x ^ y)) as u64;
                            }
                        }
                    }
                    assert_eq!(brute, cert.count);
                    assert!(rat_int(cert.count) >= cert.threshold);
                    assert_eq!(
                        cert.threshold,
                        &d1 * &d2 * &d3 * rat_int(h.size() * h.size()) / rat_int(8)
                    );
                }
                DichotomyResult::Shatter(cert) => {
                    shatters += 1;
                    cert.verify(&a).unwrap();
                    assert!(cert.measured_low_fraction >= cert.alpha);
                    let index = (h.dim() - cert.refining_subgroup.dim()) as f64;
                    assert!(index <= cert.k + 1e-12);
                }
            }
        }
        assert!(counts >= 5, "want a healthy mix, got {counts} counting branches");
        assert!(shatters >= 5, "want a healthy mix, got {shatters} shattering branches");
    }

    #[test]
    fn dichotomy_rejects_degenerate_inputs() {
        let n = 4;
        let h = Subgroup::from_bits(n, &[0b0001, 0b0010]).unwrap();
        let g1 = GroupElement::new(n, 0b0100).unwrap();
        let g2 = GroupElement::new(n, 0b1000).unwrap();
        let a = SetF2::from_elements(n, &[0b0100, 0b1000]).unwrap();
        // g-sum violation
        assert!(shatter_or_count(&a, &h, &g1, &g2, &g2).is_err());
        // zero density on the third coset
        assert!(matches!(
            shatter_or_count(&a, &h, &g1, &g2, &(g1 + g2)),
            Err(Error::Precondition(_))
        ));
    }
}
