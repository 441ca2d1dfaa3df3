//! The refinement loop: maintain a coset partition of the group, run the
//! shattering dichotomy across a maximal family of disjoint triangles,
//! intersect the refining subgroups, and push the entropy potential up
//! until a triangle-count certificate falls out — plus the symbolic tower
//! bound the same recurrence yields in the limit.
//!
//! Parameter conventions.  The packing has `m` triangles, `eps0 = m / N`,
//! and the refinement step takes the element-coverage fraction
//! `epsilon = 3 * eps0 = |A'| / N`.  Internally each step works with
//! `eps0 = epsilon / 3`: cosets are dropped below density `eps0 / 2`, the
//! count branch fires at `eps0^3 N^2 / (64 T^2)`, and the guaranteed gain
//! is `epsilon / 3600 = eps0 / 1200`.  With these thresholds the numbers
//! compose: the dichotomy's counting branch yields at least
//! `(eps0/2)^3 |H|^2 / 8 = eps0^3 N^2 / (64 T^2)` pairs, so whenever the
//! count branch did not fire every surviving triangle must shatter, and
//! the shattered cosets cover at least `m / 2` elements, worth
//! `(1/600) * (m/2) / N = epsilon / 3600` of potential.

use std::collections::{BTreeMap, BTreeSet};

use crate::gf2::{GroupElement, Subgroup};
use crate::set::SetF2;
use crate::shattering::{
    check_shatter, entropy, mean_entropy_full, rat_f64, shatter_or_count, DichotomyResult,
    ShatterCertificate, TriangleCert,
};
use crate::triangles::{
    count_ordered_fourier, farness_bounds, greedy_max_packing, FarnessBounds, Packing,
};
use crate::{rat, rat_int, Error, Rat, Result};
use num_traits::{One, Signed, Zero};

/// A coset partition of the ambient group together with the cached
/// density table and entropy of the working set on it.
#[derive(Clone, Debug)]
pub struct PartitionState {
    pub subgroup: Subgroup,
    /// Number of cosets, `2^(n - dim)`.
    pub t_parts: u64,
    /// Mean entropy of the working set over the partition.
    pub mean_entropy: f64,
    /// Exact density per coset, keyed by canonical representative;
    /// zero-density cosets are omitted.
    pub densities: BTreeMap<u32, Rat>,
}

/// Exact partition bookkeeping of `aprime` over the cosets of `h`.
pub fn compute_state(aprime: &SetF2, h: &Subgroup) -> Result<PartitionState> {
    if aprime.n() != h.n() {
        return Err(Error::Dimension("compute_state: dimension mismatch".into()));
    }
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for x in aprime.iter() {
        *counts.entry(h.reduce_bits(x)).or_insert(0) += 1;
    }
    let densities =
        counts.into_iter().map(|(rep, c)| (rep, rat_int(c) / rat_int(h.size()))).collect();
    Ok(PartitionState {
        subgroup: h.clone(),
        t_parts: 1u64 << (h.n() - h.dim()),
        mean_entropy: mean_entropy_full(aprime, h)?,
        densities,
    })
}

impl PartitionState {
    /// Check this state against a recomputation from scratch: densities
    /// must match exactly, the entropy within 1e-9.
    pub fn check_consistent(&self, aprime: &SetF2) -> Result<()> {
        let fresh = compute_state(aprime, &self.subgroup)?;
        if fresh.t_parts != self.t_parts {
            return Err(Error::Precondition("state t_parts is stale".into()));
        }
        if fresh.densities != self.densities {
            return Err(Error::Precondition("state density table is stale".into()));
        }
        let weighted: Rat =
            self.densities.values().sum::<Rat>() / rat_int(self.t_parts);
        if weighted != rat_int(aprime.count()) / rat_int(1u64 << self.subgroup.n()) {
            return Err(Error::Precondition("densities do not average to |A'|/N".into()));
        }
        if (fresh.mean_entropy - self.mean_entropy).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "state entropy {} disagrees with recomputation {}",
                self.mean_entropy, fresh.mean_entropy
            )));
        }
        Ok(())
    }
}

/// Greedily pack disjoint triangles; the working set is their union.
/// Returns `(A', packing, eps0)` with `eps0 = m / N`.
pub fn preprocess(a: &SetF2, seed: u64) -> Result<(SetF2, Packing, Rat)> {
    let packing = greedy_max_packing(a, seed);
    let aprime = packing.support();
    let eps0 = rat(packing.len() as i64, 1i64 << a.n());
    Ok((aprime, packing, eps0))
}

/// Split off the elements of `aprime` lying in cosets of `h` where its
/// density is at least `threshold`; returns the filtered set and the
/// surviving coset representatives.
pub fn density_filter(
    aprime: &SetF2,
    h: &Subgroup,
    threshold: &Rat,
) -> Result<(SetF2, BTreeSet<u32>)> {
    if aprime.n() != h.n() {
        return Err(Error::Dimension("density_filter: dimension mismatch".into()));
    }
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for x in aprime.iter() {
        *counts.entry(h.reduce_bits(x)).or_insert(0) += 1;
    }
    let surviving: BTreeSet<u32> = counts
        .into_iter()
        .filter(|(_, c)| rat_int(*c) >= threshold * rat_int(h.size()))
        .map(|(rep, _)| rep)
        .collect();
    let mut kept = SetF2::empty(aprime.n())?;
    for x in aprime.iter() {
        if surviving.contains(&h.reduce_bits(x)) {
            kept.insert_bits(x);
        }
    }
    Ok((kept, surviving))
}

/// One refinement step's result.
#[derive(Clone, Debug)]
pub enum RefineOutcome {
    /// The filtered set already holds enough triangles.
    Count(TriangleCert),
    /// A strictly finer partition with its certificates and measured gain.
    Refined { state: PartitionState, certificates: Vec<ShatterCertificate>, gain: f64 },
    /// No strict refinement exists.  Unreachable by the accounting above
    /// (a surviving triangle always produces a proper refining subgroup
    /// when the count branch stays quiet), kept as a first-class outcome
    /// so small-group runs can never wedge.
    Exhausted,
}

/// One step of the refinement: filter low-density cosets, try the global
/// triangle count, otherwise shatter across the surviving packed
/// triangles and intersect the collected refining subgroups.
///
/// `epsilon` is the element-coverage fraction: `aprime` must be exactly
/// the union of the packing's triangles and `epsilon * N = 3m`.
pub fn refine_step(
    aprime: &SetF2,
    packing: &Packing,
    state: &PartitionState,
    epsilon: &Rat,
) -> Result<RefineOutcome> {
    let n = aprime.n();
    let nn = 1u64 << n;
    if packing.n() != n || state.subgroup.n() != n {
        return Err(Error::Dimension("refine_step: dimension mismatch".into()));
    }
    if packing.support() != *aprime {
        return Err(Error::Precondition(
            "refine_step: Aprime must be exactly the union of the packed triangles".into(),
        ));
    }
    let m = packing.len() as u64;
    if *epsilon != rat_int(3 * m) / rat_int(nn) {
        return Err(Error::Precondition(format!(
            "refine_step: epsilon must equal 3m/N = {}/{}",
            3 * m,
            nn
        )));
    }
    if m == 0 {
        return Err(Error::Precondition("refine_step: empty packing".into()));
    }
    state.check_consistent(aprime)?;

    let h = &state.subgroup;
    let t = state.t_parts;
    let eps0 = epsilon / rat_int(3);

    // (i) drop cosets where the density is below eps0/2
    let (a2, surviving) = density_filter(aprime, h, &(&eps0 / rat_int(2)))?;

    // (ii) global count at the current partition scale
    let count = count_ordered_fourier(&a2)?;
    let threshold =
        &eps0 * &eps0 * &eps0 * rat_int(nn) * rat_int(nn) / rat_int(64 * t * t);
    if rat_int(count) >= threshold {
        return Ok(RefineOutcome::Count(TriangleCert { count, threshold }));
    }

    // (iii) run the dichotomy on every packed triangle whose three cosets
    // survive; keep the first certificate per shattered coset (triangles
    // are sorted by smallest element, so this is deterministic)
    let mut certs: BTreeMap<u32, ShatterCertificate> = BTreeMap::new();
    let mut surviving_triangles = 0u64;
    for tri in packing.triangles() {
        let [x, y, z] = tri.elements();
        if !tri.elements().iter().all(|e| surviving.contains(&h.reduce_bits(e.bits()))) {
            continue;
        }
        surviving_triangles += 1;
        match shatter_or_count(&a2, h, &x, &y, &z)? {
            // cannot happen: any counting branch would have met (ii)'s
            // threshold; returned as a valid certificate anyway
            DichotomyResult::TriangleCert(cert) => return Ok(RefineOutcome::Count(cert)),
            DichotomyResult::Shatter(cert) => {
                certs.entry(h.reduce_bits(cert.target_coset.rep().bits())).or_insert(cert);
            }
        }
    }

    // support accounting, exact: the filter removed < m/2 elements, so
    // more than half the triangles survive, and each contributes at least
    // one element to a shattered coset
    if 2 * surviving_triangles < m {
        return Err(Error::Internal(format!(
            "only {surviving_triangles} of {m} triangles survived the density filter"
        )));
    }
    let mut covered = 0u64;
    for rep in certs.keys() {
        let mut c = 0u64;
        for x in a2.iter() {
            c += (h.reduce_bits(x) == *rep) as u64;
        }
        covered += c;
    }
    if 2 * covered < m {
        return Err(Error::Internal(format!(
            "shattered cosets cover {covered} elements, below m/2 = {m}/2"
        )));
    }

    // (iv) intersect the refining subgroups
    let mut refined = h.clone();
    for cert in certs.values() {
        refined = refined.intersect(&cert.refining_subgroup)?;
    }
    if refined == *h {
        return Ok(RefineOutcome::Exhausted);
    }

    let next = compute_state(aprime, &refined)?;
    let gain = next.mean_entropy - state.mean_entropy;
    let need = rat_f64(&(epsilon / rat_int(3600)));
    if gain < need - 1e-9 {
        return Err(Error::Internal(format!(
            "refinement gain {gain} below the guaranteed {need}"
        )));
    }
    let k_cap = rat_f64(&(rat_int(4) / &eps0)).ln()
        / rat_f64(&(Rat::one() + &eps0 * &eps0 / rat_int(16))).ln();
    if ((n - refined.dim()) as f64) > 2.0 * t as f64 * k_cap + 1e-9 {
        return Err(Error::Internal("refined index exceeds its bound".into()));
    }
    Ok(RefineOutcome::Refined {
        state: next,
        certificates: certs.into_values().collect(),
        gain,
    })
}

/// Condensed, reconstructible record of one certificate in a trace.
#[derive(Clone, Debug)]
pub struct CertSummary {
    pub target_rep: u32,
    pub refining_basis: Vec<u32>,
    pub alpha: Rat,
    pub beta: Rat,
    pub k: f64,
    pub measured_low_fraction: Rat,
    pub base_density: Rat,
}

impl From<&ShatterCertificate> for CertSummary {
    fn from(c: &ShatterCertificate) -> Self {
        CertSummary {
            target_rep: c.target_coset.rep().bits(),
            refining_basis: c.refining_subgroup.basis().to_vec(),
            alpha: c.alpha.clone(),
            beta: c.beta.clone(),
            k: c.k,
            measured_low_fraction: c.measured_low_fraction.clone(),
            base_density: c.base_density.clone(),
        }
    }
}

/// One successful refinement in a run.
#[derive(Clone, Debug)]
pub struct RefineRecord {
    /// Dimension of the refined subgroup.
    pub dim: usize,
    /// Cosets after refining.
    pub t_parts: u64,
    /// Potential after refining.
    pub mean_entropy: f64,
    pub gain: f64,
    /// RREF basis of the refined subgroup.
    pub subgroup_basis: Vec<u32>,
    pub certificates: Vec<CertSummary>,
}

/// Why a run stopped.
#[derive(Clone, Debug)]
pub enum Outcome {
    Terminated(TriangleCert),
    /// The potential crossed zero or the step budget ran out — the
    /// contradiction branch of the argument.
    EntropyCeiling,
    /// A step could not refine strictly (defensive; see
    /// [`RefineOutcome::Exhausted`]).
    SubgroupExhausted,
}

/// The refinement history of a run.
#[derive(Clone, Debug)]
pub struct RefinementTrace {
    /// `f(|A'|/N)`: the potential before any refinement.
    pub initial_mean_entropy: f64,
    pub steps: Vec<RefineRecord>,
    pub outcome: Outcome,
}

/// Everything a removal run certifies, reproducible from `(A, seed)`.
#[derive(Clone, Debug)]
pub struct RemovalReport {
    pub epsilon0: Rat,
    pub packing_size: u64,
    /// Triangles certified by the outcome (0 unless `Terminated`).
    pub triangle_count: u64,
    /// `triangle_count / N^2`.
    pub delta_witness: Rat,
    pub trace: RefinementTrace,
    pub farness: FarnessBounds,
}

/// [`run_removal`] with an explicit refinement-step budget; `None` uses
/// the default `ceil(12000 ln(1/(3 eps0)))`.
pub fn run_removal_capped(a: &SetF2, seed: u64, max_steps: Option<u64>) -> Result<RemovalReport> {
    let n = a.n();
    let nn = 1u64 << n;
    let (aprime, packing, eps0) = preprocess(a, seed)?;
    let m = packing.len() as u64;
    let farness = farness_bounds(a, &packing)?;

    if m == 0 {
        return Ok(RemovalReport {
            epsilon0: eps0,
            packing_size: 0,
            triangle_count: 0,
            delta_witness: Rat::zero(),
            trace: RefinementTrace {
                initial_mean_entropy: 0.0,
                steps: Vec::new(),
                outcome: Outcome::Terminated(TriangleCert {
                    count: 0,
                    threshold: Rat::zero(),
                }),
            },
            farness,
        });
    }

    let epsilon = rat_int(3) * &eps0;
    let cap = max_steps
        .unwrap_or_else(|| (12000.0 * rat_f64(&epsilon.recip()).ln()).ceil().max(0.0) as u64);

    let mut state = compute_state(&aprime, &Subgroup::full(n))?;
    let initial_mean_entropy = state.mean_entropy;
    let mut steps: Vec<RefineRecord> = Vec::new();
    let outcome = loop {
        // the potential is nonpositive in exact arithmetic; crossing zero
        // (or exhausting the budget, which forces a crossing in the exact
        // argument) is the contradiction outcome
        if state.mean_entropy > 1e-9 || steps.len() as u64 >= cap {
            break Outcome::EntropyCeiling;
        }
        match refine_step(&aprime, &packing, &state, &epsilon)? {
            RefineOutcome::Count(cert) => break Outcome::Terminated(cert),
            RefineOutcome::Exhausted => break Outcome::SubgroupExhausted,
            RefineOutcome::Refined { state: next, certificates, gain } => {
                steps.push(RefineRecord {
                    dim: next.subgroup.dim(),
                    t_parts: next.t_parts,
                    mean_entropy: next.mean_entropy,
                    gain,
                    subgroup_basis: next.subgroup.basis().to_vec(),
                    certificates: certificates.iter().map(CertSummary::from).collect(),
                });
                state = next;
            }
        }
    };

    let triangle_count = match &outcome {
        Outcome::Terminated(cert) => cert.count,
        _ => 0,
    };
    Ok(RemovalReport {
        epsilon0: eps0,
        packing_size: m,
        triangle_count,
        delta_witness: rat_int(triangle_count) / (rat_int(nn) * rat_int(nn)),
        trace: RefinementTrace { initial_mean_entropy, steps, outcome },
        farness,
    })
}

/// Pack a maximal family of disjoint triangles, then refine the coset
/// partition of the group until the filtered union certifies a triangle
/// count (or a contradiction outcome fires).  Deterministic in
/// `(A, seed)`.
pub fn run_removal(a: &SetF2, seed: u64) -> Result<RemovalReport> {
    run_removal_capped(a, seed, None)
}

/// Replay a report from `(A, seed)` and re-verify everything in it: the
/// packing, every certificate against the reconstructed filtered set,
/// per-step gains, and the terminal count.
pub fn verify_report(a: &SetF2, seed: u64, report: &RemovalReport) -> Result<()> {
    let n = a.n();
    let nn = 1u64 << n;
    let (aprime, packing, eps0) = preprocess(a, seed)?;
    let m = packing.len() as u64;
    if report.packing_size != m || report.epsilon0 != eps0 {
        return Err(Error::Internal("report packing does not reproduce".into()));
    }
    if report.delta_witness != rat_int(report.triangle_count) / (rat_int(nn) * rat_int(nn)) {
        return Err(Error::Internal("delta witness inconsistent with the count".into()));
    }
    if m == 0 {
        return match &report.trace.outcome {
            Outcome::Terminated(c) if c.count == 0 && report.trace.steps.is_empty() => Ok(()),
            _ => Err(Error::Internal("empty packing must terminate with a zero count".into())),
        };
    }

    let expected_initial = entropy(&(rat_int(3) * &eps0))?;
    if (report.trace.initial_mean_entropy - expected_initial).abs() > 1e-9 {
        return Err(Error::Internal("initial entropy does not reproduce".into()));
    }

    let mut h = Subgroup::full(n);
    let mut prev_entropy = report.trace.initial_mean_entropy;
    for (i, step) in report.trace.steps.iter().enumerate() {
        let (a2, _) = density_filter(&aprime, &h, &(&eps0 / rat_int(2)))?;
        let mut refined = h.clone();
        for cs in &step.certificates {
            let hp = Subgroup::from_bits(n, &cs.refining_basis)?;
            let g = GroupElement::new(n, cs.target_rep)?;
            let again = check_shatter(&a2, &h, &g, &hp, &cs.alpha, &cs.beta, cs.k)?
                .ok_or_else(|| {
                    Error::Internal(format!("certificate {i} does not reproduce"))
                })?;
            if again.measured_low_fraction != cs.measured_low_fraction
                || again.base_density != cs.base_density
            {
                return Err(Error::Internal(format!("certificate {i} quantities drifted")));
            }
            refined = refined.intersect(&hp)?;
        }
        if refined.basis() != step.subgroup_basis.as_slice()
            || refined.dim() != step.dim
            || step.t_parts != 1u64 << (n - refined.dim())
        {
            return Err(Error::Internal(format!("step {i} subgroup does not reproduce")));
        }
        let fresh = mean_entropy_full(&aprime, &refined)?;
        if (fresh - step.mean_entropy).abs() > 1e-9
            || (step.mean_entropy - prev_entropy - step.gain).abs() > 1e-9
        {
            return Err(Error::Internal(format!("step {i} entropy does not reproduce")));
        }
        let need = rat_f64(&(rat_int(3) * &eps0 / rat_int(3600)));
        if step.gain < need - 1e-9 {
            return Err(Error::Internal(format!("step {i} gain below guarantee")));
        }
        prev_entropy = step.mean_entropy;
        h = refined;
    }

    match &report.trace.outcome {
        Outcome::Terminated(cert) => {
            if cert.count != report.triangle_count {
                return Err(Error::Internal("terminal count mismatch".into()));
            }
            let (a2, _) = density_filter(&aprime, &h, &(&eps0 / rat_int(2)))?;
            let t = 1u64 << (n - h.dim());
            let threshold =
                &eps0 * &eps0 * &eps0 * rat_int(nn) * rat_int(nn) / rat_int(64 * t * t);
            // the terminal certificate is the global branch unless the
            // defensive per-triple branch fired (then it still verifies
            // against its own recorded threshold)
            if cert.threshold == threshold {
                if count_ordered_fourier(&a2)? != cert.count {
                    return Err(Error::Internal("terminal count does not reproduce".into()));
                }
            }
            if rat_int(cert.count) < cert.threshold {
                return Err(Error::Internal("terminal count below its threshold".into()));
            }
        }
        Outcome::EntropyCeiling | Outcome::SubgroupExhausted => {
            if report.triangle_count != 0 {
                return Err(Error::Internal("non-terminated run cannot certify triangles".into()));
            }
        }
    }
    Ok(())
}

/// A tower-of-twos magnitude: `height` iterated exponentials applied to
/// `top`, i.e. height 0 is `top` itself, height 1 is `2^top`, and so on.
/// Canonical form keeps `top < 2^900`, and at positive height also
/// `top >= 900`, so every value has exactly one representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TowerBound {
    pub height: u32,
    pub top: f64,
}

fn tower_normalize(mut height: u32, mut top: f64) -> TowerBound {
    let lift_at = 900f64.exp2();
    loop {
        if top >= lift_at {
            top = top.log2();
            height += 1;
        } else if height >= 1 && top < 900.0 {
            top = top.exp2();
            height -= 1;
        } else {
            return TowerBound { height, top };
        }
    }
}

/// Evaluate the inverse gap `1/delta` guaranteed by the refinement
/// recurrence at quality `epsilon`: with `eps0 = epsilon/3`,
/// `T_0 = 1`, `T_{i+1} = 2^(c T_i)` for `c = 2 log_{1+eps0^2/16}(4/eps0)`,
/// iterated `t = ceil(12000 ln(1/(3 eps0)))` times, and finally
/// `1/delta = 64 T_t^2 / eps0^3`.  Returned symbolically since the value
/// towers out of every float range almost immediately.
///
/// Arithmetic on the representation is exact-in-f64: a multiplication by
/// `c` at tower height 2 or more perturbs a level that already exceeds
/// `2^900`, where the relative change (under `2^-880`) is below f64
/// resolution, so dropping it is forced, not an approximation choice.
pub fn theorem_bound(epsilon: &Rat) -> Result<TowerBound> {
    if !epsilon.is_positive() || *epsilon > Rat::one() {
        return Err(Error::Precondition(format!("epsilon must lie in (0,1], got {epsilon}")));
    }
    let eps0 = epsilon / rat_int(3);
    let t = (12000.0 * rat_f64(&epsilon.recip()).ln()).ceil().max(0.0) as u64;
    let c = rat_f64(&(rat_int(4) / &eps0)).ln()
        / rat_f64(&(Rat::one() + &eps0 * &eps0 / rat_int(16))).ln()
        * 2.0;

    let mut tb = TowerBound { height: 0, top: 1.0 };
    for _ in 0..t {
        let ct = match tb.height {
            0 => TowerBound { height: 0, top: c * tb.top },
            1 => TowerBound { height: 1, top: tb.top + c.log2() },
            _ => tb,
        };
        tb = tower_normalize(ct.height + 1, ct.top);
    }

    // 1/delta = 64 T^2 / eps0^3 = 2^q * T^2 with q = 6 - 3 log2(eps0)
    let q = 6.0 - 3.0 * rat_f64(&eps0).log2();
    Ok(match tb.height {
        0 => tower_normalize(1, 2.0 * tb.top.log2() + q),
        1 => tower_normalize(1, 2.0 * tb.top + q),
        2 => tower_normalize(2, tb.top + 1.0),
        _ => tb,
    })
}
