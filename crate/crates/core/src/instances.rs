//! Seeded instance generators covering the regimes the machinery
//! distinguishes: iid noise, triangle-free structure, unions of planted
//! disjoint triangles, proper cosets, and noisy subgroups.
//!
//! Every generator is a pure function of its spec, so identical specs
//! reproduce identical bitmaps.  None of the structured families ever
//! include the zero element (only iid noise and a planted subgroup can),
//! which keeps their degenerate-triangle bookkeeping trivial.

use std::fmt;

use crate::gf2::{GroupElement, Subgroup};
use crate::set::SetF2;
use crate::triangles::{count_ordered_bruteforce, Triangle};
use crate::{Error, Rat, Result, MAX_N};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::Dimension(format!("n must lie in 1..={MAX_N}, got {n}")));
    }
    Ok(())
}

/// Inclusion threshold on a raw `u64` draw realizing probability `p`.
fn coin_threshold(p: &Rat) -> u128 {
    let scaled: BigInt = (p.numer() * (BigInt::one() << 64)) / p.denom();
    scaled.to_u128().expect("p in [0,1] scales into u128")
}

/// Each element of the group independently with probability `p`.
pub fn gen_random_density(n: usize, p: &Rat, seed: u64) -> Result<SetF2> {
    check_n(n)?;
    if p.is_negative() || *p > Rat::one() {
        return Err(Error::Precondition(format!("p must lie in [0,1], got {p}")));
    }
    let thresh = coin_threshold(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SetF2::empty(n)?;
    for x in 0..1u32 << n {
        if (rng.random::<u64>() as u128) < thresh {
            out.insert_bits(x);
        }
    }
    Ok(out)
}

/// The affine halfspace `{x : bit coordinate_index of x = 1}`: exactly
/// half the group, and triangle-free since three such elements XOR to
/// something with that bit still set.
pub fn gen_triangle_free_halfspace(n: usize, coordinate_index: usize) -> Result<SetF2> {
    check_n(n)?;
    if coordinate_index >= n {
        return Err(Error::Precondition(format!(
            "coordinate index {coordinate_index} out of range for n = {n}"
        )));
    }
    let mut out = SetF2::empty(n)?;
    for x in 0..1u32 << n {
        if x >> coordinate_index & 1 == 1 {
            out.insert_bits(x);
        }
    }
    Ok(out)
}

/// A union of planted disjoint triangles with its ground truth.
#[derive(Clone, Debug)]
pub struct DisjointTriangleUnion {
    pub set: SetF2,
    /// The planted triangles, sorted; pairwise element-disjoint.
    pub planted: Vec<Triangle>,
    /// Distinct-element triangles of the union beyond the planted ones.
    pub accidental: u64,
}

/// Rejection-sample `m` pairwise element-disjoint nonzero triangles and
/// return their union.  The union can close extra "accidental" triangles
/// across planted ones; those are counted exactly.  The sampler gives up
/// after `1000 * m` attempts (overwhelmingly unlikely while `3m` stays
/// well under `N`).
pub fn gen_disjoint_triangle_union(n: usize, m: u64, seed: u64) -> Result<DisjointTriangleUnion> {
    check_n(n)?;
    let nn = 1u64 << n;
    if 3 * m > nn - 1 {
        return Err(Error::Precondition(format!(
            "cannot pack {m} disjoint triangles into {} nonzero elements",
            nn - 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = SetF2::empty(n)?;
    let mut planted = Vec::with_capacity(m as usize);
    let mut attempts = 0u64;
    while (planted.len() as u64) < m {
        if attempts >= 1000 * m {
            return Err(Error::Precondition(format!(
                "rejection budget exhausted after {attempts} attempts"
            )));
        }
        attempts += 1;
        let x = rng.random_range(1..nn) as u32;
        let y = rng.random_range(1..nn) as u32;
        if x == y {
            continue;
        }
        let z = x ^ y;
        if set.contains_bits(x) || set.contains_bits(y) || set.contains_bits(z) {
            continue;
        }
        set.insert_bits(x);
        set.insert_bits(y);
        set.insert_bits(z);
        planted.push(Triangle::new(
            GroupElement::new(n, x)?,
            GroupElement::new(n, y)?,
            GroupElement::new(n, z)?,
        )?);
    }
    planted.sort();

    // zero is never included, so ordered = 6 * distinct exactly
    let ordered = count_ordered_bruteforce(&set);
    debug_assert_eq!(ordered % 6, 0);
    Ok(DisjointTriangleUnion { set, planted, accidental: ordered / 6 - m })
}

/// A uniformly random subgroup of exactly the requested dimension.
fn random_subgroup(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Result<Subgroup> {
    if dim > n {
        return Err(Error::Precondition(format!("subgroup dim {dim} exceeds n = {n}")));
    }
    let mut gens: Vec<u32> = Vec::new();
    let mut h = Subgroup::trivial(n);
    while h.dim() < dim {
        let c = rng.random_range(1..1u64 << n) as u32;
        if !h.contains_bits(c) {
            gens.push(c);
            h = Subgroup::from_bits(n, &gens)?;
        }
    }
    Ok(h)
}

/// A proper coset `H + g` of a random subgroup of dimension
/// `subgroup_dim` (the subgroup itself when `subgroup_dim = n`).  Proper
/// cosets are triangle-free: three elements of `H + g` sum into `H + g`,
/// which misses zero.
pub fn gen_subgroup_coset(n: usize, subgroup_dim: usize, seed: u64) -> Result<SetF2> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_subgroup(n, subgroup_dim, &mut rng)?;
    let g = if subgroup_dim == n {
        0
    } else {
        loop {
            let g = rng.random_range(1..1u64 << n) as u32;
            if !h.contains_bits(g) {
                break g;
            }
        }
    };
    let mut out = SetF2::empty(n)?;
    for x in h.elements_coord_order() {
        out.insert_bits(x ^ g);
    }
    Ok(out)
}

/// A random subgroup of dimension `subgroup_dim`, each element of the
/// group then flipped in or out independently with probability `flip_p`.
/// Coarse partitions see it as maximally irregular, the planted partition
/// as nearly constant — the stress input for the decomposition.
pub fn gen_planted_subgroup_noise(
    n: usize,
    subgroup_dim: usize,
    flip_p: &Rat,
    seed: u64,
) -> Result<SetF2> {
    check_n(n)?;
    if flip_p.is_negative() || *flip_p > Rat::new(BigInt::one(), BigInt::from(2)) {
        return Err(Error::Precondition(format!("flip_p must lie in [0,1/2], got {flip_p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_subgroup(n, subgroup_dim, &mut rng)?;
    let thresh = coin_threshold(flip_p);
    let mut out = SetF2::empty(n)?;
    for x in 0..1u32 << n {
        let flip = (rng.random::<u64>() as u128) < thresh;
        if h.contains_bits(x) != flip {
            out.insert_bits(x);
        }
    }
    Ok(out)
}

/// A fully deterministic description of a generated instance.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    RandomDensity { n: usize, p: Rat, seed: u64 },
    TriangleFreeHalfspace { n: usize, coordinate_index: usize },
    DisjointTriangleUnion { n: usize, m: u64, seed: u64 },
    SubgroupCoset { n: usize, subgroup_dim: usize, seed: u64 },
    PlantedSubgroupNoise { n: usize, subgroup_dim: usize, flip_p: Rat, seed: u64 },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<SetF2> {
        match self {
            GeneratorSpec::RandomDensity { n, p, seed } => gen_random_density(*n, p, *seed),
            GeneratorSpec::TriangleFreeHalfspace { n, coordinate_index } => {
                gen_triangle_free_halfspace(*n, *coordinate_index)
            }
            GeneratorSpec::DisjointTriangleUnion { n, m, seed } => {
                gen_disjoint_triangle_union(*n, *m, *seed).map(|u| u.set)
            }
            GeneratorSpec::SubgroupCoset { n, subgroup_dim, seed } => {
                gen_subgroup_coset(*n, *subgroup_dim, *seed)
            }
            GeneratorSpec::PlantedSubgroupNoise { n, subgroup_dim, flip_p, seed } => {
                gen_planted_subgroup_noise(*n, *subgroup_dim, flip_p, *seed)
            }
        }
    }
}

/// Compact single-token rendering used in set-file headers.
impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::RandomDensity { n, p, seed } => {
                write!(f, "random_density:n={n}:p={p}:seed={seed}")
            }
            GeneratorSpec::TriangleFreeHalfspace { n, coordinate_index } => {
                write!(f, "triangle_free_halfspace:n={n}:coord={coordinate_index}")
            }
            GeneratorSpec::DisjointTriangleUnion { n, m, seed } => {
                write!(f, "disjoint_triangle_union:n={n}:m={m}:seed={seed}")
            }
            GeneratorSpec::SubgroupCoset { n, subgroup_dim, seed } => {
                write!(f, "subgroup_coset:n={n}:dim={subgroup_dim}:seed={seed}")
            }
            GeneratorSpec::PlantedSubgroupNoise { n, subgroup_dim, flip_p, seed } => {
                write!(f, "planted_subgroup_noise:n={n}:dim={subgroup_dim}:flip={flip_p}:seed={seed}")
            }
        }
    }
}
