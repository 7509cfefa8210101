//! Set-partition enumeration and the moment/cumulant algebra, including the
//! clustering decomposition of the top-order cumulant.
//!
//! Subsets of the ground set `{1..p}` are represented as `u32` bitmasks
//! (element `i` is bit `i-1`), which keeps the tables flat and the algebra
//! allocation-free in the hot paths.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

/// Hard enumeration guards (documented in the API contracts).
pub const MAX_PARTITION_GROUND_SET: usize = 12;
pub const MAX_STIRLING: usize = 25;

#[derive(Debug, Error)]
pub enum CombinatoricsError {
    #[error("ground-set size {0} outside supported range 1..={1}")]
    SizeGuard(usize, usize),
    #[error("subset {mask:#x} is not a valid nonempty subset of {{1..{p}}}")]
    BadSubset { mask: u32, p: usize },
    #[error("moment table incomplete: missing entry for subset {0:#x}")]
    MissingEntry(u32),
    #[error("clustering index set must satisfy 1 ∈ I and ∅ ≠ I ⊊ {{1..p}}")]
    BadClusterIndex,
}

/// A set partition of `{1..p}` in canonical form: parts ordered by smallest
/// element, elements ascending within each part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetPartition {
    p: usize,
    parts: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds a partition from parts, canonicalizing the order; validates
    /// disjointness and coverage of `{1..p}`.
    pub fn new(p: usize, mut parts: Vec<Vec<usize>>) -> Result<Self, CombinatoricsError> {
        let mut seen = 0u32;
        if p == 0 || p > MAX_PARTITION_GROUND_SET {
            return Err(CombinatoricsError::SizeGuard(p, MAX_PARTITION_GROUND_SET));
        }
        for part in &mut parts {
            part.sort_unstable();
            if part.is_empty() {
                return Err(CombinatoricsError::BadSubset { mask: 0, p });
            }
            for &e in part.iter() {
                if e == 0 || e > p || seen & (1 << (e - 1)) != 0 {
                    return Err(CombinatoricsError::BadSubset {
                        mask: 1 << (e.saturating_sub(1)),
                        p,
                    });
                }
                seen |= 1 << (e - 1);
            }
        }
        if seen != full_mask(p) {
            return Err(CombinatoricsError::BadSubset { mask: seen, p });
        }
        parts.sort_unstable_by_key(|part| part[0]);
        Ok(Self { p, parts })
    }

    pub fn ground_size(&self) -> usize {
        self.p
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// The parts as subset bitmasks, in canonical order.
    pub fn part_masks(&self) -> Vec<u32> {
        self.parts.iter().map(|part| mask_of(part)).collect()
    }
}

/// An ordering τ of the parts of a partition with τ(1) = 1 (the part
/// containing the smallest element stays first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPartition {
    base: SetPartition,
    /// `order[i]` is the (0-based) canonical index of the part in slot `i`;
    /// `order[0] == 0` always.
    order: Vec<usize>,
}

impl OrderedPartition {
    pub fn new(base: SetPartition, order: Vec<usize>) -> Result<Self, CombinatoricsError> {
        let q = base.len();
        let mut seen = vec![false; q];
        if order.len() != q || order.first() != Some(&0) {
            return Err(CombinatoricsError::BadClusterIndex);
        }
        for &i in &order {
            if i >= q || seen[i] {
                return Err(CombinatoricsError::BadClusterIndex);
            }
            seen[i] = true;
        }
        Ok(Self { base, order })
    }

    pub fn base(&self) -> &SetPartition {
        &self.base
    }

    /// Part masks in τ-order.
    pub fn ordered_masks(&self) -> Vec<u32> {
        let masks = self.base.part_masks();
        self.order.iter().map(|&i| masks[i]).collect()
    }

    /// The cluster pairs D(Π,τ): consecutive parts (σ1, σ2) with σ1 ⊆ I and
    /// σ2 ⊆ I^c.
    pub fn cluster_pairs(&self, i_mask: u32) -> Vec<(u32, u32)> {
        let seq = self.ordered_masks();
        seq.windows(2)
            .filter(|w| w[0] & !i_mask == 0 && w[1] & i_mask == 0)
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// The moment parts M(Π,τ): parts in no cluster pair.
    pub fn moment_parts(&self, i_mask: u32) -> Vec<u32> {
        let seq = self.ordered_masks();
        let mut in_pair = vec![false; seq.len()];
        for i in 0..seq.len().saturating_sub(1) {
            if seq[i] & !i_mask == 0 && seq[i + 1] & i_mask == 0 {
                in_pair[i] = true;
                in_pair[i + 1] = true;
            }
        }
        seq.iter()
            .zip(&in_pair)
            .filter(|&(_, &used)| !used)
            .map(|(&m, _)| m)
            .collect()
    }
}

pub fn full_mask(p: usize) -> u32 {
    (1u32 << p) - 1
}

fn mask_of(part: &[usize]) -> u32 {
    part.iter().fold(0u32, |acc, &e| acc | 1 << (e - 1))
}

/// Enumerates every set partition of `{1..p}` exactly once, in a
/// deterministic order. Results are memoized per `p`.
pub fn enumerate_partitions(p: usize) -> Result<Arc<Vec<SetPartition>>, CombinatoricsError> {
    if p == 0 || p > MAX_PARTITION_GROUND_SET {
        return Err(CombinatoricsError::SizeGuard(p, MAX_PARTITION_GROUND_SET));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<SetPartition>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&p) {
        return Ok(hit.clone());
    }
    let mut out = Vec::new();
    let mut parts: Vec<Vec<usize>> = Vec::new();
    grow(1, p, &mut parts, &mut out);
    let out = Arc::new(out);
    cache.lock().unwrap().insert(p, out.clone());
    Ok(out)
}

/// Inserts element `e` into each existing part or a fresh one. Because
/// elements are inserted in increasing order, parts stay in canonical form
/// throughout.
fn grow(e: usize, p: usize, parts: &mut Vec<Vec<usize>>, out: &mut Vec<SetPartition>) {
    if e > p {
        out.push(SetPartition {
            p,
            parts: parts.clone(),
        });
        return;
    }
    for i in 0..parts.len() {
        parts[i].push(e);
        grow(e + 1, p, parts, out);
        parts[i].pop();
    }
    parts.push(vec![e]);
    grow(e + 1, p, parts, out);
    parts.pop();
}

/// Enumerates the partitions of an arbitrary nonempty subset mask; each
/// partition is returned as a vector of part masks ordered by lowest bit.
pub fn enumerate_mask_partitions(mask: u32) -> Vec<Vec<u32>> {
    let mut elems: Vec<u32> = Vec::new();
    let mut rest = mask;
    while rest != 0 {
        let bit = rest & rest.wrapping_neg();
        elems.push(bit);
        rest ^= bit;
    }
    let mut out = Vec::new();
    let mut parts: Vec<u32> = Vec::new();
    grow_masks(&elems, 0, &mut parts, &mut out);
    out
}

fn grow_masks(elems: &[u32], i: usize, parts: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if i == elems.len() {
        out.push(parts.clone());
        return;
    }
    for j in 0..parts.len() {
        parts[j] |= elems[i];
        grow_masks(elems, i + 1, parts, out);
        parts[j] &= !elems[i];
    }
    parts.push(elems[i]);
    grow_masks(elems, i + 1, parts, out);
    parts.pop();
}

/// Stirling numbers of the second kind S(p, i); exact integer arithmetic
/// with an overflow guard at p = 25.
pub fn stirling2(p: usize, i: usize) -> Result<u128, CombinatoricsError> {
    if p > MAX_STIRLING {
        return Err(CombinatoricsError::SizeGuard(p, MAX_STIRLING));
    }
    if i > p {
        return Ok(0);
    }
    if p == 0 {
        return Ok(1); // S(0,0) = 1
    }
    if i == 0 {
        return Ok(0);
    }
    // S(p,i) = i·S(p-1,i) + S(p-1,i-1)
    let mut row = vec![0u128; p + 1];
    row[0] = 1;
    for n in 1..=p {
        for k in (1..=n.min(i)).rev() {
            row[k] = k as u128 * row[k] + row[k - 1];
        }
        row[0] = 0;
    }
    Ok(row[i])
}

/// Bell number B(p) = Σ_i S(p, i).
pub fn bell(p: usize) -> Result<u128, CombinatoricsError> {
    let mut sum = 0u128;
    for i in 0..=p {
        sum += stirling2(p, i)?;
    }
    Ok(sum)
}

/// Touchard polynomial T_ν(s) = Σ_{k=1..ν} S(ν,k) s^k, with T_0 := 1.
pub fn touchard(nu: usize, s: f64) -> Result<f64, CombinatoricsError> {
    if nu > MAX_STIRLING {
        return Err(CombinatoricsError::SizeGuard(nu, MAX_STIRLING));
    }
    if nu == 0 {
        return Ok(1.0);
    }
    let mut sum = 0.0;
    for k in 1..=nu {
        sum += stirling2(nu, k)? as f64 * s.powi(k as i32);
    }
    Ok(sum)
}

/// A table of real numbers indexed by nonempty subsets of `{1..p}`; used
/// for moments m_I and cumulants κ_I alike.
#[derive(Clone, Debug)]
pub struct MomentTable {
    p: usize,
    values: Vec<f64>,
}

impl MomentTable {
    /// Builds a complete table by evaluating `f` on every nonempty subset.
    pub fn new(p: usize, mut f: impl FnMut(u32) -> f64) -> Result<Self, CombinatoricsError> {
        if p == 0 || p > MAX_PARTITION_GROUND_SET {
            return Err(CombinatoricsError::SizeGuard(p, MAX_PARTITION_GROUND_SET));
        }
        let mut values = vec![0.0; 1 << p];
        for mask in 1..1u32 << p {
            values[mask as usize] = f(mask);
        }
        Ok(Self { p, values })
    }

    /// Product table of independent singletons: m_I = Π_{i∈I} m_{{i}}.
    pub fn independent(singletons: &[f64]) -> Result<Self, CombinatoricsError> {
        let p = singletons.len();
        Self::new(p, |mask| {
            (0..p)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| singletons[i])
                .product()
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, mask: u32) -> Result<f64, CombinatoricsError> {
        if mask == 0 || mask > full_mask(self.p) {
            return Err(CombinatoricsError::BadSubset { mask, p: self.p });
        }
        Ok(self.values[mask as usize])
    }

    fn at(&self, mask: u32) -> f64 {
        self.values[mask as usize]
    }
}

/// Moment-cumulant formula: κ_I = Σ_{Π∈𝒬(I)} (−1)^{|Π|−1} (|Π|−1)! Π_π m_π
/// for every nonempty I. The returned table holds cumulants.
pub fn moments_to_cumulants(m: &MomentTable) -> MomentTable {
    let p = m.p;
    let mut values = vec![0.0; 1 << p];
    for mask in 1..1u32 << p {
        let mut kappa = 0.0;
        for parts in enumerate_mask_partitions(mask) {
            let q = parts.len();
            let sign = if (q - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let weight = sign * factorial(q - 1);
            kappa += weight * parts.iter().map(|&part| m.at(part)).product::<f64>();
        }
        values[mask as usize] = kappa;
    }
    MomentTable { p, values }
}

/// Inverse transform: m_I = Σ_{Π∈𝒬(I)} Π_π κ_π.
pub fn cumulants_to_moments(k: &MomentTable) -> MomentTable {
    let p = k.p;
    let mut values = vec![0.0; 1 << p];
    for mask in 1..1u32 << p {
        values[mask as usize] = enumerate_mask_partitions(mask)
            .iter()
            .map(|parts| parts.iter().map(|&part| k.at(part)).product::<f64>())
            .sum();
    }
    MomentTable { p, values }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// One symbolic term of the clustering decomposition: `sign` times the
/// product of moment clusters δ_{σ1,σ2} over `clusters` times the product
/// of plain moments over `moments` (all subsets as masks).
#[derive(Clone, Debug, PartialEq)]
pub struct SignedTerm {
    pub sign: f64,
    pub clusters: Vec<(u32, u32)>,
    pub moments: Vec<u32>,
}

impl SignedTerm {
    pub fn evaluate(&self, m: &MomentTable) -> f64 {
        let delta = self
            .clusters
            .iter()
            .map(|&(a, b)| m.at(a | b) - m.at(a) * m.at(b))
            .product::<f64>();
        let plain = self.moments.iter().map(|&s| m.at(s)).product::<f64>();
        self.sign * delta * plain
    }
}

/// The clustering decomposition of κ_{1..p} across the split {I, I^c}:
/// the sum over partitions Π refining {I, I^c} and orderings τ with τ(1)=1
/// of (−1)^{|Π|+|D|−1} Π_{(σ1,σ2)∈D} δ_{σ1,σ2} Π_{σ∈M} m_σ.
///
/// Terms are returned symbolically; evaluate with [`evaluate_terms`].
pub fn clustering_decomposition(
    p: usize,
    i_mask: u32,
) -> Result<Vec<SignedTerm>, CombinatoricsError> {
    let full = full_mask(p);
    if p > MAX_PARTITION_GROUND_SET {
        return Err(CombinatoricsError::SizeGuard(p, MAX_PARTITION_GROUND_SET));
    }
    if i_mask & 1 == 0 || i_mask == 0 || i_mask >= full || i_mask & !full != 0 {
        return Err(CombinatoricsError::BadClusterIndex);
    }
    let comp = full & !i_mask;
    let mut terms = Vec::new();
    for left in enumerate_mask_partitions(i_mask) {
        for right in enumerate_mask_partitions(comp) {
            // Parts of Π in canonical order (by lowest element).
            let mut masks: Vec<u32> = left.iter().chain(right.iter()).copied().collect();
            masks.sort_unstable_by_key(|&m| m & m.wrapping_neg());
            let q = masks.len();
            // All orderings τ with τ(1) = 1: permute indices 1..q.
            let mut rest: Vec<usize> = (1..q).collect();
            permute(&mut rest, 0, &mut |tail| {
                let mut seq = Vec::with_capacity(q);
                seq.push(masks[0]);
                seq.extend(tail.iter().map(|&i| masks[i]));
                let mut clusters = Vec::new();
                let mut in_pair = vec![false; q];
                for i in 0..q - 1 {
                    if seq[i] & !i_mask == 0 && seq[i + 1] & i_mask == 0 {
                        clusters.push((seq[i], seq[i + 1]));
                        in_pair[i] = true;
                        in_pair[i + 1] = true;
                    }
                }
                let moments: Vec<u32> = (0..q).filter(|&i| !in_pair[i]).map(|i| seq[i]).collect();
                let sign = if (q + clusters.len() - 1) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                terms.push(SignedTerm {
                    sign,
                    clusters,
                    moments,
                });
            });
        }
    }
    Ok(terms)
}

/// Plugs a moment table into a symbolic term list.
pub fn evaluate_terms(terms: &[SignedTerm], m: &MomentTable) -> f64 {
    terms.iter().map(|t| t.evaluate(m)).sum()
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Set-partition sum lemma audit:
/// lhs = Σ_{Π∈𝒬_p} |Π|!^c Π_{π∈Π} |π|!^c by exact enumeration,
/// rhs = 2^p (p!)^{max{1,c}}.
pub fn partition_sum_bound_check(p: usize, c: f64) -> Result<(f64, f64, bool), CombinatoricsError> {
    if p == 0 || p > 10 {
        return Err(CombinatoricsError::SizeGuard(p, 10));
    }
    let mut lhs = 0.0;
    for part in enumerate_partitions(p)?.iter() {
        let mut term = factorial(part.len()).powf(c);
        for block in part.parts() {
            term *= factorial(block.len()).powf(c);
        }
        lhs += term;
    }
    let rhs = 2f64.powi(p as i32) * factorial(p).powf(c.max(1.0));
    Ok((lhs, rhs, lhs <= rhs))
}

/// Touchard-sum lemma audit: the series Σ_{k≥0} (k!)^a / k! · k^ν s^k
/// (truncated at k = 200 with a monotone-tail check) against the bound
/// 2 e^{ν+1} (ν+1)! / (1−a)^{ν+1} · e^{2 s^{1/(1−a)}}.
pub fn touchard_series_bound_check(
    a: f64,
    nu: usize,
    s: f64,
) -> Result<(f64, f64, bool), CombinatoricsError> {
    if !(0.0..1.0).contains(&a) || s < 0.0 {
        return Err(CombinatoricsError::BadClusterIndex);
    }
    let mut lhs = 0.0;
    let mut ln_fact = 0.0; // ln k!
    let mut prev = f64::INFINITY;
    let mut tail_monotone = true;
    let mut last = 0.0;
    for k in 0..=200usize {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        let ln_term = (a - 1.0) * ln_fact
            + if k == 0 {
                0.0 // 0^0 = 1 convention; k^ν with ν ≥ 1 vanishes at k = 0
            } else {
                nu as f64 * (k as f64).ln()
            }
            + if s == 0.0 && k > 0 {
                f64::NEG_INFINITY
            } else if k == 0 {
                0.0
            } else {
                k as f64 * s.ln()
            };
        let term = if k == 0 && nu > 0 { 0.0 } else { ln_term.exp() };
        lhs += term;
        if k > 50 {
            if term > prev {
                tail_monotone = false;
            }
            prev = term;
        }
        last = term;
    }
    debug_assert!(tail_monotone && last < 1e-12 * lhs.max(1.0), "tail not negligible");
    let rhs = 2.0
        * ((nu + 1) as f64).exp()
        * factorial(nu + 1)
        / (1.0 - a).powi(nu as i32 + 1)
        * (2.0 * s.powf(1.0 / (1.0 - a))).exp();
    Ok((lhs, rhs, lhs <= rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    /// Independent oracle: partitions counted/listed via restricted-growth
    /// strings a_1..a_p with a_1 = 0, a_{i+1} ≤ max(a_1..a_i) + 1.
    fn rgs_partitions(p: usize) -> Vec<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        let mut a = vec![0usize; p];
        fn rec(a: &mut Vec<usize>, i: usize, maxv: usize, out: &mut Vec<Vec<Vec<usize>>>) {
            if i == a.len() {
                let blocks = *a.iter().max().unwrap() + 1;
                let mut parts = vec![Vec::new(); blocks];
                for (e, &b) in a.iter().enumerate() {
                    parts[b].push(e + 1);
                }
                out.push(parts);
                return;
            }
            for v in 0..=maxv + 1 {
                a[i] = v;
                rec(a, i + 1, maxv.max(v), out);
            }
        }
        rec(&mut a, 1, 0, &mut out);
        out
    }

    #[test]
    fn enumeration_matches_rgs_oracle() {
        for p in 1..=7 {
            let ours = enumerate_partitions(p).unwrap();
            let oracle = rgs_partitions(p);
            assert_eq!(ours.len(), oracle.len(), "count at p={p}");
            // RGS blocks are labeled by first appearance, i.e. already in
            // canonical order; compare as sets of canonical forms.
            let mut a: Vec<_> = ours.iter().map(|s| s.parts().to_vec()).collect();
            let mut b = oracle;
            a.sort();
            b.sort();
            assert_eq!(a, b, "partition lists at p={p}");
        }
    }

    #[test]
    fn bell_numbers_match_known_values() {
        let expect: [u128; 13] = [
            1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597,
        ];
        for p in 1..=12 {
            assert_eq!(enumerate_partitions(p).unwrap().len() as u128, expect[p]);
            assert_eq!(bell(p).unwrap(), expect[p]);
        }
    }

    #[test]
    fn enumeration_guard() {
        assert!(enumerate_partitions(0).is_err());
        assert!(enumerate_partitions(13).is_err());
    }

    #[test]
    fn stirling_recurrence_and_counts() {
        assert_eq!(stirling2(3, 2).unwrap(), 3);
        assert_eq!(stirling2(5, 1).unwrap(), 1);
        assert_eq!(stirling2(2, 5).unwrap(), 0);
        assert_eq!(stirling2(0, 0).unwrap(), 1);
        for p in 1..=8 {
            for i in 1..=p {
                let count = enumerate_partitions(p)
                    .unwrap()
                    .iter()
                    .filter(|s| s.len() == i)
                    .count() as u128;
                assert_eq!(stirling2(p, i).unwrap(), count, "S({p},{i})");
            }
            assert_eq!(stirling2(p, p).unwrap(), 1);
        }
        for p in 1..=25 {
            for i in 1..=p {
                // Recurrence self-consistency at the guard boundary.
                assert_eq!(
                    stirling2(p, i).unwrap(),
                    i as u128 * stirling2(p - 1, i).unwrap() + stirling2(p - 1, i - 1).unwrap()
                );
            }
        }
        assert!(stirling2(26, 3).is_err());
    }

    #[test]
    fn touchard_values() {
        assert_eq!(touchard(1, 2.5).unwrap(), 2.5);
        assert_eq!(touchard(0, 7.0).unwrap(), 1.0);
        assert_eq!(touchard(3, 1.0).unwrap(), 5.0); // Bell(3)
        // T_2(s) = s + s².
        assert!((touchard(2, 3.0).unwrap() - 12.0).abs() < 1e-12);
    }

    fn random_table(p: usize, rng: &mut impl Rng) -> MomentTable {
        MomentTable::new(p, |_| rng.gen_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn cumulants_two_point_closed_form() {
        let m = MomentTable::new(2, |mask| match mask {
            0b01 => 0.3,
            0b10 => -0.7,
            0b11 => 0.5,
            _ => unreachable!(),
        })
        .unwrap();
        let k = moments_to_cumulants(&m);
        assert!((k.get(0b11).unwrap() - (0.5 - 0.3 * -0.7)).abs() < 1e-14);
        assert_eq!(k.get(0b01).unwrap(), 0.3);
    }

    #[test]
    fn independence_kills_mixed_cumulants() {
        let m = MomentTable::independent(&[0.4, -1.2, 0.9, 2.0]).unwrap();
        let k = moments_to_cumulants(&m);
        for mask in 1..1u32 << 4 {
            if mask.count_ones() >= 2 {
                assert!(k.get(mask).unwrap().abs() < 1e-12, "mask {mask:#b}");
            }
        }
    }

    #[test]
    fn round_trip_moments_cumulants() {
        let mut rng = crate::seed::rng(7, &[0]);
        for p in 1..=6 {
            for _ in 0..20 {
                let m = random_table(p, &mut rng);
                let k = moments_to_cumulants(&m);
                let back = cumulants_to_moments(&k);
                for mask in 1..1u32 << p {
                    let a = m.get(mask).unwrap();
                    let b = back.get(mask).unwrap();
                    assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "p={p} mask={mask:#b}");
                }
            }
        }
    }

    #[test]
    fn clustering_two_point() {
        let terms = clustering_decomposition(2, 0b01).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].sign, 1.0);
        assert_eq!(terms[0].clusters, vec![(0b01, 0b10)]);
        assert!(terms[0].moments.is_empty());
    }

    #[test]
    fn clustering_contains_paper_terms_p5() {
        // For p=5, I={1,2,3}: both δ_{3,45}·m_1·m_2 and −δ_{3,45}·m_{12}
        // appear in the term list.
        let terms = clustering_decomposition(5, 0b00111).unwrap();
        let d3_45 = (0b00100u32, 0b11000u32);
        let with_singletons = terms.iter().any(|t| {
            t.sign == 1.0
                && t.clusters == vec![d3_45]
                && {
                    let mut m = t.moments.clone();
                    m.sort_unstable();
                    m == vec![0b00001, 0b00010]
                }
        });
        let with_pair = terms
            .iter()
            .any(|t| t.sign == -1.0 && t.clusters == vec![d3_45] && t.moments == vec![0b00011]);
        assert!(with_singletons && with_pair);
    }

    #[test]
    fn clustering_term_structure() {
        for p in 2..=6 {
            for i_mask in 1u32..full_mask(p) {
                if i_mask & 1 == 0 {
                    continue;
                }
                for term in clustering_decomposition(p, i_mask).unwrap() {
                    assert!(!term.clusters.is_empty(), "D must be nonempty");
                    let mut union = 0u32;
                    let mut total = 0;
                    for &(a, b) in &term.clusters {
                        assert_eq!(a & !i_mask, 0, "first components lie in I");
                        assert_eq!(b & i_mask, 0, "second components lie in I^c");
                        assert_eq!(union & (a | b), 0, "parts pairwise disjoint");
                        union |= a | b;
                        total += 2;
                    }
                    for &s in &term.moments {
                        assert_eq!(union & s, 0);
                        union |= s;
                        total += 1;
                    }
                    assert_eq!(union, full_mask(p), "M ⊎ D1 ⊎ D2 covers Π");
                    let _ = total;
                }
            }
        }
    }

    #[test]
    fn clustering_identity_random_tables() {
        let mut rng = crate::seed::rng(11, &[0]);
        for p in 2..=6 {
            for _ in 0..10 {
                let m = random_table(p, &mut rng);
                let kappa = moments_to_cumulants(&m).get(full_mask(p)).unwrap();
                for i_mask in 1u32..full_mask(p) {
                    if i_mask & 1 == 0 {
                        continue;
                    }
                    let terms = clustering_decomposition(p, i_mask).unwrap();
                    let total = evaluate_terms(&terms, &m);
                    assert!(
                        (total - kappa).abs() <= 1e-10 * kappa.abs().max(1.0),
                        "p={p} I={i_mask:#b}: {total} vs {kappa}"
                    );
                }
            }
        }
    }

    #[test]
    fn clustering_argument_errors() {
        assert!(clustering_decomposition(3, 0b010).is_err()); // 1 ∉ I
        assert!(clustering_decomposition(3, 0b111).is_err()); // I = full set
        assert!(clustering_decomposition(3, 0).is_err());
    }

    #[test]
    fn partition_sum_bound() {
        let (lhs, rhs, ok) = partition_sum_bound_check(1, 0.0).unwrap();
        assert_eq!((lhs, rhs, ok), (1.0, 2.0, true));
        for p in 1..=10 {
            for &c in &[0.0, 0.5, 1.0, 2.0, 3.0] {
                let (_, _, ok) = partition_sum_bound_check(p, c).unwrap();
                assert!(ok, "p={p} c={c}");
            }
        }
    }

    #[test]
    fn touchard_series_bound_grid() {
        for &a in &[0.0, 0.25, 0.5] {
            for nu in 0..=3 {
                for &s in &[0.5, 1.0, 2.0] {
                    let (lhs, rhs, ok) = touchard_series_bound_check(a, nu, s).unwrap();
                    assert!(ok, "a={a} nu={nu} s={s}: {lhs} > {rhs}");
                }
            }
        }
    }

    #[test]
    fn ordered_partition_accessors() {
        let base = SetPartition::new(4, vec![vec![1], vec![2], vec![3, 4]]).unwrap();
        let op = OrderedPartition::new(base, vec![0, 2, 1]).unwrap();
        // Sequence {1}, {3,4}, {2} with I = {1,2}: D = [({1},{34})], M = [{2}].
        assert_eq!(op.cluster_pairs(0b0011), vec![(0b0001, 0b1100)]);
        assert_eq!(op.moment_parts(0b0011), vec![0b0010]);
    }

    proptest! {
        #[test]
        fn prop_round_trip(values in proptest::collection::vec(-2.0..2.0f64, 15)) {
            let m = MomentTable::new(4, |mask| values[mask as usize - 1]).unwrap();
            let back = cumulants_to_moments(&moments_to_cumulants(&m));
            for mask in 1..16u32 {
                let a = m.get(mask).unwrap();
                let b = back.get(mask).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }
}
