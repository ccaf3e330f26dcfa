//! Maximal values of a polynomial under deterministic hidden-variable models.
//!
//! * local: every party carries a fixed pair of outcomes `(a_j, a_j')`;
//! * hybrid `k/(n-k)`: the parties split into two blocks, correlations inside
//!   a block are arbitrary, across blocks there are none;
//! * algebraic: every correlation coefficient is free.
//!
//! Only deterministic scripts are searched. The bound is linear in the
//! mixing weights, so a maximum over mixtures is attained at a script.
//! Within a block only the product of outcomes enters a correlation
//! coefficient, so a block script is a ±1 value per joint setting tuple.

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::polynomial::{full_mask, Polynomial, Term};

/// Configurable enumeration caps. Exceeding one is a
/// [`Error::ResourceLimit`], never a silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnumerationLimits {
    /// Largest `n` for the `4^n` local enumeration.
    pub local_max_parties: u32,
    /// Largest smaller-block size for [`hybrid_bound`].
    pub hybrid_max_block: u32,
    /// Largest size of either block for [`brute_hybrid_bound`].
    pub oracle_max_block: u32,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            local_max_parties: 10,
            hybrid_max_block: 4,
            oracle_max_block: 3,
        }
    }
}

/// Packs the bits of `x` selected by `mask` into the low bits.
#[inline]
pub(crate) fn pext(x: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut m = mask;
    let mut k = 0;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if x & low != 0 {
            out |= 1 << k;
        }
        k += 1;
        m &= m - 1;
    }
    out
}

/// Inverse of [`pext`]: scatters the low bits of `x` onto the set bits of
/// `mask`.
#[inline]
pub(crate) fn pdep(x: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut m = mask;
    let mut k = 0;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if x >> k & 1 != 0 {
            out |= low;
        }
        k += 1;
        m &= m - 1;
    }
    out
}

/// Integer coefficients over the common denominator `2^k`.
fn scaled_terms(p: &Polynomial) -> (Vec<(u64, i64)>, u32) {
    let k = p.common_log2_denominator();
    (
        p.masks().map(|(m, c)| (m, c.scaled_numerator(k))).collect(),
        k,
    )
}

#[inline]
fn sign_bit(bits: u64, idx: u64) -> i64 {
    if bits >> idx & 1 == 1 {
        -1
    } else {
        1
    }
}

/// A deterministic local script: party `j` answers `a_j` to its unprimed and
/// `a_j'` to its primed measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalStrategy {
    outcomes: Vec<(i8, i8)>,
}

impl LocalStrategy {
    pub fn new(outcomes: Vec<(i8, i8)>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() > 31 {
            return Err(Error::invalid("local strategy needs 1..=31 parties"));
        }
        if outcomes.iter().any(|&(a, b)| a.abs() != 1 || b.abs() != 1) {
            return Err(Error::invalid("local outcomes must be ±1"));
        }
        Ok(LocalStrategy { outcomes })
    }

    /// Decodes `code`: bit `2j` set means `a_j = -1`, bit `2j+1` set means
    /// `a_j' = -1`.
    pub fn from_encoding(n: u32, code: u64) -> Result<Self> {
        if n == 0 || n > 31 || (n < 32 && code >> (2 * n) != 0) {
            return Err(Error::invalid(format!(
                "encoding {code:#x} does not describe {n} parties"
            )));
        }
        let outcomes = (0..n)
            .map(|j| {
                (
                    sign_bit(code, 2 * j as u64) as i8,
                    sign_bit(code, 2 * j as u64 + 1) as i8,
                )
            })
            .collect();
        Ok(LocalStrategy { outcomes })
    }

    pub fn encoding(&self) -> u64 {
        self.outcomes
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &(a, b))| {
                acc | ((a < 0) as u64) << (2 * j) | ((b < 0) as u64) << (2 * j + 1)
            })
    }

    pub fn n(&self) -> u32 {
        self.outcomes.len() as u32
    }

    pub fn outcomes(&self) -> &[(i8, i8)] {
        &self.outcomes
    }

    /// Flips both outcomes of one party.
    pub fn negate_party(&self, party: u32) -> LocalStrategy {
        let mut outcomes = self.outcomes.clone();
        let (a, b) = outcomes[party as usize];
        outcomes[party as usize] = (-a, -b);
        LocalStrategy { outcomes }
    }

    /// Masks of parties answering -1 to the unprimed / primed setting.
    fn negative_masks(&self) -> (u64, u64) {
        let mut unprimed = 0;
        let mut primed = 0;
        for (j, &(a, b)) in self.outcomes.iter().enumerate() {
            if a < 0 {
                unprimed |= 1 << j;
            }
            if b < 0 {
                primed |= 1 << j;
            }
        }
        (unprimed, primed)
    }

    /// Value of the correlation coefficient `t` under this script.
    pub fn product(&self, t: Term) -> i8 {
        let (u, p) = self.negative_masks();
        local_sign(u, p, t.prime_mask()) as i8
    }
}

#[inline]
fn local_sign(neg_unprimed: u64, neg_primed: u64, mask: u64) -> i64 {
    let neg = (neg_unprimed & !mask) | (neg_primed & mask);
    if neg.count_ones() & 1 == 1 {
        -1
    } else {
        1
    }
}

impl Serialize for LocalStrategy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LocalStrategy", 3)?;
        st.serialize_field("kind", "local")?;
        st.serialize_field("encoding", &self.encoding())?;
        st.serialize_field("outcomes", &self.outcomes)?;
        st.end()
    }
}

impl fmt::Display for LocalStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = |v: i8| if v > 0 { '+' } else { '-' };
        for (j, &(a, b)) in self.outcomes.iter().enumerate() {
            if j > 0 {
                f.write_str(" ")?;
            }
            write!(f, "A{0}={1},A{0}'={2}", j + 1, sym(a), sym(b))?;
        }
        Ok(())
    }
}

/// `Σ coeff(t) · Π_j (a_j' if party j primed in t else a_j)`, exactly.
pub fn evaluate_local_exact(p: &Polynomial, s: &LocalStrategy) -> Result<Dyadic> {
    if s.n() != p.n() {
        return Err(Error::invalid(format!(
            "strategy has {} parties, polynomial has {}",
            s.n(),
            p.n()
        )));
    }
    let (u, pr) = s.negative_masks();
    let (terms, k) = scaled_terms(p);
    let total: i64 = terms.iter().map(|&(m, c)| c * local_sign(u, pr, m)).sum();
    Ok(Dyadic::from_scaled(total, k))
}

pub fn evaluate_local(p: &Polynomial, s: &LocalStrategy) -> Result<f64> {
    evaluate_local_exact(p, s).map(Dyadic::to_f64)
}

/// A split of the parties into two nonempty blocks, stored canonically:
/// block A is the smaller one, and contains party 1 when both have equal size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    n: u32,
    block_a_mask: u64,
}

impl Bipartition {
    /// Builds the canonical bipartition with `block_mask` as one side.
    pub fn new(n: u32, block_mask: u64) -> Result<Self> {
        if !(2..=31).contains(&n) {
            return Err(Error::invalid(format!(
                "bipartition needs 2..=31 parties, got {n}"
            )));
        }
        let full = full_mask(n);
        if block_mask == 0 || block_mask >= full {
            return Err(Error::invalid(format!(
                "block mask {block_mask:#b} is not a proper nonempty subset of {n} parties"
            )));
        }
        let other = full ^ block_mask;
        let (a, b) = (block_mask.count_ones(), other.count_ones());
        let block_a_mask = if a < b || (a == b && block_mask & 1 == 1) {
            block_mask
        } else {
            other
        };
        Ok(Bipartition { n, block_a_mask })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn block_a(&self) -> u64 {
        self.block_a_mask
    }

    pub fn block_b(&self) -> u64 {
        full_mask(self.n) ^ self.block_a_mask
    }

    pub fn size_a(&self) -> u32 {
        self.block_a_mask.count_ones()
    }

    pub fn size_b(&self) -> u32 {
        self.n - self.size_a()
    }
}

fn party_list(mask: u64) -> String {
    (0..64)
        .filter(|j| mask >> j & 1 == 1)
        .map(|j| (j + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_party_list(s: &str) -> Result<u64> {
    let mut mask = 0u64;
    for tok in s.split(',') {
        let j: u32 = tok
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad party `{tok}`")))?;
        if j == 0 || j > 31 {
            return Err(Error::invalid(format!("party {j} out of range")));
        }
        if mask >> (j - 1) & 1 == 1 {
            return Err(Error::invalid(format!("party {j} listed twice")));
        }
        mask |= 1 << (j - 1);
    }
    Ok(mask)
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "A={}|B={}",
            party_list(self.block_a()),
            party_list(self.block_b())
        )
    }
}

impl FromStr for Bipartition {
    type Err = Error;

    /// Parses `A=1,3|B=2,4`; the blocks must cover parties `1..=n` exactly.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("malformed bipartition `{s}`, expected A=1,3|B=2,4"));
        let (a, b) = s.trim().split_once('|').ok_or_else(bad)?;
        let a = parse_party_list(a.trim().strip_prefix("A=").ok_or_else(bad)?)?;
        let b = parse_party_list(b.trim().strip_prefix("B=").ok_or_else(bad)?)?;
        if a & b != 0 {
            return Err(Error::invalid(format!("blocks of `{s}` overlap")));
        }
        let union = a | b;
        let n = 64 - union.leading_zeros();
        if union != full_mask(n) {
            return Err(Error::invalid(format!(
                "blocks of `{s}` do not cover parties 1..={n}"
            )));
        }
        Bipartition::new(n, a)
    }
}

impl Serialize for Bipartition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// All canonical bipartitions of `n` parties, ordered by block-A size and
/// then by mask; there are `2^(n-1) - 1` of them.
pub fn bipartitions(n: u32) -> Result<Vec<Bipartition>> {
    if !(2..=31).contains(&n) {
        return Err(Error::invalid(format!(
            "bipartitions need 2..=31 parties, got {n}"
        )));
    }
    let full = full_mask(n);
    let mut out: Vec<Bipartition> = (1..full)
        .filter_map(|m| {
            let bp = Bipartition::new(n, m).ok()?;
            (bp.block_a_mask == m).then_some(bp)
        })
        .collect();
    out.sort_by_key(|bp| (bp.size_a(), bp.block_a_mask));
    Ok(out)
}

/// A deterministic script for one block: the ±1 product of the block's
/// outcomes for each joint setting tuple. Tuple index bit `i` is set when the
/// `i`-th party of the block (ascending) uses its primed setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStrategy {
    block: u64,
    products: Vec<i8>,
}

impl BlockStrategy {
    pub fn new(block: u64, products: Vec<i8>) -> Result<Self> {
        let size = block.count_ones();
        if size == 0 || size > 20 || products.len() != 1usize << size {
            return Err(Error::invalid(format!(
                "block strategy for {size} parties needs {} products",
                1u64 << size.min(20)
            )));
        }
        if products.iter().any(|v| v.abs() != 1) {
            return Err(Error::invalid("block products must be ±1"));
        }
        Ok(BlockStrategy { block, products })
    }

    fn from_bits(block: u64, bits: u64) -> Self {
        let len = 1usize << block.count_ones();
        BlockStrategy {
            block,
            products: (0..len).map(|i| sign_bit(bits, i as u64) as i8).collect(),
        }
    }

    pub fn block(&self) -> u64 {
        self.block
    }

    pub fn products(&self) -> &[i8] {
        &self.products
    }

    /// Product this block contributes to the coefficient `t`.
    pub fn product(&self, t: Term) -> i8 {
        self.products[pext(t.prime_mask(), self.block) as usize]
    }
}

impl Serialize for BlockStrategy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let parties: Vec<u32> = (0..64u32)
            .filter(|j| self.block >> j & 1 == 1)
            .map(|j| j + 1)
            .collect();
        let mut st = s.serialize_struct("BlockStrategy", 2)?;
        st.serialize_field("parties", &parties)?;
        st.serialize_field("products", &self.products)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelClass {
    Local,
    Hybrid,
    Algebraic,
}

/// The maximizing script behind a bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Local(LocalStrategy),
    Hybrid {
        partition: Bipartition,
        block_a: BlockStrategy,
        block_b: BlockStrategy,
    },
    /// Every correlation coefficient set to the sign of its coefficient.
    Algebraic,
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Witness::Local(l) => l.serialize(s),
            Witness::Hybrid {
                partition,
                block_a,
                block_b,
            } => {
                let mut st = s.serialize_struct("HybridWitness", 4)?;
                st.serialize_field("kind", "hybrid")?;
                st.serialize_field("partition", partition)?;
                st.serialize_field("block_a", block_a)?;
                st.serialize_field("block_b", block_b)?;
                st.end()
            }
            Witness::Algebraic => {
                let mut st = s.serialize_struct("AlgebraicWitness", 2)?;
                st.serialize_field("kind", "algebraic")?;
                st.serialize_field("assignment", "sign of each coefficient")?;
                st.end()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundResult {
    pub model: ModelClass,
    pub value: Dyadic,
    pub witness: Witness,
}

impl BoundResult {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

impl Serialize for BoundResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BoundResult", 4)?;
        st.serialize_field("model", &self.model)?;
        st.serialize_field("value_exact", &self.value.to_string())?;
        st.serialize_field("value", &self.value_f64())?;
        st.serialize_field("witness", &self.witness)?;
        st.end()
    }
}

/// Re-evaluates a witness on `p`, exactly.
pub fn evaluate_witness(p: &Polynomial, w: &Witness) -> Result<Dyadic> {
    match w {
        Witness::Local(s) => evaluate_local_exact(p, s),
        Witness::Hybrid {
            partition,
            block_a,
            block_b,
        } => {
            if partition.n() != p.n()
                || block_a.block != partition.block_a()
                || block_b.block != partition.block_b()
            {
                return Err(Error::invalid("witness blocks do not match the polynomial"));
            }
            Ok(p.terms()
                .map(|(t, c)| {
                    let sign = block_a.product(t) as i64 * block_b.product(t) as i64;
                    c * Dyadic::from_int(sign)
                })
                .sum())
        }
        Witness::Algebraic => Ok(p.algebraic_limit()),
    }
}

pub fn algebraic_bound(p: &Polynomial) -> BoundResult {
    BoundResult {
        model: ModelClass::Algebraic,
        value: p.algebraic_limit(),
        witness: Witness::Algebraic,
    }
}

pub fn local_bound(p: &Polynomial) -> Result<BoundResult> {
    local_bound_with(p, &EnumerationLimits::default())
}

/// Maximum over all `4^n` local scripts. Ties go to the smallest encoding.
pub fn local_bound_with(p: &Polynomial, limits: &EnumerationLimits) -> Result<BoundResult> {
    let n = p.n();
    if n > limits.local_max_parties {
        return Err(Error::ResourceLimit {
            what: format!("local enumeration over 4^{n} scripts"),
            cap: "local_max_parties",
            required: n as usize,
            limit: limits.local_max_parties as usize,
        });
    }
    let (terms, k) = scaled_terms(p);
    let mut best: Option<(i64, u64)> = None;
    for code in 0..1u64 << (2 * n) {
        let (mut u, mut pr) = (0u64, 0u64);
        for j in 0..n {
            u |= (code >> (2 * j) & 1) << j;
            pr |= (code >> (2 * j + 1) & 1) << j;
        }
        let v: i64 = terms.iter().map(|&(m, c)| c * local_sign(u, pr, m)).sum();
        if best.is_none_or(|(bv, _)| v > bv) {
            best = Some((v, code));
        }
    }
    let (v, code) = best.expect("at least one script");
    Ok(BoundResult {
        model: ModelClass::Local,
        value: Dyadic::from_scaled(v, k),
        witness: Witness::Local(LocalStrategy::from_encoding(n, code)?),
    })
}

fn check_partition(p: &Polynomial, pi: &Bipartition) -> Result<()> {
    if p.n() != pi.n() {
        return Err(Error::invalid(format!(
            "bipartition {pi} is for {} parties, polynomial has {}",
            pi.n(),
            p.n()
        )));
    }
    Ok(())
}

pub fn hybrid_bound(p: &Polynomial, pi: &Bipartition) -> Result<BoundResult> {
    hybrid_bound_with(p, pi, &EnumerationLimits::default())
}

/// Exact maximum over pairs of block scripts.
///
/// Block A (the smaller block) is enumerated. For a fixed A script the
/// objective is linear in B's products, so B is optimal when each product
/// matches the sign of its effective coefficient.
pub fn hybrid_bound_with(
    p: &Polynomial,
    pi: &Bipartition,
    limits: &EnumerationLimits,
) -> Result<BoundResult> {
    check_partition(p, pi)?;
    let a = pi.size_a();
    if a > limits.hybrid_max_block || a > 5 {
        return Err(Error::ResourceLimit {
            what: format!("hybrid enumeration over 2^(2^{a}) block scripts for {pi}"),
            cap: "hybrid_max_block",
            required: a as usize,
            limit: limits.hybrid_max_block as usize,
        });
    }
    let (ma, mb) = (pi.block_a(), pi.block_b());
    let (terms, k) = scaled_terms(p);
    let rows = 1usize << a;
    let cols = 1usize << pi.size_b();

    // coefficient matrix indexed by (A tuple, B tuple)
    let mut coeffs = vec![0i64; rows * cols];
    for &(m, c) in &terms {
        coeffs[pext(m, ma) as usize * cols + pext(m, mb) as usize] += c;
    }
    let live_cols: Vec<usize> = (0..cols)
        .filter(|&j| (0..rows).any(|i| coeffs[i * cols + j] != 0))
        .collect();

    let mut eff = vec![0i64; cols];
    let mut best: Option<(i64, u64)> = None;
    for sa in 0..1u64 << rows {
        let mut total = 0i64;
        for &j in &live_cols {
            let e: i64 = (0..rows)
                .map(|i| coeffs[i * cols + j] * sign_bit(sa, i as u64))
                .sum();
            total += e.abs();
        }
        if best.is_none_or(|(bv, _)| total > bv) {
            best = Some((total, sa));
        }
    }
    let (v, sa) = best.expect("at least one script");

    for &j in &live_cols {
        eff[j] = (0..rows)
            .map(|i| coeffs[i * cols + j] * sign_bit(sa, i as u64))
            .sum();
    }
    let block_b = BlockStrategy {
        block: mb,
        products: eff.iter().map(|&e| if e < 0 { -1 } else { 1 }).collect(),
    };
    Ok(BoundResult {
        model: ModelClass::Hybrid,
        value: Dyadic::from_scaled(v, k),
        witness: Witness::Hybrid {
            partition: *pi,
            block_a: BlockStrategy::from_bits(ma, sa),
            block_b,
        },
    })
}

/// Per-bipartition hybrid bounds and their maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridReport {
    pub per_partition: Vec<BoundResult>,
    /// The first partition attaining the overall maximum.
    pub best: BoundResult,
}

impl HybridReport {
    pub fn max_value(&self) -> Dyadic {
        self.best.value
    }

    /// True when every bipartition gives the same bound.
    pub fn is_uniform(&self) -> bool {
        self.per_partition
            .iter()
            .all(|b| b.value == self.best.value)
    }
}

pub fn hybrid_bound_all(p: &Polynomial) -> Result<HybridReport> {
    hybrid_bound_all_with(p, &EnumerationLimits::default())
}

pub fn hybrid_bound_all_with(p: &Polynomial, limits: &EnumerationLimits) -> Result<HybridReport> {
    let per_partition = bipartitions(p.n())?
        .iter()
        .map(|pi| hybrid_bound_with(p, pi, limits))
        .collect::<Result<Vec<_>>>()?;
    let best = per_partition
        .iter()
        .fold(None::<&BoundResult>, |acc, b| match acc {
            Some(a) if a.value >= b.value => Some(a),
            _ => Some(b),
        })
        .expect("n ≥ 2 has a bipartition")
        .clone();
    Ok(HybridReport {
        per_partition,
        best,
    })
}

pub fn brute_hybrid_bound(p: &Polynomial, pi: &Bipartition) -> Result<BoundResult> {
    brute_hybrid_bound_with(p, pi, &EnumerationLimits::default())
}

/// Reference oracle for [`hybrid_bound`]: enumerates script pairs for both
/// blocks and evaluates every term directly.
pub fn brute_hybrid_bound_with(
    p: &Polynomial,
    pi: &Bipartition,
    limits: &EnumerationLimits,
) -> Result<BoundResult> {
    check_partition(p, pi)?;
    let larger = pi.size_a().max(pi.size_b());
    if larger > limits.oracle_max_block || larger > 3 {
        return Err(Error::ResourceLimit {
            what: format!("exhaustive enumeration of both blocks of {pi}"),
            cap: "oracle_max_block",
            required: larger as usize,
            limit: limits.oracle_max_block.min(3) as usize,
        });
    }
    let (ma, mb) = (pi.block_a(), pi.block_b());
    let (terms, k) = scaled_terms(p);
    let tuples: Vec<(u64, u64, i64)> = terms
        .iter()
        .map(|&(m, c)| (pext(m, ma), pext(m, mb), c))
        .collect();
    let mut best: Option<(i64, u64, u64)> = None;
    for sa in 0..1u64 << (1 << pi.size_a()) {
        for sb in 0..1u64 << (1 << pi.size_b()) {
            let v: i64 = tuples
                .iter()
                .map(|&(ia, ib, c)| c * sign_bit(sa, ia) * sign_bit(sb, ib))
                .sum();
            if best.is_none_or(|(bv, _, _)| v > bv) {
                best = Some((v, sa, sb));
            }
        }
    }
    let (v, sa, sb) = best.expect("at least one script pair");
    Ok(BoundResult {
        model: ModelClass::Hybrid,
        value: Dyadic::from_scaled(v, k),
        witness: Witness::Hybrid {
            partition: *pi,
            block_a: BlockStrategy::from_bits(ma, sa),
            block_b: BlockStrategy::from_bits(mb, sb),
        },
    })
}
