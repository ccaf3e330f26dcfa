//! Symbolic Bell polynomials over correlation coefficients.
//!
//! A [`Term`] names one correlation coefficient `E(A1^x1 ... An^xn)` by the
//! set of parties that use their primed setting. A [`Polynomial`] is an exact
//! dyadic combination of terms; it holds the Mermin-Klyshko polynomials
//! `M_n`, their primed partners `M_n'` and the Svetlichny polynomials `S_n`.
//!
//! Parties are 0-based internally (bit `j` of a mask is party `j`) and
//! 1-based in every text form.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Largest party count a [`Term`] can describe.
pub const MAX_PARTIES: u32 = 30;

#[inline]
pub(crate) fn full_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// One correlation coefficient: bit `j` of `prime_mask` is set iff party `j`
/// measures its primed observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    n: u32,
    prime_mask: u64,
}

impl Term {
    pub fn new(n: u32, prime_mask: u64) -> Result<Self> {
        if n == 0 || n > MAX_PARTIES {
            return Err(Error::invalid(format!(
                "party count {n} outside 1..={MAX_PARTIES}"
            )));
        }
        if prime_mask > full_mask(n) {
            return Err(Error::invalid(format!(
                "prime mask {prime_mask:#b} has bits beyond {n} parties"
            )));
        }
        Ok(Term { n, prime_mask })
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn prime_mask(self) -> u64 {
        self.prime_mask
    }

    pub fn is_primed(self, party: u32) -> bool {
        self.prime_mask >> party & 1 == 1
    }

    /// The n-character setting string used by correlation files: character
    /// `j` is `1` when party `j + 1` is primed.
    pub fn settings_string(self) -> String {
        (0..self.n)
            .map(|j| if self.is_primed(j) { '1' } else { '0' })
            .collect()
    }

    pub fn from_settings_string(s: &str) -> Result<Self> {
        let n = u32::try_from(s.len()).map_err(|_| Error::invalid("settings string too long"))?;
        let mut mask = 0u64;
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => mask |= 1 << j,
                _ => {
                    return Err(Error::invalid(format!(
                        "setting string `{s}` must contain only 0 and 1"
                    )))
                }
            }
        }
        Term::new(n, mask)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.n {
            if j > 0 {
                f.write_str(" ")?;
            }
            write!(f, "A{}", j + 1)?;
            if self.is_primed(j) {
                f.write_str("'")?;
            }
        }
        Ok(())
    }
}

/// A signed dyadic combination of correlation coefficients on `n` parties.
/// Zero coefficients are never stored; the empty polynomial is legal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    n: u32,
    terms: BTreeMap<u64, Dyadic>,
}

impl Polynomial {
    pub fn empty(n: u32) -> Result<Self> {
        if n == 0 || n > MAX_PARTIES {
            return Err(Error::invalid(format!(
                "party count {n} outside 1..={MAX_PARTIES}"
            )));
        }
        Ok(Polynomial {
            n,
            terms: BTreeMap::new(),
        })
    }

    /// Builds a polynomial from `(prime_mask, coefficient)` pairs, combining
    /// repeated masks.
    pub fn from_terms(n: u32, terms: impl IntoIterator<Item = (u64, Dyadic)>) -> Result<Self> {
        let mut p = Polynomial::empty(n)?;
        for (mask, c) in terms {
            Term::new(n, mask)?;
            p.add_term(mask, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, mask: u64, c: Dyadic) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mask).or_insert(Dyadic::ZERO);
        *entry = *entry + c;
        if entry.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of nonzero terms.
    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending `prime_mask` order.
    pub fn terms(&self) -> impl Iterator<Item = (Term, Dyadic)> + '_ {
        let n = self.n;
        self.terms
            .iter()
            .map(move |(&m, &c)| (Term { n, prime_mask: m }, c))
    }

    pub(crate) fn masks(&self) -> impl Iterator<Item = (u64, Dyadic)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, t: Term) -> Dyadic {
        if t.n != self.n {
            return Dyadic::ZERO;
        }
        self.terms
            .get(&t.prime_mask)
            .copied()
            .unwrap_or(Dyadic::ZERO)
    }

    /// Exchanges primed and unprimed settings of every party.
    pub fn prime_flip(&self) -> Polynomial {
        let full = full_mask(self.n);
        Polynomial {
            n: self.n,
            terms: self.terms.iter().map(|(&m, &c)| (m ^ full, c)).collect(),
        }
    }

    pub fn scale(&self, alpha: Dyadic) -> Polynomial {
        if alpha.is_zero() {
            return Polynomial {
                n: self.n,
                terms: BTreeMap::new(),
            };
        }
        Polynomial {
            n: self.n,
            terms: self.terms.iter().map(|(&m, &c)| (m, c * alpha)).collect(),
        }
    }

    pub fn negate(&self) -> Polynomial {
        self.scale(-Dyadic::ONE)
    }

    /// Keeps only the terms for which `keep` holds.
    pub fn filter(&self, mut keep: impl FnMut(Term) -> bool) -> Polynomial {
        let n = self.n;
        Polynomial {
            n,
            terms: self
                .terms
                .iter()
                .filter(|(&m, _)| keep(Term { n, prime_mask: m }))
                .map(|(&m, &c)| (m, c))
                .collect(),
        }
    }

    /// Sum of absolute coefficients: the value reached when every correlation
    /// coefficient is set to the sign of its coefficient.
    pub fn algebraic_limit(&self) -> Dyadic {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn algebraic_limit_f64(&self) -> f64 {
        self.algebraic_limit().to_f64()
    }

    /// Largest denominator exponent among the coefficients.
    pub fn common_log2_denominator(&self) -> u32 {
        self.terms
            .values()
            .map(|c| c.log2_denominator())
            .max()
            .unwrap_or(0)
    }

    /// `Σ coeff(t) · c(t)`; every term of the support must have a value.
    pub fn evaluate(&self, c: &CorrelationVector) -> Result<f64> {
        if c.n != self.n {
            return Err(Error::invalid(format!(
                "correlation vector has {} parties, polynomial has {}",
                c.n, self.n
            )));
        }
        let missing: Vec<Term> = self
            .terms()
            .map(|(t, _)| t)
            .filter(|t| !c.values.contains_key(&t.prime_mask))
            .collect();
        if !missing.is_empty() {
            return Err(Error::IncompleteData { missing });
        }
        Ok(self
            .masks()
            .map(|(m, coeff)| coeff.to_f64() * c.values[&m])
            .sum())
    }

    /// Canonical text form, one term per line, terms by ascending mask.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, c) in self.terms() {
            let sign = if c.signum() < 0 { '-' } else { '+' };
            out.push_str(&format!(
                "{sign}{}/2^{} * {t}\n",
                c.numerator().abs(),
                c.log2_denominator()
            ));
        }
        out
    }

    /// Parses the canonical text form. Lines starting with `#` are comments,
    /// except that `# n=<count>` fixes the party count (needed for an empty
    /// polynomial).
    pub fn parse_text(text: &str) -> Result<Polynomial> {
        let mut n: Option<u32> = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("n=") {
                    let v: u32 = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(line_no, "bad party count in header"))?;
                    if n.is_some_and(|prev| prev != v) {
                        return Err(Error::parse(line_no, "party count conflicts with terms"));
                    }
                    n = Some(v);
                }
                continue;
            }
            let (coeff, factors) = line
                .split_once('*')
                .ok_or_else(|| Error::parse(line_no, "expected `<coefficient> * <factors>`"))?;
            let coeff: Dyadic = coeff
                .trim()
                .parse()
                .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
            let mut mask = 0u64;
            let mut count = 0u32;
            for tok in factors.split_whitespace() {
                let (body, primed) = match tok.strip_suffix('\'') {
                    Some(b) => (b, true),
                    None => (tok, false),
                };
                let party: u32 = body
                    .strip_prefix('A')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::parse(line_no, format!("bad factor `{tok}`")))?;
                if party != count + 1 {
                    return Err(Error::parse(
                        line_no,
                        format!("factor `{tok}` out of order, expected A{}", count + 1),
                    ));
                }
                if primed {
                    mask |= 1 << count;
                }
                count += 1;
                if count > MAX_PARTIES {
                    return Err(Error::parse(line_no, "too many parties"));
                }
            }
            match n {
                Some(v) if v != count => {
                    return Err(Error::parse(
                        line_no,
                        format!("term has {count} factors, expected {v}"),
                    ))
                }
                _ => n = Some(count),
            }
            terms.push((mask, coeff));
        }
        let n = n.ok_or_else(|| Error::parse(1, "no terms and no `# n=` header"))?;
        Polynomial::from_terms(n, terms).map_err(|e| Error::parse(1, e.to_string()))
    }

    pub fn to_structured(&self) -> StructuredPolynomial {
        StructuredPolynomial {
            n: self.n,
            terms: self
                .masks()
                .map(|(m, c)| StructuredTerm {
                    prime_mask: m,
                    numerator: c.numerator(),
                    log2_denominator: c.log2_denominator(),
                })
                .collect(),
        }
    }

    pub fn from_structured(s: &StructuredPolynomial) -> Result<Polynomial> {
        Polynomial::from_terms(
            s.n,
            s.terms
                .iter()
                .map(|t| (t.prime_mask, Dyadic::new(t.numerator, t.log2_denominator))),
        )
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredTerm {
    pub prime_mask: u64,
    pub numerator: i64,
    pub log2_denominator: u32,
}

/// Structured (JSON-friendly) form of a polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredPolynomial {
    pub n: u32,
    pub terms: Vec<StructuredTerm>,
}

/// `αp + βq`.
pub fn combine(p: &Polynomial, q: &Polynomial, alpha: Dyadic, beta: Dyadic) -> Result<Polynomial> {
    if p.n != q.n {
        return Err(Error::invalid(format!(
            "cannot combine polynomials on {} and {} parties",
            p.n, q.n
        )));
    }
    let mut out = p.scale(alpha);
    for (m, c) in q.masks() {
        out.add_term(m, c * beta);
    }
    Ok(out)
}

/// Product of a polynomial on parties `1..=m` with one on parties `1..=k`,
/// the latter relabelled to `m+1..=m+k`.
pub fn tensor_product(p: &Polynomial, q: &Polynomial) -> Result<Polynomial> {
    let n = p.n + q.n;
    let mut out = Polynomial::empty(n)?;
    for (pm, pc) in p.masks() {
        for (qm, qc) in q.masks() {
            out.add_term(pm | qm << p.n, pc * qc);
        }
    }
    Ok(out)
}

/// The Mermin-Klyshko polynomial `M_n`:
/// `M_1 = a_1`, `M_n = ½M_{n-1}(a_n + a_n') + ½M'_{n-1}(a_n - a_n')`.
pub fn mk(n: u32) -> Result<Polynomial> {
    if n == 0 || n > MAX_PARTIES {
        return Err(Error::invalid(format!(
            "MK polynomial needs 1..={MAX_PARTIES} parties, got {n}"
        )));
    }
    let mut cur = Polynomial::from_terms(1, [(0, Dyadic::ONE)])?;
    for k in 2..=n {
        let prev_flip = cur.prime_flip();
        let bit = 1u64 << (k - 1);
        let mut next = Polynomial::empty(k)?;
        for (m, c) in cur.masks() {
            let h = c * Dyadic::HALF;
            next.add_term(m, h);
            next.add_term(m | bit, h);
        }
        for (m, c) in prev_flip.masks() {
            let h = c * Dyadic::HALF;
            next.add_term(m, h);
            next.add_term(m | bit, -h);
        }
        cur = next;
    }
    Ok(cur)
}

/// `M_n'`, the MK polynomial with primed and unprimed settings exchanged.
pub fn mk_prime(n: u32) -> Result<Polynomial> {
    Ok(mk(n)?.prime_flip())
}

/// The Svetlichny polynomial: `M_n` for even `n`, `½(M_n + M_n')` for odd `n`.
pub fn svetlichny(n: u32) -> Result<Polynomial> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "Svetlichny polynomial needs at least 2 parties, got {n}"
        )));
    }
    let m = mk(n)?;
    if n.is_multiple_of(2) {
        Ok(m)
    } else {
        combine(&m, &m.prime_flip(), Dyadic::HALF, Dyadic::HALF)
    }
}

/// The second Svetlichny form `½(M_n - M_n')`, defined for odd `n ≥ 3`.
pub fn svetlichny_minus(n: u32) -> Result<Polynomial> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "the second Svetlichny form needs an odd party count ≥ 3, got {n}"
        )));
    }
    let m = mk(n)?;
    combine(&m, &m.prime_flip(), Dyadic::HALF, -Dyadic::HALF)
}

/// The built-in polynomial families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolynomialKind {
    Mk,
    MkPrime,
    Svetlichny,
    SvetlichnyMinus,
}

impl PolynomialKind {
    pub const ALL: [PolynomialKind; 4] = [
        PolynomialKind::Mk,
        PolynomialKind::MkPrime,
        PolynomialKind::Svetlichny,
        PolynomialKind::SvetlichnyMinus,
    ];

    pub fn build(self, n: u32) -> Result<Polynomial> {
        match self {
            PolynomialKind::Mk => mk(n),
            PolynomialKind::MkPrime => mk_prime(n),
            PolynomialKind::Svetlichny => svetlichny(n),
            PolynomialKind::SvetlichnyMinus => svetlichny_minus(n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolynomialKind::Mk => "mk",
            PolynomialKind::MkPrime => "mk-prime",
            PolynomialKind::Svetlichny => "svetlichny",
            PolynomialKind::SvetlichnyMinus => "svetlichny-minus",
        }
    }
}

impl fmt::Display for PolynomialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PolynomialKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PolynomialKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown polynomial `{s}`; expected mk, mk-prime, svetlichny or svetlichny-minus"
                ))
            })
    }
}

/// Correlation coefficients `E(t) ∈ [-1, 1]` keyed by term.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector {
    n: u32,
    values: BTreeMap<u64, f64>,
}

/// Slack allowed above |1| before a correlation value is rejected; accepted
/// values are clamped into [-1, 1].
const RANGE_SLACK: f64 = 1e-12;

impl CorrelationVector {
    pub fn new(n: u32) -> Result<Self> {
        Polynomial::empty(n)?;
        Ok(CorrelationVector {
            n,
            values: BTreeMap::new(),
        })
    }

    /// A complete vector with `f(t)` for each of the `2^n` terms.
    pub fn from_fn(n: u32, mut f: impl FnMut(Term) -> f64) -> Result<Self> {
        let mut c = CorrelationVector::new(n)?;
        for m in 0..=full_mask(n) {
            let t = Term { n, prime_mask: m };
            c.insert(t, f(t))?;
        }
        Ok(c)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, t: Term) -> Option<f64> {
        self.values.get(&t.prime_mask).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Term, f64)> + '_ {
        let n = self.n;
        self.values
            .iter()
            .map(move |(&m, &v)| (Term { n, prime_mask: m }, v))
    }

    /// Adds a value; duplicates and values outside [-1, 1] are rejected.
    pub fn insert(&mut self, t: Term, value: f64) -> Result<()> {
        if t.n != self.n {
            return Err(Error::invalid(format!(
                "term {t} does not have {} parties",
                self.n
            )));
        }
        if !value.is_finite() || value.abs() > 1.0 + RANGE_SLACK {
            return Err(Error::invalid(format!(
                "correlation value {value} for {t} outside [-1, 1]"
            )));
        }
        if self.values.contains_key(&t.prime_mask) {
            return Err(Error::invalid(format!("duplicate value for {t}")));
        }
        self.values.insert(t.prime_mask, value.clamp(-1.0, 1.0));
        Ok(())
    }

    /// Parses a correlation-data file: a header `n=<count>`, then one line
    /// `<settings> <value>` per term. `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out: Option<CorrelationVector> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(cv) = out.as_mut() else {
                let n: u32 = line
                    .strip_prefix("n=")
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::parse(line_no, "expected header `n=<count>`"))?;
                out = Some(
                    CorrelationVector::new(n).map_err(|e| Error::parse(line_no, e.to_string()))?,
                );
                continue;
            };
            let mut parts = line.split_whitespace();
            let (Some(settings), Some(value), None) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::parse(line_no, "expected `<settings> <value>`"));
            };
            if settings.len() != cv.n as usize {
                return Err(Error::parse(
                    line_no,
                    format!("settings `{settings}` must have {} characters", cv.n),
                ));
            }
            let t = Term::from_settings_string(settings)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
            let v: f64 = value
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad value `{value}`")))?;
            cv.insert(t, v)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
        }
        out.ok_or_else(|| Error::parse(1, "missing header `n=<count>`"))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for (t, v) in self.iter() {
            out.push_str(&format!("{} {v:?}\n", t.settings_string()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: u32, terms: &[(&str, i64, u32)]) -> Polynomial {
        Polynomial::from_terms(
            n,
            terms.iter().map(|&(s, num, k)| {
                (
                    Term::from_settings_string(s).unwrap().prime_mask(),
                    Dyadic::new(num, k),
                )
            }),
        )
        .unwrap()
    }

    #[test]
    fn mk_base_cases() {
        assert_eq!(mk(1).unwrap(), poly(1, &[("0", 1, 0)]));
        // ½(a1a2 + a1'a2 + a1a2' − a1'a2')
        assert_eq!(
            mk(2).unwrap(),
            poly(
                2,
                &[("00", 1, 1), ("10", 1, 1), ("01", 1, 1), ("11", -1, 1)]
            )
        );
        // ½(a1a2a3' + a1a2'a3 + a1'a2a3 − a1'a2'a3')
        assert_eq!(
            mk(3).unwrap(),
            poly(
                3,
                &[("001", 1, 1), ("010", 1, 1), ("100", 1, 1), ("111", -1, 1)]
            )
        );
        assert!(matches!(mk(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn prime_flip_examples() {
        assert_eq!(mk(1).unwrap().prime_flip(), poly(1, &[("1", 1, 0)]));
        assert_eq!(
            mk(2).unwrap().prime_flip(),
            poly(
                2,
                &[("11", 1, 1), ("01", 1, 1), ("10", 1, 1), ("00", -1, 1)]
            )
        );
    }

    #[test]
    fn svetlichny_forms() {
        let s3 = svetlichny(3).unwrap();
        assert_eq!(s3.support_size(), 8);
        assert!(s3.terms().all(|(_, c)| c.abs() == Dyadic::new(1, 2)));
        // ½(M2 a3' + M2' a3)
        let a3 = Polynomial::from_terms(1, [(0, Dyadic::ONE)]).unwrap();
        let a3p = a3.prime_flip();
        let m2 = mk(2).unwrap();
        let expanded = combine(
            &tensor_product(&m2, &a3p).unwrap(),
            &tensor_product(&m2.prime_flip(), &a3).unwrap(),
            Dyadic::HALF,
            Dyadic::HALF,
        )
        .unwrap();
        assert_eq!(s3, expanded);
        assert_eq!(svetlichny(4).unwrap(), mk(4).unwrap());
        assert!(svetlichny(1).is_err());

        let sm = svetlichny_minus(3).unwrap();
        assert_eq!(sm.support_size(), 8);
        assert_eq!(sm.algebraic_limit(), s3.algebraic_limit());
        assert_eq!(sm.prime_flip(), sm.negate());
        assert!(svetlichny_minus(4).is_err());
        assert!(svetlichny_minus(1).is_err());
    }

    #[test]
    fn combine_examples() {
        let m2 = mk(2).unwrap();
        let sum = combine(&m2, &m2.prime_flip(), Dyadic::ONE, Dyadic::ONE).unwrap();
        // a1a2' + a1'a2
        assert_eq!(sum, poly(2, &[("01", 1, 0), ("10", 1, 0)]));
        let zero = combine(&m2, &m2, Dyadic::HALF, -Dyadic::HALF).unwrap();
        assert!(zero.is_empty());
        assert_eq!(zero.algebraic_limit(), Dyadic::ZERO);
        assert!(combine(&m2, &mk(3).unwrap(), Dyadic::ONE, Dyadic::ONE).is_err());
    }

    #[test]
    fn tensor_product_examples() {
        let m1 = mk(1).unwrap();
        let prod = tensor_product(&m1, &m1).unwrap();
        assert_eq!(prod, poly(2, &[("00", 1, 0)]));
        assert_ne!(prod, mk(2).unwrap());
    }

    #[test]
    fn splitting_identity_four_parties() {
        let m2 = mk(2).unwrap();
        let m2p = m2.prime_flip();
        let plus = combine(&m2, &m2p, Dyadic::ONE, Dyadic::ONE).unwrap();
        let minus = combine(&m2, &m2p, Dyadic::ONE, -Dyadic::ONE).unwrap();
        let lhs = combine(
            &tensor_product(&m2, &plus).unwrap(),
            &tensor_product(&m2p, &minus).unwrap(),
            Dyadic::HALF,
            Dyadic::HALF,
        )
        .unwrap();
        assert_eq!(lhs, mk(4).unwrap());
    }

    #[test]
    fn algebraic_limits_and_support() {
        assert_eq!(mk(1).unwrap().algebraic_limit(), Dyadic::ONE);
        assert_eq!(mk(2).unwrap().algebraic_limit(), Dyadic::from_int(2));
        assert_eq!(mk(3).unwrap().algebraic_limit(), Dyadic::from_int(2));
        assert_eq!(mk(4).unwrap().algebraic_limit(), Dyadic::from_int(4));
        assert_eq!(mk(2).unwrap().support_size(), 4);
        assert_eq!(mk(3).unwrap().support_size(), 4);
        assert_eq!(mk(4).unwrap().support_size(), 16);
    }

    #[test]
    fn evaluate_examples() {
        let m2 = mk(2).unwrap();
        let ones = CorrelationVector::from_fn(2, |_| 1.0).unwrap();
        assert_eq!(m2.evaluate(&ones).unwrap(), 1.0);
        let zeros = CorrelationVector::from_fn(2, |_| 0.0).unwrap();
        assert_eq!(m2.evaluate(&zeros).unwrap(), 0.0);

        let m3 = mk(3).unwrap();
        let signs = CorrelationVector::from_fn(3, |t| m3.coefficient(t).signum() as f64).unwrap();
        assert_eq!(m3.evaluate(&signs).unwrap(), 2.0);

        let mut partial = CorrelationVector::new(3).unwrap();
        partial
            .insert(Term::from_settings_string("001").unwrap(), 0.5)
            .unwrap();
        match m3.evaluate(&partial) {
            Err(Error::IncompleteData { missing }) => {
                assert_eq!(missing.len(), 3);
                assert_eq!(missing[0].to_string(), "A1' A2 A3");
            }
            other => panic!("expected incomplete data, got {other:?}"),
        }
    }

    #[test]
    fn text_forms() {
        assert_eq!(mk(1).unwrap().to_text(), "+1/2^0 * A1\n");
        let text = mk(2).unwrap().to_text();
        assert_eq!(
            text,
            "+1/2^1 * A1 A2\n+1/2^1 * A1' A2\n+1/2^1 * A1 A2'\n-1/2^1 * A1' A2'\n"
        );
        assert_eq!(Polynomial::parse_text(&text).unwrap(), mk(2).unwrap());
        let empty = Polynomial::parse_text("# n=3\n").unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.n(), 3);
        assert!(matches!(
            Polynomial::parse_text("+1/2^0 * A1\n+1/2^0 * A1 A2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Polynomial::parse_text("+1/2^0 * A2 A1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let s = svetlichny(3).unwrap();
        let json = serde_json::to_string(&s.to_structured()).unwrap();
        let back: StructuredPolynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(Polynomial::from_structured(&back).unwrap(), s);
    }

    #[test]
    fn correlation_file_parsing() {
        let cv = CorrelationVector::parse("n=2\n00 0.5\n# c\n11 -1\n").unwrap();
        assert_eq!(cv.len(), 2);
        assert_eq!(
            cv.get(Term::from_settings_string("11").unwrap()),
            Some(-1.0)
        );
        assert!(matches!(
            CorrelationVector::parse("n=2\n00 0.5\n00 0.1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            CorrelationVector::parse("n=2\n002 0.5\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            CorrelationVector::parse("n=2\n01 1.5\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            CorrelationVector::parse("00 0.5\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let back = CorrelationVector::parse(&cv.to_text()).unwrap();
        assert_eq!(back, cv);
    }
}
