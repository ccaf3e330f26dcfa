//! Bound tables and verdicts.
//!
//! Every tabulated bound of the MK and Svetlichny families is a power of
//! `√2`, so bounds are carried exactly as [`RootTwoPower`] and rendered as
//! decimals only at output.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::models::{hybrid_bound_all, local_bound};
use crate::polynomial::{mk, svetlichny, Polynomial, PolynomialKind};
use crate::quantum::{quantum_max, quantum_max_biseparable, QuantumOptions};

/// Slack below which a value is not considered to exceed a threshold.
pub const VERDICT_TOL: f64 = 1e-9;
/// Slack above the algebraic limit tolerated before input is rejected.
pub const CONSISTENCY_TOL: f64 = 1e-6;
/// Agreement required between see-saw results and closed forms.
pub const QUANTUM_CELL_TOL: f64 = 1e-6;

/// `2^(exponent/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootTwoPower(pub i32);

impl RootTwoPower {
    pub const ONE: RootTwoPower = RootTwoPower(0);

    pub fn exponent(self) -> i32 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        let half = self.0.div_euclid(2);
        let base = (half as f64).exp2();
        if self.0.rem_euclid(2) == 1 {
            base * std::f64::consts::SQRT_2
        } else {
            base
        }
    }

    /// Exact dyadic value when the exponent is even.
    pub fn to_dyadic(self) -> Option<Dyadic> {
        if self.0 % 2 != 0 {
            return None;
        }
        let e = self.0 / 2;
        Some(if e >= 0 {
            Dyadic::from_int(1 << e)
        } else {
            Dyadic::new(1, (-e) as u32)
        })
    }

    pub fn from_dyadic(d: Dyadic) -> Option<Self> {
        d.log2_exact().map(|e| RootTwoPower(2 * e))
    }

    pub fn times(self, other: RootTwoPower) -> RootTwoPower {
        RootTwoPower(self.0 + other.0)
    }
}

impl fmt::Display for RootTwoPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let half = self.0.div_euclid(2);
        let odd = self.0.rem_euclid(2) == 1;
        match (half, odd) {
            (h, false) if h >= 0 => write!(f, "{}", 1u64 << h),
            (0, true) => f.write_str("√2"),
            (h, true) if h > 0 => write!(f, "{}√2", 1u64 << h),
            _ => write!(f, "2^({}/2)", self.0),
        }
    }
}

impl Serialize for RootTwoPower {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            exact: String,
            log2_times_two: i32,
            value: f64,
        }
        Repr {
            exact: self.to_string(),
            log2_times_two: self.0,
            value: self.to_f64(),
        }
        .serialize(s)
    }
}

/// The correlation models bounds are tabulated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Local,
    /// Arbitrary correlations inside blocks of `k` and `n - k` parties.
    HybridSeparable(u32),
    /// Quantum states with at most `m`-particle entanglement.
    QuantumDepth(u32),
    Algebraic,
}

impl ModelKind {
    pub fn label(self, n: u32) -> String {
        match self {
            ModelKind::Local => "lv".into(),
            ModelKind::HybridSeparable(k) => format!("{k}/{}S", n.saturating_sub(k)),
            ModelKind::QuantumDepth(m) if m == n => format!("{n}QM"),
            ModelKind::QuantumDepth(m) => format!("depth-{m} QM"),
            ModelKind::Algebraic => "alg".into(),
        }
    }

    fn check(self, n: u32) -> Result<()> {
        match self {
            ModelKind::HybridSeparable(k) if k == 0 || k >= n => Err(Error::invalid(format!(
                "hybrid split {k}/{} is not a bipartition",
                n as i64 - k as i64
            ))),
            ModelKind::QuantumDepth(m) if m == 0 || m > n => Err(Error::invalid(format!(
                "entanglement depth {m} outside 1..={n}"
            ))),
            _ => Ok(()),
        }
    }
}

impl Serialize for ModelKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ModelKind::Local => s.serialize_str("local"),
            ModelKind::HybridSeparable(k) => s.collect_str(&format_args!("hybrid:{k}")),
            ModelKind::QuantumDepth(m) => s.collect_str(&format_args!("quantum:{m}")),
            ModelKind::Algebraic => s.serialize_str("algebraic"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub model: ModelKind,
    pub label: String,
    pub bound: RootTwoPower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTable {
    pub polynomial: PolynomialKind,
    pub n: u32,
    pub entries: Vec<BoundEntry>,
}

impl BoundTable {
    fn push(&mut self, model: ModelKind, bound: RootTwoPower) {
        self.entries.push(BoundEntry {
            model,
            label: model.label(self.n),
            bound,
        });
    }

    pub fn get(&self, model: ModelKind) -> Option<RootTwoPower> {
        self.entries
            .iter()
            .find(|e| e.model == model)
            .map(|e| e.bound)
    }

    /// Local ≤ every hybrid ≤ algebraic, and quantum bounds nondecreasing in
    /// the entanglement depth.
    pub fn is_monotone(&self) -> bool {
        let of = |pred: fn(&ModelKind) -> bool| -> Vec<(ModelKind, RootTwoPower)> {
            self.entries
                .iter()
                .filter(|e| pred(&e.model))
                .map(|e| (e.model, e.bound))
                .collect()
        };
        let local = of(|m| matches!(m, ModelKind::Local));
        let hybrid = of(|m| matches!(m, ModelKind::HybridSeparable(_)));
        let alg = of(|m| matches!(m, ModelKind::Algebraic));
        let mut quantum = of(|m| matches!(m, ModelKind::QuantumDepth(_)));
        quantum.sort_by_key(|(m, _)| match m {
            ModelKind::QuantumDepth(d) => *d,
            _ => 0,
        });
        let le = |a: &[(ModelKind, RootTwoPower)], b: &[(ModelKind, RootTwoPower)]| {
            a.iter().all(|x| b.iter().all(|y| x.1 <= y.1))
        };
        le(&local, &hybrid)
            && le(&hybrid, &alg)
            && le(&local, &alg)
            && quantum.windows(2).all(|w| w[0].1 <= w[1].1)
    }
}

fn mk_algebraic(n: u32) -> RootTwoPower {
    RootTwoPower(if n.is_multiple_of(2) {
        n as i32
    } else {
        n as i32 - 1
    })
}

/// Closed-form bound of `M_n` under `model`. Hybrid bounds are tabulated only
/// for three and four parties; other sizes go through
/// [`crate::models::hybrid_bound_all`].
pub fn mk_bound(n: u32, model: ModelKind) -> Result<RootTwoPower> {
    if n == 0 {
        return Err(Error::invalid("MK bounds need n ≥ 1"));
    }
    model.check(n)?;
    match model {
        ModelKind::Local => Ok(RootTwoPower::ONE),
        ModelKind::QuantumDepth(m) => Ok(RootTwoPower(m as i32 - 1)),
        ModelKind::Algebraic => Ok(mk_algebraic(n)),
        ModelKind::HybridSeparable(_) if n == 3 || n == 4 => Ok(RootTwoPower(2)),
        ModelKind::HybridSeparable(k) => Err(Error::NotTabulated(format!(
            "hybrid {k}/{} bound of M_{n} has no closed form here; compute it with `bounds mk {n}`",
            n - k
        ))),
    }
}

/// `k/(n-k)` ceiling of `S_n`: `2^((n-2)/2)` for even `n`, `2^((n-3)/2)` for odd.
pub fn svetlichny_hybrid_ceiling(n: u32) -> RootTwoPower {
    RootTwoPower(if n.is_multiple_of(2) {
        n as i32 - 2
    } else {
        n as i32 - 3
    })
}

/// Bounds of `S_n`: every hybrid split shares one ceiling, and the quantum
/// maximum is `√2` above it.
pub fn svetlichny_bounds(n: u32) -> Result<BoundTable> {
    if n < 3 {
        return Err(Error::invalid(format!(
            "Svetlichny bound table needs n ≥ 3, got {n}"
        )));
    }
    let hybrid = svetlichny_hybrid_ceiling(n);
    let alg = svetlichny(n)?.algebraic_limit();
    let alg = RootTwoPower::from_dyadic(alg).ok_or_else(|| {
        Error::Integrity(format!(
            "algebraic limit {alg} of S_{n} is not a power of two"
        ))
    })?;
    let mut table = BoundTable {
        polynomial: PolynomialKind::Svetlichny,
        n,
        entries: Vec::new(),
    };
    table.push(ModelKind::Local, RootTwoPower::ONE);
    for k in 1..=n / 2 {
        table.push(ModelKind::HybridSeparable(k), hybrid);
    }
    table.push(ModelKind::QuantumDepth(n), hybrid.times(RootTwoPower(1)));
    table.push(ModelKind::Algebraic, alg);
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conclusion {
    NoConclusion,
    /// At least `min_depth`-particle entanglement.
    Entangled {
        min_depth: u32,
    },
    /// Not reproducible by any hybrid `k/(n-k)` model.
    GenuinelyNonseparable {
        parties: u32,
    },
    NotEstablished,
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::NoConclusion => f.write_str("no conclusion"),
            Conclusion::Entangled { min_depth } => {
                write!(f, "at least {min_depth}-particle entanglement")
            }
            Conclusion::GenuinelyNonseparable { parties } => {
                write!(f, "genuine {parties}-party non-separability")
            }
            Conclusion::NotEstablished => f.write_str("genuine non-separability not established"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub label: String,
    pub bound: RootTwoPower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub polynomial: PolynomialKind,
    pub n: u32,
    pub value: f64,
    pub thresholds: Vec<Threshold>,
    /// Largest threshold the value exceeds.
    pub threshold_crossed: Option<f64>,
    pub conclusion: Conclusion,
    /// `value` minus the crossed threshold, or minus the lowest threshold
    /// when none is crossed.
    pub margin: f64,
    /// The value is above the quantum maximum for `n` qubits.
    pub exceeds_quantum: bool,
}

fn check_value(value: f64, limit: Dyadic, what: &str) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::invalid(format!("value {value} is not finite")));
    }
    if value > limit.to_f64() + CONSISTENCY_TOL {
        return Err(Error::InconsistentInput(format!(
            "value {value} exceeds the algebraic limit {} of {what}",
            limit.to_f64()
        )));
    }
    Ok(())
}

/// Entanglement depth certified by a value of `M_n`: exceeding
/// `2^((m-1)/2)` rules out states with at most `m`-particle entanglement.
pub fn entanglement_depth_verdict(value: f64, n: u32) -> Result<Verdict> {
    if n < 2 {
        return Err(Error::invalid("depth verdicts need n ≥ 2"));
    }
    if value < 0.0 {
        return Err(Error::invalid(format!(
            "depth verdicts need a nonnegative value, got {value}"
        )));
    }
    check_value(value, mk(n)?.algebraic_limit(), &format!("M_{n}"))?;
    let thresholds: Vec<Threshold> = (1..=n)
        .map(|m| Threshold {
            label: ModelKind::QuantumDepth(m).label(n),
            bound: RootTwoPower(m as i32 - 1),
        })
        .collect();
    let crossed = (1..=n)
        .rev()
        .find(|&m| value > RootTwoPower(m as i32 - 1).to_f64() + VERDICT_TOL);
    let (conclusion, threshold) = match crossed {
        None => (Conclusion::NoConclusion, None),
        Some(m) => (
            Conclusion::Entangled {
                min_depth: (m + 1).min(n),
            },
            Some(RootTwoPower(m as i32 - 1).to_f64()),
        ),
    };
    Ok(Verdict {
        polynomial: PolynomialKind::Mk,
        n,
        value,
        margin: value - threshold.unwrap_or(thresholds[0].bound.to_f64()),
        threshold_crossed: threshold,
        thresholds,
        conclusion,
        exceeds_quantum: crossed == Some(n),
    })
}

/// Genuine `n`-party non-separability from a value of `S_n`: flagged iff the
/// value exceeds the common hybrid ceiling.
pub fn nonseparability_verdict(value: f64, n: u32) -> Result<Verdict> {
    if n < 2 {
        return Err(Error::invalid("non-separability verdicts need n ≥ 2"));
    }
    check_value(value, svetlichny(n)?.algebraic_limit(), &format!("S_{n}"))?;
    let hybrid = svetlichny_hybrid_ceiling(n);
    let quantum = hybrid.times(RootTwoPower(1));
    let ceiling = hybrid.to_f64();
    let flagged = value > ceiling + VERDICT_TOL;
    Ok(Verdict {
        polynomial: PolynomialKind::Svetlichny,
        n,
        value,
        thresholds: vec![
            Threshold {
                label: "hybrid k/(n-k)S".into(),
                bound: hybrid,
            },
            Threshold {
                label: format!("{n}QM"),
                bound: quantum,
            },
        ],
        threshold_crossed: flagged.then_some(ceiling),
        conclusion: if flagged {
            Conclusion::GenuinelyNonseparable { parties: n }
        } else {
            Conclusion::NotEstablished
        },
        margin: value - ceiling,
        exceeds_quantum: value > quantum.to_f64() + VERDICT_TOL,
    })
}

/// Verdict appropriate to a built-in polynomial family.
pub fn verdict_for(kind: PolynomialKind, n: u32, value: f64) -> Result<Verdict> {
    match kind {
        PolynomialKind::Mk | PolynomialKind::MkPrime => {
            let mut v = entanglement_depth_verdict(value, n)?;
            v.polynomial = kind;
            Ok(v)
        }
        PolynomialKind::Svetlichny | PolynomialKind::SvetlichnyMinus => {
            let mut v = nonseparability_verdict(value, n)?;
            v.polynomial = kind;
            Ok(v)
        }
    }
}

/// Identifies a polynomial as a member of a built-in family.
pub fn recognize(p: &Polynomial) -> Option<PolynomialKind> {
    PolynomialKind::ALL
        .into_iter()
        .find(|k| k.build(p.n()).is_ok_and(|q| &q == p))
}

pub const TABLE1_COLUMNS: [&str; 5] = ["lv", "2/1QM", "2/1S", "3QM", "3S (alg.)"];

/// Closed forms the three-party table is checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Expected {
    pub mermin: [RootTwoPower; 5],
    pub svetlichny: [RootTwoPower; 5],
}

impl Table1Expected {
    pub fn closed_forms() -> Result<Self> {
        let s = svetlichny_bounds(3)?;
        let get = |m| {
            s.get(m)
                .ok_or_else(|| Error::Integrity("incomplete S_3 bound table".into()))
        };
        Ok(Table1Expected {
            mermin: [
                mk_bound(3, ModelKind::Local)?,
                mk_bound(3, ModelKind::QuantumDepth(2))?,
                mk_bound(3, ModelKind::HybridSeparable(1))?,
                mk_bound(3, ModelKind::QuantumDepth(3))?,
                mk_bound(3, ModelKind::Algebraic)?,
            ],
            svetlichny: [
                get(ModelKind::Local)?,
                // 2/1QM lies between lv and 2/1S, which coincide for S_3
                get(ModelKind::HybridSeparable(1))?,
                get(ModelKind::HybridSeparable(1))?,
                get(ModelKind::QuantumDepth(3))?,
                get(ModelKind::Algebraic)?,
            ],
        })
    }

    pub fn product(&self) -> [RootTwoPower; 5] {
        std::array::from_fn(|i| self.mermin[i].times(self.svetlichny[i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellMethod {
    Enumeration,
    SeeSaw,
    Eigensolver,
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Cell {
    pub column: &'static str,
    pub expected: RootTwoPower,
    pub computed: f64,
    /// Exact computed value for classical cells.
    pub computed_exact: Option<String>,
    pub method: CellMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub label: &'static str,
    pub cells: Vec<Table1Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1 {
    pub columns: [&'static str; 5],
    pub rows: Vec<Table1Row>,
}

struct Recomputed {
    local: Dyadic,
    biseparable: f64,
    hybrid: Dyadic,
    quantum: f64,
    algebraic: Dyadic,
}

fn recompute(p: &Polynomial, opts: &QuantumOptions) -> Result<Recomputed> {
    Ok(Recomputed {
        local: local_bound(p)?.value,
        biseparable: quantum_max_biseparable(p, opts)?.value,
        hybrid: hybrid_bound_all(p)?.max_value(),
        quantum: quantum_max(p, opts)?.value,
        algebraic: p.algebraic_limit(),
    })
}

enum Value {
    Exact(Dyadic),
    Approx(f64, CellMethod),
}

fn cell(row: &str, col: usize, expected: RootTwoPower, v: Value) -> Result<Table1Cell> {
    let column = TABLE1_COLUMNS[col];
    let (computed, exact, method, ok) = match v {
        Value::Exact(d) => (
            d.to_f64(),
            Some(d.to_string()),
            CellMethod::Enumeration,
            expected.to_dyadic() == Some(d),
        ),
        Value::Approx(x, m) => (
            x,
            None,
            m,
            (x - expected.to_f64()).abs() <= QUANTUM_CELL_TOL,
        ),
    };
    if !ok {
        return Err(Error::Integrity(format!(
            "cell {row}/{column}: expected {expected} ({}), recomputed {computed}",
            expected.to_f64()
        )));
    }
    Ok(Table1Cell {
        column,
        expected,
        computed,
        computed_exact: exact,
        method,
    })
}

/// Recomputes the three-party table of `M_3`, `S_3` and their product and
/// checks every cell against `expected`. Classical cells must agree exactly,
/// quantum cells within [`QUANTUM_CELL_TOL`].
pub fn table1_with(expected: &Table1Expected, opts: &QuantumOptions) -> Result<Table1> {
    let m = recompute(&mk(3)?, opts)?;
    let s = recompute(&svetlichny(3)?, opts)?;
    let row = |label: &'static str, r: &Recomputed, exp: &[RootTwoPower; 5]| -> Result<Table1Row> {
        Ok(Table1Row {
            label,
            cells: vec![
                cell(label, 0, exp[0], Value::Exact(r.local))?,
                cell(
                    label,
                    1,
                    exp[1],
                    Value::Approx(r.biseparable, CellMethod::SeeSaw),
                )?,
                cell(label, 2, exp[2], Value::Exact(r.hybrid))?,
                cell(
                    label,
                    3,
                    exp[3],
                    Value::Approx(r.quantum, CellMethod::Eigensolver),
                )?,
                cell(label, 4, exp[4], Value::Exact(r.algebraic))?,
            ],
        })
    };
    let m_row = row("M3", &m, &expected.mermin)?;
    let s_row = row("S3", &s, &expected.svetlichny)?;
    let prod = expected.product();
    let product_row = Table1Row {
        label: "prod.",
        cells: vec![
            cell("prod.", 0, prod[0], Value::Exact(m.local * s.local))?,
            cell(
                "prod.",
                1,
                prod[1],
                Value::Approx(m.biseparable * s.biseparable, CellMethod::Product),
            )?,
            cell("prod.", 2, prod[2], Value::Exact(m.hybrid * s.hybrid))?,
            cell(
                "prod.",
                3,
                prod[3],
                Value::Approx(m.quantum * s.quantum, CellMethod::Product),
            )?,
            cell("prod.", 4, prod[4], Value::Exact(m.algebraic * s.algebraic))?,
        ],
    };
    Ok(Table1 {
        columns: TABLE1_COLUMNS,
        rows: vec![m_row, s_row, product_row],
    })
}

pub fn table1(opts: &QuantumOptions) -> Result<Table1> {
    table1_with(&Table1Expected::closed_forms()?, opts)
}

impl Table1 {
    /// Aligned text rendering: closed form with the recomputed value.
    pub fn render(&self) -> String {
        let width = 22;
        let mut out = format!("{:<6}", "");
        for c in self.columns {
            out.push_str(&format!("| {c:<width$}"));
        }
        out.push('\n');
        out.push_str(&"-".repeat(6 + self.columns.len() * (width + 2)));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{:<6}", row.label));
            for c in &row.cells {
                let text = format!("{} ({:.9})", c.expected, c.computed);
                out.push_str(&format!("| {text:<width$}"));
            }
            out.push('\n');
        }
        out
    }
}
