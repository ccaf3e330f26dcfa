//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mkbell::classify::{nonseparability_verdict, table1, Conclusion};
use mkbell::models::{
    bipartitions, brute_hybrid_bound, hybrid_bound, hybrid_bound_all, local_bound,
};
use mkbell::quantum::{
    bell_operator, correlations, effective_bloch, expectation, ghz, max_eigenvalue, quantum_max,
    quantum_max_biseparable, seesaw, MeasurementFrame, PureState, QuantumOptions, UnitVector,
};
use mkbell::{
    combine, mk, mk_prime, svetlichny, svetlichny_minus, CorrelationVector, Dyadic, Polynomial,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn opts() -> QuantumOptions {
    QuantumOptions::new(0x5EED)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn pow2(e: u32) -> Dyadic {
    Dyadic::from_int(1 << e)
}

fn table1_reproduction() -> Check {
    let start = Instant::now();
    let t = table1(&opts()).map_err(|e| e.to_string())?;
    let expected = [
        ["1", "√2", "2", "2", "2"],
        ["1", "1", "1", "√2", "2"],
        ["1", "√2", "2", "2√2", "4"],
    ];
    let values = [
        [1.0, SQRT2, 2.0, 2.0, 2.0],
        [1.0, 1.0, 1.0, SQRT2, 2.0],
        [1.0, SQRT2, 2.0, 2.0 * SQRT2, 4.0],
    ];
    for (r, row) in t.rows.iter().enumerate() {
        for (c, cell) in row.cells.iter().enumerate() {
            let label = format!("{}/{}", row.label, cell.column);
            ensure(cell.expected.to_string() == expected[r][c], || {
                format!("{label}: closed form {}", cell.expected)
            })?;
            match cell.computed_exact {
                Some(_) => ensure(cell.computed == values[r][c], || {
                    format!("{label}: {} is not bit-exact", cell.computed)
                })?,
                None => ensure((cell.computed - values[r][c]).abs() <= 1e-6, || {
                    format!("{label}: {} off by more than 1e-6", cell.computed)
                })?,
            }
        }
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!("15 cells in {:.2?}", start.elapsed()))
}

fn local_bounds() -> Check {
    let start = Instant::now();
    for n in 2..=7 {
        let b = local_bound(&mk(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(b.value == Dyadic::ONE, || format!("M_{n}: {}", b.value))?;
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("n = 2..7 in {:.2?}", start.elapsed()))
}

fn algebraic_limits() -> Check {
    for n in 2..=10u32 {
        let e = if n % 2 == 0 { n / 2 } else { (n - 1) / 2 };
        let got = mk(n).unwrap().algebraic_limit();
        ensure(got == pow2(e), || format!("M_{n}: {got}"))?;
    }
    Ok("n = 2..10".into())
}

fn masks(p: &Polynomial) -> Vec<u64> {
    p.terms().map(|(t, _)| t.prime_mask()).collect()
}

fn support_laws() -> Check {
    for n in 2..=10u32 {
        let m = mk(n).unwrap();
        let all: Vec<u64> = (0..1u64 << n).collect();
        if n % 2 == 0 {
            ensure(m.support_size() == all.len(), || {
                format!("M_{n} support {}", m.support_size())
            })?;
            let mp = mk_prime(n).unwrap();
            let plus = combine(&m, &mp, Dyadic::ONE, Dyadic::ONE).unwrap();
            let minus = combine(&m, &mp, Dyadic::ONE, -Dyadic::ONE).unwrap();
            let mut union = masks(&plus);
            union.extend(masks(&minus));
            union.sort_unstable();
            ensure(union == all, || {
                format!("M_{n}±M_{n}' supports do not split the terms")
            })?;
            ensure(
                plus.algebraic_limit() == m.algebraic_limit()
                    && minus.algebraic_limit() == m.algebraic_limit(),
                || format!("M_{n}±M_{n}' algebraic limits differ"),
            )?;
        } else {
            ensure(m.support_size() == all.len() / 2, || {
                format!("M_{n} support {}", m.support_size())
            })?;
            let mut union = masks(&m);
            union.extend(masks(&m.prime_flip()));
            union.sort_unstable();
            ensure(union == all, || {
                format!("M_{n} and M_{n}' supports overlap or miss terms")
            })?;
        }
    }
    Ok("n = 2..10".into())
}

fn hybrid_four_parties() -> Check {
    let m4 = mk(4).unwrap();
    let parts = bipartitions(4).unwrap();
    for pi in &parts {
        let b = hybrid_bound(&m4, pi).map_err(|e| e.to_string())?;
        ensure(b.value == Dyadic::from_int(2), || {
            format!("{pi}: {}", b.value)
        })?;
    }
    Ok(format!("{} bipartitions", parts.len()))
}

fn svetlichny_proposition() -> Check {
    let mut n6 = Duration::ZERO;
    for n in 3..=6u32 {
        let p = svetlichny(n).unwrap();
        let start = Instant::now();
        let r = hybrid_bound_all(&p).map_err(|e| e.to_string())?;
        if n == 6 {
            n6 = start.elapsed();
            within(Duration::from_secs(300), start)?;
        }
        let e = if n % 2 == 0 { (n - 2) / 2 } else { (n - 3) / 2 };
        ensure(r.is_uniform(), || {
            format!("S_{n}: hybrid bound not partition-uniform")
        })?;
        ensure(r.max_value() == pow2(e), || {
            format!("S_{n}: hybrid {}", r.max_value())
        })?;
        let q = quantum_max(&p, &opts()).map_err(|e| e.to_string())?;
        let target = SQRT2 * pow2(e).to_f64();
        ensure((q.value - target).abs() <= 1e-6, || {
            format!("S_{n}: quantum {} vs {target}", q.value)
        })?;
    }
    Ok(format!("n = 3..6, n=6 hybrid in {n6:.2?}"))
}

fn oracle_equivalence() -> Check {
    let mut checked = 0;
    for n in 2..=5u32 {
        let mut polys = vec![mk(n).unwrap(), svetlichny(n).unwrap()];
        if n % 2 == 1 {
            polys.push(svetlichny_minus(n).unwrap());
        }
        for p in &polys {
            for pi in bipartitions(n).unwrap() {
                let brute = match brute_hybrid_bound(p, &pi) {
                    Ok(b) => b,
                    Err(mkbell::Error::ResourceLimit { .. }) => continue,
                    Err(e) => return Err(e.to_string()),
                };
                let fast = hybrid_bound(p, &pi).map_err(|e| e.to_string())?;
                ensure(fast.value == brute.value, || {
                    format!("n={n} {pi}: {} vs {}", fast.value, brute.value)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} polynomial/bipartition pairs"))
}

fn quantum_maxima() -> Check {
    for n in 2..=5u32 {
        let p = mk(n).unwrap();
        let q = quantum_max(&p, &opts()).map_err(|e| e.to_string())?;
        let target = ((n as f64 - 1.0) / 2.0).exp2();
        ensure((q.value - target).abs() <= 1e-6, || {
            format!("M_{n}: {} vs {target}", q.value)
        })?;
        let op = bell_operator(&p, &q.frame).map_err(|e| e.to_string())?;
        let (top, _) = max_eigenvalue(&op).map_err(|e| e.to_string())?;
        let at_state = expectation(&op, &q.state).map_err(|e| e.to_string())?;
        ensure((at_state - top).abs() <= 1e-8, || {
            format!("M_{n}: state gives {at_state}, top eigenvalue {top}")
        })?;
    }
    Ok("n = 2..5".into())
}

fn ceilings() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m2 = mk(2).unwrap();
    let s3 = svetlichny(3).unwrap();
    let mut worst = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..500 {
        let f = MeasurementFrame::random(2, &mut rng).unwrap();
        let psi = PureState::random(2, &mut rng).unwrap();
        let v = expectation(&bell_operator(&m2, &f).unwrap(), &psi).unwrap();
        ensure(v <= SQRT2 + 1e-9, || format!("M_2 expectation {v}"))?;
        let f3 = MeasurementFrame::random(3, &mut rng).unwrap();
        let (top, _) = max_eigenvalue(&bell_operator(&s3, &f3).unwrap()).unwrap();
        ensure(top <= SQRT2 + 1e-9, || format!("S_3 top eigenvalue {top}"))?;
        worst = (worst.0.max(v), worst.1.max(top));
    }
    Ok(format!(
        "max M_2 {:.6}, max S_3 {:.6} over 500 draws",
        worst.0, worst.1
    ))
}

fn gradient_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = rng.random_range(1..=4u32);
        let p = Polynomial::from_terms(
            n,
            (0..1u64 << n).map(|m| {
                (
                    m,
                    Dyadic::new(rng.random_range(-4..=4), rng.random_range(0..3)),
                )
            }),
        )
        .unwrap();
        let f = MeasurementFrame::random(n, &mut rng).unwrap();
        let psi = PureState::random(n, &mut rng).unwrap();
        let party = rng.random_range(0..n);
        let primed = rng.random_bool(0.5);
        let g = effective_bloch(&p, &f, &psi, party, primed).map_err(|e| e.to_string())?;
        let value = |v: [f64; 3]| {
            let u = UnitVector::normalize(v).unwrap();
            expectation(
                &bell_operator(&p, &f.with_setting(party, primed, u)).unwrap(),
                &psi,
            )
            .unwrap()
        };
        // extend the objective off the sphere as g·w + rest, which equals
        // |w|·value(w/|w|) - (|w| - 1)·rest; central differences of this
        // extension along each axis give g
        let v = f.setting(party, primed).to_array();
        let rest = value_rest(&p, &f, &psi, party, primed);
        let at = |w: [f64; 3]| {
            let norm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
            norm * value(w) - (norm - 1.0) * rest
        };
        for k in 0..3 {
            let mut plus = v;
            let mut minus = v;
            plus[k] += h;
            minus[k] -= h;
            let fd = (at(plus) - at(minus)) / (2.0 * h);
            worst = worst.max((fd - g[k]).abs());
            ensure((fd - g[k]).abs() <= 1e-6, || {
                format!("instance {i}: component {k} fd {fd} vs {}", g[k])
            })?;
        }
    }
    Ok(format!("100 instances, worst deviation {worst:.2e}"))
}

/// The part of the objective that does not use the given setting.
fn value_rest(
    p: &Polynomial,
    f: &MeasurementFrame,
    psi: &PureState,
    party: u32,
    primed: bool,
) -> f64 {
    let rest = p.filter(|t| t.is_primed(party) != primed);
    expectation(&bell_operator(&rest, f).unwrap(), psi).unwrap()
}

fn svetlichny_forms() -> Check {
    let s = svetlichny(3).unwrap();
    let m = svetlichny_minus(3).unwrap();
    let ls = local_bound(&s).unwrap().value;
    let lm = local_bound(&m).unwrap().value;
    ensure(ls == lm, || format!("local {ls} vs {lm}"))?;
    for pi in bipartitions(3).unwrap() {
        let (a, b) = (
            hybrid_bound(&s, &pi).unwrap().value,
            hybrid_bound(&m, &pi).unwrap().value,
        );
        ensure(a == b, || format!("hybrid {pi}: {a} vs {b}"))?;
    }
    ensure(s.algebraic_limit() == m.algebraic_limit(), || {
        "algebraic limits differ".into()
    })?;
    let (qs, qm) = (
        quantum_max(&s, &opts()).unwrap().value,
        quantum_max(&m, &opts()).unwrap().value,
    );
    ensure((qs - qm).abs() <= 1e-6, || format!("quantum {qs} vs {qm}"))?;
    let (bs, bm) = (
        quantum_max_biseparable(&s, &opts()).unwrap().value,
        quantum_max_biseparable(&m, &opts()).unwrap().value,
    );
    ensure((bs - bm).abs() <= 1e-6, || {
        format!("biseparable quantum {bs} vs {bm}")
    })?;
    Ok("local, hybrid, algebraic, quantum, biseparable quantum".into())
}

fn classification_end_to_end() -> Check {
    let p = svetlichny(3).unwrap();
    let psi = ghz(3).unwrap();
    let best = seesaw(&p, &psi, &opts()).map_err(|e| e.to_string())?;
    let cv = correlations(&psi, &best.frame).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("ghz3.txt");
    std::fs::write(&path, cv.to_text()).map_err(|e| e.to_string())?;

    let read = CorrelationVector::parse(&std::fs::read_to_string(&path).unwrap())
        .map_err(|e| e.to_string())?;
    let value = p.evaluate(&read).map_err(|e| e.to_string())?;
    ensure((value - SQRT2).abs() <= 1e-6, || format!("value {value}"))?;
    let v = nonseparability_verdict(value, 3).map_err(|e| e.to_string())?;
    ensure(
        v.conclusion == Conclusion::GenuinelyNonseparable { parties: 3 },
        || format!("verdict {}", v.conclusion),
    )?;
    Ok(format!("value {value:.9}, verdict: {}", v.conclusion))
}

fn main() -> ExitCode {
    let criteria: &[Criterion] = &[
        ("table 1 reproduction", table1_reproduction),
        ("local bounds of M_n", local_bounds),
        ("algebraic-limit law", algebraic_limits),
        ("support laws", support_laws),
        ("hybrid bounds of M_4", hybrid_four_parties),
        (
            "Svetlichny hybrid and quantum bounds",
            svetlichny_proposition,
        ),
        ("hybrid oracle equivalence", oracle_equivalence),
        ("quantum maxima of M_n", quantum_maxima),
        ("quantum ceilings", ceilings),
        ("effective Bloch vector gradient", gradient_check),
        ("equivalence of Svetlichny forms", svetlichny_forms),
        (
            "classification from correlation data",
            classification_end_to_end,
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
