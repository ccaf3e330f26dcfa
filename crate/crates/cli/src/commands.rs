use std::fmt::Write as _;
use std::path::Path;

use mkbell::classify::{
    recognize, table1_with, verdict_for, RootTwoPower, Table1Expected, Verdict, TABLE1_COLUMNS,
};
use mkbell::models::{
    algebraic_bound, hybrid_bound_all_with, hybrid_bound_with, local_bound_with, Bipartition,
    BoundResult, Witness,
};
use mkbell::quantum::{
    bell_operator, expectation, quantum_max, seesaw, MeasurementFrame, PureState, QuantumState,
};
use mkbell::{CorrelationVector, Error, Polynomial, PolynomialKind, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

/// A command's result in both output forms.
pub struct Report {
    pub text: String,
    pub data: Value,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::NumericalIntegrity(format!("serialization: {e}")))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// A built-in polynomial or one read from a file in canonical text form.
pub enum PolySource<'a> {
    Builtin(PolynomialKind, u32),
    File(&'a Path),
}

pub struct Loaded {
    pub polynomial: Polynomial,
    pub kind: Option<PolynomialKind>,
    pub label: String,
}

impl PolySource<'_> {
    pub fn load(&self) -> Result<Loaded> {
        match *self {
            PolySource::Builtin(kind, n) => Ok(Loaded {
                polynomial: kind.build(n)?,
                kind: Some(kind),
                label: format!("{kind} n={n}"),
            }),
            PolySource::File(path) => {
                let polynomial = Polynomial::parse_text(&read_file(path)?)?;
                let kind = recognize(&polynomial);
                Ok(Loaded {
                    label: format!("{} n={}", path.display(), polynomial.n()),
                    polynomial,
                    kind,
                })
            }
        }
    }
}

pub fn poly(src: &PolySource) -> Result<Report> {
    let l = src.load()?;
    let p = &l.polynomial;
    let alg = p.algebraic_limit();
    let mut text = format!("# n={}\n", p.n());
    text.push_str(&p.to_text());
    let _ = writeln!(text, "# support_size {}", p.support_size());
    let _ = writeln!(text, "# algebraic_limit {} ({})", alg.to_f64(), alg);
    let data = json!({
        "polynomial": p.to_structured(),
        "kind": l.kind,
        "support_size": p.support_size(),
        "algebraic_limit": { "exact": alg.to_string(), "value": alg.to_f64() },
    });
    Ok(Report { text, data })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Model {
    Local,
    Hybrid,
    Algebraic,
}

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::Local(s) => s.to_string(),
        Witness::Hybrid {
            block_a, block_b, ..
        } => {
            let signs = |v: &[i8]| {
                v.iter()
                    .map(|&x| if x > 0 { '+' } else { '-' })
                    .collect::<String>()
            };
            format!(
                "A-block products {} B-block products {}",
                signs(block_a.products()),
                signs(block_b.products())
            )
        }
        Witness::Algebraic => "sign of each coefficient".into(),
    }
}

fn bound_line(out: &mut String, label: &str, b: &BoundResult) {
    let _ = writeln!(
        out,
        "{label:<20} {:<12} exact {:<10} witness: {}",
        b.value_f64(),
        b.value.to_string(),
        witness_text(&b.witness)
    );
}

pub fn bounds(
    src: &PolySource,
    models: &[Model],
    partition: Option<&str>,
    cfg: &RunConfig,
) -> Result<Report> {
    let l = src.load()?;
    let p = &l.polynomial;
    let limits = cfg.limits();
    let mut text = format!("bounds of {}\n", l.label);
    let mut data = serde_json::Map::new();
    data.insert("polynomial".into(), json!(l.label));
    data.insert("n".into(), json!(p.n()));
    for m in models {
        match m {
            Model::Local => {
                let b = local_bound_with(p, &limits)?;
                bound_line(&mut text, "local", &b);
                data.insert("local".into(), to_value(&b)?);
            }
            Model::Hybrid => match partition {
                Some(spec) => {
                    let pi: Bipartition = spec.parse()?;
                    if pi.n() != p.n() {
                        return Err(Error::InvalidArgument(format!(
                            "partition {pi} is for {} parties, polynomial has {}",
                            pi.n(),
                            p.n()
                        )));
                    }
                    let b = hybrid_bound_with(p, &pi, &limits)?;
                    bound_line(&mut text, &format!("hybrid {pi}"), &b);
                    data.insert("hybrid".into(), json!({ "partitions": [to_value(&b)?] }));
                }
                None => {
                    let r = hybrid_bound_all_with(p, &limits)?;
                    for b in &r.per_partition {
                        let label = match &b.witness {
                            Witness::Hybrid { partition, .. } => format!("hybrid {partition}"),
                            _ => "hybrid".into(),
                        };
                        bound_line(&mut text, &label, b);
                    }
                    let _ = writeln!(
                        text,
                        "{:<20} {:<12} exact {:<10} {}",
                        "hybrid max",
                        r.best.value_f64(),
                        r.best.value.to_string(),
                        if r.is_uniform() {
                            format!("(uniform over {} bipartitions)", r.per_partition.len())
                        } else {
                            "(not uniform)".to_string()
                        }
                    );
                    data.insert(
                        "hybrid".into(),
                        json!({
                            "partitions": to_value(&r.per_partition)?,
                            "max": to_value(&r.best)?,
                            "uniform": r.is_uniform(),
                        }),
                    );
                }
            },
            Model::Algebraic => {
                let b = algebraic_bound(p);
                bound_line(&mut text, "algebraic", &b);
                data.insert("algebraic".into(), to_value(&b)?);
            }
        }
    }
    Ok(Report {
        text,
        data: Value::Object(data),
    })
}

fn frame_lines(out: &mut String, f: &MeasurementFrame) {
    for (j, pair) in f.settings().iter().enumerate() {
        for (v, mark) in pair.iter().zip(["", "'"]) {
            let [x, y, z] = v.to_array();
            let _ = writeln!(out, "  A{}{mark:<1}  ({x:+.9}, {y:+.9}, {z:+.9})", j + 1);
        }
    }
}

fn amplitudes(s: &PureState) -> Vec<[f64; 2]> {
    s.amplitudes().iter().map(|a| [a.re, a.im]).collect()
}

pub fn qmax(
    src: &PolySource,
    state: Option<&str>,
    write_frame: Option<&Path>,
    cfg: &RunConfig,
) -> Result<Report> {
    let l = src.load()?;
    let p = &l.polynomial;
    let opts = cfg.quantum();
    let mut text = format!("quantum maximum of {}\n", l.label);
    let (value, frame, data) = match state {
        Some(spec) => {
            let s = PureState::from_spec(spec)?;
            if s.n() != p.n() {
                return Err(Error::InconsistentInput(format!(
                    "state `{spec}` has {} qubits, polynomial has {} parties",
                    s.n(),
                    p.n()
                )));
            }
            let r = seesaw(p, &s, &opts)?;
            let _ = writeln!(text, "state   {spec}");
            let data = json!({
                "polynomial": l.label,
                "n": p.n(),
                "state": spec,
                "value": r.value,
                "frame": to_value(&r.frame)?,
                "sweeps": r.sweeps,
            });
            (r.value, r.frame, data)
        }
        None => {
            let r = quantum_max(p, &opts)?;
            let data = json!({
                "polynomial": l.label,
                "n": p.n(),
                "value": r.value,
                "frame": to_value(&r.frame)?,
                "state": amplitudes(&r.state),
            });
            let n = p.n() as usize;
            let _ = writeln!(text, "state   (amplitudes above 1e-9)");
            for (i, a) in r.state.amplitudes().iter().enumerate() {
                if a.norm() > 1e-9 {
                    let _ = writeln!(text, "  |{i:0n$b}⟩  {:+.9} {:+.9}i", a.re, a.im);
                }
            }
            (r.value, r.frame, data)
        }
    };
    let _ = writeln!(text, "value   {value:.12}");
    let _ = writeln!(text, "frame");
    frame_lines(&mut text, &frame);
    if let Some(path) = write_frame {
        std::fs::write(path, frame.to_text()).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let _ = writeln!(text, "frame written to {}", path.display());
    }
    Ok(Report { text, data })
}

pub enum ClassifyInput<'a> {
    Value(f64),
    Correlations(&'a Path),
    StateFrame(&'a str, &'a Path),
}

fn verdict_text(v: &Verdict, source: &str) -> String {
    let mut out = format!(
        "{} n={} value {:.12} ({source})\n",
        v.polynomial, v.n, v.value
    );
    for t in &v.thresholds {
        let _ = writeln!(
            out,
            "  threshold {:<14} {} = {:.12}",
            t.label,
            t.bound,
            t.bound.to_f64()
        );
    }
    let _ = writeln!(out, "verdict: {}", v.conclusion);
    let _ = writeln!(out, "margin  {:+.12}", v.margin);
    if v.exceeds_quantum {
        let _ = writeln!(
            out,
            "warning: value exceeds the quantum maximum; check the data"
        );
    }
    out
}

pub fn classify(kind: PolynomialKind, n: u32, input: &ClassifyInput) -> Result<Report> {
    let p = kind.build(n)?;
    let (value, source) = match *input {
        ClassifyInput::Value(v) => (v, "given value".to_string()),
        ClassifyInput::Correlations(path) => {
            let cv = CorrelationVector::parse(&read_file(path)?)?;
            if cv.n() != n {
                return Err(Error::InconsistentInput(format!(
                    "correlation file has {} parties, polynomial has {n}",
                    cv.n()
                )));
            }
            (p.evaluate(&cv)?, format!("correlations {}", path.display()))
        }
        ClassifyInput::StateFrame(spec, path) => {
            let state = PureState::from_spec(spec)?;
            let frame = MeasurementFrame::parse(&read_file(path)?)?;
            if state.n() != n || frame.n() != n {
                return Err(Error::InconsistentInput(format!(
                    "state has {} qubits and frame {} parties, polynomial has {n}",
                    state.n(),
                    frame.n()
                )));
            }
            let op = bell_operator(&p, &frame)?;
            (
                expectation(&op, &state)?,
                format!("state {spec}, frame {}", path.display()),
            )
        }
    };
    let v = verdict_for(kind, n, value)?;
    let text = verdict_text(&v, &source);
    let mut data = to_value(&v)?;
    data["source"] = json!(source);
    Ok(Report { text, data })
}

/// Parses `<row>:<column>` naming a closed form to corrupt, e.g. `S3:2`.
fn inject(expected: &mut Table1Expected, spec: &str) -> Result<()> {
    let bad = || {
        Error::InvalidArgument(format!(
            "bad fault spec `{spec}`; expected M3:<0-4> or S3:<0-4>"
        ))
    };
    let (row, col) = spec.split_once(':').ok_or_else(bad)?;
    let col: usize = col.parse().map_err(|_| bad())?;
    if col >= TABLE1_COLUMNS.len() {
        return Err(bad());
    }
    let cell = match row {
        "M3" => &mut expected.mermin[col],
        "S3" => &mut expected.svetlichny[col],
        _ => return Err(bad()),
    };
    *cell = cell.times(RootTwoPower(1));
    Ok(())
}

pub fn table1(cfg: &RunConfig, fault: Option<&str>) -> Result<Report> {
    let mut expected = Table1Expected::closed_forms()?;
    if let Some(spec) = fault {
        inject(&mut expected, spec)?;
    }
    let t = table1_with(&expected, &cfg.quantum())?;
    let mut text = String::from("Maximal values of M3 and S3\n");
    text.push_str(&t.render());
    Ok(Report {
        text,
        data: to_value(&t)?,
    })
}
