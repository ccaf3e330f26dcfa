use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// A Bloch direction; the observable it names is `v·σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVector {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVector {
    pub const X: UnitVector = UnitVector {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const Y: UnitVector = UnitVector {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const Z: UnitVector = UnitVector {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n2 = x * x + y * y + z * z;
        if !n2.is_finite() || (n2 - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!(
                "({x}, {y}, {z}) is not a unit vector (norm² = {n2})"
            )));
        }
        Ok(UnitVector { x, y, z })
    }

    /// Normalizes `v`; `None` for the zero vector.
    pub fn normalize(v: [f64; 3]) -> Option<Self> {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        (norm.is_finite() && norm > 0.0).then(|| UnitVector {
            x: v[0] / norm,
            y: v[1] / norm,
            z: v[2] / norm,
        })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            if let Some(u) = Self::normalize(v) {
                return u;
            }
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, v: [f64; 3]) -> f64 {
        self.x * v[0] + self.y * v[1] + self.z * v[2]
    }
}

impl TryFrom<[f64; 3]> for UnitVector {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        UnitVector::new(v[0], v[1], v[2])
    }
}

impl From<UnitVector> for [f64; 3] {
    fn from(u: UnitVector) -> Self {
        u.to_array()
    }
}

/// Measurement directions for every party: `[unprimed, primed]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementFrame {
    n: u32,
    settings: Vec<[UnitVector; 2]>,
}

impl MeasurementFrame {
    pub fn new(settings: Vec<[UnitVector; 2]>) -> Result<Self> {
        if settings.is_empty() || settings.len() > 30 {
            return Err(Error::invalid("measurement frame needs 1..=30 parties"));
        }
        Ok(MeasurementFrame {
            n: settings.len() as u32,
            settings,
        })
    }

    /// Every party measures `unprimed` and `primed`.
    pub fn uniform(n: u32, unprimed: UnitVector, primed: UnitVector) -> Result<Self> {
        Self::new(vec![[unprimed, primed]; n as usize])
    }

    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|_| [UnitVector::random(rng), UnitVector::random(rng)])
                .collect(),
        )
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn setting(&self, party: u32, primed: bool) -> UnitVector {
        self.settings[party as usize][primed as usize]
    }

    pub fn settings(&self) -> &[[UnitVector; 2]] {
        &self.settings
    }

    pub fn set(&mut self, party: u32, primed: bool, v: UnitVector) {
        self.settings[party as usize][primed as usize] = v;
    }

    pub fn with_setting(&self, party: u32, primed: bool, v: UnitVector) -> Self {
        let mut f = self.clone();
        f.set(party, primed, v);
        f
    }

    /// Text form: header `n=<count>`, then per party the unprimed and the
    /// primed direction, one `x y z` line each.
    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for (j, pair) in self.settings.iter().enumerate() {
            for (v, mark) in pair.iter().zip(["", "'"]) {
                let [x, y, z] = v.to_array();
                let _ = writeln!(out, "{x:?} {y:?} {z:?} # A{}{mark}", j + 1);
            }
        }
        out
    }

    /// Parses the text form, or the structured (JSON) form when the content
    /// starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let f: MeasurementFrame =
                serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
            if f.settings.len() != f.n as usize {
                return Err(Error::parse(1, "frame party count does not match settings"));
            }
            return Ok(f);
        }
        let mut n: Option<u32> = None;
        let mut vectors = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if n.is_none() {
                n = Some(
                    line.strip_prefix("n=")
                        .and_then(|v| v.trim().parse().ok())
                        .filter(|&v| (1..=30).contains(&v))
                        .ok_or_else(|| Error::parse(line_no, "expected header `n=<count>`"))?,
                );
                continue;
            }
            let comps: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(line_no, "expected three reals"))?;
            let [x, y, z] = comps[..] else {
                return Err(Error::parse(line_no, "expected three reals"));
            };
            vectors
                .push(UnitVector::new(x, y, z).map_err(|e| Error::parse(line_no, e.to_string()))?);
        }
        let n = n.ok_or_else(|| Error::parse(1, "missing header `n=<count>`"))?;
        if vectors.len() != 2 * n as usize {
            return Err(Error::parse(
                text.lines().count(),
                format!("expected {} directions, found {}", 2 * n, vectors.len()),
            ));
        }
        Self::new(vectors.chunks(2).map(|c| [c[0], c[1]]).collect())
    }
}
