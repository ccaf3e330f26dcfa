use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, CVector, C64};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;
const MIXED_TOL: f64 = 1e-10;

/// Largest qubit count a state may have.
pub const MAX_QUBITS: u32 = 16;

fn check_qubits(n: u32) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "qubit count {n} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Anything `Tr(ρ O)` can be taken against.
pub trait QuantumState {
    fn n(&self) -> u32;
    /// `Tr(ρ O)` before the imaginary part is checked.
    fn trace_with(&self, op: &CMatrix) -> C64;
}

/// A normalized state vector on `n` qubits. Basis index bit `n-1-j` is the
/// qubit of party `j`, so party 1 is the most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: u32,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::invalid(format!(
                "{len} amplitudes is not 2^n for n ≥ 1"
            )));
        }
        let n = len.trailing_zeros();
        check_qubits(n)?;
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!(
                "state norm² is {norm2}, expected 1"
            )));
        }
        Ok(PureState { n, amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid("cannot normalize a zero state"));
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn basis(n: u32, index: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self::new(v)
    }

    /// Haar-distributed random state.
    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        check_qubits(n)?;
        let v = CVector::from_fn(1 << n, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self::normalized(v)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `|ψ⟩ ⊗ |φ⟩`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        check_qubits(self.n + other.n)?;
        let v = self.amplitudes.kronecker(&other.amplitudes);
        Self::normalized(v)
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix {
            n: self.n,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    /// Parses `re im` amplitude pairs, one per line in basis order.
    pub fn parse_amplitudes(text: &str) -> Result<Self> {
        let mut amps = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(idx + 1, "expected `re im`"))?;
            let [re, im] = vals[..] else {
                return Err(Error::parse(idx + 1, "expected `re im`"));
            };
            amps.push(C64::new(re, im));
        }
        Self::new(CVector::from_vec(amps))
            .map_err(|e| Error::parse(text.lines().count().max(1), e.to_string()))
    }

    /// Resolves a state specification: `ghz:<n>`, `basis:<n>:<index>` or
    /// `file:<path>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let bad = || {
            Error::invalid(format!(
                "unknown state `{spec}`; expected ghz:<n>, basis:<n>:<index> or file:<path>"
            ))
        };
        let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
        match kind {
            "ghz" => ghz(rest.parse().map_err(|_| bad())?),
            "basis" => {
                let (n, index) = rest.split_once(':').ok_or_else(bad)?;
                Self::basis(
                    n.parse().map_err(|_| bad())?,
                    index.parse().map_err(|_| bad())?,
                )
            }
            "file" => {
                let text = std::fs::read_to_string(Path::new(rest)).map_err(|e| Error::Io {
                    path: rest.to_string(),
                    message: e.to_string(),
                })?;
                Self::parse_amplitudes(&text)
            }
            _ => Err(bad()),
        }
    }
}

impl QuantumState for PureState {
    fn n(&self) -> u32 {
        self.n
    }

    fn trace_with(&self, op: &CMatrix) -> C64 {
        self.amplitudes.dotc(&(op * &self.amplitudes))
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz(n: u32) -> Result<PureState> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut v = CVector::zeros(dim);
    let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[0] += a;
    v[dim - 1] += a;
    PureState::normalized(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: u32,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (within 1e-10).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::invalid("density matrix must be 2^n × 2^n"));
        }
        let n = dim.trailing_zeros();
        check_qubits(n)?;
        let asym = (&matrix - matrix.adjoint()).camax();
        if asym > MIXED_TOL {
            return Err(Error::invalid(format!(
                "density matrix is not Hermitian (deviation {asym:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > MIXED_TOL || tr.im.abs() > MIXED_TOL {
            return Err(Error::invalid(format!("density matrix trace is {tr}")));
        }
        let herm = (&matrix + matrix.adjoint()).unscale(2.0);
        let min = herm
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -MIXED_TOL {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(DensityMatrix { n, matrix })
    }

    /// `𝟙 / 2^n`.
    pub fn maximally_mixed(n: u32) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        Ok(DensityMatrix {
            n,
            matrix: DMatrix::identity(dim, dim).unscale(dim as f64),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

impl QuantumState for DensityMatrix {
    fn n(&self) -> u32 {
        self.n
    }

    fn trace_with(&self, op: &CMatrix) -> C64 {
        // Tr(ρO) = Σ_ij ρ_ij O_ji
        self.matrix
            .iter()
            .zip(op.transpose().iter())
            .map(|(a, b)| a * b)
            .sum()
    }
}
