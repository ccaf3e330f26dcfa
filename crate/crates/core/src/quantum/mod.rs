//! Quantum evaluation of Bell polynomials on qubits.
//!
//! Each abstract outcome `a_j` (resp. `a_j'`) is replaced by the observable
//! `v·σ` for the party's unprimed (resp. primed) Bloch direction; the Bell
//! operator is the resulting sum of tensor products. Party 1 is the most
//! significant qubit of every basis index.

mod frame;
mod seesaw;
mod state;

use nalgebra::{DMatrix, DVector};

pub use frame::{MeasurementFrame, UnitVector};
pub use seesaw::{
    effective_bloch, quantum_max, quantum_max_biseparable, quantum_max_product, seesaw,
    seesaw_from, setting_split, QuantumMax, QuantumOptions, SeesawResult,
};
pub use state::{ghz, DensityMatrix, PureState, QuantumState, MAX_QUBITS};

use crate::error::{Error, Result};
use crate::polynomial::{full_mask, CorrelationVector, Polynomial, Term};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Imaginary residue above which an expectation value is rejected.
pub const IMAG_ERROR_TOL: f64 = 1e-8;
/// Allowed residual `‖Ov − λv‖` of a returned eigenpair.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;

/// `v·σ = x σx + y σy + z σz`.
pub fn observable(v: UnitVector) -> CMatrix {
    let [x, y, z] = v.to_array();
    let c = |re: f64, im: f64| C64::new(re, im);
    CMatrix::from_row_slice(2, 2, &[c(z, 0.0), c(x, -y), c(x, y), c(-z, 0.0)])
}

/// A Hermitian Bell operator together with the polynomial and frame that
/// produced it.
#[derive(Debug, Clone)]
pub struct BellOperator {
    n: u32,
    matrix: CMatrix,
    polynomial: Polynomial,
    frame: MeasurementFrame,
}

impl BellOperator {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.polynomial
    }

    pub fn frame(&self) -> &MeasurementFrame {
        &self.frame
    }

    /// Largest entry of `O - O†`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    /// Spectral norm (largest absolute eigenvalue).
    pub fn operator_norm(&self) -> f64 {
        hermitian_part(&self.matrix)
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).unscale(2.0)
}

/// `Σ_t coeff(t) ⊗_j observable(v_j^{t_j})`.
pub fn bell_operator(p: &Polynomial, f: &MeasurementFrame) -> Result<BellOperator> {
    let n = p.n();
    if f.n() != n {
        return Err(Error::invalid(format!(
            "frame has {} parties, polynomial has {n}",
            f.n()
        )));
    }
    if n > MAX_QUBITS {
        return Err(Error::invalid(format!("{n} qubits exceed {MAX_QUBITS}")));
    }
    let mut coeffs = vec![0.0f64; 1 << n];
    for (t, c) in p.terms() {
        coeffs[t.prime_mask() as usize] = c.to_f64();
    }
    let observables: Vec<[CMatrix; 2]> = (0..n)
        .map(|j| {
            [
                observable(f.setting(j, false)),
                observable(f.setting(j, true)),
            ]
        })
        .collect();
    let dim = 1usize << n;
    let matrix = build(&coeffs, &observables).unwrap_or_else(|| CMatrix::zeros(dim, dim));
    Ok(BellOperator {
        n,
        matrix,
        polynomial: p.clone(),
        frame: f.clone(),
    })
}

/// Expands the coefficient table over the parties in `observables`. The last
/// party splits the table in half (its unprimed half first); the earlier
/// parties form the left tensor factor. `None` when every coefficient is 0.
fn build(coeffs: &[f64], observables: &[[CMatrix; 2]]) -> Option<CMatrix> {
    let Some((last, rest)) = observables.split_last() else {
        let c = coeffs[0];
        return (c != 0.0).then(|| CMatrix::from_element(1, 1, C64::new(c, 0.0)));
    };
    let (lo, hi) = coeffs.split_at(coeffs.len() / 2);
    let parts = [build(lo, rest), build(hi, rest)];
    let mut out: Option<CMatrix> = None;
    for (part, obs) in parts.into_iter().zip(last) {
        if let Some(m) = part {
            let k = m.kronecker(obs);
            out = Some(match out {
                Some(acc) => acc + k,
                None => k,
            });
        }
    }
    out
}

fn real_part(v: C64) -> Result<f64> {
    if v.im.abs() > IMAG_ERROR_TOL {
        return Err(Error::NumericalIntegrity(format!(
            "expectation value has imaginary part {:e}",
            v.im
        )));
    }
    Ok(v.re)
}

/// `⟨ψ|O|ψ⟩` or `Tr(ρO)`.
pub fn expectation<S: QuantumState + ?Sized>(op: &BellOperator, state: &S) -> Result<f64> {
    if state.n() != op.n {
        return Err(Error::invalid(format!(
            "state has {} qubits, operator has {}",
            state.n(),
            op.n
        )));
    }
    real_part(state.trace_with(&op.matrix))
}

/// Largest eigenvalue of a Bell operator and a normalized eigenvector.
pub fn max_eigenvalue(op: &BellOperator) -> Result<(f64, PureState)> {
    top_eigenpair(&op.matrix)
}

pub(crate) fn top_eigenpair(m: &CMatrix) -> Result<(f64, PureState)> {
    let h = hermitian_part(m);
    let eig = h.clone().symmetric_eigen();
    let (idx, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::NumericalIntegrity("empty operator".into()))?;
    if !value.is_finite() {
        return Err(Error::NumericalIntegrity(format!(
            "eigensolver returned non-finite eigenvalue {value}"
        )));
    }
    let v: CVector = eig.eigenvectors.column(idx).into_owned();
    let residual = (&h * &v - v.scale(value)).norm();
    let scale = value.abs().max(1.0);
    if residual > EIGEN_RESIDUAL_TOL * scale {
        return Err(Error::NumericalIntegrity(format!(
            "eigenpair residual {residual:e} for eigenvalue {value} (dimension {})",
            h.nrows()
        )));
    }
    Ok((value, PureState::normalized(v)?))
}

/// Expectation of every correlation coefficient `E(t)` on `state`.
pub fn correlations<S: QuantumState + ?Sized>(
    state: &S,
    f: &MeasurementFrame,
) -> Result<CorrelationVector> {
    let n = state.n();
    if f.n() != n {
        return Err(Error::invalid("frame and state sizes differ"));
    }
    let mut out = CorrelationVector::new(n)?;
    for mask in 0..=full_mask(n) {
        let t = Term::new(n, mask)?;
        let single = Polynomial::from_terms(n, [(mask, crate::Dyadic::ONE)])?;
        let v = expectation(&bell_operator(&single, f)?, state)?;
        out.insert(t, v.clamp(-1.0, 1.0))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::mk;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn chsh_frame() -> MeasurementFrame {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        MeasurementFrame::new(vec![
            [UnitVector::Z, UnitVector::X],
            [
                UnitVector::new(s, 0.0, s).unwrap(),
                UnitVector::new(-s, 0.0, s).unwrap(),
            ],
        ])
        .unwrap()
    }

    #[test]
    fn pauli_observables() {
        let z = observable(UnitVector::Z);
        assert_eq!(z[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(z[(1, 1)], C64::new(-1.0, 0.0));
        assert_eq!(z[(0, 1)], C64::new(0.0, 0.0));
        let x = observable(UnitVector::X);
        assert_eq!(x[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(x[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(x[(0, 0)], C64::new(0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let o = observable(UnitVector::random(&mut rng));
            let sq = &o * &o - CMatrix::identity(2, 2);
            assert!(sq.camax() < 1e-12);
        }
    }

    #[test]
    fn single_party_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = MeasurementFrame::random(1, &mut rng).unwrap();
        let op = bell_operator(&mk(1).unwrap(), &f).unwrap();
        assert!((op.matrix() - observable(f.setting(0, false))).camax() < 1e-15);
        let empty = Polynomial::empty(2).unwrap();
        let f2 = MeasurementFrame::random(2, &mut rng).unwrap();
        assert_eq!(bell_operator(&empty, &f2).unwrap().matrix().camax(), 0.0);
        assert!(bell_operator(&mk(2).unwrap(), &f).is_err());
    }

    #[test]
    fn operator_matches_explicit_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = crate::polynomial::svetlichny(3).unwrap();
        let f = MeasurementFrame::random(3, &mut rng).unwrap();
        let op = bell_operator(&p, &f).unwrap();
        let mut explicit = CMatrix::zeros(8, 8);
        for (t, c) in p.terms() {
            let mut m = CMatrix::identity(1, 1);
            for j in 0..3 {
                m = m.kronecker(&observable(f.setting(j, t.is_primed(j))));
            }
            explicit += m.scale(c.to_f64());
        }
        assert!((op.matrix() - explicit).camax() < 1e-14);
    }

    #[test]
    fn chsh_saturation() {
        let op = bell_operator(&mk(2).unwrap(), &chsh_frame()).unwrap();
        let (top, _) = max_eigenvalue(&op).unwrap();
        assert!((top - SQRT2).abs() < 1e-12);
        let v = expectation(&op, &ghz(2).unwrap()).unwrap();
        assert!((v - SQRT2).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 1..=4 {
            let f = MeasurementFrame::random(n, &mut rng).unwrap();
            let op = bell_operator(&mk(n).unwrap(), &f).unwrap();
            let rho = DensityMatrix::maximally_mixed(n).unwrap();
            assert!(expectation(&op, &rho).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn aligned_product_state_gives_one() {
        // both settings of each party along z, state |00⟩
        let f = MeasurementFrame::uniform(2, UnitVector::Z, UnitVector::Z).unwrap();
        let op = bell_operator(&mk(2).unwrap(), &f).unwrap();
        let v = expectation(&op, &PureState::basis(2, 0).unwrap()).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_operator_eigenvalue() {
        let f = MeasurementFrame::uniform(2, UnitVector::Z, UnitVector::X).unwrap();
        let op = bell_operator(&Polynomial::empty(2).unwrap(), &f).unwrap();
        assert_eq!(max_eigenvalue(&op).unwrap().0, 0.0);
    }

    #[test]
    fn imaginary_residue_rejected() {
        let f = MeasurementFrame::uniform(1, UnitVector::Z, UnitVector::X).unwrap();
        let mut op = bell_operator(&mk(1).unwrap(), &f).unwrap();
        op.matrix[(0, 0)] = C64::new(1.0, 1e-6);
        assert!(matches!(
            expectation(&op, &PureState::basis(1, 0).unwrap()),
            Err(Error::NumericalIntegrity(_))
        ));
    }

    #[test]
    fn correlation_vector_of_ghz() {
        let f = MeasurementFrame::uniform(2, UnitVector::Z, UnitVector::X).unwrap();
        let c = correlations(&ghz(2).unwrap(), &f).unwrap();
        let get = |s: &str| c.get(Term::from_settings_string(s).unwrap()).unwrap();
        assert!((get("00") - 1.0).abs() < 1e-12);
        assert!((get("11") - 1.0).abs() < 1e-12);
        assert!(get("01").abs() < 1e-12);
        let p = mk(2).unwrap();
        let via_c = p.evaluate(&c).unwrap();
        let via_op = expectation(&bell_operator(&p, &f).unwrap(), &ghz(2).unwrap()).unwrap();
        assert!((via_c - via_op).abs() < 1e-12);
    }
}
