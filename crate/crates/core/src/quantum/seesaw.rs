//! See-saw optimization of measurement directions and states.
//!
//! The expectation value is linear in each Bloch vector separately, so for a
//! fixed state and all other settings the best direction for one setting is
//! its normalized effective Bloch vector. Sweeping over all settings gives a
//! monotone coordinate ascent. `quantum_max` alternates such sweeps with a
//! state step that moves to the top eigenvector of the current operator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::frame::{MeasurementFrame, UnitVector};
use super::state::{PureState, QuantumState};
use super::{bell_operator, expectation, top_eigenpair, CMatrix, CVector, C64};
use crate::error::{Error, Result};
use crate::models::{bipartitions, pdep, pext, Bipartition};
use crate::polynomial::Polynomial;

/// Settings for see-saw runs. There is no default seed: every run names one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumOptions {
    pub seed: u64,
    pub restarts: usize,
    /// Stop once a full sweep improves the value by less than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Largest qubit count for spectral (eigenvector) state steps.
    pub max_qubits: u32,
}

impl QuantumOptions {
    pub fn new(seed: u64) -> Self {
        QuantumOptions {
            seed,
            restarts: 16,
            tolerance: 1e-10,
            max_sweeps: 1000,
            max_qubits: 10,
        }
    }

    pub fn with_restarts(self, restarts: usize) -> Self {
        QuantumOptions { restarts, ..self }
    }

    fn rng(&self, restart: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(restart as u64);
        rng
    }

    fn check(&self, n: u32) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::invalid("at least one restart is required"));
        }
        if n > self.max_qubits {
            return Err(Error::ResourceLimit {
                what: format!("dense {n}-qubit Bell operator"),
                cap: "spectral_max_qubits",
                required: n as usize,
                limit: self.max_qubits as usize,
            });
        }
        Ok(())
    }
}

/// Splits `p` into the terms that use `party`'s given setting and the rest.
pub fn setting_split(p: &Polynomial, party: u32, primed: bool) -> (Polynomial, Polynomial) {
    (
        p.filter(|t| t.is_primed(party) == primed),
        p.filter(|t| t.is_primed(party) != primed),
    )
}

fn check_sizes<S: QuantumState + ?Sized>(
    p: &Polynomial,
    f: &MeasurementFrame,
    state: &S,
    party: u32,
) -> Result<()> {
    if f.n() != p.n() || state.n() != p.n() {
        return Err(Error::invalid(format!(
            "sizes differ: polynomial {}, frame {}, state {}",
            p.n(),
            f.n(),
            state.n()
        )));
    }
    if party >= p.n() {
        return Err(Error::invalid(format!("party {} out of range", party + 1)));
    }
    Ok(())
}

fn bloch_of(
    using: &Polynomial,
    f: &MeasurementFrame,
    state: &(impl QuantumState + ?Sized),
    party: u32,
    primed: bool,
) -> Result<[f64; 3]> {
    let mut g = [0.0; 3];
    for (slot, axis) in g
        .iter_mut()
        .zip([UnitVector::X, UnitVector::Y, UnitVector::Z])
    {
        let op = bell_operator(using, &f.with_setting(party, primed, axis))?;
        *slot = expectation(&op, state)?;
    }
    Ok(g)
}

/// The vector `g` with `expectation = g · v + (terms not using v)`, where `v`
/// is the direction of `party`'s primed or unprimed setting.
pub fn effective_bloch<S: QuantumState + ?Sized>(
    p: &Polynomial,
    f: &MeasurementFrame,
    state: &S,
    party: u32,
    primed: bool,
) -> Result<[f64; 3]> {
    check_sizes(p, f, state, party)?;
    let (using, _) = setting_split(p, party, primed);
    bloch_of(&using, f, state, party, primed)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeesawResult {
    pub frame: MeasurementFrame,
    pub value: f64,
    pub sweeps: usize,
    /// Objective after the initial frame and after every coordinate update.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

/// Coordinate ascent over the settings from a given starting frame. A setting
/// whose effective Bloch vector vanishes is left unchanged.
pub fn seesaw_from<S: QuantumState + ?Sized>(
    p: &Polynomial,
    state: &S,
    initial: &MeasurementFrame,
    opts: &QuantumOptions,
) -> Result<SeesawResult> {
    check_sizes(p, initial, state, 0)?;
    let n = p.n();
    let splits: Vec<[(Polynomial, Polynomial); 2]> = (0..n)
        .map(|j| [setting_split(p, j, false), setting_split(p, j, true)])
        .collect();
    let mut frame = initial.clone();
    let mut value = expectation(&bell_operator(p, &frame)?, state)?;
    let mut trace = vec![value];
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let start = value;
        for j in 0..n {
            for primed in [false, true] {
                let (using, rest) = &splits[j as usize][primed as usize];
                if using.is_empty() {
                    continue;
                }
                let g = bloch_of(using, &frame, state, j, primed)?;
                if let Some(v) = UnitVector::normalize(g) {
                    let rest = expectation(&bell_operator(rest, &frame)?, state)?;
                    frame.set(j, primed, v);
                    value = v.dot(g) + rest;
                }
                trace.push(value);
            }
        }
        if value - start < opts.tolerance {
            break;
        }
    }
    let value = expectation(&bell_operator(p, &frame)?, state)?;
    Ok(SeesawResult {
        frame,
        value,
        sweeps,
        trace,
    })
}

/// Best see-saw value over `opts.restarts` random starting frames.
pub fn seesaw<S: QuantumState + ?Sized>(
    p: &Polynomial,
    state: &S,
    opts: &QuantumOptions,
) -> Result<SeesawResult> {
    opts.check(p.n())?;
    let mut best: Option<SeesawResult> = None;
    for r in 0..opts.restarts {
        let f = MeasurementFrame::random(p.n(), &mut opts.rng(r))?;
        let res = seesaw_from(p, state, &f, opts)?;
        if best.as_ref().is_none_or(|b| res.value > b.value) {
            best = Some(res);
        }
    }
    Ok(best.expect("restarts ≥ 1"))
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantumMax {
    pub value: f64,
    pub frame: MeasurementFrame,
    #[serde(skip)]
    pub state: PureState,
    /// Set when the state was restricted to a product across this split.
    pub partition: Option<Bipartition>,
}

fn single_sweep(opts: &QuantumOptions) -> QuantumOptions {
    QuantumOptions {
        max_sweeps: 1,
        ..*opts
    }
}

/// Maximal quantum value: alternates a settings sweep with a state step to
/// the top eigenvector of the current Bell operator, until the value gains
/// less than the tolerance. The returned value is the top eigenvalue of the
/// final operator, attained by the returned state.
pub fn quantum_max(p: &Polynomial, opts: &QuantumOptions) -> Result<QuantumMax> {
    opts.check(p.n())?;
    let sweep = single_sweep(opts);
    let mut best: Option<QuantumMax> = None;
    for r in 0..opts.restarts {
        let mut frame = MeasurementFrame::random(p.n(), &mut opts.rng(r))?;
        let mut value = f64::NEG_INFINITY;
        for _ in 0..opts.max_sweeps {
            let (_, state) = top_eigenpair(bell_operator(p, &frame)?.matrix())?;
            let res = seesaw_from(p, &state, &frame, &sweep)?;
            frame = res.frame;
            let gain = res.value - value;
            value = res.value;
            if gain < opts.tolerance {
                break;
            }
        }
        let (value, state) = top_eigenpair(bell_operator(p, &frame)?.matrix())?;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(QuantumMax {
                value,
                frame,
                state,
                partition: None,
            });
        }
    }
    Ok(best.expect("restarts ≥ 1"))
}

/// Basis-index bits holding the qubits of the parties in `party_mask`.
fn index_mask(n: u32, party_mask: u64) -> u64 {
    (0..n)
        .filter(|j| party_mask >> j & 1 == 1)
        .fold(0, |acc, j| acc | 1 << (n - 1 - j))
}

/// `⟨φ|_B O |φ⟩_B`, an operator on the qubits in `keep`.
fn reduce(op: &CMatrix, keep: u64, other: u64, phi: &CVector) -> CMatrix {
    let dk = 1usize << keep.count_ones();
    let dother = 1usize << other.count_ones();
    let idx = |a: usize, b: usize| (pdep(a as u64, keep) | pdep(b as u64, other)) as usize;
    CMatrix::from_fn(dk, dk, |a, a2| {
        let mut acc = C64::new(0.0, 0.0);
        for b in 0..dother {
            let cb = phi[b].conj();
            if cb == C64::new(0.0, 0.0) {
                continue;
            }
            for b2 in 0..dother {
                acc += cb * op[(idx(a, b), idx(a2, b2))] * phi[b2];
            }
        }
        acc
    })
}

fn product_state(n: u32, ia: u64, psi_a: &CVector, ib: u64, psi_b: &CVector) -> Result<PureState> {
    let v = CVector::from_fn(1 << n, |i, _| {
        psi_a[pext(i as u64, ia) as usize] * psi_b[pext(i as u64, ib) as usize]
    });
    PureState::normalized(v)
}

/// Quantum maximum over states that are products across `pi`. The state
/// step alternates between the top eigenvectors of the two reduced operators.
pub fn quantum_max_product(
    p: &Polynomial,
    pi: &Bipartition,
    opts: &QuantumOptions,
) -> Result<QuantumMax> {
    opts.check(p.n())?;
    let n = p.n();
    if pi.n() != n {
        return Err(Error::invalid(format!(
            "bipartition {pi} is not for {n} parties"
        )));
    }
    let (ia, ib) = (index_mask(n, pi.block_a()), index_mask(n, pi.block_b()));
    let sweep = single_sweep(opts);
    let mut best: Option<QuantumMax> = None;
    for r in 0..opts.restarts {
        let mut rng = opts.rng(r);
        let mut frame = MeasurementFrame::random(n, &mut rng)?;
        let mut psi_b = PureState::random(pi.size_b(), &mut rng)?
            .amplitudes()
            .clone();
        let mut value = f64::NEG_INFINITY;
        let mut state = None;
        for _ in 0..opts.max_sweeps {
            let op = bell_operator(p, &frame)?;
            let (_, a) = top_eigenpair(&reduce(op.matrix(), ia, ib, &psi_b))?;
            let psi_a = a.amplitudes().clone();
            let (_, b) = top_eigenpair(&reduce(op.matrix(), ib, ia, &psi_a))?;
            psi_b = b.amplitudes().clone();
            let full = product_state(n, ia, &psi_a, ib, &psi_b)?;
            let res = seesaw_from(p, &full, &frame, &sweep)?;
            frame = res.frame;
            state = Some(full);
            let gain = res.value - value;
            value = res.value;
            if gain < opts.tolerance {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(QuantumMax {
                value,
                frame,
                state: state.expect("at least one round"),
                partition: Some(*pi),
            });
        }
    }
    Ok(best.expect("restarts ≥ 1"))
}

/// Best [`quantum_max_product`] over all bipartitions.
pub fn quantum_max_biseparable(p: &Polynomial, opts: &QuantumOptions) -> Result<QuantumMax> {
    let mut best: Option<QuantumMax> = None;
    for pi in bipartitions(p.n())? {
        let res = quantum_max_product(p, &pi, opts)?;
        if best.as_ref().is_none_or(|b| res.value > b.value) {
            best = Some(res);
        }
    }
    Ok(best.expect("n ≥ 2 has a bipartition"))
}
