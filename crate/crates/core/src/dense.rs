//! Dense state-vector and density-matrix simulation for small registers.
//!
//! Qubit 0 is the most significant bit of a basis index. Used as a brute-force
//! reference and for the non-Clifford rotation gadget.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::clifford::{CliffordCircuit, Gate};
use crate::error::{check_probability, Error, Result};
use crate::pauli::{Pauli1, PauliOperator};
use crate::stabilizer::{BellBits, StabilizerState};

pub const MAX_PURE_QUBITS: usize = 12;
pub const MAX_MIXED_QUBITS: usize = 8;

const UNITARY_TOL: f64 = 1e-10;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[derive(Clone, Debug)]
pub enum DenseState {
    Pure { n: usize, amps: DVector<C> },
    Mixed { n: usize, rho: DMatrix<C> },
}

/// Unitary to apply to listed qubits.
#[derive(Clone, Debug)]
pub enum GateSpec {
    /// One of `h s sdg x y z cz cnot swap`.
    Named(String),
    /// `exp(-iαX)`
    Rx(f64),
    /// `exp(-iαZ)`
    Rz(f64),
    /// Arbitrary `2^k × 2^k` matrix; qubits[0] is the most significant bit.
    Matrix(DMatrix<C>),
}

impl GateSpec {
    pub fn matrix(&self) -> Result<DMatrix<C>> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        let m = match self {
            GateSpec::Named(name) => match name.as_str() {
                "h" => DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
                "s" => DMatrix::from_row_slice(2, 2, &[o, z, z, c(0.0, 1.0)]),
                "sdg" => DMatrix::from_row_slice(2, 2, &[o, z, z, c(0.0, -1.0)]),
                "x" => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
                "y" => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
                "z" => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
                "cz" => DMatrix::from_diagonal(&DVector::from_vec(vec![o, o, o, -o])),
                "cnot" | "cx" => {
                    let mut m = DMatrix::zeros(4, 4);
                    m[(0, 0)] = o;
                    m[(1, 1)] = o;
                    m[(2, 3)] = o;
                    m[(3, 2)] = o;
                    m
                }
                "swap" => {
                    let mut m = DMatrix::zeros(4, 4);
                    m[(0, 0)] = o;
                    m[(1, 2)] = o;
                    m[(2, 1)] = o;
                    m[(3, 3)] = o;
                    m
                }
                other => return Err(Error::Parse(format!("unknown gate `{other}`"))),
            },
            GateSpec::Rx(a) => {
                let (co, si) = (a.cos(), a.sin());
                DMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -si), c(0.0, -si), c(co, 0.0)])
            }
            GateSpec::Rz(a) => DMatrix::from_row_slice(2, 2, &[C::from_polar(1.0, -a), z, z, C::from_polar(1.0, *a)]),
            GateSpec::Matrix(m) => m.clone(),
        };
        let dim = m.nrows();
        if m.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::Parse(format!("gate matrix is {}×{}", m.nrows(), m.ncols())));
        }
        let dev = (m.adjoint() * &m - DMatrix::<C>::identity(dim, dim))
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary(dev));
        }
        Ok(m)
    }

    pub fn from_gate(g: &Gate) -> (GateSpec, Vec<usize>) {
        let name = match g {
            Gate::H(_) => "h",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "sdg",
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::Cz(..) => "cz",
            Gate::Cnot(..) => "cnot",
        };
        (GateSpec::Named(name.into()), g.qubits())
    }
}

/// Apply a `2^k` matrix to qubits of an `n`-qubit vector stored contiguously.
fn apply_to_slice(v: &mut [C], n: usize, u: &DMatrix<C>, qubits: &[usize]) {
    let k = qubits.len();
    let masks: Vec<usize> = qubits.iter().map(|&q| 1usize << (n - 1 - q)).collect();
    let all: usize = masks.iter().sum();
    let dim = 1usize << k;
    let offsets: Vec<usize> = (0..dim)
        .map(|j| (0..k).filter(|&t| j >> (k - 1 - t) & 1 == 1).map(|t| masks[t]).sum())
        .collect();
    let mut buf = vec![c(0.0, 0.0); dim];
    for base in 0..v.len() {
        if base & all != 0 {
            continue;
        }
        for j in 0..dim {
            buf[j] = v[base + offsets[j]];
        }
        for r in 0..dim {
            let mut acc = c(0.0, 0.0);
            for j in 0..dim {
                acc += u[(r, j)] * buf[j];
            }
            v[base + offsets[r]] = acc;
        }
    }
}

/// Amplitude factor and target index of `P|i⟩`.
fn pauli_action(p: &PauliOperator) -> (usize, usize, C) {
    let n = p.num_qubits();
    let (mut xm, mut zm, mut ys) = (0usize, 0usize, 0u8);
    for q in 0..n {
        let bit = 1usize << (n - 1 - q);
        let (x, z) = p.get(q).bits();
        if x {
            xm |= bit;
        }
        if z {
            zm |= bit;
        }
        if x && z {
            ys += 1;
        }
    }
    let e = (p.phase().exponent() + ys) % 4;
    let ph = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][e as usize];
    (xm, zm, ph)
}

fn apply_pauli_vec(v: &[C], p: &PauliOperator) -> Vec<C> {
    let (xm, zm, ph) = pauli_action(p);
    let mut out = vec![c(0.0, 0.0); v.len()];
    for (i, a) in v.iter().enumerate() {
        let s = if (i & zm).count_ones() % 2 == 1 { -ph } else { ph };
        out[i ^ xm] = s * a;
    }
    out
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self> {
        check_pure(n)?;
        let mut amps = DVector::zeros(1 << n);
        amps[0] = c(1.0, 0.0);
        Ok(DenseState::Pure { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::Parse(format!("{len} amplitudes is not a power of two")));
        }
        let n = len.trailing_zeros() as usize;
        check_pure(n)?;
        let v = DVector::from_vec(amps);
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("norm {norm}")));
        }
        Ok(DenseState::Pure { n, amps: v })
    }

    /// The unique state fixed by all generators.
    pub fn from_stabilizer(s: &StabilizerState) -> Result<Self> {
        let n = s.num_qubits();
        check_pure(n)?;
        let dim = 1usize << n;
        for start in 0..dim {
            let mut v = vec![c(0.0, 0.0); dim];
            v[start] = c(1.0, 0.0);
            for g in s.generators() {
                let gv = apply_pauli_vec(&v, g);
                for (a, b) in v.iter_mut().zip(gv) {
                    *a = (*a + b) * 0.5;
                }
            }
            let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-3 {
                let amps = DVector::from_vec(v) / c(norm, 0.0);
                return Ok(DenseState::Pure { n, amps });
            }
        }
        unreachable!("projector onto a stabilizer state has unit trace")
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            DenseState::Pure { n, .. } | DenseState::Mixed { n, .. } => *n,
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, DenseState::Pure { .. })
    }

    pub fn amplitudes(&self) -> Option<&DVector<C>> {
        match self {
            DenseState::Pure { amps, .. } => Some(amps),
            DenseState::Mixed { .. } => None,
        }
    }

    pub fn density_matrix(&self) -> DMatrix<C> {
        match self {
            DenseState::Pure { amps, .. } => amps * amps.adjoint(),
            DenseState::Mixed { rho, .. } => rho.clone(),
        }
    }

    pub fn to_mixed(&self) -> Result<Self> {
        let n = self.num_qubits();
        if n > MAX_MIXED_QUBITS {
            return Err(Error::TooLarge {
                n,
                limit: MAX_MIXED_QUBITS,
            });
        }
        Ok(DenseState::Mixed {
            n,
            rho: self.density_matrix(),
        })
    }

    fn make_mixed(&mut self) -> Result<()> {
        if self.is_pure() {
            *self = self.to_mixed()?;
        }
        Ok(())
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        let n = self.num_qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::Parse(format!("qubit {q} listed twice")));
            }
        }
        Ok(())
    }

    pub fn apply_unitary(&mut self, spec: &GateSpec, qubits: &[usize]) -> Result<()> {
        let u = spec.matrix()?;
        if u.nrows() != 1 << qubits.len() {
            return Err(Error::SizeMismatch {
                expected: u.nrows().trailing_zeros() as usize,
                got: qubits.len(),
            });
        }
        self.check_qubits(qubits)?;
        self.apply_matrix_unchecked(&u, qubits);
        Ok(())
    }

    fn apply_matrix_unchecked(&mut self, u: &DMatrix<C>, qubits: &[usize]) {
        match self {
            DenseState::Pure { n, amps } => apply_to_slice(amps.as_mut_slice(), *n, u, qubits),
            DenseState::Mixed { n, rho } => {
                let n = *n;
                let dim = 1 << n;
                // ρ' = U ρ U† = (U (U ρ)†)†
                for col in 0..dim {
                    apply_to_slice(rho.column_mut(col).as_mut_slice(), n, u, qubits);
                }
                let mut a = rho.adjoint();
                for col in 0..dim {
                    apply_to_slice(a.column_mut(col).as_mut_slice(), n, u, qubits);
                }
                *rho = a.adjoint();
            }
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        let (spec, qs) = GateSpec::from_gate(g);
        self.apply_unitary(&spec, &qs)
    }

    pub fn apply_circuit(&mut self, circ: &CliffordCircuit) -> Result<()> {
        circ.gates().iter().try_for_each(|g| self.apply_gate(g))
    }

    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        let n = self.num_qubits();
        if p.num_qubits() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: p.num_qubits(),
            });
        }
        match self {
            DenseState::Pure { amps, .. } => {
                *amps = DVector::from_vec(apply_pauli_vec(amps.as_slice(), p));
            }
            DenseState::Mixed { rho, .. } => {
                let mut a = rho.clone();
                let dim = a.nrows();
                for col in 0..dim {
                    let v = apply_pauli_vec(a.column(col).as_slice(), p);
                    a.column_mut(col).copy_from_slice(&v);
                }
                let mut b = a.adjoint();
                for col in 0..dim {
                    let v = apply_pauli_vec(b.column(col).as_slice(), p);
                    b.column_mut(col).copy_from_slice(&v);
                }
                *rho = b.adjoint();
            }
        }
        Ok(())
    }

    /// Local depolarizing channel `ρ ↦ pρ + (1-p)/2 · I_q ⊗ tr_q ρ`.
    pub fn apply_ldn(&mut self, q: usize, p: f64) -> Result<()> {
        check_probability("p", p)?;
        self.check_qubits(&[q])?;
        self.make_mixed()?;
        let DenseState::Mixed { n, rho } = self else {
            unreachable!()
        };
        let bit = 1usize << (*n - 1 - q);
        let dim = rho.nrows();
        let mut out = rho.clone() * c(p, 0.0);
        let w = c((1.0 - p) / 2.0, 0.0);
        for r in 0..dim {
            for col in 0..dim {
                if (r & bit) != (col & bit) {
                    continue;
                }
                let (r0, c0) = (r & !bit, col & !bit);
                let tr = rho[(r0, c0)] + rho[(r0 | bit, c0 | bit)];
                out[(r, col)] += w * tr;
            }
        }
        *rho = out;
        Ok(())
    }

    /// `ρ ↦ Σ_P w_P P ρ P` on qubit `q`, weights for `[I, X, Y, Z]`.
    pub fn apply_pauli_channel(&mut self, q: usize, weights: [f64; 4]) -> Result<()> {
        self.check_qubits(&[q])?;
        self.make_mixed()?;
        let n = self.num_qubits();
        let mut acc = DMatrix::<C>::zeros(1 << n, 1 << n);
        for (w, l) in weights.iter().zip([Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z]) {
            let mut t = self.clone();
            t.apply_pauli(&PauliOperator::single(n, q, l))?;
            acc += t.density_matrix() * c(*w, 0.0);
        }
        *self = DenseState::Mixed { n, rho: acc };
        Ok(())
    }

    pub fn trace(&self) -> f64 {
        match self {
            DenseState::Pure { amps, .. } => amps.norm_squared(),
            DenseState::Mixed { rho, .. } => rho.trace().re,
        }
    }

    /// `⟨t|ρ|t⟩` or `|⟨t|ψ⟩|²` against a pure target.
    pub fn fidelity(&self, target: &DenseState) -> Result<f64> {
        let Some(t) = target.amplitudes() else {
            return Err(Error::InvalidState("fidelity target must be pure".into()));
        };
        if target.num_qubits() != self.num_qubits() {
            return Err(Error::SizeMismatch {
                expected: self.num_qubits(),
                got: target.num_qubits(),
            });
        }
        Ok(match self {
            DenseState::Pure { amps, .. } => t.dotc(amps).norm_sqr(),
            DenseState::Mixed { rho, .. } => t.dotc(&(rho * t)).re,
        })
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DenseState) -> Result<f64> {
        if other.num_qubits() != self.num_qubits() {
            return Err(Error::SizeMismatch {
                expected: self.num_qubits(),
                got: other.num_qubits(),
            });
        }
        let d = self.density_matrix() - other.density_matrix();
        let eig = d.symmetric_eigenvalues();
        Ok(0.5 * eig.iter().map(|e| e.abs()).sum::<f64>())
    }

    /// Eigenvalues of the density matrix (ascending order not guaranteed).
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.density_matrix().symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn tensor(&self, other: &DenseState) -> Result<DenseState> {
        let n = self.num_qubits() + other.num_qubits();
        match (self, other) {
            (DenseState::Pure { amps: a, .. }, DenseState::Pure { amps: b, .. }) => {
                check_pure(n)?;
                Ok(DenseState::Pure {
                    n,
                    amps: a.kronecker(b),
                })
            }
            _ => {
                if n > MAX_MIXED_QUBITS {
                    return Err(Error::TooLarge {
                        n,
                        limit: MAX_MIXED_QUBITS,
                    });
                }
                Ok(DenseState::Mixed {
                    n,
                    rho: self.density_matrix().kronecker(&other.density_matrix()),
                })
            }
        }
    }

    /// Contract `qubits` against `⟨v|` (no renormalization). `v` is a vector on
    /// `qubits` with `qubits[0]` most significant.
    pub fn project_onto(&self, qubits: &[usize], v: &DVector<C>) -> Result<DenseState> {
        self.check_qubits(qubits)?;
        let k = qubits.len();
        if v.len() != 1 << k {
            return Err(Error::SizeMismatch {
                expected: 1 << k,
                got: v.len(),
            });
        }
        let n = self.num_qubits();
        let rest: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
        let m = rest.len();
        // index in the full register of (rest index r, projected index j)
        let full = |r: usize, j: usize| -> usize {
            let mut idx = 0usize;
            for (t, &q) in rest.iter().enumerate() {
                if r >> (m - 1 - t) & 1 == 1 {
                    idx |= 1 << (n - 1 - q);
                }
            }
            for (t, &q) in qubits.iter().enumerate() {
                if j >> (k - 1 - t) & 1 == 1 {
                    idx |= 1 << (n - 1 - q);
                }
            }
            idx
        };
        Ok(match self {
            DenseState::Pure { amps, .. } => {
                let out = DVector::from_fn(1 << m, |r, _| (0..1 << k).map(|j| v[j].conj() * amps[full(r, j)]).sum());
                DenseState::Pure { n: m, amps: out }
            }
            DenseState::Mixed { rho, .. } => {
                let out = DMatrix::from_fn(1 << m, 1 << m, |r, s| {
                    let mut acc = c(0.0, 0.0);
                    for j in 0..1 << k {
                        for l in 0..1 << k {
                            acc += v[j].conj() * rho[(full(r, j), full(s, l))] * v[l];
                        }
                    }
                    acc
                });
                DenseState::Mixed { n: m, rho: out }
            }
        })
    }

    /// Scale to unit norm/trace; returns the prior norm squared or trace.
    pub fn normalize(&mut self) -> Result<f64> {
        let t = self.trace();
        if t < 1e-14 {
            return Err(Error::ImpossibleOutcome);
        }
        match self {
            DenseState::Pure { amps, .. } => *amps /= c(t.sqrt(), 0.0),
            DenseState::Mixed { rho, .. } => *rho /= c(t, 0.0),
        }
        Ok(t)
    }

    /// Project qubits `a`, `b` onto `(1 ⊗ X^sx Z^sz)|φ+⟩` and remove them.
    /// Returns the outcome probability; the state is renormalized.
    pub fn bell_project(&mut self, a: usize, b: usize, bits: BellBits) -> Result<f64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = DVector::from_fn(4, |j, _| {
            let (ia, ib) = (j >> 1, j & 1);
            if ib == ia ^ bits.sx as usize {
                let sign = if bits.sz == 1 && ia == 1 { -1.0 } else { 1.0 };
                c(sign * h, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let mut out = self.project_onto(&[a, b], &v)?;
        let p = out.normalize()?;
        *self = out;
        Ok(p)
    }

    /// Measure qubit `q` in the basis `e^{iα}|0⟩ ± e^{-iα}|1⟩` (normalized),
    /// keeping the branch `minus`; the qubit is removed.
    pub fn measure_angle(&mut self, q: usize, alpha: f64, minus: bool) -> Result<f64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = if minus { -1.0 } else { 1.0 };
        let v = DVector::from_vec(vec![C::from_polar(h, alpha), C::from_polar(h, -alpha) * s]);
        let mut out = self.project_onto(&[q], &v)?;
        let p = out.normalize()?;
        *self = out;
        Ok(p)
    }

    /// Reduced state on `keep` (in that order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DenseState> {
        self.check_qubits(keep)?;
        let n = self.num_qubits();
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let mut mixed = self.to_mixed_unbounded();
        let DenseState::Mixed { rho, .. } = &mut mixed else {
            unreachable!()
        };
        let k = keep.len();
        let t = traced.len();
        let idx = |r: usize, j: usize| -> usize {
            let mut out = 0usize;
            for (i, &q) in keep.iter().enumerate() {
                if r >> (k - 1 - i) & 1 == 1 {
                    out |= 1 << (n - 1 - q);
                }
            }
            for (i, &q) in traced.iter().enumerate() {
                if j >> (t - 1 - i) & 1 == 1 {
                    out |= 1 << (n - 1 - q);
                }
            }
            out
        };
        let red = DMatrix::from_fn(1 << k, 1 << k, |r, s| {
            (0..1 << t).map(|j| rho[(idx(r, j), idx(s, j))]).sum()
        });
        Ok(DenseState::Mixed { n: k, rho: red })
    }

    fn to_mixed_unbounded(&self) -> DenseState {
        DenseState::Mixed {
            n: self.num_qubits(),
            rho: self.density_matrix(),
        }
    }

    /// Reorder qubits: new qubit `i` is old qubit `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<DenseState> {
        let n = self.num_qubits();
        if order.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: order.len(),
            });
        }
        self.check_qubits(order)?;
        let map = |i: usize| -> usize {
            let mut out = 0;
            for (new, &old) in order.iter().enumerate() {
                if i >> (n - 1 - new) & 1 == 1 {
                    out |= 1 << (n - 1 - old);
                }
            }
            out
        };
        Ok(match self {
            DenseState::Pure { amps, .. } => DenseState::Pure {
                n,
                amps: DVector::from_fn(1 << n, |i, _| amps[map(i)]),
            },
            DenseState::Mixed { rho, .. } => DenseState::Mixed {
                n,
                rho: DMatrix::from_fn(1 << n, 1 << n, |i, j| rho[(map(i), map(j))]),
            },
        })
    }

    /// Check norm/trace, Hermiticity and positivity at the given tolerances.
    pub fn validate(&self, trace_tol: f64, psd_tol: f64) -> Result<()> {
        let t = self.trace();
        if (t - 1.0).abs() > trace_tol {
            return Err(Error::InvalidState(format!("trace {t}")));
        }
        if let DenseState::Mixed { rho, .. } = self {
            let herm = (rho - rho.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
            if herm > trace_tol {
                return Err(Error::InvalidState(format!("non-Hermitian by {herm}")));
            }
            let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
            if min < -psd_tol {
                return Err(Error::InvalidState(format!("eigenvalue {min}")));
            }
        }
        Ok(())
    }

    /// Phase-insensitive equality of pure states: fidelity ≥ 1 − tol.
    pub fn approx_eq(&self, other: &DenseState, tol: f64) -> bool {
        match other.amplitudes() {
            Some(_) => self.fidelity(other).map(|f| f >= 1.0 - tol).unwrap_or(false),
            None => self.trace_distance(other).map(|d| d <= tol).unwrap_or(false),
        }
    }
}

fn check_pure(n: usize) -> Result<()> {
    if n > MAX_PURE_QUBITS {
        Err(Error::TooLarge {
            n,
            limit: MAX_PURE_QUBITS,
        })
    } else {
        Ok(())
    }
}

/// Random normalized pure state.
pub fn random_pure<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DenseState> {
    check_pure(n)?;
    let v: Vec<C> = (0..1 << n)
        .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let mut s = DenseState::Pure {
        n,
        amps: DVector::from_vec(v),
    };
    s.normalize()?;
    Ok(s)
}
