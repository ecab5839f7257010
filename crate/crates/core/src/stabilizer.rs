//! Stabilizer states in binary-symplectic form.
//!
//! A state on `n` qubits is held as `n` independent, commuting, Hermitian
//! Pauli generators. Measurement follows the usual update: an anticommuting
//! generator is replaced by the measured observable, all other anticommuting
//! generators are multiplied by it; commuting observables are resolved by
//! expressing them in the generator basis.

use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clifford::{CliffordCircuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Pauli1, PauliOperator, Phase};

/// Where a measurement outcome comes from.
pub enum OutcomeSource<'a> {
    Random(&'a mut dyn RngCore),
    /// Forced outcome bit: `false` for `+1`, `true` for `-1`.
    Forced(bool),
    /// Use this bit when the outcome is random, the actual value when deterministic.
    Prefer(bool),
}

/// Outcome bits of a Bell measurement; `0` encodes `+1`.
///
/// With the projection onto `(1 ⊗ X^sx Z^sz)|φ+⟩`, `sz` is the `X⊗X` outcome
/// bit and `sx` the `Z⊗Z` outcome bit.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellBits {
    pub sx: u8,
    pub sz: u8,
}

impl BellBits {
    pub const ZERO: BellBits = BellBits { sx: 0, sz: 0 };

    pub fn new(sx: bool, sz: bool) -> Self {
        BellBits {
            sx: sx as u8,
            sz: sz as u8,
        }
    }

    pub fn all() -> [BellBits; 4] {
        [
            BellBits::new(false, false),
            BellBits::new(false, true),
            BellBits::new(true, false),
            BellBits::new(true, true),
        ]
    }

    /// The byproduct `X^sx Z^sz` as a single-qubit letter (phase dropped).
    pub fn byproduct(&self) -> Pauli1 {
        Pauli1::from_bits(self.sx == 1, self.sz == 1)
    }
}

pub enum BellSource<'a> {
    Random(&'a mut dyn RngCore),
    Forced(BellBits),
    Prefer(BellBits),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct MeasureOutcome {
    /// `true` for the `-1` eigenvalue.
    pub bit: bool,
    pub deterministic: bool,
}

impl MeasureOutcome {
    pub fn value(&self) -> i8 {
        if self.bit {
            -1
        } else {
            1
        }
    }
}

/// Reduced row echelon form over selected symplectic columns.
///
/// Row operations multiply Paulis, so phases stay exact.
#[derive(Clone, Debug)]
pub(crate) struct Echelon {
    pub rows: Vec<PauliOperator>,
    /// `(column, row)` for every pivot, in elimination order.
    pub pivots: Vec<(usize, usize)>,
}

impl Echelon {
    pub fn new(mut rows: Vec<PauliOperator>, columns: &[usize]) -> Echelon {
        let mut pivots = Vec::new();
        let mut used = vec![false; rows.len()];
        for &c in columns {
            let Some(r) = (0..rows.len()).find(|&r| !used[r] && rows[r].column(c)) else {
                continue;
            };
            used[r] = true;
            let pivot = rows[r].clone();
            for (j, row) in rows.iter_mut().enumerate() {
                if j != r && row.column(c) {
                    row.mul_assign_right(&pivot);
                }
            }
            pivots.push((c, r));
        }
        Echelon { rows, pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_pivot_row(&self, r: usize) -> bool {
        self.pivots.iter().any(|&(_, pr)| pr == r)
    }

    /// Multiply `t` by pivot rows until it vanishes on every pivot column.
    /// Returns the reduced operator and the rows used.
    pub fn reduce(&self, t: &PauliOperator) -> (PauliOperator, Vec<usize>) {
        let mut t = t.clone();
        let mut used = Vec::new();
        for &(c, r) in &self.pivots {
            if t.column(c) {
                t.mul_assign_right(&self.rows[r]);
                used.push(r);
            }
        }
        (t, used)
    }
}

pub(crate) fn all_columns(n: usize) -> Vec<usize> {
    (0..2 * n).collect()
}

pub(crate) fn qubit_columns(n: usize, qubits: &[usize]) -> Vec<usize> {
    qubits.iter().flat_map(|&q| [q, n + q]).collect()
}

/// Pure stabilizer state.
#[derive(Clone, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    gens: Vec<PauliOperator>,
}

impl StabilizerState {
    /// `|0...0⟩`.
    pub fn zero(n: usize) -> Self {
        StabilizerState {
            n,
            gens: (0..n).map(|q| PauliOperator::single(n, q, Pauli1::Z)).collect(),
        }
    }

    /// `|+...+⟩`.
    pub fn plus(n: usize) -> Self {
        StabilizerState {
            n,
            gens: (0..n).map(|q| PauliOperator::single(n, q, Pauli1::X)).collect(),
        }
    }

    /// Validating constructor.
    pub fn from_generators(gens: Vec<PauliOperator>) -> Result<Self> {
        let n = gens.len();
        for g in &gens {
            if g.num_qubits() != n {
                return Err(Error::InvalidState(format!(
                    "{} generators for a {}-qubit operator",
                    n,
                    g.num_qubits()
                )));
            }
            if !g.is_hermitian() {
                return Err(Error::InvalidState(format!("generator {g} has phase ±i")));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if !gens[i].commutes_with(&gens[j]) {
                    return Err(Error::InvalidState(format!(
                        "generators {} and {} anticommute",
                        gens[i], gens[j]
                    )));
                }
            }
        }
        let ech = Echelon::new(gens.clone(), &all_columns(n));
        if ech.rank() != n {
            return Err(Error::InvalidState(format!(
                "generators are dependent (rank {} < {n})",
                ech.rank()
            )));
        }
        Ok(StabilizerState { n, gens })
    }

    pub fn from_strs<S: AsRef<str>>(gens: &[S]) -> Result<Self> {
        let ops = gens
            .iter()
            .map(|s| s.as_ref().parse::<PauliOperator>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_generators(ops)
    }

    pub(crate) fn from_generators_unchecked(gens: Vec<PauliOperator>) -> Self {
        StabilizerState { n: gens.len(), gens }
    }

    /// Random state from a random Clifford circuit on `|0...0⟩`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut s = Self::zero(n);
        let circ = CliffordCircuit::random(n, 4 * n * n + 8, rng);
        s.apply_circuit(&circ).expect("circuit width matches");
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.gens
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.gens.iter().map(|g| g.to_string()).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q < self.n {
            Ok(())
        } else {
            Err(Error::QubitOutOfRange { index: q, n: self.n })
        }
    }

    fn check_width(&self, p: &PauliOperator) -> Result<()> {
        if p.num_qubits() == self.n {
            Ok(())
        } else {
            Err(Error::SizeMismatch {
                expected: self.n,
                got: p.num_qubits(),
            })
        }
    }

    // ---- unitary evolution ----

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.qubits().into_iter().try_for_each(|q| self.check_qubit(q))?;
        for g in &mut self.gens {
            gate.conjugate(g);
        }
        Ok(())
    }

    /// Apply a circuit whose width is at most `n`; the circuit acts on qubits `0..width`.
    pub fn apply_circuit(&mut self, circuit: &CliffordCircuit) -> Result<()> {
        if circuit.width() > self.n {
            return Err(Error::QubitOutOfRange {
                index: circuit.width() - 1,
                n: self.n,
            });
        }
        for g in &mut self.gens {
            circuit.conjugate(g);
        }
        Ok(())
    }

    /// Functional form of [`apply_circuit`](Self::apply_circuit).
    pub fn apply_clifford(&self, circuit: &CliffordCircuit) -> Result<Self> {
        let mut out = self.clone();
        out.apply_circuit(circuit)?;
        Ok(out)
    }

    /// Apply a Pauli operator to the state (signs of anticommuting generators flip).
    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        self.check_width(p)?;
        for g in &mut self.gens {
            g.conj_pauli(p);
        }
        Ok(())
    }

    /// Complex conjugate of the state.
    pub fn conjugate(&self) -> Self {
        StabilizerState {
            n: self.n,
            gens: self.gens.iter().map(|g| g.conjugate()).collect(),
        }
    }

    // ---- group queries ----

    fn echelon(&self) -> Echelon {
        Echelon::new(self.gens.clone(), &all_columns(self.n))
    }

    /// Deterministic value of a Hermitian observable: `Some(±1)` if `±obs` is in
    /// the stabilizer group, `None` if its outcome would be random.
    pub fn expectation(&self, obs: &PauliOperator) -> Result<Option<i8>> {
        self.check_width(obs)?;
        if !obs.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        if self.gens.iter().any(|g| !g.commutes_with(obs)) {
            return Ok(None);
        }
        Ok(Some(group_sign(&self.echelon(), obs)))
    }

    pub fn contains(&self, p: &PauliOperator) -> bool {
        matches!(self.expectation(p), Ok(Some(1)))
    }

    /// Canonical generator list (reduced echelon form); equal states give equal lists.
    pub fn canonical_generators(&self) -> Vec<PauliOperator> {
        let ech = self.echelon();
        let mut out: Vec<(usize, PauliOperator)> = ech.pivots.iter().map(|&(c, r)| (c, ech.rows[r].clone())).collect();
        out.sort_by_key(|(c, _)| *c);
        out.into_iter().map(|(_, g)| g).collect()
    }

    // ---- measurement ----

    /// Measure a Hermitian Pauli observable in place.
    pub fn measure(&mut self, obs: &PauliOperator, source: OutcomeSource<'_>) -> Result<MeasureOutcome> {
        self.check_width(obs)?;
        if !obs.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        let anti: Vec<usize> = (0..self.n).filter(|&j| !self.gens[j].commutes_with(obs)).collect();
        match anti.split_first() {
            Some((&k, rest)) => {
                let pivot = self.gens[k].clone();
                for &j in rest {
                    self.gens[j].mul_assign_right(&pivot);
                }
                let bit = match source {
                    OutcomeSource::Random(rng) => rng.gen::<bool>(),
                    OutcomeSource::Forced(b) | OutcomeSource::Prefer(b) => b,
                };
                let mut new = obs.clone();
                if bit {
                    new.negate();
                }
                self.gens[k] = new;
                Ok(MeasureOutcome {
                    bit,
                    deterministic: false,
                })
            }
            None => {
                let sign = group_sign(&self.echelon(), obs);
                let bit = sign < 0;
                if let OutcomeSource::Forced(f) = source {
                    if f != bit {
                        return Err(Error::OutcomeContradiction { deterministic: sign });
                    }
                }
                Ok(MeasureOutcome {
                    bit,
                    deterministic: true,
                })
            }
        }
    }

    /// Functional form of [`measure`](Self::measure).
    pub fn measure_pauli(
        &self,
        obs: &PauliOperator,
        source: OutcomeSource<'_>,
    ) -> Result<(MeasureOutcome, StabilizerState)> {
        let mut post = self.clone();
        let out = post.measure(obs, source)?;
        Ok((out, post))
    }

    /// Bell measurement of qubits `a`, `b` (measure `X_aX_b` then `Z_aZ_b`);
    /// both qubits are removed and remaining indices compacted.
    pub fn bell_measure(&mut self, a: usize, b: usize, source: BellSource<'_>) -> Result<BellBits> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::Wiring(format!("Bell measurement on a single qubit {a}")));
        }
        let mut xx = PauliOperator::identity(self.n);
        xx.set(a, Pauli1::X);
        xx.set(b, Pauli1::X);
        let mut zz = PauliOperator::identity(self.n);
        zz.set(a, Pauli1::Z);
        zz.set(b, Pauli1::Z);
        let (rx, rz) = match source {
            BellSource::Random(rng) => {
                let rx = self.measure(&xx, OutcomeSource::Random(&mut *rng))?;
                let rz = self.measure(&zz, OutcomeSource::Random(rng))?;
                (rx, rz)
            }
            BellSource::Forced(bits) => {
                let rx = self.measure(&xx, OutcomeSource::Forced(bits.sz == 1))?;
                let rz = self.measure(&zz, OutcomeSource::Forced(bits.sx == 1))?;
                (rx, rz)
            }
            BellSource::Prefer(bits) => {
                let rx = self.measure(&xx, OutcomeSource::Prefer(bits.sz == 1))?;
                let rz = self.measure(&zz, OutcomeSource::Prefer(bits.sx == 1))?;
                (rx, rz)
            }
        };
        self.remove_qubits(&[a, b])?;
        Ok(BellBits::new(rz.bit, rx.bit))
    }

    /// Remove qubits that are in a pure product state with the rest.
    pub fn remove_qubits(&mut self, qubits: &[usize]) -> Result<()> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let mut qs = qubits.to_vec();
        qs.sort_unstable();
        qs.dedup();
        let k = qs.len();
        let ech = Echelon::new(std::mem::take(&mut self.gens), &qubit_columns(self.n, &qs));
        if ech.rank() != k {
            let rank = ech.rank();
            self.gens = ech.rows;
            return Err(Error::InvalidState(format!(
                "qubits {qs:?} are entangled with the rest (restricted rank {rank} != {k})"
            )));
        }
        let gens: Vec<PauliOperator> = ech
            .rows
            .iter()
            .enumerate()
            .filter(|(r, _)| !ech.is_pivot_row(*r))
            .map(|(_, g)| g.remove_qubits(&qs))
            .collect();
        self.n -= k;
        self.gens = gens;
        Ok(())
    }

    /// `self ⊗ other`, other's qubits appended after self's.
    pub fn tensor(&self, other: &StabilizerState) -> StabilizerState {
        let n = self.n + other.n;
        let left: Vec<usize> = (0..self.n).collect();
        let right: Vec<usize> = (self.n..n).collect();
        let mut gens: Vec<PauliOperator> = self.gens.iter().map(|g| g.embed(n, &left)).collect();
        gens.extend(other.gens.iter().map(|g| g.embed(n, &right)));
        StabilizerState { n, gens }
    }

    /// Reorder qubits: new qubit `i` is old qubit `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<StabilizerState> {
        let mut seen = vec![false; self.n];
        if order.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got: order.len(),
            });
        }
        for &q in order {
            self.check_qubit(q)?;
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::Parse(format!("qubit {q} repeated in permutation")));
            }
        }
        Ok(StabilizerState {
            n: self.n,
            gens: self.gens.iter().map(|g| g.restrict(order)).collect(),
        })
    }

    /// Group elements in the span of the generators that act trivially
    /// outside `support` (returned restricted to `support`, in that order).
    pub fn subgroup_supported_on(&self, support: &[usize]) -> Vec<PauliOperator> {
        let outside: Vec<usize> = (0..self.n).filter(|q| !support.contains(q)).collect();
        let ech = Echelon::new(self.gens.clone(), &qubit_columns(self.n, &outside));
        ech.rows
            .iter()
            .enumerate()
            .filter(|(r, _)| !ech.is_pivot_row(*r))
            .map(|(_, g)| g.restrict(support))
            .collect()
    }
}

/// Sign `s` with `s·obs` in the group; caller guarantees `obs` commutes with all rows.
fn group_sign(ech: &Echelon, obs: &PauliOperator) -> i8 {
    let (t, _) = ech.reduce(obs);
    debug_assert!(t.is_identity(), "observable commutes with a full-rank group");
    // obs · ∏g = t  =>  obs = t · ∏g (rows commute with obs)
    match t.phase() {
        Phase::PLUS => 1,
        Phase::MINUS => -1,
        _ => unreachable!("product of commuting Hermitian operators"),
    }
}

/// Stabilizer-group equality.
pub fn states_equal(a: &StabilizerState, b: &StabilizerState) -> Result<bool> {
    if a.n != b.n {
        return Err(Error::SizeMismatch {
            expected: a.n,
            got: b.n,
        });
    }
    let ech = b.echelon();
    for g in &a.gens {
        if b.gens.iter().any(|h| !h.commutes_with(g)) {
            return Ok(false);
        }
        let (t, _) = ech.reduce(g);
        if !t.is_identity() || t.phase() != Phase::PLUS {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A Pauli `P` with `P|a⟩ = |b⟩` up to phase, if the two states differ only in signs.
pub fn pauli_difference(a: &StabilizerState, b: &StabilizerState) -> Result<Option<PauliOperator>> {
    if a.n != b.n {
        return Err(Error::SizeMismatch {
            expected: a.n,
            got: b.n,
        });
    }
    let n = a.n;
    let mut flips = Vec::with_capacity(n);
    for g in &a.gens {
        match b.expectation(g)? {
            Some(v) => flips.push(v < 0),
            None => return Ok(None),
        }
    }
    // Unknown P = (px, pz); commutation with g is <g.x, pz> + <g.z, px>.
    let rows: Vec<Vec<bool>> = a
        .gens
        .iter()
        .map(|g| {
            let mut r = vec![false; 2 * n];
            for q in 0..n {
                r[q] = g.z_bit(q);
                r[n + q] = g.x_bit(q);
            }
            r
        })
        .collect();
    let sol = solve_gf2(rows, flips).expect("independent generators give a solvable system");
    let mut p = PauliOperator::identity(n);
    for q in 0..n {
        p.set(q, Pauli1::from_bits(sol[q], sol[n + q]));
    }
    Ok(Some(p))
}

/// Solve `A v = b` over GF(2); returns one solution (free variables zero).
pub(crate) fn solve_gf2(mut rows: Vec<Vec<bool>>, mut rhs: Vec<bool>) -> Option<Vec<bool>> {
    let m = rows.len();
    let width = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        let Some(p) = (r..m).find(|&i| rows[i][c]) else {
            continue;
        };
        rows.swap(r, p);
        rhs.swap(r, p);
        for i in 0..m {
            if i != r && rows[i][c] {
                let (src, dst) = if i < r {
                    let (lo, hi) = rows.split_at_mut(r);
                    (&hi[0], &mut lo[i])
                } else {
                    let (lo, hi) = rows.split_at_mut(i);
                    (&lo[r], &mut hi[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d ^= *s;
                }
                rhs[i] ^= rhs[r];
            }
        }
        pivots.push(c);
        r += 1;
        if r == m {
            break;
        }
    }
    if rhs[r..].iter().any(|&b| b) {
        return None;
    }
    let mut sol = vec![false; width];
    for (i, &c) in pivots.iter().enumerate() {
        sol[c] = rhs[i];
    }
    Some(sol)
}

impl fmt::Debug for StabilizerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.gens.iter().map(|g| g.to_string())).finish()
    }
}

impl Serialize for StabilizerState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StabilizerState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(deserializer)?;
        StabilizerState::from_strs(&v).map_err(serde::de::Error::custom)
    }
}
