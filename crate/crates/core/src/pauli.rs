//! Bit-packed n-qubit Pauli operators.
//!
//! A Pauli is stored as `i^phase * P_0 ⊗ P_1 ⊗ ...` where each factor is
//! selected by an `(x, z)` bit pair: `(0,0)=I`, `(1,0)=X`, `(1,1)=Y`,
//! `(0,1)=Z`. Note the `(1,1)` case is `Y` itself, not `XZ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub(crate) const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Single-qubit Pauli letter.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli1 {
    I,
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub const NON_IDENTITY: [Pauli1; 3] = [Pauli1::X, Pauli1::Y, Pauli1::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli1::I,
            (true, false) => Pauli1::X,
            (true, true) => Pauli1::Y,
            (false, true) => Pauli1::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli1::I => (false, false),
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli1::I => 'I',
            Pauli1::X => 'X',
            Pauli1::Y => 'Y',
            Pauli1::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'I' | '_' => Some(Pauli1::I),
            'X' => Some(Pauli1::X),
            'Y' => Some(Pauli1::Y),
            'Z' => Some(Pauli1::Z),
            _ => None,
        }
    }
}

/// Power of `i` multiplying a Pauli string, kept mod 4.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const PLUS: Phase = Phase(0);
    pub const PLUS_I: Phase = Phase(1);
    pub const MINUS: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(e: i64) -> Phase {
        Phase(e.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn negated(self) -> Phase {
        Phase((self.0 + 2) & 3)
    }
}

impl std::ops::Add for Phase {
    type Output = Phase;

    fn add(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) & 3)
    }
}

/// An n-qubit Pauli operator with phase in `{±1, ±i}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Phase,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliOperator {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: Phase::PLUS,
        }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli1) -> Self {
        let mut op = Self::identity(n);
        op.set(qubit, p);
        op
    }

    /// Build from a letter per qubit, phase `+1`.
    pub fn from_letters(letters: &[Pauli1]) -> Self {
        let mut op = Self::identity(letters.len());
        for (q, &p) in letters.iter().enumerate() {
            op.set(q, p);
        }
        op
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn negate(&mut self) {
        self.phase = self.phase.negated();
    }

    pub fn negated(mut self) -> Self {
        self.negate();
        self
    }

    /// Sign as `+1`/`-1`; `None` for the non-Hermitian phases `±i`.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            Phase::PLUS => Some(1),
            Phase::MINUS => Some(-1),
            _ => None,
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / WORD] >> (q % WORD)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / WORD] >> (q % WORD)) & 1 == 1
    }

    #[inline]
    pub(crate) fn set_x_bit(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q % WORD);
        if v {
            self.x[q / WORD] |= m;
        } else {
            self.x[q / WORD] &= !m;
        }
    }

    #[inline]
    pub(crate) fn set_z_bit(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q % WORD);
        if v {
            self.z[q / WORD] |= m;
        } else {
            self.z[q / WORD] &= !m;
        }
    }

    /// Symplectic column bit: `c < n` is the X bit of qubit `c`, otherwise the Z bit of `c - n`.
    #[inline]
    pub(crate) fn column(&self, c: usize) -> bool {
        if c < self.n {
            self.x_bit(c)
        } else {
            self.z_bit(c - self.n)
        }
    }

    pub fn get(&self, q: usize) -> Pauli1 {
        Pauli1::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli1) {
        let (x, z) = p.bits();
        self.set_x_bit(q, x);
        self.set_z_bit(q, z);
    }

    pub fn letters(&self) -> Vec<Pauli1> {
        (0..self.n).map(|q| self.get(q)).collect()
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// True if the Pauli part is the identity (phase ignored).
    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    /// Same Pauli letters, phase ignored.
    pub fn same_letters(&self, other: &PauliOperator) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        acc & 1 == 0
    }

    /// `self <- self * other` (other applied on the right).
    pub fn mul_assign_right(&mut self, other: &PauliOperator) {
        debug_assert_eq!(self.n, other.n);
        let mut plus = 0u32;
        let mut minus = 0u32;
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let xo1 = x1 & !z1;
            let y1 = x1 & z1;
            let zo1 = !x1 & z1;
            let xo2 = x2 & !z2;
            let y2 = x2 & z2;
            let zo2 = !x2 & z2;
            // XY = iZ, YZ = iX, ZX = iY; reversed orders pick up -i.
            plus += ((xo1 & y2) | (y1 & zo2) | (zo1 & xo2)).count_ones();
            minus += ((y1 & xo2) | (zo1 & y2) | (xo1 & zo2)).count_ones();
            self.x[i] = x1 ^ x2;
            self.z[i] = z1 ^ z2;
        }
        let e = self.phase.0 as i64 + other.phase.0 as i64 + plus as i64 - minus as i64;
        self.phase = Phase::from_exponent(e);
    }

    /// `self <- other * self` (other applied on the left).
    pub fn mul_assign_left(&mut self, other: &PauliOperator) {
        let mut tmp = other.clone();
        tmp.mul_assign_right(self);
        *self = tmp;
    }

    pub fn mul(&self, other: &PauliOperator) -> PauliOperator {
        let mut out = self.clone();
        out.mul_assign_right(other);
        out
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliOperator) -> PauliOperator {
        let mut out = PauliOperator::identity(self.n + other.n);
        for q in 0..self.n {
            out.set(q, self.get(q));
        }
        for q in 0..other.n {
            out.set(self.n + q, other.get(q));
        }
        out.phase = self.phase + other.phase;
        out
    }

    /// Restriction to `qubits` in the given order, phase kept.
    pub fn restrict(&self, qubits: &[usize]) -> PauliOperator {
        let mut out = PauliOperator::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.set(i, self.get(q));
        }
        out.phase = self.phase;
        out
    }

    /// Place this operator on `positions` of an `n`-qubit register.
    pub fn embed(&self, n: usize, positions: &[usize]) -> PauliOperator {
        debug_assert_eq!(positions.len(), self.n);
        let mut out = PauliOperator::identity(n);
        for (i, &q) in positions.iter().enumerate() {
            out.set(q, self.get(i));
        }
        out.phase = self.phase;
        out
    }

    /// Delete the listed qubits, compacting the remaining indices.
    pub fn remove_qubits(&self, qubits: &[usize]) -> PauliOperator {
        let keep: Vec<usize> = (0..self.n).filter(|q| !qubits.contains(q)).collect();
        self.restrict(&keep)
    }

    /// Complex conjugate: each `Y` contributes a sign.
    pub fn conjugate(&self) -> PauliOperator {
        let ys: u32 = self.x.iter().zip(&self.z).map(|(x, z)| (x & z).count_ones()).sum();
        let mut out = self.clone();
        // i^k conjugates to i^-k
        let mut e = (4 - self.phase.0 as i64) % 4;
        if ys & 1 == 1 {
            e += 2;
        }
        out.phase = Phase::from_exponent(e);
        out
    }

    // ---- Clifford conjugation: P <- U P U^dagger ----

    pub fn conj_h(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x && z {
            self.negate();
        }
        self.set_x_bit(q, z);
        self.set_z_bit(q, x);
    }

    pub fn conj_s(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x && z {
            self.negate();
        }
        self.set_z_bit(q, z ^ x);
    }

    pub fn conj_sdg(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x && !z {
            self.negate();
        }
        self.set_z_bit(q, z ^ x);
    }

    pub fn conj_x(&mut self, q: usize) {
        if self.z_bit(q) {
            self.negate();
        }
    }

    pub fn conj_z(&mut self, q: usize) {
        if self.x_bit(q) {
            self.negate();
        }
    }

    pub fn conj_y(&mut self, q: usize) {
        if self.x_bit(q) ^ self.z_bit(q) {
            self.negate();
        }
    }

    pub fn conj_cnot(&mut self, c: usize, t: usize) {
        let (xc, zc, xt, zt) = (self.x_bit(c), self.z_bit(c), self.x_bit(t), self.z_bit(t));
        if xc && zt && !(xt ^ zc) {
            self.negate();
        }
        self.set_x_bit(t, xt ^ xc);
        self.set_z_bit(c, zc ^ zt);
    }

    pub fn conj_cz(&mut self, a: usize, b: usize) {
        let (xa, za, xb, zb) = (self.x_bit(a), self.z_bit(a), self.x_bit(b), self.z_bit(b));
        if xa && xb && (za ^ zb) {
            self.negate();
        }
        self.set_z_bit(a, za ^ xb);
        self.set_z_bit(b, zb ^ xa);
    }

    /// Conjugate by another Pauli: flips the sign when they anticommute.
    pub fn conj_pauli(&mut self, p: &PauliOperator) {
        if !self.commutes_with(p) {
            self.negate();
        }
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            Phase::PLUS => "+",
            Phase::MINUS => "-",
            Phase::PLUS_I => "+i",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (neg, rest) = match s.as_bytes().first() {
            Some(b'+') => (false, &s[1..]),
            Some(b'-') => (true, &s[1..]),
            _ => (false, s),
        };
        let (imag, rest) = match rest.strip_prefix('i') {
            Some(r) => (true, r),
            None => (false, rest),
        };
        let mut letters = Vec::with_capacity(rest.len());
        for c in rest.chars() {
            letters
                .push(Pauli1::from_letter(c).ok_or_else(|| Error::Parse(format!("bad Pauli letter `{c}` in `{s}`")))?);
        }
        let mut op = PauliOperator::from_letters(&letters);
        op.phase = Phase::from_exponent(if neg { 2 } else { 0 } + if imag { 1 } else { 0 });
        Ok(op)
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(p("X").mul(&p("Y")), p("+iZ"));
        assert_eq!(p("Y").mul(&p("Z")), p("+iX"));
        assert_eq!(p("Z").mul(&p("X")), p("+iY"));
        assert_eq!(p("Y").mul(&p("X")), p("-iZ"));
        assert_eq!(p("X").mul(&p("X")), p("I"));
        assert_eq!(p("Y").mul(&p("Y")), p("I"));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(p("+XZIZX").to_string(), "+XZIZX");
        assert_eq!(p("-ZZ").to_string(), "-ZZ");
        assert_eq!(p("-iY").phase(), Phase::MINUS_I);
        assert!("XQ".parse::<PauliOperator>().is_err());
    }

    #[test]
    fn commutation() {
        assert!(p("XX").commutes_with(&p("ZZ")));
        assert!(!p("XI").commutes_with(&p("ZI")));
        assert!(p("XYZ").commutes_with(&p("XYZ")));
    }

    #[test]
    fn conjugation_rules() {
        let mut a = p("Y");
        a.conj_h(0);
        assert_eq!(a, p("-Y"));
        let mut a = p("X");
        a.conj_s(0);
        assert_eq!(a, p("Y"));
        let mut a = p("Y");
        a.conj_s(0);
        assert_eq!(a, p("-X"));
        let mut a = p("XI");
        a.conj_cnot(0, 1);
        assert_eq!(a, p("XX"));
        let mut a = p("IZ");
        a.conj_cnot(0, 1);
        assert_eq!(a, p("ZZ"));
        let mut a = p("XY");
        a.conj_cz(0, 1);
        assert_eq!(a, p("-YX"));
    }

    #[test]
    fn wide_operators_span_words() {
        let mut a = PauliOperator::single(130, 129, Pauli1::X);
        a.mul_assign_right(&PauliOperator::single(130, 129, Pauli1::Z));
        assert_eq!(a.get(129), Pauli1::Y);
        assert_eq!(a.phase(), Phase::MINUS_I);
        assert_eq!(a.weight(), 1);
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        (prop::collection::vec(0u8..4, n), 0u8..4).prop_map(|(v, ph)| {
            let letters: Vec<Pauli1> = v
                .into_iter()
                .map(|k| [Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z][k as usize])
                .collect();
            PauliOperator::from_letters(&letters).with_phase(Phase::from_exponent(ph as i64))
        })
    }

    proptest! {
        #[test]
        fn product_is_associative(a in arb_pauli(70), b in arb_pauli(70), c in arb_pauli(70)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn commuting_pairs_commute_as_products(a in arb_pauli(9), b in arb_pauli(9)) {
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            if a.commutes_with(&b) {
                prop_assert_eq!(ab, ba);
            } else {
                prop_assert_eq!(ab, ba.negated());
            }
        }

        #[test]
        fn string_roundtrip(a in arb_pauli(12)) {
            prop_assert_eq!(a.to_string().parse::<PauliOperator>().unwrap(), a);
        }
    }
}
