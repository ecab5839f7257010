//! Registry of small stabilizer codes with encoders and syndrome decoders.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordCircuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Pauli1, PauliOperator, Phase};
use crate::stabilizer::{all_columns, Echelon, StabilizerState};

pub const CODE_NAMES: [&str; 4] = ["rep3_phase", "rep3_bit", "ring5", "rm15"];

/// Origin of a stored number.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Quoted value, not re-derived here.
    #[serde(rename = "paper-constant")]
    Stated,
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    pub provenance: Provenance,
    pub note: String,
}

/// Residual class of an error after correction.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalClass {
    /// Residual is in the stabilizer group (up to sign).
    Identity,
    X,
    Y,
    Z,
    /// Residual does not commute with the stabilizers.
    Outside,
}

#[derive(Clone, Debug)]
pub struct CodeSpec {
    pub name: String,
    pub m: usize,
    pub stabilizers: Vec<PauliOperator>,
    pub logical_x: PauliOperator,
    pub logical_z: PauliOperator,
    /// Maps the input on `input_qubit` plus ancillas into the code space.
    pub encoder: CliffordCircuit,
    pub input_qubit: usize,
    /// Ancilla preparation: `X` for `|+⟩`, `Z` for `|0⟩`.
    pub ancilla: Pauli1,
    /// Letters a decoder correction may use.
    pub alphabet: Vec<Pauli1>,
    pub p_code: Option<Constant>,
    table: Vec<PauliOperator>,
}

fn ops(strs: &[&str]) -> Vec<PauliOperator> {
    strs.iter().map(|s| s.parse().expect("static operator")).collect()
}

fn letter_rank(p: Pauli1) -> u8 {
    match p {
        Pauli1::I => 0,
        Pauli1::X => 1,
        Pauli1::Y => 2,
        Pauli1::Z => 3,
    }
}

/// Decoder preference: weight, then the sorted `(letter, qubit)` list with X<Y<Z.
pub fn tie_break_key(p: &PauliOperator) -> (usize, Vec<(u8, usize)>) {
    let mut v: Vec<(u8, usize)> = p.support().into_iter().map(|q| (letter_rank(p.get(q)), q)).collect();
    v.sort_unstable();
    (v.len(), v)
}

/// Syndrome mask: bit `j` set iff `e` anticommutes with `gens[j]`.
pub(crate) fn syndrome_mask(gens: &[PauliOperator], e: &PauliOperator) -> u64 {
    gens.iter()
        .enumerate()
        .filter(|(_, g)| !g.commutes_with(e))
        .fold(0, |m, (j, _)| m | 1 << j)
}

fn mask_to_bits(mask: u64, len: usize) -> Vec<u8> {
    (0..len).map(|j| (mask >> j & 1) as u8).collect()
}

fn bits_to_mask(bits: &[u8]) -> u64 {
    bits.iter().enumerate().fold(0, |m, (j, &b)| m | ((b as u64 & 1) << j))
}

/// Minimum-weight table by exhaustive enumeration over `alphabet`.
fn min_weight_table(m: usize, gens: &[PauliOperator], alphabet: &[Pauli1]) -> Result<Vec<PauliOperator>> {
    let size = 1usize << gens.len();
    let mut table: Vec<Option<PauliOperator>> = vec![None; size];
    let mut filled = 0;
    let letters: Vec<Pauli1> = alphabet.iter().copied().filter(|&l| l != Pauli1::I).collect();
    let base = letters.len() + 1;
    let total = (base as u64)
        .checked_pow(m as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::Infeasible(format!("exhaustive decoder table over {m} qubits")))?;
    let mut all: Vec<PauliOperator> = (0..total)
        .map(|mut code| {
            let mut p = PauliOperator::identity(m);
            for q in 0..m {
                let d = (code % base as u64) as usize;
                code /= base as u64;
                if d > 0 {
                    p.set(q, letters[d - 1]);
                }
            }
            p
        })
        .collect();
    all.sort_by_cached_key(tie_break_key);
    for p in all {
        let s = syndrome_mask(gens, &p) as usize;
        if table[s].is_none() {
            table[s] = Some(p);
            filled += 1;
            if filled == size {
                break;
            }
        }
    }
    table
        .into_iter()
        .enumerate()
        .map(|(s, p)| p.ok_or_else(|| Error::Infeasible(format!("syndrome {s:b} unreachable with alphabet"))))
        .collect()
}

/// Encoder for a CSS code whose X-type generators and logical X are given;
/// all ancillas start in `|0⟩`. Returns the circuit and the input qubit.
pub fn css_encoder(m: usize, x_gens: &[PauliOperator], logical_x: &PauliOperator) -> Result<(CliffordCircuit, usize)> {
    let ech = Echelon::new(x_gens.to_vec(), &(0..m).collect::<Vec<_>>());
    if ech.rank() != x_gens.len() {
        return Err(Error::InvalidState("dependent X generators".into()));
    }
    let (xbar, _) = ech.reduce(logical_x);
    let input = xbar
        .support()
        .first()
        .copied()
        .ok_or_else(|| Error::InvalidState("logical X lies in the stabilizer group".into()))?;
    let mut c = CliffordCircuit::new(m);
    for q in xbar.support() {
        if q != input {
            c.push(Gate::Cnot(input, q))?;
        }
    }
    for &(p, r) in &ech.pivots {
        c.push(Gate::H(p))?;
        for q in ech.rows[r].support() {
            if q != p {
                c.push(Gate::Cnot(p, q))?;
            }
        }
    }
    Ok((c, input))
}

impl CodeSpec {
    /// Build and validate a code; the decoder is the exhaustive minimum-weight table.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        stabilizers: Vec<PauliOperator>,
        logical_x: PauliOperator,
        logical_z: PauliOperator,
        encoder: CliffordCircuit,
        input_qubit: usize,
        ancilla: Pauli1,
        alphabet: Vec<Pauli1>,
    ) -> Result<Self> {
        let m = logical_x.num_qubits();
        let table = min_weight_table(m, &stabilizers, &alphabet)?;
        let code = CodeSpec {
            name: name.to_string(),
            m,
            stabilizers,
            logical_x,
            logical_z,
            encoder,
            input_qubit,
            ancilla,
            alphabet,
            p_code: None,
            table,
        };
        code.validate()?;
        Ok(code)
    }

    fn validate(&self) -> Result<()> {
        let m = self.m;
        let bad = |msg: String| Err(Error::InvalidState(format!("code {}: {msg}", self.name)));
        if self.stabilizers.len() + 1 != m {
            return bad(format!("{} generators for {m} qubits", self.stabilizers.len()));
        }
        for g in self.stabilizers.iter().chain([&self.logical_x, &self.logical_z]) {
            if g.num_qubits() != m || !g.is_hermitian() {
                return bad(format!("operator {g} malformed"));
            }
        }
        for (i, g) in self.stabilizers.iter().enumerate() {
            if self.stabilizers[i + 1..].iter().any(|h| !h.commutes_with(g)) {
                return bad("generators anticommute".into());
            }
            if !g.commutes_with(&self.logical_x) || !g.commutes_with(&self.logical_z) {
                return bad(format!("logical operator anticommutes with {g}"));
            }
        }
        if self.logical_x.commutes_with(&self.logical_z) {
            return bad("logical X and Z commute".into());
        }
        let mut all = self.stabilizers.clone();
        all.push(self.logical_z.clone());
        if Echelon::new(all, &all_columns(m)).rank() != m {
            return bad("generators dependent".into());
        }
        if self.encoder.width() != m || self.input_qubit >= m {
            return bad("encoder width".into());
        }
        for (input, logical) in [(Pauli1::Z, self.logical_z()), (Pauli1::X, self.logical_x())] {
            let mut s = self.prepared_input(&StabilizerState::from_generators(vec![PauliOperator::single(
                1, 0, input,
            )])?)?;
            s.apply_circuit(&self.encoder)?;
            for g in self.stabilizers.iter().chain([&logical]) {
                if s.expectation(g)? != Some(1) {
                    return bad(format!("encoder output not stabilized by {g}"));
                }
            }
        }
        Ok(())
    }

    pub fn logical_x(&self) -> PauliOperator {
        self.logical_x.clone()
    }

    pub fn logical_z(&self) -> PauliOperator {
        self.logical_z.clone()
    }

    /// `Y_L = i X_L Z_L`.
    pub fn logical_y(&self) -> PauliOperator {
        let mut y = self.logical_x.mul(&self.logical_z);
        y.set_phase(y.phase() + Phase::PLUS_I);
        y
    }

    pub fn logical(&self, p: Pauli1) -> PauliOperator {
        match p {
            Pauli1::I => PauliOperator::identity(self.m),
            Pauli1::X => self.logical_x(),
            Pauli1::Y => self.logical_y(),
            Pauli1::Z => self.logical_z(),
        }
    }

    /// Place a single-qubit input on `input_qubit` with ancillas prepared.
    pub fn prepared_input(&self, input: &StabilizerState) -> Result<StabilizerState> {
        if input.num_qubits() != 1 {
            return Err(Error::SizeMismatch {
                expected: 1,
                got: input.num_qubits(),
            });
        }
        let m = self.m;
        let mut gens: Vec<PauliOperator> = (0..m)
            .filter(|&q| q != self.input_qubit)
            .map(|q| PauliOperator::single(m, q, self.ancilla))
            .collect();
        gens.push(input.generators()[0].embed(m, &[self.input_qubit]));
        StabilizerState::from_generators(gens)
    }

    /// Encoded logical eigenstate of `sign · P_L`, built from the logical operators.
    pub fn logical_eigenstate(&self, p: Pauli1, sign: i8) -> Result<StabilizerState> {
        if p == Pauli1::I {
            return Err(Error::Parse("logical eigenstate needs X, Y or Z".into()));
        }
        let mut l = self.logical(p);
        if sign < 0 {
            l.negate();
        }
        let mut gens = self.stabilizers.clone();
        gens.push(l);
        StabilizerState::from_generators(gens)
    }

    /// `(|0⟩|0_L⟩ + |1⟩|1_L⟩)/√2` with the reference qubit first.
    pub fn logical_bell_state(&self) -> StabilizerState {
        let m = self.m;
        let code: Vec<usize> = (1..=m).collect();
        let mut gens: Vec<PauliOperator> = self.stabilizers.iter().map(|g| g.embed(m + 1, &code)).collect();
        for (l, letter) in [(&self.logical_x, Pauli1::X), (&self.logical_z, Pauli1::Z)] {
            let mut g = l.embed(m + 1, &code);
            g.set(0, letter);
            gens.push(g);
        }
        StabilizerState::from_generators(gens).expect("validated code")
    }

    pub fn syndrome_mask(&self, e: &PauliOperator) -> Result<u64> {
        if e.num_qubits() != self.m {
            return Err(Error::SizeMismatch {
                expected: self.m,
                got: e.num_qubits(),
            });
        }
        Ok(syndrome_mask(&self.stabilizers, e))
    }

    /// Bit `j` is 1 iff `error` anticommutes with generator `j`.
    pub fn syndrome_of(&self, error: &PauliOperator) -> Result<Vec<u8>> {
        Ok(mask_to_bits(self.syndrome_mask(error)?, self.stabilizers.len()))
    }

    pub fn decode_mask(&self, mask: u64) -> &PauliOperator {
        &self.table[mask as usize]
    }

    pub fn decode(&self, syndrome: &[u8]) -> Result<PauliOperator> {
        if syndrome.len() != self.stabilizers.len() {
            return Err(Error::SizeMismatch {
                expected: self.stabilizers.len(),
                got: syndrome.len(),
            });
        }
        Ok(self.decode_mask(bits_to_mask(syndrome)).clone())
    }

    /// Logical content of a residual operator.
    pub fn classify(&self, residual: &PauliOperator) -> LogicalClass {
        if self.stabilizers.iter().any(|g| !g.commutes_with(residual)) {
            return LogicalClass::Outside;
        }
        let has_x = !residual.commutes_with(&self.logical_z);
        let has_z = !residual.commutes_with(&self.logical_x);
        match (has_x, has_z) {
            (false, false) => LogicalClass::Identity,
            (true, false) => LogicalClass::X,
            (true, true) => LogicalClass::Y,
            (false, true) => LogicalClass::Z,
        }
    }

    /// Class of `error · decode(syndrome_of(error))`.
    pub fn correct(&self, error: &PauliOperator) -> Result<LogicalClass> {
        let c = self.decode_mask(self.syndrome_mask(error)?);
        Ok(self.classify(&error.mul(c)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let strs = |v: &[PauliOperator]| v.iter().map(|p| p.to_string()).collect::<Vec<_>>();
        serde_json::json!({
            "format": 1,
            "name": self.name,
            "m": self.m,
            "stabilizers": strs(&self.stabilizers),
            "logical_x": self.logical_x.to_string(),
            "logical_z": self.logical_z.to_string(),
            "encoder": self.encoder.to_string(),
            "input_qubit": self.input_qubit,
            "ancilla": self.ancilla.letter().to_string(),
            "alphabet": self.alphabet.iter().map(|l| l.letter()).collect::<String>(),
            "p_code": self.p_code,
        })
    }

    /// Load a code from the JSON produced by [`to_json`](Self::to_json).
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            format: u32,
            name: String,
            stabilizers: Vec<PauliOperator>,
            logical_x: PauliOperator,
            logical_z: PauliOperator,
            encoder: String,
            input_qubit: usize,
            ancilla: String,
            alphabet: Option<String>,
            p_code: Option<Constant>,
        }
        let raw: Raw = serde_json::from_value(v.clone())?;
        if raw.format != 1 {
            return Err(Error::Parse(format!("unsupported format {}", raw.format)));
        }
        let letter = |s: &str| -> Result<Vec<Pauli1>> {
            s.chars()
                .map(|c| Pauli1::from_letter(c).ok_or_else(|| Error::Parse(format!("bad letter `{c}`"))))
                .collect()
        };
        let ancilla = *letter(&raw.ancilla)?
            .first()
            .ok_or_else(|| Error::Parse("empty ancilla".into()))?;
        let alphabet = match raw.alphabet {
            Some(a) => letter(&a)?,
            None => vec![Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z],
        };
        let mut code = CodeSpec::new(
            &raw.name,
            raw.stabilizers,
            raw.logical_x,
            raw.logical_z,
            raw.encoder.parse()?,
            raw.input_qubit,
            ancilla,
            alphabet,
        )?;
        code.p_code = raw.p_code;
        Ok(code)
    }
}

fn rep3_phase() -> CodeSpec {
    let enc = "qubits 3; h 0; cnot 1 0; cnot 2 0".parse().unwrap();
    CodeSpec::new(
        "rep3_phase",
        ops(&["XXI", "IXX"]),
        "ZZZ".parse().unwrap(),
        "XII".parse().unwrap(),
        enc,
        0,
        Pauli1::X,
        vec![Pauli1::I, Pauli1::Z],
    )
    .expect("rep3_phase")
}

fn rep3_bit() -> CodeSpec {
    let x_l: PauliOperator = "XXX".parse().unwrap();
    let (enc, input) = css_encoder(3, &[], &x_l).unwrap();
    CodeSpec::new(
        "rep3_bit",
        ops(&["ZZI", "IZZ"]),
        x_l,
        "ZII".parse().unwrap(),
        enc,
        input,
        Pauli1::Z,
        vec![Pauli1::I, Pauli1::X],
    )
    .expect("rep3_bit")
}

/// Ring correlators `K_j = Z_{j-1} X_j Z_{j+1}` on five qubits.
pub fn ring5_correlators() -> Vec<PauliOperator> {
    (0..5)
        .map(|j| {
            let mut k = PauliOperator::single(5, j, Pauli1::X);
            k.set((j + 4) % 5, Pauli1::Z);
            k.set((j + 1) % 5, Pauli1::Z);
            k
        })
        .collect()
}

fn ring5() -> CodeSpec {
    let k = ring5_correlators();
    let gens: Vec<PauliOperator> = (0..4).map(|j| k[j].mul(&k[j + 1])).collect();
    let mut enc = CliffordCircuit::new(5);
    enc.push(Gate::H(0)).unwrap();
    for q in 1..5 {
        enc.push(Gate::Cnot(q, 0)).unwrap();
    }
    for q in 0..5 {
        enc.push(Gate::Cz(q, (q + 1) % 5)).unwrap();
    }
    let mut code = CodeSpec::new(
        "ring5",
        gens,
        "ZZZZZ".parse().unwrap(),
        k[0].clone(),
        enc,
        0,
        Pauli1::X,
        vec![Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z],
    )
    .expect("ring5");
    code.p_code = Some(Constant {
        value: 0.8250,
        provenance: Provenance::Stated,
        note: "concatenated 5-qubit ring code; re-derived by concatenation_fixed_point".into(),
    });
    code
}

/// Column `j` of the punctured Reed-Muller code is the 4-bit vector `j + 1`.
fn rm15() -> CodeSpec {
    let m = 15;
    let plane = |pred: &dyn Fn(usize) -> bool, l: Pauli1| {
        let mut p = PauliOperator::identity(m);
        for j in 0..m {
            if pred(j + 1) {
                p.set(j, l);
            }
        }
        p
    };
    let mut x_gens = Vec::new();
    for b in 0..4 {
        x_gens.push(plane(&|v| v >> b & 1 == 1, Pauli1::X));
    }
    let mut z_gens = Vec::new();
    for b in 0..4 {
        z_gens.push(plane(&|v| v >> b & 1 == 1, Pauli1::Z));
    }
    for a in 0..4 {
        for b in a + 1..4 {
            z_gens.push(plane(&|v| v >> a & 1 == 1 && v >> b & 1 == 1, Pauli1::Z));
        }
    }
    let x_l = plane(&|_| true, Pauli1::X);
    let z_l = plane(&|_| true, Pauli1::Z);
    let (enc, input) = css_encoder(m, &x_gens, &x_l).unwrap();
    let mut gens = x_gens.clone();
    gens.extend(z_gens.iter().cloned());
    let table = css_table(m, &x_gens, &z_gens, &gens);
    let code = CodeSpec {
        name: "rm15".into(),
        m,
        stabilizers: gens,
        logical_x: x_l,
        logical_z: z_l,
        encoder: enc,
        input_qubit: input,
        ancilla: Pauli1::Z,
        alphabet: vec![Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z],
        p_code: Some(Constant {
            value: 0.981,
            provenance: Provenance::Stated,
            note: "15-qubit Reed-Muller code with transversal pi/8; stored, not re-derived".into(),
        }),
        table,
    };
    code.validate().expect("rm15");
    code
}

/// Weight ≤ 1 lookup, then independent minimum-weight X and Z decoding.
fn css_table(
    m: usize,
    x_gens: &[PauliOperator],
    z_gens: &[PauliOperator],
    gens: &[PauliOperator],
) -> Vec<PauliOperator> {
    let best = |checks: &[PauliOperator], letter: Pauli1| -> Vec<Vec<usize>> {
        let mut out: Vec<Option<(usize, Vec<usize>)>> = vec![None; 1 << checks.len()];
        for pattern in 0u32..1 << m {
            let support: Vec<usize> = (0..m).filter(|&q| pattern >> q & 1 == 1).collect();
            let mut e = PauliOperator::identity(m);
            for &q in &support {
                e.set(q, letter);
            }
            let s = syndrome_mask(checks, &e) as usize;
            let cand = (support.len(), support);
            if out[s].as_ref().is_none_or(|cur| cand < *cur) {
                out[s] = Some(cand);
            }
        }
        out.into_iter().map(|o| o.expect("all syndromes reachable").1).collect()
    };
    // Z errors are seen by X checks and vice versa
    let z_fix = best(x_gens, Pauli1::Z);
    let x_fix = best(z_gens, Pauli1::X);
    let nx = x_gens.len();
    let mut single: HashMap<u64, PauliOperator> = HashMap::new();
    let mut singles: Vec<PauliOperator> = (0..m)
        .flat_map(|q| Pauli1::NON_IDENTITY.map(|l| PauliOperator::single(m, q, l)))
        .collect();
    singles.push(PauliOperator::identity(m));
    singles.sort_by_cached_key(tie_break_key);
    for p in singles {
        single.entry(syndrome_mask(gens, &p)).or_insert(p);
    }
    (0..1u64 << gens.len())
        .map(|s| {
            if let Some(p) = single.get(&s) {
                return p.clone();
            }
            let mut e = PauliOperator::identity(m);
            for &q in &x_fix[(s >> nx) as usize] {
                e.set(q, Pauli1::X);
            }
            for &q in &z_fix[(s & ((1 << nx) - 1)) as usize] {
                e.set(q, if e.get(q) == Pauli1::X { Pauli1::Y } else { Pauli1::Z });
            }
            e
        })
        .collect()
}

/// Look up a registry code by name.
pub fn get_code(name: &str) -> Result<&'static CodeSpec> {
    static REP3P: OnceLock<CodeSpec> = OnceLock::new();
    static REP3B: OnceLock<CodeSpec> = OnceLock::new();
    static RING5: OnceLock<CodeSpec> = OnceLock::new();
    static RM15: OnceLock<CodeSpec> = OnceLock::new();
    Ok(match name {
        "rep3_phase" => REP3P.get_or_init(rep3_phase),
        "rep3_bit" => REP3B.get_or_init(rep3_bit),
        "ring5" => RING5.get_or_init(ring5),
        "rm15" => RM15.get_or_init(rm15),
        other => return Err(Error::UnknownCode(other.to_string())),
    })
}
