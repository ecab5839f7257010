//! Clifford gates and circuits.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cz(usize, usize),
    Cnot(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => {
                vec![q]
            }
            Gate::Cz(a, b) | Gate::Cnot(a, b) => vec![a, b],
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            g => g,
        }
    }

    /// Relabel qubits through `map`.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(map(q)),
            Gate::S(q) => Gate::S(map(q)),
            Gate::Sdg(q) => Gate::Sdg(map(q)),
            Gate::X(q) => Gate::X(map(q)),
            Gate::Y(q) => Gate::Y(map(q)),
            Gate::Z(q) => Gate::Z(map(q)),
            Gate::Cz(a, b) => Gate::Cz(map(a), map(b)),
            Gate::Cnot(a, b) => Gate::Cnot(map(a), map(b)),
        }
    }

    /// Conjugate a Pauli: `P <- G P G^dagger`.
    pub fn conjugate(&self, p: &mut PauliOperator) {
        match *self {
            Gate::H(q) => p.conj_h(q),
            Gate::S(q) => p.conj_s(q),
            Gate::Sdg(q) => p.conj_sdg(q),
            Gate::X(q) => p.conj_x(q),
            Gate::Y(q) => p.conj_y(q),
            Gate::Z(q) => p.conj_z(q),
            Gate::Cz(a, b) => p.conj_cz(a, b),
            Gate::Cnot(c, t) => p.conj_cnot(c, t),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "h {q}"),
            Gate::S(q) => write!(f, "s {q}"),
            Gate::Sdg(q) => write!(f, "sdg {q}"),
            Gate::X(q) => write!(f, "x {q}"),
            Gate::Y(q) => write!(f, "y {q}"),
            Gate::Z(q) => write!(f, "z {q}"),
            Gate::Cz(a, b) => write!(f, "cz {a} {b}"),
            Gate::Cnot(a, b) => write!(f, "cnot {a} {b}"),
        }
    }
}

/// Ordered list of Clifford gates on `width` qubits. Empty circuits are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordCircuit {
    width: usize,
    gates: Vec<Gate>,
}

impl CliffordCircuit {
    pub fn new(width: usize) -> Self {
        CliffordCircuit {
            width,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(width: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = CliffordCircuit::new(width);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        if let Some(&bad) = qs.iter().find(|&&q| q >= self.width) {
            return Err(Error::QubitOutOfRange {
                index: bad,
                n: self.width,
            });
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::Parse(format!("two-qubit gate `{gate}` on a single qubit")));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn inverse(&self) -> CliffordCircuit {
        CliffordCircuit {
            width: self.width,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Append `other`, mapping its qubit `i` to `positions[i]`.
    pub fn append_mapped(&mut self, other: &CliffordCircuit, positions: &[usize]) -> Result<()> {
        for g in &other.gates {
            self.push(g.remap(|q| positions[q]))?;
        }
        Ok(())
    }

    /// Heisenberg-picture conjugation `P <- C P C^dagger`.
    pub fn conjugate(&self, p: &mut PauliOperator) {
        for g in &self.gates {
            g.conjugate(p);
        }
    }

    /// Uniformly drawn gate sequence, mainly for randomized checks.
    pub fn random<R: Rng + ?Sized>(width: usize, len: usize, rng: &mut R) -> Self {
        let mut c = CliffordCircuit::new(width);
        for _ in 0..len {
            let kind = if width >= 2 {
                rng.gen_range(0..8)
            } else {
                rng.gen_range(0..6)
            };
            let a = rng.gen_range(0..width);
            let g = match kind {
                0 => Gate::H(a),
                1 => Gate::S(a),
                2 => Gate::Sdg(a),
                3 => Gate::X(a),
                4 => Gate::Y(a),
                5 => Gate::Z(a),
                k => {
                    let mut b = rng.gen_range(0..width - 1);
                    if b >= a {
                        b += 1;
                    }
                    if k == 6 {
                        Gate::Cz(a, b)
                    } else {
                        Gate::Cnot(a, b)
                    }
                }
            };
            c.gates.push(g);
        }
        c
    }

    /// Small library of named circuits used by the CLI.
    pub fn named(name: &str) -> Option<CliffordCircuit> {
        let (w, gates) = match name {
            "identity" | "id" => (1, vec![]),
            "h" => (1, vec![Gate::H(0)]),
            "s" => (1, vec![Gate::S(0)]),
            "x" => (1, vec![Gate::X(0)]),
            "z" => (1, vec![Gate::Z(0)]),
            "cz" => (2, vec![Gate::Cz(0, 1)]),
            "cnot" => (2, vec![Gate::Cnot(0, 1)]),
            "swap" => (2, vec![Gate::Cnot(0, 1), Gate::Cnot(1, 0), Gate::Cnot(0, 1)]),
            _ => return None,
        };
        Some(CliffordCircuit { width: w, gates })
    }
}

impl fmt::Display for CliffordCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "qubits {}", self.width)?;
        for g in &self.gates {
            write!(f, "; {g}")?;
        }
        Ok(())
    }
}

/// Parses `"qubits 2; h 0; cnot 0 1"`. The `qubits` header is optional; without
/// it the width is inferred from the largest index.
impl FromStr for CliffordCircuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut width: Option<usize> = None;
        let mut gates = Vec::new();
        for item in s.split([';', '\n']) {
            let toks: Vec<&str> = item.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            let idx = |i: usize| -> Result<usize> {
                toks.get(i)
                    .ok_or_else(|| Error::Parse(format!("missing operand in `{}`", item.trim())))?
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("`{}`: {e}", item.trim())))
            };
            let gate = match toks[0].to_ascii_lowercase().as_str() {
                "qubits" => {
                    width = Some(idx(1)?);
                    continue;
                }
                "h" => Gate::H(idx(1)?),
                "s" => Gate::S(idx(1)?),
                "sdg" => Gate::Sdg(idx(1)?),
                "x" => Gate::X(idx(1)?),
                "y" => Gate::Y(idx(1)?),
                "z" => Gate::Z(idx(1)?),
                "cz" => Gate::Cz(idx(1)?, idx(2)?),
                "cnot" | "cx" => Gate::Cnot(idx(1)?, idx(2)?),
                other => return Err(Error::Parse(format!("unknown gate `{other}`"))),
            };
            gates.push(gate);
        }
        let inferred = gates.iter().flat_map(|g| g.qubits()).max().map_or(1, |m| m + 1);
        CliffordCircuit::from_gates(width.unwrap_or(inferred), gates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let c: CliffordCircuit = "qubits 3; h 0; cnot 0 1; cz 1 2; sdg 2".parse().unwrap();
        assert_eq!(c.width(), 3);
        assert_eq!(c.len(), 4);
        assert_eq!(c.to_string().parse::<CliffordCircuit>().unwrap(), c);
    }

    #[test]
    fn out_of_range_gate_rejected() {
        assert!(CliffordCircuit::from_gates(2, vec![Gate::H(2)]).is_err());
        assert!("qubits 1; cnot 0 1".parse::<CliffordCircuit>().is_err());
        assert!("qubits 2; cz 1 1".parse::<CliffordCircuit>().is_err());
    }

    #[test]
    fn inverse_undoes_conjugation() {
        let c: CliffordCircuit = "h 0; s 1; cnot 0 1; cz 1 2; y 2".parse().unwrap();
        let orig: PauliOperator = "XYZ".parse().unwrap();
        let mut p = orig.clone();
        c.conjugate(&mut p);
        c.inverse().conjugate(&mut p);
        assert_eq!(p, orig);
    }
}
