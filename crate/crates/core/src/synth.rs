//! Resource-state synthesis: Choi states, cluster reduction, code blocks,
//! rotation gadgets and build-time fusion.
//!
//! Block qubits are kept in canonical order: in-ports, then out-ports, then
//! open qubits, each by port index. A block realizes the map
//! `ψ ↦ Σ_i ψ_i ⟨i|_in |B⟩` when its in-ports are Bell-measured against `ψ`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clifford::CliffordCircuit;
use crate::codes::CodeSpec;
use crate::error::{Error, Result};
use crate::graph::{stabilizer_to_graph, GraphStateFrame};
use crate::pauli::{Pauli1, PauliOperator, Phase};
use crate::stabilizer::{qubit_columns, BellBits, BellSource, Echelon, StabilizerState};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    In,
    Out,
    Open,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Port {
    pub role: Role,
    pub index: usize,
}

impl Port {
    pub fn new(role: Role, index: usize) -> Self {
        Port { role, index }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.role {
            Role::In => "in",
            Role::Out => "out",
            Role::Open => "open",
        };
        write!(f, "{r}.{}", self.index)
    }
}

impl FromStr for Port {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (r, i) = s
            .split_once('.')
            .ok_or_else(|| Error::Parse(format!("port `{s}` is not role.index")))?;
        let role = match r {
            "in" => Role::In,
            "out" => Role::Out,
            "open" => Role::Open,
            _ => return Err(Error::Parse(format!("unknown port role `{r}`"))),
        };
        let index = i
            .parse()
            .map_err(|_| Error::Parse(format!("bad port index in `{s}`")))?;
        Ok(Port { role, index })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encodes: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decodes: Option<String>,
    /// Stabilizer elements supported on the in-ports (in port order) whose
    /// parities form the read-in syndrome.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<PauliOperator>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub composition: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
}

impl Metadata {
    pub fn kind(kind: &str) -> Self {
        Metadata {
            kind: kind.to_string(),
            ..Default::default()
        }
    }
}

/// A stabilizer resource state with labelled ports. `state` is the state as
/// prepared; `frame` is the pending Pauli byproduct, so that the byproduct-free
/// state is `frame · state`.
#[derive(Clone, Debug)]
pub struct ResourceBlock {
    pub name: String,
    state: StabilizerState,
    ports: Vec<Port>,
    frame: PauliOperator,
    pub metadata: Metadata,
}

impl ResourceBlock {
    /// `ports[q]` names qubit `q` of `state`; qubits are reordered canonically.
    pub fn new(name: &str, state: StabilizerState, ports: Vec<Port>, metadata: Metadata) -> Result<Self> {
        let n = state.num_qubits();
        let frame = PauliOperator::identity(n);
        Self::with_frame(name, state, ports, frame, metadata)
    }

    pub fn with_frame(
        name: &str,
        state: StabilizerState,
        ports: Vec<Port>,
        frame: PauliOperator,
        metadata: Metadata,
    ) -> Result<Self> {
        let n = state.num_qubits();
        if ports.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: ports.len(),
            });
        }
        if frame.num_qubits() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: frame.num_qubits(),
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&q| ports[q]);
        let sorted: Vec<Port> = order.iter().map(|&q| ports[q]).collect();
        for role in [Role::In, Role::Out, Role::Open] {
            let idx: Vec<usize> = sorted.iter().filter(|p| p.role == role).map(|p| p.index).collect();
            if idx.iter().enumerate().any(|(k, &i)| k != i) {
                return Err(Error::Wiring(format!(
                    "{role:?} ports are not 0..k without repeats: {idx:?}"
                )));
            }
        }
        let state = state.permuted(&order)?;
        let frame = frame.restrict(&order).with_phase(Phase::PLUS);
        let block = ResourceBlock {
            name: name.to_string(),
            state,
            ports: sorted,
            frame,
            metadata,
        };
        let n_in = block.in_count();
        for c in &block.metadata.checks {
            if c.num_qubits() != n_in {
                return Err(Error::SizeMismatch {
                    expected: n_in,
                    got: c.num_qubits(),
                });
            }
            if !block.state.contains(&c.embed(n, &(0..n_in).collect::<Vec<_>>())) {
                return Err(Error::InvalidState(format!(
                    "check {c} is not a stabilizer of the block"
                )));
            }
        }
        Ok(block)
    }

    pub fn state(&self) -> &StabilizerState {
        &self.state
    }

    pub fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn frame(&self) -> &PauliOperator {
        &self.frame
    }

    fn count(&self, role: Role) -> usize {
        self.ports.iter().filter(|p| p.role == role).count()
    }

    pub fn in_count(&self) -> usize {
        self.count(Role::In)
    }

    pub fn out_count(&self) -> usize {
        self.count(Role::Out)
    }

    pub fn open_count(&self) -> usize {
        self.count(Role::Open)
    }

    /// Qubit index of a port.
    pub fn qubit(&self, port: Port) -> Option<usize> {
        self.ports.iter().position(|&p| p == port)
    }

    pub fn in_qubits(&self) -> Vec<usize> {
        (0..self.in_count()).collect()
    }

    pub fn out_qubits(&self) -> Vec<usize> {
        let a = self.in_count();
        (a..a + self.out_count()).collect()
    }

    pub fn open_qubits(&self) -> Vec<usize> {
        (self.in_count() + self.out_count()..self.num_qubits()).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.ports.iter().map(|p| p.to_string()).collect()
    }

    /// Clifford blocks use exactly `|in| + |out|` qubits.
    pub fn is_minimal(&self) -> bool {
        self.open_count() == 0 && self.num_qubits() == self.in_count() + self.out_count()
    }

    /// Byproduct-free state, `frame · state`.
    pub fn ideal_state(&self) -> StabilizerState {
        let mut s = self.state.clone();
        s.apply_pauli(&self.frame).expect("frame width");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let names = |role: Role| -> Vec<String> {
            self.ports
                .iter()
                .filter(|p| p.role == role)
                .map(|p| p.to_string())
                .collect()
        };
        serde_json::json!({
            "format": 1,
            "name": self.name,
            "n": self.num_qubits(),
            "qubits": self.labels(),
            "stabilizers": self.state.to_strings(),
            "ports": {"in": names(Role::In), "out": names(Role::Out), "open": names(Role::Open)},
            "frame": self.frame.to_string(),
            "metadata": self.metadata,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            format: u32,
            name: String,
            n: usize,
            qubits: Vec<String>,
            stabilizers: Vec<String>,
            frame: Option<String>,
            #[serde(default)]
            metadata: Metadata,
        }
        let raw: Raw = serde_json::from_value(v.clone())?;
        if raw.format != 1 {
            return Err(Error::Parse(format!("unsupported block format {}", raw.format)));
        }
        let state = StabilizerState::from_strs(&raw.stabilizers)?;
        if state.num_qubits() != raw.n {
            return Err(Error::SizeMismatch {
                expected: raw.n,
                got: state.num_qubits(),
            });
        }
        let ports = raw.qubits.iter().map(|s| s.parse()).collect::<Result<Vec<Port>>>()?;
        let frame = match raw.frame {
            Some(f) => f.parse()?,
            None => PauliOperator::identity(raw.n),
        };
        Self::with_frame(&raw.name, state, ports, frame, raw.metadata)
    }

    /// DOT rendering of the block's graph-state form.
    pub fn to_dot(&self) -> String {
        let g = stabilizer_to_graph(&self.state)
            .with_labels(self.labels())
            .expect("one label per qubit");
        let roles: HashMap<String, String> = self
            .ports
            .iter()
            .map(|p| {
                let r = match p.role {
                    Role::In => "in",
                    Role::Out => "out",
                    Role::Open => "open",
                };
                (p.to_string(), r.to_string())
            })
            .collect();
        g.to_dot(&self.name, &roles)
    }
}

/// Moves a Pauli on a subset of a state's qubits onto the remaining qubits
/// using the stabilizer group: `P_A |S⟩ ∝ Q_rest |S⟩`.
#[derive(Clone, Debug)]
pub struct Transfer {
    n: usize,
    from: Vec<usize>,
    ech: Echelon,
}

impl Transfer {
    pub fn new(state: &StabilizerState, from: &[usize]) -> Self {
        let n = state.num_qubits();
        Transfer {
            n,
            from: from.to_vec(),
            ech: Echelon::new(state.generators().to_vec(), &qubit_columns(n, from)),
        }
    }

    /// `p` acts on the state's qubits and is supported on `from`. Returns the
    /// equivalent operator (identity on `from`), or `None` if `p` anticommutes
    /// with a stabilizer element supported on `from`.
    pub fn push(&self, p: &PauliOperator) -> Option<PauliOperator> {
        debug_assert_eq!(p.num_qubits(), self.n);
        let (t, _) = self.ech.reduce(p);
        if self.from.iter().any(|&q| t.get(q) != Pauli1::I) {
            return None;
        }
        Some(t.with_phase(Phase::PLUS))
    }
}

/// Choi-type state of an isometry: each in-port `k` is maximally entangled with
/// circuit qubit `inputs[k]`, other circuit qubits start in the `ancilla`
/// eigenstate, then `circuit` acts on the circuit qubits (the out-ports).
pub fn choi_isometry(
    circuit: &CliffordCircuit,
    inputs: &[usize],
    ancilla: Pauli1,
) -> Result<(StabilizerState, Vec<Port>)> {
    let w = circuit.width();
    let k = inputs.len();
    let n = k + w;
    let mut gens = Vec::with_capacity(n);
    for (i, &q) in inputs.iter().enumerate() {
        if q >= w {
            return Err(Error::QubitOutOfRange { index: q, n: w });
        }
        for l in [Pauli1::X, Pauli1::Z] {
            let mut g = PauliOperator::single(n, i, l);
            g.set(k + q, l);
            gens.push(g);
        }
    }
    for q in (0..w).filter(|q| !inputs.contains(q)) {
        gens.push(PauliOperator::single(n, k + q, ancilla));
    }
    let mut s = StabilizerState::from_generators(gens)?;
    let mut mapped = CliffordCircuit::new(n);
    mapped.append_mapped(circuit, &(k..n).collect::<Vec<_>>())?;
    s.apply_circuit(&mapped)?;
    let ports = (0..k)
        .map(|i| Port::new(Role::In, i))
        .chain((0..w).map(|i| Port::new(Role::Out, i)))
        .collect();
    Ok((s, ports))
}

/// Choi state of a unitary Clifford circuit on `n_in` qubits.
pub fn choi_state(circuit: &CliffordCircuit, n_in: usize) -> Result<ResourceBlock> {
    if circuit.width() != n_in {
        return Err(Error::SizeMismatch {
            expected: n_in,
            got: circuit.width(),
        });
    }
    let inputs: Vec<usize> = (0..n_in).collect();
    let (s, ports) = choi_isometry(circuit, &inputs, Pauli1::Z)?;
    let mut meta = Metadata::kind("choi");
    meta.circuit = Some(circuit.to_string());
    ResourceBlock::new(&format!("choi[{circuit}]"), s, ports, meta)
}

/// `(|0⟩|0_L⟩ + |1⟩|1_L⟩)/√2` with one in-port and `M` out-ports.
pub fn encoder_block(code: &CodeSpec) -> Result<ResourceBlock> {
    let (s, ports) = choi_isometry(&code.encoder, &[code.input_qubit], code.ancilla)?;
    let mut meta = Metadata::kind("encoder");
    meta.circuit = Some(code.encoder.to_string());
    meta.encodes = Some(code.name.clone());
    ResourceBlock::new(&format!("encoder:{}", code.name), s, ports, meta)
}

/// The complex conjugate of the encoder state with the ports swapped: `M`
/// in-ports, one out-port. Identical to the encoder state for real codes.
pub fn decoder_block(code: &CodeSpec) -> Result<ResourceBlock> {
    let enc = encoder_block(code)?;
    let m = code.m;
    let ports: Vec<Port> = std::iter::once(Port::new(Role::Out, 0))
        .chain((0..m).map(|i| Port::new(Role::In, i)))
        .collect();
    let mut meta = Metadata::kind("decoder");
    meta.decodes = Some(code.name.clone());
    meta.checks = code.stabilizers.iter().map(|g| g.conjugate()).collect();
    ResourceBlock::new(&format!("decoder:{}", code.name), enc.state.conjugate(), ports, meta)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Z,
}

/// Three-qubit rotation gadget: the open qubit is measured in the basis
/// `e^{iα}|0⟩ ± e^{-iα}|1⟩` after read-in, realizing `exp(-iα·axis)` up to a
/// Pauli byproduct on the output.
#[derive(Clone, Debug)]
pub struct GadgetBlock {
    pub block: ResourceBlock,
    pub axis: Axis,
}

pub fn rotation_gadget(axis: Axis) -> GadgetBlock {
    // qubits: in.0, out.0, open.0; edges open-in and open-out
    let mut s = StabilizerState::from_strs(&["XIZ", "IXZ", "ZZX"]).expect("gadget stabilizers");
    if axis == Axis::Z {
        s.apply_circuit(&"qubits 3; h 0; h 1".parse().unwrap()).unwrap();
    }
    let mut meta = Metadata::kind("gadget");
    meta.axis = Some(axis);
    let ports = vec![
        Port::new(Role::In, 0),
        Port::new(Role::Out, 0),
        Port::new(Role::Open, 0),
    ];
    let name = match axis {
        Axis::X => "rotation:x",
        Axis::Z => "rotation:z",
    };
    GadgetBlock {
        block: ResourceBlock::new(name, s, ports, meta).expect("gadget ports"),
        axis,
    }
}

impl GadgetBlock {
    pub fn from_block(block: ResourceBlock) -> Result<Self> {
        if block.in_count() != 1 || block.out_count() != 1 || block.open_count() != 1 {
            return Err(Error::Wiring("a gadget has one in, one out and one open qubit".into()));
        }
        let axis = block
            .metadata
            .axis
            .ok_or_else(|| Error::Parse("gadget block without axis".into()))?;
        Ok(GadgetBlock { block, axis })
    }

    /// Output Pauli equivalent to flipping the open-qubit outcome: from the
    /// stabilizer element `Z_open ⊗ R_out` with trivial in-part.
    pub fn outcome_byproduct(&self) -> Pauli1 {
        let s = self.block.state();
        let elems = s.subgroup_supported_on(&[1, 2]);
        // elements are restricted to (out, open)
        let ech = Echelon::new(elems, &[1, 3]);
        let target: PauliOperator = "IZ".parse().unwrap();
        let (t, _) = ech.reduce(&target);
        debug_assert_eq!(t.get(1), Pauli1::I);
        t.get(0)
    }

    /// Open-qubit observable `cos2α X − sin2α Y` when it is a Pauli (α a multiple
    /// of π/4): the `+` basis state is its `+1` eigenstate.
    pub fn pauli_basis(alpha: f64) -> Option<PauliOperator> {
        let k = alpha / std::f64::consts::FRAC_PI_4;
        if (k - k.round()).abs() > 1e-9 {
            return None;
        }
        let s = match (k.round() as i64).rem_euclid(4) {
            0 => "X",
            1 => "-Y",
            2 => "-X",
            _ => "Y",
        };
        Some(s.parse().unwrap())
    }
}

/// Per-vertex role in a measurement pattern.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PatternRole {
    Port(Port),
    Measure(Pauli1),
}

#[derive(Clone, Debug)]
pub struct ClusterPattern {
    pub graph: GraphStateFrame,
    pub roles: HashMap<String, PatternRole>,
}

impl ClusterPattern {
    /// Parse roles like `in.0`, `out.1`, `open.0`, `X`, `Y`, `Z`.
    pub fn new(graph: GraphStateFrame, roles: &[(&str, &str)]) -> Result<Self> {
        let mut map = HashMap::new();
        for &(v, r) in roles {
            graph.index_of(v)?;
            let role = match r {
                "X" => PatternRole::Measure(Pauli1::X),
                "Y" => PatternRole::Measure(Pauli1::Y),
                "Z" => PatternRole::Measure(Pauli1::Z),
                other => PatternRole::Port(other.parse()?),
            };
            if map.insert(v.to_string(), role).is_some() {
                return Err(Error::Wiring(format!("vertex `{v}` has two roles")));
            }
        }
        Ok(ClusterPattern { graph, roles: map })
    }
}

/// Eliminate every Pauli-measured vertex with `+1` outcomes; the remaining
/// ports form the block.
pub fn reduce_cluster(pattern: &ClusterPattern) -> Result<ResourceBlock> {
    let mut g = pattern.graph.clone();
    for l in g.labels() {
        if !pattern.roles.contains_key(l) {
            return Err(Error::Wiring(format!("vertex `{l}` has no role")));
        }
    }
    let measured: Vec<(String, Pauli1)> = g
        .labels()
        .iter()
        .filter_map(|l| match pattern.roles[l] {
            PatternRole::Measure(b) => Some((l.clone(), b)),
            PatternRole::Port(_) => None,
        })
        .collect();
    for (l, basis) in &measured {
        g.measure_label(l, *basis, false)
            .map_err(|e| Error::Wiring(format!("measuring `{l}`: {e}")))?;
    }
    let ports: Vec<Port> = g
        .labels()
        .iter()
        .map(|l| match pattern.roles[l] {
            PatternRole::Port(p) => p,
            PatternRole::Measure(_) => unreachable!(),
        })
        .collect();
    let meta = Metadata::kind("cluster");
    ResourceBlock::new("cluster", g.to_stabilizer(), ports, meta)
}

struct PatternBuilder {
    edges: HashSet<(usize, usize)>,
    basis: Vec<Option<Pauli1>>,
    ins: Vec<usize>,
    current: Vec<usize>,
    /// Pending `S` (mod `Z`) on each wire.
    phase: Vec<bool>,
}

impl PatternBuilder {
    fn new(width: usize) -> Self {
        PatternBuilder {
            edges: HashSet::new(),
            basis: vec![None; width],
            ins: (0..width).collect(),
            current: (0..width).collect(),
            phase: vec![false; width],
        }
    }

    fn toggle(&mut self, a: usize, b: usize) {
        let e = (a.min(b), a.max(b));
        if !self.edges.remove(&e) {
            self.edges.insert(e);
        }
    }

    /// Measure the wire's current vertex (`Y` with a pending phase, else `X`)
    /// and continue on a fresh neighbour.
    fn step(&mut self, q: usize) {
        let v = self.current[q];
        self.basis[v] = Some(if self.phase[q] { Pauli1::Y } else { Pauli1::X });
        let u = self.basis.len();
        self.basis.push(None);
        self.toggle(v, u);
        self.current[q] = u;
        self.phase[q] = false;
    }

    /// The read-in vertex cannot carry a phase; pad with `H·H` when needed.
    fn leave_input(&mut self, q: usize) {
        if self.current[q] == self.ins[q] && self.phase[q] {
            self.phase[q] = false;
            self.step(q);
            self.step(q);
            self.phase[q] = true;
        }
    }

    fn hadamard(&mut self, q: usize) {
        self.leave_input(q);
        self.step(q);
    }

    fn finish(mut self) -> Result<ClusterPattern> {
        for q in 0..self.current.len() {
            if self.current[q] == self.ins[q] || self.phase[q] {
                self.hadamard(q);
                self.step(q);
            }
        }
        let labels: Vec<String> = (0..self.basis.len()).map(|v| format!("v{v}")).collect();
        let mut g = GraphStateFrame::new(labels.clone())?;
        let mut edges: Vec<_> = self.edges.iter().copied().collect();
        edges.sort_unstable();
        for (a, b) in edges {
            g.add_edge(&labels[a], &labels[b])?;
        }
        let mut roles = HashMap::new();
        for (v, l) in labels.iter().enumerate() {
            let role = if let Some(q) = self.ins.iter().position(|&i| i == v) {
                PatternRole::Port(Port::new(Role::In, q))
            } else if let Some(q) = self.current.iter().position(|&c| c == v) {
                PatternRole::Port(Port::new(Role::Out, q))
            } else {
                PatternRole::Measure(self.basis[v].expect("interior vertices are measured"))
            };
            roles.insert(l.clone(), role);
        }
        Ok(ClusterPattern { graph: g, roles })
    }
}

/// Cluster pattern realizing a Clifford circuit up to Pauli byproducts: one
/// wire per qubit, every edge along a wire a Hadamard, `S` phases folded into
/// `Y` measurements and `CZ` gates as edges between current wire vertices.
pub fn compile_pattern(circuit: &CliffordCircuit) -> Result<ClusterPattern> {
    use crate::clifford::Gate;
    let mut b = PatternBuilder::new(circuit.width());
    for g in circuit.gates() {
        match *g {
            Gate::H(q) => b.hadamard(q),
            Gate::S(q) | Gate::Sdg(q) => b.phase[q] = !b.phase[q],
            Gate::X(_) | Gate::Y(_) | Gate::Z(_) => {}
            Gate::Cz(x, y) => b.toggle(b.current[x], b.current[y]),
            Gate::Cnot(c, t) => {
                b.hadamard(t);
                b.toggle(b.current[c], b.current[t]);
                b.hadamard(t);
            }
        }
    }
    b.finish()
}

/// Compose `a` then `b` by Bell-measuring `a.out[i]` with `b.in[j]` for every
/// `(i, j)` in `wiring`, preferring `(0,0)` outcomes. Unwired ports survive:
/// in-ports of `a` then of `b`, out-ports of `a` then of `b`.
pub fn fuse_blocks(a: &ResourceBlock, b: &ResourceBlock, wiring: &[(usize, usize)]) -> Result<ResourceBlock> {
    let mut seen_a = HashSet::new();
    let mut seen_b = HashSet::new();
    for &(o, i) in wiring {
        if o >= a.out_count() || i >= b.in_count() {
            return Err(Error::Wiring(format!(
                "wire out.{o} -> in.{i} exceeds arities ({} out, {} in)",
                a.out_count(),
                b.in_count()
            )));
        }
        if !seen_a.insert(o) || !seen_b.insert(i) {
            return Err(Error::Wiring(format!("port reused in wire out.{o} -> in.{i}")));
        }
    }
    let na = a.num_qubits();
    let nb = b.num_qubits();
    let mut joint = a.state.tensor(&b.state);
    let frame = a.frame.tensor(&b.frame);
    // joint index of each current qubit
    let mut cur: Vec<usize> = (0..na + nb).collect();
    let mut p_in = PauliOperator::identity(nb);
    for &(o, i) in wiring {
        let qa = a.in_count() + o;
        let qb = na + i;
        let pa = cur.iter().position(|&q| q == qa).unwrap();
        let pb = cur.iter().position(|&q| q == qb).unwrap();
        let bits = joint.bell_measure(pa, pb, BellSource::Prefer(BellBits::ZERO))?;
        let mut letter = PauliOperator::single(1, 0, bits.byproduct());
        letter.mul_assign_right(&PauliOperator::single(1, 0, frame.get(qa)));
        letter.mul_assign_right(&PauliOperator::single(1, 0, frame.get(qb)));
        p_in.set(i, letter.get(0));
        cur.retain(|&q| q != qa && q != qb);
    }
    let wired_b: Vec<usize> = wiring.iter().map(|&(_, i)| i).collect();
    let q = Transfer::new(&b.state, &wired_b)
        .push(&p_in)
        .ok_or_else(|| Error::Wiring("byproduct anticommutes with the checks of the second block".into()))?;

    let mut new_frame = PauliOperator::identity(cur.len());
    let mut ports = Vec::with_capacity(cur.len());
    let a_out_left: Vec<usize> = (0..a.out_count()).filter(|o| !seen_a.contains(o)).collect();
    let b_in_left: Vec<usize> = (0..b.in_count()).filter(|i| !seen_b.contains(i)).collect();
    for (pos, &j) in cur.iter().enumerate() {
        let mut letter = PauliOperator::single(1, 0, frame.get(j));
        if j >= na {
            letter.mul_assign_right(&PauliOperator::single(1, 0, q.get(j - na)));
        }
        new_frame.set(pos, letter.get(0));
        let port = if j < na {
            let p = a.ports[j];
            match p.role {
                Role::Out => Port::new(Role::Out, a_out_left.iter().position(|&o| o == p.index).unwrap()),
                _ => p,
            }
        } else {
            let p = b.ports[j - na];
            match p.role {
                Role::In => Port::new(
                    Role::In,
                    a.in_count() + b_in_left.iter().position(|&i| i == p.index).unwrap(),
                ),
                Role::Out => Port::new(Role::Out, a_out_left.len() + p.index),
                Role::Open => Port::new(Role::Open, a.open_count() + p.index),
            }
        };
        ports.push(port);
    }
    let mut meta = Metadata::kind("fused");
    meta.composition = vec![a.name.clone(), b.name.clone()];
    meta.decodes = a.metadata.decodes.clone();
    meta.encodes = b.metadata.encodes.clone();
    let n_in = a.in_count() + b_in_left.len();
    meta.checks = a
        .metadata
        .checks
        .iter()
        .map(|c| c.embed(n_in, &(0..a.in_count()).collect::<Vec<_>>()))
        .collect();
    ResourceBlock::with_frame(&format!("({} ; {})", a.name, b.name), joint, ports, new_frame, meta)
}

/// Fuse every out-port of `a` to the in-port with the same index of `b`.
pub fn fuse_sequential(a: &ResourceBlock, b: &ResourceBlock) -> Result<ResourceBlock> {
    if a.out_count() != b.in_count() {
        return Err(Error::Wiring(format!(
            "{} out-ports cannot feed {} in-ports",
            a.out_count(),
            b.in_count()
        )));
    }
    let wiring: Vec<(usize, usize)> = (0..a.out_count()).map(|i| (i, i)).collect();
    fuse_blocks(a, b, &wiring)
}

/// Code-switching block: decode from `from`, encode into `to`.
pub fn code_switch_block(from: &CodeSpec, to: &CodeSpec) -> Result<ResourceBlock> {
    let mut b = fuse_sequential(&decoder_block(from)?, &encoder_block(to)?)?;
    b.name = format!("switch:{}:{}", from.name, to.name);
    Ok(b)
}

/// Error-correction round: decode and re-encode in the same code.
pub fn ec_block(code: &CodeSpec) -> Result<ResourceBlock> {
    let mut b = fuse_sequential(&decoder_block(code)?, &encoder_block(code)?)?;
    b.name = format!("ec:{}", code.name);
    Ok(b)
}
