//! Graph states with a local-Clifford frame.
//!
//! A [`GraphStateFrame`] represents `(⊗_v C_v)|G⟩` where `|G⟩` is stabilized by
//! `K_v = X_v ∏_{u∈N(v)} Z_u` and each `C_v` is one of the 24 single-qubit
//! Cliffords modulo phase.

use std::collections::hash_map;
use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::sync::OnceLock;

use crate::clifford::Gate;
use crate::error::{Error, Result};
use crate::pauli::{Pauli1, PauliOperator, Phase};
use crate::stabilizer::{Echelon, MeasureOutcome, StabilizerState};

/// Index into the table of single-qubit Cliffords (modulo global phase).
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct LocalClifford(u8);

struct Entry {
    x: PauliOperator,
    z: PauliOperator,
    name: String,
}

struct Table {
    entries: Vec<Entry>,
    compose: Vec<[u8; 24]>,
    inverse: Vec<u8>,
    index: HashMap<(Pauli1, u8, Pauli1, u8), u8>,
}

fn key(x: &PauliOperator, z: &PauliOperator) -> (Pauli1, u8, Pauli1, u8) {
    (x.get(0), x.phase().exponent(), z.get(0), z.phase().exponent())
}

fn image(x: &PauliOperator, z: &PauliOperator, p: Pauli1) -> PauliOperator {
    match p {
        Pauli1::I => PauliOperator::identity(1),
        Pauli1::X => x.clone(),
        Pauli1::Z => z.clone(),
        Pauli1::Y => {
            // Y = i X Z
            let mut y = x.mul(z);
            y.set_phase(y.phase() + Phase::PLUS_I);
            y
        }
    }
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut entries = vec![Entry {
            x: PauliOperator::single(1, 0, Pauli1::X),
            z: PauliOperator::single(1, 0, Pauli1::Z),
            name: "I".to_string(),
        }];
        let mut index = HashMap::new();
        index.insert(key(&entries[0].x, &entries[0].z), 0u8);
        let mut head = 0;
        while head < entries.len() {
            for (g, letter) in [(Gate::H(0), "H"), (Gate::S(0), "S")] {
                let mut x = entries[head].x.clone();
                let mut z = entries[head].z.clone();
                g.conjugate(&mut x);
                g.conjugate(&mut z);
                let k = key(&x, &z);
                if let hash_map::Entry::Vacant(slot) = index.entry(k) {
                    let name = if head == 0 {
                        letter.to_string()
                    } else {
                        format!("{}{}", entries[head].name, letter)
                    };
                    slot.insert(entries.len() as u8);
                    entries.push(Entry { x, z, name });
                }
            }
            head += 1;
        }
        assert_eq!(entries.len(), 24);
        let mut compose = vec![[0u8; 24]; 24];
        for a in 0..24 {
            for b in 0..24 {
                // a ∘ b: apply b first
                let ea = &entries[a];
                let eb = &entries[b];
                let push = |p: &PauliOperator| {
                    let mut out = image(&ea.x, &ea.z, p.get(0));
                    out.set_phase(out.phase() + p.phase());
                    out
                };
                let (x, z) = (push(&eb.x), push(&eb.z));
                compose[a][b] = index[&key(&x, &z)];
            }
        }
        let inverse = (0..24)
            .map(|a| (0..24u8).find(|&b| compose[a][b as usize] == 0).unwrap())
            .collect();
        Table {
            entries,
            compose,
            inverse,
            index,
        }
    })
}

impl LocalClifford {
    pub const IDENTITY: LocalClifford = LocalClifford(0);

    /// All 24 elements.
    pub fn all() -> impl Iterator<Item = LocalClifford> {
        (0..24u8).map(LocalClifford)
    }

    /// Element with the given images of `X` and `Z` (single-qubit operators with sign).
    pub fn from_images(x: &PauliOperator, z: &PauliOperator) -> Option<LocalClifford> {
        if x.num_qubits() != 1 || z.num_qubits() != 1 {
            return None;
        }
        table().index.get(&key(x, z)).map(|&i| LocalClifford(i))
    }

    fn from_strs(x: &str, z: &str) -> LocalClifford {
        Self::from_images(&x.parse().unwrap(), &z.parse().unwrap()).unwrap()
    }

    pub fn hadamard() -> Self {
        Self::from_strs("Z", "X")
    }

    pub fn phase_gate() -> Self {
        Self::from_strs("Y", "Z")
    }

    pub fn phase_dagger() -> Self {
        Self::from_strs("-Y", "Z")
    }

    pub fn pauli(p: Pauli1) -> Self {
        match p {
            Pauli1::I => Self::IDENTITY,
            Pauli1::X => Self::from_strs("X", "-Z"),
            Pauli1::Y => Self::from_strs("-X", "-Z"),
            Pauli1::Z => Self::from_strs("-X", "Z"),
        }
    }

    /// `exp(+iπ/4 X)`: X→X, Z→Y.
    pub fn sqrt_x_plus() -> Self {
        Self::from_strs("X", "Y")
    }

    /// `exp(-iπ/4 Z)`: X→Y, Z→Z.
    pub fn sqrt_z_minus() -> Self {
        Self::from_strs("Y", "Z")
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Gate word in application order, e.g. `"HS"` is H followed by S.
    pub fn name(self) -> &'static str {
        &table().entries[self.0 as usize].name
    }

    /// The word as gates on qubit `q`, in application order.
    pub fn gates(self, q: usize) -> Vec<Gate> {
        let name = self.name();
        if name == "I" {
            return Vec::new();
        }
        name.chars()
            .map(|c| if c == 'H' { Gate::H(q) } else { Gate::S(q) })
            .collect()
    }

    /// `self ∘ other` (other acts first).
    pub fn compose(self, other: LocalClifford) -> LocalClifford {
        LocalClifford(table().compose[self.0 as usize][other.0 as usize])
    }

    pub fn inverse(self) -> LocalClifford {
        LocalClifford(table().inverse[self.0 as usize])
    }

    /// Signed image `C P C†` of a single-qubit letter.
    pub fn image(self, p: Pauli1) -> PauliOperator {
        let e = &table().entries[self.0 as usize];
        image(&e.x, &e.z, p)
    }

    /// Conjugate qubit `q` of `p` by this Clifford.
    pub fn conjugate(self, p: &mut PauliOperator, q: usize) {
        let l = p.get(q);
        if l == Pauli1::I {
            return;
        }
        let img = self.image(l);
        p.set(q, img.get(0));
        p.set_phase(p.phase() + img.phase());
    }
}

impl fmt::Display for LocalClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Graph plus per-vertex local Clifford. Vertex labels are stable across deletions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphStateFrame {
    labels: Vec<String>,
    adj: Vec<Vec<bool>>,
    ops: Vec<LocalClifford>,
}

impl GraphStateFrame {
    /// Edgeless graph with identity frame on the given labels.
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Parse(format!("duplicate vertex label `{l}`")));
            }
        }
        let n = labels.len();
        Ok(GraphStateFrame {
            labels,
            adj: vec![vec![false; n]; n],
            ops: vec![LocalClifford::IDENTITY; n],
        })
    }

    /// Vertices labelled `"0"`, `"1"`, ... with the given edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new((0..n).map(|i| i.to_string()))?;
        for &(a, b) in edges {
            g.add_edge_index(a, b)?;
        }
        Ok(g)
    }

    fn add_edge_index(&mut self, a: usize, b: usize) -> Result<()> {
        let n = self.len();
        for v in [a, b] {
            if v >= n {
                return Err(Error::QubitOutOfRange { index: v, n });
            }
        }
        if a == b {
            return Err(Error::Parse(format!("self-loop on vertex {a}")));
        }
        self.adj[a][b] = true;
        self.adj[b][a] = true;
        Ok(())
    }

    pub fn add_edge(&mut self, a: &str, b: &str) -> Result<()> {
        let (a, b) = (self.index_of(a)?, self.index_of(b)?);
        self.add_edge_index(a, b)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    /// Edges as index pairs `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.adj[a][b])
            .collect()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&u| self.adj[v][u]).collect()
    }

    pub fn vertex_op(&self, v: usize) -> LocalClifford {
        self.ops[v]
    }

    pub fn set_vertex_op(&mut self, v: usize, op: LocalClifford) {
        self.ops[v] = op;
    }

    /// Apply a local Clifford after the current frame of `v`.
    pub fn apply_local(&mut self, v: usize, op: LocalClifford) {
        self.ops[v] = op.compose(self.ops[v]);
    }

    /// Stabilizer generators `C K_v C†` in vertex order.
    pub fn to_stabilizer(&self) -> StabilizerState {
        let n = self.len();
        let gens = (0..n)
            .map(|v| {
                let mut k = PauliOperator::single(n, v, Pauli1::X);
                for u in self.neighbors(v) {
                    k.set(u, Pauli1::Z);
                }
                for q in 0..n {
                    self.ops[q].conjugate(&mut k, q);
                }
                k
            })
            .collect();
        StabilizerState::from_generators_unchecked(gens)
    }

    /// Local complementation at `v`; the represented state is unchanged.
    pub fn local_complement(&mut self, v: usize) {
        let nb = self.neighbors(v);
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                self.adj[a][b] ^= true;
                self.adj[b][a] ^= true;
            }
        }
        // |τ_v G⟩ = exp(-iπ/4 X_v) ∏ exp(iπ/4 Z_u) |G⟩
        self.ops[v] = self.ops[v].compose(LocalClifford::sqrt_x_plus());
        for u in nb {
            self.ops[u] = self.ops[u].compose(LocalClifford::sqrt_z_minus());
        }
    }

    pub fn local_complement_label(&mut self, v: &str) -> Result<()> {
        let v = self.index_of(v)?;
        self.local_complement(v);
        Ok(())
    }

    fn remove_vertex(&mut self, v: usize) {
        self.labels.remove(v);
        self.ops.remove(v);
        self.adj.remove(v);
        for row in &mut self.adj {
            row.remove(v);
        }
    }

    /// Measure vertex `v` in a Pauli basis with outcome bit `bit` (`true` = −1)
    /// and delete it. Fails if the outcome is deterministic and `bit` contradicts it.
    pub fn measure_vertex(&mut self, v: usize, basis: Pauli1, bit: bool) -> Result<MeasureOutcome> {
        self.measure_inner(v, basis, bit, None)
    }

    /// As [`measure_vertex`](Self::measure_vertex) but with an explicit special
    /// neighbor `b` for the X rule instead of the lowest-indexed one.
    pub fn measure_vertex_via(&mut self, v: usize, basis: Pauli1, bit: bool, b: usize) -> Result<MeasureOutcome> {
        if b >= self.len() || !self.adj[v][b] {
            return Err(Error::Parse(format!("vertex {b} is not a neighbor of {v}")));
        }
        self.measure_inner(v, basis, bit, Some(b))
    }

    fn measure_inner(&mut self, v: usize, basis: Pauli1, bit: bool, choice: Option<usize>) -> Result<MeasureOutcome> {
        if v >= self.len() {
            return Err(Error::QubitOutOfRange {
                index: v,
                n: self.len(),
            });
        }
        if basis == Pauli1::I {
            return Err(Error::Parse("measurement basis must be X, Y or Z".into()));
        }
        let mut special: Option<usize> = None;
        loop {
            let pulled = self.ops[v].inverse().image(basis);
            let flip = pulled.phase() == Phase::MINUS;
            match pulled.get(0) {
                Pauli1::Z => {
                    let effective = bit ^ flip;
                    let nb = self.neighbors(v);
                    if effective {
                        for &u in &nb {
                            self.ops[u] = self.ops[u].compose(LocalClifford::pauli(Pauli1::Z));
                        }
                    }
                    self.remove_vertex(v);
                    if let Some(b) = special {
                        let b = if b > v { b - 1 } else { b };
                        self.local_complement(b);
                    }
                    return Ok(MeasureOutcome {
                        bit,
                        deterministic: false,
                    });
                }
                Pauli1::Y => self.local_complement(v),
                Pauli1::X => match choice.or_else(|| self.neighbors(v).first().copied()) {
                    Some(b) if special.is_none() => {
                        special = Some(b);
                        self.local_complement(b);
                    }
                    Some(_) => unreachable!("second X pull-back after neighbor complementation"),
                    None => {
                        // isolated |+⟩: outcome fixed by the frame sign
                        if bit != flip {
                            return Err(Error::OutcomeContradiction {
                                deterministic: if flip { -1 } else { 1 },
                            });
                        }
                        self.remove_vertex(v);
                        return Ok(MeasureOutcome {
                            bit,
                            deterministic: true,
                        });
                    }
                },
                Pauli1::I => unreachable!(),
            }
        }
    }

    pub fn measure_label(&mut self, v: &str, basis: Pauli1, bit: bool) -> Result<MeasureOutcome> {
        let v = self.index_of(v)?;
        self.measure_vertex(v, basis, bit)
    }

    /// Graph-state form of an arbitrary stabilizer state; vertex labels `"0"`, `"1"`, ...
    pub fn from_stabilizer(s: &StabilizerState) -> GraphStateFrame {
        let n = s.num_qubits();
        let mut rows: Vec<PauliOperator> = s.generators().to_vec();
        // ops applied to the state, in order; the frame is their inverse
        let mut applied: Vec<Vec<LocalClifford>> = vec![Vec::new(); n];

        let ech = Echelon::new(rows.clone(), &(0..n).collect::<Vec<_>>());
        let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(c, _)| c).collect();
        for q in (0..n).filter(|q| !pivot_cols.contains(q)) {
            for r in &mut rows {
                r.conj_h(q);
            }
            applied[q].push(LocalClifford::hadamard());
        }

        let ech = Echelon::new(rows, &(0..n).collect::<Vec<_>>());
        assert_eq!(ech.rank(), n, "X part is invertible after Hadamards");
        let mut rows: Vec<PauliOperator> = vec![PauliOperator::identity(n); n];
        for &(c, r) in &ech.pivots {
            rows[c] = ech.rows[r].clone();
        }

        for q in 0..n {
            if rows[q].get(q) == Pauli1::Y {
                for r in &mut rows {
                    r.conj_sdg(q);
                }
                applied[q].push(LocalClifford::phase_dagger());
            }
        }
        for q in 0..n {
            if rows[q].phase() == Phase::MINUS {
                for r in &mut rows {
                    r.conj_z(q);
                }
                applied[q].push(LocalClifford::pauli(Pauli1::Z));
            }
        }

        let mut g = GraphStateFrame::from_edges(n, &[]).expect("fresh labels");
        for (a, row) in rows.iter().enumerate() {
            for b in a + 1..n {
                if row.get(b) == Pauli1::Z {
                    g.adj[a][b] = true;
                    g.adj[b][a] = true;
                }
            }
        }
        for (q, ops) in applied.iter().enumerate() {
            let mut frame = LocalClifford::IDENTITY;
            for op in ops {
                // ψ = O_1† ... O_k† G: the last applied op is undone first
                frame = frame.compose(op.inverse());
            }
            g.ops[q] = frame;
        }
        g
    }

    pub fn with_labels<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                got: labels.len(),
            });
        }
        let fresh = GraphStateFrame::new(labels)?;
        self.labels = fresh.labels;
        Ok(self)
    }

    /// DOT rendering; `roles` maps a label to a port role shown in the node label.
    pub fn to_dot(&self, name: &str, roles: &HashMap<String, String>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph \"{name}\" {{");
        for (v, l) in self.labels.iter().enumerate() {
            let role = roles.get(l).map(String::as_str).unwrap_or("");
            let shape = match role {
                "in" => "box",
                "out" => "doublecircle",
                "open" => "diamond",
                _ => "circle",
            };
            let _ = writeln!(
                out,
                "  \"{l}\" [label=\"{l}\\n{}\" shape={shape} role=\"{role}\"];",
                self.ops[v]
            );
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  \"{}\" -- \"{}\";", self.labels[a], self.labels[b]);
        }
        out.push_str("}\n");
        out
    }
}

/// Convenience wrappers mirroring the stabilizer API.
pub fn graph_to_stabilizer(g: &GraphStateFrame) -> StabilizerState {
    g.to_stabilizer()
}

pub fn stabilizer_to_graph(s: &StabilizerState) -> GraphStateFrame {
    GraphStateFrame::from_stabilizer(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::{states_equal, OutcomeSource};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph<R: Rng>(n: usize, rng: &mut R) -> GraphStateFrame {
        let mut g = GraphStateFrame::from_edges(n, &[]).unwrap();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.5) {
                    g.add_edge_index(a, b).unwrap();
                }
            }
            g.ops[a] = LocalClifford(rng.gen_range(0..24));
        }
        g
    }

    #[test]
    fn table_is_a_group() {
        let all: Vec<_> = LocalClifford::all().collect();
        for &a in &all {
            assert_eq!(a.compose(a.inverse()), LocalClifford::IDENTITY);
            for &b in &all {
                for &c in &all {
                    assert_eq!(a.compose(b).compose(c), a.compose(b.compose(c)));
                }
            }
        }
    }

    #[test]
    fn gate_words_match_images() {
        for c in LocalClifford::all() {
            for p in Pauli1::NON_IDENTITY {
                let mut op = PauliOperator::single(1, 0, p);
                for g in c.gates(0) {
                    g.conjugate(&mut op);
                }
                assert_eq!(op, c.image(p), "{c} on {p:?}");
            }
        }
    }

    #[test]
    fn basic_graph_states() {
        let one = GraphStateFrame::from_edges(1, &[]).unwrap();
        assert!(states_equal(&one.to_stabilizer(), &StabilizerState::from_strs(&["X"]).unwrap()).unwrap());
        let two = GraphStateFrame::from_edges(2, &[(0, 1)]).unwrap();
        assert!(states_equal(
            &two.to_stabilizer(),
            &StabilizerState::from_strs(&["XZ", "ZX"]).unwrap()
        )
        .unwrap());
        let ring = GraphStateFrame::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let expect = StabilizerState::from_strs(&["XZIIZ", "ZXZII", "IZXZI", "IIZXZ", "ZIIZX"]).unwrap();
        assert!(states_equal(&ring.to_stabilizer(), &expect).unwrap());
    }

    #[test]
    fn triangle_local_complement() {
        let mut g = GraphStateFrame::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let before = g.to_stabilizer();
        g.local_complement(0);
        assert_eq!(g.edges(), vec![(0, 1), (0, 2)]);
        assert!(states_equal(&before, &g.to_stabilizer()).unwrap());
        g.local_complement(0);
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn local_complement_preserves_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..=8);
            let mut g = random_graph(n, &mut rng);
            let before = g.to_stabilizer();
            g.local_complement(rng.gen_range(0..n));
            assert!(states_equal(&before, &g.to_stabilizer()).unwrap());
        }
    }

    #[test]
    fn leaf_z_measurement() {
        let mut g = GraphStateFrame::from_edges(2, &[(0, 1)]).unwrap();
        g.measure_vertex(1, Pauli1::Z, false).unwrap();
        assert_eq!(g.labels(), &["0".to_string()]);
        assert_eq!(g.vertex_op(0), LocalClifford::IDENTITY);
    }

    #[test]
    fn measurement_matches_tableau() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = rng.gen_range(1..=7);
            let g = random_graph(n, &mut rng);
            let v = rng.gen_range(0..n);
            let s = g.to_stabilizer();
            for basis in Pauli1::NON_IDENTITY {
                for bit in [false, true] {
                    let mut obs = PauliOperator::identity(n);
                    obs.set(v, basis);
                    let tab = s.measure_pauli(&obs, OutcomeSource::Forced(bit));
                    let mut h = g.clone();
                    let gr = h.measure_vertex(v, basis, bit);
                    assert_eq!(tab.is_ok(), gr.is_ok());
                    if let (Ok((to, mut post)), Ok(go)) = (tab, gr) {
                        assert_eq!(to.deterministic, go.deterministic);
                        post.remove_qubits(&[v]).unwrap();
                        assert!(states_equal(&post, &h.to_stabilizer()).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn x_rule_independent_of_neighbor() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.gen_range(2..=7);
            let g = random_graph(n, &mut rng);
            let v = rng.gen_range(0..n);
            let nb = g.neighbors(v);
            for bit in [false, true] {
                let mut first = g.clone();
                if first.measure_vertex(v, Pauli1::X, bit).is_err() {
                    continue;
                }
                for &b in &nb {
                    let mut other = g.clone();
                    other.measure_vertex_via(v, Pauli1::X, bit, b).unwrap();
                    assert!(states_equal(&first.to_stabilizer(), &other.to_stabilizer()).unwrap());
                }
            }
        }
    }

    #[test]
    fn y_measuring_chain_interior() {
        let mut g = GraphStateFrame::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let mut s = g.to_stabilizer();
        for label in ["1", "3"] {
            let v = g.index_of(label).unwrap();
            let mut obs = PauliOperator::identity(g.len());
            obs.set(v, Pauli1::Y);
            s.measure(&obs, OutcomeSource::Forced(false)).unwrap();
            s.remove_qubits(&[v]).unwrap();
            g.measure_vertex(v, Pauli1::Y, false).unwrap();
        }
        assert_eq!(g.labels(), &["0", "2", "4"]);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert!(states_equal(&s, &g.to_stabilizer()).unwrap());
    }

    #[test]
    fn stabilizer_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let n = rng.gen_range(1..=8);
            let s = StabilizerState::random(n, &mut rng);
            let g = stabilizer_to_graph(&s);
            assert!(states_equal(&s, &graph_to_stabilizer(&g)).unwrap());
        }
    }

    #[test]
    fn bell_pair_is_an_edge() {
        let phi = StabilizerState::from_strs(&["XX", "ZZ"]).unwrap();
        let g = stabilizer_to_graph(&phi);
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn dot_output() {
        let g = GraphStateFrame::from_edges(2, &[(0, 1)]).unwrap();
        let mut roles = HashMap::new();
        roles.insert("0".to_string(), "in".to_string());
        let dot = g.to_dot("pair", &roles);
        assert!(dot.contains("\"0\" -- \"1\""));
        assert!(dot.contains("shape=box"));
    }

    #[test]
    fn unknown_vertex() {
        let mut g = GraphStateFrame::from_edges(2, &[]).unwrap();
        assert!(matches!(g.local_complement_label("q"), Err(Error::UnknownVertex(_))));
    }
}
