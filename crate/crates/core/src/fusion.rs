//! Runtime engine: blocks are consumed one after another by Bell-measuring
//! live qubits against their in-ports, with byproducts tracked in a Pauli
//! frame and syndromes read off the Bell outcomes.
//!
//! Live qubit order after a step: unconsumed live qubits (in their previous
//! order), then the block's out-ports.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordCircuit;
use crate::codes::{get_code, LogicalClass};
use crate::dense::DenseState;
use crate::error::{Error, Result};
use crate::noise::{sample_ldn, NoiseSpec};
use crate::pauli::{Pauli1, PauliOperator, Phase};
use crate::stabilizer::{BellBits, BellSource, OutcomeSource, StabilizerState};
use crate::synth::{
    choi_state, code_switch_block, decoder_block, ec_block, encoder_block, rotation_gadget, Axis, GadgetBlock,
    ResourceBlock, Transfer,
};

pub(crate) fn letter_mul(a: Pauli1, b: Pauli1) -> Pauli1 {
    let (ax, az) = a.bits();
    let (bx, bz) = b.bits();
    Pauli1::from_bits(ax ^ bx, az ^ bz)
}

/// How the next measurement outcome is chosen. Bell outcomes are indexed
/// `2·sx + sz`; single-qubit outcomes `0` (`+`) and `1` (`−`).
pub enum Choice<'a> {
    Random(&'a mut dyn RngCore),
    Forced(u8),
    Prefer(u8),
}

fn bell_bits(index: u8) -> BellBits {
    BellBits::new(index & 2 != 0, index & 1 != 0)
}

/// State storage used by the runner.
pub trait Backend: Clone {
    fn num_qubits(&self) -> usize;
    fn adjoin(&mut self, block: &StabilizerState) -> Result<()>;
    /// Bell-measure `a` with `b`, removing both.
    fn bell_measure(&mut self, a: usize, b: usize, choice: Choice<'_>) -> Result<BellBits>;
    /// Measure `q` in `e^{iα}|0⟩ ± e^{-iα}|1⟩`, removing it; `true` for `−`.
    fn measure_open(&mut self, q: usize, alpha: f64, choice: Choice<'_>) -> Result<bool>;
    fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()>;
}

impl Backend for StabilizerState {
    fn num_qubits(&self) -> usize {
        StabilizerState::num_qubits(self)
    }

    fn adjoin(&mut self, block: &StabilizerState) -> Result<()> {
        *self = self.tensor(block);
        Ok(())
    }

    fn bell_measure(&mut self, a: usize, b: usize, choice: Choice<'_>) -> Result<BellBits> {
        let src = match choice {
            Choice::Random(r) => BellSource::Random(r),
            Choice::Forced(i) => BellSource::Forced(bell_bits(i)),
            Choice::Prefer(i) => BellSource::Prefer(bell_bits(i)),
        };
        StabilizerState::bell_measure(self, a, b, src)
    }

    fn measure_open(&mut self, q: usize, alpha: f64, choice: Choice<'_>) -> Result<bool> {
        let n = StabilizerState::num_qubits(self);
        let obs = GadgetBlock::pauli_basis(alpha).ok_or_else(|| {
            Error::Infeasible(format!(
                "angle {alpha} is not a multiple of pi/4 on the tableau backend"
            ))
        })?;
        let obs = obs.embed(n, &[q]);
        let src = match choice {
            Choice::Random(r) => OutcomeSource::Random(r),
            Choice::Forced(i) => OutcomeSource::Forced(i == 1),
            Choice::Prefer(i) => OutcomeSource::Prefer(i == 1),
        };
        let out = self.measure(&obs, src)?;
        self.remove_qubits(&[q])?;
        Ok(out.bit)
    }

    fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        StabilizerState::apply_pauli(self, p)
    }
}

fn sample_index(probs: &[f64], rng: &mut dyn RngCore) -> u8 {
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i as u8;
        }
        u -= p;
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u8
}

const DENSE_EPS: f64 = 1e-12;

impl DenseState {
    fn branch<F>(&mut self, arity: u8, choice: Choice<'_>, project: F) -> Result<u8>
    where
        F: Fn(&mut DenseState, u8) -> Result<f64>,
    {
        let prob = |s: &DenseState, i: u8| -> f64 {
            let mut t = s.clone();
            project(&mut t, i).unwrap_or(0.0)
        };
        let index = match choice {
            Choice::Forced(i) => i,
            Choice::Prefer(i) => {
                if prob(self, i) > DENSE_EPS {
                    i
                } else {
                    (0..arity)
                        .find(|&j| prob(self, j) > DENSE_EPS)
                        .ok_or(Error::ImpossibleOutcome)?
                }
            }
            Choice::Random(r) => {
                let probs: Vec<f64> = (0..arity).map(|i| prob(self, i)).collect();
                sample_index(&probs, r)
            }
        };
        let p = project(self, index)?;
        if p < DENSE_EPS {
            return Err(Error::ImpossibleOutcome);
        }
        Ok(index)
    }
}

impl Backend for DenseState {
    fn num_qubits(&self) -> usize {
        DenseState::num_qubits(self)
    }

    fn adjoin(&mut self, block: &StabilizerState) -> Result<()> {
        *self = self.tensor(&DenseState::from_stabilizer(block)?)?;
        Ok(())
    }

    fn bell_measure(&mut self, a: usize, b: usize, choice: Choice<'_>) -> Result<BellBits> {
        let i = self.branch(4, choice, |s, i| s.bell_project(a, b, bell_bits(i)))?;
        Ok(bell_bits(i))
    }

    fn measure_open(&mut self, q: usize, alpha: f64, choice: Choice<'_>) -> Result<bool> {
        let i = self.branch(2, choice, |s, i| s.measure_angle(q, alpha, i == 1))?;
        Ok(i == 1)
    }

    fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        DenseState::apply_pauli(self, p)
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    /// Frame kept classically and applied once at the end.
    #[default]
    Deferred,
    /// Frame applied to the state after every step.
    Stepwise,
}

#[derive(Clone, Debug)]
pub enum OutcomeMode {
    Random,
    /// Outcome `0` wherever the outcome is random (reference run).
    Preferred,
    /// Explicit outcome indices, one per measurement event.
    Script(Vec<u8>),
}

/// Pending byproducts over the live qubits and the per-step Bell outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliFrame {
    pub pending: PauliOperator,
    pub history: Vec<Vec<BellBits>>,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        PauliFrame {
            pending: PauliOperator::identity(n),
            history: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyndromeRecord {
    pub step: usize,
    pub code: String,
    pub syndrome: Vec<u8>,
    pub correction: PauliOperator,
    /// Whether the known error left a logical fault; simulation only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<bool>,
}

/// Operator transferred onto the in-ports by the read-in: byproduct times
/// the live frame times the block's own frame, letter by letter.
pub fn readin_operator(bits: &[BellBits], live_frame: &[Pauli1], block_frame: &[Pauli1]) -> PauliOperator {
    let letters: Vec<Pauli1> = bits
        .iter()
        .zip(live_frame)
        .zip(block_frame)
        .map(|((b, &f), &g)| letter_mul(letter_mul(b.byproduct(), f), g))
        .collect();
    PauliOperator::from_letters(&letters)
}

/// Syndrome of the read-in operator against the block's checks and the decoded
/// correction (on the in-ports). `None` for blocks without checks.
pub fn extract_syndrome(step: usize, p_in: &PauliOperator, block: &ResourceBlock) -> Result<Option<SyndromeRecord>> {
    let checks = &block.metadata.checks;
    if checks.is_empty() {
        return Ok(None);
    }
    let name = block
        .metadata
        .decodes
        .as_ref()
        .ok_or_else(|| Error::Wiring(format!("block `{}` has checks but decodes no code", block.name)))?;
    let code = get_code(name)?;
    let n_in = block.in_count();
    if code.m > n_in {
        return Err(Error::SizeMismatch {
            expected: code.m,
            got: n_in,
        });
    }
    let syndrome: Vec<u8> = checks.iter().map(|c| (!c.commutes_with(p_in)) as u8).collect();
    let c = code.decode(&syndrome)?;
    Ok(Some(SyndromeRecord {
        step,
        code: name.clone(),
        syndrome,
        correction: c.embed(n_in, &(0..code.m).collect::<Vec<_>>()),
        failure: None,
    }))
}

#[derive(Clone, Debug)]
pub enum StepBlock {
    Block(Arc<ResourceBlock>),
    Gadget { gadget: Arc<GadgetBlock>, alpha: f64 },
}

impl StepBlock {
    pub fn block(&self) -> &ResourceBlock {
        match self {
            StepBlock::Block(b) => b,
            StepBlock::Gadget { gadget, .. } => &gadget.block,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Step {
    pub block: StepBlock,
    /// `wiring[k]` is the live qubit read into in-port `k`.
    pub wiring: Vec<usize>,
    /// Known error applied to the live qubits before the step.
    pub inject: Option<PauliOperator>,
    pub noisy: bool,
}

#[derive(Clone, Debug)]
pub struct PipelineSpec {
    pub initial: StabilizerState,
    pub steps: Vec<Step>,
    pub correction: Correction,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub block: String,
    pub bell: Vec<BellBits>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub open: Option<OpenRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub syndrome: Option<SyndromeRecord>,
    pub frame: PauliOperator,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct OpenRecord {
    pub alpha: f64,
    pub minus: bool,
}

/// Resolve a named block: `encoder:<code>`, `decoder:<code>`, `ec:<code>`,
/// `switch:<a>:<b>`, `choi:<circuit>`, `rotation:x`, `rotation:z`.
pub fn resolve_block(name: &str) -> Result<ResourceBlock> {
    let (kind, rest) = name.split_once(':').unwrap_or((name, ""));
    match kind {
        "encoder" => encoder_block(get_code(rest)?),
        "decoder" => decoder_block(get_code(rest)?),
        "ec" => ec_block(get_code(rest)?),
        "switch" => {
            let (a, b) = rest
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("switch block `{name}` needs two codes")))?;
            code_switch_block(get_code(a)?, get_code(b)?)
        }
        "choi" => {
            let circ = match CliffordCircuit::named(rest) {
                Some(c) => c,
                None => rest.parse()?,
            };
            choi_state(&circ, circ.width())
        }
        "rotation" => match rest {
            "x" => Ok(rotation_gadget(Axis::X).block),
            "z" => Ok(rotation_gadget(Axis::Z).block),
            _ => Err(Error::Parse(format!("unknown rotation axis `{rest}`"))),
        },
        _ => Err(Error::Parse(format!("unknown block `{name}`"))),
    }
}

impl PipelineSpec {
    pub fn new(initial: StabilizerState) -> Self {
        PipelineSpec {
            initial,
            steps: Vec::new(),
            correction: Correction::Deferred,
        }
    }

    pub fn push_block(&mut self, block: ResourceBlock, wiring: Vec<usize>) -> &mut Step {
        self.steps.push(Step {
            block: StepBlock::Block(Arc::new(block)),
            wiring,
            inject: None,
            noisy: false,
        });
        self.steps.last_mut().unwrap()
    }

    pub fn push_gadget(&mut self, gadget: GadgetBlock, alpha: f64, wiring: Vec<usize>) -> &mut Step {
        self.steps.push(Step {
            block: StepBlock::Gadget {
                gadget: Arc::new(gadget),
                alpha,
            },
            wiring,
            inject: None,
            noisy: false,
        });
        self.steps.last_mut().unwrap()
    }

    /// Parse the JSON pipeline format. Step blocks are names or inline block
    /// objects; `file` references are resolved against `base` when given.
    pub fn from_json(v: &serde_json::Value, base: Option<&Path>) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct RawStep {
            block: Option<serde_json::Value>,
            file: Option<String>,
            wiring: Vec<usize>,
            alpha: Option<f64>,
            inject: Option<String>,
            #[serde(default)]
            noisy: bool,
        }
        #[derive(Deserialize)]
        struct Raw {
            format: u32,
            initial: serde_json::Value,
            steps: Vec<RawStep>,
            #[serde(default)]
            correction: Correction,
        }
        let raw: Raw = serde_json::from_value(v.clone())?;
        if raw.format != 1 {
            return Err(Error::Parse(format!("unsupported pipeline format {}", raw.format)));
        }
        let initial = parse_initial(&raw.initial)?;
        let mut spec = PipelineSpec::new(initial);
        spec.correction = raw.correction;
        for (k, s) in raw.steps.into_iter().enumerate() {
            let parsed = (|| -> Result<Step> {
                let block = match (s.block, s.file) {
                    (Some(serde_json::Value::String(name)), None) => resolve_block(&name)?,
                    (Some(obj @ serde_json::Value::Object(_)), None) => ResourceBlock::from_json(&obj)?,
                    (None, Some(file)) => {
                        let path = match base {
                            Some(b) => b.join(&file),
                            None => file.into(),
                        };
                        let text = std::fs::read_to_string(&path)
                            .map_err(|e| Error::Parse(format!("reading {}: {e}", path.display())))?;
                        ResourceBlock::from_json(&serde_json::from_str(&text)?)?
                    }
                    _ => return Err(Error::Parse("a step needs exactly one of `block` or `file`".into())),
                };
                let block = if block.metadata.kind == "gadget" {
                    let alpha = s
                        .alpha
                        .ok_or_else(|| Error::Parse("gadget step without `alpha`".into()))?;
                    StepBlock::Gadget {
                        gadget: Arc::new(GadgetBlock::from_block(block)?),
                        alpha,
                    }
                } else {
                    if s.alpha.is_some() {
                        return Err(Error::Parse("`alpha` given for a non-gadget block".into()));
                    }
                    StepBlock::Block(Arc::new(block))
                };
                let inject = s.inject.map(|p| p.parse()).transpose()?;
                Ok(Step {
                    block,
                    wiring: s.wiring,
                    inject,
                    noisy: s.noisy,
                })
            })();
            spec.steps.push(parsed.map_err(|e| e.at_step(k))?);
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Check arities and wiring against the live-qubit count at every step.
    pub fn validate(&self) -> Result<()> {
        let mut live = self.initial.num_qubits();
        for (k, s) in self.steps.iter().enumerate() {
            let b = s.block.block();
            let check = || -> Result<()> {
                if let Some(p) = &s.inject {
                    if p.num_qubits() != live {
                        return Err(Error::SizeMismatch {
                            expected: live,
                            got: p.num_qubits(),
                        });
                    }
                }
                if s.wiring.len() != b.in_count() {
                    return Err(Error::Wiring(format!(
                        "block `{}` has {} in-ports but {} wires",
                        b.name,
                        b.in_count(),
                        s.wiring.len()
                    )));
                }
                let mut seen = vec![false; live];
                for &w in &s.wiring {
                    if w >= live {
                        return Err(Error::Wiring(format!("live qubit {w} does not exist ({live} live)")));
                    }
                    if std::mem::replace(&mut seen[w], true) {
                        return Err(Error::Wiring(format!("live qubit {w} wired twice")));
                    }
                }
                Ok(())
            };
            check().map_err(|e| e.at_step(k))?;
            live = live - b.in_count() + b.out_count();
        }
        Ok(())
    }
}

fn parse_initial(v: &serde_json::Value) -> Result<StabilizerState> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        code: Option<String>,
        logical: Option<String>,
        stabilizers: Option<Vec<String>>,
    }
    let raw: Raw = serde_json::from_value(v.clone())?;
    match (raw.code, raw.logical, raw.stabilizers) {
        (None, None, Some(s)) => StabilizerState::from_strs(&s),
        (Some(code), Some(logical), None) => {
            let code = get_code(&code)?;
            if logical == "bell" {
                return Ok(code.logical_bell_state());
            }
            let p: PauliOperator = logical.parse()?;
            if p.num_qubits() != 1 || p.is_identity() {
                return Err(Error::Parse(format!("logical state `{logical}` is not ±X, ±Y or ±Z")));
            }
            code.logical_eigenstate(p.get(0), p.sign().unwrap_or(1))
        }
        _ => Err(Error::Parse(
            "initial needs either `stabilizers` or `code` with `logical`".into(),
        )),
    }
}

/// Outcome of a run: final (uncorrected) state, frame, known error and records.
#[derive(Clone, Debug)]
pub struct RunResult<B> {
    pub state: B,
    pub frame: PauliFrame,
    /// Product of all injected and sampled errors, carried to the live qubits.
    pub known_error: PauliOperator,
    pub steps: Vec<StepRecord>,
}

impl<B: Backend> RunResult<B> {
    /// State with the pending frame applied.
    pub fn corrected(&self) -> Result<B> {
        let mut s = self.state.clone();
        s.apply_pauli(&self.frame.pending)?;
        Ok(s)
    }

    pub fn syndromes(&self) -> Vec<&SyndromeRecord> {
        self.steps.iter().filter_map(|s| s.syndrome.as_ref()).collect()
    }
}

impl RunResult<StabilizerState> {
    /// One JSON object per line: each step, then the final state.
    pub fn transcript(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s).expect("record serializes"));
            out.push('\n');
        }
        let last = serde_json::json!({
            "final": self.state.to_strings(),
            "frame": self.frame.pending.to_string(),
        });
        out.push_str(&last.to_string());
        out.push('\n');
        out
    }
}

/// Executes steps on a backend.
pub struct Runner<B: Backend> {
    state: B,
    frame: PauliFrame,
    known: PauliOperator,
    rng: ChaCha8Rng,
    mode: OutcomeMode,
    cursor: usize,
    noise: Option<NoiseSpec>,
    correction: Correction,
    steps: Vec<StepRecord>,
}

fn next_choice<'a>(mode: &OutcomeMode, cursor: &mut usize, rng: &'a mut ChaCha8Rng) -> Result<Choice<'a>> {
    Ok(match mode {
        OutcomeMode::Random => Choice::Random(rng),
        OutcomeMode::Preferred => Choice::Prefer(0),
        OutcomeMode::Script(s) => {
            let i = *s
                .get(*cursor)
                .ok_or_else(|| Error::InvalidState("outcome script exhausted".into()))?;
            *cursor += 1;
            Choice::Forced(i)
        }
    })
}

impl<B: Backend> Runner<B> {
    pub fn new(state: B, mode: OutcomeMode, seed: u64) -> Self {
        let n = state.num_qubits();
        Runner {
            state,
            frame: PauliFrame::new(n),
            known: PauliOperator::identity(n),
            rng: ChaCha8Rng::seed_from_u64(seed),
            mode,
            cursor: 0,
            noise: None,
            correction: Correction::Deferred,
            steps: Vec::new(),
        }
    }

    pub fn with_rng(mut self, rng: ChaCha8Rng) -> Self {
        self.rng = rng;
        self
    }

    pub fn with_noise(mut self, noise: Option<NoiseSpec>) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_correction(mut self, c: Correction) -> Self {
        self.correction = c;
        self
    }

    pub fn live(&self) -> usize {
        self.state.num_qubits()
    }

    fn apply_known(&mut self, q: usize, l: Pauli1) -> Result<()> {
        if l == Pauli1::I {
            return Ok(());
        }
        let n = self.state.num_qubits();
        self.state.apply_pauli(&PauliOperator::single(n, q, l))?;
        self.known.set(q, letter_mul(self.known.get(q), l));
        Ok(())
    }

    pub fn inject(&mut self, p: &PauliOperator) -> Result<()> {
        if p.num_qubits() != self.live() {
            return Err(Error::SizeMismatch {
                expected: self.live(),
                got: p.num_qubits(),
            });
        }
        for q in p.support() {
            self.apply_known(q, p.get(q))?;
        }
        Ok(())
    }

    fn sample(&mut self, p: f64) -> Result<Pauli1> {
        Ok(sample_ldn(p, 1, &mut self.rng)?.get(0))
    }

    pub fn step(&mut self, index: usize, step: &Step) -> Result<()> {
        self.step_inner(index, step).map_err(|e| e.at_step(index))
    }

    fn step_inner(&mut self, index: usize, step: &Step) -> Result<()> {
        let block = step.block.block();
        let l = self.live();
        let nb = block.num_qubits();
        let n_in = block.in_count();
        if let Some(p) = &step.inject {
            self.inject(p)?;
        }
        if step.wiring.len() != n_in {
            return Err(Error::Wiring(format!(
                "block `{}` has {n_in} in-ports but {} wires",
                block.name,
                step.wiring.len()
            )));
        }
        for (k, &w) in step.wiring.iter().enumerate() {
            if w >= l || step.wiring[..k].contains(&w) {
                return Err(Error::Wiring(format!("bad live qubit {w} in wiring ({l} live)")));
            }
        }
        let gadget = match &step.block {
            StepBlock::Gadget { gadget, alpha } => Some((gadget.outcome_byproduct(), *alpha)),
            StepBlock::Block(_) => None,
        };
        let noise = if step.noisy { self.noise } else { None };
        if noise.is_some() && gadget.is_some() {
            return Err(Error::Infeasible("noisy gadget steps are not supported".into()));
        }
        if let Some(nz) = noise {
            for &w in &step.wiring {
                let e = letter_mul(self.sample(nz.p)?, self.sample(nz.q)?);
                self.apply_known(w, e)?;
            }
        }
        self.state.adjoin(block.state())?;
        self.known = self.known.tensor(&PauliOperator::identity(nb));
        if let Some(nz) = noise {
            for k in 0..n_in {
                let e = self.sample(nz.p)?;
                self.apply_known(l + k, e)?;
            }
        }

        let mut cur: Vec<usize> = (0..l + nb).collect();
        let mut bits = Vec::with_capacity(n_in);
        let mut live_letters = Vec::with_capacity(n_in);
        let mut e_in = PauliOperator::identity(nb);
        for (k, &w) in step.wiring.iter().enumerate() {
            let a = cur.iter().position(|&q| q == w).unwrap();
            let b = cur.iter().position(|&q| q == l + k).unwrap();
            let choice = next_choice(&self.mode, &mut self.cursor, &mut self.rng)?;
            bits.push(self.state.bell_measure(a, b, choice)?);
            live_letters.push(self.frame.pending.get(w));
            e_in.set(k, letter_mul(self.known.get(w), self.known.get(l + k)));
            cur.retain(|&q| q != w && q != l + k);
        }
        let block_letters: Vec<Pauli1> = (0..n_in).map(|k| block.frame().get(k)).collect();
        let mut p_in = readin_operator(&bits, &live_letters, &block_letters).embed(nb, &(0..n_in).collect::<Vec<_>>());

        let mut syndrome = extract_syndrome(index, &p_in.restrict(&(0..n_in).collect::<Vec<_>>()), block)?;
        if let Some(rec) = &mut syndrome {
            let c = rec.correction.embed(nb, &(0..n_in).collect::<Vec<_>>());
            p_in.mul_assign_right(&c);
            e_in.mul_assign_right(&c);
            let code = get_code(&rec.code)?;
            let residual = e_in.restrict(&(0..code.m).collect::<Vec<_>>());
            rec.failure = Some(code.classify(&residual) != LogicalClass::Identity);
        }
        let transfer = Transfer::new(block.state(), &(0..n_in).collect::<Vec<_>>());
        let q = transfer.push(&p_in).ok_or_else(|| {
            Error::Wiring(format!(
                "read-in byproduct on `{}` anticommutes with an in-port check",
                block.name
            ))
        })?;
        let qe = transfer
            .push(&e_in)
            .ok_or_else(|| Error::InvalidState("known error left a nonzero syndrome".into()))?;

        // frame and known error on the block's surviving qubits
        let mut bf = Vec::with_capacity(nb - n_in);
        let mut be = Vec::with_capacity(nb - n_in);
        for j in n_in..nb {
            bf.push(letter_mul(q.get(j), block.frame().get(j)));
            be.push(letter_mul(qe.get(j), self.known.get(l + j)));
        }
        let mut open = None;
        if let Some((r, alpha)) = gadget {
            let o = nb - 1 - n_in;
            if be[o] != Pauli1::I {
                return Err(Error::Infeasible("known error on a gadget's open qubit".into()));
            }
            let (qx, qz) = bf[o].bits();
            let used = if qx { -alpha } else { alpha };
            let pos = cur.iter().position(|&x| x == l + nb - 1).unwrap();
            let choice = next_choice(&self.mode, &mut self.cursor, &mut self.rng)?;
            let minus = self.state.measure_open(pos, used, choice)?;
            cur.pop();
            bf.pop();
            be.pop();
            if minus ^ qz {
                for f in bf.iter_mut() {
                    *f = letter_mul(*f, r);
                }
            }
            open = Some(OpenRecord { alpha: used, minus });
        }
        let kept: Vec<usize> = (0..l).filter(|q| !step.wiring.contains(q)).collect();
        let mut frame: Vec<Pauli1> = kept.iter().map(|&q| self.frame.pending.get(q)).collect();
        let mut known: Vec<Pauli1> = kept.iter().map(|&q| self.known.get(q)).collect();
        frame.extend(bf);
        known.extend(be);
        self.frame.pending = PauliOperator::from_letters(&frame);
        self.known = PauliOperator::from_letters(&known);
        debug_assert_eq!(self.frame.pending.num_qubits(), self.state.num_qubits());
        self.frame.history.push(bits.clone());
        if self.correction == Correction::Stepwise {
            self.state.apply_pauli(&self.frame.pending)?;
            self.frame.pending = PauliOperator::identity(self.state.num_qubits());
        }
        self.steps.push(StepRecord {
            step: index,
            block: block.name.clone(),
            bell: bits,
            open,
            syndrome,
            frame: self.frame.pending.clone().with_phase(Phase::PLUS),
        });
        Ok(())
    }

    pub fn run(mut self, steps: &[Step]) -> Result<RunResult<B>> {
        for (k, s) in steps.iter().enumerate() {
            self.step(k, s)?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> RunResult<B> {
        RunResult {
            state: self.state,
            frame: self.frame,
            known_error: self.known,
            steps: self.steps,
        }
    }
}

/// Run a pipeline on the tableau backend with random outcomes from `seed`.
pub fn run_pipeline(spec: &PipelineSpec, seed: u64) -> Result<RunResult<StabilizerState>> {
    Runner::new(spec.initial.clone(), OutcomeMode::Random, seed)
        .with_correction(spec.correction)
        .run(&spec.steps)
}

/// Noiseless run taking outcome `0` wherever allowed; injected errors are kept.
pub fn run_reference(spec: &PipelineSpec) -> Result<RunResult<StabilizerState>> {
    Runner::new(spec.initial.clone(), OutcomeMode::Preferred, 0)
        .with_correction(spec.correction)
        .run(&spec.steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::get_code;
    use crate::stabilizer::states_equal;

    fn eigenstates() -> Vec<StabilizerState> {
        ["+X", "-X", "+Y", "-Y", "+Z", "-Z"]
            .iter()
            .map(|s| StabilizerState::from_strs(&[s]).unwrap())
            .collect()
    }

    #[test]
    fn identity_block_teleports_all_outcomes() {
        let id = choi_state(&CliffordCircuit::new(1), 1).unwrap();
        for psi in eigenstates() {
            for o in 0..4 {
                let mut spec = PipelineSpec::new(psi.clone());
                spec.push_block(id.clone(), vec![0]);
                let r = Runner::new(psi.clone(), OutcomeMode::Script(vec![o]), 0)
                    .run(&spec.steps)
                    .unwrap();
                assert!(states_equal(&r.corrected().unwrap(), &psi).unwrap());
            }
        }
    }

    #[test]
    fn encode_decode_round_trip() {
        for name in ["rep3_phase", "rep3_bit", "ring5"] {
            let code = get_code(name).unwrap();
            for psi in eigenstates() {
                let mut spec = PipelineSpec::new(psi.clone());
                spec.push_block(encoder_block(code).unwrap(), vec![0]);
                spec.push_block(decoder_block(code).unwrap(), (0..code.m).collect());
                for seed in 0..5 {
                    let r = run_pipeline(&spec, seed).unwrap();
                    assert!(states_equal(&r.corrected().unwrap(), &psi).unwrap(), "{name}");
                    assert!(r.syndromes().iter().all(|s| s.syndrome.iter().all(|&b| b == 0)));
                }
            }
        }
    }

    #[test]
    fn cz_block_makes_cluster() {
        let cz = choi_state(&CliffordCircuit::named("cz").unwrap(), 2).unwrap();
        let mut spec = PipelineSpec::new(StabilizerState::plus(2));
        spec.push_block(cz, vec![0, 1]);
        let r = run_pipeline(&spec, 3).unwrap();
        let cluster = StabilizerState::from_strs(&["XZ", "ZX"]).unwrap();
        assert!(states_equal(&r.corrected().unwrap(), &cluster).unwrap());
    }

    #[test]
    fn injected_error_is_corrected() {
        let code = get_code("ring5").unwrap();
        let init = code.logical_bell_state();
        let mut spec = PipelineSpec::new(init.clone());
        spec.push_block(ec_block(code).unwrap(), (1..6).collect()).inject = Some("+IIXIII".parse().unwrap());
        let r = run_pipeline(&spec, 11).unwrap();
        let rec = r.syndromes()[0];
        assert_eq!(rec.syndrome, code.syndrome_of(&"+IXIII".parse().unwrap()).unwrap());
        assert_eq!(rec.failure, Some(false));
        assert!(states_equal(&r.corrected().unwrap(), &init).unwrap());
    }

    #[test]
    fn stepwise_equals_deferred() {
        let code = get_code("ring5").unwrap();
        let mut spec = PipelineSpec::new(code.logical_bell_state());
        spec.push_block(ec_block(code).unwrap(), (1..6).collect());
        spec.push_block(decoder_block(code).unwrap(), (1..6).collect());
        let a = run_pipeline(&spec, 5).unwrap();
        spec.correction = Correction::Stepwise;
        let b = run_pipeline(&spec, 5).unwrap();
        assert!(b.frame.pending.is_identity());
        assert!(states_equal(&a.corrected().unwrap(), &b.corrected().unwrap()).unwrap());
    }

    #[test]
    fn wiring_errors_carry_step() {
        let id = choi_state(&CliffordCircuit::new(1), 1).unwrap();
        let mut spec = PipelineSpec::new(StabilizerState::zero(1));
        spec.push_block(id.clone(), vec![0]);
        spec.push_block(id, vec![1]);
        let err = spec.validate().unwrap_err();
        assert!(matches!(err, Error::Step { step: 1, .. }));
    }

    #[test]
    fn pipeline_json() {
        let v = serde_json::json!({
            "format": 1,
            "initial": {"code": "ring5", "logical": "+Z"},
            "steps": [
                {"block": "ec:ring5", "wiring": [0, 1, 2, 3, 4], "inject": "+IXIII"},
                {"block": "decoder:ring5", "wiring": [0, 1, 2, 3, 4]}
            ]
        });
        let spec = PipelineSpec::from_json(&v, None).unwrap();
        let a = run_pipeline(&spec, 9).unwrap();
        let b = run_pipeline(&spec, 9).unwrap();
        assert_eq!(a.transcript(), b.transcript());
        let z = StabilizerState::from_strs(&["+Z"]).unwrap();
        assert!(states_equal(&a.corrected().unwrap(), &z).unwrap());
    }

    #[test]
    fn gadget_matches_dense_rotation() {
        use crate::dense::GateSpec;
        use std::f64::consts::FRAC_PI_4;
        let g = rotation_gadget(Axis::X);
        for alpha in [0.0, FRAC_PI_4, 0.37, -1.1] {
            for script in 0..8u8 {
                let psi = DenseState::from_stabilizer(&StabilizerState::from_strs(&["+Y"]).unwrap()).unwrap();
                let mut spec = PipelineSpec::new(StabilizerState::zero(1));
                spec.push_gadget(g.clone(), alpha, vec![0]);
                let r = Runner::new(psi.clone(), OutcomeMode::Script(vec![script >> 1, script & 1]), 0)
                    .run(&spec.steps)
                    .unwrap();
                let mut want = psi.clone();
                want.apply_unitary(&GateSpec::Rx(alpha), &[0]).unwrap();
                let f = r.corrected().unwrap().fidelity(&want).unwrap();
                assert!((f - 1.0).abs() < 1e-9, "alpha {alpha} script {script}: {f}");
            }
        }
    }

    #[test]
    fn block_frame_is_applied_once() {
        let circ: CliffordCircuit = "h 0; s 0".parse().unwrap();
        let ideal = choi_state(&circ, 1).unwrap();
        for frame in ["+XY", "+ZZ", "+YI", "+IX"] {
            let frame: PauliOperator = frame.parse().unwrap();
            let mut state = ideal.state().clone();
            state.apply_pauli(&frame).unwrap();
            let block = ResourceBlock::with_frame(
                "framed",
                state,
                ideal.ports().to_vec(),
                frame.clone(),
                ideal.metadata.clone(),
            )
            .unwrap();
            assert!(states_equal(&block.ideal_state(), ideal.state()).unwrap());
            for psi in eigenstates() {
                let mut want = psi.clone();
                want.apply_circuit(&circ).unwrap();
                for o in 0..4 {
                    let mut spec = PipelineSpec::new(psi.clone());
                    spec.push_block(block.clone(), vec![0]);
                    let r = Runner::new(psi.clone(), OutcomeMode::Script(vec![o]), 0)
                        .run(&spec.steps)
                        .unwrap();
                    assert!(states_equal(&r.corrected().unwrap(), &want).unwrap(), "{frame} {o}");
                }
            }
        }
    }
}
