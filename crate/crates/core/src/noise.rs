//! Local depolarizing noise, noise moving, exact logical channels,
//! concatenation thresholds, Monte Carlo estimates and magic-state arithmetic.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{get_code, CodeSpec, Constant, LogicalClass, Provenance};
use crate::dense::DenseState;
use crate::error::{check_probability, Error, Result};
use crate::fusion::{run_reference, OutcomeMode, PipelineSpec, Runner};
use crate::pauli::{Pauli1, PauliOperator};
use crate::stabilizer::states_equal;
use crate::synth::{ec_block, ResourceBlock, Transfer};

/// p_Code of Shor-type codes, used as a stored value.
pub const SHOR_P_CODE: f64 = 0.7449;
/// LDN parameter quoted for the magic-state fidelity bound; not derivable here.
pub const MAGIC_LDN_CONSTANT: f64 = 0.8047;
/// Largest code enumerated exactly (4^M terms).
pub const MAX_EXACT_QUBITS: usize = 7;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    #[default]
    Clifford,
    CodeSwitchUniversal,
    MagicState,
}

/// LDN parameters; `1` means noiseless.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p: f64,
    pub q: f64,
    pub q_u: f64,
    pub mode: NoiseMode,
}

impl NoiseSpec {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        check_probability("p", p)?;
        check_probability("q", q)?;
        Ok(NoiseSpec {
            p,
            q,
            q_u: 1.0,
            mode: NoiseMode::Clifford,
        })
    }

    pub fn universal(p: f64, q: f64, q_u: f64, mode: NoiseMode) -> Result<Self> {
        let mut s = Self::new(p, q)?;
        check_probability("q_U", q_u)?;
        s.q_u = q_u;
        s.mode = mode;
        Ok(s)
    }
}

/// Weights of `I, X, Y, Z` in the twirl decomposition of `D(p)`.
pub fn twirl_weights(p: f64) -> [f64; 4] {
    let e = (1.0 - p) / 4.0;
    [(1.0 + 3.0 * p) / 4.0, e, e, e]
}

pub fn sample_ldn<R: Rng + ?Sized>(p: f64, qubits: usize, rng: &mut R) -> Result<PauliOperator> {
    check_probability("p", p)?;
    let keep = (1.0 + 3.0 * p) / 4.0;
    let mut op = PauliOperator::identity(qubits);
    for q in 0..qubits {
        let u: f64 = rng.gen();
        if u >= keep {
            let l = match rng.gen_range(0..3) {
                0 => Pauli1::X,
                1 => Pauli1::Y,
                _ => Pauli1::Z,
            };
            op.set(q, l);
        }
    }
    Ok(op)
}

/// Pauli mixture on a block's surviving qubits equivalent to `D(p)` on the
/// live qubit read into in-port `port` (or on the in-port itself). Fails when
/// the port is constrained by an in-port check, i.e. the noise shows up as a
/// syndrome instead.
pub fn move_noise_through_bell(block: &ResourceBlock, port: usize, p: f64) -> Result<Vec<(f64, PauliOperator)>> {
    check_probability("p", p)?;
    if port >= block.in_count() {
        return Err(Error::Wiring(format!("block has no in-port {port}")));
    }
    let n = block.num_qubits();
    let rest: Vec<usize> = (block.in_count()..n).collect();
    let transfer = Transfer::new(block.state(), &block.in_qubits());
    let w = twirl_weights(p);
    let mut out = Vec::with_capacity(4);
    for (k, l) in [Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z].into_iter().enumerate() {
        let moved = transfer
            .push(&PauliOperator::single(n, port, l))
            .ok_or_else(|| Error::Infeasible(format!("in-port {port} is checked; noise becomes a syndrome")))?;
        out.push((w[k], moved.restrict(&rest)));
    }
    Ok(out)
}

/// `p²·q`, times `q_U` outside the Clifford mode.
pub fn effective_input_noise(spec: &NoiseSpec) -> f64 {
    let base = spec.p * spec.p * spec.q;
    match spec.mode {
        NoiseMode::Clifford => base,
        NoiseMode::CodeSwitchUniversal | NoiseMode::MagicState => base * spec.q_u,
    }
}

/// Logical Pauli channel after one perfect decoding round.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct LogicalChannel {
    /// Probabilities of residual classes `I, X, Y, Z`.
    pub probs: [f64; 4],
}

impl LogicalChannel {
    /// Bloch-vector shrink factor along `axis`.
    pub fn shrink(&self, axis: Pauli1) -> f64 {
        let [i, x, y, z] = self.probs;
        match axis {
            Pauli1::I => 1.0,
            Pauli1::X => i + x - y - z,
            Pauli1::Y => i - x + y - z,
            Pauli1::Z => i - x - y + z,
        }
    }

    /// Worst-direction depolarizing parameter.
    pub fn q_l(&self) -> f64 {
        [Pauli1::X, Pauli1::Y, Pauli1::Z]
            .into_iter()
            .map(|a| self.shrink(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn failure(&self) -> f64 {
        1.0 - self.probs[0]
    }
}

/// Enumerate all `4^M` i.i.d. twirl errors at parameter `p_eff` through the decoder.
pub fn exact_logical_channel(code: &CodeSpec, p_eff: f64) -> Result<LogicalChannel> {
    check_probability("p_eff", p_eff)?;
    if code.m > MAX_EXACT_QUBITS {
        return Err(Error::Infeasible(format!(
            "{} has {} qubits; exact enumeration is limited to {MAX_EXACT_QUBITS}, use Monte Carlo",
            code.name, code.m
        )));
    }
    let w = twirl_weights(p_eff);
    let letters = [Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z];
    let mut probs = [0.0; 4];
    let mut e = PauliOperator::identity(code.m);
    for idx in 0..(1usize << (2 * code.m)) {
        let mut prob = 1.0;
        for q in 0..code.m {
            let k = (idx >> (2 * q)) & 3;
            e.set(q, letters[k]);
            prob *= w[k];
        }
        let slot = match code.correct(&e)? {
            LogicalClass::Identity => 0,
            LogicalClass::X => 1,
            LogicalClass::Y => 2,
            LogicalClass::Z => 3,
            LogicalClass::Outside => {
                return Err(Error::InvalidState(format!("decoder of {} left a syndrome", code.name)))
            }
        };
        probs[slot] += prob;
    }
    Ok(LogicalChannel { probs })
}

/// Bisection of `f(x) − x` on `(lo, hi)` to `tol`.
fn bisect<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let g = |x: f64| f(x).map(|y| y - x);
    let glo = g(lo)?;
    let ghi = g(hi)?;
    if glo.signum() == ghi.signum() {
        return Err(Error::NoCrossing);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid)?.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub const FIXED_POINT_BRACKET: (f64, f64) = (0.5, 0.999);
pub const FIXED_POINT_TOL: f64 = 1e-6;

/// Unstable fixed point of `p ↦ q_L(p)` (worst direction).
pub fn concatenation_fixed_point(code: &CodeSpec) -> Result<f64> {
    let (lo, hi) = FIXED_POINT_BRACKET;
    bisect(|x| Ok(exact_logical_channel(code, x)?.q_l()), lo, hi, FIXED_POINT_TOL)
}

/// Fixed point of the recursion restricted to one logical axis.
pub fn axis_fixed_point(code: &CodeSpec, axis: Pauli1) -> Result<f64> {
    let (lo, hi) = FIXED_POINT_BRACKET;
    bisect(
        |x| Ok(exact_logical_channel(code, x)?.shrink(axis)),
        lo,
        hi,
        FIXED_POINT_TOL,
    )
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Frequent correction, `q ≈ 1`: `p²·p_Code` threshold gives `√p_Code`.
    Memory,
    /// Storage noise equal to resource noise, `q = p`: `∛p_Code`.
    EqualNoise,
    /// Channel segments with noise comparable to the resource states: `∛p_Code`.
    Communication,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub format: u32,
    pub code: Option<String>,
    pub scenario: Scenario,
    pub p_code: Constant,
    pub p_crit: Constant,
    pub p_tilde_crit: Constant,
    pub tolerable_noise: Constant,
    pub tolerable_noise_tilde: Constant,
    /// Threshold for the selected scenario.
    pub threshold: Constant,
}

fn derived(value: f64, note: &str) -> Constant {
    Constant {
        value,
        provenance: Provenance::Derived,
        note: note.to_string(),
    }
}

pub fn stated_constant(value: f64, note: &str) -> Constant {
    Constant {
        value,
        provenance: Provenance::Stated,
        note: note.to_string(),
    }
}

pub fn threshold_report(code: Option<&str>, p_code: Constant, scenario: Scenario) -> Result<ThresholdReport> {
    check_probability("p_code", p_code.value)?;
    let sq = p_code.value.sqrt();
    let cb = p_code.value.cbrt();
    let threshold = match scenario {
        Scenario::Memory => derived(sq, "p_crit"),
        Scenario::EqualNoise | Scenario::Communication => derived(cb, "p_tilde_crit"),
    };
    Ok(ThresholdReport {
        format: 1,
        code: code.map(str::to_string),
        scenario,
        p_code,
        p_crit: derived(sq, "sqrt(p_Code), q = 1"),
        p_tilde_crit: derived(cb, "cbrt(p_Code), q = p"),
        tolerable_noise: derived(1.0 - sq, "1 - p_crit"),
        tolerable_noise_tilde: derived(1.0 - cb, "1 - p_tilde_crit"),
        threshold,
    })
}

/// p_Code for a registry code: derived by enumeration when feasible, else the
/// stored constant.
pub fn code_p_code(code: &CodeSpec, derive: bool) -> Result<Constant> {
    if derive {
        let v = concatenation_fixed_point(code)?;
        return Ok(derived(v, "concatenation fixed point of exact enumeration"));
    }
    code.p_code
        .clone()
        .ok_or_else(|| Error::Infeasible(format!("no stored p_Code for {}; use --derive", code.name)))
}

/// Reference table of threshold constants with provenance.
pub fn constants_table() -> Result<Vec<(String, Constant)>> {
    let ring5 = get_code("ring5")?;
    let fp = concatenation_fixed_point(ring5)?;
    let rm = get_code("rm15")?.p_code.clone().expect("rm15 constant");
    Ok(vec![
        ("ring5_p_code".into(), derived(fp, "exact enumeration + bisection")),
        (
            "ring5_p_code_stored".into(),
            ring5.p_code.clone().expect("ring5 constant"),
        ),
        (
            "shor_p_code".into(),
            stated_constant(SHOR_P_CODE, "Shor-type codes, not re-derived"),
        ),
        ("shor_p_crit".into(), derived(SHOR_P_CODE.sqrt(), "sqrt(0.7449)")),
        ("shor_p_tilde_crit".into(), derived(SHOR_P_CODE.cbrt(), "cbrt(0.7449)")),
        (
            "shor_tolerable_noise".into(),
            derived(1.0 - SHOR_P_CODE.sqrt(), "1 - sqrt(0.7449)"),
        ),
        ("rm15_p_code".into(), rm.clone()),
        ("rm15_p_tilde_crit".into(), derived(rm.value.cbrt(), "cbrt(0.981)")),
        (
            "rm15_tolerable_noise".into(),
            derived(1.0 - rm.value.cbrt(), "1 - cbrt(0.981)"),
        ),
        (
            "magic_fidelity_bound".into(),
            derived(magic_fidelity_bound(), "(1 + 1/sqrt 2)/2"),
        ),
        (
            "magic_ldn_boundary".into(),
            derived(2.0 * magic_fidelity_bound() - 1.0, "F(p) = (1+p)/2 at the bound"),
        ),
        (
            "magic_ldn_constant".into(),
            stated_constant(MAGIC_LDN_CONSTANT, "stated value; does not follow from F(p) = (1+p)/2"),
        ),
    ])
}

pub fn magic_fidelity_bound() -> f64 {
    (1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MagicReport {
    pub p: f64,
    pub fidelity: f64,
    pub bound: f64,
    pub distillable: bool,
    pub ldn_constant: Constant,
}

/// `cos(π/8)|0⟩ + sin(π/8)|1⟩`, the `+1` eigenstate of `(X+Z)/√2`.
pub fn magic_state() -> DenseState {
    let t = std::f64::consts::PI / 8.0;
    DenseState::from_amplitudes(vec![t.cos().into(), t.sin().into()]).expect("normalized")
}

pub fn magic_state_check(p: f64) -> Result<MagicReport> {
    check_probability("p", p)?;
    let target = magic_state();
    let mut rho = target.to_mixed()?;
    rho.apply_ldn(0, p)?;
    let fidelity = rho.fidelity(&target)?;
    let bound = magic_fidelity_bound();
    Ok(MagicReport {
        p,
        fidelity,
        bound,
        distillable: fidelity > bound,
        ldn_constant: stated_constant(MAGIC_LDN_CONSTANT, "stated LDN threshold; not derived"),
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub sigma: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// 95% Wilson score interval.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    let z = 1.959963984540054;
    let n = trials as f64;
    let ph = failures as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (ph + z * z / (2.0 * n)) / denom;
    let half = z * (ph * (1.0 - ph) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    // Round-off can push an endpoint past the estimate at 0 or n failures.
    ((centre - half).clamp(0.0, ph), (centre + half).clamp(ph, 1.0))
}

/// Single EC round on a logical Bell pair (reference qubit first, untouched).
pub fn ec_round_pipeline(code: &CodeSpec) -> Result<PipelineSpec> {
    let mut spec = PipelineSpec::new(code.logical_bell_state());
    spec.push_block(ec_block(code)?, (1..=code.m).collect()).noisy = true;
    Ok(spec)
}

/// Fraction of noisy runs whose frame-corrected final state differs from the
/// noiseless reference. Trial `t` draws from a stream keyed by `(seed, t)`.
pub fn monte_carlo_logical_error(
    spec: &PipelineSpec,
    noise: NoiseSpec,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let reference = run_reference(spec)?.corrected()?;
    let trial = |t: u64| -> Result<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t);
        let r = Runner::new(spec.initial.clone(), OutcomeMode::Random, 0)
            .with_rng(rng)
            .with_noise(Some(noise))
            .with_correction(spec.correction)
            .run(&spec.steps)?;
        Ok(!states_equal(&r.corrected()?, &reference)? as u64)
    };
    let count = || {
        (0..trials)
            .into_par_iter()
            .map(trial)
            .try_reduce(|| 0, |a, b| Ok(a + b))
    };
    let failures = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidState(e.to_string()))?
            .install(count)?,
        None => count()?,
    };
    let rate = failures as f64 / trials as f64;
    let (ci_low, ci_high) = wilson_interval(failures, trials);
    Ok(McEstimate {
        trials,
        failures,
        rate,
        sigma: (rate * (1.0 - rate) / trials as f64).sqrt(),
        ci_low,
        ci_high,
    })
}

/// `start:stop:step`, including `stop` when within half a step.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number `{t}` in grid")))
    };
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, c] => {
            let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(Error::Parse(format!("grid `{s}` needs start <= stop and step > 0")));
            }
            let count = ((stop - start) / step + 0.5).floor() as usize;
            Ok((0..=count)
                .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(Error::Parse(format!("grid `{s}` is not start:stop:step"))),
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub q: f64,
    pub estimate: McEstimate,
}

pub fn sweep(
    spec: &PipelineSpec,
    ps: &[f64],
    q: f64,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<SweepRow>> {
    ps.iter()
        .map(|&p| {
            let estimate = monte_carlo_logical_error(spec, NoiseSpec::new(p, q)?, trials, seed, workers)?;
            Ok(SweepRow { p, q, estimate })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("p,q,trials,logical_error_rate,ci_low,ci_high\n");
    for r in rows {
        let e = &r.estimate;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.p, r.q, e.trials, e.rate, e.ci_low, e.ci_high
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(sample_ldn(1.0, 4, &mut rng).unwrap().is_identity());
        }
        assert!(sample_ldn(1.5, 1, &mut rng).is_err());
    }

    #[test]
    fn uniform_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mut counts = [0f64; 4];
        for _ in 0..n {
            let (x, z) = sample_ldn(0.0, 1, &mut rng).unwrap().get(0).bits();
            counts[(x as usize) << 1 | z as usize] += 1.0;
        }
        let e = n as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|c| (c - e) * (c - e) / e).sum();
        // 3 dof, p = 0.001
        assert!(chi2 < 16.27, "{chi2}");
    }

    #[test]
    fn effective_noise() {
        assert_eq!(effective_input_noise(&NoiseSpec::new(1.0, 1.0).unwrap()), 1.0);
        assert!((effective_input_noise(&NoiseSpec::new(0.95, 1.0).unwrap()) - 0.9025).abs() < 1e-15);
        let u = NoiseSpec::universal(0.9, 0.9, 0.9, NoiseMode::CodeSwitchUniversal).unwrap();
        assert!((effective_input_noise(&u) - 0.6561).abs() < 1e-12);
    }

    #[test]
    fn noiseless_channel() {
        let c = exact_logical_channel(get_code("ring5").unwrap(), 1.0).unwrap();
        assert!((c.q_l() - 1.0).abs() < 1e-15);
        assert!(exact_logical_channel(get_code("rm15").unwrap(), 0.9)
            .unwrap_err()
            .is_infeasible());
    }

    #[test]
    fn ring5_threshold_behavior() {
        let c = get_code("ring5").unwrap();
        assert!(exact_logical_channel(c, 0.9).unwrap().q_l() > 0.9);
        assert!(exact_logical_channel(c, 0.7).unwrap().q_l() < 0.7);
        let ch = exact_logical_channel(c, 0.85).unwrap();
        assert!((ch.shrink(Pauli1::X) - ch.shrink(Pauli1::Z)).abs() < 1e-12);
        assert!((ch.shrink(Pauli1::X) - ch.shrink(Pauli1::Y)).abs() < 1e-12);
    }

    #[test]
    fn report_algebra() {
        let r = threshold_report(None, stated_constant(SHOR_P_CODE, ""), Scenario::Memory).unwrap();
        assert!((r.p_crit.value.powi(2) - SHOR_P_CODE).abs() < 1e-12);
        assert!((r.p_tilde_crit.value.powi(3) - SHOR_P_CODE).abs() < 1e-12);
        let j = serde_json::to_value(&r).unwrap();
        assert_eq!(j["p_code"]["provenance"], "paper-constant");
        assert_eq!(j["p_crit"]["provenance"], "derived");
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.8:0.95:0.025").unwrap().len(), 7);
        assert_eq!(parse_grid("0.5").unwrap(), vec![0.5]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("a:b").is_err());
    }

    #[test]
    fn wilson_contains_rate() {
        let (lo, hi) = wilson_interval(30, 1000);
        assert!(lo < 0.03 && 0.03 < hi);
        for n in [1, 10, 200, 1000, 100_000] {
            assert_eq!(wilson_interval(0, n).0, 0.0);
            assert_eq!(wilson_interval(n, n).1, 1.0);
            for f in [1, n / 3, n - 1] {
                let (lo, hi) = wilson_interval(f, n);
                let ph = f as f64 / n as f64;
                assert!(lo <= ph && ph <= hi, "{f}/{n}");
            }
        }
    }

    #[test]
    fn noiseless_monte_carlo_is_zero() {
        let spec = ec_round_pipeline(get_code("rep3_phase").unwrap()).unwrap();
        let e = monte_carlo_logical_error(&spec, NoiseSpec::new(1.0, 1.0).unwrap(), 200, 4, Some(2)).unwrap();
        assert_eq!(e.failures, 0);
        assert!(monte_carlo_logical_error(&spec, NoiseSpec::new(1.0, 1.0).unwrap(), 0, 4, None).is_err());
    }

    #[test]
    fn magic_limits() {
        let r = magic_state_check(1.0).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12 && r.distillable);
        assert!(!magic_state_check(0.7).unwrap().distillable);
        assert_eq!(r.ldn_constant.provenance, Provenance::Stated);
    }

    #[test]
    fn teleport_noise_moves_to_target() {
        let id = crate::synth::choi_state(&crate::clifford::CliffordCircuit::new(1), 1).unwrap();
        let moved = move_noise_through_bell(&id, 0, 0.9).unwrap();
        for (k, (w, op)) in moved.iter().enumerate() {
            assert!((w - twirl_weights(0.9)[k]).abs() < 1e-15);
            assert_eq!(op.get(0), [Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z][k]);
        }
        let dec = crate::synth::decoder_block(get_code("ring5").unwrap()).unwrap();
        assert!(move_noise_through_bell(&dec, 0, 0.9).is_err());
    }
}
