//! Acceptance suite: one PASS/FAIL line per criterion, each with its runtime budget.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;
use std::time::{Duration, Instant};

use mbqc_core::codes::{CodeSpec, Provenance};
use mbqc_core::fusion::{OutcomeMode, Runner};
use mbqc_core::noise::{self, NoiseSpec, Scenario};
use mbqc_core::synth::Transfer;
use mbqc_core::{
    choi_state, code_switch_block, compile_pattern, decoder_block, ec_block, encoder_block, get_code, pauli_difference,
    reduce_cluster, rotation_gadget, run_pipeline, states_equal, Axis, BellBits, CliffordCircuit, DenseState, Error,
    GateSpec, GraphStateFrame, OutcomeSource, Pauli1, PauliOperator, PipelineSpec, StabilizerState,
};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<T>(r: mbqc_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn dense_vec(amps: &[f64]) -> DenseState {
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    DenseState::from_amplitudes(amps.iter().map(|a| C::new(a / norm, 0.0)).collect()).unwrap()
}

fn same_ray(a: &DenseState, b: &DenseState) -> bool {
    (a.fidelity(b).unwrap() - 1.0).abs() < 1e-12
}

/// Dense `(|0⟩|0_L⟩ + |1⟩|1_L⟩)/√2` from explicit codewords.
fn bell_with(zero: &DenseState, one: &DenseState) -> DenseState {
    let z = zero.amplitudes().unwrap();
    let o = one.amplitudes().unwrap();
    let mut amps: Vec<C> = z.iter().copied().collect();
    amps.extend(o.iter().copied());
    for a in amps.iter_mut() {
        *a *= FRAC_1_SQRT_2;
    }
    DenseState::from_amplitudes(amps).unwrap()
}

fn criterion_1() -> Check {
    // rep3_phase codewords |+++⟩ and |−−−⟩
    let plus3 = dense_vec(&[1.0; 8]);
    let minus3 = dense_vec(
        &(0..8)
            .map(|i: u32| if i.count_ones().is_multiple_of(2) { 1.0 } else { -1.0 })
            .collect::<Vec<_>>(),
    );
    let enc = e2s(encoder_block(get_code("rep3_phase").unwrap()))?;
    let got = DenseState::from_stabilizer(enc.state()).unwrap();
    ensure(same_ray(&got, &bell_with(&plus3, &minus3)), || {
        "rep3_phase encoder differs from codeword construction".into()
    })?;

    // ring5 codewords: ring graph state and Z⊗5 of it
    let mut ring = DenseState::from_amplitudes(vec![C::new(1.0 / (32f64).sqrt(), 0.0); 32]).unwrap();
    for j in 0..5 {
        ring.apply_unitary(&GateSpec::Named("cz".into()), &[j, (j + 1) % 5])
            .unwrap();
    }
    let mut ring1 = ring.clone();
    ring1.apply_pauli(&"ZZZZZ".parse().unwrap()).unwrap();
    let enc = e2s(encoder_block(get_code("ring5").unwrap()))?;
    let got = DenseState::from_stabilizer(enc.state()).unwrap();
    ensure(same_ray(&got, &bell_with(&ring, &ring1)), || {
        "ring5 encoder differs from codeword construction".into()
    })?;

    // CZ block in the order (in.0, out.0, in.1, out.1)
    let cz = e2s(choi_state(&CliffordCircuit::named("cz").unwrap(), 2))?;
    let ordered = DenseState::from_stabilizer(&cz.state().permuted(&[0, 2, 1, 3]).unwrap()).unwrap();
    let g4 = dense_vec(&[1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 1., 0., 0., -1.]);
    ensure(same_ray(&ordered, &g4), || "CZ block differs from |G_4>".into())?;
    let unsigned = dense_vec(&[1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 1., 0., 0., 1.]);
    let id2 = e2s(choi_state(&CliffordCircuit::new(2), 2))?;
    let id_ordered = DenseState::from_stabilizer(&id2.state().permuted(&[0, 2, 1, 3]).unwrap()).unwrap();
    ensure(
        same_ray(&id_ordered, &unsigned) && !same_ray(&ordered, &unsigned),
        || "unsigned |G_4> form should be the identity Choi state".into(),
    )?;

    // rotation block in the order (open, in, out)
    let g = rotation_gadget(Axis::X);
    let ordered = DenseState::from_stabilizer(&g.block.state().permuted(&[2, 0, 1]).unwrap()).unwrap();
    let g3 = dense_vec(&[1., 1., 1., 1., 1., -1., -1., 1.]);
    ensure(same_ray(&ordered, &g3), || "rotation block differs from |G_3>".into())?;
    Ok("encoders (rep3_phase, ring5), |G_4> with -|1111> (unsigned form = identity Choi), |G_3>".into())
}

fn criterion_2() -> Check {
    let library = [
        "qubits 1",
        "h 0",
        "s 0",
        "s 0; h 0",
        "h 0; s 0; h 0; s 0",
        "cz 0 1",
        "cnot 0 1",
        "cnot 0 1; cnot 1 0; cnot 0 1",
        "h 0; cnot 0 1; s 1; cz 0 1",
        "qubits 3; h 0; cnot 0 1; cz 1 2; s 2; cnot 2 0",
    ];
    for text in library {
        let circ: CliffordCircuit = e2s(text.parse())?;
        let choi = e2s(choi_state(&circ, circ.width()))?;
        let red = e2s(reduce_cluster(&e2s(compile_pattern(&circ))?))?;
        for b in [&choi, &red] {
            ensure(b.is_minimal() && b.num_qubits() == b.in_count() + b.out_count(), || {
                format!("`{text}`: {} qubits is not |in|+|out|", b.num_qubits())
            })?;
        }
        ensure(red.ports() == choi.ports(), || format!("`{text}`: port layouts differ"))?;
        ensure(e2s(pauli_difference(red.state(), choi.state()))?.is_some(), || {
            format!("`{text}`: cluster reduction and Choi state differ beyond a Pauli frame")
        })?;
    }
    Ok(format!(
        "{} circuits minimal, cluster route = Choi route up to frame",
        library.len()
    ))
}

fn ec_run(code: &CodeSpec, inject: &PauliOperator, seed: u64) -> Result<(bool, Vec<u8>, Option<bool>), String> {
    let init = code.logical_bell_state();
    let mut spec = PipelineSpec::new(init.clone());
    let mut full = PauliOperator::identity(1);
    full = full.tensor(inject);
    spec.push_block(e2s(ec_block(code))?, (1..=code.m).collect()).inject = Some(full);
    let r = e2s(run_pipeline(&spec, seed))?;
    let rec = r.syndromes()[0].clone();
    let same = e2s(states_equal(&e2s(r.corrected())?, &init))?;
    Ok((same, rec.syndrome, rec.failure))
}

fn criterion_3() -> Check {
    let ring5 = get_code("ring5").unwrap();
    let mut count = 0;
    for q in 0..5 {
        for l in Pauli1::NON_IDENTITY {
            let e = PauliOperator::single(5, q, l);
            for seed in 0..4 {
                let (same, syn, fail) = ec_run(ring5, &e, seed)?;
                let expected = e2s(ring5.syndrome_of(&e))?;
                ensure(syn == expected && syn.contains(&1), || {
                    format!("ring5 {e}: syndrome {syn:?}")
                })?;
                ensure(same && fail == Some(false), || format!("ring5 {e}: not corrected"))?;
            }
            count += 1;
        }
    }
    let rep = get_code("rep3_phase").unwrap();
    for q in 0..3 {
        let z = PauliOperator::single(3, q, Pauli1::Z);
        let (same, syn, fail) = ec_run(rep, &z, q as u64)?;
        ensure(same && fail == Some(false) && syn.contains(&1), || {
            format!("rep3_phase {z}: not corrected")
        })?;
        let x = PauliOperator::single(3, q, Pauli1::X);
        let (same, _, fail) = ec_run(rep, &x, q as u64)?;
        ensure(!same && fail == Some(true), || {
            format!("rep3_phase {x}: failure not flagged")
        })?;
    }
    Ok(format!(
        "ring5 {count}/15 detected and corrected; rep3_phase 3/3 Z corrected, 3/3 X flagged"
    ))
}

fn criterion_4() -> Check {
    let from = get_code("rep3_phase").unwrap();
    let to = get_code("ring5").unwrap();
    let switch = e2s(code_switch_block(from, to))?;
    let mut cases = 0;
    for p in Pauli1::NON_IDENTITY {
        for sign in [1, -1] {
            let init = e2s(from.logical_eigenstate(p, sign))?;
            let want = e2s(to.logical_eigenstate(p, sign))?;
            let mut injections = vec![None];
            injections.extend((0..3).map(|q| Some(PauliOperator::single(3, q, Pauli1::Z))));
            for inj in injections {
                let mut spec = PipelineSpec::new(init.clone());
                spec.push_block(switch.clone(), vec![0, 1, 2]).inject = inj.clone();
                for seed in 0..3 {
                    let r = e2s(run_pipeline(&spec, seed))?;
                    ensure(e2s(states_equal(&e2s(r.corrected())?, &want))?, || {
                        format!(
                            "{}{} with {inj:?} not preserved",
                            if sign > 0 { "+" } else { "-" },
                            p.letter()
                        )
                    })?;
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases (6 eigenstates x no/Z1/Z2/Z3 error) preserved"))
}

fn dense_encode(code: &CodeSpec, psi: &DenseState) -> DenseState {
    let anc = match code.ancilla {
        Pauli1::X => dense_vec(&[1.0, 1.0]),
        _ => dense_vec(&[1.0, 0.0]),
    };
    let mut s: Option<DenseState> = None;
    for q in 0..code.m {
        let f = if q == code.input_qubit {
            psi.clone()
        } else {
            anc.clone()
        };
        s = Some(match s {
            None => f,
            Some(acc) => acc.tensor(&f).unwrap(),
        });
    }
    let mut s = s.unwrap();
    s.apply_circuit(&code.encoder).unwrap();
    s
}

fn is_impossible(e: &Error) -> bool {
    match e {
        Error::ImpossibleOutcome => true,
        Error::Step { source, .. } => is_impossible(source),
        _ => false,
    }
}

fn criterion_5() -> Check {
    let code = get_code("rep3_phase").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dec = e2s(decoder_block(code))?;
    let enc = e2s(encoder_block(code))?;
    let gadget = rotation_gadget(Axis::X);
    let mut worst: f64 = 1.0;
    let mut branches = 0usize;
    for _ in 0..50 {
        let alpha = rng.gen_range(-PI..PI);
        let psi = mbqc_core::dense::random_pure(1, &mut rng).unwrap();
        let start = dense_encode(code, &psi);
        let mut rotated = psi.clone();
        rotated.apply_unitary(&GateSpec::Rx(alpha), &[0]).unwrap();
        let want = dense_encode(code, &rotated);

        let mut spec = PipelineSpec::new(StabilizerState::zero(3));
        spec.push_block(dec.clone(), vec![0, 1, 2]);
        spec.push_gadget(gadget.clone(), alpha, vec![0]);
        spec.push_block(enc.clone(), vec![0]);
        // events: 3 decoder Bell, gadget Bell, open, encoder Bell
        for idx in 0..(4usize.pow(5) * 2) {
            let mut k = idx;
            let mut script = Vec::with_capacity(6);
            for arity in [4, 4, 4, 4, 2, 4] {
                script.push((k % arity) as u8);
                k /= arity;
            }
            let run = Runner::new(start.clone(), OutcomeMode::Script(script), 0).run(&spec.steps);
            let r = match run {
                Ok(r) => r,
                Err(e) if is_impossible(&e) => continue,
                Err(e) => return Err(e.to_string()),
            };
            let f = e2s(e2s(r.corrected())?.fidelity(&want))?;
            worst = worst.min(f);
            branches += 1;
        }
    }
    ensure(worst >= 1.0 - 1e-9, || format!("worst fidelity {worst}"))?;
    Ok(format!(
        "50 angles, {branches} outcome branches, min fidelity {worst:.12}"
    ))
}

fn max_trace_distance(a: &[DenseState], b: &[DenseState]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.trace_distance(y).unwrap())
        .fold(0.0, f64::max)
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let id = e2s(choi_state(&CliffordCircuit::new(1), 1))?;
    let enc = e2s(encoder_block(get_code("rep3_phase").unwrap()))?;
    let mut worst: f64 = 0.0;
    for p in [0.5, 0.9] {
        let psi = mbqc_core::dense::random_pure(1, &mut rng).unwrap();
        for (block, label) in [(&id, "teleport"), (&enc, "encoder")] {
            let moved = e2s(noise::move_noise_through_bell(block, 0, p))?;
            let n = block.num_qubits();
            let transfer = Transfer::new(block.state(), &[0]);
            let mut noisy_block = Vec::new();
            let mut moved_noise = Vec::new();
            for bits in BellBits::all() {
                let byproduct = transfer
                    .push(&PauliOperator::single(n, 0, bits.byproduct()))
                    .ok_or("byproduct not pushable")?
                    .restrict(&(1..n).collect::<Vec<_>>());
                // noise on the block: the whole block for the encoder, the consumed
                // pair qubit for teleportation
                let mut a = psi
                    .to_mixed()
                    .unwrap()
                    .tensor(&DenseState::from_stabilizer(block.state()).unwrap())
                    .unwrap();
                let noisy: Vec<usize> = if label == "teleport" {
                    vec![1]
                } else {
                    (1..=n).collect()
                };
                for &q in &noisy {
                    a.apply_ldn(q, p).unwrap();
                }
                a.bell_project(0, 1, bits).unwrap();
                a.apply_pauli(&byproduct).unwrap();
                noisy_block.push(a);

                // moved placement: D(p) on the input when the in-port was noisy,
                // outputs noisy either as the block's own or as the moved channel
                let mut b = psi.to_mixed().unwrap();
                if label == "encoder" {
                    b.apply_ldn(0, p).unwrap();
                }
                let mut b = b.tensor(&DenseState::from_stabilizer(block.state()).unwrap()).unwrap();
                b.bell_project(0, 1, bits).unwrap();
                b.apply_pauli(&byproduct).unwrap();
                if label == "teleport" {
                    let weights: Vec<f64> = moved.iter().map(|(w, _)| *w).collect();
                    for (k, (_, op)) in moved.iter().enumerate() {
                        ensure(op.get(0) == [Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z][k], || {
                            "moved letter".into()
                        })?;
                    }
                    b.apply_pauli_channel(0, [weights[0], weights[1], weights[2], weights[3]])
                        .unwrap();
                } else {
                    for q in 0..n - 1 {
                        b.apply_ldn(q, p).unwrap();
                    }
                }
                moved_noise.push(b);
            }
            worst = worst.max(max_trace_distance(&noisy_block, &moved_noise));
        }
    }
    ensure(worst < 1e-10, || format!("trace distance {worst:e}"))?;
    Ok(format!(
        "teleportation and rep3_phase encoder, p in {{0.5, 0.9}}, max trace distance {worst:.1e}"
    ))
}

fn criterion_7() -> Check {
    let v = e2s(noise::concatenation_fixed_point(get_code("ring5").unwrap()))?;
    ensure((0.815..=0.835).contains(&v), || format!("fixed point {v}"))?;
    Ok(format!("ring5 fixed point {v:.6} (stored 0.8250)"))
}

fn criterion_8() -> Check {
    let shor = noise::stated_constant(0.7449, "Shor-type");
    let r = e2s(noise::threshold_report(None, shor, Scenario::Memory))?;
    ensure((r.p_crit.value - 0.7449f64.powf(0.5)).abs() < 1e-12, || "sqrt".into())?;
    ensure((r.p_tilde_crit.value - 0.7449f64.powf(1.0 / 3.0)).abs() < 1e-12, || {
        "cbrt".into()
    })?;
    ensure(format!("{:.4}", r.p_crit.value) == "0.8631", || {
        format!("p_crit {}", r.p_crit.value)
    })?;
    ensure(format!("{:.4}", r.p_tilde_crit.value) == "0.9065", || {
        format!("p~crit {}", r.p_tilde_crit.value)
    })?;
    ensure(1.0 - 0.8631 >= 0.135 && r.tolerable_noise.value >= 0.135, || {
        "13.5%".into()
    })?;
    let rm = e2s(noise::threshold_report(
        Some("rm15"),
        get_code("rm15").unwrap().p_code.clone().unwrap(),
        Scenario::EqualNoise,
    ))?;
    ensure((rm.p_tilde_crit.value - 0.981f64.powf(1.0 / 3.0)).abs() < 1e-12, || {
        "rm15 cbrt".into()
    })?;
    let pct = 100.0 * rm.tolerable_noise_tilde.value;
    ensure(format!("{pct:.2}") == "0.64", || format!("rm15 noise {pct}%"))?;
    Ok(format!(
        "p_crit {:.4}, p~crit {:.4}, noise {:.2}%, rm15 {:.2}%",
        r.p_crit.value,
        r.p_tilde_crit.value,
        100.0 * r.tolerable_noise.value,
        pct
    ))
}

fn criterion_9() -> Check {
    let code = get_code("ring5").unwrap();
    let spec = e2s(noise::ec_round_pipeline(code))?;
    let noise_spec = NoiseSpec::new(0.95, 1.0).unwrap();
    let p_eff = noise::effective_input_noise(&noise_spec);
    let predicted = e2s(noise::exact_logical_channel(code, p_eff))?.failure();
    let trials = 100_000;
    let a = e2s(noise::monte_carlo_logical_error(&spec, noise_spec, trials, 2024, None))?;
    let b = e2s(noise::monte_carlo_logical_error(&spec, noise_spec, trials, 2024, None))?;
    let sigma = (predicted * (1.0 - predicted) / trials as f64).sqrt();
    ensure(a.rate.to_bits() == b.rate.to_bits() && a.failures == b.failures, || {
        "same seed differs".into()
    })?;
    ensure((a.rate - predicted).abs() <= 3.0 * sigma, || {
        format!("rate {} vs predicted {predicted} (sigma {sigma})", a.rate)
    })?;
    Ok(format!(
        "rate {:.5} vs exact {predicted:.5} ({:+.2} sigma), reproducible",
        a.rate,
        (a.rate - predicted) / sigma
    ))
}

// 0.7071 is the quoted boundary value, not a stand-in for 1/sqrt(2).
#[allow(clippy::approx_constant)]
fn criterion_10() -> Check {
    let bound = noise::magic_fidelity_bound();
    ensure((bound - (1.0 + 0.5f64.sqrt()) / 2.0).abs() < 1e-12, || {
        format!("bound {bound}")
    })?;
    for p in [0.0, 0.3, 0.7071, 0.8047, 0.9, 1.0] {
        let r = e2s(noise::magic_state_check(p))?;
        ensure((r.fidelity - (1.0 + p) / 2.0).abs() < 1e-12, || {
            format!("F({p}) = {}", r.fidelity)
        })?;
        ensure(r.ldn_constant.provenance == Provenance::Stated, || {
            "0.8047 must be tagged as a stated constant".into()
        })?;
    }
    let boundary = 2.0 * bound - 1.0;
    ensure((boundary - FRAC_1_SQRT_2).abs() < 1e-12, || "boundary".into())?;
    let table = e2s(noise::constants_table())?;
    let c = &table
        .iter()
        .find(|(k, _)| k == "magic_ldn_constant")
        .ok_or("constant missing")?
        .1;
    ensure(
        c.provenance == Provenance::Stated && (c.value - 0.8047).abs() < 1e-15,
        || "0.8047 tag".into(),
    )?;
    Ok(format!(
        "bound {bound:.10}, F(p) = (1+p)/2, boundary p = {boundary:.4}; 0.8047 tagged as stated"
    ))
}

fn criterion_11() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in 0..200 {
        let n = rng.gen_range(1..=8);
        let circ = CliffordCircuit::random(n, rng.gen_range(0..40), &mut rng);
        let tab = StabilizerState::zero(n).apply_clifford(&circ).unwrap();
        let mut dense = DenseState::zero(n).unwrap();
        dense.apply_circuit(&circ).unwrap();
        let from_tab = DenseState::from_stabilizer(&tab).unwrap();
        ensure((dense.fidelity(&from_tab).unwrap() - 1.0).abs() < 1e-9, || {
            format!("circuit {t}: {circ}")
        })?;
    }
    for t in 0..100 {
        let n = rng.gen_range(2..=7);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        let mut g = GraphStateFrame::from_edges(n, &edges).unwrap();
        let v = rng.gen_range(0..n);
        let basis = Pauli1::NON_IDENTITY[rng.gen_range(0..3)];
        let bit = rng.gen_bool(0.5);
        let mut tab = g.to_stabilizer();
        let obs = PauliOperator::single(n, v, basis);
        let tab_result = tab
            .measure(&obs, OutcomeSource::Forced(bit))
            .and_then(|_| tab.remove_qubits(&[v]));
        let graph_result = g.measure_vertex(v, basis, bit);
        match (tab_result, graph_result) {
            (Ok(()), Ok(_)) => ensure(states_equal(&g.to_stabilizer(), &tab).unwrap(), || format!("graph {t}"))?,
            (Err(_), Err(_)) => {}
            _ => return Err(format!("graph {t}: outcome feasibility disagrees")),
        }
    }
    Ok("200 circuits (<= 8 qubits) and 100 graphs (<= 7 vertices) agree".into())
}

#[test]
fn acceptance_criteria() {
    type Crit = (u32, &'static str, u64, fn() -> Check);
    let all: [Crit; 11] = [
        (1, "resource-state identities", 1, criterion_1),
        (2, "minimality", 10, criterion_2),
        (3, "error correction", 5, criterion_3),
        (4, "code switching", 5, criterion_4),
        (5, "non-Clifford gadget", 60, criterion_5),
        (6, "noise moving", 60, criterion_6),
        (7, "threshold constant derivation", 5, criterion_7),
        (8, "threshold arithmetic", 1, criterion_8),
        (9, "Monte Carlo consistency", 120, criterion_9),
        (10, "magic-state arithmetic", 1, criterion_10),
        (11, "cross-check suite", 120, criterion_11),
    ];
    let mut failed = Vec::new();
    for (id, name, limit, f) in all {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let (status, detail) = match (&result, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("over time budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        // Written to the raw handle so the report shows without --nocapture.
        let line = format!(
            "criterion {id:>2} {status} {name} [{:.2} s / {limit} s]: {detail}\n",
            elapsed.as_secs_f64()
        );
        std::io::stderr().write_all(line.as_bytes()).expect("stderr");
        if status == "FAIL" {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
