//! Stabilizer-level simulation of measurement-based computation with
//! resource-state blocks, Bell-measurement fusion and Pauli-frame tracking.

pub mod clifford;
pub mod codes;
pub mod dense;
pub mod error;
pub mod fusion;
pub mod graph;
pub mod noise;
pub mod pauli;
pub mod stabilizer;
pub mod synth;

pub use clifford::{CliffordCircuit, Gate};
pub use codes::{get_code, CodeSpec, LogicalClass};
pub use dense::{DenseState, GateSpec};
pub use error::{Error, Result};
pub use fusion::{
    run_pipeline, run_reference, Correction, PauliFrame, PipelineSpec, RunResult, Runner, SyndromeRecord,
};
pub use graph::{graph_to_stabilizer, stabilizer_to_graph, GraphStateFrame, LocalClifford};
pub use noise::{NoiseSpec, ThresholdReport};
pub use pauli::{Pauli1, PauliOperator, Phase};
pub use stabilizer::{
    pauli_difference, states_equal, BellBits, BellSource, MeasureOutcome, OutcomeSource, StabilizerState,
};
pub use synth::{
    choi_state, code_switch_block, compile_pattern, decoder_block, ec_block, encoder_block, fuse_blocks,
    reduce_cluster, rotation_gadget, Axis, ClusterPattern, GadgetBlock, Port, ResourceBlock, Role,
};
