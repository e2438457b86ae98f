//! Finite-depth circuit approximations of 1D spin-chain propagators.
//!
//! `e^{itH}` for a nearest-neighbour chain is split into a layer of block
//! propagators and a layer of patch unitaries, each patch generated by a
//! Lieb-Robinson-windowed effective Hamiltonian. Circuits convert to matrix
//! product operators, and every approximation can be checked against dense
//! exact evolution on small chains.

pub mod dense;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod lr;
pub mod model;
pub mod mpo;
pub mod patch;
pub mod pauli;
pub mod qca;
pub mod serial;
pub mod table;

pub use dense::{propagator, DenseOperator};
pub use error::{Error, Result};
pub use lr::{analytic_lr_bound, heisenberg_evolve, lr_discrepancy, lr_scan, LrScanRecord};
pub use model::{build_dense_hamiltonian, Interval, Limits, LocalTerm, SpinChainHamiltonian};
pub use mpo::{
    mpo_compress, mpo_frobenius_distance, mpo_frobenius_norm, mpo_from_dense, mpo_from_layer, mpo_multiply,
    mpo_to_dense, qca_to_mpo, MpoOperator,
};
pub use patch::{
    generator_l, integrate_time_ordered, patch_exact, patch_exact_in, patch_windowed, BoundMethod, CutSpec,
    PatchOptions, PatchResult,
};
pub use qca::{build_qca, contract_circuit, plan_cuts, window_size_for, CutPlan, DecayConstants, LayeredCircuit};
