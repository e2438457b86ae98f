use lrqca::harness::presets::{random_chain, tfim};
use lrqca::qca::QcaOptions;
use lrqca::{
    build_dense_hamiltonian, build_qca, contract_circuit, mpo_to_dense, propagator, qca_to_mpo, DenseOperator,
    LayeredCircuit, Limits, SpinChainHamiltonian,
};

fn exact(h: &SpinChainHamiltonian, t: f64) -> DenseOperator {
    let limits = Limits::default();
    propagator(&build_dense_hamiltonian(h, h.full_interval(), &limits).unwrap(), t).unwrap()
}

#[test]
fn circuit_and_mpo_agree_with_dense_evolution() {
    let limits = Limits::default();
    for (h, t, b) in [(tfim(7, 1.0), 0.4, 3), (random_chain(6, 9), 0.3, 2)] {
        let c = build_qca(&h, t, b, &QcaOptions::default()).unwrap();
        let circuit = contract_circuit(&c, &limits).unwrap();
        let err = exact(&h, t).distance(&circuit).unwrap();
        assert!(err <= c.triangle_sum() + 1e-7, "{err} vs {}", c.triangle_sum());

        let q = qca_to_mpo(&c, 1e-12).unwrap();
        let dense = mpo_to_dense(&q.mpo, &limits).unwrap();
        assert!(dense.distance(&circuit).unwrap() <= 1e-9);
        assert!(q.mpo.max_bond() <= q.pre_compression_max_bond);
    }
}

#[test]
fn circuit_survives_json_roundtrip() {
    let h = tfim(6, 0.8);
    let c = build_qca(&h, 0.5, 3, &QcaOptions::default()).unwrap();
    let back: LayeredCircuit = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
    let limits = Limits::default();
    let a = contract_circuit(&c, &limits).unwrap();
    let b = contract_circuit(&back, &limits).unwrap();
    assert_eq!(a.max_entry_distance(&b).unwrap(), 0.0);
}
