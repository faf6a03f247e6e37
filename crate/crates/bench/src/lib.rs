//! Fixtures shared by the benchmarks.

use qnmlab_core::nm::{self, AttackScenario};
use qnmlab_core::schemes::{self, EncryptionScheme};
use qnmlab_core::QuantumChannel;

/// Clifford₁ scheme with the random-channel library attack and a |B| = 2 side register.
pub fn clifford_fixture() -> (EncryptionScheme, QuantumChannel) {
    let s = schemes::clifford_scheme(1).expect("Clifford group on one qubit");
    let a = nm::build_attack("random-channel-0", s.ciphertext(), 2, 9).expect("library attack");
    (s, a)
}

pub fn scenario<'a>(s: &'a EncryptionScheme, a: &QuantumChannel) -> AttackScenario<'a> {
    let rho = nm::scenario_states(2, 2, 2, 1, 0).expect("states").remove(0);
    AttackScenario::new(s, rho, a.clone()).expect("scenario")
}
