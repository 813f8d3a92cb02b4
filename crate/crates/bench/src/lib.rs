//! Benchmark inputs shared by the criterion targets.

use partition_crt_core::{BinomialFactor, Bound, CrtIdentityParams, CrtParams, IdentityInstance};

/// Factors with exponents `1..=count`; every third is a numerator.
pub fn mixed_factors(count: u64) -> Vec<BinomialFactor> {
    (1..=count)
        .map(|b| {
            if b % 3 == 0 {
                BinomialFactor::Numerator(b)
            } else {
                BinomialFactor::Denominator(b)
            }
        })
        .collect()
}

/// The `(2, 3, 5)` CRT instance with `k = l = 1`.
pub fn three_moduli_instance() -> IdentityInstance {
    let params = CrtParams::new(vec![2, 3, 5], vec![1, 1, 1]).expect("coprime moduli");
    partition_crt_core::build_crt(&CrtIdentityParams::new(params, 1, Bound::Finite(1)))
        .expect("valid CRT instance")
}
