//! Partition identities `P(A; n) = Q(B; n)` built from Chinese-remainder and
//! divisibility-chain data, with exact verification.
//!
//! `P(A; n)` counts partitions of `n` in which every part occurs a number of
//! times lying in `A`; `Q(B; n)` counts partitions of `n` into parts from `B`.
//! Builders in [`identities`] produce matching pairs `(A, B)`; [`partitions`]
//! counts both sides independently; [`congruences`] carries congruences for
//! `p(n)` over to `P(A; n)`.

pub mod arith;
pub mod congruences;
pub mod identities;
pub mod jsonnum;
pub mod partitions;
pub mod series;
pub mod sets;

pub use arith::{crt_solve, mod_inverse, ArithError, CrtParams, CrtSolution};
pub use congruences::{
    catalog, check_claim, transfer_chain, transfer_crt, verify_convolution, ClaimReport,
    CongruenceClaim, CongruenceError, ProgressionClaim, Subject,
};
pub use identities::{
    build_chain, build_crt, build_preset, finite_complement, verify_polynomial, Bound,
    ChainIdentityParams, CrtIdentityParams, Factor, IdentityError, IdentityInstance, Preset,
    Provenance,
};
pub use partitions::{
    brute_p, brute_q, count_p, count_q, partition_p, verify_counts, CountReport, CountTable,
    PartitionError,
};
pub use series::{product_of_factors, BinomialFactor, CoefficientSeries, Ring};
pub use sets::{DifferenceClass, MultiplicitySet, ResidueClassUnion, SetError};
