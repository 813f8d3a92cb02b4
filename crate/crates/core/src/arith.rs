//! Modular arithmetic and the Chinese-remainder solver that produces the
//! r-vector used by the CRT identity builder.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jsonnum;

/// Largest modulus product accepted anywhere in the crate.
pub const MAX_MODULUS: u64 = i64::MAX as u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("{x} is not invertible modulo {modulus}")]
    NotCoprime { x: u64, modulus: u64 },
    #[error("invalid CRT parameters: {0}")]
    InvalidParams(String),
}

/// Greatest common divisor. `gcd(0, 0)` is 0.
pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Least common multiple, `None` on overflow.
pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Returns `y` in `[1, m]` with `x * y ≡ 1 (mod m)`. For `m = 1` this is 1.
pub fn mod_inverse(x: u64, m: u64) -> Result<u64, ArithError> {
    if m == 0 {
        return Err(ArithError::NotCoprime { x, modulus: m });
    }
    if m == 1 {
        return Ok(1);
    }
    let ext = (x as i128).extended_gcd(&(m as i128));
    if ext.gcd != 1 {
        return Err(ArithError::NotCoprime { x, modulus: m });
    }
    let y = ext.x.rem_euclid(m as i128) as u64;
    Ok(if y == 0 { m } else { y })
}

/// `(a * b) mod m` without overflow.
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Least positive representative of `x` modulo `m`, i.e. a value in `[1, m]`.
pub fn least_positive(x: u64, m: u64) -> u64 {
    match x % m {
        0 => m,
        r => r,
    }
}

/// Moduli `m_1..m_s` and offsets `a_1..a_s` for the CRT construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCrtParams")]
pub struct CrtParams {
    #[serde(with = "jsonnum::vec")]
    moduli: Vec<u64>,
    #[serde(with = "jsonnum::vec")]
    offsets: Vec<u64>,
}

#[derive(Deserialize)]
struct RawCrtParams {
    #[serde(with = "jsonnum::vec")]
    moduli: Vec<u64>,
    #[serde(with = "jsonnum::vec")]
    offsets: Vec<u64>,
}

impl TryFrom<RawCrtParams> for CrtParams {
    type Error = ArithError;

    fn try_from(raw: RawCrtParams) -> Result<Self, Self::Error> {
        CrtParams::new(raw.moduli, raw.offsets)
    }
}

impl CrtParams {
    /// Validates pairwise coprimality of the moduli and `gcd(a_i, m_i) = 1`.
    /// An offset paired with the modulus 1 is normalized to 1.
    pub fn new(moduli: Vec<u64>, offsets: Vec<u64>) -> Result<Self, ArithError> {
        if moduli.is_empty() {
            return Err(ArithError::InvalidParams(
                "at least one modulus is required".into(),
            ));
        }
        if moduli.len() != offsets.len() {
            return Err(ArithError::InvalidParams(format!(
                "{} moduli but {} offsets",
                moduli.len(),
                offsets.len()
            )));
        }
        if let Some(i) = moduli.iter().position(|&m| m == 0) {
            return Err(ArithError::InvalidParams(format!(
                "modulus m_{} is zero",
                i + 1
            )));
        }
        if let Some(i) = offsets.iter().position(|&a| a == 0) {
            return Err(ArithError::InvalidParams(format!(
                "offset a_{} is zero",
                i + 1
            )));
        }
        let mut product: u64 = 1;
        for &m in &moduli {
            product = product
                .checked_mul(m)
                .filter(|&p| p <= MAX_MODULUS)
                .ok_or_else(|| {
                    ArithError::InvalidParams("modulus product exceeds 2^63-1".into())
                })?;
        }
        for i in 0..moduli.len() {
            for j in i + 1..moduli.len() {
                if gcd(moduli[i], moduli[j]) != 1 {
                    return Err(ArithError::InvalidParams(format!(
                        "moduli m_{} = {} and m_{} = {} are not coprime",
                        i + 1,
                        moduli[i],
                        j + 1,
                        moduli[j]
                    )));
                }
            }
        }
        let mut offsets = offsets;
        for (i, (&m, a)) in moduli.iter().zip(offsets.iter_mut()).enumerate() {
            if m == 1 {
                *a = 1;
            } else if gcd(*a, m) != 1 {
                return Err(ArithError::InvalidParams(format!(
                    "offset a_{} = {} shares a factor with m_{} = {}",
                    i + 1,
                    a,
                    i + 1,
                    m
                )));
            }
        }
        Ok(CrtParams { moduli, offsets })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    /// Product of all moduli.
    pub fn modulus(&self) -> u64 {
        self.moduli.iter().product()
    }
}

/// Output of [`crt_solve`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrtSolution {
    /// `m = m_1 ⋯ m_s`.
    pub modulus: u64,
    /// `M_i = m / m_i`.
    pub cofactors: Vec<u64>,
    /// `Mbar_i` with `Mbar_i * M_i ≡ 1 (mod m_i)`, in `[1, m_i]`.
    pub inverses: Vec<u64>,
    /// `r_i ≡ a_i M_i Mbar_i (mod m)`, least positive representative.
    pub r: Vec<u64>,
}

impl CrtSolution {
    /// Checks `r_i ≡ a_i (mod m_i)` and `r_i ≡ 0 (mod m_j)` for `j ≠ i`.
    pub fn satisfies_system(params: &CrtParams, r: &[u64]) -> bool {
        let m = params.moduli();
        let a = params.offsets();
        r.len() == m.len()
            && r.iter().enumerate().all(|(i, &ri)| {
                ri % m[i] == a[i] % m[i]
                    && m.iter().enumerate().all(|(j, &mj)| j == i || ri % mj == 0)
            })
    }
}

/// Solves the CRT system. Each `r_i` is the least positive residue of
/// `a_i M_i Mbar_i` modulo `m`.
pub fn crt_solve(params: &CrtParams) -> Result<CrtSolution, ArithError> {
    let modulus = params.modulus();
    let mut cofactors = Vec::with_capacity(params.len());
    let mut inverses = Vec::with_capacity(params.len());
    let mut r = Vec::with_capacity(params.len());
    for (&mi, &ai) in params.moduli().iter().zip(params.offsets()) {
        let big_m = modulus / mi;
        let inv = mod_inverse(big_m % mi, mi)?;
        let basis = mul_mod(big_m, inv, modulus);
        r.push(least_positive(
            mul_mod(ai % modulus, basis, modulus),
            modulus,
        ));
        cofactors.push(big_m);
        inverses.push(inv);
    }
    Ok(CrtSolution {
        modulus,
        cofactors,
        inverses,
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(0, 7), 7);
        assert_eq!(gcd(15, 10), 5);
        for r in 0..50 {
            assert_eq!(gcd(2 * r + 1, 2), 1);
        }
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(15, 2), Ok(1));
        assert_eq!(mod_inverse(2, 3), Ok(2));
        for m in 1..40 {
            assert_eq!(mod_inverse(1, m), Ok(1));
        }
        assert_eq!(
            mod_inverse(4, 6),
            Err(ArithError::NotCoprime { x: 4, modulus: 6 })
        );
    }

    #[test]
    fn crt_example_three_moduli() {
        let p = CrtParams::new(vec![2, 3, 5], vec![1, 1, 1]).unwrap();
        let sol = crt_solve(&p).unwrap();
        assert_eq!(sol.modulus, 30);
        assert_eq!(sol.cofactors, vec![15, 10, 6]);
        assert_eq!(sol.inverses, vec![1, 1, 1]);
        assert_eq!(sol.r, vec![15, 10, 6]);
    }

    #[test]
    fn crt_example_two_moduli() {
        let p = CrtParams::new(vec![2, 3], vec![1, 1]).unwrap();
        let sol = crt_solve(&p).unwrap();
        assert_eq!(sol.modulus, 6);
        assert_eq!(sol.cofactors, vec![3, 2]);
        assert_eq!(sol.inverses, vec![1, 2]);
        assert_eq!(sol.r, vec![3, 4]);
    }

    #[test]
    fn single_congruence() {
        for m1 in 1..20u64 {
            for a1 in 1..3 * m1 {
                if gcd(a1, m1) != 1 {
                    continue;
                }
                let sol = crt_solve(&CrtParams::new(vec![m1], vec![a1]).unwrap()).unwrap();
                assert_eq!(sol.cofactors, vec![1]);
                assert_eq!(sol.inverses, vec![1]);
                assert_eq!(sol.r, vec![least_positive(a1, m1)]);
            }
        }
    }

    #[test]
    fn unit_modulus_is_degenerate() {
        let p = CrtParams::new(vec![1, 5], vec![4, 2]).unwrap();
        assert_eq!(p.offsets(), &[1, 2]);
        let sol = crt_solve(&p).unwrap();
        assert_eq!(sol.r[0], 5);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(matches!(
            CrtParams::new(vec![2, 4], vec![1, 1]),
            Err(ArithError::InvalidParams(_))
        ));
        assert!(matches!(
            CrtParams::new(vec![6, 5], vec![3, 1]),
            Err(ArithError::InvalidParams(_))
        ));
        assert!(CrtParams::new(vec![], vec![]).is_err());
        assert!(CrtParams::new(vec![3], vec![1, 1]).is_err());
        assert!(CrtParams::new(vec![1 << 32, (1 << 32) + 1], vec![1, 1]).is_err());
    }

    fn coprime_params() -> impl Strategy<Value = CrtParams> {
        (
            prop::collection::vec(1u64..=50, 1..=4),
            prop::collection::vec(1u64..=200, 4),
        )
            .prop_filter_map("moduli not pairwise coprime", |(moduli, raw)| {
                let offsets = moduli
                    .iter()
                    .zip(raw)
                    .map(|(&m, a)| (a..).find(|&x| gcd(x, m) == 1).unwrap())
                    .collect();
                CrtParams::new(moduli, offsets).ok()
            })
    }

    proptest! {
        #[test]
        fn solution_satisfies_residue_system(p in coprime_params()) {
            let sol = crt_solve(&p).unwrap();
            prop_assert!(CrtSolution::satisfies_system(&p, &sol.r));
            for (i, &ri) in sol.r.iter().enumerate() {
                prop_assert!(ri >= 1 && ri <= sol.modulus);
                prop_assert_eq!(mul_mod(sol.cofactors[i], sol.inverses[i], p.moduli()[i]), 1 % p.moduli()[i]);
            }
        }

        #[test]
        fn weighted_sums_form_complete_residue_system(p in coprime_params()) {
            let sol = crt_solve(&p).unwrap();
            let m = sol.modulus;
            prop_assume!(m <= 200_000);
            let mut image = BTreeSet::from([0u64]);
            for (&ri, &mi) in sol.r.iter().zip(p.moduli()) {
                image = image
                    .iter()
                    .flat_map(|&acc| (0..mi).map(move |j| (acc + mul_mod(ri, j, m)) % m))
                    .collect();
            }
            prop_assert_eq!(image.len() as u64, m);
        }

        #[test]
        fn inverse_round_trip(x in 1u64..10_000, m in 1u64..10_000) {
            if gcd(x, m) == 1 {
                let y = mod_inverse(x, m).unwrap();
                prop_assert!(y >= 1 && y <= m);
                prop_assert_eq!(mul_mod(x, y, m), 1 % m);
            } else {
                prop_assert!(mod_inverse(x, m).is_err());
            }
        }
    }
}
