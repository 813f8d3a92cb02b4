//! Truncated power series `c_0 + c_1 q + ... + c_N q^N` over the integers or
//! over `Z/dZ`, with in-place multiplication and division by binomials
//! `1 - q^b`.
//!
//! Exact series start out on `i128` storage and are promoted to `BigInt`
//! the first time an operation would overflow, so callers never see a
//! wrapped coefficient.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{self, Write};
use thiserror::Error;

use crate::arith::MAX_MODULUS;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("coefficient rings differ: {0} vs {1}")]
    RingMismatch(Ring, Ring),
    #[error("modulus must be in [1, 2^63-1], got {0}")]
    BadModulus(u64),
}

/// Coefficient ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ring {
    Exact,
    Mod(u64),
}

impl Ring {
    pub fn modular(d: u64) -> Result<Ring, SeriesError> {
        if d == 0 || d > MAX_MODULUS {
            return Err(SeriesError::BadModulus(d));
        }
        Ok(Ring::Mod(d))
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Exact => f.write_str("exact"),
            Ring::Mod(d) => write!(f, "mod {d}"),
        }
    }
}

/// A factor `1 - q^b` in the numerator or the denominator of a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinomialFactor {
    Numerator(u64),
    Denominator(u64),
}

impl BinomialFactor {
    pub fn exponent(&self) -> u64 {
        match *self {
            BinomialFactor::Numerator(b) | BinomialFactor::Denominator(b) => b,
        }
    }
}

#[derive(Debug, Clone)]
enum Coeffs {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
    Residue(Vec<u64>),
}

#[derive(Debug, Clone)]
pub struct CoefficientSeries {
    ring: Ring,
    coeffs: Coeffs,
}

impl CoefficientSeries {
    pub fn zero(order: usize, ring: Ring) -> Self {
        let coeffs = match ring {
            Ring::Exact => Coeffs::Small(vec![0; order + 1]),
            Ring::Mod(_) => Coeffs::Residue(vec![0; order + 1]),
        };
        CoefficientSeries { ring, coeffs }
    }

    pub fn one(order: usize, ring: Ring) -> Self {
        let mut s = Self::zero(order, ring);
        s.set_small(0, 1);
        s
    }

    /// Series whose coefficient `n` counts how often `n` occurs in
    /// `exponents`; exponents beyond the order are dropped.
    pub fn from_exponents(
        order: usize,
        ring: Ring,
        exponents: impl IntoIterator<Item = u64>,
    ) -> Self {
        let mut s = Self::zero(order, ring);
        for e in exponents {
            if e <= order as u64 {
                s.bump(e as usize);
            }
        }
        s
    }

    pub fn from_coefficients(ring: Ring, values: &[BigInt]) -> Self {
        assert!(!values.is_empty(), "a series has at least one coefficient");
        let coeffs = match ring {
            Ring::Exact => match values
                .iter()
                .map(|v| v.to_i128())
                .collect::<Option<Vec<_>>>()
            {
                Some(small) => Coeffs::Small(small),
                None => Coeffs::Big(values.to_vec()),
            },
            Ring::Mod(d) => Coeffs::Residue(values.iter().map(|v| reduce_big(v, d)).collect()),
        };
        CoefficientSeries { ring, coeffs }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    /// Truncation order `N`; the series holds `N + 1` coefficients.
    pub fn order(&self) -> usize {
        self.len() - 1
    }

    pub fn len(&self) -> usize {
        match &self.coeffs {
            Coeffs::Small(v) => v.len(),
            Coeffs::Big(v) => v.len(),
            Coeffs::Residue(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeff(&self, n: usize) -> BigInt {
        match &self.coeffs {
            Coeffs::Small(v) => BigInt::from(v[n]),
            Coeffs::Big(v) => v[n].clone(),
            Coeffs::Residue(v) => BigInt::from(v[n]),
        }
    }

    /// Coefficient `n` as a residue in `[0, d)`, valid for either ring.
    pub fn coeff_mod(&self, n: usize, d: u64) -> u64 {
        match &self.coeffs {
            Coeffs::Small(v) => v[n].rem_euclid(d as i128) as u64,
            Coeffs::Big(v) => reduce_big(&v[n], d),
            Coeffs::Residue(v) => v[n] % d,
        }
    }

    pub fn coefficients(&self) -> Vec<BigInt> {
        (0..self.len()).map(|n| self.coeff(n)).collect()
    }

    pub fn is_zero_at(&self, n: usize) -> bool {
        match &self.coeffs {
            Coeffs::Small(v) => v[n] == 0,
            Coeffs::Big(v) => v[n].is_zero(),
            Coeffs::Residue(v) => v[n] == 0,
        }
    }

    /// Coefficient-wise image in `Z/dZ`.
    pub fn reduce_mod(&self, d: u64) -> Result<CoefficientSeries, SeriesError> {
        let ring = Ring::modular(d)?;
        if let Ring::Mod(e) = self.ring {
            if e % d != 0 {
                return Err(SeriesError::RingMismatch(self.ring, ring));
            }
        }
        let coeffs = Coeffs::Residue((0..self.len()).map(|n| self.coeff_mod(n, d)).collect());
        Ok(CoefficientSeries { ring, coeffs })
    }

    /// First index where `self` and `other` differ.
    pub fn first_difference(
        &self,
        other: &CoefficientSeries,
    ) -> Result<Option<usize>, SeriesError> {
        if self.ring != other.ring {
            return Err(SeriesError::RingMismatch(self.ring, other.ring));
        }
        if self.len() != other.len() {
            return Err(SeriesError::OrderMismatch(self.order(), other.order()));
        }
        let found = match (&self.coeffs, &other.coeffs) {
            (Coeffs::Small(a), Coeffs::Small(b)) => a.iter().zip(b).position(|(x, y)| x != y),
            (Coeffs::Residue(a), Coeffs::Residue(b)) => a.iter().zip(b).position(|(x, y)| x != y),
            _ => (0..self.len()).find(|&n| self.coeff(n) != other.coeff(n)),
        };
        Ok(found)
    }

    pub fn mul_binomial(&self, b: u64) -> CoefficientSeries {
        let mut s = self.clone();
        s.mul_binomial_assign(b);
        s
    }

    pub fn div_binomial(&self, b: u64) -> CoefficientSeries {
        let mut s = self.clone();
        s.div_binomial_assign(b);
        s
    }

    /// `self *= (1 - q^b)`: `c_i -= c_{i-b}`, walking downwards.
    pub fn mul_binomial_assign(&mut self, b: u64) {
        assert!(b >= 1, "binomial exponent must be positive");
        let len = self.len();
        if b as usize >= len {
            return;
        }
        let b = b as usize;
        match &mut self.coeffs {
            Coeffs::Small(v) => {
                for i in (b..len).rev() {
                    match v[i].checked_sub(v[i - b]) {
                        Some(x) => v[i] = x,
                        None => {
                            let mut big = promote(v);
                            for j in (b..=i).rev() {
                                let (lo, hi) = big.split_at_mut(j);
                                hi[0] -= &lo[j - b];
                            }
                            self.coeffs = Coeffs::Big(big);
                            return;
                        }
                    }
                }
            }
            Coeffs::Big(v) => {
                for i in (b..len).rev() {
                    let (lo, hi) = v.split_at_mut(i);
                    hi[0] -= &lo[i - b];
                }
            }
            Coeffs::Residue(v) => {
                let Ring::Mod(d) = self.ring else {
                    unreachable!()
                };
                for i in (b..len).rev() {
                    v[i] = sub_mod(v[i], v[i - b], d);
                }
            }
        }
    }

    /// `self /= (1 - q^b)`: `c_i += c_{i-b}`, walking upwards.
    pub fn div_binomial_assign(&mut self, b: u64) {
        assert!(b >= 1, "binomial exponent must be positive");
        let len = self.len();
        if b as usize >= len {
            return;
        }
        let b = b as usize;
        match &mut self.coeffs {
            Coeffs::Small(v) => {
                for i in b..len {
                    match v[i].checked_add(v[i - b]) {
                        Some(x) => v[i] = x,
                        None => {
                            let mut big = promote(v);
                            for j in i..len {
                                let (lo, hi) = big.split_at_mut(j);
                                hi[0] += &lo[j - b];
                            }
                            self.coeffs = Coeffs::Big(big);
                            return;
                        }
                    }
                }
            }
            Coeffs::Big(v) => {
                for i in b..len {
                    let (lo, hi) = v.split_at_mut(i);
                    hi[0] += &lo[i - b];
                }
            }
            Coeffs::Residue(v) => {
                let Ring::Mod(d) = self.ring else {
                    unreachable!()
                };
                for i in b..len {
                    v[i] = add_mod(v[i], v[i - b], d);
                }
            }
        }
    }

    /// Multiplies by the sparse polynomial `Σ k q^e` given as `(e, k)` terms.
    pub fn mul_sparse_assign(&mut self, terms: &[(u64, i64)]) {
        let len = self.len();
        let terms: Vec<(usize, i64)> = terms
            .iter()
            .filter(|&&(e, k)| e < len as u64 && k != 0)
            .map(|&(e, k)| (e as usize, k))
            .collect();
        match &mut self.coeffs {
            Coeffs::Small(v) => {
                for i in (0..len).rev() {
                    match sparse_small(v, &terms, i) {
                        Some(x) => v[i] = x,
                        None => {
                            let mut big = promote(v);
                            for j in (0..=i).rev() {
                                big[j] = sparse_big(&big, &terms, j);
                            }
                            self.coeffs = Coeffs::Big(big);
                            return;
                        }
                    }
                }
            }
            Coeffs::Big(v) => {
                for i in (0..len).rev() {
                    v[i] = sparse_big(v, &terms, i);
                }
            }
            Coeffs::Residue(v) => {
                let Ring::Mod(d) = self.ring else {
                    unreachable!()
                };
                let terms: Vec<(usize, u64)> = terms
                    .iter()
                    .map(|&(e, k)| (e, (k as i128).rem_euclid(d as i128) as u64))
                    .collect();
                for i in (0..len).rev() {
                    let mut acc = 0u64;
                    for &(e, k) in terms.iter().filter(|&&(e, _)| e <= i) {
                        acc = add_mod(acc, crate::arith::mul_mod(k, v[i - e], d), d);
                    }
                    v[i] = acc;
                }
            }
        }
    }

    pub fn apply(&mut self, factor: BinomialFactor) {
        match factor {
            BinomialFactor::Numerator(b) => self.mul_binomial_assign(b),
            BinomialFactor::Denominator(b) => self.div_binomial_assign(b),
        }
    }

    /// Writes `n,value` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,value")?;
        for n in 0..self.len() {
            writeln!(out, "{},{}", n, self.coeff(n))?;
        }
        Ok(())
    }

    fn set_small(&mut self, n: usize, value: u64) {
        match &mut self.coeffs {
            Coeffs::Small(v) => v[n] = value as i128,
            Coeffs::Big(v) => v[n] = BigInt::from(value),
            Coeffs::Residue(v) => {
                let Ring::Mod(d) = self.ring else {
                    unreachable!()
                };
                v[n] = value % d;
            }
        }
    }

    fn bump(&mut self, n: usize) {
        match &mut self.coeffs {
            Coeffs::Small(v) => v[n] += 1,
            Coeffs::Big(v) => v[n] += 1,
            Coeffs::Residue(v) => {
                let Ring::Mod(d) = self.ring else {
                    unreachable!()
                };
                v[n] = add_mod(v[n], 1 % d, d);
            }
        }
    }
}

impl PartialEq for CoefficientSeries {
    fn eq(&self, other: &Self) -> bool {
        matches!(self.first_difference(other), Ok(None))
    }
}

impl Eq for CoefficientSeries {}

/// Product of binomial factors starting from `one(order, ring)`. Factors with
/// exponent above the order act as the identity and are skipped.
pub fn product_of_factors(
    factors: &[BinomialFactor],
    order: usize,
    ring: Ring,
) -> CoefficientSeries {
    let mut s = CoefficientSeries::one(order, ring);
    for &f in factors {
        s.apply(f);
    }
    s
}

fn promote(v: &[i128]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn sparse_small(v: &[i128], terms: &[(usize, i64)], i: usize) -> Option<i128> {
    let mut acc: i128 = 0;
    for &(e, k) in terms {
        if e <= i {
            acc = acc.checked_add(v[i - e].checked_mul(k as i128)?)?;
        }
    }
    Some(acc)
}

fn sparse_big(v: &[BigInt], terms: &[(usize, i64)], i: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for &(e, k) in terms {
        if e <= i {
            match k {
                1 => acc += &v[i - e],
                -1 => acc -= &v[i - e],
                _ => acc += &v[i - e] * k,
            }
        }
    }
    acc
}

fn add_mod(a: u64, b: u64, d: u64) -> u64 {
    // a, b < d <= 2^63 - 1, so the sum fits.
    let s = a + b;
    if s >= d {
        s - d
    } else {
        s
    }
}

fn sub_mod(a: u64, b: u64, d: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + d - b
    }
}

fn reduce_big(v: &BigInt, d: u64) -> u64 {
    let r = v % BigInt::from(d);
    let r = if r < BigInt::zero() { r + d } else { r };
    r.to_u64().expect("residue fits in u64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn ints(s: &CoefficientSeries) -> Vec<i64> {
        s.coefficients()
            .iter()
            .map(|c| c.to_i64().unwrap())
            .collect()
    }

    #[test]
    fn one_examples() {
        assert_eq!(
            ints(&CoefficientSeries::one(3, Ring::Exact)),
            vec![1, 0, 0, 0]
        );
        assert_eq!(ints(&CoefficientSeries::one(0, Ring::Exact)), vec![1]);
        assert_eq!(
            ints(&CoefficientSeries::one(3, Ring::Mod(5))),
            vec![1, 0, 0, 0]
        );
        assert_eq!(
            ints(&CoefficientSeries::one(3, Ring::Mod(1))),
            vec![0, 0, 0, 0]
        );
    }

    #[test]
    fn binomial_examples() {
        let ones = CoefficientSeries::from_exponents(3, Ring::Exact, 0..4);
        assert_eq!(ints(&ones.mul_binomial(1)), vec![1, 0, 0, 0]);
        let one = CoefficientSeries::one(3, Ring::Exact);
        assert_eq!(ints(&one.mul_binomial(2)), vec![1, 0, -1, 0]);
        let one = CoefficientSeries::one(4, Ring::Exact);
        assert_eq!(ints(&one.div_binomial(2)), vec![1, 0, 1, 0, 1]);
        assert_eq!(ints(&one.div_binomial(1)), vec![1; 5]);
    }

    /// Partitions of n by listing non-increasing sequences.
    fn enumerate_partitions(n: u64, max_part: u64) -> u64 {
        if n == 0 {
            return 1;
        }
        (1..=max_part.min(n))
            .map(|p| enumerate_partitions(n - p, p))
            .sum()
    }

    #[test]
    fn full_denominator_product_gives_partition_numbers() {
        let factors: Vec<_> = (1..=10).map(BinomialFactor::Denominator).collect();
        let s = product_of_factors(&factors, 10, Ring::Exact);
        assert_eq!(enumerate_partitions(4, 4), 5);
        assert_eq!(s.coeff(4), BigInt::from(5));
        for n in 0..=10u64 {
            assert_eq!(
                s.coeff(n as usize),
                BigInt::from(enumerate_partitions(n, n))
            );
        }
    }

    #[test]
    fn macmahon_right_hand_side() {
        // 1/(1-x^2) * (1-x^6)/(1-x^3) = (1 + x^2 + x^4 + ...)(1 + x^3)
        let factors = [
            BinomialFactor::Denominator(2),
            BinomialFactor::Numerator(6),
            BinomialFactor::Denominator(3),
        ];
        let s = product_of_factors(&factors, 12, Ring::Exact);
        let by_hand: Vec<i64> = (0..=12)
            .map(|n| i64::from(n % 2 == 0) + i64::from(n >= 3 && (n - 3) % 2 == 0))
            .collect();
        assert_eq!(ints(&s), by_hand);
        assert_eq!(s.coeff(5), BigInt::from(1));
        assert!(s.coeff(6) >= BigInt::from(1));
        assert!(s.is_zero_at(1));
    }

    #[test]
    fn trivial_products() {
        assert_eq!(
            product_of_factors(&[], 7, Ring::Exact),
            CoefficientSeries::one(7, Ring::Exact)
        );
        for b in 1..10 {
            let f = [BinomialFactor::Numerator(b), BinomialFactor::Denominator(b)];
            assert_eq!(
                product_of_factors(&f, 7, Ring::Exact),
                CoefficientSeries::one(7, Ring::Exact)
            );
        }
    }

    #[test]
    fn overflow_promotes_to_big_integers() {
        // Coefficients of 1/(1-q)^k grow like binomials; force i128 overflow.
        let mut s = CoefficientSeries::one(200, Ring::Exact);
        for _ in 0..60 {
            s.div_binomial_assign(1);
        }
        // C(200 + 59, 59) exceeds 2^127.
        let expected: BigInt = (1..=59u32).fold(BigInt::from(1), |acc, k| acc * (200 + k) / k);
        assert_eq!(s.coeff(200), expected);
        let mut modded = CoefficientSeries::one(200, Ring::Mod(1_000_000_007));
        for _ in 0..60 {
            modded.div_binomial_assign(1);
        }
        assert_eq!(s.reduce_mod(1_000_000_007).unwrap(), modded);
        for _ in 0..60 {
            s.mul_binomial_assign(1);
        }
        assert_eq!(s, CoefficientSeries::one(200, Ring::Exact));
    }

    #[test]
    fn sparse_multiplication() {
        let mut s = CoefficientSeries::one(10, Ring::Exact);
        s.mul_sparse_assign(&[(0, 1), (3, 1)]);
        s.mul_sparse_assign(&[(0, 1), (4, 1), (8, 1)]);
        let expected = CoefficientSeries::from_exponents(10, Ring::Exact, [0, 3, 4, 7, 8]);
        assert_eq!(s, expected);
        let mut m = CoefficientSeries::one(10, Ring::Mod(7));
        m.mul_sparse_assign(&[(0, 1), (2, -3)]);
        assert_eq!(m.coeff_mod(2, 7), 4);
    }

    #[test]
    fn mismatched_shapes() {
        let a = CoefficientSeries::one(3, Ring::Exact);
        let b = CoefficientSeries::one(4, Ring::Exact);
        assert_eq!(
            a.first_difference(&b),
            Err(SeriesError::OrderMismatch(3, 4))
        );
        let c = CoefficientSeries::one(3, Ring::Mod(3));
        assert!(matches!(
            a.first_difference(&c),
            Err(SeriesError::RingMismatch(..))
        ));
        assert!(Ring::modular(0).is_err());
    }

    #[test]
    fn csv_dump() {
        let mut buf = Vec::new();
        CoefficientSeries::one(2, Ring::Exact)
            .div_binomial(1)
            .write_csv(&mut buf)
            .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,value\n0,1\n1,1\n2,1\n");
    }

    fn arb_series() -> impl Strategy<Value = CoefficientSeries> {
        prop::collection::vec(-1_000_000i64..1_000_000, 1..60).prop_map(|v| {
            let big: Vec<BigInt> = v.into_iter().map(BigInt::from).collect();
            CoefficientSeries::from_coefficients(Ring::Exact, &big)
        })
    }

    fn arb_factors() -> impl Strategy<Value = Vec<BinomialFactor>> {
        prop::collection::vec(
            (1u64..30, any::<bool>()).prop_map(|(b, num)| {
                if num {
                    BinomialFactor::Numerator(b)
                } else {
                    BinomialFactor::Denominator(b)
                }
            }),
            0..25,
        )
    }

    proptest! {
        #[test]
        fn div_then_mul_is_identity(s in arb_series(), b in 1u64..70) {
            prop_assert_eq!(s.div_binomial(b).mul_binomial(b), s.clone());
            prop_assert_eq!(s.mul_binomial(b).div_binomial(b), s);
        }

        #[test]
        fn product_is_order_independent(factors in arb_factors(), seed in any::<u64>()) {
            let base = product_of_factors(&factors, 80, Ring::Exact);
            let mut shuffled = factors.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(product_of_factors(&shuffled, 80, Ring::Exact), base);
        }

        #[test]
        fn modular_ring_is_a_homomorphic_image(factors in arb_factors(), d in 1u64..1000) {
            let exact = product_of_factors(&factors, 80, Ring::Exact);
            let modded = product_of_factors(&factors, 80, Ring::Mod(d));
            prop_assert_eq!(exact.reduce_mod(d).unwrap(), modded);
        }
    }
}
