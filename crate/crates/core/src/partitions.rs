//! Exact partition counts: `p(n)`, `P(A; n)` (multiplicities in `A`) and
//! `Q(B; n)` (parts in `B`), each by a generating-function method and by
//! brute-force enumeration.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use std::io::{self, Write};
use thiserror::Error;

use crate::identities::IdentityInstance;
use crate::jsonnum::SafeInt;
use crate::series::{CoefficientSeries, Ring};
use crate::sets::{MultiplicitySet, ResidueClassUnion};

/// Largest `n` the enumeration oracles accept.
pub const ORACLE_LIMIT: u64 = 60;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("brute-force oracle is limited to n <= {ORACLE_LIMIT}, asked for {0}")]
    OracleScaleExceeded(u64),
    #[error("oracle bound {oracle} exceeds truncation order {order}")]
    OracleAboveOrder { oracle: u64, order: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CountKind {
    #[serde(rename = "p")]
    Unrestricted,
    #[serde(rename = "P")]
    Multiplicities,
    #[serde(rename = "Q")]
    Parts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    Pentagonal,
    Series,
    BruteForce,
}

/// Counts for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub kind: CountKind,
    pub method: CountMethod,
    pub values: CoefficientSeries,
}

impl CountTable {
    pub fn n_max(&self) -> usize {
        self.values.order()
    }

    pub fn ring(&self) -> Ring {
        self.values.ring()
    }

    pub fn value(&self, n: usize) -> BigInt {
        self.values.coeff(n)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        self.values.write_csv(out)
    }
}

impl Serialize for CountTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            kind: CountKind,
            method: CountMethod,
            ring: Ring,
            n_max: usize,
            values: Vec<SafeInt>,
        }
        Repr {
            kind: self.kind,
            method: self.method,
            ring: self.ring(),
            n_max: self.n_max(),
            values: self
                .values
                .coefficients()
                .into_iter()
                .map(SafeInt)
                .collect(),
        }
        .serialize(s)
    }
}

/// `p(0..=N)` by Euler's pentagonal recurrence
/// `p(n) = Σ_{k ≥ 1} (-1)^{k+1} [p(n - k(3k-1)/2) + p(n - k(3k+1)/2)]`.
pub fn partition_p(order: usize, ring: Ring) -> CountTable {
    let values = match ring {
        Ring::Exact => {
            let mut p: Vec<BigInt> = Vec::with_capacity(order + 1);
            p.push(BigInt::from(1));
            for n in 1..=order {
                let mut acc = BigInt::zero();
                for (offset, negative) in pentagonal_offsets(n) {
                    if negative {
                        acc -= &p[n - offset];
                    } else {
                        acc += &p[n - offset];
                    }
                }
                p.push(acc);
            }
            CoefficientSeries::from_coefficients(Ring::Exact, &p)
        }
        Ring::Mod(d) => {
            let mut p: Vec<u64> = Vec::with_capacity(order + 1);
            p.push(1 % d);
            for n in 1..=order {
                let mut acc = 0u64;
                for (offset, negative) in pentagonal_offsets(n) {
                    let v = p[n - offset];
                    acc = if negative {
                        (acc + d - v) % d
                    } else {
                        (acc + v) % d
                    };
                }
                p.push(acc);
            }
            let big: Vec<BigInt> = p.into_iter().map(BigInt::from).collect();
            CoefficientSeries::from_coefficients(ring, &big)
        }
    };
    CountTable {
        kind: CountKind::Unrestricted,
        method: CountMethod::Pentagonal,
        values,
    }
}

/// Generalized pentagonal numbers `<= n`, each with its sign (`true` = minus).
fn pentagonal_offsets(n: usize) -> impl Iterator<Item = (usize, bool)> {
    (1usize..)
        .map(|k| (k, k * (3 * k - 1) / 2))
        .take_while(move |&(_, g)| g <= n)
        .flat_map(move |(k, g1)| {
            let negative = k % 2 == 0;
            let g2 = g1 + k;
            std::iter::once((g1, negative)).chain((g2 <= n).then_some((g2, negative)))
        })
}

/// `Σ P(A; n) q^n = Π_{t ≥ 1} (1 + Σ_{a ∈ A} q^{a t})`, one factor per part size.
pub fn count_p(a: &MultiplicitySet, order: usize, ring: Ring) -> CountTable {
    let n = order as u64;
    let mut s = CoefficientSeries::one(order, ring);
    let Some(&least) = a.core().first() else {
        return CountTable {
            kind: CountKind::Multiplicities,
            method: CountMethod::Series,
            values: s,
        };
    };
    for t in 1..=n / least {
        match a.period() {
            None => {
                let terms: Vec<(u64, i64)> = std::iter::once((0, 1))
                    .chain(a.core().range(..=n / t).map(|&m| (m * t, 1)))
                    .collect();
                s.mul_sparse_assign(&terms);
            }
            Some(p) => {
                // 1 + Σ_c q^{ct} / (1 - q^{pt}) = (1 - q^{pt} + Σ_c q^{ct}) / (1 - q^{pt})
                let pt = p.saturating_mul(t);
                let mut terms: Vec<(u64, i64)> = vec![(0, 1)];
                if pt <= n {
                    terms.push((pt, -1));
                }
                terms.extend(a.core().range(..=n / t).map(|&c| (c * t, 1)));
                s.mul_sparse_assign(&terms);
                if pt <= n {
                    s.div_binomial_assign(pt);
                }
            }
        }
    }
    CountTable {
        kind: CountKind::Multiplicities,
        method: CountMethod::Series,
        values: s,
    }
}

/// `Σ Q(B; n) q^n = Π_{b ∈ B} 1 / (1 - q^b)`.
pub fn count_q(b: &ResidueClassUnion, order: usize, ring: Ring) -> CountTable {
    let mut s = CoefficientSeries::one(order, ring);
    for part in b.members_up_to(order as u64) {
        s.div_binomial_assign(part);
    }
    CountTable {
        kind: CountKind::Parts,
        method: CountMethod::Series,
        values: s,
    }
}

fn check_oracle_scale(n: u64) -> Result<(), PartitionError> {
    if n > ORACLE_LIMIT {
        return Err(PartitionError::OracleScaleExceeded(n));
    }
    Ok(())
}

/// Counts partitions of `n` with all multiplicities in `A` by walking the
/// part sizes downwards and choosing a multiplicity for each.
pub fn brute_p(a: &MultiplicitySet, n: u64) -> Result<u64, PartitionError> {
    check_oracle_scale(n)?;
    let mults = a.elements_up_to(n);

    fn walk(mults: &[u64], largest: u64, remaining: u64) -> u64 {
        if remaining == 0 {
            return 1;
        }
        let mut total = 0;
        for part in (1..=largest.min(remaining)).rev() {
            // `part` is the largest part actually used.
            for &m in mults {
                let used = m * part;
                if used > remaining {
                    break;
                }
                total += walk(mults, part - 1, remaining - used);
            }
        }
        total
    }
    Ok(walk(&mults, n, n))
}

/// Counts non-increasing sequences of elements of `B` summing to `n`.
pub fn brute_q(b: &ResidueClassUnion, n: u64) -> Result<u64, PartitionError> {
    check_oracle_scale(n)?;
    let parts = b.members_up_to(n);

    fn walk(parts: &[u64], remaining: u64) -> u64 {
        if remaining == 0 {
            return 1;
        }
        // `parts` holds the sizes still allowed, ascending.
        parts
            .iter()
            .enumerate()
            .take_while(|&(_, &p)| p <= remaining)
            .map(|(i, &p)| walk(&parts[..=i], remaining - p))
            .sum()
    }
    Ok(walk(&parts, n))
}

pub fn brute_p_table(a: &MultiplicitySet, n_max: u64) -> Result<Vec<u64>, PartitionError> {
    (0..=n_max).map(|n| brute_p(a, n)).collect()
}

pub fn brute_q_table(b: &ResidueClassUnion, n_max: u64) -> Result<Vec<u64>, PartitionError> {
    (0..=n_max).map(|n| brute_q(b, n)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountMismatch {
    pub n: u64,
    pub series_p: SafeInt,
    pub series_q: SafeInt,
    pub brute_p: Option<u64>,
    pub brute_q: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub pass: bool,
    pub n_max: u64,
    pub oracle_max: u64,
    pub first_mismatch: Option<CountMismatch>,
}

/// Checks `P(A; n) = Q(B; n)` by series for `n <= order`, and against both
/// enumeration oracles for `n <= oracle`. The four tables are computed
/// concurrently.
pub fn verify_counts(
    inst: &IdentityInstance,
    order: u64,
    oracle: u64,
) -> Result<CountReport, PartitionError> {
    if oracle > order {
        return Err(PartitionError::OracleAboveOrder { oracle, order });
    }
    check_oracle_scale(oracle)?;
    let ((sp, sq), (bp, bq)) = rayon::join(
        || {
            rayon::join(
                || count_p(&inst.a, order as usize, Ring::Exact),
                || count_q(&inst.b, order as usize, Ring::Exact),
            )
        },
        || {
            rayon::join(
                || brute_p_table(&inst.a, oracle),
                || brute_q_table(&inst.b, oracle),
            )
        },
    );
    let (bp, bq) = (bp?, bq?);

    let first_mismatch = (0..=order).find_map(|n| {
        let i = n as usize;
        let (p, q) = (sp.value(i), sq.value(i));
        let (op, oq) = (bp.get(i).copied(), bq.get(i).copied());
        let oracle_ok = match (op, oq) {
            (Some(x), Some(y)) => p == BigInt::from(x) && q == BigInt::from(y),
            _ => true,
        };
        (p != q || !oracle_ok).then_some(CountMismatch {
            n,
            series_p: SafeInt(p),
            series_q: SafeInt(q),
            brute_p: op,
            brute_q: oq,
        })
    });
    Ok(CountReport {
        pass: first_mismatch.is_none(),
        n_max: order,
        oracle_max: oracle,
        first_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::DifferenceClass;

    fn union(classes: &[(u64, Option<u64>)]) -> ResidueClassUnion {
        ResidueClassUnion::new(
            classes
                .iter()
                .map(|&(a, b)| DifferenceClass::new(a, b).unwrap())
                .collect(),
        )
        .unwrap()
    }

    /// Every multiset of parts as a sorted list, for checking the oracles
    /// against a third, list-producing enumeration.
    fn all_partitions(n: u64, max: u64) -> Vec<Vec<u64>> {
        if n == 0 {
            return vec![vec![]];
        }
        (1..=max.min(n))
            .flat_map(|p| {
                all_partitions(n - p, p).into_iter().map(move |mut rest| {
                    rest.insert(0, p);
                    rest
                })
            })
            .collect()
    }

    fn multiplicities(parts: &[u64]) -> Vec<u64> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < parts.len() {
            let j = parts[i..].iter().take_while(|&&x| x == parts[i]).count();
            out.push(j as u64);
            i += j;
        }
        out
    }

    #[test]
    fn small_partition_numbers() {
        let p = partition_p(12, Ring::Exact);
        assert_eq!(all_partitions(4, 4).len(), 5);
        assert_eq!(all_partitions(9, 9).len(), 30);
        assert_eq!(p.value(0), BigInt::from(1));
        assert_eq!(p.value(4), BigInt::from(5));
        assert_eq!(p.value(9), BigInt::from(30));
        let by_listing: Vec<BigInt> = (0..=12)
            .map(|n| BigInt::from(all_partitions(n, n).len()))
            .collect();
        assert_eq!(p.values.coefficients(), by_listing);
    }

    #[test]
    fn ramanujan_mod_five_on_p() {
        let p = partition_p(5 * 50 + 4, Ring::Exact);
        for n in 0..=50 {
            assert_eq!(p.values.coeff_mod(5 * n + 4, 5), 0);
        }
        assert_eq!(
            partition_p(254, Ring::Mod(5)).values,
            p.values.reduce_mod(5).unwrap()
        );
    }

    #[test]
    fn pentagonal_matches_series_product() {
        let order = 200;
        let mut s = CoefficientSeries::one(order, Ring::Exact);
        for j in 1..=order as u64 {
            s.div_binomial_assign(j);
        }
        assert_eq!(partition_p(order, Ring::Exact).values, s);
    }

    #[test]
    fn distinct_parts_examples() {
        let a = MultiplicitySet::finite([1]).unwrap();
        assert_eq!(count_p(&a, 5, Ring::Exact).value(5), BigInt::from(3));
        assert_eq!(brute_p(&a, 5), Ok(3));
        let listed = all_partitions(5, 5)
            .into_iter()
            .filter(|p| multiplicities(p).iter().all(|&m| m == 1))
            .count();
        assert_eq!(listed, 3);

        let not_one = MultiplicitySet::periodic([2], 1).unwrap();
        assert_eq!(count_p(&not_one, 5, Ring::Exact).value(1), BigInt::from(0));
        assert_eq!(brute_p(&not_one, 1), Ok(0));
    }

    #[test]
    fn large_minimum_multiplicity() {
        let inst = crate::identities::build_crt(&crate::identities::CrtIdentityParams::new(
            crate::arith::CrtParams::new(vec![2, 3, 5], vec![1, 1, 1]).unwrap(),
            1,
            crate::identities::Bound::Finite(1),
        ))
        .unwrap();
        let t = count_p(&inst.a, 10, Ring::Exact);
        for n in 1..=5 {
            assert_eq!(t.value(n), BigInt::from(0));
            assert_eq!(brute_p(&inst.a, n as u64), Ok(0));
        }
        assert_eq!(t.value(6), BigInt::from(1));
    }

    #[test]
    fn exactly_two_copies() {
        // Frozen by the listing oracle: parts each used exactly twice.
        let a = MultiplicitySet::finite([2]).unwrap();
        let listed: Vec<u64> = (0..=12)
            .map(|n| {
                all_partitions(n, n)
                    .into_iter()
                    .filter(|p| multiplicities(p).iter().all(|&m| m == 2))
                    .count() as u64
            })
            .collect();
        assert_eq!(listed[4], 1);
        assert_eq!(listed[6], 2);
        assert_eq!(brute_p_table(&a, 12).unwrap(), listed);
        let series: Vec<BigInt> = listed.iter().map(|&v| BigInt::from(v)).collect();
        assert_eq!(count_p(&a, 12, Ring::Exact).values.coefficients(), series);
    }

    #[test]
    fn parts_examples() {
        let odd = union(&[(1, Some(2))]);
        assert_eq!(count_q(&odd, 5, Ring::Exact).value(5), BigInt::from(3));
        assert_eq!(brute_q(&odd, 5), Ok(3));
        assert_eq!(brute_q(&odd, 0), Ok(1));
        assert_eq!(brute_p(&MultiplicitySet::finite([3, 7]).unwrap(), 0), Ok(1));

        let even = union(&[(2, None)]);
        assert_eq!(brute_q(&even, 3), Ok(0));

        let six = union(&[(6, Some(30))]);
        let t = count_q(&six, 12, Ring::Exact);
        for n in 1..=5 {
            assert_eq!(t.value(n), BigInt::from(0));
        }
        assert_eq!(t.value(6), BigInt::from(1));
    }

    #[test]
    fn macmahon_counts_agree() {
        let a = MultiplicitySet::periodic([2], 1).unwrap();
        let b = union(&[(2, None), (3, Some(6))]);
        assert_eq!(
            count_p(&a, 60, Ring::Exact),
            CountTable {
                kind: CountKind::Multiplicities,
                ..count_q(&b, 60, Ring::Exact)
            }
        );
    }

    #[test]
    fn oracles_match_listing() {
        let a = MultiplicitySet::periodic([2, 4], 3).unwrap();
        let b = union(&[(2, Some(6)), (3, None)]);
        for n in 0..=16 {
            let listed = all_partitions(n, n);
            let want_p = listed
                .iter()
                .filter(|p| multiplicities(p).iter().all(|&m| a.contains(m)))
                .count();
            let want_q = listed
                .iter()
                .filter(|p| p.iter().all(|&x| b.contains(x)))
                .count();
            assert_eq!(brute_p(&a, n), Ok(want_p as u64));
            assert_eq!(brute_q(&b, n), Ok(want_q as u64));
        }
    }

    #[test]
    fn oracle_scale_is_enforced() {
        let a = MultiplicitySet::finite([1]).unwrap();
        assert_eq!(
            brute_p(&a, 61),
            Err(PartitionError::OracleScaleExceeded(61))
        );
        assert_eq!(
            brute_q(&union(&[(1, None)]), 61),
            Err(PartitionError::OracleScaleExceeded(61))
        );
        assert!(brute_q(&union(&[(1, None)]), 60).is_ok());
    }

    #[test]
    fn modular_tables_are_reductions() {
        let a = MultiplicitySet::periodic([3, 4, 6, 7, 8, 11], 6).unwrap();
        let exact = count_p(&a, 150, Ring::Exact);
        for d in [2, 5, 7, 11, 1_000_003] {
            assert_eq!(
                count_p(&a, 150, Ring::Mod(d)).values,
                exact.values.reduce_mod(d).unwrap()
            );
        }
        let b = union(&[(6, None), (3, Some(6)), (4, Some(12))]);
        let exact = count_q(&b, 150, Ring::Exact);
        assert_eq!(
            count_q(&b, 150, Ring::Mod(7)).values,
            exact.values.reduce_mod(7).unwrap()
        );
    }

    #[test]
    fn csv_and_json_output() {
        let t = partition_p(3, Ring::Exact);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,value\n0,1\n1,1\n2,2\n3,3\n"
        );
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"kind":"p","method":"pentagonal","ring":"exact","n_max":3,"values":[1,1,2,3]}"#
        );
        let big = partition_p(400, Ring::Exact);
        let json = serde_json::to_value(&big).unwrap();
        assert!(json["values"][400].is_string());
        assert_eq!(
            serde_json::to_value(partition_p(2, Ring::Mod(5))).unwrap()["ring"],
            serde_json::json!({"mod": 5})
        );
    }
}
