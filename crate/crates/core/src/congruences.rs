//! Congruences `f(mn + c) ≡ 0 (mod d)` for `p` and for `P(A; ·)`, the
//! transfer of a `p`-congruence to an identity instance, and a direct check of
//! the convolution that drives the transfer.
//!
//! All checks here run over a finite window of `n` and report that window;
//! none of them proves a congruence for every `n`.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::io::BufRead;
use thiserror::Error;

use crate::identities::{IdentityInstance, Provenance};
use crate::jsonnum::{self, SafeInt};
use crate::partitions::{count_p, partition_p};
use crate::series::{CoefficientSeries, Ring};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CongruenceError {
    #[error("wrong instance shape: {0}")]
    WrongShape(String),
    #[error("factor index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("claim modulus {got} does not match the instance modulus {expected}")]
    ModulusMismatch { expected: u64, got: u64 },
    #[error("invalid claim: {0}")]
    InvalidClaim(String),
    #[error("claim file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// The progression data `(m, c, d)` of a claim `f(mn + c) ≡ 0 (mod d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProgressionClaim {
    #[serde(with = "jsonnum::u64")]
    pub m: u64,
    #[serde(with = "jsonnum::u64")]
    pub c: u64,
    #[serde(with = "jsonnum::u64")]
    pub d: u64,
}

impl ProgressionClaim {
    pub fn new(m: u64, c: u64, d: u64) -> Result<Self, CongruenceError> {
        if m == 0 || d == 0 {
            return Err(CongruenceError::InvalidClaim(format!(
                "modulus and divisor must be positive, got m = {m}, d = {d}"
            )));
        }
        if d > crate::arith::MAX_MODULUS {
            return Err(CongruenceError::InvalidClaim(format!(
                "divisor {d} exceeds 2^63-1"
            )));
        }
        Ok(ProgressionClaim { m, c, d })
    }
}

impl std::str::FromStr for ProgressionClaim {
    type Err = CongruenceError;

    /// `m,c,d`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<u64> = s
            .split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CongruenceError::InvalidClaim(format!("`{s}`: {e}")))?;
        match parts[..] {
            [m, c, d] => ProgressionClaim::new(m, c, d),
            _ => Err(CongruenceError::InvalidClaim(format!(
                "`{s}` is not of the form m,c,d"
            ))),
        }
    }
}

/// Ramanujan's congruences for `p(n)` modulo 5, 7 and 11.
pub fn catalog() -> Vec<ProgressionClaim> {
    vec![
        ProgressionClaim { m: 5, c: 4, d: 5 },
        ProgressionClaim { m: 7, c: 5, d: 7 },
        ProgressionClaim { m: 11, c: 6, d: 11 },
    ]
}

/// Reads one `{"m": .., "c": .., "d": ..}` object per line; blank lines and
/// lines starting with `#` are skipped.
pub fn read_claims<R: BufRead>(reader: R) -> Result<Vec<ProgressionClaim>, CongruenceError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let parse = |message: String| CongruenceError::Parse {
            line: i + 1,
            message,
        };
        let line = line.map_err(|e| parse(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let raw: ProgressionClaim =
            serde_json::from_str(trimmed).map_err(|e| parse(e.to_string()))?;
        out.push(ProgressionClaim::new(raw.m, raw.c, raw.d).map_err(|e| parse(e.to_string()))?);
    }
    Ok(out)
}

/// What a claim is about.
#[derive(Debug, Clone, Copy)]
pub enum Subject<'a> {
    PartitionNumbers,
    Restricted(&'a IdentityInstance),
}

#[derive(Debug, Clone, Copy)]
pub struct CongruenceClaim<'a> {
    pub progression: ProgressionClaim,
    pub subject: Subject<'a>,
}

impl<'a> CongruenceClaim<'a> {
    pub fn on_p(progression: ProgressionClaim) -> Self {
        CongruenceClaim {
            progression,
            subject: Subject::PartitionNumbers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Progression index.
    pub n: u64,
    /// `m n + c`.
    pub argument: u64,
    /// Value at the argument, reduced modulo `d`.
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimReport {
    pub pass: bool,
    pub subject: &'static str,
    #[serde(flatten)]
    pub claim: ProgressionClaim,
    /// The claim was evaluated for `0 <= n <= window`.
    pub window: u64,
    pub evidence: &'static str,
    pub violations: Vec<Violation>,
}

/// Evaluates the claim for `0 <= n <= n_max` in `Z/dZ`.
pub fn check_claim(claim: &CongruenceClaim<'_>, n_max: u64) -> ClaimReport {
    check_claim_in(claim, n_max, Ring::Mod(claim.progression.d))
}

/// Like [`check_claim`], computing the values in the given ring first.
pub fn check_claim_in(claim: &CongruenceClaim<'_>, n_max: u64, ring: Ring) -> ClaimReport {
    let ProgressionClaim { m, c, d } = claim.progression;
    let top = m
        .checked_mul(n_max)
        .and_then(|v| v.checked_add(c))
        .expect("claim window overflows");
    let (subject, values) = match claim.subject {
        Subject::PartitionNumbers => ("p", partition_p(top as usize, ring).values),
        Subject::Restricted(inst) => ("P", count_p(&inst.a, top as usize, ring).values),
    };
    let violations: Vec<Violation> = (0..=n_max)
        .filter_map(|n| {
            let argument = m * n + c;
            let value = values.coeff_mod(argument as usize, d);
            (value != 0).then_some(Violation { n, argument, value })
        })
        .collect();
    ClaimReport {
        pass: violations.is_empty(),
        subject,
        claim: claim.progression,
        window: n_max,
        evidence: "finite window only, not a proof",
        violations,
    }
}

/// Turns `p(m_i n + c) ≡ 0 (mod d)` into `P(A; m_i n + a_i c) ≡ 0 (mod d)` for
/// a CRT instance. `index` is 1-based.
pub fn transfer_crt<'a>(
    inst: &'a IdentityInstance,
    index: usize,
    base: &ProgressionClaim,
) -> Result<CongruenceClaim<'a>, CongruenceError> {
    let Provenance::Crt {
        moduli, offsets, ..
    } = &inst.provenance
    else {
        return Err(CongruenceError::WrongShape(
            "not built by the CRT builder".into(),
        ));
    };
    if index == 0 || index > moduli.len() {
        return Err(CongruenceError::IndexOutOfRange {
            index,
            len: moduli.len(),
        });
    }
    let (mi, ai) = (moduli[index - 1], offsets[index - 1]);
    if base.m != mi {
        return Err(CongruenceError::ModulusMismatch {
            expected: mi,
            got: base.m,
        });
    }
    let c = ai
        .checked_mul(base.c)
        .ok_or_else(|| CongruenceError::InvalidClaim("offset a_i c overflows".into()))?;
    Ok(CongruenceClaim {
        progression: ProgressionClaim {
            m: mi,
            c,
            d: base.d,
        },
        subject: Subject::Restricted(inst),
    })
}

/// Transfers `p(m_1 n + c) ≡ 0 (mod d)` to a chain instance. The generating
/// function factors as `Π 1/(1 - q^{r_1 n}) · G(q^{r_1 m_1})`, so the claim
/// lands on `P(A; r_1 (m_1 n + c))`, i.e. progression `(r_1 m_1, r_1 c)`.
/// For `r_1 = 1` this is `P(A; m_1 n + c)`.
pub fn transfer_chain<'a>(
    inst: &'a IdentityInstance,
    base: &ProgressionClaim,
) -> Result<CongruenceClaim<'a>, CongruenceError> {
    let Provenance::Chain { moduli, r, .. } = &inst.provenance else {
        return Err(CongruenceError::WrongShape(
            "not built by the chain builder".into(),
        ));
    };
    let (m1, r1) = (moduli[0], r[0]);
    if base.m != m1 {
        return Err(CongruenceError::ModulusMismatch {
            expected: m1,
            got: base.m,
        });
    }
    let overflow = || CongruenceError::InvalidClaim("transferred progression overflows".into());
    Ok(CongruenceClaim {
        progression: ProgressionClaim {
            m: r1.checked_mul(m1).ok_or_else(overflow)?,
            c: r1.checked_mul(base.c).ok_or_else(overflow)?,
            d: base.d,
        },
        subject: Subject::Restricted(inst),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvolutionMismatch {
    pub n: u64,
    pub direct: SafeInt,
    pub convolution: SafeInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvolutionReport {
    pub pass: bool,
    pub factor: usize,
    pub n_max: u64,
    /// First exponent of the cofactor series that is not a multiple of `m_i`.
    pub stray_exponent: Option<u64>,
    pub first_mismatch: Option<ConvolutionMismatch>,
}

/// Checks `P(A; n) = Σ_{r_i u + m_i v = n} p(u) g(v)` for `n <= n_max`, where
/// `G(q^{m_i}) = Σ g(v) q^{m_i v}` is the product form of the generating
/// function with `Π 1/(1 - q^{r_i n})` divided out. `P` comes from
/// [`count_p`], `p` from the pentagonal recurrence.
pub fn verify_convolution(
    inst: &IdentityInstance,
    index: usize,
    n_max: u64,
) -> Result<ConvolutionReport, CongruenceError> {
    let Provenance::Crt { moduli, r, .. } = &inst.provenance else {
        return Err(CongruenceError::WrongShape(
            "not built by the CRT builder".into(),
        ));
    };
    if index == 0 || index > moduli.len() {
        return Err(CongruenceError::IndexOutOfRange {
            index,
            len: moduli.len(),
        });
    }
    let (mi, ri) = (moduli[index - 1], r[index - 1]);
    let order = n_max as usize;

    let mut cofactor: CoefficientSeries = inst.generating_function(order, Ring::Exact);
    for n in 1..=n_max / ri {
        cofactor.mul_binomial_assign(ri * n);
    }
    let stray_exponent = (0..=n_max).find(|&e| e % mi != 0 && !cofactor.is_zero_at(e as usize));

    let p = partition_p((n_max / ri) as usize, Ring::Exact);
    let direct = count_p(&inst.a, order, Ring::Exact);
    let first_mismatch = (0..=n_max).find_map(|n| {
        let mut conv = BigInt::zero();
        for u in 0..=n / ri {
            let rest = n - ri * u;
            if rest % mi == 0 {
                // g(v) sits at exponent m_i v = rest.
                conv += p.value(u as usize) * cofactor.coeff(rest as usize);
            }
        }
        let want = direct.value(n as usize);
        (want != conv).then_some(ConvolutionMismatch {
            n,
            direct: SafeInt(want),
            convolution: SafeInt(conv),
        })
    });
    Ok(ConvolutionReport {
        pass: stray_exponent.is_none() && first_mismatch.is_none(),
        factor: index,
        n_max,
        stray_exponent,
        first_mismatch,
    })
}
