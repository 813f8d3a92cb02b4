//! Builders for partition identities `P(A; n) = Q(B; n)`.
//!
//! Every identity comes from a finite geometric-series identity
//!
//! ```text
//! 1 + Σ_{a ∈ A} x^a = Π_b (1 - x^{b δ_b}) / (1 - x^b)
//! ```
//!
//! whose right-hand side is recorded as the instance's `factors`. Each factor
//! `(b, b δ_b)` contributes the difference class `bℕ∖bδ_bℕ` to `B`, and the
//! identity holds once those classes are pairwise disjoint.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::arith::{crt_solve, gcd, ArithError, CrtParams, MAX_MODULUS};
use crate::jsonnum;
use crate::series::{product_of_factors, BinomialFactor, CoefficientSeries, Ring};
use crate::sets::{DifferenceClass, MultiplicitySet, ResidueClassUnion, SetError};

/// Largest multiplicity set a builder will enumerate.
pub const MAX_ENUMERATED: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentityError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("divisibility chain broken: r_{index} = {lower} does not divide r_{next} = {upper}", next = .index + 1)]
    ChainViolation {
        index: usize,
        lower: u64,
        upper: u64,
    },
    #[error("multiplicity {value} arises from two different index tuples")]
    DistinctnessViolation { value: u64 },
    #[error("B is not a disjoint union: {0}")]
    DisjointnessViolation(SetError),
    #[error("wrong instance shape: {0}")]
    WrongShape(String),
}

impl From<ArithError> for IdentityError {
    fn from(e: ArithError) -> Self {
        IdentityError::InvalidParams(e.to_string())
    }
}

impl From<SetError> for IdentityError {
    fn from(e: SetError) -> Self {
        match e {
            SetError::Overlap { .. } => IdentityError::DisjointnessViolation(e),
            other => IdentityError::InvalidParams(other.to_string()),
        }
    }
}

/// A positive integer or `∞`. Serialized as a number or `null`, spelled
/// `inf` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Option<jsonnum::SafeU64>", into = "Option<jsonnum::SafeU64>")]
pub enum Bound {
    Finite(u64),
    Infinite,
}

impl From<Option<jsonnum::SafeU64>> for Bound {
    fn from(v: Option<jsonnum::SafeU64>) -> Self {
        v.map_or(Bound::Infinite, |v| Bound::Finite(v.0))
    }
}

impl From<Bound> for Option<jsonnum::SafeU64> {
    fn from(b: Bound) -> Self {
        match b {
            Bound::Finite(v) => Some(jsonnum::SafeU64(v)),
            Bound::Infinite => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{v}"),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Bound {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Bound::Infinite),
            t => t
                .parse::<u64>()
                .map(Bound::Finite)
                .map_err(|e| format!("expected a positive integer or `inf`, got `{t}`: {e}")),
        }
    }
}

impl Bound {
    fn positive(self, what: &str) -> Result<Self, IdentityError> {
        if self == Bound::Finite(0) {
            return Err(IdentityError::InvalidParams(format!(
                "{what} must be positive"
            )));
        }
        Ok(self)
    }
}

/// One factor `(1 - x^num) / (1 - x^den)`; `num = None` means `1 / (1 - x^den)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    #[serde(with = "jsonnum::u64")]
    pub den: u64,
    #[serde(with = "jsonnum::option")]
    pub num: Option<u64>,
}

impl Factor {
    pub fn new(den: u64, num: Option<u64>) -> Self {
        Factor { den, num }
    }

    /// The class `den ℕ ∖ num ℕ` this factor contributes to `B`.
    pub fn class(&self) -> Result<DifferenceClass, SetError> {
        DifferenceClass::new(self.den, self.num)
    }

    /// The factor with `x` replaced by `x^n`, as binomials.
    pub fn binomials(&self, n: u64) -> impl Iterator<Item = BinomialFactor> {
        let den = self.den.checked_mul(n).map(BinomialFactor::Denominator);
        let num = self
            .num
            .and_then(|v| v.checked_mul(n))
            .map(BinomialFactor::Numerator);
        den.into_iter().chain(num)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Preset {
    Euler,
    Glaisher {
        #[serde(with = "jsonnum::u64")]
        d: u64,
    },
    Macmahon,
    Andrews {
        #[serde(with = "jsonnum::u64")]
        r: u64,
    },
    Subbarao {
        l: Bound,
        #[serde(with = "jsonnum::u64")]
        r: u64,
    },
    Nm {
        l: Bound,
        #[serde(with = "jsonnum::u64")]
        r: u64,
        #[serde(with = "jsonnum::u64")]
        a: u64,
        #[serde(with = "jsonnum::u64")]
        p: u64,
    },
}

impl FromStr for Preset {
    type Err = String;

    /// `euler`, `glaisher=4`, `macmahon`, `andrews=2`, `subbarao=l,r`, `nm=l,r,a,p`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, args) = match s.split_once('=') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let nums = |want: usize| -> Result<Vec<Bound>, String> {
            let args = args.ok_or_else(|| format!("preset `{name}` needs {want} argument(s)"))?;
            let vals = args
                .split(',')
                .map(Bound::from_str)
                .collect::<Result<Vec<_>, _>>()?;
            if vals.len() != want {
                return Err(format!(
                    "preset `{name}` takes {want} argument(s), got {}",
                    vals.len()
                ));
            }
            Ok(vals)
        };
        let finite = |b: Bound| match b {
            Bound::Finite(v) => Ok(v),
            Bound::Infinite => Err(format!("only the first argument of `{name}` may be `inf`")),
        };
        match name {
            "euler" if args.is_none() => Ok(Preset::Euler),
            "macmahon" if args.is_none() => Ok(Preset::Macmahon),
            "glaisher" => Ok(Preset::Glaisher {
                d: finite(nums(1)?[0])?,
            }),
            "andrews" => Ok(Preset::Andrews {
                r: finite(nums(1)?[0])?,
            }),
            "subbarao" => {
                let v = nums(2)?;
                Ok(Preset::Subbarao {
                    l: v[0],
                    r: finite(v[1])?,
                })
            }
            "nm" => {
                let v = nums(4)?;
                Ok(Preset::Nm {
                    l: v[0],
                    r: finite(v[1])?,
                    a: finite(v[2])?,
                    p: finite(v[3])?,
                })
            }
            _ => Err(format!("unknown preset `{s}`")),
        }
    }
}

/// Which builder produced an instance, with its resolved parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "lowercase")]
pub enum Provenance {
    Crt {
        #[serde(with = "jsonnum::vec")]
        moduli: Vec<u64>,
        #[serde(with = "jsonnum::vec")]
        offsets: Vec<u64>,
        #[serde(with = "jsonnum::u64")]
        k: u64,
        l: Bound,
        #[serde(with = "jsonnum::u64")]
        modulus: u64,
        #[serde(with = "jsonnum::vec")]
        r: Vec<u64>,
    },
    Chain {
        #[serde(with = "jsonnum::vec")]
        moduli: Vec<u64>,
        #[serde(with = "jsonnum::vec")]
        r: Vec<u64>,
        l: Bound,
    },
    Preset(Preset),
    Manual,
}

/// A constructed identity `P(A; n) = Q(B; n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityInstance {
    #[serde(rename = "A")]
    pub a: MultiplicitySet,
    #[serde(rename = "B")]
    pub b: ResidueClassUnion,
    pub factors: Vec<Factor>,
    pub provenance: Provenance,
}

impl IdentityInstance {
    /// Builds `B` from the factors and checks that its classes are pairwise
    /// disjoint. Trivial factors `(b, b)` contribute nothing and are dropped.
    pub fn assemble(
        a: MultiplicitySet,
        factors: Vec<Factor>,
        provenance: Provenance,
    ) -> Result<Self, IdentityError> {
        let factors: Vec<Factor> = factors
            .into_iter()
            .filter(|f| f.num != Some(f.den))
            .collect();
        let classes = factors
            .iter()
            .map(Factor::class)
            .collect::<Result<Vec<_>, _>>()?;
        let b = ResidueClassUnion::new(classes)?;
        Ok(IdentityInstance {
            a,
            b,
            factors,
            provenance,
        })
    }

    /// All binomial factors of the generating function
    /// `Π_{n ≥ 1} Π_factors (1 - q^{n·num}) / (1 - q^{n·den})` up to `order`.
    pub fn generating_binomials(&self, order: usize) -> Vec<BinomialFactor> {
        let order = order as u64;
        let mut out = Vec::new();
        for f in &self.factors {
            for n in 1..=order / f.den {
                out.extend(f.binomials(n).filter(|b| b.exponent() <= order));
            }
        }
        out
    }

    /// `Σ P(A; n) q^n` computed from the product form of the factors.
    pub fn generating_function(&self, order: usize, ring: Ring) -> CoefficientSeries {
        product_of_factors(&self.generating_binomials(order), order, ring)
    }
}

/// Parameters of the CRT construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrtIdentityParams {
    pub crt: CrtParams,
    pub k: u64,
    pub l: Bound,
    r_override: Option<Vec<u64>>,
    check_override: bool,
}

impl CrtIdentityParams {
    pub fn new(crt: CrtParams, k: u64, l: Bound) -> Self {
        CrtIdentityParams {
            crt,
            k,
            l,
            r_override: None,
            check_override: true,
        }
    }

    /// Uses the given `r_i` in place of the least positive residues. Each must
    /// satisfy `r_i ≡ a_i M_i Mbar_i (mod m)`.
    pub fn with_r(mut self, r: Vec<u64>) -> Self {
        self.r_override = Some(r);
        self.check_override = true;
        self
    }

    /// Like [`with_r`](Self::with_r) without the congruence check; the
    /// builder's distinctness and disjointness assertions still apply.
    pub fn with_unchecked_r(mut self, r: Vec<u64>) -> Self {
        self.r_override = Some(r);
        self.check_override = false;
        self
    }
}

/// Parameters of the divisibility-chain construction: `m_1..m_s` and
/// `r_1..r_{s+1}` with `r_i | r_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainIdentityParams {
    pub moduli: Vec<u64>,
    pub r: Vec<u64>,
    pub l: Bound,
}

/// All sums `Σ w_i j_i` with `0 <= j_i < n_i`, in enumeration order
/// (duplicates kept).
fn weighted_sums(digits: &[(u64, u64)]) -> Result<Vec<u64>, IdentityError> {
    let total = digits
        .iter()
        .try_fold(1u64, |acc, &(_, n)| acc.checked_mul(n))
        .filter(|&t| t <= MAX_ENUMERATED)
        .ok_or_else(|| {
            IdentityError::InvalidParams(format!("more than {MAX_ENUMERATED} multiplicities"))
        })?;
    let mut sums = Vec::with_capacity(total as usize);
    sums.push(0u64);
    for &(w, n) in digits {
        let mut next = Vec::with_capacity(sums.len() * n as usize);
        for j in 0..n {
            let shift = w
                .checked_mul(j)
                .ok_or_else(|| IdentityError::InvalidParams("multiplicity overflows".into()))?;
            for &s in &sums {
                next.push(s.checked_add(shift).ok_or_else(|| {
                    IdentityError::InvalidParams("multiplicity overflows".into())
                })?);
            }
        }
        sums = next;
    }
    Ok(sums)
}

fn first_duplicate(values: &[u64]) -> Option<u64> {
    let mut seen = BTreeSet::new();
    values.iter().copied().find(|&v| !seen.insert(v))
}

/// `A` for a digit system with a final digit of weight `top` ranging over
/// `0..l`, or over all of `ℕ ∪ {0}` when `l = ∞`.
fn multiplicity_set(
    digits: &[(u64, u64)],
    top: u64,
    l: Bound,
) -> Result<MultiplicitySet, IdentityError> {
    match l {
        Bound::Finite(l) => {
            let mut all = digits.to_vec();
            all.push((top, l));
            let sums = weighted_sums(&all)?;
            if let Some(value) = first_duplicate(&sums) {
                return Err(IdentityError::DistinctnessViolation { value });
            }
            Ok(MultiplicitySet::finite(
                sums.into_iter().filter(|&s| s != 0),
            )?)
        }
        Bound::Infinite => {
            let sums = weighted_sums(digits)?;
            let residues: Vec<u64> = sums.iter().map(|&s| s % top).collect();
            if let Some(dup) = first_duplicate(&residues) {
                let value = sums[residues.iter().rposition(|&r| r == dup).unwrap()];
                return Err(IdentityError::DistinctnessViolation { value });
            }
            let core = sums.into_iter().map(|s| if s == 0 { top } else { s });
            Ok(MultiplicitySet::periodic(core, top)?)
        }
    }
}

fn checked_product(
    values: impl IntoIterator<Item = u64>,
    what: &str,
) -> Result<u64, IdentityError> {
    values
        .into_iter()
        .try_fold(1u64, |acc, v| acc.checked_mul(v))
        .filter(|&p| p <= MAX_MODULUS)
        .ok_or_else(|| IdentityError::InvalidParams(format!("{what} exceeds 2^63-1")))
}

/// The factor `(1 - x^{w l}) / (1 - x^w)` for a bound `l`.
fn top_factor(w: u64, l: Bound) -> Result<Factor, IdentityError> {
    Ok(match l {
        Bound::Finite(l) => Factor::new(w, Some(checked_product([w, l], "top factor exponent")?)),
        Bound::Infinite => Factor::new(w, None),
    })
}

/// CRT identity: `A` is the set of nonzero sums `Σ r_i j_i + mk j_{s+1}` and
/// `B = (mkℕ∖mklℕ) ∪ ⋃ (r_iℕ∖r_i m_iℕ)`.
pub fn build_crt(params: &CrtIdentityParams) -> Result<IdentityInstance, IdentityError> {
    if params.k == 0 {
        return Err(IdentityError::InvalidParams("k must be positive".into()));
    }
    let l = params.l.positive("l")?;
    let sol = crt_solve(&params.crt)?;
    let m = sol.modulus;
    let moduli = params.crt.moduli();
    let r = match &params.r_override {
        None => sol.r.clone(),
        Some(r) => {
            if r.len() != moduli.len() {
                return Err(IdentityError::InvalidParams(format!(
                    "{} r-values given for {} moduli",
                    r.len(),
                    moduli.len()
                )));
            }
            if let Some(i) = r.iter().position(|&x| x == 0) {
                return Err(IdentityError::InvalidParams(format!(
                    "r_{} must be positive",
                    i + 1
                )));
            }
            if params.check_override {
                if let Some(i) = (0..r.len()).find(|&i| r[i] % m != sol.r[i] % m) {
                    return Err(IdentityError::InvalidParams(format!(
                        "r_{} = {} is not congruent to a_i M_i Mbar_i = {} modulo {}",
                        i + 1,
                        r[i],
                        sol.r[i],
                        m
                    )));
                }
            }
            r.clone()
        }
    };
    let mk = checked_product([m, params.k], "mk")?;

    let digits: Vec<(u64, u64)> = r.iter().copied().zip(moduli.iter().copied()).collect();
    let a = multiplicity_set(&digits, mk, l)?;

    let mut factors = vec![top_factor(mk, l)?];
    for (&ri, &mi) in r.iter().zip(moduli) {
        factors.push(Factor::new(ri, Some(checked_product([ri, mi], "r_i m_i")?)));
    }
    IdentityInstance::assemble(
        a,
        factors,
        Provenance::Crt {
            moduli: moduli.to_vec(),
            offsets: params.crt.offsets().to_vec(),
            k: params.k,
            l,
            modulus: m,
            r,
        },
    )
}

/// Divisibility-chain identity with weights
/// `w_i = m_1 ⋯ m_{i-1} r_i` for `i = 1..=s+1`.
pub fn build_chain(params: &ChainIdentityParams) -> Result<IdentityInstance, IdentityError> {
    let s = params.moduli.len();
    if s == 0 {
        return Err(IdentityError::InvalidParams(
            "at least one modulus is required".into(),
        ));
    }
    if params.r.len() != s + 1 {
        return Err(IdentityError::InvalidParams(format!(
            "{s} moduli need {} r-values, got {}",
            s + 1,
            params.r.len()
        )));
    }
    if params.moduli.contains(&0) || params.r.contains(&0) {
        return Err(IdentityError::InvalidParams(
            "moduli and r-values must be positive".into(),
        ));
    }
    let l = params.l.positive("l")?;
    for (i, w) in params.r.windows(2).enumerate() {
        if w[1] % w[0] != 0 {
            return Err(IdentityError::ChainViolation {
                index: i + 1,
                lower: w[0],
                upper: w[1],
            });
        }
    }

    let mut prefix = 1u64;
    let mut digits = Vec::with_capacity(s);
    let mut factors = Vec::with_capacity(s + 1);
    for (&mi, &ri) in params.moduli.iter().zip(&params.r) {
        let w = checked_product([prefix, ri], "chain weight")?;
        digits.push((w, mi));
        factors.push(Factor::new(
            w,
            Some(checked_product([w, mi], "chain weight")?),
        ));
        prefix = checked_product([prefix, mi], "modulus product")?;
    }
    let top = checked_product([prefix, params.r[s]], "chain weight")?;
    factors.push(top_factor(top, l)?);

    let a = multiplicity_set(&digits, top, l)?;
    IdentityInstance::assemble(
        a,
        factors,
        Provenance::Chain {
            moduli: params.moduli.clone(),
            r: params.r.clone(),
            l,
        },
    )
}

/// The classical identities, each built from its own closed form.
pub fn build_preset(preset: &Preset) -> Result<IdentityInstance, IdentityError> {
    let invalid = |msg: &str| Err(IdentityError::InvalidParams(msg.into()));
    let (a, factors) = match *preset {
        // 1 + x = (1 - x^2) / (1 - x)
        Preset::Euler => (MultiplicitySet::finite([1])?, vec![Factor::new(1, Some(2))]),
        // 1 + x + ... + x^{d-1} = (1 - x^d) / (1 - x)
        Preset::Glaisher { d } => {
            if d < 2 {
                return invalid("glaisher needs d >= 2");
            }
            (
                MultiplicitySet::finite(1..d)?,
                vec![Factor::new(1, Some(d))],
            )
        }
        // 1 + x^2 + x^3 + ... = 1/(1 - x^2) · (1 - x^6)/(1 - x^3)
        Preset::Macmahon => (
            MultiplicitySet::periodic([2], 1)?,
            vec![Factor::new(2, None), Factor::new(3, Some(6))],
        ),
        // (1 + x^2 + x^4 + ...)(1 + x^{2r+1}) = 1/(1 - x^2) · (1 - x^{4r+2})/(1 - x^{2r+1})
        Preset::Andrews { r } => {
            if r < 1 {
                return invalid("andrews needs r >= 1");
            }
            let odd = checked_product([2, r], "2r")? + 1;
            (
                MultiplicitySet::periodic([2, odd], 2)?,
                vec![Factor::new(2, None), Factor::new(odd, Some(2 * odd))],
            )
        }
        // Σ_{i<l} x^{2i} (1 + x^{2r+1}) = (1 - x^{2l})/(1 - x^2) · (1 - x^{4r+2})/(1 - x^{2r+1})
        Preset::Subbarao { l, r } => {
            let odd = checked_product([2, r], "2r")? + 1;
            let a = match l {
                Bound::Finite(l) if l <= 1 => return invalid("subbarao needs l > 1"),
                Bound::Finite(l) => {
                    let sums = weighted_sums(&[(2, l), (odd, 2)])?;
                    if let Some(value) = first_duplicate(&sums) {
                        return Err(IdentityError::DistinctnessViolation { value });
                    }
                    MultiplicitySet::finite(sums.into_iter().filter(|&v| v != 0))?
                }
                Bound::Infinite => MultiplicitySet::periodic([2, odd], 2)?,
            };
            (a, vec![top_factor(2, l)?, Factor::new(odd, Some(2 * odd))])
        }
        // Σ_{i<l} Σ_{j<p} x^{pi + (pr+a)j} = (1 - x^{pl})/(1 - x^p) · (1 - x^{p(pr+a)})/(1 - x^{pr+a})
        Preset::Nm { l, r, a, p } => {
            if r == 0 || a == 0 || p == 0 {
                return invalid("nm needs positive r, a and p");
            }
            if gcd(a, p) != 1 {
                return invalid("nm needs gcd(a, p) = 1");
            }
            let l = l.positive("l")?;
            let step = checked_product([p, r], "pr")?
                .checked_add(a)
                .ok_or_else(|| IdentityError::InvalidParams("pr + a overflows".into()))?;
            let set = match l {
                Bound::Finite(l) => {
                    let sums = weighted_sums(&[(p, l), (step, p)])?;
                    if let Some(value) = first_duplicate(&sums) {
                        return Err(IdentityError::DistinctnessViolation { value });
                    }
                    MultiplicitySet::finite(sums.into_iter().filter(|&v| v != 0))?
                }
                Bound::Infinite => {
                    let core = (1..p).map(|j| step * j).chain([p]);
                    MultiplicitySet::periodic(core, p)
                        .map_err(|_| IdentityError::DistinctnessViolation { value: step })?
                }
            };
            (
                set,
                vec![
                    top_factor(p, l)?,
                    Factor::new(step, Some(checked_product([p, step], "p(pr+a)")?)),
                ],
            )
        }
    };
    IdentityInstance::assemble(a, factors, Provenance::Preset(preset.clone()))
}

/// Checks `1 + Σ_{a ∈ A} x^a = Π (1 - x^{num}) / (1 - x^{den})` modulo `x^{N+1}`.
pub fn verify_polynomial(inst: &IdentityInstance, order: usize) -> bool {
    let lhs = CoefficientSeries::from_exponents(
        order,
        Ring::Exact,
        std::iter::once(0).chain(inst.a.elements_up_to(order as u64)),
    );
    let rhs_factors: Vec<BinomialFactor> =
        inst.factors.iter().flat_map(|f| f.binomials(1)).collect();
    lhs == product_of_factors(&rhs_factors, order, Ring::Exact)
}

/// `ℕ ∖ A` for a CRT instance with `k = 1` and `l = ∞`: for every
/// representative `ρ = Σ r_i j_i`, the positive numbers below `ρ` that are
/// congruent to it modulo `m`.
pub fn finite_complement(inst: &IdentityInstance) -> Result<BTreeSet<u64>, IdentityError> {
    let Provenance::Crt {
        moduli,
        k,
        l,
        modulus,
        r,
        ..
    } = &inst.provenance
    else {
        return Err(IdentityError::WrongShape(
            "not built by the CRT builder".into(),
        ));
    };
    if *k != 1 || *l != Bound::Infinite {
        return Err(IdentityError::WrongShape(format!(
            "needs k = 1 and l = inf, got k = {k}, l = {l}"
        )));
    }
    let digits: Vec<(u64, u64)> = r.iter().copied().zip(moduli.iter().copied()).collect();
    let mut out = BTreeSet::new();
    for rho in weighted_sums(&digits)? {
        out.extend(
            (1..=rho / modulus)
                .map(|t| rho - t * modulus)
                .filter(|&x| x >= 1),
        );
    }
    Ok(out)
}
