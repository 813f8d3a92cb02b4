//! Difference classes `aℕ∖bℕ`, disjoint unions of them, and multiplicity sets.
//!
//! `ℕ` starts at 1 everywhere in this module. An excluded modulus of `None`
//! stands for `b = ∞`: the class is then every positive multiple of `a`.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

use crate::arith::lcm;
use crate::jsonnum;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("class {0} has an infinite exclusion and no finite residue expansion")]
    InfiniteExclusion(DifferenceClass),
    #[error("invalid difference class: {0}")]
    InvalidClass(String),
    #[error("invalid multiplicity set: {0}")]
    InvalidMultiplicitySet(String),
    #[error("classes #{first} = {a} and #{second} = {b} intersect (both contain {witness})")]
    Overlap {
        first: usize,
        second: usize,
        a: DifferenceClass,
        b: DifferenceClass,
        witness: u64,
    },
    #[error("period of the residue system overflows 64 bits")]
    Overflow,
}

/// `aℕ∖bℕ`: positive multiples of `base` that are not multiples of `excluded`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawClass")]
pub struct DifferenceClass {
    #[serde(with = "jsonnum::u64")]
    base: u64,
    #[serde(with = "jsonnum::option")]
    excluded: Option<u64>,
}

#[derive(Deserialize)]
struct RawClass {
    #[serde(with = "jsonnum::u64")]
    base: u64,
    #[serde(with = "jsonnum::option")]
    excluded: Option<u64>,
}

impl TryFrom<RawClass> for DifferenceClass {
    type Error = SetError;

    fn try_from(raw: RawClass) -> Result<Self, SetError> {
        DifferenceClass::new(raw.base, raw.excluded)
    }
}

impl fmt::Display for DifferenceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.excluded {
            Some(b) => write!(f, "{}N\\{}N", self.base, b),
            None => write!(f, "{}N", self.base),
        }
    }
}

impl DifferenceClass {
    pub fn new(base: u64, excluded: Option<u64>) -> Result<Self, SetError> {
        if base == 0 {
            return Err(SetError::InvalidClass("base must be positive".into()));
        }
        if excluded == Some(0) {
            return Err(SetError::InvalidClass(
                "excluded modulus must be positive".into(),
            ));
        }
        Ok(DifferenceClass { base, excluded })
    }

    /// All positive multiples of `base`.
    pub fn multiples(base: u64) -> Result<Self, SetError> {
        Self::new(base, None)
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn excluded(&self) -> Option<u64> {
        self.excluded
    }

    pub fn contains(&self, x: u64) -> bool {
        x >= 1 && x % self.base == 0 && self.excluded.map_or(true, |b| x % b != 0)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.excluded, Some(b) if self.base % b == 0)
    }

    /// Period of the membership indicator.
    pub fn period(&self) -> Option<u64> {
        match self.excluded {
            Some(b) => lcm(self.base, b),
            None => Some(self.base),
        }
    }

    /// Residues `r` modulo `lcm(a, b)` with `a | r` and `b ∤ r`.
    pub fn expand_residues(&self) -> Result<Residues, SetError> {
        if self.excluded.is_none() {
            return Err(SetError::InfiniteExclusion(*self));
        }
        self.expand_residues_or_base()
    }

    /// Like [`expand_residues`](Self::expand_residues), but a class with an
    /// infinite exclusion expands to the single pair `(a, 0)`.
    pub fn expand_residues_or_base(&self) -> Result<Residues, SetError> {
        let modulus = self.period().ok_or(SetError::Overflow)?;
        let residues = (0..modulus)
            .step_by(self.base as usize)
            .filter(|&r| self.excluded.map_or(true, |b| r % b != 0))
            .collect();
        Ok(Residues { modulus, residues })
    }

    /// Smallest member, `None` for an empty class.
    pub fn min_element(&self) -> Option<u64> {
        if self.is_empty() {
            return None;
        }
        (1..).map(|t| t * self.base).find(|&x| self.contains(x))
    }
}

pub fn class_contains(c: &DifferenceClass, x: u64) -> bool {
    c.contains(x)
}

pub fn expand_residues(c: &DifferenceClass) -> Result<Residues, SetError> {
    c.expand_residues()
}

/// A union of residue classes sharing one modulus. Residue 0 stands for the
/// positive multiples of the modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Residues {
    #[serde(with = "jsonnum::u64")]
    pub modulus: u64,
    #[serde(with = "jsonnum::vec")]
    pub residues: Vec<u64>,
}

impl Residues {
    pub fn contains(&self, x: u64) -> bool {
        x >= 1 && self.residues.binary_search(&(x % self.modulus)).is_ok()
    }

    /// Re-expresses the same set modulo a multiple of the current modulus.
    pub fn lift(&self, modulus: u64) -> Residues {
        assert!(
            modulus % self.modulus == 0,
            "{modulus} is not a multiple of {}",
            self.modulus
        );
        let mut residues: Vec<u64> = (0..modulus / self.modulus)
            .flat_map(|t| self.residues.iter().map(move |&r| r + t * self.modulus))
            .collect();
        residues.sort_unstable();
        Residues { modulus, residues }
    }
}

/// First pair of classes that share an element, with the smallest common
/// element as witness.
///
/// Both classes can only meet in multiples `x = L t` of `L = lcm(a, a')`.
/// Writing `e = b / gcd(b, L)`, `b | L t` holds iff `e | t`, so the pair meets
/// iff neither `e` nor `e'` equals 1, in which case `L` itself is common.
pub fn first_overlap(classes: &[DifferenceClass]) -> Option<(usize, usize, u64)> {
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            let (c, d) = (&classes[i], &classes[j]);
            if c.is_empty() || d.is_empty() {
                continue;
            }
            let common = match lcm(c.base, d.base) {
                Some(l) => l,
                // No multiple of both fits in 64 bits; the classes can only meet beyond that.
                None => continue,
            };
            if c.contains(common) && d.contains(common) {
                return Some((i, j, common));
            }
        }
    }
    None
}

/// True iff the classes are pairwise disjoint as sets of positive integers.
pub fn verify_disjoint(classes: &[DifferenceClass]) -> bool {
    first_overlap(classes).is_none()
}

/// A pairwise-disjoint union of difference classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DifferenceClass>", into = "Vec<DifferenceClass>")]
pub struct ResidueClassUnion {
    classes: Vec<DifferenceClass>,
}

impl TryFrom<Vec<DifferenceClass>> for ResidueClassUnion {
    type Error = SetError;

    fn try_from(classes: Vec<DifferenceClass>) -> Result<Self, SetError> {
        ResidueClassUnion::new(classes)
    }
}

impl From<ResidueClassUnion> for Vec<DifferenceClass> {
    fn from(u: ResidueClassUnion) -> Self {
        u.classes
    }
}

impl ResidueClassUnion {
    pub fn new(classes: Vec<DifferenceClass>) -> Result<Self, SetError> {
        if let Some((first, second, witness)) = first_overlap(&classes) {
            return Err(SetError::Overlap {
                first,
                second,
                a: classes[first],
                b: classes[second],
                witness,
            });
        }
        Ok(ResidueClassUnion { classes })
    }

    pub fn classes(&self) -> &[DifferenceClass] {
        &self.classes
    }

    pub fn contains(&self, x: u64) -> bool {
        self.classes.iter().any(|c| c.contains(x))
    }

    /// Sorted members in `[1, n]`.
    pub fn members_up_to(&self, n: u64) -> Vec<u64> {
        let mut out: Vec<u64> = self
            .classes
            .iter()
            .flat_map(|c| {
                (1..=n / c.base)
                    .map(move |t| t * c.base)
                    .filter(move |&x| c.contains(x))
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Period of the membership indicator of the union.
    pub fn period(&self) -> Option<u64> {
        self.classes
            .iter()
            .try_fold(1u64, |acc, c| c.period().and_then(|p| lcm(acc, p)))
    }

    /// The whole union written modulo its period.
    pub fn residue_set(&self) -> Result<Residues, SetError> {
        let modulus = self.period().ok_or(SetError::Overflow)?;
        let mut residues = BTreeSet::new();
        for c in &self.classes {
            residues.extend(c.expand_residues_or_base()?.lift(modulus).residues);
        }
        Ok(Residues {
            modulus,
            residues: residues.into_iter().collect(),
        })
    }

    /// Set equality, decided over one common period.
    pub fn set_eq(&self, other: &ResidueClassUnion) -> bool {
        match self
            .period()
            .zip(other.period())
            .and_then(|(p, q)| lcm(p, q))
        {
            Some(period) => (1..=period).all(|x| self.contains(x) == other.contains(x)),
            None => false,
        }
    }

    /// The union with class `index` removed.
    pub fn without_class(&self, index: usize) -> ResidueClassUnion {
        let mut classes = self.classes.clone();
        classes.remove(index);
        ResidueClassUnion { classes }
    }
}

/// The set of allowed part multiplicities: a finite set, or
/// `{c + p t : c ∈ core, t ≥ 0}` for a period `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMultiplicitySet")]
pub struct MultiplicitySet {
    #[serde(with = "jsonnum::vec")]
    core: BTreeSet<u64>,
    #[serde(with = "jsonnum::option")]
    period: Option<u64>,
}

#[derive(Deserialize)]
struct RawMultiplicitySet {
    #[serde(with = "jsonnum::vec")]
    core: BTreeSet<u64>,
    #[serde(with = "jsonnum::option")]
    period: Option<u64>,
}

impl TryFrom<RawMultiplicitySet> for MultiplicitySet {
    type Error = SetError;

    fn try_from(raw: RawMultiplicitySet) -> Result<Self, SetError> {
        match raw.period {
            Some(p) => MultiplicitySet::periodic(raw.core, p),
            None => MultiplicitySet::finite(raw.core),
        }
    }
}

impl MultiplicitySet {
    pub fn finite(core: impl IntoIterator<Item = u64>) -> Result<Self, SetError> {
        let core: BTreeSet<u64> = core.into_iter().collect();
        if core.contains(&0) {
            return Err(SetError::InvalidMultiplicitySet(
                "0 is not a multiplicity".into(),
            ));
        }
        Ok(MultiplicitySet { core, period: None })
    }

    /// Core elements must be positive and pairwise incongruent modulo `period`.
    pub fn periodic(core: impl IntoIterator<Item = u64>, period: u64) -> Result<Self, SetError> {
        if period == 0 {
            return Err(SetError::InvalidMultiplicitySet(
                "period must be positive".into(),
            ));
        }
        let core: BTreeSet<u64> = core.into_iter().collect();
        if core.contains(&0) {
            return Err(SetError::InvalidMultiplicitySet(
                "0 is not a multiplicity".into(),
            ));
        }
        let mut seen = BTreeMap::new();
        for &c in &core {
            if let Some(prev) = seen.insert(c % period, c) {
                return Err(SetError::InvalidMultiplicitySet(format!(
                    "core elements {prev} and {c} are congruent modulo {period}"
                )));
            }
        }
        Ok(MultiplicitySet {
            core,
            period: Some(period),
        })
    }

    pub fn core(&self) -> &BTreeSet<u64> {
        &self.core
    }

    pub fn period(&self) -> Option<u64> {
        self.period
    }

    pub fn is_finite(&self) -> bool {
        self.period.is_none() || self.core.is_empty()
    }

    pub fn contains(&self, d: u64) -> bool {
        if d == 0 {
            return false;
        }
        match self.period {
            None => self.core.contains(&d),
            Some(p) => self
                .core
                .iter()
                .take_while(|&&c| c <= d)
                .any(|&c| (d - c) % p == 0),
        }
    }

    /// Sorted members in `[1, n]`.
    pub fn elements_up_to(&self, n: u64) -> Vec<u64> {
        match self.period {
            None => self.core.range(..=n).copied().collect(),
            Some(p) => {
                let mut out: Vec<u64> = self
                    .core
                    .range(..=n)
                    .flat_map(|&c| (0..=(n - c) / p).map(move |t| c + t * p))
                    .collect();
                out.sort_unstable();
                out
            }
        }
    }

    /// Number of elements, `None` if infinite.
    pub fn len(&self) -> Option<usize> {
        self.is_finite().then_some(self.core.len())
    }

    pub fn is_empty(&self) -> bool {
        self.core.is_empty()
    }

    /// Set equality.
    pub fn set_eq(&self, other: &MultiplicitySet) -> bool {
        if self.is_finite() != other.is_finite() {
            return false;
        }
        let top = self
            .core
            .last()
            .max(other.core.last())
            .copied()
            .unwrap_or(0);
        let span = match (self.period, other.period) {
            (Some(p), Some(q)) => match lcm(p, q) {
                Some(l) => l,
                None => return false,
            },
            _ => 0,
        };
        (1..=top + span).all(|d| self.contains(d) == other.contains(d))
    }

    /// The set with the single element `d` removed, when that set is still
    /// representable. For a periodic set only core elements can be removed:
    /// dropping `c` leaves `c + p` as the new representative of its class.
    pub fn without(&self, d: u64) -> Option<MultiplicitySet> {
        if !self.core.contains(&d) {
            return None;
        }
        let mut core = self.core.clone();
        core.remove(&d);
        if let Some(p) = self.period {
            core.insert(d + p);
        }
        Some(MultiplicitySet {
            core,
            period: self.period,
        })
    }
}

pub fn mult_contains(a: &MultiplicitySet, d: u64) -> bool {
    a.contains(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn class(a: u64, b: Option<u64>) -> DifferenceClass {
        DifferenceClass::new(a, b).unwrap()
    }

    #[test]
    fn contains_examples() {
        let c = class(2, Some(3));
        assert!(c.contains(4));
        assert!(!c.contains(6));
        let c = class(15, Some(30));
        assert!(c.contains(15));
        assert!(!c.contains(30));
        assert!(class(6, None).contains(600));
        assert!(!class(6, None).contains(0));
    }

    #[test]
    fn expand_examples() {
        let r = class(2, Some(3)).expand_residues().unwrap();
        assert_eq!((r.modulus, r.residues), (6, vec![2, 4]));
        let r = class(6, Some(30)).expand_residues().unwrap();
        assert_eq!((r.modulus, r.residues), (30, vec![6, 12, 18, 24]));
        let r = class(4, Some(12)).expand_residues().unwrap();
        assert_eq!((r.modulus, r.residues), (12, vec![4, 8]));
        assert_eq!(
            class(6, None).expand_residues(),
            Err(SetError::InfiniteExclusion(class(6, None)))
        );
        let r = class(6, None).expand_residues_or_base().unwrap();
        assert_eq!((r.modulus, r.residues), (6, vec![0]));
    }

    #[test]
    fn disjointness_examples() {
        let ex = [class(15, Some(30)), class(10, Some(30)), class(6, Some(30))];
        assert!(verify_disjoint(&ex));
        let u = ResidueClassUnion::new(ex.to_vec()).unwrap();
        let r = u.residue_set().unwrap();
        assert_eq!(r.modulus, 30);
        assert_eq!(r.residues, vec![6, 10, 12, 15, 18, 20, 24]);

        assert_eq!(
            first_overlap(&[class(2, Some(4)), class(6, Some(12))]),
            Some((0, 1, 6))
        );
        assert!(matches!(
            ResidueClassUnion::new(vec![class(2, Some(4)), class(6, Some(12))]),
            Err(SetError::Overlap { witness: 6, .. })
        ));
        assert!(verify_disjoint(&[class(3, Some(9))]));
        assert!(verify_disjoint(&[]));
    }

    #[test]
    fn union_with_infinite_class() {
        let u = ResidueClassUnion::new(vec![class(6, None), class(3, Some(6)), class(4, Some(12))])
            .unwrap();
        let r = u.residue_set().unwrap();
        assert_eq!(r.modulus, 12);
        assert_eq!(r.residues, vec![0, 3, 4, 6, 8, 9]);
        assert_eq!(u.members_up_to(13), vec![3, 4, 6, 8, 9, 12]);
    }

    #[test]
    fn multiplicity_membership() {
        let a = MultiplicitySet::finite([1]).unwrap();
        assert!(a.contains(1));
        assert!(!a.contains(2));

        // ℕ∖{1, 2, 5} with period 6.
        let a = MultiplicitySet::periodic([3, 4, 6, 7, 8, 11], 6).unwrap();
        assert!(!a.contains(5));
        assert!(a.contains(7));
        assert_eq!(
            (1..=30).filter(|&d| !a.contains(d)).collect::<Vec<_>>(),
            vec![1, 2, 5]
        );

        let a = MultiplicitySet::periodic([3], 6).unwrap();
        assert!(a.contains(3) && a.contains(9) && a.contains(15));
        assert!(!a.contains(6));
        assert_eq!(a.elements_up_to(20), vec![3, 9, 15]);
    }

    #[test]
    fn multiplicity_validation() {
        assert!(MultiplicitySet::finite([0, 1]).is_err());
        assert!(MultiplicitySet::periodic([1, 7], 6).is_err());
        assert!(MultiplicitySet::periodic([1], 0).is_err());
        let json = r#"{"core":[1,7],"period":6}"#;
        assert!(serde_json::from_str::<MultiplicitySet>(json).is_err());
    }

    #[test]
    fn without_keeps_representation() {
        let a = MultiplicitySet::periodic([2, 3], 2).unwrap();
        let b = a.without(3).unwrap();
        assert!(!b.contains(3) && b.contains(5) && b.contains(4));
        assert!(a.without(5).is_none());
        let f = MultiplicitySet::finite([1, 2, 3]).unwrap();
        assert_eq!(f.without(2).unwrap().core().len(), 2);
    }

    #[test]
    fn json_shapes() {
        let c = class(6, None);
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"base":6,"excluded":null}"#
        );
        let a = MultiplicitySet::periodic([3], 6).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            r#"{"core":[3],"period":6}"#
        );
        let u: ResidueClassUnion =
            serde_json::from_str(r#"[{"base":2,"excluded":4},{"base":4,"excluded":null}]"#)
                .unwrap();
        assert_eq!(u.classes().len(), 2);
        assert!(serde_json::from_str::<ResidueClassUnion>(
            r#"[{"base":2,"excluded":4},{"base":6,"excluded":12}]"#
        )
        .is_err());
        assert!(serde_json::from_str::<DifferenceClass>(r#"{"base":0,"excluded":null}"#).is_err());
    }

    fn small_class() -> impl Strategy<Value = DifferenceClass> {
        (1u64..=12, prop::option::weighted(0.8, 1u64..=6))
            .prop_map(|(a, t)| class(a, t.map(|t| a * t)))
    }

    fn scan_overlap(classes: &[DifferenceClass]) -> bool {
        let period = classes
            .iter()
            .fold(1, |acc, c| lcm(acc, c.period().unwrap()).unwrap());
        (1..=period).all(|x| classes.iter().filter(|c| c.contains(x)).count() <= 1)
    }

    fn residue_list_overlap(classes: &[DifferenceClass]) -> bool {
        let period = classes
            .iter()
            .fold(1, |acc, c| lcm(acc, c.period().unwrap()).unwrap());
        let mut seen = BTreeSet::new();
        for c in classes {
            for r in c.expand_residues_or_base().unwrap().lift(period).residues {
                if !seen.insert(r) {
                    return false;
                }
            }
        }
        true
    }

    proptest! {
        #[test]
        fn contains_agrees_with_residues(c in small_class(), x in 1u64..2000) {
            let r = c.expand_residues_or_base().unwrap();
            prop_assert_eq!(c.contains(x), r.contains(x));
        }

        #[test]
        fn disjointness_agrees_with_scans(classes in prop::collection::vec(small_class(), 0..5)) {
            let fast = verify_disjoint(&classes);
            prop_assert_eq!(fast, scan_overlap(&classes));
            prop_assert_eq!(fast, residue_list_overlap(&classes));
        }

        #[test]
        fn periodic_membership_repeats(
            core in prop::collection::btree_set(1u64..40, 0..6),
            p in 1u64..15,
            d in 1u64..200,
        ) {
            let mut by_residue = BTreeMap::new();
            for c in core {
                by_residue.entry(c % p).or_insert(c);
            }
            let a = MultiplicitySet::periodic(by_residue.into_values(), p).unwrap();
            let top = a.core().last().copied().unwrap_or(0);
            if d > top {
                prop_assert_eq!(a.contains(d), a.contains(d + p));
            }
        }
    }
}
