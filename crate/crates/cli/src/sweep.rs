//! Seeded batch verification over sampled CRT and chain parameter tuples.
//!
//! Tuples are drawn from a ChaCha stream, deduplicated and sorted, then
//! verified in parallel. Results are reported in tuple order, so the summary
//! depends only on the configuration.

use std::collections::BTreeSet;

use partition_crt_core::arith::gcd;
use partition_crt_core::partitions::ORACLE_LIMIT;
use partition_crt_core::{
    build_chain, build_crt, catalog, check_claim, transfer_chain, transfer_crt, verify_counts,
    verify_polynomial, Bound, ChainIdentityParams, CongruenceClaim, CrtIdentityParams, CrtParams,
    IdentityError, IdentityInstance, ProgressionClaim,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Largest ratio `r_{i+1} / r_i` drawn for chain tuples.
pub const CHAIN_RATIO_MAX: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub s_max: usize,
    pub m_max: u64,
    pub k_max: u64,
    pub l_max: u64,
    pub n_max: u64,
    pub oracle_max: u64,
    pub seed: u64,
    pub count: usize,
    pub window: u64,
    pub inject_fault: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            s_max: 3,
            m_max: 7,
            k_max: 2,
            l_max: 3,
            n_max: 120,
            oracle_max: 30,
            seed: 0,
            count: 200,
            window: 100,
            inject_fault: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("--s-max", self.s_max as u64),
            ("--k-max", self.k_max),
            ("--l-max", self.l_max),
            ("--count", self.count as u64),
        ];
        if let Some((flag, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(format!("{flag} must be positive"));
        }
        if !(2..=64).contains(&self.m_max) {
            return Err(format!("--m-max must lie in 2..=64, got {}", self.m_max));
        }
        if self.s_max > 6 || self.k_max > 64 || self.l_max > 64 {
            return Err("--s-max is limited to 6, --k-max and --l-max to 64".into());
        }
        if self.oracle_max > self.n_max || self.oracle_max > ORACLE_LIMIT {
            return Err(format!(
                "--oracle-max must not exceed --n-max or {ORACLE_LIMIT}"
            ));
        }
        Ok(())
    }
}

/// One parameter tuple. The derived order is the report order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "builder", rename_all = "lowercase")]
pub enum SweepCase {
    Crt {
        m: Vec<u64>,
        a: Vec<u64>,
        k: u64,
        l: Bound,
    },
    Chain {
        m: Vec<u64>,
        r: Vec<u64>,
        l: Bound,
    },
}

impl SweepCase {
    pub fn build(&self) -> Result<IdentityInstance, IdentityError> {
        match self {
            SweepCase::Crt { m, a, k, l } => {
                let crt = CrtParams::new(m.clone(), a.clone())?;
                build_crt(&CrtIdentityParams::new(crt, *k, *l))
            }
            SweepCase::Chain { m, r, l } => build_chain(&ChainIdentityParams {
                moduli: m.clone(),
                r: r.clone(),
                l: *l,
            }),
        }
    }
}

fn sample_bound(rng: &mut ChaCha8Rng, l_max: u64) -> Bound {
    match rng.gen_range(0..=l_max) {
        0 => Bound::Infinite,
        l => Bound::Finite(l),
    }
}

fn sample_crt(rng: &mut ChaCha8Rng, cfg: &SweepConfig) -> SweepCase {
    let s = rng.gen_range(1..=cfg.s_max);
    let mut candidates: Vec<u64> = (2..=cfg.m_max).collect();
    candidates.shuffle(rng);
    let mut m: Vec<u64> = Vec::with_capacity(s);
    for c in candidates {
        if m.len() == s {
            break;
        }
        if m.iter().all(|&x| gcd(x, c) == 1) {
            m.push(c);
        }
    }
    let a = m
        .iter()
        .map(|&mi| loop {
            let ai = rng.gen_range(1..mi);
            if gcd(ai, mi) == 1 {
                break ai;
            }
        })
        .collect();
    SweepCase::Crt {
        m,
        a,
        k: rng.gen_range(1..=cfg.k_max),
        l: sample_bound(rng, cfg.l_max),
    }
}

fn sample_chain(rng: &mut ChaCha8Rng, cfg: &SweepConfig) -> SweepCase {
    let s = rng.gen_range(1..=cfg.s_max);
    let m = (0..s).map(|_| rng.gen_range(2..=cfg.m_max)).collect();
    let mut r = vec![rng.gen_range(1..=CHAIN_RATIO_MAX)];
    for _ in 0..s {
        let next = r[r.len() - 1] * rng.gen_range(1..=CHAIN_RATIO_MAX);
        r.push(next);
    }
    SweepCase::Chain {
        m,
        r,
        l: sample_bound(rng, cfg.l_max),
    }
}

/// Up to `cfg.count` distinct tuples, alternating CRT and chain draws,
/// sorted.
pub fn sample_cases(cfg: &SweepConfig) -> Vec<SweepCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cases = BTreeSet::new();
    let attempts = cfg.count.saturating_mul(20);
    for i in 0..attempts {
        if cases.len() == cfg.count {
            break;
        }
        let case = if i % 2 == 0 {
            sample_crt(&mut rng, cfg)
        } else {
            sample_chain(&mut rng, cfg)
        };
        cases.insert(case);
    }
    cases.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransferCheck {
    /// 1-based CRT factor index; absent for chain transfers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<usize>,
    pub base: ProgressionClaim,
    pub claim: ProgressionClaim,
    pub pass: bool,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseResult {
    #[serde(flatten)]
    pub case: SweepCase,
    pub pass: bool,
    pub polynomial: bool,
    /// First `n` at which the count tables disagree.
    pub first_mismatch: Option<u64>,
    pub congruences: Vec<TransferCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub pass: bool,
    pub seed: u64,
    pub requested: usize,
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    pub congruence_checks: usize,
    pub congruence_failures: usize,
    pub results: Vec<CaseResult>,
}

fn transfers(inst: &IdentityInstance, case: &SweepCase, window: u64) -> Vec<TransferCheck> {
    let known = catalog();
    let base_for = |m: u64| known.iter().find(|b| b.m == m).copied();
    let mut out = Vec::new();
    let mut push = |factor: Option<usize>, base: ProgressionClaim, claim: CongruenceClaim<'_>| {
        let report = check_claim(&claim, window);
        out.push(TransferCheck {
            factor,
            base,
            claim: claim.progression,
            pass: report.pass,
            violations: report.violations.len(),
        });
    };
    match case {
        SweepCase::Crt { m, .. } => {
            for (i, &mi) in m.iter().enumerate() {
                if let Some(base) = base_for(mi) {
                    if let Ok(claim) = transfer_crt(inst, i + 1, &base) {
                        push(Some(i + 1), base, claim);
                    }
                }
            }
        }
        SweepCase::Chain { m, .. } => {
            if let Some(base) = base_for(m[0]) {
                if let Ok(claim) = transfer_chain(inst, &base) {
                    push(None, base, claim);
                }
            }
        }
    }
    out
}

fn evaluate(case: &SweepCase, cfg: &SweepConfig, faulty: bool) -> CaseResult {
    let failed = |error: String| CaseResult {
        case: case.clone(),
        pass: false,
        polynomial: false,
        first_mismatch: None,
        congruences: Vec::new(),
        error: Some(error),
    };
    let mut inst = match case.build() {
        Ok(inst) => inst,
        Err(e) => return failed(e.to_string()),
    };
    if faulty {
        let last = inst.b.classes().len() - 1;
        inst.b = inst.b.without_class(last);
    }
    let polynomial = verify_polynomial(&inst, cfg.n_max as usize);
    let counts = match verify_counts(&inst, cfg.n_max, cfg.oracle_max) {
        Ok(c) => c,
        Err(e) => return failed(e.to_string()),
    };
    let congruences = transfers(&inst, case, cfg.window);
    CaseResult {
        case: case.clone(),
        pass: polynomial && counts.pass && congruences.iter().all(|c| c.pass),
        polynomial,
        first_mismatch: counts.first_mismatch.map(|m| m.n),
        congruences,
        error: None,
    }
}

/// Samples and verifies. Runs on the current rayon pool.
pub fn run(cfg: &SweepConfig) -> SweepSummary {
    let cases = sample_cases(cfg);
    let results: Vec<CaseResult> = cases
        .par_iter()
        .enumerate()
        .map(|(i, case)| evaluate(case, cfg, cfg.inject_fault && i == 0))
        .collect();
    let passed = results.iter().filter(|r| r.pass).count();
    let checks = results.iter().flat_map(|r| &r.congruences);
    SweepSummary {
        pass: passed == results.len(),
        seed: cfg.seed,
        requested: cfg.count,
        instances: results.len(),
        passed,
        failed: results.len() - passed,
        congruence_checks: checks.clone().count(),
        congruence_failures: checks.filter(|c| !c.pass).count(),
        results,
    }
}
