use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use partition_crt_core::congruences::read_claims;
use partition_crt_core::partitions::ORACLE_LIMIT;
use partition_crt_core::series::Ring;
use partition_crt_core::{
    build_chain, build_crt, build_preset, check_claim, count_p, count_q, partition_p,
    transfer_chain, transfer_crt, verify_counts, verify_polynomial, ChainIdentityParams,
    ClaimReport, CongruenceClaim, CountReport, CrtIdentityParams, CrtParams, IdentityError,
    IdentityInstance, ProgressionClaim,
};
use serde::Serialize;

use crate::sweep::{self, SweepConfig};
use crate::{
    Cli, CliError, Command, CongruenceArgs, CountArgs, CountWhat, Format, GenCommand, SweepArgs,
    VerifyArgs, EXIT_FAIL, EXIT_PASS, THREADS_ENV,
};

/// Largest argument `m n + c` a congruence window may reach.
const MAX_ARGUMENT: u64 = 1_000_000;

pub(crate) fn execute(
    cli: &Cli,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    if cli.format == Format::Csv && !matches!(cli.command, Command::Count(_)) {
        return Err(CliError::Usage(
            "`--format csv` is only available for `count`".into(),
        ));
    }
    match &cli.command {
        Command::Gen { builder } => gen(builder, out),
        Command::Verify(args) => verify(args, input, out),
        Command::Count(args) => count(args, cli.format, input, out),
        Command::Congruence(args) => congruence(args, input, out),
        Command::Sweep(args) => run_sweep(args, out),
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn read_instance(path: &Path, input: &mut dyn BufRead) -> Result<IdentityInstance, CliError> {
    let mut text = String::new();
    let read = if path.as_os_str() == "-" {
        input.read_to_string(&mut text)
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut text))
    };
    read.map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Instance {
        path: path.to_owned(),
        source,
    })
}

fn gen(builder: &GenCommand, out: &mut dyn Write) -> Result<u8, CliError> {
    let inst = match builder {
        GenCommand::Crt { m, a, k, l, r } => {
            let crt = CrtParams::new(m.clone(), a.clone()).map_err(IdentityError::from)?;
            let mut params = CrtIdentityParams::new(crt, *k, *l);
            if let Some(r) = r {
                params = params.with_r(r.clone());
            }
            build_crt(&params)?
        }
        GenCommand::Chain { m, r, l } => build_chain(&ChainIdentityParams {
            moduli: m.clone(),
            r: r.clone(),
            l: *l,
        })?,
        GenCommand::Preset { preset } => build_preset(preset)?,
    };
    write_json(out, &inst)?;
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct VerifyReport {
    pass: bool,
    polynomial: bool,
    counts: CountReport,
}

fn verify(args: &VerifyArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<u8, CliError> {
    check_oracle_bounds(args.n_max, args.oracle_max)?;
    let inst = read_instance(&args.input, input)?;
    let polynomial = verify_polynomial(&inst, args.n_max as usize);
    let counts = verify_counts(&inst, args.n_max, args.oracle_max)?;
    let report = VerifyReport {
        pass: polynomial && counts.pass,
        polynomial,
        counts,
    };
    write_json(out, &report)?;
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn check_oracle_bounds(n_max: u64, oracle_max: u64) -> Result<(), CliError> {
    if oracle_max > n_max {
        return Err(CliError::Usage(format!(
            "--oracle-max {oracle_max} exceeds --n-max {n_max}"
        )));
    }
    if oracle_max > ORACLE_LIMIT {
        return Err(CliError::Usage(format!(
            "--oracle-max is limited to {ORACLE_LIMIT}, got {oracle_max}"
        )));
    }
    Ok(())
}

fn count(
    args: &CountArgs,
    format: Format,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let ring = match args.modulus {
        None => Ring::Exact,
        Some(d) => Ring::modular(d).map_err(|e| CliError::Usage(e.to_string()))?,
    };
    let order = args.n_max as usize;
    let table = match (args.what, &args.input) {
        (CountWhat::Partitions, None) => partition_p(order, ring),
        (CountWhat::Partitions, Some(_)) => {
            return Err(CliError::Usage("`count p` does not take --in".into()));
        }
        (_, None) => return Err(CliError::Usage("`count P` and `count Q` need --in".into())),
        (what, Some(path)) => {
            let inst = read_instance(path, input)?;
            if what == CountWhat::Multiplicities {
                count_p(&inst.a, order, ring)
            } else {
                count_q(&inst.b, order, ring)
            }
        }
    };
    match format {
        Format::Json => write_json(out, &table)?,
        Format::Csv => table.write_csv(&mut *out)?,
    }
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct CongruenceEntry {
    base: ProgressionClaim,
    /// Whether the base claim itself holds for p on the same window.
    base_pass: bool,
    #[serde(flatten)]
    report: ClaimReport,
}

#[derive(Serialize)]
struct CongruenceBatch {
    pass: bool,
    reports: Vec<CongruenceEntry>,
}

fn congruence(
    args: &CongruenceArgs,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let mut bases = Vec::new();
    if let Some(c) = args.claim {
        bases.push(c);
    }
    if let Some(path) = &args.claims {
        let file = File::open(path).map_err(|source| CliError::Read {
            path: path.clone(),
            source,
        })?;
        bases.extend(read_claims(BufReader::new(file))?);
    }
    if bases.is_empty() {
        return Err(CliError::Usage("no claims given".into()));
    }

    let inst = match &args.input {
        Some(path) => {
            if args.factor.is_none() && !args.chain {
                return Err(CliError::Usage(
                    "an instance needs --factor i or --chain".into(),
                ));
            }
            Some(read_instance(path, input)?)
        }
        None => {
            if args.factor.is_some() || args.chain {
                return Err(CliError::Usage("--factor and --chain need --in".into()));
            }
            None
        }
    };

    let mut claims = Vec::with_capacity(bases.len());
    for base in &bases {
        let claim = match &inst {
            None => CongruenceClaim::on_p(*base),
            Some(inst) if args.chain => transfer_chain(inst, base)?,
            Some(inst) => transfer_crt(inst, args.factor.unwrap_or(0), base)?,
        };
        for p in [base, &claim.progression] {
            let top = p.m.checked_mul(args.n_max).and_then(|v| v.checked_add(p.c));
            if top.map_or(true, |t| t > MAX_ARGUMENT) {
                return Err(CliError::Usage(format!(
                    "window reaches beyond n = {MAX_ARGUMENT} for claim {},{},{}",
                    p.m, p.c, p.d
                )));
            }
        }
        claims.push((*base, claim));
    }

    let mut entries: Vec<CongruenceEntry> = claims
        .iter()
        .map(|(base, claim)| CongruenceEntry {
            base: *base,
            base_pass: check_claim(&CongruenceClaim::on_p(*base), args.n_max).pass,
            report: check_claim(claim, args.n_max),
        })
        .collect();
    let pass = entries.iter().all(|e| e.report.pass);
    if entries.len() == 1 {
        write_json(out, &entries.remove(0))?;
    } else {
        write_json(
            out,
            &CongruenceBatch {
                pass,
                reports: entries,
            },
        )?;
    }
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn run_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    check_oracle_bounds(args.n_max, args.oracle_max)?;
    let config = SweepConfig {
        s_max: args.s_max,
        m_max: args.m_max,
        k_max: args.k_max,
        l_max: args.l_max,
        n_max: args.n_max,
        oracle_max: args.oracle_max,
        seed: args.seed,
        count: args.count,
        window: args.window,
        inject_fault: args.inject_fault,
    };
    config.validate().map_err(CliError::Usage)?;
    let summary = match thread_cap()? {
        None => sweep::run(&config),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?
            .install(|| sweep::run(&config)),
    };
    write_json(out, &summary)?;
    Ok(if summary.pass { EXIT_PASS } else { EXIT_FAIL })
}
