use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use shardkit::access::{
    compile_formula, minimal_clauses, naive_share_counts, perfectness_check, verify_equivalence,
};
use shardkit::compartments::{deal_tree, reconstruct_tree, tree_authorized, SchemeNode, TreeShare};
use shardkit::dsl::{parse_formula, parse_scheme, scheme_to_dsl};
use shardkit::error::{Error, Result};
use shardkit::extended::HolderId;
use shardkit::field::{FieldElement, OpCounter, PrimeModulus, RngSource};
use shardkit::records::{bundle_to_records, ShareRecord};

/// Threshold secret sharing with crucial and redundant shares.
#[derive(Parser)]
#[command(name = "shardkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deal a secret according to a scheme file, one share file per holder.
    Deal {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        secret: u64,
        #[arg(long)]
        prime: u64,
        /// Dealer seed; falls back to SHARDKIT_SEED, then OS entropy.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct the secret from share files.
    Reconstruct {
        #[arg(long)]
        spec: PathBuf,
        #[arg(required = true)]
        shares: Vec<PathBuf>,
    },
    /// Check a scheme against an access formula over every subset.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        formula: PathBuf,
    },
    /// Enumerate dealer randomness and report the candidate-secret counts a
    /// subset's shares are consistent with.
    Perfect {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        prime: u64,
        /// Comma-separated shareholder ids.
        #[arg(long)]
        subset: String,
        #[arg(long, default_value_t = 0)]
        secret: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compile a formula into a scheme, flat when possible.
    Compile {
        #[arg(long)]
        formula: PathBuf,
        /// Write the scheme here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare naive, factored, and compiled share counts for a formula.
    Count {
        #[arg(long)]
        formula: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Deal {
            spec,
            secret,
            prime,
            seed,
            out,
        } => cmd_deal(&spec, secret, prime, seed, &out),
        Command::Reconstruct { spec, shares } => cmd_reconstruct(&spec, &shares),
        Command::Verify { spec, formula } => cmd_verify(&spec, &formula),
        Command::Perfect {
            spec,
            prime,
            subset,
            secret,
            seed,
        } => cmd_perfect(&spec, prime, &subset, secret, seed),
        Command::Compile { formula, out } => cmd_compile(&formula, out.as_deref()),
        Command::Count { formula } => cmd_count(&formula),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::SchemeMismatch(_) => 2,
        Error::NotPrime(_)
        | Error::InvalidParameters(_)
        | Error::ModulusMismatch
        | Error::NoInverseOfZero => 3,
        Error::CrucialShareMissing { .. } => 4,
        Error::InsufficientShares { .. } => 5,
        Error::InconsistentShares { .. } => 6,
        Error::EnumerationLimit(_) | Error::StateSpaceTooLarge(_) => 7,
        Error::CompilerProducedWrongScheme(_) => 1,
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn field_secret(modulus: PrimeModulus, secret: u64) -> Result<FieldElement> {
    if secret >= modulus.value() {
        return Err(Error::InvalidParameters(format!(
            "secret {secret} is not an element of GF({})",
            modulus.value()
        )));
    }
    Ok(modulus.element(secret))
}

fn seeded_source(seed: Option<u64>) -> RngSource<ChaCha20Rng> {
    let seed = seed
        .or_else(|| {
            std::env::var("SHARDKIT_SEED")
                .ok()
                .and_then(|v| v.parse::<u64>().ok())
        })
        .unwrap_or_else(|| rand::rngs::OsRng.next_u64());
    RngSource(ChaCha20Rng::seed_from_u64(seed))
}

fn parse_subset(text: &str) -> BTreeSet<HolderId> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn cmd_deal(spec: &Path, secret: u64, prime: u64, seed: Option<u64>, out: &Path) -> Result<u8> {
    let tree = parse_scheme(&read_file(spec)?)?;
    let modulus = PrimeModulus::new(prime)?;
    let secret = field_secret(modulus, secret)?;
    let mut source = seeded_source(seed);
    let mut counter = OpCounter::new();
    let bundle = deal_tree(secret, &tree, &mut source, &mut counter)?;

    fs::create_dir_all(out)
        .map_err(|e| Error::InvalidParameters(format!("cannot create {}: {e}", out.display())))?;
    let records = bundle_to_records(&bundle);
    let mut by_holder: BTreeMap<&str, Vec<&ShareRecord>> = BTreeMap::new();
    for record in &records {
        by_holder.entry(&record.holder).or_default().push(record);
    }
    for (holder, holder_records) in &by_holder {
        let body: String = holder_records
            .iter()
            .map(|r| r.serialize() + "\n")
            .collect();
        let path = out.join(format!("{holder}.share"));
        fs::write(&path, body).map_err(|e| {
            Error::InvalidParameters(format!("cannot write {}: {e}", path.display()))
        })?;
    }
    let mut metadata = format!("p={}\nscheme={:016x}\n", prime, bundle.scheme_id);
    for (holder, holder_records) in &by_holder {
        let paths: Vec<String> = holder_records.iter().map(|r| r.path.to_string()).collect();
        metadata.push_str(&format!("holder={holder} paths={}\n", paths.join(",")));
    }
    let meta_path = out.join("metadata.txt");
    fs::write(&meta_path, metadata).map_err(|e| {
        Error::InvalidParameters(format!("cannot write {}: {e}", meta_path.display()))
    })?;
    println!(
        "p={} scheme={:016x} holders={} shares={}",
        prime,
        bundle.scheme_id,
        by_holder.len(),
        records.len()
    );
    Ok(0)
}

fn cmd_reconstruct(spec: &Path, share_files: &[PathBuf]) -> Result<u8> {
    let tree = parse_scheme(&read_file(spec)?)?;
    let mut records: Vec<ShareRecord> = Vec::new();
    for file in share_files {
        for line in read_file(file)?.lines() {
            if line.trim().is_empty() {
                continue;
            }
            records.push(ShareRecord::parse(line)?);
        }
    }
    let first = records
        .first()
        .ok_or_else(|| Error::Parse("no share records given".into()))?;
    let (p, scheme) = (first.p, first.scheme);
    for record in &records {
        if record.p != p || record.scheme != scheme {
            return Err(Error::SchemeMismatch(
                "share records mix primes or scheme ids".into(),
            ));
        }
    }
    if scheme != tree.scheme_id() {
        return Err(Error::SchemeMismatch(
            "share records were dealt for a different scheme".into(),
        ));
    }
    let modulus = PrimeModulus::new(p)?;
    let mut subset: BTreeMap<HolderId, Vec<TreeShare>> = BTreeMap::new();
    for record in &records {
        subset
            .entry(record.holder.clone())
            .or_default()
            .push(record.to_tree_share(modulus)?);
    }
    let mut counter = OpCounter::new();
    let secret = reconstruct_tree(&subset, &tree, &mut counter)?;
    println!("{}", secret.value());
    Ok(0)
}

/// A scheme is flat when it is a single extended level: a leaf root or an
/// internal root whose children are all leaves.
fn is_flat(tree: &SchemeNode) -> bool {
    match tree {
        SchemeNode::Leaf(_) => true,
        SchemeNode::Internal { children, .. } => children
            .iter()
            .all(|(_, c)| matches!(c, SchemeNode::Leaf(_))),
    }
}

fn cmd_verify(spec: &Path, formula: &Path) -> Result<u8> {
    let tree = parse_scheme(&read_file(spec)?)?;
    let f = parse_formula(&read_file(formula)?)?;
    let universe: BTreeSet<HolderId> = tree.holders().union(&f.ids()).cloned().collect();
    let counterexample = verify_equivalence(&tree, &f, &universe)?;
    println!(
        "equivalent={} flattened={}",
        counterexample.is_none(),
        is_flat(&tree)
    );
    match counterexample {
        None => Ok(0),
        Some(cx) => {
            let ids: Vec<HolderId> = cx.into_iter().collect();
            println!("counterexample={}", ids.join(","));
            Ok(1)
        }
    }
}

fn cmd_perfect(
    spec: &Path,
    prime: u64,
    subset: &str,
    secret: u64,
    seed: Option<u64>,
) -> Result<u8> {
    let tree = parse_scheme(&read_file(spec)?)?;
    let modulus = PrimeModulus::new(prime)?;
    let secret = field_secret(modulus, secret)?;
    let subset = parse_subset(subset);
    let mut source = seeded_source(seed);
    let counts = perfectness_check(&tree, secret, &subset, &mut source)?;
    for (value, count) in counts.iter().enumerate() {
        println!("secret={value} count={count}");
    }
    let authorized = tree_authorized(&subset, &tree);
    let uniform = counts.iter().all(|&c| c == counts[0]);
    let point_mass = counts
        .iter()
        .enumerate()
        .all(|(v, &c)| (v as u64 == secret.value()) == (c > 0));
    println!("authorized={authorized} uniform={uniform}");
    if (authorized && point_mass) || (!authorized && uniform) {
        Ok(0)
    } else {
        Ok(1)
    }
}

fn cmd_compile(formula: &Path, out: Option<&Path>) -> Result<u8> {
    let f = parse_formula(&read_file(formula)?)?;
    let report = compile_formula(&f, &f.ids())?;
    println!(
        "flattened={} ideal={} total_shares={} max_shares_per_holder={}",
        report.flattened, report.ideal, report.total_shares, report.max_shares_per_holder
    );
    let text = scheme_to_dsl(&report.scheme);
    match out {
        Some(path) => fs::write(path, text).map_err(|e| {
            Error::InvalidParameters(format!("cannot write {}: {e}", path.display()))
        })?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_count(formula: &Path) -> Result<u8> {
    let f = parse_formula(&read_file(formula)?)?;
    let universe = f.ids();
    let clauses = minimal_clauses(&f, &universe)?;
    let (naive, factored) = naive_share_counts(&clauses)?;
    let report = compile_formula(&f, &universe)?;
    println!(
        "naive={naive} factored={factored} compiled={}",
        report.total_shares
    );
    Ok(0)
}
