//! Command-line surface over the triangle machinery.
//!
//! One command per process; reports go to standard output as
//! "report v1" JSON and, with `--out`, to a file written atomically.
//! Exit codes are a stable contract: 0 success, 2 usage or parse
//! errors, 3 I/O, 4 internal invariant breach, 5 precondition
//! violation.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use f2tri::driver::{run_removal_capped, theorem_bound, CertSummary};
use f2tri::gf2::{Coset, GroupElement, Subgroup};
use f2tri::instances::GeneratorSpec;
use f2tri::regularity::{
    halving_iteration_bound, superregular_decomposition, superregularity_witness,
};
use f2tri::report::{
    BoundPayload, CertJson, CheckJson, CountPayload, DecomposePayload, PackPayload, PartJson,
    Report, RunPayload, ShatterPayload,
};
use f2tri::setfile::{body_digest, BodyFormat, SetFile};
use f2tri::shattering::{shatter_or_count, DichotomyResult};
use f2tri::triangles::{count_ordered_bruteforce, count_ordered_fourier, farness_bounds, greedy_max_packing};
use f2tri::{parse_rat, rat_int, Error, Rat};

#[derive(Parser)]
#[command(name = "f2tri", version, about = "Triangle counting, regularity and removal over F_2^n")]
struct Cli {
    /// Cap internal parallelism (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance and write it as a set file.
    Gen(GenArgs),
    /// Count triangles of a set file.
    Count(CountArgs),
    /// Greedy maximal packing and farness bounds.
    Pack(PackArgs),
    /// Superregular decomposition of the set within a coset.
    Decompose(DecomposeArgs),
    /// Shatter-or-count dichotomy on a coset triple.
    Shatter(ShatterArgs),
    /// Run the removal driver and report the full trace.
    Run(RunArgs),
    /// Symbolic tower bound for a farness parameter.
    Bound(BoundArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Random,
    Halfspace,
    Triangles,
    Coset,
    Planted,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Hex,
    Bitmap,
}

impl From<FormatArg> for BodyFormat {
    fn from(f: FormatArg) -> BodyFormat {
        match f {
            FormatArg::Hex => BodyFormat::Hex,
            FormatArg::Bitmap => BodyFormat::Bitmap,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Brute,
    Fourier,
    Both,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    n: usize,
    /// Density for --kind random (exact rational, e.g. 1/4 or 0.25).
    #[arg(long)]
    p: Option<String>,
    /// Coordinate for --kind halfspace.
    #[arg(long)]
    coord: Option<usize>,
    /// Number of planted triangles for --kind triangles.
    #[arg(long)]
    m: Option<u64>,
    /// Subgroup dimension for --kind coset / planted.
    #[arg(long)]
    dim: Option<usize>,
    /// Flip probability for --kind planted (in [0, 1/2]).
    #[arg(long)]
    flip: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "hex")]
    format: FormatArg,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PackArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Superregularity parameter (rational in (0, 1]).
    #[arg(long)]
    rho: String,
    /// Density floor (rational in (0, 1]).
    #[arg(long)]
    d: String,
    /// Ambient subgroup as comma-separated hex generators (default: the
    /// full group); echoed back canonicalized.
    #[arg(long = "subgroup-gens", value_delimiter = ',')]
    subgroup_gens: Vec<String>,
    /// Coset shift in hex (default 0).
    #[arg(long, default_value = "0")]
    shift: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShatterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Subgroup generators in hex, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    gens: Vec<String>,
    /// First coset shift in hex.
    #[arg(long)]
    g1: String,
    /// Second coset shift in hex (the third is g1 xor g2).
    #[arg(long)]
    g2: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refinement-step budget (default: the theorem's own cap).
    #[arg(long = "max-steps")]
    max_steps: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// Farness parameter as an exact rational in (0, 1].
    #[arg(long)]
    epsilon: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Io(String),
    Internal(String),
    Precondition(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Internal(_) => 4,
            CliError::Precondition(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Internal(m) => write!(f, "internal invariant breached: {m}"),
            CliError::Precondition(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        match e {
            Error::Parse(m) => CliError::Usage(format!("parse error: {m}")),
            Error::Internal(m) => CliError::Internal(m),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // best effort; a pool may already exist under test harnesses
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(cmd: Cmd) -> CliResult<()> {
    match cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Count(args) => cmd_count(args),
        Cmd::Pack(args) => cmd_pack(args),
        Cmd::Decompose(args) => cmd_decompose(args),
        Cmd::Shatter(args) => cmd_shatter(args),
        Cmd::Run(args) => cmd_run(args),
        Cmd::Bound(args) => cmd_bound(args),
    }
}

fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("writing {}: {e}", path.display()));
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Load a set file, returning the parsed file and its body digest.
fn load(path: &Path) -> CliResult<(SetFile, String)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let file = SetFile::parse(&text)?;
    Ok((file, body_digest(&text)))
}

fn emit(
    command: &str,
    digest: Option<String>,
    seed: Option<u64>,
    payload: &impl Serialize,
    out: Option<&Path>,
) -> CliResult<()> {
    let report = Report::new(command, digest, seed, payload)?;
    let text = report.to_json();
    print!("{text}");
    if let Some(path) = out {
        write_atomic(path, &text)?;
    }
    Ok(())
}

fn need<T>(value: Option<T>, flag: &str, kind: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("--kind {kind} requires --{flag}")))
}

fn hex(x: u32) -> String {
    format!("{x:x}")
}

fn parse_hex(s: &str, what: &str) -> CliResult<u32> {
    u32::from_str_radix(s.trim(), 16)
        .map_err(|e| CliError::Usage(format!("bad hex {what} {s:?}: {e}")))
}

fn parse_hex_list(items: &[String], what: &str) -> CliResult<Vec<u32>> {
    items.iter().map(|s| parse_hex(s, what)).collect()
}

fn element(n: usize, s: &str, what: &str) -> CliResult<GroupElement> {
    Ok(GroupElement::new(n, parse_hex(s, what)?)?)
}

fn cmd_gen(args: GenArgs) -> CliResult<()> {
    let n = args.n;
    let seed = args.seed;
    let spec = match args.kind {
        KindArg::Random => GeneratorSpec::RandomDensity {
            n,
            p: parse_rat(&need(args.p, "p", "random")?)?,
            seed,
        },
        KindArg::Halfspace => GeneratorSpec::TriangleFreeHalfspace {
            n,
            coordinate_index: need(args.coord, "coord", "halfspace")?,
        },
        KindArg::Triangles => GeneratorSpec::DisjointTriangleUnion {
            n,
            m: need(args.m, "m", "triangles")?,
            seed,
        },
        KindArg::Coset => GeneratorSpec::SubgroupCoset {
            n,
            subgroup_dim: need(args.dim, "dim", "coset")?,
            seed,
        },
        KindArg::Planted => GeneratorSpec::PlantedSubgroupNoise {
            n,
            subgroup_dim: need(args.dim, "dim", "planted")?,
            flip_p: parse_rat(&need(args.flip, "flip", "planted")?)?,
            seed,
        },
    };
    let set = spec.generate()?;
    let count = set.count();
    let file = SetFile::with_gen(set, args.format.into(), spec.to_string());
    write_atomic(&args.out, &file.to_text())?;
    println!("{spec} count={count}");
    Ok(())
}

fn cmd_count(args: CountArgs) -> CliResult<()> {
    let (file, digest) = load(&args.input)?;
    let a = file.set;
    let (method, ordered, agree) = match args.method {
        MethodArg::Brute => ("brute", count_ordered_bruteforce(&a), None),
        MethodArg::Fourier => ("fourier", count_ordered_fourier(&a)?, None),
        MethodArg::Both => {
            let brute = count_ordered_bruteforce(&a);
            let fourier = count_ordered_fourier(&a)?;
            if brute != fourier {
                return Err(CliError::Internal(format!(
                    "counting methods disagree: brute {brute}, fourier {fourier}"
                )));
            }
            ("both", fourier, Some(true))
        }
    };
    // ordered = 6*distinct + degenerate triples, all involving zero
    let degenerate = if a.contains_bits(0) { 3 * (a.count() - 1) + 1 } else { 0 };
    let payload = CountPayload {
        n: a.n(),
        set_size: a.count(),
        method: method.into(),
        ordered,
        distinct: (ordered - degenerate) / 6,
        methods_agree: agree,
    };
    emit("count", Some(digest), None, &payload, args.out.as_deref())
}

fn cmd_pack(args: PackArgs) -> CliResult<()> {
    let (file, digest) = load(&args.input)?;
    let a = file.set;
    let packing = greedy_max_packing(&a, args.seed);
    let bounds = farness_bounds(&a, &packing)?;
    let payload = PackPayload {
        n: a.n(),
        set_size: a.count(),
        packing_size: packing.len() as u64,
        triangles: packing
            .triangles()
            .iter()
            .map(|t| [hex(t.x().bits()), hex(t.y().bits()), hex(t.z().bits())])
            .collect(),
        support_size: packing.support().count(),
        farness_lower: f2tri::report::RatJson::from_rat(&bounds.lower),
        farness_upper: f2tri::report::RatJson::from_rat(&bounds.upper),
    };
    emit("pack", Some(digest), Some(args.seed), &payload, args.out.as_deref())
}

fn cmd_decompose(args: DecomposeArgs) -> CliResult<()> {
    let (file, digest) = load(&args.input)?;
    let a = file.set;
    let n = a.n();
    let rho = parse_rat(&args.rho)?;
    let d = parse_rat(&args.d)?;
    let h = if args.subgroup_gens.is_empty() {
        Subgroup::full(n)
    } else {
        Subgroup::from_bits(n, &parse_hex_list(&args.subgroup_gens, "generator")?)?
    };
    let g = element(n, &args.shift, "shift")?;
    let dec = superregular_decomposition(&a, &h, &g, &rho, &d)?;

    // re-check the documented postconditions for the report
    let restricted = a.intersect_coset(&Coset::new(h.clone(), &g)?)?;
    let mut union = dec.leftover.clone();
    let mut total = dec.leftover.count();
    let iter_bound = halving_iteration_bound(&rho, &d);
    let mut dense = true;
    let mut superregular = true;
    let mut index_ok = true;
    for p in &dec.parts {
        total += p.part.count();
        union = union.union(&p.part)?;
        dense &= p.density >= d;
        let sub_coset = Coset::new(p.subgroup.clone(), &(p.base_shift + p.shift))?;
        superregular &= superregularity_witness(&p.part, &sub_coset, &rho)?.is_none();
        index_ok &= ((h.dim() - p.subgroup.dim()) as u64) <= iter_bound;
    }
    let checks = vec![
        CheckJson {
            name: "parts_and_leftover_partition_the_restriction".into(),
            pass: union == restricted && total == restricted.count(),
        },
        CheckJson {
            name: "leftover_at_most_d_times_subgroup".into(),
            pass: rat_int(dec.leftover.count()) <= &d * rat_int(h.size()),
        },
        CheckJson { name: "parts_have_density_at_least_d".into(), pass: dense },
        CheckJson { name: "parts_are_superregular".into(), pass: superregular },
        CheckJson { name: "part_index_within_iteration_bound".into(), pass: index_ok },
    ];
    if let Some(failed) = checks.iter().find(|c| !c.pass) {
        return Err(CliError::Internal(format!("postcondition {} failed", failed.name)));
    }
    let payload = DecomposePayload {
        n,
        rho: f2tri::report::RatJson::from_rat(&rho),
        d: f2tri::report::RatJson::from_rat(&d),
        subgroup_basis: h.basis().iter().map(|&b| hex(b)).collect(),
        shift: hex(g.bits()),
        parts: dec
            .parts
            .iter()
            .map(|p| PartJson {
                size: p.part.count(),
                subgroup_dim: p.subgroup.dim(),
                subgroup_basis: p.subgroup.basis().iter().map(|&b| hex(b)).collect(),
                shift: hex(p.shift.bits()),
                density: f2tri::report::RatJson::from_rat(&p.density),
            })
            .collect(),
        leftover_size: dec.leftover.count(),
        checks,
    };
    emit("decompose", Some(digest), None, &payload, args.out.as_deref())
}

fn cmd_shatter(args: ShatterArgs) -> CliResult<()> {
    let (file, digest) = load(&args.input)?;
    let a = file.set;
    let n = a.n();
    let h = Subgroup::from_bits(n, &parse_hex_list(&args.gens, "generator")?)?;
    let g1 = element(n, &args.g1, "g1")?;
    let g2 = element(n, &args.g2, "g2")?;
    let g3 = g1 + g2;
    let payload = match shatter_or_count(&a, &h, &g1, &g2, &g3)? {
        DichotomyResult::Shatter(cert) => {
            // recount before reporting
            cert.verify(&a)?;
            ShatterPayload {
                n,
                subgroup_basis: h.basis().iter().map(|&b| hex(b)).collect(),
                g1: hex(g1.bits()),
                g2: hex(g2.bits()),
                g3: hex(g3.bits()),
                outcome: "shatter".into(),
                certificate: Some(CertJson::from_summary(&CertSummary::from(&cert))),
                count: None,
                threshold: None,
                reverified: true,
            }
        }
        DichotomyResult::TriangleCert(tc) => {
            if rat_int(tc.count) < tc.threshold {
                return Err(CliError::Internal(
                    "triangle certificate below its threshold".into(),
                ));
            }
            ShatterPayload {
                n,
                subgroup_basis: h.basis().iter().map(|&b| hex(b)).collect(),
                g1: hex(g1.bits()),
                g2: hex(g2.bits()),
                g3: hex(g3.bits()),
                outcome: "count".into(),
                certificate: None,
                count: Some(tc.count),
                threshold: Some(f2tri::report::RatJson::from_rat(&tc.threshold)),
                reverified: true,
            }
        }
    };
    emit("shatter", Some(digest), None, &payload, args.out.as_deref())
}

fn cmd_run(args: RunArgs) -> CliResult<()> {
    let (file, digest) = load(&args.input)?;
    let a = file.set;
    let report = run_removal_capped(&a, args.seed, args.max_steps)?;
    let payload = RunPayload::from_report(a.n(), &report);
    emit("run", Some(digest), Some(args.seed), &payload, args.out.as_deref())
}

fn cmd_bound(args: BoundArgs) -> CliResult<()> {
    let epsilon: Rat = parse_rat(&args.epsilon)?;
    let tb = theorem_bound(&epsilon)?;
    let payload = BoundPayload::new(&epsilon, &tb);
    emit("bound", None, None, &payload, args.out.as_deref())
}
