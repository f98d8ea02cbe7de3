//! The `dpcodes` command line.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on usage or
//! input errors, 3 when a search budget runs out before an exact answer.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use dpcodes::anticode::{self, AnticodeKind, AnticodeSpec, EkrVariant};
use dpcodes::bounds::{self, BoundKind, BoundsCertificate, ChiEvidence, Family, Provenance, Target};
use dpcodes::codes::{self, CodeReport, ConstantWeightCode, Expected};
use dpcodes::coloring::{self, Budget, ColoringError, LowerBoundWitness};
use dpcodes::steiner::{derive, resolvability_partition, rotate_block, DataDir, SteinerSystem, CATALOG_NAMES};

/// Environment variable naming a directory whose files replace the
/// bundled data files of the same name.
pub const DATA_DIR_ENV: &str = "DPCODES_DATA_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dpcodes", version, about = "Diameter-perfect constant-weight codes from Steiner systems")]
struct Cli {
    /// Emit a JSON certificate instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Directory overriding the bundled data files.
    #[arg(long, global = true, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the catalog, or show (and optionally write) one system.
    Systems(SystemsArgs),
    /// Build a code and verify it.
    Construct(ConstructArgs),
    /// Check a code file or a block colouring.
    Verify(VerifyArgs),
    /// Exact chromatic number of a minimum-distance graph.
    Chi(ChiArgs),
    /// Anticode sizes, diameters, EKR bounds and maximum anticodes.
    Anticode {
        #[command(subcommand)]
        command: AnticodeCommand,
    },
    /// Bounds on the smallest alphabet sizes.
    Bounds(BoundsArgs),
    /// Exact minimum alphabet for one system by exhaustive search.
    Search(SearchArgs),
}

#[derive(Args, Debug)]
struct SystemArg {
    /// Catalog name (e.g. fano, sts13a, ag(2,4)) or path to a system file.
    #[arg(long)]
    system: String,
    /// Derive at these points (comma separated) first.
    #[arg(long, value_delimiter = ',')]
    derive: Vec<usize>,
}

#[derive(Args, Debug)]
struct SystemsArgs {
    /// Catalog name or system file; omit to list the catalog.
    name: Option<String>,
    #[arg(long, value_delimiter = ',')]
    derive: Vec<usize>,
    /// Write the system in text form.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ConstructFamily {
    F5prime,
    F5double,
    Theorem4,
    Affine,
    Projective,
    Cyclic,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    family: ConstructFamily,
    /// Steiner system (f5prime, f5double, theorem4).
    #[arg(long)]
    system: Option<String>,
    /// Alphabet size (f5prime, f5double); defaults to the smallest the
    /// construction allows.
    #[arg(long)]
    q: Option<u32>,
    /// Order of the affine plane.
    #[arg(long)]
    k: Option<u32>,
    /// Order of the projective plane.
    #[arg(long)]
    s: Option<u32>,
    /// Representatives for the cyclic family, as a code file; defaults to
    /// the bundled (11,5,7)_11 representatives.
    #[arg(long)]
    reps: Option<PathBuf>,
    /// Expected minimum distance (cyclic family).
    #[arg(long)]
    distance: Option<usize>,
    /// Check supports against an S(t, ., n) (cyclic family).
    #[arg(long)]
    steiner_t: Option<usize>,
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Write words as base-36 digit strings.
    #[arg(long)]
    compact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(skip)]
#[command(group(ArgGroup::new("input").required(true).args(["code", "partition"])))]
struct VerifyArgs {
    /// Code file to check.
    #[arg(long)]
    code: Option<PathBuf>,
    /// Colouring certificate to check against --system.
    #[arg(long, requires = "system")]
    partition: Option<PathBuf>,
    /// Partition file lists cells as blocks separated by '|'.
    #[arg(long, requires = "partition")]
    cells_as_blocks: bool,
    #[arg(long)]
    system: Option<String>,
    #[arg(long, value_delimiter = ',')]
    derive: Vec<usize>,
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    weight: Option<usize>,
    #[arg(long)]
    distance: Option<usize>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    steiner_t: Option<usize>,
}

#[derive(Args, Debug)]
struct ChiArgs {
    #[command(flatten)]
    system: SystemArg,
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Write the colouring certificate here instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    Prime,
    Double,
}

#[derive(Args, Debug)]
struct SpecArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    w: usize,
    #[arg(long)]
    t: usize,
    #[arg(long)]
    q: u32,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    I,
    Ii,
}

#[derive(Subcommand, Debug)]
enum AnticodeCommand {
    /// Closed-form size and diameter.
    Size(SpecArgs),
    /// List every member word.
    Members {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive diameter, compared with the closed form (q >= 3).
    Diameter {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 20_000)]
        budget: u64,
    },
    /// Erdos-Ko-Rado bound on s-intersecting families of w-subsets.
    Ekr {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        w: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, value_enum)]
        variant: VariantArg,
    },
    /// Largest anticode of a given diameter, by exact clique search.
    Max {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        w: usize,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        diameter: usize,
        #[arg(long, default_value_t = 200)]
        max_vertices: u64,
        #[arg(long)]
        max_nodes: Option<u64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TargetArg {
    Qprime0,
    Qdouble0,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    target: TargetArg,
    #[arg(long)]
    t: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    /// Systems with these parameters whose derived chromatic numbers give
    /// upper bounds (q'0, t >= 3).
    #[arg(long = "system")]
    systems: Vec<String>,
    /// Systems forming every isomorphism class of the point-derived
    /// parameters, e.g. sts13a,sts13b for (3,4,14).
    #[arg(long, value_delimiter = ',')]
    all_classes: Vec<String>,
    /// A verified code attaining the target's distance gives an upper bound.
    #[arg(long)]
    witness: Option<PathBuf>,
    #[arg(long)]
    max_nodes: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    F5prime,
    F5double,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[command(flatten)]
    system: SystemArg,
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 50_000_000)]
    max_nodes: u64,
    /// Write the witness code here.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failed command, carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    /// Certificate body to emit despite the failure.
    pub body: Option<Value>,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure { code: EXIT_USAGE, message: message.to_string(), body: None }
    }
}

type Outcome = Result<Report, Failure>;

/// What a successful (or verification-failed) command produced.
struct Report {
    text: String,
    body: Value,
    code: i32,
}

/// Runs the command line `args` (including the program name), writing
/// normal output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let data = cli.data_dir.as_ref().map_or_else(DataDir::bundled, DataDir::with_override);
    let result = match &cli.command {
        Command::Systems(a) => systems(&data, a),
        Command::Construct(a) => construct(&data, a),
        Command::Verify(a) => verify(&data, a),
        Command::Chi(a) => chi(&data, a),
        Command::Anticode { command } => anticode_cmd(command),
        Command::Bounds(a) => bounds_cmd(&data, a),
        Command::Search(a) => search(&data, a),
    };
    match result {
        Ok(report) => {
            let _ = if cli.json {
                writeln!(out, "{}", envelope(report.body))
            } else {
                write!(out, "{}", report.text)
            };
            report.code
        }
        Err(f) => {
            if let (true, Some(body)) = (cli.json, f.body) {
                let _ = writeln!(out, "{}", envelope(body));
            }
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// The certificate envelope: tool, version, timestamp and the hash of the
/// canonical (sorted-key, compact) body serialization.
pub fn envelope(body: Value) -> String {
    let canonical = body.to_string();
    let digest = hex::encode(Sha256::digest(canonical.as_bytes()));
    let doc = json!({
        "tool": "dpcodes",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "body_sha256": digest,
        "body": body,
    });
    serde_json::to_string_pretty(&doc).expect("json")
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let fail = |e: &dyn std::fmt::Display| Failure::usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn load_system(data: &DataDir, spec: &str, points: &[usize]) -> Result<SteinerSystem, Failure> {
    let path = Path::new(spec);
    let sys = if path.is_file() {
        SteinerSystem::parse(&read_file(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
    } else {
        data.system(spec).map_err(Failure::usage)?
    };
    if points.is_empty() {
        Ok(sys)
    } else {
        Ok(derive(&sys, points).map_err(Failure::usage)?.system)
    }
}

fn sha256(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn system_json(sys: &SteinerSystem) -> Value {
    json!({
        "t": sys.t(), "k": sys.k(), "n": sys.n(),
        "blocks": sys.block_count(), "replication": sys.replication(),
    })
}

fn systems(data: &DataDir, a: &SystemsArgs) -> Outcome {
    let Some(name) = &a.name else {
        let mut text = String::from("name          t  k   n  blocks  r\n");
        let mut list = Vec::new();
        for &name in CATALOG_NAMES.iter().filter(|n| !n.ends_with("q)")) {
            let sys = load_system(data, name, &[])?;
            text += &format!(
                "{name:<12} {:>2} {:>2} {:>3} {:>7} {:>2}\n",
                sys.t(),
                sys.k(),
                sys.n(),
                sys.block_count(),
                sys.replication()
            );
            let mut entry = system_json(&sys);
            entry["name"] = json!(name);
            list.push(entry);
        }
        text += "ag(2,q), pg(2,q): affine and projective planes for prime powers q\n";
        return Ok(Report { text, body: json!({ "systems": list }), code: EXIT_OK });
    };
    let sys = load_system(data, name, &a.derive)?;
    let resolvable = resolvability_partition(&sys).is_some();
    let mut text = format!(
        "{name}: S({},{},{}) with {} blocks, replication {}{}\n",
        sys.t(),
        sys.k(),
        sys.n(),
        sys.block_count(),
        sys.replication(),
        if resolvable { ", resolvable" } else { "" }
    );
    let mut body = system_json(&sys);
    body["name"] = json!(name);
    body["derive"] = json!(a.derive);
    body["resolvable"] = json!(resolvable);
    body["system_sha256"] = json!(sha256(&sys.to_text()));
    if let Some(out) = &a.out {
        write_atomic(out, &sys.to_text())?;
        text += &format!("wrote {}\n", out.display());
    } else if !a.derive.is_empty() || a.name.is_some() {
        text += &sys.to_text();
    }
    Ok(Report { text, body, code: EXIT_OK })
}

fn report_text(r: &CodeReport) -> String {
    let mut s = format!(
        "n={} q={} M={} w={} d_min={}\n",
        r.n,
        r.q,
        r.m,
        r.w.map_or("-".into(), |w| w.to_string()),
        r.d_min.map_or("-".into(), |d| d.to_string())
    );
    if let Some(t) = r.supports_steiner_t {
        s += &format!("supports: {:?} of an S({t},.,{})\n", r.support_shape.expect("shape"), r.n);
    }
    if let Some(spec) = r.diameter_perfect_against {
        s += &format!(
            "diameter perfect against {:?} anticode (n={}, w={}, t={})\n",
            spec.kind, spec.n, spec.w, spec.t
        );
    }
    for f in &r.failures {
        s += &format!("FAIL: {f}\n");
    }
    s += if r.passed() { "PASS\n" } else { "FAILED\n" };
    s
}

fn construct(data: &DataDir, a: &ConstructArgs) -> Outcome {
    let need_system = || -> Result<SteinerSystem, Failure> {
        let name = a.system.as_deref().ok_or_else(|| Failure::usage("--system is required for this family"))?;
        load_system(data, name, &[])
    };
    let need = |v: Option<u32>, flag: &str| v.ok_or_else(|| Failure::usage(format!("--{flag} is required for this family")));
    let mut extra = json!({});
    let (code, expected, steiner_t) = match a.family {
        ConstructFamily::F5prime | ConstructFamily::F5double => {
            let sys = need_system()?;
            let prime = a.family == ConstructFamily::F5prime;
            let minimal = if prime { sys.replication() + 1 } else { sys.block_count() - sys.replication() + 1 };
            let q = a.q.unwrap_or(minimal as u32);
            let code = if prime { codes::construct_f5prime(&sys, q) } else { codes::construct_f5double(&sys, q) }
                .map_err(Failure::usage)?;
            let (w, d) = if prime { (sys.k(), 2 * sys.k() - sys.t() + 1) } else { (sys.n() - sys.k(), sys.n() - sys.t() + 1) };
            let exp = Expected { n: Some(sys.n()), w: Some(w), d: Some(d), q: Some(q), m: Some(sys.block_count()) };
            (code, exp, Some(sys.t()))
        }
        ConstructFamily::Theorem4 => {
            let sys = need_system()?;
            let budget = a.max_nodes.map_or_else(Budget::default, |max_nodes| Budget { max_nodes });
            let colorings = codes::theorem4_colorings(&sys, budget).map_err(|e| match e {
                codes::CodeError::Coloring(ColoringError::BudgetExhausted { .. }) => {
                    Failure { code: EXIT_BUDGET, message: e.to_string(), body: None }
                }
                e => Failure::usage(e),
            })?;
            let cells: BTreeMap<_, _> = colorings.into_iter().map(|(w, c)| (w, c.partition)).collect();
            let built = codes::construct_theorem4(&sys, &cells).map_err(Failure::usage)?;
            extra = json!({ "q_used": built.q_used, "bound": built.bound });
            let exp = Expected {
                n: Some(sys.n()),
                w: Some(sys.k()),
                d: Some(2 * sys.k() - sys.t() + 1),
                m: Some(sys.block_count()),
                ..Default::default()
            };
            (built.code, exp, Some(sys.t()))
        }
        ConstructFamily::Affine => {
            let k = need(a.k, "k")?;
            let code = codes::construct_affine(k).map_err(Failure::usage)?;
            let n = (k * k) as usize;
            let exp = Expected {
                n: Some(n),
                w: Some(n - k as usize),
                d: Some(n - 1),
                q: Some(k * k - (k - 1) / 2),
                m: Some(n + k as usize),
            };
            (code, exp, Some(2))
        }
        ConstructFamily::Projective => {
            let s = need(a.s, "s")?;
            let code = codes::construct_projective(s).map_err(Failure::usage)?;
            let n = (s * s + s + 1) as usize;
            let exp = Expected {
                n: Some(n),
                w: Some((s * s) as usize),
                d: Some((s * s + s) as usize),
                q: Some(s * s + 1),
                m: Some(n),
            };
            (code, exp, Some(2))
        }
        ConstructFamily::Cyclic => {
            let text = match &a.reps {
                Some(p) => read_file(p)?,
                None => data.read("s45_11_cyclic_reps.txt").map_err(Failure::usage)?,
            };
            let reps = ConstantWeightCode::parse(&text).map_err(Failure::usage)?;
            let code = codes::expand_cyclic(reps.words(), reps.n(), reps.q()).map_err(Failure::usage)?;
            let exp = Expected { d: a.distance, ..Default::default() };
            (code, exp, a.steiner_t)
        }
    };
    let report = codes::verify_code(&code, expected, steiner_t);
    let file = code.to_text(a.compact);
    let mut text = report_text(&report);
    let mut body = json!({
        "family": format!("{:?}", a.family).to_lowercase(),
        "report": report,
        "code_sha256": sha256(&file),
    });
    if let Value::Object(m) = extra {
        for (k, v) in m {
            body[k] = v;
        }
    }
    match &a.out {
        Some(out) => {
            write_atomic(out, &file)?;
            text += &format!("wrote {}\n", out.display());
        }
        None => {
            text += &file;
            body["code"] = json!(file);
        }
    }
    let code = if report.passed() { EXIT_OK } else { EXIT_VERIFY };
    Ok(Report { text, body, code })
}

fn verify(data: &DataDir, a: &VerifyArgs) -> Outcome {
    if let Some(path) = &a.code {
        let code = ConstantWeightCode::parse(&read_file(path)?)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let exp = Expected { n: a.length, w: a.weight, d: a.distance, q: a.q, m: a.size };
        let report = codes::verify_code(&code, exp, a.steiner_t);
        let status = if report.passed() { EXIT_OK } else { EXIT_VERIFY };
        return Ok(Report { text: report_text(&report), body: json!({ "report": report }), code: status });
    }
    let path = a.partition.as_ref().expect("clap enforces one input");
    let sys = load_system(data, a.system.as_deref().expect("clap requires --system"), &a.derive)?;
    let text = read_file(path)?;
    let cells = if a.cells_as_blocks {
        let blocks = coloring::parse_block_cells(&text).map_err(Failure::usage)?;
        coloring::partition_from_blocks(&sys, &blocks).map_err(|e| Failure { code: EXIT_VERIFY, message: e.to_string(), body: None })?
    } else {
        coloring::parse_partition(&text).map_err(Failure::usage)?
    };
    let (ok, detail) = match coloring::verify_block_coloring(&sys, &cells) {
        Ok(true) => (true, "every cell holds blocks meeting in at most t-2 points".to_string()),
        Ok(false) => (false, "some cell holds two blocks meeting in t-1 points".to_string()),
        Err(e) => (false, e.to_string()),
    };
    let body = json!({ "cells": cells.len(), "valid": ok, "detail": detail });
    let text = format!("{} cells: {}\n{}\n", cells.len(), detail, if ok { "PASS" } else { "FAILED" });
    Ok(Report { text, body, code: if ok { EXIT_OK } else { EXIT_VERIFY } })
}

fn witness_json(w: &LowerBoundWitness) -> Value {
    match w {
        LowerBoundWitness::Clique(c) => json!({ "kind": "clique", "blocks": c.iter().map(|b| b + 1).collect::<Vec<_>>() }),
        LowerBoundWitness::Counting { vertices, max_independent } => {
            json!({ "kind": "counting", "vertices": vertices, "max_independent": max_independent })
        }
        LowerBoundWitness::Exhaustive { colors, nodes } => json!({ "kind": "exhaustive", "refuted_colors": colors, "nodes": nodes }),
    }
}

fn witness_text(w: &LowerBoundWitness) -> String {
    match w {
        LowerBoundWitness::Clique(c) => format!("clique of {} pairwise adjacent blocks", c.len()),
        LowerBoundWitness::Counting { vertices, max_independent } => {
            format!("{vertices} blocks, at most {max_independent} per colour")
        }
        LowerBoundWitness::Exhaustive { colors, nodes } => format!("{colors} colours refuted by exhaustive search ({nodes} nodes)"),
    }
}

fn one_based(cells: &[Vec<usize>]) -> Vec<Vec<usize>> {
    cells.iter().map(|c| c.iter().map(|b| b + 1).collect()).collect()
}

fn chi(data: &DataDir, a: &ChiArgs) -> Outcome {
    let sys = load_system(data, &a.system.system, &a.system.derive)?;
    let g = coloring::min_distance_graph(&sys).map_err(Failure::usage)?;
    let budget = a.max_nodes.map_or_else(Budget::default, |max_nodes| Budget { max_nodes });
    let mut body = json!({
        "system": a.system.system,
        "derive": a.system.derive,
        "vertices": g.graph.order(),
        "edges": g.graph.edges().len(),
    });
    match coloring::chromatic_number(&g, budget) {
        Ok(res) => {
            let cert = coloring::format_partition(&res.partition);
            body["chi"] = json!(res.chi);
            body["lower_bound"] = witness_json(&res.lower_bound_witness);
            body["partition"] = json!(one_based(&res.partition));
            body["nodes"] = json!(res.nodes);
            let mut text = format!("chi = {}\nlower bound: {}\n", res.chi, witness_text(&res.lower_bound_witness));
            match &a.out {
                Some(out) => {
                    write_atomic(out, &cert)?;
                    text += &format!("wrote {}\n", out.display());
                }
                None => text += &cert,
            }
            Ok(Report { text, body, code: EXIT_OK })
        }
        Err(ColoringError::BudgetExhausted { lower, upper, best, nodes }) => {
            body["chi_lower"] = json!(lower);
            body["chi_upper"] = json!(upper);
            body["partition"] = json!(one_based(&best));
            body["nodes"] = json!(nodes);
            Err(Failure {
                code: EXIT_BUDGET,
                message: format!("budget exhausted after {nodes} nodes: {lower} <= chi <= {upper}"),
                body: Some(body),
            })
        }
        Err(e) => Err(Failure::usage(e)),
    }
}

fn spec_of(s: &SpecArgs) -> Result<AnticodeSpec, Failure> {
    let kind = match s.kind {
        KindArg::Prime => AnticodeKind::Prime,
        KindArg::Double => AnticodeKind::Double,
    };
    AnticodeSpec::new(kind, s.n, s.w, s.t, s.q).map_err(Failure::usage)
}

fn anticode_cmd(cmd: &AnticodeCommand) -> Outcome {
    match cmd {
        AnticodeCommand::Size(s) => {
            let spec = spec_of(s)?;
            let size = spec.size();
            let text = format!("size {size}, diameter {}\n", spec.diameter());
            Ok(Report { text, body: json!({ "spec": spec, "size": size.to_string(), "diameter": spec.diameter() }), code: EXIT_OK })
        }
        AnticodeCommand::Members { spec, budget, out } => {
            let spec = spec_of(spec)?;
            let words = spec.members(*budget).map_err(Failure::usage)?;
            let code = ConstantWeightCode::new(spec.n, spec.q, words).expect("member lengths");
            let file = code.to_text(false);
            let mut text = format!("{} members\n", code.len());
            match out {
                Some(p) => {
                    write_atomic(p, &file)?;
                    text += &format!("wrote {}\n", p.display());
                }
                None => text += &file,
            }
            Ok(Report { text, body: json!({ "spec": spec, "count": code.len(), "members_sha256": sha256(&file) }), code: EXIT_OK })
        }
        AnticodeCommand::Diameter { spec, budget } => {
            let spec = spec_of(spec)?;
            let r = anticode::anticode_diameter_check(&spec, *budget).map_err(Failure::usage)?;
            let ok = r.matches();
            let text = format!(
                "diameter {} (closed form {}){}\n{}\n",
                r.diameter,
                r.claimed,
                r.witness.as_ref().map_or(String::new(), |(x, y)| format!(", attained by {x:?} and {y:?}")),
                if ok { "PASS" } else { "FAILED" }
            );
            Ok(Report { text, body: json!(r), code: if ok { EXIT_OK } else { EXIT_VERIFY } })
        }
        AnticodeCommand::Ekr { n, w, s, variant } => {
            let v = match variant {
                VariantArg::I => EkrVariant::I,
                VariantArg::Ii => EkrVariant::Ii,
            };
            let b = anticode::ekr_bound(*n, *w, *s, v).map_err(Failure::usage)?;
            let text = format!("bound {}{}\n", b.bound, if b.applicable { "" } else { " (hypothesis does not hold)" });
            Ok(Report { text, body: json!(b), code: EXIT_OK })
        }
        AnticodeCommand::Max { n, w, q, diameter, max_vertices, max_nodes } => {
            let budget = max_nodes.map_or_else(Budget::default, |max_nodes| Budget { max_nodes });
            match anticode::max_anticode_bruteforce(*n, *w, *q, *diameter, *max_vertices, budget) {
                Ok(m) => {
                    let text = format!("maximum size {} ({} search nodes)\n", m.size, m.nodes);
                    Ok(Report { text, body: json!(m), code: EXIT_OK })
                }
                Err(anticode::AnticodeError::SearchExhausted) => {
                    Err(Failure { code: EXIT_BUDGET, message: "clique search budget exhausted".into(), body: None })
                }
                Err(e) => Err(Failure::usage(e)),
            }
        }
    }
}

/// True when `i -> (i mod n) + 1` maps the block set onto itself.
fn is_cyclic(sys: &SteinerSystem) -> bool {
    sys.blocks().iter().all(|b| sys.index_of(&rotate_block(b, 1, sys.n())).is_some())
}

fn chi_of(sys: &SteinerSystem, budget: Budget) -> Result<usize, Failure> {
    let g = coloring::min_distance_graph(sys).map_err(Failure::usage)?;
    coloring::chromatic_number(&g, budget).map(|r| r.chi).map_err(|e| match e {
        ColoringError::BudgetExhausted { .. } => Failure { code: EXIT_BUDGET, message: e.to_string(), body: None },
        e => Failure::usage(e),
    })
}

fn bounds_cmd(data: &DataDir, a: &BoundsArgs) -> Outcome {
    let (t, k, n) = (a.t, a.k, a.n);
    let budget = a.max_nodes.map_or_else(Budget::default, |max_nodes| Budget { max_nodes });
    let mut notes = Vec::new();
    let mut cert = match a.target {
        TargetArg::Qdouble0 => {
            let (cert, cb) = bounds::qdouble0_bounds(t, k, n).map_err(Failure::usage)?;
            notes.push(format!("R = {}, ptilde = {} (floor {})", cb.r, cb.ptilde, cb.floor_ptilde));
            cert
        }
        TargetArg::Qprime0 => {
            let mut class_chis = Vec::new();
            for name in &a.all_classes {
                let sys = load_system(data, name, &[])?;
                if (sys.t(), sys.k(), sys.n()) != (t - 1, k - 1, n - 1) {
                    return Err(Failure::usage(format!("{name} is not an S({},{},{})", t - 1, k - 1, n - 1)));
                }
                let c = chi_of(&sys, budget)?;
                notes.push(format!("chi({name}) = {c}"));
                class_chis.push(c);
            }
            if t <= 3 {
                let mut evidence = Vec::new();
                if !class_chis.is_empty() {
                    evidence.push(ChiEvidence::AllDerivedClasses { chis: class_chis });
                }
                for name in &a.systems {
                    let sys = load_system(data, name, &[])?;
                    if (sys.t(), sys.k(), sys.n()) != (t, k, n) {
                        return Err(Failure::usage(format!("{name} is not an S({t},{k},{n})")));
                    }
                    if t < 3 {
                        continue;
                    }
                    let derived: Vec<SteinerSystem> = if is_cyclic(&sys) {
                        vec![derive(&sys, &[1]).map_err(Failure::usage)?.system]
                    } else {
                        (1..=n).map(|p| derive(&sys, &[p]).map(|d| d.system)).collect::<Result<_, _>>().map_err(Failure::usage)?
                    };
                    if derived.iter().all(|d| resolvability_partition(d).is_some()) {
                        notes.push(format!("{name}: every derived system is resolvable"));
                        evidence.push(ChiEvidence::AllDerivedResolvable);
                    } else if derived.len() == 1 {
                        let chi = chi_of(&derived[0], budget)?;
                        notes.push(format!("{name}: cyclic, derived chi = {chi}"));
                        evidence.push(ChiEvidence::PointTransitive { chi });
                    } else {
                        let chis = derived.iter().map(|d| chi_of(d, budget)).collect::<Result<Vec<_>, _>>()?;
                        notes.push(format!("{name}: derived chi values {chis:?}"));
                        evidence.push(ChiEvidence::DerivedOfSystem { chis });
                    }
                }
                bounds::q0_closed_forms(t, k, n, &evidence).map_err(Failure::usage)?
            } else {
                let mut cert = bounds::qprime0_general(t, k, n, &class_chis).map_err(Failure::usage)?;
                for name in &a.systems {
                    let sys = load_system(data, name, &[])?;
                    if (sys.t(), sys.k(), sys.n()) != (t, k, n) {
                        return Err(Failure::usage(format!("{name} is not an S({t},{k},{n})")));
                    }
                    let colorings = codes::theorem4_colorings(&sys, budget).map_err(Failure::usage)?;
                    let cells: BTreeMap<_, _> = colorings.into_iter().map(|(w, c)| (w, c.partition)).collect();
                    let built = codes::construct_theorem4(&sys, &cells).map_err(Failure::usage)?;
                    let exp = Expected { d: Some(2 * k - t + 1), ..Default::default() };
                    if codes::verify_code(&built.code, exp, Some(t)).passed() {
                        notes.push(format!("{name}: window construction uses q = {}", built.q_used));
                        cert.add(BoundKind::Upper, built.q_used as u64, Provenance::Theorem4);
                    }
                }
                cert
            }
        }
    };
    let mut status = EXIT_OK;
    if let Some(path) = &a.witness {
        let code = ConstantWeightCode::parse(&read_file(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let (w, d) = match a.target {
            TargetArg::Qprime0 => (k, 2 * k - t + 1),
            TargetArg::Qdouble0 => (n - k, n - t + 1),
        };
        let exp = Expected { n: Some(n), w: Some(w), d: Some(d), ..Default::default() };
        let report = codes::verify_code(&code, exp, Some(t));
        let shape_ok = report.support_shape
            == Some(match a.target {
                TargetArg::Qprime0 => codes::SupportShape::Blocks,
                TargetArg::Qdouble0 => codes::SupportShape::Complements,
            });
        if report.passed() && shape_ok {
            cert.add(BoundKind::Upper, code.q() as u64, Provenance::Construction);
            cert.witness_file = Some(path.display().to_string());
        } else {
            notes.push(format!("witness rejected: {:?}", report.failures));
            status = EXIT_VERIFY;
        }
    }
    if !cert.consistent() {
        status = EXIT_VERIFY;
        notes.push("inconsistent: a lower bound exceeds an upper bound".into());
    }
    let text = bounds_text(&cert, &notes);
    Ok(Report { text, body: json!({ "certificate": cert, "notes": notes }), code: status })
}

fn bounds_text(cert: &BoundsCertificate, notes: &[String]) -> String {
    let name = match cert.target {
        Target::Qprime0 => "q'0",
        Target::Qdouble0 => "q''0",
    };
    let mut s = String::new();
    for note in notes {
        s += &format!("{note}\n");
    }
    for b in &cert.bounds {
        let rel = match b.kind {
            BoundKind::Lower => ">=",
            BoundKind::Upper => "<=",
        };
        s += &format!("{name}({},{},{}) {rel} {}  [{:?}]\n", cert.t, cert.k, cert.n, b.value, b.provenance);
    }
    match cert.resolved {
        Some(v) => s += &format!("{name}({},{},{}) = {v}\n", cert.t, cert.k, cert.n),
        None => s += &format!(
            "{} <= {name}({},{},{}) <= {}\n",
            cert.lower().map_or("?".into(), |v| v.to_string()),
            cert.t,
            cert.k,
            cert.n,
            cert.upper().map_or("?".into(), |v| v.to_string())
        ),
    }
    s
}

fn search(data: &DataDir, a: &SearchArgs) -> Outcome {
    let sys = load_system(data, &a.system.system, &a.system.derive)?;
    let family = match a.family {
        FamilyArg::F5prime => Family::F5prime,
        FamilyArg::F5double => Family::F5double,
    };
    let outcome = bounds::search_min_q(&sys, family, a.max_nodes).map_err(Failure::usage)?;
    let mut cert = outcome.certificate(&sys);
    let file = outcome.witness.to_text(false);
    let mut text = String::new();
    for r in &outcome.refuted {
        text += &format!("q = {} impossible ({} nodes)\n", r.q, r.nodes);
    }
    if let Some(out) = &a.out {
        write_atomic(out, &file)?;
        cert.witness_file = Some(out.display().to_string());
        text += &format!("wrote witness to {}\n", out.display());
    }
    let body = json!({
        "certificate": cert,
        "refuted": outcome.refuted,
        "nodes": outcome.nodes,
        "witness_sha256": sha256(&file),
    });
    match outcome.exact() {
        Some(q) => {
            text = format!("{text}minimum q = {q}\n");
            Ok(Report { text, body, code: EXIT_OK })
        }
        None => Err(Failure {
            code: EXIT_BUDGET,
            message: format!("budget exhausted: {} <= q <= {}", outcome.lower, outcome.upper),
            body: Some(body),
        }),
    }
}
