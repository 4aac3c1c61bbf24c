//! `toric`: command-line front end for fans, line-bundle cohomology,
//! fibrations and exceptional collections.
//!
//! Exit status: 0 success, 1 negative verdict, 2 usage or parse error,
//! 3 validation failure, 4 twist search exhausted.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use toric_core::catalog::{self, CatalogItem};
use toric_core::cohomology::ToricVariety;
use toric_core::collections::{
    check_collection, construct_fibered_collection, default_step, CollectionReport, OrderedCollection, DEFAULT_T_CAP,
};
use toric_core::error::{CatalogError, CollectionError, FibrationError, FormatError};
use toric_core::fan::{validate, Fan};
use toric_core::fibration::verify_fibration;
use toric_core::format;

const EXIT_NEGATIVE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "toric", version, about = "Exact toolkit for smooth complete toric varieties")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    format: OutputFormat,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print the per-sign-pattern ledger and other detail.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Structured,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a fan file (`-` reads standard input).
    FanCheck { fan: PathBuf },
    /// Cohomology dimensions of the divisor with the given ray coefficients.
    Cohomology { fan: PathBuf, divisor: String },
    /// Check an ordered collection: `collection check [FAN] COLLECTION`.
    Collection {
        #[command(subcommand)]
        action: CollectionAction,
    },
    /// Same as `collection check`.
    CollectionCheck(CollectionCheckArgs),
    /// Build or verify fibrations, or construct collections on them.
    Fibration {
        #[command(subcommand)]
        action: FibrationAction,
    },
    /// Same as `fibration build`.
    FibrationBuild(BuildArgs),
    /// Same as `fibration verify`.
    FibrationVerify(VerifyArgs),
    /// Same as `fibration collection`.
    FibrationCollection(ConstructArgs),
    /// Emit a catalog fan or bundle: projective N, product M N, hirzebruch A, p1-over-p2 G.
    Catalog {
        name: String,
        #[arg(allow_negative_numbers = true)]
        params: Vec<i64>,
        /// Write fan, bundle and collection files into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum CollectionAction {
    Check(CollectionCheckArgs),
}

#[derive(clap::Args, Debug)]
struct CollectionCheckArgs {
    /// Either COLLECTION (whose `fan` field is used) or FAN COLLECTION.
    #[arg(num_args = 1..=2, required = true)]
    files: Vec<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum FibrationAction {
    Build(BuildArgs),
    Verify(VerifyArgs),
    Collection(ConstructArgs),
}

#[derive(clap::Args, Debug)]
struct BuildArgs {
    bundle: PathBuf,
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    fan: PathBuf,
    /// Indices of the rays spanning the fiber subspace, e.g. "0 1".
    #[arg(long)]
    fiber_rays: String,
}

#[derive(clap::Args, Debug)]
struct ConstructArgs {
    bundle: PathBuf,
    fiber_collection: PathBuf,
    base_collection: PathBuf,
    /// Step divisor on the base (default: the first base free ray).
    #[arg(long)]
    step: Option<String>,
    /// Largest multiple of the step to try.
    #[arg(long, default_value_t = DEFAULT_T_CAP)]
    cap: u32,
}

/// A failure with its exit category.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let code = match &e {
            FormatError::Parse { .. } | FormatError::Header { .. } | FormatError::Io { .. } => EXIT_USAGE,
            FormatError::Collection(c) => return collection_failure(c.clone()),
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CollectionError> for Failure {
    fn from(e: CollectionError) -> Self {
        collection_failure(e)
    }
}

fn collection_failure(e: CollectionError) -> Failure {
    let code = match e {
        CollectionError::CapExhausted { .. } => EXIT_CAP,
        CollectionError::InputNotStronglyExceptional { .. } => EXIT_NEGATIVE,
        _ => EXIT_INVALID,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

impl From<FibrationError> for Failure {
    fn from(e: FibrationError) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        let code = match e {
            CatalogError::Parameter(_) => EXIT_USAGE,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

struct Output {
    format: OutputFormat,
    verbose: bool,
}

impl Output {
    fn emit(&self, text: &str, structured: Value) {
        match self.format {
            OutputFormat::Text => print!("{text}"),
            OutputFormat::Structured => {
                println!("{}", serde_json::to_string_pretty(&structured).expect("JSON values serialize"))
            }
        }
    }
}

fn read_input(path: &Path) -> Result<(String, String), Failure> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::usage(format!("<stdin>: {e}")))?;
        Ok((text, "<stdin>".to_string()))
    } else {
        Ok((format::read_text(path)?, path.display().to_string()))
    }
}

fn load_fan(path: &Path) -> Result<Fan, Failure> {
    let (text, label) = read_input(path)?;
    Ok(format::parse_fan(&text, &label)?)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn fan_check(out: &Output, path: &Path) -> Result<u8, Failure> {
    let (text, label) = read_input(path)?;
    let data = format::parse_fan_data(&text, &label)?;
    let report = validate(&data);
    let (smooth, complete) = (report.smooth(), report.complete());
    let relations = if report.is_valid() {
        Some(Fan::new(data.clone()).map_err(FormatError::from)?.primitive_collections())
    } else {
        None
    };
    let count = relations.as_ref().map_or("-".to_string(), |r| r.len().to_string());
    let mut text = format!(
        "smooth: {}, complete: {}, primitive collections: {count}\n",
        yes_no(smooth),
        yes_no(complete)
    );
    for f in &report.failures {
        text.push_str(&format!("failure: {f}\n"));
    }
    if out.verbose {
        for r in relations.iter().flatten() {
            let coeffs: Vec<String> = r.coefficients.iter().map(|c| c.to_string()).collect();
            text.push_str(&format!(
                "primitive collection {:?} -> cone {:?} coefficients [{}]\n",
                r.collection,
                r.support_cone_rays,
                coeffs.join(", ")
            ));
        }
    }
    let structured = json!({
        "name": data.name,
        "valid": report.is_valid(),
        "smooth": smooth,
        "complete": complete,
        "primitive_collections": relations.as_ref().map(|r| r.iter().map(|p| json!({
            "collection": p.collection,
            "support_cone_rays": p.support_cone_rays,
            "coefficients": p.coefficients.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>()),
        "failures": report.failures.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
    });
    out.emit(&text, structured);
    Ok(if report.is_valid() { 0 } else { EXIT_INVALID })
}

fn cohomology(out: &Output, fan_path: &Path, divisor: &str) -> Result<u8, Failure> {
    let fan = load_fan(fan_path)?;
    let d = format::parse_coefficients(divisor)?;
    let x = ToricVariety::new(fan);
    let table = x.cohomology(&d).map_err(|e| Failure {
        code: EXIT_INVALID,
        message: e.to_string(),
    })?;
    let mut text = format!("{table}\n");
    if out.verbose {
        for c in &table.ledger {
            text.push_str(&format!(
                "pattern {:?}: {} characters x reduced homology {:?}\n",
                c.nonneg_rays, c.characters, c.homology
            ));
        }
    }
    out.emit(&text, serde_json::to_value(&table).expect("table serializes"));
    Ok(0)
}

fn report_json(c: &OrderedCollection, report: &CollectionReport) -> Result<Value, Failure> {
    let classes = c
        .classes()
        .iter()
        .map(format::divisor_to_i64)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!({
        "fan": c.fan().name(),
        "classes": classes,
        "report": serde_json::to_value(report).expect("report serializes"),
    }))
}

fn collection_check(out: &Output, args: &CollectionCheckArgs) -> Result<u8, Failure> {
    let (fan, c) = match args.files.as_slice() {
        [coll] => format::read_collection(coll)?,
        [fan_path, coll] => {
            let fan = load_fan(fan_path)?;
            let (text, label) = read_input(coll)?;
            let file = format::parse_collection_file(&text, &label)?;
            let c = format::collection_on(&fan, &file.classes)?;
            (fan, c)
        }
        _ => return Err(Failure::usage("expected [FAN] COLLECTION")),
    };
    let report = check_collection(&fan, &c)?;
    let mut text = format!("collection: {c}\n{report}");
    if out.verbose {
        text.push_str(&ext_table(&report));
    }
    out.emit(&text, report_json(&c, &report)?);
    Ok(if report.is_strongly_exceptional { 0 } else { EXIT_NEGATIVE })
}

fn ext_table(report: &CollectionReport) -> String {
    let mut text = String::new();
    for (j, row) in report.ext.iter().enumerate() {
        for (k, dims) in row.iter().enumerate() {
            text.push_str(&format!("ext({j},{k}): {dims:?}\n"));
        }
    }
    text
}

fn fibration_build(out: &Output, args: &BuildArgs) -> Result<u8, Failure> {
    let bundle = format::read_bundle(&args.bundle)?;
    let toml = format::total_fan_to_toml(&bundle)?;
    let mut file = format::fan_to_file(bundle.total())?;
    file.ray_map = Some(format::RayMapFile {
        fiber: bundle.ray_map().fiber_rays.clone(),
        base: bundle.ray_map().base_rays.clone(),
    });
    let rank_ok = bundle.rank_k0_check();
    out.emit(
        &toml,
        json!({ "total": serde_json::to_value(&file).expect("fan file serializes"), "rank_k0_check": rank_ok }),
    );
    Ok(if rank_ok { 0 } else { EXIT_NEGATIVE })
}

fn parse_indices(text: &str) -> Result<Vec<usize>, Failure> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::usage(format!("bad ray index '{s}'"))))
        .collect()
}

fn fibration_verify(out: &Output, args: &VerifyArgs) -> Result<u8, Failure> {
    let fan = load_fan(&args.fan)?;
    let rays = parse_indices(&args.fiber_rays)?;
    match verify_fibration(&fan, &rays) {
        Ok(v) => {
            let b = &v.bundle;
            let twist = b.twist();
            let rows: Vec<Vec<i64>> = (0..twist.rows())
                .map(|i| (0..twist.cols()).map(|j| i64::try_from(&twist[(i, j)]).unwrap_or(i64::MAX)).collect())
                .collect();
            let text = format!(
                "fibration: yes\nfiber: rank {}, {} rays, {} cones\nbase: rank {}, {} rays, {} cones\ntwist: {:?}\nrank k0 check: {}\n",
                b.fiber().rank(),
                b.fiber().num_rays(),
                b.fiber().max_cones().len(),
                b.base().rank(),
                b.base().num_rays(),
                b.base().max_cones().len(),
                rows,
                yes_no(b.rank_k0_check()),
            );
            let structured = json!({
                "fibration": true,
                "fiber": serde_json::to_value(format::fan_to_file(b.fiber())?).expect("serializes"),
                "base": serde_json::to_value(format::fan_to_file(b.base())?).expect("serializes"),
                "twist": rows,
                "input_rays": v.input_rays,
            });
            out.emit(&text, structured);
            Ok(0)
        }
        Err(e) => {
            out.emit(
                &format!("fibration: no ({e})\n"),
                json!({ "fibration": false, "reason": e.to_string() }),
            );
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn fibration_collection(out: &Output, args: &ConstructArgs) -> Result<u8, Failure> {
    let bundle = format::read_bundle(&args.bundle)?;
    let classes_of = |path: &Path, fan: &Fan| -> Result<OrderedCollection, Failure> {
        let (text, label) = read_input(path)?;
        let file = format::parse_collection_file(&text, &label)?;
        Ok(format::collection_on(fan, &file.classes)?)
    };
    let fiber_coll = classes_of(&args.fiber_collection, bundle.fiber())?;
    let base_coll = classes_of(&args.base_collection, bundle.base())?;
    let step = match &args.step {
        Some(s) => format::parse_coefficients(s)?,
        None => default_step(&bundle),
    };
    match construct_fibered_collection(&bundle, &fiber_coll, &base_coll, &step, args.cap) {
        Ok(c) => {
            let mut text = format!(
                "t: {}\ncollection: {}\n{}length accounting: {}\nfullness: {}\n",
                c.t,
                c.collection,
                c.report,
                yes_no(c.length_accounting),
                c.fullness
            );
            if out.verbose {
                text.push_str(&ext_table(&c.report));
            }
            let mut structured = report_json(&c.collection, &c.report)?;
            structured["t"] = json!(c.t);
            structured["length_accounting"] = json!(c.length_accounting);
            structured["fullness"] = json!(c.fullness);
            out.emit(&text, structured);
            Ok(0)
        }
        Err(CollectionError::CapExhausted { cap, best }) => {
            let text = format!(
                "no t in 1..={cap} works; best attempt t = {}\ncollection: {}\n{}",
                best.t, best.collection, best.report
            );
            let mut structured = report_json(&best.collection, &best.report)?;
            structured["t"] = json!(best.t);
            structured["cap_exhausted"] = json!(cap);
            out.emit(&text, structured);
            Ok(EXIT_CAP)
        }
        Err(e) => Err(e.into()),
    }
}

fn file_stem(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect();
    s.trim_matches('-').to_string()
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn catalog_cmd(out: &Output, name: &str, params: &[i64], out_dir: Option<&Path>) -> Result<u8, Failure> {
    let item = catalog::lookup(name, params)?;
    let (fan_toml, fan_file) = match &item {
        CatalogItem::Fan(f) => (format::fan_to_toml(&f.fan)?, format::fan_to_file(&f.fan)?),
        CatalogItem::Bundle(b) => {
            let mut file = format::fan_to_file(b.bundle.total())?;
            file.ray_map = Some(format::RayMapFile {
                fiber: b.bundle.ray_map().fiber_rays.clone(),
                base: b.bundle.ray_map().base_rays.clone(),
            });
            (format::total_fan_to_toml(&b.bundle)?, file)
        }
    };
    let mut written = Vec::new();
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
        match &item {
            CatalogItem::Fan(f) => {
                let stem = file_stem(f.fan.name());
                let fan_name = format!("{stem}.fan");
                written.push(write_file(dir, &fan_name, &fan_toml)?);
                let coll = format::collection_to_toml(&f.collection, Path::new(&fan_name))?;
                written.push(write_file(dir, &format!("{stem}.coll"), &coll)?);
            }
            CatalogItem::Bundle(b) => {
                let stem = file_stem(b.bundle.total().name());
                let fiber_name = format!("{stem}-fiber.fan");
                let base_name = format!("{stem}-base.fan");
                let total_name = format!("{stem}.fan");
                written.push(write_file(dir, &fiber_name, &format::fan_to_toml(b.bundle.fiber())?)?);
                written.push(write_file(dir, &base_name, &format::fan_to_toml(b.bundle.base())?)?);
                written.push(write_file(dir, &total_name, &fan_toml)?);
                let bundle = format::bundle_to_toml(&b.bundle, Path::new(&fiber_name), Path::new(&base_name))?;
                written.push(write_file(dir, &format!("{stem}.bundle"), &bundle)?);
                let fc = format::collection_to_toml(&b.fiber_collection, Path::new(&fiber_name))?;
                written.push(write_file(dir, &format!("{stem}-fiber.coll"), &fc)?);
                let bc = format::collection_to_toml(&b.base_collection, Path::new(&base_name))?;
                written.push(write_file(dir, &format!("{stem}-base.coll"), &bc)?);
                if let Some(c) = &b.collection {
                    let tc = format::collection_to_toml(c, Path::new(&total_name))?;
                    written.push(write_file(dir, &format!("{stem}.coll"), &tc)?);
                }
            }
        }
        if out.verbose {
            for p in &written {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    let structured = json!({
        "fan": serde_json::to_value(&fan_file).expect("fan file serializes"),
        "written": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    out.emit(&fan_toml, structured);
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let out = Output {
        format: cli.format,
        verbose: cli.verbose,
    };
    match &cli.command {
        Command::FanCheck { fan } => fan_check(&out, fan),
        Command::Cohomology { fan, divisor } => cohomology(&out, fan, divisor),
        Command::Collection {
            action: CollectionAction::Check(args),
        }
        | Command::CollectionCheck(args) => collection_check(&out, args),
        Command::Fibration {
            action: FibrationAction::Build(args),
        }
        | Command::FibrationBuild(args) => fibration_build(&out, args),
        Command::Fibration {
            action: FibrationAction::Verify(args),
        }
        | Command::FibrationVerify(args) => fibration_verify(&out, args),
        Command::Fibration {
            action: FibrationAction::Collection(args),
        }
        | Command::FibrationCollection(args) => fibration_collection(&out, args),
        Command::Catalog { name, params, out_dir } => catalog_cmd(&out, name, params, out_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
