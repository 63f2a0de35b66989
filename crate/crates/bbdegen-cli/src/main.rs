//! `bbdegen`: command-line driver for the degeneration constructions.

mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bbdegen::complex::{AffineComplex, ComplexSide};
use bbdegen::complex_basic::{build_complex, dlt_verify};
use bbdegen::complex_general::*;
use bbdegen::discriminant::discriminant;
use bbdegen::geometry::Int;
use bbdegen::homology::{cellular_homology, euler_characteristic};
use bbdegen::io::*;
use bbdegen::nef::NefPartition;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "bbdegen", version, about = "Affine complexes, discriminants and monodromy of nef-partition degenerations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Side of the complex.
    #[arg(long, global = true, value_enum, default_value_t = SideArg::Delta)]
    side: SideArg,
    /// Heights: a file, `mpcp` for the shipped data of an example, or `anticanonical`.
    #[arg(long, global = true)]
    heights: Option<String>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads; the computations are currently sequential.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: u32,
    /// Print timings to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a nef-partition and its duality identities.
    Validate { input: String },
    /// Cell table, f-vector and integral homology of the affine complex.
    Complex { input: String },
    /// Discriminant locus after pruning, with components and families.
    Discriminant { input: String },
    /// Loop monodromy of every discriminant component.
    Monodromy { input: String },
    /// Simplicity of the degeneration.
    Simplicity { input: String },
    /// Legendre duality: emits the dual partition, or checks it with `--verify`.
    Legendre {
        input: String,
        #[arg(long)]
        verify: bool,
    },
    /// Good data for `m0 h + n0 phi` and its exponents.
    Goodsub { input: String },
    /// Re-emits the partition, or with `--heights` the validated heights.
    Export { input: String },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Nabla,
    Delta,
}

impl From<SideArg> for ComplexSide {
    fn from(s: SideArg) -> ComplexSide {
        match s {
            SideArg::Nabla => ComplexSide::Nabla,
            SideArg::Delta => ComplexSide::Delta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Exit code 2 for usage and parse errors, 1 for failed checks.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Finding(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Finding(_) => 1,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Failure {
        match e {
            IoError::Nef(_) => Failure::Finding(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

macro_rules! finding_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Failure {
                Failure::Finding(e.to_string())
            }
        }
    )*};
}

finding_from!(bbdegen::complex::ComplexError, bbdegen::discriminant::DiscriminantError, bbdegen::nef::NefError);

/// What a command produced: a report, or a file body to emit verbatim.
enum Output {
    Report(Report, bool),
    File(String),
}

struct Input {
    example: Option<String>,
    data: PartitionData,
}

fn read_input(input: &str) -> Result<Input, Failure> {
    if let Some(name) = input.strip_prefix("example:") {
        let data = parse_partition(example_source(name)?)?;
        return Ok(Input { example: Some(name.to_string()), data });
    }
    let src = std::fs::read_to_string(input).map_err(|e| Failure::Usage(format!("{}: {}", input, e)))?;
    Ok(Input { example: None, data: parse_partition(&src)? })
}

fn load(input: &str) -> Result<(Input, NefPartition), Failure> {
    let inp = read_input(input)?;
    let np = inp.data.build()?;
    Ok((inp, np))
}

fn height_file(cli: &Cli, inp: &Input) -> Result<Option<HeightFile>, Failure> {
    let Some(src) = cli.heights.as_deref() else { return Ok(None) };
    Ok(Some(match src {
        "anticanonical" => HeightFile::default(),
        "mpcp" => {
            let name = inp.example.as_deref().ok_or_else(|| Failure::Usage("`--heights mpcp` needs an example input".into()))?;
            mpcp_heights(name)?
        }
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {}", path, e)))?;
            parse_heights(&text)?
        }
    }))
}

fn height_data(np: &NefPartition, file: &HeightFile) -> Result<HeightData, Failure> {
    Ok(HeightData::new(np, file.h.as_deref(), file.check_h.as_deref())?)
}

fn setup(cli: &Cli, inp: &Input, np: &NefPartition) -> Result<GeneralSetup, Failure> {
    let file = height_file(cli, inp)?.unwrap_or_default();
    let t = Instant::now();
    let s = GeneralSetup::new(np, height_data(np, &file)?, None)?;
    if cli.verbose {
        eprintln!("setup {:.2?}", t.elapsed());
    }
    Ok(s)
}

/// A JSON number when it fits, a decimal string otherwise.
fn int(x: &Int) -> Value {
    i64::try_from(x).map_or_else(|_| json!(x.to_string()), |v| json!(v))
}

fn ints(xs: &[Int]) -> Value {
    Value::Array(xs.iter().map(int).collect())
}

fn cmd_validate(input: &str) -> Result<Output, Failure> {
    let inp = read_input(input)?;
    let np = match inp.data.build() {
        Ok(np) => np,
        Err(e) => {
            let mut r = Report::new("invalid");
            r.field("reason", e.to_string());
            return Ok(Output::Report(r, false));
        }
    };
    let mut r = Report::new("valid");
    r.field("dimension", np.rank())
        .field("parts", np.r())
        .field("delta_vertices", np.delta.vertices.len())
        .field("nabla_vertices", np.nabla.vertices.len())
        .field("degenerate_parts", json!(np.degenerate))
        .field("nabla_star_is_hull_of_parts", true)
        .field("delta_star_is_hull_of_dual_parts", true)
        .field("pairing_bound", true);
    Ok(Output::Report(r, true))
}

fn complex_report(ac: &AffineComplex) -> Report {
    let mut r = Report::new(ac.summary());
    let homology: Vec<String> = cellular_homology(ac).iter().map(|g| g.to_string()).collect();
    r.field("side", ac.side.name())
        .field("dimension", ac.dim())
        .field("f_vector", json!(ac.f_vector()))
        .field("maximal_cells", ac.maximal_cells().len())
        .field("homology", json!(homology))
        .field("euler_characteristic", euler_characteristic(ac));
    r.table(
        "vertices",
        ac.vertex_cells().iter().map(|&v| json!([v, ints(&ac.vertex_point(v))])).collect(),
    );
    r.table(
        "cells",
        ac.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.dim > 0)
            .map(|(i, c)| json!([i, c.dim, c.vertices, c.facets]))
            .collect(),
    );
    r
}

fn cmd_complex(cli: &Cli, input: &str) -> Result<Output, Failure> {
    let (inp, np) = load(input)?;
    let side = cli.side.into();
    let ac = if cli.heights.is_none() { build_complex(&np, side)? } else { setup(cli, &inp, &np)?.complex(side)? };
    Ok(Output::Report(complex_report(&ac), true))
}

fn summand_keys(s: &GeneralSetup, side: ComplexSide, ac: &AffineComplex) -> Result<BTreeMap<usize, Vec<usize>>, Failure> {
    let mut keys = BTreeMap::new();
    for &c in ac.maximal_cells() {
        keys.insert(c, s.summand_dims(side, ac, c)?);
    }
    Ok(keys)
}

fn cmd_discriminant(cli: &Cli, input: &str, monodromy: bool) -> Result<Output, Failure> {
    let (inp, np) = load(input)?;
    let side: ComplexSide = cli.side.into();
    let s = setup(cli, &inp, &np)?;
    let ac = s.complex(side)?;
    let keys = summand_keys(&s, side, &ac)?;
    let t = Instant::now();
    let d = discriminant(&ac, |c| keys[&c].clone())?;
    if cli.verbose {
        eprintln!("discriminant {:.2?}", t.elapsed());
    }
    let text = d.to_string();
    let mut r = Report::new(text.lines().next().unwrap_or_default());
    r.field("side", side.name())
        .field("complex", ac.summary())
        .field("subdivision_counts", json!(d.bar_counts))
        .field("initial_simplices", d.initial)
        .field("pruned_simplices", d.removed)
        .field("components", d.components.len())
        .field("family_sizes", json!(d.family_sizes()))
        .field("all_primitive_transvections", d.all_primitive());
    let mut family_of = vec![0; d.components.len()];
    for (k, fam) in d.families.iter().enumerate() {
        for &i in fam {
            family_of[i] = k;
        }
    }
    let family_keys: Vec<Value> = d
        .families
        .iter()
        .map(|fam| {
            let set: BTreeSet<&Vec<usize>> = d.components[fam[0]].loop_cells.iter().map(|c| &keys[c]).collect();
            json!(set)
        })
        .collect();
    r.field("family_summand_dimensions", Value::Array(family_keys));
    let rows = d
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if monodromy {
                let m: Vec<Value> = c.monodromy.matrix.iter().map(|row| ints(row)).collect();
                json!([i, family_of[i], int(&c.trace), c.rank, c.primitive_transvection, m])
            } else {
                json!([i, family_of[i], c.shape.name(), c.simplices.len(), c.nodes])
            }
        })
        .collect();
    r.table(if monodromy { "monodromy" } else { "component_table" }, rows);
    if !monodromy {
        let chains = d
            .components
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.simplices.iter().map(move |s| json!([i, s])))
            .collect();
        r.table("component_simplices", chains);
    }
    Ok(Output::Report(r, true))
}

fn cmd_simplicity(cli: &Cli, input: &str) -> Result<Output, Failure> {
    let (inp, np) = load(input)?;
    let side: ComplexSide = cli.side.into();
    let s = setup(cli, &inp, &np)?;
    let ac = s.complex(side)?;
    let rep = match side {
        ComplexSide::Nabla => simplicity_check(&s.np, &s.heights, &s.good, &ac),
        ComplexSide::Delta => simplicity_check(&s.dual.np, &s.dual.heights, &s.dual.good, &ac),
    };
    let simple = rep.is_simple();
    let mut r = Report::new(if simple { "simple" } else { "not simple" });
    let failing: Vec<usize> =
        rep.cells.iter().filter(|c| !(c.primal_elementary && c.dual_elementary)).map(|c| c.cell).collect();
    r.field("side", side.name())
        .field("complex", ac.summary())
        .field("mpcp_h", rep.mpcp_h)
        .field("mpcp_check_h", rep.mpcp_check_h)
        .field("cells_checked", rep.cells.len())
        .field("failures", rep.failures())
        .field("failing_cells", json!(failing))
        .field("anomalies", json!(rep.anomalies));
    Ok(Output::Report(r, simple))
}

fn cmd_legendre(cli: &Cli, input: &str, verify: bool) -> Result<Output, Failure> {
    let (inp, np) = load(input)?;
    if !verify {
        return Ok(Output::File(write_partition(&np.swap_sides()?)));
    }
    let mut problems: Vec<String> = Vec::new();
    let mut r = Report::new("");
    if cli.heights.is_none() {
        match dlt_verify(&np) {
            Ok(d) => {
                r.field("nabla_vertices_checked", d.nabla_vertices).field("delta_vertices_checked", d.delta_vertices);
            }
            Err(e) => problems.push(e.to_string()),
        }
    } else {
        let s = setup(cli, &inp, &np)?;
        match dlt_general_verify(&s) {
            Ok(d) => {
                r.field("nabla_cones_checked", d.nabla_checked).field("delta_cones_checked", d.delta_checked);
            }
            Err(e) => problems.push(e.to_string()),
        }
        let inv = verify_involution(&s);
        r.field("involution_cones_checked", inv.checked);
        problems.extend(inv.discrepancy);
        let alpha = alpha_check(&s);
        r.field("alpha_pairs", alpha.alpha.len());
        problems.extend(alpha.problems);
    }
    let ok = problems.is_empty();
    r.headline = if ok { "all checks pass".into() } else { "verification failed".into() };
    r.field("problems", json!(problems));
    Ok(Output::Report(r, ok))
}

fn cmd_goodsub(cli: &Cli, input: &str) -> Result<Output, Failure> {
    let (inp, np) = load(input)?;
    let file = height_file(cli, &inp)?.unwrap_or_default();
    let hd = height_data(&np, &file)?;
    let ld = LiftedData::new(&np, &hd)?;
    let ex = existence_construction(&np, &hd, &ld)?;
    let good = ex.report.is_good();
    let mut r = Report::new(format!("m0 = {}, n0 = {}", ex.m0, ex.n0));
    r.field("m0", int(&ex.m0))
        .field("n0", int(&ex.n0))
        .field("good", good)
        .field("lifted_rays", ex.good.fan.rays.len())
        .field("lifted_maximal_cones", ex.good.fan.maximal.len())
        .field("problems", json!(ex.report.problems));
    Ok(Output::Report(r, good))
}

fn cmd_export(cli: &Cli, input: &str) -> Result<Output, Failure> {
    let (inp, np) = load(input)?;
    match height_file(cli, &inp)? {
        None => Ok(Output::File(write_partition(&np))),
        Some(file) => {
            let hd = height_data(&np, &file)?;
            Ok(Output::File(write_heights(&HeightFile {
                h: Some(hd.h.entries.clone()),
                check_h: Some(hd.check_h.entries.clone()),
            })))
        }
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Validate { input } => cmd_validate(input),
        Command::Complex { input } => cmd_complex(cli, input),
        Command::Discriminant { input } => cmd_discriminant(cli, input, false),
        Command::Monodromy { input } => cmd_discriminant(cli, input, true),
        Command::Simplicity { input } => cmd_simplicity(cli, input),
        Command::Legendre { input, verify } => cmd_legendre(cli, input, *verify),
        Command::Goodsub { input } => cmd_goodsub(cli, input),
        Command::Export { input } => cmd_export(cli, input),
    }
}

fn emit(cli: &Cli, body: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => std::fs::write(path, body).map_err(|e| Failure::Usage(format!("{}: {}", path.display(), e))),
        None => {
            print!("{}", body);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let t = Instant::now();
    let result = run(&cli).and_then(|out| {
        let (body, ok) = match out {
            Output::Report(r, ok) => (if cli.format == Format::Json { r.to_json() } else { r.to_text() }, ok),
            Output::File(text) if cli.format == Format::Json => {
                (Report::new("file").field("contents", text).clone().to_json(), true)
            }
            Output::File(text) => (text, true),
        };
        emit(&cli, &body)?;
        Ok(ok)
    });
    if cli.verbose {
        eprintln!("total {:.2?}", t.elapsed());
    }
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let (Failure::Usage(msg) | Failure::Finding(msg)) = &e;
            eprintln!("error: {}", msg);
            ExitCode::from(e.code())
        }
    }
}
