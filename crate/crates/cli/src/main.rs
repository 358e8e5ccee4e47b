use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vinberg::catalog;
use vinberg::deform::{cell_chart, Chart};
use vinberg::integral::{self, compare_with_direct, Enumeration, Integrality};
use vinberg::io::{emit, parse, Document};
use vinberg::polytope::LabeledPolytope;
use vinberg::realize::{self, PairKind, RELATION_TOL};
use vinberg::{CartanMatrix, CoxeterMatrix, Error};

/// Exact tools for labeled Coxeter truncation polytopes.
///
/// Exit codes: 0 ok, 2 parse or validation error, 3 infeasible input,
/// 4 oracle mismatch, 5 certificate failure.
#[derive(Parser, Debug)]
#[command(name = "vinberg", version)]
struct Cli {
    /// Input JSON file; `-` or absent reads stdin.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output file; absent writes stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Report format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for random word probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    parallel: usize,
    /// Cross-check enumerate against the direct whole-diagram search.
    #[arg(long, global = true)]
    oracle: bool,
    /// Also count points up to symmetries of the labeled polytope.
    #[arg(long, global = true)]
    quotient_symmetry: bool,
    /// Tolerance for relation checks in realize.
    #[arg(long, global = true, default_value_t = RELATION_TOL)]
    tolerance_eps: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Class, Perron type and Lanner flags of a Coxeter or Cartan matrix.
    Classify,
    /// Deformation chart of a polytope.
    DeformInfo,
    /// All integral points of a polytope.
    Enumerate,
    /// Candidate table of the fiber through a point along one cut.
    Sweep {
        #[arg(long, default_value_t = 0)]
        cut: usize,
    },
    /// Integrality certificate of a point.
    Verify,
    /// Reflection matrices of a point with relation and trace checks.
    Realize {
        #[arg(long, default_value_t = 200)]
        words: usize,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
    },
    /// List the embedded examples or emit one as input JSON.
    Catalog { name: Option<String> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
    Dot,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Infeasible(String),
    Mismatch(String),
    Certificate(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Mismatch(_) => 4,
            Failure::Certificate(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Infeasible(m) | Failure::Mismatch(m) | Failure::Certificate(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

/// A finished report plus an optional failure that still prints it.
struct Outcome {
    text: String,
    failure: Option<Failure>,
}

impl From<String> for Outcome {
    fn from(text: String) -> Self {
        Outcome { text, failure: None }
    }
}

type Res<T> = Result<T, Failure>;

fn read_input(path: &Option<PathBuf>) -> Res<Document> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            text = std::fs::read_to_string(p).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?;
        }
        _ => {
            std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::Invalid(format!("stdin: {e}")))?;
        }
    }
    Ok(parse(&text)?)
}

fn unsupported(cmd: &str, f: Format) -> Failure {
    Failure::Invalid(format!("format {f:?} is not available for {cmd}").to_lowercase())
}

fn json_text(v: &Value) -> String {
    emit(v)
}

fn classify(cli: &Cli, format: Format) -> Res<String> {
    let doc = read_input(&cli.input)?;
    let (cox, cartan) = match &doc {
        Document::Cartan { .. } | Document::Point { .. } => {
            let a = doc.to_cartan()?;
            let v = a.validate();
            if !v.is_empty() {
                let list: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                return Err(Failure::Invalid(format!("invalid Cartan matrix: {}", list.join("; "))));
            }
            (a.coxeter(), Some(a))
        }
        _ => (doc.to_coxeter()?, None),
    };
    let bad = cox.validate();
    if !bad.is_empty() {
        let list: Vec<String> = bad
            .iter()
            .map(|&(i, j)| format!("M[{},{}] = {}", cox.names[i], cox.names[j], cox.m[i][j]))
            .collect();
        return Err(Failure::Invalid(format!("invalid Coxeter matrix: {}", list.join("; "))));
    }
    if format == Format::Dot {
        return Ok(cox.to_dot());
    }
    let class = cox.classify(false)?;
    let irreducible = cox.is_irreducible();
    let refine = if irreducible { Some(cox.refine()?) } else { None };
    let a = match cartan {
        Some(a) => a,
        // symmetric cosine matrix, -2 on infinite labels
        None => CartanMatrix::new(cox.names.clone(), cox.gram()),
    };
    let perron = if irreducible { Some(a.perron_type()?) } else { None };
    let mut flags = Vec::new();
    if let Some(r) = refine {
        if r.is_lanner {
            flags.push("Lanner");
        }
        if r.is_2lanner {
            flags.push("2-Lanner");
        }
        if r.is_affine_a_tilde {
            flags.push("affine A");
        }
    }
    if !irreducible {
        flags.push("reducible");
    }
    match format {
        Format::Json => Ok(json_text(&json!({
            "class": class.to_string(),
            "irreducible": irreducible,
            "perron": perron.as_ref().map(|p| json!({
                "type": p.kind.to_string(),
                "lambda": p.lambda.to_string(),
                "rank": p.rank,
            })),
            "lanner": refine.map(|r| r.is_lanner),
            "twoLanner": refine.map(|r| r.is_2lanner),
            "affineA": refine.map(|r| r.is_affine_a_tilde),
        }))),
        Format::Text => {
            let mut s = format!("{class}");
            if let Some(p) = &perron {
                write!(s, ", {} type, rank {}", p.kind.to_string().to_lowercase(), p.rank).unwrap();
            }
            for f in &flags {
                write!(s, ", {f}").unwrap();
            }
            s.push('\n');
            if let Some(p) = &perron {
                writeln!(s, "lambda {}", p.lambda).unwrap();
            }
            Ok(s)
        }
        f => Err(unsupported("classify", f)),
    }
}

fn constraint_text(row: &[i64]) -> String {
    let mut s = String::new();
    for (k, &c) in row.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let sign = if c < 0 { "-" } else if s.is_empty() { "" } else { "+" };
        let mag = if c.abs() == 1 { String::new() } else { c.abs().to_string() };
        write!(s, "{sign}{mag}R{}", k + 1).unwrap();
    }
    s + "=0"
}

fn obstruction(chart: &Chart) -> bool {
    chart.tree.cuts.iter().any(|c| c.a_tilde)
}

fn deform_info(cli: &Cli, format: Format) -> Res<String> {
    let g = read_input(&cli.input)?.to_polytope()?;
    let chart = match cell_chart(&g) {
        Ok(c) => c,
        Err(Error::EmptyCell(reason)) => {
            return match format {
                Format::Json => Ok(json_text(&json!({ "empty": true, "reason": reason }))),
                Format::Text => Ok(format!("cell empty: {reason}\n")),
                f => Err(unsupported("deform-info", f)),
            };
        }
        Err(e) => return Err(e.into()),
    };
    let leaves: Vec<Value> = chart
        .leaves
        .iter()
        .zip(&chart.tree.leaves)
        .map(|(c, l)| {
            json!({
                "facets": l.simplex,
                "case": format!("{:?}", c.tag),
                "coordinates": c.coordinates.iter().map(|k| k.names(&c.cox.names).join(",")).collect::<Vec<_>>(),
                "constraints": c.constraints.iter().map(|r| constraint_text(r)).collect::<Vec<_>>(),
                "dimension": c.dimension,
            })
        })
        .collect();
    let cuts: Vec<Value> = chart
        .tree
        .cuts
        .iter()
        .enumerate()
        .map(|(k, c)| {
            json!({
                "delta": c.delta,
                "left": c.left,
                "right": c.right,
                "class": c.class.to_string(),
                "affineA": c.a_tilde,
                "identified": chart.identified.contains(&k),
            })
        })
        .collect();
    let obstructed = obstruction(&chart);
    match format {
        Format::Json => Ok(json_text(&json!({
            "dimension": chart.dimension,
            "ePlus": chart.e_plus,
            "d": chart.dim,
            "expected": chart.e_plus as i64 - chart.dim as i64,
            "leaves": leaves,
            "cuts": cuts,
            "connectednessObstruction": obstructed,
        }))),
        Format::Text => {
            let mut s = String::new();
            for (k, (c, l)) in chart.leaves.iter().zip(&chart.tree.leaves).enumerate() {
                writeln!(s, "leaf {k} [{}]: {:?}, dim {}", l.simplex.join(","), c.tag, c.dimension).unwrap();
                for (i, circ) in c.coordinates.iter().enumerate() {
                    writeln!(s, "  R{} = log cyclic product on {}", i + 1, circ.names(&c.cox.names).join(",")).unwrap();
                }
                for r in &c.constraints {
                    writeln!(s, "  constraint {}", constraint_text(r)).unwrap();
                }
            }
            for (k, c) in chart.tree.cuts.iter().enumerate() {
                let id = if chart.identified.contains(&k) { ", identified" } else { "" };
                writeln!(s, "cut {k} [{}]: leaves {} and {}, {}{}", c.delta.join(","), c.left, c.right, c.class, id)
                    .unwrap();
            }
            writeln!(s, "dim {} (e+ = {}, d = {})", chart.dimension, chart.e_plus, chart.dim).unwrap();
            writeln!(s, "connectedness obstruction: {}", if obstructed { "yes" } else { "no" }).unwrap();
            Ok(s)
        }
        f => Err(unsupported("deform-info", f)),
    }
}

fn point_json(p: &integral::IntegralPoint, g: &LabeledPolytope) -> Value {
    let doc = serde_json::to_value(Document::point(&p.point, Some(g))).expect("serializable");
    json!({
        "point": doc,
        "certificate": p.certificate.entries.iter().map(|e| json!({
            "circuit": e.circuit,
            "value": e.value.to_string(),
        })).collect::<Vec<_>>(),
        "provenance": p.provenance,
    })
}

fn enumerate(cli: &Cli, format: Format) -> Res<Outcome> {
    let g = read_input(&cli.input)?.to_polytope()?;
    let en: Enumeration = integral::enumerate(&g).map_err(|e| Failure::Infeasible(e.to_string()))?;
    let quotient = if cli.quotient_symmetry { Some(integral::quotient_count(&g, &en.points)?) } else { None };
    let oracle = if cli.oracle { Some(compare_with_direct(&g, &en, 60)?) } else { None };
    let reason = en.feasible.reason.clone().or_else(|| en.shortcut.as_ref().map(|s| s.to_string()));
    let text = match format {
        Format::Json => json_text(&json!({
            "count": en.points.len(),
            "reason": reason,
            "quotientCount": quotient,
            "oracle": oracle.as_ref().map(|o| json!({
                "bound": o.bound,
                "direct": o.direct,
                "agrees": o.agrees(),
                "unmatched": o.unmatched,
            })),
            "points": en.points.iter().map(|p| point_json(p, &g)).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let mut s = format!("count {}\n", en.points.len());
            if let Some(r) = &reason {
                writeln!(s, "reason: {r}").unwrap();
            }
            if let Some(q) = quotient {
                writeln!(s, "up to symmetry {q}").unwrap();
            }
            if let Some(o) = &oracle {
                writeln!(s, "oracle: direct search up to {} found {}, {}", o.bound, o.direct, if o.agrees() { "agrees" } else { "MISMATCH" })
                    .unwrap();
            }
            for (k, p) in en.points.iter().enumerate() {
                let a = p.point.assemble()?.matrix;
                writeln!(s, "point {k}: E = [{}]", p.point.e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
                    .unwrap();
                for (name, row) in a.names.iter().zip(&a.a) {
                    writeln!(s, "  {name}: {}", row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).unwrap();
                }
            }
            s
        }
        f => return Err(unsupported("enumerate", f)),
    };
    let failure = match oracle {
        Some(o) if !o.agrees() => Some(Failure::Mismatch(format!(
            "recursive enumeration found {}, direct search found {}: {}",
            o.recursive,
            o.direct,
            o.unmatched.join("; ")
        ))),
        _ => None,
    };
    Ok(Outcome { text, failure })
}

fn sweep(cli: &Cli, format: Format, cut: usize) -> Res<String> {
    let pt = read_input(&cli.input)?.to_point()?;
    if cut >= pt.cuts.len() {
        return Err(Failure::Invalid(format!("point has {} cuts, no cut {cut}", pt.cuts.len())));
    }
    let sw = integral::fiber_sweep(&pt, cut)?;
    let pass = |e: &vinberg::Scalar| sw.survivors.iter().any(|(x, _, _)| x == e);
    match format {
        Format::Csv => {
            let mut s = format!("# E in [{}, {}]\nn,E,E_approx,D,result\n", sw.band.lo, sw.band.hi);
            for (n, e, d) in &sw.band.candidates {
                writeln!(s, "{n},{e},{},{d},{}", e.to_f64(), if pass(e) { "pass" } else { "fail" }).unwrap();
            }
            Ok(s)
        }
        Format::Json => Ok(json_text(&json!({
            "band": [sw.band.lo.to_string(), sw.band.hi.to_string()],
            "candidates": sw.band.candidates.iter().map(|(n, e, d)| json!({
                "n": n.to_string(), "E": e.to_string(), "D": d.to_string(), "pass": pass(e),
            })).collect::<Vec<_>>(),
        }))),
        Format::Text => {
            let mut s = format!("E in [{}, {}] ~ [{:.6}, {:.6}]\n", sw.band.lo, sw.band.hi, sw.band.lo.to_f64(), sw.band.hi.to_f64());
            for (n, e, d) in &sw.band.candidates {
                writeln!(s, "n = {n}, E = {e}, D = {d}: {}", if pass(e) { "pass" } else { "fail" }).unwrap();
            }
            writeln!(s, "{} survivors", sw.survivors.len()).unwrap();
            Ok(s)
        }
        f => Err(unsupported("sweep", f)),
    }
}

fn verify(cli: &Cli, format: Format) -> Res<Outcome> {
    let pt = read_input(&cli.input)?.to_point()?;
    let result = integral::integral_check(&pt)?;
    let (text, failure) = match (&result, format) {
        (Integrality::Integral(cert), Format::Json) => (
            json_text(&json!({
                "integral": true,
                "certificate": cert.entries.iter().map(|e| json!({"circuit": e.circuit, "value": e.value.to_string()})).collect::<Vec<_>>(),
                "note": cert.note,
            })),
            None,
        ),
        (Integrality::Integral(cert), Format::Text) => {
            let mut s = String::from("integral\n");
            for e in &cert.entries {
                writeln!(s, "  {}: {}", e.circuit.join(","), e.value).unwrap();
            }
            (s, None)
        }
        (Integrality::Fails { circuit, value }, Format::Json) => (
            json_text(&json!({"integral": false, "circuit": circuit, "value": value.to_string()})),
            Some(circuit.join(",")),
        ),
        (Integrality::Fails { circuit, value }, Format::Text) => {
            (format!("not integral: cyclic product on {} is {value}\n", circuit.join(",")), Some(circuit.join(",")))
        }
        (_, f) => return Err(unsupported("verify", f)),
    };
    Ok(Outcome { text, failure: failure.map(|c| Failure::Certificate(format!("no certificate: circuit {c}"))) })
}

fn realize_cmd(cli: &Cli, format: Format, words: usize, max_len: usize) -> Res<String> {
    let pt = read_input(&cli.input)?.to_point()?;
    let a = pt.assemble()?.matrix;
    let r = realize::realize_point(&pt)?;
    let cox: CoxeterMatrix = a.coxeter();
    let checks = realize::verify_relations(&r, &cox, cli.tolerance_eps)?;
    let traces = realize::word_traces(&r, words, max_len, cli.seed);
    let trace_gap = traces.iter().map(|t| (t - t.round()).abs()).fold(0.0, f64::max);
    let kind = |k: &PairKind| match k {
        PairKind::Finite { order, deviation } => json!({"finite": order, "deviation": deviation}),
        PairKind::Loxodromic { trace } => json!({"loxodromic": trace}),
        PairKind::Parabolic { trace } => json!({"parabolic": trace}),
    };
    match format {
        Format::Json => Ok(json_text(&json!({
            "names": r.names,
            "epsilon": r.epsilon,
            "alpha": r.alpha,
            "b": r.b,
            "generators": r.generators,
            "bending": r.bending,
            "relations": checks.iter().map(|c| json!({"s": c.s, "t": c.t, "kind": kind(&c.kind)})).collect::<Vec<_>>(),
            "seed": cli.seed,
            "traces": traces,
            "traceIntegerGap": trace_gap,
        }))),
        Format::Text => {
            let mut s = format!("reproduction error {:e}\n", r.epsilon);
            for (name, g) in r.names.iter().zip(&r.generators) {
                writeln!(s, "sigma_{name}:").unwrap();
                for row in g {
                    writeln!(s, "  {}", row.iter().map(|x| format!("{x:>12.6}")).collect::<Vec<_>>().join(" ")).unwrap();
                }
            }
            for c in &checks {
                let k = match &c.kind {
                    PairKind::Finite { order, deviation } => format!("order {order}, deviation {deviation:e}"),
                    PairKind::Loxodromic { trace } => format!("loxodromic, trace {trace:.6}"),
                    PairKind::Parabolic { trace } => format!("parabolic, trace {trace:.6}"),
                };
                writeln!(s, "{}{}: {k}", c.s, c.t).unwrap();
            }
            writeln!(s, "{} word traces (seed {}), max distance to an integer {:e}", traces.len(), cli.seed, trace_gap)
                .unwrap();
            Ok(s)
        }
        f => Err(unsupported("realize", f)),
    }
}

fn catalog_cmd(format: Format, name: &Option<String>) -> Res<String> {
    match name {
        None => match format {
            Format::Json => Ok(json_text(&json!(catalog::ENTRIES
                .iter()
                .map(|e| json!({"name": e.name, "summary": e.summary}))
                .collect::<Vec<_>>()))),
            Format::Text => {
                let mut s = String::new();
                for e in catalog::ENTRIES {
                    writeln!(s, "{:<22} {}", e.name, e.summary).unwrap();
                }
                Ok(s)
            }
            f => Err(unsupported("catalog", f)),
        },
        Some(n) => {
            let g = catalog::lookup(n)?;
            match format {
                Format::Json | Format::Text => Ok(emit(&Document::polytope(&g))),
                Format::Dot => Ok(g.coxeter().to_dot()),
                f => Err(unsupported("catalog", f)),
            }
        }
    }
}

fn run(cli: &Cli) -> Res<Outcome> {
    if cli.parallel > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.parallel)
            .build_global()
            .map_err(|e| Failure::Invalid(e.to_string()))?;
    }
    let fmt = |default| cli.format.unwrap_or(default);
    Ok(match &cli.command {
        Command::Classify => classify(cli, fmt(Format::Text))?.into(),
        Command::DeformInfo => deform_info(cli, fmt(Format::Text))?.into(),
        Command::Enumerate => enumerate(cli, fmt(Format::Text))?,
        Command::Sweep { cut } => sweep(cli, fmt(Format::Csv), *cut)?.into(),
        Command::Verify => verify(cli, fmt(Format::Text))?,
        Command::Realize { words, max_len } => realize_cmd(cli, fmt(Format::Text), *words, *max_len)?.into(),
        Command::Catalog { name } => catalog_cmd(fmt(Format::Text), name)?.into(),
    })
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Res<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|o| {
        write_output(&cli.output, &o.text)?;
        o.failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
