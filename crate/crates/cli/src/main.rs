use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use xptype::absint::{satisfiable, AbstractResult, Analyzer, Verdict};
use xptype::axes::AxisOptions;
use xptype::dtd::Dtd;
use xptype::relalg::{TypeSet, UniverseExt};
use xptype::xpath::parse_xpath;

const EXIT_USAGE: u8 = 3;
const EXIT_DTD: u8 = 4;
const EXIT_XPATH: u8 = 5;
const EXIT_AXES: u8 = 6;

/// Computes which node types an XPath 1.0 expression can select under a DTD.
///
/// Exit status: 0 when something may be selected, 1 when nothing can be,
/// 2 when the expression is outside the analyzed fragment, 3 and above on
/// errors. With several expressions the largest status wins.
#[derive(Parser, Debug)]
#[command(name = "xptype", version)]
struct Args {
    /// DTD file; external parameter entities resolve relative to it.
    #[arg(long, value_name = "PATH")]
    dtd: PathBuf,

    /// Comma-separated element names allowed as the document element.
    #[arg(long, value_name = "NAMES")]
    root: Option<String>,

    /// Comma-separated context types, e.g. `#root` or `p,@id`.
    #[arg(long, value_name = "TYPES")]
    context: Option<String>,

    /// Output format; `image` is the default when --context is given.
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Also list steps and predicates that select nothing from the context.
    #[arg(long)]
    prune_report: bool,

    /// Let comments and PIs be siblings of text in the sibling relation.
    #[arg(long)]
    text_comment_siblings: bool,

    /// Read expressions from a file, one per line (`#` starts a comment line).
    #[arg(long, value_name = "PATH", conflicts_with = "expression")]
    expr_file: Option<PathBuf>,

    /// Print only the verdict line.
    #[arg(short, long, conflicts_with = "verbose")]
    quiet: bool,

    /// Report DTD statistics and timings on stderr.
    #[arg(short, long)]
    verbose: bool,

    /// The XPath expression.
    #[arg(required_unless_present = "expr_file")]
    expression: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Pairs,
    Image,
    Json,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    expression: &'a str,
    expanded: String,
    defined: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'a str>,
    pairs: Vec<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    context: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    image: Option<Vec<String>>,
    verdict: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    prune: Vec<String>,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("xptype: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::NonEmptyBound => 0,
        Verdict::EmptyBound => 1,
        Verdict::Unknown => 2,
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(String::from)
        .collect()
}

fn expressions(args: &Args) -> Result<Vec<String>, Failure> {
    let Some(path) = &args.expr_file else {
        let e = args.expression.clone().unwrap_or_default();
        if e.trim().is_empty() {
            return Err(fail(EXIT_USAGE, "the expression is empty"));
        }
        return Ok(vec![e]);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?;
    let list: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect();
    if list.is_empty() {
        return Err(fail(
            EXIT_USAGE,
            format!("{} contains no expressions", path.display()),
        ));
    }
    Ok(list)
}

fn run(args: &Args) -> Result<u8, Failure> {
    let exprs = expressions(args)?;
    let started = Instant::now();
    let mut dtd = Dtd::from_file(&args.dtd).map_err(|e| fail(EXIT_DTD, e.to_string()))?;
    if let Some(root) = &args.root {
        dtd = dtd
            .with_root_constraint(split_list(root))
            .map_err(|e| fail(EXIT_DTD, e.to_string()))?;
    }
    let parsed = started.elapsed();
    let options = AxisOptions {
        text_comment_siblings: args.text_comment_siblings,
        ..AxisOptions::default()
    };
    let analyzer = Analyzer::new(dtd, &options).map_err(|e| fail(EXIT_AXES, e.to_string()))?;
    if args.verbose {
        let attrs = analyzer.dtd.attrs.len();
        eprintln!(
            "dtd: {} elements, {attrs} attribute declarations, {} node types",
            analyzer.dtd.elements.len(),
            analyzer.universe().len()
        );
        for w in &analyzer.dtd.warnings {
            eprintln!("dtd warning: {w}");
        }
        eprintln!(
            "parsed in {parsed:?}, axes built in {:?}",
            started.elapsed() - parsed
        );
    }

    let universe = analyzer.universe().clone();
    let context = match &args.context {
        None => None,
        Some(list) => {
            let mut set = universe.empty_set();
            for name in split_list(list) {
                let t = universe
                    .lookup(&name)
                    .ok_or_else(|| fail(EXIT_USAGE, format!("unknown node type `{name}` in --context")))?;
                set.insert(&t.clone()).expect("type from this universe");
            }
            if set.is_empty() {
                return Err(fail(EXIT_USAGE, "--context names no types"));
            }
            Some(set)
        }
    };
    let format = args.format.unwrap_or(if context.is_some() {
        Format::Image
    } else {
        Format::Pairs
    });
    let all = universe.all();
    let context_set = context.as_ref().unwrap_or(&all);

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut worst = 0;
    for (i, text) in exprs.iter().enumerate() {
        let expr = parse_xpath(text).map_err(|e| fail(EXIT_XPATH, format!("`{text}`: {e}")))?;
        let t = Instant::now();
        let interp = analyzer.interpret(&expr);
        if !args.quiet {
            for w in &interp.warnings {
                eprintln!("warning: {w}");
            }
        }
        let verdict = satisfiable(&interp.result, context_set).expect("same universe");
        worst = worst.max(exit_code(verdict));
        let prune = if args.prune_report {
            analyzer.prune_report(&expr, context_set)
        } else {
            Vec::new()
        };
        if args.verbose {
            eprintln!("interpreted `{text}` in {:?}", t.elapsed());
        }
        let written = if args.quiet {
            writeln!(out, "verdict: {verdict}")
        } else {
            if i > 0 && format != Format::Json {
                let _ = writeln!(out);
            }
            match format {
                Format::Json => {
                    let report = JsonReport {
                        expression: text,
                        expanded: expr.to_string(),
                        defined: interp.result.is_defined(),
                        reason: match &interp.result {
                            AbstractResult::Undefined(r) => Some(r),
                            AbstractResult::Defined(_) => None,
                        },
                        pairs: interp
                            .result
                            .relation()
                            .map(|r| r.sorted_pairs().into_iter().map(|(a, b)| [a, b]).collect())
                            .unwrap_or_default(),
                        context: context.as_ref().map(TypeSet::sorted_names),
                        image: context
                            .as_ref()
                            .and_then(|c| interp.result.relation().map(|r| r.image(c).sorted_names())),
                        verdict: verdict.to_string(),
                        prune: prune.clone(),
                    };
                    let line = serde_json::to_string(&report).expect("serializable report");
                    writeln!(out, "{line}")
                }
                _ => {
                    let body = match (&interp.result, format) {
                        (AbstractResult::Undefined(r), _) => format!("undefined: {r}"),
                        (AbstractResult::Defined(r), Format::Image) => r.image(context_set).to_string(),
                        (AbstractResult::Defined(r), _) => r.to_string(),
                    };
                    let mut s = format!("{expr}\n{body}\nverdict: {verdict}\n");
                    for p in &prune {
                        s.push_str(&format!("prune: {p}\n"));
                    }
                    out.write_all(s.as_bytes())
                }
            }
        };
        written.map_err(|e| fail(EXIT_USAGE, format!("cannot write output: {e}")))?;
    }
    Ok(worst)
}
