//! Command-line pipeline: annotate, evaluate, lint, explain.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use refnum::engine::{annotate_document, Trace};
use refnum::eval::{evaluate, parse_gold, render_table, to_delimited, EvalError};
use refnum::rules::{
    lint_rules, parse_rule_pack, starter_number_pack, starter_refprop_pack, AnyRulePack, RulePack,
};
use refnum::tree::{parse_document, serialize_document, Document, NumberCat, RefProp};

/// Environment variable naming a directory holding `refprop.rules` and
/// `number.rules`, used when the corresponding flag is absent.
pub const RULES_DIR_ENV: &str = "REFNUM_RULES_DIR";

pub mod exit_code {
    /// Tree input failed to parse.
    pub const INPUT: i32 = 3;
    /// A rule pack failed to load or validate.
    pub const RULES: i32 = 4;
    /// Gold records did not align with the annotated nouns.
    pub const GOLD: i32 = 5;
    pub const OTHER: i32 = 1;
}

#[derive(Parser)]
#[command(
    name = "refnum",
    about = "Annotate Japanese dependency trees with referential property and number",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide both categories for every noun and write annotated trees.
    Annotate(AnnotateArgs),
    /// Score annotations (or fresh decisions) against a gold file.
    Eval(EvalArgs),
    /// Report dead, shadowed and never-firing rules over fixture trees.
    Lint(LintArgs),
    /// Render the firing report for one noun from a trace dump.
    Explain(ExplainArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Tree files; each file is one document.
    inputs: Vec<PathBuf>,
    /// A manifest listing tree files, one per line, in discourse order.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct PackArgs {
    /// Referential-property rule file (default: $REFNUM_RULES_DIR/refprop.rules,
    /// else the built-in starter pack).
    #[arg(long, value_name = "PATH")]
    rules_refprop: Option<PathBuf>,
    /// Number rule file (default: $REFNUM_RULES_DIR/number.rules, else the
    /// built-in starter pack).
    #[arg(long, value_name = "PATH")]
    rules_number: Option<PathBuf>,
}

#[derive(Args)]
struct AnnotateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    packs: PackArgs,
    /// Output directory; one annotated file per input document.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Also write the machine-readable firing trace here.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    packs: PackArgs,
    /// Gold file to score against.
    #[arg(long, value_name = "PATH")]
    gold: PathBuf,
    /// Re-annotate the inputs before scoring instead of trusting their
    /// existing annotation fields.
    #[arg(long)]
    annotate: bool,
    /// Write the two tables here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write machine-readable tables here.
    #[arg(long, value_name = "PATH")]
    delimited: Option<PathBuf>,
}

#[derive(Args)]
struct LintArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    packs: PackArgs,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    /// Trace dump written by `annotate --trace`.
    #[arg(long, value_name = "PATH")]
    trace: PathBuf,
    /// Noun id as `document/sentence/index`.
    noun: String,
}

pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::new(exit_code::OTHER, e.to_string())
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Annotate(args) => annotate(args),
        Command::Eval(args) => eval(args),
        Command::Lint(args) => lint(args),
        Command::Explain(args) => explain(args),
    }
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(exit_code::OTHER, format!("{}: {e}", path.display())))
}

fn input_paths(input: &InputArgs) -> Result<Vec<PathBuf>, Failure> {
    let mut paths = input.inputs.clone();
    if let Some(manifest) = &input.manifest {
        let base = manifest.parent().unwrap_or(Path::new(".")).to_path_buf();
        for line in read_to_string(manifest)?.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            paths.push(base.join(line));
        }
    }
    if paths.is_empty() {
        return Err(Failure::new(exit_code::OTHER, "no input files given"));
    }
    Ok(paths)
}

fn load_documents(input: &InputArgs) -> Result<Vec<Document>, Failure> {
    let mut docs = Vec::new();
    for path in input_paths(input)? {
        let text = read_to_string(&path)?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let doc = parse_document(&text, &id)
            .map_err(|e| Failure::new(exit_code::INPUT, format!("{}: {e}", path.display())))?;
        docs.push(doc);
    }
    Ok(docs)
}

fn env_pack(file: &str) -> Option<PathBuf> {
    std::env::var_os(RULES_DIR_ENV).map(|dir| PathBuf::from(dir).join(file))
}

fn load_refprop_pack(packs: &PackArgs) -> Result<RulePack<RefProp>, Failure> {
    match packs
        .rules_refprop
        .clone()
        .or_else(|| env_pack("refprop.rules"))
    {
        Some(path) => {
            let text = read_to_string(&path)?;
            parse_rule_pack::<RefProp>(&text)
                .map_err(|e| Failure::new(exit_code::RULES, format!("{}: {e}", path.display())))
        }
        None => Ok(starter_refprop_pack()),
    }
}

fn load_number_pack(packs: &PackArgs) -> Result<RulePack<NumberCat>, Failure> {
    match packs
        .rules_number
        .clone()
        .or_else(|| env_pack("number.rules"))
    {
        Some(path) => {
            let text = read_to_string(&path)?;
            parse_rule_pack::<NumberCat>(&text)
                .map_err(|e| Failure::new(exit_code::RULES, format!("{}: {e}", path.display())))
        }
        None => Ok(starter_number_pack()),
    }
}

fn annotate(args: AnnotateArgs) -> Result<(), Failure> {
    let refprop = load_refprop_pack(&args.packs)?;
    let number = load_number_pack(&args.packs)?;
    let mut docs = load_documents(&args.input)?;
    fs::create_dir_all(&args.out)?;
    let mut trace = Trace::default();
    for doc in &mut docs {
        let t = annotate_document(doc, &refprop, &number);
        trace.events.extend(t.events);
        let out_path = args.out.join(format!("{}.trees", doc.id));
        fs::write(&out_path, serialize_document(doc, true))?;
    }
    if let Some(path) = &args.trace {
        fs::write(path, trace.to_tsv())?;
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let mut docs = load_documents(&args.input)?;
    if args.annotate {
        let refprop = load_refprop_pack(&args.packs)?;
        let number = load_number_pack(&args.packs)?;
        for doc in &mut docs {
            annotate_document(doc, &refprop, &number);
        }
    }
    let gold_text = read_to_string(&args.gold)?;
    let gold = parse_gold(&gold_text)
        .map_err(|e| Failure::new(exit_code::GOLD, format!("{}: {e}", args.gold.display())))?;
    let (rp, num) = evaluate(&docs, &gold).map_err(|e| {
        let code = match e {
            EvalError::Alignment(_) | EvalError::Unannotated(_) => exit_code::GOLD,
            EvalError::Gold { .. } => exit_code::GOLD,
        };
        Failure::new(code, e.to_string())
    })?;
    let mut text = render_table(&rp, "Referential property");
    text.push('\n');
    text.push_str(&render_table(&num, "Number"));
    match &args.out {
        Some(path) => fs::write(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = &args.delimited {
        let mut delim = to_delimited(&rp);
        delim.push_str(&to_delimited(&num));
        fs::write(path, delim)?;
    }
    Ok(())
}

fn lint(args: LintArgs) -> Result<(), Failure> {
    let refprop = load_refprop_pack(&args.packs)?;
    let number = load_number_pack(&args.packs)?;
    let docs = load_documents(&args.input)?;
    let mut report = String::new();
    let companion_num = AnyRulePack::Number(number.clone());
    let companion_ref = AnyRulePack::RefProp(refprop.clone());
    let mut warnings = lint_rules(&refprop, Some(&companion_num), &docs);
    warnings.extend(lint_rules(&number, Some(&companion_ref), &docs));
    for w in &warnings {
        report.push_str(&w.to_string());
        report.push('\n');
    }
    if warnings.is_empty() {
        report.push_str("no findings\n");
    }
    match &args.out {
        Some(path) => fs::write(path, &report)?,
        None => print!("{report}"),
    }
    Ok(())
}

fn explain(args: ExplainArgs) -> Result<(), Failure> {
    let text = read_to_string(&args.trace)?;
    let trace = Trace::from_tsv(&text)
        .map_err(|e| Failure::new(exit_code::OTHER, format!("{}: {e}", args.trace.display())))?;
    let report = trace
        .explain(&args.noun)
        .map_err(|e| Failure::new(exit_code::OTHER, e.to_string()))?;
    print!("{report}");
    Ok(())
}
