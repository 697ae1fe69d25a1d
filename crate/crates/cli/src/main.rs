mod commands;
mod load;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fmtk::Logic;
use report::{CliError, EXIT_USAGE};
use std::path::PathBuf;
use std::process::ExitCode;

/// Finite model theory toolkit.
///
/// Exit codes: 0 success, 1 property refuted (with counterexample),
/// 2 usage or parse error, 3 cap exceeded.
#[derive(Parser, Debug)]
#[command(name = "fmtk", version)]
pub struct Cli {
    #[command(flatten)]
    pub params: Params,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Args, Debug, Clone)]
pub struct Params {
    /// Quantifier rank.
    #[arg(long, global = true, default_value_t = 2)]
    pub m: usize,
    /// Tuple length, crux size or cover arity.
    #[arg(long, global = true, default_value_t = 1)]
    pub k: usize,
    /// Size bound for translations and theory decisions.
    #[arg(long, global = true)]
    pub p: Option<usize>,
    #[arg(long, global = true, default_value = "fo", value_parser = parse_logic)]
    pub logic: Logic,
    /// Witness size bound; defaults to the input's size.
    #[arg(long, global = true)]
    pub bound: Option<usize>,
    /// Most members a PCE cover may use.
    #[arg(long, global = true, default_value_t = 6)]
    pub cover_cap: usize,
    /// Largest FO universe. Defaults to 12 for verbs computing types or
    /// witnesses and 64 for the rest, whose cost is polynomial.
    #[arg(long, global = true)]
    pub max_universe: Option<usize>,
    /// Largest universe once set quantifiers are involved.
    #[arg(long, global = true, default_value_t = 10)]
    pub max_mso_universe: usize,
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for sampling verbs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

fn parse_logic(s: &str) -> Result<Logic, String> {
    s.parse().map_err(|e: fmtk::Error| e.to_string())
}

pub fn elements(s: &str) -> Result<Vec<u32>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|e| e.trim().parse::<u32>().map_err(|_| format!("bad element {e:?}"))).collect()
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// `CLASS/N` parts joined by `+` (e.g. `paths/5+path_unions:2/4`), or `@FILE`.
    #[arg(long)]
    pub family: String,
    /// Restrict the family to models of this sentence.
    #[arg(long)]
    pub modulo: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Truth of a formula in a structure.
    Eval {
        structure: PathBuf,
        formula: PathBuf,
        /// Point assignments `x=3`.
        #[arg(long = "assign")]
        assign: Vec<String>,
        /// Set assignments `X=1,2`.
        #[arg(long = "set")]
        sets: Vec<String>,
    },
    /// Quantifier rank of a formula.
    Rank { formula: PathBuf },
    /// Rank-m equivalence of two (pointed) structures.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_delimiter = ',')]
        tuple_a: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        tuple_b: Vec<u32>,
    },
    /// Fingerprint of the rank-m type.
    Type {
        structure: PathBuf,
        #[arg(long, value_delimiter = ',')]
        tuple: Vec<u32>,
    },
    /// Relativize a formula to the set of the given variables.
    Relativize {
        formula: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        vars: Vec<String>,
    },
    /// Canonical conjunctive query of a pointed structure.
    Ccq {
        structure: PathBuf,
        #[arg(long, value_delimiter = ',')]
        tuple: Vec<u32>,
    },
    /// Minimal cruxes of size at most k.
    Crux {
        structure: PathBuf,
        sentence: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// PSC(k) verdict over a family.
    PscCheck {
        sentence: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// PCE(k) verdict over a family, covers bounded by --cover-cap.
    PceCheck {
        sentence: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Whether the parts form a k-ary cover of the structure.
    CoverCheck {
        structure: PathBuf,
        #[arg(required = true)]
        parts: Vec<PathBuf>,
    },
    /// The GLT(k) translation with k existential and p universal variables.
    GltTranslate {
        sentence: PathBuf,
        /// FO class sentence conjoined to the size bound.
        #[arg(long)]
        class: Option<PathBuf>,
    },
    /// The HPT translation over family members of size at most p.
    HptTranslate {
        sentence: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Apply a translation scheme (builtin name or file).
    SchemeApply {
        scheme: String,
        #[command(subcommand)]
        input: SchemeInput,
    },
    /// Evaluate an operation tree over input structures.
    OptreeEval {
        tree: PathBuf,
        leaves: Vec<PathBuf>,
    },
    /// Height and degree pruning of a tree under representation oracles.
    Prune {
        tree: PathBuf,
        #[arg(long = "oracle", value_delimiter = ',', required = true)]
        oracles: Vec<String>,
        #[arg(long, value_enum, default_value_t = PruneMode::Full)]
        mode: PruneMode,
    },
    /// Smallest witness substructure at rank m within --bound.
    EbspSearch {
        structure: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_delimiter = ',')]
        tuple: Vec<u32>,
        /// Search the label expansion at k = 0 instead.
        #[arg(long)]
        labelled: bool,
    },
    /// Empirical witness bounds per rank, as CSV.
    WitnessProfile {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Decide a sentence over a family from members of size at most p.
    DecideTheory {
        sentence: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Nested word to its tree.
    NwEncode { word: PathBuf },
    /// Tree back to its nested word.
    NwDecode { tree: PathBuf },
    /// Graph of a labelled cotree.
    CotreeGraph { tree: PathBuf },
    /// Built-in fixtures.
    Fixture {
        #[command(subcommand)]
        which: Fixture,
    },
}

#[derive(Subcommand, Debug)]
pub enum SchemeInput {
    Structure {
        path: PathBuf,
        /// First element id of the output universe.
        #[arg(long)]
        base: Option<u32>,
    },
    Formula { path: PathBuf },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum PruneMode {
    Full,
    Height,
    Degree,
}

#[derive(Subcommand, Debug)]
pub enum Fixture {
    /// Writes A.str, B.str and psi_k.fml.
    GltCounterexample {
        k: usize,
        n: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    PhiK { k: usize },
    PsiK { k: usize },
    Scheme { name: String },
}

impl Verb {
    /// Verbs whose cost is exponential in the universe through rank types.
    fn computes_types(&self) -> bool {
        matches!(
            self,
            Verb::Equiv { .. } | Verb::Type { .. } | Verb::Prune { .. } | Verb::EbspSearch { .. } | Verb::WitnessProfile { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verb::Eval { .. } => "eval",
            Verb::Rank { .. } => "rank",
            Verb::Equiv { .. } => "equiv",
            Verb::Type { .. } => "type",
            Verb::Relativize { .. } => "relativize",
            Verb::Ccq { .. } => "ccq",
            Verb::Crux { .. } => "crux",
            Verb::PscCheck { .. } => "psc-check",
            Verb::PceCheck { .. } => "pce-check",
            Verb::CoverCheck { .. } => "cover-check",
            Verb::GltTranslate { .. } => "glt-translate",
            Verb::HptTranslate { .. } => "hpt-translate",
            Verb::SchemeApply { .. } => "scheme-apply",
            Verb::OptreeEval { .. } => "optree-eval",
            Verb::Prune { .. } => "prune",
            Verb::EbspSearch { .. } => "ebsp-search",
            Verb::WitnessProfile { .. } => "witness-profile",
            Verb::DecideTheory { .. } => "decide-theory",
            Verb::NwEncode { .. } => "nw-encode",
            Verb::NwDecode { .. } => "nw-decode",
            Verb::CotreeGraph { .. } => "cotree-graph",
            Verb::Fixture { .. } => "fixture",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let verb = cli.verb.name();
    let json = cli.params.json;
    match commands::run(&cli) {
        Ok(report) => {
            if json {
                println!("{}", pretty(&report.envelope(verb)));
            } else {
                print!("{}", report.text);
            }
            ExitCode::from(report.code())
        }
        Err(e) => fail(verb, json, e),
    }
}

fn fail(verb: &str, json: bool, e: CliError) -> ExitCode {
    if json {
        println!("{}", pretty(&e.envelope(verb)));
    }
    eprintln!("fmtk {verb}: {}", e.message);
    ExitCode::from(e.code)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialise")
}
