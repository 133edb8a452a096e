use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fo2kit::adn::DEFAULT_CLOSURE_CAP;
use fo2kit::corpus::{DEFAULT_COUNT, DEFAULT_SEED};
use fo2kit::types::DEFAULT_TRIPLE_BUDGET;

/// Finite model theory workbench for two-variable logic.
///
/// Exit codes: 0 affirmative or success, 1 negative decision, 2 usage or
/// input error, 3 budget or cap exceeded.
#[derive(Debug, Parser)]
#[command(name = "fo2kit", version)]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Seed for random corpus generation (used by `selftest`).
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the stable pair colors (two-variable types) of a structure.
    Types(TypesArgs),
    /// Decide two-variable equivalence; exit 0 if equivalent, 1 if not.
    Equiv2(Equiv2Args),
    /// Decide three-variable equivalence; exit 0 if equivalent, 1 if not.
    Equiv3(Equiv3Args),
    /// Check a 2-partial isomorphism file; exit 0 if it has no violations.
    Iso(IsoArgs),
    /// Build the finite transitive companion of a structure.
    Companion(CompanionArgs),
    /// Check a structural property; exit 0 if it holds, 1 otherwise.
    Check(CheckArgs),
    /// Search automorphisms; exit 0 if the requested map extends (or, with
    /// no --map, if the structure is transitive), 1 otherwise.
    Aut(AutArgs),
    /// Evaluate a formula; exit 0 if true (or satisfiable with --pairs).
    Eval(EvalArgs),
    /// Definability tools: solution search, synthesis, flip, transfer.
    #[command(subcommand)]
    Beth(BethCommand),
    /// Build or verify the 45-element counterexample model.
    #[command(subcommand)]
    Counterexample(CounterexampleCommand),
    /// Run the core checks on a seeded random corpus; exit 0 if all pass.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct TypesArgs {
    pub input: PathBuf,
    /// Also print the element classes (one-variable types).
    #[arg(long)]
    pub classes: bool,
    /// Also print characteristic formulas.
    #[arg(long)]
    pub formulas: bool,
    /// Largest depth printed in full; deeper formulas report their DAG size.
    #[arg(long, default_value_t = 3, value_name = "D")]
    pub print_depth: usize,
}

#[derive(Debug, Args)]
pub struct Equiv2Args {
    pub left: PathBuf,
    pub right: PathBuf,
    /// Write a 2-partial isomorphism (`e a b` / `p a a' b b'` lines).
    #[arg(long, value_name = "OUT.iso")]
    pub witness: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Equiv3Args {
    pub left: PathBuf,
    pub right: PathBuf,
    /// Maximum number of triples to refine.
    #[arg(long, default_value_t = DEFAULT_TRIPLE_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct IsoArgs {
    pub left: PathBuf,
    pub right: PathBuf,
    pub witness: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompanionArgs {
    pub input: PathBuf,
    /// Output structure.
    #[arg(short, long, value_name = "OUT.fos")]
    pub output: PathBuf,
    /// Write the 2-partial isomorphism from the input to the companion.
    #[arg(long, value_name = "OUT.iso")]
    pub witness: Option<PathBuf>,
    /// Write the JSON build report.
    #[arg(long, value_name = "OUT.json")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Property {
    /// Same two-variable type implies same automorphism orbit.
    Transitive,
    /// Same three-variable type implies same automorphism orbit.
    #[value(name = "31-transitive")]
    ThreeOneTransitive,
    /// Every same-typed pair of elements extends to same-typed pairs.
    Homogeneous,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub property: Property,
    pub input: PathBuf,
    /// Maximum number of triples to refine (31-transitive only).
    #[arg(long, default_value_t = DEFAULT_TRIPLE_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct AutArgs {
    pub input: PathBuf,
    /// Required image `a:b`; repeatable.
    #[arg(long = "map", value_name = "A:B", value_parser = parse_map)]
    pub maps: Vec<(usize, usize)>,
    /// Print the automorphism orbits.
    #[arg(long)]
    pub orbits: bool,
}

fn parse_map(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, found `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("expected an element index, found `{t}`"));
    Ok((parse(a)?, parse(b)?))
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub input: PathBuf,
    pub formula: String,
    /// Allow the third variable z.
    #[arg(long)]
    pub fo3: bool,
    /// Value of a free variable, as `x=0`; repeatable.
    #[arg(long = "assign", value_name = "V=A", value_parser = parse_assign)]
    pub assign: Vec<(char, usize)>,
    /// Print every pair (x, y) satisfying the formula.
    #[arg(long)]
    pub pairs: bool,
}

fn parse_assign(s: &str) -> Result<(char, usize), String> {
    let (v, a) = s.split_once('=').ok_or_else(|| format!("expected V=A, found `{s}`"))?;
    let var = match v.trim() {
        "x" => 'x',
        "y" => 'y',
        "z" => 'z',
        other => return Err(format!("unknown variable `{other}`")),
    };
    let value = a.trim().parse().map_err(|_| format!("expected an element index, found `{a}`"))?;
    Ok((var, value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Brute,
    TypeUnion,
}

#[derive(Debug, Subcommand)]
pub enum BethCommand {
    /// Find every relation satisfying a definition problem on a model;
    /// exit 0 if there is exactly one.
    Solve {
        problem: PathBuf,
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::TypeUnion)]
        mode: Mode,
    },
    /// Synthesize a formula defining relation R from the rest of the model;
    /// exit 0 if one exists, 1 if R cuts a type.
    Synth {
        model: PathBuf,
        #[arg(long)]
        rel: String,
        /// Largest depth printed in full.
        #[arg(long, default_value_t = 3, value_name = "D")]
        print_depth: usize,
    },
    /// Flip relation R on a cut color; exit 0 if the flipped expansion is
    /// 2-equivalent to the original.
    Flip {
        model: PathBuf,
        #[arg(long)]
        rel: String,
        /// Color to flip (default: the smallest cut color).
        #[arg(long = "type", value_name = "T")]
        color: Option<u32>,
        /// Write the model with R replaced by its flip.
        #[arg(short, long, value_name = "OUT.fos")]
        output: Option<PathBuf>,
    },
    /// Pull relation RBAR of MBAR back to M along a 2-partial isomorphism;
    /// exit 0 if the extended witness verifies.
    Transfer {
        m: PathBuf,
        mbar: PathBuf,
        #[arg(long)]
        rel: String,
        /// Write M expanded with the transferred relation.
        #[arg(short, long, value_name = "OUT.fos")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CounterexampleCommand {
    /// Write the model.
    Build {
        #[arg(short, long, value_name = "OUT.fos")]
        output: PathBuf,
    },
    /// Run the verification suite; with --json, write the report to REPORT
    /// (or stdout when REPORT is omitted).
    Verify {
        report: Option<PathBuf>,
        /// Maximum number of triples to refine.
        #[arg(long, default_value_t = DEFAULT_TRIPLE_BUDGET)]
        budget: usize,
        /// Also compute the relation-algebra closure of the basic relations.
        #[arg(long)]
        closure: bool,
        /// Element cap for the closure.
        #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
        cap: usize,
    },
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Number of random structures.
    #[arg(long, default_value_t = DEFAULT_COUNT)]
    pub count: usize,
}
