use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use tilemul::bitheap::{compress, default_compressors, heap_from_tiling, load_compressors, CompressorDef};
use tilemul::netlist::{build_netlist, emit_hdl, emit_svg, verify, HdlDialect, Netlist, VerifyMode};
use tilemul::report::{render_table, table};
use tilemul::search::{
    build_default_library, candidate_library, classes_above, one, prune_redundant, rectangular_library, sweep,
};
use tilemul::solver::{export_lp, solve_with_start, Limits, Objective, TilingProblem, TilingSolution};
use tilemul::{Board, Error, Signedness, TileLibrary};

#[derive(Parser, Debug)]
#[command(name = "tilemul", version, about = "Multipliers tiled from irregular LUT-based sub-multipliers")]
struct Cli {
    /// TOML file with defaults for the shared options; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate product patterns of a window and print the efficiency census.
    Search(SearchArgs),
    /// Build or inspect tile libraries.
    #[command(subcommand)]
    Library(LibraryCommand),
    /// Tile a board.
    Solve(BoardArgs),
    /// Tile, compress and emit a netlist.
    Gen(GenArgs),
    /// Check a netlist against multiplication.
    Verify(VerifyArgs),
    /// Compare two libraries over a range of board sizes.
    Table(TableArgs),
    /// Write the tiling problem as an LP model.
    ExportLp(BoardArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Tile library: `default`, `rectangular`, `candidates` or a JSON file.
    #[arg(long)]
    lib: Option<String>,
    /// `paper-model` (tile LUTs plus 0.65 per output bit) or `tiles-only`.
    #[arg(long)]
    objective: Option<String>,
    /// Solver time limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Solver node limit.
    #[arg(long)]
    nodes: Option<u64>,
    /// Artifact directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Compressor definitions (JSON); the built-in set otherwise.
    #[arg(long)]
    compressors: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Svg,
    Hdl,
    Lp,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Window side (the window is bound × bound).
    #[arg(long, default_value_t = 4)]
    bound: u32,
    #[arg(long)]
    signed_x: bool,
    #[arg(long)]
    signed_y: bool,
    /// Both operands unsigned (the default).
    #[arg(long, conflicts_with_all = ["signed_x", "signed_y"])]
    unsigned: bool,
    /// Classes to list.
    #[arg(long, default_value_t = 5)]
    top: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum LibraryCommand {
    /// Run the search and pruning pipeline against all boards up to n × n.
    Build {
        #[arg(long, default_value_t = 8)]
        n: u32,
        #[command(flatten)]
        common: Common,
    },
    /// List the entries of a library.
    Show {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct BoardArgs {
    /// Board as WxH, e.g. 6x6.
    board: String,
    /// Drop output bits below 2^t (faithful truncation).
    #[arg(long, default_value_t = 0)]
    trunc: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Board as WxH; omitted, the solution in the artifact directory is used.
    board: Option<String>,
    #[arg(long, default_value_t = 0)]
    trunc: u32,
    /// Tiling to build from instead of solving.
    #[arg(long)]
    from: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Dialect::Verilog)]
    dialect: Dialect,
    #[command(flatten)]
    common: Common,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Dialect {
    Verilog,
    Vhdl,
}

impl From<Dialect> for HdlDialect {
    fn from(d: Dialect) -> Self {
        match d {
            Dialect::Verilog => HdlDialect::Verilog,
            Dialect::Vhdl => HdlDialect::Vhdl,
        }
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Board as WxH; the design is generated first. Omitted, the netlist
    /// in the artifact directory is checked.
    board: Option<String>,
    #[arg(long, default_value_t = 0)]
    trunc: u32,
    #[arg(long)]
    netlist: Option<PathBuf>,
    /// Every operand pair (the default up to 20 operand bits).
    #[arg(long, conflicts_with = "samples")]
    exhaustive: bool,
    /// Random operand pairs to check.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Largest board side.
    #[arg(long, default_value_t = 8)]
    max: u32,
    /// Library to compare against.
    #[arg(long, default_value = "rectangular")]
    compare: String,
    /// Square boards truncated at t = W instead of full rectangles.
    #[arg(long)]
    truncated: bool,
    #[command(flatten)]
    common: Common,
}

/// Node budget when neither `--nodes` nor `--timeout` is given. A node
/// budget keeps runs reproducible where a time limit would not.
const DEFAULT_NODES: u64 = 2_000_000;

/// Defaults read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    lib: Option<String>,
    objective: Option<String>,
    timeout: Option<f64>,
    nodes: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    compressors: Option<PathBuf>,
    seed: Option<u64>,
}

struct Settings {
    common: Common,
    seed: Option<u64>,
}

impl Settings {
    fn new(common: &Common, seed: Option<u64>, file: &FileConfig) -> Self {
        let c = common.clone();
        Settings {
            common: Common {
                lib: c.lib.or_else(|| file.lib.clone()),
                objective: c.objective.or_else(|| file.objective.clone()),
                timeout: c.timeout.or(file.timeout),
                nodes: c.nodes.or(file.nodes),
                out: c.out.or_else(|| file.out.clone()),
                format: c.format.or(file.format),
                compressors: c.compressors.or_else(|| file.compressors.clone()),
            },
            seed: seed.or(file.seed),
        }
    }

    fn limits(&self) -> anyhow::Result<Limits> {
        if self.common.timeout.is_none() && self.common.nodes.is_none() {
            return Ok(Limits::nodes(DEFAULT_NODES));
        }
        let timeout = match self.common.timeout {
            Some(t) if !(t > 0.0 && t.is_finite()) => bail!(Error::Format(format!("timeout must be positive, got {t}"))),
            t => t.map(Duration::from_secs_f64),
        };
        Ok(Limits {
            max_nodes: self.common.nodes,
            timeout,
        })
    }

    fn objective(&self) -> anyhow::Result<Objective> {
        Ok(match &self.common.objective {
            Some(s) => s.parse()?,
            None => Objective::default(),
        })
    }

    fn library(&self) -> anyhow::Result<TileLibrary> {
        load_library(self.common.lib.as_deref().unwrap_or("default"))
    }

    fn compressors(&self) -> anyhow::Result<Vec<CompressorDef>> {
        Ok(match &self.common.compressors {
            Some(p) => load_compressors(p)?,
            None => default_compressors(),
        })
    }
}

fn load_library(name: &str) -> anyhow::Result<TileLibrary> {
    Ok(match name {
        "default" => TileLibrary::builtin()?,
        "rectangular" => rectangular_library(),
        "candidates" => candidate_library()?,
        path => TileLibrary::load(Path::new(path)).with_context(|| format!("loading library {path}"))?,
    })
}

fn parse_board(text: &str, trunc: u32) -> anyhow::Result<Board> {
    let b: Board = text.parse()?;
    Ok(Board::truncated(b.w_x, b.w_y, trunc)?)
}

/// Records what produced the artifacts of a directory. The manifest file
/// keeps one entry per subcommand run in the directory.
#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    #[serde(skip)]
    command: &'a str,
    board: Option<String>,
    library_version: Option<String>,
    objective: Option<Objective>,
    limits: Option<Limits>,
    seed: Option<u64>,
    artifacts: Vec<String>,
}

struct Artifacts {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Artifacts {
    fn new(dir: Option<PathBuf>) -> anyhow::Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Artifacts { dir, written: Vec::new() })
    }

    fn write(&mut self, name: &str, text: &str) -> anyhow::Result<()> {
        if let Some(d) = &self.dir {
            let path = d.join(name);
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            self.written.push(name.to_string());
        }
        Ok(())
    }

    fn finish(mut self, mut manifest: Manifest) -> anyhow::Result<()> {
        if self.dir.is_none() {
            return Ok(());
        }
        manifest.artifacts = std::mem::take(&mut self.written);
        let path = self.dir.as_ref().expect("checked above").join("manifest.json");
        let mut runs: BTreeMap<String, serde_json::Value> = match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).unwrap_or_default(),
            Err(_) => BTreeMap::new(),
        };
        runs.insert(manifest.command.to_string(), serde_json::to_value(&manifest)?);
        let text = serde_json::to_string_pretty(&runs)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn manifest(command: &str) -> Manifest<'_> {
    Manifest {
        tool: "tilemul",
        version: env!("CARGO_PKG_VERSION"),
        command,
        board: None,
        library_version: None,
        objective: None,
        limits: None,
        seed: None,
        artifacts: Vec::new(),
    }
}

/// Verification failed: the process exits with status 1.
#[derive(Debug)]
struct VerificationFailed;

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for VerificationFailed {}

fn run_search(a: &SearchArgs, s: &Settings) -> anyhow::Result<()> {
    let sign = Signedness::new(a.signed_x, a.signed_y);
    let census = sweep(a.bound, a.bound, sign)?;
    let classes = census.classes();
    println!(
        "{}x{} window, {}: {} canonical patterns, {} realisable, {} need more than seven LUT inputs",
        a.bound,
        a.bound,
        sign,
        census.canonical_count(),
        census.evals.len(),
        census.unrealisable
    );
    if let Some(top) = classes.first() {
        println!(
            "top class E={:.3}: {} tiles",
            *top.efficiency.numer() as f64 / *top.efficiency.denom() as f64,
            top.members.len()
        );
    }
    for c in classes.iter().take(a.top) {
        println!(
            "  E={} ({:.4}): {} tiles",
            c.efficiency,
            *c.efficiency.numer() as f64 / *c.efficiency.denom() as f64,
            c.members.len()
        );
    }
    let above = classes_above(&classes, one());
    let n_above: usize = above.iter().map(|c| c.members.len()).sum();
    println!("E > 1: {n_above} tiles in {} classes", above.len());
    if sign.is_unsigned() {
        let kept = prune_redundant(&above, &rectangular_library())?;
        println!("E > 1 after removing decomposable tiles: {}", kept.len());
    }

    let mut art = Artifacts::new(s.common.out.clone())?;
    #[derive(Serialize)]
    struct ClassOut {
        efficiency: String,
        value: f64,
        members: Vec<String>,
    }
    let out: Vec<ClassOut> = classes
        .iter()
        .map(|c| ClassOut {
            efficiency: c.efficiency.to_string(),
            value: *c.efficiency.numer() as f64 / *c.efficiency.denom() as f64,
            members: c.members.iter().map(|p| p.to_string()).collect(),
        })
        .collect();
    let json = serde_json::to_string_pretty(&out)? + "\n";
    art.write("census.json", &json)?;
    if s.common.format == Some(Format::Json) {
        print!("{json}");
    }
    let mut m = manifest("search");
    m.board = Some(format!("{}x{}", a.bound, a.bound));
    art.finish(m)
}

fn run_library(cmd: &LibraryCommand, file: &FileConfig) -> anyhow::Result<()> {
    match cmd {
        LibraryCommand::Build { n, common } => {
            let s = Settings::new(common, None, file);
            let limits = s.limits()?;
            let outcome = build_default_library(*n, limits)?;
            let census: Vec<String> = outcome.census().iter().map(|c| c.to_string()).collect();
            println!("library sizes per pruning round: {}", census.join(" -> "));
            for (i, r) in outcome.rounds.iter().enumerate() {
                if !r.unproven.is_empty() {
                    let b: Vec<String> = r.unproven.iter().map(|b| b.to_string()).collect();
                    println!("round {i}: optimum not proven on {}", b.join(", "));
                }
            }
            let mut art = Artifacts::new(s.common.out.clone())?;
            let json = outcome.library.to_json()?;
            art.write("library.json", &json)?;
            if s.common.out.is_none() || s.common.format == Some(Format::Json) {
                print!("{json}");
            }
            let mut m = manifest("library build");
            m.library_version = Some(outcome.library.version.clone());
            m.limits = Some(limits);
            art.finish(m)
        }
        LibraryCommand::Show { common } => {
            let s = Settings::new(common, None, file);
            let lib = s.library()?;
            println!("library {} ({} entries)", lib.version, lib.len());
            if let Some(f) = lib.family {
                println!("  carry-chain rectangles 2 x k for k >= {}", f.min_k);
            }
            for e in lib.entries() {
                let t = &e.tile;
                println!(
                    "  {:<32} area {:>2}  LUTs {:>2}  W_out {:>2}  E {:.3}  {:?}",
                    t.pattern.to_string(),
                    t.area,
                    t.cost_mult,
                    t.w_out,
                    *t.efficiency().numer() as f64 / *t.efficiency().denom() as f64,
                    e.provenance
                );
            }
            Ok(())
        }
    }
}

fn problem_for(board: Board, s: &Settings) -> anyhow::Result<(TileLibrary, TilingProblem)> {
    let lib = s.library()?;
    let p = TilingProblem::new(board, &lib)?
        .with_objective(s.objective()?)
        .with_limits(s.limits()?);
    Ok((lib, p))
}

fn solve_board(board: Board, s: &Settings) -> anyhow::Result<(TilingProblem, TilingSolution)> {
    let (_, problem) = problem_for(board, s)?;
    let sol = solve_with_start(&problem, None)?;
    Ok((problem, sol))
}

fn summary(sol: &TilingSolution) -> String {
    format!(
        "{}: {} tiles, {} tile LUTs, objective {}{}",
        sol.board,
        sol.placements.len(),
        sol.tile_lut_cost,
        sol.objective,
        if sol.optimal { " (optimal)" } else { " (not proven optimal)" }
    )
}

fn run_solve(a: &BoardArgs, s: &Settings) -> anyhow::Result<()> {
    let board = parse_board(&a.board, a.trunc)?;
    let (problem, sol) = solve_board(board, s)?;
    let json = sol.to_json()? + "\n";
    let svg = emit_svg(&problem, &sol);
    let mut art = Artifacts::new(s.common.out.clone())?;
    art.write("solution.json", &json)?;
    art.write("tiling.svg", &svg)?;
    match s.common.format {
        Some(Format::Json) => print!("{json}"),
        Some(Format::Svg) => print!("{svg}"),
        Some(f) => bail!(Error::Unsupported(format!("solve cannot print {f:?}"))),
        None => println!("{}", summary(&sol)),
    }
    let mut m = manifest("solve");
    m.board = Some(board.to_string());
    m.library_version = Some(sol.library_version.clone());
    m.objective = Some(problem.objective);
    m.limits = Some(problem.limits);
    art.finish(m)
}

fn load_solution(path: &Path, s: &Settings) -> anyhow::Result<(TilingProblem, TilingSolution)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let sol: TilingSolution = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let (lib, problem) = problem_for(sol.board, s)?;
    if lib.version != sol.library_version {
        bail!(Error::Inconsistent(format!(
            "tiling uses library {} but {} is loaded",
            sol.library_version, lib.version
        )));
    }
    sol.validate(&problem)?;
    Ok((problem, sol))
}

fn run_gen(a: &GenArgs, s: &Settings) -> anyhow::Result<()> {
    let (problem, sol) = match (&a.board, &a.from, &s.common.out) {
        (Some(b), None, _) => solve_board(parse_board(b, a.trunc)?, s)?,
        (None, Some(p), _) => load_solution(p, s)?,
        (None, None, Some(dir)) => load_solution(&dir.join("solution.json"), s)?,
        (Some(_), Some(_), _) => bail!(Error::Format("give a board or --from, not both".into())),
        (None, None, None) => bail!(Error::Format("give a board, --from or --out with a solution".into())),
    };
    let heap = heap_from_tiling(&problem, &sol)?;
    let plan = compress(&heap, &s.compressors()?)?;
    let nl = build_netlist(&problem, &sol, &plan)?;
    let dialect: HdlDialect = a.dialect.into();
    let hdl = emit_hdl(&nl, dialect);
    let nl_json = nl.to_json()? + "\n";

    let mut art = Artifacts::new(s.common.out.clone())?;
    if a.board.is_some() {
        art.write("solution.json", &(sol.to_json()? + "\n"))?;
    }
    art.write("tiling.svg", &emit_svg(&problem, &sol))?;
    art.write("plan.json", &(plan.to_json()? + "\n"))?;
    art.write("netlist.json", &nl_json)?;
    art.write(&format!("{}.v", nl.name), &emit_hdl(&nl, HdlDialect::Verilog))?;
    art.write(&format!("{}.vhd", nl.name), &emit_hdl(&nl, HdlDialect::Vhdl))?;
    match s.common.format {
        Some(Format::Hdl) => print!("{hdl}"),
        Some(Format::Json) => print!("{nl_json}"),
        Some(Format::Svg) => print!("{}", emit_svg(&problem, &sol)),
        Some(Format::Lp) => bail!(Error::Unsupported("gen cannot print an LP model".into())),
        None => println!(
            "{}\n{} LUTs: {} in tiles, {} in compression, {} in the final adder; {} carry cells",
            summary(&sol),
            nl.lut_count(),
            sol.tile_lut_cost,
            plan.stage_luts(),
            plan.adder_bits(),
            nl.carry_count()
        ),
    }
    let mut m = manifest("gen");
    m.board = Some(sol.board.to_string());
    m.library_version = Some(sol.library_version.clone());
    m.objective = Some(problem.objective);
    m.limits = Some(problem.limits);
    art.finish(m)
}

fn run_verify(a: &VerifyArgs, s: &Settings) -> anyhow::Result<()> {
    let nl: Netlist = match (&a.board, &a.netlist, &s.common.out) {
        (Some(b), None, _) => {
            let (problem, sol) = solve_board(parse_board(b, a.trunc)?, s)?;
            let plan = compress(&heap_from_tiling(&problem, &sol)?, &s.compressors()?)?;
            build_netlist(&problem, &sol, &plan)?
        }
        (None, path, dir) => {
            let path = match (path, dir) {
                (Some(p), _) => p.clone(),
                (None, Some(d)) => d.join("netlist.json"),
                (None, None) => bail!(Error::Format("give a board, --netlist or --out with a netlist".into())),
            };
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let nl: Netlist = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            nl.check()?;
            nl
        }
        (Some(_), Some(_), _) => bail!(Error::Format("give a board or --netlist, not both".into())),
    };
    let mode = if a.exhaustive {
        Some(VerifyMode::Exhaustive)
    } else {
        a.samples.map(|pairs| VerifyMode::Sampled {
            pairs,
            seed: s.seed.unwrap_or(0),
        })
    };
    let mode = match (mode, s.seed) {
        (None, Some(seed)) if nl.board.w_x + nl.board.w_y > tilemul::netlist::EXHAUSTIVE_BITS => {
            Some(VerifyMode::Sampled { pairs: 100_000, seed })
        }
        (m, _) => m,
    };
    let report = verify(&nl, mode)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    if s.common.format == Some(Format::Json) {
        print!("{json}");
    } else {
        match &report.counterexample {
            None => println!("{}: {} LUTs, {} operand pairs, pass", nl.board, nl.lut_count(), report.pairs),
            Some(c) => println!(
                "{}: FAIL at x={} y={}: got {}, expected {}",
                nl.board, c.x, c.y, c.got, c.expected
            ),
        }
    }
    // the report goes into a directory of its own only when given explicitly
    let mut art = Artifacts::new(s.common.out.clone())?;
    art.write("verify.json", &json)?;
    let mut m = manifest("verify");
    m.board = Some(nl.board.to_string());
    m.seed = match report.mode {
        VerifyMode::Sampled { seed, .. } => Some(seed),
        VerifyMode::Exhaustive => None,
    };
    art.finish(m)?;
    if report.passed {
        Ok(())
    } else {
        Err(VerificationFailed.into())
    }
}

fn run_table(a: &TableArgs, s: &Settings) -> anyhow::Result<()> {
    let lib_a = s.library()?;
    let lib_b = load_library(&a.compare)?;
    let limits = s.limits()?;
    let rows = table(a.max, a.truncated, &lib_a, &lib_b, limits, &s.compressors()?)?;
    println!("A = {}, B = {}; * = optimum not proven", lib_a.version, lib_b.version);
    let text = render_table(&rows);
    print!("{text}");
    let worse: Vec<String> = rows
        .iter()
        .filter(|r| r.a.objective > r.b.objective + 1e-9)
        .map(|r| r.board.to_string())
        .collect();
    if worse.is_empty() {
        println!("objective A <= objective B on every board");
    } else {
        println!("objective A > objective B on {}", worse.join(", "));
    }
    let mut art = Artifacts::new(s.common.out.clone())?;
    art.write("table.txt", &text)?;
    art.write("table.json", &(serde_json::to_string_pretty(&rows)? + "\n"))?;
    let mut m = manifest("table");
    m.library_version = Some(format!("{} vs {}", lib_a.version, lib_b.version));
    m.limits = Some(limits);
    art.finish(m)
}

fn run_export_lp(a: &BoardArgs, s: &Settings) -> anyhow::Result<()> {
    let board = parse_board(&a.board, a.trunc)?;
    let (lib, problem) = problem_for(board, s)?;
    let text = export_lp(&problem)?;
    let mut art = Artifacts::new(s.common.out.clone())?;
    art.write("problem.lp", &text)?;
    if s.common.out.is_none() || s.common.format == Some(Format::Lp) {
        print!("{text}");
    }
    let mut m = manifest("export-lp");
    m.board = Some(board.to_string());
    m.library_version = Some(lib.version);
    m.objective = Some(problem.objective);
    art.finish(m)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).map_err(|e| anyhow!(Error::Format(format!("{}: {e}", p.display()))))?
        }
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Search(a) => run_search(a, &Settings::new(&a.common, None, &file)),
        Command::Library(c) => run_library(c, &file),
        Command::Solve(a) => run_solve(a, &Settings::new(&a.common, None, &file)),
        Command::Gen(a) => run_gen(a, &Settings::new(&a.common, None, &file)),
        Command::Verify(a) => run_verify(a, &Settings::new(&a.common, a.seed, &file)),
        Command::Table(a) => run_table(a, &Settings::new(&a.common, None, &file)),
        Command::ExportLp(a) => run_export_lp(a, &Settings::new(&a.common, None, &file)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<VerificationFailed>() => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
