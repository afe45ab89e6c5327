//! Command-line driver: load a pipeline description and a program, run the
//! analysis, print the report, optionally emit the path-enumeration ILP.
//!
//! Exit codes: 0 success, 2 invalid input, 3 budget breach, 4 internal
//! invariant violation, 1 anything else.

use xdta::{check, ipet, report};

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cfg_analysis::{AnalysisError, AnalyzeOpts, Analyzer};
use timing_ir::{BlockId, Cfg, PipelineSpec};
use xdd::XddStore;

#[derive(Parser, Debug)]
#[command(
    name = "xdta",
    about = "Static pipeline timing analysis with execution decision diagrams",
    version
)]
struct Args {
    /// Pipeline description file, or preset:<name>
    /// (presets: teaching-5stage, wide-4stage).
    #[arg(long)]
    pipeline: String,

    /// Program description file.
    #[arg(long)]
    program: PathBuf,

    /// Report format.
    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    report: String,

    /// Write the path-enumeration ILP to this file.
    #[arg(long)]
    emit_lp: Option<PathBuf>,

    /// Include every contention window's intermediate diagrams in the report.
    #[arg(long)]
    trace_contention: bool,

    /// State-set cap per block.
    #[arg(long, default_value_t = 64)]
    max_states: usize,

    /// Event generation cap inside loops.
    #[arg(long, default_value_t = 16)]
    max_gen: u32,

    /// On a state-cap breach: join the set into one state instead of failing.
    #[arg(long, default_value = "off", value_parser = ["on", "off"])]
    widen: String,

    /// Cross-validate against the exhaustive scalar oracle (small programs).
    #[arg(long)]
    oracle_check: bool,

    /// Dump per-block delay diagrams (text and DOT) into this directory.
    #[arg(long)]
    dump_xdd: Option<PathBuf>,

    /// Interpret step programs instead of applying pre-compiled matrices.
    #[arg(long)]
    interpret: bool,

    /// Contention-window override (number of fetch contenders).
    #[arg(long)]
    window: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("xdta: {msg}");
            ExitCode::from(code)
        }
    }
}

type Failure = (u8, String);

fn input_err(e: impl std::fmt::Display) -> Failure {
    (2, e.to_string())
}

fn analysis_err(e: AnalysisError) -> Failure {
    match e {
        AnalysisError::IterationBudget { .. } | AnalysisError::StateBudget { .. } => {
            (3, e.to_string())
        }
        _ => (4, e.to_string()),
    }
}

fn run(args: &Args) -> Result<(), Failure> {
    if args.max_states < 1 || args.max_gen < 1 {
        return Err(input_err("caps must be at least 1"));
    }
    let spec = load_pipeline(&args.pipeline)?;
    let cfg = timing_ir::load_program(&args.program).map_err(input_err)?;
    validate_registers(&spec, &cfg)?;

    let opts = AnalyzeOpts {
        use_matrices: !args.interpret,
        max_states: args.max_states,
        max_gen: args.max_gen,
        widen: args.widen == "on",
        window_override: args.window,
        trace_contention: args.trace_contention,
        ..AnalyzeOpts::default()
    };
    let mut store = XddStore::new();
    let mut analyzer = Analyzer::new(&mut store, &spec, &cfg, opts).map_err(analysis_err)?;
    let analysis = analyzer.analyze().map_err(analysis_err)?;

    let mut times: BTreeMap<BlockId, i64> = BTreeMap::new();
    for b in &cfg.blocks {
        let t = analysis
            .block_wcet(analyzer.store, b.id)
            .map_err(analysis_err)?;
        times.insert(b.id, t);
    }
    let wcet = ipet::acyclic_wcet(&cfg, &times);

    let oracle_line = if args.oracle_check {
        match check::oracle_check(&mut analyzer) {
            Ok(line) => Some(line),
            Err(check::CheckFailure::Refused(msg)) => {
                return Err((2, format!("oracle check refused: {msg}")))
            }
            Err(check::CheckFailure::Mismatch(msg)) => {
                return Err((4, format!("oracle check mismatch: {msg}")))
            }
        }
    } else {
        None
    };

    if let Some(path) = &args.emit_lp {
        let lp = ipet::emit_ipet(&cfg, &times);
        std::fs::write(path, lp).map_err(input_err)?;
    }
    if let Some(dir) = &args.dump_xdd {
        dump_diagrams(dir, &analyzer, &analysis)?;
    }

    let report = report::build_report(&analyzer, &analysis, &times, wcet, oracle_line);
    let rendered = match args.report.as_str() {
        "json" => report::render_json(&report),
        _ => report::render_text(&analyzer, &analysis, &report),
    };
    print!("{rendered}");
    Ok(())
}

fn load_pipeline(arg: &str) -> Result<PipelineSpec, Failure> {
    if let Some(name) = arg.strip_prefix("preset:") {
        return PipelineSpec::preset(name).ok_or_else(|| {
            input_err(format!(
                "unknown preset {name}; available: {}",
                PipelineSpec::PRESET_NAMES.join(", ")
            ))
        });
    }
    timing_ir::load_pipeline(std::path::Path::new(arg)).map_err(input_err)
}

fn validate_registers(spec: &PipelineSpec, cfg: &Cfg) -> Result<(), Failure> {
    for b in &cfg.blocks {
        for (i, instr) in b.instrs.iter().enumerate() {
            if let Some(&r) = instr
                .reads
                .iter()
                .chain(&instr.writes)
                .find(|&&r| r as u32 >= spec.registers)
            {
                return Err(input_err(format!(
                    "block {} instr {i}: register r{r} exceeds the pipeline's {} registers",
                    b.name, spec.registers
                )));
            }
        }
    }
    Ok(())
}

fn dump_diagrams(
    dir: &PathBuf,
    analyzer: &Analyzer<'_>,
    analysis: &cfg_analysis::Analysis,
) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(input_err)?;
    for b in &analyzer.cfg.blocks {
        let outcome = &analysis.per_block[&b.id];
        for (i, &t) in outcome.timing.times.iter().enumerate() {
            let base = dir.join(format!("{}_time{}", b.name, i));
            std::fs::write(base.with_extension("txt"), analyzer.store.text(t))
                .map_err(input_err)?;
            std::fs::write(
                base.with_extension("dot"),
                analyzer.store.dot(t, &format!("{}_time{}", b.name, i)),
            )
            .map_err(input_err)?;
        }
    }
    Ok(())
}
