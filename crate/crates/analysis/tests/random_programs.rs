//! Randomized differential testing: generated control-flow graphs with
//! random classifications must match the scalar oracle on every complete
//! path and configuration, on both bundled pipelines.

use cfg_analysis::{AnalyzeOpts, Analyzer};
use pipeline_model::EventLookup;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use timing_ir::program::{BlockDoc, EdgeDoc, InstrDoc, LoopDoc, ProgramDoc};
use timing_ir::{Cfg, Classification, InstrClass, PipelineSpec};
use timing_oracle as oracle;
use xdd::{Configuration, ExtTime, XddStore};

fn classification(rng: &mut ChaCha8Rng) -> Classification {
    match rng.gen_range(0..5) {
        0 | 1 => Classification::AlwaysHit,
        2 => Classification::AlwaysMiss,
        _ => Classification::NotClassified,
    }
}

fn instr(rng: &mut ChaCha8Rng) -> InstrDoc {
    let class = *InstrClass::ALL.choose(rng).unwrap();
    let nreads = rng.gen_range(0..3);
    let nwrites = rng.gen_range(0..2);
    InstrDoc {
        class,
        reads: (0..nreads).map(|_| rng.gen_range(0..6u8)).collect(),
        writes: (0..nwrites).map(|_| rng.gen_range(0..6u8)).collect(),
        fetch: classification(rng),
        data: class.uses_memory().then(|| classification(rng)),
    }
}

/// A random forward DAG over `n` blocks (chain plus extra forward edges),
/// optionally with one bounded self loop.
fn random_program(rng: &mut ChaCha8Rng) -> ProgramDoc {
    let n = rng.gen_range(3..=6usize);
    let blocks: Vec<BlockDoc> = (0..n)
        .map(|i| BlockDoc {
            id: format!("b{i}"),
            instrs: (0..rng.gen_range(1..=3)).map(|_| instr(rng)).collect(),
        })
        .collect();
    let mut edges: Vec<EdgeDoc> = (1..n)
        .map(|i| EdgeDoc {
            from: format!("b{}", i - 1),
            to: format!("b{i}"),
        })
        .collect();
    for _ in 0..rng.gen_range(0..3) {
        let from = rng.gen_range(0..n - 1);
        let to = rng.gen_range(from + 1..n);
        let e = EdgeDoc {
            from: format!("b{from}"),
            to: format!("b{to}"),
        };
        if !edges
            .iter()
            .any(|x| x.from == e.from && x.to == e.to)
        {
            edges.push(e);
        }
    }
    let mut loops = Vec::new();
    if rng.gen_bool(0.4) {
        let h = rng.gen_range(1..n - 1);
        edges.push(EdgeDoc {
            from: format!("b{h}"),
            to: format!("b{h}"),
        });
        loops.push(LoopDoc {
            header: format!("b{h}"),
            bound: rng.gen_range(2..=3),
        });
    }
    ProgramDoc {
        schema: "program/1".to_string(),
        name: "random".to_string(),
        entry: "b0".to_string(),
        exit: format!("b{}", n - 1),
        blocks,
        edges,
        loops,
    }
}

fn check(cfg: &Cfg, spec: &PipelineSpec) -> u64 {
    let mut store = XddStore::new();
    let mut analyzer = Analyzer::new(&mut store, spec, cfg, AnalyzeOpts::default()).unwrap();
    let enumeration = oracle::enumerate(cfg).unwrap();
    let mut pairs = 0;
    for path in &enumeration.paths {
        if path.accesses.len() > 10 {
            continue;
        }
        let final_state = analyzer.trace_path(&path.blocks).unwrap();
        let rho = final_state.rho();
        for mask in 0..(1u64 << path.accesses.len()) {
            let solved = oracle::solve_path(spec, cfg, &path.blocks, &|dyn_index, kind| {
                path.accesses
                    .iter()
                    .position(|a| a.dyn_index == dyn_index && a.kind == kind)
                    .map(|i| mask & (1 << i) != 0)
                    .unwrap_or(false)
            });
            let mut gamma = Configuration::new();
            for (i, acc) in path.accesses.iter().enumerate() {
                let base = analyzer
                    .binding
                    .event_base(acc.block, acc.instr, acc.kind)
                    .expect("event bound");
                let event = analyzer.store.event(base, acc.final_generation);
                gamma.set(event, mask & (1 << i) != 0);
            }
            let got = analyzer.store.eval(rho, &gamma).unwrap();
            assert_eq!(
                got,
                ExtTime::Finite(solved.total),
                "path {:?} mask {mask} of:\n{}",
                path.blocks,
                cfg.print()
            );
            pairs += 1;
        }
    }
    pairs
}

#[test]
fn random_programs_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4040);
    let specs = [PipelineSpec::teaching(), PipelineSpec::wide4()];
    let mut total = 0u64;
    let mut programs = 0;
    while programs < 60 {
        let doc = random_program(&mut rng);
        let Ok(cfg) = Cfg::from_doc(doc) else {
            continue;
        };
        if oracle::enumerate(&cfg).is_err() {
            continue; // beyond the enumeration guard
        }
        let spec = &specs[programs % 2];
        total += check(&cfg, spec);
        programs += 1;
    }
    assert!(total > 2000, "only {total} pairs checked");
    println!("checked {total} path-configuration pairs over {programs} random programs");
}

/// The worklist fixpoint must contain every rebased path-prefix state, on
/// random programs too.
#[test]
fn random_programs_worklist_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(5050);
    let mut programs = 0;
    while programs < 20 {
        let doc = random_program(&mut rng);
        let Ok(cfg) = Cfg::from_doc(doc) else {
            continue;
        };
        if oracle::enumerate(&cfg).is_err() {
            continue;
        }
        let spec = PipelineSpec::teaching();
        let mut store = XddStore::new();
        let mut analyzer =
            Analyzer::new(&mut store, &spec, &cfg, AnalyzeOpts::default()).unwrap();
        let Ok(analysis) = analyzer.analyze() else {
            // A cap breach on an exotic random shape is a legitimate loud
            // failure, not a soundness issue.
            programs += 1;
            continue;
        };
        for path in oracle::enumerate_paths(&cfg) {
            let mut state = analyzer.initial_state();
            for k in 0..path.len() {
                let block = path[k];
                assert!(
                    analysis.per_block[&block].input.states().contains(&state),
                    "prefix state missing at {:?} of:\n{}",
                    &path[..=k],
                    cfg.print()
                );
                state = analyzer.transform(block, &state, None).unwrap();
                let (rebased, _, _) = analyzer.rebase_and_clamp(&state).unwrap();
                state = rebased;
                if k + 1 < path.len() && analyzer.is_back_edge(block, path[k + 1]) {
                    let (bumped, _) = analyzer.bump_generation(&state, path[k + 1]).unwrap();
                    state = bumped;
                }
            }
        }
        programs += 1;
    }
}
