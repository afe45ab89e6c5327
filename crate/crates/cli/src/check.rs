//! Desk-scale cross-validation: every (path, configuration) total produced
//! by the analysis machinery must equal the scalar oracle.

use cfg_analysis::Analyzer;
use pipeline_model::EventLookup;
use timing_oracle as oracle;
use xdd::{Configuration, ExtTime};

/// Refuse instances whose configuration spaces outgrow the oracle.
const MAX_EVENTS_PER_PATH: usize = 14;

/// Why a cross-check did not report a match.
pub enum CheckFailure {
    /// The instance exceeds the oracle's guards: not an analysis defect.
    Refused(String),
    /// The analysis and the oracle disagree.
    Mismatch(String),
}

pub fn oracle_check(analyzer: &mut Analyzer<'_>) -> Result<String, CheckFailure> {
    let refuse = |msg: String| CheckFailure::Refused(msg);
    let broken = |msg: String| CheckFailure::Mismatch(msg);
    let cfg = analyzer.cfg;
    let enumeration = oracle::enumerate(cfg).map_err(|e| refuse(e.to_string()))?;
    let mut pairs: u64 = 0;
    for path in &enumeration.paths {
        if path.accesses.len() > MAX_EVENTS_PER_PATH {
            return Err(refuse(format!(
                "path through {} blocks carries {} events; oracle cap is {MAX_EVENTS_PER_PATH}",
                path.blocks.len(),
                path.accesses.len()
            )));
        }
        let final_state = analyzer
            .trace_path(&path.blocks)
            .map_err(|e| broken(e.to_string()))?;
        let rho = final_state.rho();
        for mask in 0..(1u64 << path.accesses.len()) {
            let solved = oracle::solve_path(analyzer.spec, cfg, &path.blocks, &|dyn_index, kind| {
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
            let got = analyzer
                .store
                .eval(rho, &gamma)
                .map_err(|e| CheckFailure::Mismatch(e.to_string()))?;
            if got != ExtTime::Finite(solved.total) {
                return Err(CheckFailure::Mismatch(format!(
                    "path {:?} mask {mask}: analysis {got}, oracle {}",
                    path.blocks, solved.total
                )));
            }
            pairs += 1;
        }
    }
    Ok(format!("match over {pairs} path-configuration pairs"))
}
