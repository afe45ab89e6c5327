//! Frozen per-vertex times for the six-instruction teaching sequence with
//! unit latencies, hand-audited over the 6x5 stage grid.

use timing_ir::{Cfg, PipelineSpec};
use timing_oracle::solve_path;

const SEQ6: &str = r#"
schema = "program/1"
name = "seq6"
entry = "b0"
exit = "b0"

[[block]]
id = "b0"
[[block.instr]]
class = "alu-add"
reads = [0]
writes = [3]
fetch = "AH"
[[block.instr]]
class = "alu-add"
reads = [0, 1]
writes = [1]
fetch = "AH"
[[block.instr]]
class = "load"
reads = [3]
writes = [2]
fetch = "AH"
data = "AH"
[[block.instr]]
class = "alu-add"
reads = [2, 12]
fetch = "AH"
[[block.instr]]
class = "load"
reads = [3]
writes = [12]
fetch = "AH"
data = "AH"
[[block.instr]]
class = "alu-add"
reads = [3]
writes = [3]
fetch = "AH"
"#;

#[test]
fn six_instruction_grid_times_are_frozen() {
    let cfg = Cfg::parse(SEQ6).unwrap();
    let spec = PipelineSpec::teaching();
    let path = vec![cfg.entry];
    let solved = solve_path(&spec, &cfg, &path, &|_, _| false);
    assert_eq!(solved.num_stages, 5);
    // (start, end) per stage FE DE EX ME CM, instruction-major. The load's
    // value lands at its memory-stage end, which stalls its consumer in
    // execute and everything the consumer holds back.
    let expected: [[(i64, i64); 5]; 6] = [
        [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)],
        [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)],
        [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)],
        [(1, 2), (2, 3), (5, 6), (6, 7), (7, 8)],
        [(2, 3), (3, 4), (5, 6), (6, 7), (7, 8)],
        [(2, 3), (5, 6), (6, 7), (7, 8), (8, 9)],
    ];
    for (d, row) in expected.iter().enumerate() {
        for (s, &(start, end)) in row.iter().enumerate() {
            assert_eq!(
                solved.times[d * 5 + s],
                (start, end),
                "vertex (instr {d}, stage {s})"
            );
        }
    }
    assert_eq!(solved.total, 9);
}
