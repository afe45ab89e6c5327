//! Program model: a control-flow graph of basic blocks whose instructions
//! carry access classifications produced by the (external) cache analyses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{IrError, Result};

/// Instruction classes; the pipeline description maps them to latencies.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstrClass {
    AluAdd,
    AluMul,
    AluDiv,
    FpAdd,
    FpMul,
    FpDiv,
    Load,
    Store,
    Branch,
    Nop,
}

impl InstrClass {
    pub const ALL: [InstrClass; 10] = [
        InstrClass::AluAdd,
        InstrClass::AluMul,
        InstrClass::AluDiv,
        InstrClass::FpAdd,
        InstrClass::FpMul,
        InstrClass::FpDiv,
        InstrClass::Load,
        InstrClass::Store,
        InstrClass::Branch,
        InstrClass::Nop,
    ];

    pub fn uses_memory(self) -> bool {
        matches!(self, InstrClass::Load | InstrClass::Store)
    }
}

impl fmt::Display for InstrClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstrClass::AluAdd => "alu-add",
            InstrClass::AluMul => "alu-mul",
            InstrClass::AluDiv => "alu-div",
            InstrClass::FpAdd => "fp-add",
            InstrClass::FpMul => "fp-mul",
            InstrClass::FpDiv => "fp-div",
            InstrClass::Load => "load",
            InstrClass::Store => "store",
            InstrClass::Branch => "branch",
            InstrClass::Nop => "nop",
        })
    }
}

/// Cache-access categories supplied by global analyses.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "AH")]
    AlwaysHit,
    #[serde(rename = "AM")]
    AlwaysMiss,
    #[serde(rename = "NC")]
    NotClassified,
}

impl Classification {
    /// Whether the access can request the bus at all.
    pub fn may_use_bus(self) -> bool {
        !matches!(self, Classification::AlwaysHit)
    }

    /// Whether the access requests the bus unconditionally.
    pub fn must_use_bus(self) -> bool {
        matches!(self, Classification::AlwaysMiss)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::AlwaysHit => "AH",
            Classification::AlwaysMiss => "AM",
            Classification::NotClassified => "NC",
        })
    }
}

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BlockId(pub u32);

impl BlockId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstructionDescriptor {
    /// Program-wide sequential id, assigned at validation.
    pub uid: u32,
    pub class: InstrClass,
    pub reads: BTreeSet<u8>,
    pub writes: BTreeSet<u8>,
    pub fetch: Classification,
    /// Data-access classification; present exactly for loads and stores.
    pub data: Option<Classification>,
}

impl InstructionDescriptor {
    pub fn uses_memory(&self) -> bool {
        self.class.uses_memory()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicBlock {
    pub id: BlockId,
    pub name: String,
    pub instrs: Vec<InstructionDescriptor>,
    pub synthetic: bool,
}

/// Which access of an instruction an event belongs to.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum AccessKind {
    Fetch,
    Data,
}

/// One not-classified access: the owner of one event base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventSpec {
    /// Stable printable name, e.g. `ic@b1.2`.
    pub name: String,
    pub block: BlockId,
    pub instr: usize,
    pub kind: AccessKind,
}

/// Validated control-flow graph with loop bounds.
#[derive(Clone, Debug)]
pub struct Cfg {
    pub name: String,
    pub blocks: Vec<BasicBlock>,
    pub edges: Vec<(BlockId, BlockId)>,
    pub entry: BlockId,
    pub exit: BlockId,
    pub loop_bounds: BTreeMap<BlockId, u32>,
}

impl Cfg {
    pub fn block(&self, id: BlockId) -> &BasicBlock {
        &self.blocks[id.index()]
    }

    pub fn successors(&self, id: BlockId) -> impl Iterator<Item = BlockId> + '_ {
        self.edges
            .iter()
            .filter(move |(s, _)| *s == id)
            .map(|&(_, d)| d)
    }

    pub fn predecessors(&self, id: BlockId) -> impl Iterator<Item = BlockId> + '_ {
        self.edges
            .iter()
            .filter(move |(_, d)| *d == id)
            .map(|&(s, _)| s)
    }

    /// One entry per not-classified access, in deterministic order: block
    /// ascending, instruction ascending, fetch before data.
    pub fn event_inventory(&self) -> Vec<EventSpec> {
        let mut out = Vec::new();
        for block in &self.blocks {
            for (i, instr) in block.instrs.iter().enumerate() {
                if instr.fetch == Classification::NotClassified {
                    out.push(EventSpec {
                        name: format!("ic@{}.{}", block.name, i),
                        block: block.id,
                        instr: i,
                        kind: AccessKind::Fetch,
                    });
                }
                if instr.data == Some(Classification::NotClassified) {
                    out.push(EventSpec {
                        name: format!("dc@{}.{}", block.name, i),
                        block: block.id,
                        instr: i,
                        kind: AccessKind::Data,
                    });
                }
            }
        }
        out
    }

    pub fn instruction_count(&self) -> usize {
        self.blocks.iter().map(|b| b.instrs.len()).sum()
    }
}

// ---- on-disk form ---------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct InstrDoc {
    pub class: InstrClass,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub reads: BTreeSet<u8>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub writes: BTreeSet<u8>,
    pub fetch: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Classification>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BlockDoc {
    pub id: String,
    #[serde(rename = "instr", default)]
    pub instrs: Vec<InstrDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct LoopDoc {
    pub header: String,
    pub bound: u32,
}

/// On-disk form of a program.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ProgramDoc {
    pub schema: String,
    pub name: String,
    pub entry: String,
    pub exit: String,
    #[serde(rename = "block")]
    pub blocks: Vec<BlockDoc>,
    #[serde(rename = "edge", default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(rename = "loop", default)]
    pub loops: Vec<LoopDoc>,
}

pub const PROGRAM_SCHEMA: &str = "program/1";

const MAX_REGISTER: u8 = 63;

impl Cfg {
    pub fn parse(text: &str) -> Result<Cfg> {
        let doc: ProgramDoc = toml::from_str(text).map_err(IrError::from_toml)?;
        Cfg::from_doc(doc)
    }

    pub fn from_doc(doc: ProgramDoc) -> Result<Cfg> {
        if doc.schema != PROGRAM_SCHEMA {
            return Err(IrError::Schema {
                location: "schema".into(),
                message: format!("expected {PROGRAM_SCHEMA:?}, got {:?}", doc.schema),
            });
        }
        let mut names: BTreeMap<String, BlockId> = BTreeMap::new();
        let mut blocks: Vec<BasicBlock> = Vec::new();
        let mut uid = 0u32;
        for b in &doc.blocks {
            if b.id.starts_with("__") {
                return Err(IrError::invalid(
                    format!("block {}", b.id),
                    "names starting with __ are reserved",
                ));
            }
            if names.contains_key(&b.id) {
                return Err(IrError::invalid(format!("block {}", b.id), "duplicate id"));
            }
            let id = BlockId(blocks.len() as u32);
            names.insert(b.id.clone(), id);
            let mut instrs = Vec::new();
            for (i, d) in b.instrs.iter().enumerate() {
                let at = format!("block {} instr {i}", b.id);
                if d.class.uses_memory() != d.data.is_some() {
                    return Err(IrError::invalid(
                        at,
                        "data classification is required exactly for loads and stores",
                    ));
                }
                if let Some(&r) = d.reads.iter().chain(&d.writes).find(|&&r| r > MAX_REGISTER)
                {
                    return Err(IrError::invalid(at, format!("register r{r} out of range")));
                }
                instrs.push(InstructionDescriptor {
                    uid,
                    class: d.class,
                    reads: d.reads.clone(),
                    writes: d.writes.clone(),
                    fetch: d.fetch,
                    data: d.data,
                });
                uid += 1;
            }
            blocks.push(BasicBlock {
                id,
                name: b.id.clone(),
                instrs,
                synthetic: false,
            });
        }
        let lookup = |what: &str, name: &str| -> Result<BlockId> {
            names
                .get(name)
                .copied()
                .ok_or_else(|| IrError::invalid(what.to_string(), format!("unknown block {name}")))
        };
        let mut edges: Vec<(BlockId, BlockId)> = Vec::new();
        for e in &doc.edges {
            let s = lookup(&format!("edge {} -> {}", e.from, e.to), &e.from)?;
            let d = lookup(&format!("edge {} -> {}", e.from, e.to), &e.to)?;
            if edges.contains(&(s, d)) {
                return Err(IrError::invalid(
                    format!("edge {} -> {}", e.from, e.to),
                    "duplicate edge",
                ));
            }
            edges.push((s, d));
        }
        let mut entry = lookup("entry", &doc.entry)?;
        let mut exit = lookup("exit", &doc.exit)?;
        let mut loop_bounds = BTreeMap::new();
        for l in &doc.loops {
            let h = lookup(&format!("loop {}", l.header), &l.header)?;
            if l.bound < 1 {
                return Err(IrError::invalid(
                    format!("loop {}", l.header),
                    "bound must be at least 1",
                ));
            }
            if loop_bounds.insert(h, l.bound).is_some() {
                return Err(IrError::invalid(
                    format!("loop {}", l.header),
                    "duplicate loop bound",
                ));
            }
        }

        // Synthetic entry/exit when the declared ones have in/out edges.
        if edges.iter().any(|&(_, d)| d == entry) {
            let id = BlockId(blocks.len() as u32);
            blocks.push(BasicBlock {
                id,
                name: "__entry".into(),
                instrs: Vec::new(),
                synthetic: true,
            });
            edges.push((id, entry));
            entry = id;
        }
        if edges.iter().any(|&(s, _)| s == exit) {
            let id = BlockId(blocks.len() as u32);
            blocks.push(BasicBlock {
                id,
                name: "__exit".into(),
                instrs: Vec::new(),
                synthetic: true,
            });
            edges.push((exit, id));
            exit = id;
        }

        for b in &blocks {
            if b.instrs.is_empty() && !b.synthetic && b.id != entry && b.id != exit {
                return Err(IrError::invalid(format!("block {}", b.name), "empty block"));
            }
        }

        let cfg = Cfg {
            name: doc.name,
            blocks,
            edges,
            entry,
            exit,
            loop_bounds,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        // Reachability from entry.
        let n = self.blocks.len();
        let mut fwd = vec![false; n];
        let mut stack = vec![self.entry];
        while let Some(b) = stack.pop() {
            if std::mem::replace(&mut fwd[b.index()], true) {
                continue;
            }
            stack.extend(self.successors(b));
        }
        // Reachability to exit.
        let mut bwd = vec![false; n];
        let mut stack = vec![self.exit];
        while let Some(b) = stack.pop() {
            if std::mem::replace(&mut bwd[b.index()], true) {
                continue;
            }
            stack.extend(self.predecessors(b));
        }
        for b in &self.blocks {
            if !fwd[b.id.index()] {
                return Err(IrError::invalid(
                    format!("block {}", b.name),
                    "unreachable from entry",
                ));
            }
            if !bwd[b.id.index()] {
                return Err(IrError::invalid(
                    format!("block {}", b.name),
                    "does not reach exit",
                ));
            }
        }
        // Cycle bounding: removing back edges to bounded headers must leave a
        // DAG (see loops::check_bounded_cycles).
        crate::loops::check_bounded_cycles(self)
    }

    /// On-disk form; synthetic blocks are dropped (they are re-inserted by
    /// parsing).
    pub fn to_doc(&self) -> ProgramDoc {
        let real_entry = if self.block(self.entry).synthetic {
            self.successors(self.entry).next().expect("entry successor")
        } else {
            self.entry
        };
        let real_exit = if self.block(self.exit).synthetic {
            self.predecessors(self.exit).next().expect("exit predecessor")
        } else {
            self.exit
        };
        ProgramDoc {
            schema: PROGRAM_SCHEMA.to_string(),
            name: self.name.clone(),
            entry: self.block(real_entry).name.clone(),
            exit: self.block(real_exit).name.clone(),
            blocks: self
                .blocks
                .iter()
                .filter(|b| !b.synthetic)
                .map(|b| BlockDoc {
                    id: b.name.clone(),
                    instrs: b
                        .instrs
                        .iter()
                        .map(|i| InstrDoc {
                            class: i.class,
                            reads: i.reads.clone(),
                            writes: i.writes.clone(),
                            fetch: i.fetch,
                            data: i.data,
                        })
                        .collect(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|(s, d)| {
                    !self.block(*s).synthetic && !self.block(*d).synthetic
                })
                .map(|&(s, d)| EdgeDoc {
                    from: self.block(s).name.clone(),
                    to: self.block(d).name.clone(),
                })
                .collect(),
            loops: self
                .loop_bounds
                .iter()
                .map(|(&h, &bound)| LoopDoc {
                    header: self.block(h).name.clone(),
                    bound,
                })
                .collect(),
        }
    }

    pub fn print(&self) -> String {
        toml::to_string_pretty(&self.to_doc()).expect("cfg serializes")
    }
}
