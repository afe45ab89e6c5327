//! Pipeline description: stages, queues, functional units, and latencies.
//!
//! The description is data-driven; the analysis derives its temporal-state
//! layout and step programs from it. Two presets are bundled: a five-stage
//! two-way teaching pipeline and a four-stage four-wide pipeline with
//! dedicated functional units.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::program::InstrClass;
use crate::{IrError, Result};

pub const PIPELINE_SCHEMA: &str = "pipeline/1";

/// Roles a stage can play beyond holding instructions for its base latency.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageRole {
    /// Performs the instruction-cache access and talks to the bus on misses.
    Fetch,
    /// Reads register operands and applies per-class or per-unit latencies.
    Execute,
    /// Performs data accesses of loads/stores, in memory order.
    Memory,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct StageDoc {
    pub name: String,
    pub width: u32,
    #[serde(default = "one")]
    pub latency: u64,
    #[serde(default)]
    pub roles: Vec<StageRole>,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct QueueDoc {
    /// Name of the stage the queue sits after; it feeds the next stage.
    pub after: String,
    pub capacity: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct UnitDoc {
    pub name: String,
    pub count: u32,
    /// Instruction classes handled by this unit, with their latencies
    /// (for loads/stores: the hit latency).
    pub latency: BTreeMap<InstrClass, u64>,
}

/// On-disk form of a pipeline description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PipelineDoc {
    pub schema: String,
    pub name: String,
    pub bus_latency: u64,
    pub miss_latency: u64,
    #[serde(default = "one_u32")]
    pub fetch_block: u32,
    pub registers: u32,
    #[serde(rename = "stage")]
    pub stages: Vec<StageDoc>,
    #[serde(rename = "queue", default)]
    pub queues: Vec<QueueDoc>,
    #[serde(rename = "unit", default)]
    pub units: Vec<UnitDoc>,
    /// Per-class latencies at the execute stage, for pipelines without units.
    #[serde(default)]
    pub class_latency: BTreeMap<InstrClass, u64>,
}

fn one_u32() -> u32 {
    1
}

/// A queue between stage `after` and `after + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Queue {
    pub after: usize,
    pub capacity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub name: String,
    pub width: u32,
    pub latency: u64,
    pub roles: Vec<StageRole>,
}

impl Stage {
    pub fn has_role(&self, r: StageRole) -> bool {
        self.roles.contains(&r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuncUnit {
    pub name: String,
    pub count: u32,
    pub latency: BTreeMap<InstrClass, u64>,
}

/// Validated pipeline description.
#[derive(Clone, Debug)]
pub struct PipelineSpec {
    pub name: String,
    pub stages: Vec<Stage>,
    pub queues: Vec<Queue>,
    pub units: Vec<FuncUnit>,
    pub class_latency: BTreeMap<InstrClass, u64>,
    pub bus_latency: u64,
    pub miss_latency: u64,
    pub fetch_block: u32,
    pub registers: u32,
    fetch_stage: usize,
    execute_stage: usize,
    memory_stage: usize,
}

impl PipelineSpec {
    pub fn from_doc(doc: PipelineDoc) -> Result<PipelineSpec> {
        if doc.schema != PIPELINE_SCHEMA {
            return Err(IrError::Schema {
                location: "schema".into(),
                message: format!("expected {PIPELINE_SCHEMA:?}, got {:?}", doc.schema),
            });
        }
        if doc.stages.is_empty() {
            return Err(IrError::invalid("stage", "pipeline needs at least one stage"));
        }
        if doc.bus_latency < 1 {
            return Err(IrError::invalid("bus-latency", "must be at least 1"));
        }
        if doc.miss_latency < 1 {
            return Err(IrError::invalid("miss-latency", "must be at least 1"));
        }
        let mut stages = Vec::new();
        for s in &doc.stages {
            if s.width < 1 {
                return Err(IrError::invalid(
                    format!("stage.{}", s.name),
                    "width must be at least 1",
                ));
            }
            if stages.iter().any(|t: &Stage| t.name == s.name) {
                return Err(IrError::invalid(
                    format!("stage.{}", s.name),
                    "duplicate stage name",
                ));
            }
            stages.push(Stage {
                name: s.name.clone(),
                width: s.width,
                latency: s.latency,
                roles: s.roles.clone(),
            });
        }
        let stage_index = |name: &str| -> Result<usize> {
            stages
                .iter()
                .position(|s| s.name == name)
                .ok_or_else(|| IrError::invalid(format!("stage {name}"), "unknown stage"))
        };
        let role_stage = |role: StageRole| -> Result<usize> {
            let found: Vec<usize> = stages
                .iter()
                .enumerate()
                .filter(|(_, s)| s.has_role(role))
                .map(|(i, _)| i)
                .collect();
            match found.as_slice() {
                [i] => Ok(*i),
                [] => Err(IrError::invalid(
                    "stage.roles",
                    format!("no stage has role {role:?}"),
                )),
                _ => Err(IrError::invalid(
                    "stage.roles",
                    format!("more than one stage has role {role:?}"),
                )),
            }
        };
        let fetch_stage = role_stage(StageRole::Fetch)?;
        let execute_stage = role_stage(StageRole::Execute)?;
        let memory_stage = role_stage(StageRole::Memory)?;
        if stages[fetch_stage].roles.len() != 1 {
            return Err(IrError::invalid(
                "stage.roles",
                "the fetch stage cannot execute or access data memory",
            ));
        }
        if fetch_stage != 0 {
            return Err(IrError::invalid(
                "stage.roles",
                "the fetch stage must be the first stage",
            ));
        }
        let mut queues = Vec::new();
        for q in &doc.queues {
            let after = stage_index(&q.after)?;
            if after + 1 >= stages.len() {
                return Err(IrError::invalid(
                    format!("queue.after = {}", q.after),
                    "no stage follows this one",
                ));
            }
            if q.capacity < 1 {
                return Err(IrError::invalid(
                    format!("queue.after = {}", q.after),
                    "capacity must be at least 1",
                ));
            }
            if queues.iter().any(|p: &Queue| p.after == after) {
                return Err(IrError::invalid(
                    format!("queue.after = {}", q.after),
                    "duplicate queue",
                ));
            }
            queues.push(Queue {
                after,
                capacity: q.capacity,
            });
        }
        queues.sort_by_key(|q| q.after);
        let units: Vec<FuncUnit> = doc
            .units
            .iter()
            .map(|u| FuncUnit {
                name: u.name.clone(),
                count: u.count,
                latency: u.latency.clone(),
            })
            .collect();
        for u in &units {
            if u.count < 1 {
                return Err(IrError::invalid(
                    format!("unit.{}", u.name),
                    "count must be at least 1",
                ));
            }
        }
        let spec = PipelineSpec {
            name: doc.name,
            stages,
            queues,
            units,
            class_latency: doc.class_latency,
            bus_latency: doc.bus_latency,
            miss_latency: doc.miss_latency,
            fetch_block: doc.fetch_block,
            registers: doc.registers,
            fetch_stage,
            execute_stage,
            memory_stage,
        };
        // Every class must resolve to exactly one latency source.
        for class in InstrClass::ALL {
            let in_units: Vec<&FuncUnit> = spec
                .units
                .iter()
                .filter(|u| u.latency.contains_key(&class))
                .collect();
            match (in_units.len(), spec.class_latency.contains_key(&class)) {
                (0, true) | (1, false) => {}
                (0, false) => {
                    return Err(IrError::invalid(
                        format!("class {class}"),
                        "no unit or class-latency entry covers this class",
                    ))
                }
                _ => {
                    return Err(IrError::invalid(
                        format!("class {class}"),
                        "class is covered more than once",
                    ))
                }
            }
        }
        Ok(spec)
    }

    pub fn parse(text: &str) -> Result<PipelineSpec> {
        let doc: PipelineDoc = toml::from_str(text).map_err(IrError::from_toml)?;
        PipelineSpec::from_doc(doc)
    }

    pub fn fetch_stage(&self) -> usize {
        self.fetch_stage
    }

    pub fn execute_stage(&self) -> usize {
        self.execute_stage
    }

    pub fn memory_stage(&self) -> usize {
        self.memory_stage
    }

    /// Queue sitting between `after` and `after + 1`, if any.
    pub fn queue_after(&self, after: usize) -> Option<&Queue> {
        self.queues.iter().find(|q| q.after == after)
    }

    /// The unit handling `class`, when units are configured.
    pub fn unit_for(&self, class: InstrClass) -> Option<(usize, &FuncUnit)> {
        self.units
            .iter()
            .enumerate()
            .find(|(_, u)| u.latency.contains_key(&class))
    }

    /// Execution latency of a class; for loads/stores this is the hit latency.
    pub fn class_latency(&self, class: InstrClass) -> u64 {
        if let Some((_, u)) = self.unit_for(class) {
            u.latency[&class]
        } else {
            self.class_latency[&class]
        }
    }

    /// Structural bound on bus windows: a fetch this many instructions (or
    /// more) behind a memory access is gated by it through the queue chain
    /// and can never overtake it on the bus. The gating argument needs a
    /// queue after every stage from fetch up to the memory stage; a gap
    /// breaks the chain and leaves the distance unbounded.
    pub fn window_distance_bound(&self) -> usize {
        let lo = self.fetch_stage();
        let hi = self.memory_stage();
        let mut sum = 0usize;
        for s in lo..hi {
            match self.queue_after(s) {
                Some(q) => sum += q.capacity as usize,
                None => return usize::MAX,
            }
        }
        sum
    }

    /// Default cap on the number of fetch contenders per window: queue room
    /// plus stage widths strictly between the fetch and memory stages.
    pub fn window_point_cap(&self) -> usize {
        let lo = self.fetch_stage();
        let hi = self.memory_stage();
        let queues: usize = self
            .queues
            .iter()
            .filter(|q| q.after >= lo && q.after < hi)
            .map(|q| q.capacity as usize)
            .sum();
        let widths: usize = ((lo + 1)..hi).map(|s| self.stages[s].width as usize).sum();
        queues + widths
    }

    /// The five-stage, two-way in-order teaching pipeline.
    pub fn teaching() -> PipelineSpec {
        PipelineSpec::parse(TEACHING_PIPELINE).expect("bundled preset parses")
    }

    /// The four-stage, four-wide pipeline with 4 ALUs, 1 FPU and 1 MU.
    pub fn wide4() -> PipelineSpec {
        PipelineSpec::parse(WIDE4_PIPELINE).expect("bundled preset parses")
    }

    pub fn preset(name: &str) -> Option<PipelineSpec> {
        match name {
            "teaching-5stage" => Some(PipelineSpec::teaching()),
            "wide-4stage" => Some(PipelineSpec::wide4()),
            _ => None,
        }
    }

    pub const PRESET_NAMES: [&'static str; 2] = ["teaching-5stage", "wide-4stage"];

    pub fn preset_text(name: &str) -> Option<&'static str> {
        match name {
            "teaching-5stage" => Some(TEACHING_PIPELINE),
            "wide-4stage" => Some(WIDE4_PIPELINE),
            _ => None,
        }
    }
}

pub const TEACHING_PIPELINE: &str = include_str!("../presets/teaching-5stage.toml");
pub const WIDE4_PIPELINE: &str = include_str!("../presets/wide-4stage.toml");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_resolve_roles() {
        let p = PipelineSpec::teaching();
        assert_eq!(p.stages.len(), 5);
        assert_eq!(p.fetch_stage(), 0);
        assert_eq!(p.execute_stage(), 2);
        assert_eq!(p.memory_stage(), 3);
        assert_eq!(p.bus_latency, 9);
        assert_eq!(p.miss_latency, 7);
        assert_eq!(p.class_latency(InstrClass::AluAdd), 1);

        let w = PipelineSpec::wide4();
        assert_eq!(w.stages.len(), 4);
        assert_eq!(w.execute_stage(), 2);
        assert_eq!(w.memory_stage(), 2);
        assert_eq!(w.class_latency(InstrClass::AluDiv), 7);
        assert_eq!(w.class_latency(InstrClass::FpDiv), 12);
        assert_eq!(w.unit_for(InstrClass::Load).unwrap().1.name, "MU");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = TEACHING_PIPELINE.replace("registers = 16", "registers = 16\nbogus = 3");
        assert!(PipelineSpec::parse(&bad).is_err());
    }

    #[test]
    fn uncovered_class_is_rejected() {
        let bad = TEACHING_PIPELINE.replace("nop = 1", "");
        let err = PipelineSpec::parse(&bad).unwrap_err();
        assert!(err.to_string().contains("nop"));
    }

    #[test]
    fn window_bounds_are_frozen() {
        assert_eq!(PipelineSpec::teaching().window_distance_bound(), 6);
        assert_eq!(PipelineSpec::teaching().window_point_cap(), 10);
        assert_eq!(PipelineSpec::wide4().window_distance_bound(), 8);
        assert_eq!(PipelineSpec::wide4().window_point_cap(), 12);
        // A gap in the queue chain leaves the gating distance unbounded.
        let gapped = TEACHING_PIPELINE.replace(
            "[[queue]]\nafter = \"DE\"\ncapacity = 2\n",
            "",
        );
        let spec = PipelineSpec::parse(&gapped).unwrap();
        assert_eq!(spec.window_distance_bound(), usize::MAX);
    }
}
