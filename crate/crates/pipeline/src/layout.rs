//! Temporal-state layout derived from a pipeline description: one slot per
//! dependency the pipeline can impose, plus the time pointer.

use std::collections::BTreeMap;
use std::sync::Arc;

use timing_ir::{InstrClass, PipelineSpec};
use xdd::{LayoutBuilder, SlotIndex, SlotLayout, TimingPoint};

use crate::{PipelineError, Result};

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct ResourceId(pub u32);

impl ResourceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ResourceKind {
    /// One slot, overwritten on release.
    Single,
    /// Ordered history; release shifts towards the tail and writes the head.
    /// Waiting reads the tail (the oldest entry).
    Fifo,
}

/// A resource of the temporal state with its slot assignment.
#[derive(Clone, Debug)]
pub struct Resource {
    pub name: String,
    pub kind: ResourceKind,
    /// Slot 0 is the newest entry of a FIFO (and the only slot of a single).
    pub slots: Vec<SlotIndex>,
}

impl Resource {
    /// The slot a waiter accumulates from.
    pub fn wait_slot(&self) -> SlotIndex {
        match self.kind {
            ResourceKind::Single => self.slots[0],
            ResourceKind::Fifo => *self.slots.last().expect("fifo has slots"),
        }
    }
}

/// Slot layout plus the resource table that names it.
#[derive(Clone, Debug)]
pub struct PipelineLayout {
    slots: Arc<SlotLayout>,
    resources: Vec<Resource>,
    by_name: BTreeMap<String, ResourceId>,
}

impl PipelineLayout {
    pub fn slots(&self) -> &Arc<SlotLayout> {
        &self.slots
    }

    pub fn resource(&self, id: ResourceId) -> &Resource {
        &self.resources[id.index()]
    }

    pub fn resources(&self) -> impl Iterator<Item = (ResourceId, &Resource)> {
        self.resources
            .iter()
            .enumerate()
            .map(|(i, r)| (ResourceId(i as u32), r))
    }

    pub fn lookup(&self, name: &str) -> Result<ResourceId> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| PipelineError::UnknownResource {
                name: name.to_string(),
            })
    }

    pub fn rho(&self) -> SlotIndex {
        self.slots.rho()
    }
}

/// Builds the layout for a pipeline: program/capacity order per stage (per
/// functional unit at the execute stage when units are configured), pipeline
/// order per stage, queue slots, fetch order, memory order, and one data
/// dependency slot per architectural register.
pub fn build_layout(spec: &PipelineSpec) -> PipelineLayout {
    let mut lb = LayoutBuilder::new();
    let mut resources: Vec<Resource> = Vec::new();
    let add = |lb: &mut LayoutBuilder,
                   resources: &mut Vec<Resource>,
                   name: String,
                   kind: ResourceKind,
                   count: usize,
                   point: TimingPoint| {
        let slots: Vec<SlotIndex> = match kind {
            ResourceKind::Single => vec![lb.add(name.clone(), point)],
            ResourceKind::Fifo => (0..count)
                .map(|k| lb.add(format!("{name}:{k}"), point))
                .collect(),
        };
        resources.push(Resource { name, kind, slots });
    };

    let per_unit_exec = !spec.units.is_empty();
    for (si, stage) in spec.stages.iter().enumerate() {
        if si == spec.execute_stage() && per_unit_exec {
            for unit in &spec.units {
                add(
                    &mut lb,
                    &mut resources,
                    format!("po:fu:{}", unit.name),
                    ResourceKind::Single,
                    1,
                    TimingPoint::Start,
                );
                add(
                    &mut lb,
                    &mut resources,
                    format!("cap:fu:{}", unit.name),
                    ResourceKind::Fifo,
                    unit.count as usize,
                    TimingPoint::End,
                );
            }
        } else {
            add(
                &mut lb,
                &mut resources,
                format!("po:{}", stage.name),
                ResourceKind::Single,
                1,
                TimingPoint::Start,
            );
            add(
                &mut lb,
                &mut resources,
                format!("cap:{}", stage.name),
                ResourceKind::Fifo,
                stage.width as usize,
                TimingPoint::End,
            );
        }
        add(
            &mut lb,
            &mut resources,
            format!("pipe:{}", stage.name),
            ResourceKind::Single,
            1,
            TimingPoint::End,
        );
        if let Some(q) = spec.queue_after(si) {
            add(
                &mut lb,
                &mut resources,
                format!("q:{}", stage.name),
                ResourceKind::Fifo,
                q.capacity as usize,
                TimingPoint::Start,
            );
        }
    }
    add(
        &mut lb,
        &mut resources,
        "fetch".to_string(),
        ResourceKind::Single,
        1,
        TimingPoint::End,
    );
    add(
        &mut lb,
        &mut resources,
        "mem:load".to_string(),
        ResourceKind::Single,
        1,
        TimingPoint::End,
    );
    add(
        &mut lb,
        &mut resources,
        "mem:store".to_string(),
        ResourceKind::Single,
        1,
        TimingPoint::End,
    );
    for r in 0..spec.registers {
        add(
            &mut lb,
            &mut resources,
            format!("reg:{r}"),
            ResourceKind::Single,
            1,
            TimingPoint::End,
        );
    }

    let by_name = resources
        .iter()
        .enumerate()
        .map(|(i, r)| (r.name.clone(), ResourceId(i as u32)))
        .collect();
    PipelineLayout {
        slots: lb.finish(),
        resources,
        by_name,
    }
}

/// Names of the program/capacity resources an instruction class uses at the
/// execute stage.
pub fn exec_order_names(spec: &PipelineSpec, class: InstrClass) -> (String, String) {
    if let Some((_, unit)) = spec.unit_for(class) {
        (format!("po:fu:{}", unit.name), format!("cap:fu:{}", unit.name))
    } else {
        let name = &spec.stages[spec.execute_stage()].name;
        (format!("po:{name}"), format!("cap:{name}"))
    }
}
