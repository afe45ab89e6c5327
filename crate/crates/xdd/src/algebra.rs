//! Max-plus linear algebra over diagrams: temporal-state vectors, transition
//! matrices, and the four elementary transition matrices they compose from.
//!
//! The convention is row-vector times matrix: `S'[j] = ⊕_i S[i] ⊗ M[i,j]`,
//! so the matrix of a step sequence `s1; s2` is `M_{s1} · M_{s2}`.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::store::{XddHandle, XddStore};
use crate::XddError;

/// Index of a slot in a [`SlotLayout`].
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SlotIndex(pub u32);

impl SlotIndex {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Whether a slot records a start time or an end time. Informational: it is
/// what the dotted/solid distinction of dependency edges compiles down to.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum TimingPoint {
    Start,
    End,
}

#[derive(Clone, Debug)]
pub struct SlotInfo {
    pub name: String,
    pub point: TimingPoint,
}

/// Named, fixed slot layout of a temporal state. The time pointer is always
/// the last slot.
#[derive(Debug)]
pub struct SlotLayout {
    slots: Vec<SlotInfo>,
    rho: SlotIndex,
}

impl SlotLayout {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the time pointer.
    pub fn rho(&self) -> SlotIndex {
        self.rho
    }

    pub fn slot(&self, i: SlotIndex) -> &SlotInfo {
        &self.slots[i.index()]
    }

    pub fn slots(&self) -> impl Iterator<Item = (SlotIndex, &SlotInfo)> {
        self.slots
            .iter()
            .enumerate()
            .map(|(i, s)| (SlotIndex(i as u32), s))
    }

    pub fn lookup(&self, name: &str) -> Option<SlotIndex> {
        self.slots
            .iter()
            .position(|s| s.name == name)
            .map(|i| SlotIndex(i as u32))
    }
}

/// Builds a layout; the time pointer slot is appended by `finish`.
#[derive(Default)]
pub struct LayoutBuilder {
    slots: Vec<SlotInfo>,
}

impl LayoutBuilder {
    pub fn new() -> LayoutBuilder {
        LayoutBuilder::default()
    }

    pub fn add(&mut self, name: impl Into<String>, point: TimingPoint) -> SlotIndex {
        let name = name.into();
        assert!(
            !self.slots.iter().any(|s| s.name == name),
            "duplicate slot name {name}"
        );
        self.slots.push(SlotInfo { name, point });
        SlotIndex(self.slots.len() as u32 - 1)
    }

    pub fn finish(mut self) -> Arc<SlotLayout> {
        let rho = SlotIndex(self.slots.len() as u32);
        self.slots.push(SlotInfo {
            name: "rho".to_string(),
            point: TimingPoint::Start,
        });
        Arc::new(SlotLayout {
            slots: self.slots,
            rho,
        })
    }
}

fn same_layout(a: &Arc<SlotLayout>, b: &Arc<SlotLayout>) -> Result<(), XddError> {
    if Arc::ptr_eq(a, b) {
        Ok(())
    } else {
        Err(XddError::LayoutMismatch)
    }
}

/// A temporal state: one diagram per dependency slot plus the time pointer.
#[derive(Clone, Debug)]
pub struct StateVector {
    layout: Arc<SlotLayout>,
    slots: Vec<XddHandle>,
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) && self.slots == other.slots
    }
}

impl Eq for StateVector {}

impl PartialOrd for StateVector {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for StateVector {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.slots.cmp(&other.slots)
    }
}

impl StateVector {
    /// All slots `-inf`, time pointer 0: the state at the program entry.
    pub fn initial(layout: &Arc<SlotLayout>, store: &XddStore) -> StateVector {
        let mut slots = vec![store.zero(); layout.len()];
        slots[layout.rho().index()] = store.one();
        StateVector {
            layout: layout.clone(),
            slots,
        }
    }

    pub fn uniform(layout: &Arc<SlotLayout>, h: XddHandle) -> StateVector {
        StateVector {
            layout: layout.clone(),
            slots: vec![h; layout.len()],
        }
    }

    pub fn layout(&self) -> &Arc<SlotLayout> {
        &self.layout
    }

    pub fn get(&self, i: SlotIndex) -> XddHandle {
        self.slots[i.index()]
    }

    pub fn set(&mut self, i: SlotIndex, h: XddHandle) {
        self.slots[i.index()] = h;
    }

    pub fn rho(&self) -> XddHandle {
        self.slots[self.layout.rho().index()]
    }

    pub fn set_rho(&mut self, h: XddHandle) {
        let i = self.layout.rho();
        self.slots[i.index()] = h;
    }

    pub fn handles(&self) -> &[XddHandle] {
        &self.slots
    }

    /// `⊕_i self[i] ⊗ other[i]`.
    pub fn dot(&self, other: &StateVector, store: &mut XddStore) -> Result<XddHandle, XddError> {
        same_layout(&self.layout, &other.layout)?;
        let mut acc = store.zero();
        for (a, b) in self.slots.iter().zip(&other.slots) {
            let term = store.otimes(*a, *b)?;
            acc = store.oplus(acc, term);
        }
        Ok(acc)
    }

    /// Componentwise `⊕`.
    pub fn oplus(&self, other: &StateVector, store: &mut XddStore) -> Result<StateVector, XddError> {
        same_layout(&self.layout, &other.layout)?;
        let slots = self
            .slots
            .iter()
            .zip(&other.slots)
            .map(|(&a, &b)| store.oplus(a, b))
            .collect();
        Ok(StateVector {
            layout: self.layout.clone(),
            slots,
        })
    }

    /// Row-vector application: `S'[j] = ⊕_i S[i] ⊗ M[i,j]`.
    pub fn apply(
        &self,
        m: &TransitionMatrix,
        store: &mut XddStore,
    ) -> Result<StateVector, XddError> {
        same_layout(&self.layout, &m.layout)?;
        let n = self.layout.len();
        let mut slots = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = store.zero();
            for i in 0..n {
                let cell = m.cells[i * n + j];
                if cell == store.zero() {
                    continue;
                }
                let term = store.otimes(self.slots[i], cell)?;
                acc = store.oplus(acc, term);
            }
            slots.push(acc);
        }
        Ok(StateVector {
            layout: self.layout.clone(),
            slots,
        })
    }

    /// Subtracts `t` from every slot (rebasing). `t` must have finite leaves.
    pub fn rebase(&self, t: XddHandle, store: &mut XddStore) -> Result<StateVector, XddError> {
        let slots = self
            .slots
            .iter()
            .map(|&s| store.oslash(s, t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StateVector {
            layout: self.layout.clone(),
            slots,
        })
    }

    /// Adds `t` to every slot: the inverse of [`StateVector::rebase`].
    pub fn rebase_restore(
        &self,
        t: XddHandle,
        store: &mut XddStore,
    ) -> Result<StateVector, XddError> {
        let slots = self
            .slots
            .iter()
            .map(|&s| store.otimes(s, t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StateVector {
            layout: self.layout.clone(),
            slots,
        })
    }
}

/// Square matrix over the diagram semiring, tied to one layout.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    layout: Arc<SlotLayout>,
    cells: Vec<XddHandle>,
}

impl PartialEq for TransitionMatrix {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) && self.cells == other.cells
    }
}

impl Eq for TransitionMatrix {}

impl TransitionMatrix {
    pub fn identity(layout: &Arc<SlotLayout>, store: &XddStore) -> TransitionMatrix {
        let n = layout.len();
        let mut cells = vec![store.zero(); n * n];
        for i in 0..n {
            cells[i * n + i] = store.one();
        }
        TransitionMatrix {
            layout: layout.clone(),
            cells,
        }
    }

    pub fn layout(&self) -> &Arc<SlotLayout> {
        &self.layout
    }

    pub fn get(&self, row: SlotIndex, col: SlotIndex) -> XddHandle {
        self.cells[row.index() * self.layout.len() + col.index()]
    }

    pub fn set(&mut self, row: SlotIndex, col: SlotIndex, h: XddHandle) {
        let n = self.layout.len();
        self.cells[row.index() * n + col.index()] = h;
    }

    /// Resets the time pointer: identity with `-inf` at (rho, rho).
    pub fn reset(layout: &Arc<SlotLayout>, store: &XddStore) -> TransitionMatrix {
        let mut m = TransitionMatrix::identity(layout, store);
        m.set(layout.rho(), layout.rho(), store.zero());
        m
    }

    /// Accumulates slot `x` into the time pointer: identity plus a unit at
    /// (x, rho).
    pub fn wait(
        layout: &Arc<SlotLayout>,
        x: SlotIndex,
        store: &XddStore,
    ) -> Result<TransitionMatrix, XddError> {
        if x.index() >= layout.len() {
            return Err(XddError::SlotOutOfRange { index: x.index() });
        }
        let mut m = TransitionMatrix::identity(layout, store);
        m.set(x, layout.rho(), store.one());
        Ok(m)
    }

    /// Copies slot `src` over slot `dest`.
    pub fn copy_slot(
        layout: &Arc<SlotLayout>,
        src: SlotIndex,
        dest: SlotIndex,
        store: &XddStore,
    ) -> Result<TransitionMatrix, XddError> {
        if src.index() >= layout.len() || dest.index() >= layout.len() {
            return Err(XddError::SlotOutOfRange {
                index: src.index().max(dest.index()),
            });
        }
        let mut m = TransitionMatrix::identity(layout, store);
        if src != dest {
            m.set(dest, dest, store.zero());
            m.set(src, dest, store.one());
        }
        Ok(m)
    }

    /// Adds `latency` to the time pointer: identity with `latency` at
    /// (rho, rho).
    pub fn consume(
        layout: &Arc<SlotLayout>,
        latency: XddHandle,
        store: &XddStore,
    ) -> TransitionMatrix {
        let mut m = TransitionMatrix::identity(layout, store);
        m.set(layout.rho(), layout.rho(), latency);
        m
    }

    /// Full semiring product `self · rhs`.
    pub fn mat_mul(
        &self,
        rhs: &TransitionMatrix,
        store: &mut XddStore,
    ) -> Result<TransitionMatrix, XddError> {
        same_layout(&self.layout, &rhs.layout)?;
        let n = self.layout.len();
        let mut cells = vec![store.zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let b = self.cells[i * n + k];
                if b == store.zero() {
                    continue;
                }
                for j in 0..n {
                    let c = rhs.cells[k * n + j];
                    if c == store.zero() {
                        continue;
                    }
                    let term = store.otimes(b, c)?;
                    cells[i * n + j] = store.oplus(cells[i * n + j], term);
                }
            }
        }
        Ok(TransitionMatrix {
            layout: self.layout.clone(),
            cells,
        })
    }

    // Right-composition fast paths. Each is `self := self · M_step` reduced
    // to a column update; equivalence with `mat_mul` is property-tested.

    /// `self := self · reset`.
    pub fn compose_reset(&mut self, store: &XddStore) {
        let n = self.layout.len();
        let rho = self.layout.rho().index();
        for i in 0..n {
            self.cells[i * n + rho] = store.zero();
        }
    }

    /// `self := self · wait(x)`.
    pub fn compose_wait(&mut self, x: SlotIndex, store: &mut XddStore) -> Result<(), XddError> {
        if x.index() >= self.layout.len() {
            return Err(XddError::SlotOutOfRange { index: x.index() });
        }
        let n = self.layout.len();
        let rho = self.layout.rho().index();
        for i in 0..n {
            let merged = store.oplus(self.cells[i * n + rho], self.cells[i * n + x.index()]);
            self.cells[i * n + rho] = merged;
        }
        Ok(())
    }

    /// `self := self · copy_slot(src, dest)`.
    pub fn compose_copy(
        &mut self,
        src: SlotIndex,
        dest: SlotIndex,
        _store: &XddStore,
    ) -> Result<(), XddError> {
        let n = self.layout.len();
        if src.index() >= n || dest.index() >= n {
            return Err(XddError::SlotOutOfRange {
                index: src.index().max(dest.index()),
            });
        }
        if src == dest {
            return Ok(());
        }
        for i in 0..n {
            self.cells[i * n + dest.index()] = self.cells[i * n + src.index()];
        }
        Ok(())
    }

    /// `self := self · consume(latency)`.
    pub fn compose_consume(
        &mut self,
        latency: XddHandle,
        store: &mut XddStore,
    ) -> Result<(), XddError> {
        let n = self.layout.len();
        let rho = self.layout.rho().index();
        for i in 0..n {
            self.cells[i * n + rho] = store.otimes(self.cells[i * n + rho], latency)?;
        }
        Ok(())
    }

    /// Slot-named rendering with `0`/`1` abbreviations for the semiring
    /// constants; stable for goldens.
    pub fn pretty(&self, store: &XddStore) -> String {
        let n = self.layout.len();
        let mut out = String::new();
        let header: Vec<&str> = self
            .layout
            .slots()
            .map(|(_, s)| s.name.as_str())
            .collect();
        let cell_text = |h: XddHandle| -> String {
            if h == store.zero() {
                "0".to_string()
            } else if h == store.one() {
                "1".to_string()
            } else {
                store.compact(h)
            }
        };
        let mut width = header.iter().map(|h| h.len()).max().unwrap_or(1);
        let rendered: Vec<Vec<String>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let t = cell_text(self.cells[i * n + j]);
                        width = width.max(t.len());
                        t
                    })
                    .collect()
            })
            .collect();
        let _ = write!(out, "{:>w$} ", "", w = width);
        for h in &header {
            let _ = write!(out, "{h:>w$} ", w = width);
        }
        out.push('\n');
        for (i, row) in rendered.iter().enumerate() {
            let _ = write!(out, "{:>w$} ", header[i], w = width);
            for cell in row {
                let _ = write!(out, "{cell:>w$} ", w = width);
            }
            out.push('\n');
        }
        out
    }
}
