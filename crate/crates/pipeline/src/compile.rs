//! Compilation of step programs into transition matrices, and the direct
//! step interpreter the matrices must agree with.

use xdd::{StateVector, TransitionMatrix, XddStore};

use crate::layout::PipelineLayout;
use crate::steps::{Atom, BlockSteps, StepProgram, VertexSteps};
use crate::Result;

/// Right-composes one atom onto `m` (a column update each).
pub fn compose_atom(
    store: &mut XddStore,
    m: &mut TransitionMatrix,
    atom: Atom,
) -> Result<()> {
    match atom {
        Atom::Reset => m.compose_reset(store),
        Atom::Wait(x) => m.compose_wait(x, store)?,
        Atom::Move { src, dest } => m.compose_copy(src, dest, store)?,
        Atom::Consume(latency) => m.compose_consume(latency, store)?,
    }
    Ok(())
}

pub fn compose_atoms(
    store: &mut XddStore,
    m: &mut TransitionMatrix,
    atoms: &[Atom],
) -> Result<()> {
    for &a in atoms {
        compose_atom(store, m, a)?;
    }
    Ok(())
}

/// Matrix of one step program (the implicit reset included).
pub fn compile_steps(
    store: &mut XddStore,
    layout: &PipelineLayout,
    program: &StepProgram,
) -> Result<TransitionMatrix> {
    let vertex = VertexSteps {
        instr: 0,
        stage: 0,
        program: program.clone(),
        bus: None,
    };
    let mut m = TransitionMatrix::identity(layout.slots(), store);
    compose_atoms(store, &mut m, &vertex.atoms(layout))?;
    Ok(m)
}

/// Matrix of a whole block: the product of its vertex matrices in
/// evaluation order.
pub fn compile_block(
    store: &mut XddStore,
    layout: &PipelineLayout,
    block: &BlockSteps,
) -> Result<TransitionMatrix> {
    let mut m = TransitionMatrix::identity(layout.slots(), store);
    compose_atoms(store, &mut m, &block.atoms(layout))?;
    Ok(m)
}

/// Applies one atom directly to a state.
pub fn interpret_atom(
    store: &mut XddStore,
    layout: &PipelineLayout,
    state: &mut StateVector,
    atom: Atom,
) -> Result<()> {
    let rho = layout.rho();
    match atom {
        Atom::Reset => state.set(rho, store.zero()),
        Atom::Wait(x) => {
            let merged = store.oplus(state.get(rho), state.get(x));
            state.set(rho, merged);
        }
        Atom::Move { src, dest } => state.set(dest, state.get(src)),
        Atom::Consume(latency) => {
            let bumped = store.otimes(state.get(rho), latency)?;
            state.set(rho, bumped);
        }
    }
    Ok(())
}

pub fn interpret_atoms(
    store: &mut XddStore,
    layout: &PipelineLayout,
    state: &mut StateVector,
    atoms: &[Atom],
) -> Result<()> {
    for &a in atoms {
        interpret_atom(store, layout, state, a)?;
    }
    Ok(())
}

/// Runs one step program on `state`, step by step.
pub fn interpret_steps(
    store: &mut XddStore,
    layout: &PipelineLayout,
    state: &mut StateVector,
    program: &StepProgram,
) -> Result<()> {
    let vertex = VertexSteps {
        instr: 0,
        stage: 0,
        program: program.clone(),
        bus: None,
    };
    interpret_atoms(store, layout, state, &vertex.atoms(layout))
}

/// Runs a whole block on `state`.
pub fn interpret_block(
    store: &mut XddStore,
    layout: &PipelineLayout,
    state: &mut StateVector,
    block: &BlockSteps,
) -> Result<()> {
    interpret_atoms(store, layout, state, &block.atoms(layout))
}
