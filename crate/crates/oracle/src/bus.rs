//! Scalar first-come-first-served bus arbitration for one contention window:
//! one memory access against subsequent fetches, memory side winning ties.
//!
//! Fetch requests are served in program order; a fetch's effective request
//! time already carries the bus release of the previous fetch (the caller
//! chains `fe_starts`). A fetch that loses against the memory access is
//! floored at the memory access's bus release; its own later readiness is
//! reconciled by the caller through the same chaining.

use crate::Time;

#[derive(Copy, Clone, Debug)]
pub struct FeRequest {
    pub ready: i64,
    pub uses_bus: bool,
}

#[derive(Clone, Debug)]
pub struct ContentionInput {
    pub me_ready: i64,
    pub me_uses_bus: bool,
    pub fes: Vec<FeRequest>,
    pub bus_latency: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContentionSchedule {
    /// Bus grant of the memory access; `-inf` when it does not use the bus.
    pub me_grant: Time,
    /// Grant floor per fetch: its ready time when it wins, the memory
    /// access's bus release when it loses, `-inf` when it stays off the bus.
    pub fe_grants: Vec<Time>,
    /// Effective post-arbitration start per fetch:
    /// `max(ready, grant + bus_latency)` for bus users, `ready` otherwise.
    pub fe_starts: Vec<i64>,
}

/// Simulates the window for one configuration.
pub fn simulate_contention(input: &ContentionInput) -> ContentionSchedule {
    let lam = input.bus_latency;
    let me_cmp = if input.me_uses_bus {
        Time::Fin(input.me_ready)
    } else {
        // Off-bus memory accesses never block a fetch.
        Time::PosInf
    };
    let mut me_sched = Time::PosInf;
    let mut rel = Time::NegInf;
    let mut fe_grants = Vec::with_capacity(input.fes.len());
    let mut fe_starts = Vec::with_capacity(input.fes.len());
    let mut chain = Time::NegInf;
    for fe in &input.fes {
        let ready = match chain {
            Time::Fin(c) => fe.ready.max(c),
            _ => fe.ready,
        };
        let fe_cmp = if fe.uses_bus {
            Time::Fin(ready)
        } else {
            Time::NegInf
        };
        // Memory side schedules when it is ready no later than this fetch.
        let sched_me = if me_cmp <= fe_cmp {
            me_cmp.max(rel)
        } else {
            Time::PosInf
        };
        me_sched = me_sched.min(sched_me);
        // Fetch side wins on a strictly earlier request.
        let sched_fe = if fe_cmp < me_cmp { fe_cmp } else { Time::PosInf };
        rel = rel.max(sched_fe.add_fin(lam));
        let grant = sched_fe.min(me_sched.add_fin(lam));
        fe_grants.push(grant);
        let start = match grant {
            Time::Fin(g) => ready.max(g + lam),
            _ => ready,
        };
        fe_starts.push(start);
        // The chained floor for the next fetch is this fetch's effective
        // start: the state the analysis threads through the window.
        chain = Time::Fin(start);
    }
    // Whatever is still unscheduled goes after the last fetch release.
    me_sched = me_sched.min(rel.max(me_cmp));
    let me_grant = if input.me_uses_bus {
        me_sched
    } else {
        Time::NegInf
    };
    let schedule = ContentionSchedule {
        me_grant,
        fe_grants,
        fe_starts,
    };
    check_invariants(input, &schedule);
    schedule
}

/// Structural sanity of a schedule: the memory grant is final and ready-
/// bounded, winning fetches are granted at their request times, and the
/// transactions granted up to and including the memory access never overlap.
fn check_invariants(input: &ContentionInput, s: &ContentionSchedule) {
    let lam = input.bus_latency;
    let mut intervals: Vec<(i64, i64)> = Vec::new();
    if input.me_uses_bus {
        let g = s
            .me_grant
            .fin()
            .expect("memory access always ends up scheduled");
        assert!(g >= input.me_ready, "grant before ready");
        intervals.push((g, g + lam));
    } else {
        assert_eq!(s.me_grant, Time::NegInf);
    }
    for (fe, &grant) in input.fes.iter().zip(&s.fe_grants) {
        if !fe.uses_bus {
            assert_eq!(grant, Time::NegInf, "off-bus fetch must stay off the bus");
            continue;
        }
        let g = grant.fin().expect("bus-using fetch gets a grant floor");
        let me_g = s.me_grant.fin().unwrap_or(i64::MAX);
        if g < me_g {
            // A winner: granted at its chained request time.
            assert!(g >= fe.ready);
            intervals.push((g, g + lam));
        }
    }
    intervals.sort();
    for w in intervals.windows(2) {
        assert!(w[0].1 <= w[1].0, "overlapping bus transactions: {intervals:?}");
    }
}
