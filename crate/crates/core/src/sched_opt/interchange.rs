//! The interchange argument, executed: transform any realized assignment
//! into the serve-newest / evict-oldest one through the three crossing
//! rewrites, checking weak supermajorization at every step.

use std::fmt;

use crate::error::{Error, Result};

use super::enumerate::Assignment;
use super::majorize::{weak_supermajorizes, ExtendedWaitVector};

/// One rewrite: `case` 1 swaps two services, 2 swaps a service with a
/// removal, 3 swaps two removals. `coefficient` is the T-transform `lambda`
/// for case 1, the scaling `alpha` for case 2, absent for case 3.
#[derive(Debug, Clone)]
pub struct InterchangeStep {
    pub case: u8,
    pub epoch_time: f64,
    pub older: usize,
    pub younger: usize,
    pub coefficient: Option<f64>,
    pub waits_after: ExtendedWaitVector,
}

/// The chain `pi_0, pi_1, ..., pi_h = gamma` as wait vectors.
#[derive(Debug, Clone)]
pub struct ProofTrace {
    pub initial_waits: ExtendedWaitVector,
    pub steps: Vec<InterchangeStep>,
    pub final_assignment: Vec<Assignment>,
}

impl ProofTrace {
    pub fn final_waits(&self) -> &ExtendedWaitVector {
        self.steps.last().map(|s| &s.waits_after).unwrap_or(&self.initial_waits)
    }

    pub fn is_trivial(&self) -> bool {
        self.steps.is_empty()
    }
}

impl fmt::Display for ProofTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_waits = |w: &ExtendedWaitVector| {
            let parts: Vec<String> = w
                .entries()
                .iter()
                .map(|e| match e.finite() {
                    Some(v) => format!("{v:.6}"),
                    None => "inf".into(),
                })
                .collect();
            parts.join(" ")
        };
        writeln!(f, "waits[0]: {}", fmt_waits(&self.initial_waits))?;
        for (i, step) in self.steps.iter().enumerate() {
            write!(
                f,
                "step {}: case {} at t={:.6} older={} younger={}",
                i + 1,
                step.case,
                step.epoch_time,
                step.older,
                step.younger
            )?;
            if let Some(c) = step.coefficient {
                let name = if step.case == 1 { "lambda" } else { "alpha" };
                write!(f, " {name}={c:.6}")?;
            }
            writeln!(f)?;
            writeln!(f, "waits[{}]: {}", i + 1, fmt_waits(&step.waits_after))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct Epoch {
    time: f64,
    served: bool,
}

/// Events in time order; arrivals precede a departure epoch at the same
/// instant (the newcomer is a pushout candidate).
fn replay_order(arrivals: &[f64], epochs: &[Epoch]) -> Vec<(f64, u8, usize)> {
    let mut events: Vec<(f64, u8, usize)> = arrivals
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, 0u8, i))
        .chain(epochs.iter().enumerate().map(|(k, e)| (e.time, 1u8, k)))
        .collect();
    events.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
    events
}

/// Serve-newest / evict-oldest choice at every epoch of the fixed instance.
fn gamma_assignment_epochs(arrivals: &[f64], epochs: &[Epoch]) -> Vec<usize> {
    let mut assign = vec![usize::MAX; epochs.len()];
    let mut present: Vec<usize> = Vec::new(); // kept in arrival order
    for (_, tag, idx) in replay_order(arrivals, epochs) {
        if tag == 0 {
            present.push(idx);
        } else {
            let pick = if epochs[idx].served {
                present.len() - 1
            } else {
                0
            };
            assign[idx] = present.remove(pick);
        }
    }
    assign
}

fn waits_of(arrivals: &[f64], epochs: &[Epoch], assign: &[usize]) -> ExtendedWaitVector {
    let mut waits = vec![f64::INFINITY; arrivals.len()];
    for (k, &req) in assign.iter().enumerate() {
        waits[req] = if epochs[k].served { epochs[k].time - arrivals[req] } else { f64::INFINITY };
    }
    ExtendedWaitVector::from_waits(&waits).expect("departures after arrivals")
}

/// Transforms the given realized assignment into the LIFO-pushout one by
/// repeatedly rewriting the earliest decision that disagrees with it,
/// emitting the full chain of wait vectors. Every step is one of the three
/// crossing cases and must not decrease the vector in the weak
/// supermajorization order.
pub fn interchange_argument(instance: &[Assignment]) -> Result<ProofTrace> {
    let n = instance.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty instance".into()));
    }
    let arrivals: Vec<f64> = instance.iter().map(|a| a.arrival).collect();
    for a in instance {
        if !a.arrival.is_finite() || !a.departure.is_finite() || a.departure < a.arrival {
            return Err(Error::NotRealizable(format!(
                "request departs before it arrives: {a:?}"
            )));
        }
    }
    {
        let mut sorted_arr = arrivals.clone();
        sorted_arr.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted_arr.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NotRealizable("arrival times must be distinct".into()));
        }
        let mut deps: Vec<f64> = instance.iter().map(|a| a.departure).collect();
        deps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if deps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NotRealizable("departure times must be distinct".into()));
        }
    }

    // Epochs in time order; types are fixed to the epoch, requests move.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| instance[a].departure.partial_cmp(&instance[b].departure).unwrap());
    let epochs: Vec<Epoch> =
        order.iter().map(|&i| Epoch { time: instance[i].departure, served: instance[i].served }).collect();
    let mut assign: Vec<usize> = order.clone();

    // Feasibility replay: each epoch's request must be present.
    {
        let mut present = vec![false; n];
        let mut departed = vec![false; n];
        for (_, tag, idx) in replay_order(&arrivals, &epochs) {
            if tag == 0 {
                present[idx] = true;
            } else {
                let req = assign[idx];
                if !present[req] || departed[req] {
                    return Err(Error::NotRealizable(format!(
                        "request {req} not in the buffer at its departure epoch"
                    )));
                }
                departed[req] = true;
                present[req] = false;
            }
        }
    }

    let gamma = gamma_assignment_epochs(&arrivals, &epochs);
    let initial_waits = waits_of(&arrivals, &epochs, &assign);
    let mut steps = Vec::new();
    let mut prev_waits = initial_waits.clone();

    for _guard in 0..=epochs.len() {
        let Some(e) = (0..epochs.len()).find(|&k| assign[k] != gamma[k]) else {
            break;
        };
        let x = assign[e]; // current occupant of the disputed epoch
        let y = gamma[e]; // the LIFO-PO choice, departing later under assign
        let e_y = (e + 1..epochs.len())
            .find(|&k| assign[k] == y)
            .ok_or_else(|| Error::Numerical("gamma choice not present later in chain".into()))?;
        let (case, older, younger, coefficient) = match (epochs[e].served, epochs[e_y].served) {
            (true, true) => {
                // Case 1: older x served before younger y.
                let lam = (arrivals[y] - arrivals[x])
                    / ((arrivals[y] - arrivals[x]) + (epochs[e_y].time - epochs[e].time));
                (1u8, x, y, Some(lam))
            }
            (true, false) => {
                // Case 2: older x served while younger y is later discarded.
                let alpha = (epochs[e].time - arrivals[y]) / (epochs[e].time - arrivals[x]);
                (2, x, y, Some(alpha))
            }
            (false, true) => {
                // Case 2 mirrored: younger x discarded while older y is
                // served later.
                let alpha = (epochs[e_y].time - arrivals[x]) / (epochs[e_y].time - arrivals[y]);
                (2, y, x, Some(alpha))
            }
            (false, false) => (3, y, x, None),
        };
        assign.swap(e, e_y);
        let waits = waits_of(&arrivals, &epochs, &assign);
        if !weak_supermajorizes(&prev_waits, &waits)? {
            return Err(Error::Numerical(format!(
                "interchange step broke the majorization order at t = {}",
                epochs[e].time
            )));
        }
        prev_waits = waits.clone();
        steps.push(InterchangeStep {
            case,
            epoch_time: epochs[e].time,
            older,
            younger,
            coefficient,
            waits_after: waits,
        });
    }

    if assign != gamma {
        return Err(Error::Numerical("interchange did not reach the LIFO-PO assignment".into()));
    }
    let final_assignment: Vec<Assignment> = {
        let mut out: Vec<Assignment> = instance.to_vec();
        for (k, &req) in assign.iter().enumerate() {
            out[req].departure = epochs[k].time;
            out[req].served = epochs[k].served;
        }
        out
    };
    Ok(ProofTrace { initial_waits, steps, final_assignment })
}
