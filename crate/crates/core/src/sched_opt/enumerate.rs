//! Finite single-buffer instances and exhaustive policy enumeration.
//!
//! An instance fixes arrival times, candidate service epochs, and a buffer
//! size. Every work-conserving policy must serve one buffered request at
//! each service epoch that finds the buffer nonempty, and must resolve each
//! arrival-to-full-buffer by dropping one of the buffered requests or the
//! newcomer. Which requests depart is a policy choice; *when* departures
//! happen is not, so all policies on one instance produce comparable wait
//! vectors.

use rand::Rng;

use crate::error::{Error, Result};

use super::majorize::ExtendedWaitVector;

/// One request's realized history under some policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub arrival: f64,
    pub departure: f64,
    pub served: bool,
}

/// Arrivals, candidate service epochs, and the buffer size.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    arrivals: Vec<f64>,
    service_times: Vec<f64>,
    buffer: usize,
}

#[derive(Clone, Copy)]
enum Event {
    Arrival(usize),
    Service(f64),
}

impl Instance {
    pub fn new(arrivals: Vec<f64>, service_times: Vec<f64>, buffer: usize) -> Result<Self> {
        if buffer == 0 {
            return Err(Error::InvalidParameter("buffer must be >= 1".into()));
        }
        if arrivals.is_empty() {
            return Err(Error::InvalidParameter("instance needs at least one arrival".into()));
        }
        let strictly_sorted =
            |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite());
        if !strictly_sorted(&arrivals) || !strictly_sorted(&service_times) {
            return Err(Error::InvalidParameter(
                "arrival and service times must be strictly increasing and finite".into(),
            ));
        }
        let inst = Self { arrivals, service_times, buffer };
        // Occupancy is policy-independent; require that every request departs.
        let mut occupancy = 0usize;
        let mut departures = 0usize;
        for ev in inst.events() {
            match ev {
                Event::Arrival(_) => {
                    if occupancy == inst.buffer {
                        departures += 1; // someone (maybe the newcomer) leaves
                    } else {
                        occupancy += 1;
                    }
                }
                Event::Service(_) => {
                    if occupancy > 0 {
                        occupancy -= 1;
                        departures += 1;
                    }
                }
            }
        }
        if departures != inst.arrivals.len() {
            return Err(Error::NotRealizable(format!(
                "{} of {} requests never depart; add trailing service epochs",
                inst.arrivals.len() - departures,
                inst.arrivals.len()
            )));
        }
        Ok(inst)
    }

    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn buffer(&self) -> usize {
        self.buffer
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    /// Arrivals and service epochs merged in time order; on a tie the
    /// arrival is processed first (the newcomer is a pushout candidate).
    fn events(&self) -> Vec<Event> {
        let mut events: Vec<(f64, u8, Event)> = self
            .arrivals
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, 0u8, Event::Arrival(i)))
            .chain(self.service_times.iter().map(|&t| (t, 1u8, Event::Service(t))))
            .collect();
        events.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
        events.into_iter().map(|(_, _, e)| e).collect()
    }
}

/// Depth-first enumeration of every work-conserving policy on the instance,
/// invoking `visit` with the complete assignment of each. The policy space
/// is the product of per-event choices: any buffered request at a service
/// epoch, any buffered request or the newcomer at an overflow.
pub fn for_each_assignment<F: FnMut(&[Assignment])>(inst: &Instance, visit: &mut F) {
    let events = inst.events();
    let mut present: Vec<usize> = Vec::with_capacity(inst.buffer + 1);
    let mut out: Vec<Assignment> = inst
        .arrivals
        .iter()
        .map(|&a| Assignment { arrival: a, departure: f64::NAN, served: false })
        .collect();
    dfs(inst, &events, 0, &mut present, &mut out, visit);
}

fn dfs<F: FnMut(&[Assignment])>(
    inst: &Instance,
    events: &[Event],
    idx: usize,
    present: &mut Vec<usize>,
    out: &mut Vec<Assignment>,
    visit: &mut F,
) {
    let Some(&ev) = events.get(idx) else {
        debug_assert!(present.is_empty());
        visit(out);
        return;
    };
    match ev {
        Event::Arrival(i) => {
            let t = inst.arrivals[i];
            if present.len() < inst.buffer {
                present.push(i);
                dfs(inst, events, idx + 1, present, out, visit);
                present.pop();
            } else {
                // Drop any buffered request...
                for c in 0..present.len() {
                    let removed = present.remove(c);
                    out[removed].departure = t;
                    out[removed].served = false;
                    present.push(i);
                    dfs(inst, events, idx + 1, present, out, visit);
                    present.pop();
                    present.insert(c, removed);
                }
                // ...or reject the newcomer.
                out[i].departure = t;
                out[i].served = false;
                dfs(inst, events, idx + 1, present, out, visit);
            }
        }
        Event::Service(t) => {
            if present.is_empty() {
                dfs(inst, events, idx + 1, present, out, visit);
            } else {
                for c in 0..present.len() {
                    let served = present.remove(c);
                    out[served].departure = t;
                    out[served].served = true;
                    dfs(inst, events, idx + 1, present, out, visit);
                    present.insert(c, served);
                }
            }
        }
    }
}

/// The serve-newest / evict-oldest assignment on the instance.
pub fn lifo_po_assignment(inst: &Instance) -> Vec<Assignment> {
    run_policy(inst, |present, is_service| {
        if is_service {
            present.len() - 1 // youngest: present is kept in arrival order
        } else {
            0 // oldest
        }
    })
}

/// A uniformly random work-conserving assignment.
pub fn random_assignment<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Vec<Assignment> {
    run_policy(inst, |present, is_service| {
        if is_service {
            rng.random_range(0..present.len())
        } else {
            // One extra slot stands for "reject the newcomer".
            rng.random_range(0..=present.len())
        }
    })
}

fn run_policy<F: FnMut(&[usize], bool) -> usize>(inst: &Instance, mut choose: F) -> Vec<Assignment> {
    let mut present: Vec<usize> = Vec::new();
    let mut out: Vec<Assignment> = inst
        .arrivals
        .iter()
        .map(|&a| Assignment { arrival: a, departure: f64::NAN, served: false })
        .collect();
    for ev in inst.events() {
        match ev {
            Event::Arrival(i) => {
                let t = inst.arrivals[i];
                if present.len() < inst.buffer {
                    present.push(i);
                } else {
                    let c = choose(&present, false);
                    if c < present.len() {
                        let removed = present.remove(c);
                        out[removed].departure = t;
                        present.push(i);
                    } else {
                        out[i].departure = t;
                    }
                }
            }
            Event::Service(t) => {
                if !present.is_empty() {
                    let c = choose(&present, true);
                    let served = present.remove(c);
                    out[served].departure = t;
                    out[served].served = true;
                }
            }
        }
    }
    debug_assert!(present.is_empty(), "instance must drain");
    out
}

/// Wait vector of an assignment: `d - a` for served requests, infinity for
/// removed ones.
pub fn wait_vector(assignments: &[Assignment]) -> ExtendedWaitVector {
    ExtendedWaitVector::from_waits(
        &assignments
            .iter()
            .map(|a| if a.served { a.departure - a.arrival } else { f64::INFINITY })
            .collect::<Vec<_>>(),
    )
    .expect("waits are nonnegative")
}

/// Random draining instance: Poisson arrivals at rate `load`, unit-rate
/// service epochs, plus enough trailing epochs to empty the buffer.
pub fn random_instance<R: Rng + ?Sized>(n: usize, buffer: usize, load: f64, rng: &mut R) -> Instance {
    assert!(n >= 1 && buffer >= 1 && load > 0.0);
    let mut arrivals = Vec::with_capacity(n);
    let mut t = 0.0;
    for _ in 0..n {
        t += -(rng.random::<f64>().max(f64::MIN_POSITIVE)).ln() / load;
        arrivals.push(t);
    }
    let mut service_times = Vec::new();
    let mut s = 0.0;
    // Generate service epochs until the occupancy replay drains everything.
    let mut occupancy = 0usize;
    let mut departures = 0usize;
    let mut next_arrival = 0usize;
    while departures < n {
        s += -(rng.random::<f64>().max(f64::MIN_POSITIVE)).ln();
        while next_arrival < n && arrivals[next_arrival] < s {
            if occupancy == buffer {
                departures += 1;
            } else {
                occupancy += 1;
            }
            next_arrival += 1;
        }
        service_times.push(s);
        if occupancy > 0 {
            occupancy -= 1;
            departures += 1;
        }
    }
    Instance::new(arrivals, service_times, buffer).expect("constructed to drain")
}
