//! No-crossing properties of serve-newest / evict-oldest traces.
//!
//! A LIFO-pushout trace admits no pair of same-kind records where
//!   1. both served with `a_k < a_j < d_k < d_j`,
//!   2. `k` served, `j` discarded, with `a_k < a_j < d_k`,
//!   3. both discarded with `a_k < a_j < d_j < d_k`.
//!
//! Violation counts are exact (Fenwick-tree sweeps, O(n log n)); a capped
//! list of witness pairs is kept for reporting.

use std::collections::BTreeMap;

use crate::sim::{Kind, Outcome, SimTrace};

/// Maximum witness pairs retained per property and kind.
const EXAMPLE_CAP: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingProperty {
    ServedServed,
    ServedDiscarded,
    DiscardedDiscarded,
}

/// One witness pair: the older record `k` and younger record `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceViolation {
    pub kind: Kind,
    pub property: CrossingProperty,
    pub older_id: u64,
    pub younger_id: u64,
}

#[derive(Debug, Clone, Default)]
pub struct ViolationReport {
    pub served_served: u64,
    pub served_discarded: u64,
    pub discarded_discarded: u64,
    pub examples: Vec<TraceViolation>,
}

impl ViolationReport {
    pub fn total(&self) -> u64 {
        self.served_served + self.served_discarded + self.discarded_discarded
    }

    pub fn is_clean(&self) -> bool {
        self.total() == 0
    }
}

struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, mut i: usize) {
        i += 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted ranks `< i`.
    fn count_below(&self, mut i: usize) -> u64 {
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        acc
    }

    fn total(&self) -> u64 {
        self.count_below(self.tree.len() - 1)
    }
}

#[derive(Clone, Copy)]
struct Item {
    id: u64,
    arrival: f64,
    departure: f64,
    served: bool,
}

/// Counts pairs `(older k, younger j)` among `items` (sorted by arrival)
/// where `k` passes `insert_if`, `j` passes `probe_if`, and `k`'s departure
/// lies strictly inside the probe window of `j`.
#[allow(clippy::too_many_arguments)]
fn sweep_count(
    items: &[Item],
    kind: Kind,
    property: CrossingProperty,
    insert_if: impl Fn(&Item) -> bool,
    probe_if: impl Fn(&Item) -> bool,
    window: impl Fn(&Item) -> (f64, f64), // departures in (lo, hi); hi = inf -> open
    examples: &mut Vec<TraceViolation>,
) -> u64 {
    // Rank departures of insertable items.
    let mut dep_ranks: Vec<f64> = items.iter().filter(|it| insert_if(it)).map(|it| it.departure).collect();
    dep_ranks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dep_ranks.dedup();
    let rank_of = |d: f64| dep_ranks.partition_point(|&x| x < d);
    let mut bit = Fenwick::new(dep_ranks.len() + 1);
    let mut witness: BTreeMap<u64, u64> = BTreeMap::new(); // departure bits -> id
    let mut count = 0u64;
    for it in items {
        if probe_if(it) {
            let (lo, hi) = window(it);
            // departures d with lo < d < hi among inserted (older) items
            let lo_rank = dep_ranks.partition_point(|&x| x <= lo);
            let hits = if hi.is_infinite() {
                bit.total() - bit.count_below(lo_rank)
            } else {
                let hi_rank = rank_of(hi);
                bit.count_below(hi_rank).saturating_sub(bit.count_below(lo_rank))
            };
            count += hits;
            if hits > 0 && examples.len() < EXAMPLE_CAP {
                let older = witness
                    .range(lo.to_bits() + 1..)
                    .find(|(&bits, _)| f64::from_bits(bits) < hi)
                    .map(|(_, &id)| id);
                if let Some(older_id) = older {
                    examples.push(TraceViolation {
                        kind,
                        property,
                        older_id,
                        younger_id: it.id,
                    });
                }
            }
        }
        if insert_if(it) {
            bit.add(rank_of(it.departure));
            witness.insert(it.departure.to_bits(), it.id);
        }
    }
    count
}

/// Checks all three no-crossing properties separately per kind; the report
/// is empty exactly when the trace is consistent with LIFO-pushout order.
pub fn lifo_po_trace_properties(trace: &SimTrace) -> ViolationReport {
    let mut report = ViolationReport::default();
    for kind in [Kind::Request, Kind::Epr] {
        let mut items: Vec<Item> = trace
            .records
            .iter()
            .filter(|r| r.kind == kind && r.departure.is_some())
            .map(|r| Item {
                id: r.id,
                arrival: r.arrival,
                departure: r.departure.unwrap(),
                served: r.outcome == Outcome::Served,
            })
            .collect();
        items.sort_by(|a, b| a.arrival.partial_cmp(&b.arrival).unwrap());

        // 1. served k before served j with a_k < a_j < d_k < d_j.
        report.served_served += sweep_count(
            &items,
            kind,
            CrossingProperty::ServedServed,
            |k| k.served,
            |j| j.served,
            |j| (j.arrival, j.departure),
            &mut report.examples,
        );
        // 2. served k, discarded j, a_k < a_j < d_k (any discard time).
        report.served_discarded += sweep_count(
            &items,
            kind,
            CrossingProperty::ServedDiscarded,
            |k| k.served,
            |j| !j.served,
            |j| (j.arrival, f64::INFINITY),
            &mut report.examples,
        );
        // 3. discarded pair with a_k < a_j < d_j < d_k.
        report.discarded_discarded += sweep_count(
            &items,
            kind,
            CrossingProperty::DiscardedDiscarded,
            |k| !k.served,
            |j| !j.served,
            |j| (j.departure, f64::INFINITY),
            &mut report.examples,
        );
    }
    report
}
