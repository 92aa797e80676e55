//! Seeded discrete-event simulator of the double queue.
//!
//! Two Poisson arrival streams (requests and EPR pairs) feed two buffers; a
//! match fires the instant both kinds are present, so at most one buffer is
//! ever nonempty. Policies choose which opposite item a new arrival matches
//! and which item an overflowing buffer evicts; work conservation is
//! enforced by the engine, not the policy.
//!
//! Reproducibility: interarrival times are inverse-CDF exponentials drawn
//! from ChaCha12 keyed by the run seed, stream 0 for requests and stream 1
//! for EPR pairs. This generator is part of the output contract and is not
//! to be swapped silently.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::laplace::DisciplineId;
use crate::markov::{BufferSize, DoubleQueueConfig};
use crate::qmath::FidelityCurve;

/// Growable-buffer occupancy at which an unstable run is cut short.
pub const STABILITY_CAP: usize = 1_000_000;

/// Warm-up fraction discarded by the batch-means estimators.
pub const WARMUP_FRACTION: f64 = 0.05;
/// Number of non-overlapping batches used for standard errors.
pub const BATCH_COUNT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Request,
    Epr,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Request => "request",
            Kind::Epr => "epr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Served,
    PushedOut,
    InSystemAtHorizon,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Served => "served",
            Outcome::PushedOut => "pushed_out",
            Outcome::InSystemAtHorizon => "in_system",
        }
    }
}

/// Which side of a served match spent time in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    RequestWaited,
    EprWaited,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::RequestWaited => "request_waited",
            Phase::EprWaited => "epr_waited",
        }
    }
}

/// One arrival's life in the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestRecord {
    pub id: u64,
    pub kind: Kind,
    pub arrival: f64,
    pub departure: Option<f64>,
    pub outcome: Outcome,
    pub wait: Option<f64>,
    pub phase: Option<Phase>,
}

/// A buffered item as shown to custom policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BufferEntry {
    pub id: u64,
    pub arrival: f64,
}

/// Hook for arbitrary work-conserving policies: the engine decides *when* a
/// match or eviction happens, the policy only picks *which* entry.
pub trait BufferPolicy: Send {
    /// Index of the buffered entry to consume for an arriving match.
    fn select_match(&mut self, entries: &[BufferEntry], now: f64) -> usize;
    /// Index of the entry to evict on overflow; returning `entries.len()`
    /// rejects the arriving item instead.
    fn select_evict(&mut self, entries: &[BufferEntry], now: f64) -> usize;
}

/// Per-side service order and overflow rule.
pub enum SideDiscipline {
    /// Serve oldest; reject arrivals when full.
    FifoDrop,
    /// Serve oldest; evict the oldest to admit an arrival when full.
    FifoPushout,
    /// Serve newest; reject arrivals when full.
    LifoDrop,
    /// Serve newest; evict the oldest to admit an arrival when full.
    LifoPushout,
    Custom(Box<dyn BufferPolicy>),
}

impl SideDiscipline {
    pub fn from_discipline(d: DisciplineId) -> Self {
        match d {
            // Overflow rule for the infinite disciplines only matters if the
            // buffer is artificially truncated; drop-newest is this
            // simulator's documented extension for that case.
            DisciplineId::FifoInf => SideDiscipline::FifoDrop,
            DisciplineId::LifoInf => SideDiscipline::LifoDrop,
            DisciplineId::FifoPo(_) => SideDiscipline::FifoPushout,
            DisciplineId::LifoPo(_) => SideDiscipline::LifoPushout,
        }
    }

    fn select_match(&mut self, entries: &VecDeque<BufferEntry>, now: f64) -> usize {
        match self {
            SideDiscipline::FifoDrop | SideDiscipline::FifoPushout => 0,
            SideDiscipline::LifoDrop | SideDiscipline::LifoPushout => entries.len() - 1,
            SideDiscipline::Custom(p) => {
                let v: Vec<BufferEntry> = entries.iter().copied().collect();
                let idx = p.select_match(&v, now);
                assert!(idx < v.len(), "policy returned match index out of range");
                idx
            }
        }
    }

    /// Returns `Some(index)` to evict, `None` to reject the arrival.
    fn select_evict(&mut self, entries: &VecDeque<BufferEntry>, now: f64) -> Option<usize> {
        match self {
            SideDiscipline::FifoDrop | SideDiscipline::LifoDrop => None,
            SideDiscipline::FifoPushout | SideDiscipline::LifoPushout => Some(0),
            SideDiscipline::Custom(p) => {
                let v: Vec<BufferEntry> = entries.iter().copied().collect();
                let idx = p.select_evict(&v, now);
                assert!(idx <= v.len(), "policy returned evict index out of range");
                if idx == v.len() {
                    None
                } else {
                    Some(idx)
                }
            }
        }
    }
}

impl std::fmt::Debug for SideDiscipline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SideDiscipline::FifoDrop => "FifoDrop",
            SideDiscipline::FifoPushout => "FifoPushout",
            SideDiscipline::LifoDrop => "LifoDrop",
            SideDiscipline::LifoPushout => "LifoPushout",
            SideDiscipline::Custom(_) => "Custom",
        };
        f.write_str(name)
    }
}

/// Buffer-management policy for both sides of the node.
#[derive(Debug)]
pub struct PolicySpec {
    pub request: SideDiscipline,
    pub epr: SideDiscipline,
}

impl PolicySpec {
    pub fn from_disciplines(disc_r: DisciplineId, disc_e: DisciplineId) -> Self {
        Self {
            request: SideDiscipline::from_discipline(disc_r),
            epr: SideDiscipline::from_discipline(disc_e),
        }
    }

    pub fn lifo_po_both() -> Self {
        Self { request: SideDiscipline::LifoPushout, epr: SideDiscipline::LifoPushout }
    }

    pub fn fifo_po_both() -> Self {
        Self { request: SideDiscipline::FifoPushout, epr: SideDiscipline::FifoPushout }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub arrivals_request: u64,
    pub arrivals_epr: u64,
    pub served_request: u64,
    pub served_epr: u64,
    pub pushed_request: u64,
    pub pushed_epr: u64,
}

/// Full output of a run: per-arrival records in event order plus occupancy
/// tallies for steady-state checks.
#[derive(Debug, Clone)]
pub struct SimTrace {
    pub config: DoubleQueueConfig,
    pub seed: u64,
    pub records: Vec<RequestRecord>,
    pub counters: Counters,
    /// True when the stability guard cut the run short.
    pub capped: bool,
    horizon: f64,
    time_in_state: BTreeMap<i64, f64>,
    seen_by_request: BTreeMap<i64, u64>,
    seen_by_epr: BTreeMap<i64, u64>,
}

impl SimTrace {
    /// Time-weighted empirical occupancy distribution.
    pub fn occupancy_time_distribution(&self) -> Vec<(i64, f64)> {
        let total: f64 = self.time_in_state.values().sum();
        self.time_in_state.iter().map(|(&n, &t)| (n, t / total)).collect()
    }

    /// Occupancy distribution as seen by arrivals of one kind (PASTA check).
    pub fn occupancy_seen_by_arrivals(&self, kind: Kind) -> Vec<(i64, f64)> {
        let map = match kind {
            Kind::Request => &self.seen_by_request,
            Kind::Epr => &self.seen_by_epr,
        };
        let total: f64 = map.values().map(|&c| c as f64).sum();
        map.iter().map(|(&n, &c)| (n, c as f64 / total)).collect()
    }

    /// Simulated time spanned by the run.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// CSV export: `id,kind,arrival,departure,outcome,wait,phase`, times with
    /// 12 significant digits, `\n` newlines.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 64 + 64);
        out.push_str("id,kind,arrival,departure,outcome,wait,phase\n");
        for r in &self.records {
            let _ = write!(out, "{},{},{}", r.id, r.kind.name(), fmt_sig(r.arrival));
            match r.departure {
                Some(d) => {
                    let _ = write!(out, ",{}", fmt_sig(d));
                }
                None => out.push(','),
            }
            let _ = write!(out, ",{}", r.outcome.name());
            match r.wait {
                Some(w) => {
                    let _ = write!(out, ",{}", fmt_sig(w));
                }
                None => out.push(','),
            }
            match r.phase {
                Some(p) => {
                    let _ = write!(out, ",{}", p.name());
                }
                None => out.push(','),
            }
            out.push('\n');
        }
        out
    }
}

/// 12-significant-digit, locale-independent number formatting shared by all
/// CSV surfaces.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

fn exp_sample(rng: &mut ChaCha12Rng, rate: f64) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    // 53-bit uniform in (0, 1]; u = 1 maps to a wait of exactly 0.
    let u = ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / 9007199254740992.0);
    -u.ln() / rate
}

struct Side {
    buffer: VecDeque<BufferEntry>,
    capacity: usize,
    kind: Kind,
}

impl Side {
    fn new(kind: Kind, cap: BufferSize) -> Self {
        let capacity = match cap {
            BufferSize::Finite(b) => b,
            BufferSize::Unbounded => usize::MAX,
        };
        Self { buffer: VecDeque::new(), capacity, kind }
    }
}

/// Runs the simulator for `n_arrivals` arrival events (both streams
/// combined) and returns the trace. Identical inputs give byte-identical
/// traces.
pub fn run(cfg: &DoubleQueueConfig, mut policy: PolicySpec, n_arrivals: u64, seed: u64) -> SimTrace {
    assert!(n_arrivals >= 1, "need at least one arrival");
    let mut req_rng = ChaCha12Rng::seed_from_u64(seed);
    req_rng.set_stream(0);
    let mut epr_rng = ChaCha12Rng::seed_from_u64(seed);
    epr_rng.set_stream(1);

    let mut req_side = Side::new(Kind::Request, cfg.buf_r);
    let mut epr_side = Side::new(Kind::Epr, cfg.buf_e);
    let mut records: Vec<RequestRecord> = Vec::with_capacity(n_arrivals as usize + 16);
    let mut counters = Counters::default();
    let mut time_in_state: BTreeMap<i64, f64> = BTreeMap::new();
    let mut seen_by_request: BTreeMap<i64, u64> = BTreeMap::new();
    let mut seen_by_epr: BTreeMap<i64, u64> = BTreeMap::new();

    let mut next_req = exp_sample(&mut req_rng, cfg.lambda_r);
    let mut next_epr = exp_sample(&mut epr_rng, cfg.lambda_e);
    let mut now = 0.0f64;
    let mut capped = false;

    for id in 0..n_arrivals {
        // Ties are broken by kind: requests before EPR pairs.
        let kind = if next_req <= next_epr { Kind::Request } else { Kind::Epr };
        let t = match kind {
            Kind::Request => {
                let t = next_req;
                next_req += exp_sample(&mut req_rng, cfg.lambda_r);
                t
            }
            Kind::Epr => {
                let t = next_epr;
                next_epr += exp_sample(&mut epr_rng, cfg.lambda_e);
                t
            }
        };
        let state = req_side.buffer.len() as i64 - epr_side.buffer.len() as i64;
        *time_in_state.entry(state).or_insert(0.0) += t - now;
        now = t;
        match kind {
            Kind::Request => *seen_by_request.entry(state).or_insert(0) += 1,
            Kind::Epr => *seen_by_epr.entry(state).or_insert(0) += 1,
        }
        match kind {
            Kind::Request => counters.arrivals_request += 1,
            Kind::Epr => counters.arrivals_epr += 1,
        }

        let (own, opp, opp_policy) = match kind {
            Kind::Request => (&mut req_side, &mut epr_side, &mut policy.epr),
            Kind::Epr => (&mut epr_side, &mut req_side, &mut policy.request),
        };

        if !opp.buffer.is_empty() {
            // Work conservation: match immediately.
            let idx = opp_policy.select_match(&opp.buffer, t);
            let entry = opp.buffer.remove(idx).expect("index checked");
            let phase = match opp.kind {
                Kind::Request => Phase::RequestWaited,
                Kind::Epr => Phase::EprWaited,
            };
            records.push(RequestRecord {
                id: entry.id,
                kind: opp.kind,
                arrival: entry.arrival,
                departure: Some(t),
                outcome: Outcome::Served,
                wait: Some(t - entry.arrival),
                phase: Some(phase),
            });
            records.push(RequestRecord {
                id,
                kind,
                arrival: t,
                departure: Some(t),
                outcome: Outcome::Served,
                wait: Some(0.0),
                phase: Some(phase),
            });
            counters.served_request += 1;
            counters.served_epr += 1;
        } else if own.buffer.len() < own.capacity {
            own.buffer.push_back(BufferEntry { id, arrival: t });
        } else if own.capacity == 0 {
            // Nothing can be stored on this side; the arrival is lost.
            records.push(RequestRecord {
                id,
                kind,
                arrival: t,
                departure: Some(t),
                outcome: Outcome::PushedOut,
                wait: Some(0.0),
                phase: None,
            });
            match kind {
                Kind::Request => counters.pushed_request += 1,
                Kind::Epr => counters.pushed_epr += 1,
            }
        } else {
            let own_policy = match kind {
                Kind::Request => &mut policy.request,
                Kind::Epr => &mut policy.epr,
            };
            match own_policy.select_evict(&own.buffer, t) {
                Some(evict_idx) => {
                    let evicted = own.buffer.remove(evict_idx).expect("index checked");
                    records.push(RequestRecord {
                        id: evicted.id,
                        kind,
                        arrival: evicted.arrival,
                        departure: Some(t),
                        outcome: Outcome::PushedOut,
                        wait: Some(t - evicted.arrival),
                        phase: None,
                    });
                    own.buffer.push_back(BufferEntry { id, arrival: t });
                }
                None => {
                    // Arrival rejected (drop-newest).
                    records.push(RequestRecord {
                        id,
                        kind,
                        arrival: t,
                        departure: Some(t),
                        outcome: Outcome::PushedOut,
                        wait: Some(0.0),
                        phase: None,
                    });
                }
            }
            match kind {
                Kind::Request => counters.pushed_request += 1,
                Kind::Epr => counters.pushed_epr += 1,
            }
        }

        // At most one buffer nonempty, and never beyond capacity.
        assert!(
            req_side.buffer.is_empty() || epr_side.buffer.is_empty(),
            "both buffers nonempty at t = {t}"
        );
        debug_assert!(req_side.buffer.len() <= req_side.capacity);
        debug_assert!(epr_side.buffer.len() <= epr_side.capacity);

        if req_side.buffer.len() >= STABILITY_CAP || epr_side.buffer.len() >= STABILITY_CAP {
            capped = true;
            break;
        }
    }

    for side in [&req_side, &epr_side] {
        for entry in &side.buffer {
            records.push(RequestRecord {
                id: entry.id,
                kind: side.kind,
                arrival: entry.arrival,
                departure: None,
                outcome: Outcome::InSystemAtHorizon,
                wait: None,
                phase: None,
            });
        }
    }

    SimTrace {
        config: *cfg,
        seed,
        records,
        counters,
        capped,
        horizon: now,
        time_in_state,
        seen_by_request,
        seen_by_epr,
    }
}

/// Mean and batch-means standard error of a sample sequence, discarding the
/// leading warm-up fraction.
fn batch_means(samples: &[f64]) -> (f64, f64) {
    let start = (samples.len() as f64 * WARMUP_FRACTION) as usize;
    let used = &samples[start.min(samples.len().saturating_sub(1))..];
    let n = used.len();
    let mean = used.iter().sum::<f64>() / n as f64;
    if n < 2 * BATCH_COUNT {
        // Too few samples for batching; plain standard error.
        let var = used.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (n as f64 - 1.0).max(1.0);
        return (mean, (var / n as f64).sqrt());
    }
    let batch_len = n / BATCH_COUNT;
    let mut batch_var = 0.0;
    for b in 0..BATCH_COUNT {
        let chunk = &used[b * batch_len..(b + 1) * batch_len];
        let bm = chunk.iter().sum::<f64>() / batch_len as f64;
        batch_var += (bm - mean) * (bm - mean);
    }
    batch_var /= (BATCH_COUNT - 1) as f64;
    (mean, (batch_var / BATCH_COUNT as f64).sqrt())
}

/// Per-match fidelity samples: the waiting side's curve evaluated at its
/// wait, one sample per served match, in service order.
pub fn fidelity_samples(
    trace: &SimTrace,
    curve_r: &FidelityCurve,
    curve_e: &FidelityCurve,
) -> Vec<f64> {
    trace
        .records
        .iter()
        .filter(|r| r.outcome == Outcome::Served)
        .filter_map(|r| match (r.kind, r.phase) {
            (Kind::Request, Some(Phase::RequestWaited)) => Some(curve_r.eval(r.wait.unwrap())),
            (Kind::Epr, Some(Phase::EprWaited)) => Some(curve_e.eval(r.wait.unwrap())),
            _ => None,
        })
        .collect()
}

/// Empirical average teleportation fidelity over served matches, with a
/// batch-means standard error.
pub fn estimate_mean_fidelity(
    trace: &SimTrace,
    curve_r: &FidelityCurve,
    curve_e: &FidelityCurve,
) -> Result<(f64, f64)> {
    let samples = fidelity_samples(trace, curve_r, curve_e);
    if samples.is_empty() {
        return Err(Error::NoServedMatches);
    }
    Ok(batch_means(&samples))
}

/// Empirical probability that a buffered arrival of `kind` is eventually
/// served, with a batch-means standard error. Arrivals still buffered at the
/// horizon are censored out.
pub fn estimate_service_probability(trace: &SimTrace, kind: Kind) -> Result<(f64, f64)> {
    let samples: Vec<f64> = trace
        .records
        .iter()
        .filter(|r| r.kind == kind)
        .filter_map(|r| match r.outcome {
            Outcome::Served => match (kind, r.phase) {
                (Kind::Request, Some(Phase::RequestWaited)) => Some(1.0),
                (Kind::Epr, Some(Phase::EprWaited)) => Some(1.0),
                _ => None, // served without buffering
            },
            Outcome::PushedOut => Some(0.0),
            Outcome::InSystemAtHorizon => None,
        })
        .collect();
    if samples.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no buffered {} arrivals in trace",
            kind.name()
        )));
    }
    Ok(batch_means(&samples))
}

/// Waits of all `kind` records matching the outcome filter (`None` = any
/// outcome that has a wait), in record order.
pub fn wait_samples(trace: &SimTrace, kind: Kind, filter: Option<Outcome>) -> Vec<f64> {
    trace
        .records
        .iter()
        .filter(|r| r.kind == kind && filter.is_none_or(|f| r.outcome == f))
        .filter_map(|r| r.wait)
        .collect()
}
