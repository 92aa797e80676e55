//! Acceptance suite: every release gate runs here, one test per criterion,
//! each printing a `ACCEPTANCE <n> PASS` line with its measured margins
//! (visible under `cargo test -- --nocapture`).

mod common;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use telequeue::errata::{fifo_sign_witnesses, lifo_po_form_witnesses};
use telequeue::laplace::{
    fifo_inf_laplace, fifo_inf_wait_pdf, fifo_po_laplace, lifo_inf_busy_pdf, lifo_inf_laplace,
    lifo_po_laplace, phase_conditioned_mean, DisciplineId,
};
use telequeue::markov::{
    numeric_stationary, service_probability, stationary_distribution, BufferSize,
    DoubleQueueConfig,
};
use telequeue::qmath::{
    bell_fidelity, curve_epr, curve_request, dephase, fidelity_to_pure, teleport_channel,
    teleported_fidelity, werner_state, DephasingParams, PureQubit,
};
use telequeue::quad;
use telequeue::repeater::RepeaterConfig;
use telequeue::sched_opt::{
    for_each_assignment, lifo_po_assignment, lifo_po_trace_properties, random_assignment,
    random_instance, wait_vector, weak_supermajorizes,
};
use telequeue::sim::{
    estimate_mean_fidelity, fidelity_samples, run, BufferEntry, BufferPolicy, Kind, Outcome,
    PolicySpec, SideDiscipline,
};

fn fig3_cfg(lambda_r: f64, buf: usize) -> DoubleQueueConfig {
    DoubleQueueConfig::new(
        5.0,
        lambda_r,
        BufferSize::Finite(buf),
        BufferSize::Finite(buf),
        0.01,
        0.01,
    )
    .unwrap()
}

/// Criterion 1: the closed-form teleported fidelity agrees with the full
/// density-matrix pipeline within 1e-12 on 1000 random draws, in under 5 s.
#[test]
fn criterion_1_closed_form_vs_matrix_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(10_001);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let q = PureQubit::random(&mut rng);
        let gamma = DephasingParams::new(0.1 * rng.random::<f64>()).unwrap();
        let t1 = 200.0 * rng.random::<f64>();
        let t2 = 200.0 * rng.random::<f64>();
        let closed = teleported_fidelity(&q, t1, t2, &gamma).unwrap();
        let rho = dephase(&q.density(), &gamma, t1).unwrap();
        let resource = werner_state(bell_fidelity(&gamma, t2).unwrap()).unwrap();
        let oracle = fidelity_to_pure(&q.state(), &teleport_channel(&resource, &rho).unwrap()).unwrap();
        worst = worst.max((closed - oracle).abs());
    }
    let elapsed = started.elapsed();
    assert!(worst < 1e-12, "worst deviation {worst}");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 PASS - closed form vs matrix pipeline: worst |diff| {worst:.2e} over 1000 draws in {elapsed:?}"
    );
}

/// Criterion 2: occupancy closed form vs generator solve within 1e-10 on 100
/// configs including critical load; served-fraction formula vs a 1e6-arrival
/// simulation within 3 sigma; all in under 30 s.
#[test]
fn criterion_2_steady_state() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(10_002);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let lambda_e = 0.2 + 10.0 * rng.random::<f64>();
        let load = match i % 5 {
            0 => 1.0,
            1 => 0.99,
            2 => 1.01,
            3 => 0.1 + rng.random::<f64>(),
            _ => 1.0 + 9.0 * rng.random::<f64>(),
        };
        let buf_e = rng.random_range(0..10usize);
        let buf_r = rng.random_range(if buf_e == 0 { 1 } else { 0 }..10usize);
        let cfg = DoubleQueueConfig::new(
            lambda_e,
            lambda_e * load,
            BufferSize::Finite(buf_e),
            BufferSize::Finite(buf_r),
            0.01,
            0.01,
        )
        .unwrap();
        let closed = stationary_distribution(&cfg).unwrap();
        let numeric = numeric_stationary(&cfg).unwrap();
        for n in closed.min_n()..=closed.max_n() {
            worst = worst.max((closed.prob(n) - numeric.prob(n)).abs());
        }
    }
    assert!(worst < 1e-10, "worst occupancy deviation {worst}");

    // Served fraction at load 0.5, B = 10, 1e6 arrivals. Pushouts are rare
    // here, so the binomial sigma under the formula value is the honest
    // scale when the batch-means stderr degenerates.
    let cfg = fig3_cfg(2.5, 10);
    let trace = run(&cfg, PolicySpec::lifo_po_both(), 1_000_000, 20_002);
    let mut margins = Vec::new();
    for (kind, load) in [(Kind::Request, 0.5), (Kind::Epr, 2.0)] {
        let (emp, se) = telequeue::sim::estimate_service_probability(&trace, kind).unwrap();
        let p = service_probability(load, 10).unwrap();
        let n = trace
            .records
            .iter()
            .filter(|r| {
                r.kind == kind
                    && match r.outcome {
                        Outcome::Served => r.wait != Some(0.0),
                        Outcome::PushedOut => true,
                        Outcome::InSystemAtHorizon => false,
                    }
            })
            .count() as f64;
        let sigma = se.max((p * (1.0 - p) / n).sqrt());
        assert!(
            (emp - p).abs() <= 3.0 * sigma,
            "{kind:?}: empirical {emp} vs formula {p}, sigma {sigma}"
        );
        margins.push(format!("{}: |diff| {:.1e} <= 3sigma {:.1e}", kind.name(), (emp - p).abs(), 3.0 * sigma));
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 2 PASS - occupancy worst |diff| {worst:.2e} over 100 configs; service probability {}; {elapsed:?}",
        margins.join(", ")
    );
}

/// Dense linear-system oracle for the LIFO-PO positions.
fn lifo_po_solve(buf: usize, lambda_r: f64, lambda_e: f64, s: f64) -> Vec<f64> {
    let d = lambda_r + lambda_e + s;
    let mut a = DMatrix::<f64>::zeros(buf, buf);
    let mut rhs = DVector::<f64>::zeros(buf);
    for k in 1..=buf {
        let row = k - 1;
        a[(row, row)] = d;
        if k < buf {
            a[(row, k)] = -lambda_r;
        }
        if k >= 2 {
            a[(row, k - 2)] = -lambda_e;
        } else {
            rhs[row] = lambda_e;
        }
    }
    a.lu().solve(&rhs).unwrap().iter().copied().collect()
}

/// Dense linear-system oracle for the FIFO-PO states, returning the
/// arrival-averaged joint value.
fn fifo_po_solve_joint(buf: usize, lambda_r: f64, lambda_e: f64, s: f64) -> f64 {
    let mut index = vec![vec![usize::MAX; buf + 1]; buf + 1];
    let mut states = Vec::new();
    for k in 1..=buf {
        for j in 0..=(buf - k) {
            index[k][j] = states.len();
            states.push((k, j));
        }
    }
    let n = states.len();
    let d = lambda_r + lambda_e + s;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (row, &(k, j)) in states.iter().enumerate() {
        a[(row, row)] = d;
        if k == 1 {
            rhs[row] += lambda_e;
        } else {
            a[(row, index[k - 1][j])] -= lambda_e;
        }
        if j + k < buf {
            a[(row, index[k][j + 1])] -= lambda_r;
        } else if k > 1 {
            a[(row, index[k - 1][j + 1])] -= lambda_r;
        }
    }
    let sol = a.lu().solve(&rhs).unwrap();
    // PASTA entry mixture, conditioned on buffering.
    let rho = lambda_r / lambda_e;
    let mut weights = vec![0.0; buf + 1];
    if (rho - 1.0).abs() < 1e-9 {
        weights.fill(1.0);
    } else if rho < 1.0 {
        let mut cur = 1.0;
        for w in weights.iter_mut() {
            *w = cur;
            cur *= rho;
        }
    } else {
        let inv = 1.0 / rho;
        let mut cur = 1.0;
        for w in weights.iter_mut().rev() {
            *w = cur;
            cur *= inv;
        }
    }
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .enumerate()
        .map(|(seen, &w)| w / total * sol[index[(seen + 1).min(buf)][0]])
        .sum()
}

/// Criterion 3: transform correctness. Conditioned transforms are normalized
/// at 0 within 1e-10; infinite-buffer closed forms match quadrature within
/// 1e-6; pushout transforms match dense solves within 1e-10 for B = 1..=20.
#[test]
fn criterion_3_transform_correctness() {
    let params = [(2.5f64, 5.0f64), (5.0, 5.0), (7.5, 5.0)];
    // Normalization at s = 0.
    let mut worst_norm = 0.0f64;
    for &(lr, le) in &params {
        for buf in [1usize, 2, 5, 10, 20] {
            worst_norm = worst_norm
                .max((fifo_po_laplace(buf, lr, le).unwrap().conditioned.eval(0.0) - 1.0).abs());
            worst_norm = worst_norm
                .max((lifo_po_laplace(buf, lr, le).unwrap().conditioned.eval(0.0) - 1.0).abs());
        }
        if lr < le {
            worst_norm = worst_norm.max((fifo_inf_laplace(lr, le).unwrap().eval(0.0) - 1.0).abs());
            worst_norm = worst_norm.max((lifo_inf_laplace(lr, le).unwrap().eval(0.0) - 1.0).abs());
        }
    }
    assert!(worst_norm < 1e-10, "worst |W*(0) - 1| = {worst_norm}");

    // Infinite-buffer closed forms vs quadrature.
    let mut worst_quad = 0.0f64;
    for s in [0.01, 0.1, 1.0] {
        let f = fifo_inf_laplace(2.5, 5.0).unwrap().eval(s);
        let fq = quad::integrate_to_inf(
            &|t| (-s * t).exp() * fifo_inf_wait_pdf(2.5, 5.0, t).unwrap(),
            1e-12,
        );
        worst_quad = worst_quad.max((f - fq).abs());
        let l = lifo_inf_laplace(2.5, 5.0).unwrap().eval(s);
        let lq = quad::integrate_to_inf(
            &|t| (-s * t).exp() * lifo_inf_busy_pdf(2.5, 5.0, t).unwrap(),
            1e-10,
        );
        worst_quad = worst_quad.max((l - lq).abs());
    }
    assert!(worst_quad < 1e-6, "worst closed-form vs quadrature {worst_quad}");

    // Pushout transforms vs dense linear solves, B = 1..=20.
    let mut worst_po = 0.0f64;
    for buf in 1..=20usize {
        for &(lr, le) in &params {
            for s in [0.0, 0.01, 0.5, 2.0] {
                let lifo = lifo_po_laplace(buf, lr, le).unwrap().joint.eval(s);
                worst_po = worst_po.max((lifo - lifo_po_solve(buf, lr, le, s)[0]).abs());
                let fifo = fifo_po_laplace(buf, lr, le).unwrap().joint.eval(s);
                worst_po = worst_po.max((fifo - fifo_po_solve_joint(buf, lr, le, s)).abs());
            }
        }
    }
    assert!(worst_po < 1e-10, "worst pushout transform vs solve {worst_po}");
    println!(
        "ACCEPTANCE 3 PASS - |W*(0)-1| <= {worst_norm:.1e}; closed vs quadrature <= {worst_quad:.1e}; pushout vs solve <= {worst_po:.1e} (B=1..20)"
    );
}

/// Criterion 4: analytic vs simulated mean fidelity within
/// max(0.005, 3*stderr) at the Fig. 3 parameterization, 1e6 arrivals per
/// point, three discipline pairs, under 5 minutes total.
#[test]
fn criterion_4_analytic_vs_simulation() {
    let started = Instant::now();
    let gamma = DephasingParams::new(0.01).unwrap();
    let q = PureQubit::plus();
    let (curve_r, curve_e) = (curve_request(&q, &gamma), curve_epr(&q, &gamma));
    let pairs = [
        (DisciplineId::FifoPo(10), DisciplineId::LifoPo(10)),
        (DisciplineId::LifoPo(10), DisciplineId::LifoPo(10)),
        (DisciplineId::FifoPo(10), DisciplineId::FifoPo(10)),
    ];
    let mut worst_gap = 0.0f64;
    for (pi, &(disc_r, disc_e)) in pairs.iter().enumerate() {
        for (li, &lambda_r) in [1.0, 2.5, 4.0, 4.9].iter().enumerate() {
            let cfg = fig3_cfg(lambda_r, 10);
            let analytic =
                phase_conditioned_mean(&cfg, disc_r, disc_e, &curve_r, &curve_e).unwrap();
            let trace = run(
                &cfg,
                PolicySpec::from_disciplines(disc_r, disc_e),
                1_000_000,
                40_000 + (pi * 10 + li) as u64,
            );
            let (emp, se) = estimate_mean_fidelity(&trace, &curve_r, &curve_e).unwrap();
            let tol = 0.005f64.max(3.0 * se);
            let gap = (analytic - emp).abs();
            assert!(
                gap <= tol,
                "{disc_r:?}/{disc_e:?} lambda_r={lambda_r}: |{analytic} - {emp}| = {gap} > {tol}"
            );
            worst_gap = worst_gap.max(gap);
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 4 PASS - 12 points x 1e6 arrivals, worst |analytic - simulated| {worst_gap:.2e} (tolerance floor 5e-3) in {elapsed:?}"
    );
}

/// Uniformly random work-conserving choices, for the policy-space sweep.
struct RandomPolicy {
    rng: ChaCha12Rng,
}

impl RandomPolicy {
    fn new(seed: u64) -> Self {
        Self { rng: ChaCha12Rng::seed_from_u64(seed) }
    }
}

impl BufferPolicy for RandomPolicy {
    fn select_match(&mut self, entries: &[BufferEntry], _now: f64) -> usize {
        self.rng.random_range(0..entries.len())
    }

    fn select_evict(&mut self, entries: &[BufferEntry], _now: f64) -> usize {
        // May also reject the newcomer (index == len).
        self.rng.random_range(0..=entries.len())
    }
}

/// Criterion 5: the optimality theorem, computationally. Exhaustive over all
/// work-conserving policies for n <= 8 and randomized for n <= 20, the wait
/// vector of every policy is weakly supermajorized by the LIFO-PO one; and
/// on common seeds the simulated LIFO-PO/LIFO-PO mean fidelity dominates
/// every tested policy pair at every Fig. 3 grid point.
#[test]
fn criterion_5_optimality() {
    // Exhaustive, n <= 8.
    let mut rng = ChaCha12Rng::seed_from_u64(10_005);
    let mut exhaustive_policies = 0u64;
    for case in 0..12 {
        let n = 5 + case % 4; // 5..=8
        let buffer = 1 + case % 3;
        let inst = random_instance(n, buffer, 1.5, &mut rng);
        let w_gamma = wait_vector(&lifo_po_assignment(&inst));
        for_each_assignment(&inst, &mut |a| {
            exhaustive_policies += 1;
            assert!(
                weak_supermajorizes(&wait_vector(a), &w_gamma).unwrap(),
                "policy beats LIFO-PO on instance {inst:?}: {a:?}"
            );
        });
    }
    // Randomized, n <= 20.
    let mut randomized = 0u64;
    for _ in 0..60 {
        let n = 12 + rng.random_range(0..9usize); // 12..=20
        let inst = random_instance(n, 1 + rng.random_range(0..4usize), 1.3, &mut rng);
        let w_gamma = wait_vector(&lifo_po_assignment(&inst));
        for _ in 0..50 {
            let a = random_assignment(&inst, &mut rng);
            randomized += 1;
            assert!(weak_supermajorizes(&wait_vector(&a), &w_gamma).unwrap());
        }
    }

    // Empirical: LIFO-PO/LIFO-PO dominates every tested pair on common
    // seeds at each Fig. 3 grid point. Means are taken over all served
    // matches (no warm-up discard) so the path-wise ordering is exact.
    let gamma = DephasingParams::new(0.01).unwrap();
    let q = PureQubit::plus();
    let (curve_r, curve_e) = (curve_request(&q, &gamma), curve_epr(&q, &gamma));
    let loads = [0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9, 0.98];
    let mut worst_margin = f64::INFINITY;
    for (li, &load) in loads.iter().enumerate() {
        let cfg = fig3_cfg(5.0 * load, 10);
        let seed = 50_000 + li as u64;
        let mean_of = |policy: PolicySpec| -> f64 {
            let trace = run(&cfg, policy, 200_000, seed);
            let samples = fidelity_samples(&trace, &curve_r, &curve_e);
            samples.iter().sum::<f64>() / samples.len() as f64
        };
        let lifo_mean = mean_of(PolicySpec::lifo_po_both());
        let rivals = [
            PolicySpec::fifo_po_both(),
            PolicySpec {
                request: SideDiscipline::FifoPushout,
                epr: SideDiscipline::LifoPushout,
            },
            PolicySpec {
                request: SideDiscipline::LifoPushout,
                epr: SideDiscipline::FifoPushout,
            },
            PolicySpec {
                request: SideDiscipline::Custom(Box::new(RandomPolicy::new(7))),
                epr: SideDiscipline::Custom(Box::new(RandomPolicy::new(8))),
            },
            PolicySpec {
                request: SideDiscipline::Custom(Box::new(RandomPolicy::new(9))),
                epr: SideDiscipline::LifoPushout,
            },
        ];
        for policy in rivals {
            let other = mean_of(policy);
            assert!(
                lifo_mean + 1e-12 >= other,
                "load {load}: LIFO-PO mean {lifo_mean} < rival mean {other}"
            );
            worst_margin = worst_margin.min(lifo_mean - other);
        }
    }
    println!(
        "ACCEPTANCE 5 PASS - {exhaustive_policies} exhaustive policies (n<=8) and {randomized} randomized (n<=20) all dominated; empirical LIFO-PO margin >= {worst_margin:.2e} on common seeds"
    );
}

/// Criterion 6: qualitative figure claims on the caption grids.
#[test]
fn criterion_6_figure_claims() {
    let gamma = DephasingParams::new(0.01).unwrap();
    let q = PureQubit::plus();
    let (curve_r, curve_e) = (curve_request(&q, &gamma), curve_epr(&q, &gamma));
    let mean = |lambda_r: f64, buf: usize, disc_r: DisciplineId, disc_e: DisciplineId| {
        phase_conditioned_mean(&fig3_cfg(lambda_r, buf), disc_r, disc_e, &curve_r, &curve_e)
            .unwrap()
    };

    // Fig. 3 ordering, curve-wise over load in (0, 1].
    for i in 1..=20 {
        let lambda_r = 0.25 * i as f64;
        let ll = mean(lambda_r, 10, DisciplineId::LifoPo(10), DisciplineId::LifoPo(10));
        let lf = mean(lambda_r, 10, DisciplineId::LifoPo(10), DisciplineId::FifoPo(10));
        let fl = mean(lambda_r, 10, DisciplineId::FifoPo(10), DisciplineId::LifoPo(10));
        let ff = mean(lambda_r, 10, DisciplineId::FifoPo(10), DisciplineId::FifoPo(10));
        assert!(ll >= lf - 1e-12 && lf >= ff - 1e-12, "lambda_r={lambda_r}: {ll} {lf} {ff}");
        assert!(ll >= fl - 1e-12 && fl >= ff - 1e-12, "lambda_r={lambda_r}: {ll} {fl} {ff}");
    }

    // Fig. 4: B = 10, LIFO-PO/LIFO-PO over load in (0, 2): decreases then
    // increases with the argmin near critical load.
    let grid: Vec<f64> = (1..=78).map(|i| 0.025 * i as f64).collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&load| mean(5.0 * load, 10, DisciplineId::LifoPo(10), DisciplineId::LifoPo(10)))
        .collect();
    let (argmin, min_val) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, &v)| (grid[i], v))
        .unwrap();
    assert!(argmin > grid[0] && argmin < grid[grid.len() - 1], "minimum not interior");
    assert!((0.8..=1.2).contains(&argmin), "argmin at load {argmin}");
    assert!(values[0] > min_val && values[values.len() - 1] > min_val);

    // Fig. 5: service probability decreasing in load for each buffer size.
    for buf in [2usize, 5, 10] {
        let mut prev = f64::INFINITY;
        for i in 1..=40 {
            let load = 0.05 * i as f64;
            let ps = service_probability(load, buf).unwrap();
            assert!(ps <= prev + 1e-12, "p_serve not decreasing at load {load}, B={buf}");
            prev = ps;
        }
    }

    // Fig. 6: repeater infidelity decreasing in mu, increasing in B.
    let mus = [0.1, 0.316, 1.0, 3.16, 10.0, 31.6, 100.0];
    for buf in [2usize, 5, 10] {
        let mut prev = f64::INFINITY;
        for &mu in &mus {
            let loss =
                telequeue::repeater::mean_infidelity(&RepeaterConfig::lifo_po(mu, 0.01, buf).unwrap())
                    .unwrap();
            assert!(loss < prev, "infidelity not decreasing at mu={mu}, B={buf}");
            prev = loss;
        }
    }
    for &mu in &mus {
        let mut prev = 0.0;
        for buf in [2usize, 5, 10] {
            let loss =
                telequeue::repeater::mean_infidelity(&RepeaterConfig::lifo_po(mu, 0.01, buf).unwrap())
                    .unwrap();
            assert!(loss > prev, "infidelity not increasing in B at mu={mu}");
            prev = loss;
        }
    }
    println!(
        "ACCEPTANCE 6 PASS - Fig.3 ordering, Fig.4 dip with argmin at load {argmin}, Fig.5 monotone service probability, Fig.6 monotone infidelity"
    );
}

/// Criterion 7: errata evidence. The corrected FIFO transform matches
/// quadrature while the printed -s form does not; the re-derived pushout
/// LIFO closed form matches the dense solve while the printed one does not.
/// (The `compare` subcommand emits these witnesses; its output is checked by
/// the CLI suite.)
#[test]
fn criterion_7_errata_witnesses() {
    let fifo = fifo_sign_witnesses(2.5, 5.0, &[0.01, 0.1, 1.0]).unwrap();
    for w in &fifo {
        assert!(w.corrected_error() < 1e-10);
        assert!(w.printed_error() > 1e-3, "printed form unexpectedly close at s={}", w.s);
        assert!(w.printed > 1.0, "printed form should exceed 1 (not a transform)");
    }
    let lifo = lifo_po_form_witnesses(10, 2.5, 5.0, &[0.0, 0.01, 0.5]).unwrap();
    for w in &lifo {
        assert!(w.rederived_error() < 1e-10);
        assert!(w.printed_error() > 1e-4);
        assert!(w.printed_error() > 1e4 * w.rederived_error().max(1e-15));
    }
    // A higher-load witness where the served probability is far from 1 and
    // the printed form misses by a wide margin.
    for w in lifo_po_form_witnesses(10, 7.5, 5.0, &[0.0, 0.01]).unwrap() {
        assert!(w.rederived_error() < 1e-10);
        assert!(w.printed_error() > 0.1);
    }
    let f = &fifo[0];
    let l = &lifo[1];
    println!(
        "ACCEPTANCE 7 PASS - corrected FIFO |err| {:.1e} vs printed {:.1e}; re-derived LIFO-PO |err| {:.1e} vs printed {:.1e}",
        f.corrected_error(),
        f.printed_error(),
        l.rederived_error(),
        l.printed_error()
    );
}

/// Criterion 8: no-crossing trace properties. A 1e5-event LIFO-PO trace is
/// violation-free; a FIFO trace at load 0.9 is the positive control.
#[test]
fn criterion_8_trace_properties() {
    let cfg = fig3_cfg(4.5, 10); // load 0.9
    let lifo = run(&cfg, PolicySpec::lifo_po_both(), 100_000, 10_008);
    let clean = lifo_po_trace_properties(&lifo);
    assert!(clean.is_clean(), "LIFO-PO violations: {clean:?}");
    let fifo = run(&cfg, PolicySpec::fifo_po_both(), 100_000, 10_008);
    let dirty = lifo_po_trace_properties(&fifo);
    assert!(dirty.total() > 0, "FIFO trace unexpectedly clean");
    println!(
        "ACCEPTANCE 8 PASS - LIFO-PO trace clean over 1e5 events; FIFO control shows {} violations ({} served/served, {} served/discarded, {} discarded/discarded)",
        dirty.total(),
        dirty.served_served,
        dirty.served_discarded,
        dirty.discarded_discarded
    );
}
