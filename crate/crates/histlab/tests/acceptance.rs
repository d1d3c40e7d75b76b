//! End-to-end acceptance gates, one test per criterion, each printing a
//! single verdict line. A failed gate panics with the measured values in
//! the message, so the reason survives into captured test output.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use histlab::eventalgebra::{five_element_example, Event, EventSpace, PairClass};
use histlab::histories::{
    consistency_check, contrary_inference_report, decoherence_pair, paired_sweep, PartitionSpec,
};
use histlab::model::{initial_packet_sample, ClipMode, Region, SimParams};
use histlab::propagator::{
    cn_step, evolve, inner_product, EvolutionMode, EvolutionPlan, GridState,
};
use histlab::spectral::{
    analytic_packet, analytic_restricted, closed_coefficients, coeff_numeric,
    overlap_integral_ink, overlap_series_spectral, overlap_t0_closed, simpson, EigenBasis,
};

fn verdict(n: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n} ({name}): {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} ({name}): FAIL {detail}");
}

fn left_half() -> Region {
    Region::static_interval(-1.0, 0.0).unwrap()
}

#[test]
fn criterion_1_five_element_measures() {
    let t0 = Instant::now();
    let space = five_element_example();
    let p = space.event(&["a", "e"]).unwrap();
    let q = space.event(&["a", "b", "c", "d"]).unwrap();
    let (p_bar, q_bar) = (space.complement(p), space.complement(q));
    let mu = [
        space.quantum_measure(p),
        space.quantum_measure(q),
        space.quantum_measure(p_bar),
        space.quantum_measure(q_bar),
    ];
    let mu_ok = mu == [0.0, 0.0, 1.0, 1.0];
    let parts_ok = space.is_consistent_partition(&[p, p_bar], 1e-12).unwrap()
        && space.is_consistent_partition(&[q, q_bar], 1e-12).unwrap();
    let cover_ok = space.find_zero_covers(1e-12).contains(&(q.min(p), q.max(p)));
    let class_ok = space.classify_pair(p_bar, q_bar) == PairClass::Contrary;
    let dt = t0.elapsed().as_secs_f64();
    verdict(
        1,
        "five-element measures",
        mu_ok && parts_ok && cover_ok && class_ok && dt < 1.0,
        &format!(
            "mu(P,Q,P',Q') = {mu:?}, partitions consistent: {parts_ok}, \
             (P, Q) zero cover: {cover_ok}, (P', Q') contrary: {class_ok}, {dt:.3}s"
        ),
    );
}

#[test]
fn criterion_2_initial_overlap_closed_form() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for a in [0.02, 0.05, 0.2] {
        let p = SimParams { a, ..SimParams::default() };
        let closed = overlap_t0_closed(a).unwrap();
        let packet = analytic_packet(&p, 16385);
        let restricted = analytic_restricted(&p, 16385);
        let mid = packet.nearest_node(0.0);
        let values: Vec<Complex64> = (0..=mid)
            .map(|j| restricted.amp[j].conj() * packet.amp[j])
            .collect();
        let numeric = simpson(&values, packet.dx);
        let rel = (numeric - Complex64::from(closed)).norm() / closed.abs();
        worst = worst.max(rel);
    }
    verdict(
        2,
        "initial overlap closed form",
        worst <= 1e-8 && t0.elapsed().as_secs_f64() < 1.0,
        &format!(
            "worst relative error {worst:.3e} over a in {{0.02, 0.05, 0.2}}, {:.3}s",
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_3_coefficient_closed_forms() {
    let t0 = Instant::now();
    let p = SimParams::default();
    let (n_max, k_max) = (160, 80); // twice each basis peak at q = 40 pi
    let packet = analytic_packet(&p, 16385);
    let restricted = analytic_restricted(&p, 16385);
    let full = EigenBasis::full(n_max);
    let half = EigenBasis::half(k_max);
    let cs = closed_coefficients(full, p.a, p.q).unwrap();
    let bs = closed_coefficients(half, p.a, p.q).unwrap();
    let scale_c = (1..=n_max).map(|n| cs.get(n).norm()).fold(0.0, f64::max);
    let scale_b = (1..=k_max).map(|k| bs.get(k).norm()).fold(0.0, f64::max);
    let mut worst_c = 0.0f64;
    for n in 1..=n_max {
        let err = (coeff_numeric(full, n, &packet).unwrap() - cs.get(n)).norm() / scale_c;
        worst_c = worst_c.max(err);
    }
    let mut worst_b = 0.0f64;
    for k in 1..=k_max {
        let err = (coeff_numeric(half, k, &restricted).unwrap() - bs.get(k)).norm() / scale_b;
        worst_b = worst_b.max(err);
    }
    // every overlap integral in the same index range, against quadrature
    // fine enough to hold the oscillatory integrands below the gate
    let probe = GridState::zeros(32769, -1.0, 0.0);
    let sines_full: Vec<Vec<f64>> = (0..=n_max)
        .map(|n| (0..probe.len()).map(|j| full.sample(n.max(1), probe.x(j))).collect())
        .collect();
    let sines_half: Vec<Vec<f64>> = (0..=k_max)
        .map(|k| (0..probe.len()).map(|j| half.sample(k.max(1), probe.x(j))).collect())
        .collect();
    let mut worst_i = 0.0f64;
    let mut values = vec![Complex64::new(0.0, 0.0); probe.len()];
    for n in 1..=n_max {
        for k in 1..=k_max {
            for j in 0..probe.len() {
                values[j] = Complex64::new(sines_full[n][j] * sines_half[k][j], 0.0);
            }
            let got = simpson(&values, probe.dx).re;
            let err = (got - overlap_integral_ink(n, k).unwrap()).abs();
            worst_i = worst_i.max(err);
        }
    }
    let worst = worst_c.max(worst_b).max(worst_i);
    verdict(
        3,
        "coefficient closed forms",
        worst <= 1e-6 && t0.elapsed().as_secs_f64() < 30.0,
        &format!(
            "worst scaled error: packet modes {worst_c:.3e}, restricted modes {worst_b:.3e}, \
             overlap integrals {worst_i:.3e} over n <= {n_max}, k <= {k_max}, {:.1}s",
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_4_overlap_curve_shape() {
    let p = SimParams::default();
    let fracs: Vec<f64> = (0..=160).map(|i| i as f64 / 80.0).collect();
    let series = overlap_series_spectral(&p, &fracs).unwrap();
    let m2: Vec<f64> = series.values.iter().map(|v| v.norm_sqr()).collect();
    let window_max = |lo: f64, hi: f64| -> f64 {
        fracs
            .iter()
            .zip(&m2)
            .filter(|(f, _)| **f >= lo - 1e-12 && **f <= hi + 1e-12)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let dip = fracs
        .iter()
        .zip(&m2)
        .filter(|(f, _)| **f > 0.1 && **f < 0.6)
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    let first = window_max(0.7, 0.8);
    let second = window_max(1.7, 1.8);

    // cross-validation at every multiple of T_cl/10 up to 2 T_cl
    let cross_fracs: Vec<f64> = (0..=20).map(|i| i as f64 / 10.0).collect();
    let cross = overlap_series_spectral(&p, &cross_fracs).unwrap();
    let psi = initial_packet_sample(&p, p.n_grid).unwrap();
    let points = paired_sweep(&psi, &left_half(), &p, &cross_fracs).unwrap();
    let dev = cross
        .values
        .iter()
        .zip(&points)
        .map(|(s, g)| (s - g.overlap).norm())
        .fold(0.0, f64::max);

    let gates = [
        ("|A(0)|^2 >= 0.999", m2[0] >= 0.999),
        ("recoherence >= 0.98 in [0.7, 0.8]", first >= 0.98),
        ("recoherence >= 0.98 in [1.7, 1.8]", second >= 0.98),
        ("dip <= 0.5 inside (0.1, 0.6)", dip <= 0.5),
        ("spectral vs grid <= 1e-3", dev <= 1e-3),
    ];
    let failed: Vec<&str> = gates.iter().filter(|(_, ok)| !ok).map(|(g, _)| *g).collect();
    verdict(
        4,
        "overlap curve shape",
        failed.is_empty(),
        &format!(
            "|A(0)|^2 = {:.6}, window maxima {first:.4} and {second:.4}, dip {dip:.1e}, \
             cross-validation {dev:.2e}{}",
            m2[0],
            if failed.is_empty() {
                String::new()
            } else {
                format!(
                    "; failed: {}. The second window tops out at {second:.4} because \
                     dispersion delays the recoherence peak to about 1.85 T_cl \
                     (value 0.8192 there), outside [1.7, 1.8]",
                    failed.join(", ")
                )
            }
        ),
    );
}

#[test]
fn criterion_5_contrary_inference() {
    let p = SimParams { a: 0.1, lambda_frac: 0.48, ..SimParams::default() };
    let set1 = PartitionSpec::new(left_half(), p.tau_frac, "stay left");
    let box_region = Region::moving_box(p.lambda_frac, ClipMode::ClipAtWalls).unwrap();
    let set2 = PartitionSpec::new(box_region, p.tau_frac, "track the path");
    let rep = contrary_inference_report(&set1, &set2, &p, 0.01, 0.01).unwrap();
    let t_cl = p.classical_period().unwrap();
    let witness = rep.crossing_time.map(|t| t / t_cl);
    let witness_ok = witness.is_some_and(|w| (w - 0.25).abs() <= 0.01);
    let gates = [
        ("set 1 consistent", rep.report1.consistent),
        ("set 2 consistent", rep.report2.consistent),
        ("p(h1) >= 0.99", rep.report1.p_h >= 0.99),
        ("p(hbar1) <= 0.01", rep.report1.p_hbar <= 0.01),
        ("p(h2) >= 0.99", rep.report2.p_h >= 0.99),
        ("p(hbar2) <= 0.01", rep.report2.p_hbar <= 0.01),
        ("crossing witness near T_cl/4", witness_ok),
        ("verdict CONTRARY", rep.contrary),
    ];
    let failed: Vec<&str> = gates.iter().filter(|(_, ok)| !ok).map(|(g, _)| *g).collect();
    verdict(
        5,
        "contrary inference",
        failed.is_empty(),
        &format!(
            "p(h1) = {:.6}, |D1| = {:.2e}, p(h2) = {:.6}, |D2| = {:.2e}, witness {:?} T_cl{}",
            rep.report1.p_h,
            rep.report1.epsilon,
            rep.report2.p_h,
            rep.report2.epsilon,
            witness,
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", failed.join(", "))
            }
        ),
    );
}

#[test]
fn criterion_6_propagator_suite() {
    // norm drift across two periods
    let p = SimParams { n_grid: 2049, dt_frac: 1.0 / 4000.0, ..SimParams::default() };
    let t_cl = p.classical_period().unwrap();
    let dt = p.dt_frac * t_cl;
    let psi = initial_packet_sample(&p, p.n_grid).unwrap();
    let plan = EvolutionPlan { mode: EvolutionMode::Full, dt, t_end: 2.0 * t_cl };
    let evolved = evolve(&psi, &plan, &p, &[2.0 * t_cl]).unwrap().pop().unwrap().state;
    let drift = (evolved.norm_sq() - 1.0).abs();

    // forward-backward round trip
    let mut state = psi.clone();
    for _ in 0..1000 {
        state = cn_step(&state, dt, (-1.0, 1.0)).unwrap();
    }
    for _ in 0..1000 {
        state = cn_step(&state, -dt, (-1.0, 1.0)).unwrap();
    }
    let round_trip = state.l2_distance(&psi).unwrap();

    // every eigenmode through n = 20 keeps unit fidelity
    let basis = EigenBasis::full(20);
    let mut worst_fidelity = 1.0f64;
    for n in 1..=20 {
        let mut mode = GridState::zeros(513, -1.0, 1.0);
        for j in 0..mode.len() {
            mode.amp[j] = Complex64::new(basis.sample(n, mode.x(j)), 0.0);
        }
        let mode = mode.normalized();
        let mut evolved = mode.clone();
        for _ in 0..200 {
            evolved = cn_step(&evolved, dt, (-1.0, 1.0)).unwrap();
        }
        worst_fidelity = worst_fidelity.min(inner_product(&mode, &evolved).unwrap().norm());
    }

    // halving dx and dt should cut the spectral-vs-grid error at least 3x
    let halving_error = |n_grid: usize, steps: f64| -> f64 {
        let hp = SimParams {
            a: 0.1,
            q: 8.0 * PI,
            n_grid,
            dt_frac: 1.0 / steps,
            tau_frac: 0.3,
            n_modes: 96,
            ..SimParams::default()
        };
        let series = overlap_series_spectral(&hp, &[0.3]).unwrap().values[0];
        let packet = initial_packet_sample(&hp, hp.n_grid).unwrap();
        let pt = &paired_sweep(&packet, &left_half(), &hp, &[0.3]).unwrap()[0];
        (series - pt.overlap).norm()
    };
    let coarse = halving_error(257, 1000.0);
    let fine = halving_error(513, 2000.0);
    let ratio = coarse / fine;

    let pass = drift <= 1e-8 && round_trip <= 1e-6 && worst_fidelity >= 1.0 - 1e-8 && ratio >= 3.0;
    verdict(
        6,
        "propagator suite",
        pass,
        &format!(
            "norm drift {drift:.2e}, round trip {round_trip:.2e}, \
             worst eigenmode fidelity 1 - {:.2e}, halving ratio {ratio:.2}",
            1.0 - worst_fidelity
        ),
    );
}

#[test]
fn criterion_7_zeno_convergence() {
    let p = SimParams {
        a: 0.1,
        q: 8.0 * PI,
        n_grid: 2049,
        dt_frac: 1.0 / 20480.0,
        tau_frac: 0.25,
        ..SimParams::default()
    };
    let region = left_half();
    let psi = initial_packet_sample(&p, p.n_grid).unwrap();
    let mut proj = psi.clone();
    let mid = proj.nearest_node(0.0);
    proj.project_to_window(0, mid);
    let start = proj.normalized();
    let t_cl = p.classical_period().unwrap();
    let (dt, t_end) = (p.dt_frac * t_cl, p.tau_frac * t_cl);
    let ref_plan = EvolutionPlan { mode: EvolutionMode::RestrictedStatic(region), dt, t_end };
    let reference = evolve(&start, &ref_plan, &p, &[t_end]).unwrap().pop().unwrap().state;
    let ladder = [8usize, 32, 128, 512];
    let d: Vec<f64> = ladder
        .iter()
        .map(|&n| {
            let plan = EvolutionPlan { mode: EvolutionMode::FiniteNZeno(region, n), dt, t_end };
            let state = evolve(&start, &plan, &p, &[t_end]).unwrap().pop().unwrap().state;
            state.l2_distance(&reference).unwrap()
        })
        .collect();
    let strictly_decreasing = d.windows(2).all(|w| w[1] < w[0]);
    let frozen = [0.9571, 0.7048, 0.4157, 0.2275];
    let pinned = d.iter().zip(frozen).all(|(got, want)| (got - want).abs() < 2e-3);
    let ratio = d[0] / d[3];
    verdict(
        7,
        "zeno convergence",
        strictly_decreasing && pinned && ratio >= 10.0,
        &format!(
            "distances {:?} over N = {ladder:?}, strictly decreasing: {strictly_decreasing}, \
             ratio N=8 over N=512 is {ratio:.2}{}",
            d.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
            if ratio >= 10.0 {
                String::new()
            } else {
                format!(
                    "; the 10x gate is out of reach: the loss from sharp projections \
                     scales as N^(-1/2), so this 64-fold ladder saturates near {ratio:.1}x"
                )
            }
        ),
    );
}

#[test]
fn criterion_8_sum_rule() {
    let t0 = Instant::now();
    let space = five_element_example();
    let all = space.all().bits;
    let mut worst = 0.0f64;
    for a in 0..=all {
        for b in 0..=all {
            if a & b != 0 {
                continue;
            }
            for c in 0..=all {
                if c & (a | b) != 0 {
                    continue;
                }
                let r = space
                    .sum_rule_residual(Event { bits: a }, Event { bits: b }, Event { bits: c })
                    .unwrap();
                worst = worst.max(r);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 10;
    let labels: Vec<String> = (0..n).map(|i| format!("o{i}")).collect();
    let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    let mut checked = 0;
    while checked < 1000 {
        let alpha: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let random_space = EventSpace::from_amplitudes_raw(&refs, &alpha).unwrap();
        for _ in 0..25 {
            let (mut a, mut b, mut c) = (0u32, 0u32, 0u32);
            for i in 0..n {
                match rng.gen_range(0..4) {
                    0 => a |= 1 << i,
                    1 => b |= 1 << i,
                    2 => c |= 1 << i,
                    _ => {}
                }
            }
            let r = random_space
                .sum_rule_residual(Event { bits: a }, Event { bits: b }, Event { bits: c })
                .unwrap();
            worst = worst.max(r);
            checked += 1;
        }
    }
    verdict(
        8,
        "quantum measure sum rule",
        worst <= 1e-12 && t0.elapsed().as_secs_f64() < 10.0,
        &format!(
            "worst residual {worst:.3e} over all disjoint five-outcome triples \
             and {checked} random triples, {:.2}s",
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_9_interference_regime() {
    let p = SimParams { tau_frac: 0.25, ..SimParams::default() };
    let psi = initial_packet_sample(&p, p.n_grid).unwrap();
    let spec = PartitionSpec::new(left_half(), p.tau_frac, "stay left");
    let m = decoherence_pair(&psi, &spec, &p).unwrap();
    let report = consistency_check(&m, 0.01);

    // the command line report must carry the refusal wording
    let out = Command::new(env!("CARGO_BIN_EXE_histlab"))
        .args([
            "consistency",
            "--set",
            "tau_frac=0.25",
            "--set",
            "n_grid=1025",
            "--set",
            "dt_frac=0.0005",
        ])
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let refusal = text.contains("refusing to report the diagonal as probabilities");

    verdict(
        9,
        "interference regime",
        report.epsilon > 0.1 && !report.consistent && refusal && out.status.code() == Some(0),
        &format!(
            "|D(h,hbar)| = {:.3} at tau = 0.25 T_cl, consistent: {}, \
             report withholds probabilities: {refusal}",
            report.epsilon, report.consistent
        ),
    );
}
