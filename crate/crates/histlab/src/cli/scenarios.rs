//! Runnable scenarios behind one trait, picked by name at run time.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

use super::config::ResolvedConfig;
use crate::eventalgebra::{five_element_example, AlgebraError, Event, PairClass};
use crate::histories::{
    consistency_check, contrary_inference_report, decoherence_pair, paired_sweep,
    ConsistencyReport, PartitionSpec,
};
use crate::model::{self, ParamError, Region};
use crate::propagator::{evolve, EvolutionMode, EvolutionPlan, EvolveError, GridState};
use crate::spectral::{
    self, closed_coefficients, coeff_numeric, overlap_integral_ink, overlap_series_spectral,
    overlap_t0_closed, EigenBasis, SpectralError,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Numeric(String),
    #[error("cannot write {path}: {err}")]
    Io { path: String, err: std::io::Error },
}

impl From<EvolveError> for RunError {
    fn from(e: EvolveError) -> RunError {
        RunError::Numeric(e.to_string())
    }
}

impl From<SpectralError> for RunError {
    fn from(e: SpectralError) -> RunError {
        RunError::Numeric(e.to_string())
    }
}

impl From<ParamError> for RunError {
    fn from(e: ParamError) -> RunError {
        RunError::Numeric(e.to_string())
    }
}

impl From<AlgebraError> for RunError {
    fn from(e: AlgebraError) -> RunError {
        RunError::Numeric(e.to_string())
    }
}

pub trait Scenario: Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    /// applied on top of the global defaults, before any user settings
    fn default_overrides(&self) -> &'static [(&'static str, &'static str)] {
        &[]
    }
    /// whether the run drives a moving window, for validation
    fn uses_moving_box(&self) -> bool {
        false
    }
    /// default table path, for scenarios that write one
    fn default_out(&self) -> Option<&'static str> {
        None
    }
    /// returns the process exit code: 0 clean, 1 for failed checks
    fn run(&self, cfg: &ResolvedConfig) -> Result<i32, RunError>;
}

pub fn registry() -> &'static [&'static dyn Scenario] {
    &[&OverlapCurve, &Consistency, &Contrary, &Eigencheck, &ZenoConvergence, &FiveElementExample]
}

pub fn find(name: &str) -> Option<&'static dyn Scenario> {
    registry().iter().copied().find(|s| s.name() == name)
}

fn left_half() -> Region {
    Region::static_interval(-1.0, 0.0).expect("fixed interval")
}

/// Write header plus rows to the resolved output path, atomically.
fn write_table(
    cfg: &ResolvedConfig,
    default_name: &str,
    columns: &str,
    rows: &[String],
) -> Result<PathBuf, RunError> {
    let path = cfg.out.clone().unwrap_or_else(|| PathBuf::from(default_name));
    let mut text = format!(
        "# histlab {} config-hash={}\n{columns}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.config_hash()
    );
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    let file_name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "table".to_string());
    let tmp = path.with_file_name(format!("{file_name}.tmp"));
    fs::write(&tmp, text)
        .map_err(|err| RunError::Io { path: tmp.display().to_string(), err })?;
    fs::rename(&tmp, &path)
        .map_err(|err| RunError::Io { path: path.display().to_string(), err })?;
    Ok(path)
}

fn print_report(label: &str, r: &ConsistencyReport) {
    let m = &r.matrix;
    println!("[{label}]");
    println!("  D(h,h)       = {:.10}", m.d_hh);
    println!("  D(h,hbar)    = {:.10} {:+.10}i", m.d_hhbar.re, m.d_hhbar.im);
    println!("  D(hbar,hbar) = {:.10}", m.d_hbarhbar);
    println!("  |D(h,hbar)|  = {:.3e} (threshold {:.3e})", r.epsilon, r.threshold);
    println!("  boundary residual at t = 0: {:.3e}", r.boundary_residual);
    println!("  consistent: {}", r.consistent);
}

struct OverlapCurve;

impl Scenario for OverlapCurve {
    fn name(&self) -> &'static str {
        "overlap-curve"
    }

    fn about(&self) -> &'static str {
        "left-restricted against full evolution over two periods, spectral and grid"
    }

    fn default_out(&self) -> Option<&'static str> {
        Some("overlap-curve.csv")
    }

    fn run(&self, cfg: &ResolvedConfig) -> Result<i32, RunError> {
        let p = &cfg.params;
        let fracs: Vec<f64> = (0..=160).map(|i| i as f64 / 80.0).collect();
        let series = overlap_series_spectral(p, &fracs)?;
        let psi = model::initial_packet_sample(p, p.n_grid)?;
        let points = paired_sweep(&psi, &left_half(), p, &fracs)?;
        let mut rows = Vec::with_capacity(2 * fracs.len());
        for (f, v) in fracs.iter().zip(&series.values) {
            rows.push(csv_row(*f, *v, "spectral"));
        }
        for (f, pt) in fracs.iter().zip(&points) {
            rows.push(csv_row(*f, pt.overlap, "grid"));
        }
        let dev = series
            .values
            .iter()
            .zip(&points)
            .map(|(s, g)| (s - g.overlap).norm())
            .fold(0.0, f64::max);
        let path =
            write_table(cfg, "overlap-curve.csv", "t_over_Tcl,abs_A,abs_A_sq,re_A,im_A,method", &rows)?;
        println!("horizons: {} steps of T_cl/80 up to 2 T_cl", fracs.len());
        println!("max |spectral - grid| across horizons: {dev:.3e}");
        println!("wrote {}", path.display());
        Ok(0)
    }
}

fn csv_row(f: f64, v: Complex64, method: &str) -> String {
    format!(
        "{:.4},{:.16e},{:.16e},{:.16e},{:.16e},{}",
        f,
        v.norm(),
        v.norm_sqr(),
        v.re,
        v.im,
        method
    )
}

struct Consistency;

impl Scenario for Consistency {
    fn name(&self) -> &'static str {
        "consistency"
    }

    fn about(&self) -> &'static str {
        "decoherence functional of the stay-left pair at one horizon"
    }

    fn run(&self, cfg: &ResolvedConfig) -> Result<i32, RunError> {
        let p = &cfg.params;
        let psi = model::initial_packet_sample(p, p.n_grid)?;
        let region = left_half();
        let spec = PartitionSpec::new(region, p.tau_frac, "stay left");
        let m = decoherence_pair(&psi, &spec, p)?;
        let report = consistency_check(&m, cfg.threshold)
            .with_boundary_residual(model::boundary_check(&psi, &region, 0.0, p));
        println!("horizon tau = {} T_cl", p.tau_frac);
        print_report(&spec.label, &report);
        if report.consistent {
            println!("consistent: the diagonal is a probability assignment");
            println!("p(stay left) = {:.6}", report.p_h);
            println!("p(cross)     = {:.6}", report.p_hbar);
        } else {
            println!("not consistent at this threshold; refusing to report the diagonal as probabilities");
        }
        Ok(0)
    }
}

struct Contrary;

impl Scenario for Contrary {
    fn name(&self) -> &'static str {
        "contrary"
    }

    fn about(&self) -> &'static str {
        "two consistent near-certain histories whose conjunction is impossible"
    }

    fn default_overrides(&self) -> &'static [(&'static str, &'static str)] {
        &[("a", "0.1"), ("lambda_frac", "0.48")]
    }

    fn uses_moving_box(&self) -> bool {
        true
    }

    fn run(&self, cfg: &ResolvedConfig) -> Result<i32, RunError> {
        let p = &cfg.params;
        let set1 = PartitionSpec::new(left_half(), p.tau_frac, "stay in the left half");
        let box_region = Region::moving_box(p.lambda_frac, cfg.clip_mode)?;
        let set2 = PartitionSpec::new(box_region, p.tau_frac, "track the classical path");
        let rep = contrary_inference_report(&set1, &set2, p, cfg.threshold, cfg.delta)?;
        println!("horizon tau = {} T_cl, near-certainty margin delta = {}", p.tau_frac, cfg.delta);
        print_report(&set1.label, &rep.report1);
        print_report(&set2.label, &rep.report2);
        match rep.crossing_time {
            Some(t) => println!(
                "second history first sits inside (0, 1] at t = {:.4} T_cl",
                t / p.classical_period()?
            ),
            None => println!("second history never sits inside (0, 1] before tau"),
        }
        if rep.contrary {
            println!("verdict: CONTRARY");
            println!("both histories are near-certain and consistent, yet cannot both hold");
        } else {
            println!("verdict: NOT CONTRARY (failed gates: {})", rep.failed_gates().join(", "));
        }
        Ok(0)
    }
}

struct Eigencheck;

struct CheckRow {
    name: String,
    detail: String,
    err: f64,
}

impl Scenario for Eigencheck {
    fn name(&self) -> &'static str {
        "eigencheck"
    }

    fn about(&self) -> &'static str {
        "closed-form coefficients, overlaps, and completeness against quadrature"
    }

    fn run(&self, cfg: &ResolvedConfig) -> Result<i32, RunError> {
        let p = &cfg.params;
        let gate = 1e-6;
        let packet = spectral::analytic_packet(p, p.n_grid);
        let restricted = spectral::analytic_restricted(p, p.n_grid);
        let full = EigenBasis::full(p.n_modes);
        let half = EigenBasis::half(p.n_modes);
        let cs = closed_coefficients(full, p.a, p.q)?;
        let bs = closed_coefficients(half, p.a, p.q)?;
        let scale_c = (1..=p.n_modes).map(|n| cs.get(n).norm()).fold(0.0, f64::max);
        let scale_b = (1..=p.n_modes).map(|k| bs.get(k).norm()).fold(0.0, f64::max);
        let mut rows: Vec<CheckRow> = Vec::new();

        // coefficient errors are scale relative: tail coefficients sit far
        // below what any f64 quadrature can resolve
        for n in picks(((2.0 * p.q / PI).round() as usize).max(1), p.n_modes) {
            let num = coeff_numeric(full, n, &packet)?;
            rows.push(CheckRow {
                name: format!("c_{n}"),
                detail: format!("|closed| = {:.6e}", cs.get(n).norm()),
                err: (num - cs.get(n)).norm() / scale_c,
            });
        }
        for k in picks(((p.q / PI).round() as usize).max(1), p.n_modes) {
            let num = coeff_numeric(half, k, &restricted)?;
            rows.push(CheckRow {
                name: format!("b_{k}"),
                detail: format!("|closed| = {:.6e}", bs.get(k).norm()),
                err: (num - bs.get(k)).norm() / scale_b,
            });
        }

        // basis-overlap integrals, order-one quantities
        let m_half = (p.n_grid + 1) / 2;
        let probe = GridState::zeros(m_half, -1.0, 0.0);
        for (n, k) in [(1, 1), (2, 1), (3, 2), (5, 1), (7, 3), (8, 4)] {
            let values: Vec<Complex64> = (0..probe.len())
                .map(|j| {
                    let x = probe.x(j);
                    Complex64::new(full.sample(n, x) * half.sample(k, x), 0.0)
                })
                .collect();
            let got = spectral::simpson(&values, probe.dx).re;
            let want = overlap_integral_ink(n, k)?;
            rows.push(CheckRow {
                name: format!("I_{n},{k}"),
                detail: format!("closed = {want:.6e}"),
                err: (got - want).abs(),
            });
        }

        // initial overlap of the restriction with the packet
        let j_mid = packet.nearest_node(0.0);
        let values: Vec<Complex64> = (0..=j_mid)
            .map(|j| restricted.amp[j].conj() * packet.amp[j])
            .collect();
        let got = spectral::simpson(&values, packet.dx);
        let want = overlap_t0_closed(p.a)?;
        rows.push(CheckRow {
            name: "A(0)".to_string(),
            detail: format!("closed = {want:.10}"),
            err: (got - Complex64::from(want)).norm(),
        });

        rows.push(CheckRow {
            name: "parseval full".to_string(),
            detail: format!("{} modes", p.n_modes),
            err: cs.parseval_deficit(),
        });
        rows.push(CheckRow {
            name: "parseval half".to_string(),
            detail: format!("{} modes", p.n_modes),
            err: bs.parseval_deficit(),
        });

        let mut failed = 0;
        for row in &rows {
            let ok = row.err <= gate;
            if !ok {
                failed += 1;
            }
            println!(
                "{:<14} {:<26} error {:.3e}  {}",
                row.name,
                row.detail,
                row.err,
                if ok { "PASS" } else { "FAIL" }
            );
        }
        println!("eigencheck: {} rows, {} failed (gate {gate:.0e})", rows.len(), failed);
        Ok(if failed == 0 { 0 } else { 1 })
    }
}

/// Probe modes around the spectral peak, clamped to the mode budget.
fn picks(peak: usize, n_max: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [
        1,
        peak / 4,
        peak / 2,
        peak.saturating_sub(1),
        peak,
        peak + 1,
        3 * peak / 2,
        2 * peak,
    ]
    .into_iter()
    .map(|n| n.clamp(1, n_max))
    .collect();
    v.sort_unstable();
    v.dedup();
    v
}

struct ZenoConvergence;

impl Scenario for ZenoConvergence {
    fn name(&self) -> &'static str {
        "zeno-convergence"
    }

    fn about(&self) -> &'static str {
        "repeated projective checks against the sharp restriction"
    }

    fn default_overrides(&self) -> &'static [(&'static str, &'static str)] {
        &[
            ("a", "0.1"),
            ("q", "25.132741228718345"),
            ("n_grid", "2049"),
            ("dt_frac", "0.000048828125"),
            ("tau_frac", "0.25"),
        ]
    }

    fn default_out(&self) -> Option<&'static str> {
        Some("zeno-convergence.csv")
    }

    fn run(&self, cfg: &ResolvedConfig) -> Result<i32, RunError> {
        let p = &cfg.params;
        let region = left_half();
        let psi = model::initial_packet_sample(p, p.n_grid)?;
        let mut proj = psi.clone();
        let mid = proj.nearest_node(0.0);
        proj.project_to_window(0, mid);
        let start = proj.normalized();
        let t_end = p.tau_frac * p.classical_period()?;
        let dt = p.dt();
        let ref_plan = EvolutionPlan { mode: EvolutionMode::RestrictedStatic(region), dt, t_end };
        let reference = evolve(&start, &ref_plan, p, &[t_end])?.pop().expect("one sample").state;
        let ladder = [8usize, 32, 128, 512];
        let mut rows = Vec::new();
        let mut dists = Vec::new();
        for n in ladder {
            let plan = EvolutionPlan { mode: EvolutionMode::FiniteNZeno(region, n), dt, t_end };
            let state = evolve(&start, &plan, p, &[t_end])?.pop().expect("one sample").state;
            let d = state.l2_distance(&reference)?;
            println!("N = {n:>4}: distance {d:.6}");
            rows.push(format!("{n},{d:.16e}"));
            dists.push(d);
        }
        println!(
            "distance ratio N = {} over N = {}: {:.2}",
            ladder[0],
            ladder[ladder.len() - 1],
            dists[0] / dists[dists.len() - 1]
        );
        let path = write_table(cfg, "zeno-convergence.csv", "N,l2_distance_to_restricted", &rows)?;
        println!("wrote {}", path.display());
        Ok(0)
    }
}

struct FiveElementExample;

impl Scenario for FiveElementExample {
    fn name(&self) -> &'static str {
        "fig3"
    }

    fn about(&self) -> &'static str {
        "five-outcome quantum measure with two near-certain but contrary events"
    }

    fn run(&self, _cfg: &ResolvedConfig) -> Result<i32, RunError> {
        let space = five_element_example();
        let p = space.event(&["a", "e"]).expect("fixed labels");
        let q = space.event(&["a", "b", "c", "d"]).expect("fixed labels");
        let (p_bar, q_bar) = (space.complement(p), space.complement(q));
        println!("outcomes a b c d e, amplitudes 1 -1 1 -1 -1");
        println!("mu({{}}) = {}", space.quantum_measure(Event::EMPTY));
        for i in 0..space.len() {
            let e = space.event_from_bits(1 << i).expect("in range");
            println!("mu({}) = {}", space.describe(e), space.quantum_measure(e));
        }
        println!("mu(omega) = {}", space.quantum_measure(space.all()));
        println!("P  = {} with mu = {}", space.describe(p), space.quantum_measure(p));
        println!("Q  = {} with mu = {}", space.describe(q), space.quantum_measure(q));
        println!("P' = {} with mu = {}", space.describe(p_bar), space.quantum_measure(p_bar));
        println!("Q' = {} with mu = {}", space.describe(q_bar), space.quantum_measure(q_bar));
        println!(
            "{{P, P'}} is a consistent partition: {}",
            space.is_consistent_partition(&[p, p_bar], 1e-12)?
        );
        println!(
            "{{Q, Q'}} is a consistent partition: {}",
            space.is_consistent_partition(&[q, q_bar], 1e-12)?
        );
        let singles: Vec<Event> = (0..space.len())
            .map(|i| space.event_from_bits(1 << i).expect("in range"))
            .collect();
        println!(
            "the five singletons form a consistent partition: {}",
            space.is_consistent_partition(&singles, 1e-12)?
        );
        let class = match space.classify_pair(p_bar, q_bar) {
            PairClass::Contrary => "contrary",
            PairClass::Contradictory => "contradictory",
            PairClass::Neither => "neither",
        };
        println!("P' and Q' are disjoint without covering the space: classified {class}");
        println!("zero-measure covers at threshold 1e-12:");
        let covers = space.find_zero_covers(1e-12);
        for (x, y) in &covers {
            println!("  {} + {}", space.describe(*x), space.describe(*y));
        }
        println!("cover list includes (Q, P): {}", covers.contains(&(q.min(p), q.max(p))));
        println!("mu(P) = 0 makes P' near-certain, mu(Q) = 0 makes Q' near-certain,");
        println!("yet P' and Q' cannot both hold");
        Ok(0)
    }
}
