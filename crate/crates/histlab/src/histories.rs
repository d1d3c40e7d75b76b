//! Two-history partitions and their decoherence functional.
//!
//! A partition is (h, hbar): paths that stay inside the region at every
//! step up to the horizon tau, and everything else. With g the full and
//! g_r the restricted propagator, the functional entries come straight
//! from the evolved states psi = g Psi0 and psi_r = g_r Psi0:
//! D(h,h) = |psi_r|^2, D(h,hbar) = <psi_r|psi> - |psi_r|^2,
//! D(hbar,hbar) = |psi - psi_r|^2. Their sum telescopes to |psi|^2, so the
//! diagonal is a candidate probability pair exactly when the off-diagonal
//! interference is negligible.

use num_complex::Complex64;
use std::thread;

use crate::model::{self, Region, SimParams};
use crate::propagator::{
    evolve, inner_product, EvolutionMode, EvolutionPlan, EvolveError, GridState,
};

/// One history: stay inside `region` until tau.
#[derive(Clone, Debug)]
pub struct PartitionSpec {
    pub region: Region,
    pub tau_frac: f64,
    pub label: String,
}

impl PartitionSpec {
    pub fn new(region: Region, tau_frac: f64, label: &str) -> PartitionSpec {
        PartitionSpec { region, tau_frac, label: label.to_string() }
    }
}

/// Decoherence functional of a two-history partition. Hermitian by
/// construction; the diagonal is real and non-negative.
#[derive(Clone, Copy, Debug)]
pub struct DecoMatrix2 {
    pub d_hh: f64,
    pub d_hhbar: Complex64,
    pub d_hbarhbar: f64,
}

impl DecoMatrix2 {
    pub fn as_matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(self.d_hh, 0.0), self.d_hhbar],
            [self.d_hhbar.conj(), Complex64::new(self.d_hbarhbar, 0.0)],
        ]
    }

    /// <psi_r|psi>, recovered from the entries.
    pub fn cross_term(&self) -> Complex64 {
        self.d_hhbar + Complex64::new(self.d_hh, 0.0)
    }
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub matrix: DecoMatrix2,
    /// |D(h, hbar)|
    pub epsilon: f64,
    pub threshold: f64,
    pub consistent: bool,
    /// candidate probabilities: the diagonal, meaningful only when consistent
    pub p_h: f64,
    pub p_hbar: f64,
    /// relative packet amplitude at the region edge at t = 0
    pub boundary_residual: f64,
}

/// Judge a functional against an absolute interference threshold.
pub fn consistency_check(matrix: &DecoMatrix2, threshold: f64) -> ConsistencyReport {
    let epsilon = matrix.d_hhbar.norm();
    ConsistencyReport {
        matrix: *matrix,
        epsilon,
        threshold,
        consistent: epsilon <= threshold,
        p_h: matrix.d_hh,
        p_hbar: matrix.d_hbarhbar,
        boundary_residual: 0.0,
    }
}

impl ConsistencyReport {
    pub fn with_boundary_residual(mut self, r: f64) -> ConsistencyReport {
        self.boundary_residual = r;
        self
    }
}

/// The restricted arm of a pair: its initial state and evolution mode.
/// A static region gets the projected packet (the t = 0 restriction is part
/// of g_r); the moving box projects inside the propagator instead.
fn restricted_arm(
    initial: &GridState,
    region: &Region,
    params: &SimParams,
) -> (GridState, EvolutionMode) {
    match region {
        Region::StaticInterval { .. } => {
            let (lo, hi) = model::region_interval(region, 0.0, params);
            let mut proj = initial.clone();
            let (ilo, ihi) = (proj.nearest_node(lo), proj.nearest_node(hi));
            proj.project_to_window(ilo, ihi);
            (proj, EvolutionMode::RestrictedStatic(*region))
        }
        Region::MovingBox { .. } => (initial.clone(), EvolutionMode::MovingBox(*region)),
    }
}

fn matrix_from_states(psi: &GridState, psi_r: &GridState) -> Result<DecoMatrix2, EvolveError> {
    let d_hh = psi_r.norm_sq();
    let cross = inner_product(psi_r, psi)?;
    let d_hbarhbar = psi.l2_distance(psi_r)?.powi(2);
    Ok(DecoMatrix2 { d_hh, d_hhbar: cross - d_hh, d_hbarhbar })
}

/// Evolve the full and the restricted arm to the horizon and assemble the
/// functional. The two runs share the grid and step and are independent,
/// so they execute on separate threads.
pub fn decoherence_pair(
    initial: &GridState,
    spec: &PartitionSpec,
    params: &SimParams,
) -> Result<DecoMatrix2, EvolveError> {
    let t_end = spec.tau_frac * params.t_cl();
    let dt = params.dt();
    let full_plan = EvolutionPlan { mode: EvolutionMode::Full, dt, t_end };
    let (r_init, r_mode) = restricted_arm(initial, &spec.region, params);
    let r_plan = EvolutionPlan { mode: r_mode, dt, t_end };
    let (full, restricted) = thread::scope(|s| {
        let h = s.spawn(|| evolve(initial, &full_plan, params, &[t_end]));
        let r = evolve(&r_init, &r_plan, params, &[t_end]);
        (h.join().expect("full evolution thread"), r)
    });
    let psi = full?.pop().expect("one sample").state;
    let psi_r = restricted?.pop().expect("one sample").state;
    matrix_from_states(&psi, &psi_r)
}

/// One horizon of a paired sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub tau_frac: f64,
    /// <psi_r(t)|psi(t)> with the restricted state renormalized at t
    pub overlap: Complex64,
    /// D(h, hbar) at this horizon
    pub interference: Complex64,
    pub restricted_norm_sq: f64,
    /// norm removed by the restriction up to this horizon
    pub leaked: f64,
}

/// The whole |D|(tau) and A(tau) landscape from a single pair of runs: one
/// full and one restricted evolution, sampled at every horizon. tau_fracs
/// must be sorted.
pub fn paired_sweep(
    initial: &GridState,
    region: &Region,
    params: &SimParams,
    tau_fracs: &[f64],
) -> Result<Vec<SweepPoint>, EvolveError> {
    let t_cl = params.t_cl();
    let dt = params.dt();
    let times: Vec<f64> = tau_fracs.iter().map(|f| f * t_cl).collect();
    let t_end = times.last().copied().unwrap_or(0.0);
    let full_plan = EvolutionPlan { mode: EvolutionMode::Full, dt, t_end };
    let (r_init, r_mode) = restricted_arm(initial, region, params);
    let r_plan = EvolutionPlan { mode: r_mode, dt, t_end };
    let (full, restricted) = thread::scope(|s| {
        let h = s.spawn(|| evolve(initial, &full_plan, params, &times));
        let r = evolve(&r_init, &r_plan, params, &times);
        (h.join().expect("full evolution thread"), r)
    });
    let full = full?;
    let restricted = restricted?;
    let mut points = Vec::with_capacity(full.len());
    for (f, r) in full.iter().zip(&restricted) {
        let nr2 = r.state.norm_sq();
        let cross = inner_product(&r.state, &f.state)?;
        let overlap = if nr2 > 0.0 { cross / nr2.sqrt() } else { Complex64::new(0.0, 0.0) };
        points.push(SweepPoint {
            tau_frac: f.t / t_cl,
            overlap,
            interference: cross - nr2,
            restricted_norm_sq: nr2,
            leaked: r.leaked,
        });
    }
    Ok(points)
}

/// First time within [0, tau] at which the region's interval is contained
/// in (0, 1], scanning on the step grid. Absolute internal time.
pub fn crossing_witness(region: &Region, params: &SimParams) -> Option<f64> {
    let dt = params.dt();
    let steps = (params.tau_frac * params.t_cl() / dt).round() as usize;
    for s in 0..=steps {
        let t = s as f64 * dt;
        let (lo, hi) = model::region_interval(region, t, params);
        if lo > 0.0 && hi <= 1.0 + 1e-12 {
            return Some(t);
        }
    }
    None
}

/// Does following the region up to tau force a crossing of x = 0?
pub fn crossing_implication(region: &Region, params: &SimParams) -> bool {
    crossing_witness(region, params).is_some()
}

#[derive(Clone, Debug)]
pub struct ContraryReport {
    pub report1: ConsistencyReport,
    pub report2: ConsistencyReport,
    pub delta: f64,
    pub crossing_implied: bool,
    /// witness for the implication, absolute internal time
    pub crossing_time: Option<f64>,
    pub contrary: bool,
}

impl ContraryReport {
    /// Names of the inference gates that did not hold.
    pub fn failed_gates(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.report1.consistent {
            v.push("set 1 consistency");
        }
        if !self.report2.consistent {
            v.push("set 2 consistency");
        }
        if self.report1.p_h < 1.0 - self.delta {
            v.push("p(h1) >= 1 - delta");
        }
        if self.report2.p_h < 1.0 - self.delta {
            v.push("p(h2) >= 1 - delta");
        }
        if !self.crossing_implied {
            v.push("crossing implication");
        }
        v
    }
}

/// Run both partitions against one shared full evolution and assemble the
/// contrary-inference verdict: both consistent, both near-unit probability,
/// and the second region's path forced across x = 0.
pub fn contrary_inference_report(
    set1: &PartitionSpec,
    set2: &PartitionSpec,
    params: &SimParams,
    threshold: f64,
    delta: f64,
) -> Result<ContraryReport, EvolveError> {
    if (set1.tau_frac - set2.tau_frac).abs() > 1e-12 {
        return Err(EvolveError::BadPlan(format!(
            "contrary inference needs a shared horizon, got {} and {}",
            set1.tau_frac, set2.tau_frac
        )));
    }
    let initial = model::initial_packet_sample(params, params.n_grid)?;
    let t_end = set1.tau_frac * params.t_cl();
    let dt = params.dt();
    let full_plan = EvolutionPlan { mode: EvolutionMode::Full, dt, t_end };
    let (init1, mode1) = restricted_arm(&initial, &set1.region, params);
    let (init2, mode2) = restricted_arm(&initial, &set2.region, params);
    let plan1 = EvolutionPlan { mode: mode1, dt, t_end };
    let plan2 = EvolutionPlan { mode: mode2, dt, t_end };
    let (full, r1, r2) = thread::scope(|s| {
        let h = s.spawn(|| evolve(&initial, &full_plan, params, &[t_end]));
        let h1 = s.spawn(|| evolve(&init1, &plan1, params, &[t_end]));
        let r2 = evolve(&init2, &plan2, params, &[t_end]);
        (
            h.join().expect("full evolution thread"),
            h1.join().expect("first restricted thread"),
            r2,
        )
    });
    let psi = full?.pop().expect("one sample").state;
    let psi_r1 = r1?.pop().expect("one sample").state;
    let psi_r2 = r2?.pop().expect("one sample").state;

    let report1 = consistency_check(&matrix_from_states(&psi, &psi_r1)?, threshold)
        .with_boundary_residual(model::boundary_check(&initial, &set1.region, 0.0, params));
    let report2 = consistency_check(&matrix_from_states(&psi, &psi_r2)?, threshold)
        .with_boundary_residual(model::boundary_check(&initial, &set2.region, 0.0, params));
    let crossing_time = crossing_witness(&set2.region, params);
    let mut report = ContraryReport {
        report1,
        report2,
        delta,
        crossing_implied: crossing_time.is_some(),
        crossing_time,
        contrary: false,
    };
    report.contrary = report.failed_gates().is_empty();
    Ok(report)
}
