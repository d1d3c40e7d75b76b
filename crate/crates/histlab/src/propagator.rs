//! Crank-Nicolson propagation on a uniform grid over [-1, 1], with hard
//! Dirichlet walls and an optional restriction to a (possibly moving)
//! active interval.
//!
//! The step solves (1 + i dt H/2) psi' = (1 - i dt H/2) psi with the
//! three-point Laplacian, so it is unitary on the active window in exact
//! arithmetic and second order in dt and dx. Norms and inner products use
//! the trapezoid rule, which the stepped states conserve exactly; with the
//! wall nodes pinned at zero it reduces to dx times the plain node sum.

use num_complex::Complex64;
use std::collections::BTreeSet;
use thiserror::Error;

use crate::model::{self, ParamError, Region, SimParams};

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("initial state is not supported in the active region: relative amplitude {got:.3e} at the {side} boundary x = {x:.6} exceeds 1e-6")]
    SupportViolation { side: &'static str, x: f64, got: f64 },
    #[error("evolution produced non-finite amplitudes at t = {t:.6e}")]
    NonFinite { t: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid evolution plan: {0}")]
    BadPlan(String),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// A wavefunction sampled on a uniform grid. Node j sits at lo + j dx; the
/// first and last node are wall nodes and are held at zero by every
/// constructor and step in this crate.
#[derive(Clone, Debug)]
pub struct GridState {
    pub amp: Vec<Complex64>,
    pub dx: f64,
    pub lo: f64,
}

impl GridState {
    pub fn zeros(n_grid: usize, lo: f64, hi: f64) -> GridState {
        assert!(n_grid >= 2 && hi > lo);
        GridState {
            amp: vec![Complex64::new(0.0, 0.0); n_grid],
            dx: (hi - lo) / (n_grid - 1) as f64,
            lo,
        }
    }

    pub fn len(&self) -> usize {
        self.amp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amp.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.dx
    }

    pub fn hi(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn nearest_node(&self, x: f64) -> usize {
        let j = ((x - self.lo) / self.dx).round();
        (j.max(0.0) as usize).min(self.len() - 1)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dx * self.amp.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.amp.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn normalized(&self) -> GridState {
        let mut out = self.clone();
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero state");
        for v in &mut out.amp {
            *v /= n;
        }
        out
    }

    /// <x> over |psi|^2; callers use it to track the packet center.
    pub fn mean_position(&self) -> f64 {
        let mut w = 0.0;
        let mut s = 0.0;
        for (j, v) in self.amp.iter().enumerate() {
            let p = v.norm_sqr();
            w += p;
            s += p * self.x(j);
        }
        if w == 0.0 {
            0.0
        } else {
            s / w
        }
    }

    /// Zero every node at or outside the window boundary nodes.
    pub fn project_to_window(&mut self, ilo: usize, ihi: usize) {
        for v in &mut self.amp[..=ilo] {
            *v = Complex64::new(0.0, 0.0);
        }
        for v in &mut self.amp[ihi..] {
            *v = Complex64::new(0.0, 0.0);
        }
    }

    pub fn l2_distance(&self, other: &GridState) -> Result<f64, EvolveError> {
        let (off, n) = align(self, other)?;
        let mut s = 0.0;
        for i in 0..n {
            let a = self.amp.get(i).copied().unwrap_or_default();
            let b = idx_or_zero(other, i as isize - off);
            s += (a - b).norm_sqr();
        }
        // nodes outside the overlap exist in only one state
        for (i, v) in other.amp.iter().enumerate() {
            let j = i as isize + off;
            if j < 0 || j >= self.len() as isize {
                s += v.norm_sqr();
            }
        }
        Ok((self.dx * s).sqrt())
    }
}

fn idx_or_zero(s: &GridState, j: isize) -> Complex64 {
    if j < 0 || j >= s.len() as isize {
        Complex64::new(0.0, 0.0)
    } else {
        s.amp[j as usize]
    }
}

/// Node offset of `b` relative to `a` plus the iteration length for `a`.
/// Both grids must share dx and have commensurate node positions.
fn align(a: &GridState, b: &GridState) -> Result<(isize, usize), EvolveError> {
    if (a.dx - b.dx).abs() > 1e-12 * a.dx {
        return Err(EvolveError::GridMismatch(format!(
            "dx differs: {} vs {}",
            a.dx, b.dx
        )));
    }
    let shift = (b.lo - a.lo) / a.dx;
    let off = shift.round();
    if (shift - off).abs() > 1e-6 {
        return Err(EvolveError::GridMismatch(format!(
            "node positions differ by a non-integer number of cells ({shift})"
        )));
    }
    Ok((off as isize, a.len()))
}

/// <s1|s2> under the trapezoid rule; missing nodes count as zero, so states
/// on [-1, 0] pair with states on [-1, 1] by zero-extension.
pub fn inner_product(s1: &GridState, s2: &GridState) -> Result<Complex64, EvolveError> {
    let (off, _) = align(s1, s2)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, v) in s1.amp.iter().enumerate() {
        acc += v.conj() * idx_or_zero(s2, i as isize - off);
    }
    Ok(acc * s1.dx)
}

/// What the restriction does between steps.
#[derive(Clone, Debug)]
pub enum EvolutionMode {
    /// the whole well; plain unitary evolution
    Full,
    /// Dirichlet walls at a fixed sub-interval
    RestrictedStatic(Region),
    /// Dirichlet window following the classical path, re-projected every step
    MovingBox(Region),
    /// free evolution interrupted by N sharp projections onto the region
    FiniteNZeno(Region, usize),
}

#[derive(Clone, Debug)]
pub struct EvolutionPlan {
    pub mode: EvolutionMode,
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionSample {
    pub t: f64,
    pub state: GridState,
    /// 1 - |psi|^2: norm removed so far by window projections
    pub leaked: f64,
}

#[derive(Clone, Copy)]
struct StepCoef {
    diag: Complex64,
    off: Complex64,
}

/// LHS tridiagonal is (off, 1 + diag, off); the RHS uses the mirrored signs.
fn step_coef(dt: f64, dx: f64) -> StepCoef {
    let r = dt / (2.0 * dx * dx);
    StepCoef {
        diag: Complex64::new(0.0, r),
        off: Complex64::new(0.0, -r / 2.0),
    }
}

struct Workspace {
    rhs: Vec<Complex64>,
    // forward-elimination multipliers; reusable while the window size is fixed
    cp: Vec<Complex64>,
    cp_len: usize,
}

impl Workspace {
    fn new(n: usize) -> Workspace {
        Workspace {
            rhs: vec![Complex64::new(0.0, 0.0); n],
            cp: vec![Complex64::new(0.0, 0.0); n],
            cp_len: usize::MAX,
        }
    }
}

/// One CN step with Dirichlet nodes at ilo and ihi. Nodes at or outside the
/// boundary are zeroed: if they carried amplitude, that is the projection
/// the caller asked for by shrinking the window.
fn cn_step_in_place(
    amp: &mut [Complex64],
    ilo: usize,
    ihi: usize,
    c: StepCoef,
    ws: &mut Workspace,
) -> Result<(), EvolveError> {
    if ihi <= ilo + 1 || ihi >= amp.len() {
        return Err(EvolveError::BadPlan(format!(
            "active interval snaps to fewer than three nodes ({ilo}..{ihi})"
        )));
    }
    let m = ihi - ilo - 1;
    let diag = Complex64::new(1.0, 0.0) + c.diag;
    let rdiag = Complex64::new(1.0, 0.0) - c.diag;

    {
        let u = &amp[ilo + 1..ihi];
        let rhs = &mut ws.rhs[..m];
        for i in 0..m {
            rhs[i] = rdiag * u[i];
        }
        for i in 0..m - 1 {
            rhs[i] -= c.off * u[i + 1];
        }
        for i in 1..m {
            rhs[i] -= c.off * u[i - 1];
        }
    }

    // Thomas solve; |1 + diag| > 2 |off| always, so no pivoting is needed
    if ws.cp_len != m {
        let cp = &mut ws.cp[..m];
        cp[0] = c.off / diag;
        for i in 1..m {
            cp[i] = c.off / (diag - c.off * cp[i - 1]);
        }
        ws.cp_len = m;
    }
    {
        let cp = &ws.cp[..m];
        let d = &mut ws.rhs[..m];
        d[0] /= diag;
        for i in 1..m {
            let denom = diag - c.off * cp[i - 1];
            d[i] = (d[i] - c.off * d[i - 1]) / denom;
        }
        for i in (0..m - 1).rev() {
            let next = d[i + 1];
            d[i] -= cp[i] * next;
        }
    }

    for v in &mut amp[..=ilo] {
        *v = Complex64::new(0.0, 0.0);
    }
    amp[ilo + 1..ihi].copy_from_slice(&ws.rhs[..m]);
    for v in &mut amp[ihi..] {
        *v = Complex64::new(0.0, 0.0);
    }
    Ok(())
}

/// One CN step restricted to `active_interval` (in units of L; endpoints
/// snap to the nearest nodes). Amplitude outside the window is zeroed.
pub fn cn_step(
    state: &GridState,
    dt: f64,
    active_interval: (f64, f64),
) -> Result<GridState, EvolveError> {
    let ilo = state.nearest_node(active_interval.0);
    let ihi = state.nearest_node(active_interval.1);
    let mut out = state.clone();
    let mut ws = Workspace::new(state.len());
    cn_step_in_place(&mut out.amp, ilo, ihi, step_coef(dt, state.dx), &mut ws)?;
    Ok(out)
}

fn snapped(state: &GridState, interval: (f64, f64)) -> (usize, usize) {
    (state.nearest_node(interval.0), state.nearest_node(interval.1))
}

fn support_check(
    state: &GridState,
    interval: (f64, f64),
) -> Result<(), EvolveError> {
    let max = state.max_abs();
    if max == 0.0 {
        return Ok(());
    }
    let (ilo, ihi) = snapped(state, interval);
    for (j, side) in [(ilo, "left"), (ihi, "right")] {
        let got = state.amp[j].norm() / max;
        if got > 1e-6 {
            return Err(EvolveError::SupportViolation { side, x: state.x(j), got });
        }
    }
    Ok(())
}

/// Run a plan and return the state at each requested time.
///
/// Sample times must be sorted, lie on the step grid, and stay within
/// [0, t_end]. Mode conventions: RestrictedStatic and FiniteNZeno require
/// the initial state to already live inside the region (its boundary
/// amplitude is the caller's restriction semantics, checked at 1e-6);
/// MovingBox applies the t = 0 window projection itself and re-projects
/// after every step, after moving the window to the new time.
pub fn evolve(
    initial: &GridState,
    plan: &EvolutionPlan,
    params: &SimParams,
    sample_times: &[f64],
) -> Result<Vec<EvolutionSample>, EvolveError> {
    if !(plan.dt.is_finite() && plan.dt > 0.0) || !(plan.t_end.is_finite() && plan.t_end >= 0.0) {
        return Err(EvolveError::BadPlan(format!(
            "need dt > 0 and t_end >= 0, got dt = {}, t_end = {}",
            plan.dt, plan.t_end
        )));
    }
    match &plan.mode {
        EvolutionMode::Full => {}
        EvolutionMode::RestrictedStatic(r) => {
            if !matches!(r, Region::StaticInterval { .. }) {
                return Err(EvolveError::BadPlan(
                    "RestrictedStatic needs a StaticInterval region".into(),
                ));
            }
            r.validate()?;
        }
        EvolutionMode::MovingBox(r) => {
            if !matches!(r, Region::MovingBox { .. }) {
                return Err(EvolveError::BadPlan("MovingBox needs a MovingBox region".into()));
            }
            r.validate()?;
            params.validate(true)?;
        }
        EvolutionMode::FiniteNZeno(r, n) => {
            if !matches!(r, Region::StaticInterval { .. }) {
                return Err(EvolveError::BadPlan(
                    "FiniteNZeno needs a StaticInterval region".into(),
                ));
            }
            r.validate()?;
            if *n < 1 {
                return Err(EvolveError::BadPlan("FiniteNZeno needs at least one projection".into()));
            }
        }
    }

    let steps = (plan.t_end / plan.dt).round() as usize;
    if ((steps as f64) * plan.dt - plan.t_end).abs() > plan.dt * 1e-6 {
        return Err(EvolveError::BadPlan(format!(
            "t_end = {} is not a whole number of steps of dt = {}",
            plan.t_end, plan.dt
        )));
    }
    let mut sample_idx = Vec::with_capacity(sample_times.len());
    let mut prev = f64::NEG_INFINITY;
    for &t in sample_times {
        if t < prev {
            return Err(EvolveError::BadPlan("sample times must be sorted".into()));
        }
        prev = t;
        let k = (t / plan.dt).round();
        if (k * plan.dt - t).abs() > plan.dt * 1e-6 + 1e-15 {
            return Err(EvolveError::BadPlan(format!(
                "sample time {t} does not lie on the step grid (dt = {})",
                plan.dt
            )));
        }
        let k = k as usize;
        if k > steps {
            return Err(EvolveError::BadPlan(format!(
                "sample time {t} lies beyond t_end = {}",
                plan.t_end
            )));
        }
        sample_idx.push(k);
    }

    let full_interval = (initial.lo, initial.hi());
    let mut state = initial.clone();
    let mut window = match &plan.mode {
        EvolutionMode::Full => {
            support_check(&state, full_interval)?;
            snapped(&state, full_interval)
        }
        EvolutionMode::RestrictedStatic(r) | EvolutionMode::FiniteNZeno(r, _) => {
            let iv = model::region_interval(r, 0.0, params);
            support_check(&state, iv)?;
            match &plan.mode {
                EvolutionMode::FiniteNZeno(..) => snapped(&state, full_interval),
                _ => snapped(&state, iv),
            }
        }
        EvolutionMode::MovingBox(r) => {
            let w = snapped(&state, model::region_interval(r, 0.0, params));
            state.project_to_window(w.0, w.1);
            w
        }
    };
    let zeno_window = match &plan.mode {
        EvolutionMode::FiniteNZeno(r, _) => Some(snapped(&state, model::region_interval(r, 0.0, params))),
        _ => None,
    };
    let proj_steps: BTreeSet<usize> = match &plan.mode {
        EvolutionMode::FiniteNZeno(_, n) => (1..=*n)
            .map(|i| ((i as f64) * (steps as f64) / (*n as f64)).round() as usize)
            .collect(),
        _ => BTreeSet::new(),
    };

    let coef = step_coef(plan.dt, state.dx);
    let mut ws = Workspace::new(state.len());
    let mut out = Vec::with_capacity(sample_idx.len());
    let mut cursor = 0;
    let mut emit = |s: usize, state: &GridState, cursor: &mut usize| -> Result<(), EvolveError> {
        while *cursor < sample_idx.len() && sample_idx[*cursor] == s {
            let n2 = state.norm_sq();
            let t = s as f64 * plan.dt;
            if !n2.is_finite() {
                return Err(EvolveError::NonFinite { t });
            }
            out.push(EvolutionSample { t, state: state.clone(), leaked: 1.0 - n2 });
            *cursor += 1;
        }
        Ok(())
    };

    emit(0, &state, &mut cursor)?;
    for s in 1..=steps {
        cn_step_in_place(&mut state.amp, window.0, window.1, coef, &mut ws)?;
        match &plan.mode {
            EvolutionMode::MovingBox(r) => {
                let t = s as f64 * plan.dt;
                window = snapped(&state, model::region_interval(r, t, params));
                state.project_to_window(window.0, window.1);
            }
            EvolutionMode::FiniteNZeno(..) => {
                if proj_steps.contains(&s) {
                    let (ilo, ihi) = zeno_window.unwrap();
                    state.project_to_window(ilo, ihi);
                }
            }
            _ => {}
        }
        emit(s, &state, &mut cursor)?;
    }
    if !state.norm_sq().is_finite() {
        return Err(EvolveError::NonFinite { t: plan.t_end });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{initial_packet_sample, ClipMode, SimParams};
    use crate::spectral::{overlap_t0_closed, EigenBasis};
    use std::f64::consts::PI;

    fn small_params() -> SimParams {
        SimParams {
            a: 0.1,
            q: 8.0 * PI,
            n_grid: 1025,
            dt_frac: 1.0 / 2048.0,
            ..SimParams::default()
        }
    }

    fn zeno_params() -> SimParams {
        SimParams {
            a: 0.1,
            q: 8.0 * PI,
            n_grid: 2049,
            dt_frac: 1.0 / 20480.0,
            tau_frac: 0.25,
            ..SimParams::default()
        }
    }

    fn run_full(p: &SimParams, t_end: f64, state: &GridState) -> GridState {
        let plan = EvolutionPlan { mode: EvolutionMode::Full, dt: p.dt(), t_end };
        evolve(state, &plan, p, &[t_end]).unwrap().pop().unwrap().state
    }

    #[test]
    fn one_step_conserves_the_norm() {
        let p = small_params();
        let psi = initial_packet_sample(&p, p.n_grid).unwrap();
        let stepped = cn_step(&psi, p.dt(), (-1.0, 1.0)).unwrap();
        assert!((stepped.norm_sq() - psi.norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn zero_state_stays_zero() {
        let z = GridState::zeros(257, -1.0, 1.0);
        let stepped = cn_step(&z, 1e-4, (-1.0, 1.0)).unwrap();
        assert_eq!(stepped.max_abs(), 0.0);
    }

    #[test]
    fn time_reversal_round_trip() {
        let p = small_params();
        let psi = initial_packet_sample(&p, p.n_grid).unwrap();
        let dt = p.dt();
        let mut state = psi.clone();
        for _ in 0..500 {
            state = cn_step(&state, dt, (-1.0, 1.0)).unwrap();
        }
        for _ in 0..500 {
            state = cn_step(&state, -dt, (-1.0, 1.0)).unwrap();
        }
        assert!(state.l2_distance(&psi).unwrap() < 1e-10);
    }

    #[test]
    fn eigenmodes_keep_unit_fidelity() {
        // grid sines are exact eigenvectors of the discrete step, so only
        // roundoff can move the fidelity off 1
        let p = small_params();
        let n_grid = 513;
        let basis = EigenBasis::full(20);
        let dt = p.dt();
        for n in [1usize, 5, 20] {
            let mut state = GridState::zeros(n_grid, -1.0, 1.0);
            for j in 0..n_grid {
                state.amp[j] = Complex64::new(basis.sample(n, state.x(j)), 0.0);
            }
            let state = state.normalized();
            let mut evolved = state.clone();
            for _ in 0..200 {
                evolved = cn_step(&evolved, dt, (-1.0, 1.0)).unwrap();
            }
            let f = inner_product(&state, &evolved).unwrap().norm();
            assert!(f >= 1.0 - 1e-8, "fidelity {f} for mode {n}");
        }
    }

    #[test]
    fn restricted_initial_overlap_matches_closed_form() {
        let p = SimParams::default();
        let psi = initial_packet_sample(&p, p.n_grid).unwrap();
        let mut proj = psi.clone();
        let mid = proj.nearest_node(0.0);
        proj.project_to_window(0, mid);
        let restricted = proj.normalized();
        let got = inner_product(&restricted, &psi).unwrap();
        let want = overlap_t0_closed(p.a).unwrap();
        assert!((got.re - want).abs() < 1e-8 && got.im.abs() < 1e-10, "got {got}");
    }

    #[test]
    fn support_violation_names_the_boundary() {
        let p = SimParams { a: 0.5, ..SimParams::default() };
        let psi = initial_packet_sample(&p, 1025).unwrap();
        let region = Region::static_interval(-1.0, 0.0).unwrap();
        let plan = EvolutionPlan {
            mode: EvolutionMode::RestrictedStatic(region),
            dt: p.dt(),
            t_end: p.dt(),
        };
        match evolve(&psi, &plan, &p, &[]) {
            Err(EvolveError::SupportViolation { side: "right", x, .. }) => {
                assert!(x.abs() < 1e-9)
            }
            other => panic!("expected a support violation, got {other:?}"),
        }
    }

    #[test]
    fn grid_mismatch_is_structural() {
        let a = GridState::zeros(257, -1.0, 1.0);
        let b = GridState::zeros(513, -1.0, 1.0);
        assert!(matches!(inner_product(&a, &b), Err(EvolveError::GridMismatch(_))));
    }

    #[test]
    fn zero_extension_pairs_half_and_full_grids() {
        let full = {
            let p = small_params();
            initial_packet_sample(&p, 1025).unwrap()
        };
        let mut half = GridState::zeros(513, -1.0, 0.0);
        for j in 0..513 {
            half.amp[j] = full.amp[j];
        }
        let direct: Complex64 =
            full.amp[..513].iter().map(|v| v.conj() * v).sum::<Complex64>() * full.dx;
        let got = inner_product(&half, &full).unwrap();
        assert!((got - direct).norm() < 1e-12);
    }

    #[test]
    fn center_tracks_the_classical_path() {
        let p = SimParams {
            n_grid: 2049,
            dt_frac: 1.0 / 4000.0,
            ..SimParams::default()
        };
        let psi = initial_packet_sample(&p, p.n_grid).unwrap();
        let t_cl = p.t_cl();
        let fracs = [0.05, 0.1, 0.15, 0.2, 0.25, 0.5, 0.55, 0.6, 0.65];
        let times: Vec<f64> = fracs.iter().map(|f| f * t_cl).collect();
        let plan = EvolutionPlan { mode: EvolutionMode::Full, dt: p.dt(), t_end: 0.65 * t_cl };
        let samples = evolve(&psi, &plan, &p, &times).unwrap();
        let mut worst = 0.0f64;
        for s in &samples {
            let x_cl = model::classical_position(s.t, &p);
            // skip bounce windows where the classical kink blurs
            if x_cl.abs() > 0.85 {
                continue;
            }
            worst = worst.max((s.state.mean_position() - x_cl).abs());
        }
        assert!(worst <= 0.02, "worst center offset {worst}");
    }

    #[test]
    fn moving_box_clips_little_when_wide() {
        // box of 4.5 packet widths: the initial clip is tiny and the
        // accumulated leak stays at the few-percent level, falling under
        // grid refinement
        let p = SimParams {
            a: 0.1,
            q: 8.0 * PI,
            lambda_frac: 0.45,
            n_grid: 1025,
            dt_frac: 1.0 / 2048.0,
            ..SimParams::default()
        };
        let region = Region::moving_box(0.45, ClipMode::ClipAtWalls).unwrap();
        let t_end = 0.5 * p.t_cl();
        let run = |n_grid: usize, dt_frac: f64| -> (f64, f64) {
            let pp = SimParams { n_grid, dt_frac, ..p };
            let psi = initial_packet_sample(&pp, n_grid).unwrap();
            let plan = EvolutionPlan {
                mode: EvolutionMode::MovingBox(region),
                dt: pp.dt(),
                t_end,
            };
            let samples = evolve(&psi, &plan, &pp, &[0.0, t_end]).unwrap();
            (samples[0].leaked, samples[1].leaked)
        };
        let (clip0, leak_coarse) = run(1025, 1.0 / 2048.0);
        let (_, leak_fine) = run(2049, 1.0 / 4096.0);
        assert!(clip0 <= 1e-5, "initial clip {clip0:.3e}");
        assert!(leak_coarse <= 2e-2, "leak {leak_coarse:.3e}");
        assert!(leak_fine < leak_coarse, "leak did not fall: {leak_coarse:.3e} -> {leak_fine:.3e}");
    }

    #[test]
    fn zeno_ladder_descends_toward_the_restricted_run() {
        let p = zeno_params();
        let region = Region::static_interval(-1.0, 0.0).unwrap();
        let psi = initial_packet_sample(&p, p.n_grid).unwrap();
        let mut proj = psi.clone();
        let mid = proj.nearest_node(0.0);
        proj.project_to_window(0, mid);
        let start = proj.normalized();
        let t_end = p.tau_frac * p.t_cl();
        let dt = p.dt();
        let reference = {
            let plan = EvolutionPlan { mode: EvolutionMode::RestrictedStatic(region), dt, t_end };
            evolve(&start, &plan, &p, &[t_end]).unwrap().pop().unwrap().state
        };
        // restricted run against itself is exactly zero
        assert_eq!(reference.l2_distance(&reference).unwrap(), 0.0);
        let dist = |n: usize| -> f64 {
            let plan = EvolutionPlan { mode: EvolutionMode::FiniteNZeno(region, n), dt, t_end };
            let fin = evolve(&start, &plan, &p, &[t_end]).unwrap().pop().unwrap().state;
            fin.l2_distance(&reference).unwrap()
        };
        let d = [dist(10), dist(100), dist(1000)];
        assert!(d[0] > d[1] && d[1] > d[2], "not monotone: {d:?}");
        assert!(d[2] < d[0] / 5.0, "ratio {}", d[0] / d[2]);
        for (got, want) in d.iter().zip([0.9284, 0.4707, 0.1693]) {
            assert!((got - want).abs() < 2e-3, "distance {got} vs {want}");
        }
    }

    #[test]
    fn full_mode_norm_drift_stays_tiny() {
        let p = small_params();
        let psi = initial_packet_sample(&p, p.n_grid).unwrap();
        let evolved = run_full(&p, 0.5 * p.t_cl(), &psi);
        assert!((evolved.norm_sq() - 1.0).abs() < 1e-10);
    }
}
