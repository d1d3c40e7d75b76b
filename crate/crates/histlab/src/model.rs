//! Problem definition: dimensionless parameters, the initial Gaussian
//! packet, the classical bouncing path, and the region geometry every
//! coarse-graining is built from.
//!
//! Positions are fractions of L (the well is [-1, 1]), q = p0 L / hbar,
//! and names ending in _frac are fractions of the classical period
//! T_cl = 4/q. All other times are plain internal units.

use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

use crate::propagator::GridState;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{name} must be finite and positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("x0_frac must lie strictly inside (-1, 1), got {0}")]
    CenterOutsideWell(f64),
    #[error("lambda_frac must lie strictly inside (0, 1), got {0}")]
    HalfwidthOutOfRange(f64),
    #[error("moving box needs lambda_frac > 4a, got lambda_frac = {lambda} with 4a = {four_a}")]
    BoxTooNarrow { lambda: f64, four_a: f64 },
    #[error("n_grid must be at least 3, got {0}")]
    GridTooSmall(usize),
    #[error("n_modes must be at least 1, got {0}")]
    NoModes(usize),
    #[error("static interval must satisfy -1 <= lo < hi <= 1, got [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
}

/// Dimensionless problem definition shared by every scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimParams {
    /// packet width sigma/L
    pub a: f64,
    /// kick p0 L / hbar
    pub q: f64,
    /// initial packet center, units of L
    pub x0_frac: f64,
    /// moving-box half-width, units of L
    pub lambda_frac: f64,
    /// spatial nodes across [-1, 1]
    pub n_grid: usize,
    /// time step as a fraction of T_cl
    pub dt_frac: f64,
    /// horizon as a fraction of T_cl
    pub tau_frac: f64,
    /// eigenseries truncation
    pub n_modes: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            a: 0.05,
            q: 40.0 * PI,
            x0_frac: -0.5,
            lambda_frac: 0.125,
            n_grid: 16385,
            dt_frac: 1.0 / 20000.0,
            tau_frac: 0.75,
            n_modes: 320,
        }
    }
}

impl SimParams {
    /// Full validation. Hard violations are errors; conditions that merely
    /// degrade the semi-classical picture come back as warnings.
    pub fn validate(&self, uses_moving_box: bool) -> Result<Vec<String>, ParamError> {
        fn pos(name: &'static str, v: f64) -> Result<(), ParamError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ParamError::NotPositive { name, value: v })
            }
        }
        pos("a", self.a)?;
        pos("q", self.q)?;
        pos("dt_frac", self.dt_frac)?;
        pos("tau_frac", self.tau_frac)?;
        if !self.x0_frac.is_finite() || self.x0_frac <= -1.0 || self.x0_frac >= 1.0 {
            return Err(ParamError::CenterOutsideWell(self.x0_frac));
        }
        if !self.lambda_frac.is_finite() || self.lambda_frac <= 0.0 || self.lambda_frac >= 1.0 {
            return Err(ParamError::HalfwidthOutOfRange(self.lambda_frac));
        }
        if self.n_grid < 3 {
            return Err(ParamError::GridTooSmall(self.n_grid));
        }
        if self.n_modes < 1 {
            return Err(ParamError::NoModes(self.n_modes));
        }
        if uses_moving_box && self.lambda_frac <= 4.0 * self.a {
            return Err(ParamError::BoxTooNarrow {
                lambda: self.lambda_frac,
                four_a: 4.0 * self.a,
            });
        }
        let mut warnings = Vec::new();
        if self.a > 0.2 {
            warnings.push(format!(
                "a = {} is comparable to the well; the semi-classical picture degrades",
                self.a
            ));
        }
        if self.n_grid % 2 == 0 {
            warnings.push(format!(
                "n_grid = {} is even, so x = 0 is not a node and region edges snap half a cell",
                self.n_grid
            ));
        }
        Ok(warnings)
    }

    /// T_cl = 4ML/p0, which is 4/q in internal units.
    pub fn classical_period(&self) -> Result<f64, ParamError> {
        if self.q.is_finite() && self.q > 0.0 {
            Ok(4.0 / self.q)
        } else {
            Err(ParamError::NotPositive { name: "q", value: self.q })
        }
    }

    pub(crate) fn t_cl(&self) -> f64 {
        debug_assert!(self.q > 0.0);
        4.0 / self.q
    }

    pub(crate) fn dt(&self) -> f64 {
        self.t_cl() * self.dt_frac
    }
}

/// A = (sigma sqrt(pi/2) (erf(L/(2 sqrt(2) sigma)) + erf(3L/(2 sqrt(2) sigma))))^(-1/2),
/// as A sqrt(L), for the canonical packet centered at -L/2.
pub fn normalization_constant(a: f64) -> Result<f64, ParamError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(ParamError::NotPositive { name: "a", value: a });
    }
    Ok(normalization_at(a, -0.5))
}

/// Same bracket for an arbitrary center; the closed forms elsewhere fix x0 = -1/2.
pub(crate) fn normalization_at(a: f64, x0: f64) -> f64 {
    let s = SQRT_2 * a;
    let bracket = libm::erf((x0 + 1.0) / s) + libm::erf((1.0 - x0) / s);
    1.0 / (a * (PI / 2.0).sqrt() * bracket).sqrt()
}

/// Normalization of the packet truncated to [-1, 0] (the erf(L/(2 sqrt(2) sigma))
/// normalizer), canonical center.
pub(crate) fn restricted_normalization(a: f64) -> f64 {
    let erf1 = libm::erf(1.0 / (2.0 * SQRT_2 * a));
    1.0 / (a * (2.0 * PI).sqrt() * erf1).sqrt()
}

/// Sample A exp(-(x - x0)^2 / 4a^2) exp(iq(x - x0)) on n_grid nodes across
/// [-1, 1], clamp the wall nodes to zero, then rescale once so the module
/// quadrature rule sees exactly unit norm.
pub fn initial_packet_sample(params: &SimParams, n_grid: usize) -> Result<GridState, ParamError> {
    if !(params.a.is_finite() && params.a > 0.0) {
        return Err(ParamError::NotPositive { name: "a", value: params.a });
    }
    if !params.x0_frac.is_finite() || params.x0_frac <= -1.0 || params.x0_frac >= 1.0 {
        return Err(ParamError::CenterOutsideWell(params.x0_frac));
    }
    if n_grid < 3 {
        return Err(ParamError::GridTooSmall(n_grid));
    }
    let dx = 2.0 / (n_grid - 1) as f64;
    let amp0 = normalization_at(params.a, params.x0_frac);
    let mut amp = vec![Complex64::new(0.0, 0.0); n_grid];
    for (j, v) in amp.iter_mut().enumerate().take(n_grid - 1).skip(1) {
        let y = -1.0 + j as f64 * dx - params.x0_frac;
        let env = amp0 * f64::exp(-y * y / (4.0 * params.a * params.a));
        *v = Complex64::from_polar(env, params.q * y);
    }
    let mut state = GridState { amp, dx, lo: -1.0 };
    let n2 = state.norm_sq();
    if !(n2.is_finite() && n2 > 0.0) {
        return Err(ParamError::NotPositive { name: "packet norm", value: n2 });
    }
    let scale = 1.0 / n2.sqrt();
    for v in &mut state.amp {
        *v *= scale;
    }
    Ok(state)
}

/// Analytic packet value at x, A-normalized, no wall clamp and no discrete
/// rescale. This is the integrand the closed forms integrate, so quadrature
/// oracles sample it directly instead of going through initial_packet_sample.
pub(crate) fn packet_value(params: &SimParams, x: f64) -> Complex64 {
    let y = x - params.x0_frac;
    let env = normalization_at(params.a, params.x0_frac)
        * f64::exp(-y * y / (4.0 * params.a * params.a));
    Complex64::from_polar(env, params.q * y)
}

/// Analytic value of the packet truncated to [-1, 0] and renormalized there
/// (the restricted normalizer), canonical center x0 = -1/2. Zero for x > 0.
pub(crate) fn restricted_packet_value(params: &SimParams, x: f64) -> Complex64 {
    if x > 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let y = x - params.x0_frac;
    let env = restricted_normalization(params.a) * f64::exp(-y * y / (4.0 * params.a * params.a));
    Complex64::from_polar(env, params.q * y)
}

/// Position of the classical bouncing particle at time t, units of L.
/// Unfold to the line (period 4 in u = x0 + q t), then fold back.
pub fn classical_position(t: f64, params: &SimParams) -> f64 {
    let u = params.x0_frac + params.q * t;
    let w = (u + 1.0).rem_euclid(4.0);
    if w <= 2.0 {
        w - 1.0
    } else {
        3.0 - w
    }
}

/// What the moving box does when the classical center gets within a
/// half-width of a wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClipMode {
    /// intersect with the well; the box shrinks down to one half-width
    ClipAtWalls,
    /// hold the box at the wall-touching position until the center returns
    FreezeAtWalls,
}

/// Coarse-graining geometry: the "stay inside" constraint defining a history.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    StaticInterval { lo_frac: f64, hi_frac: f64 },
    MovingBox { halfwidth_frac: f64, clip: ClipMode },
}

impl Region {
    pub fn static_interval(lo_frac: f64, hi_frac: f64) -> Result<Region, ParamError> {
        let r = Region::StaticInterval { lo_frac, hi_frac };
        r.validate()?;
        Ok(r)
    }

    pub fn moving_box(halfwidth_frac: f64, clip: ClipMode) -> Result<Region, ParamError> {
        let r = Region::MovingBox { halfwidth_frac, clip };
        r.validate()?;
        Ok(r)
    }

    pub fn full_well() -> Region {
        Region::StaticInterval { lo_frac: -1.0, hi_frac: 1.0 }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        match *self {
            Region::StaticInterval { lo_frac, hi_frac } => {
                if !(lo_frac.is_finite() && hi_frac.is_finite())
                    || lo_frac < -1.0
                    || hi_frac > 1.0
                    || lo_frac >= hi_frac
                {
                    return Err(ParamError::BadInterval { lo: lo_frac, hi: hi_frac });
                }
            }
            Region::MovingBox { halfwidth_frac, .. } => {
                if !halfwidth_frac.is_finite() || halfwidth_frac <= 0.0 || halfwidth_frac >= 1.0 {
                    return Err(ParamError::HalfwidthOutOfRange(halfwidth_frac));
                }
            }
        }
        Ok(())
    }
}

/// The region's interval at time t, units of L. Always a sub-interval of
/// [-1, 1] with positive length.
pub fn region_interval(region: &Region, t: f64, params: &SimParams) -> (f64, f64) {
    match *region {
        Region::StaticInterval { lo_frac, hi_frac } => (lo_frac, hi_frac),
        Region::MovingBox { halfwidth_frac: l, clip } => {
            let c = classical_position(t, params);
            match clip {
                ClipMode::ClipAtWalls => ((c - l).max(-1.0), (c + l).min(1.0)),
                ClipMode::FreezeAtWalls => {
                    let c = c.clamp(-1.0 + l, 1.0 - l);
                    (c - l, c + l)
                }
            }
        }
    }
}

/// Max |psi| over the region's boundary nodes at time t, relative to the
/// state's own maximum. Zero state reports 0.
pub fn boundary_check(state: &GridState, region: &Region, t: f64, params: &SimParams) -> f64 {
    let (lo, hi) = region_interval(region, t, params);
    let max = state.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    let at = |x: f64| state.amp[state.nearest_node(x)].norm();
    at(lo).max(at(hi)) / max
}
