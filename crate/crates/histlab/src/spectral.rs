//! Eigenbases of the full well and of its left half, the packet's expansion
//! coefficients in closed form, their quadrature oracles, and the analytic
//! overlap series A(t) between the restricted and the freely evolved packet.
//!
//! Conventions: u_n(x) = sin(n pi (x + 1)/2) on [-1, 1] and
//! v_k(x) = sqrt(2) sin(k pi x) on [-1, 0], both unit norm. E = pi^2/2 is
//! the half-well ground-state energy; E_n = (n^2/4) E for the full well and
//! E_k = k^2 E for the half well, so even full modes are degenerate with
//! half modes (E_2l = E_l). That degeneracy is what makes the even part of
//! the overlap series time independent.

mod cerf;

use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

use crate::model::{self, SimParams};
use crate::propagator::GridState;

/// pi^2/2, the energy quantum every eigenvalue is a multiple of.
pub const ENERGY_UNIT: f64 = PI * PI / 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("mode index must be at least 1, got {0}")]
    ModeIndex(usize),
    #[error("packet width a must be finite and positive, got {0}")]
    BadWidth(f64),
    #[error("truncation too coarse: Parseval deficit {deficit:.3e} exceeds 1e-4 at n_modes = {n_modes}")]
    Truncation { deficit: f64, n_modes: usize },
    #[error("the closed-form series needs the canonical center x0 = -1/2, got {0}")]
    NonCanonicalCenter(f64),
    #[error("grid alignment: {0}")]
    GridAlignment(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Well {
    Full,
    Half,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EigenBasis {
    pub well: Well,
    pub n_modes: usize,
}

impl EigenBasis {
    pub fn full(n_modes: usize) -> EigenBasis {
        EigenBasis { well: Well::Full, n_modes }
    }

    pub fn half(n_modes: usize) -> EigenBasis {
        EigenBasis { well: Well::Half, n_modes }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self.well {
            Well::Full => (-1.0, 1.0),
            Well::Half => (-1.0, 0.0),
        }
    }

    /// Mode n at position x (1-indexed).
    pub fn sample(&self, n: usize, x: f64) -> f64 {
        match self.well {
            Well::Full => f64::sin(n as f64 * PI * (x + 1.0) / 2.0),
            Well::Half => SQRT_2 * f64::sin(n as f64 * PI * x),
        }
    }
}

pub fn eigen_energy(basis: EigenBasis, n: usize) -> Result<f64, SpectralError> {
    if n < 1 {
        return Err(SpectralError::ModeIndex(n));
    }
    let nn = (n * n) as f64;
    Ok(match basis.well {
        Well::Full => nn / 4.0 * ENERGY_UNIT,
        Well::Half => nn * ENERGY_UNIT,
    })
}

/// Expansion coefficients of the packet in one basis, 1-indexed modes.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    pub basis: EigenBasis,
    pub values: Vec<Complex64>,
}

impl CoefficientSet {
    pub fn get(&self, n: usize) -> Complex64 {
        self.values[n - 1]
    }

    /// 1 - sum |c_n|^2; how much unit norm the truncation fails to carry.
    pub fn parseval_deficit(&self) -> f64 {
        1.0 - self.values.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

fn check_width(a: f64) -> Result<(), SpectralError> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(SpectralError::BadWidth(a))
    }
}

/// c_n = <u_n|Psi(0)> for the canonical packet (center -1/2, kick q).
///
/// Writing the sine as exponentials and completing the square turns each
/// wall contribution into scaled_erf evaluated at the wall distance over
/// 2a, with the beta = q +/- n pi/2 momentum offsets in the imaginary
/// argument. Every factor is bounded, so the expression cannot overflow
/// for any mode index or width.
pub fn coeff_full_closed(n: usize, a: f64, q: f64) -> Result<Complex64, SpectralError> {
    if n < 1 {
        return Err(SpectralError::ModeIndex(n));
    }
    check_width(a)?;
    let amp = model::normalization_at(a, -0.5);
    let x1 = 1.0 / (4.0 * a);
    let x3 = 3.0 / (4.0 * a);
    let es = |beta: f64| cerf::scaled_erf(x3, a * beta).conj() + cerf::scaled_erf(x1, a * beta);
    let bp = q + n as f64 * PI / 2.0;
    let bm = q - n as f64 * PI / 2.0;
    let ph = Complex64::from_polar(1.0, n as f64 * PI / 4.0);
    let pref = Complex64::new(0.0, -0.5) * (amp * a * PI.sqrt());
    Ok(pref * (ph * es(bp) - ph.conj() * es(bm)))
}

/// b_k = <v_k|Psi_r(0)> for the packet truncated and renormalized on
/// [-1, 0]. Both walls sit half a well from the center, so the two wall
/// terms are conjugates and each bracket is real.
pub fn coeff_restricted_closed(k: usize, a: f64, q: f64) -> Result<Complex64, SpectralError> {
    if k < 1 {
        return Err(SpectralError::ModeIndex(k));
    }
    check_width(a)?;
    let b0 = model::restricted_normalization(a);
    let x1 = 1.0 / (4.0 * a);
    let es = |beta: f64| 2.0 * cerf::scaled_erf(x1, a * beta).re;
    let bp = q + k as f64 * PI;
    let bm = q - k as f64 * PI;
    let ph = Complex64::from_polar(1.0, -(k as f64) * PI / 2.0);
    let pref = Complex64::new(0.0, -0.5) * (b0 * SQRT_2 * a * PI.sqrt());
    Ok(pref * (Complex64::new(es(bp), 0.0) * ph - Complex64::new(es(bm), 0.0) * ph.conj()))
}

/// All closed-form coefficients of one basis.
pub fn closed_coefficients(basis: EigenBasis, a: f64, q: f64) -> Result<CoefficientSet, SpectralError> {
    let values = (1..=basis.n_modes)
        .map(|n| match basis.well {
            Well::Full => coeff_full_closed(n, a, q),
            Well::Half => coeff_restricted_closed(n, a, q),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CoefficientSet { basis, values })
}

fn node_at(state: &GridState, x: f64) -> Result<usize, SpectralError> {
    let j = (x - state.lo) / state.dx;
    let r = j.round();
    if (j - r).abs() > 1e-6 || r < 0.0 || r as usize >= state.len() {
        return Err(SpectralError::GridAlignment(format!(
            "no grid node at x = {x} (dx = {})",
            state.dx
        )));
    }
    Ok(r as usize)
}

/// Composite Simpson; an odd interval count gets a 3/8 cell at the end.
/// This is the independent oracle rule, deliberately different from the
/// trapezoid rule the propagator states are normalized under.
pub fn simpson(values: &[Complex64], dx: f64) -> Complex64 {
    let m = values.len() - 1;
    if m == 0 {
        return Complex64::new(0.0, 0.0);
    }
    if m == 1 {
        return (values[0] + values[1]) * (dx / 2.0);
    }
    let m13 = if m % 2 == 0 { m } else { m - 3 };
    let mut acc = Complex64::new(0.0, 0.0);
    if m13 > 0 {
        let mut s = values[0] + values[m13];
        for j in (1..m13).step_by(2) {
            s += 4.0 * values[j];
        }
        for j in (2..m13).step_by(2) {
            s += 2.0 * values[j];
        }
        acc += s * (dx / 3.0);
    }
    if m13 < m {
        let v = &values[m13..];
        acc += (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]) * (3.0 * dx / 8.0);
    }
    acc
}

/// <mode n|packet> by Simpson quadrature over the basis well. The packet
/// grid must put nodes on the well boundaries.
pub fn coeff_numeric(basis: EigenBasis, n: usize, packet: &GridState) -> Result<Complex64, SpectralError> {
    if n < 1 {
        return Err(SpectralError::ModeIndex(n));
    }
    let (blo, bhi) = basis.bounds();
    let j0 = node_at(packet, blo)?;
    let j1 = node_at(packet, bhi)?;
    let values: Vec<Complex64> = (j0..=j1)
        .map(|j| basis.sample(n, packet.x(j)) * packet.amp[j])
        .collect();
    Ok(simpson(&values, packet.dx))
}

fn cos_pi(l: usize) -> f64 {
    if l % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// I_nk = sqrt(2) Int_{-1}^{0} u_n v_k dx in closed form. Even n couples
/// only to its degenerate partner k = n/2; odd n couples to every k through
/// odd-integer denominators, so there are no poles.
pub fn overlap_integral_ink(n: usize, k: usize) -> Result<f64, SpectralError> {
    if n < 1 {
        return Err(SpectralError::ModeIndex(n));
    }
    if k < 1 {
        return Err(SpectralError::ModeIndex(k));
    }
    Ok(if n % 2 == 0 {
        let l = n / 2;
        if k == l {
            SQRT_2 * 0.5 * cos_pi(l)
        } else {
            0.0
        }
    } else {
        let l = (n - 1) / 2;
        let kf = k as f64;
        let dm = 2.0 * (kf - l as f64) - 1.0;
        let dp = 2.0 * (kf + l as f64) + 1.0;
        SQRT_2 * (-4.0 * kf * cos_pi(l)) / (PI * dm * dp)
    })
}

/// A(0) = <Psi_r(0)|Psi(0)> in closed form: the cross-normalization of the
/// shared Gaussian mass on [-1, 0].
pub fn overlap_t0_closed(a: f64) -> Result<f64, SpectralError> {
    check_width(a)?;
    let s = 2.0 * SQRT_2 * a;
    let e1 = libm::erf(1.0 / s);
    let e3 = libm::erf(3.0 / s);
    Ok(SQRT_2 * e1.sqrt() / (e1 + e3).sqrt())
}

/// A(t) sampled at fractions of T_cl.
#[derive(Clone, Debug)]
pub struct OverlapSeries {
    /// fractions of T_cl
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// The overlap curve from the double eigenseries
/// A(t) = A(0) + sum conj(b_k) c_n I_nk (e^{i (E_k - E_n) t} - 1),
/// where only odd n contribute time dependence (even n is degenerate with
/// its half-well partner). Terms are summed in a fixed order so repeated
/// runs are bit-identical.
pub fn overlap_series_spectral(params: &SimParams, tau_fracs: &[f64]) -> Result<OverlapSeries, SpectralError> {
    if (params.x0_frac + 0.5).abs() > 1e-12 {
        return Err(SpectralError::NonCanonicalCenter(params.x0_frac));
    }
    check_width(params.a)?;
    let n_modes = params.n_modes;
    let c = closed_coefficients(EigenBasis::full(n_modes), params.a, params.q)?;
    let b = closed_coefficients(EigenBasis::half(n_modes / 2), params.a, params.q)?;
    for set in [&c, &b] {
        let deficit = set.parseval_deficit();
        if deficit > 1e-4 {
            return Err(SpectralError::Truncation { deficit, n_modes });
        }
    }
    let a0 = overlap_t0_closed(params.a)?;

    // weight and phase rate per (l, k) term, n = 2l + 1; rate is the phase
    // advance per unit tau_frac
    let k_max = n_modes / 2;
    let l_max = (n_modes - 1) / 2;
    let mut weights = Vec::with_capacity((l_max + 1) * k_max);
    let mut rates = Vec::with_capacity(weights.capacity());
    for l in 0..=l_max {
        let n = 2 * l + 1;
        for k in 1..=k_max {
            let w = b.get(k).conj() * c.get(n) * overlap_integral_ink(n, k)?;
            weights.push(w);
            rates.push(PI * PI * ((4 * k * k) as f64 - (n * n) as f64) / (2.0 * params.q));
        }
    }

    let values = tau_fracs
        .iter()
        .map(|&tau| {
            let mut acc = Complex64::new(a0, 0.0);
            for (w, rate) in weights.iter().zip(&rates) {
                let ph = Complex64::from_polar(1.0, rate * tau);
                acc += w * (ph - Complex64::new(1.0, 0.0));
            }
            acc
        })
        .collect();
    Ok(OverlapSeries { times: tau_fracs.to_vec(), values })
}

/// Rebuild the wavefunction at absolute time t from one coefficient set,
/// on n_grid nodes across the basis well.
pub fn reconstruct_wavefunction(coeffs: &CoefficientSet, t: f64, n_grid: usize) -> GridState {
    let (lo, hi) = coeffs.basis.bounds();
    let mut state = GridState::zeros(n_grid, lo, hi);
    let phases: Vec<Complex64> = (1..=coeffs.basis.n_modes)
        .map(|n| {
            let e = eigen_energy(coeffs.basis, n).expect("mode index starts at 1");
            Complex64::from_polar(1.0, -e * t)
        })
        .collect();
    for j in 0..n_grid {
        let x = state.x(j);
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, ph) in (1..=coeffs.basis.n_modes).zip(&phases) {
            acc += coeffs.get(n) * ph * coeffs.basis.sample(n, x);
        }
        state.amp[j] = acc;
    }
    // the series vanishes at the walls analytically; pin the roundoff
    state.amp[0] = Complex64::new(0.0, 0.0);
    state.amp[n_grid - 1] = Complex64::new(0.0, 0.0);
    state
}

/// Packet sampled straight from the closed form, no wall clamp and no
/// renormalization. Quadrature against these samples isolates the closed
/// coefficients from grid-preparation effects.
pub fn analytic_packet(p: &SimParams, n_grid: usize) -> GridState {
    let mut s = GridState::zeros(n_grid, -1.0, 1.0);
    for j in 0..n_grid {
        s.amp[j] = crate::model::packet_value(p, s.x(j));
    }
    s
}

/// Same, for the renormalized left-half restriction.
pub fn analytic_restricted(p: &SimParams, n_grid: usize) -> GridState {
    let mut s = GridState::zeros(n_grid, -1.0, 1.0);
    for j in 0..n_grid {
        s.amp[j] = crate::model::restricted_packet_value(p, s.x(j));
    }
    s
}
