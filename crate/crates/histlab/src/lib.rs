//! Simulation of a semi-classical Gaussian packet in a 1D infinite square
//! well under full and region-restricted ("Zeno box") evolution, with the
//! decoherence-functional machinery needed to decide whether coarse-grained
//! history partitions are consistent and what candidate probabilities they
//! carry. A small discrete quantum-measure algebra over finite history
//! spaces rounds out the library.
//!
//! Internal unit convention, fixed once and used everywhere: hbar = M = L = 1,
//! so the well is the interval [-1, 1], the packet width is `a` (= sigma/L),
//! the kick is `q` (= p0 L / hbar), the classical bounce period is
//! T_cl = 4/q, and the energy unit is E = pi^2/2 (the half-well ground
//! state). All public interfaces speak in these dimensionless quantities;
//! times are usually given as fractions of T_cl.

pub mod model;
pub mod spectral;
pub mod propagator;
pub mod histories;
pub mod eventalgebra;
pub mod cli;
