//! Discrete quantum measures on a finite outcome set.
//!
//! An event is a subset of outcomes, stored as a bitmask. A decoherence
//! functional D assigns each pair of events a complex number, additive in
//! both arguments; mu(A) = D(A, A) is the quantum measure. mu is not
//! additive: disjoint events can interfere. It does satisfy the quadratic
//! sum rule, which kills the three-way interference of any pairwise
//! disjoint triple, and that is what separates these measures from
//! arbitrary set functions.
//!
//! Spaces are either rank one (a complex amplitude per outcome, D(A, B) =
//! conj(amp A) * amp B) or a full Hermitian matrix over outcomes.

use num_complex::Complex64;
use thiserror::Error;

/// Bitmask events cap the space at this many outcomes.
pub const MAX_OUTCOMES: usize = 20;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("an event space needs at least one outcome")]
    Empty,
    #[error("{n} outcomes exceed the {max}-outcome limit")]
    TooLarge { n: usize, max: usize },
    #[error("duplicate outcome label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown outcome label {0:?}")]
    UnknownLabel(String),
    #[error("matrix row {i} has length {got}, expected {want}")]
    RaggedMatrix { i: usize, got: usize, want: usize },
    #[error("functional entry ({i}, {j}) breaks Hermitian symmetry by {dev:.3e}")]
    NotHermitian { i: usize, j: usize, dev: f64 },
    #[error("diagonal entry {i} is negative: {value:.3e}")]
    NegativeDiagonal { i: usize, value: f64 },
    #[error("total measure {0:.3e} cannot be normalized to one")]
    UnnormalizableTotal(f64),
    #[error("event mask {bits:#x} has bits outside the {n}-outcome space")]
    OutOfRange { bits: u32, n: usize },
    #[error("events {a} and {b} overlap")]
    NotDisjoint { a: String, b: String },
    #[error("partition misses outcome {0:?}")]
    NotExhaustive(String),
}

/// A subset of the outcome set, bit i for outcome i.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Event {
    pub bits: u32,
}

impl Event {
    pub const EMPTY: Event = Event { bits: 0 };

    pub fn union(self, other: Event) -> Event {
        Event { bits: self.bits | other.bits }
    }

    pub fn intersect(self, other: Event) -> Event {
        Event { bits: self.bits & other.bits }
    }

    pub fn is_disjoint(self, other: Event) -> bool {
        self.bits & other.bits == 0
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn contains(self, outcome: usize) -> bool {
        outcome < 32 && self.bits >> outcome & 1 == 1
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }
}

#[derive(Clone, Debug)]
enum SpaceForm {
    RankOne { alpha: Vec<Complex64> },
    Matrix { d: Vec<Vec<Complex64>> },
}

#[derive(Clone, Debug)]
pub struct EventSpace {
    labels: Vec<String>,
    form: SpaceForm,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PairClass {
    /// disjoint and jointly exhaustive: each is the other's negation
    Contradictory,
    /// disjoint but not exhaustive: never both, possibly neither
    Contrary,
    Neither,
}

fn checked_labels(labels: &[&str]) -> Result<Vec<String>, AlgebraError> {
    if labels.is_empty() {
        return Err(AlgebraError::Empty);
    }
    if labels.len() > MAX_OUTCOMES {
        return Err(AlgebraError::TooLarge { n: labels.len(), max: MAX_OUTCOMES });
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(AlgebraError::DuplicateLabel(l.to_string()));
        }
    }
    Ok(labels.iter().map(|l| l.to_string()).collect())
}

impl EventSpace {
    /// Rank-one space from per-outcome amplitudes, rescaled so the whole
    /// set has measure one. The rescale divides by |sum alpha|, keeping
    /// phases; a near-zero total cannot be normalized.
    pub fn from_amplitudes(
        labels: &[&str],
        alpha: &[Complex64],
    ) -> Result<EventSpace, AlgebraError> {
        let space = EventSpace::from_amplitudes_raw(labels, alpha)?;
        let total: Complex64 = alpha.iter().sum();
        let scale = total.norm();
        if scale < 1e-12 {
            return Err(AlgebraError::UnnormalizableTotal(scale * scale));
        }
        let alpha = alpha.iter().map(|a| a / scale).collect();
        Ok(EventSpace { form: SpaceForm::RankOne { alpha }, ..space })
    }

    /// Rank-one space with the amplitudes taken as given, total measure
    /// whatever it comes out to.
    pub fn from_amplitudes_raw(
        labels: &[&str],
        alpha: &[Complex64],
    ) -> Result<EventSpace, AlgebraError> {
        let labels = checked_labels(labels)?;
        if alpha.len() != labels.len() {
            return Err(AlgebraError::RaggedMatrix { i: 0, got: alpha.len(), want: labels.len() });
        }
        Ok(EventSpace { labels, form: SpaceForm::RankOne { alpha: alpha.to_vec() } })
    }

    /// General space from a functional matrix over outcomes. The matrix
    /// must be Hermitian within 1e-10 with a non-negative diagonal; it is
    /// rescaled so the whole set has measure one.
    pub fn from_matrix(labels: &[&str], d: &[Vec<Complex64>]) -> Result<EventSpace, AlgebraError> {
        let labels = checked_labels(labels)?;
        let n = labels.len();
        if d.len() != n {
            return Err(AlgebraError::RaggedMatrix { i: 0, got: d.len(), want: n });
        }
        for (i, row) in d.iter().enumerate() {
            if row.len() != n {
                return Err(AlgebraError::RaggedMatrix { i, got: row.len(), want: n });
            }
        }
        for i in 0..n {
            for j in i..n {
                let dev = (d[i][j] - d[j][i].conj()).norm();
                if dev > 1e-10 {
                    return Err(AlgebraError::NotHermitian { i, j, dev });
                }
            }
            if d[i][i].re < -1e-12 {
                return Err(AlgebraError::NegativeDiagonal { i, value: d[i][i].re });
            }
        }
        let total: Complex64 = d.iter().flatten().sum();
        if total.re < 1e-12 {
            return Err(AlgebraError::UnnormalizableTotal(total.re));
        }
        let d = d
            .iter()
            .map(|row| row.iter().map(|v| v / total.re).collect())
            .collect();
        Ok(EventSpace { labels, form: SpaceForm::Matrix { d } })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, outcome: usize) -> &str {
        &self.labels[outcome]
    }

    /// The whole outcome set.
    pub fn all(&self) -> Event {
        Event { bits: (1u32 << self.labels.len()) - 1 }
    }

    pub fn complement(&self, e: Event) -> Event {
        Event { bits: !e.bits & self.all().bits }
    }

    pub fn event(&self, labels: &[&str]) -> Result<Event, AlgebraError> {
        let mut bits = 0u32;
        for l in labels {
            let i = self
                .labels
                .iter()
                .position(|have| have == l)
                .ok_or_else(|| AlgebraError::UnknownLabel(l.to_string()))?;
            bits |= 1 << i;
        }
        Ok(Event { bits })
    }

    pub fn event_from_bits(&self, bits: u32) -> Result<Event, AlgebraError> {
        if bits & !self.all().bits != 0 {
            return Err(AlgebraError::OutOfRange { bits, n: self.labels.len() });
        }
        Ok(Event { bits })
    }

    /// "{a, e}" style rendering, outcomes in space order.
    pub fn describe(&self, e: Event) -> String {
        let members: Vec<&str> = (0..self.labels.len())
            .filter(|&i| e.contains(i))
            .map(|i| self.labels[i].as_str())
            .collect();
        format!("{{{}}}", members.join(", "))
    }

    fn amplitude(&self, e: Event, alpha: &[Complex64]) -> Complex64 {
        (0..self.labels.len())
            .filter(|&i| e.contains(i))
            .map(|i| alpha[i])
            .sum()
    }

    /// D(A, B), additive in both arguments.
    pub fn deco_value(&self, a: Event, b: Event) -> Complex64 {
        match &self.form {
            SpaceForm::RankOne { alpha } => {
                self.amplitude(a, alpha).conj() * self.amplitude(b, alpha)
            }
            SpaceForm::Matrix { d } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in (0..self.labels.len()).filter(|&i| a.contains(i)) {
                    for j in (0..self.labels.len()).filter(|&j| b.contains(j)) {
                        acc += d[i][j];
                    }
                }
                acc
            }
        }
    }

    /// mu(A) = D(A, A). Real by Hermiticity.
    pub fn quantum_measure(&self, e: Event) -> f64 {
        self.deco_value(e, e).re
    }

    /// Three-way interference of a pairwise disjoint triple:
    /// mu(ABC) - mu(AB) - mu(AC) - mu(BC) + mu(A) + mu(B) + mu(C).
    /// Identically zero for any functional-backed measure.
    pub fn sum_rule_residual(&self, a: Event, b: Event, c: Event) -> Result<f64, AlgebraError> {
        for (x, y) in [(a, b), (a, c), (b, c)] {
            if !x.is_disjoint(y) {
                return Err(AlgebraError::NotDisjoint {
                    a: self.describe(x),
                    b: self.describe(y),
                });
            }
        }
        let mu = |e: Event| self.quantum_measure(e);
        let i3 = mu(a.union(b).union(c)) - mu(a.union(b)) - mu(a.union(c)) - mu(b.union(c))
            + mu(a)
            + mu(b)
            + mu(c);
        Ok(i3.abs())
    }

    /// Validate that `parts` is a partition (pairwise disjoint, jointly
    /// exhaustive), then test every off-diagonal pair against `tol`.
    pub fn is_consistent_partition(
        &self,
        parts: &[Event],
        tol: f64,
    ) -> Result<bool, AlgebraError> {
        let mut seen = Event::EMPTY;
        for (i, &p) in parts.iter().enumerate() {
            self.event_from_bits(p.bits)?;
            if !seen.is_disjoint(p) {
                let j = parts[..i]
                    .iter()
                    .position(|q| !q.is_disjoint(p))
                    .expect("an earlier overlapping part");
                return Err(AlgebraError::NotDisjoint {
                    a: self.describe(parts[j]),
                    b: self.describe(p),
                });
            }
            seen = seen.union(p);
        }
        if seen != self.all() {
            let missing = (0..self.labels.len())
                .find(|&i| !seen.contains(i))
                .expect("a missing outcome");
            return Err(AlgebraError::NotExhaustive(self.labels[missing].clone()));
        }
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                if self.deco_value(parts[i], parts[j]).norm() > tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Set-theoretic relation of two events.
    pub fn classify_pair(&self, a: Event, b: Event) -> PairClass {
        if !a.is_disjoint(b) {
            PairClass::Neither
        } else if a.union(b) == self.all() {
            PairClass::Contradictory
        } else {
            PairClass::Contrary
        }
    }

    /// All unordered pairs of events that cover the space while each has
    /// measure at most `threshold`. Overlap is allowed. Pairs come back
    /// sorted by bitmask, smaller member first. Cost is one measure per
    /// subset plus a scan over the small-measure subsets.
    pub fn find_zero_covers(&self, threshold: f64) -> Vec<(Event, Event)> {
        let n = self.labels.len();
        let all = self.all();
        let mut small: Vec<Event> = Vec::new();
        match &self.form {
            SpaceForm::RankOne { alpha } => {
                // amp(mask) by adding the lowest set bit's outcome
                let mut amp = vec![Complex64::new(0.0, 0.0); 1usize << n];
                for bits in 1..1u32 << n {
                    let low = bits.trailing_zeros() as usize;
                    amp[bits as usize] = amp[(bits & (bits - 1)) as usize] + alpha[low];
                }
                for bits in 0..1u32 << n {
                    if amp[bits as usize].norm_sqr() <= threshold {
                        small.push(Event { bits });
                    }
                }
            }
            SpaceForm::Matrix { .. } => {
                for bits in 0..1u32 << n {
                    let e = Event { bits };
                    if self.quantum_measure(e) <= threshold {
                        small.push(e);
                    }
                }
            }
        }
        let mut covers = Vec::new();
        for (i, &a) in small.iter().enumerate() {
            for &b in &small[i..] {
                if a.union(b) == all {
                    covers.push((a, b));
                }
            }
        }
        covers.sort();
        covers
    }
}

/// Five outcomes with amplitudes (1, -1, 1, -1, -1): a space holding two
/// measure-zero events whose complements are disjoint, each of measure
/// one. Inferring each complement "almost surely" from its null partner
/// lands on two events that cannot both happen.
pub fn five_element_example() -> EventSpace {
    let one = Complex64::new(1.0, 0.0);
    EventSpace::from_amplitudes(&["a", "b", "c", "d", "e"], &[one, -one, one, -one, -one])
        .expect("fixed amplitudes normalize")
}
