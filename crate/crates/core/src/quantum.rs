// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-system quantum kinematics.
//!
//! Every photon crossing the chip sees a single time-independent effective
//! Hamiltonian `H` (the physical Hamiltonian times the transit time over ħ),
//! so the time-ordered propagator collapses to `U = exp(-i H)`. States are
//! amplitude vectors over the waveguide modes and measurement returns the
//! output power split.
//!
//! All types are small value types; two-mode objects live inline without
//! heap allocation because the device simulator builds one Hamiltonian per
//! simulator sample.

use nalgebra::DMatrix;
use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on `‖ψ‖ = 1`.
pub const NORM_TOL: f64 = 1e-10;
/// Tolerance on `H = H†`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `Σ p = 1`.
pub const PROB_SUM_TOL: f64 = 1e-12;

type Amplitudes = SmallVec<[C64; 2]>;
type Entries = SmallVec<[C64; 4]>;

/// Pure state as a unit-norm amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Amplitudes,
}

impl QuantumState {
    pub fn new(amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Invariant("state must have at least one mode".into()));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Invariant(format!("state norm {norm} is not 1")));
        }
        Ok(Self {
            amplitudes: amplitudes.into(),
        })
    }

    /// Computational basis state `|k⟩` in an `n`-mode space.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::Dimension {
                expected: n,
                actual: k + 1,
            });
        }
        let mut amplitudes: Amplitudes = smallvec::smallvec![C64::new(0.0, 0.0); n];
        amplitudes[k] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// State with real non-negative amplitudes `√p_k`, i.e. light injected
    /// in phase with the given power split.
    pub fn from_distribution(p: &ProbabilityDistribution) -> Self {
        let amplitudes = p.probs().iter().map(|&q| C64::new(q.sqrt(), 0.0)).collect();
        let mut state = Self { amplitudes };
        state.renormalize();
        state
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn renormalize(&mut self) {
        let n = self.norm();
        for a in &mut self.amplitudes {
            *a /= n;
        }
    }
}

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
struct SquareMatrix {
    dim: usize,
    entries: Entries,
}

impl SquareMatrix {
    fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Ok(Self {
            dim,
            entries: entries.into(),
        })
    }

    fn identity(dim: usize) -> Self {
        let mut entries: Entries = smallvec::smallvec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }
}

/// Dimensionless Hermitian effective Hamiltonian (physical `H·t/ħ`).
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian(SquareMatrix);

impl EffectiveHamiltonian {
    /// Builds from row-major entries, rejecting non-Hermitian input.
    pub fn new(dim: usize, entries: &[C64]) -> Result<Self> {
        let m = SquareMatrix::from_rows(dim, entries)?;
        for i in 0..dim {
            for j in i..dim {
                let defect = (m.at(i, j) - m.at(j, i).conj()).norm();
                if !defect.is_finite() || defect > HERMITIAN_TOL {
                    return Err(Error::Invariant(format!(
                        "hamiltonian not hermitian at ({i},{j}): defect {defect:e}"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    /// Real symmetric 2×2 Hamiltonian `[[d1, c], [c, d2]]`.
    pub fn two_mode(d1: f64, d2: f64, coupling: f64) -> Result<Self> {
        let re = |x: f64| C64::new(x, 0.0);
        Self::new(2, &[re(d1), re(coupling), re(coupling), re(d2)])
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0.at(row, col)
    }

    pub fn entries(&self) -> &[C64] {
        &self.0.entries
    }

    /// `H + c·I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.dim {
            m.entries[i * m.dim + i] += c;
        }
        Self(m)
    }
}

/// Unitary propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator(SquareMatrix);

impl UnitaryOperator {
    pub fn identity(dim: usize) -> Self {
        Self(SquareMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0.at(row, col)
    }

    pub fn entries(&self) -> &[C64] {
        &self.0.entries
    }

    /// Largest elementwise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.at(k, i).conj() * self.at(k, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> C64 {
        self.0.at(row, col)
    }
}

/// Output power split over the modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    probs: SmallVec<[f64; 2]>,
}

impl ProbabilityDistribution {
    pub fn new(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Invariant("empty distribution".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0) {
            return Err(Error::Invariant(format!("probability {p} outside [0,1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::Invariant(format!("probabilities sum to {sum}")));
        }
        Ok(Self {
            probs: probs.into(),
        })
    }

    /// Two-mode distribution `[alpha, 1 - alpha]`.
    pub fn two_mode(alpha: f64) -> Result<Self> {
        Self::new(&[alpha, 1.0 - alpha])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// `exp(-i H)` for Hermitian `H`.
///
/// Two-mode Hamiltonians use the closed form: writing
/// `H = h0·I + hx·σx + hy·σy + hz·σz` and `r = |(hx, hy, hz)|`,
/// `exp(-iH) = e^{-i h0} (cos r·I - i sin r·(h·σ)/r)`. Larger dimensions go
/// through a Hermitian eigendecomposition `H = V diag(λ) V†`.
pub fn unitary_from_hamiltonian(h: &EffectiveHamiltonian) -> UnitaryOperator {
    match h.dim() {
        1 => {
            let phase = C64::new(0.0, -h.entry(0, 0).re).exp();
            UnitaryOperator(SquareMatrix {
                dim: 1,
                entries: smallvec::smallvec![phase],
            })
        }
        2 => unitary_two_mode(h),
        _ => unitary_by_eigendecomposition(h),
    }
}

fn unitary_two_mode(h: &EffectiveHamiltonian) -> UnitaryOperator {
    let a = h.entry(0, 0).re;
    let d = h.entry(1, 1).re;
    let off = h.entry(0, 1); // hx - i hy
    let h0 = 0.5 * (a + d);
    let hz = 0.5 * (a - d);
    let r = (hz * hz + off.norm_sqr()).sqrt();
    let (s, c) = r.sin_cos();
    // sin(r)/r → 1 as r → 0
    let sinc = if r > 1e-8 { s / r } else { 1.0 - r * r / 6.0 };
    let global = C64::new(0.0, -h0).exp();
    let mi = C64::new(0.0, -1.0);
    let u00 = C64::new(c, 0.0) + mi * sinc * hz;
    let u11 = C64::new(c, 0.0) - mi * sinc * hz;
    let u01 = mi * sinc * off;
    let u10 = mi * sinc * off.conj();
    UnitaryOperator(SquareMatrix {
        dim: 2,
        entries: smallvec::smallvec![global * u00, global * u01, global * u10, global * u11],
    })
}

fn unitary_by_eigendecomposition(h: &EffectiveHamiltonian) -> UnitaryOperator {
    let n = h.dim();
    let m = DMatrix::from_fn(n, n, |i, j| h.entry(i, j));
    let eig = m.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = eig.eigenvalues.map(|lambda| C64::new(0.0, -lambda).exp());
    let mut entries: Entries = SmallVec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += v[(i, k)] * phases[k] * v[(j, k)].conj();
            }
            entries.push(acc);
        }
    }
    UnitaryOperator(SquareMatrix { dim: n, entries })
}

/// `U·ψ`.
pub fn evolve(u: &UnitaryOperator, psi: &QuantumState) -> Result<QuantumState> {
    let n = u.dim();
    if psi.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: psi.dim(),
        });
    }
    let amplitudes = (0..n)
        .map(|i| {
            psi.amplitudes
                .iter()
                .enumerate()
                .map(|(k, a)| u.at(i, k) * a)
                .sum::<C64>()
        })
        .collect();
    Ok(QuantumState { amplitudes })
}

/// Projective measurement in the mode basis: `p_k = |ψ_k|²`.
pub fn measure(psi: &QuantumState) -> ProbabilityDistribution {
    let mut probs: SmallVec<[f64; 2]> = psi.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    // Rounding can leave the sum a few ulps from 1; fold the residue back so
    // the distribution invariant holds exactly.
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p = (*p / sum).clamp(0.0, 1.0);
    }
    ProbabilityDistribution { probs }
}

/// Classical fidelity `(Σ_k √(p_k q_k))² × 100`, in percent.
pub fn fidelity(achieved: &ProbabilityDistribution, target: &ProbabilityDistribution) -> Result<f64> {
    if achieved.len() != target.len() {
        return Err(Error::Dimension {
            expected: target.len(),
            actual: achieved.len(),
        });
    }
    Ok(fidelity_unchecked(achieved.probs(), target.probs()))
}

/// Fidelity for already-validated slices; the simulator hot loops use this.
#[inline]
pub(crate) fn fidelity_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let overlap: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    (overlap * overlap * 100.0).min(100.0)
}

/// Two-mode fidelity from first-mode powers only.
#[inline]
pub fn fidelity_two_mode(alpha: f64, alpha_target: f64) -> f64 {
    fidelity_unchecked(&[alpha, 1.0 - alpha], &[alpha_target, 1.0 - alpha_target])
}
