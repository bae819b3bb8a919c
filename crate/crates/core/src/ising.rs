//! Chain parameters, quench protocol, momentum grid and 2x2 mode blocks.
//!
//! With periodic boundary conditions and even `N`, the even-parity sector of
//! the transverse-field Ising chain decomposes into independent two-level
//! systems labeled by the positive momenta `k_ℓ = (2ℓ-1)π/N`. Each block is
//! governed by
//!
//! ```text
//! H_k / J = h_z σ^z + h_x σ^x,   h_z = 2(g - cos k),   h_x = 2 sin k.
//! ```
//!
//! Only positive momenta are stored: every per-mode quantity used downstream
//! is even in `k`, so consumers double the per-pair contributions explicitly.
//!
//! Everything here is immutable after construction and all operations are
//! pure functions, safe to call concurrently.

use std::f64::consts::PI;

use crate::error::Error;
use crate::Result;

/// The critical transverse field. Only the `g_c = +1` transition is crossed
/// by the ramp `g(t) = 1 - t/τ_Q`.
pub const CRITICAL_FIELD: f64 = 1.0;

/// Physical constants of the chain: number of spins `N` (even, ≥ 2),
/// ferromagnetic coupling `J > 0` and `ħ > 0`.
///
/// `J` and `ħ` default to 1 but stay explicit so that every closed form can
/// be checked with units in place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    n: usize,
    j: f64,
    hbar: f64,
}

impl ChainParams {
    pub fn new(n: usize, j: f64, hbar: f64) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "number of spins must be even and >= 2, got {n}"
            )));
        }
        if !(j > 0.0) || !j.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling J must be positive, got {j}"
            )));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        Ok(Self { n, j, hbar })
    }

    /// Chain with `J = ħ = 1`.
    pub fn with_spins(n: usize) -> Result<Self> {
        Self::new(n, 1.0, 1.0)
    }

    pub fn spins(&self) -> usize {
        self.n
    }

    pub fn coupling(&self) -> f64 {
        self.j
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

/// The linear ramp `g(t) = 1 - t/τ_Q`, started at `t = -a τ_Q` (with
/// `a ≥ 1`, default 1) and ended at `t = +τ_Q` where `g = 0` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchProtocol {
    tau_q: f64,
    start_factor: f64,
}

impl QuenchProtocol {
    pub fn new(tau_q: f64) -> Result<Self> {
        Self::with_start_factor(tau_q, 1.0)
    }

    pub fn with_start_factor(tau_q: f64, start_factor: f64) -> Result<Self> {
        if !(tau_q > 0.0) || !tau_q.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "quench time must be positive, got {tau_q}"
            )));
        }
        if !(start_factor >= 1.0) || !start_factor.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "start factor must be >= 1, got {start_factor}"
            )));
        }
        Ok(Self {
            tau_q,
            start_factor,
        })
    }

    pub fn tau_q(&self) -> f64 {
        self.tau_q
    }

    pub fn start_factor(&self) -> f64 {
        self.start_factor
    }

    pub fn start_time(&self) -> f64 {
        -self.start_factor * self.tau_q
    }

    pub fn end_time(&self) -> f64 {
        self.tau_q
    }

    /// `g(t) = 1 - t/τ_Q`, defined for all `t`.
    pub fn field(&self, t: f64) -> f64 {
        CRITICAL_FIELD * (1.0 - t / self.tau_q)
    }
}

/// The transverse field along the ramp; free-function form of
/// [`QuenchProtocol::field`].
pub fn magnetic_field(t: f64, protocol: &QuenchProtocol) -> f64 {
    protocol.field(t)
}

/// The `N/2` positive momenta `k_ℓ = (2ℓ-1)π/N`, ascending, all strictly in
/// `(0, π)`. The full momentum set is `{±k_ℓ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    momenta: Vec<f64>,
}

impl ModeGrid {
    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }
}

/// Build the positive-momentum grid for the chain.
pub fn momentum_grid(params: &ChainParams) -> ModeGrid {
    let n = params.spins();
    let momenta = (1..=n / 2)
        .map(|l| (2 * l - 1) as f64 * PI / n as f64)
        .collect();
    ModeGrid { momenta }
}

/// Coefficients `(h_z, h_x)` of `σ^z` and `σ^x` in the mode Hamiltonian
/// `H_k = J (h_z σ^z + h_x σ^x)`: `h_z = 2(g - cos k)`, `h_x = 2 sin k`.
pub fn mode_field_coefficients(k: f64, g: f64) -> (f64, f64) {
    (2.0 * (g - k.cos()), 2.0 * k.sin())
}

/// Instantaneous eigensystem of one 2x2 mode block, in units of `J`.
///
/// Eigenvectors are real unit vectors in the fixed σ^z basis; the phase is
/// fixed so the first component is non-negative, which keeps projections of
/// numerically evolved states deterministic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigensystem {
    /// `E = √(h_z² + h_x²) > 0`; eigenvalues are `±E`.
    pub energy: f64,
    /// Eigenvector with eigenvalue `-E`.
    pub ground: [f64; 2],
    /// Eigenvector with eigenvalue `+E`.
    pub excited: [f64; 2],
}

/// Diagonalize `h_z σ^z + h_x σ^x` at momentum `k` and field `g`.
///
/// `k` must lie strictly inside `(0, π)` so that `h_x = 2 sin k > 0` and the
/// block is never degenerate, whatever `g`.
pub fn instantaneous_eigensystem(k: f64, g: f64) -> Result<Eigensystem> {
    if !(k > 0.0 && k < PI) {
        return Err(Error::InvalidParameter(format!(
            "momentum must lie strictly in (0, pi), got {k}"
        )));
    }
    let (hz, hx) = mode_field_coefficients(k, g);
    let energy = hz.hypot(hx);
    // Pick the branch that avoids cancellation in hz ± E. Both eigenvectors
    // share the same normalization within a branch.
    let (ground, excited) = if hz >= 0.0 {
        let s = energy + hz;
        let norm = (hx * hx + s * s).sqrt();
        ([hx / norm, -s / norm], [s / norm, hx / norm])
    } else {
        let s = energy - hz;
        let norm = (hx * hx + s * s).sqrt();
        ([s / norm, -hx / norm], [hx / norm, s / norm])
    };
    Ok(Eigensystem {
        energy,
        ground,
        excited,
    })
}
