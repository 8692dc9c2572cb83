use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::numerics::{ONE, ZERO};
use crate::{Error, Result};

/// A 2×2 complex matrix, row-major.
pub type Qsp2 = [[Complex64; 2]; 2];

/// Fraction of `max |P|` that the phase finder targets.
pub const SAFETY_SCALE: f64 = 0.9;

const CONVERSION_TOL: f64 = 1e-10;

/// Signal-operator convention of a phase sequence.
///
/// `W_X(a) = [[a, i√(1−a²)], [i√(1−a²), a]]` and
/// `R(a) = [[a, √(1−a²)], [√(1−a²), −a]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    WX,
    Reflection,
}

/// QSP phases `φ_0 … φ_d` for `e^{iφ_0 Z} Π_k S(a) e^{iφ_k Z}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSequence {
    convention: Convention,
    phases: Vec<f64>,
    beta: f64,
    kappa: Option<f64>,
    epsilon: Option<f64>,
}

impl PhaseSequence {
    pub fn new(convention: Convention, phases: Vec<f64>, beta: f64) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::invalid("a phase sequence needs at least one phase"));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("phases must be finite"));
        }
        if !(beta > 0.0 && beta <= 1.0 + 1e-12) {
            return Err(Error::invalid("beta must lie in (0, 1]"));
        }
        Ok(Self { convention, phases, beta, kappa: None, epsilon: None })
    }

    /// Records the `(κ, ε)` the sequence was built for.
    pub fn with_source(mut self, kappa: f64, epsilon: f64) -> Self {
        self.kappa = Some(kappa);
        self.epsilon = Some(epsilon);
        self
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn degree(&self) -> usize {
        self.phases.len() - 1
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kappa(&self) -> Option<f64> {
        self.kappa
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn unitary(&self, a: f64) -> Qsp2 {
        qsp_unitary(self.convention, &self.phases, a)
    }

    /// `⟨0|U(a)|0⟩`.
    pub fn zero_amplitude(&self, a: f64) -> Complex64 {
        self.unitary(a)[0][0]
    }

    /// `⟨+|U(a)|+⟩`.
    pub fn plus_amplitude(&self, a: f64) -> Complex64 {
        let u = self.unitary(a);
        (u[0][0] + u[0][1] + u[1][0] + u[1][1]) * 0.5
    }

    /// The polynomial the sequence was fitted to: `Re⟨0|U_{W_X}|0⟩`, which
    /// equals `Re⟨+|U_{W_X}|+⟩` for symmetric phases. Reflection sequences are
    /// first mapped back through the `(−i)^d` relation.
    pub fn realized(&self, a: f64) -> f64 {
        let z = self.zero_amplitude(a);
        match self.convention {
            Convention::WX => z.re,
            Convention::Reflection => (z * i_pow(self.degree())).re,
        }
    }
}

/// `i^d`.
pub(crate) fn i_pow(d: usize) -> Complex64 {
    match d % 4 {
        0 => ONE,
        1 => Complex64::new(0.0, 1.0),
        2 => -ONE,
        _ => Complex64::new(0.0, -1.0),
    }
}

pub(crate) fn mul2(a: &Qsp2, b: &Qsp2) -> Qsp2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub(crate) fn phase2(phi: f64) -> Qsp2 {
    let e = Complex64::from_polar(1.0, phi);
    [[e, ZERO], [ZERO, e.conj()]]
}

pub(crate) fn signal(convention: Convention, a: f64) -> Qsp2 {
    let s = (1.0 - a * a).max(0.0).sqrt();
    let a = Complex64::new(a, 0.0);
    match convention {
        Convention::WX => {
            let is = Complex64::new(0.0, s);
            [[a, is], [is, a]]
        }
        Convention::Reflection => {
            let s = Complex64::new(s, 0.0);
            [[a, s], [s, -a]]
        }
    }
}

/// `e^{iφ_0 Z} Π_{k=1}^{d} S(a) e^{iφ_k Z}`.
pub fn qsp_unitary(convention: Convention, phases: &[f64], a: f64) -> Qsp2 {
    let w = signal(convention, a);
    let mut u = phase2(phases.first().copied().unwrap_or(0.0));
    for &phi in phases.iter().skip(1) {
        u = mul2(&mul2(&u, &w), &phase2(phi));
    }
    u
}

/// Max-entry distance between `a` and `b` after removing the best global phase.
pub fn operator_distance(a: &Qsp2, b: &Qsp2) -> f64 {
    let mut tr = ZERO;
    for r in 0..2 {
        for c in 0..2 {
            tr += b[r][c].conj() * a[r][c];
        }
    }
    let g = if tr.norm() > 0.0 { tr / tr.norm() } else { ONE };
    let mut d = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            d = d.max((a[r][c] - g * b[r][c]).norm());
        }
    }
    d
}

/// Maps W_X phases to reflection phases: `φ_0 = φ'_0 − π/4`,
/// `φ_k = φ'_k − π/2` for `0 < k < d`, `φ_d = φ'_d − π/4`. The result obeys
/// `U_R(φ) = (−i)^d U_{W_X}(φ')`, which is checked on `a ∈ {−1, −0.9, …, 1}`.
pub fn convert_phases_reflection(phi_wx: &PhaseSequence) -> Result<PhaseSequence> {
    if phi_wx.convention != Convention::WX {
        return Err(Error::invalid("expected a W_X phase sequence"));
    }
    let d = phi_wx.degree();
    let phases: Vec<f64> = phi_wx
        .phases
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            if d == 0 {
                p
            } else if k == 0 || k == d {
                p - FRAC_PI_4
            } else {
                p - FRAC_PI_2
            }
        })
        .collect();
    let mut worst = 0.0f64;
    for i in 0..=20 {
        let a = -1.0 + 0.1 * i as f64;
        let ur = qsp_unitary(Convention::Reflection, &phases, a);
        let uw = qsp_unitary(Convention::WX, &phi_wx.phases, a);
        worst = worst.max(operator_distance(&ur, &uw));
    }
    if !(worst <= CONVERSION_TOL) {
        return Err(Error::Conversion { distance: worst });
    }
    Ok(PhaseSequence { convention: Convention::Reflection, phases, ..phi_wx.clone() })
}
