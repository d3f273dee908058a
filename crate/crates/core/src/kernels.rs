//! One-sided regularized delta profiles.
//!
//! Every profile is supported on `[0, ε)` and has unit mass on the half line,
//! matching `∫₀^∞ δ(t) g(t) dt = g(0)`. The codimension-2 weight comes in two
//! flavours: `ratio`, the literal `δ_ε(ρ)/(2πρ)` with a floor on `ρ`, and
//! `radial`, the same profile shape renormalized into a 2-D radial bump of
//! unit polar mass.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// `(2/ε)(1 − t/ε)`, continuous only on the open support.
    Hat,
    /// `(1/ε)(1 + cos(πt/ε))`.
    Cosine,
    /// `15/(8ε) (1 − (t/ε)²)²`.
    Quartic,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [KernelFamily::Hat, KernelFamily::Cosine, KernelFamily::Quartic];

    /// Unnormalized shape on `u = t/ε ∈ [0, 1)`.
    fn shape(self, u: f64) -> f64 {
        match self {
            KernelFamily::Hat => 1.0 - u,
            KernelFamily::Cosine => 1.0 + (PI * u).cos(),
            KernelFamily::Quartic => {
                let w = 1.0 - u * u;
                w * w
            }
        }
    }

    /// `∫₀¹ shape(u) du`.
    fn line_moment(self) -> f64 {
        match self {
            KernelFamily::Hat => 0.5,
            KernelFamily::Cosine => 1.0,
            KernelFamily::Quartic => 8.0 / 15.0,
        }
    }

    /// `∫₀¹ shape(u) u du`.
    fn polar_moment(self) -> f64 {
        match self {
            KernelFamily::Hat => 1.0 / 6.0,
            KernelFamily::Cosine => 0.5 - 2.0 / (PI * PI),
            KernelFamily::Quartic => 1.0 / 6.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Hat => "hat",
            KernelFamily::Cosine => "cosine",
            KernelFamily::Quartic => "quartic",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hat" => Ok(KernelFamily::Hat),
            "cosine" => Ok(KernelFamily::Cosine),
            "quartic" | "quartic-smooth" => Ok(KernelFamily::Quartic),
            other => Err(Error::Usage(format!("unknown kernel `{other}` (hat|cosine|quartic)"))),
        }
    }
}

/// How the 1-D profile becomes a codimension-2 weight `w(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum WeightMode {
    /// `C_k(ε)·shape(ρ/ε)` with `∫₀^ε w(ρ) 2πρ dρ = 1`.
    Radial,
    /// `δ_ε(ρ) / (2π max(ρ, rho_floor))`.
    Ratio { rho_floor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub family: KernelFamily,
    pub epsilon: f64,
}

impl Kernel {
    pub fn new(family: KernelFamily, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Domain(format!("kernel support must be positive, got {epsilon}")));
        }
        Ok(Kernel { family, epsilon })
    }

    /// The profile `δ_ε(t)`; zero for `t < 0` and `t ≥ ε`.
    pub fn eval(&self, t: f64) -> f64 {
        if !(t >= 0.0 && t < self.epsilon) {
            return 0.0;
        }
        self.family.shape(t / self.epsilon) / (self.family.line_moment() * self.epsilon)
    }

    /// Two-sided variant `δ_ε(|t|)/2`, unit mass on the whole line.
    pub fn eval_symmetric(&self, t: f64) -> f64 {
        0.5 * self.eval(t.abs())
    }

    /// Half-line mass by adaptive Gauss–Legendre quadrature over `[0, ε]`.
    pub fn mass(&self) -> f64 {
        quad::refine_gl5(&|t| self.eval(t), 0.0, self.epsilon, 1, 1e-15, 12)
            .unwrap_or_else(|e| match e {
                Error::Accuracy { last, .. } => last,
                _ => unreachable!(),
            })
    }

    /// Normalization constant of the radial mode.
    pub fn radial_constant(&self) -> f64 {
        1.0 / (2.0 * PI * self.epsilon * self.epsilon * self.family.polar_moment())
    }

    pub fn radial2d_weight(&self, rho: f64, mode: WeightMode) -> Result<f64> {
        if !(rho >= 0.0) {
            return Err(Error::Domain(format!("distance must be non-negative, got {rho}")));
        }
        Ok(self.radial2d_weight_unchecked(rho, mode))
    }

    #[inline]
    pub(crate) fn radial2d_weight_unchecked(&self, rho: f64, mode: WeightMode) -> f64 {
        if rho >= self.epsilon {
            return 0.0;
        }
        match mode {
            WeightMode::Radial => self.radial_constant() * self.family.shape(rho / self.epsilon),
            WeightMode::Ratio { rho_floor } => self.eval(rho) / (2.0 * PI * rho.max(rho_floor)),
        }
    }
}

pub fn kernel_eval(k: &Kernel, t: f64) -> f64 {
    k.eval(t)
}

pub fn kernel_mass(k: &Kernel) -> f64 {
    k.mass()
}

pub fn radial2d_weight(k: &Kernel, rho: f64, mode: WeightMode) -> Result<f64> {
    k.radial2d_weight(rho, mode)
}
