use serde::{Deserialize, Serialize};

use crate::pct_to_world;

/// How the blend weight between plane and point penetration is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InscriptionVariant {
    /// Kernel weight of the projected previous center.
    Blended,
    /// Weight forced to 0: spheres empty of points only.
    PointOnly,
    /// Weight forced to 1: half-spaces empty.
    PlaneOnly,
}

/// Radius-growth term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MaximalityVariant {
    /// `r − (r_prev + ε)`: same pull on every sphere.
    ConstantPressure,
    /// `1/r`, clamped below at the radius floor.
    InverseRadius,
    /// `r − R_max`, `r_max` in percent of the diagonal.
    TargetRadius { r_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Irls {
    Off,
    /// ℓ¹ reweighting. Inscription residuals are scaled by
    /// `√(δ / max(|ρ_prev|, δ))`; `delta` is in percent of the diagonal and
    /// `epsilon_scale` multiplies ε while reweighting is on.
    L1 { delta: f64, epsilon_scale: f64 },
}

impl Irls {
    pub const DEFAULT_EPSILON_SCALE: f64 = 0.05;
    pub const DEFAULT_DELTA: f64 = 0.05;

    pub fn l1_default() -> Self {
        Irls::L1 {
            delta: Self::DEFAULT_DELTA,
            epsilon_scale: Self::DEFAULT_EPSILON_SCALE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// Center uniform in the bounding box, radius uniform in
    /// `[0.05, 0.5]·diag`, from the pin's own random stream.
    Random,
    /// `c = p − 0.25·diag·n`, `r = 0.25·diag`.
    AlongNormal,
}

/// All tunables. Lengths (`h_blend`, `h_support`, `d_pin`, `epsilon`,
/// `radius_floor`, IRLS `delta`, target radius) are percent of the
/// bounding-box diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// ω₁/ω₂. With the nominal ω₂ = 1 this is the maximality weight.
    pub omega_ratio: f64,
    /// Inscription weight ω₂; 1 unless running an ablation.
    pub omega2: f64,
    pub h_blend: f64,
    pub h_support: f64,
    pub d_pin: f64,
    pub epsilon: f64,
    /// Penalty weight on the pinning barrier; 0 disables pinning.
    pub pin_weight: f64,
    pub max_iters: usize,
    /// Relative Gauss-Newton damping: λ = step_damping · trace(JᵀJ).
    pub step_damping: f64,
    pub radius_floor: f64,
    pub inscription: InscriptionVariant,
    pub maximality: MaximalityVariant,
    pub irls: Irls,
    pub init: InitStrategy,
    pub seed: u64,
}

impl SolverConfig {
    /// Empirical linear defaults in the noise level `sigma_p` (percent).
    pub fn default_params(sigma_p: f64) -> Self {
        assert!(sigma_p >= 0.0, "sigma_p must be non-negative");
        let kernel = 0.74 * sigma_p + 0.49;
        Self {
            omega_ratio: 0.007 * sigma_p + 0.02,
            omega2: 1.0,
            h_blend: kernel,
            h_support: kernel,
            d_pin: 0.75 * sigma_p,
            epsilon: 100.0,
            pin_weight: 10.0,
            max_iters: 40,
            step_damping: 1e-8,
            radius_floor: 0.0,
            inscription: InscriptionVariant::Blended,
            maximality: MaximalityVariant::ConstantPressure,
            irls: Irls::Off,
            init: InitStrategy::Random,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("omega_ratio", self.omega_ratio),
            ("h_blend", self.h_blend),
            ("h_support", self.h_support),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be > 0, got {v}"));
            }
        }
        let non_negative = [
            ("omega2", self.omega2),
            ("pin_weight", self.pin_weight),
            ("d_pin", self.d_pin),
            ("step_damping", self.step_damping),
            ("radius_floor", self.radius_floor),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(format!("{name} must be >= 0, got {v}"));
            }
        }
        if self.max_iters == 0 {
            return Err("max_iters must be >= 1".into());
        }
        if let Irls::L1 { delta, epsilon_scale } = self.irls {
            if !(delta > 0.0) || !(epsilon_scale > 0.0) {
                return Err("IRLS delta and epsilon scale must be > 0".into());
            }
        }
        if let MaximalityVariant::TargetRadius { r_max } = self.maximality {
            if !(r_max > 0.0) {
                return Err("target radius must be > 0".into());
            }
        }
        Ok(())
    }

    /// Converts to world units for a cloud with diagonal `diag`.
    pub fn resolve(&self, diag: f64) -> Resolved {
        let w = |pct: f64| pct_to_world(pct, diag);
        let (irls_delta, eps_scale) = match self.irls {
            Irls::Off => (None, 1.0),
            Irls::L1 { delta, epsilon_scale } => (Some(w(delta)), epsilon_scale),
        };
        Resolved {
            omega1: self.omega_ratio,
            omega2: self.omega2,
            omega_pin: self.pin_weight,
            h_blend: w(self.h_blend),
            h_support: w(self.h_support),
            d_pin: w(self.d_pin),
            epsilon: w(self.epsilon) * eps_scale,
            radius_floor: w(self.radius_floor),
            // 1/r needs a strictly positive clamp even with a zero floor
            inverse_floor: w(self.radius_floor).max(1e-6 * diag),
            r_max: match self.maximality {
                MaximalityVariant::TargetRadius { r_max } => w(r_max),
                _ => 0.0,
            },
            irls_delta,
            step_damping: self.step_damping,
            step_tol: 1e-6 * diag,
            pin_slack: 1e-6 * diag,
            inscription: self.inscription,
            maximality: self.maximality,
            diag,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::default_params(0.0)
    }
}

/// [`SolverConfig`] in world units, fixed for one cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub omega1: f64,
    pub omega2: f64,
    pub omega_pin: f64,
    pub h_blend: f64,
    pub h_support: f64,
    pub d_pin: f64,
    /// Effective ε (already scaled when IRLS is on).
    pub epsilon: f64,
    pub radius_floor: f64,
    pub inverse_floor: f64,
    pub r_max: f64,
    pub irls_delta: Option<f64>,
    pub step_damping: f64,
    pub step_tol: f64,
    pub pin_slack: f64,
    pub inscription: InscriptionVariant,
    pub maximality: MaximalityVariant,
    pub diag: f64,
}
