use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Default crack centre: the middle of the leftmost bay, between the end
/// spring and the first support.
pub const CRACK_CENTRE_FRACTION: f64 = 0.125;

/// Morphable physical parameters of one structure in the chain.
///
/// Lengths in metres, moduli in Pa, densities in kg/m³, stiffnesses in N/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureParams {
    pub span_length: f64,
    pub deck_width: f64,
    pub deck_thickness: f64,
    pub support_height: f64,
    pub support_width: f64,
    pub support_thickness: f64,
    pub deck_youngs_modulus: f64,
    pub deck_density: f64,
    pub support_youngs_modulus: f64,
    pub support_density: f64,
    /// Ground springs at both ends of the deck.
    pub end_boundary_stiffness: f64,
    /// Lateral restraint at the base of each support.
    pub support_base_stiffness: f64,
    /// 0 is the bridge, 1 the aeroplane.
    pub morph_parameter: f64,
}

impl StructureParams {
    /// Four-span concrete bridge on masonry piers.
    pub fn bridge() -> Self {
        Self {
            span_length: 100.0,
            deck_width: 15.0,
            deck_thickness: 2.0,
            support_height: 15.0,
            support_width: 2.0,
            support_thickness: 2.0,
            deck_youngs_modulus: 30e9,
            deck_density: 2400.0,
            support_youngs_modulus: 5e9,
            support_density: 2000.0,
            end_boundary_stiffness: 10e10,
            support_base_stiffness: 10e10,
            morph_parameter: 0.0,
        }
    }

    /// Aluminium aeroplane: fuselage as the beam, landing gear as supports,
    /// free wing tips.
    pub fn aeroplane() -> Self {
        Self {
            span_length: 20.0,
            deck_width: 2.0,
            deck_thickness: 2.0,
            support_height: 4.0,
            support_width: 0.5,
            support_thickness: 0.5,
            deck_youngs_modulus: 69e9,
            deck_density: 2700.0,
            support_youngs_modulus: 69e9,
            support_density: 2700.0,
            end_boundary_stiffness: 0.0,
            support_base_stiffness: 0.0,
            morph_parameter: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("span_length", self.span_length),
            ("deck_width", self.deck_width),
            ("deck_thickness", self.deck_thickness),
            ("support_height", self.support_height),
            ("support_width", self.support_width),
            ("support_thickness", self.support_thickness),
            ("deck_youngs_modulus", self.deck_youngs_modulus),
            ("deck_density", self.deck_density),
            ("support_youngs_modulus", self.support_youngs_modulus),
            ("support_density", self.support_density),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(domain(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        for (name, value) in [
            ("end_boundary_stiffness", self.end_boundary_stiffness),
            ("support_base_stiffness", self.support_base_stiffness),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(domain(format!("{name} must be non-negative, got {value}")));
            }
        }
        if !(0.0..=1.0).contains(&self.morph_parameter) {
            return Err(domain(format!(
                "morph_parameter must lie in [0, 1], got {}",
                self.morph_parameter
            )));
        }
        Ok(())
    }

    pub fn deck_area(&self) -> f64 {
        self.deck_width * self.deck_thickness
    }

    /// Second moment of area of the deck for bending in the vertical plane.
    pub fn deck_second_moment(&self) -> f64 {
        self.deck_width * self.deck_thickness.powi(3) / 12.0
    }

    pub fn support_area(&self) -> f64 {
        self.support_width * self.support_thickness
    }

    pub fn support_second_moment(&self) -> f64 {
        self.support_width * self.support_thickness.powi(3) / 12.0
    }
}

/// How the two ground-spring stiffnesses travel between their endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StiffnessSchedule {
    /// Affine in t, like every other parameter.
    #[default]
    Linear,
    /// Affine in `ln(1 + k)`, which spreads the stiff-to-free transition
    /// over the whole chain instead of its last few members.
    Logarithmic,
}

/// Location and severity of the simulated crack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DamageSpec {
    /// Length of the cracked region as a fraction of the beam length.
    pub region_fraction: f64,
    /// Fractional loss of Young's modulus inside the region.
    pub stiffness_reduction: f64,
    /// Centre of the cracked region as a fraction of the beam length,
    /// measured from the left end.
    pub centre_fraction: f64,
}

impl Default for DamageSpec {
    fn default() -> Self {
        Self {
            region_fraction: 0.05,
            stiffness_reduction: 0.5,
            centre_fraction: CRACK_CENTRE_FRACTION,
        }
    }
}

impl DamageSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.region_fraction > 0.0 && self.region_fraction <= 1.0) {
            return Err(domain(format!(
                "region_fraction must lie in (0, 1], got {}",
                self.region_fraction
            )));
        }
        if !(self.stiffness_reduction > 0.0 && self.stiffness_reduction < 1.0) {
            return Err(domain(format!(
                "stiffness_reduction must lie in (0, 1), got {}",
                self.stiffness_reduction
            )));
        }
        if !(0.0..=1.0).contains(&self.centre_fraction) {
            return Err(domain(format!(
                "centre_fraction must lie in [0, 1], got {}",
                self.centre_fraction
            )));
        }
        Ok(())
    }
}

/// Parameters at morph position `t` with every field interpolated linearly
/// between the bridge (t = 0) and the aeroplane (t = 1).
pub fn interpolate_params(t: f64) -> Result<StructureParams> {
    interpolate_params_with(t, StiffnessSchedule::Linear)
}

pub fn interpolate_params_with(t: f64, schedule: StiffnessSchedule) -> Result<StructureParams> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!(
            "morph parameter must lie in [0, 1], got {t}"
        )));
    }
    let a = StructureParams::bridge();
    let b = StructureParams::aeroplane();
    let lerp = |x: f64, y: f64| (1.0 - t) * x + t * y;
    let stiffness = |x: f64, y: f64| match schedule {
        StiffnessSchedule::Linear => lerp(x, y),
        StiffnessSchedule::Logarithmic => (lerp(x.ln_1p(), y.ln_1p())).exp_m1().max(0.0),
    };
    Ok(StructureParams {
        span_length: lerp(a.span_length, b.span_length),
        deck_width: lerp(a.deck_width, b.deck_width),
        deck_thickness: lerp(a.deck_thickness, b.deck_thickness),
        support_height: lerp(a.support_height, b.support_height),
        support_width: lerp(a.support_width, b.support_width),
        support_thickness: lerp(a.support_thickness, b.support_thickness),
        deck_youngs_modulus: lerp(a.deck_youngs_modulus, b.deck_youngs_modulus),
        deck_density: lerp(a.deck_density, b.deck_density),
        support_youngs_modulus: lerp(a.support_youngs_modulus, b.support_youngs_modulus),
        support_density: lerp(a.support_density, b.support_density),
        end_boundary_stiffness: stiffness(a.end_boundary_stiffness, b.end_boundary_stiffness),
        support_base_stiffness: stiffness(a.support_base_stiffness, b.support_base_stiffness),
        morph_parameter: t,
    })
}

/// `n` structures at uniformly spaced morph positions, endpoints included.
pub fn chain_parameters(n: usize, schedule: StiffnessSchedule) -> Result<Vec<StructureParams>> {
    if n < 2 {
        return Err(domain(format!(
            "a chain needs at least 2 structures, got {n}"
        )));
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| interpolate_params_with(i as f64 / last, schedule))
        .collect()
}
