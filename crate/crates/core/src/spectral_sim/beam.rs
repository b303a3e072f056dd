use nalgebra::DMatrix;

use super::params::{DamageSpec, StructureParams};
use crate::error::{domain, Result};

pub const DEFAULT_ELEMENTS: usize = 40;

const MIN_ELEMENTS: usize = 20;

/// A uniformly meshed Euler-Bernoulli beam with point springs and masses.
///
/// Nodes are numbered left to right; node `i` owns DOFs `2i` (transverse
/// displacement) and `2i + 1` (rotation).
#[derive(Debug, Clone, PartialEq)]
pub struct BeamModel {
    pub length: f64,
    /// Bending stiffness EI of each element.
    pub flexural_rigidity: Vec<f64>,
    /// Mass per unit length ρA, uniform along the beam.
    pub mass_per_length: f64,
    pub translational_springs: Vec<(usize, f64)>,
    pub rotational_springs: Vec<(usize, f64)>,
    pub point_masses: Vec<(usize, f64)>,
}

impl BeamModel {
    pub fn uniform(
        length: f64,
        n_elem: usize,
        flexural_rigidity: f64,
        mass_per_length: f64,
    ) -> Self {
        Self {
            length,
            flexural_rigidity: vec![flexural_rigidity; n_elem],
            mass_per_length,
            translational_springs: Vec::new(),
            rotational_springs: Vec::new(),
            point_masses: Vec::new(),
        }
    }

    pub fn n_elements(&self) -> usize {
        self.flexural_rigidity.len()
    }

    pub fn n_dofs(&self) -> usize {
        2 * (self.n_elements() + 1)
    }

    /// Consistent mass and stiffness matrices, in that order.
    pub fn assemble(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let n_elem = self.n_elements();
        if n_elem == 0 {
            return Err(domain("beam needs at least one element"));
        }
        if !(self.length > 0.0 && self.mass_per_length > 0.0) {
            return Err(domain("beam length and mass per length must be positive"));
        }
        if self
            .flexural_rigidity
            .iter()
            .any(|&ei| !(ei > 0.0 && ei.is_finite()))
        {
            return Err(domain("element flexural rigidity must be positive"));
        }
        let n_nodes = n_elem + 1;
        let le = self.length / n_elem as f64;
        let n = self.n_dofs();
        let mut mass = DMatrix::zeros(n, n);
        let mut stiff = DMatrix::zeros(n, n);

        let me = element_mass(self.mass_per_length, le);
        for (e, &ei) in self.flexural_rigidity.iter().enumerate() {
            let ke = element_stiffness(ei, le);
            let base = 2 * e;
            for a in 0..4 {
                for b in 0..4 {
                    mass[(base + a, base + b)] += me[a][b];
                    stiff[(base + a, base + b)] += ke[a][b];
                }
            }
        }

        for &(node, k) in &self.translational_springs {
            check_node(node, n_nodes)?;
            check_nonnegative("spring stiffness", k)?;
            stiff[(2 * node, 2 * node)] += k;
        }
        for &(node, k) in &self.rotational_springs {
            check_node(node, n_nodes)?;
            check_nonnegative("rotational spring stiffness", k)?;
            stiff[(2 * node + 1, 2 * node + 1)] += k;
        }
        for &(node, m) in &self.point_masses {
            check_node(node, n_nodes)?;
            check_nonnegative("point mass", m)?;
            mass[(2 * node, 2 * node)] += m;
        }
        Ok((mass, stiff))
    }
}

fn check_node(node: usize, n_nodes: usize) -> Result<()> {
    if node >= n_nodes {
        return Err(domain(format!(
            "node {node} outside beam with {n_nodes} nodes"
        )));
    }
    Ok(())
}

fn check_nonnegative(what: &str, value: f64) -> Result<()> {
    if !(value >= 0.0 && value.is_finite()) {
        return Err(domain(format!("{what} must be non-negative, got {value}")));
    }
    Ok(())
}

// Hermite cubic element matrices, symmetric by construction.
fn element_stiffness(ei: f64, l: f64) -> [[f64; 4]; 4] {
    let c = ei / (l * l * l);
    let a = 12.0 * c;
    let b = 6.0 * l * c;
    let d = 4.0 * l * l * c;
    let e = 2.0 * l * l * c;
    [[a, b, -a, b], [b, d, -b, e], [-a, -b, a, -b], [b, e, -b, d]]
}

fn element_mass(rho_a: f64, l: f64) -> [[f64; 4]; 4] {
    let c = rho_a * l / 420.0;
    let m11 = 156.0 * c;
    let m12 = 22.0 * l * c;
    let m13 = 54.0 * c;
    let m14 = -13.0 * l * c;
    let m22 = 4.0 * l * l * c;
    let m24 = -3.0 * l * l * c;
    [
        [m11, m12, m13, m14],
        [m12, m22, -m14, m24],
        [m13, -m14, m11, -m12],
        [m14, m24, -m12, m22],
    ]
}

/// Reduced-order model of one chain member.
///
/// The deck is a beam of `n_elem` elements carrying translational end
/// springs. Each of the three supports acts on its node through
///
/// - a vertical spring equal to the axial stiffness `E A / h` of the column,
/// - a rotational spring: column bending stiffness `4 E I / h` in series with
///   the base restraint seen through the column height, `k_base h²`,
/// - a lumped mass of one third of the column mass.
///
/// With damage, elements overlapping the crack region get their modulus
/// scaled by `1 - stiffness_reduction`.
pub fn assemble_model(
    params: &StructureParams,
    damage: Option<&DamageSpec>,
    n_elem: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    params.validate()?;
    if n_elem < MIN_ELEMENTS {
        return Err(domain(format!(
            "need at least {MIN_ELEMENTS} elements, got {n_elem}"
        )));
    }
    if let Some(d) = damage {
        d.validate()?;
    }

    let ei = params.deck_youngs_modulus * params.deck_second_moment();
    let rho_a = params.deck_density * params.deck_area();
    let mut beam = BeamModel::uniform(params.span_length, n_elem, ei, rho_a);

    if let Some(d) = damage {
        let scale = 1.0 - d.stiffness_reduction;
        for e in cracked_elements(n_elem, d.centre_fraction, d.region_fraction) {
            beam.flexural_rigidity[e] *= scale;
        }
    }

    beam.translational_springs
        .push((0, params.end_boundary_stiffness));
    beam.translational_springs
        .push((n_elem, params.end_boundary_stiffness));

    let h = params.support_height;
    let axial = params.support_youngs_modulus * params.support_area() / h;
    let column_rotation = 4.0 * params.support_youngs_modulus * params.support_second_moment() / h;
    let base_rotation = params.support_base_stiffness * h * h;
    let rotational = series(column_rotation, base_rotation);
    let column_mass = params.support_density * params.support_area() * h / 3.0;
    for node in support_nodes(n_elem) {
        beam.translational_springs.push((node, axial));
        beam.rotational_springs.push((node, rotational));
        beam.point_masses.push((node, column_mass));
    }
    beam.assemble()
}

fn series(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        0.0
    } else {
        a * b / (a + b)
    }
}

/// Nodes at the quarter points of the beam.
pub(crate) fn support_nodes(n_elem: usize) -> [usize; 3] {
    let at = |q: usize| ((q * n_elem) as f64 / 4.0).round() as usize;
    [at(1), at(2), at(3)]
}

/// Elements whose interior overlaps the crack interval of relative width
/// `region_fraction` centred on `centre`, shifted to stay inside the beam.
pub(crate) fn cracked_elements(n_elem: usize, centre: f64, region_fraction: f64) -> Vec<usize> {
    let width = region_fraction.min(1.0);
    let start = (centre - width / 2.0).clamp(0.0, 1.0 - width);
    let end = start + width;
    let le = 1.0 / n_elem as f64;
    let tol = 1e-9 * le;
    (0..n_elem)
        .filter(|&e| {
            let a = e as f64 * le;
            let b = a + le;
            b.min(end) - a.max(start) > tol
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_sim::natural_frequencies;
    use std::f64::consts::PI;

    #[test]
    fn assembled_matrices_are_exactly_symmetric() {
        let p = StructureParams::bridge();
        let (m, k) = assemble_model(&p, Some(&DamageSpec::default()), 40).unwrap();
        assert_eq!(m, m.transpose());
        assert_eq!(k, k.transpose());
        assert_eq!(m.nrows(), 82);
    }

    #[test]
    fn too_few_elements_rejected() {
        let p = StructureParams::bridge();
        assert!(assemble_model(&p, None, 10).is_err());
    }

    #[test]
    fn bad_params_rejected() {
        let mut p = StructureParams::aeroplane();
        p.support_height = -1.0;
        assert!(matches!(
            assemble_model(&p, None, 40),
            Err(crate::Error::Domain(_))
        ));
    }

    #[test]
    fn crack_sits_in_leftmost_bay() {
        // region [0.1, 0.15] of a 40 element beam covers elements 4 and 5
        assert_eq!(cracked_elements(40, 0.125, 0.05), vec![4, 5]);
        assert_eq!(cracked_elements(40, 0.125, 1.0).len(), 40);
        assert_eq!(cracked_elements(40, 0.0, 0.05), vec![0, 1]);
        let narrow = cracked_elements(40, 0.125, 0.001);
        assert_eq!(narrow, vec![4, 5]);
        assert_eq!(support_nodes(40), [10, 20, 30]);
    }

    #[test]
    fn severe_crack_lowers_fundamental() {
        let p = StructureParams::bridge();
        let (m, k) = assemble_model(&p, None, 40).unwrap();
        let damage = DamageSpec {
            stiffness_reduction: 0.999,
            ..DamageSpec::default()
        };
        let (md, kd) = assemble_model(&p, Some(&damage), 40).unwrap();
        let f = natural_frequencies(&m, &k, 1).unwrap();
        let fd = natural_frequencies(&md, &kd, 1).unwrap();
        assert!(fd[0] < f[0], "{} !< {}", fd[0], f[0]);
    }

    #[test]
    fn pinned_beam_matches_analytic_fundamental() {
        let (length, e, width, height, rho): (f64, f64, f64, f64, f64) =
            (10.0, 200e9, 0.3, 0.5, 7850.0);
        let ei = e * width * height.powi(3) / 12.0;
        let rho_a = rho * width * height;
        let mut beam = BeamModel::uniform(length, 40, ei, rho_a);
        beam.translational_springs = vec![(0, 1e14), (40, 1e14)];
        let (m, k) = beam.assemble().unwrap();
        let f = natural_frequencies(&m, &k, 1).unwrap()[0];
        let exact = PI / (2.0 * length * length) * (ei / rho_a).sqrt();
        assert!(
            (f - exact).abs() / exact < 0.05,
            "fe {f} vs analytic {exact}"
        );
    }
}
