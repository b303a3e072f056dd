mod common;

use common::*;
use gfk_core::alignment::{align, fit_normal_stats};
use gfk_core::kernel::{flow_point, gfk_matrix};
use gfk_core::spectral_sim::{
    assemble_model, interpolate_params_with, natural_frequencies, sample_dataset, Condition,
    DamageSpec, StiffnessSchedule, StructureParams,
};
use gfk_core::subspace::{
    decompose_with_completion, orthogonal_completion, principal_decomposition, SubspaceBasis,
};
use gfk_core::svm::{train, SvmModel};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn geometry(p: &StructureParams) -> [f64; 10] {
    [
        p.span_length,
        p.deck_width,
        p.deck_thickness,
        p.support_height,
        p.support_width,
        p.support_thickness,
        p.deck_youngs_modulus,
        p.deck_density,
        p.support_youngs_modulus,
        p.support_density,
    ]
}

fn angles(a: &SubspaceBasis, b: &SubspaceBasis) -> Vec<f64> {
    principal_decomposition(a, b)
        .unwrap()
        .principal_angles
        .iter()
        .copied()
        .collect()
}

fn decision(model: &SvmModel, gram: &DMatrix<f64>) -> Vec<f64> {
    model.decision_function(gram).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interpolation_is_affine(t in 0.0f64..=1.0, s in 0.0f64..=1.0) {
        let a = geometry(&interpolate_params_with(0.0, StiffnessSchedule::Linear).unwrap());
        let b = geometry(&interpolate_params_with(1.0, StiffnessSchedule::Linear).unwrap());
        for schedule in [StiffnessSchedule::Linear, StiffnessSchedule::Logarithmic] {
            let p = interpolate_params_with(t, schedule).unwrap();
            prop_assert_eq!(p.morph_parameter, t);
            for (got, (x, y)) in geometry(&p).iter().zip(a.iter().zip(&b)) {
                let want = (1.0 - t) * x + t * y;
                prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }
        // stiffness is monotone in t for both schedules
        let (lo, hi) = if t < s { (t, s) } else { (s, t) };
        for schedule in [StiffnessSchedule::Linear, StiffnessSchedule::Logarithmic] {
            let p = interpolate_params_with(lo, schedule).unwrap();
            let q = interpolate_params_with(hi, schedule).unwrap();
            prop_assert!(q.end_boundary_stiffness <= p.end_boundary_stiffness * (1.0 + 1e-12));
        }
    }

    #[test]
    fn frequencies_ignore_dof_ordering(seed in 0u64..1000, n in 3usize..12) {
        let mut rng = rng(seed);
        let m = random_spd(n, 0.5, 2.0, &mut rng);
        let k = random_spd(n, 1.0, 100.0, &mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.reverse();
        perm.rotate_left((seed as usize) % n);
        let permute = |a: &DMatrix<f64>| DMatrix::from_fn(n, n, |i, j| a[(perm[i], perm[j])]);
        let f1 = natural_frequencies(&m, &k, n).unwrap();
        let f2 = natural_frequencies(&permute(&m), &permute(&k), n).unwrap();
        for (a, b) in f1.iter().zip(&f2) {
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn damage_never_raises_frequencies(t in 0.0f64..=1.0, r1 in 0.0f64..0.95, r2 in 0.0f64..0.95, region in 0.02f64..0.2) {
        let p = interpolate_params_with(t, StiffnessSchedule::Logarithmic).unwrap();
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let freqs = |r: f64| {
            let d = DamageSpec { stiffness_reduction: r, region_fraction: region, ..DamageSpec::default() };
            let (m, k) = assemble_model(&p, Some(&d), 40).unwrap();
            natural_frequencies(&m, &k, 15).unwrap()
        };
        let (weak, strong) = (freqs(hi), freqs(lo));
        for (a, b) in weak.iter().zip(&strong) {
            prop_assert!(*a <= b * (1.0 + 1e-9), "{} > {}", a, b);
        }
    }

    #[test]
    fn alignment_removes_affine_rescaling(seed in 0u64..1000, shift in -50.0f64..50.0, scale in 0.01f64..100.0) {
        let mut rng = rng(seed);
        let healthy: Vec<f64> = (0..5).map(|i| 1.0 + i as f64).collect();
        let damaged: Vec<f64> = healthy.iter().map(|f| 0.97 * f).collect();
        let ds = sample_dataset(&healthy, &damaged, 20, 0.02, 0, &mut rng).unwrap();
        let mut moved = ds.clone();
        for (j, mut col) in moved.features.column_iter_mut().enumerate() {
            let a = scale * (1.0 + j as f64);
            col.iter_mut().for_each(|v| *v = a * *v + shift);
        }
        let x = align(&ds, &fit_normal_stats(&ds).unwrap()).unwrap();
        let y = align(&moved, &fit_normal_stats(&moved).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&x.features, &y.features) < 1e-7);
    }

    #[test]
    fn angles_are_symmetric_and_rotation_invariant(seed in 0u64..1000, d in 1usize..=7) {
        let mut rng = rng(seed);
        let s1 = random_basis(15, d, &mut rng);
        let s2 = random_basis(15, d, &mut rng);
        let a12 = angles(&s1, &s2);
        let a21 = angles(&s2, &s1);
        let u = random_orthonormal(15, 15, &mut rng);
        let r1 = random_orthonormal(d, d, &mut rng);
        let r2 = random_orthonormal(d, d, &mut rng);
        let t1 = SubspaceBasis::new(&u * s1.basis() * r1).unwrap();
        let t2 = SubspaceBasis::new(&u * s2.basis() * r2).unwrap();
        let rotated = angles(&t1, &t2);
        for i in 0..d {
            prop_assert!((a12[i] - a21[i]).abs() < 1e-9);
            prop_assert!((a12[i] - rotated[i]).abs() < 1e-9);
            prop_assert!(a12[i] >= 0.0 && a12[i] <= std::f64::consts::FRAC_PI_2 + 1e-12);
        }
        for w in a12.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn kernel_spectrum_lies_in_zero_two(seed in 0u64..1000, d in 1usize..=7) {
        let mut rng = rng(seed);
        let s1 = random_basis(15, d, &mut rng);
        let s2 = random_basis(15, d, &mut rng);
        let g = gfk_matrix(&principal_decomposition(&s1, &s2).unwrap()).unwrap();
        for e in jacobi_eigenvalues(g.matrix()) {
            prop_assert!((-1e-10..=2.0 + 1e-10).contains(&e), "eigenvalue {}", e);
        }
        let trace: f64 = g.matrix().trace();
        prop_assert!((trace - 2.0 * d as f64).abs() < 1e-9);
    }

    #[test]
    fn kernel_ignores_choice_of_complement(seed in 0u64..1000, d in 1usize..=7) {
        let mut rng = rng(seed);
        let s1 = random_basis(15, d, &mut rng);
        let s2 = random_basis(15, d, &mut rng);
        let q = orthogonal_completion(&s1);
        let w = random_orthonormal(15 - d, 15 - d, &mut rng);
        let mut q2 = q.clone();
        let rotated = q.columns(d, 15 - d) * w;
        q2.columns_mut(d, 15 - d).copy_from(&rotated);
        let g1 = gfk_matrix(&decompose_with_completion(q, &s2).unwrap()).unwrap();
        let g2 = gfk_matrix(&decompose_with_completion(q2, &s2).unwrap()).unwrap();
        prop_assert!(max_abs_diff(g1.matrix(), g2.matrix()) < 1e-9);
    }

    #[test]
    fn flow_is_orthonormal_and_continuous(seed in 0u64..1000, d in 1usize..=7, t in 0.0f64..0.999) {
        let mut rng = rng(seed);
        let decomp = principal_decomposition(&random_basis(15, d, &mut rng), &random_basis(15, d, &mut rng)).unwrap();
        let a = flow_point(&decomp, t).unwrap();
        let b = flow_point(&decomp, t + 1e-3).unwrap();
        prop_assert!(max_abs_diff(&(a.transpose() * &a), &DMatrix::identity(d, d)) < 1e-10);
        // |dΦ/dt| ≤ max θ ≤ π/2
        prop_assert!(max_abs_diff(&a, &b) <= 1e-3 * std::f64::consts::FRAC_PI_2 + 1e-12);
    }

    #[test]
    fn kernel_varies_smoothly_with_target(seed in 0u64..1000, d in 1usize..=4, eps in 1e-6f64..1e-3) {
        let mut rng = rng(seed);
        let s1 = random_basis(12, d, &mut rng);
        let s2 = random_basis(12, d, &mut rng);
        let bump = gaussian(12, d, &mut rng) * eps;
        let perturbed = (s2.basis() + bump).qr().q();
        let s3 = SubspaceBasis::new(perturbed).unwrap();
        let d2 = principal_decomposition(&s1, &s2).unwrap();
        let d3 = principal_decomposition(&s1, &s3).unwrap();
        // at θ = π/2 the geodesic is not unique and the kernel jumps
        let widest = d2.principal_angles.max().max(d3.principal_angles.max());
        prop_assume!(widest < std::f64::consts::FRAC_PI_2 - 1e-2);
        let g2 = gfk_matrix(&d2).unwrap();
        let g3 = gfk_matrix(&d3).unwrap();
        prop_assert!(max_abs_diff(g2.matrix(), g3.matrix()) < 100.0 * eps * (d as f64));
    }

    #[test]
    fn svm_label_flip_is_exact(seed in 0u64..1000, c in 0.05f64..20.0) {
        let mut rng = rng(seed);
        let x = gaussian(30, 3, &mut rng);
        let y: Vec<f64> = (0..30).map(|i| if x[(i, 0)] + 0.2 * x[(i, 2)] > 0.1 { 1.0 } else { -1.0 }).collect();
        prop_assume!(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0));
        let gram = &x * x.transpose();
        let flipped: Vec<f64> = y.iter().map(|v| -v).collect();
        let a = train(&gram, &y, c).unwrap();
        let b = train(&gram, &flipped, c).unwrap();
        prop_assert_eq!(a.alphas(), b.alphas());
        let da = decision(&a, &gram);
        let db = decision(&b, &gram);
        for (u, v) in da.iter().zip(&db) {
            prop_assert_eq!(*u, -*v);
        }
    }

    #[test]
    fn svm_is_invariant_to_gram_rescaling(seed in 0u64..1000, c in 0.05f64..20.0, power in -3i32..=3) {
        let mut rng = rng(seed);
        let x = gaussian(30, 3, &mut rng);
        let y: Vec<f64> = (0..30).map(|i| if x[(i, 1)] - 0.4 * x[(i, 0)] > 0.0 { 1.0 } else { -1.0 }).collect();
        prop_assume!(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0));
        let s = 2f64.powi(power);
        let gram = &x * x.transpose();
        let a = train(&gram, &y, c).unwrap();
        let b = train(&(&gram * s), &y, c / s).unwrap();
        prop_assert_eq!(decision(&a, &gram), decision(&b, &(&gram * s)));
    }
}

#[test]
fn damage_labels_map_to_signs() {
    assert_eq!(
        Condition::from_sign(Condition::Healthy.sign()),
        Condition::Healthy
    );
    assert_eq!(
        Condition::from_sign(Condition::Damaged.sign()),
        Condition::Damaged
    );
}
