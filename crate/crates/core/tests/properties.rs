use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use pwcert::concentration::{concentration_ratios, WitnessFunction};
use pwcert::expsys::{gram_section, shift_matrix};
use pwcert::fourier::{unitary_forward, Grid};
use pwcert::geometry::{lp_norm, ConvexBody, Exponent, Level, PolarOf};
use pwcert::lattice::{min_separation, Lattice, NodeSet};
use pwcert::linalg::min_singular_value;
use pwcert::perturb::{omega_family, OmegaSet};
use pwcert::spectrum::Spectrum;

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY), 1.0f64..8.0]
}

fn vec2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_is_a_norm(p in exponent(), r in 0.2f64..4.0, x in vec2(), y in vec2(), a in -3.0f64..3.0) {
        let b = ConvexBody::lp_ball(2, p, r).unwrap();
        let g = |v: &[f64]| b.gauge(v).unwrap();
        let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
        prop_assert!((g(&ax) - a.abs() * g(&x)).abs() <= 1e-9 * (1.0 + g(&ax)));
        let s: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u + v).collect();
        prop_assert!(g(&s) <= g(&x) + g(&y) + 1e-9);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert!((g(&neg) - g(&x)).abs() <= 1e-12 * (1.0 + g(&x)));
    }

    #[test]
    fn support_function_is_dual_to_the_gauge(p in exponent(), r in 0.2f64..4.0, x in vec2(), y in vec2()) {
        // x·y ≤ ‖x‖_K · h_K(y), with equality reachable by the conjugate exponent
        let b = ConvexBody::lp_ball(2, p, r).unwrap();
        let dot: f64 = x.iter().zip(&y).map(|(u, v)| u * v).sum();
        prop_assert!(dot <= b.gauge(&x).unwrap() * b.support_of(&y).unwrap() + 1e-9);
        let q = Exponent::new(p).unwrap().conjugate();
        prop_assert!((b.support_of(&y).unwrap() - r * lp_norm(&y, q)).abs() <= 1e-9 * (1.0 + r * lp_norm(&y, q)));
        let polar = PolarOf::new(&b).unwrap();
        prop_assert!((polar.value(&y) - b.support_of(&y).unwrap()).abs() <= 1e-12 * (1.0 + polar.value(&y)));
    }

    #[test]
    fn t_bodies_shrink_as_p_grows(p in 1.0f64..6.0, dp in 0.0f64..6.0, x in prop::collection::vec(-3.0f64..3.0, 3)) {
        let small = ConvexBody::t_body(3, p).unwrap();
        let large = ConvexBody::t_body(3, p + dp).unwrap();
        // T_p ⊇ T_q for p ≤ q
        prop_assert!(small.gauge(&x).unwrap() <= large.gauge(&x).unwrap() + 1e-9);
    }

    #[test]
    fn dual_lattice_has_reciprocal_determinant(a in 0.3f64..3.0, b in -1.0f64..1.0, c in 0.3f64..3.0) {
        let l = Lattice::from_rows(&[vec![a, b], vec![0.0, c]]).unwrap();
        let d = l.dual();
        prop_assert!((l.det().abs() * d.det().abs() - 1.0).abs() < 1e-9);
        let (u, v) = (l.basis(), d.basis());
        for i in 0..2 {
            for j in 0..2 {
                let ip: f64 = u[i].iter().zip(&v[j]).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn separation_scales_with_the_nodes(a in 0.2f64..5.0, s in 0.3f64..3.0) {
        let ns = NodeSet::from(Lattice::diag(&[a, 1.7 * a]).unwrap());
        let d = min_separation(&ns, 20.0 * a).unwrap();
        let ds = min_separation(&ns.scale(s).unwrap(), 20.0 * a * s).unwrap();
        prop_assert!((ds - s * d).abs() <= 1e-9 * ds);
    }

    #[test]
    fn gram_is_translation_invariant_and_hermitian(
        pts in prop::collection::vec(-6.0f64..6.0, 3..8),
        shift in -10.0f64..10.0,
        h in 0.5f64..3.0,
    ) {
        let mut xs = pts.clone();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let nodes: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
        let moved: Vec<Vec<f64>> = xs.iter().map(|x| vec![x + shift]).collect();
        let s = Spectrum::from(ConvexBody::cube(1, h).unwrap());
        let g = gram_section(&s, &nodes).unwrap();
        let gm = gram_section(&s, &moved).unwrap();
        for i in 0..nodes.len() {
            for j in 0..nodes.len() {
                prop_assert!((g.matrix[(i, j)] - gm.matrix[(i, j)]).norm() < 1e-10);
                prop_assert!((g.matrix[(i, j)] - g.matrix[(j, i)].conj()).norm() < 1e-12);
            }
        }
        prop_assert!(g.eig_min >= -1e-10 && g.eig_max <= 2.0 * h * nodes.len() as f64 + 1e-9);
    }

    #[test]
    fn gram_scales_with_spectrum_and_nodes(a in 0.3f64..3.0, h in 0.5f64..2.0) {
        // G(aΛ, S/a) = a^{-1} G(Λ, S) in one dimension
        let nodes: Vec<Vec<f64>> = [0.0, 0.9, 2.3, 4.0].iter().map(|x| vec![*x]).collect();
        let scaled: Vec<Vec<f64>> = nodes.iter().map(|p| vec![a * p[0]]).collect();
        let g = gram_section(&Spectrum::from(ConvexBody::cube(1, h).unwrap()), &nodes).unwrap();
        let gs = gram_section(&Spectrum::from(ConvexBody::cube(1, h / a).unwrap()), &scaled).unwrap();
        prop_assert!((gs.eig_min - g.eig_min / a).abs() < 1e-9 * (1.0 + g.eig_min));
    }

    #[test]
    fn concentration_grows_with_the_body(s in 0.3f64..2.0, h in 0.2f64..3.0, dh in 0.0f64..2.0) {
        let f = WitnessFunction::Gaussian { scale: s };
        let small = ConvexBody::cube(1, h).unwrap();
        let large = ConvexBody::cube(1, h + dh).unwrap();
        let a = concentration_ratios(&f, &small, &small).unwrap();
        let b = concentration_ratios(&f, &large, &large).unwrap();
        prop_assert!(a.space_ratio <= b.space_ratio + 1e-12);
        prop_assert!(a.freq_ratio <= b.freq_ratio + 1e-12);
        prop_assert!(b.space_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn unitary_transform_preserves_energy(seed in 0u64..1000) {
        let g = Grid::new(1, 256, 0.1).unwrap();
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let data: Vec<Complex64> = (0..g.len()).map(|_| Complex64::new(next(), next())).collect();
        let mut t = data.clone();
        unitary_forward(&mut t, &g);
        let e0: f64 = data.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.step;
        let e1: f64 = t.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.dual().step;
        prop_assert!((e0 - e1).abs() < 1e-10 * e0);
    }

    #[test]
    fn shift_matrix_is_unitary_up_to_scale_for_integer_grids(k in 1usize..5) {
        // u_l = l/k against m_j = j gives a scaled DFT matrix
        let shifts: Vec<Vec<f64>> = (0..k).map(|l| vec![l as f64 / k as f64]).collect();
        let translates: Vec<Vec<i64>> = (0..k as i64).map(|j| vec![j]).collect();
        let a = shift_matrix(&shifts, &translates).unwrap();
        prop_assert!((min_singular_value(&a) - (k as f64).sqrt()).abs() < 1e-9);
    }
}

#[test]
fn refined_omega_sets_keep_their_measure() {
    for n in 1..=2 {
        for set in omega_family(n, 1, 0).unwrap() {
            let fine = set.refine();
            let a = set.spectrum().unwrap().measure().unwrap();
            let b = fine.spectrum().unwrap().measure().unwrap();
            assert!((a - (2.0 * PI).powi(n as i32)).abs() < 1e-9);
            assert!((a - b).abs() < 1e-9);
            assert_eq!(fine.translates.len(), 1 << (2 * n));
        }
    }
}

#[test]
fn omega_members_stay_within_the_bound() {
    let fam = omega_family(2, 2, 5).unwrap();
    // Ω(1) in the plane has C(9, 4) = 126 members; all reappear refined
    assert!(fam.len() > 126);
    for s in &fam {
        assert_eq!(s.translates.len(), 16);
        assert!(s.translates.iter().flatten().all(|m| m.abs() < 4));
        let mut t = s.translates.clone();
        t.dedup();
        assert_eq!(t.len(), 16);
    }
    let coarse = OmegaSet { level: 1, translates: vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]] };
    assert!(fam.contains(&coarse.refine()));
}
