use std::f64::consts::{FRAC_PI_2, PI};

use pwcert::certificate::Verdict;
use pwcert::concentration::{
    build_interp_kernel, concentration_ratios, gaussian_witness, interp_certify, sinc_constants, PipelineGrid,
    WitnessFunction,
};
use pwcert::geometry::ConvexBody;
use pwcert::ingham::{ball_ingham_bound, bessel_first_root, build_ingham_kernel, interpolation_constant};
use pwcert::lattice::{Lattice, NodeSet};
use pwcert::perturb::universal_perturbation;
use pwcert::sampling_cert::beurling_certify;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn sinc_integrals_match_closed_forms() {
    // ∫ (sin t/t)⁴ = 2π/3 and ∫ sin⁴t/t² = π/2 over the line
    let (beta, gamma) = sinc_constants();
    assert!(close(beta, 2.0 * PI / 3.0, 1e-8), "{beta}");
    assert!(close(gamma, FRAC_PI_2, 1e-8), "{gamma}");
}

#[test]
fn bessel_roots_against_tables() {
    assert!(close(bessel_first_root(0.0).unwrap(), 2.404_825_557_695_773, 1e-10));
    assert!(close(bessel_first_root(1.0).unwrap(), 3.831_705_970_207_512, 1e-10));
    // J_{1/2} ∝ sin x/√x
    assert!(close(bessel_first_root(0.5).unwrap(), PI, 1e-10));
    // J_{-1/2} ∝ cos x/√x gives twice π/2 on the line
    assert!(close(ball_ingham_bound(1).unwrap(), PI, 1e-10));
    assert!(close(ball_ingham_bound(3).unwrap(), 2.0 * PI, 1e-10));
}

#[test]
fn ingham_constant_is_a_lower_riesz_bound() {
    let kernel = build_ingham_kernel(1.5 * PI).unwrap();
    let cert = interpolation_constant(&kernel, 1.6 * PI).unwrap();
    let c = cert.get("lower_riesz_constant").unwrap();
    assert!(c > 0.0);
    assert!(close(c, 2.0 * PI * kernel.k0 / kernel.b, 1e-12));
    assert!(interpolation_constant(&kernel, 1.4 * PI).is_err());
}

#[test]
fn beurling_constant_on_integer_lattices() {
    // K = [-a, a] has polar gauge a|x|; ℤ covers with |x| ≤ 1/2
    let z = NodeSet::from(Lattice::identity(1).unwrap());
    let cert = beurling_certify(&ConvexBody::cube(1, 2.0).unwrap(), &z, 10.0, None).unwrap();
    assert_eq!(cert.verdict, Verdict::Proved);
    assert!(cert.rho_lower <= 1.0 + 1e-9 && cert.rho_upper >= 1.0 - 1e-9);
    // the constant uses the upper bound on ρ, so it sits just above 1/cos 1
    let exact = 1.0 / 1.0f64.cos();
    assert!(cert.constant >= exact && close(cert.constant, exact, 2e-2), "{}", cert.constant);
    // πℤ with K = [-1, 1] sits exactly at ρ = π/2
    let pz = NodeSet::from(Lattice::scaled_identity(1, PI).unwrap());
    let cert = beurling_certify(&ConvexBody::cube(1, 1.0).unwrap(), &pz, 20.0, None).unwrap();
    assert_ne!(cert.verdict, Verdict::Proved);
}

#[test]
fn separation_threshold_decides_interpolation() {
    let w = gaussian_witness(1, 2.0).unwrap();
    assert!(w.admits);
    let certify = |a: f64| {
        let ns = NodeSet::from(Lattice::scaled_identity(1, a).unwrap());
        interp_certify(&ns, &w.spectrum, &w.space, &w.function, None, false).unwrap()
    };
    // K = [-r, r] with r = 2: gauge separation a/r
    let r = w.space.circumradius();
    let wide = certify(13.0 * r);
    assert_eq!(wide.verdict_of("interpolation"), Some(Verdict::Proved));
    let narrow = certify(12.0 * r);
    assert_eq!(narrow.label_of("interpolation"), Some("refused"));
}

#[test]
fn gaussian_ratios_against_chi_square_mass() {
    // for e^{-|x|²/2} in the plane, |F|² has mass 1 - e^{-R²} inside R𝔹
    let f = WitnessFunction::Gaussian { scale: 1.0 };
    let b = ConvexBody::ball(2, 1.3).unwrap();
    let r = concentration_ratios(&f, &b, &b).unwrap();
    let want = (1.0 - (-1.3f64 * 1.3).exp()).sqrt();
    assert!(close(r.space_ratio, want, 1e-6), "{} vs {want}", r.space_ratio);
    assert!(close(r.freq_ratio, want, 1e-6), "{} vs {want}", r.freq_ratio);
}

#[test]
fn planar_pipeline_keeps_its_sign_checks() {
    let w = gaussian_witness(2, 2.0).unwrap();
    let grid = PipelineGrid { points_per_axis: 256, period: None };
    let res = build_interp_kernel(&w.function, &w.spectrum, &w.space, Some(grid)).unwrap();
    assert!(res.k0 > 0.0);
    assert!(res.h_min_on_s > 0.0);
    assert!(res.plancherel_defect < 1e-8);
}

#[test]
fn perturbation_is_reproducible_and_small() {
    let eps = 0.3;
    let a = universal_perturbation(1, 2, eps, 11).unwrap();
    let b = universal_perturbation(1, 2, eps, 11).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!(a.failure.is_none());
    assert!(a.epsilons.iter().sum::<f64>() < eps);
    assert!(a.max_displacement() < eps);
    assert!(a.final_margins.iter().all(|m| m.det_ok() && m.eig_ok()));
}
