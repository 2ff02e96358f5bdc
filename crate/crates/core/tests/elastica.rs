use disloc_core::elastica::{
    glide_force, isotropic_stress, pk_force, strain_energy_density, IsotropicElasticity, SymTensor3, Vec3,
};
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b, c)| Vec3::new(a, b, c))
}

fn sym() -> impl Strategy<Value = SymTensor3> {
    prop::array::uniform6(-1.0..1.0f64).prop_map(|s| SymTensor3::new(s[0], s[1], s[2], s[3], s[4], s[5]))
}

/// Right-handed orthonormal frame `(n, tau, nu)` from two generic vectors.
fn frame() -> impl Strategy<Value = (Vec3, Vec3, Vec3)> {
    (vec3(), vec3())
        .prop_filter("non-degenerate", |(a, b)| a.norm() > 0.1 && a.cross(b).norm() > 0.1)
        .prop_map(|(a, b)| {
            let n = a.normalized();
            let tau = (b - n * n.dot(&b)).normalized();
            let nu = n.cross(&tau).normalized();
            (n, tau, nu)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn peach_koehler_normal_component_is_glide_force(sigma in sym(), b in vec3(), (n, tau, nu) in frame()) {
        let lhs = pk_force(&sigma, &b, &tau).unwrap().dot(&n);
        let rhs = glide_force(&sigma, &b, &nu).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn energy_density_is_coercive(e in sym(), lambda in 0.0..100.0f64, mu in 0.01..100.0f64) {
        let c = IsotropicElasticity::new(lambda, mu).unwrap();
        let w = strain_energy_density(&e, &c);
        prop_assert!(w >= mu * e.norm_sq() * (1.0 - 1e-12));
        // w = sigma : e / 2
        let s = isotropic_stress(&e, &c);
        prop_assert!((w - 0.5 * s.contract(&e)).abs() <= 1e-12 * (1.0 + w.abs()));
    }
}
