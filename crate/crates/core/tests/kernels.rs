use approx::assert_relative_eq;
use proptest::prelude::*;
use vascflow::kernel::{kernel_grad, kernel_w, KernelFamily, KernelPair, KernelParams, SphKernels};
use vascflow::Vec3;

const FAMILIES: [KernelFamily; 2] = [KernelFamily::Poly6, KernelFamily::Spiky];

/// Radial quadrature of 4 pi r^2 W(r) with composite Simpson.
fn radial_integral(family: KernelFamily, h: f64) -> f64 {
    let n = 4000;
    let step = h / n as f64;
    let f = |r: f64| 4.0 * std::f64::consts::PI * r * r * family.value(r, h);
    let mut sum = f(0.0) + f(h);
    for k in 1..n {
        sum += f(k as f64 * step) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * step / 3.0
}

#[test]
fn kernels_integrate_to_one() {
    for family in FAMILIES {
        for h in [0.01, 0.05, 1.0, 3.0] {
            assert_relative_eq!(radial_integral(family, h), 1.0, max_relative = 1e-6);
        }
    }
}

#[test]
fn poly6_self_value_at_unit_radius() {
    let k = SphKernels::new(1.0, KernelPair::default()).unwrap();
    assert_relative_eq!(k.w0(), 315.0 / (64.0 * std::f64::consts::PI), max_relative = 1e-15);
}

#[test]
fn rejects_bad_radius() {
    assert!(KernelParams::new(0.0, KernelFamily::Poly6).is_err());
    assert!(KernelParams::new(f64::NAN, KernelFamily::Spiky).is_err());
    assert!(SphKernels::new(-1.0, KernelPair::default()).is_err());
}

fn displacement(h: f64) -> impl Strategy<Value = Vec3> {
    (-1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64).prop_map(move |(x, y, z)| Vec3::new(x, y, z) * h)
}

proptest! {
    #[test]
    fn value_is_even_nonnegative_and_compact(r in displacement(0.3), family in prop::sample::select(FAMILIES.to_vec())) {
        let p = KernelParams::new(0.3, family).unwrap();
        let w = kernel_w(&r, &p);
        prop_assert!(w >= 0.0);
        prop_assert_eq!(w, kernel_w(&-r, &p));
        if r.norm() >= 0.3 {
            prop_assert_eq!(w, 0.0);
            prop_assert_eq!(kernel_grad(&r, &p), Vec3::zeros());
        }
    }

    #[test]
    fn gradient_is_odd_and_points_inward(r in displacement(0.3), family in prop::sample::select(FAMILIES.to_vec())) {
        let p = KernelParams::new(0.3, family).unwrap();
        let g = kernel_grad(&r, &p);
        prop_assert_eq!(g, -kernel_grad(&-r, &p));
        prop_assert!(g.dot(&r) <= 0.0);
    }

    #[test]
    fn fast_path_matches_reference(r in displacement(0.05)) {
        let k = SphKernels::new(0.05, KernelPair::default()).unwrap();
        let w = kernel_w(&r, &k.value_params());
        prop_assert!((k.w_r2(r.norm_squared()) - w).abs() <= 1e-12 * w.abs().max(1.0));
        let g = kernel_grad(&r, &k.gradient_params());
        let fast = k.grad(&r, r.norm());
        prop_assert!((fast - g).norm() <= 1e-10 * g.norm().max(1.0));
    }
}
