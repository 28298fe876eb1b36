mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qhess::calculus::{baston, radial_density, GridField, GridSpec, RadialProfile};
use qhess::energy::holder_check;
use qhess::exterior::wedge;
use qhess::hessian::{hessian_density, radial_comparison_check};
use qhess::io::{read_binary, write_binary, Header};
use qhess::quaternion::{moore_det, quat_mul, random_hyperhermitian, Quaternion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quat() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-2.0f64..2.0).prop_map(Quaternion::from_array)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quaternion_product_is_associative_and_normed(p in quat(), q in quat(), r in quat()) {
        let a = quat_mul(quat_mul(p, q), r);
        let b = quat_mul(p, quat_mul(q, r));
        prop_assert!(a.abs_diff(b) < 1e-12);
        let n = quat_mul(p, q).norm_sqr();
        prop_assert!((n - p.norm_sqr() * q.norm_sqr()).abs() < 1e-12 * (1.0 + n));
        prop_assert!(quat_mul(p, q).conj().abs_diff(quat_mul(q.conj(), p.conj())) < 1e-12);
    }

    #[test]
    fn moore_determinant_is_homogeneous(seed in any::<u64>(), n in 1usize..=4, t in 0.2f64..3.0) {
        let a = random_hyperhermitian(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let d = moore_det(&a).unwrap();
        let dt = moore_det(&a.scale(t)).unwrap();
        prop_assert!((dt - t.powi(n as i32) * d).abs() < 1e-10 * (1.0 + dt.abs()));
    }

    #[test]
    fn wedge_is_graded_commutative(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = 1 + (seed % 3) as usize % (2 * n);
        let q = 1 + (seed / 3 % 2) as usize;
        prop_assume!(p + q <= 2 * n);
        let a = random_int_form(n, p, &mut rng);
        let b = random_int_form(n, q, &mut rng);
        let sign = if p * q % 2 == 0 { 1.0 } else { -1.0 };
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap().scale(Complex64::new(sign, 0.0));
        prop_assert_eq!(ab.max_abs_diff(&ba), 0.0);
    }

    #[test]
    fn radial_density_scales_with_the_order(seed in any::<u64>(), n in 1usize..=3, t in 0.3f64..3.0) {
        let p = random_radial(n, 1.0, 40, &mut ChaCha8Rng::seed_from_u64(seed));
        let q = p.with_values(p.values.iter().map(|v| t * v).collect()).unwrap();
        for m in 1..=n {
            let a = radial_density(&p, m).unwrap();
            let b = radial_density(&q, m).unwrap();
            let tm = t.powi(m as i32);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(*x >= 0.0);
                prop_assert!((y - tm * x).abs() < 1e-9 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn radial_comparison_holds(seed in any::<u64>(), m in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_radial(2, 1.0, 60, &mut rng);
        let v = random_radial(2, 1.0, 60, &mut rng);
        prop_assert!(radial_comparison_check(&u, &v, m, 1e-9).unwrap().holds);
    }

    #[test]
    fn holder_inequality_on_radial_tuples(seed in any::<u64>(), m in 1usize..=2, p in 1.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_radial(2, 1.0, 60, &mut rng);
        let vs: Vec<RadialProfile> = (0..m).map(|_| random_radial(2, 1.0, 60, &mut rng)).collect();
        let refs: Vec<&RadialProfile> = vs.iter().collect();
        prop_assert!(holder_check(&u, &refs, p, 1e-12).unwrap().holds);
    }

    #[test]
    fn binary_files_round_trip(values in prop::collection::vec(any::<f64>(), 0..64)) {
        let mut buf = Vec::new();
        let header = Header::table("values", 1);
        write_binary(&mut buf, &header, &values).unwrap();
        let (_, back) = read_binary(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), values.len());
        prop_assert!(back.iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn baston_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = GridSpec::new(1, 1.0, 7).unwrap();
        let (p, q) = (Cubic::random(4, &mut rng), Cubic::random(4, &mut rng));
        let u = GridField::sample(&spec, |x| p.eval(x)).unwrap();
        let v = GridField::sample(&spec, |x| q.eval(x)).unwrap();
        let w = GridField::sample(&spec, |x| a * p.eval(x) + b * q.eval(x)).unwrap();
        let (bu, bv, bw) = (baston(&u).unwrap(), baston(&v).unwrap(), baston(&w).unwrap());
        for l in 0..bw.len() {
            let lin = bu.form_at(l).scale(a).add(&bv.form_at(l).scale(b));
            prop_assert!(bw.form_at(l).max_abs_diff(&lin) < 1e-9);
        }
    }

    #[test]
    fn convex_quadratics_have_nonnegative_density(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = qhess::quaternion::random_positive_hyperhermitian(2, 0.1, &mut rng);
        let spec = GridSpec::new(2, 1.0, 5).unwrap();
        let u = GridField::sample(&spec, |x| qhess::quaternion::quadratic_value(&a, x)).unwrap();
        for m in 1..=2 {
            prop_assert!(hessian_density(&u, m).unwrap().min() > 0.0);
        }
    }
}
