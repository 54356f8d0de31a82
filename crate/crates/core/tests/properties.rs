use bergman_lab::weights::iterated_coeff;
use bergman_lab::{
    inner, lower_bound, random_vector, shift_coeff, weight_sequence, Alpha, CoefficientVector, WeightParams,
};
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn rational_alpha() -> impl Strategy<Value = Alpha> {
    (-99i64..400, 1i64..100)
        .prop_filter("alpha > -1", |(p, q)| *p > -*q)
        .prop_map(|(p, q)| Alpha::from_ratio(p, q))
}

fn float_alpha() -> impl Strategy<Value = f64> {
    -0.999f64..50.0
}

proptest! {
    #[test]
    fn coefficients_times_weights_step_the_sequence(alpha in rational_alpha(), n in 1usize..5, d in 6usize..30) {
        let p = WeightParams::new(alpha.clone(), n, d + n).unwrap();
        let w = weight_sequence::<BigRational>(&p).unwrap();
        let v = w.values();
        prop_assert!(v[0].is_one());
        for k in 0..d {
            let c = shift_coeff::<BigRational>(n, &alpha, k).unwrap();
            prop_assert_eq!(&c * &v[k], v[k + n].clone());
        }
        for k in 0..v.len() - 1 {
            let step = BigRational::from_integer(BigInt::from(k + 1))
                / (BigRational::from_integer(BigInt::from(k + 2)) + alpha.exact().unwrap());
            prop_assert_eq!(&v[k] * step, v[k + 1].clone());
            prop_assert!(v[k + 1] < v[k]);
        }
    }

    #[test]
    fn coefficient_bounds_are_strict(alpha in rational_alpha(), n in 1usize..6, k in 0usize..500) {
        let c = shift_coeff::<BigRational>(n, &alpha, k).unwrap();
        let lb = lower_bound::<BigRational>(n, &alpha).unwrap();
        prop_assert!(lb > BigRational::zero());
        prop_assert!(lb < c);
        prop_assert!(c < BigRational::one());
    }

    #[test]
    fn float_coefficient_bounds(alpha in float_alpha(), n in 1usize..6, k in 0usize..2000) {
        let a = Alpha::from_f64(alpha);
        let c = shift_coeff::<f64>(n, &a, k).unwrap();
        let lb = lower_bound::<f64>(n, &a).unwrap();
        prop_assert!(0.0 < lb && lb < c && c < 1.0, "lb={lb} c={c}");
    }

    #[test]
    fn iterated_coefficients_exceed_one(alpha in rational_alpha(), n in 1usize..5, k in 0usize..60, m in 1usize..6) {
        let c = iterated_coeff::<BigRational>(n, &alpha, k, m).unwrap();
        prop_assert!(c > BigRational::one());
        let p = WeightParams::new(alpha.clone(), 1, k + m * n + 1).unwrap();
        let w = weight_sequence::<BigRational>(&p).unwrap();
        prop_assert_eq!(c, &w.values()[k] / &w.values()[k + m * n]);
    }

    #[test]
    fn cauchy_schwarz(alpha in float_alpha(), d in 2usize..64, s1 in any::<u64>(), s2 in any::<u64>()) {
        let p = WeightParams::new(Alpha::from_f64(alpha), 1, d).unwrap();
        let space = weight_sequence::<f64>(&p).unwrap().space(d).unwrap();
        let f = random_vector(&space, s1);
        let g = random_vector(&space, s2);
        let fg = inner(&f, &g).unwrap().norm();
        let ff = inner(&f, &f).unwrap().re;
        let gg = inner(&g, &g).unwrap().re;
        prop_assert!(fg <= (ff * gg).sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn parallelogram_law_is_exact(alpha in rational_alpha(), d in 2usize..16, s1 in any::<u64>(), s2 in any::<u64>()) {
        let p = WeightParams::new(alpha, 1, d).unwrap();
        let space = weight_sequence::<BigRational>(&p).unwrap().space(d).unwrap();
        let f = random_vector(&space, s1);
        let g = random_vector(&space, s2);
        let combine = |sign: i64| {
            let coeffs: Vec<Complex<BigRational>> = f
                .coeffs()
                .iter()
                .zip(g.coeffs())
                .map(|(a, b)| a + b.scale(BigRational::from_integer(sign.into())))
                .collect();
            CoefficientVector::new(&space, coeffs).unwrap()
        };
        let two = BigRational::from_integer(2.into());
        let lhs = combine(1).norm_sqr() + combine(-1).norm_sqr();
        let rhs = two * (f.norm_sqr() + g.norm_sqr());
        prop_assert_eq!(lhs, rhs);
    }
}
