use klcore::count::{fit_samples, FitStatus};
use klcore::ffield::{CyclotomicInt, DEFAULT_BUDGET};
use klcore::spaces::{build_trace_functional, Family, GradedSpace, SpaceParams};
use klcore::tracesum::{group_locus, trace_sum, TraceFunction};
use klcore::varieties::{count_points, enum_variety, registry, registry_names, FormId, Relation};
use proptest::prelude::*;

const PRIMES: [u32; 5] = [3, 5, 7, 11, 13];
const SAMPLE_PRIMES: [u32; 8] = [3, 5, 7, 11, 13, 17, 19, 23];

fn spaces() -> Vec<GradedSpace> {
    [
        SpaceParams::symplectic(1, 1),
        SpaceParams::symplectic(2, 1),
        SpaceParams::orthogonal(Family::B, 2, 1, None),
        SpaceParams::orthogonal(Family::D2, 2, 1, None),
    ]
    .iter()
    .map(|p| p.build().unwrap())
    .collect()
}

fn forms(space: &GradedSpace) -> Vec<FormId> {
    let l = space.l();
    if space.is_symplectic() {
        let mut out = vec![FormId::FrobTop];
        for i in 1..=l {
            out.extend([FormId::Gamma(i), FormId::GammaSum(i), FormId::PhiPair(i)]);
        }
        out
    } else {
        let mut out = vec![FormId::QFull, FormId::Q0, FormId::Ql];
        out.extend((1..=l).map(FormId::QRange));
        out.extend((1..=l).map(FormId::OmegaChain));
        out.extend((0..l).map(FormId::OrthPair));
        out
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn polynomial_counts_are_recovered(coeffs in prop::collection::vec(0u64..50, 1..6)) {
        let degree = coeffs.len() - 1;
        let eval = |q: u32| coeffs.iter().rev().fold(0u64, |acc, c| acc * q as u64 + c);
        let samples: Vec<(u32, u64)> = SAMPLE_PRIMES[..degree + 3].iter().map(|&q| (q, eval(q))).collect();
        let fit = fit_samples(&samples, degree).unwrap();
        prop_assert_eq!(fit.status, FitStatus::Valid);
        prop_assert_eq!(fit.chi, Some(coeffs.iter().sum::<u64>() as i64));
    }

    #[test]
    fn perturbed_holdout_is_rejected(coeffs in prop::collection::vec(0u64..50, 1..6), bump in 1u64..5) {
        let degree = coeffs.len() - 1;
        let eval = |q: u32| coeffs.iter().rev().fold(0u64, |acc, c| acc * q as u64 + c);
        let mut samples: Vec<(u32, u64)> = SAMPLE_PRIMES[..degree + 2].iter().map(|&q| (q, eval(q))).collect();
        samples.last_mut().unwrap().1 += bump;
        prop_assert_eq!(fit_samples(&samples, degree).unwrap().status, FitStatus::NonPolynomial);
    }

    #[test]
    fn counts_are_additive(space_ix in 0usize..4, prime_ix in 0usize..5, seed in 0u64..4, locus_ix in 0usize..64, form_ix in 0usize..64) {
        let space = &spaces()[space_ix];
        let p = PRIMES[prime_ix];
        let phi = build_trace_functional(space, seed, p).unwrap();
        let names = registry_names(space);
        let base = registry(space, &names[locus_ix % names.len()]).unwrap();
        let fs = forms(space);
        let form = fs[form_ix % fs.len()];
        let total = count_points(&base, space, &phi, DEFAULT_BUDGET).unwrap();
        let split = |a: Relation, b: Relation| -> Option<u64> {
            let x = count_points(&base.clone().with(form, a), space, &phi, DEFAULT_BUDGET).ok()?;
            let y = count_points(&base.clone().with(form, b), space, &phi, DEFAULT_BUDGET).ok()?;
            Some(x + y)
        };
        // forms whose pieces are missing from this ambient are rejected, not miscounted
        if let Some(sum) = split(Relation::Eq0, Relation::Ne0) {
            prop_assert_eq!(sum, total);
        }
        if !base.ambient.is_projective() {
            if let Some(sum) = split(Relation::Eq1, Relation::Ne1) {
                prop_assert_eq!(sum, total);
            }
        }
    }

    #[test]
    fn character_sums_of_multisets(prime_ix in 0usize..5, values in prop::collection::vec(0u32..1000, 0..40)) {
        let p = PRIMES[prime_ix];
        let mut s = CyclotomicInt::zero(p);
        for &v in &values {
            s.accumulate(v % p);
        }
        let mut total = CyclotomicInt::zero(p);
        for a in 0..p {
            total = total.try_add(&s.conjugate(a)).unwrap();
        }
        let zeros = values.iter().filter(|&&v| v % p == 0).count() as i64;
        prop_assert_eq!(total.as_integer(), Some(p as i64 * zeros));
        let mut shifted = s.clone();
        for r in 0..p {
            shifted.accumulate(r);
        }
        prop_assert_eq!(shifted, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trace_sums_are_orthogonal(space_ix in 0usize..3, prime_ix in 0usize..5, x in 1u32..13, seed in 0u64..3) {
        let space = &spaces()[space_ix];
        let p = PRIMES[prime_ix];
        let x = x % p;
        prop_assume!(x != 0);
        let phi = build_trace_functional(space, seed, p).unwrap();
        let mut total = CyclotomicInt::zero(p);
        for a in 0..p {
            total = total.try_add(&trace_sum(space, &phi, x, a, DEFAULT_BUDGET).unwrap()).unwrap();
        }
        let f = TraceFunction::full(space, &phi).unwrap();
        let points = enum_variety(&group_locus(space).unwrap(), space, &phi, DEFAULT_BUDGET).unwrap();
        let zeros = points.iter().filter(|pt| f.value(x, pt).unwrap() == 0).count() as i64;
        prop_assert_eq!(total.as_integer(), Some(p as i64 * zeros));
    }
}

#[test]
fn additivity_cases_are_not_all_rejected() {
    let mut checked = 0;
    for space in spaces() {
        let phi = build_trace_functional(&space, 0, 5).unwrap();
        for name in registry_names(&space) {
            let base = registry(&space, &name).unwrap();
            for form in forms(&space) {
                if count_points(&base.clone().with(form, Relation::Eq0), &space, &phi, DEFAULT_BUDGET).is_ok() {
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 50, "only {checked} valid splits");
}
