use klcore::ffield::{CyclotomicInt, Field, DEFAULT_BUDGET};
use klcore::linalg::Matrix;
use klcore::spaces::{build_orthogonal_space, build_symplectic_space, build_trace_functional, Family};
use klcore::tracesum::{f_phi_orth, f_phi_sym, projection_identity_check, trace_sum, IdentityStatus};
use klcore::varieties::Point;
use proptest::prelude::*;

/// C n=1 d=1 written on the 2x2 symmetric tensor T = t v v^T, with
/// v = (a, b) in M_1 + M_2:
///   f = x beta T22 - alpha T11 / (1 + T12), away from 1 + T12 = 0.
/// The loop runs over all (T11, T12, T22) with T11 T22 = T12^2, which are
/// exactly the symmetric tensors of rank at most one.
fn brute_force_c11(p: u32, alpha: u32, beta: u32, x: u32) -> CyclotomicInt {
    let f = Field::new(p as u64).unwrap();
    let mut coeffs = vec![0i64; p as usize];
    for t11 in 0..p {
        for t12 in 0..p {
            for t22 in 0..p {
                if f.mul(t11, t22) != f.mul(t12, t12) {
                    continue;
                }
                let Some(inv) = f.inv(f.add(1, t12)) else { continue };
                let value = f.sub(f.mul(f.mul(x, beta), t22), f.mul(f.mul(alpha, t11), inv));
                coeffs[value as usize] += 1;
            }
        }
    }
    CyclotomicInt::from_coeffs(p, coeffs)
}

#[test]
fn trace_sum_matches_brute_force_c11() {
    let space = build_symplectic_space(1, 1).unwrap();
    for p in [3u32, 5, 7] {
        let phi = build_trace_functional(&space, 0, p).unwrap();
        let alpha = phi.phi(&space, 1).get(0, 0);
        let beta = phi.phi(&space, 2).get(0, 0);
        for x in 1..p {
            let fast = trace_sum(&space, &phi, x, 1, DEFAULT_BUDGET).unwrap();
            assert_eq!(fast, brute_force_c11(p, alpha, beta, x), "p={p} x={x}");
        }
    }
}

#[test]
fn galois_conjugates() {
    for (space, p) in [
        (build_symplectic_space(1, 1).unwrap(), 5u32),
        (build_symplectic_space(2, 1).unwrap(), 5),
        (build_orthogonal_space(Family::B, 2, 1, None).unwrap(), 7),
    ] {
        let phi = build_trace_functional(&space, 0, p).unwrap();
        for x in [1, 2] {
            let s1 = trace_sum(&space, &phi, x, 1, DEFAULT_BUDGET).unwrap();
            for a in 1..p {
                let sa = trace_sum(&space, &phi, x, a, DEFAULT_BUDGET).unwrap();
                assert_eq!(sa, s1.conjugate(a), "{} a={a}", space.describe());
            }
        }
    }
}

#[test]
fn projection_holds_with_zero_top_map() {
    // the identity is pure character orthogonality, so it must survive a
    // functional that is no longer stable
    for (space, p) in [(build_symplectic_space(2, 1).unwrap(), 5u32), (build_orthogonal_space(Family::B, 2, 1, None).unwrap(), 5)] {
        let mut phi = build_trace_functional(&space, 1, p).unwrap();
        let last = phi.maps.len() - 1;
        let (r, c) = (phi.maps[last].rows, phi.maps[last].cols);
        phi.maps[last] = Matrix::zeros(r, c);
        let row = projection_identity_check(&space, &phi, DEFAULT_BUDGET).unwrap();
        assert_eq!(row.status, IdentityStatus::Pass, "{}", space.describe());
    }
}

fn nonzero_vec(v: Vec<u32>, p: u32) -> Vec<u32> {
    let mut v: Vec<u32> = v.into_iter().map(|x| x % p).collect();
    if v.iter().all(|&x| x == 0) {
        v[0] = 1;
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn symplectic_value_ignores_representative(v in prop::collection::vec(0u32..7, 4), t in 1u32..7, lam in 1u32..7, x in 1u32..7) {
        let p = 7;
        let space = build_symplectic_space(2, 1).unwrap();
        let phi = build_trace_functional(&space, 0, p).unwrap();
        let f = Field::new(p as u64).unwrap();
        let v = nonzero_vec(v, p);
        let w: Vec<u32> = v.iter().map(|&c| f.mul(lam, c)).collect();
        let t2 = f.mul(t, f.inv(f.mul(lam, lam)).unwrap());
        let a = f_phi_sym(&space, &phi, x, &Point::Tensor { t, u: v.clone(), v: v.clone() });
        let b = f_phi_sym(&space, &phi, x, &Point::Tensor { t: t2, u: w.clone(), v: w });
        prop_assert_eq!(a, b);
    }

    #[test]
    fn orthogonal_value_ignores_representative(v in prop::collection::vec(0u32..7, 5), lam in 1u32..7, x in 1u32..7) {
        let p = 7;
        let space = build_orthogonal_space(Family::B, 2, 1, None).unwrap();
        let phi = build_trace_functional(&space, 0, p).unwrap();
        let f = Field::new(p as u64).unwrap();
        let v = nonzero_vec(v[..space.dim()].to_vec(), p);
        let w: Vec<u32> = v.iter().map(|&c| f.mul(lam, c)).collect();
        let a = f_phi_orth(&space, &phi, x, &Point::Projective { u: v.clone(), v: v.clone() });
        let b = f_phi_orth(&space, &phi, x, &Point::Projective { u: w.clone(), v: w });
        prop_assert_eq!(a, b);
    }
}
