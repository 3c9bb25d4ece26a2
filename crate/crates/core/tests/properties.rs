//! Property tests for the spectral and rearrangement invariants.

use nalgebra::DMatrix;
use ncergo::algebra::TraceAlgebra;
use ncergo::channels::ChannelOperator;
use ncergo::orlicz::{orlicz_norm, s_numbers, OrliczFunction};
use ncergo::spherical::{spherical_avg_bruteforce, spherical_avg_recursive, DirectSum};
use ncergo::words::{LetterAction, SphereChain};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::RngCore;

fn algebra() -> TraceAlgebra {
    TraceAlgebra::new(vec![(2, 0.3), (1, 0.4)], false).unwrap()
}

/// Self-adjoint element of the (2 ⊕ 1)-block algebra from 5 real parameters.
fn self_adjoint(params: [f64; 5]) -> ncergo::algebra::AlgElement {
    let alg = algebra();
    let [a, b, c, d, e] = params;
    let m2 = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(a, 0.0),
            Complex64::new(c, d),
            Complex64::new(c, -d),
            Complex64::new(b, 0.0),
        ],
    );
    let m1 = DMatrix::from_element(1, 1, Complex64::new(e, 0.0));
    alg.element(vec![m2, m1]).unwrap()
}

fn param() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Spectral reconstruction: Σ λᵢ eᵢ = x in operator norm.
    #[test]
    fn spectral_reconstruction(a in param(), b in param(), c in param(), d in param(), e in param()) {
        let alg = algebra();
        let x = self_adjoint([a, b, c, d, e]);
        let decomp = alg.spectral_decomposition(&x).unwrap();
        let mut rec = alg.zero();
        let mut projector_sum = alg.zero();
        for (l, p) in &decomp {
            rec = rec.add(&p.scale_re(*l));
            projector_sum = projector_sum.add(p);
            // idempotent
            prop_assert!(p.mul(p).sub(p).max_abs() < 1e-9);
        }
        // mutually orthogonal
        for i in 0..decomp.len() {
            for j in (i + 1)..decomp.len() {
                prop_assert!(decomp[i].1.mul(&decomp[j].1).max_abs() < 1e-9);
            }
        }
        prop_assert!(rec.sub(&x).max_abs() < 1e-9);
        prop_assert!(projector_sum.sub(&alg.unit()).max_abs() < 1e-9);
    }

    /// τ(|x|) equals the full integral of the singular-number profile.
    #[test]
    fn trace_equals_profile_integral(a in param(), b in param(), c in param(), d in param(), e in param()) {
        let alg = algebra();
        let x = self_adjoint([a, b, c, d, e]);
        let mu = s_numbers(&alg, &x).unwrap();
        let l1 = alg.lp_norm(&x, 1.0).unwrap();
        prop_assert!((mu.total_integral() - l1).abs() < 1e-10);
    }

    /// The operator Luxemburg norm equals the scalar norm of the profile.
    #[test]
    fn orlicz_norm_matches_profile(a in param(), b in param(), c in param(), d in param(), e in param()) {
        let alg = algebra();
        let x = self_adjoint([a, b, c, d, e]);
        let psi = OrliczFunction::llogl();
        let direct = orlicz_norm(&alg, &x, &psi).unwrap();
        let via_profile = s_numbers(&alg, &x).unwrap().luxemburg_norm(&psi).unwrap();
        prop_assert!((direct - via_profile).abs() <= 1e-9 * direct.max(1.0));
    }

    /// 0 ≤ x ≤ y forces μ_t(x) ≤ μ_t(y) at every breakpoint.
    #[test]
    fn profile_monotone_under_domination(
        a in param(), b in param(), c in param(), d in param(), e in param(),
        ga in param(), gb in param(), gc in param(), gd in param(), ge in param(),
    ) {
        let alg = algebra();
        let x0 = self_adjoint([a, b, c, d, e]);
        let g0 = self_adjoint([ga, gb, gc, gd, ge]);
        // squares are positive; y = x + gap dominates x
        let x = x0.mul(&x0);
        let y = x.add(&g0.mul(&g0));
        let mu_x = s_numbers(&alg, &x).unwrap();
        let mu_y = s_numbers(&alg, &y).unwrap();
        prop_assert!(mu_x.dominated_pointwise_by(&mu_y, 1e-10));
    }

    /// Channel adjoints satisfy ⟨Tx, y⟩ = ⟨x, T*y⟩.
    #[test]
    fn adjoint_pairing(
        a in param(), b in param(), c in param(), d in param(), e in param(),
        f in param(), g in param(), h in param(), i in param(), j in param(),
        theta in 0.0..std::f64::consts::TAU,
    ) {
        let alg = algebra();
        // a one-parameter unitary mixing the 2×2 block
        let u = alg.element(vec![
            DMatrix::from_row_slice(2, 2, &[
                Complex64::new(theta.cos(), 0.0), Complex64::new(-theta.sin(), 0.0),
                Complex64::new(theta.sin(), 0.0), Complex64::new(theta.cos(), 0.0),
            ]),
            DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
        ]).unwrap();
        let t = ChannelOperator::conjugation(&alg, &u).unwrap();
        let ts = t.adjoint();
        let x = self_adjoint([a, b, c, d, e]);
        let y = self_adjoint([f, g, h, i, j]);
        let lhs = alg.inner(&t.apply(&x).unwrap(), &y);
        let rhs = alg.inner(&x, &ts.apply(&y).unwrap());
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Oracle equivalence on random diagonal scenarios.
    #[test]
    fn recursion_agrees_with_enumeration(seed in 0u64..1000) {
        let alg = TraceAlgebra::diagonal(5).unwrap();
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        // two random permutations of 5 points
        let mut perm = [0usize, 1, 2, 3, 4];
        for k in (1..5).rev() {
            let j = (rng.next_u64() % (k as u64 + 1)) as usize;
            perm.swap(k, j);
        }
        let p1 = ChannelOperator::permutation(&alg, &perm).unwrap();
        let p2 = ChannelOperator::permutation(&alg, &[1, 2, 3, 4, 0]).unwrap();
        let action = LetterAction::group_from_automorphisms(alg.clone(), vec![p1, p2]).unwrap();
        let chain = SphereChain::free_group(2).unwrap();
        let ds = DirectSum::new(action, chain).unwrap();
        let x = alg.random_self_adjoint(&mut rng);
        for n in 0..=4usize {
            let fast = spherical_avg_recursive(&ds, n, &x).unwrap();
            let slow = spherical_avg_bruteforce(ds.action(), ds.chain(), n, &x, None).unwrap();
            prop_assert!(fast.sub(&slow).max_abs() < 1e-10);
        }
    }
}
