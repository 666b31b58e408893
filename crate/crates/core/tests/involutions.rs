mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use saf_core::exactnum::rat;
use saf_core::involutions::{all_gen_perms, decide_complete_periodicity};
use saf_core::suspension::suspension_feasible;
use saf_core::{wedge_k, GenPerm, KNum, LinearInvolution, VerdictKind};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn rotation_saf_is_twice_one_wedge_theta() {
    // θ = √5/(1+√5)
    let s5 = sqrt5();
    let theta = &s5 / &(&KNum::one() + &s5);
    let t = LinearInvolution::from_pairs("A B / B A", &[("A", &KNum::one() - &theta), ("B", theta.clone())]).unwrap();
    assert_eq!(t.saf(), wedge_k(&KNum::one(), &theta).unwrap().scale(&rat(2, 1)));
}

#[test]
fn irreducible_iff_suspension_up_to_four_letters() {
    for d in 2..=4 {
        for g in all_gen_perms(d).into_iter().filter(GenPerm::admits_lengths) {
            assert_eq!(g.irreducible(), suspension_feasible(&g), "{g}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn saf_matches_classical_iet(seed in any::<u64>(), d in 2usize..=6) {
        let mut r = rng(seed);
        let t = loop {
            let t = random_involution(&mut r, d);
            if t.perm.is_true_permutation() {
                break t;
            }
        };
        prop_assert_eq!(t.saf(), classical_saf(&t));
    }

    #[test]
    fn saf_via_double_agrees(seed in any::<u64>(), d in 2usize..=6) {
        let t = random_involution(&mut rng(seed), d);
        prop_assert_eq!(t.saf(), t.saf_via_double());
    }

    #[test]
    fn rauzy_keeps_saf(seed in any::<u64>(), d in 2usize..=7) {
        let t = random_involution(&mut rng(seed), d);
        if let Ok((r, _)) = t.rauzy() {
            prop_assert_eq!(r.saf(), t.saf());
        }
    }

    #[test]
    fn singular_rauzy_keeps_saf(seed in any::<u64>(), d in 3usize..=7) {
        let mut r = rng(seed);
        let g = random_perm(&mut r, d);
        let (x, y) = (g.top.last().unwrap().clone(), g.bottom.last().unwrap().clone());
        prop_assume!(x != y);
        let mut l = lengths_for(&g, &mut r);
        l.insert(y.clone(), l[&x].clone());
        balance(&g, &mut l);
        prop_assume!(l[&x] == l[&y]);
        let t = LinearInvolution::validate(g, l).unwrap();
        if let Ok((s, _)) = t.rauzy_sing() {
            prop_assert_eq!(s.saf(), t.saf());
            prop_assert_eq!(s.d(), t.d() - 1);
        }
    }

    #[test]
    fn decision_agrees_with_orbits(seed in any::<u64>(), d in 2usize..=3) {
        let t = random_involution(&mut rng(seed), d);
        let v = decide_complete_periodicity(&t, 10_000);
        prop_assert_ne!(v.kind, VerdictKind::Inconclusive);
        let closes = orbits_close(&t, &sample_points(&t), 5_000);
        prop_assert_eq!(v.kind == VerdictKind::CP, closes, "{}", t);
    }
}
