#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use saf_core::exactnum::rat;
use saf_core::involutions::Sym;
use saf_core::{wedge_k, GenPerm, KNum, LinearInvolution, WedgeNum};

pub fn sqrt5() -> KNum {
    KNum::sqrt_int(5).unwrap()
}

/// a + b√5 with small positive a and b ≥ 0.
pub fn random_k(rng: &mut ChaCha8Rng) -> KNum {
    let a = KNum::frac(rng.gen_range(1..=6), rng.gen_range(1..=3));
    let b = KNum::frac(rng.gen_range(0..=3), rng.gen_range(1..=2));
    &a + &(&b * &sqrt5())
}

pub fn random_perm(rng: &mut ChaCha8Rng, d: usize) -> GenPerm {
    loop {
        let mut slots: Vec<Sym> = (0..d).flat_map(|i| [i.to_string(), i.to_string()]).collect();
        slots.shuffle(rng);
        let l = rng.gen_range(1..2 * d);
        let bottom = slots.split_off(l);
        if let Ok(g) = GenPerm::new(slots, bottom) {
            if g.admits_lengths() && g.irreducible() {
                return g;
            }
        }
    }
}

/// Positive lengths with equal row sums: the excess is pushed onto a letter seen twice in the short row.
pub fn lengths_for(g: &GenPerm, rng: &mut ChaCha8Rng) -> BTreeMap<Sym, KNum> {
    let mut m: BTreeMap<Sym, KNum> = g.alphabet().into_iter().map(|s| (s, random_k(rng))).collect();
    balance(g, &mut m);
    m
}

pub fn balance(g: &GenPerm, m: &mut BTreeMap<Sym, KNum>) {
    let sum = |row: &[Sym], m: &BTreeMap<Sym, KNum>| row.iter().map(|s| m[s].clone()).sum::<KNum>();
    let diff = &sum(&g.top, m) - &sum(&g.bottom, m);
    if diff.is_zero() {
        return;
    }
    let (row, need) = if diff.sign() > 0 { (&g.bottom, diff) } else { (&g.top, -diff) };
    let twice = row.iter().find(|s| row.iter().filter(|t| t == s).count() == 2).expect("admits lengths").clone();
    let x = &m[&twice] + &need.scale(&rat(1, 2));
    m.insert(twice, x);
}

pub fn random_involution(rng: &mut ChaCha8Rng, d: usize) -> LinearInvolution {
    let g = random_perm(rng, d);
    let l = lengths_for(&g, rng);
    LinearInvolution::validate(g, l).unwrap()
}

/// Σ λ_α ∧ t_α with t_α read off the two rows; true permutations only.
pub fn classical_saf(t: &LinearInvolution) -> WedgeNum {
    let pos = |row: &[Sym], s: &str| -> KNum {
        let i = row.iter().position(|x| x == s).unwrap();
        row[..i].iter().map(|x| t.lengths[x].clone()).sum()
    };
    t.perm
        .alphabet()
        .iter()
        .map(|s| wedge_k(&t.lengths[s], &(&pos(&t.perm.bottom, s) - &pos(&t.perm.top, s))).unwrap())
        .sum()
}

/// One step of the involution on I × {0, 1}, written from the definition. None at the right
/// end L, which the reflecting branches can reach from a left endpoint.
pub fn step(t: &LinearInvolution, x: &KNum, level: usize) -> Option<(KNum, usize)> {
    let rows = [&t.perm.top, &t.perm.bottom];
    let row = rows[level];
    let mut acc = KNum::zero();
    let mut here = None;
    for (i, s) in row.iter().enumerate() {
        let next = &acc + &t.lengths[s];
        if *x < next {
            here = Some((i, acc.clone()));
            break;
        }
        acc = next;
    }
    let (i, left) = here?;
    let s = &row[i];
    let lam = &t.lengths[s];
    // the other occurrence of s
    let mut other = None;
    for (r, rw) in rows.iter().enumerate() {
        let mut a = KNum::zero();
        for (j, u) in rw.iter().enumerate() {
            if u == s && (r, j) != (level, i) {
                other = Some((r, a.clone()));
            }
            a += &t.lengths[u];
        }
    }
    let (r2, left2) = other.unwrap();
    let off = x - &left;
    Some(if r2 != level { (&left2 + &off, level) } else { (&(&left2 + lam) - &off, 1 - level) })
}

/// Every sample orbit repeats a point within `max` steps. The reflecting branches are not
/// injective at interval ends, so a repeat need not be the starting point.
pub fn orbits_close(t: &LinearInvolution, samples: &[(KNum, usize)], max: usize) -> bool {
    samples.iter().all(|(x0, l0)| {
        let mut seen = std::collections::BTreeSet::new();
        let (mut x, mut l) = (x0.clone(), *l0);
        for _ in 0..max {
            if !seen.insert((x.clone(), l)) {
                return true;
            }
            match step(t, &x, l) {
                Some(next) => (x, l) = next,
                None => return true,
            }
        }
        false
    })
}

/// Midpoints of every interval and the points k/7 of the whole, on both levels.
pub fn sample_points(t: &LinearInvolution) -> Vec<(KNum, usize)> {
    let total = t.total_length();
    let mut out = Vec::new();
    for (level, row) in [&t.perm.top, &t.perm.bottom].into_iter().enumerate() {
        let mut acc = KNum::zero();
        for s in row {
            out.push((&acc + &t.lengths[s].scale(&rat(1, 2)), level));
            acc += &t.lengths[s];
        }
        for k in 1..7 {
            out.push((total.scale(&rat(k, 7)), level));
        }
    }
    out
}
