//! Suspensions of generalized permutations and the stratum they land in.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::exactnum::{KNum, KVec2, Rat};
use crate::flatsurf::{FlatSurface, Gluing, Sign, TransversalPiece};
use crate::fm::{solve, Constraint, Rel};
use crate::involutions::{GenPerm, Sym};
use crate::{Error, Result};

/// ζ_α = λ_α + i·τ_α for every symbol.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuspensionData {
    pub perm: String,
    pub lengths: BTreeMap<Sym, KNum>,
    #[serde_as(as = "BTreeMap<_, DisplayFromStr>")]
    pub tau: BTreeMap<Sym, Rat>,
}

impl SuspensionData {
    /// Checks the sign conditions on partial sums and both row-sum equalities.
    pub fn new(g: &GenPerm, lengths: BTreeMap<Sym, KNum>, tau: BTreeMap<Sym, Rat>) -> Result<Self> {
        for s in g.alphabet() {
            if !lengths.get(&s).is_some_and(|x| x.sign() > 0) || !tau.contains_key(&s) {
                return Err(Error::Invalid(format!("symbol `{s}` needs a positive length and a height")));
            }
        }
        let sum_l = |row: &[Sym]| row.iter().map(|s| lengths[s].clone()).sum::<KNum>();
        let sum_t = |row: &[Sym]| row.iter().map(|s| tau[s].clone()).sum::<Rat>();
        if sum_l(&g.top) != sum_l(&g.bottom) || sum_t(&g.top) != sum_t(&g.bottom) {
            return Err(Error::Invalid("rows of the suspension do not close up".into()));
        }
        let top_ok = (1..g.top.len()).all(|k| sum_t(&g.top[..k]) > Rat::zero());
        let bot_ok = (1..g.bottom.len()).all(|k| sum_t(&g.bottom[..k]) < Rat::zero());
        if !(top_ok && bot_ok) {
            return Err(Error::Invalid("partial heights have the wrong sign".into()));
        }
        Ok(SuspensionData { perm: g.to_string(), lengths, tau })
    }

    fn zeta(&self, s: &str) -> KVec2 {
        [self.lengths[s].clone(), KNum::from_rat(self.tau[s].clone())]
    }

    /// Both broken lines end on the real axis, so the polygon splits along the transversal.
    pub fn is_balanced(&self) -> Result<bool> {
        let g = GenPerm::parse(&self.perm)?;
        Ok(g.top.iter().map(|s| self.tau[s].clone()).sum::<Rat>().is_zero())
    }
}

fn coeffs(alphabet: &[Sym], syms: &[Sym]) -> Vec<Rat> {
    let mut a = vec![Rat::zero(); alphabet.len()];
    for s in syms {
        let i = alphabet.iter().position(|x| x == s).expect("symbol in alphabet");
        a[i] += Rat::one();
    }
    a
}

fn row_difference(alphabet: &[Sym], g: &GenPerm) -> Vec<Rat> {
    coeffs(alphabet, &g.top).into_iter().zip(coeffs(alphabet, &g.bottom)).map(|(t, b)| t - b).collect()
}

/// Strict system on τ: top prefix sums > 0, bottom prefix sums < 0, equal row sums.
fn tau_system(g: &GenPerm, balanced: bool) -> (Vec<Sym>, Vec<Constraint>) {
    let alphabet = g.alphabet();
    let mut cons = Vec::new();
    for k in 1..g.top.len() {
        cons.push(Constraint::new(coeffs(&alphabet, &g.top[..k]), Rel::Gt, Rat::zero()));
    }
    for k in 1..g.bottom.len() {
        let a = coeffs(&alphabet, &g.bottom[..k]).into_iter().map(|x| -x).collect();
        cons.push(Constraint::new(a, Rel::Gt, Rat::zero()));
    }
    cons.push(Constraint::new(row_difference(&alphabet, g), Rel::Eq, Rat::zero()));
    if balanced {
        cons.push(Constraint::new(coeffs(&alphabet, &g.top), Rel::Eq, Rat::zero()));
    }
    (alphabet, cons)
}

/// Whether positive λ and some τ satisfy the suspension constraints.
pub fn suspension_feasible(g: &GenPerm) -> bool {
    let (alphabet, cons) = tau_system(g, false);
    generic_lengths(g).is_ok() && solve(alphabet.len(), &cons).is_some()
}

pub fn find_suspension_data(g: &GenPerm, lengths: &BTreeMap<Sym, KNum>) -> Result<SuspensionData> {
    let alphabet = g.alphabet();
    for s in &alphabet {
        match lengths.get(s) {
            Some(x) if x.sign() > 0 => {}
            _ => return Err(Error::Invalid(format!("symbol `{s}` needs a positive length"))),
        }
    }
    let top: KNum = g.top.iter().map(|s| lengths[s].clone()).sum();
    let bot: KNum = g.bottom.iter().map(|s| lengths[s].clone()).sum();
    if top != bot {
        return Err(Error::Invalid(format!("row-sum mismatch: top {top} vs bottom {bot}")));
    }
    // endpoints on the real axis if possible, else a polygon kept simple on the side where E sits
    let n = alphabet.len();
    let (_, base) = tau_system(g, false);
    let mut systems = vec![tau_system(g, true).1];
    for above in [true, false] {
        let mut cons = base.clone();
        cons.extend(simplicity(g, lengths, &alphabet, above));
        systems.push(cons);
    }
    systems.push(base);
    let tau = systems
        .iter()
        .find_map(|cons| solve(n, cons))
        .ok_or_else(|| Error::Infeasible(format!("no suspension for ({g}); it is reducible")))?;
    SuspensionData::new(g, lengths.clone(), alphabet.into_iter().zip(tau).collect())
}

/// With E above the axis, every top vertex right of the last bottom vertex lies above
/// the last bottom edge (mirror statement when E is below). Uses λ rounded to a rational;
/// suspend re-checks the exact polygon.
fn simplicity(g: &GenPerm, lengths: &BTreeMap<Sym, KNum>, alphabet: &[Sym], above: bool) -> Vec<Constraint> {
    let (near, far) = if above { (&g.top, &g.bottom) } else { (&g.bottom, &g.top) };
    let approx = |s: &Sym| Rat::from_float(lengths[s].to_f64()).expect("finite length");
    let total: Rat = near.iter().map(approx).sum();
    let k_last = far.len() - 1;
    let x_last: Rat = far[..k_last].iter().map(approx).sum();
    let flip = |v: Vec<Rat>| if above { v } else { v.into_iter().map(|x| -x).collect::<Vec<_>>() };
    let y_last = coeffs(alphabet, &far[..k_last]);
    let y_end = coeffs(alphabet, near);
    let mut out = Vec::new();
    // E strictly on the chosen side
    out.push(Constraint::new(flip(y_end.clone()), Rel::Gt, Rat::zero()));
    for k in 1..near.len() {
        let xk: Rat = near[..k].iter().map(approx).sum();
        if xk < x_last {
            continue;
        }
        let yk = coeffs(alphabet, &near[..k]);
        // (y_k − y_last)(L − x_last) − (Y − y_last)(x_k − x_last) > 0
        let (p, q) = (&total - &x_last, &xk - &x_last);
        let a = (0..alphabet.len()).map(|i| (&yk[i] - &y_last[i]) * &p - (&y_end[i] - &y_last[i]) * &q).collect();
        out.push(Constraint::new(flip(a), Rel::Gt, Rat::zero()));
    }
    out
}

/// Positive lengths with equal row sums, all at least 1.
pub fn generic_lengths(g: &GenPerm) -> Result<BTreeMap<Sym, KNum>> {
    let alphabet = g.alphabet();
    let n = alphabet.len();
    let mut cons: Vec<Constraint> = (0..n)
        .map(|i| {
            let mut a = vec![Rat::zero(); n];
            a[i] = Rat::one();
            Constraint::new(a, Rel::Ge, Rat::one())
        })
        .collect();
    cons.push(Constraint::new(row_difference(&alphabet, g), Rel::Eq, Rat::zero()));
    let x = solve(n, &cons).ok_or_else(|| Error::Infeasible(format!("no lengths balance the rows of ({g})")))?;
    Ok(alphabet.into_iter().zip(x.into_iter().map(KNum::from_rat)).collect())
}

fn prefix(z: &[KVec2]) -> Vec<KVec2> {
    let mut out = vec![[KNum::zero(), KNum::zero()]];
    for v in z {
        let last = out.last().expect("non-empty");
        out.push([&last[0] + &v[0], &last[1] + &v[1]]);
    }
    out
}

/// Glues the two broken lines: +Id across rows, −Id within a row.
pub fn suspend(data: &SuspensionData) -> Result<FlatSurface> {
    let g = GenPerm::parse(&data.perm)?;
    let (l, m) = (g.top.len(), g.bottom.len());
    let tz: Vec<KVec2> = g.top.iter().map(|s| data.zeta(s)).collect();
    let bz: Vec<KVec2> = g.bottom.iter().map(|s| data.zeta(s)).collect();
    let (tp, bp) = (prefix(&tz), prefix(&bz));
    // edge of each occurrence: (row, index) -> (polygon, edge)
    let mut edge_of: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    let (polygons, mut gluings) = if data.is_balanced()? {
        let mut upper = vec![tp[0].clone(), tp[l].clone()];
        upper.extend((1..l).rev().map(|k| tp[k].clone()));
        for k in 1..=l {
            edge_of.insert((0, l - k), (0, k));
        }
        let lower: Vec<KVec2> = bp[..m].iter().chain(std::iter::once(&bp[m])).cloned().collect();
        for k in 0..m {
            edge_of.insert((1, k), (1, k));
        }
        (vec![upper, lower], vec![Gluing::new((0, 0), (1, m), Sign::Plus)])
    } else {
        let mut poly: Vec<KVec2> = bp[..=m].to_vec();
        poly.extend((1..l).rev().map(|k| tp[k].clone()));
        for k in 0..m {
            edge_of.insert((1, k), (0, k));
        }
        for k in 0..l {
            edge_of.insert((0, k), (0, m + (l - 1 - k)));
        }
        (vec![poly], vec![])
    };
    let mut pending: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (r, row) in [&g.top, &g.bottom].iter().enumerate() {
        for (i, s) in row.iter().enumerate() {
            if let Some((r0, i0)) = pending.remove(s.as_str()) {
                let sign = if r0 == r { Sign::Minus } else { Sign::Plus };
                gluings.push(Gluing::new(edge_of[&(r0, i0)], edge_of[&(r, i)], sign));
            } else {
                pending.insert(s, (r, i));
            }
        }
    }
    FlatSurface::new(polygons, gluings)
}

/// The segment from the origin to the common endpoint, available for balanced data.
pub fn natural_transversal(data: &SuspensionData) -> Result<Option<Vec<TransversalPiece>>> {
    if !data.is_balanced()? {
        return Ok(None);
    }
    let g = GenPerm::parse(&data.perm)?;
    let total: KNum = g.top.iter().map(|s| data.lengths[s].clone()).sum();
    Ok(Some(vec![TransversalPiece::new(0, 0, KNum::zero(), total)]))
}

/// Stratum of the suspension with generic lengths, e.g. Q(-1^3,1,2).
pub fn stratum_of(g: &GenPerm) -> Result<String> {
    let lengths = generic_lengths(g)?;
    let data = find_suspension_data(g, &lengths)?;
    Ok(suspend(&data)?.stratum())
}

/// Orders of the singularities of a generic suspension, marked points dropped.
pub fn orders_of(g: &GenPerm) -> Result<Vec<i64>> {
    let lengths = generic_lengths(g)?;
    let s = suspend(&find_suspension_data(g, &lengths)?)?;
    let mut o: Vec<i64> = s.orders().into_iter().filter(|x| *x != 0).collect();
    o.sort();
    Ok(o)
}
