//! The Prym(1,1,2) prototype family, involutions on polygon data, real multiplication checks,
//! kernel moves, cylinder identities and the dimension-5 strata table.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_with::{serde_as, DisplayFromStr};

use super::homology::{invert, rank, Cycle};
use super::section::TransversalPiece;
use super::trace::CylinderDecomposition;
use super::{add, format_stratum, k, v2, EdgeRef, FlatSurface, Gluing, Sign};
use crate::exactnum::{rat, rat_int, KMat2, KNum, KVec2, KiNum, Rat};
use crate::{Error, Result};

/// Polygon q goes to polygon `poly[q]`, vertex i to vertex i + `shift[q]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolyMap {
    pub poly: Vec<usize>,
    pub shift: Vec<usize>,
}

impl PolyMap {
    pub fn edge(&self, s: &FlatSurface, (q, e): EdgeRef) -> EdgeRef {
        let q2 = self.poly[q];
        (q2, (e + self.shift[q]) % s.polygons()[q2].len())
    }

    pub fn cycle(&self, s: &FlatSurface, c: &Cycle) -> Cycle {
        Cycle {
            loops: c
                .loops
                .iter()
                .map(|l| {
                    l.iter()
                        .map(|ch| {
                            let (q, a) = self.edge(s, (ch.poly, ch.entry));
                            let (_, b) = self.edge(s, (ch.poly, ch.exit));
                            super::Chord::new(q, a, b)
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum FixedPoint {
    Vertex { class: usize, order: i64 },
    Centre { polygon: usize },
    EdgeMidpoint { polygon: usize, edge: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct PrymStructure {
    pub involution: PolyMap,
    pub fixed_points: Vec<FixedPoint>,
    pub minus_basis: Vec<Cycle>,
    pub intersection: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndoMatrix {
    pub m: Vec<Vec<i64>>,
}

impl EndoMatrix {
    pub fn new(m: Vec<Vec<i64>>) -> Self {
        EndoMatrix { m }
    }

    pub fn identity(n: usize) -> Self {
        EndoMatrix { m: (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect() }
    }

    fn mul(&self, o: &EndoMatrix) -> EndoMatrix {
        let n = self.m.len();
        EndoMatrix {
            m: (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| self.m[i][k] * o.m[k][j]).sum()).collect()).collect(),
        }
    }

    fn transpose(&self) -> EndoMatrix {
        let n = self.m.len();
        EndoMatrix { m: (0..n).map(|i| (0..n).map(|j| self.m[j][i]).collect()).collect() }
    }
}

impl FlatSurface {
    /// Checks that `t` is an isometric involution with derivative −Id compatible with the gluings.
    pub fn check_involution(&self, t: &PolyMap) -> Result<()> {
        let np = self.polygons().len();
        if t.poly.len() != np || t.shift.len() != np {
            return Err(Error::Invalid("involution must list every polygon".into()));
        }
        for q in 0..np {
            let q2 = t.poly[q];
            let n = self.polygons()[q].len();
            if q2 >= np || self.polygons()[q2].len() != n {
                return Err(Error::Invalid(format!("polygon {q} cannot map to {q2}")));
            }
            if t.poly[q2] != q || (t.shift[q] + t.shift[q2]) % n != 0 {
                return Err(Error::Invalid("map is not an involution".into()));
            }
            // z ↦ c − z
            let c = add(self.vertex(q, 0), self.vertex(q2, t.shift[q]));
            for i in 0..n {
                if add(self.vertex(q, i), self.vertex(q2, i + t.shift[q])) != c {
                    return Err(Error::Invalid(format!("polygon {q} is not mapped by a half-turn")));
                }
            }
            for e in 0..n {
                let img = t.edge(self, (q, e));
                let (pt, sign, _) = self.partner((q, e));
                let (ip, isign, _) = self.partner(img);
                if ip != t.edge(self, pt) || sign != isign {
                    return Err(Error::Invalid(format!("edge ({q}, {e}) breaks the gluing pattern")));
                }
            }
        }
        Ok(())
    }

    pub fn fixed_points(&self, t: &PolyMap) -> Vec<FixedPoint> {
        let mut out = Vec::new();
        for (cls, v) in self.vertices().iter().enumerate() {
            let img = v.corners.iter().map(|&(q, i)| t.edge(self, (q, i))).next().expect("non-empty class");
            if self.vertex_class(img) == cls {
                out.push(FixedPoint::Vertex { class: cls, order: self.order(cls) });
            }
        }
        for q in 0..self.polygons().len() {
            if t.poly[q] == q {
                out.push(FixedPoint::Centre { polygon: q });
            }
        }
        for (gi, g) in self.gluings().iter().enumerate() {
            let _ = gi;
            if t.edge(self, g.a) == g.b {
                out.push(FixedPoint::EdgeMidpoint { polygon: g.a.0, edge: g.a.1 });
            }
        }
        out
    }

    /// Matrix of the induced map on H₁ in the coordinates of `basis` (columns are images).
    pub fn homology_action(&self, t: &PolyMap, basis: &super::HomologyBasis) -> Result<Vec<Vec<Rat>>> {
        let n = basis.cycles.len();
        let qt: Vec<Vec<Rat>> =
            (0..n).map(|i| (0..n).map(|j| rat_int(basis.intersection[j][i])).collect()).collect();
        let qti = invert(&qt).ok_or_else(|| Error::Check("singular intersection matrix".into()))?;
        let mut cols = Vec::new();
        for c in &basis.cycles {
            let img = t.cycle(self, c);
            let v: Vec<Rat> = basis
                .cycles
                .iter()
                .map(|b| self.intersection(&img, b).map(rat_int))
                .collect::<Result<_>>()?;
            cols.push((0..n).map(|i| (0..n).map(|j| &qti[i][j] * &v[j]).sum::<Rat>()).collect::<Vec<Rat>>());
        }
        Ok((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
    }

    /// Dimension of the −1 eigenspace of the involution on H₁(X, Q).
    pub fn minus_eigenspace_dim(&self, t: &PolyMap) -> Result<usize> {
        let basis = self.homology_basis()?;
        let mut m = self.homology_action(t, &basis)?;
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += Rat::one();
        }
        Ok(basis.cycles.len() - rank(&m))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrototypeParams {
    pub w: i64,
    pub h: i64,
    pub e: i64,
    pub t: KNum,
    pub d: i64,
    pub lambda: KNum,
}

/// Per-vertex coefficients c: a kernel move by v adds c·v to each vertex.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelTemplate {
    #[serde_as(as = "Vec<Vec<DisplayFromStr>>")]
    pub coeffs: Vec<Vec<Rat>>,
    /// moves with max(|vx|, |vy|) < eps keep every polygon simple
    pub eps: KNum,
}

impl PrototypeParams {
    pub fn new(w: i64, h: i64, e: i64, t: Option<KNum>) -> Result<Self> {
        let bad = |m: &str| Err(Error::Domain(format!("(w,h,e) = ({w},{h},{e}): {m}")));
        if w <= 0 || h <= 0 {
            return bad("need w > 0 and h > 0");
        }
        if e + 2 * h >= w {
            return bad("need e + 2h < w");
        }
        if w.gcd(&h).gcd(&e) != 1 {
            return bad("need gcd(w,h,e) = 1");
        }
        let d = e * e + 8 * w * h;
        let lambda = (KNum::int(e) + KNum::sqrt_int(d)?).scale(&rat(1, 2));
        if lambda >= KNum::int(w) {
            return bad("need λ < w");
        }
        let t = t.unwrap_or_else(|| lambda.scale(&rat(1, 3)));
        if t.sign() <= 0 || t >= lambda {
            return Err(Error::Domain(format!("need 0 < t < λ, got t = {t}")));
        }
        Ok(PrototypeParams { w, h, e, t, d, lambda })
    }

    fn a(&self) -> KNum {
        (&self.lambda - &self.t).scale(&rat(1, 2))
    }

    fn b(&self) -> KNum {
        (&self.lambda + &self.t).scale(&rat(1, 2))
    }

    /// Square λ×λ (polygon 0) with rectangles w×h below-left (1) and above-right (2), offset by t.
    pub fn surface(&self) -> Result<FlatSurface> {
        let (l, a, b) = (self.lambda.clone(), self.a(), self.b());
        let (w, h) = (k(self.w), k(self.h));
        let z = KNum::zero();
        let square = vec![
            v2(z.clone(), z.clone()),
            v2(a.clone(), z.clone()),
            v2(b.clone(), z.clone()),
            v2(l.clone(), z.clone()),
            v2(l.clone(), l.clone()),
            v2(b.clone(), l.clone()),
            v2(a.clone(), l.clone()),
            v2(z.clone(), l.clone()),
        ];
        let r1 = vec![
            v2(&a - &w, -&h),
            v2(z.clone(), -&h),
            v2(a.clone(), -&h),
            v2(a.clone(), z.clone()),
            v2(z.clone(), z.clone()),
            v2(&a - &w, z.clone()),
        ];
        let top = &l + &h;
        let r2 = vec![
            v2(b.clone(), l.clone()),
            v2(l.clone(), l.clone()),
            v2(&b + &w, l.clone()),
            v2(&b + &w, top.clone()),
            v2(l.clone(), top.clone()),
            v2(b.clone(), top),
        ];
        FlatSurface::new(vec![square, r1, r2], prototype_gluings())
    }

    pub fn involution() -> PolyMap {
        PolyMap { poly: vec![0, 2, 1], shift: vec![4, 3, 3] }
    }

    pub fn minus_basis() -> Vec<Cycle> {
        vec![
            Cycle::from_triples(&[&[(0, 7, 3)]]),
            Cycle::from_triples(&[&[(0, 1, 5)]]),
            Cycle::from_triples(&[&[(2, 5, 2)], &[(1, 5, 2)]]),
            Cycle::from_triples(&[&[(2, 1, 3)], &[(1, 0, 4)]]),
        ]
    }

    pub fn prym(&self) -> Result<(FlatSurface, PrymStructure)> {
        let s = self.surface()?;
        let inv = Self::involution();
        s.check_involution(&inv)?;
        let basis = Self::minus_basis();
        let intersection = s.intersection_matrix(&basis)?;
        let fixed_points = s.fixed_points(&inv);
        Ok((s, PrymStructure { involution: inv, fixed_points, minus_basis: basis, intersection }))
    }

    pub fn endomorphism(&self) -> EndoMatrix {
        let (w, h, e) = (self.w, self.h, self.e);
        EndoMatrix::new(vec![
            vec![e, 0, 2 * w, 0],
            vec![0, e, 0, 2 * h],
            vec![h, 0, 0, 0],
            vec![0, w, 0, 0],
        ])
    }

    /// The matrix as printed with the half-size rectangles; not self-adjoint for this basis.
    pub fn printed_endomorphism(&self) -> EndoMatrix {
        let (w, h, e) = (self.w, self.h, self.e);
        EndoMatrix::new(vec![
            vec![e, 0, w, 0],
            vec![0, e, 0, h],
            vec![2 * h, 0, 0, 0],
            vec![0, 2 * w, 0, 0],
        ])
    }

    pub fn kernel_template(&self) -> KernelTemplate {
        let hf = rat(1, 2);
        let (p, m, o) = (hf.clone(), -hf, Rat::zero());
        let coeffs = vec![
            vec![o.clone(), m.clone(), p.clone(), o.clone(), o.clone(), p.clone(), m.clone(), o.clone()],
            vec![m.clone(), o.clone(), m.clone(), m.clone(), o.clone(), m.clone()],
            vec![p.clone(), o.clone(), p.clone(), p.clone(), o.clone(), p],
        ];
        let a = self.a();
        let eps = [self.t.clone(), &self.lambda - &self.t, &k(self.w) - &a, k(self.h)]
            .into_iter()
            .reduce(KNum::min)
            .expect("four values")
            .scale(&rat(1, 2));
        KernelTemplate { coeffs, eps }
    }

    /// Full horizontal transversal: bottoms of the two rectangle columns and of the square.
    pub fn transversal(&self) -> Vec<TransversalPiece> {
        let a = self.a();
        let wa = &k(self.w) - &a;
        let piece = |polygon, edge, to: KNum| TransversalPiece::new(polygon, edge, KNum::zero(), to);
        vec![
            piece(1, 0, wa.clone()),
            piece(0, 0, a.clone()),
            piece(0, 1, self.t.clone()),
            piece(0, 2, a),
            piece(2, 1, wa),
        ]
    }

    /// Quotient by the involution: half of the square and one rectangle, in Q(−1³,1,2).
    pub fn quotient(&self) -> Result<FlatSurface> {
        let (l, a, b) = (self.lambda.clone(), self.a(), self.b());
        let (w, h) = (k(self.w), k(self.h));
        let z = KNum::zero();
        let hl = l.scale(&rat(1, 2));
        let half = vec![
            v2(z.clone(), z.clone()),
            v2(a.clone(), z.clone()),
            v2(hl.clone(), z.clone()),
            v2(b.clone(), z.clone()),
            v2(l.clone(), z.clone()),
            v2(l.clone(), hl.clone()),
            v2(hl.clone(), hl.clone()),
            v2(z.clone(), hl),
        ];
        let r1 = vec![
            v2(&a - &w, -&h),
            v2(z.clone(), -&h),
            v2(a.clone(), -&h),
            v2(a.clone(), z.clone()),
            v2(z.clone(), z.clone()),
            v2(&a - &w, z.clone()),
        ];
        let g = |a: EdgeRef, b: EdgeRef, s| Gluing::new(a, b, s);
        use Sign::{Minus, Plus};
        FlatSurface::new(
            vec![half, r1],
            vec![
                g((0, 0), (1, 3), Plus),
                g((0, 1), (0, 2), Minus),
                g((0, 3), (1, 1), Minus),
                g((0, 4), (0, 7), Plus),
                g((0, 5), (0, 6), Minus),
                g((1, 0), (1, 4), Plus),
                g((1, 2), (1, 5), Plus),
            ],
        )
    }

    /// Transversal of the quotient: the rectangle bottom and the half-square bottom up to its middle.
    pub fn quotient_transversal(&self) -> Vec<TransversalPiece> {
        let a = self.a();
        let piece = |polygon, edge, to: KNum| TransversalPiece::new(polygon, edge, KNum::zero(), to);
        vec![piece(1, 0, &k(self.w) - &a), piece(0, 0, a), piece(0, 1, self.t.scale(&rat(1, 2)))]
    }

    /// Quotient sheared by (x, y) ↦ (x, y + shear·x), which keeps vertical leaves vertical, cut
    /// along the horizontal segment of the given length leaving the order 1 zero.
    pub fn quotient_section(&self, shear: &Rat, length: &KNum) -> Result<(FlatSurface, Vec<TransversalPiece>)> {
        let m = KMat2::new(KNum::one(), KNum::zero(), KNum::from_rat(shear.clone()), KNum::one());
        let y = self.quotient()?.transform(&m)?;
        let east = v2(KNum::one(), KNum::zero());
        let start = y
            .corners_facing(&east)
            .into_iter()
            .find(|&c| y.order(y.vertex_class(c)) == 1)
            .ok_or_else(|| Error::Check("no order 1 zero faces +x".into()))?;
        y.horizontal_transversal(start, length)
    }
}

fn prototype_gluings() -> Vec<Gluing> {
    let p = |a: EdgeRef, b: EdgeRef| Gluing::new(a, b, Sign::Plus);
    vec![
        p((0, 0), (1, 3)),
        p((0, 1), (0, 5)),
        p((0, 2), (2, 4)),
        p((0, 3), (0, 7)),
        p((0, 4), (2, 0)),
        p((0, 6), (1, 1)),
        p((1, 0), (1, 4)),
        p((1, 2), (1, 5)),
        p((2, 1), (2, 3)),
        p((2, 2), (2, 5)),
    ]
}

pub fn kernel_move(s: &FlatSurface, tpl: &KernelTemplate, v: &KVec2) -> Result<FlatSurface> {
    if tpl.coeffs.len() != s.polygons().len()
        || tpl.coeffs.iter().zip(s.polygons()).any(|(c, p)| c.len() != p.len())
    {
        return Err(Error::Domain("template does not match the surface".into()));
    }
    if v[0].abs() >= tpl.eps || v[1].abs() >= tpl.eps {
        return Err(Error::Domain(format!("move exceeds ε = {}", tpl.eps)));
    }
    let polys = s
        .polygons()
        .iter()
        .zip(&tpl.coeffs)
        .map(|(p, cs)| p.iter().zip(cs).map(|(x, c)| add(x, &[v[0].scale(c), v[1].scale(c)])).collect())
        .collect();
    FlatSurface::new(polys, s.gluings().to_vec())
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenformReport {
    pub self_adjoint: bool,
    /// T² = eT + c·Id
    pub e: Option<i64>,
    pub c: Option<i64>,
    pub discriminant: bool,
    pub proper: bool,
    pub eigenvector: bool,
    pub lambda: Option<KNum>,
    pub failures: Vec<String>,
}

impl EigenformReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::Check(self.failures.join("; ")))
        }
    }
}

fn quadratic_relation(t: &EndoMatrix) -> Option<(i64, i64)> {
    let n = t.m.len();
    let t2 = t.mul(t);
    let off = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| i != j && t.m[i][j] != 0);
    let e = match off {
        Some((i, j)) => {
            if t2.m[i][j] % t.m[i][j] != 0 {
                return None;
            }
            t2.m[i][j] / t.m[i][j]
        }
        None => {
            let mut diag: Vec<i64> = (0..n).map(|i| t.m[i][i]).collect();
            diag.sort();
            diag.dedup();
            match diag.as_slice() {
                [x, y] => x + y,
                _ => return None,
            }
        }
    };
    let c = t2.m[0][0] - e * t.m[0][0];
    for i in 0..n {
        for j in 0..n {
            if t2.m[i][j] - e * t.m[i][j] != if i == j { c } else { 0 } {
                return None;
            }
        }
    }
    Some((e, c))
}

/// Real multiplication checks for T on a basis with intersection matrix q and periods p.
pub fn check_eigenform(q: &[Vec<i64>], t: &EndoMatrix, periods: &[KiNum], d: i64) -> EigenformReport {
    let n = q.len();
    let mut failures = Vec::new();
    let qm = EndoMatrix::new(q.to_vec());
    let self_adjoint = t.transpose().mul(&qm) == qm.mul(t);
    if !self_adjoint {
        failures.push("T is not self-adjoint: TᵀQ ≠ QT".to_string());
    }
    let scalar = (0..n).all(|i| (0..n).all(|j| i == j && t.m[i][i] == t.m[0][0] || i != j && t.m[i][j] == 0));
    let rel = if scalar { None } else { quadratic_relation(t) };
    if scalar {
        failures.push("T is a multiple of the identity".to_string());
    } else if rel.is_none() {
        failures.push("T satisfies no relation T² = eT + c·Id".to_string());
    }
    let (e, c) = match rel {
        Some((e, c)) => (Some(e), Some(c)),
        None => (None, None),
    };
    let discriminant = rel.map_or(false, |(e, c)| e * e + 4 * c == d);
    if rel.is_some() && !discriminant {
        failures.push(format!("e² + 4c ≠ {d}"));
    }
    let g = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| t.m[i][j] - if i == j { t.m[0][0] } else { 0 })
        .fold(0i64, |g, x| g.gcd(&x));
    let proper = g == 1;
    if !proper {
        failures.push(format!("T − T₀₀·Id has content {g}, so Z[T] is not a proper order"));
    }
    let lambda = match (e, KNum::sqrt_int(d)) {
        (Some(e), Ok(r)) if discriminant => Some((KNum::int(e) + r).scale(&rat(1, 2))),
        _ => None,
    };
    let eigenvector = match &lambda {
        Some(l) if periods.len() == n => {
            let lz = KiNum::real(l.clone());
            (0..n).all(|j| {
                let lhs = (0..n).fold(KiNum::zero(), |acc, i| &acc + &periods[i].scale(&rat_int(t.m[i][j])));
                lhs == &lz * &periods[j]
            })
        }
        _ => false,
    };
    if !eigenvector {
        failures.push("period vector is not a λ-eigenvector of T".to_string());
    }
    EigenformReport { self_adjoint, e, c, discriminant, proper, eigenvector, lambda, failures }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    /// Σ h_j w_j'
    pub sum_h_wconj: KNum,
    /// Σ μ_j N(w_j)
    pub sum_mu_norm_w: KNum,
    /// Σ w_j h_j'
    pub sum_w_hconj: KNum,
}

pub fn cylinder_identities(dec: &CylinderDecomposition) -> IdentityReport {
    let mut a = KNum::zero();
    let mut b = KNum::zero();
    let mut c = KNum::zero();
    for cy in &dec.cylinders {
        a += &(&cy.height * &cy.width.conj());
        b += &(&cy.modulus * &KNum::from_rat(cy.width.norm()));
        c += &(&cy.width * &cy.height.conj());
    }
    IdentityReport { sum_h_wconj: a, sum_mu_norm_w: b, sum_w_hconj: c }
}

#[serde_as]
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind")]
pub enum Commensurability {
    /// all μ_i/μ_0 rational; shearing by `multiplier` twists cylinder i `twists[i]` times
    Commensurable {
        #[serde_as(as = "Vec<DisplayFromStr>")]
        ratios: Vec<Rat>,
        multiplier: KNum,
        #[serde_as(as = "Vec<DisplayFromStr>")]
        twists: Vec<BigInt>,
    },
    Incommensurable { i: usize, j: usize, ratio: KNum },
}

pub fn commensurability(dec: &CylinderDecomposition) -> Result<Commensurability> {
    let mu: Vec<&KNum> = dec.cylinders.iter().map(|c| &c.modulus).collect();
    let first = *mu.first().ok_or_else(|| Error::Domain("no cylinders".into()))?;
    let mut ratios = Vec::new();
    for (j, m) in mu.iter().enumerate() {
        let r = *m / first;
        if !r.is_rational() {
            return Ok(Commensurability::Incommensurable { i: 0, j, ratio: r });
        }
        ratios.push(r.a.clone());
    }
    let l = ratios.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
    let multiplier = KNum::from_rat(Rat::from_integer(l.clone())) / first.clone();
    let twists = ratios.iter().map(|r| (r * Rat::from_integer(l.clone())).to_integer()).collect();
    Ok(Commensurability::Commensurable { ratios, multiplier, twists })
}

#[serde_as]
#[derive(Clone, Debug, Serialize)]
pub struct Tuning {
    pub i: usize,
    pub j: usize,
    #[serde_as(as = "DisplayFromStr")]
    pub q: Rat,
    pub t: KNum,
}

/// Solves (h_i + a_i t)/w_i = q·(h_j + a_j t)/w_j for the first pair with a_i ≠ a_j.
pub fn tune_kernel_parameter(h: &[KNum], a: &[Rat], w: &[KNum], q: Option<Rat>) -> Result<Tuning> {
    if h.len() != a.len() || h.len() != w.len() {
        return Err(Error::Domain("heights, slopes and widths differ in length".into()));
    }
    let n = h.len();
    let (i, j) = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .find(|&(i, j)| a[i] != a[j])
        .ok_or_else(|| Error::Domain("all height slopes are equal".into()))?;
    let q = match q {
        Some(q) => q,
        None => {
            let r0 = &(&h[i] * &w[j]) / &(&h[j] * &w[i]);
            let x = r0.to_f64().round().max(1.0);
            Rat::from_integer(BigInt::from(x as i64))
        }
    };
    let qk = KNum::from_rat(q.clone());
    let num = &(&qk * &(&h[j] * &w[i])) - &(&h[i] * &w[j]);
    let den = &w[j].scale(&a[i]) - &(&qk * &w[i].scale(&a[j]));
    if den.is_zero() {
        return Err(Error::Domain(format!("ratio {q} is not reachable")));
    }
    Ok(Tuning { i, j, q, t: &num / &den })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrataRow {
    pub row: usize,
    pub quadratic: &'static str,
    pub prym: &'static str,
    pub genus: usize,
}

pub fn strata_table() -> Vec<StrataRow> {
    let rows = [
        ("Q(-1^6,2)", "Prym(1,1) ≃ H(1,1)", 2),
        ("Q(-1^2,6)", "Prym(3,3) ≃ H(1,1)", 4),
        ("Q(1,1,2)", "Prym(2,2,1,1) ≃ H(0^2,2)", 4),
        ("Q(-1^4,4)", "Prym(2,2)^odd", 3),
        ("Q(-1^3,1,2)", "Prym(1,1,2)", 3),
        ("Q(-1,2,3)", "Prym(1,1,4)", 4),
        ("Q(8)", "Prym(4,4)^even", 5),
        ("Q(-1,1,4)", "Prym(2,2,2)^even", 4),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, &(quadratic, prym, genus))| StrataRow { row: i + 1, quadratic, prym, genus })
        .collect()
}

fn parse_orders(body: &str) -> Option<Vec<i64>> {
    let mut out = Vec::new();
    for part in body.split(',') {
        let (o, n) = match part.split_once('^') {
            Some((o, n)) => (o.parse::<i64>().ok()?, n.parse::<usize>().ok()?),
            None => (part.parse::<i64>().ok()?, 1usize),
        };
        out.extend(std::iter::repeat(o).take(n));
    }
    out.sort();
    Some(out)
}

// (letter, sorted orders, spin suffix)
fn parse_stratum(name: &str) -> Option<(String, Vec<i64>, Option<String>)> {
    let s: String = name.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('−', "-");
    let s = s.split('≃').next()?.to_string();
    let open = s.find('(')?;
    let close = s.rfind(')')?;
    let head = s[..open].to_string();
    let spin = s[close + 1..].trim_start_matches('^').to_string();
    let orders = parse_orders(&s[open + 1..close])?;
    Some((head, orders, (!spin.is_empty()).then_some(spin)))
}

/// Orders of ω on the orientation double cover for a quadratic stratum.
pub fn prym_orders(q: &[i64]) -> Vec<i64> {
    let mut out = Vec::new();
    for &d in q {
        if d == -1 {
            continue;
        }
        if d % 2 == 0 {
            out.extend([d / 2, d / 2]);
        } else {
            out.push(d + 1);
        }
    }
    out.sort();
    out
}

pub fn strata_lookup(name: &str) -> Result<StrataRow> {
    let (head, orders, spin) =
        parse_stratum(name).ok_or_else(|| Error::Parse(format!("cannot read stratum `{name}`")))?;
    let found = strata_table().into_iter().find(|r| {
        let key = if head == "Q" { r.quadratic } else { r.prym };
        match parse_stratum(key) {
            Some((h2, o2, s2)) => h2 == head && o2 == orders && (spin.is_none() || spin == s2),
            None => false,
        }
    });
    found.ok_or_else(|| Error::Domain(format!("{name} is not in the table")))
}

/// Label of a quadratic stratum's cover, e.g. Q(-1^3,1,2) ↦ H(1,1,2).
pub fn cover_stratum(q: &[i64]) -> String {
    format_stratum('H', &prym_orders(q))
}
