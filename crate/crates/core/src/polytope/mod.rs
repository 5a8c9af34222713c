//! Exact convex hulls of exponent vectors.
//!
//! Points are reduced to the coordinates of their affine span before the
//! hull is built, so the Quickhull core always works in full dimension.
//! Every predicate is evaluated over [`Rational`], so orientation decisions
//! never depend on a working precision.

mod quickhull;

pub use quickhull::convex_hull_reduced;

use rug::Rational;
use thiserror::Error;

use crate::linalg::{rref, solve_exact};
use crate::text::parse_rational;

/// Nonnegative integer exponents, one per variable.
pub type ExponentVector = Vec<u32>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("point set is empty")]
    Empty,
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("requested affine dimension {requested} but the points span {actual}")]
    RankMismatch { requested: usize, actual: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A finite set of rational points of a common dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<Rational>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<Rational>>) -> Result<Self, PolytopeError> {
        let dim = points.first().ok_or(PolytopeError::Empty)?.len();
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(PolytopeError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: p.len(),
                });
            }
        }
        Ok(PointSet { dim, points })
    }

    pub fn from_exponents(exps: &[ExponentVector]) -> Result<Self, PolytopeError> {
        Self::new(exps.iter().map(|e| e.iter().map(|&v| Rational::from(v)).collect()).collect())
    }

    /// One point per line, whitespace-separated rational coordinates; blank
    /// lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, PolytopeError> {
        let mut points = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let p = line
                .split_whitespace()
                .map(|tok| {
                    parse_rational(tok).ok_or_else(|| PolytopeError::Parse {
                        line: i + 1,
                        msg: format!("invalid coordinate `{tok}`"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            points.push(p);
        }
        Self::new(points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<Rational>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn differences(&self) -> Vec<Vec<Rational>> {
        let p0 = &self.points[0];
        self.points[1..]
            .iter()
            .map(|p| p.iter().zip(p0).map(|(a, b)| Rational::from(a - b)).collect())
            .collect()
    }
}

/// Rank of the differences `pᵢ − p₀`.
pub fn affine_dims(s: &PointSet) -> usize {
    let diffs = s.differences();
    if diffs.is_empty() {
        return 0;
    }
    rref(&diffs).1.len()
}

/// Invertible affine correspondence between the affine span of a point set
/// (in ambient space) and `ℚʳ`: `x = origin + Σ yₖ·basisₖ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    origin: Vec<Rational>,
    basis: Vec<Vec<Rational>>,
    /// Ambient coordinates in which `basis` restricted is invertible.
    rows: Vec<usize>,
}

impl AffineMap {
    pub fn ambient_dim(&self) -> usize {
        self.origin.len()
    }

    pub fn reduced_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn origin(&self) -> &[Rational] {
        &self.origin
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    /// Reduced coordinates of `x`, assuming `x` lies in the span.
    pub fn forward(&self, x: &[Rational]) -> Vec<Rational> {
        let r = self.reduced_dim();
        if r == 0 {
            return Vec::new();
        }
        let a: Vec<Vec<Rational>> =
            self.rows.iter().map(|&i| (0..r).map(|k| self.basis[k][i].clone()).collect()).collect();
        let b: Vec<Rational> = self.rows.iter().map(|&i| Rational::from(&x[i] - &self.origin[i])).collect();
        solve_exact(&a, &b).expect("basis rows are independent")
    }

    pub fn backward(&self, y: &[Rational]) -> Vec<Rational> {
        let mut x = self.origin.clone();
        for (yk, bk) in y.iter().zip(&self.basis) {
            for (xi, bi) in x.iter_mut().zip(bk) {
                *xi += Rational::from(yk * bi);
            }
        }
        x
    }

    /// Whether `x` lies in the affine span.
    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.ambient_dim() && self.backward(&self.forward(x)) == x
    }

    /// Pulls the reduced inequality `a·y ≤ b` back to ambient coordinates.
    fn pull_back(&self, a: &[Rational], b: &Rational) -> (Vec<Rational>, Rational) {
        // y = M⁻¹ (x_R − o_R) with M the basis restricted to `rows`.
        let r = self.reduced_dim();
        // Solve Mᵀ w = a for the ambient weights on the selected coordinates.
        let mt: Vec<Vec<Rational>> = (0..r).map(|k| self.rows.iter().map(|&i| self.basis[k][i].clone()).collect()).collect();
        let w = solve_exact(&mt, a).expect("basis rows are independent");
        let mut normal = vec![Rational::new(); self.ambient_dim()];
        let mut offset = b.clone();
        for (wk, &i) in w.iter().zip(&self.rows) {
            normal[i] = wk.clone();
            offset += Rational::from(wk * &self.origin[i]);
        }
        (normal, offset)
    }
}

/// Maps `s` onto `ℚʳ`. The basis consists of differences `pᵢ − p₀`, so an
/// already full-dimensional set is mapped by an invertible linear change of
/// coordinates.
pub fn affine_trans(s: &PointSet, r: usize) -> Result<(PointSet, AffineMap), PolytopeError> {
    let diffs = s.differences();
    let actual = affine_dims(s);
    if actual != r {
        return Err(PolytopeError::RankMismatch { requested: r, actual });
    }
    // Pick r independent differences: pivots of the transposed system.
    let mut basis: Vec<Vec<Rational>> = Vec::with_capacity(r);
    for d in &diffs {
        if basis.len() == r {
            break;
        }
        let mut trial = basis.clone();
        trial.push(d.clone());
        if rref(&trial).1.len() == trial.len() {
            basis = trial;
        }
    }
    let rows = if r == 0 { Vec::new() } else { rref(&basis).1 };
    let map = AffineMap {
        origin: s.points[0].clone(),
        basis,
        rows,
    };
    let reduced = s.points.iter().map(|p| map.forward(p)).collect();
    Ok((PointSet { dim: r, points: reduced }, map))
}

/// Supporting inequality `normal·x ≤ offset`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Facet {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl Facet {
    pub fn slack(&self, x: &[Rational]) -> Rational {
        let mut s = self.offset.clone();
        for (a, v) in self.normal.iter().zip(x) {
            s -= Rational::from(a * v);
        }
        s
    }
}

/// Convex hull in ambient coordinates. Membership requires both lying in
/// the affine span of the input and satisfying every facet inequality.
#[derive(Debug, Clone)]
pub struct Hull {
    pub vertices: Vec<Vec<Rational>>,
    pub facets: Vec<Facet>,
    pub affine_dim: usize,
    pub transform: AffineMap,
    /// Facets in reduced coordinates.
    reduced_facets: Vec<Facet>,
}

impl Hull {
    pub fn ambient_dim(&self) -> usize {
        self.transform.ambient_dim()
    }
}

/// Exact Quickhull of `s`, run in the coordinates of its affine span.
pub fn convex_hull(s: &PointSet) -> Hull {
    let mut points: Vec<Vec<Rational>> = s.points.clone();
    points.sort();
    points.dedup();
    let unique = PointSet { dim: s.dim, points };
    let r = affine_dims(&unique);
    let (reduced, map) = affine_trans(&unique, r).expect("rank computed above");
    let (vertex_idx, reduced_facets) = convex_hull_reduced(reduced.points(), r);
    let mut vertices: Vec<Vec<Rational>> = vertex_idx.iter().map(|&i| unique.points[i].clone()).collect();
    vertices.sort();
    let mut facets: Vec<Facet> = reduced_facets
        .iter()
        .map(|f| {
            let (normal, offset) = map.pull_back(&f.normal, &f.offset);
            normalize(Facet { normal, offset })
        })
        .collect();
    facets.sort();
    facets.dedup();
    Hull {
        vertices,
        facets,
        affine_dim: r,
        transform: map,
        reduced_facets,
    }
}

/// Scales a facet so its first nonzero normal entry has absolute value 1.
fn normalize(f: Facet) -> Facet {
    let Some(lead) = f.normal.iter().find(|v| v.cmp0().is_ne()).map(|v| Rational::from(v.abs_ref())) else {
        return f;
    };
    Facet {
        normal: f.normal.into_iter().map(|v| v / &lead).collect(),
        offset: f.offset / &lead,
    }
}

/// Closed membership: points on the boundary are inside.
pub fn in_convex_hull(h: &Hull, p: &[Rational]) -> bool {
    if !h.transform.contains(p) {
        return false;
    }
    let y = h.transform.forward(p);
    h.reduced_facets.iter().all(|f| f.slack(&y).cmp0().is_ge())
}

/// All nonnegative integer `α` with `2α` in `h`, in graded lexicographic order.
pub fn half_polytope_lattice_points(h: &Hull) -> Vec<ExponentVector> {
    let dim = h.ambient_dim();
    let mut lo = vec![u32::MAX; dim];
    let mut hi = vec![0u32; dim];
    for v in &h.vertices {
        for (k, c) in v.iter().enumerate() {
            let half = Rational::from(c / 2u32);
            let ceil = half.clone().ceil().numer().to_i64().unwrap_or(0).max(0) as u32;
            let floor = half.floor().numer().to_i64().unwrap_or(-1);
            lo[k] = lo[k].min(ceil);
            hi[k] = hi[k].max(floor.max(0) as u32);
        }
    }
    if h.vertices.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = lo.clone();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return out;
    }
    loop {
        let doubled: Vec<Rational> = cur.iter().map(|&c| Rational::from(2 * c)).collect();
        if in_convex_hull(h, &doubled) {
            out.push(cur.clone());
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == dim {
                sort_graded_lex(&mut out);
                return out;
            }
            if cur[k] < hi[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = lo[k];
            k += 1;
        }
    }
}

/// Graded lexicographic order: total degree first, then lexicographic with
/// the first variable most significant (`x₁ > x₂ > …`), ascending.
pub fn graded_lex_cmp(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u64 = a.iter().map(|&v| u64::from(v)).sum();
    let db: u64 = b.iter().map(|&v| u64::from(v)).sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

pub fn sort_graded_lex(v: &mut [ExponentVector]) {
    v.sort_by(|a, b| graded_lex_cmp(a, b));
}
