use std::collections::BTreeSet;

use rand::Rng;
use rug::Rational;
use sdpcert::polytope::{affine_dims, convex_hull, ExponentVector, Facet, PointSet};
use sdpcert::sos::SparsePolynomial;

/// Determinant of a small integer matrix by cofactor expansion.
fn det_i128(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|c| {
                let minor: Vec<Vec<i128>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect()).collect();
                let s = if c % 2 == 0 { 1 } else { -1 };
                s * m[0][c] * det_i128(&minor)
            })
            .sum(),
    }
}

/// Normal of the hyperplane through `d` points in `d` dimensions, by cofactors.
fn hyperplane(pts: &[&Vec<i128>]) -> Vec<i128> {
    let d = pts[0].len();
    let diffs: Vec<Vec<i128>> = pts[1..].iter().map(|p| p.iter().zip(pts[0]).map(|(a, b)| a - b).collect()).collect();
    (0..d)
        .map(|c| {
            let minor: Vec<Vec<i128>> =
                diffs.iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect()).collect();
            let s = if c % 2 == 0 { 1 } else { -1 };
            s * det_i128(&minor)
        })
        .collect()
}

fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        out(cur);
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop();
    }
}

fn normalize(normal: &[i128], offset: i128) -> Facet {
    let lead = normal.iter().find(|&&v| v != 0).unwrap().abs();
    Facet {
        normal: normal.iter().map(|&v| Rational::from((v, lead))).collect(),
        offset: Rational::from((offset, lead)),
    }
}

/// Oracle for full-dimensional integer point sets: facets are the
/// hyperplanes through `d` affinely independent points with every point on
/// one side; vertices are points whose incident facet normals have rank `d`.
fn brute_force_hull(pts: &[Vec<i128>]) -> (BTreeSet<Vec<i128>>, BTreeSet<Facet>) {
    let d = pts[0].len();
    let mut facets: Vec<(Vec<i128>, i128)> = Vec::new();
    subsets(pts.len(), d, 0, &mut Vec::new(), &mut |idx| {
        let chosen: Vec<&Vec<i128>> = idx.iter().map(|&i| &pts[i]).collect();
        let a = hyperplane(&chosen);
        if a.iter().all(|&v| v == 0) {
            return;
        }
        let dot = |p: &Vec<i128>| a.iter().zip(p).map(|(x, y)| x * y).sum::<i128>();
        let b = dot(chosen[0]);
        let (mut le, mut ge) = (true, true);
        for p in pts {
            let v = dot(p);
            le &= v <= b;
            ge &= v >= b;
        }
        if le {
            facets.push((a, b));
        } else if ge {
            facets.push((a.iter().map(|v| -v).collect(), -b));
        }
    });
    let facet_set: BTreeSet<Facet> = facets.iter().map(|(a, b)| normalize(a, *b)).collect();
    let vertices = pts
        .iter()
        .filter(|p| {
            let rows: Vec<Vec<Rational>> = facets
                .iter()
                .filter(|(a, b)| a.iter().zip(p.iter()).map(|(x, y)| x * y).sum::<i128>() == *b)
                .map(|(a, _)| a.iter().map(|&v| Rational::from(v)).collect())
                .collect();
            sdpcert::linalg::rank_exact(&rows) == d
        })
        .cloned()
        .collect();
    (vertices, facet_set)
}

fn to_rational(pts: &[Vec<i128>]) -> Vec<Vec<Rational>> {
    pts.iter().map(|p| p.iter().map(|&v| Rational::from(v)).collect()).collect()
}

/// Compares the hull against the brute-force oracle on `count` random
/// full-dimensional sets in dimensions 2 to 4.
pub fn check_random_hulls(seed: u64, count: usize) -> Result<(), String> {
    let mut rng = super::rng(seed);
    let mut checked = 0;
    while checked < count {
        let d = rng.gen_range(2..=4);
        let size = rng.gen_range(d + 1..=40);
        // Rational coordinates with denominator 1, 2 or 3, scaled by 6 for the oracle.
        let pts: Vec<Vec<Rational>> = (0..size)
            .map(|_| (0..d).map(|_| Rational::from((rng.gen_range(-12..=12), rng.gen_range(1..=3)))).collect())
            .collect();
        let set = PointSet::new(pts.clone()).unwrap();
        if affine_dims(&set) < d {
            continue;
        }
        let scaled: Vec<Vec<i128>> = pts
            .iter()
            .map(|p| p.iter().map(|v| (Rational::from(v * 6u32)).numer().to_i128().unwrap()).collect())
            .collect();
        let (want_vertices, want_facets) = brute_force_hull(&scaled);
        let hull = convex_hull(&set);
        let got_vertices: BTreeSet<Vec<Rational>> = hull.vertices.iter().cloned().collect();
        let want_vertices: BTreeSet<Vec<Rational>> = want_vertices
            .into_iter()
            .map(|p| p.into_iter().map(|v| Rational::from((v, 6))).collect())
            .collect();
        if got_vertices != want_vertices {
            return Err(format!("vertices differ for {size} points in dimension {d}"));
        }
        // Oracle facets live in the scaled coordinates: a·(6x) ≤ b ⇔ a·x ≤ b/6.
        let want_facets: BTreeSet<Facet> =
            want_facets.into_iter().map(|f| Facet { normal: f.normal, offset: f.offset / 6u32 }).collect();
        let got_facets: BTreeSet<Facet> = hull.facets.iter().cloned().collect();
        if got_facets != want_facets {
            return Err(format!("facets differ for {size} points in dimension {d}"));
        }
        checked += 1;
    }
    Ok(())
}

pub fn random_sparse_poly(rng: &mut impl Rng, arity: usize) -> SparsePolynomial {
    let terms = rng.gen_range(1..=6);
    let mut p = SparsePolynomial::zero(arity);
    for _ in 0..terms {
        let deg = rng.gen_range(0..=6u32);
        let mut e = vec![0u32; arity];
        for _ in 0..deg {
            e[rng.gen_range(0..arity)] += 1;
        }
        let c = loop {
            let c = rng.gen_range(-5i64..=5);
            if c != 0 {
                break c;
            }
        };
        p = &p + &SparsePolynomial::monomial(e, Rational::from(c));
    }
    p
}

fn support_hull_vertices(p: &SparsePolynomial) -> BTreeSet<Vec<Rational>> {
    let support: Vec<ExponentVector> = p.support();
    convex_hull(&PointSet::from_exponents(&support).unwrap()).vertices.into_iter().collect()
}

/// Checks `vert C(p²) = 2·vert C(p)` on `count` random sparse polynomials.
pub fn check_doubled_squares(seed: u64, count: usize) -> Result<(), String> {
    let mut rng = super::rng(seed);
    let mut checked = 0;
    while checked < count {
        let arity = rng.gen_range(1..=4);
        let p = random_sparse_poly(&mut rng, arity);
        if p.support().is_empty() {
            continue;
        }
        let doubled: BTreeSet<Vec<Rational>> =
            support_hull_vertices(&p).into_iter().map(|v| v.into_iter().map(|c| c * 2u32).collect()).collect();
        if support_hull_vertices(&(&p * &p)) != doubled {
            return Err(format!("C(p²) ≠ 2·C(p) for p = {p:?}"));
        }
        checked += 1;
    }
    Ok(())
}
