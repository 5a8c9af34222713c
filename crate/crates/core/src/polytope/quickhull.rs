use std::collections::HashMap;

use rug::Rational;

use super::Facet;
use crate::linalg::rref;

struct Face {
    verts: Vec<usize>,
    plane: Facet,
    outside: Vec<usize>,
    alive: bool,
}

/// `normal·p − offset`; positive means strictly outside.
fn height(f: &Facet, p: &[Rational]) -> Rational {
    -f.slack(p)
}

/// Hyperplane through `d` affinely independent points of `ℚᵈ`, oriented so
/// `interior` lies strictly below it.
fn hyperplane(points: &[Vec<Rational>], verts: &[usize], interior: &[Rational]) -> Facet {
    let d = interior.len();
    let p0 = &points[verts[0]];
    let normal = if d == 1 {
        vec![Rational::from(1)]
    } else {
        let diffs: Vec<Vec<Rational>> = verts[1..]
            .iter()
            .map(|&v| points[v].iter().zip(p0).map(|(a, b)| Rational::from(a - b)).collect())
            .collect();
        let (r, pivots) = rref(&diffs);
        let free = (0..d).find(|c| !pivots.contains(c)).expect("d−1 equations in d unknowns");
        let mut n = vec![Rational::new(); d];
        n[free] = Rational::from(1);
        for (row, &pc) in r.iter().zip(&pivots) {
            n[pc] = -row[free].clone();
        }
        n
    };
    let mut f = Facet {
        offset: dot(&normal, p0),
        normal,
    };
    if height(&f, interior).cmp0().is_gt() {
        f.normal.iter_mut().for_each(|v| *v = -v.clone());
        f.offset = -f.offset;
    }
    f
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut s = Rational::new();
    for (x, y) in a.iter().zip(b) {
        s += Rational::from(x * y);
    }
    s
}

/// Quickhull on distinct points spanning `ℚᵈ`. Returns the indices of the
/// extreme points and the facet inequalities (one per simplicial facet;
/// coplanar facets may repeat a hyperplane).
pub fn convex_hull_reduced(points: &[Vec<Rational>], d: usize) -> (Vec<usize>, Vec<Facet>) {
    if d == 0 || points.len() <= 1 {
        return (vec![0], Vec::new());
    }

    // Initial simplex: greedily add points that raise the affine rank.
    let mut simplex = vec![0usize];
    let mut diffs: Vec<Vec<Rational>> = Vec::new();
    for (i, p) in points.iter().enumerate().skip(1) {
        if simplex.len() == d + 1 {
            break;
        }
        let diff: Vec<Rational> = p.iter().zip(&points[0]).map(|(a, b)| Rational::from(a - b)).collect();
        diffs.push(diff);
        if rref(&diffs).1.len() == diffs.len() {
            simplex.push(i);
        } else {
            diffs.pop();
        }
    }
    assert_eq!(simplex.len(), d + 1, "points must span the reduced space");

    let mut interior = vec![Rational::new(); d];
    for &v in &simplex {
        for (c, x) in interior.iter_mut().zip(&points[v]) {
            *c += x;
        }
    }
    let k = Rational::from(d as u32 + 1);
    interior.iter_mut().for_each(|c| *c /= &k);

    let mut faces: Vec<Face> = (0..=d)
        .map(|skip| {
            let mut verts: Vec<usize> = simplex.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, &v)| v).collect();
            verts.sort_unstable();
            let plane = hyperplane(points, &verts, &interior);
            Face {
                verts,
                plane,
                outside: Vec::new(),
                alive: true,
            }
        })
        .collect();

    let pending: Vec<usize> = (0..points.len()).filter(|i| !simplex.contains(i)).collect();
    assign(&mut faces, points, pending, 0);

    while let Some(fi) = faces.iter().position(|f| f.alive && !f.outside.is_empty()) {
        let apex = *faces[fi]
            .outside
            .iter()
            .max_by(|&&a, &&b| height(&faces[fi].plane, &points[a]).cmp(&height(&faces[fi].plane, &points[b])))
            .expect("nonempty outside set");

        let visible: Vec<usize> = (0..faces.len())
            .filter(|&j| faces[j].alive && height(&faces[j].plane, &points[apex]).cmp0().is_gt())
            .collect();

        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for &j in &visible {
            let verts = &faces[j].verts;
            for skip in 0..verts.len() {
                let ridge: Vec<usize> = verts.iter().enumerate().filter(|(x, _)| *x != skip).map(|(_, &v)| v).collect();
                *ridges.entry(ridge).or_insert(0) += 1;
            }
        }

        let mut orphans = Vec::new();
        for &j in &visible {
            faces[j].alive = false;
            orphans.extend(faces[j].outside.drain(..).filter(|&p| p != apex));
        }

        let first_new = faces.len();
        let mut horizon: Vec<Vec<usize>> = ridges.into_iter().filter(|(_, c)| *c == 1).map(|(r, _)| r).collect();
        horizon.sort();
        for mut verts in horizon {
            verts.push(apex);
            verts.sort_unstable();
            let plane = hyperplane(points, &verts, &interior);
            faces.push(Face {
                verts,
                plane,
                outside: Vec::new(),
                alive: true,
            });
        }
        assign(&mut faces, points, orphans, first_new);
    }

    let alive: Vec<&Face> = faces.iter().filter(|f| f.alive).collect();
    let mut candidates: Vec<usize> = alive.iter().flat_map(|f| f.verts.iter().copied()).collect();
    candidates.sort_unstable();
    candidates.dedup();
    let vertices = candidates
        .into_iter()
        .filter(|&v| {
            let active: Vec<Vec<Rational>> = alive
                .iter()
                .filter(|f| f.plane.slack(&points[v]).cmp0().is_eq())
                .map(|f| f.plane.normal.clone())
                .collect();
            rref(&active).1.len() == d
        })
        .collect();
    let facets = alive.into_iter().map(|f| f.plane.clone()).collect();
    (vertices, facets)
}

/// Gives each point to a live face it sees strictly, preferring faces from
/// index `prefer` on; points seen by no face are inside and dropped.
fn assign(faces: &mut [Face], points: &[Vec<Rational>], pending: Vec<usize>, prefer: usize) {
    for p in pending {
        let order = (prefer..faces.len()).chain(0..prefer);
        for j in order {
            if faces[j].alive && height(&faces[j].plane, &points[p]).cmp0().is_gt() {
                faces[j].outside.push(p);
                break;
            }
        }
    }
}
