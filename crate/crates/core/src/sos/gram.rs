use std::collections::{BTreeMap, BTreeSet};

use rug::{Float, Rational};

use super::{RationalProgram, SosError, SparsePolynomial};
use crate::linalg::SymMatrix;
use crate::polytope::{convex_hull, half_polytope_lattice_points, ExponentVector, PointSet};
use crate::sdp::{default_big_m, BigMEmbedding, SdProblem};

/// Monomials of `½·C(supp f ∪ supp g)`, in graded lexicographic order.
pub fn build_basis(prog: &RationalProgram) -> Result<Vec<ExponentVector>, SosError> {
    let support: BTreeSet<ExponentVector> = prog.f.support().into_iter().chain(prog.g.support()).collect();
    if support.is_empty() {
        return Err(SosError::EmptySupport);
    }
    let support: Vec<ExponentVector> = support.into_iter().collect();
    let hull = convex_hull(&PointSet::from_exponents(&support).expect("common arity"));
    Ok(half_polytope_lattice_points(&hull))
}

/// Linear equations `Σ_{eᵢ+eⱼ=α} Wᵢⱼ = f_α − r·g_α`, one per exponent `α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramSystem {
    pub basis: Vec<ExponentVector>,
    /// Basis index pairs `i ≤ j` with `bᵢ + bⱼ = α`.
    pub alpha_index: BTreeMap<ExponentVector, Vec<(usize, usize)>>,
    /// `(f_α, g_α)` for every `α` of a product or of the targets.
    pub target: BTreeMap<ExponentVector, (Rational, Rational)>,
}

impl GramSystem {
    pub fn new(prog: &RationalProgram, basis: &[ExponentVector]) -> Self {
        let mut alpha_index: BTreeMap<ExponentVector, Vec<(usize, usize)>> = BTreeMap::new();
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let a: ExponentVector = basis[i].iter().zip(&basis[j]).map(|(x, y)| x + y).collect();
                alpha_index.entry(a).or_default().push((i, j));
            }
        }
        let mut target: BTreeMap<ExponentVector, (Rational, Rational)> = BTreeMap::new();
        for a in alpha_index.keys().chain(prog.f.terms().keys()).chain(prog.g.terms().keys()) {
            target.entry(a.clone()).or_insert_with(|| (prog.f.coeff(a), prog.g.coeff(a)));
        }
        GramSystem {
            basis: basis.to_vec(),
            alpha_index,
            target,
        }
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    /// Exponents in constraint order.
    pub fn alphas(&self) -> impl Iterator<Item = &ExponentVector> {
        self.target.keys()
    }

    pub fn pairs(&self, alpha: &[u32]) -> &[(usize, usize)] {
        self.alpha_index.get(alpha).map_or(&[], Vec::as_slice)
    }

    /// First target exponent no basis product reaches.
    pub fn uncovered(&self) -> Option<&ExponentVector> {
        self.target
            .iter()
            .find(|(a, (f, g))| (f.cmp0().is_ne() || g.cmp0().is_ne()) && self.pairs(a).is_empty())
            .map(|(a, _)| a)
    }

    /// `m(x)ᵀ W m(x)`.
    pub fn gram_polynomial(&self, w: &SymMatrix<Rational>) -> SparsePolynomial {
        let arity = self.basis.first().map_or(0, Vec::len);
        let terms = self.alpha_index.iter().map(|(a, pairs)| {
            let mut s = Rational::new();
            for &(i, j) in pairs {
                if i == j {
                    s += w.get(i, j);
                } else {
                    s += Rational::from(w.get(i, j) * 2u32);
                }
            }
            (a.clone(), s)
        });
        SparsePolynomial::from_terms(arity, terms)
    }
}

/// Dual-form SDP of the SOS relaxation together with its Big-M embedding.
///
/// The base dual variable is `Z = diag(W, r⁺, r⁻)`: constraint `α` reads
/// `Σ_{eᵢ+eⱼ=α} Wᵢⱼ + g_α(r⁺ − r⁻) = f_α` and the objective is
/// `max r⁺ − r⁻`. After embedding, the top block of `Ẑ` is `Z + zI`, so its
/// leading `K × K` block is `Ŵ = W + zI` and
/// `f − r̂·g + z·m(x)ᵀm(x) = m(x)ᵀ Ŵ m(x)` with `r̂ = r⁺ − r⁻`.
#[derive(Debug, Clone)]
pub struct SosSdp {
    pub system: GramSystem,
    pub embedding: BigMEmbedding,
}

/// `(r̂, Ŵ, z)` of the embedded relaxation.
#[derive(Clone, PartialEq)]
pub struct MsosPoint<T> {
    pub r_hat: T,
    pub w_hat: SymMatrix<T>,
    pub z: T,
}

/// Builds the relaxation for `basis`. `M1`, `M2` default to
/// [`default_big_m`] of the base problem.
pub fn get_sdp(
    prog: &RationalProgram,
    basis: &[ExponentVector],
    m1: Option<Rational>,
    m2: Option<Rational>,
) -> Result<SosSdp, SosError> {
    let system = GramSystem::new(prog, basis);
    if let Some(a) = system.uncovered() {
        return Err(SosError::BasisIncomplete(a.clone()));
    }
    let k = system.size();
    let n = k + 2;
    let mut f0 = SymMatrix::zeros(n);
    f0.set(k, k, Rational::from(-1));
    f0.set(k + 1, k + 1, Rational::from(1));
    let mut f = vec![f0];
    let mut c = Vec::new();
    for (a, (fa, ga)) in &system.target {
        let mut fi = SymMatrix::zeros(n);
        for &(i, j) in system.pairs(a) {
            fi.set(i, j, Rational::from(1));
        }
        fi.set(k, k, ga.clone());
        fi.set(k + 1, k + 1, Rational::from(-ga));
        f.push(fi);
        c.push(fa.clone());
    }
    let base = SdProblem::new(c, f)?;
    let m = default_big_m(&base);
    let embedding = BigMEmbedding::new(&base, m1.unwrap_or_else(|| m.clone()), m2.unwrap_or(m))?;
    Ok(SosSdp { system, embedding })
}

impl<T: std::fmt::Display> std::fmt::Debug for MsosPoint<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MsosPoint")
            .field("r_hat", &format_args!("{}", self.r_hat))
            .field("w_hat", &self.w_hat)
            .field("z", &format_args!("{}", self.z))
            .finish()
    }
}

impl SosSdp {
    pub fn basis_size(&self) -> usize {
        self.system.size()
    }

    pub fn problem(&self) -> &SdProblem {
        self.embedding.embedded()
    }

    /// Reads `(r̂, Ŵ, z)` from an embedded dual iterate.
    pub fn decode(&self, zhat: &SymMatrix<Float>) -> MsosPoint<Float> {
        let k = self.basis_size();
        let prec = zhat.prec();
        MsosPoint {
            r_hat: Float::with_val(prec, zhat.get(k, k) - zhat.get(k + 1, k + 1)),
            w_hat: SymMatrix::from_fn(k, |i, j| zhat.get(i, j).clone()),
            z: zhat.get(k + 2, k + 2).clone(),
        }
    }

    pub fn decode_exact(&self, zhat: &SymMatrix<Rational>) -> MsosPoint<Rational> {
        let k = self.basis_size();
        MsosPoint {
            r_hat: Rational::from(zhat.get(k, k) - zhat.get(k + 1, k + 1)),
            w_hat: SymMatrix::from_fn(k, |i, j| zhat.get(i, j).clone()),
            z: zhat.get(k + 2, k + 2).clone(),
        }
    }

    /// Embedded dual matrix with the given `(r̂, Ŵ, z)`; `r̂` is split as
    /// `r⁺ = max(r̂, 0)`, `r⁻ = max(−r̂, 0)` and the trace slack fills `M1`.
    pub fn encode(&self, pt: &MsosPoint<Rational>) -> SymMatrix<Rational> {
        let k = self.basis_size();
        let (rp, rm) = if pt.r_hat.cmp0().is_ge() {
            (pt.r_hat.clone(), Rational::new())
        } else {
            (Rational::new(), Rational::from(-&pt.r_hat))
        };
        let mut top_trace = pt.w_hat.trace();
        top_trace += Rational::from(&rp + &pt.z);
        top_trace += Rational::from(&rm + &pt.z);
        let slack = Rational::from(self.embedding.m1() - &top_trace);
        SymMatrix::from_fn(k + 4, |i, j| {
            if i < k && j < k {
                pt.w_hat.get(i, j).clone()
            } else if i != j {
                Rational::new()
            } else if i == k {
                Rational::from(&rp + &pt.z)
            } else if i == k + 1 {
                Rational::from(&rm + &pt.z)
            } else if i == k + 2 {
                pt.z.clone()
            } else {
                slack.clone()
            }
        })
    }
}
