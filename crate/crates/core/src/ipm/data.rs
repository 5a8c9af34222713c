use rug::Float;

use crate::linalg::{PrecisionContext, SymMatrix};
use crate::sdp::SdProblem;

/// Problem data converted to working precision, with the nonzero pattern of
/// every constraint matrix.
#[derive(Clone, Debug)]
pub struct FloatProblem {
    pub(crate) ctx: PrecisionContext,
    pub(crate) c: Vec<Float>,
    pub(crate) f: Vec<SymMatrix<Float>>,
    /// Nonzeros `(row, col, value)` of each `Fᵢ`, both triangles.
    pub(crate) nz: Vec<Vec<(usize, usize, Float)>>,
}

impl FloatProblem {
    pub fn new(p: &SdProblem, ctx: &PrecisionContext) -> Self {
        let prec = ctx.bits();
        let f: Vec<SymMatrix<Float>> = p.matrices().iter().map(|m| m.to_float(prec)).collect();
        let nz = p
            .matrices()
            .iter()
            .map(|m| {
                let n = m.n();
                let mut v = Vec::new();
                for r in 0..n {
                    for s in 0..n {
                        let e = m.get(r, s);
                        if e.cmp0().is_ne() {
                            v.push((r, s, Float::with_val(prec, e)));
                        }
                    }
                }
                v
            })
            .collect();
        FloatProblem {
            ctx: *ctx,
            c: p.c().iter().map(|v| Float::with_val(prec, v)).collect(),
            f,
            nz,
        }
    }

    pub fn m(&self) -> usize {
        self.c.len()
    }

    pub fn n(&self) -> usize {
        self.f[0].n()
    }

    pub fn ctx(&self) -> &PrecisionContext {
        &self.ctx
    }

    /// `F₀ + Σ xᵢFᵢ`.
    pub fn eval_f(&self, x: &[Float]) -> SymMatrix<Float> {
        let mut out = self.f[0].clone();
        self.accumulate(&mut out, x);
        out
    }

    /// `Σ xᵢFᵢ` (no constant term).
    pub fn linear_part(&self, x: &[Float]) -> SymMatrix<Float> {
        let mut out = SymMatrix::zeros_float(self.n(), self.ctx.bits());
        self.accumulate(&mut out, x);
        out
    }

    fn accumulate(&self, out: &mut SymMatrix<Float>, x: &[Float]) {
        let prec = self.ctx.bits();
        let n = self.n();
        let mut acc: Vec<Float> = (0..n * n).map(|k| out.get(k / n, k % n).clone()).collect();
        for (xi, nz) in x.iter().zip(&self.nz[1..]) {
            if xi.is_zero() {
                continue;
            }
            for (r, s, v) in nz {
                if r <= s {
                    acc[r * n + s] += Float::with_val(prec, xi * v);
                }
            }
        }
        *out = SymMatrix::from_fn(n, |r, s| acc[r * n + s].clone());
    }

    /// `tr(Fᵢ S)` using the sparsity of `Fᵢ`.
    pub fn trace_with(&self, i: usize, s: &SymMatrix<Float>) -> Float {
        let mut acc = Float::new(self.ctx.bits());
        for (r, c, v) in &self.nz[i] {
            acc += v * s.get(*c, *r);
        }
        acc
    }

    /// `Σ |Fᵢ[r,c]·S[c,r]|`, the rounding scale of [`FloatProblem::trace_with`].
    pub fn trace_scale(&self, i: usize, s: &SymMatrix<Float>) -> Float {
        let mut acc = Float::new(self.ctx.bits());
        for (r, c, v) in &self.nz[i] {
            acc += Float::with_val(self.ctx.bits(), v * s.get(*c, *r)).abs();
        }
        acc
    }

    /// `cᵀx`.
    pub fn objective(&self, x: &[Float]) -> Float {
        let mut s = Float::new(self.ctx.bits());
        for (ci, xi) in self.c.iter().zip(x) {
            s += ci * xi;
        }
        s
    }
}
