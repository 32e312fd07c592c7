//! The crossed product `A ⋊_α G` for finite `G`, in coordinates and in its
//! regular covariant representation on `C^N ⊗ ℓ²(G)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, nullspace, vectorize, CMatrix, CVector, MatrixAlgebra, SpanBasis, RANK_TOL};
use crate::proper::galgebra::{GAlgebra, ALGEBRA_TOL};

/// A function `G → A`, stored densely in the group's enumeration order.
#[derive(Clone, Debug)]
pub struct CrossedElement {
    pub values: Vec<CMatrix>,
}

impl CrossedElement {
    pub fn zero(act: &GAlgebra) -> CrossedElement {
        CrossedElement {
            values: vec![act.zero(); act.group().len()],
        }
    }

    /// `a·δ_s`.
    pub fn point(act: &GAlgebra, a: &CMatrix, s: usize) -> CrossedElement {
        let mut f = CrossedElement::zero(act);
        f.values[s] = a.clone();
        f
    }

    pub fn add(&self, other: &CrossedElement) -> CrossedElement {
        CrossedElement {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CrossedElement) -> CrossedElement {
        CrossedElement {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs() == 0.0
    }
}

impl GAlgebra {
    /// `(f*g)(t) = Σ_s f(s) α_s(g(t−s))`.
    pub fn crossed_mul(&self, f: &CrossedElement, g: &CrossedElement) -> CrossedElement {
        let grp = self.group();
        let n = grp.len();
        let mut out = CrossedElement::zero(self);
        for s in 0..n {
            if max_abs(&f.values[s]) == 0.0 {
                continue;
            }
            for u in 0..n {
                if max_abs(&g.values[u]) == 0.0 {
                    continue;
                }
                let t = grp.add_index(s, u);
                out.values[t] += &f.values[s] * self.act(s, &g.values[u]);
            }
        }
        out
    }

    /// `f*(t) = α_t(f(−t)^*)`.
    pub fn crossed_star(&self, f: &CrossedElement) -> CrossedElement {
        let grp = self.group();
        CrossedElement {
            values: (0..grp.len())
                .map(|t| self.act(t, &f.values[grp.neg_index(t)].adjoint()))
                .collect(),
        }
    }

    /// `(f·i(b))(t) = f(t) α_t(b)`.
    pub fn crossed_right_algebra(&self, f: &CrossedElement, b: &CMatrix) -> CrossedElement {
        CrossedElement {
            values: f
                .values
                .iter()
                .enumerate()
                .map(|(t, v)| v * self.act(t, b))
                .collect(),
        }
    }

    /// `(i(a)·f)(t) = a f(t)`.
    pub fn crossed_left_algebra(&self, a: &CMatrix, f: &CrossedElement) -> CrossedElement {
        CrossedElement {
            values: f.values.iter().map(|v| a * v).collect(),
        }
    }

    /// `(λ_s f)(t) = α_s(f(t−s))`.
    pub fn crossed_left_shift(&self, s: usize, f: &CrossedElement) -> CrossedElement {
        let grp = self.group();
        let ms = grp.neg_index(s);
        CrossedElement {
            values: (0..grp.len())
                .map(|t| self.act(s, &f.values[grp.add_index(t, ms)]))
                .collect(),
        }
    }

    /// `(f λ_s)(t) = f(t−s)`.
    pub fn crossed_right_shift(&self, f: &CrossedElement, s: usize) -> CrossedElement {
        let grp = self.group();
        let ms = grp.neg_index(s);
        CrossedElement {
            values: (0..grp.len()).map(|t| f.values[grp.add_index(t, ms)].clone()).collect(),
        }
    }

    pub fn crossed_dim(&self) -> usize {
        self.dim() * self.group().len()
    }

    pub fn crossed_coords(&self, f: &CrossedElement) -> CVector {
        let dim = self.dim();
        let mut v = CVector::zeros(self.crossed_dim());
        for (t, a) in f.values.iter().enumerate() {
            v.rows_mut(t * dim, dim).copy_from(&self.coords(a));
        }
        v
    }

    pub fn crossed_from_coords(&self, v: &CVector) -> CrossedElement {
        let dim = self.dim();
        CrossedElement {
            values: (0..self.group().len())
                .map(|t| self.from_coords(&v.rows(t * dim, dim).into_owned()))
                .collect(),
        }
    }

    /// The basis `b_i δ_s` of the crossed product, index `s·dim + i`.
    pub fn crossed_basis(&self) -> Vec<CrossedElement> {
        let mut out = Vec::with_capacity(self.crossed_dim());
        for s in 0..self.group().len() {
            for b in self.basis() {
                out.push(CrossedElement::point(self, b, s));
            }
        }
        out
    }

    /// Image of `f` in the regular representation: block `(r, r−s)` is `α_{−r}(f(s))`.
    pub fn regular_image(&self, f: &CrossedElement) -> CMatrix {
        let grp = self.group();
        let (n, size) = (grp.len(), self.size());
        let mut m = CMatrix::zeros(n * size, n * size);
        for (s, a) in f.values.iter().enumerate() {
            if max_abs(a) == 0.0 {
                continue;
            }
            let ms = grp.neg_index(s);
            for r in 0..n {
                let q = grp.add_index(r, ms);
                let block = self.act(grp.neg_index(r), a);
                m.view_mut((r * size, q * size), (size, size)).copy_from(&block);
            }
        }
        m
    }

    /// Image of `f` under `a ↦ a, λ_s ↦ u_s`, when the unitaries form a homomorphism.
    pub fn unitary_image(&self, f: &CrossedElement) -> Option<CMatrix> {
        let us = self.unitaries()?;
        let mut m = self.zero();
        for (s, a) in f.values.iter().enumerate() {
            if max_abs(a) > 0.0 {
                m += a * &us[s];
            }
        }
        Some(m)
    }

    /// Whether the unitary covariant pair is a faithful representation of the crossed product.
    pub fn unitary_rep_is_faithful(&self) -> bool {
        if !self.unitaries_are_homomorphic() {
            return false;
        }
        if self.crossed_dim() > self.size() * self.size() {
            return false;
        }
        let mut span = SpanBasis::new(self.size() * self.size());
        for f in self.crossed_basis() {
            span.insert(&vectorize(&self.unitary_image(&f).expect("unitaries present")));
        }
        span.len() == self.crossed_dim()
    }

    /// The smallest faithful representation available: the unitary pair when
    /// it is faithful, otherwise the regular representation.
    pub fn faithful_image(&self, f: &CrossedElement) -> CMatrix {
        if self.unitary_rep_is_faithful() {
            self.unitary_image(f).expect("unitaries present")
        } else {
            self.regular_image(f)
        }
    }

    /// Multiplicative generators of the crossed product: `i(g), i(g)^*` and `λ_{e_j}`.
    fn crossed_generators(&self) -> (Vec<CMatrix>, Vec<usize>) {
        let mut alg = Vec::new();
        for g in self.generators() {
            alg.push(g.clone());
            alg.push(g.adjoint());
        }
        let grp = self.group();
        let shifts = grp.generators().iter().map(|e| grp.index_of(e).unwrap()).collect();
        (alg, shifts)
    }

    /// Dimension and basis of the two-sided ideal generated by `seeds`.
    pub fn ideal_generated(&self, seeds: &[CrossedElement]) -> (usize, Vec<CrossedElement>) {
        let total = self.crossed_dim();
        let floor = 1e-10 * seeds.iter().map(|f| self.crossed_coords(f).norm()).fold(0.0, f64::max);
        let mut span = SpanBasis::new(total).with_floor(floor);
        let mut basis: Vec<CrossedElement> = Vec::new();
        let push = |f: CrossedElement, span: &mut SpanBasis, basis: &mut Vec<CrossedElement>| {
            if span.insert(&self.crossed_coords(&f)) {
                basis.push(f);
            }
        };
        for f in seeds {
            push(f.clone(), &mut span, &mut basis);
        }
        let (alg, shifts) = self.crossed_generators();
        let mut cursor = 0;
        while cursor < basis.len() && !span.is_full() {
            let x = basis[cursor].clone();
            cursor += 1;
            for a in &alg {
                push(self.crossed_left_algebra(a, &x), &mut span, &mut basis);
                push(self.crossed_right_algebra(&x, a), &mut span, &mut basis);
            }
            for &s in &shifts {
                push(self.crossed_left_shift(s, &x), &mut span, &mut basis);
                push(self.crossed_right_shift(&x, s), &mut span, &mut basis);
            }
        }
        (span.len(), basis)
    }

    /// Dimension of the center of the crossed product.
    pub fn crossed_center_dim(&self) -> Result<usize> {
        let total = self.crossed_dim();
        let (alg, shifts) = self.crossed_generators();
        let ngen = alg.len() + shifts.len();
        let mut map = CMatrix::zeros(total * ngen, total);
        for (col, f) in self.crossed_basis().iter().enumerate() {
            let mut row = 0;
            for a in &alg {
                let c = self
                    .crossed_left_algebra(a, f)
                    .sub(&self.crossed_right_algebra(f, a));
                map.view_mut((row, col), (total, 1)).copy_from(&self.crossed_coords(&c));
                row += total;
            }
            for &s in &shifts {
                let c = self
                    .crossed_left_shift(s, f)
                    .sub(&self.crossed_right_shift(f, s));
                map.view_mut((row, col), (total, 1)).copy_from(&self.crossed_coords(&c));
                row += total;
            }
        }
        Ok(nullspace(&map, RANK_TOL)?.len())
    }
}

/// Summary of the regular covariant representation.
#[derive(Clone, Debug, Serialize)]
pub struct CrossedRep {
    pub dimension: usize,
    pub rep_size: usize,
    pub covariance_defect: f64,
    pub faithful: bool,
    pub center_dim: usize,
    pub blocks: Option<Vec<usize>>,
}

/// Largest size of a faithful representation on which blocks are split explicitly.
const BLOCK_SPLIT_LIMIT: usize = 64;

/// Checks covariance and faithfulness of the regular pair and computes the
/// Wedderburn blocks of `A ⋊ G`.
pub fn crossed_rep(act: &GAlgebra) -> Result<CrossedRep> {
    let grp = act.group();
    let n = grp.len();
    // covariance λ_s π(a) λ_s^* = π(α_s(a)) reads α_{−r}(α_s(a)) = α_{−(r−s)}(a) blockwise
    let mut defect = 0.0f64;
    for a in act.generators() {
        for s in 0..n {
            let moved = act.act(s, a);
            for r in 0..n {
                let lhs = act.act(grp.neg_index(r), &moved);
                let rhs = act.act(grp.neg_index(grp.add_index(r, grp.neg_index(s))), a);
                defect = defect.max(max_abs(&(lhs - rhs)));
            }
        }
    }
    if defect > ALGEBRA_TOL {
        return Err(Error::InconsistentAction(format!("covariance defect {defect:e}")));
    }
    // the r = 0 block of π(f) is f(s) in column block −s, so faithfulness is the rank of A ⊆ M_N
    let mut span = SpanBasis::new(act.size() * act.size());
    for b in act.basis() {
        span.insert(&vectorize(b));
    }
    let faithful = span.len() == act.dim();
    let dimension = act.crossed_dim();
    let center_dim = act.crossed_center_dim()?;
    let blocks = if center_dim == 1 {
        let d = (dimension as f64).sqrt().round() as usize;
        (d * d == dimension).then(|| vec![d])
    } else {
        let small = act.unitary_rep_is_faithful();
        let size = if small { act.size() } else { act.size() * n };
        if size <= BLOCK_SPLIT_LIMIT {
            let images: Vec<CMatrix> = act
                .crossed_basis()
                .iter()
                .map(|f| if small { act.unitary_image(f).unwrap() } else { act.regular_image(f) })
                .collect();
            Some(MatrixAlgebra::from_spanning(size, &images).wedderburn(0xc0ffee)?.blocks)
        } else {
            None
        }
    };
    Ok(CrossedRep {
        dimension,
        rep_size: act.size() * n,
        covariance_defect: defect,
        faithful,
        center_dim,
        blocks,
    })
}
