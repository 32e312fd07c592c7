//! Finite-dimensional *-algebras of matrices with a group action.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::group::{GroupDescriptor, GroupElement};
use crate::linalg::{cplx, max_abs, vectorize, CMatrix, CVector, MatrixAlgebra, SpanBasis};

/// Tolerance for algebraic identities (products, stars, group law).
pub const ALGEBRA_TOL: f64 = 1e-12;

/// A *-subalgebra `A ⊆ M_N` with a basis and an action `α: G → Aut(A)`.
///
/// The action is stored per group element as a matrix on basis coordinates.
/// Optionally the action is implemented by unitaries `α_g = Ad u_g`.
#[derive(Clone, Debug)]
pub struct GAlgebra {
    group: GroupDescriptor,
    size: usize,
    basis: Vec<CMatrix>,
    generators: Vec<CMatrix>,
    coord_map: CMatrix,
    synth_map: CMatrix,
    action: Vec<CMatrix>,
    unitaries: Option<Vec<CMatrix>>,
    unit: CMatrix,
}

fn rel_defect(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = max_abs(a).max(max_abs(b)).max(1.0);
    max_abs(&(a - b)) / scale
}

impl GAlgebra {
    /// Builds and validates an action given by coordinate matrices, one per
    /// group element in enumeration order.
    pub fn new(
        group: &GroupDescriptor,
        size: usize,
        basis: Vec<CMatrix>,
        action: Vec<CMatrix>,
    ) -> Result<GAlgebra> {
        let mut alg = GAlgebra::skeleton(group, size, basis)?;
        let dim = alg.dim();
        if action.len() != group.len() || action.iter().any(|m| m.shape() != (dim, dim)) {
            return invalid(format!(
                "action needs {} coordinate matrices of size {dim}x{dim}",
                group.len()
            ));
        }
        alg.action = action;
        alg.validate_action()?;
        Ok(alg)
    }

    /// Builds an action `α_g(a) = u_g a u_g^*` from implementing unitaries.
    pub fn from_unitaries(
        group: &GroupDescriptor,
        size: usize,
        basis: Vec<CMatrix>,
        unitaries: Vec<CMatrix>,
    ) -> Result<GAlgebra> {
        let mut alg = GAlgebra::skeleton(group, size, basis)?;
        if unitaries.len() != group.len() || unitaries.iter().any(|u| u.shape() != (size, size)) {
            return invalid(format!("need {} unitaries of size {size}", group.len()));
        }
        for (g, u) in unitaries.iter().enumerate() {
            if rel_defect(&(u * u.adjoint()), &CMatrix::identity(size, size)) > ALGEBRA_TOL {
                return Err(Error::InconsistentAction(format!(
                    "implementing operator for {} is not unitary",
                    group.element(g)
                )));
            }
        }
        let mut action = Vec::with_capacity(group.len());
        for u in &unitaries {
            let mut m = CMatrix::zeros(alg.dim(), alg.dim());
            for (j, b) in alg.basis.iter().enumerate() {
                let img = u * b * u.adjoint();
                if alg.residual(&img) > ALGEBRA_TOL * max_abs(&img).max(1.0) {
                    return Err(Error::InconsistentAction(
                        "conjugation does not preserve the algebra".into(),
                    ));
                }
                m.set_column(j, &alg.coords(&img));
            }
            action.push(m);
        }
        alg.action = action;
        alg.unitaries = Some(unitaries);
        alg.validate_action()?;
        Ok(alg)
    }

    fn skeleton(group: &GroupDescriptor, size: usize, basis: Vec<CMatrix>) -> Result<GAlgebra> {
        group.finite_orders()?;
        if basis.is_empty() {
            return invalid("algebra basis is empty");
        }
        if basis.iter().any(|b| b.shape() != (size, size)) {
            return invalid(format!("basis matrices must be {size}x{size}"));
        }
        let mut span = SpanBasis::new(size * size);
        for b in &basis {
            if !span.insert(&vectorize(b)) {
                return invalid("basis matrices are linearly dependent");
            }
        }
        let dim = basis.len();
        let mut synth = CMatrix::zeros(size * size, dim);
        for (j, b) in basis.iter().enumerate() {
            synth.set_column(j, &vectorize(b));
        }
        let gram = synth.adjoint() * &synth;
        let gram_inv = gram
            .try_inverse()
            .ok_or_else(|| Error::IllConditioned("basis Gram matrix is singular".into()))?;
        let coord_map = gram_inv * synth.adjoint();
        let closure = MatrixAlgebra::from_spanning(size, &basis).closure_defect();
        if closure > 1e-10 {
            return invalid(format!("basis does not span a *-algebra (closure defect {closure:e})"));
        }
        let mut alg = GAlgebra {
            group: group.clone(),
            size,
            generators: basis.clone(),
            basis,
            coord_map,
            synth_map: synth,
            action: Vec::new(),
            unitaries: None,
            unit: CMatrix::zeros(size, size),
        };
        alg.unit = alg.find_unit()?;
        Ok(alg)
    }

    /// Solves `e·b_j = b_j·e = b_j` for all basis elements by least squares.
    fn find_unit(&self) -> Result<CMatrix> {
        let dim = self.dim();
        let n2 = self.size * self.size;
        let mut sys = CMatrix::zeros(2 * dim * n2, dim);
        let mut rhs = CVector::zeros(2 * dim * n2);
        for (j, bj) in self.basis.iter().enumerate() {
            rhs.rows_mut(2 * j * n2, n2).copy_from(&vectorize(bj));
            rhs.rows_mut((2 * j + 1) * n2, n2).copy_from(&vectorize(bj));
            for (i, bi) in self.basis.iter().enumerate() {
                sys.view_mut((2 * j * n2, i), (n2, 1)).copy_from(&vectorize(&(bi * bj)));
                sys.view_mut(((2 * j + 1) * n2, i), (n2, 1)).copy_from(&vectorize(&(bj * bi)));
            }
        }
        let c = sys
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::IllConditioned(e.to_string()))?;
        let unit = self.from_coords(&c);
        for b in &self.basis {
            if rel_defect(&(&unit * b), b) > 1e-10 || rel_defect(&(b * &unit), b) > 1e-10 {
                return invalid("algebra has no unit");
            }
        }
        Ok(unit)
    }

    fn validate_action(&self) -> Result<()> {
        let n = self.group.len();
        let dim = self.dim();
        if rel_defect(&self.action[0], &CMatrix::identity(dim, dim)) > ALGEBRA_TOL {
            return Err(Error::InconsistentAction("α_e is not the identity".into()));
        }
        for s in 0..n {
            for t in 0..n {
                let st = self.group.add_index(s, t);
                if rel_defect(&(&self.action[s] * &self.action[t]), &self.action[st]) > ALGEBRA_TOL {
                    return Err(Error::InconsistentAction(format!(
                        "α_s∘α_t ≠ α_(s+t) at s={}, t={}",
                        self.group.element(s),
                        self.group.element(t)
                    )));
                }
            }
        }
        for gen in self.group.generators() {
            let g = self.group.index_of(&gen).expect("generator in group");
            for a in &self.basis {
                let ga = self.act(g, a);
                if rel_defect(&self.act(g, &a.adjoint()), &ga.adjoint()) > ALGEBRA_TOL {
                    return Err(Error::InconsistentAction(format!("α_{gen} does not preserve the involution")));
                }
                for b in &self.basis {
                    if rel_defect(&self.act(g, &(a * b)), &(&ga * self.act(g, b))) > ALGEBRA_TOL {
                        return Err(Error::InconsistentAction(format!("α_{gen} is not multiplicative")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Replaces the algebra generators used for ideal and center computations.
    pub fn with_generators(mut self, generators: Vec<CMatrix>) -> GAlgebra {
        self.generators = generators;
        self
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn unit(&self) -> &CMatrix {
        &self.unit
    }

    pub fn unitaries(&self) -> Option<&[CMatrix]> {
        self.unitaries.as_deref()
    }

    pub fn action_matrix(&self, g: usize) -> &CMatrix {
        &self.action[g]
    }

    pub fn coords(&self, a: &CMatrix) -> CVector {
        &self.coord_map * vectorize(a)
    }

    pub fn from_coords(&self, c: &CVector) -> CMatrix {
        let v = &self.synth_map * c;
        DMatrix::from_column_slice(self.size, self.size, v.as_slice())
    }

    /// Distance of `a` from the algebra.
    pub fn residual(&self, a: &CMatrix) -> f64 {
        max_abs(&(a - self.from_coords(&self.coords(a))))
    }

    /// `α_g(a)` for the group element with index `g`.
    pub fn act(&self, g: usize, a: &CMatrix) -> CMatrix {
        match &self.unitaries {
            Some(us) => &us[g] * a * us[g].adjoint(),
            None => self.from_coords(&(&self.action[g] * self.coords(a))),
        }
    }

    pub fn act_element(&self, g: &GroupElement, a: &CMatrix) -> CMatrix {
        self.act(self.group.index_of(g).expect("element of the acting group"), a)
    }

    /// Whether `a` is fixed by every `α_g`, to the algebraic tolerance.
    pub fn is_fixed(&self, a: &CMatrix) -> bool {
        self.fixed_defect(a) <= ALGEBRA_TOL
    }

    pub fn fixed_defect(&self, a: &CMatrix) -> f64 {
        (0..self.group.len())
            .map(|g| rel_defect(&self.act(g, a), a))
            .fold(0.0, f64::max)
    }

    /// Classical fixed subspace `{a : α_g(a) = a}` as a basis of matrices.
    pub fn classical_fixed_subspace(&self) -> Result<Vec<CMatrix>> {
        let dim = self.dim();
        let gens = self.group.generators();
        let mut stacked = CMatrix::zeros(dim * gens.len().max(1), dim);
        for (k, gen) in gens.iter().enumerate() {
            let g = self.group.index_of(gen).unwrap();
            let m = &self.action[g] - CMatrix::identity(dim, dim);
            stacked.view_mut((k * dim, 0), (dim, dim)).copy_from(&m);
        }
        let null = crate::linalg::nullspace(&stacked, crate::linalg::RANK_TOL)?;
        Ok(null.iter().map(|c| self.from_coords(c)).collect())
    }

    /// Whether the implementing unitaries (if any) form a homomorphism `G → U(N)`.
    pub fn unitaries_are_homomorphic(&self) -> bool {
        let Some(us) = &self.unitaries else {
            return false;
        };
        let n = self.group.len();
        (0..n).all(|s| {
            (0..n).all(|t| rel_defect(&(&us[s] * &us[t]), &us[self.group.add_index(s, t)]) <= ALGEBRA_TOL)
        })
    }

    pub fn scalar(&self, c: f64) -> CMatrix {
        &self.unit * cplx(c, 0.0)
    }

    pub fn zero(&self) -> CMatrix {
        CMatrix::zeros(self.size, self.size)
    }
}

pub(crate) fn unit_matrix(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;

    fn swap_algebra() -> GAlgebra {
        let g = make_group(&[2]).unwrap();
        let swap = unit_matrix(2, 0, 1) + unit_matrix(2, 1, 0);
        GAlgebra::from_unitaries(
            &g,
            2,
            vec![unit_matrix(2, 0, 0), unit_matrix(2, 1, 1)],
            vec![CMatrix::identity(2, 2), swap],
        )
        .unwrap()
    }

    #[test]
    fn swap_action_moves_idempotents() {
        let a = swap_algebra();
        let moved = a.act(1, &unit_matrix(2, 0, 0));
        assert!(max_abs(&(moved - unit_matrix(2, 1, 1))) < 1e-15);
        assert!(max_abs(&(a.unit() - CMatrix::identity(2, 2))) < 1e-12);
        let fixed = a.classical_fixed_subspace().unwrap();
        assert_eq!(fixed.len(), 1);
        assert!(a.is_fixed(&fixed[0]));
        assert!(a.unitaries_are_homomorphic());
    }

    #[test]
    fn rejects_non_automorphisms() {
        let g = make_group(&[2]).unwrap();
        let basis = vec![unit_matrix(2, 0, 0), unit_matrix(2, 1, 1)];
        // scaling by 2 is linear but not multiplicative
        let bad = vec![CMatrix::identity(2, 2), CMatrix::identity(2, 2) * cplx(2.0, 0.0)];
        assert!(GAlgebra::new(&g, 2, basis, bad).is_err());
    }

    #[test]
    fn rejects_non_algebra() {
        let g = make_group(&[1]).unwrap();
        let basis = vec![unit_matrix(2, 0, 1)];
        assert!(GAlgebra::new(&g, 2, basis, vec![CMatrix::identity(1, 1)]).is_err());
    }

    #[test]
    fn unit_of_corner_algebra() {
        let g = make_group(&[1]).unwrap();
        let a = GAlgebra::new(&g, 2, vec![unit_matrix(2, 0, 0)], vec![CMatrix::identity(1, 1)]).unwrap();
        assert!(max_abs(&(a.unit() - unit_matrix(2, 0, 0))) < 1e-12);
    }
}
