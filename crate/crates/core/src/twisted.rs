//! The twisted group algebra `C[G,ω]` of a finite abelian group.
//!
//! Elements are dense coefficient vectors indexed by the group's enumeration.
//! Point-mass operators (`λ_ω(δ_t)`, `ρ_ω(s)`) are kept as exact monomial
//! matrices so commutation relations can be checked without rounding.

use num_complex::Complex64;

use crate::cocycle::Cocycle;
use crate::error::{invalid, Result};
use crate::group::{dual_pair, GroupDescriptor, GroupElement};
use crate::linalg::{CMatrix, MatrixAlgebra, Wedderburn};
use crate::phase::Phase;

#[derive(Clone, Debug, PartialEq)]
pub struct TwistedElement {
    group: GroupDescriptor,
    coeffs: Vec<Complex64>,
}

impl TwistedElement {
    pub fn new(group: &GroupDescriptor, coeffs: Vec<Complex64>) -> Result<TwistedElement> {
        group.finite_orders()?;
        if coeffs.len() != group.len() {
            return invalid(format!("{} coefficients for a group of order {}", coeffs.len(), group.len()));
        }
        Ok(TwistedElement {
            group: group.clone(),
            coeffs,
        })
    }

    pub fn zero(group: &GroupDescriptor) -> TwistedElement {
        TwistedElement {
            group: group.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); group.len()],
        }
    }

    pub fn delta(group: &GroupDescriptor, s: &GroupElement) -> TwistedElement {
        let mut f = TwistedElement::zero(group);
        f.coeffs[group.index_of(s).expect("element of the group")] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn delta_index(group: &GroupDescriptor, s: usize) -> TwistedElement {
        let mut f = TwistedElement::zero(group);
        f.coeffs[s] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, s: &GroupElement) -> Complex64 {
        self.coeffs[self.group.index_of(s).expect("element of the group")]
    }

    pub fn support(&self) -> Vec<GroupElement> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(i, _)| self.group.element(i))
            .collect()
    }

    pub fn add(&self, other: &TwistedElement) -> TwistedElement {
        TwistedElement {
            group: self.group.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> TwistedElement {
        TwistedElement {
            group: self.group.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Largest coefficientwise difference.
    pub fn distance(&self, other: &TwistedElement) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |acc: f64, (a, b)| acc.max((a - b).norm()))
    }
}

fn check_context(f: &TwistedElement, omega: &Cocycle) -> Result<()> {
    if f.group() != omega.group() {
        return invalid(format!("element on {} used with a cocycle on {}", f.group(), omega.group()));
    }
    Ok(())
}

/// `(f *_ω g)(t) = Σ_s f(s) g(t−s) ω(s, t−s)`.
pub fn convolve(f: &TwistedElement, g: &TwistedElement, omega: &Cocycle) -> Result<TwistedElement> {
    check_context(f, omega)?;
    check_context(g, omega)?;
    let n = omega.order();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for s in 0..n {
        if f.coeffs[s].norm() == 0.0 {
            continue;
        }
        for u in 0..n {
            if g.coeffs[u].norm() == 0.0 {
                continue;
            }
            let t = omega.add_index(s, u);
            out[t] += f.coeffs[s] * g.coeffs[u] * omega.value_index(s, u).to_complex();
        }
    }
    TwistedElement::new(omega.group(), out)
}

/// `f*(s) = conj(ω(s,−s) f(−s))`.
pub fn involute(f: &TwistedElement, omega: &Cocycle) -> Result<TwistedElement> {
    check_context(f, omega)?;
    let n = omega.order();
    let coeffs = (0..n)
        .map(|s| {
            let ms = omega.neg_index(s);
            (omega.value_index(s, ms).to_complex() * f.coeffs[ms]).conj()
        })
        .collect();
    TwistedElement::new(omega.group(), coeffs)
}

/// `χ·f`, with the character `χ = dual_pair(chi, ·)`.
pub fn dual_act(chi: &GroupElement, f: &TwistedElement) -> Result<TwistedElement> {
    let g = f.group().clone();
    let coeffs = g
        .elements()
        .zip(&f.coeffs)
        .map(|(s, c)| Ok(c * dual_pair(&g, chi, &s)?.to_complex()))
        .collect::<Result<Vec<_>>>()?;
    TwistedElement::new(&g, coeffs)
}

/// A monomial matrix: column `q` is `exp(2πi·phase[q])` times the basis vector `perm[q]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    perm: Vec<usize>,
    phase: Vec<Phase>,
}

impl Monomial {
    pub fn identity(n: usize) -> Monomial {
        Monomial {
            perm: (0..n).collect(),
            phase: vec![Phase::ZERO; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// The product `self · other`.
    pub fn compose(&self, other: &Monomial) -> Monomial {
        let perm = other.perm.iter().map(|&q| self.perm[q]).collect();
        let phase = other
            .perm
            .iter()
            .zip(&other.phase)
            .map(|(&q, &p)| p + self.phase[q])
            .collect();
        Monomial { perm, phase }
    }

    pub fn adjoint(&self) -> Monomial {
        let n = self.dim();
        let mut perm = vec![0; n];
        let mut phase = vec![Phase::ZERO; n];
        for q in 0..n {
            perm[self.perm[q]] = q;
            phase[self.perm[q]] = -self.phase[q];
        }
        Monomial { perm, phase }
    }

    pub fn is_unitary(&self) -> bool {
        let mut seen = vec![false; self.dim()];
        self.perm.iter().all(|&r| !std::mem::replace(&mut seen[r], true))
    }

    /// Exact commutator test: `AB = BA` entry for entry.
    pub fn commutes_with(&self, other: &Monomial) -> bool {
        self.compose(other) == other.compose(self)
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for q in 0..n {
            m[(self.perm[q], q)] = self.phase[q].to_complex();
        }
        m
    }
}

/// `λ_ω(δ_t)`: `δ_q ↦ ω(t,q) δ_{t+q}`.
pub fn left_regular_point(t: usize, omega: &Cocycle) -> Monomial {
    let n = omega.order();
    Monomial {
        perm: (0..n).map(|q| omega.add_index(t, q)).collect(),
        phase: (0..n).map(|q| omega.value_index(t, q)).collect(),
    }
}

/// `ρ_ω(s)`: `(ρ_ω(s)ξ)(r) = ω(r−s, s) ξ(r−s)`, i.e. `δ_q ↦ ω(q,s) δ_{q+s}`.
pub fn right_regular_point(s: usize, omega: &Cocycle) -> Monomial {
    let n = omega.order();
    Monomial {
        perm: (0..n).map(|q| omega.add_index(q, s)).collect(),
        phase: (0..n).map(|q| omega.value_index(q, s)).collect(),
    }
}

/// Matrix of `ξ ↦ f *_ω ξ` on `ℓ²(G)`.
pub fn left_regular(f: &TwistedElement, omega: &Cocycle) -> Result<CMatrix> {
    check_context(f, omega)?;
    let n = omega.order();
    let mut m = CMatrix::zeros(n, n);
    for t in 0..n {
        let c = f.coeffs[t];
        if c.norm() == 0.0 {
            continue;
        }
        let lam = left_regular_point(t, omega);
        for q in 0..n {
            m[(lam.perm[q], q)] += c * lam.phase[q].to_complex();
        }
    }
    Ok(m)
}

pub fn right_regular(s: &GroupElement, omega: &Cocycle) -> Result<CMatrix> {
    let idx = omega
        .group()
        .index_of(s)
        .ok_or_else(|| crate::Error::InvalidArgument(format!("{s} is not in {}", omega.group())))?;
    Ok(right_regular_point(idx, omega).to_matrix())
}

/// The image of `λ_ω` as a matrix algebra, generated by `λ_ω(δ_{e_j})`.
pub fn regular_image(omega: &Cocycle) -> MatrixAlgebra {
    let n = omega.order();
    let g = omega.group();
    let spanning: Vec<CMatrix> = (0..n).map(|t| left_regular_point(t, omega).to_matrix()).collect();
    let gens = g
        .generators()
        .iter()
        .map(|e| left_regular_point(g.index_of(e).unwrap(), omega).to_matrix())
        .collect();
    MatrixAlgebra::from_spanning(n, &spanning).with_generators(gens)
}

/// Wedderburn block sizes of `C[G,ω]`.
pub fn decompose(omega: &Cocycle) -> Result<Wedderburn> {
    regular_image(omega).wedderburn(0x5eed)
}

/// Elements fixed by every character under the dual action.
#[derive(Clone, Debug)]
pub struct FixedPoints {
    pub dimension: usize,
    pub basis: Vec<TwistedElement>,
}

/// `{f : χ·f = f for all χ}`, by exact brute force over the dual group.
pub fn classical_fixed_points(omega: &Cocycle) -> Result<FixedPoints> {
    let g = omega.group().clone();
    let mut basis = Vec::new();
    for s in g.elements() {
        let mut fixed = true;
        for chi in g.elements() {
            if !dual_pair(&g, &chi, &s)?.is_zero() {
                fixed = false;
                break;
            }
        }
        if fixed {
            basis.push(TwistedElement::delta(&g, &s));
        }
    }
    Ok(FixedPoints {
        dimension: basis.len(),
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;
    use num_rational::Rational64;

    fn el(c: &[i64]) -> GroupElement {
        GroupElement(c.to_vec())
    }

    #[test]
    fn point_mass_products() {
        let w = Cocycle::standard(4).unwrap();
        let g = w.group().clone();
        let e = TwistedElement::delta(&g, &g.identity());
        let d = TwistedElement::delta(&g, &el(&[2, 3]));
        assert!(convolve(&e, &d, &w).unwrap().distance(&d) < 1e-15);
        let a = TwistedElement::delta(&g, &el(&[1, 0]));
        let b = TwistedElement::delta(&g, &el(&[0, 1]));
        let ab = convolve(&a, &b, &w).unwrap().coeff(&el(&[1, 1]));
        let ba = convolve(&b, &a, &w).unwrap().coeff(&el(&[1, 1]));
        // ab = exp(-2πi/4)·ba
        assert!((ab - ba * Phase::new(-1, 4).to_complex()).norm() < 1e-15);
    }

    #[test]
    fn involution_of_point_mass() {
        let w = Cocycle::standard(3).unwrap();
        let g = w.group().clone();
        let s = el(&[2, 1]);
        let star = involute(&TwistedElement::delta(&g, &s), &w).unwrap();
        let ms = g.neg(&s);
        let expected = w.value(&s, &ms).conj().to_complex();
        assert!((star.coeff(&ms) - expected).norm() < 1e-15);
        assert_eq!(star.support(), vec![ms]);
    }

    #[test]
    fn regular_matrices_on_z2() {
        let g = make_group(&[2]).unwrap();
        let w = Cocycle::trivial(&g).unwrap();
        let swap = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let l = left_regular(&TwistedElement::delta(&g, &el(&[1])), &w).unwrap();
        assert_eq!(l, swap);
        assert_eq!(right_regular(&el(&[1]), &w).unwrap(), swap);
        assert_eq!(right_regular(&el(&[0]), &w).unwrap(), CMatrix::identity(2, 2));
    }

    #[test]
    fn clock_and_shift_relation() {
        let w = Cocycle::standard(4).unwrap();
        let g = w.group().clone();
        let u = left_regular_point(g.index_of(&el(&[1, 0])).unwrap(), &w);
        let v = left_regular_point(g.index_of(&el(&[0, 1])).unwrap(), &w);
        let uv = u.compose(&v);
        let vu = v.compose(&u);
        let twisted = Monomial {
            perm: vu.perm.clone(),
            phase: vu.phase.iter().map(|&p| p + Phase::new(-1, 4)).collect(),
        };
        assert_eq!(uv, twisted);
    }

    #[test]
    fn right_regular_commutes_exactly() {
        let w = Cocycle::standard(4).unwrap();
        for s in 0..16 {
            let rho = right_regular_point(s, &w);
            assert!(rho.is_unitary());
            for t in 0..16 {
                assert!(rho.commutes_with(&left_regular_point(t, &w)));
            }
        }
    }

    #[test]
    fn dual_action_examples() {
        let g = make_group(&[2]).unwrap();
        let d1 = TwistedElement::delta(&g, &el(&[1]));
        let out = dual_act(&el(&[1]), &d1).unwrap();
        assert!((out.coeff(&el(&[1])) + 1.0).norm() < 1e-15);
        assert_eq!(dual_act(&el(&[0]), &d1).unwrap(), d1);
    }

    #[test]
    fn decompose_examples() {
        let z5 = make_group(&[5]).unwrap();
        assert_eq!(decompose(&Cocycle::trivial(&z5).unwrap()).unwrap().blocks, vec![1; 5]);
        assert_eq!(decompose(&Cocycle::standard(2).unwrap()).unwrap().blocks, vec![2]);
        let w4 = decompose(&Cocycle::standard(4).unwrap()).unwrap();
        assert_eq!(w4.blocks, vec![4]);
        assert_eq!(w4.center_dim, 1);
        let g = make_group(&[4, 4]).unwrap();
        let z = Rational64::new(0, 1);
        let half = Cocycle::from_bicharacter(&g, vec![vec![z, z], vec![Rational64::new(1, 2), z]]).unwrap();
        assert_eq!(decompose(&half).unwrap().blocks, vec![2, 2, 2, 2]);
    }

    #[test]
    fn fixed_points_are_scalars() {
        for w in [
            Cocycle::standard(4).unwrap(),
            Cocycle::trivial(&make_group(&[2]).unwrap()).unwrap(),
            Cocycle::trivial(&make_group(&[1]).unwrap()).unwrap(),
        ] {
            let fp = classical_fixed_points(&w).unwrap();
            assert_eq!(fp.dimension, 1);
            assert_eq!(fp.basis[0].support(), vec![w.group().identity()]);
        }
    }
}
