//! Proper actions at finite scale: brackets `⟨⟨ξ|η⟩⟩`, fixed-point integrals,
//! crossed products and the module checks built on them.

mod crossed;
mod frames;
mod galgebra;
pub mod lattice;
mod presets;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::CMatrix;

pub use crossed::{crossed_rep, CrossedElement, CrossedRep};
pub use frames::{
    bracket, build_a0, covariance_defect, fix_inner, fixed_point_algebra, gram_matrix, gram_positivity,
    imprimitivity_check, induce_via_morphism, inflate_action, module_equivalence_check, p1_check, r_tilde,
    right_action, saturation_check, star_and_invariance_defect, tensor_action, tensor_generators,
    FixedPointAlgebra, GramReport, ModuleEquivalence, P1Pair, P1Report, Saturation, GRAM_TOL,
};
pub use galgebra::{GAlgebra, ALGEBRA_TOL};
pub use presets::{default_cocycle, dual_action, preset, swap_action, trivial_matrix_action, Preset, FINITE_PRESETS};

/// Tolerance for the imprimitivity identity.
pub const IMPRIMITIVITY_TOL: f64 = 1e-10;

/// Everything computed for a generating subspace `R` of a finite action.
#[derive(Clone, Debug, Serialize)]
pub struct FrameReport {
    pub group: String,
    pub algebra_dim: usize,
    pub generators: usize,
    pub p1: P1Report,
    pub gram: GramReport,
    pub saturation: Saturation,
    pub crossed: CrossedRep,
    pub fixed_point_algebra: FixedPointAlgebra,
    pub imprimitivity_defect: f64,
    pub module: ModuleEquivalence,
    pub a0_defect: f64,
}

impl FrameReport {
    /// Names of the invariant checks that failed.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.p1.passed {
            out.push("p1");
        }
        if !self.gram.positive {
            out.push("gram_positivity");
        }
        if self.fixed_point_algebra.fixed_defect > ALGEBRA_TOL {
            out.push("fix_in_fixed_subspace");
        }
        if self.fixed_point_algebra.hermitian_defect > ALGEBRA_TOL {
            out.push("fix_hermitian");
        }
        if self.imprimitivity_defect >= IMPRIMITIVITY_TOL {
            out.push("imprimitivity");
        }
        if !self.module.equal {
            out.push("module_equivalence");
        }
        if self.module.formula_defect > 1e-10 {
            out.push("module_formulas");
        }
        if self.a0_defect > 1e-10 {
            out.push("a0_invariance");
        }
        out
    }
}

/// Runs every finite check on `(act, R)`.
pub fn analyze(act: &GAlgebra, r: &[CMatrix], seed: u64) -> Result<FrameReport> {
    let a0 = build_a0(act, r);
    Ok(FrameReport {
        group: act.group().to_string(),
        algebra_dim: act.dim(),
        generators: r.len(),
        p1: p1_check(act, r),
        gram: gram_positivity(act, r),
        saturation: saturation_check(act, r),
        crossed: crossed_rep(act)?,
        fixed_point_algebra: fixed_point_algebra(act, r)?,
        imprimitivity_defect: imprimitivity_check(act, r),
        module: module_equivalence_check(act, r, seed),
        a0_defect: star_and_invariance_defect(act, &a0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;
    use crate::linalg::{cplx, max_abs};
    use galgebra::unit_matrix;

    fn e(i: usize) -> CMatrix {
        unit_matrix(2, i, i)
    }

    #[test]
    fn swap_bracket_values() {
        let act = swap_action().unwrap();
        let b = bracket(&act, &e(0), &e(0));
        assert!(max_abs(&(&b.values[0] - e(0))) < 1e-15);
        assert!(max_abs(&b.values[1]) < 1e-15);
        assert!(bracket(&act, &act.zero(), &e(1)).is_zero());
    }

    #[test]
    fn swap_fix_inner_is_unit() {
        let act = swap_action().unwrap();
        let f = fix_inner(&act, &e(0), &e(0));
        assert!(max_abs(&(f - CMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn trivial_action_fix_inner_scales() {
        let act = trivial_matrix_action(&make_group(&[3]).unwrap(), 2).unwrap();
        let x = unit_matrix(2, 0, 1) + unit_matrix(2, 1, 1) * cplx(0.0, 2.0);
        let y = unit_matrix(2, 1, 0);
        let f = fix_inner(&act, &x, &y);
        assert!(max_abs(&(f - &x * y.adjoint() * cplx(3.0, 0.0))) < 1e-14);
        let b = bracket(&act, &x, &y);
        for v in &b.values {
            assert!(max_abs(&(v - x.adjoint() * &y)) < 1e-15);
        }
    }

    #[test]
    fn dual_z2_fix_inner_of_identity() {
        let act = preset("dual:Z2").unwrap().action;
        let d0 = act.basis()[0].clone();
        let f = fix_inner(&act, &d0, &d0);
        assert!(max_abs(&(f - &d0 * cplx(2.0, 0.0))) < 1e-15);
    }

    #[test]
    fn swap_a0_is_everything() {
        let act = swap_action().unwrap();
        assert_eq!(build_a0(&act, &[e(0)]).len(), 2);
        assert_eq!(r_tilde(&act, &[e(0)]).len(), 2);
    }

    #[test]
    fn swap_gram_is_singular_psd() {
        let act = swap_action().unwrap();
        let rep = gram_positivity(&act, &[e(0), e(1)]);
        assert_eq!(rep.size, 4);
        assert!(rep.min_eigenvalue.abs() < 1e-12);
        assert!(rep.positive);
        assert_eq!(gram_positivity(&act, &[]).min_eigenvalue, 0.0);
    }

    #[test]
    fn crossed_products_of_small_examples() {
        let trivial_c = trivial_matrix_action(&make_group(&[2]).unwrap(), 1).unwrap();
        let rep = crossed_rep(&trivial_c).unwrap();
        assert_eq!(rep.dimension, 2);
        assert_eq!(rep.blocks, Some(vec![1, 1]));
        let dual = preset("dual:Z2").unwrap().action;
        let rep = crossed_rep(&dual).unwrap();
        assert_eq!(rep.dimension, 4);
        assert_eq!(rep.center_dim, 1);
        assert_eq!(rep.blocks, Some(vec![2]));
        assert!(rep.faithful);
        let one = trivial_matrix_action(&make_group(&[1]).unwrap(), 2).unwrap();
        assert_eq!(crossed_rep(&one).unwrap().blocks, Some(vec![2]));
    }

    #[test]
    fn saturation_examples() {
        let dual = preset("dual:Z2").unwrap();
        let s = saturation_check(&dual.action, &dual.generators);
        assert!(s.saturated);
        assert_eq!(s.ideal_dim, 4);
        // constant brackets generate the one-dimensional ideal C(δ0+δ1) of C[Z2]
        let trivial_c = trivial_matrix_action(&make_group(&[2]).unwrap(), 1).unwrap();
        let s = saturation_check(&trivial_c, &[CMatrix::identity(1, 1)]);
        assert!(!s.saturated);
        assert_eq!(s.ideal_dim, 1);
        let zero = saturation_check(&trivial_c, &[CMatrix::zeros(1, 1)]);
        assert_eq!(zero.ideal_dim, 0);
    }

    #[test]
    fn fixed_point_algebra_examples() {
        let swap = swap_action().unwrap();
        assert_eq!(fixed_point_algebra(&swap, swap.basis()).unwrap().blocks, vec![1]);
        let m2 = trivial_matrix_action(&make_group(&[2]).unwrap(), 2).unwrap();
        assert_eq!(fixed_point_algebra(&m2, m2.basis()).unwrap().blocks, vec![2]);
        let dual = preset("dual:Z4xZ4").unwrap();
        let fp = fixed_point_algebra(&dual.action, &dual.generators).unwrap();
        assert_eq!(fp.blocks, vec![1]);
    }

    #[test]
    fn imprimitivity_examples() {
        let swap = swap_action().unwrap();
        assert!(imprimitivity_check(&swap, swap.basis()) < 1e-12);
        let dual = preset("dual:Z2").unwrap();
        assert!(imprimitivity_check(&dual.action, &dual.generators) < 1e-12);
        let one = trivial_matrix_action(&make_group(&[1]).unwrap(), 2).unwrap();
        assert_eq!(imprimitivity_check(&one, one.basis()), 0.0);
    }

    #[test]
    fn module_equivalence_examples() {
        let swap = swap_action().unwrap();
        let m = module_equivalence_check(&swap, swap.basis(), 1);
        assert!(m.equal);
        assert!(m.formula_defect < 1e-12);
        let zero = module_equivalence_check(&swap, &[swap.zero()], 1);
        assert_eq!(zero.ideal_dims, [0, 0, 0]);
    }

    #[test]
    fn induced_preset_has_diagonal_fixed_points() {
        let p = preset("induced").unwrap();
        assert_eq!(p.generators.len(), 4);
        let fp = fixed_point_algebra(&p.action, &p.generators).unwrap();
        assert_eq!(fp.blocks, vec![1, 1]);
    }

    #[test]
    fn inflation_doubles_totals() {
        let swap = swap_action().unwrap();
        let inflated = preset("inflate:swap").unwrap().action;
        let small = p1_check(&swap, swap.basis());
        let big = p1_check(&inflated, inflated.basis());
        for (a, b) in small.pairs.iter().zip(&big.pairs) {
            assert!((b.total - 2.0 * a.total).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_bracket_factorizes() {
        let a = swap_action().unwrap();
        let b = preset("dual:Z3").unwrap().action;
        let ab = tensor_action(&a, &b).unwrap();
        let (x1, x2) = (e(0), e(1) + e(0) * cplx(0.5, 0.0));
        let (y1, y2) = (b.basis()[1].clone(), b.basis()[2].clone() * cplx(0.0, 1.0));
        let lhs = bracket(&ab, &x1.kronecker(&y1), &x2.kronecker(&y2));
        let ba = bracket(&a, &x1, &x2);
        let bb = bracket(&b, &y1, &y2);
        for s in 0..2 {
            for h in 0..3 {
                let expected = ba.values[s].kronecker(&bb.values[h]);
                assert!(max_abs(&(&lhs.values[s * 3 + h] - expected)) < 1e-14);
            }
        }
    }

    #[test]
    fn all_presets_analyze() {
        for name in FINITE_PRESETS.iter().filter(|n| **n != "dual:Z4xZ4") {
            let p = preset(name).unwrap();
            let rep = analyze(&p.action, &p.generators, 11).unwrap();
            assert!(rep.failures().is_empty(), "{name}: {:?}", rep.failures());
            if p.dual {
                assert!(rep.saturation.saturated, "{name}");
                assert_eq!(rep.fixed_point_algebra.blocks, vec![1], "{name}");
            }
        }
    }
}
