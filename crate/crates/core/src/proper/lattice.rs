//! The shift action of `Z^k` on `c_0(Z^k)`, truncated along a ladder of windows.
//!
//! Sequences are given by formulas and sampled on a box; the algebra is
//! commutative with the sup norm, and `α_t(η)(ν) = η(ν−t)`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::proper::frames::{P1Pair, P1Report};

pub type Sequence = Arc<dyn Fn(&[i64]) -> Complex64 + Send + Sync>;

/// Default strict-convergence tolerance.
pub const STRICT_TOL: f64 = 1e-9;

pub fn default_windows() -> Vec<i64> {
    vec![2, 4, 8, 16, 32, 64]
}

#[derive(Clone, Debug)]
pub struct ShiftModel {
    rank: usize,
    windows: Vec<i64>,
    eval_radius: i64,
    tol: f64,
}

/// Sampled `Σ_{t∈K} α_t(ξη^*)` on the evaluation box for the largest window.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeFix {
    pub eval_radius: i64,
    pub values: Vec<Complex64>,
    /// `sup_ν |b^*(S_K − S_K')b|` for each test element over consecutive windows.
    pub monitor: Vec<Vec<f64>>,
}

/// Samples of a sequence on a box `[−E, E]^k`, last coordinate fastest.
struct Samples {
    radius: i64,
    rank: usize,
    values: Vec<Complex64>,
}

impl Samples {
    fn new(f: &Sequence, rank: usize, radius: i64) -> Samples {
        let side = (2 * radius + 1) as usize;
        let total = side.pow(rank as u32);
        let values = (0..total)
            .map(|i| f(&point(i, rank, radius)))
            .collect();
        Samples { radius, rank, values }
    }

    fn get(&self, nu: &[i64]) -> Complex64 {
        let side = 2 * self.radius + 1;
        let mut idx = 0i64;
        for &c in nu.iter().take(self.rank) {
            idx = idx * side + c + self.radius;
        }
        self.values[idx as usize]
    }
}

fn point(index: usize, rank: usize, radius: i64) -> Vec<i64> {
    let side = 2 * radius + 1;
    let mut rem = index as i64;
    let mut p = vec![0; rank];
    for j in (0..rank).rev() {
        p[j] = rem % side - radius;
        rem /= side;
    }
    p
}

fn box_len(rank: usize, radius: i64) -> usize {
    ((2 * radius + 1) as usize).pow(rank as u32)
}

fn sup_norm(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).max().unwrap_or(0)
}

impl ShiftModel {
    pub fn new(rank: usize, windows: Vec<i64>, tol: f64) -> Result<ShiftModel> {
        if rank == 0 {
            return invalid("lattice rank must be positive");
        }
        if windows.is_empty() || windows[0] < 1 || windows.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("window radii must be positive and strictly increasing");
        }
        if tol <= 0.0 {
            return invalid("tolerance must be positive");
        }
        let eval_radius = *windows.last().unwrap();
        Ok(ShiftModel {
            rank,
            windows,
            eval_radius,
            tol,
        })
    }

    /// Restricts the box on which sup norms are evaluated.
    pub fn with_eval_radius(mut self, radius: i64) -> ShiftModel {
        self.eval_radius = radius.max(1);
        self
    }

    pub fn windows(&self) -> &[i64] {
        &self.windows
    }

    fn max_window(&self) -> i64 {
        *self.windows.last().unwrap()
    }

    fn shell(&self, t: &[i64]) -> usize {
        let r = sup_norm(t);
        self.windows.iter().position(|&w| r <= w).unwrap()
    }

    fn samples(&self, f: &Sequence) -> Samples {
        Samples::new(f, self.rank, self.eval_radius + self.max_window())
    }

    /// Partial sums `Σ_{|t|≤R} sup_ν |ξ(ν) η(ν−t)|` per window and their increments.
    pub fn p1_check(&self, r: &[Sequence]) -> P1Report {
        let wmax = self.max_window();
        let samples: Vec<Samples> = r.iter().map(|f| self.samples(f)).collect();
        let nt = box_len(self.rank, wmax);
        let nnu = box_len(self.rank, self.eval_radius);
        let mut pairs = Vec::new();
        let mut warnings = Vec::new();
        let mut passed = true;
        for (i, xi) in samples.iter().enumerate() {
            for (j, eta) in samples.iter().enumerate() {
                let mut shells = vec![0.0; self.windows.len()];
                for ti in 0..nt {
                    let t = point(ti, self.rank, wmax);
                    let mut sup = 0.0f64;
                    for ni in 0..nnu {
                        let nu = point(ni, self.rank, self.eval_radius);
                        let shifted: Vec<i64> = nu.iter().zip(&t).map(|(a, b)| a - b).collect();
                        sup = sup.max((xi.get(&nu).conj() * eta.get(&shifted)).norm());
                    }
                    shells[self.shell(&t)] += sup;
                }
                let mut partial = Vec::with_capacity(shells.len());
                let mut acc = 0.0;
                for s in &shells {
                    acc += s;
                    partial.push(acc);
                }
                let increments: Vec<f64> = shells[1..].to_vec();
                if increments.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-300) {
                    warnings.push(format!("increments for pair ({i},{j}) are not monotone"));
                }
                let last = increments.last().copied().unwrap_or(0.0);
                if !(last < self.tol) {
                    passed = false;
                }
                pairs.push(P1Pair {
                    i,
                    j,
                    total: acc,
                    partial_sums: partial,
                    increments,
                });
            }
        }
        P1Report {
            windows: self.windows.clone(),
            tol: self.tol,
            pairs,
            passed,
            warnings,
        }
    }

    /// `Σ_{t∈K} α_t(ξη^*)` over the window ladder with the strict-convergence
    /// monitor `sup |b^*(S_K − S_K')b|` for `b` in `tests`.
    ///
    /// The monitor certifies the last consecutive pair of windows.
    pub fn fix_inner(&self, xi: &Sequence, eta: &Sequence, tests: &[Sequence]) -> Result<LatticeFix> {
        let wmax = self.max_window();
        let (sx, se) = (self.samples(xi), self.samples(eta));
        let tests: Vec<Samples> = tests.iter().map(|b| self.samples(b)).collect();
        let nnu = box_len(self.rank, self.eval_radius);
        let nt = box_len(self.rank, wmax);
        let nshell = self.windows.len();
        // shell contributions per evaluation point
        let mut shells = vec![vec![Complex64::new(0.0, 0.0); nnu]; nshell];
        for ti in 0..nt {
            let t = point(ti, self.rank, wmax);
            let k = self.shell(&t);
            for ni in 0..nnu {
                let nu = point(ni, self.rank, self.eval_radius);
                let shifted: Vec<i64> = nu.iter().zip(&t).map(|(a, b)| a - b).collect();
                shells[k][ni] += sx.get(&shifted) * se.get(&shifted).conj();
            }
        }
        let mut values = vec![Complex64::new(0.0, 0.0); nnu];
        for shell in &shells {
            for (v, s) in values.iter_mut().zip(shell) {
                *v += s;
            }
        }
        let mut monitor = Vec::with_capacity(tests.len());
        for (g, b) in tests.iter().enumerate() {
            let mut incs = Vec::with_capacity(nshell.saturating_sub(1));
            for shell in &shells[1..] {
                let mut sup = 0.0f64;
                for (ni, s) in shell.iter().enumerate() {
                    let nu = point(ni, self.rank, self.eval_radius);
                    let bv = b.get(&nu);
                    sup = sup.max((bv.conj() * s * bv).norm());
                }
                incs.push(sup);
            }
            let last = incs.last().copied().unwrap_or(0.0);
            if !(last < self.tol) {
                return Err(Error::NotStrictlyConvergent {
                    generator: g,
                    increment: last,
                });
            }
            monitor.push(incs);
        }
        Ok(LatticeFix {
            eval_radius: self.eval_radius,
            values,
            monitor,
        })
    }
}

/// `ν ↦ r^{|ν|₁}`.
pub fn geometric(r: f64) -> Sequence {
    Arc::new(move |nu: &[i64]| {
        let d: i64 = nu.iter().map(|x| x.abs()).sum();
        Complex64::new(r.powi(d as i32), 0.0)
    })
}

/// The constant sequence, which does not decay under the shift.
pub fn constant(c: f64) -> Sequence {
    Arc::new(move |_: &[i64]| Complex64::new(c, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric_increment(r: f64, lo: i64, hi: i64) -> f64 {
        2.0 * r.powi((lo + 1) as i32) * (1.0 - r.powi((hi - lo) as i32)) / (1.0 - r)
    }

    #[test]
    fn geometric_tails_match_closed_form() {
        let r = 0.5;
        let model = ShiftModel::new(1, default_windows(), 1e-9).unwrap();
        let rep = model.p1_check(&[geometric(r)]);
        assert!(rep.passed);
        assert!(rep.warnings.is_empty());
        let ws = default_windows();
        for (k, inc) in rep.pairs[0].increments.iter().enumerate() {
            let expected = geometric_increment(r, ws[k], ws[k + 1]);
            assert!((inc - expected).abs() <= 1e-14 * expected.max(1e-300), "{inc} vs {expected}");
        }
        // total is (1+r)/(1−r) up to the truncated tail
        assert!((rep.pairs[0].total - 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_profile_fails() {
        let model = ShiftModel::new(1, vec![2, 4, 8], 1e-9).unwrap();
        let rep = model.p1_check(&[constant(1.0)]);
        assert!(!rep.passed);
        assert_eq!(rep.pairs[0].increments, vec![4.0, 8.0]);
    }

    #[test]
    fn fix_inner_converges_for_geometric() {
        let model = ShiftModel::new(1, default_windows(), STRICT_TOL).unwrap().with_eval_radius(4);
        let g = geometric(0.5);
        let fix = model.fix_inner(&g, &g, std::slice::from_ref(&g)).unwrap();
        // Σ_t r^{2|ν−t|} = (1+r²)/(1−r²) for every ν
        let expected = (1.0 + 0.25) / (1.0 - 0.25);
        for v in &fix.values {
            assert!((v.re - expected).abs() < 1e-12 && v.im.abs() < 1e-15);
        }
    }

    #[test]
    fn fix_inner_reports_divergence() {
        let model = ShiftModel::new(1, vec![2, 4, 8], STRICT_TOL).unwrap().with_eval_radius(2);
        let c = constant(1.0);
        let err = model.fix_inner(&c, &c, std::slice::from_ref(&c)).unwrap_err();
        assert!(matches!(err, Error::NotStrictlyConvergent { generator: 0, .. }));
    }

    #[test]
    fn rank_two_window() {
        let model = ShiftModel::new(2, vec![2, 4, 8, 16, 32], 1e-6).unwrap().with_eval_radius(2);
        let rep = model.p1_check(&[geometric(0.25)]);
        assert!(rep.passed);
    }

    #[test]
    fn rejects_bad_ladders() {
        assert!(ShiftModel::new(1, vec![4, 2], 1e-9).is_err());
        assert!(ShiftModel::new(0, vec![2], 1e-9).is_err());
        assert!(ShiftModel::new(1, vec![], 1e-9).is_err());
    }
}
