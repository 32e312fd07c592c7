//! Brackets, fixed-point integrals and module checks for finite groups.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::group::{GroupDescriptor, GroupElement};
use crate::linalg::{
    max_abs, min_eigenvalue, spectral_norm, CMatrix, CVector, MatrixAlgebra, SpanBasis,
};
use crate::proper::crossed::CrossedElement;
use crate::proper::galgebra::GAlgebra;

/// Tolerance for Gram positivity, relative to the Gram norm.
pub const GRAM_TOL: f64 = 1e-10;

/// `⟨⟨ξ|η⟩⟩(t) = ξ^* α_t(η)`.
pub fn bracket(act: &GAlgebra, xi: &CMatrix, eta: &CMatrix) -> CrossedElement {
    let xs = xi.adjoint();
    CrossedElement {
        values: (0..act.group().len()).map(|t| &xs * act.act(t, eta)).collect(),
    }
}

/// Right action of the crossed product on `A`: `ξ*φ = Σ_t α_t(ξ φ(−t))`.
pub fn right_action(act: &GAlgebra, xi: &CMatrix, phi: &CrossedElement) -> CMatrix {
    let grp = act.group();
    let mut out = act.zero();
    for t in 0..grp.len() {
        let v = &phi.values[grp.neg_index(t)];
        if max_abs(v) > 0.0 {
            out += act.act(t, &(xi * v));
        }
    }
    out
}

/// `Σ_t α_t(ξη^*)`, exact for finite groups.
pub fn fix_inner(act: &GAlgebra, xi: &CMatrix, eta: &CMatrix) -> CMatrix {
    let x = xi * eta.adjoint();
    let mut out = act.zero();
    for t in 0..act.group().len() {
        out += act.act(t, &x);
    }
    out
}

/// Per-pair `Σ_t ‖ξ^*α_t(η)‖` and the window ladder that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct P1Pair {
    pub i: usize,
    pub j: usize,
    pub partial_sums: Vec<f64>,
    pub increments: Vec<f64>,
    pub total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct P1Report {
    pub windows: Vec<i64>,
    pub tol: f64,
    pub pairs: Vec<P1Pair>,
    pub passed: bool,
    pub warnings: Vec<String>,
}

/// Integrability of the brackets; over a finite group every sum is finite.
pub fn p1_check(act: &GAlgebra, r: &[CMatrix]) -> P1Report {
    let mut pairs = Vec::new();
    for (i, xi) in r.iter().enumerate() {
        for (j, eta) in r.iter().enumerate() {
            let total: f64 = bracket(act, xi, eta).values.iter().map(spectral_norm).sum();
            pairs.push(P1Pair {
                i,
                j,
                partial_sums: vec![total],
                increments: Vec::new(),
                total,
            });
        }
    }
    P1Report {
        windows: Vec::new(),
        tol: 0.0,
        pairs,
        passed: true,
        warnings: Vec::new(),
    }
}

fn span_of(act: &GAlgebra, items: Vec<CMatrix>) -> Vec<CMatrix> {
    let coords: Vec<CVector> = items.iter().map(|m| act.coords(m)).collect();
    let floor = 1e-10 * coords.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut span = SpanBasis::new(act.dim()).with_floor(floor);
    let mut out = Vec::new();
    for (m, c) in items.into_iter().zip(&coords) {
        if span.insert(c) {
            out.push(m);
        }
    }
    out
}

/// A basis of `R̃ = span(R * L¹(G,A))`; for `φ = aδ_s` one has `ξ*φ = α_{−s}(ξa)`.
pub fn r_tilde(act: &GAlgebra, r: &[CMatrix]) -> Vec<CMatrix> {
    let grp = act.group();
    let mut items = Vec::new();
    for xi in r {
        for a in act.basis() {
            let x = xi * a;
            for s in 0..grp.len() {
                items.push(act.act(s, &x));
            }
        }
    }
    span_of(act, items)
}

/// A basis of `A₀ = span(R̃ R̃^*)`.
pub fn build_a0(act: &GAlgebra, r: &[CMatrix]) -> Vec<CMatrix> {
    let rt = r_tilde(act, r);
    let mut items = Vec::new();
    for x in &rt {
        for y in &rt {
            items.push(x * y.adjoint());
        }
    }
    span_of(act, items)
}

/// Largest distance of `x^*` and `α_g(x)` from `span(items)` over the spanning set.
pub fn star_and_invariance_defect(act: &GAlgebra, items: &[CMatrix]) -> f64 {
    let mut span = SpanBasis::new(act.dim());
    for m in items {
        span.insert(&act.coords(m));
    }
    let mut worst = 0.0f64;
    for m in items {
        let scale = act.coords(m).norm().max(1e-300);
        worst = worst.max(span.distance(&act.coords(&m.adjoint())) / scale);
        for g in 0..act.group().len() {
            worst = worst.max(span.distance(&act.coords(&act.act(g, m))) / scale);
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub size: usize,
    pub min_eigenvalue: f64,
    pub norm: f64,
    pub positive: bool,
}

/// The block matrix `[π(⟨⟨ξ_i|ξ_j⟩⟩)]` in a faithful representation of the crossed product.
pub fn gram_matrix(act: &GAlgebra, r: &[CMatrix]) -> CMatrix {
    let k = r.len();
    if k == 0 {
        return CMatrix::zeros(0, 0);
    }
    let small = act.unitary_rep_is_faithful();
    let image = |f: &CrossedElement| {
        if small {
            act.unitary_image(f).expect("unitaries present")
        } else {
            act.regular_image(f)
        }
    };
    let block = if small { act.size() } else { act.size() * act.group().len() };
    let mut gram = CMatrix::zeros(k * block, k * block);
    for i in 0..k {
        for j in 0..k {
            let m = image(&bracket(act, &r[i], &r[j]));
            gram.view_mut((i * block, j * block), (block, block)).copy_from(&m);
        }
    }
    gram
}

pub fn gram_positivity(act: &GAlgebra, r: &[CMatrix]) -> GramReport {
    let gram = gram_matrix(act, r);
    if gram.is_empty() {
        return GramReport {
            size: 0,
            min_eigenvalue: 0.0,
            norm: 0.0,
            positive: true,
        };
    }
    let min = min_eigenvalue(&gram);
    let norm = spectral_norm(&gram);
    GramReport {
        size: gram.nrows(),
        min_eigenvalue: min,
        norm,
        positive: min >= -GRAM_TOL * norm.max(1.0),
    }
}

fn bracket_seeds(act: &GAlgebra, r: &[CMatrix]) -> Vec<CrossedElement> {
    let mut seeds = Vec::new();
    for xi in r {
        for eta in r {
            seeds.push(bracket(act, xi, eta));
        }
    }
    seeds
}

#[derive(Clone, Debug, Serialize)]
pub struct Saturation {
    pub saturated: bool,
    pub ideal_dim: usize,
    pub crossed_dim: usize,
}

/// The ideal of `A ⋊ G` generated by all brackets of `R`.
pub fn saturation_check(act: &GAlgebra, r: &[CMatrix]) -> Saturation {
    let (ideal_dim, _) = act.ideal_generated(&bracket_seeds(act, r));
    Saturation {
        saturated: ideal_dim == act.crossed_dim(),
        ideal_dim,
        crossed_dim: act.crossed_dim(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointAlgebra {
    pub dim: usize,
    pub blocks: Vec<usize>,
    pub center_dim: usize,
    /// Largest relative distance of a spanning element from the classical fixed subspace.
    pub fixed_defect: f64,
    /// Largest relative distance of `fix(ξ,η)^* − fix(η,ξ)`.
    pub hermitian_defect: f64,
    #[serde(skip)]
    pub spanning: Vec<CMatrix>,
}

/// The span of `Σ_t α_t(ξη^*)` over `ξ, η ∈ R̃`, verified to be a *-algebra of fixed elements.
pub fn fixed_point_algebra(act: &GAlgebra, r: &[CMatrix]) -> Result<FixedPointAlgebra> {
    let rt = r_tilde(act, r);
    let mut items = Vec::new();
    let mut fixed_defect = 0.0f64;
    let mut hermitian_defect = 0.0f64;
    for (i, x) in rt.iter().enumerate() {
        for (j, y) in rt.iter().enumerate() {
            let f = fix_inner(act, x, y);
            fixed_defect = fixed_defect.max(act.fixed_defect(&f));
            if j < i {
                let g = fix_inner(act, y, x);
                let scale = max_abs(&f).max(1.0);
                hermitian_defect = hermitian_defect.max(max_abs(&(f.adjoint() - g)) / scale);
            }
            items.push(f);
        }
    }
    let spanning = span_of(act, items);
    let alg = MatrixAlgebra::from_spanning(act.size(), &spanning);
    let closure = alg.closure_defect();
    if closure > 1e-8 {
        return Err(Error::Inconsistency(format!(
            "span of fixed-point integrals is not a *-algebra (defect {closure:e})"
        )));
    }
    let w = alg.wedderburn(0xf1f0)?;
    Ok(FixedPointAlgebra {
        dim: spanning.len(),
        blocks: w.blocks,
        center_dim: w.center_dim,
        fixed_defect,
        hermitian_defect,
        spanning,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ModuleEquivalence {
    /// Ideal dimensions generated by the brackets of `R`, `R̃` and `A₀`.
    pub ideal_dims: [usize; 3],
    pub r_tilde_dim: usize,
    pub a0_dim: usize,
    pub formula_defect: f64,
    pub equal: bool,
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_combination(rng: &mut ChaCha8Rng, items: &[CMatrix], zero: &CMatrix) -> CMatrix {
    items
        .iter()
        .fold(zero.clone(), |acc, m| acc + m * random_complex(rng))
}

fn random_crossed(rng: &mut ChaCha8Rng, act: &GAlgebra) -> CrossedElement {
    let v = CVector::from_fn(act.crossed_dim(), |_, _| random_complex(rng));
    act.crossed_from_coords(&v)
}

/// Compares the ideals spanned by brackets of `R`, `R̃` and `A₀`, and checks
/// `⟨⟨ξ*f|η*g⟩⟩ = f^*⟨⟨ξ|η⟩⟩g` and `⟨⟨ξa|ηb⟩⟩ = i(a)^*⟨⟨ξ|η⟩⟩i(b)` on random data.
pub fn module_equivalence_check(act: &GAlgebra, r: &[CMatrix], seed: u64) -> ModuleEquivalence {
    let rt = r_tilde(act, r);
    let a0 = build_a0(act, r);
    let dims = [
        act.ideal_generated(&bracket_seeds(act, r)).0,
        act.ideal_generated(&bracket_seeds(act, &rt)).0,
        act.ideal_generated(&bracket_seeds(act, &a0)).0,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut defect = 0.0f64;
    if !r.is_empty() {
        for _ in 0..4 {
            let xi = random_combination(&mut rng, r, &act.zero());
            let eta = random_combination(&mut rng, r, &act.zero());
            let f = random_crossed(&mut rng, act);
            let g = random_crossed(&mut rng, act);
            let base = bracket(act, &xi, &eta);
            let lhs = bracket(act, &right_action(act, &xi, &f), &right_action(act, &eta, &g));
            let rhs = act.crossed_mul(&act.crossed_mul(&act.crossed_star(&f), &base), &g);
            defect = defect.max(lhs.sub(&rhs).max_abs() / rhs.max_abs().max(1.0));
            let a = random_combination(&mut rng, act.basis(), &act.zero());
            let b = random_combination(&mut rng, act.basis(), &act.zero());
            let lhs = bracket(act, &(&xi * &a), &(&eta * &b));
            let rhs = act.crossed_right_algebra(&act.crossed_left_algebra(&a.adjoint(), &base), &b);
            defect = defect.max(lhs.sub(&rhs).max_abs() / rhs.max_abs().max(1.0));
        }
    }
    ModuleEquivalence {
        ideal_dims: dims,
        r_tilde_dim: rt.len(),
        a0_dim: a0.len(),
        formula_defect: defect,
        equal: dims[0] == dims[1] && dims[1] == dims[2],
    }
}

/// `max ‖fix(ξ,η)ζ − ξ*⟨⟨η|ζ⟩⟩‖` over generator triples.
pub fn imprimitivity_check(act: &GAlgebra, r: &[CMatrix]) -> f64 {
    let k = r.len();
    let fixes: Vec<Vec<CMatrix>> = (0..k)
        .map(|i| (0..k).map(|j| fix_inner(act, &r[i], &r[j])).collect())
        .collect();
    let brackets: Vec<Vec<CrossedElement>> = (0..k)
        .map(|j| (0..k).map(|l| bracket(act, &r[j], &r[l])).collect())
        .collect();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                let lhs = &fixes[i][j] * &r[l];
                let rhs = right_action(act, &r[i], &brackets[j][l]);
                worst = worst.max(max_abs(&(lhs - rhs)));
            }
        }
    }
    worst
}

/// Checks that `Φ` (images of `A`'s basis in `B`) is an equivariant, nondegenerate
/// *-homomorphism and returns a basis of `span Φ(R_A)B`.
pub fn induce_via_morphism(
    a: &GAlgebra,
    b: &GAlgebra,
    phi: &[CMatrix],
    r_a: &[CMatrix],
) -> Result<Vec<CMatrix>> {
    if a.group() != b.group() {
        return invalid(format!("actions of {} and {}", a.group(), b.group()));
    }
    if phi.len() != a.dim() || phi.iter().any(|m| m.shape() != (b.size(), b.size())) {
        return invalid("morphism must give one B-matrix per basis element of A");
    }
    let apply = |x: &CMatrix| -> CMatrix {
        a.coords(x)
            .iter()
            .zip(phi)
            .fold(b.zero(), |acc, (c, m)| acc + m * *c)
    };
    let rel = |x: &CMatrix, y: &CMatrix| max_abs(&(x - y)) / max_abs(x).max(max_abs(y)).max(1.0);
    for (i, ai) in a.basis().iter().enumerate() {
        if b.residual(&phi[i]) > 1e-10 {
            return invalid("morphism leaves B");
        }
        if rel(&apply(&ai.adjoint()), &phi[i].adjoint()) > 1e-10 {
            return invalid("morphism does not preserve the involution");
        }
        for (j, aj) in a.basis().iter().enumerate() {
            if rel(&apply(&(ai * aj)), &(&phi[i] * &phi[j])) > 1e-10 {
                return invalid("morphism is not multiplicative");
            }
        }
        for gen in a.group().generators() {
            let g = a.group().index_of(&gen).unwrap();
            if rel(&apply(&a.act(g, ai)), &b.act(g, &phi[i])) > 1e-10 {
                return invalid(format!("morphism is not equivariant for {gen}"));
            }
        }
    }
    let mut whole = SpanBasis::new(b.dim());
    for m in phi {
        for y in b.basis() {
            whole.insert(&b.coords(&(m * y)));
        }
    }
    if whole.len() < b.dim() {
        return invalid(format!(
            "morphism is degenerate: Φ(A)B has dimension {} < {}",
            whole.len(),
            b.dim()
        ));
    }
    let mut items = Vec::new();
    for x in r_a {
        let px = apply(x);
        for y in b.basis() {
            items.push(&px * y);
        }
    }
    Ok(span_of(b, items))
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// The product action `α ⊗ β` of `G × H` on `A ⊗ B`.
pub fn tensor_action(a: &GAlgebra, b: &GAlgebra) -> Result<GAlgebra> {
    let group = a.group().product(b.group())?;
    let mut basis = Vec::with_capacity(a.dim() * b.dim());
    for x in a.basis() {
        for y in b.basis() {
            basis.push(kron(x, y));
        }
    }
    let size = a.size() * b.size();
    let mut gens = Vec::new();
    for x in a.generators() {
        gens.push(kron(x, b.unit()));
    }
    for y in b.generators() {
        gens.push(kron(a.unit(), y));
    }
    let (na, nb) = (a.group().len(), b.group().len());
    let alg = match (a.unitaries(), b.unitaries()) {
        (Some(ua), Some(ub)) => {
            let us = (0..na * nb).map(|gh| kron(&ua[gh / nb], &ub[gh % nb])).collect();
            GAlgebra::from_unitaries(&group, size, basis, us)?
        }
        _ => {
            let action = (0..na * nb)
                .map(|gh| kron(a.action_matrix(gh / nb), b.action_matrix(gh % nb)))
                .collect();
            GAlgebra::new(&group, size, basis, action)?
        }
    };
    Ok(alg.with_generators(gens))
}

/// Elementary tensors `ξ ⊗ η` for `ξ ∈ R_A`, `η ∈ R_B`.
pub fn tensor_generators(ra: &[CMatrix], rb: &[CMatrix]) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for x in ra {
        for y in rb {
            out.push(kron(x, y));
        }
    }
    out
}

/// The inflated action `α_g = α̃_{q(g)}` along the surjection `q: G → Q`
/// sending the `j`-th generator of `G` to `images[j]`.
pub fn inflate_action(act: &GAlgebra, big: &GroupDescriptor, images: &[GroupElement]) -> Result<GAlgebra> {
    let q = act.group();
    let orders = big.finite_orders()?;
    if images.len() != orders.len() {
        return invalid("need one image per generator of the big group");
    }
    let mut map = Vec::with_capacity(big.len());
    for g in big.elements() {
        let mut coords = vec![0i64; q.rank()];
        for (gj, img) in g.0.iter().zip(images) {
            if !q.contains(img) {
                return invalid(format!("{img} is not an element of {q}"));
            }
            for (c, x) in coords.iter_mut().zip(&img.0) {
                *c += gj * x;
            }
        }
        map.push(q.index_of(&q.reduce(&coords)).unwrap());
    }
    for (j, &n) in orders.iter().enumerate() {
        let mut h = q.identity();
        for _ in 0..n {
            h = q.add(&h, &images[j]);
        }
        if h != q.identity() {
            return invalid(format!("generator {j} of {big} has order {n} but its image does not"));
        }
    }
    let mut hit = vec![false; q.len()];
    for &m in &map {
        hit[m] = true;
    }
    if hit.iter().any(|h| !h) {
        return invalid("quotient map is not surjective");
    }
    let alg = match act.unitaries() {
        Some(us) => GAlgebra::from_unitaries(
            big,
            act.size(),
            act.basis().to_vec(),
            map.iter().map(|&m| us[m].clone()).collect(),
        )?,
        None => GAlgebra::new(
            big,
            act.size(),
            act.basis().to_vec(),
            map.iter().map(|&m| act.action_matrix(m).clone()).collect(),
        )?,
    };
    Ok(alg.with_generators(act.generators().to_vec()))
}

/// Checks the covariance of the regular pair on all basis elements and group elements.
pub fn covariance_defect(act: &GAlgebra) -> f64 {
    let grp = act.group();
    let n = grp.len();
    let mut worst = 0.0f64;
    for a in act.basis() {
        let pa = act.regular_image(&CrossedElement::point(act, a, 0));
        for s in 0..n {
            let lam = act.regular_image(&CrossedElement::point(act, act.unit(), s));
            let lhs = &lam * &pa * lam.adjoint();
            let rhs = act.regular_image(&CrossedElement::point(act, &act.act(s, a), 0));
            worst = worst.max(max_abs(&(lhs - rhs)));
        }
    }
    worst
}
