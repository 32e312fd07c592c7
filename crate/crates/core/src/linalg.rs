//! Dense complex linear algebra helpers: spans, nullspaces, spectra and the
//! Wedderburn block structure of finite-dimensional *-algebras of matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default tolerance for rank decisions.
pub const RANK_TOL: f64 = 1e-8;
/// Eigenvalue clustering radius used when splitting central elements.
pub const CLUSTER_RADIUS: f64 = 1e-6;

pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |acc: f64, &s| acc.max(s))
}

/// Maximum absolute entry, a cheap norm for defect reporting.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()) * cplx(0.5, 0.0);
    let mut eig = herm.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        // the QR iteration can break down on singular matrices with zero rows; a
        // shift past the spectral norm avoids that
        let shift = herm.norm() + 1.0;
        let n = herm.nrows();
        eig = (&herm + CMatrix::identity(n, n) * cplx(shift, 0.0)).symmetric_eigen();
        eig.eigenvalues.add_scalar_mut(-shift);
    }
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    hermitian_eigen(m).0[0]
}

/// Stacks the columns of a matrix into one vector.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Orthonormal basis of a growing subspace, built by (repeated) Gram–Schmidt.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    ambient: usize,
    vectors: Vec<CVector>,
    tol: f64,
    floor: f64,
    borderline: bool,
}

impl SpanBasis {
    pub fn new(ambient: usize) -> SpanBasis {
        SpanBasis::with_tol(ambient, RANK_TOL)
    }

    pub fn with_tol(ambient: usize, tol: f64) -> SpanBasis {
        SpanBasis {
            ambient,
            vectors: Vec::new(),
            tol,
            floor: 0.0,
            borderline: false,
        }
    }

    /// Residuals with norm at most `floor` are treated as zero, whatever the input scale.
    pub fn with_floor(mut self, floor: f64) -> SpanBasis {
        self.floor = floor;
        self
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.vectors.len() >= self.ambient
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    /// True if some accepted or rejected residual fell in the ambiguous band
    /// `(tol, 100·tol)` relative to the input norm.
    pub fn borderline(&self) -> bool {
        self.borderline
    }

    fn residual(&self, v: &CVector) -> CVector {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &self.vectors {
                let c = b.dotc(&r);
                r.axpy(-c, b, cplx(1.0, 0.0));
            }
        }
        r
    }

    /// Adds `v` if it is independent of the current span; returns whether it was added.
    pub fn insert(&mut self, v: &CVector) -> bool {
        let scale = v.norm();
        if scale <= self.floor || self.is_full() {
            return false;
        }
        let r = self.residual(v);
        if r.norm() <= self.floor {
            return false;
        }
        let ratio = r.norm() / scale;
        if ratio > self.tol && ratio < 100.0 * self.tol {
            self.borderline = true;
        }
        if ratio <= self.tol {
            return false;
        }
        let n = r.norm();
        self.vectors.push(r / cplx(n, 0.0));
        true
    }

    pub fn contains(&self, v: &CVector) -> bool {
        let scale = v.norm();
        let r = self.residual(v).norm();
        scale <= self.floor || r <= self.floor || r <= self.tol * scale
    }

    pub fn distance(&self, v: &CVector) -> f64 {
        self.residual(v).norm()
    }
}

/// Rank of a family of vectors.
pub fn rank_of(vectors: &[CVector], ambient: usize) -> usize {
    let mut span = SpanBasis::new(ambient);
    for v in vectors {
        span.insert(v);
    }
    span.len()
}

/// Orthonormal basis of the nullspace of `m`, deciding rank with relative
/// tolerance `tol` on the singular values. Singular values inside the band
/// `(tol, 100·tol)·σ_max` are reported as ill-conditioned.
pub fn nullspace(m: &CMatrix, tol: f64) -> Result<Vec<CVector>> {
    let cols = m.ncols();
    if cols == 0 {
        return Ok(Vec::new());
    }
    let rows = m.nrows().max(cols);
    let mut padded = CMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().fold(0.0f64, |a, &s| a.max(s));
    if smax == 0.0 {
        return Ok((0..cols)
            .map(|i| {
                let mut e = CVector::zeros(cols);
                e[i] = cplx(1.0, 0.0);
                e
            })
            .collect());
    }
    let mut out = Vec::new();
    for (i, &s) in sigma.iter().enumerate() {
        let rel = s / smax;
        if rel > tol && rel < 100.0 * tol {
            return Err(Error::IllConditioned(format!(
                "singular value ratio {rel:e} lies between {tol:e} and {:e}",
                100.0 * tol
            )));
        }
        if rel <= tol {
            out.push(v_t.row(i).adjoint());
        }
    }
    Ok(out)
}

/// A *-subalgebra of `M_N` given by a spanning family of matrices.
#[derive(Clone, Debug)]
pub struct MatrixAlgebra {
    size: usize,
    basis: Vec<CMatrix>,
    generators: Vec<CMatrix>,
}

/// Block structure of a finite-dimensional C*-algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wedderburn {
    pub blocks: Vec<usize>,
    pub center_dim: usize,
}

impl MatrixAlgebra {
    /// The span of `spanning`, which the caller asserts is a *-algebra.
    pub fn from_spanning(size: usize, spanning: &[CMatrix]) -> MatrixAlgebra {
        let mut span = SpanBasis::new(size * size).with_floor(noise_floor(spanning));
        let mut basis = Vec::new();
        for m in spanning {
            if span.insert(&vectorize(m)) {
                basis.push(m.clone());
            }
        }
        MatrixAlgebra {
            size,
            generators: basis.clone(),
            basis,
        }
    }

    /// Same span, with a smaller generating set used for the center computation.
    pub fn with_generators(mut self, generators: Vec<CMatrix>) -> MatrixAlgebra {
        self.generators = generators;
        self
    }

    /// The *-algebra generated by `gens` (closure under products and adjoints).
    pub fn generated_by(size: usize, gens: &[CMatrix]) -> MatrixAlgebra {
        let mut span = SpanBasis::new(size * size).with_floor(noise_floor(gens));
        let mut basis: Vec<CMatrix> = Vec::new();
        let mut star_gens = Vec::new();
        for g in gens {
            star_gens.push(g.clone());
            star_gens.push(g.adjoint());
        }
        for g in &star_gens {
            if span.insert(&vectorize(g)) {
                basis.push(g.clone());
            }
        }
        let mut frontier = basis.clone();
        while !frontier.is_empty() && !span.is_full() {
            let mut next = Vec::new();
            for a in &frontier {
                for g in &star_gens {
                    let p = a * g;
                    if span.insert(&vectorize(&p)) {
                        basis.push(p.clone());
                        next.push(p);
                    }
                }
            }
            frontier = next;
        }
        MatrixAlgebra {
            size,
            generators: star_gens,
            basis,
        }
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

    fn span(&self) -> SpanBasis {
        let mut span = SpanBasis::new(self.size * self.size);
        for b in &self.basis {
            span.insert(&vectorize(b));
        }
        span
    }

    pub fn contains(&self, m: &CMatrix) -> bool {
        self.span().contains(&vectorize(m))
    }

    /// Largest residual of `b_i b_j` and `b_i^*` outside the span, relative to their norms.
    pub fn closure_defect(&self) -> f64 {
        let span = self.span();
        let mut worst = 0.0f64;
        for a in &self.basis {
            let adj = vectorize(&a.adjoint());
            worst = worst.max(span.distance(&adj) / adj.norm().max(1e-300));
            for b in &self.basis {
                let p = vectorize(&(a * b));
                let n = p.norm();
                if n > 0.0 {
                    worst = worst.max(span.distance(&p) / n);
                }
            }
        }
        worst
    }

    /// Center as coefficient vectors on the basis, via the nullspace of
    /// `c ↦ ([Σ c_i b_i, g])_g` over the generators.
    pub fn center(&self) -> Result<Vec<CMatrix>> {
        let d = self.dim();
        let n2 = self.size * self.size;
        let mut map = CMatrix::zeros(n2 * self.generators.len().max(1), d);
        for (gi, g) in self.generators.iter().enumerate() {
            for (i, b) in self.basis.iter().enumerate() {
                let c = commutator(b, g);
                map.view_mut((gi * n2, i), (n2, 1)).copy_from(&vectorize(&c));
            }
        }
        let null = nullspace(&map, RANK_TOL)?;
        Ok(null
            .iter()
            .map(|coef| {
                let mut z = CMatrix::zeros(self.size, self.size);
                for (c, b) in coef.iter().zip(&self.basis) {
                    z += b * *c;
                }
                z
            })
            .collect())
    }

    /// Block sizes `d_j` with `Σ d_j² = dim`, from the minimal central projections.
    pub fn wedderburn(&self, seed: u64) -> Result<Wedderburn> {
        let dim = self.dim();
        if dim == 0 {
            return Ok(Wedderburn {
                blocks: Vec::new(),
                center_dim: 0,
            });
        }
        let center = self.center()?;
        let center_dim = center.len();
        if center_dim == 1 {
            let d = exact_sqrt(dim).ok_or_else(|| {
                Error::IllConditioned(format!("one central block but dimension {dim} is not a square"))
            })?;
            return Ok(Wedderburn {
                blocks: vec![d],
                center_dim,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _attempt in 0..4 {
            let mut z = CMatrix::zeros(self.size, self.size);
            for c in &center {
                let herm = (c + c.adjoint()) * cplx(0.5, 0.0);
                let anti = (c - c.adjoint()) * cplx(0.0, -0.5);
                z += herm * cplx(rng.gen_range(-1.0..1.0), 0.0);
                z += anti * cplx(rng.gen_range(-1.0..1.0), 0.0);
            }
            let (vals, vecs) = hermitian_eigen(&z);
            let mut clusters: Vec<(usize, usize)> = Vec::new();
            let mut start = 0;
            for i in 1..=vals.len() {
                if i == vals.len() || vals[i] - vals[i - 1] > CLUSTER_RADIUS {
                    clusters.push((start, i));
                    start = i;
                }
            }
            let mut blocks = Vec::new();
            let mut total = 0;
            let mut ok = true;
            for (a, b) in clusters {
                let v = vecs.columns(a, b - a).into_owned();
                let p = &v * v.adjoint();
                let images: Vec<CVector> = self.basis.iter().map(|m| vectorize(&(m * &p))).collect();
                let r = rank_of(&images, self.size * self.size);
                if r == 0 {
                    continue;
                }
                match exact_sqrt(r) {
                    Some(d) => {
                        blocks.push(d);
                        total += r;
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && total == dim && blocks.len() == center_dim {
                blocks.sort_unstable_by(|a, b| b.cmp(a));
                return Ok(Wedderburn { blocks, center_dim });
            }
        }
        Err(Error::IllConditioned(format!(
            "could not split a {dim}-dimensional algebra with {center_dim}-dimensional center"
        )))
    }
}

/// Norm below which a matrix in the family is numerical noise.
pub fn noise_floor(items: &[CMatrix]) -> f64 {
    1e-10 * items.iter().map(|m| m.norm()).fold(0.0, f64::max)
}

fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}
