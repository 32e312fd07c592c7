//! Sequence modules over `Z^k` and their Fourier picture on `T^k`.
//!
//! Sequences live on the window `{−R, …, R−1}^k` and are paired with samples on the
//! `M^k` grid `θ_j = j/M`, `M = 2R`, through `ξ̂(θ) = Σ_ν ξ(ν) e^{2πi⟨ν,θ⟩}`, which is an
//! exact bijection. The right regular representation is `(ρ_t ξ)(ν) = ξ(ν+t)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::deformation::transform_axes;
use crate::error::{invalid, Error, Result};
use crate::linalg::{min_eigenvalue, rank_of, spectral_norm, CMatrix, CVector};

/// Formula for one component of a generator on `Z^k`.
pub type LatticeFn = Arc<dyn Fn(&[i64]) -> Complex64 + Send + Sync>;

/// Tolerance for the operator identities of the sequence module.
pub const MODULE_TOL: f64 = 1e-10;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Points of `{lo, …, lo+side−1}^k`, last coordinate fastest.
fn box_point(mut index: usize, rank: usize, side: usize, lo: i64) -> Vec<i64> {
    let mut p = vec![0; rank];
    for j in (0..rank).rev() {
        p[j] = (index % side) as i64 + lo;
        index /= side;
    }
    p
}

fn box_index(p: &[i64], side: usize, lo: i64) -> Option<usize> {
    let mut idx = 0usize;
    for &c in p {
        let off = c - lo;
        if off < 0 || off >= side as i64 {
            return None;
        }
        idx = idx * side + off as usize;
    }
    Some(idx)
}

/// `n` complex sequences on the window `{−R, …, R−1}^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceVector {
    rank: usize,
    radius: i64,
    components: Vec<Vec<Complex64>>,
}

/// A finitely supported function on `Z^k`, stored on `{−r, …, r}^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    rank: usize,
    radius: i64,
    values: Vec<Complex64>,
}

impl SequenceVector {
    pub fn new(rank: usize, radius: i64, components: Vec<Vec<Complex64>>) -> Result<SequenceVector> {
        if rank == 0 || radius < 1 {
            return invalid("rank and window radius must be positive");
        }
        if components.is_empty() {
            return invalid("a sequence vector needs at least one component");
        }
        let len = ((2 * radius) as usize).pow(rank as u32);
        if components.iter().any(|c| c.len() != len) {
            return invalid(format!("each component needs {len} entries"));
        }
        Ok(SequenceVector {
            rank,
            radius,
            components,
        })
    }

    pub fn zeros(rank: usize, radius: i64, n: usize) -> Result<SequenceVector> {
        let len = ((2 * radius.max(0)) as usize).pow(rank as u32);
        SequenceVector::new(rank, radius, vec![vec![zero(); len]; n])
    }

    pub fn from_fns(rank: usize, radius: i64, fns: &[LatticeFn]) -> Result<SequenceVector> {
        let side = (2 * radius.max(0)) as usize;
        let len = side.pow(rank as u32);
        let components = fns
            .iter()
            .map(|f| (0..len).map(|i| f(&box_point(i, rank, side, -radius))).collect())
            .collect();
        SequenceVector::new(rank, radius, components)
    }

    /// `δ_p` in component `i` of an `n`-component vector.
    pub fn delta(rank: usize, radius: i64, n: usize, i: usize, p: &[i64]) -> Result<SequenceVector> {
        let mut v = SequenceVector::zeros(rank, radius, n)?;
        let idx = v
            .index_of(p)
            .ok_or_else(|| Error::InvalidArgument("point outside the window".into()))?;
        if i >= n {
            return invalid("component index out of range");
        }
        v.components[i][idx] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn random(rank: usize, radius: i64, n: usize, support: i64, seed: u64) -> Result<SequenceVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = SequenceVector::zeros(rank, radius, n)?;
        let side = v.side();
        for comp in v.components.iter_mut() {
            for (i, x) in comp.iter_mut().enumerate() {
                let p = box_point(i, rank, side, -radius);
                if p.iter().all(|c| c.abs() <= support) {
                    *x = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
        }
        Ok(v)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    fn side(&self) -> usize {
        (2 * self.radius) as usize
    }

    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        box_index(p, self.side(), -self.radius)
    }

    pub fn point(&self, index: usize) -> Vec<i64> {
        box_point(index, self.rank, self.side(), -self.radius)
    }

    pub fn get(&self, i: usize, p: &[i64]) -> Complex64 {
        self.index_of(p).map_or(zero(), |idx| self.components[i][idx])
    }

    /// Largest sup-norm of a point carrying a nonzero entry.
    pub fn support_radius(&self) -> i64 {
        let mut r = 0;
        for comp in &self.components {
            for (i, v) in comp.iter().enumerate() {
                if v.norm() != 0.0 {
                    r = r.max(self.point(i).iter().map(|c| c.abs()).max().unwrap_or(0));
                }
            }
        }
        r
    }

    pub fn inner(&self, other: &SequenceVector) -> Complex64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>())
            .sum()
    }

    /// `(ρ_t ξ)(ν) = ξ(ν+t)`, dropping entries that leave the window.
    pub fn shift(&self, t: &[i64]) -> SequenceVector {
        let mut out = self.clone();
        for (c, comp) in out.components.iter_mut().enumerate() {
            for (i, v) in comp.iter_mut().enumerate() {
                let p: Vec<i64> = self.point(i).iter().zip(t).map(|(a, b)| a + b).collect();
                *v = self.get(c, &p);
            }
        }
        out
    }

    /// Samples `ξ̂_i(θ_j) = Σ_ν ξ_i(ν) e^{2πi⟨ν,θ_j⟩}` on the `M^k` grid, `M = 2R`.
    pub fn to_torus(&self) -> Vec<Vec<Complex64>> {
        let m = self.side();
        self.components
            .iter()
            .map(|comp| {
                let mut buf = vec![zero(); comp.len()];
                for (i, v) in comp.iter().enumerate() {
                    buf[wrap_index(&self.point(i), m)] = *v;
                }
                transform_axes(&mut buf, self.rank, m, true);
                buf
            })
            .collect()
    }

    /// Inverse of [`SequenceVector::to_torus`].
    pub fn from_torus(rank: usize, grid: usize, samples: &[Vec<Complex64>]) -> Result<SequenceVector> {
        if grid < 2 || !grid.is_multiple_of(2) {
            return invalid("torus grid size must be even");
        }
        let radius = (grid / 2) as i64;
        let total = grid.pow(rank as u32);
        let scale = 1.0 / total as f64;
        let mut components = Vec::with_capacity(samples.len());
        for s in samples {
            if s.len() != total {
                return invalid(format!("expected {total} torus samples"));
            }
            let mut buf = s.clone();
            transform_axes(&mut buf, rank, grid, false);
            let comp = (0..total)
                .map(|i| buf[wrap_index(&box_point(i, rank, grid, -radius), grid)] * scale)
                .collect();
            components.push(comp);
        }
        SequenceVector::new(rank, radius, components)
    }
}

fn wrap_index(p: &[i64], m: usize) -> usize {
    p.iter().fold(0usize, |acc, &c| acc * m + c.rem_euclid(m as i64) as usize)
}

impl Symbol {
    pub fn new(rank: usize, radius: i64, values: Vec<Complex64>) -> Result<Symbol> {
        let len = ((2 * radius + 1) as usize).pow(rank as u32);
        if radius < 0 || values.len() != len {
            return invalid(format!("a symbol of radius {radius} needs {len} values"));
        }
        Ok(Symbol { rank, radius, values })
    }

    pub fn from_fn(rank: usize, radius: i64, f: impl Fn(&[i64]) -> Complex64) -> Symbol {
        let side = (2 * radius + 1) as usize;
        let values = (0..side.pow(rank as u32))
            .map(|i| f(&box_point(i, rank, side, -radius)))
            .collect();
        Symbol { rank, radius, values }
    }

    pub fn delta(rank: usize, p: &[i64]) -> Symbol {
        let radius = p.iter().map(|c| c.abs()).max().unwrap_or(0);
        Symbol::from_fn(rank, radius, |q| {
            if q == p {
                Complex64::new(1.0, 0.0)
            } else {
                zero()
            }
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, p: &[i64]) -> Complex64 {
        box_index(p, (2 * self.radius + 1) as usize, -self.radius).map_or(zero(), |i| self.values[i])
    }

    pub fn point(&self, index: usize) -> Vec<i64> {
        box_point(index, self.rank, (2 * self.radius + 1) as usize, -self.radius)
    }

    /// `t ↦ φ(−t)^*`, the symbol of the adjoint Laurent operator.
    pub fn adjoint(&self) -> Symbol {
        Symbol::from_fn(self.rank, self.radius, |p| {
            let q: Vec<i64> = p.iter().map(|c| -c).collect();
            self.get(&q).conj()
        })
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    /// Values of `z ↦ Σ_m φ(m) z^m` on the `M^k` grid.
    pub fn on_torus(&self, grid: usize) -> Vec<Complex64> {
        let mut buf = vec![zero(); grid.pow(self.rank as u32)];
        for (i, v) in self.values.iter().enumerate() {
            buf[wrap_index(&self.point(i), grid)] += v;
        }
        transform_axes(&mut buf, self.rank, grid, true);
        buf
    }

    pub fn max_distance(&self, other: &Symbol) -> f64 {
        let r = self.radius.max(other.radius);
        let side = (2 * r + 1) as usize;
        (0..side.pow(self.rank as u32))
            .map(|i| {
                let p = box_point(i, self.rank, side, -r);
                (self.get(&p) - other.get(&p)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// `(λ_φ)_{t,s} = φ(t−s)` on the window `{−R, …, R−1}^k`.
pub fn laurent_operator(phi: &Symbol, window: i64) -> CMatrix {
    let side = (2 * window) as usize;
    let size = side.pow(phi.rank as u32);
    CMatrix::from_fn(size, size, |t, s| {
        let pt = box_point(t, phi.rank, side, -window);
        let ps = box_point(s, phi.rank, side, -window);
        let d: Vec<i64> = pt.iter().zip(&ps).map(|(a, b)| a - b).collect();
        phi.get(&d)
    })
}

/// `m ↦ Σ_i Σ_ν conj(ξ_i(ν)) η_i(ν+m)`, by direct summation.
pub fn bracket_symbol(xi: &SequenceVector, eta: &SequenceVector) -> Result<Symbol> {
    if xi.rank != eta.rank || xi.components.len() != eta.components.len() {
        return invalid("sequence vectors have different shapes");
    }
    let radius = xi.radius + eta.radius - 1;
    let mut sym = Symbol::from_fn(xi.rank, radius, |_| zero());
    let side = (2 * radius + 1) as usize;
    for (a, b) in xi.components.iter().zip(&eta.components) {
        for (i, x) in a.iter().enumerate() {
            if x.norm() == 0.0 {
                continue;
            }
            let nu = xi.point(i);
            for (j, y) in b.iter().enumerate() {
                if y.norm() == 0.0 {
                    continue;
                }
                let m: Vec<i64> = eta.point(j).iter().zip(&nu).map(|(p, q)| p - q).collect();
                let idx = box_index(&m, side, -radius).unwrap();
                sym.values[idx] += x.conj() * y;
            }
        }
    }
    Ok(sym)
}

/// `max_j |Σ_m φ(m) z_j^m − Σ_i conj(ξ̂_i(z_j)) η̂_i(z_j)|` on the grid of `ξ`.
pub fn bracket_fourier_defect(xi: &SequenceVector, eta: &SequenceVector) -> Result<f64> {
    if xi.radius != eta.radius {
        return invalid("sequence vectors live on different windows");
    }
    let sym = bracket_symbol(xi, eta)?;
    let grid = xi.side();
    let lhs = sym.on_torus(grid);
    let (fx, fe) = (xi.to_torus(), eta.to_torus());
    let mut defect = 0.0f64;
    for (j, l) in lhs.iter().enumerate() {
        let r: Complex64 = fx.iter().zip(&fe).map(|(a, b)| a[j].conj() * b[j]).sum();
        defect = defect.max((l - r).norm());
    }
    Ok(defect)
}

/// `|ξ⟩⟩ f = Σ_{t∈W} ρ_{−t}(ξ) f(t)` from `ℓ²(W)` into `ℓ²` of the codomain window, `n` blocks.
#[derive(Clone, Debug)]
pub struct KetOperator {
    pub matrix: CMatrix,
    pub window: i64,
    pub codomain: i64,
    /// Largest fraction of `‖ξ‖` lost to the codomain window over all columns.
    pub truncation: f64,
    pub warning: Option<String>,
}

pub fn ket_operator(xi: &SequenceVector, window: i64, codomain: i64) -> Result<KetOperator> {
    if window < 1 || codomain < 1 {
        return invalid("windows must be positive");
    }
    let k = xi.rank;
    let dside = (2 * window) as usize;
    let cside = (2 * codomain) as usize;
    let dsize = dside.pow(k as u32);
    let csize = cside.pow(k as u32);
    let n = xi.components.len();
    let norm = xi.inner(xi).re.sqrt();
    let mut matrix = CMatrix::zeros(n * csize, dsize);
    let mut truncation = 0.0f64;
    for col in 0..dsize {
        let t = box_point(col, k, dside, -window);
        let mut lost = 0.0;
        for (c, comp) in xi.components.iter().enumerate() {
            for (i, v) in comp.iter().enumerate() {
                if v.norm() == 0.0 {
                    continue;
                }
                // (ρ_{−t} ξ)(ν) = ξ(ν − t), so ξ(μ) lands at ν = μ + t
                let nu: Vec<i64> = xi.point(i).iter().zip(&t).map(|(a, b)| a + b).collect();
                match box_index(&nu, cside, -codomain) {
                    Some(row) => matrix[(c * csize + row, col)] = *v,
                    None => lost += v.norm_sqr(),
                }
            }
        }
        if norm > 0.0 {
            truncation = truncation.max(lost.sqrt() / norm);
        }
    }
    let warning = (truncation > 0.0).then(|| {
        format!("codomain window {codomain} truncates translates: relative defect {truncation:.3e}")
    });
    Ok(KetOperator {
        matrix,
        window,
        codomain,
        truncation,
        warning,
    })
}

fn covering_codomain(xi: &SequenceVector, eta: &SequenceVector, window: i64) -> i64 {
    window + xi.support_radius().max(eta.support_radius()) + 1
}

/// `max |⟨⟨ξ| ∘ |η⟩⟩ − λ_{⟨⟨ξ|η⟩⟩}|` on the window `W`.
pub fn bra_ket_defect(xi: &SequenceVector, eta: &SequenceVector, window: i64) -> Result<f64> {
    let codomain = covering_codomain(xi, eta, window);
    let kx = ket_operator(xi, window, codomain)?;
    let ke = ket_operator(eta, window, codomain)?;
    let lhs = kx.matrix.adjoint() * ke.matrix;
    let rhs = laurent_operator(&bracket_symbol(xi, eta)?, window);
    Ok((lhs - rhs).iter().fold(0.0, |a, z| a.max(z.norm())))
}

/// `max |ket(ξ)·ket(η)^* − Σ_{t∈W} ρ_{−t}|ξ⟩⟨η|ρ_{−t}^*|` on the codomain window.
pub fn ket_bra_defect(xi: &SequenceVector, eta: &SequenceVector, window: i64) -> Result<f64> {
    let codomain = covering_codomain(xi, eta, window);
    let kx = ket_operator(xi, window, codomain)?;
    let ke = ket_operator(eta, window, codomain)?;
    let lhs = &kx.matrix * ke.matrix.adjoint();
    let mut rhs = CMatrix::zeros(lhs.nrows(), lhs.ncols());
    // the columns of each ket are the translates ρ_{−t}ξ
    for t in 0..kx.matrix.ncols() {
        let a = kx.matrix.column(t);
        let b = ke.matrix.column(t);
        rhs += a * b.adjoint();
    }
    Ok((lhs - rhs).iter().fold(0.0, |a, z| a.max(z.norm())))
}

/// Block Laurent matrix `[λ_{⟨⟨ξ_a|ξ_b⟩⟩}]_{a,b}` on the window.
pub fn bracket_gram(generators: &[SequenceVector], window: i64) -> Result<CMatrix> {
    let blocks: Vec<Vec<CMatrix>> = generators
        .iter()
        .map(|a| {
            generators
                .iter()
                .map(|b| Ok(laurent_operator(&bracket_symbol(a, b)?, window)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let g = generators.len();
    let size = blocks.first().map_or(0, |r| r.first().map_or(0, |m| m.nrows()));
    let mut out = CMatrix::zeros(g * size, g * size);
    for (a, row) in blocks.iter().enumerate() {
        for (b, m) in row.iter().enumerate() {
            out.view_mut((a * size, b * size), (size, size)).copy_from(m);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct GramPositivity {
    pub min_eigenvalue: f64,
    pub norm: f64,
    pub positive: bool,
}

pub fn bracket_gram_positivity(generators: &[SequenceVector], window: i64) -> Result<GramPositivity> {
    let g = bracket_gram(generators, window)?;
    let min = min_eigenvalue(&g);
    let norm = spectral_norm(&g);
    Ok(GramPositivity {
        min_eigenvalue: min,
        norm,
        positive: min >= -1e-10 * norm.max(1.0),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RelL1Pair {
    pub i: usize,
    pub j: usize,
    /// `‖⟨⟨ξ_i|ξ_j⟩⟩‖_{ℓ¹}` per window.
    pub norms: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelL1Report {
    pub windows: Vec<i64>,
    pub pairs: Vec<RelL1Pair>,
    /// Largest ratio between the last and first norm over all pairs.
    pub growth: f64,
}

/// `ℓ¹` norms of the brackets of formula generators truncated to each window.
pub fn rel_l1_report(rank: usize, generators: &[Vec<LatticeFn>], windows: &[i64]) -> Result<RelL1Report> {
    if windows.is_empty() || windows.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("windows must be increasing");
    }
    let sampled: Vec<Vec<SequenceVector>> = windows
        .iter()
        .map(|&w| {
            generators
                .iter()
                .map(|g| SequenceVector::from_fns(rank, w, g))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    let mut growth = 0.0f64;
    for i in 0..generators.len() {
        for j in 0..generators.len() {
            let norms = sampled
                .iter()
                .map(|gens| Ok(bracket_symbol(&gens[i], &gens[j])?.l1_norm()))
                .collect::<Result<Vec<f64>>>()?;
            let first = norms[0];
            let last = *norms.last().unwrap();
            if first > 0.0 {
                growth = growth.max(last / first);
            }
            pairs.push(RelL1Pair { i, j, norms });
        }
    }
    Ok(RelL1Report {
        windows: windows.to_vec(),
        pairs,
        growth,
    })
}

/// Fourier coefficients `∫_a^b e^{−2πimθ} dθ` of the indicator of an arc of `T`.
pub fn arc_indicator(a: f64, b: f64) -> LatticeFn {
    Arc::new(move |m: &[i64]| {
        if m[0] == 0 {
            return Complex64::new(b - a, 0.0);
        }
        let w = 2.0 * PI * m[0] as f64;
        (Complex64::from_polar(1.0, -w * a) - Complex64::from_polar(1.0, -w * b)) / Complex64::new(0.0, w)
    })
}

/// Fourier coefficients of a smooth bump on `T`, from a fine grid of `fine` samples.
pub fn bump_coefficients(center: f64, radius: f64, fine: usize) -> LatticeFn {
    let samples: Vec<Complex64> = (0..fine)
        .map(|j| Complex64::new(bump(torus_distance(&[j as f64 / fine as f64], &[center]), radius), 0.0))
        .collect();
    let mut buf = samples;
    transform_axes(&mut buf, 1, fine, false);
    let scale = 1.0 / fine as f64;
    Arc::new(move |m: &[i64]| {
        if m[0].unsigned_abs() as usize >= fine / 2 {
            return zero();
        }
        buf[m[0].rem_euclid(fine as i64) as usize] * scale
    })
}

/// `exp(−d²/(2s²))·(1 − (d/r)²)^6` for `d < r` with `s = r/2`, else 0.
pub fn bump(d: f64, r: f64) -> f64 {
    if d >= r {
        return 0.0;
    }
    let s = r / 2.0;
    let q = 1.0 - (d / r) * (d / r);
    (-d * d / (2.0 * s * s)).exp() * q.powi(6)
}

/// Euclidean distance on `R^k / Z^k`.
pub fn torus_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).rem_euclid(1.0);
            let d = d.min(1.0 - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Open subsets of `T^k` realized on the grid.
#[derive(Clone, Debug, PartialEq)]
pub enum Mask {
    Full,
    /// The torus minus the closed disk of radius `r` about `(1/2, …, 1/2)`.
    Disk(f64),
    /// `{a < θ_1 < b}`.
    Strip(f64, f64),
    /// Explicit grid membership, row-major.
    Bitmap(Vec<bool>),
}

impl Mask {
    /// Parses `full`, `disk:r` or `strip:a,b`.
    pub fn parse(spec: &str) -> Result<Mask> {
        let bad = || Error::InvalidArgument(format!("cannot parse mask '{spec}'"));
        if spec == "full" {
            return Ok(Mask::Full);
        }
        if let Some(r) = spec.strip_prefix("disk:") {
            return Ok(Mask::Disk(r.trim().parse().map_err(|_| bad())?));
        }
        if let Some(rest) = spec.strip_prefix("strip:") {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            return Ok(Mask::Strip(
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ));
        }
        Err(bad())
    }

    /// Bitmap text: one row per line of `0`/`1` (or `.`/`#`), `k = 2`.
    pub fn parse_bitmap(text: &str) -> Result<(Mask, usize)> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let m = rows.len();
        let mut bits = Vec::with_capacity(m * m);
        for row in &rows {
            if row.chars().count() != m {
                return invalid("bitmap must be square");
            }
            for c in row.chars() {
                bits.push(match c {
                    '1' | '#' => true,
                    '0' | '.' => false,
                    _ => return invalid(format!("unexpected bitmap character '{c}'")),
                });
            }
        }
        Ok((Mask::Bitmap(bits), m))
    }

    pub fn grid(&self, rank: usize, grid: usize) -> Result<Vec<bool>> {
        let total = grid.pow(rank as u32);
        let point = |i: usize| -> Vec<f64> {
            box_point(i, rank, grid, 0).iter().map(|&c| c as f64 / grid as f64).collect()
        };
        Ok(match self {
            Mask::Full => vec![true; total],
            Mask::Disk(r) => {
                if !(*r > 0.0) {
                    return invalid("disk radius must be positive");
                }
                let center = vec![0.5; rank];
                (0..total).map(|i| torus_distance(&point(i), &center) > *r).collect()
            }
            Mask::Strip(a, b) => (0..total)
                .map(|i| {
                    let x = point(i)[0];
                    *a < x && x < *b
                })
                .collect(),
            Mask::Bitmap(bits) => {
                if bits.len() != total {
                    return invalid(format!("bitmap has {} cells, grid needs {total}", bits.len()));
                }
                bits.clone()
            }
        })
    }
}

/// Grid points of the mask all of whose axis neighbours also lie in the mask.
pub fn mask_interior(mask: &[bool], rank: usize, grid: usize) -> Vec<usize> {
    (0..mask.len())
        .filter(|&i| {
            if !mask[i] {
                return false;
            }
            let p = box_point(i, rank, grid, 0);
            (0..rank).all(|ax| {
                [-1i64, 1].iter().all(|d| {
                    let mut q = p.clone();
                    q[ax] += d;
                    mask[wrap_index(&q, grid)]
                })
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsetReport {
    pub rank: usize,
    pub grid: usize,
    pub seed: u64,
    pub bumps: Vec<Bump>,
    pub mask_points: usize,
    pub covered_points: usize,
    /// Largest `|conj(ξ̂_a)ξ̂_b|` outside the mask.
    pub off_support_max: f64,
    /// Largest sampled relative commutator entry of the fixed-point operators.
    pub commutator_max: f64,
    pub sampled_pairs: usize,
    pub separated_pairs: usize,
    pub separates_covered_points: bool,
    pub separates_complement: bool,
    pub saturated: bool,
}

/// Greedy, seeded placement of smooth bumps supported in the mask.
pub fn place_bumps(mask: &[bool], rank: usize, grid: usize, count: usize, seed: u64) -> Result<Vec<Bump>> {
    let interior = mask_interior(mask, rank, grid);
    if interior.is_empty() {
        return invalid("the mask has empty interior");
    }
    let coords = |i: usize| -> Vec<f64> {
        box_point(i, rank, grid, 0).iter().map(|&c| c as f64 / grid as f64).collect()
    };
    let outside: Vec<Vec<f64>> = (0..mask.len()).filter(|&i| !mask[i]).map(coords).collect();
    let r_max = 0.3;
    let mut order = interior.clone();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut bumps: Vec<Bump> = Vec::new();
    for i in order {
        if bumps.len() == count {
            break;
        }
        let c = coords(i);
        if bumps.iter().any(|b| torus_distance(&b.center, &c) < b.radius) {
            continue;
        }
        let gap = outside
            .iter()
            .map(|q| torus_distance(q, &c))
            .fold(f64::INFINITY, f64::min);
        let radius = gap.min(r_max);
        if radius > 0.0 {
            bumps.push(Bump { center: c, radius });
        }
    }
    Ok(bumps)
}

/// Zero-padded linear correlation `m ↦ Σ_ν conj(ξ(ν)) η(ν+m)` of one-component vectors.
fn correlation_fft(xi: &SequenceVector, eta: &SequenceVector) -> Symbol {
    let k = xi.rank;
    let pad = 2 * xi.side();
    let lift = |v: &SequenceVector| {
        let mut buf = vec![zero(); pad.pow(k as u32)];
        for (i, x) in v.components[0].iter().enumerate() {
            buf[wrap_index(&v.point(i), pad)] = *x;
        }
        transform_axes(&mut buf, k, pad, true);
        buf
    };
    let (a, b) = (lift(xi), lift(eta));
    let mut prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x.conj() * y).collect();
    transform_axes(&mut prod, k, pad, false);
    let scale = 1.0 / pad.pow(k as u32) as f64;
    let radius = 2 * xi.radius - 1;
    Symbol::from_fn(k, radius, |m| prod[wrap_index(&m.iter().map(|c| -c).collect::<Vec<_>>(), pad)] * scale)
}

/// The bump construction for an open subset: support, commutativity and separation.
pub fn example_subset(mask: &[bool], rank: usize, grid: usize, count: usize, seed: u64) -> Result<SubsetReport> {
    if grid < 4 || !grid.is_multiple_of(2) {
        return invalid("torus grid must be even and at least 4");
    }
    if mask.len() != grid.pow(rank as u32) {
        return invalid("mask does not match the grid");
    }
    let bumps = place_bumps(mask, rank, grid, count, seed)?;
    let total = mask.len();
    let coords = |i: usize| -> Vec<f64> {
        box_point(i, rank, grid, 0).iter().map(|&c| c as f64 / grid as f64).collect()
    };
    let base: Vec<Vec<Complex64>> = bumps
        .iter()
        .map(|b| {
            (0..total)
                .map(|i| Complex64::new(bump(torus_distance(&coords(i), &b.center), b.radius), 0.0))
                .collect()
        })
        .collect();
    // each bump together with its unit translates ρ_{−e_k}ξ, whose transforms carry e^{2πiθ_k}
    let mut hats = Vec::with_capacity(base.len() * (rank + 1));
    for h in &base {
        hats.push(h.clone());
        for k in 0..rank {
            hats.push(
                h.iter()
                    .enumerate()
                    .map(|(i, v)| v * Complex64::from_polar(1.0, 2.0 * PI * coords(i)[k]))
                    .collect(),
            );
        }
    }
    let nb = hats.len();
    // inner products conj(ξ̂_a)·ξ̂_b as vectors indexed by grid point
    let profile = |i: usize| -> Vec<Complex64> {
        let mut v = Vec::with_capacity(nb * nb);
        for a in &hats {
            for b in &hats {
                v.push(a[i].conj() * b[i]);
            }
        }
        v
    };
    let profiles: Vec<Vec<Complex64>> = (0..total).map(profile).collect();
    let scale = profiles
        .iter()
        .flat_map(|v| v.iter().map(|z| z.norm()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let off_support_max = (0..total)
        .filter(|&i| !mask[i])
        .flat_map(|i| profiles[i].iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let covered: Vec<usize> = (0..total)
        .filter(|&i| profiles[i].iter().any(|z| z.norm() > 0.0))
        .collect();
    // separation is sampled where the profile is above the noise floor
    let significant: Vec<usize> = covered
        .iter()
        .copied()
        .filter(|&i| profiles[i].iter().any(|z| z.norm() > 1e-10 * scale))
        .collect();
    let complement: Vec<usize> = (0..total).filter(|&i| !mask[i]).collect();
    let distinct = |p: usize, q: usize| {
        let d = profiles[p]
            .iter()
            .zip(&profiles[q])
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        d > 1e-10 * norm(&profiles[p]).max(norm(&profiles[q])).max(scale * 1e-300)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut sampled_pairs = 0;
    let mut separated_pairs = 0;
    if significant.len() >= 2 {
        for _ in 0..256 {
            let p = significant[rng.gen_range(0..significant.len())];
            let q = significant[rng.gen_range(0..significant.len())];
            if p == q {
                continue;
            }
            sampled_pairs += 1;
            if distinct(p, q) {
                separated_pairs += 1;
            }
        }
    }
    let mut separates_complement = false;
    if complement.len() >= 2 {
        for _ in 0..64 {
            let p = complement[rng.gen_range(0..complement.len())];
            let q = complement[rng.gen_range(0..complement.len())];
            if p != q && distinct(p, q) {
                separates_complement = true;
            }
        }
    }
    let commutator_max = fixed_point_commutators(&hats, rank, grid, &mut rng)?;
    let mask_points = mask.iter().filter(|&&b| b).count();
    Ok(SubsetReport {
        rank,
        grid,
        seed,
        mask_points,
        covered_points: covered.len(),
        off_support_max,
        commutator_max,
        sampled_pairs,
        separated_pairs,
        separates_covered_points: separated_pairs == sampled_pairs,
        separates_complement,
        saturated: mask_points == total && covered.len() == total,
        bumps,
    })
}

/// Sampled entries of `[λ_{⟨⟨ξ_a|ξ_b⟩⟩}, λ_{⟨⟨ξ_c|ξ_d⟩⟩}]` relative to `‖φ‖₁‖ψ‖₁`.
fn fixed_point_commutators(hats: &[Vec<Complex64>], rank: usize, grid: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    if hats.is_empty() {
        return Ok(0.0);
    }
    let seqs: Vec<SequenceVector> = hats
        .iter()
        .map(|h| SequenceVector::from_torus(rank, grid, std::slice::from_ref(h)))
        .collect::<Result<_>>()?;
    let nb = seqs.len();
    let mut symbols = Vec::new();
    for _ in 0..nb.min(6) {
        let (a, b) = (rng.gen_range(0..nb), rng.gen_range(0..nb));
        symbols.push(correlation_fft(&seqs[a], &seqs[b]));
    }
    let radius = (grid / 2) as i64;
    let side = (2 * radius) as usize;
    let mut worst = 0.0f64;
    for x in 0..symbols.len() {
        for y in (x + 1)..symbols.len() {
            let (phi, psi) = (&symbols[x], &symbols[y]);
            let norm = phi.l1_norm() * psi.l1_norm();
            if norm == 0.0 {
                continue;
            }
            for _ in 0..8 {
                let t = box_point(rng.gen_range(0..side.pow(rank as u32)), rank, side, -radius);
                let s = box_point(rng.gen_range(0..side.pow(rank as u32)), rank, side, -radius);
                let entry = |f: &Symbol, g: &Symbol| -> Complex64 {
                    let mut acc = zero();
                    for (i, v) in f.values.iter().enumerate() {
                        if v.norm() == 0.0 {
                            continue;
                        }
                        // r = t − m
                        let m = f.point(i);
                        let d: Vec<i64> = t.iter().zip(&m).zip(&s).map(|((a, b), c)| a - b - c).collect();
                        acc += v * g.get(&d);
                    }
                    acc
                };
                worst = worst.max((entry(phi, psi) - entry(psi, phi)).norm() / norm);
            }
        }
    }
    Ok(worst)
}

/// `V_m = C ⊕ L_m` over `T²`, glued by `σ(z,1) = diag(1, z^m) σ(z,0)`.
#[derive(Clone, Debug, Serialize)]
pub struct ClutchingBundle {
    pub m: i64,
    pub grid: usize,
    /// `det` of the transition, `z^m`, at `z = e^{2πij/M}`.
    pub transition: Vec<Complex64>,
}

impl ClutchingBundle {
    pub fn new(m: i64, grid: usize) -> Result<ClutchingBundle> {
        if grid < 2 {
            return invalid("grid must have at least two points");
        }
        let transition = (0..grid)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * (m * j as i64) as f64 / grid as f64))
            .collect();
        Ok(ClutchingBundle { m, grid, transition })
    }
}

/// Sections sampled on `θ_i = i/M` and `t_j = j/M`, `j = 0, …, M` (seam rows included).
#[derive(Clone, Debug)]
pub struct SectionSamples {
    pub m: i64,
    pub grid: usize,
    /// `sections[a][(i, j)] = σ_a(z_i, t_j) ∈ C²`.
    pub sections: Vec<Vec<[Complex64; 2]>>,
}

impl SectionSamples {
    pub fn get(&self, a: usize, i: usize, j: usize) -> [Complex64; 2] {
        self.sections[a][i * (self.grid + 1) + j]
    }

    /// `max |σ(z,1) − diag(1, z^m) σ(z,0)|`.
    pub fn seam_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.sections.len() {
            for i in 0..self.grid {
                let z = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / self.grid as f64);
                let zm = z.powi(self.m as i32);
                let (s0, s1) = (self.get(a, i, 0), self.get(a, i, self.grid));
                worst = worst.max((s1[0] - s0[0]).norm()).max((s1[1] - zm * s0[1]).norm());
            }
        }
        worst
    }

    /// `Σ_a σ_a σ_a^*` at the grid point `(i, j)`.
    pub fn fiber_gram(&self, i: usize, j: usize) -> CMatrix {
        let mut g = CMatrix::zeros(2, 2);
        for a in 0..self.sections.len() {
            let s = self.get(a, i, j);
            let v = CVector::from_column_slice(&s);
            g += &v * v.adjoint();
        }
        g
    }
}

/// Smooth step with all derivatives vanishing at both ends.
fn smooth_step(t: f64) -> f64 {
    let g = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let (a, b) = (g(t), g(1.0 - t));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// The first `count` (at most four) of
/// `(1,0)`, `(0, u + v z^m)`, `(0, e^{iπh}(u − v z^m))`, `(z, e^{iπh}(u − v z^m))/√2`,
/// with `u = cos(πh/2)`, `v = sin(πh/2)` and `h` a smooth step in `t`.
pub fn clutching_sections(m: i64, grid: usize, count: usize) -> Result<SectionSamples> {
    if grid < 16 {
        return invalid("the section grid needs at least 16 points per axis");
    }
    if count == 0 || count > 4 {
        return invalid("between one and four sections are available");
    }
    let mut sections = vec![Vec::with_capacity(grid * (grid + 1)); count];
    for i in 0..grid {
        let z = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / grid as f64);
        let zm = z.powi(m as i32);
        for j in 0..=grid {
            let h = smooth_step(j as f64 / grid as f64);
            let (u, v) = ((PI * h / 2.0).cos(), (PI * h / 2.0).sin());
            let phase = Complex64::from_polar(1.0, PI * h);
            let s1 = u + zm * v;
            let s2 = phase * (u - zm * v);
            let all = [
                [Complex64::new(1.0, 0.0), zero()],
                [zero(), s1],
                [zero(), s2],
                [z / 2f64.sqrt(), s2 / 2f64.sqrt()],
            ];
            for (a, sec) in sections.iter_mut().enumerate() {
                sec.push(all[a]);
            }
        }
    }
    let samples = SectionSamples { m, grid, sections };
    for i in 0..grid {
        for j in 0..grid {
            let min = min_eigenvalue(&samples.fiber_gram(i, j));
            if min <= 1e-10 {
                return Err(Error::RankDeficient {
                    point: vec![i, j],
                    min_eigenvalue: min,
                });
            }
        }
    }
    Ok(samples)
}

/// Winding number of `z ↦ det(transition(z))` from summed phase increments.
pub fn chern_number(bundle: &ClutchingBundle) -> Result<i64> {
    let n = bundle.transition.len();
    let mut total = 0.0;
    for i in 0..n {
        let next = (i + 1) % n;
        let jump = (bundle.transition[next] / bundle.transition[i]).arg();
        if jump.abs() >= PI - 1e-9 {
            return Err(Error::Resolution { index: i, next, jump });
        }
        total += jump;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

#[derive(Clone, Debug, Serialize)]
pub struct BundleReport {
    pub m: i64,
    pub grid: usize,
    pub sections: usize,
    pub seam_defect: f64,
    pub min_gram_eigenvalue: f64,
    /// Smallest dimension of the fiberwise span of `σ_a σ_b^*`.
    pub fiber_dim: usize,
    /// Largest `‖[x, y]‖` over fiber basis pairs at a sample point, zero for commutative fibers.
    pub fiber_commutator: f64,
    pub chern_number: i64,
}

/// Fiberwise algebra of `{σ_a σ_b^*}` and the winding invariant of `V_m`.
pub fn fixedpoint_bundle_report(samples: &SectionSamples) -> Result<BundleReport> {
    let grid = samples.grid;
    let n = samples.sections.len();
    let mut min_gram = f64::INFINITY;
    let mut fiber_dim = usize::MAX;
    let mut fiber_commutator = 0.0f64;
    for i in 0..grid {
        for j in 0..grid {
            let vecs: Vec<CVector> = (0..n).map(|a| CVector::from_column_slice(&samples.get(a, i, j))).collect();
            let mut ops = Vec::with_capacity(n * n);
            let mut flat = Vec::with_capacity(n * n);
            for a in &vecs {
                for b in &vecs {
                    let op = a * b.adjoint();
                    flat.push(CVector::from_iterator(4, op.iter().copied()));
                    ops.push(op);
                }
            }
            let dim = rank_of(&flat, 4);
            if dim < 4 {
                return Err(Error::NotFull {
                    point: vec![i, j],
                    dimension: dim,
                });
            }
            fiber_dim = fiber_dim.min(dim);
            min_gram = min_gram.min(min_eigenvalue(&samples.fiber_gram(i, j)));
            if i == 0 && j == grid / 2 {
                for x in &ops {
                    for y in &ops {
                        fiber_commutator = fiber_commutator.max(spectral_norm(&(x * y - y * x)));
                    }
                }
            }
        }
    }
    let bundle = ClutchingBundle::new(samples.m, grid)?;
    Ok(BundleReport {
        m: samples.m,
        grid,
        sections: n,
        seam_defect: samples.seam_defect(),
        min_gram_eigenvalue: min_gram,
        fiber_dim,
        fiber_commutator,
        chern_number: chern_number(&bundle)?,
    })
}

/// Whether the winding invariants of the given twists are pairwise distinct.
pub fn distinguishes(reports: &[BundleReport]) -> bool {
    reports.iter().enumerate().all(|(a, x)| {
        reports[a + 1..]
            .iter()
            .all(|y| x.m == y.m || x.chern_number != y.chern_number)
    })
}
