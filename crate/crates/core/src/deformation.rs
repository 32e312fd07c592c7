//! The deformed product `f ×_J g` on a periodized model of `R^n` (n ≤ 2).
//!
//! Functions live on the grid `x_j = −L/2 + jL/N` of the torus `[−L/2, L/2)^n`.
//! Their transforms are indexed by the frequencies `k/L`, `k ∈ {−N/2, …, N/2−1}^n`,
//! with `F(k/L) = Σ_x f(x) e^{−2πi⟨k,x⟩/L} (L/N)^n`. The product is computed as the
//! inverse transform of the twisted convolution of the transforms; an independent
//! iterated quadrature of the defining double integral serves as the oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::CMatrix;

/// High-frequency mass (relative, `|k|_∞ ≥ N/4`) above which aliasing is reported.
pub const BAND_LIMIT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    dim: usize,
    samples: usize,
    period: f64,
    values: Vec<Complex64>,
}

/// Transform of a [`GridFunction`], indexed by centered frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    dim: usize,
    samples: usize,
    period: f64,
    values: Vec<Complex64>,
}

/// A real skew-symmetric `n × n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix {
    n: usize,
    entries: Vec<f64>,
}

/// One-variable factor of a separable profile.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    Gaussian { center: f64, sigma: f64 },
    /// `e^{2πi·k·x/L}` with an integer number of cycles per period.
    Wave { cycles: i64 },
    Constant,
}

/// A finite sum of separable functions `c·φ_1(x_1)⋯φ_n(x_n)`, evaluated periodically.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    dim: usize,
    terms: Vec<(Complex64, Vec<Factor>)>,
}

fn check_grid(dim: usize, samples: usize, period: f64) -> Result<()> {
    if !(1..=2).contains(&dim) {
        return invalid(format!("grid dimension must be 1 or 2, got {dim}"));
    }
    if samples < 2 || !samples.is_power_of_two() {
        return invalid(format!("samples per axis must be a power of two ≥ 2, got {samples}"));
    }
    if !(period > 0.0 && period.is_finite()) {
        return invalid(format!("period must be positive, got {period}"));
    }
    Ok(())
}

fn multi_index(mut index: usize, dim: usize, samples: usize) -> Vec<usize> {
    let mut out = vec![0; dim];
    for j in (0..dim).rev() {
        out[j] = index % samples;
        index /= samples;
    }
    out
}

impl GridFunction {
    pub fn new(dim: usize, samples: usize, period: f64, values: Vec<Complex64>) -> Result<GridFunction> {
        check_grid(dim, samples, period)?;
        if values.len() != samples.pow(dim as u32) {
            return invalid(format!("expected {} samples, got {}", samples.pow(dim as u32), values.len()));
        }
        Ok(GridFunction {
            dim,
            samples,
            period,
            values,
        })
    }

    pub fn from_fn(
        dim: usize,
        samples: usize,
        period: f64,
        f: impl Fn(&[f64]) -> Complex64,
    ) -> Result<GridFunction> {
        check_grid(dim, samples, period)?;
        let total = samples.pow(dim as u32);
        let step = period / samples as f64;
        let values = (0..total)
            .map(|i| {
                let x: Vec<f64> = multi_index(i, dim, samples)
                    .iter()
                    .map(|&j| -period / 2.0 + j as f64 * step)
                    .collect();
                f(&x)
            })
            .collect();
        Ok(GridFunction {
            dim,
            samples,
            period,
            values,
        })
    }

    pub fn from_profile(profile: &Profile, samples: usize, period: f64) -> Result<GridFunction> {
        GridFunction::from_fn(profile.dim, samples, period, |x| profile.eval_periodic(x, period))
    }

    /// `e_a(x) = exp(2πi⟨a,x⟩/L)`.
    pub fn plane_wave(dim: usize, samples: usize, period: f64, freq: &[i64]) -> Result<GridFunction> {
        if freq.len() != dim {
            return invalid("frequency vector has the wrong length");
        }
        GridFunction::from_fn(dim, samples, period, |x| {
            let phase: f64 = x.iter().zip(freq).map(|(xi, &a)| xi * a as f64).sum::<f64>() / period;
            Complex64::from_polar(1.0, 2.0 * PI * phase)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn coordinates(&self, index: usize) -> Vec<f64> {
        let step = self.period / self.samples as f64;
        multi_index(index, self.dim, self.samples)
            .iter()
            .map(|&j| -self.period / 2.0 + j as f64 * step)
            .collect()
    }

    fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.dim != other.dim || self.samples != other.samples || self.period != other.period {
            return invalid("grid functions live on different grids");
        }
        Ok(())
    }

    /// Pointwise complex conjugate, the involution of the deformed algebra.
    pub fn conj(&self) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| v.conj()).collect(),
            ..self.clone()
        }
    }

    pub fn pointwise(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_grid(other)?;
        Ok(GridFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            ..self.clone()
        })
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_grid(other)?;
        Ok(GridFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    /// `(τ_s f)(x) = f(x − s·L/N)`, a cyclic shift by whole grid steps.
    pub fn translate(&self, steps: &[i64]) -> GridFunction {
        let n = self.samples as i64;
        let total = self.values.len();
        let mut values = vec![Complex64::new(0.0, 0.0); total];
        for (i, v) in values.iter_mut().enumerate() {
            let idx = multi_index(i, self.dim, self.samples);
            let mut src = 0usize;
            for (j, s) in idx.iter().zip(steps) {
                src = src * self.samples + (*j as i64 - s).rem_euclid(n) as usize;
            }
            *v = self.values[src];
        }
        GridFunction {
            values,
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// `max|f − g| / max|g|`.
    pub fn rel_distance(&self, other: &GridFunction) -> f64 {
        let diff = self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        diff / other.max_abs().max(f64::MIN_POSITIVE)
    }
}

impl Spectrum {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Index of the integer frequency vector `k` (entries in `[−N/2, N/2)`).
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        let half = (self.samples / 2) as i64;
        let mut idx = 0usize;
        for &c in k {
            if c < -half || c >= half {
                return None;
            }
            idx = idx * self.samples + (c + half) as usize;
        }
        Some(idx)
    }

    pub fn frequency(&self, index: usize) -> Vec<i64> {
        let half = (self.samples / 2) as i64;
        multi_index(index, self.dim, self.samples)
            .iter()
            .map(|&j| j as i64 - half)
            .collect()
    }

    pub fn point_mass(dim: usize, samples: usize, period: f64, k: &[i64], value: Complex64) -> Result<Spectrum> {
        check_grid(dim, samples, period)?;
        let mut s = Spectrum {
            dim,
            samples,
            period,
            values: vec![Complex64::new(0.0, 0.0); samples.pow(dim as u32)],
        };
        let idx = s
            .index_of(k)
            .ok_or_else(|| crate::Error::InvalidArgument("frequency outside the band".into()))?;
        s.values[idx] = value;
        Ok(s)
    }

    /// Fraction of `Σ|F|²` carried by frequencies with `|k|_∞ ≥ N/4`.
    pub fn high_frequency_fraction(&self) -> f64 {
        let quarter = (self.samples / 4) as i64;
        let mut high = 0.0;
        let mut total = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let m = v.norm_sqr();
            total += m;
            if self.frequency(i).iter().any(|k| k.abs() >= quarter) {
                high += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            high / total
        }
    }
}

/// Applies a 1-D transform along every axis of a row-major `N^dim` array.
pub(crate) fn transform_axes(values: &mut [Complex64], dim: usize, samples: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(samples)
    } else {
        planner.plan_fft_forward(samples)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); samples];
    for axis in 0..dim {
        let stride = samples.pow((dim - 1 - axis) as u32);
        let total = values.len();
        for start in 0..total {
            if !(start / stride).is_multiple_of(samples) {
                continue;
            }
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = values[start + j * stride];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                values[start + j * stride] = *v;
            }
        }
    }
}

/// Sign `(−1)^{Σk}` relating the grid offset `−L/2` to the FFT convention.
fn parity(k: &[i64]) -> f64 {
    if k.iter().sum::<i64>().rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn dft(f: &GridFunction) -> Spectrum {
    let (dim, n) = (f.dim, f.samples);
    let mut buf = f.values.clone();
    transform_axes(&mut buf, dim, n, false);
    let weight = (f.period / n as f64).powi(dim as i32);
    let mut out = Spectrum {
        dim,
        samples: n,
        period: f.period,
        values: vec![Complex64::new(0.0, 0.0); buf.len()],
    };
    for i in 0..buf.len() {
        let k = out.frequency(i);
        let mut src = 0usize;
        for &c in &k {
            src = src * n + c.rem_euclid(n as i64) as usize;
        }
        out.values[i] = buf[src] * parity(&k) * weight;
    }
    out
}

pub fn idft(s: &Spectrum) -> GridFunction {
    let (dim, n) = (s.dim, s.samples);
    let mut buf = vec![Complex64::new(0.0, 0.0); s.values.len()];
    for (i, v) in s.values.iter().enumerate() {
        let k = s.frequency(i);
        let mut dst = 0usize;
        for &c in &k {
            dst = dst * n + c.rem_euclid(n as i64) as usize;
        }
        buf[dst] = v * parity(&k);
    }
    transform_axes(&mut buf, dim, n, true);
    let weight = (1.0 / s.period).powi(dim as i32);
    GridFunction {
        dim,
        samples: n,
        period: s.period,
        values: buf.into_iter().map(|v| v * weight).collect(),
    }
}

impl SkewMatrix {
    /// Takes the skew part `(M − Mᵀ)/2` of a row-major `n × n` matrix.
    pub fn new(n: usize, entries: &[f64]) -> Result<SkewMatrix> {
        if entries.len() != n * n {
            return invalid(format!("matrix needs {} entries", n * n));
        }
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                e[i * n + j] = 0.5 * (entries[i * n + j] - entries[j * n + i]);
            }
        }
        Ok(SkewMatrix { n, entries: e })
    }

    pub fn zero(n: usize) -> SkewMatrix {
        SkewMatrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    /// `[[0, θ], [−θ, 0]]`.
    pub fn theta(theta: f64) -> SkewMatrix {
        SkewMatrix {
            n: 2,
            entries: vec![0.0, theta, -theta, 0.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// `⟨Ja, b⟩`.
    pub fn pairing(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += b[i] * self.get(i, j) * a[j];
            }
        }
        s
    }

    /// `Ju`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * u[j]).sum())
            .collect()
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.n != dim {
            return invalid(format!("J is {}x{} but the grid has dimension {dim}", self.n, self.n));
        }
        Ok(())
    }
}

/// `ω_J(a/L, b/L)` for integer frequency vectors.
pub fn omega_j(j: &SkewMatrix, a: &[i64], b: &[i64], period: f64) -> Complex64 {
    let af: Vec<f64> = a.iter().map(|&x| x as f64 / period).collect();
    let bf: Vec<f64> = b.iter().map(|&x| x as f64 / period).collect();
    Complex64::from_polar(1.0, 2.0 * PI * j.pairing(&af, &bf))
}

/// Phase table for `e^{2πi⟨Ja,c⟩/L²}` as a function of an integer bilinear form.
struct PhaseTable {
    offset: i64,
    theta: f64,
    table: Vec<Complex64>,
}

impl PhaseTable {
    fn new(j: &SkewMatrix, samples: usize, period: f64) -> PhaseTable {
        let theta = if j.n == 2 { j.get(0, 1) } else { 0.0 };
        let half = (samples / 2) as i64;
        let offset = 2 * half * half;
        let table = (-offset..=offset)
            .map(|s| Complex64::from_polar(1.0, 2.0 * PI * theta * s as f64 / (period * period)))
            .collect();
        PhaseTable { offset, theta, table }
    }

    /// `⟨Ja, c⟩ = θ(a₁c₀ − a₀c₁)` in two dimensions.
    #[cfg(test)]
    fn get(&self, a: &[i64], c: &[i64]) -> Complex64 {
        if a.len() < 2 || self.theta == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        self.power(a[1] * c[0] - a[0] * c[1])
    }

    /// `e^{2πiθs/L²}`.
    fn power(&self, s: i64) -> Complex64 {
        if self.theta == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        self.table[(s + self.offset) as usize]
    }
}

/// `(F *_ω G)(z) = Σ_u F(u) G(z−u) ω_J(u, z−u) Δu^n`; terms with `z−u` outside
/// the band are dropped.
///
/// The phase `e^{2πiθ(u₁z₀ − u₀z₁)/L²}` splits over the axes, so for fixed
/// `(z₀, u₀)` the sum over `u₁` is a linear convolution done by a padded FFT.
pub fn twisted_conv_freq(f: &Spectrum, g: &Spectrum, j: &SkewMatrix) -> Result<Spectrum> {
    if f.dim != g.dim || f.samples != g.samples || f.period != g.period {
        return invalid("spectra live on different grids");
    }
    j.check(f.dim)?;
    let n = f.samples;
    let half = (n / 2) as i64;
    let pad = 2 * n;
    let phases = PhaseTable::new(j, n, f.period);
    let weight = (1.0 / f.period).powi(f.dim as i32) / pad as f64;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(pad);
    let inv = planner.plan_fft_inverse(pad);
    let zero = Complex64::new(0.0, 0.0);
    let rows = if f.dim == 1 { 1 } else { n };
    let g_hat: Vec<Vec<Complex64>> = (0..rows)
        .map(|r| {
            let mut buf = vec![zero; pad];
            buf[..n].copy_from_slice(&g.values[r * n..(r + 1) * n]);
            fwd.process(&mut buf);
            buf
        })
        .collect();
    let out_rows: Vec<Vec<Complex64>> = (0..rows)
        .into_par_iter()
        .map(|iz0| {
            let z0 = iz0 as i64 - half;
            let mut out = vec![zero; n];
            let mut buf = vec![zero; pad];
            for iu0 in 0..rows {
                let r = iz0 as i64 - iu0 as i64 + if f.dim == 1 { 0 } else { half };
                if r < 0 || r >= rows as i64 {
                    continue;
                }
                let u0 = iu0 as i64 - half;
                let row = &f.values[iu0 * n..(iu0 + 1) * n];
                if row.iter().all(|v| v.norm() == 0.0) {
                    continue;
                }
                for (iu1, b) in buf.iter_mut().enumerate() {
                    *b = if iu1 < n {
                        row[iu1] * phases.power(((iu1 as i64) - half) * z0)
                    } else {
                        zero
                    };
                }
                fwd.process(&mut buf);
                for (b, h) in buf.iter_mut().zip(&g_hat[r as usize]) {
                    *b *= h;
                }
                inv.process(&mut buf);
                for (iz1, o) in out.iter_mut().enumerate() {
                    let z1 = iz1 as i64 - half;
                    *o += buf[iz1 + n / 2] * phases.power(-u0 * z1);
                }
            }
            for o in out.iter_mut() {
                *o *= weight;
            }
            out
        })
        .collect();
    Ok(Spectrum {
        dim: f.dim,
        samples: f.samples,
        period: f.period,
        values: out_rows.concat(),
    })
}

#[derive(Clone, Debug)]
pub struct DeformedProduct {
    pub product: GridFunction,
    /// Largest relative high-frequency mass of the two inputs.
    pub high_frequency_mass: f64,
    pub warning: Option<String>,
}

/// `f ×_J g` through the transform: `(f ×_J g)^ = f̂ *_ω ĝ`.
pub fn deformed_product(f: &GridFunction, g: &GridFunction, j: &SkewMatrix) -> Result<DeformedProduct> {
    f.same_grid(g)?;
    j.check(f.dim)?;
    let (ff, gg) = (dft(f), dft(g));
    let mass = ff.high_frequency_fraction().max(gg.high_frequency_fraction());
    let warning = (mass >= BAND_LIMIT_TOL).then(|| {
        format!("inputs are not band-limited on this grid: high-frequency mass {mass:.3e} may alias")
    });
    let product = idft(&twisted_conv_freq(&ff, &gg, j)?);
    Ok(DeformedProduct {
        product,
        high_frequency_mass: mass,
        warning,
    })
}

impl Factor {
    fn eval(&self, x: f64, period: f64) -> Complex64 {
        match *self {
            Factor::Gaussian { center, sigma } => {
                let images = (8.0 * sigma / period).ceil() as i64 + 1;
                let mut s = 0.0;
                for m in -images..=images {
                    let d = x + m as f64 * period - center;
                    s += (-d * d / (2.0 * sigma * sigma)).exp();
                }
                Complex64::new(s, 0.0)
            }
            Factor::Wave { cycles } => Complex64::from_polar(1.0, 2.0 * PI * cycles as f64 * x / period),
            Factor::Constant => Complex64::new(1.0, 0.0),
        }
    }
}

impl Profile {
    pub fn new(dim: usize, terms: Vec<(Complex64, Vec<Factor>)>) -> Result<Profile> {
        if terms.iter().any(|(_, fs)| fs.len() != dim) {
            return invalid("every term needs one factor per axis");
        }
        for (_, fs) in &terms {
            for f in fs {
                if let Factor::Gaussian { sigma, .. } = f {
                    if !(*sigma > 0.0) {
                        return invalid("Gaussian width must be positive");
                    }
                }
            }
        }
        Ok(Profile { dim, terms })
    }

    /// The centered Gaussian `exp(−|x|²/(2σ²))`.
    pub fn gaussian(dim: usize, sigma: f64) -> Result<Profile> {
        Profile::new(
            dim,
            vec![(Complex64::new(1.0, 0.0), vec![Factor::Gaussian { center: 0.0, sigma }; dim])],
        )
    }

    pub fn zero(dim: usize) -> Profile {
        Profile { dim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Complex64, Vec<Factor>)] {
        &self.terms
    }

    /// Parses `gaussian:σ`, `gaussian:σ@c1,c2`, `wave:k1,k2` or `one`.
    pub fn parse(dim: usize, spec: &str) -> Result<Profile> {
        let bad = || crate::Error::InvalidArgument(format!("cannot parse profile '{spec}'"));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        if spec == "one" {
            return Profile::new(dim, vec![(Complex64::new(1.0, 0.0), vec![Factor::Constant; dim])]);
        }
        if let Some(rest) = spec.strip_prefix("gaussian:") {
            let (sigma, center) = match rest.split_once('@') {
                Some((s, c)) => (num(s)?, c.split(',').map(num).collect::<Result<Vec<f64>>>()?),
                None => (num(rest)?, vec![0.0; dim]),
            };
            if center.len() != dim {
                return Err(bad());
            }
            let factors = center.iter().map(|&c| Factor::Gaussian { center: c, sigma }).collect();
            return Profile::new(dim, vec![(Complex64::new(1.0, 0.0), factors)]);
        }
        if let Some(rest) = spec.strip_prefix("wave:") {
            let ks = rest
                .split(',')
                .map(|s| s.trim().parse::<i64>().map_err(|_| bad()))
                .collect::<Result<Vec<i64>>>()?;
            if ks.len() != dim {
                return Err(bad());
            }
            let factors = ks.iter().map(|&k| Factor::Wave { cycles: k }).collect();
            return Profile::new(dim, vec![(Complex64::new(1.0, 0.0), factors)]);
        }
        Err(bad())
    }

    /// The periodization of the profile with period `L` in each variable.
    pub fn eval_periodic(&self, x: &[f64], period: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, fs)| fs.iter().zip(x).fold(*c, |acc, (f, &xi)| acc * f.eval(xi, period)))
            .sum()
    }
}

/// Iterated quadrature of `∫∫ f(x−Ju) g(x−v) e^{2πi⟨u,v⟩} dv du`, inner integral first.
///
/// The inner integral is `e^{2πi⟨u,x⟩} ĝ(u)` with `ĝ(u) = Σ_w g(w) e^{−2πi⟨u,w⟩} Δw^n`
/// summed directly on the grid; the outer one runs over the dual grid `u = k/L`
/// with `f` evaluated from its formula at the off-grid points `x − Ju`.
pub fn deformed_product_quad(f: &Profile, g: &GridFunction, j: &SkewMatrix) -> Result<GridFunction> {
    let (dim, n, period) = (g.dim, g.samples, g.period);
    if f.dim != dim {
        return invalid("profile and grid dimensions differ");
    }
    j.check(dim)?;
    let half = (n / 2) as i64;
    let xs: Vec<f64> = (0..n).map(|i| -period / 2.0 + i as f64 * period / n as f64).collect();
    let us: Vec<f64> = (0..n).map(|k| (k as i64 - half) as f64 / period).collect();
    let dx = period / n as f64;
    // e^{∓2πi u x} tables, [x][u]
    let expo = |sign: f64| -> Vec<Vec<Complex64>> {
        xs.iter()
            .map(|&x| us.iter().map(|&u| Complex64::from_polar(1.0, sign * 2.0 * PI * u * x)).collect())
            .collect()
    };
    let (e_minus, e_plus) = (expo(-1.0), expo(1.0));
    let du = (1.0 / period).powi(dim as i32);
    match dim {
        1 => {
            let mut ghat = vec![Complex64::new(0.0, 0.0); n];
            for (k, gh) in ghat.iter_mut().enumerate() {
                for (w, gv) in g.values.iter().enumerate() {
                    *gh += gv * e_minus[w][k];
                }
                *gh *= dx;
            }
            let values = (0..n)
                .map(|xi| {
                    let fx = f.eval_periodic(&[xs[xi]], period);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += fx * e_plus[xi][k] * ghat[k];
                    }
                    acc * du
                })
                .collect();
            GridFunction::new(1, n, period, values)
        }
        _ => {
            // ĝ(u0,u1) by direct sums, first over w1 then over w0
            let mut partial = vec![Complex64::new(0.0, 0.0); n * n];
            for w0 in 0..n {
                for k1 in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for w1 in 0..n {
                        acc += g.values[w0 * n + w1] * e_minus[w1][k1];
                    }
                    partial[w0 * n + k1] = acc;
                }
            }
            let mut ghat = vec![Complex64::new(0.0, 0.0); n * n];
            for k0 in 0..n {
                for k1 in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for w0 in 0..n {
                        acc += partial[w0 * n + k1] * e_minus[w0][k0];
                    }
                    ghat[k0 * n + k1] = acc * dx * dx;
                }
            }
            let theta = j.get(0, 1);
            let mut values = vec![Complex64::new(0.0, 0.0); n * n];
            for (coef, factors) in &f.terms {
                // x − Ju = (x0 − θu1, x1 + θu0)
                let t0: Vec<Vec<Complex64>> = xs
                    .iter()
                    .map(|&x| us.iter().map(|&u| factors[0].eval(x - theta * u, period)).collect())
                    .collect();
                let t1: Vec<Vec<Complex64>> = xs
                    .iter()
                    .map(|&x| us.iter().map(|&u| factors[1].eval(x + theta * u, period)).collect())
                    .collect();
                let rows: Vec<Vec<Complex64>> = (0..n)
                    .into_par_iter()
                    .map(|x0| {
                        (0..n)
                            .map(|x1| {
                                let mut acc = Complex64::new(0.0, 0.0);
                                for k0 in 0..n {
                                    let a = t1[x1][k0] * e_plus[x0][k0];
                                    let mut inner = Complex64::new(0.0, 0.0);
                                    for k1 in 0..n {
                                        inner += t0[x0][k1] * e_plus[x1][k1] * ghat[k0 * n + k1];
                                    }
                                    acc += a * inner;
                                }
                                acc * coef * du
                            })
                            .collect()
                    })
                    .collect();
                for (x0, row) in rows.into_iter().enumerate() {
                    for (x1, v) in row.into_iter().enumerate() {
                        values[x0 * n + x1] += v;
                    }
                }
            }
            GridFunction::new(2, n, period, values)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StarDefects {
    /// `max ‖(f×g)^* − g^*×f^*‖ / ‖(f×g)^*‖`.
    pub involution: f64,
    /// `max ‖(f×g)×h − f×(g×h)‖ / ‖f×(g×h)‖`.
    pub associativity: f64,
}

/// Relative *-algebra defects of `×_J` over all pairs and triples of `samples`.
pub fn check_star_algebra(j: &SkewMatrix, samples: &[GridFunction]) -> Result<StarDefects> {
    let mut involution = 0.0f64;
    let mut associativity = 0.0f64;
    let k = samples.len();
    let mut products = vec![vec![None; k]; k];
    for a in 0..k {
        for b in 0..k {
            products[a][b] = Some(deformed_product(&samples[a], &samples[b], j)?.product);
        }
    }
    for a in 0..k {
        for b in 0..k {
            let fg = products[a][b].as_ref().unwrap();
            let rhs = deformed_product(&samples[b].conj(), &samples[a].conj(), j)?.product;
            involution = involution.max(rhs.rel_distance(&fg.conj()));
            for c in 0..k {
                let left = deformed_product(fg, &samples[c], j)?.product;
                let right = deformed_product(&samples[a], products[b][c].as_ref().unwrap(), j)?.product;
                associativity = associativity.max(left.rel_distance(&right));
            }
        }
    }
    Ok(StarDefects {
        involution,
        associativity,
    })
}

/// Lowest `m` frequencies per axis: `{−⌊m/2⌋, …, m − 1 − ⌊m/2⌋}^n`, row-major.
pub fn low_frequencies(dim: usize, m: usize) -> Vec<Vec<i64>> {
    let lo = -((m / 2) as i64);
    (0..m.pow(dim as u32))
        .map(|i| multi_index(i, dim, m).iter().map(|&j| lo + j as i64).collect())
        .collect()
}

/// Matrix of `ξ ↦ f ×_J ξ` on the span of the lowest `m^n` plane waves:
/// `M_{b,a} = c_{b−a} ω_J((b−a)/L, a/L)` with `c` the Fourier coefficients of `f`.
pub fn left_mult_matrix(f: &GridFunction, j: &SkewMatrix, m: usize) -> Result<CMatrix> {
    j.check(f.dim)?;
    if m == 0 || m > f.samples {
        return invalid(format!("basis size must be between 1 and {}", f.samples));
    }
    let spec = dft(f);
    let scale = (1.0 / f.period).powi(f.dim as i32);
    let freqs = low_frequencies(f.dim, m);
    let size = freqs.len();
    let mut out = CMatrix::zeros(size, size);
    for (bi, b) in freqs.iter().enumerate() {
        for (ai, a) in freqs.iter().enumerate() {
            let d: Vec<i64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
            if let Some(idx) = spec.index_of(&d) {
                out[(bi, ai)] = spec.values[idx] * scale * omega_j(j, &d, a, f.period);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn twisted_conv_direct(f: &Spectrum, g: &Spectrum, j: &SkewMatrix) -> Result<Spectrum> {
        if f.dim != g.dim || f.samples != g.samples || f.period != g.period {
            return invalid("spectra live on different grids");
        }
        j.check(f.dim)?;
        let phases = PhaseTable::new(j, f.samples, f.period);
        let weight = (1.0 / f.period).powi(f.dim as i32);
        let total = f.values.len();
        let freqs: Vec<Vec<i64>> = (0..total).map(|i| f.frequency(i)).collect();
        let support: Vec<usize> = (0..total).filter(|&i| f.values[i].norm() != 0.0).collect();
        let values: Vec<Complex64> = (0..total)
            .into_par_iter()
            .map(|zi| {
                let z = &freqs[zi];
                let mut acc = Complex64::new(0.0, 0.0);
                let mut diff = vec![0i64; z.len()];
                for &ui in &support {
                    let u = &freqs[ui];
                    for k in 0..z.len() {
                        diff[k] = z[k] - u[k];
                    }
                    if let Some(vi) = g.index_of(&diff) {
                        let gv = g.values[vi];
                        if gv.norm() != 0.0 {
                            acc += f.values[ui] * gv * phases.get(u, z);
                        }
                    }
                }
                acc * weight
            })
            .collect();
        Ok(Spectrum {
            dim: f.dim,
            samples: f.samples,
            period: f.period,
            values,
        })
    }
    use crate::linalg::{hermitian_eigen, max_abs};

    fn gauss(dim: usize, n: usize, sigma: f64, center: &[f64]) -> GridFunction {
        let factors = center.iter().map(|&c| Factor::Gaussian { center: c, sigma }).collect();
        let p = Profile::new(dim, vec![(Complex64::new(1.0, 0.0), factors)]).unwrap();
        GridFunction::from_profile(&p, n, 16.0).unwrap()
    }

    #[test]
    fn transform_round_trip() {
        let f = gauss(2, 16, 1.5, &[0.3, -1.0]).add(&GridFunction::plane_wave(2, 16, 16.0, &[3, -2]).unwrap()).unwrap();
        let back = idft(&dft(&f));
        assert!(back.rel_distance(&f) < 1e-12);
    }

    #[test]
    fn plane_wave_transform_is_point_mass() {
        let e = GridFunction::plane_wave(1, 16, 8.0, &[3]).unwrap();
        let s = dft(&e);
        let idx = s.index_of(&[3]).unwrap();
        assert!((s.values()[idx] - Complex64::new(8.0, 0.0)).norm() < 1e-12);
        let rest: f64 = s.values().iter().enumerate().filter(|(i, _)| *i != idx).map(|(_, v)| v.norm()).sum();
        assert!(rest < 1e-12);
    }

    #[test]
    fn fast_convolution_matches_direct_sum() {
        for (dim, theta) in [(1usize, 0.0), (2, 0.0), (2, 0.37), (2, -1.0)] {
            let n = 8usize;
            let total = n.pow(dim as u32);
            let wave = |i: usize, s: f64| Complex64::new((1.3 * i as f64 + s).sin(), (0.7 * i as f64 - s).cos());
            let f = Spectrum {
                dim,
                samples: n,
                period: 5.0,
                values: (0..total).map(|i| wave(i, 0.2)).collect(),
            };
            let g = Spectrum {
                values: (0..total).map(|i| wave(i, 1.1)).collect(),
                ..f.clone()
            };
            let j = if dim == 2 { SkewMatrix::theta(theta) } else { SkewMatrix::zero(1) };
            let fast = twisted_conv_freq(&f, &g, &j).unwrap();
            let direct = twisted_conv_direct(&f, &g, &j).unwrap();
            let scale = direct.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (a, b) in fast.values.iter().zip(&direct.values) {
                assert!((a - b).norm() < 1e-13 * scale, "dim {dim} theta {theta}");
            }
        }
    }

    #[test]
    fn point_mass_twisted_convolution() {
        let j = SkewMatrix::theta(0.5);
        let l = 16.0;
        let a = [1, -2];
        let b = [3, 1];
        let fa = Spectrum::point_mass(2, 16, l, &a, Complex64::new(1.0, 0.0)).unwrap();
        let fb = Spectrum::point_mass(2, 16, l, &b, Complex64::new(1.0, 0.0)).unwrap();
        let ab = twisted_conv_freq(&fa, &fb, &j).unwrap();
        let ba = twisted_conv_freq(&fb, &fa, &j).unwrap();
        let idx = ab.index_of(&[4, -1]).unwrap();
        let expected = omega_j(&j, &a, &b, l) / l / l;
        assert!((ab.values()[idx] - expected).norm() < 1e-15);
        // commutation phase e^{2πiθ(a₁b₀ − a₀b₁)·2/L²}
        let ratio = ab.values()[idx] / ba.values()[idx];
        let s = (a[1] * b[0] - a[0] * b[1]) as f64;
        assert!((ratio - Complex64::from_polar(1.0, 2.0 * PI * 0.5 * 2.0 * s / (l * l))).norm() < 1e-12);
    }

    #[test]
    fn zero_j_is_pointwise() {
        let f = gauss(2, 32, 2.0, &[0.5, 0.0]);
        let g = gauss(2, 32, 2.5, &[-1.0, 0.5]);
        let p = deformed_product(&f, &g, &SkewMatrix::zero(2)).unwrap();
        assert!(p.product.rel_distance(&f.pointwise(&g).unwrap()) < 1e-10);
    }

    #[test]
    fn plane_wave_law() {
        let (n, l) = (16, 16.0);
        let j = SkewMatrix::theta(0.5);
        let (a, b) = ([2, -1], [-3, 2]);
        let ea = GridFunction::plane_wave(2, n, l, &a).unwrap();
        let eb = GridFunction::plane_wave(2, n, l, &b).unwrap();
        let p = deformed_product(&ea, &eb, &j).unwrap().product;
        let expected = GridFunction::plane_wave(2, n, l, &[-1, 1])
            .unwrap()
            .scale(omega_j(&j, &a, &b, l));
        assert!(p.rel_distance(&expected) < 1e-10);
    }

    #[test]
    fn quadrature_matches_fft_route() {
        let j = SkewMatrix::theta(0.5);
        let f = Profile::parse(2, "gaussian:1.5@0.5,-0.5").unwrap();
        let fg = GridFunction::from_profile(&f, 32, 16.0).unwrap();
        let g = gauss(2, 32, 2.0, &[0.0, 1.0]);
        let fft = deformed_product(&fg, &g, &j).unwrap().product;
        let quad = deformed_product_quad(&f, &g, &j).unwrap();
        assert!(fft.rel_distance(&quad) < 1e-6, "{}", fft.rel_distance(&quad));
        let zero = deformed_product_quad(&Profile::zero(2), &g, &j).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn quadrature_with_zero_j_is_pointwise() {
        let f = Profile::gaussian(1, 1.0).unwrap();
        let fg = GridFunction::from_profile(&f, 64, 16.0).unwrap();
        let g = gauss(1, 64, 2.0, &[0.5]);
        let q = deformed_product_quad(&f, &g, &SkewMatrix::zero(1)).unwrap();
        assert!(q.rel_distance(&fg.pointwise(&g).unwrap()) < 1e-10);
    }

    #[test]
    fn star_algebra_defects() {
        let j = SkewMatrix::theta(0.5);
        let samples = vec![
            gauss(2, 32, 2.0, &[0.0, 0.0]),
            gauss(2, 32, 2.5, &[1.0, -0.5]).scale(Complex64::new(0.3, 0.7)),
        ];
        let d = check_star_algebra(&j, &samples).unwrap();
        assert!(d.involution < 1e-8 && d.associativity < 1e-8, "{d:?}");
        let d0 = check_star_algebra(&SkewMatrix::zero(2), &samples).unwrap();
        assert!(d0.involution < 1e-12 && d0.associativity < 1e-12);
    }

    #[test]
    fn translation_equivariance() {
        let j = SkewMatrix::theta(1.0);
        let f = gauss(2, 16, 2.0, &[0.0, 0.0]);
        let g = gauss(2, 16, 2.5, &[1.0, 0.0]);
        let s = [3, -2];
        let lhs = deformed_product(&f.translate(&s), &g.translate(&s), &j).unwrap().product;
        let rhs = deformed_product(&f, &g, &j).unwrap().product.translate(&s);
        assert!(lhs.rel_distance(&rhs) < 1e-10);
    }

    #[test]
    fn left_multiplication_examples() {
        let j = SkewMatrix::theta(0.5);
        let one = GridFunction::from_fn(2, 16, 16.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let m = left_mult_matrix(&one, &j, 4).unwrap();
        assert!(max_abs(&(m - CMatrix::identity(16, 16))) < 1e-12);
        let f = gauss(2, 16, 2.0, &[0.5, 0.0]).scale(Complex64::new(0.0, 1.0));
        let mf = left_mult_matrix(&f, &j, 4).unwrap();
        let mstar = left_mult_matrix(&f.conj(), &j, 4).unwrap();
        assert!(max_abs(&(mstar - mf.adjoint())) < 1e-8);
        // a plane wave acts as a weighted shift with unimodular weights
        let e = GridFunction::plane_wave(2, 16, 16.0, &[1, 0]).unwrap();
        let me = left_mult_matrix(&e, &j, 4).unwrap();
        let freqs = low_frequencies(2, 4);
        for (ai, a) in freqs.iter().enumerate() {
            for (bi, b) in freqs.iter().enumerate() {
                let v = me[(bi, ai)];
                if b[0] == a[0] + 1 && b[1] == a[1] {
                    assert!((v.norm() - 1.0).abs() < 1e-12);
                } else {
                    assert!(v.norm() < 1e-12);
                }
            }
        }
        // real f with J = 0 gives a Hermitian matrix with real spectrum
        let real = gauss(1, 32, 1.0, &[0.0]);
        let mr = left_mult_matrix(&real, &SkewMatrix::zero(1), 8).unwrap();
        assert!(max_abs(&(&mr - mr.adjoint())) < 1e-10);
        let (vals, _) = hermitian_eigen(&mr);
        assert!(vals.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn band_limit_warning() {
        let rough = gauss(1, 16, 0.2, &[0.0]);
        let p = deformed_product(&rough, &rough, &SkewMatrix::zero(1)).unwrap();
        assert!(p.warning.is_some());
        let smooth = gauss(1, 64, 2.0, &[0.0]);
        assert!(deformed_product(&smooth, &smooth, &SkewMatrix::zero(1)).unwrap().warning.is_none());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridFunction::new(1, 12, 1.0, vec![Complex64::new(0.0, 0.0); 12]).is_err());
        assert!(GridFunction::new(3, 4, 1.0, vec![Complex64::new(0.0, 0.0); 64]).is_err());
        let f = gauss(1, 16, 1.0, &[0.0]);
        let g = gauss(1, 32, 1.0, &[0.0]);
        assert!(deformed_product(&f, &g, &SkewMatrix::zero(1)).is_err());
    }
}
