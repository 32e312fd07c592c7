//! 2-cocycles on finite abelian groups, kept exact as rational phases.
//!
//! A cocycle is stored as a full `|G|×|G|` table of phase numerators over a
//! common denominator, so the cocycle identity and the antisymmetrization
//! `h_ω(s)(t) = ω(s,t)·conj(ω(t,s))` are integer computations.

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{invalid, Result};
use crate::group::{GroupDescriptor, GroupElement};
use crate::phase::Phase;

#[derive(Clone, Debug, PartialEq)]
pub enum CocycleForm {
    /// `ω(s,t) = exp(2πi sᵀ M t)`.
    Bicharacter(Vec<Vec<Rational64>>),
    Table,
}

#[derive(Clone, Debug)]
pub struct Cocycle {
    group: GroupDescriptor,
    form: CocycleForm,
    denom: i64,
    table: Vec<i64>,
    add: Vec<usize>,
}

/// Outcome of checking the cocycle identity on all triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub valid: bool,
    pub failing_triple: Option<(GroupElement, GroupElement, GroupElement)>,
}

/// A function `G → Ĝ` stored as a table of phases `h(s)(t)`.
#[derive(Clone, Debug)]
pub struct Bicharacter {
    group: GroupDescriptor,
    denom: i64,
    table: Vec<i64>,
}

fn addition_table(group: &GroupDescriptor) -> Vec<usize> {
    let n = group.len();
    let mut add = vec![0; n * n];
    for a in 0..n {
        for b in 0..n {
            add[a * n + b] = group.add_index(a, b);
        }
    }
    add
}

fn to_common(phases: &[Phase]) -> (i64, Vec<i64>) {
    let denom = phases.iter().fold(1i64, |acc, p| acc.lcm(&p.denominator()));
    let table = phases
        .iter()
        .map(|p| {
            let r = p.rational();
            r.numer() * (denom / r.denom())
        })
        .collect();
    (denom, table)
}

impl Cocycle {
    pub fn trivial(group: &GroupDescriptor) -> Result<Cocycle> {
        let k = group.finite_orders()?.len();
        Cocycle::from_bicharacter(group, vec![vec![Rational64::zero(); k]; k])
    }

    /// Builds `ω(s,t) = exp(2πi sᵀ M t)`. Entry `M_ij` must have a denominator
    /// dividing `gcd(n_i, n_j)` so that ω is well defined on the quotient.
    pub fn from_bicharacter(group: &GroupDescriptor, matrix: Vec<Vec<Rational64>>) -> Result<Cocycle> {
        let orders = group.finite_orders()?;
        let k = orders.len();
        if matrix.len() != k || matrix.iter().any(|row| row.len() != k) {
            return invalid(format!("bicharacter matrix must be {k}x{k} for {group}"));
        }
        for i in 0..k {
            for j in 0..k {
                let g = orders[i].gcd(&orders[j]);
                if g % matrix[i][j].denom() != 0 {
                    return invalid(format!(
                        "matrix entry ({i},{j}) = {} is not well defined on Z{}xZ{}",
                        matrix[i][j], orders[i], orders[j]
                    ));
                }
            }
        }
        let n = group.len();
        let elems: Vec<GroupElement> = group.elements().collect();
        let mut phases = Vec::with_capacity(n * n);
        for s in &elems {
            for t in &elems {
                let mut q = Rational64::zero();
                for i in 0..k {
                    for j in 0..k {
                        q += matrix[i][j] * Rational64::from_integer(s.0[i] * t.0[j]);
                    }
                }
                phases.push(Phase::from_rational(q));
            }
        }
        let (denom, table) = to_common(&phases);
        Ok(Cocycle {
            group: group.clone(),
            form: CocycleForm::Bicharacter(matrix),
            denom,
            table,
            add: addition_table(group),
        })
    }

    /// Builds a cocycle from a full value table indexed `s·|G| + t`. The table is
    /// normalized so that `ω(e,e) = 1`; it is not validated here.
    pub fn from_table(group: &GroupDescriptor, phases: Vec<Phase>) -> Result<Cocycle> {
        group.finite_orders()?;
        let n = group.len();
        if phases.len() != n * n {
            return invalid(format!("value table needs {} entries, got {}", n * n, phases.len()));
        }
        let shift = phases[0];
        let normalized: Vec<Phase> = phases.iter().map(|&p| p - shift).collect();
        let (denom, table) = to_common(&normalized);
        Ok(Cocycle {
            group: group.clone(),
            form: CocycleForm::Table,
            denom,
            table,
            add: addition_table(group),
        })
    }

    /// The cocycle `Z_n × Z_n` with `M = [[0,0],[1/n,0]]`, whose symmetrizer is trivial.
    pub fn standard(n: i64) -> Result<Cocycle> {
        let group = crate::group::make_group(&[n, n])?;
        let z = Rational64::zero();
        Cocycle::from_bicharacter(&group, vec![vec![z, z], vec![Rational64::new(1, n), z]])
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn form(&self) -> &CocycleForm {
        &self.form
    }

    pub fn order(&self) -> usize {
        self.group.len()
    }

    pub fn value_index(&self, s: usize, t: usize) -> Phase {
        Phase::new(self.table[s * self.order() + t], self.denom)
    }

    pub fn value(&self, s: &GroupElement, t: &GroupElement) -> Phase {
        let si = self.group.index_of(s).expect("element of the cocycle's group");
        let ti = self.group.index_of(t).expect("element of the cocycle's group");
        self.value_index(si, ti)
    }

    pub fn add_index(&self, a: usize, b: usize) -> usize {
        self.add[a * self.order() + b]
    }

    pub fn neg_index(&self, a: usize) -> usize {
        let n = self.order();
        (0..n).find(|&b| self.add[a * n + b] == 0).expect("inverse exists")
    }

    pub fn phases(&self) -> Vec<Phase> {
        let n = self.order();
        (0..n * n).map(|i| Phase::new(self.table[i], self.denom)).collect()
    }

    /// Returns a copy with one table entry shifted by `delta` (form becomes a table).
    pub fn perturbed(&self, s: usize, t: usize, delta: Phase) -> Cocycle {
        let mut phases = self.phases();
        phases[s * self.order() + t] += delta;
        let (denom, table) = to_common(&phases);
        Cocycle {
            group: self.group.clone(),
            form: CocycleForm::Table,
            denom,
            table,
            add: self.add.clone(),
        }
    }

    /// Pointwise product `ω·ω'` (same group).
    pub fn multiply(&self, other: &Cocycle) -> Result<Cocycle> {
        if self.group != other.group {
            return invalid(format!("cocycles live on {} and {}", self.group, other.group));
        }
        let phases: Vec<Phase> = self
            .phases()
            .into_iter()
            .zip(other.phases())
            .map(|(a, b)| a + b)
            .collect();
        let form = match (&self.form, &other.form) {
            (CocycleForm::Bicharacter(a), CocycleForm::Bicharacter(b)) => CocycleForm::Bicharacter(
                a.iter()
                    .zip(b)
                    .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
                    .collect(),
            ),
            _ => CocycleForm::Table,
        };
        let (denom, table) = to_common(&phases);
        Ok(Cocycle {
            group: self.group.clone(),
            form,
            denom,
            table,
            add: self.add.clone(),
        })
    }

    /// Checks `ω(s,t)ω(s+t,r) = ω(s,t+r)ω(t,r)` on all `|G|³` triples.
    pub fn validate(&self) -> Validation {
        let n = self.order();
        let d = self.denom;
        let w = |a: usize, b: usize| self.table[a * n + b];
        for s in 0..n {
            for t in 0..n {
                let st = self.add[s * n + t];
                let wst = w(s, t);
                for r in 0..n {
                    let lhs = wst + w(st, r);
                    let rhs = w(s, self.add[t * n + r]) + w(t, r);
                    if (lhs - rhs).rem_euclid(d) != 0 {
                        return Validation {
                            valid: false,
                            failing_triple: Some((
                                self.group.element(s),
                                self.group.element(t),
                                self.group.element(r),
                            )),
                        };
                    }
                }
            }
        }
        Validation {
            valid: true,
            failing_triple: None,
        }
    }

    pub fn is_normalized(&self) -> bool {
        let n = self.order();
        (0..n).all(|t| self.table[t] % self.denom == 0 && self.table[t * n] % self.denom == 0)
    }

    /// `h_ω(s)(t) = ω(s,t)·conj(ω(t,s))`.
    pub fn antisymmetrize(&self) -> Bicharacter {
        let n = self.order();
        let d = self.denom;
        let table = (0..n * n)
            .map(|i| {
                let (s, t) = (i / n, i % n);
                (self.table[s * n + t] - self.table[t * n + s]).rem_euclid(d)
            })
            .collect();
        Bicharacter {
            group: self.group.clone(),
            denom: d,
            table,
        }
    }

    /// The symmetrizer group `S_ω = ker h_ω`.
    pub fn symmetrizer(&self) -> Vec<GroupElement> {
        self.antisymmetrize().kernel()
    }

    /// `M − Mᵀ` for bicharacter-matrix cocycles (the reported normal form).
    pub fn antisymmetric_part(&self) -> Option<Vec<Vec<Rational64>>> {
        match &self.form {
            CocycleForm::Bicharacter(m) => {
                let k = m.len();
                Some(
                    (0..k)
                        .map(|i| (0..k).map(|j| m[i][j] - m[j][i]).collect())
                        .collect(),
                )
            }
            CocycleForm::Table => None,
        }
    }

    /// Restriction to the subgroup embedded by `embed` (indices of the subgroup's
    /// elements inside this group, in the subgroup's enumeration order).
    pub fn restrict(&self, sub: &GroupDescriptor, embed: &[usize]) -> Result<Cocycle> {
        let m = sub.len();
        if embed.len() != m {
            return invalid("embedding must list one index per subgroup element");
        }
        let phases = (0..m * m)
            .map(|i| self.value_index(embed[i / m], embed[i % m]))
            .collect();
        Cocycle::from_table(sub, phases)
    }

    /// The product cocycle `ω_H·ω_η·ω_N` on `H×N`, with
    /// `((h1,n1),(h2,n2)) ↦ ω_H(h1,h2)·η(h1,n2)·ω_N(n1,n2)`.
    /// `eta` is indexed `h·|N| + n`.
    pub fn product(omega_h: &Cocycle, omega_n: &Cocycle, eta: &[Phase]) -> Result<Cocycle> {
        let h = omega_h.group();
        let nn = omega_n.group();
        let g = h.product(nn)?;
        let (a, b) = (h.len(), nn.len());
        if eta.len() != a * b {
            return invalid("bicharacter η must have |H|·|N| entries");
        }
        let total = a * b;
        let mut phases = Vec::with_capacity(total * total);
        for x in 0..total {
            let (h1, n1) = (x / b, x % b);
            for y in 0..total {
                let (h2, n2) = (y / b, y % b);
                phases.push(omega_h.value_index(h1, h2) + eta[h1 * b + n2] + omega_n.value_index(n1, n2));
            }
        }
        Cocycle::from_table(&g, phases)
    }
}

/// `ω(s,t) = c(s)c(t)·conj(c(s+t))` for `c: G → T` with `c(e) = 1`.
pub fn coboundary(group: &GroupDescriptor, c: &[Phase]) -> Result<Cocycle> {
    group.finite_orders()?;
    let n = group.len();
    if c.len() != n {
        return invalid(format!("coboundary needs {n} values, got {}", c.len()));
    }
    if !c[0].is_zero() {
        return invalid("coboundary function must satisfy c(e) = 1");
    }
    let mut phases = Vec::with_capacity(n * n);
    for s in 0..n {
        for t in 0..n {
            phases.push(c[s] + c[t] - c[group.add_index(s, t)]);
        }
    }
    Cocycle::from_table(group, phases)
}

/// Similarity test through the antisymmetrized bicharacters.
pub fn similar(a: &Cocycle, b: &Cocycle) -> Result<bool> {
    if a.group() != b.group() {
        return invalid(format!("cocycles live on {} and {}", a.group(), b.group()));
    }
    Ok(a.antisymmetrize() == b.antisymmetrize())
}

/// Exhaustive search for `c` with `b(s,t) = c(s)c(t)conj(c(s+t))·a(s,t)`, for `|G| ≤ 16`.
///
/// Any solution is determined by its values on the generators `e_j`, and
/// `n_j·c(e_j)` is forced up to an integer, so enumerating those candidate
/// values is complete.
pub fn find_similarity(a: &Cocycle, b: &Cocycle) -> Result<Option<Vec<Phase>>> {
    if a.group() != b.group() {
        return invalid(format!("cocycles live on {} and {}", a.group(), b.group()));
    }
    let group = a.group().clone();
    let n = group.len();
    if n > 16 {
        return invalid(format!("exhaustive similarity search is limited to |G| <= 16, got {n}"));
    }
    let pa = a.phases();
    let pb = b.phases();
    let rho: Vec<Phase> = pb.iter().zip(&pa).map(|(x, y)| *x - *y).collect();
    let q = rho.iter().fold(1i64, |acc, p| acc.lcm(&p.denominator()));
    let orders = group.finite_orders()?.to_vec();
    let k = orders.len();
    let gens: Vec<usize> = group
        .generators()
        .iter()
        .map(|g| group.index_of(g).unwrap())
        .collect();
    let radix: Vec<i64> = orders.iter().map(|nj| nj * q).collect();
    let total: i64 = radix.iter().product();
    if total > 4_000_000 {
        return invalid("similarity search space too large");
    }
    // predecessor along the last nonzero coordinate
    let mut pred = vec![(0usize, 0usize); n];
    for (idx, slot) in pred.iter_mut().enumerate().skip(1) {
        let g = group.element(idx);
        let j = (0..k).rev().find(|&j| g.0[j] != 0).unwrap();
        let mut p = g.0.clone();
        p[j] -= 1;
        *slot = (group.index_of(&GroupElement(p)).unwrap(), j);
    }
    for code in 0..total {
        let mut rem = code;
        let mut x = vec![Phase::ZERO; k];
        for j in (0..k).rev() {
            x[j] = Phase::new(rem % radix[j], radix[j]);
            rem /= radix[j];
        }
        let mut c = vec![Phase::ZERO; n];
        for idx in 1..n {
            let (p, j) = pred[idx];
            c[idx] = c[p] + x[j] - rho[p * n + gens[j]];
        }
        let ok = (0..n).all(|s| {
            (0..n).all(|t| c[s] + c[t] - c[group.add_index(s, t)] == rho[s * n + t])
        });
        if ok {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

impl Bicharacter {
    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn value_index(&self, s: usize, t: usize) -> Phase {
        Phase::new(self.table[s * self.group.len() + t], self.denom)
    }

    pub fn value(&self, s: &GroupElement, t: &GroupElement) -> Phase {
        self.value_index(
            self.group.index_of(s).expect("element"),
            self.group.index_of(t).expect("element"),
        )
    }

    pub fn is_trivial(&self) -> bool {
        self.table.iter().all(|v| v % self.denom == 0)
    }

    pub fn kernel(&self) -> Vec<GroupElement> {
        let n = self.group.len();
        (0..n)
            .filter(|&s| (0..n).all(|t| self.table[s * n + t] % self.denom == 0))
            .map(|s| self.group.element(s))
            .collect()
    }
}

impl PartialEq for Bicharacter {
    fn eq(&self, other: &Bicharacter) -> bool {
        self.group == other.group
            && self
                .table
                .iter()
                .zip(&other.table)
                .all(|(a, b)| a * other.denom == b * self.denom)
    }
}

impl Eq for Bicharacter {}

impl PartialEq for Cocycle {
    fn eq(&self, other: &Cocycle) -> bool {
        self.group == other.group && self.phases() == other.phases()
    }
}
