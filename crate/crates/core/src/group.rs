//! Finite abelian groups `Z_{n1} × … × Z_{nk}` and truncated windows of `Z^k`.
//!
//! Finite groups enumerate their elements in mixed-radix order with the last
//! coordinate running fastest, so the element order of a product group is the
//! lexicographic order of pairs. Lattice windows never wrap: sums that leave
//! the window are reported rather than reduced.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;

use crate::error::{invalid, Error, Result};
use crate::phase::Phase;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Shape {
    Finite { orders: Vec<i64> },
    Lattice { rank: usize, radius: i64 },
}

/// A finite abelian group or a truncated `Z^k` window. Both are discrete and
/// abelian, so the modular weight is identically one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupDescriptor {
    shape: Shape,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub Vec<i64>);

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Result of adding two points of a lattice window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WindowSum {
    Inside(GroupElement),
    OutOfWindow(GroupElement),
}

pub fn make_group(orders: &[i64]) -> Result<GroupDescriptor> {
    if orders.is_empty() {
        return invalid("a finite group needs at least one cyclic factor");
    }
    if let Some(bad) = orders.iter().find(|&&n| n < 1) {
        return invalid(format!("cyclic factor order must be positive, got {bad}"));
    }
    Ok(GroupDescriptor {
        shape: Shape::Finite {
            orders: orders.to_vec(),
        },
    })
}

pub fn lattice_window(rank: usize, radius: i64) -> Result<GroupDescriptor> {
    if rank < 1 {
        return invalid("lattice rank must be at least 1");
    }
    if radius < 1 {
        return invalid("lattice window radius must be at least 1");
    }
    Ok(GroupDescriptor {
        shape: Shape::Lattice { rank, radius },
    })
}

/// The character pairing `exp(2πi Σ_j g_j h_j / n_j)`.
pub fn dual_pair(group: &GroupDescriptor, g: &GroupElement, h: &GroupElement) -> Result<Phase> {
    let orders = group.finite_orders()?;
    if !group.contains(g) || !group.contains(h) {
        return invalid(format!("elements {g} and {h} do not both belong to {group}"));
    }
    let mut q = Rational64::from_integer(0);
    for ((&a, &b), &n) in g.0.iter().zip(&h.0).zip(orders) {
        q += Rational64::new((a * b).mod_floor(&n), n);
    }
    Ok(Phase::from_rational(q))
}

impl GroupDescriptor {
    pub fn is_finite(&self) -> bool {
        matches!(self.shape, Shape::Finite { .. })
    }

    pub fn rank(&self) -> usize {
        match &self.shape {
            Shape::Finite { orders } => orders.len(),
            Shape::Lattice { rank, .. } => *rank,
        }
    }

    pub fn finite_orders(&self) -> Result<&[i64]> {
        match &self.shape {
            Shape::Finite { orders } => Ok(orders),
            Shape::Lattice { .. } => invalid(format!("{self} is not a finite group")),
        }
    }

    pub fn orders(&self) -> &[i64] {
        match &self.shape {
            Shape::Finite { orders } => orders,
            Shape::Lattice { .. } => &[],
        }
    }

    pub fn radius(&self) -> Option<i64> {
        match &self.shape {
            Shape::Lattice { radius, .. } => Some(*radius),
            Shape::Finite { .. } => None,
        }
    }

    /// Number of elements (finite case) or window points (lattice case).
    pub fn len(&self) -> usize {
        match &self.shape {
            Shape::Finite { orders } => orders.iter().product::<i64>() as usize,
            Shape::Lattice { rank, radius } => ((2 * radius + 1) as usize).pow(*rank as u32),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        if g.0.len() != self.rank() {
            return false;
        }
        match &self.shape {
            Shape::Finite { orders } => g.0.iter().zip(orders).all(|(&c, &n)| (0..n).contains(&c)),
            Shape::Lattice { radius, .. } => g.0.iter().all(|c| c.abs() <= *radius),
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    /// Modular weight Δ(g); every group here is discrete abelian, hence unimodular.
    pub fn modular_weight(&self, _g: &GroupElement) -> f64 {
        1.0
    }

    fn extents(&self) -> Vec<i64> {
        match &self.shape {
            Shape::Finite { orders } => orders.clone(),
            Shape::Lattice { rank, radius } => vec![2 * radius + 1; *rank],
        }
    }

    fn offset(&self) -> i64 {
        match &self.shape {
            Shape::Finite { .. } => 0,
            Shape::Lattice { radius, .. } => *radius,
        }
    }

    pub fn element(&self, index: usize) -> GroupElement {
        let ext = self.extents();
        let off = self.offset();
        let mut rem = index as i64;
        let mut coords = vec![0; ext.len()];
        for j in (0..ext.len()).rev() {
            coords[j] = rem % ext[j] - off;
            rem /= ext[j];
        }
        GroupElement(coords)
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        if !self.contains(g) {
            return None;
        }
        let ext = self.extents();
        let off = self.offset();
        let mut idx = 0i64;
        for (c, e) in g.0.iter().zip(&ext) {
            idx = idx * e + (c + off);
        }
        Some(idx as usize)
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.len()).map(move |i| self.element(i))
    }

    /// Reduces an arbitrary integer tuple into the finite group.
    pub fn reduce(&self, coords: &[i64]) -> GroupElement {
        match &self.shape {
            Shape::Finite { orders } => GroupElement(
                coords
                    .iter()
                    .zip(orders)
                    .map(|(c, n)| c.mod_floor(n))
                    .collect(),
            ),
            Shape::Lattice { .. } => GroupElement(coords.to_vec()),
        }
    }

    /// Group addition for finite groups (componentwise mod n_j).
    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let raw: Vec<i64> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
        self.reduce(&raw)
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        let raw: Vec<i64> = a.0.iter().map(|x| -x).collect();
        self.reduce(&raw)
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.add(a, &self.neg(b))
    }

    /// Index-level addition table helpers for finite groups.
    pub fn add_index(&self, a: usize, b: usize) -> usize {
        let s = self.add(&self.element(a), &self.element(b));
        self.index_of(&s).expect("finite sum stays in the group")
    }

    pub fn neg_index(&self, a: usize) -> usize {
        self.index_of(&self.neg(&self.element(a)))
            .expect("finite negation stays in the group")
    }

    /// Addition in a lattice window; sums leaving the window are flagged.
    pub fn add_in_window(&self, a: &GroupElement, b: &GroupElement) -> WindowSum {
        let raw = GroupElement(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect());
        if self.is_finite() {
            return WindowSum::Inside(self.reduce(&raw.0));
        }
        if self.contains(&raw) {
            WindowSum::Inside(raw)
        } else {
            WindowSum::OutOfWindow(raw)
        }
    }

    /// The order of an element of a finite group (brute force).
    pub fn element_order(&self, g: &GroupElement) -> usize {
        let zero = self.identity();
        let mut acc = g.clone();
        let mut k = 1;
        while acc != zero {
            acc = self.add(&acc, g);
            k += 1;
        }
        k
    }

    /// Unit vectors `e_j`, which generate a finite group.
    pub fn generators(&self) -> Vec<GroupElement> {
        (0..self.rank())
            .map(|j| {
                let mut c = vec![0; self.rank()];
                c[j] = 1;
                self.reduce(&c)
            })
            .collect()
    }

    /// Direct product of two finite groups; element `(g, h)` has index `ig·|H| + ih`.
    pub fn product(&self, other: &GroupDescriptor) -> Result<GroupDescriptor> {
        let mut orders = self.finite_orders()?.to_vec();
        orders.extend_from_slice(other.finite_orders()?);
        make_group(&orders)
    }

    pub fn spec_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Finite { orders } => {
                let parts: Vec<String> = orders.iter().map(|n| format!("Z{n}")).collect();
                write!(f, "{}", parts.join("x"))
            }
            Shape::Lattice { rank, radius } => write!(f, "lattice:k={rank},R={radius}"),
        }
    }
}

impl FromStr for GroupDescriptor {
    type Err = Error;

    /// Accepts `"Z4xZ4"`, `"Z2xZ3"` or `"lattice:k=2,R=16"`.
    fn from_str(s: &str) -> Result<GroupDescriptor> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("lattice:") {
            let mut rank = None;
            let mut radius = None;
            for part in rest.split(',') {
                let (key, value) = part
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidArgument(format!("malformed lattice spec {s:?}")))?;
                let value: i64 = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("malformed lattice spec {s:?}")))?;
                match key.trim() {
                    "k" => rank = Some(value),
                    "R" => radius = Some(value),
                    other => return invalid(format!("unknown lattice key {other:?}")),
                }
            }
            match (rank, radius) {
                (Some(k), Some(r)) if k >= 1 => lattice_window(k as usize, r),
                _ => invalid(format!("lattice spec {s:?} needs k>=1 and R")),
            }
        } else {
            let orders: Option<Vec<i64>> = s
                .split(['x', 'X', '×'])
                .map(|p| p.trim().strip_prefix('Z').and_then(|n| n.parse().ok()))
                .collect();
            match orders {
                Some(o) => make_group(&o),
                None => invalid(format!("malformed group spec {s:?}")),
            }
        }
    }
}
