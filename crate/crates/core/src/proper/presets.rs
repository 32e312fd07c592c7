//! Named finite examples of group actions with a default generating set.

use crate::cocycle::Cocycle;
use crate::error::{invalid, Result};
use crate::group::{make_group, GroupDescriptor, GroupElement};
use crate::linalg::CMatrix;
use crate::proper::frames::{induce_via_morphism, inflate_action, tensor_action, tensor_generators};
use crate::proper::galgebra::{unit_matrix, GAlgebra};
use crate::twisted::left_regular_point;

/// A finite action together with the generating subspace `R` to analyze.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: String,
    pub action: GAlgebra,
    pub generators: Vec<CMatrix>,
    /// Dual actions on twisted group algebras, where saturation and scalar
    /// fixed points are expected.
    pub dual: bool,
}

/// Every finite preset name accepted by [`preset`].
pub const FINITE_PRESETS: &[&str] = &[
    "dual:Z2",
    "dual:Z3",
    "dual:Z2xZ2",
    "dual:Z4xZ4",
    "swap",
    "trivial:Z2",
    "trivial-m2:Z2",
    "tensor:swap+swap",
    "tensor:dual:Z2+dual:Z3",
    "inflate:swap",
    "induced",
];

/// The dual action of `Ĝ ≅ G` on `C[G,ω] ⊆ B(ℓ²(G))`, implemented by the
/// multiplication operators `M_χ`.
pub fn dual_action(omega: &Cocycle) -> Result<GAlgebra> {
    let g = omega.group().clone();
    let n = g.len();
    let basis: Vec<CMatrix> = (0..n).map(|s| left_regular_point(s, omega).to_matrix()).collect();
    let elems: Vec<GroupElement> = g.elements().collect();
    let mut unitaries = Vec::with_capacity(n);
    for chi in &elems {
        let mut m = CMatrix::zeros(n, n);
        for (r, x) in elems.iter().enumerate() {
            m[(r, r)] = crate::group::dual_pair(&g, chi, x)?.to_complex();
        }
        unitaries.push(m);
    }
    let gens = g
        .generators()
        .iter()
        .map(|e| left_regular_point(g.index_of(e).unwrap(), omega).to_matrix())
        .collect();
    Ok(GAlgebra::from_unitaries(&g, n, basis, unitaries)?.with_generators(gens))
}

/// The standard cocycle on `Z_n × Z_n`, trivial cocycle otherwise.
pub fn default_cocycle(group: &GroupDescriptor) -> Result<Cocycle> {
    let orders = group.finite_orders()?;
    if orders.len() == 2 && orders[0] == orders[1] && orders[0] > 1 {
        Cocycle::standard(orders[0])
    } else {
        Cocycle::trivial(group)
    }
}

/// `Z_2` swapping the summands of `C ⊕ C`.
pub fn swap_action() -> Result<GAlgebra> {
    let g = make_group(&[2])?;
    let swap = unit_matrix(2, 0, 1) + unit_matrix(2, 1, 0);
    GAlgebra::from_unitaries(
        &g,
        2,
        vec![unit_matrix(2, 0, 0), unit_matrix(2, 1, 1)],
        vec![CMatrix::identity(2, 2), swap],
    )
}

/// The trivial action of `group` on `M_n`.
pub fn trivial_matrix_action(group: &GroupDescriptor, n: usize) -> Result<GAlgebra> {
    let mut basis = Vec::new();
    for i in 0..n {
        for j in 0..n {
            basis.push(unit_matrix(n, i, j));
        }
    }
    GAlgebra::from_unitaries(group, n, basis, vec![CMatrix::identity(n, n); group.len()])
}

fn finish(name: &str, action: GAlgebra, dual: bool) -> Preset {
    Preset {
        name: name.to_string(),
        generators: action.basis().to_vec(),
        action,
        dual,
    }
}

/// Builds a preset by name; see [`FINITE_PRESETS`].
pub fn preset(name: &str) -> Result<Preset> {
    if let Some(spec) = name.strip_prefix("dual:") {
        let group: GroupDescriptor = spec.parse()?;
        return Ok(finish(name, dual_action(&default_cocycle(&group)?)?, true));
    }
    if let Some(spec) = name.strip_prefix("trivial-m2:") {
        return Ok(finish(name, trivial_matrix_action(&spec.parse()?, 2)?, false));
    }
    if let Some(spec) = name.strip_prefix("trivial:") {
        return Ok(finish(name, trivial_matrix_action(&spec.parse()?, 1)?, false));
    }
    if let Some(spec) = name.strip_prefix("tensor:") {
        let (a, b) = spec
            .split_once('+')
            .ok_or_else(|| crate::Error::InvalidArgument("tensor preset needs two factors joined by '+'".into()))?;
        let (pa, pb) = (preset(a)?, preset(b)?);
        let action = tensor_action(&pa.action, &pb.action)?;
        let generators = tensor_generators(&pa.generators, &pb.generators);
        return Ok(Preset {
            name: name.to_string(),
            action,
            generators,
            dual: pa.dual && pb.dual,
        });
    }
    match name {
        "swap" => Ok(finish(name, swap_action()?, false)),
        "inflate:swap" => {
            let big = make_group(&[4])?;
            let action = inflate_action(&swap_action()?, &big, &[GroupElement(vec![1])])?;
            Ok(finish(name, action, false))
        }
        "induced" => {
            // C[Z2] → M2 through its regular representation, with the dual action
            // on M2 implemented by diag(1, −1)
            let omega = Cocycle::trivial(&make_group(&[2])?)?;
            let a = dual_action(&omega)?;
            let g = a.group().clone();
            let b = GAlgebra::from_unitaries(
                &g,
                2,
                trivial_matrix_action(&make_group(&[1])?, 2)?.basis().to_vec(),
                a.unitaries().expect("dual actions carry unitaries").to_vec(),
            )?;
            let phi = a.basis().to_vec();
            let generators = induce_via_morphism(&a, &b, &phi, a.basis())?;
            Ok(Preset {
                name: name.to_string(),
                action: b,
                generators,
                dual: false,
            })
        }
        _ => invalid(format!("unknown preset '{name}'")),
    }
}
