use crate::degree::Degree;
use crate::deltaspace::enumerate;
use crate::scalar::Scalar;

use super::OperatorExpr;

/// Least `q` with `deg Qu ≤ deg u + q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EssentialOrder {
    pub q: u32,
    /// `false` when `q` is only known to be an upper bound.
    pub exact: bool,
}

/// Essential order of `Q = Σ a(x) ∂^γ L*`.
///
/// Each term contributes `|γ| − ord₀(a)`, the order of the derivative minus
/// the order to which the coefficient vanishes at the origin; pullbacks
/// contribute nothing. Without pullbacks this is exact. With pullbacks the
/// value is an upper bound, upgraded to exact when some `δ^(α)` with
/// `|α| ≤ probe_depth` attains it.
pub fn essential_order<S: Scalar>(q: &OperatorExpr<S>, probe_depth: u32) -> EssentialOrder {
    let bound = q
        .terms()
        .filter_map(|(k, a)| {
            a.vanishing_order()
                .map(|v| k.derivative.order() as i64 - v as i64)
        })
        .max()
        .unwrap_or(0)
        .max(0) as u32;
    if bound == 0 || !q.has_pullback() {
        return EssentialOrder {
            q: bound,
            exact: true,
        };
    }
    let attained = enumerate(q.dim(), probe_depth).iter().any(|alpha| {
        q.apply_delta_basis(alpha).degree() == Degree::Finite(alpha.order() as i64 + bound as i64)
    });
    EssentialOrder {
        q: bound,
        exact: attained,
    }
}
