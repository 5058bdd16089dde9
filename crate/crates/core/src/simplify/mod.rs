//! Polynomial normal form and literal feasibility.

mod feas;
mod normalize;
mod poly;

use serde::{Deserialize, Serialize};

use crate::exprdag::ExprId;

pub use feas::{FeasResult, FeasibilityChecker, FourierMotzkin, NoCheck};
pub use normalize::{normalize, Normalizer, DEFAULT_MONOMIAL_BOUND};
pub use poly::{Atom, Monomial, Poly};

/// An atomic proposition or its negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub ap: ExprId,
    pub positive: bool,
}

impl Literal {
    pub fn new(ap: ExprId, positive: bool) -> Self {
        Literal { ap, positive }
    }

    pub fn negate(self) -> Self {
        Literal {
            ap: self.ap,
            positive: !self.positive,
        }
    }
}
