//! Detection and handling of permutation and reflection symmetries in MINLPs.

pub mod error;
pub mod auto;
pub mod builders;
pub mod expr;
pub mod groups;
pub mod handle;
pub mod instances;
pub mod model;
pub mod sdg;
pub mod solve;

pub use error::{Error, Result};
pub use expr::{Expr, PatternKind, PatternMatch};
pub use model::{Constraint, ConstraintBody, Minlp, ReflectionCenters, Relation, SignedPermutation, Tag, Variable, VariableType};
pub use groups::{Classification, Factor, GroupReport};
pub use handle::{Action, BoundsBox, HandlerPlan, Setting};
pub use sdg::Mode;
pub use solve::{Limits, SolveResult, Status};
