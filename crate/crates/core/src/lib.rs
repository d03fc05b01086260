//! Equilibrium revenue-sharing contracts between a content provider (CP) and
//! the ISPs that carry its traffic.
//!
//! The CP earns `r` per unit of demand, demand grows as `log(Σa + 1)` in the
//! ISPs' investment efforts, and each ISP pays `c_i` per unit of effort. The
//! CP leads by offering revenue shares; the ISPs follow by choosing efforts,
//! either competitively or by bargaining.
//!
//! Modules:
//! - [`lambertw`]: principal-branch Lambert W, the special function behind
//!   every closed-form equilibrium.
//! - [`model`]: domain types and the utility / demand functions.
//! - [`closed_form`]: explicit equilibrium formulas per scenario.
//! - [`oracle`]: brute-force numerical solvers that re-derive the equilibria
//!   without Lambert W.
//! - [`bargaining`]: Nash bargaining splits and Shapley values.
//! - [`compare`]: scenario comparison reports.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bargaining;
pub mod closed_form;
pub mod compare;
pub mod error;
pub mod lambertw;
pub mod model;
pub mod oracle;

pub use bargaining::{BargainingResult, DisagreementPolicy, ShapleyReport, ShareSplit};
pub use closed_form::{Branch, ContinuumEquilibrium, MultiCpMode, ScenarioKind};
pub use compare::{ComparisonReport, MetricKey, Metrics, OrderingCheck, Relation};
pub use error::{Error, Result};
pub use lambertw::{lambert_w0, log_x_over_w, WConfig};
pub use model::{Contract, EffortProfile, EquilibriumOutcome, MarketParams, ValidationReport};
pub use oracle::{KktCase, SearchConfig};
