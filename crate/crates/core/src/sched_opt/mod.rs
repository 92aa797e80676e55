//! Executable optimality machinery for LIFO with pushout.
//!
//! Wait vectors of buffer policies are compared through weak
//! supermajorization; T-transforms and single-entry scalings move one policy
//! toward serve-newest/evict-oldest one interchange at a time, and trace
//! checkers verify the no-crossing properties that characterize it.

mod enumerate;
mod interchange;
mod majorize;
mod trace_props;

pub use enumerate::{
    for_each_assignment, lifo_po_assignment, random_assignment, random_instance, wait_vector,
    Assignment, Instance,
};
pub use interchange::{interchange_argument, InterchangeStep, ProofTrace};
pub use majorize::{
    convex_order_check, s_scale, t_transform, weak_supermajorizes, ExtendedWaitVector, WaitEntry,
};
pub use trace_props::{
    lifo_po_trace_properties, CrossingProperty, TraceViolation, ViolationReport,
};
