//! Point counts, Euler characteristics and exponential sums for the
//! varieties attached to stable functionals on graded symplectic and
//! quadratic spaces.

pub mod ffield;
pub mod linalg;
pub mod spaces;
pub mod varieties;
pub mod count;
pub mod symbolic;
pub mod tracesum;
pub mod report;
