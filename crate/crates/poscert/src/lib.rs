//! Exact certificates of positivity for polynomials on basic
//! semialgebraic sets: Polya and Habicht denominators, Handelman
//! representations on simplices, Putinar-style quadratic module
//! certificates over compact sets, and structural tools for the
//! non-compact case.
//!
//! All arithmetic is exact over the rationals; every certificate this
//! crate produces is re-verified by expanding the claimed identity.

pub mod cert;
pub mod expr;
pub mod format;
pub mod linalg;
pub mod poly;
pub mod polya;
pub mod noncompact;
pub mod putinar;
