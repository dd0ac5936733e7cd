//! Local linear algebra at a place: Smith valuations and Cartan
//! decompositions over `Z_(p)`, parabolic subgroups, and flags in canonical
//! echelon form with a chart-local distance.

mod cartan;
mod flag;

pub use cartan::{cartan_decompose, is_isometry, smith_valuations, CartanDecomposition};
pub use flag::{flag_canonicalize, flag_distance, parabolic_member, Flag, ParabolicSpec};
