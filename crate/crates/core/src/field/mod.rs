//! Exact arithmetic in GF(q) and in the truncated local field GF(q)((p)).

mod gf;
mod local;
mod text;

pub use gf::{default_modulus, gf_add, gf_mul, Field, FieldParams, GfElement, MAX_ORDER};
pub use local::{chi_pair, u, u_index_add, AbsValue, LocalFieldElement};
