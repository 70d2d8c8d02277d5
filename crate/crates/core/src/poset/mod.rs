//! Poset axes, direct-product grids, Möbius functions and order ideals.

mod axis;
mod explicit;
mod grid;
mod ideal;
mod set;
mod tensor;

pub use axis::{boolean_moebius, chain_moebius, AxisElement, PosetAxis, MAX_ENUMERABLE_BOOLEAN_RANK};
pub use explicit::ExplicitPoset;
pub use grid::{GridElement, PosetGrid};
pub use ideal::{combination_coefficients, top_down_coefficient_check, OrderIdeal};
pub use set::VertexSet;
pub use tensor::{SparseIntTensor, SparseRealTensor};
