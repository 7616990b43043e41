//! Small numerical building blocks shared by the modules.

pub mod airy;
pub mod fit;
pub mod interp;
pub mod lambert;
pub mod quad;
pub mod roots;

pub use airy::{airy_ai, airy_zeros};
pub use fit::{fit_line, LineFit};
pub use interp::Pchip;
pub use lambert::lambert_w0;
pub use quad::{integrate, Quadrature};
pub use roots::brent;
