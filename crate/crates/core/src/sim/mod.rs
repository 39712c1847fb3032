pub mod dense;
pub mod frame;
pub mod propagate;
pub mod shots;
pub mod tableau;
pub mod validation;
