pub mod density;
pub mod exact;
pub mod interval;
pub mod layer;
pub mod tree;
