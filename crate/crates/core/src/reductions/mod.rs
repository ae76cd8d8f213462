pub mod constructions;
pub mod p3;
pub mod sparse;
