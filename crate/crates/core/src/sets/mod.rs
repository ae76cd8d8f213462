pub mod clopen;
pub mod exit;
pub mod expr;
pub mod localize;
pub mod member;
