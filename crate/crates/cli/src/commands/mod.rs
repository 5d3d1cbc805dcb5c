pub mod accuracy;
pub mod calibrate;
pub mod eval;
pub mod localize;
pub mod simulate;
pub mod train;
