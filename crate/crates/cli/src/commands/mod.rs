pub mod evaluate;
pub mod prepare;
pub mod recommend;
pub mod sweep;
pub mod train;
