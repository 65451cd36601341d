pub mod oracles;
pub mod samplers;
