pub mod cli;
pub mod dressed;
pub mod dynamics;
pub mod fock;
pub mod output;
pub mod params;
pub mod rabi;
pub mod specfun;
