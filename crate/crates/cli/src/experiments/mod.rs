pub mod anderson;
pub mod chain;
pub mod detection;
pub mod exchange;
pub mod fit;
pub mod larmor;
pub mod rwa;
