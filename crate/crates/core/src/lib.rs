pub mod bench;
pub mod cli;
pub mod dispatch;
pub mod engine;
pub mod model;
pub mod mql;
pub mod ntriples;
pub mod results;
pub mod routing;
pub mod shape;
pub mod sparql;
pub mod workspace;
