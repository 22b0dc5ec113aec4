pub mod engine;
mod lexical;
pub mod model;
pub mod query;
pub mod reify;
pub mod sparql;
pub mod store;
pub mod turtle;
pub mod vocab;

pub use lexical::SourcePosition;
