pub mod colorings;
pub mod directed;
pub mod flow;
pub mod graph;
pub mod io;
pub mod longpath;
pub mod oracle;
pub mod packing;
pub mod undirected;
