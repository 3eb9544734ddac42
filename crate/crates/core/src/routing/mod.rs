//! Routing engines implementing the simulator's `Router` interface.

pub mod dijkstra;
pub mod madrl;
pub mod qrouting;

pub use dijkstra::{dijkstra_tables, DijkstraRouter, RoutingTable};
pub use madrl::MadrlRouter;
pub use qrouting::{QRoutingConfig, QRoutingRouter, QTable};
