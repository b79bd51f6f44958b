//! Online token colouring on graphs: the game engine, strategies for both
//! players, an online-perfection recogniser, exact solvers and the real-line
//! interval game.

pub mod catalog;
pub mod engine;
pub mod graph;
pub mod line;
pub mod perfection;
pub mod solver;
pub mod strategies;
