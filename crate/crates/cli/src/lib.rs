//! The `tokencolor` command-line tool and its HTTP session service.

pub mod cli;
pub mod server;
