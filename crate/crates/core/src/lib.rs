//! Finite sites, sheaves, nerves, holonomy and geometric structures.

pub mod fincat;
pub mod fixtures;
pub mod geostruct;
pub mod holonomy;
pub mod nerve;
pub mod sheaf;
pub mod site;
