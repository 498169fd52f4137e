pub mod words;
pub mod groups;
pub mod zlinalg;
pub mod mixedwords;
pub mod equations;
pub mod cosets;
pub mod complexes;
pub mod theorems;
pub mod solver;
pub mod corpus;
pub mod cli;
