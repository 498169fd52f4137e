//! The input language and the command-line front end.

mod document;
mod run;
mod syntax;

pub use document::{parse, Document, EmbedDecl, SubgroupDecl};
pub use run::*;
pub use syntax::{parse_syntax, Atom, GroupDef, Item, Name, ParseError, PermGen, Pos, Statement, Syntax, WordExpr};
