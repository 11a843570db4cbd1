//! Core of the Bayes Cloud modeling platform: the model script language,
//! network compilation, exact and sampling inference, model integration,
//! parameter/structure learning and the Ebola virus disease model corpus.

pub mod api;
pub mod corpus;
pub mod fixtures;
pub mod inference;
pub mod integration;
pub mod learning;
pub mod model;
pub mod script;
pub mod testutil;
