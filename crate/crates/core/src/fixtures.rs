//! The two reference scripts: the discrete EVD/Haemorrhage network and the
//! hybrid EVD/Fever network.

pub const SCRIPT1: &str = include_str!("../fixtures/script1.bns");
pub const SCRIPT2: &str = include_str!("../fixtures/script2.bns");
