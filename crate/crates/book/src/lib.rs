//! Doc-test harness for the guide in `book/src`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/qcore.md")]
pub mod qcore {}

#[doc = include_str!("../../../book/src/nanowire.md")]
pub mod nanowire {}

#[doc = include_str!("../../../book/src/perturb.md")]
pub mod perturb {}

#[doc = include_str!("../../../book/src/drivebus.md")]
pub mod drivebus {}

#[doc = include_str!("../../../book/src/openqs.md")]
pub mod openqs {}

#[doc = include_str!("../../../book/src/ghzgen.md")]
pub mod ghzgen {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
