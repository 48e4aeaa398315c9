//! Reference filters the BF2 filter is compared against.

mod baf;
mod hashheat;
mod onf;

pub use baf::{baf_classify_stream, guo_stcf_classify_stream, Baf, GuoStcf, TimeSurface};
pub use hashheat::{hashheat_classify_stream, Aggregate, HashHeat, HashHeatParams};
pub use onf::{onf_classify_stream, Onf};
