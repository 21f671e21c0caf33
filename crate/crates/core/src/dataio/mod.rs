//! Feature matrices, the DFEL file format, and sampling utilities.

mod binary;
mod csv_io;
mod matrix;
mod sampling;
mod synth;

pub use binary::{decode_features, encode_features, read_features, write_features, FORMAT_VERSION, MAGIC};
pub use csv_io::{read_csv, write_csv};
pub use matrix::{concat_features, DimSpan, FeatureMatrix, Labels};
pub use sampling::{split_features, stratified_folds, stratified_subsample, SplitSpec, Splits};
pub use synth::synth_mixture;
