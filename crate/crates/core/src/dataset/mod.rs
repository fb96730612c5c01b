//! Record ingestion, pre-filtering, surrogate pairing and train/validation/test splits.

mod filter;
mod io;
mod labeled;

pub use filter::{butterworth_lowpass, Biquad, Butterworth, FilterMode, FilterSpec};
pub use io::{
    load_series, read_matrix_csv, save_series, write_matrix_csv, RealizationMeta, SeriesFormat,
};
pub use labeled::{
    assemble_dataset, build_dataset, pair_surrogates, split_dataset, standardize, standardize_values, DatasetMeta,
    Item, LabeledDataset, Split, SplitSizes,
};
