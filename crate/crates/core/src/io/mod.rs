//! Capture files, CSV tables and run manifests.

mod capture;
mod manifest;
mod tables;

pub use capture::{
    decode_capture, decode_header, encode_capture, encode_header, full_scale_for, read_capture, write_capture,
    CaptureHeader, CAPTURE_MAGIC, CAPTURE_VERSION, FULL_SCALE_CODE, HEADER_LEN,
};
pub use manifest::RunManifest;
pub use tables::{
    format_fpga_report, read_dataset, read_features_csv, read_labels_csv, write_estimates_csv, write_features_csv,
    write_fpga_trace, write_labels_csv, write_map_csv, write_modes_csv, write_phase_csv, write_pipeline_outputs,
    ESTIMATE_COLUMNS,
};
