//! Reading and writing point clouds, labels, scaling records and images.

mod ipmx;
mod pnm;
mod tables;

pub use ipmx::{decode_ipmx, encode_ipmx, read_ipmx, write_ipmx, IpmxDtype, IPMX_MAGIC, IPMX_VERSION};
pub use pnm::{decode_pnm, preprocess, read_image_pnm, resize_box, ImageDims};
pub use tables::{read_labels_csv, read_scaling_csv, write_labels_csv, write_scaling_csv, ScalingRecord};
