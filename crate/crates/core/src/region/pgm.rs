//! Binary PGM (P5) rasters used as region literals and render output.

use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat};

use crate::error::{Error, Result};

/// An 8-bit gray image stored row-major. In region rasters rows are time
/// ascending and columns are `x` ascending; occupancy is `gray / 255`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn occupancy(&self, row: usize, col: usize) -> f64 {
        f64::from(self.pixels[row * self.width + col]) / 255.0
    }
}

fn image_error(path: &Path, e: image::ImageError) -> Error {
    Error::Image {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Reads a binary PGM file.
pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let img = image::load_from_memory_with_format(&bytes, ImageFormat::Pnm)
        .map_err(|e| image_error(path, e))?
        .into_luma8();
    Ok(GrayImage {
        width: img.width() as usize,
        height: img.height() as usize,
        pixels: img.into_raw(),
    })
}

/// Writes a binary PGM (P5) file.
pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    if img.pixels.len() != img.width * img.height {
        return Err(Error::InvalidInput(
            "pixel buffer does not match image size".into(),
        ));
    }
    let mut out = Vec::with_capacity(img.pixels.len() + 32);
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(
            &img.pixels,
            img.width as u32,
            img.height as u32,
            ExtendedColorType::L8,
        )
        .map_err(|e| image_error(path, e))?;
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
