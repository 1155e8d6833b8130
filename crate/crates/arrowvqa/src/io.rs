//! File formats: canonical JSON, PNG and content digests.

use std::fs;
use std::io::{self, Cursor, Write};
use std::path::Path;

use arrowvqa_core::render::RenderedImage;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Pretty JSON with a trailing newline. Struct fields keep declaration order
/// and floats use the shortest representation that reads back exactly, so
/// equal values always give equal bytes.
pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

/// RGB8 PNG with fixed encoder settings.
pub fn encode_png(image: &RenderedImage) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, image.width, image.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Balanced);
        let mut w = enc.write_header().expect("in-memory write");
        w.write_image_data(&image.pixels).expect("in-memory write");
        w.finish().expect("in-memory write");
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum PngError {
    #[error(transparent)]
    Decode(#[from] png::DecodingError),
    #[error("expected 8-bit RGB, found {0:?} at {1:?}")]
    Format(png::ColorType, png::BitDepth),
}

pub fn decode_png(bytes: &[u8]) -> Result<RenderedImage, PngError> {
    let mut reader = png::Decoder::new(Cursor::new(bytes)).read_info()?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader.next_frame(&mut buf)?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(PngError::Format(info.color_type, info.bit_depth));
    }
    buf.truncate(info.buffer_size());
    Ok(RenderedImage::new(info.width, info.height, buf).expect("decoder sized the buffer"))
}

/// Writes via a temporary sibling and a rename, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
    }
    fs::rename(&tmp, path)
}
