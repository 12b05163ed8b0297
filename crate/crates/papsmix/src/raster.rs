//! 8-bit PNG input and output: RGB images, grayscale heatmaps and masks.

use std::io::Cursor;
use std::path::Path;

use papsmix_core::{Grid, Role, SpectralCube};

use crate::error::{read_file, Error, Result};

pub fn decode_png(bytes: &[u8], path: &Path) -> Result<SpectralCube> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(path, format!("malformed PNG: {e}")))?;
    let (color, depth) = {
        let info = reader.info();
        (info.color_type, info.bit_depth)
    };
    if depth != png::BitDepth::Eight {
        return Err(Error::format(
            path,
            format!("unsupported bit depth {:?}, expected 8-bit RGB", depth),
        ));
    }
    if color != png::ColorType::Rgb {
        return Err(Error::format(
            path,
            format!("unsupported colour type {:?}, expected 8-bit RGB", color),
        ));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(path, format!("malformed PNG: {e}")))?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let grid = Grid::new(w, h);
    let mut data = vec![0.0; 3 * grid.len()];
    for y in 0..h {
        let row = &buf[y * frame.line_size..y * frame.line_size + 3 * w];
        for x in 0..w {
            for c in 0..3 {
                data[c * grid.len() + grid.index(x, y)] = row[3 * x + c] as f64 / 255.0;
            }
        }
    }
    Ok(SpectralCube::from_planes(grid, 3, Role::Intensity, data)?)
}

pub fn read_png(path: &Path) -> Result<SpectralCube> {
    decode_png(&read_file(path)?, path)
}

fn encode(width: usize, height: usize, color: png::ColorType, pixels: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("in-memory PNG header");
        writer.write_image_data(pixels).expect("in-memory PNG data");
    }
    out
}

pub fn encode_gray(grid: Grid, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), grid.len());
    encode(grid.width, grid.height, png::ColorType::Grayscale, pixels)
}

fn quantise(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Encodes a 3-channel cube with samples in `[0, 1]` as RGB.
pub fn encode_rgb(cube: &SpectralCube) -> Result<Vec<u8>> {
    if cube.channels() != 3 {
        return Err(papsmix_core::Error::ChannelMismatch {
            expected: 3,
            found: cube.channels(),
        }
        .into());
    }
    let n = cube.pixels();
    let mut pixels = Vec::with_capacity(3 * n);
    for i in 0..n {
        for c in 0..3 {
            pixels.push(quantise(cube.plane(c)[i]));
        }
    }
    Ok(encode(cube.width(), cube.height(), png::ColorType::Rgb, &pixels))
}

/// Grayscale map of `plane` with `[0, q]` stretched to `[0, 255]`.
pub fn heatmap(plane: &[f64], q: f64) -> Vec<u8> {
    plane.iter().map(|v| quantise(v / q)).collect()
}
