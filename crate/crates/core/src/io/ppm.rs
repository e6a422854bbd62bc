//! Netpbm colour images, ASCII (P3) and binary (P6), maxval 255 only.

use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{RasterImage, Rgb};

struct Header {
    binary: bool,
    width: u32,
    height: u32,
    /// Offset of the first byte after the header's final whitespace.
    data_start: usize,
}

fn skip_space_and_comments(bytes: &[u8], mut i: usize) -> usize {
    loop {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else {
            return i;
        }
    }
}

fn read_uint(bytes: &[u8], i: usize, what: &str) -> Result<(u32, usize)> {
    let i = skip_space_and_comments(bytes, i);
    let end = i + bytes[i..].iter().take_while(|b| b.is_ascii_digit()).count();
    std::str::from_utf8(&bytes[i..end])
        .ok()
        .and_then(|s| s.parse().ok())
        .map(|v| (v, end))
        .ok_or_else(|| Error::validation(format!("PPM header: bad {what}")))
}

fn header(bytes: &[u8]) -> Result<Header> {
    let binary = match bytes.get(..2) {
        Some(b"P6") => true,
        Some(b"P3") => false,
        _ => {
            let magic: String = bytes.iter().take(4).map(|b| format!("{b:02x}")).collect();
            return Err(Error::UnsupportedFormat(format!("not a P3/P6 PPM (magic bytes {magic})")));
        }
    };
    let (width, i) = read_uint(bytes, 2, "width")?;
    let (height, i) = read_uint(bytes, i, "height")?;
    let (maxval, i) = read_uint(bytes, i, "maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!("PPM maxval {maxval} (only 255 is supported)")));
    }
    if !bytes.get(i).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::validation("PPM header: missing whitespace after maxval"));
    }
    Ok(Header {
        binary,
        width,
        height,
        data_start: i + 1,
    })
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RasterImage> {
    let h = header(bytes)?;
    let n = h.width as usize * h.height as usize;
    let mut pixels: Vec<Rgb> = Vec::with_capacity(n);
    if h.binary {
        let data = &bytes[h.data_start..];
        if data.len() < 3 * n {
            return Err(Error::validation(format!(
                "PPM data truncated: {} of {} bytes",
                data.len(),
                3 * n
            )));
        }
        pixels.extend(data[..3 * n].chunks_exact(3).map(|c| [c[0], c[1], c[2]]));
    } else {
        let mut i = h.data_start;
        let mut px = [0u8; 3];
        for k in 0..3 * n {
            let (v, next) = read_uint(bytes, i, "sample").map_err(|_| {
                Error::validation(format!("PPM data: sample {k} of {} missing or malformed", 3 * n))
            })?;
            px[k % 3] = u8::try_from(v).map_err(|_| Error::validation(format!("PPM sample {v} exceeds 255")))?;
            if k % 3 == 2 {
                pixels.push(px);
            }
            i = next;
        }
    }
    RasterImage::new(h.width, h.height, pixels)
}

pub fn encode_p6(img: &RasterImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.pixels().iter().flatten());
    out
}

pub fn encode_p3(img: &RasterImage) -> Vec<u8> {
    let mut out = format!("P3\n{} {}\n255\n", img.width(), img.height());
    for row in img.pixels().chunks(img.width().max(1) as usize) {
        let line: Vec<String> = row.iter().map(|p| format!("{} {} {}", p[0], p[1], p[2])).collect();
        out.push_str(&line.join("  "));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn load_ppm(path: &Path) -> Result<RasterImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_ppm(&bytes).map_err(|e| match e {
        Error::Validation(msg) => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg,
        },
        other => other,
    })
}

/// Binary PPM.
pub fn save_ppm(path: &Path, img: &RasterImage) -> Result<()> {
    super::write_file(path, &encode_p6(img))
}
