use std::fs;
use std::path::{Path, PathBuf};

use super::{Mask, ScalarGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    /// Binary PGM (P5), 8- or 16-bit big-endian samples.
    Pgm,
    /// Grayscale PNG, 8- or 16-bit.
    PngGray,
    /// Text header plus raw little-endian payload, x-fastest.
    MhdRaw,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("pgm") => Ok(ImageFormat::Pgm),
            Some("png") => Ok(ImageFormat::PngGray),
            Some("mhd") => Ok(ImageFormat::MhdRaw),
            _ => Err(Error::validation(format!(
                "cannot infer image format from {}",
                path.display()
            ))),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "pgm" => Ok(ImageFormat::Pgm),
            "png" | "png-gray" => Ok(ImageFormat::PngGray),
            "mhd" | "mhd-raw" => Ok(ImageFormat::MhdRaw),
            other => Err(Error::validation(format!("unknown image format '{other}'"))),
        }
    }
}

/// Loads a grid from disk. Missing spacing metadata defaults to 1 mm per axis.
pub fn load_grid(path: impl AsRef<Path>, format: ImageFormat) -> Result<ScalarGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        ImageFormat::MhdRaw => {
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            decode_mhd(&bytes, Some(&dir))
        }
        _ => decode_grid(&bytes, format),
    }
}

pub fn load_grid_auto(path: impl AsRef<Path>) -> Result<ScalarGrid> {
    let path = path.as_ref();
    load_grid(path, ImageFormat::from_path(path)?)
}

/// Decodes an in-memory image. MHD payloads must be inline
/// (`ElementDataFile = LOCAL`).
pub fn decode_grid(bytes: &[u8], format: ImageFormat) -> Result<ScalarGrid> {
    match format {
        ImageFormat::Pgm => decode_pgm(bytes),
        ImageFormat::PngGray => decode_png(bytes),
        ImageFormat::MhdRaw => decode_mhd(bytes, None),
    }
}

/// Encodes a grid in-memory. For MHD the payload is written inline (`LOCAL`).
pub fn encode_grid(grid: &ScalarGrid, format: ImageFormat) -> Result<Vec<u8>> {
    match format {
        ImageFormat::Pgm => encode_pgm(grid),
        ImageFormat::PngGray => encode_png(grid),
        ImageFormat::MhdRaw => {
            let (elem, payload) = float_payload(grid);
            let mut out = mhd_header(grid.dims(), grid.spacing(), grid.origin(), elem, "LOCAL").into_bytes();
            out.extend_from_slice(&payload);
            Ok(out)
        }
    }
}

/// Writes a grid. 8-bit PGM/PNG when all values fit in 0..=255 after rounding,
/// 16-bit otherwise; MHD stores `MET_FLOAT` with a sibling `.raw` file.
pub fn save_grid(grid: &ScalarGrid, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        ImageFormat::MhdRaw => {
            let (elem, payload) = float_payload(grid);
            write_mhd(path, grid.dims(), grid.spacing(), grid.origin(), elem, &payload)
        }
        _ => {
            let bytes = encode_grid(grid, format)?;
            fs::write(path, bytes).map_err(|e| Error::io(path, e))
        }
    }
}

/// Writes a mask as 0/255 PGM or PNG (2D only) or `MET_UCHAR` 0/1 MHD.
pub fn save_mask(mask: &Mask, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        ImageFormat::Pgm => {
            if mask.dims().len() != 2 {
                return Err(Error::validation("PGM masks must be 2D"));
            }
            let mut out = format!("P5\n{} {}\n255\n", mask.dims()[0], mask.dims()[1]).into_bytes();
            out.extend(mask.labels().iter().map(|&b| if b { 255u8 } else { 0 }));
            fs::write(path, out).map_err(|e| Error::io(path, e))
        }
        ImageFormat::MhdRaw => {
            let nd = mask.dims().len();
            let payload: Vec<u8> = mask.labels().iter().map(|&b| u8::from(b)).collect();
            write_mhd(path, mask.dims(), &vec![1.0; nd], &vec![0.0; nd], "MET_UCHAR", &payload)
        }
        ImageFormat::PngGray => {
            if mask.dims().len() != 2 {
                return Err(Error::validation("PNG masks must be 2D"));
            }
            let pixels = mask.labels().iter().map(|&b| if b { 255u8 } else { 0 }).collect();
            fs::write(path, png_from_gray8(mask.dims()[0], mask.dims()[1], pixels)).map_err(|e| Error::io(path, e))
        }
    }
}

/// Loads a mask: any nonzero voxel is foreground.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let grid = load_grid_auto(path)?;
    Mask::new(grid.dims().to_vec(), grid.values().iter().map(|&v| v != 0.0).collect())
}

// --- PGM ---------------------------------------------------------------

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(start, "unexpected end of header"));
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::format(start, "header is not ASCII"))?;
        Ok((start, s))
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let (at, tok) = self.token()?;
        tok.parse::<usize>()
            .map_err(|_| Error::format(at, format!("invalid {what} '{tok}'")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<ScalarGrid> {
    let mut cur = Cursor { bytes, pos: 0 };
    let (at, magic) = cur.token()?;
    if magic != "P5" {
        return Err(Error::format(at, format!("expected P5 magic, found '{magic}'")));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::format(maxval_at, "zero image extent"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(maxval_at, format!("maxval {maxval} out of range")));
    }
    // exactly one whitespace byte separates the header from the raster
    if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
        return Err(Error::format(cur.pos, "missing raster data"));
    }
    let data_start = cur.pos + 1;
    let n = width * height;
    let bps = if maxval < 256 { 1 } else { 2 };
    let need = n * bps;
    let data = &bytes[data_start.min(bytes.len())..];
    if data.len() < need {
        return Err(Error::format(
            data_start + data.len(),
            format!("raster truncated: expected {need} bytes, found {}", data.len()),
        ));
    }
    let values = if bps == 1 {
        data[..n].iter().map(|&b| f64::from(b)).collect()
    } else {
        data[..need]
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])))
            .collect()
    };
    ScalarGrid::with_unit_spacing(vec![width, height], values)
}

fn quantize(grid: &ScalarGrid) -> (bool, Vec<u16>) {
    let q: Vec<u16> = grid
        .values()
        .iter()
        .map(|v| v.round().clamp(0.0, 65535.0) as u16)
        .collect();
    let wide = q.iter().any(|&v| v > 255);
    (wide, q)
}

fn encode_pgm(grid: &ScalarGrid) -> Result<Vec<u8>> {
    if grid.ndim() != 2 {
        return Err(Error::validation("PGM images must be 2D"));
    }
    let (wide, q) = quantize(grid);
    let maxval = if wide { 65535 } else { 255 };
    let mut out = format!("P5\n{} {}\n{maxval}\n", grid.dims()[0], grid.dims()[1]).into_bytes();
    if wide {
        for v in q {
            out.extend_from_slice(&v.to_be_bytes());
        }
    } else {
        out.extend(q.into_iter().map(|v| v as u8));
    }
    Ok(out)
}

// --- PNG ---------------------------------------------------------------

fn decode_png(bytes: &[u8]) -> Result<ScalarGrid> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format(0, format!("invalid PNG: {e}")))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values: Vec<f64> = match img {
        image::DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(f64::from).collect(),
        image::DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(f64::from).collect(),
        other => {
            return Err(Error::format(
                0,
                format!("PNG must be single-channel gray, found {:?}", other.color()),
            ))
        }
    };
    ScalarGrid::with_unit_spacing(vec![w, h], values)
}

fn encode_png(grid: &ScalarGrid) -> Result<Vec<u8>> {
    if grid.ndim() != 2 {
        return Err(Error::validation("PNG images must be 2D"));
    }
    let (w, h) = (grid.dims()[0] as u32, grid.dims()[1] as u32);
    let (wide, q) = quantize(grid);
    let img = if wide {
        image::DynamicImage::ImageLuma16(image::ImageBuffer::from_raw(w, h, q).expect("buffer sized from dims"))
    } else {
        image::DynamicImage::ImageLuma8(
            image::ImageBuffer::from_raw(w, h, q.into_iter().map(|v| v as u8).collect())
                .expect("buffer sized from dims"),
        )
    };
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::validation(format!("PNG encoding failed: {e}")))?;
    Ok(out.into_inner())
}

/// Encodes 8-bit gray pixels as PNG.
pub(crate) fn png_from_gray8(width: usize, height: usize, pixels: Vec<u8>) -> Vec<u8> {
    let img = image::DynamicImage::ImageLuma8(
        image::ImageBuffer::from_raw(width as u32, height as u32, pixels).expect("pixel count matches extent"),
    );
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .expect("in-memory PNG encoding");
    out.into_inner()
}

// --- MHD / RAW ---------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ElementType {
    UChar,
    UShort,
    Float,
}

impl ElementType {
    fn size(self) -> usize {
        match self {
            ElementType::UChar => 1,
            ElementType::UShort => 2,
            ElementType::Float => 4,
        }
    }
}

struct MhdHeader {
    dims: Vec<usize>,
    spacing: Option<Vec<f64>>,
    origin: Option<Vec<f64>>,
    element: ElementType,
    data_file: String,
    /// byte offset just past the header (start of an inline payload)
    end: usize,
}

fn parse_floats(value: &str, at: usize, key: &str) -> Result<Vec<f64>> {
    value
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::format(at, format!("invalid number '{t}' in {key}")))
        })
        .collect()
}

fn parse_mhd_header(bytes: &[u8]) -> Result<MhdHeader> {
    let mut ndims = None;
    let mut dims = None;
    let mut spacing = None;
    let mut origin = None;
    let mut element = None;
    let mut data_file = None;
    let mut pos = 0;
    while pos < bytes.len() {
        let line_end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map_or(bytes.len(), |i| pos + i);
        let at = pos;
        let raw = std::str::from_utf8(&bytes[pos..line_end])
            .map_err(|_| Error::format(at, "header line is not valid text"))?;
        pos = (line_end + 1).min(bytes.len());
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::format(at, format!("expected 'Key = Value', found '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "NDims" => {
                ndims = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| Error::format(at, format!("invalid NDims '{value}'")))?,
                )
            }
            "DimSize" => {
                let d = value
                    .split_whitespace()
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::format(at, format!("invalid DimSize '{value}'")))?;
                dims = Some(d);
            }
            "ElementSpacing" | "ElementSize" => spacing = Some(parse_floats(value, at, key)?),
            "Offset" | "Origin" | "Position" => origin = Some(parse_floats(value, at, key)?),
            "ElementType" => {
                element = Some(match value {
                    "MET_UCHAR" => ElementType::UChar,
                    "MET_USHORT" => ElementType::UShort,
                    "MET_FLOAT" => ElementType::Float,
                    other => return Err(Error::format(at, format!("unsupported ElementType '{other}'"))),
                })
            }
            "BinaryDataByteOrderMSB" | "ElementByteOrderMSB" => {
                if value.eq_ignore_ascii_case("true") {
                    return Err(Error::format(at, "big-endian payloads are not supported"));
                }
            }
            "ElementDataFile" => {
                data_file = Some(value.to_string());
                break;
            }
            _ => {}
        }
    }
    let end = pos;
    let dims = dims.ok_or_else(|| Error::format(end, "missing DimSize"))?;
    let nd = ndims.unwrap_or(dims.len());
    if nd != dims.len() || !(nd == 2 || nd == 3) {
        return Err(Error::format(
            0,
            format!("NDims {nd} inconsistent with DimSize {dims:?}"),
        ));
    }
    for (name, v) in [("ElementSpacing", &spacing), ("Offset", &origin)] {
        if let Some(v) = v {
            if v.len() != nd {
                return Err(Error::format(0, format!("{name} needs {nd} entries")));
            }
        }
    }
    Ok(MhdHeader {
        dims,
        spacing,
        origin,
        element: element.ok_or_else(|| Error::format(end, "missing ElementType"))?,
        data_file: data_file.ok_or_else(|| Error::format(end, "missing ElementDataFile"))?,
        end,
    })
}

fn decode_mhd(bytes: &[u8], dir: Option<&Path>) -> Result<ScalarGrid> {
    let header = parse_mhd_header(bytes)?;
    let external;
    let (payload, base) = if header.data_file == "LOCAL" {
        (&bytes[header.end..], header.end)
    } else {
        let dir = dir.ok_or_else(|| Error::format(header.end, "in-memory MHD must use ElementDataFile = LOCAL"))?;
        let raw_path: PathBuf = dir.join(&header.data_file);
        external = fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
        (&external[..], 0)
    };
    let n: usize = header.dims.iter().product();
    let size = header.element.size();
    if payload.len() < n * size {
        return Err(Error::format(
            base + payload.len(),
            format!(
                "payload truncated: expected {} bytes ({n} voxels), found {}",
                n * size,
                payload.len()
            ),
        ));
    }
    let payload = &payload[..n * size];
    let values: Vec<f64> = match header.element {
        ElementType::UChar => payload.iter().map(|&b| f64::from(b)).collect(),
        ElementType::UShort => payload
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_le_bytes([c[0], c[1]])))
            .collect(),
        ElementType::Float => payload
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect(),
    };
    let nd = header.dims.len();
    ScalarGrid::new(
        header.dims,
        header.spacing.unwrap_or_else(|| vec![1.0; nd]),
        header.origin.unwrap_or_else(|| vec![0.0; nd]),
        values,
    )
    .map_err(|e| match e {
        Error::Validation(m) => Error::format(0, m),
        other => other,
    })
}

fn join(v: impl IntoIterator<Item = impl ToString>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn mhd_header(dims: &[usize], spacing: &[f64], origin: &[f64], element: &str, data: &str) -> String {
    format!(
        "ObjectType = Image\nNDims = {}\nBinaryData = True\nBinaryDataByteOrderMSB = False\n\
         Offset = {}\nElementSpacing = {}\nDimSize = {}\nElementType = {element}\n\
         ElementDataFile = {data}\n",
        dims.len(),
        join(origin),
        join(spacing),
        join(dims),
    )
}

fn float_payload(grid: &ScalarGrid) -> (&'static str, Vec<u8>) {
    let mut out = Vec::with_capacity(grid.len() * 4);
    for &v in grid.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    ("MET_FLOAT", out)
}

fn write_mhd(
    path: &Path,
    dims: &[usize],
    spacing: &[f64],
    origin: &[f64],
    element: &str,
    payload: &[u8],
) -> Result<()> {
    let raw_path = path.with_extension("raw");
    let raw_name = raw_path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::validation(format!("bad output path {}", path.display())))?
        .to_string();
    fs::write(&raw_path, payload).map_err(|e| Error::io(&raw_path, e))?;
    fs::write(path, mhd_header(dims, spacing, origin, element, &raw_name)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_pgm_loads() {
        let mut bytes = b"P5\n# comment\n64 64\n255\n".to_vec();
        bytes.extend(std::iter::repeat(7u8).take(64 * 64));
        let g = decode_grid(&bytes, ImageFormat::Pgm).unwrap();
        assert_eq!(g.dims(), &[64, 64]);
        assert!(g.values().iter().all(|&v| v == 7.0));
        assert_eq!(g.spacing(), &[1.0, 1.0]);
    }

    #[test]
    fn sixteen_bit_pgm_is_big_endian() {
        let mut bytes = b"P5 2 1 65535\n".to_vec();
        bytes.extend_from_slice(&[0x01, 0x02, 0xff, 0x00]);
        let g = decode_grid(&bytes, ImageFormat::Pgm).unwrap();
        assert_eq!(g.values(), &[258.0, 65280.0]);
    }

    #[test]
    fn bad_pgm_header_reports_offset() {
        let err = decode_grid(b"P5\n12 x\n255\n", ImageFormat::Pgm).unwrap_err();
        match err {
            Error::Format { offset, .. } => assert_eq!(offset, 6),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            decode_grid(b"P2\n1 1\n255\n0", ImageFormat::Pgm),
            Err(Error::Format { offset: 0, .. })
        ));
    }

    #[test]
    fn mhd_with_ushort_payload() {
        let dir = tempfile::tempdir().unwrap();
        let header = "NDims = 3\nDimSize = 10 10 4\nElementSpacing = 0.5 0.5 2.0\n\
                      ElementType = MET_USHORT\nElementDataFile = vol.raw\n";
        let values: Vec<u16> = (0..400u16).map(|i| i * 157).collect();
        let raw: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(dir.path().join("vol.mhd"), header).unwrap();
        fs::write(dir.path().join("vol.raw"), &raw).unwrap();
        let g = load_grid(dir.path().join("vol.mhd"), ImageFormat::MhdRaw).unwrap();
        assert_eq!(g.dims(), &[10, 10, 4]);
        assert_eq!(g.spacing(), &[0.5, 0.5, 2.0]);
        assert_eq!(g.len(), 400);
        let back: Vec<u16> = g.values().iter().map(|&v| v as u16).collect();
        assert_eq!(back, values);

        fs::write(dir.path().join("vol.raw"), &raw[..798]).unwrap();
        let err = load_grid(dir.path().join("vol.mhd"), ImageFormat::MhdRaw).unwrap_err();
        assert!(matches!(err, Error::Format { offset: 798, .. }), "{err:?}");
    }

    #[test]
    fn mhd_without_spacing_defaults_to_unit() {
        let mut bytes = b"NDims = 2\nDimSize = 2 2\nElementType = MET_UCHAR\nElementDataFile = LOCAL\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4]);
        let g = decode_grid(&bytes, ImageFormat::MhdRaw).unwrap();
        assert_eq!(g.spacing(), &[1.0, 1.0]);
        assert_eq!(g.values(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_grid("/nonexistent/x.pgm", ImageFormat::Pgm).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn png_gray_roundtrip() {
        let g = ScalarGrid::with_unit_spacing(vec![3, 2], vec![0.0, 10.0, 20.0, 30.0, 40.0, 255.0]).unwrap();
        let bytes = encode_grid(&g, ImageFormat::PngGray).unwrap();
        assert_eq!(decode_grid(&bytes, ImageFormat::PngGray).unwrap(), g);
        assert!(decode_grid(b"not a png", ImageFormat::PngGray).is_err());
    }

    #[test]
    fn mask_edge_cases_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let empty = Mask::empty(vec![9, 7]).unwrap();
        let mut single = empty.clone();
        single.set([3, 4, 0], true);
        for fmt in [ImageFormat::Pgm, ImageFormat::MhdRaw] {
            for m in [&empty, &single] {
                let p = dir.path().join(if fmt == ImageFormat::Pgm { "m.pgm" } else { "m.mhd" });
                save_mask(m, &p, fmt).unwrap();
                assert_eq!(&load_mask(&p).unwrap(), m);
            }
        }
        assert_eq!(single.count(), 1);
    }

    #[test]
    fn unwritable_mask_path_is_io_error() {
        let m = Mask::empty(vec![2, 2]).unwrap();
        let err = save_mask(&m, "/nonexistent-dir/m.pgm", ImageFormat::Pgm).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    fn arb_mask() -> impl Strategy<Value = Mask> {
        prop_oneof![
            proptest::collection::vec(any::<bool>(), 32 * 32).prop_map(|l| Mask::new(vec![32, 32], l).unwrap()),
            proptest::collection::vec(any::<bool>(), 5 * 4 * 3).prop_map(|l| Mask::new(vec![5, 4, 3], l).unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn mask_roundtrip_identity(m in arb_mask()) {
            let dir = tempfile::tempdir().unwrap();
            let mhd = dir.path().join("m.mhd");
            save_mask(&m, &mhd, ImageFormat::MhdRaw).unwrap();
            prop_assert_eq!(&load_mask(&mhd).unwrap(), &m);
            if m.dims().len() == 2 {
                let pgm = dir.path().join("m.pgm");
                save_mask(&m, &pgm, ImageFormat::Pgm).unwrap();
                prop_assert_eq!(&load_mask(&pgm).unwrap(), &m);
            }
        }
    }
}
