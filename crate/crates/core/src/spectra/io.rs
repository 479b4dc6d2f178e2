//! `HDG1` binary: `"HDG1"`, `u32` side, `u32` reserved (zero), four zero
//! bytes, then `side * side` little-endian `f64` in row-major order.
//!
//! CSV: one image row per line, comma-separated, LF endings.

use std::io::{Read, Write};

use super::{ImageGrid, Result, SpectraError};

pub const HDG1_MAGIC: &[u8; 4] = b"HDG1";
pub const HDG1_HEADER_LEN: usize = 16;

pub fn write_hdg1<W: Write>(image: &ImageGrid, mut w: W) -> Result<()> {
    let side = u32::try_from(image.side()).map_err(|_| SpectraError::Format("side exceeds u32".into()))?;
    let mut buf = Vec::with_capacity(HDG1_HEADER_LEN + 8 * image.pixels());
    buf.extend_from_slice(HDG1_MAGIC);
    buf.extend_from_slice(&side.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&[0u8; 4]);
    for v in image.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_hdg1<R: Read>(mut r: R) -> Result<ImageGrid> {
    let mut header = [0u8; HDG1_HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|_| SpectraError::Format("truncated header".into()))?;
    if &header[..4] != HDG1_MAGIC {
        return Err(SpectraError::Format("bad magic".into()));
    }
    let side = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    if u32::from_le_bytes(header[8..12].try_into().unwrap()) != 0 || header[12..] != [0; 4] {
        return Err(SpectraError::Format("reserved bytes must be zero".into()));
    }
    if !side.is_power_of_two() {
        return Err(SpectraError::NotPowerOfTwo(side));
    }
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != 8 * side * side {
        return Err(SpectraError::Format(format!(
            "payload is {} bytes, expected {}",
            payload.len(),
            8 * side * side
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ImageGrid::new(side, values)
}

pub fn write_csv<W: Write>(image: &ImageGrid, mut w: W) -> Result<()> {
    let mut out = String::new();
    for row in image.values().chunks(image.side()) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_csv<R: Read>(mut r: R) -> Result<ImageGrid> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        rows += 1;
        for cell in line.split(',') {
            let v = cell
                .trim()
                .parse::<f64>()
                .map_err(|e| SpectraError::Format(format!("line {}: {e}", i + 1)))?;
            values.push(v);
        }
    }
    ImageGrid::new(rows, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ImageGrid {
        ImageGrid::new(2, vec![0.1, -2.5, 1e-300, 7.0]).unwrap()
    }

    #[test]
    fn binary_round_trip_and_layout() {
        let mut buf = Vec::new();
        write_hdg1(&sample(), &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 32);
        assert_eq!(&buf[..4], b"HDG1");
        assert_eq!(&buf[4..8], &2u32.to_le_bytes());
        assert_eq!(&buf[16..24], &0.1f64.to_le_bytes());
        assert_eq!(read_hdg1(buf.as_slice()).unwrap(), sample());
    }

    #[test]
    fn binary_rejects_corruption() {
        let mut buf = Vec::new();
        write_hdg1(&sample(), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_hdg1(bad.as_slice()).is_err());
        assert!(read_hdg1(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[4] = 3;
        assert!(read_hdg1(bad.as_slice()).is_err());
        let mut bad = buf;
        bad[9] = 1;
        assert!(read_hdg1(bad.as_slice()).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), sample());
        assert!(!buf.contains(&b'\r'));
    }
}
