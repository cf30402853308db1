//! 8-bit binary PGM heatmaps of space-time fields.

use crate::kinetics::NA_REVERSAL;

use super::IoError;

/// Linear gray map `[lo, hi] → [0, 255]`, clipped outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrayMap {
    pub lo: f64,
    pub hi: f64,
}

impl Default for GrayMap {
    /// `[0, v_Na]`.
    fn default() -> Self {
        Self {
            lo: 0.0,
            hi: NA_REVERSAL,
        }
    }
}

impl GrayMap {
    pub fn level(&self, u: f64) -> u8 {
        let t = ((u - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        (t * 255.0).round() as u8
    }
}

/// Renders snapshot rows `[time, u_0, ..., u_M]` as a P5 image: one column
/// per snapshot (time grows to the right) and one row per node, with `x = 1`
/// at the top and `x = 0` at the bottom.
pub fn heatmap_pgm(rows: &[Vec<f64>], map: GrayMap) -> Result<Vec<u8>, IoError> {
    let width = rows.len();
    let nodes = rows.first().map_or(0, |r| r.len().saturating_sub(1));
    if width == 0 || nodes == 0 {
        return Err(IoError::Format("empty snapshot table".into()));
    }
    if let Some(k) = rows.iter().position(|r| r.len() != nodes + 1) {
        return Err(IoError::Ragged {
            line: k + 1,
            expected: nodes + 1,
            got: rows[k].len(),
        });
    }
    if !(map.hi > map.lo) {
        return Err(IoError::Format(format!(
            "empty gray range [{}, {}]",
            map.lo, map.hi
        )));
    }
    let header = format!(
        "P5\n# gray = round(255 * clamp((u - {lo}) / ({hi} - {lo}), 0, 1)); \
         columns: time increasing left to right; rows: x from 1 (top) to 0 (bottom)\n\
         {width} {nodes}\n255\n",
        lo = map.lo,
        hi = map.hi,
    );
    let mut out = header.into_bytes();
    out.reserve(width * nodes);
    for q in (0..nodes).rev() {
        for row in rows {
            out.push(map.level(row[q + 1]));
        }
    }
    Ok(out)
}
