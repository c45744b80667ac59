use super::canny::{canny, DEFAULT_HIGH, DEFAULT_LOW};
use super::frame::Frame;
use super::hough::{hough_segments_with, LineSegment, DEFAULT_VOTE_THRESHOLD};
use super::VisionError;
use crate::sim::camera::draw_line;

/// Lines flatter than this are not lane candidates.
pub const MIN_LANE_SLOPE: f64 = 0.3;

/// Left and right lane line picked from the Hough candidates; either may be absent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LanePair {
    pub left: Option<LineSegment>,
    pub right: Option<LineSegment>,
}

impl LanePair {
    pub fn count(&self) -> usize {
        self.left.is_some() as usize + self.right.is_some() as usize
    }
}

/// Signed slope used for the left/right split. Vertical lines take their
/// sign from which half of the image they sit in.
fn partition_slope(line: &LineSegment, frame_width: usize) -> Option<f64> {
    let [a, b] = line.endpoints;
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    if dx.abs() < 1e-9 {
        if dy.abs() < 1e-9 {
            return None;
        }
        let x = 0.5 * (a[0] + b[0]);
        return Some(if x < frame_width as f64 / 2.0 { f64::NEG_INFINITY } else { f64::INFINITY });
    }
    Some(dy / dx)
}

fn better(candidate: &LineSegment, current: &Option<LineSegment>) -> bool {
    match current {
        None => true,
        Some(c) => {
            candidate.votes > c.votes || (candidate.votes == c.votes && candidate.rho.abs() < c.rho.abs())
        }
    }
}

/// Split Hough lines by slope sign and keep the strongest on each side.
/// Negative image slope (rising to the right) is the left lane line.
pub fn partition_filter_lines(lines: &[LineSegment], frame_width: usize) -> LanePair {
    let mut pair = LanePair::default();
    for line in lines {
        let Some(slope) = partition_slope(line, frame_width) else {
            continue;
        };
        if slope.abs() < MIN_LANE_SLOPE {
            continue;
        }
        let slot = if slope < 0.0 { &mut pair.left } else { &mut pair.right };
        if better(line, slot) {
            *slot = Some(*line);
        }
    }
    pair
}

/// Draw the lane pair as 1-px strokes on a black canvas, rescaling endpoints
/// from the `src_w × src_h` frame the lines were detected in.
pub fn rasterize_lines(pair: &LanePair, src_w: usize, src_h: usize, out_w: usize, out_h: usize) -> Frame {
    let mut frame = Frame::filled(out_w, out_h, 0);
    let sx = out_w as f64 / src_w as f64;
    let sy = out_h as f64 / src_h as f64;
    let map = |p: [f64; 2]| -> (i64, i64) {
        let x = ((p[0] + 0.5) * sx - 0.5).round().clamp(0.0, (out_w - 1) as f64);
        let y = ((p[1] + 0.5) * sy - 0.5).round().clamp(0.0, (out_h - 1) as f64);
        (x as i64, y as i64)
    };
    for line in [pair.left, pair.right].into_iter().flatten() {
        draw_line(&mut frame, map(line.endpoints[0]), map(line.endpoints[1]), 255, false);
    }
    frame
}

/// Debug overlay: every detected line drawn at full intensity over the source.
pub fn overlay_lines(src: &Frame, lines: &[LineSegment]) -> Frame {
    let mut out = src.clone();
    for l in lines {
        let p = |q: [f64; 2]| (q[0].round() as i64, q[1].round() as i64);
        draw_line(&mut out, p(l.endpoints[0]), p(l.endpoints[1]), 255, false);
    }
    out
}

/// Tunables for the Canny → Hough → slope filter chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentParams {
    pub canny_low: f32,
    pub canny_high: f32,
    pub vote_threshold: u32,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            canny_low: DEFAULT_LOW,
            canny_high: DEFAULT_HIGH,
            vote_threshold: DEFAULT_VOTE_THRESHOLD,
        }
    }
}

/// Every intermediate product of one segmentation pass.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub edges: Frame,
    pub lines: Vec<LineSegment>,
    pub lanes: LanePair,
    pub raster: Frame,
}

pub fn segment_lanes(src: &Frame, params: &SegmentParams, out_w: usize, out_h: usize) -> Result<Segmentation, VisionError> {
    let edges = canny(src, params.canny_low, params.canny_high)?;
    let lines = hough_segments_with(&edges, params.vote_threshold);
    let lanes = partition_filter_lines(&lines, src.width);
    let raster = rasterize_lines(&lanes, src.width, src.height, out_w, out_h);
    Ok(Segmentation { edges, lines, lanes, raster })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_with_slope(slope: f64, votes: u32, rho: f64) -> LineSegment {
        LineSegment {
            rho,
            theta: 0.0,
            endpoints: [[10.0, 50.0], [20.0, 50.0 + 10.0 * slope]],
            votes,
        }
    }

    #[test]
    fn keeps_strongest_per_side() {
        let lines = [
            line_with_slope(1.2, 30, 5.0),
            line_with_slope(0.9, 10, 6.0),
            line_with_slope(-1.0, 25, 7.0),
            line_with_slope(-0.1, 40, 8.0),
        ];
        let pair = partition_filter_lines(&lines, 160);
        assert_eq!(pair.right, Some(lines[0]));
        assert_eq!(pair.left, Some(lines[2]));
    }

    #[test]
    fn empty_and_single() {
        assert_eq!(partition_filter_lines(&[], 160), LanePair::default());
        let only = line_with_slope(0.8, 21, 1.0);
        let pair = partition_filter_lines(&[only], 160);
        assert_eq!((pair.left, pair.right), (None, Some(only)));
    }

    #[test]
    fn ties_prefer_smaller_rho() {
        let a = line_with_slope(1.0, 30, -9.0);
        let b = line_with_slope(1.1, 30, 4.0);
        assert_eq!(partition_filter_lines(&[a, b], 160).right, Some(b));
    }

    #[test]
    fn vertical_lines_take_side_from_position() {
        let mut v = line_with_slope(0.0, 30, 10.0);
        v.endpoints = [[10.0, 0.0], [10.0, 40.0]];
        assert!(partition_filter_lines(&[v], 160).left.is_some());
        v.endpoints = [[150.0, 0.0], [150.0, 40.0]];
        assert!(partition_filter_lines(&[v], 160).right.is_some());
    }

    #[test]
    fn rasterize_cases() {
        let empty = rasterize_lines(&LanePair::default(), 160, 120, 80, 80);
        assert!(empty.pixels.iter().all(|&p| p == 0));

        let diag = LineSegment { rho: 0.0, theta: 0.0, endpoints: [[0.0, 0.0], [79.0, 79.0]], votes: 99 };
        let pair = LanePair { left: Some(diag), right: None };
        let once = rasterize_lines(&pair, 80, 80, 80, 80);
        let lit = once.pixels.iter().filter(|&&p| p == 255).count();
        assert!((78..=82).contains(&lit), "{lit}");
        assert_eq!(rasterize_lines(&pair, 80, 80, 80, 80), once);
    }
}
