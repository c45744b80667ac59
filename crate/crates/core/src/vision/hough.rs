use super::frame::Frame;
use crate::par;

pub const DEFAULT_VOTE_THRESHOLD: u32 = 20;
const THETA_BINS: usize = 180;
/// Edge pixels within this distance of a detected line define its extent.
const ENDPOINT_TOLERANCE: f64 = 2.0;

/// A straight line found by the Hough transform, `ρ = x·cosθ + y·sinθ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSegment {
    pub rho: f64,
    /// Radians in `[0, π)`.
    pub theta: f64,
    pub endpoints: [[f64; 2]; 2],
    pub votes: u32,
}

impl LineSegment {
    /// Image-coordinate slope `dy/dx` from the endpoints (`±∞` for vertical).
    pub fn slope(&self) -> f64 {
        let [a, b] = self.endpoints;
        (b[1] - a[1]) / (b[0] - a[0])
    }
}

struct Accumulator {
    votes: Vec<u32>,
    rho_bins: usize,
    rho_offset: isize,
}

impl Accumulator {
    fn at(&self, theta: usize, rho: usize) -> u32 {
        self.votes[theta * self.rho_bins + rho]
    }

    /// Neighbor lookup with θ wrapping (θ−1 at 0 is θ=179 with ρ negated).
    fn neighbor(&self, theta: usize, rho: usize, dt: isize, dr: isize) -> Option<(usize, u32)> {
        let mut t = theta as isize + dt;
        let mut r = rho as isize + dr;
        if t < 0 || t >= THETA_BINS as isize {
            t = t.rem_euclid(THETA_BINS as isize);
            r = 2 * self.rho_offset - r;
        }
        if r < 0 || r >= self.rho_bins as isize {
            return None;
        }
        let idx = t as usize * self.rho_bins + r as usize;
        Some((idx, self.votes[idx]))
    }
}

fn edge_points(edges: &Frame) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for y in 0..edges.height {
        for x in 0..edges.width {
            if edges.get(x, y) != 0 {
                pts.push((x as f64, y as f64));
            }
        }
    }
    pts
}

fn trig_table() -> Vec<(f64, f64)> {
    (0..THETA_BINS)
        .map(|t| {
            let th = (t as f64).to_radians();
            (th.cos(), th.sin())
        })
        .collect()
}

fn accumulate(pts: &[(f64, f64)], trig: &[(f64, f64)], width: usize, height: usize) -> Accumulator {
    let diag = ((width * width + height * height) as f64).sqrt().ceil() as isize;
    let rho_bins = (2 * diag + 1) as usize;
    let columns = par::map_indexed(THETA_BINS, |t| {
        let (c, s) = trig[t];
        let mut col = vec![0u32; rho_bins];
        for &(x, y) in pts {
            let r = (x * c + y * s).round() as isize + diag;
            col[r as usize] += 1;
        }
        col
    });
    Accumulator { votes: columns.concat(), rho_bins, rho_offset: diag }
}

/// Hough line detection on a binary edge map (1 px × 1° resolution).
pub fn hough_segments(edges: &Frame) -> Vec<LineSegment> {
    hough_segments_with(edges, DEFAULT_VOTE_THRESHOLD)
}

pub fn hough_segments_with(edges: &Frame, vote_threshold: u32) -> Vec<LineSegment> {
    let pts = edge_points(edges);
    if pts.is_empty() {
        return Vec::new();
    }
    let trig = trig_table();
    let acc = accumulate(&pts, &trig, edges.width, edges.height);

    let mut peaks = Vec::new();
    for t in 0..THETA_BINS {
        for r in 0..acc.rho_bins {
            let v = acc.at(t, r);
            if v < vote_threshold.max(1) {
                continue;
            }
            let here = t * acc.rho_bins + r;
            let mut is_peak = true;
            'scan: for dt in -1..=1 {
                for dr in -1..=1 {
                    if dt == 0 && dr == 0 {
                        continue;
                    }
                    if let Some((idx, nv)) = acc.neighbor(t, r, dt, dr) {
                        // Plateaus resolve to their first cell in scan order.
                        if nv > v || (nv == v && idx < here) {
                            is_peak = false;
                            break 'scan;
                        }
                    }
                }
            }
            if is_peak {
                peaks.push((t, r, v));
            }
        }
    }

    let mut lines: Vec<LineSegment> = peaks
        .into_iter()
        .map(|(t, r, votes)| {
            let (c, s) = trig[t];
            let rho = r as isize - acc.rho_offset;
            let rho = rho as f64;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &(x, y) in &pts {
                if (x * c + y * s - rho).abs() <= ENDPOINT_TOLERANCE {
                    let along = -x * s + y * c;
                    lo = lo.min(along);
                    hi = hi.max(along);
                }
            }
            let foot = |along: f64| [rho * c - along * s, rho * s + along * c];
            LineSegment {
                rho,
                theta: (t as f64).to_radians(),
                endpoints: [foot(lo), foot(hi)],
                votes,
            }
        })
        .collect();
    lines.sort_by(|a, b| {
        b.votes
            .cmp(&a.votes)
            .then(a.theta.total_cmp(&b.theta))
            .then(a.rho.total_cmp(&b.rho))
    });
    lines
}
