use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

/// Smallest centerline accepted by [`build_track`].
pub const MIN_TRACK_POINTS: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum TrackError {
    #[error("track needs at least {MIN_TRACK_POINTS} centerline points, got {0}")]
    TooFewPoints(usize),
    #[error("lane half width must be positive and finite, got {0}")]
    BadLaneWidth(f64),
    #[error("centerline point {0} is not finite")]
    NonFinite(usize),
    #[error("centerline points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("centerline edges {0} and {1} intersect")]
    SelfIntersection(usize, usize),
    #[error("centerline does not enclose any area (not a closed loop)")]
    OpenLoop,
    #[error("track file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("`{0}` is neither a built-in track nor an existing file")]
    UnknownTrack(String),
    #[error("reading track file: {0}")]
    Io(String),
}

/// Raw track description: a closed centerline loop plus the lane half width.
///
/// The loop is implicitly closed, the last point connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSpec {
    pub name: String,
    pub centerline: Vec<[f64; 2]>,
    pub lane_half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: [f64; 2],
    pub tangent: [f64; 2],
    pub length: f64,
}

/// A validated track with precomputed segment and arclength tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub spec: TrackSpec,
    pub segments: Vec<Segment>,
    /// `cumulative_arclength[i]` is the arclength at the start of segment `i`;
    /// the final entry equals `total_length`.
    pub cumulative_arclength: Vec<f64>,
    pub total_length: f64,
    left_boundary: Vec<[f64; 2]>,
    right_boundary: Vec<[f64; 2]>,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(sub(p2, p1), sub(q1, p1));
    let d2 = cross(sub(p2, p1), sub(q2, p1));
    let d3 = cross(sub(q2, q1), sub(p1, q1));
    let d4 = cross(sub(q2, q1), sub(p2, q1));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on_segment = |a: [f64; 2], b: [f64; 2], p: [f64; 2]| {
        p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    (d1 == 0.0 && on_segment(p1, p2, q1))
        || (d2 == 0.0 && on_segment(p1, p2, q2))
        || (d3 == 0.0 && on_segment(q1, q2, p1))
        || (d4 == 0.0 && on_segment(q1, q2, p2))
}

pub fn build_track(spec: TrackSpec) -> Result<Track, TrackError> {
    let pts = &spec.centerline;
    let n = pts.len();
    if n < MIN_TRACK_POINTS {
        return Err(TrackError::TooFewPoints(n));
    }
    if !(spec.lane_half_width.is_finite() && spec.lane_half_width > 0.0) {
        return Err(TrackError::BadLaneWidth(spec.lane_half_width));
    }
    if let Some(i) = pts.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(TrackError::NonFinite(i));
    }
    for i in 0..n {
        let j = (i + 1) % n;
        if pts[i] == pts[j] {
            return Err(TrackError::DuplicatePoint(i, j));
        }
    }
    // Edges sharing a vertex are skipped; everything else must be disjoint.
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return Err(TrackError::SelfIntersection(i, j));
            }
        }
    }
    let area2: f64 = (0..n).map(|i| cross(pts[i], pts[(i + 1) % n])).sum();
    if area2.abs() < 1e-12 {
        return Err(TrackError::OpenLoop);
    }

    let mut segments = Vec::with_capacity(n);
    let mut cumulative = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    for i in 0..n {
        let d = sub(pts[(i + 1) % n], pts[i]);
        let length = d[0].hypot(d[1]);
        cumulative.push(acc);
        segments.push(Segment {
            start: pts[i],
            tangent: [d[0] / length, d[1] / length],
            length,
        });
        acc += length;
    }
    cumulative.push(acc);

    let offset = |side: f64| -> Vec<[f64; 2]> {
        (0..n)
            .map(|i| {
                let prev = segments[(i + n - 1) % n].tangent;
                let next = segments[i].tangent;
                let n_prev = [-prev[1], prev[0]];
                let n_next = [-next[1], next[0]];
                let mut m = [n_prev[0] + n_next[0], n_prev[1] + n_next[1]];
                let len = m[0].hypot(m[1]);
                if len < 1e-9 {
                    m = n_next;
                } else {
                    m = [m[0] / len, m[1] / len];
                }
                // Miter scaling keeps the boundary at constant distance along both edges.
                let scale = 1.0 / dot(m, n_next).max(0.25);
                let w = side * spec.lane_half_width * scale;
                [pts[i][0] + w * m[0], pts[i][1] + w * m[1]]
            })
            .collect()
    };
    let left_boundary = offset(1.0);
    let right_boundary = offset(-1.0);

    Ok(Track {
        segments,
        cumulative_arclength: cumulative,
        total_length: acc,
        left_boundary,
        right_boundary,
        spec,
    })
}

impl Track {
    pub fn lane_half_width(&self) -> f64 {
        self.spec.lane_half_width
    }

    /// Lane boundary to the left of the travel direction, one point per centerline vertex.
    pub fn left_boundary(&self) -> &[[f64; 2]] {
        &self.left_boundary
    }

    pub fn right_boundary(&self) -> &[[f64; 2]] {
        &self.right_boundary
    }

    /// Point and unit tangent on the centerline at arclength `s` (wrapped into the loop).
    pub fn pose_at(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        let s = s.rem_euclid(self.total_length);
        let idx = match self
            .cumulative_arclength
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.segments.len() - 1),
            Err(i) => i - 1,
        };
        let seg = &self.segments[idx];
        let t = s - self.cumulative_arclength[idx];
        (
            [seg.start[0] + t * seg.tangent[0], seg.start[1] + t * seg.tangent[1]],
            seg.tangent,
        )
    }
}

/// Signed perpendicular distance from `(x, y)` to the nearest centerline point
/// (positive to the left of travel) and the arclength of that point.
pub fn cross_track_error(track: &Track, x: f64, y: f64) -> (f64, f64) {
    let p = [x, y];
    let mut best_d2 = f64::INFINITY;
    let mut best = (0.0, 0.0);
    for (i, seg) in track.segments.iter().enumerate() {
        let rel = sub(p, seg.start);
        let t = dot(rel, seg.tangent).clamp(0.0, seg.length);
        let foot = [seg.start[0] + t * seg.tangent[0], seg.start[1] + t * seg.tangent[1]];
        let off = sub(p, foot);
        let d2 = dot(off, off);
        if d2 < best_d2 {
            best_d2 = d2;
            let side = cross(seg.tangent, off);
            let sign = if side < 0.0 { -1.0 } else { 1.0 };
            let mut s = track.cumulative_arclength[i] + t;
            if s >= track.total_length {
                s -= track.total_length;
            }
            best = (sign * d2.sqrt(), s);
        }
    }
    best
}

/// Wrap-aware signed progress between two arclengths, in `[-L/2, L/2]`.
pub fn lap_progress(track: &Track, prev_s: f64, new_s: f64) -> f64 {
    let total = track.total_length;
    let mut delta = (new_s - prev_s).rem_euclid(total);
    if delta > total / 2.0 {
        delta -= total;
    }
    delta
}

/// Stadium-shaped loop: two straights joined by semicircles, counter-clockwise.
pub fn oval_spec() -> TrackSpec {
    stadium("oval", 4.0, 0.0, 2.0, 24)
}

/// Rectangle with quarter-circle corners, counter-clockwise.
pub fn rounded_rect_spec() -> TrackSpec {
    stadium("rounded_rect", 5.0, 3.0, 1.5, 12)
}

fn stadium(name: &str, straight_x: f64, straight_y: f64, radius: f64, arc_steps: usize) -> TrackSpec {
    let hx = straight_x / 2.0;
    let hy = straight_y / 2.0;
    let corners = [(hx, -hy), (hx, hy), (-hx, hy), (-hx, -hy)];
    let mut centerline = Vec::new();
    for (k, &(cx, cy)) in corners.iter().enumerate() {
        let start = -std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::FRAC_PI_2;
        let (from, steps) = if straight_y == 0.0 {
            // Semicircle per end: only corners 0 and 2 emit arcs.
            if k % 2 == 1 {
                continue;
            }
            (start, 2 * arc_steps)
        } else {
            (start, arc_steps)
        };
        let sweep = steps as f64 / arc_steps as f64 * std::f64::consts::FRAC_PI_2;
        for i in 0..=steps {
            let a = from + sweep * i as f64 / steps as f64;
            let p = [cx + radius * a.cos(), cy + radius * a.sin()];
            if centerline.last() != Some(&p) {
                centerline.push(p);
            }
        }
    }
    if centerline.first() == centerline.last() {
        centerline.pop();
    }
    TrackSpec {
        name: name.to_string(),
        centerline,
        lane_half_width: 0.3,
    }
}

pub fn builtin_spec(name: &str) -> Option<TrackSpec> {
    match name {
        "oval" => Some(oval_spec()),
        "rounded_rect" => Some(rounded_rect_spec()),
        _ => None,
    }
}

/// Parse the plain-text track format: `name = <id>`, `lane_half_width = <m>`,
/// then one `x,y` pair per line. Blank lines and `#` comments are ignored.
pub fn parse_track_spec(text: &str) -> Result<TrackSpec, TrackError> {
    let mut name = None;
    let mut half_width = None;
    let mut centerline = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| TrackError::Parse { line: line_no, message };
        if let Some((key, value)) = line.split_once('=') {
            let value = value.trim();
            match key.trim() {
                "name" => name = Some(value.to_string()),
                "lane_half_width" => {
                    half_width = Some(
                        value
                            .parse::<f64>()
                            .map_err(|e| err(format!("bad lane_half_width: {e}")))?,
                    )
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        } else if let Some((xs, ys)) = line.split_once(',') {
            let x = xs.trim().parse::<f64>().map_err(|e| err(format!("bad x: {e}")))?;
            let y = ys.trim().parse::<f64>().map_err(|e| err(format!("bad y: {e}")))?;
            centerline.push([x, y]);
        } else {
            return Err(err(format!("expected `key = value` or `x,y`, got `{line}`")));
        }
    }
    let name = name.ok_or(TrackError::Parse { line: 0, message: "missing `name`".into() })?;
    let lane_half_width = half_width.ok_or(TrackError::Parse {
        line: 0,
        message: "missing `lane_half_width`".into(),
    })?;
    Ok(TrackSpec { name, centerline, lane_half_width })
}

pub fn format_track_spec(spec: &TrackSpec) -> String {
    let mut out = String::new();
    writeln!(out, "name = {}", spec.name).unwrap();
    writeln!(out, "lane_half_width = {}", spec.lane_half_width).unwrap();
    for p in &spec.centerline {
        writeln!(out, "{},{}", p[0], p[1]).unwrap();
    }
    out
}

/// Resolve a track by built-in name, falling back to a file path.
pub fn load_track(name_or_path: &str) -> Result<Track, TrackError> {
    if let Some(spec) = builtin_spec(name_or_path) {
        return build_track(spec);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(TrackError::UnknownTrack(name_or_path.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| TrackError::Io(e.to_string()))?;
    build_track(parse_track_spec(&text)?)
}
