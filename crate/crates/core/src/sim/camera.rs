use super::car::CarState;
use super::track::Track;
use crate::vision::Frame;

pub const SKY: u8 = 30;
pub const GROUND: u8 = 100;
pub const LANE: u8 = 230;

/// Forward-facing pinhole camera mounted on the car, looking over flat ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub mount_height: f64,
    /// Downward tilt of the optical axis, radians.
    pub pitch: f64,
    pub horizontal_fov: f64,
    pub image_width: usize,
    pub image_height: usize,
    /// Ground points closer than this (along the car's heading) are clipped.
    pub near: f64,
    /// Draw distance; ground points farther ahead are clipped.
    pub max_range: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            mount_height: 0.25,
            pitch: 20f64.to_radians(),
            horizontal_fov: 90f64.to_radians(),
            image_width: 160,
            image_height: 120,
            near: 0.05,
            max_range: 6.0,
        }
    }
}

impl CameraModel {
    pub fn focal_px(&self) -> f64 {
        self.image_width as f64 / 2.0 / (self.horizontal_fov / 2.0).tan()
    }

    /// Continuous image row of the horizon.
    pub fn horizon_row(&self) -> f64 {
        self.image_height as f64 / 2.0 - self.focal_px() * self.pitch.tan()
    }

    /// Ground point expressed in the car frame (forward, left) to image
    /// coordinates `(u, v)`; pixel `(i, j)` covers `[i, i+1) × [j, j+1)`.
    pub fn project(&self, forward: f64, left: f64) -> (f64, f64) {
        let (sp, cp) = self.pitch.sin_cos();
        let h = self.mount_height;
        let depth = forward * cp + h * sp;
        let down = -forward * sp + h * cp;
        let f = self.focal_px();
        (
            self.image_width as f64 / 2.0 - f * left / depth,
            self.image_height as f64 / 2.0 + f * down / depth,
        )
    }
}

fn to_car_frame(state: &CarState, p: [f64; 2]) -> (f64, f64) {
    let (s, c) = state.heading.sin_cos();
    let dx = p[0] - state.x;
    let dy = p[1] - state.y;
    (dx * c + dy * s, -dx * s + dy * c)
}

/// Clip a segment in car-frame coordinates to `near ≤ forward ≤ far`.
fn clip_forward(a: (f64, f64), b: (f64, f64), near: f64, far: f64) -> Option<((f64, f64), (f64, f64))> {
    let (mut a, mut b) = (a, b);
    if a.0 > b.0 {
        std::mem::swap(&mut a, &mut b);
    }
    if b.0 < near || a.0 > far {
        return None;
    }
    let lerp = |t: f64| (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
    let span = b.0 - a.0;
    let lo = if a.0 < near { lerp((near - a.0) / span) } else { a };
    let hi = if b.0 > far { lerp((far - a.0) / span) } else { b };
    Some((lo, hi))
}

/// Liang–Barsky clip of a 2D segment to `[0, w] × [0, h]`.
pub(crate) fn clip_to_rect(p0: (f64, f64), p1: (f64, f64), w: f64, h: f64) -> Option<((f64, f64), (f64, f64))> {
    let dx = p1.0 - p0.0;
    let dy = p1.1 - p0.1;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [(-dx, p0.0), (dx, w - p0.0), (-dy, p0.1), (dy, h - p0.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    Some((
        (p0.0 + t0 * dx, p0.1 + t0 * dy),
        (p0.0 + t1 * dx, p0.1 + t1 * dy),
    ))
}

/// Bresenham stroke between integer pixel endpoints. `thick` adds a second
/// pixel across the minor axis.
pub(crate) fn draw_line(frame: &mut Frame, from: (i64, i64), to: (i64, i64), value: u8, thick: bool) {
    let (w, h) = (frame.width as i64, frame.height as i64);
    let (mut x, mut y) = from;
    let dx = (to.0 - x).abs();
    let dy = -(to.1 - y).abs();
    let sx = if x < to.0 { 1 } else { -1 };
    let sy = if y < to.1 { 1 } else { -1 };
    let mostly_horizontal = dx >= -dy;
    let mut err = dx + dy;
    let mut plot = |px: i64, py: i64| {
        if px >= 0 && py >= 0 && px < w && py < h {
            frame.pixels[(py * w + px) as usize] = value;
        }
    };
    loop {
        plot(x, y);
        if thick {
            if mostly_horizontal {
                plot(x, y + 1);
            } else {
                plot(x + 1, y);
            }
        }
        if x == to.0 && y == to.1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Render the front camera view: sky above the horizon, flat ground below,
/// both lane boundaries drawn as 2-pixel strokes. No blending.
pub fn render_camera(track: &Track, state: &CarState, cam: &CameraModel) -> Frame {
    let (w, h) = (cam.image_width, cam.image_height);
    let mut frame = Frame::filled(w, h, GROUND);
    let horizon = cam.horizon_row();
    for row in 0..h {
        if (row as f64 + 0.5) < horizon {
            frame.pixels[row * w..(row + 1) * w].fill(SKY);
        }
    }
    let (near, far) = (cam.near, cam.max_range);
    for boundary in [track.left_boundary(), track.right_boundary()] {
        let n = boundary.len();
        for i in 0..n {
            let a = to_car_frame(state, boundary[i]);
            let b = to_car_frame(state, boundary[(i + 1) % n]);
            let Some((a, b)) = clip_forward(a, b, near, far) else {
                continue;
            };
            let pa = cam.project(a.0, a.1);
            let pb = cam.project(b.0, b.1);
            let Some((pa, pb)) = clip_to_rect(pa, pb, w as f64 - 1e-9, h as f64 - 1e-9) else {
                continue;
            };
            draw_line(
                &mut frame,
                (pa.0.floor() as i64, pa.1.floor() as i64),
                (pb.0.floor() as i64, pb.1.floor() as i64),
                LANE,
                true,
            );
        }
    }
    frame
}
