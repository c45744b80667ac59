use super::frame::Frame;
use super::VisionError;

pub const DEFAULT_LOW: f32 = 50.0;
pub const DEFAULT_HIGH: f32 = 100.0;
const SIGMA: f64 = 1.4;

fn gaussian_taps() -> [f32; 5] {
    let mut taps = [0f64; 5];
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - 2.0;
        *t = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.map(|t| (t / sum) as f32)
}

#[inline]
fn clamp_idx(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// 5×5 Gaussian (σ = 1.4), applied separably with replicated borders.
fn blur(src: &Frame) -> Vec<f32> {
    let (w, h) = (src.width, src.height);
    let taps = gaussian_taps();
    let mut tmp = vec![0f32; w * h];
    for y in 0..h {
        let row = &src.pixels[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0f32;
            for (k, &t) in taps.iter().enumerate() {
                acc += t * row[clamp_idx(x as isize + k as isize - 2, w)] as f32;
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0f32;
            for (k, &t) in taps.iter().enumerate() {
                acc += t * tmp[clamp_idx(y as isize + k as isize - 2, h) * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Sobel gradients of the blurred image: `(magnitude, gx, gy)`.
fn sobel(img: &[f32], w: usize, h: usize) -> (Vec<f32>, Vec<f32>, Vec<f32>) {
    let at = |x: isize, y: isize| img[clamp_idx(y, h) * w + clamp_idx(x, w)];
    let mut mag = vec![0f32; w * h];
    let mut gxs = vec![0f32; w * h];
    let mut gys = vec![0f32; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let i = y as usize * w + x as usize;
            mag[i] = gx.hypot(gy);
            gxs[i] = gx;
            gys[i] = gy;
        }
    }
    (mag, gxs, gys)
}

/// Gradient magnitude after blurring, as seen by the hysteresis stage.
pub fn gradient_magnitude(src: &Frame) -> Vec<f32> {
    sobel(&blur(src), src.width, src.height).0
}

/// Neighbor offsets along the gradient direction, quantized to 4 bins.
fn direction_offsets(gx: f32, gy: f32) -> (isize, isize) {
    let mut angle = gy.atan2(gx).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if !(22.5..157.5).contains(&angle) {
        (1, 0)
    } else if angle < 67.5 {
        (1, 1)
    } else if angle < 112.5 {
        (0, 1)
    } else {
        (-1, 1)
    }
}

/// Canny edge detector. Output pixels are 255 on edges, 0 elsewhere.
pub fn canny(src: &Frame, low: f32, high: f32) -> Result<Frame, VisionError> {
    if !(low > 0.0 && low < high && high <= 255.0) {
        return Err(VisionError::Thresholds { low, high });
    }
    let (w, h) = (src.width, src.height);
    if src.is_empty() {
        return Ok(src.clone());
    }
    let (mag, gx, gy) = sobel(&blur(src), w, h);
    let mag_at = |x: isize, y: isize| -> f32 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    // Non-maximum suppression; on a plateau only the first pixel along the
    // gradient survives.
    let mut thin = vec![0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m < low {
                continue;
            }
            let (dx, dy) = direction_offsets(gx[i], gy[i]);
            let (xi, yi) = (x as isize, y as isize);
            let ahead = mag_at(xi + dx, yi + dy);
            let behind = mag_at(xi - dx, yi - dy);
            if m >= ahead && m > behind {
                thin[i] = m;
            }
        }
    }

    let mut out = vec![0u8; w * h];
    let mut stack: Vec<usize> = (0..w * h).filter(|&i| thin[i] >= high).collect();
    for &i in &stack {
        out[i] = 255;
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for ny in y - 1..=y + 1 {
            for nx in x - 1..=x + 1 {
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if out[j] == 0 && thin[j] >= low {
                    out[j] = 255;
                    stack.push(j);
                }
            }
        }
    }
    Ok(Frame { width: w, height: h, pixels: out })
}
