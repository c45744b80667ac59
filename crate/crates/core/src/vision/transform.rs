use super::frame::{Frame, RgbFrame};
use super::VisionError;

/// ITU-R BT.601 luma from separate channel planes.
pub fn to_grayscale(r: &Frame, g: &Frame, b: &Frame) -> Result<Frame, VisionError> {
    for plane in [g, b] {
        if (plane.width, plane.height) != (r.width, r.height) {
            return Err(VisionError::ChannelMismatch);
        }
    }
    let pixels = r
        .pixels
        .iter()
        .zip(&g.pixels)
        .zip(&b.pixels)
        .map(|((&r, &g), &b)| luma(r, g, b))
        .collect();
    Ok(Frame { width: r.width, height: r.height, pixels })
}

#[inline]
fn luma(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
        .round()
        .clamp(0.0, 255.0) as u8
}

pub fn rgb_to_grayscale(rgb: &RgbFrame) -> Result<Frame, VisionError> {
    if rgb.pixels.len() != rgb.width * rgb.height * 3 {
        return Err(VisionError::ChannelMismatch);
    }
    let pixels = rgb.pixels.chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).collect();
    Ok(Frame { width: rgb.width, height: rgb.height, pixels })
}

/// Bilinear resize with pixel-center alignment: the source coordinate of
/// destination pixel `d` is `(d + 0.5)·scale − 0.5`, clamped to the image.
pub fn resize_bilinear(src: &Frame, out_w: usize, out_h: usize) -> Result<Frame, VisionError> {
    if src.is_empty() || out_w == 0 || out_h == 0 {
        return Err(VisionError::EmptyImage);
    }
    let sx = src.width as f64 / out_w as f64;
    let sy = src.height as f64 / out_h as f64;
    let axis = |d: usize, scale: f64, len: usize| -> (usize, usize, f64) {
        let c = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = c.floor() as usize;
        let i1 = (i0 + 1).min(len - 1);
        (i0, i1, c - i0 as f64)
    };
    let cols: Vec<_> = (0..out_w).map(|x| axis(x, sx, src.width)).collect();
    let mut pixels = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        let (y0, y1, fy) = axis(y, sy, src.height);
        for &(x0, x1, fx) in &cols {
            let top = src.get(x0, y0) as f64 * (1.0 - fx) + src.get(x1, y0) as f64 * fx;
            let bottom = src.get(x0, y1) as f64 * (1.0 - fx) + src.get(x1, y1) as f64 * fx;
            let v = top * (1.0 - fy) + bottom * fy;
            pixels.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(Frame { width: out_w, height: out_h, pixels })
}

/// Box-filter downsample: every output pixel is the rounded mean of the
/// source rectangle it covers. Used for the low-resolution observation mode,
/// where point-sampled bilinear would skip thin lane strokes entirely.
pub fn resize_area(src: &Frame, out_w: usize, out_h: usize) -> Result<Frame, VisionError> {
    if src.is_empty() || out_w == 0 || out_h == 0 {
        return Err(VisionError::EmptyImage);
    }
    let mut pixels = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        let ys = y * src.height / out_h;
        let ye = ((y + 1) * src.height / out_h).max(ys + 1);
        for x in 0..out_w {
            let xs = x * src.width / out_w;
            let xe = ((x + 1) * src.width / out_w).max(xs + 1);
            let mut sum = 0u32;
            for row in ys..ye {
                sum += src.pixels[row * src.width + xs..row * src.width + xe]
                    .iter()
                    .map(|&p| p as u32)
                    .sum::<u32>();
            }
            let count = ((ye - ys) * (xe - xs)) as u32;
            pixels.push(((sum + count / 2) / count) as u8);
        }
    }
    Ok(Frame { width: out_w, height: out_h, pixels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plane(v: u8) -> Frame {
        Frame::filled(4, 3, v)
    }

    #[test]
    fn grayscale_values() {
        assert!(to_grayscale(&plane(77), &plane(77), &plane(77)).unwrap().pixels.iter().all(|&p| p == 77));
        assert_eq!(to_grayscale(&plane(255), &plane(0), &plane(0)).unwrap().pixels[0], 76);
        assert_eq!(to_grayscale(&plane(0), &plane(0), &plane(0)).unwrap().pixels[0], 0);
        assert_eq!(
            to_grayscale(&plane(1), &Frame::filled(3, 3, 1), &plane(1)),
            Err(VisionError::ChannelMismatch)
        );
    }

    #[test]
    fn bilinear_cases() {
        let c = resize_bilinear(&Frame::filled(160, 120, 7), 80, 80).unwrap();
        assert!(c.pixels.iter().all(|&p| p == 7));
        let two = Frame::new(2, 2, vec![0, 255, 0, 255]).unwrap();
        assert_eq!(resize_bilinear(&two, 1, 1).unwrap().pixels, vec![128]);
        let src = Frame::new(80, 80, (0..6400).map(|i| (i * 37 % 251) as u8).collect()).unwrap();
        assert_eq!(resize_bilinear(&src, 80, 80).unwrap(), src);
        assert_eq!(resize_bilinear(&Frame::filled(0, 0, 0), 80, 80), Err(VisionError::EmptyImage));
    }

    #[test]
    fn area_averages_blocks() {
        let src = Frame::new(4, 2, vec![0, 255, 10, 10, 255, 0, 10, 10]).unwrap();
        assert_eq!(resize_area(&src, 2, 1).unwrap().pixels, vec![128, 10]);
    }

    proptest! {
        #[test]
        fn constant_images_stay_constant(v in any::<u8>(), w in 1usize..50, h in 1usize..50,
                                         ow in 1usize..30, oh in 1usize..30) {
            let src = Frame::filled(w, h, v);
            prop_assert!(resize_bilinear(&src, ow, oh).unwrap().pixels.iter().all(|&p| p == v));
            prop_assert!(resize_area(&src, ow, oh).unwrap().pixels.iter().all(|&p| p == v));
        }

        #[test]
        fn grayscale_is_monotone(r in any::<u8>(), g in any::<u8>(), b in any::<u8>(), bump in 1u8..=255) {
            let base = luma(r, g, b);
            prop_assert!(luma(r.saturating_add(bump), g, b) >= base);
            prop_assert!(luma(r, g.saturating_add(bump), b) >= base);
            prop_assert!(luma(r, g, b.saturating_add(bump)) >= base);
        }
    }
}
