//! Box and mask primitives.
//!
//! Boxes are corner pairs in continuous pixel coordinates (origin top-left,
//! x right, y down). Masks are row-major run-length encodings that start with
//! a zero-run; a bitmap whose first pixel is set gets a leading zero-length run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned box with `x1 < x2`, `y1 < y2` and finite, nonnegative corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxRepr", into = "CornerBox")]
pub struct BBox {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

#[derive(Serialize, Deserialize)]
struct CornerBox {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

#[derive(Deserialize)]
struct CenterBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
}

/// Providers may send either corners or `(cx, cy, w, h)`; both land as corners.
#[derive(Deserialize)]
#[serde(untagged)]
enum BoxRepr {
    Corners(CornerBox),
    Center(CenterBox),
}

impl TryFrom<BoxRepr> for BBox {
    type Error = Error;

    fn try_from(repr: BoxRepr) -> Result<Self> {
        match repr {
            BoxRepr::Corners(c) => BBox::new(c.x1, c.y1, c.x2, c.y2),
            BoxRepr::Center(c) => BBox::from_center(c.cx, c.cy, c.w, c.h),
        }
    }
}

impl From<BBox> for CornerBox {
    fn from(b: BBox) -> Self {
        CornerBox {
            x1: b.x1,
            y1: b.y1,
            x2: b.x2,
            y2: b.y2,
        }
    }
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let coords = [x1, y1, x2, y2];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("bbox", "coordinates must be finite"));
        }
        if coords.iter().any(|&c| c < 0.0) {
            return Err(Error::invalid("bbox", "coordinates must be nonnegative"));
        }
        if x1 >= x2 || y1 >= y2 {
            return Err(Error::invalid(
                "bbox",
                format!("degenerate or inverted box ({x1}, {y1}, {x2}, {y2})"),
            ));
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        BBox::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn y1(&self) -> f64 {
        self.y1
    }
    pub fn x2(&self) -> f64 {
        self.x2
    }
    pub fn y2(&self) -> f64 {
        self.y2
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    /// Height over width.
    pub fn aspect_ratio(&self) -> f64 {
        self.height() / self.width()
    }

    /// The same box with the axes swapped.
    pub fn transpose(&self) -> BBox {
        BBox {
            x1: self.y1,
            y1: self.x1,
            x2: self.y2,
            y2: self.x2,
        }
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.x2.min(other.x2) - self.x1.max(other.x1);
        let h = self.y2.min(other.y2) - self.y1.max(other.y1);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Clip to `[0, width] x [0, height]`; `None` when nothing is left.
    pub fn clip(&self, width: f64, height: f64) -> Option<BBox> {
        let x1 = self.x1.clamp(0.0, width);
        let x2 = self.x2.clamp(0.0, width);
        let y1 = self.y1.clamp(0.0, height);
        let y2 = self.y2.clamp(0.0, height);
        BBox::new(x1, y1, x2, y2).ok()
    }

    /// Pixel columns `[start, end)` whose centers fall inside the box.
    pub fn pixel_columns(&self, width: u32) -> (u32, u32) {
        pixel_span(self.x1, self.x2, width)
    }

    /// Pixel rows `[start, end)` whose centers fall inside the box.
    pub fn pixel_rows(&self, height: u32) -> (u32, u32) {
        pixel_span(self.y1, self.y2, height)
    }
}

fn pixel_span(lo: f64, hi: f64, limit: u32) -> (u32, u32) {
    let start = (lo - 0.5).ceil().clamp(0.0, limit as f64) as u32;
    let end = (hi - 0.5).ceil().clamp(0.0, limit as f64) as u32;
    (start, end.max(start))
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

pub fn center(b: &BBox) -> Point {
    b.center()
}

pub fn aspect_ratio(b: &BBox) -> f64 {
    b.aspect_ratio()
}

/// Smaller area over larger area.
pub fn size_ratio(a: &BBox, b: &BBox) -> f64 {
    let (aa, ab) = (a.area(), b.area());
    aa.min(ab) / aa.max(ab)
}

/// Binary mask stored as alternating zero/one runs in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MaskRepr", into = "MaskRepr")]
pub struct BitMask {
    height: u32,
    width: u32,
    runs: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct MaskRepr {
    height: u32,
    width: u32,
    runs: Vec<u32>,
}

impl TryFrom<MaskRepr> for BitMask {
    type Error = Error;

    fn try_from(r: MaskRepr) -> Result<Self> {
        BitMask::from_runs(r.height, r.width, r.runs)
    }
}

impl From<BitMask> for MaskRepr {
    fn from(m: BitMask) -> Self {
        MaskRepr {
            height: m.height,
            width: m.width,
            runs: m.runs,
        }
    }
}

/// Accumulates runs, merging consecutive pushes of the same value.
struct RunBuilder {
    runs: Vec<u32>,
    // value of the run currently open at the end of `runs`
    current: bool,
}

impl RunBuilder {
    fn new() -> Self {
        Self {
            runs: vec![0],
            current: false,
        }
    }

    fn push(&mut self, value: bool, len: u32) {
        if len == 0 {
            return;
        }
        if value != self.current {
            self.runs.push(0);
            self.current = value;
        }
        *self.runs.last_mut().unwrap() += len;
    }

    fn finish(self) -> Vec<u32> {
        self.runs
    }
}

impl BitMask {
    pub fn from_runs(height: u32, width: u32, runs: Vec<u32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("mask", "height and width must be at least 1"));
        }
        if runs.is_empty() {
            return Err(Error::invalid("mask.runs", "empty run list"));
        }
        if runs.iter().skip(1).any(|&r| r == 0) {
            return Err(Error::invalid(
                "mask.runs",
                "only the leading run may have zero length",
            ));
        }
        let total: u64 = runs.iter().map(|&r| r as u64).sum();
        let expected = height as u64 * width as u64;
        if total != expected {
            return Err(Error::invalid(
                "mask.runs",
                format!("runs sum to {total}, expected {expected}"),
            ));
        }
        Ok(Self {
            height,
            width,
            runs,
        })
    }

    pub fn empty(height: u32, width: u32) -> Self {
        Self {
            height,
            width,
            runs: vec![height * width],
        }
    }

    /// Encode a row-major bitmap.
    pub fn encode(height: u32, width: u32, bits: &[bool]) -> Result<Self> {
        if bits.len() as u64 != height as u64 * width as u64 {
            return Err(Error::invalid(
                "mask",
                format!(
                    "bitmap has {} pixels, expected {}x{}",
                    bits.len(),
                    height,
                    width
                ),
            ));
        }
        let mut builder = RunBuilder::new();
        for &b in bits {
            builder.push(b, 1);
        }
        BitMask::from_runs(height, width, builder.finish())
    }

    /// Build a mask from at most one set span `[start, end)` per row.
    pub fn from_row_spans<F>(height: u32, width: u32, mut span: F) -> Self
    where
        F: FnMut(u32) -> Option<(u32, u32)>,
    {
        let mut builder = RunBuilder::new();
        for row in 0..height {
            match span(row) {
                Some((start, end)) if start < end && start < width => {
                    let end = end.min(width);
                    builder.push(false, start);
                    builder.push(true, end - start);
                    builder.push(false, width - end);
                }
                _ => builder.push(false, width),
            }
        }
        Self {
            height,
            width,
            runs: builder.finish(),
        }
    }

    /// Rasterize a box: a pixel is set when its center lies inside.
    pub fn from_box(height: u32, width: u32, b: &BBox) -> Self {
        let (c0, c1) = b.pixel_columns(width);
        let (r0, r1) = b.pixel_rows(height);
        Self::from_row_spans(height, width, |row| {
            (row >= r0 && row < r1).then_some((c0, c1))
        })
    }

    /// Rasterize the ellipse inscribed in a box.
    pub fn from_ellipse(height: u32, width: u32, b: &BBox) -> Self {
        let c = b.center();
        let (rx, ry) = (b.width() / 2.0, b.height() / 2.0);
        Self::from_row_spans(height, width, |row| {
            let dy = (row as f64 + 0.5 - c.y) / ry;
            if dy.abs() >= 1.0 {
                return None;
            }
            let half = rx * (1.0 - dy * dy).sqrt();
            let (s, e) = pixel_span(c.x - half, c.x + half, width);
            (s < e).then_some((s, e))
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn runs(&self) -> &[u32] {
        &self.runs
    }

    pub fn decode(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.height as usize * self.width as usize);
        for (i, &r) in self.runs.iter().enumerate() {
            bits.extend(std::iter::repeat_n(i % 2 == 1, r as usize));
        }
        bits
    }

    /// Number of set pixels.
    pub fn popcount(&self) -> u64 {
        self.runs.iter().skip(1).step_by(2).map(|&r| r as u64).sum()
    }

    /// Tight pixel bounding box of the set pixels, or `None` for an empty mask.
    pub fn bounding_box(&self) -> Option<BBox> {
        let w = self.width as u64;
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (u64::MAX, 0u64, u64::MAX, 0u64);
        let mut pos = 0u64;
        for (i, &r) in self.runs.iter().enumerate() {
            let r = r as u64;
            if i % 2 == 1 && r > 0 {
                let (first, last) = (pos, pos + r - 1);
                let (y0, y1) = (first / w, last / w);
                ymin = ymin.min(y0);
                ymax = ymax.max(y1);
                if y0 == y1 {
                    xmin = xmin.min(first % w);
                    xmax = xmax.max(last % w);
                } else {
                    xmin = 0;
                    xmax = w - 1;
                }
            }
            pos += r;
        }
        if ymin == u64::MAX {
            return None;
        }
        BBox::new(
            xmin as f64,
            ymin as f64,
            (xmax + 1) as f64,
            (ymax + 1) as f64,
        )
        .ok()
    }
}

/// Count of pixels set in both masks, computed by merging the run lists.
pub fn mask_overlap_count(a: &BitMask, b: &BitMask) -> Result<u64> {
    if a.height != b.height || a.width != b.width {
        return Err(Error::DimensionMismatch {
            left: (a.height, a.width),
            right: (b.height, b.width),
        });
    }
    let (ra, rb) = (&a.runs, &b.runs);
    let (mut ia, mut ib) = (0usize, 0usize);
    let (mut left_a, mut left_b) = (ra[0] as u64, rb[0] as u64);
    let mut count = 0u64;
    while ia < ra.len() && ib < rb.len() {
        if left_a == 0 {
            ia += 1;
            if ia < ra.len() {
                left_a = ra[ia] as u64;
            }
            continue;
        }
        if left_b == 0 {
            ib += 1;
            if ib < rb.len() {
                left_b = rb[ib] as u64;
            }
            continue;
        }
        let step = left_a.min(left_b);
        if ia % 2 == 1 && ib % 2 == 1 {
            count += step;
        }
        left_a -= step;
        left_b -= step;
    }
    Ok(count)
}
