//! 8-connected component labeling and per-region geometry.

use std::f64::consts::{PI, SQRT_2};

use crate::bbox::BBox;
use crate::error::{Error, Result};
use crate::raster::BinaryImage;

/// Per-pixel component labels; 0 is background, components are `1..=count`
/// numbered in raster-scan order of their first pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: u32,
}

impl LabelMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Pixels carrying `label`.
    pub fn mask(&self, label: u32) -> BinaryImage {
        let data = self.labels.iter().map(|&l| l == label && label != 0).collect();
        BinaryImage::from_raw(self.width, self.height, data).expect("same dimensions")
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller provisional label wins so roots stay in scan order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass union-find labeling with 8-connectivity.
pub fn label(img: &BinaryImage) -> LabelMap {
    let (w, h) = (img.width(), img.height());
    let mut labels = vec![0u32; w * h];
    let mut ds = DisjointSet { parent: vec![0] };

    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                continue;
            }
            // Already-visited neighbors: W, NW, N, NE.
            let mut neighbors = [0u32; 4];
            let mut n = 0;
            if x > 0 && labels[y * w + x - 1] != 0 {
                neighbors[n] = labels[y * w + x - 1];
                n += 1;
            }
            if y > 0 {
                let up = (y - 1) * w;
                if x > 0 && labels[up + x - 1] != 0 {
                    neighbors[n] = labels[up + x - 1];
                    n += 1;
                }
                if labels[up + x] != 0 {
                    neighbors[n] = labels[up + x];
                    n += 1;
                }
                if x + 1 < w && labels[up + x + 1] != 0 {
                    neighbors[n] = labels[up + x + 1];
                    n += 1;
                }
            }
            labels[y * w + x] = if n == 0 {
                let l = ds.parent.len() as u32;
                ds.parent.push(l);
                l
            } else {
                let m = *neighbors[..n].iter().min().unwrap();
                for &other in &neighbors[..n] {
                    ds.union(m, other);
                }
                m
            };
        }
    }

    // Compact roots into 1..=count in order of first appearance.
    let mut remap = vec![0u32; ds.parent.len()];
    let mut count = 0;
    for l in labels.iter_mut() {
        if *l == 0 {
            continue;
        }
        let root = ds.find(*l) as usize;
        if remap[root] == 0 {
            count += 1;
            remap[root] = count;
        }
        *l = remap[root];
    }

    LabelMap {
        width: w,
        height: h,
        labels,
        count,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub label: u32,
    pub area: usize,
    pub perimeter: f64,
    pub bbox: BBox,
    pub metric: f64,
}

/// `4 pi area / perimeter^2`.
pub fn circularity(area: f64, perimeter: f64) -> Result<f64> {
    if !(perimeter > 0.0) {
        return Err(Error::Domain(format!("perimeter must be positive, got {perimeter}")));
    }
    if !(area >= 0.0) {
        return Err(Error::Domain(format!("area must be non-negative, got {area}")));
    }
    Ok(4.0 * PI * area / (perimeter * perimeter))
}

/// Perimeter assigned to an isolated pixel, treated as a unit-diameter disk.
const ISOLATED_PIXEL_PERIMETER: f64 = PI;

// Clockwise in image coordinates (y down), starting east.
const DIRS: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

fn dir_index(dx: isize, dy: isize) -> usize {
    DIRS.iter().position(|&d| d == (dx, dy)).expect("unit offset")
}

/// Length of the outer boundary of the component containing `start`, traced
/// with Moore-neighbor following. Axial steps count 1, diagonal steps sqrt(2).
///
/// `start` must be the component's first pixel in raster order.
pub fn trace_perimeter(map: &LabelMap, start: (usize, usize)) -> f64 {
    let target = map.get(start.0, start.1);
    let inside = |x: isize, y: isize| {
        x >= 0
            && y >= 0
            && (x as usize) < map.width
            && (y as usize) < map.height
            && map.get(x as usize, y as usize) == target
    };

    // Returns the next boundary pixel and the new backtrack, sweeping clockwise
    // from the backtrack position around `p`.
    let step = |p: (isize, isize), back: (isize, isize)| -> Option<((isize, isize), (isize, isize))> {
        let k = dir_index(back.0 - p.0, back.1 - p.1);
        let mut prev = back;
        for i in 1..8 {
            let (dx, dy) = DIRS[(k + i) % 8];
            let q = (p.0 + dx, p.1 + dy);
            if inside(q.0, q.1) {
                return Some((q, prev));
            }
            prev = q;
        }
        None
    };

    let s = (start.0 as isize, start.1 as isize);
    let b0 = (s.0 - 1, s.1);
    let Some((first, _)) = step(s, b0) else {
        return ISOLATED_PIXEL_PERIMETER;
    };

    let mut length = 0.0;
    let (mut p, mut back) = (s, b0);
    let budget = 4 * map.width * map.height + 8;
    for n in 0..budget {
        let (q, nb) = step(p, back).expect("traced pixel has a neighbor");
        if n > 0 && p == s && q == first {
            break;
        }
        length += if q.0 != p.0 && q.1 != p.1 { SQRT_2 } else { 1.0 };
        back = nb;
        p = q;
    }
    length
}

/// One [`Region`] per label, in label order.
pub fn region_props(map: &LabelMap) -> Vec<Region> {
    let n = map.count as usize;
    let mut area = vec![0usize; n];
    let mut bbox: Vec<Option<BBox>> = vec![None; n];
    let mut start = vec![(0usize, 0usize); n];
    for y in 0..map.height {
        for x in 0..map.width {
            let l = map.get(x, y) as usize;
            if l == 0 {
                continue;
            }
            let i = l - 1;
            if area[i] == 0 {
                start[i] = (x, y);
            }
            area[i] += 1;
            match bbox[i].as_mut() {
                Some(b) => b.include(x, y),
                None => bbox[i] = Some(BBox::point(x, y)),
            }
        }
    }
    (0..n)
        .map(|i| {
            let perimeter = trace_perimeter(map, start[i]);
            Region {
                label: i as u32 + 1,
                area: area[i],
                perimeter,
                bbox: bbox[i].expect("every label has pixels"),
                metric: circularity(area[i] as f64, perimeter).expect("traced perimeter is positive"),
            }
        })
        .collect()
}
