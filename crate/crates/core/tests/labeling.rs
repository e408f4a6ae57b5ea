use std::collections::HashMap;
use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use speedsign::regions::{label, region_props};
use speedsign::BinaryImage;

/// Component ids by breadth-first flood fill over the 8-neighborhood.
fn flood_fill(img: &BinaryImage) -> (Vec<u32>, u32) {
    let (w, h) = (img.width(), img.height());
    let mut ids = vec![0u32; w * h];
    let mut next = 0;
    for sy in 0..h {
        for sx in 0..w {
            if !img.get(sx, sy) || ids[sy * w + sx] != 0 {
                continue;
            }
            next += 1;
            ids[sy * w + sx] = next;
            let mut queue = vec![(sx, sy)];
            while let Some((x, y)) = queue.pop() {
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        let (nx, ny) = (x as isize + dx, y as isize + dy);
                        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if img.get(nx, ny) && ids[ny * w + nx] == 0 {
                            ids[ny * w + nx] = next;
                            queue.push((nx, ny));
                        }
                    }
                }
            }
        }
    }
    (ids, next)
}

/// True when the two labelings induce the same partition.
fn same_partition(a: &[u32], b: &[u32]) -> bool {
    let mut fwd = HashMap::new();
    let mut back = HashMap::new();
    a.iter()
        .zip(b)
        .all(|(&x, &y)| (x == 0) == (y == 0) && *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> BinaryImage {
    let density = rng.random_range(0.1..0.9);
    let data = (0..w * h).map(|_| rng.random_bool(density)).collect();
    BinaryImage::from_raw(w, h, data).unwrap()
}

#[test]
fn labeling_matches_flood_fill_on_1000_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 0..1000 {
        let img = random_image(&mut rng, 32, 32);
        let map = label(&img);
        let (oracle, count) = flood_fill(&img);
        assert_eq!(map.count(), count, "image {n}");
        assert!(same_partition(map.labels(), &oracle), "image {n}");
    }
}

#[test]
fn labels_follow_raster_first_encounter() {
    let img = BinaryImage::from_ascii(&["..#.#", "#...#", "#.#..", "...##"]);
    let map = label(&img);
    let mut seen = 0;
    for &l in map.labels() {
        if l > seen {
            assert_eq!(l, seen + 1);
            seen = l;
        }
    }
    assert_eq!(seen, 4);
}

fn disk(r: f64, pad: usize, cx_off: f64, cy_off: f64) -> BinaryImage {
    let side = (2.0 * r).ceil() as usize + 2 * pad + 2;
    let c = side as f64 / 2.0;
    let mut img = BinaryImage::new(side, side);
    for y in 0..side {
        for x in 0..side {
            let dx = x as f64 + 0.5 - c - cx_off;
            let dy = y as f64 + 0.5 - c - cy_off;
            img.set(x, y, dx * dx + dy * dy <= r * r);
        }
    }
    img
}

#[test]
fn disk_metric_is_consistent_across_scales() {
    let metrics: Vec<f64> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&r| region_props(&label(&disk(r, 3, 0.0, 0.0)))[0].metric)
        .collect();
    for a in &metrics {
        for b in &metrics {
            assert!((a - b).abs() <= 0.1, "{metrics:?}");
        }
    }
}

#[test]
fn square_metric_matches_closed_form() {
    // Boundary pixel centers of an s x s square trace a (s-1) x (s-1) outline.
    for s in [5usize, 12, 40, 97] {
        let mut img = BinaryImage::new(s + 4, s + 4);
        for y in 2..s + 2 {
            for x in 2..s + 2 {
                img.set(x, y, true);
            }
        }
        let r = &region_props(&label(&img))[0];
        let expected = 4.0 * PI * (s * s) as f64 / (4.0 * (s - 1) as f64).powi(2);
        assert!(
            (r.metric - expected).abs() < 1e-12,
            "side {s}: {} vs {expected}",
            r.metric
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn areas_sum_to_foreground(w in 1usize..24, h in 1usize..24, seed in any::<u64>()) {
        let img = random_image(&mut ChaCha8Rng::seed_from_u64(seed), w, h);
        let total: usize = region_props(&label(&img)).iter().map(|r| r.area).sum();
        prop_assert_eq!(total, img.count());
    }

    #[test]
    fn translation_changes_only_bbox(seed in any::<u64>(), dx in 0usize..6, dy in 0usize..6) {
        let small = random_image(&mut ChaCha8Rng::seed_from_u64(seed), 10, 10);
        let place = |ox: usize, oy: usize| {
            let mut img = BinaryImage::new(18, 18);
            for y in 0..10 {
                for x in 0..10 {
                    img.set(x + ox + 1, y + oy + 1, small.get(x, y));
                }
            }
            img
        };
        let a = region_props(&label(&place(0, 0)));
        let b = region_props(&label(&place(dx, dy)));
        prop_assert_eq!(a.len(), b.len());
        for (ra, rb) in a.iter().zip(&b) {
            prop_assert_eq!(ra.area, rb.area);
            prop_assert_eq!(ra.perimeter, rb.perimeter);
            prop_assert_eq!(ra.metric, rb.metric);
            prop_assert_eq!((ra.bbox.min_x + dx, ra.bbox.min_y + dy), (rb.bbox.min_x, rb.bbox.min_y));
        }
    }
}
