//! Region-variance analysis: tile an image into adaptive regions, score
//! each region's privacy sensitivity by pixel variance, and render the
//! heatmap (lighter = more variant = more sensitive).
//!
//! Run with: cargo run --example variance_map

use csvar::data::write_variance_heatmap;
use csvar::synth::subject_scene;
use csvar::tensor::{partition_regions, region_size, variance_map};
use std::fs;

fn main() -> csvar::Result<()> {
    let out_dir = std::path::Path::new("target/example-output");
    fs::create_dir_all(out_dir)?;

    // flat background with a textured subject in the middle
    let (image, subject) = subject_scene(64, 64, 1, 7);
    let s = region_size(image.height(), image.width());
    let grid = partition_regions(&image, s)?;
    let vmap = variance_map(&image, &grid)?;

    println!(
        "image {}x{}, region size {s} -> {}x{} regions",
        image.height(),
        image.width(),
        vmap.rows(),
        vmap.cols()
    );
    println!(
        "variance: min {:.1}, median {:.1}, max {:.1}",
        vmap.min(),
        vmap.median(),
        vmap.max()
    );

    // regions covering the subject rectangle score far above the median
    let mut subject_high = 0;
    let mut subject_total = 0;
    for region in grid.regions() {
        let r = region.rect;
        let inside = r.x >= subject.x
            && r.y >= subject.y
            && r.x + r.width <= subject.x + subject.width
            && r.y + r.height <= subject.y + subject.height;
        if inside {
            subject_total += 1;
            if vmap.value(region.row, region.col) > vmap.median() {
                subject_high += 1;
            }
        }
    }
    println!("subject regions above the median: {subject_high}/{subject_total}");

    let heatmap = out_dir.join("variance_heatmap.pgm");
    write_variance_heatmap(&vmap, &heatmap)?;
    println!("heatmap written to {}", heatmap.display());
    Ok(())
}
