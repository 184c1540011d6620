//! Reading and writing vector containers and attribute files, k-means
//! attributes, and the 4:1 base/query split.
//!
//! cargo run --release --example dataset_io

use nash_nns::data::{
    cluster_attrs, gaussian_mixture, prob_attrs, read_attrs, read_fvecs, split_dataset, write_attrs, write_fvecs,
};

fn main() -> nash_nns::Result<()> {
    let dir = std::env::temp_dir().join("nash-nns-dataset-io");
    std::fs::create_dir_all(&dir).map_err(|e| nash_nns::Error::Io { path: dir.clone(), source: e })?;

    let data = gaussian_mixture(2_000, 24, 8, 3.0, 1)?;
    let split = split_dataset(&data, 42)?;
    println!("split {} -> {} base + {} queries", data.len(), split.base.len(), split.queries.len());

    let base_path = dir.join("base.fvecs");
    write_fvecs(&base_path, &split.base)?;
    let base = read_fvecs(&base_path)?;
    assert_eq!(base.as_slice(), split.base.as_slice());

    let clusters = cluster_attrs(&base, 20, 7, None)?;
    let sizes: Vec<usize> = (0..20).map(|a| clusters.members(a).len()).collect();
    println!("k-means cluster sizes {sizes:?}");
    let multi = cluster_attrs(&base, 4, 7, Some(3))?;
    println!("chunked: {} attributes in classes {:?}", multi.num_attributes(), multi.class_sizes());

    let skewed = prob_attrs(base.len(), 7)?;
    let popular = (0..base.len()).filter(|&i| skewed.label(i) < 3).count();
    println!("prob attributes: {:.1}% in the three popular ones", 100.0 * popular as f64 / base.len() as f64);

    let attrs_path = dir.join("attrs.txt");
    write_attrs(&attrs_path, &multi)?;
    assert_eq!(read_attrs(&attrs_path)?, multi);
    println!("wrote {} and {}", base_path.display(), attrs_path.display());
    Ok(())
}
