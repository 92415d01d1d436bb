#![allow(dead_code)]

use std::path::PathBuf;

use xptype::dtd::Dtd;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// The toy DTDs, sorted by file name, each constrained to root `r`.
pub fn toys() -> Vec<(String, Dtd)> {
    let mut out: Vec<_> = std::fs::read_dir(data_dir().join("toy"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "dtd"))
        .map(|p| {
            let dtd = Dtd::from_file(&p).unwrap().with_root_constraint(["r"]).unwrap();
            (p.file_stem().unwrap().to_string_lossy().into_owned(), dtd)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

pub fn pool() -> Vec<String> {
    std::fs::read_to_string(data_dir().join("toy/pool.txt"))
        .unwrap()
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

pub fn xhtml() -> Dtd {
    Dtd::from_file(data_dir().join("xhtml1/xhtml1-strict.dtd"))
        .unwrap()
        .with_root_constraint(["html"])
        .unwrap()
}
