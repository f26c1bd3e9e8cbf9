use std::io::Write;
use std::path::Path;

use anyhow::Context;
use chim_core::image::TimeFreqGrid;

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write {}", path.display()))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.as_file().sync_all())
        .with_context(|| format!("cannot write {}", path.display()))?;
    tmp.persist(path)
        .map_err(|e| e.error)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Binary PGM of `|H|`: `m` rows (subcarriers) by `n` columns (slots),
/// min-max scaled to 0..=255. A constant grid renders as uniform 128.
pub fn graymap(grid: &TimeFreqGrid) -> Vec<u8> {
    let mags: Vec<f64> = grid.values().iter().map(|v| v.norm()).collect();
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = format!("P5\n{} {}\n255\n", grid.n(), grid.m()).into_bytes();
    out.extend(mags.iter().map(|&v| {
        if hi > lo {
            ((v - lo) / (hi - lo) * 255.0).round() as u8
        } else {
            128
        }
    }));
    out
}

pub fn grid_csv(grid: &TimeFreqGrid) -> String {
    let mut out = String::from("subcarrier,slot,re,im,abs\n");
    for i in 0..grid.m() {
        for j in 0..grid.n() {
            let v = grid.get(i, j);
            out.push_str(&format!("{i},{j},{},{},{}\n", v.re, v.im, v.norm()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn constant_grid_is_uniform_gray() {
        let grid = TimeFreqGrid::from_fn(3, 5, |_, _| Complex64::new(0.5, 0.5)).unwrap();
        let pgm = graymap(&grid);
        let header = b"P5\n5 3\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(pgm.len(), header.len() + 15);
        assert!(pgm[header.len()..].iter().all(|&b| b == 128));
    }

    #[test]
    fn ramp_spans_full_range() {
        let grid = TimeFreqGrid::from_fn(2, 2, |i, j| Complex64::new((2 * i + j) as f64, 0.0)).unwrap();
        let pgm = graymap(&grid);
        assert_eq!(&pgm[pgm.len() - 4..], &[0, 85, 170, 255]);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
