use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;

use magflow_core::snapshot::read_snapshot;
use magflow_core::{FourierField, SobolevIndex, WaveLattice};

use crate::error::{invalid, io_at, Result};

/// Snapshots `<prefix>_*.magw` of a run directory, in file-name (step) order.
pub fn read_snapshots(dir: &Path, prefix: &str) -> Result<Vec<(f64, FourierField)>> {
    let snaps = dir.join("snapshots");
    let mut names: Vec<_> = fs::read_dir(&snaps)
        .map_err(io_at(&snaps))?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .filter(|n| n.starts_with(&format!("{prefix}_")) && n.ends_with(".magw"))
        .collect();
    names.sort();
    let mut lat: Option<Arc<WaveLattice>> = None;
    let mut out = Vec::with_capacity(names.len());
    for n in names {
        let p = snaps.join(&n);
        let file = File::open(&p).map_err(io_at(&p))?;
        let (t, f) = read_snapshot(&mut BufReader::new(file), lat.as_ref())?;
        lat.get_or_insert_with(|| Arc::clone(f.lattice()));
        out.push((t, f));
    }
    Ok(out)
}

/// `||a(t) - b(t)||_{H^s}` per sample; with `project` both sides are Leray projected first.
pub fn compare_series(
    a: &[(f64, FourierField)],
    b: &[(f64, FourierField)],
    s: SobolevIndex,
    project: bool,
) -> Result<Vec<(f64, f64)>> {
    if a.len() != b.len() {
        return Err(invalid(format!("{} samples vs {}", a.len(), b.len())));
    }
    a.iter()
        .zip(b)
        .map(|((ta, fa), (tb, fb))| {
            if ta != tb {
                return Err(invalid(format!("sample times {ta} and {tb} differ")));
            }
            fa.check_same_lattice(fb)?;
            let d = if project { (fa - fb).leray_project() } else { fa - fb };
            Ok((*ta, d.sobolev_norm(s)?))
        })
        .collect()
}

/// Compare the `w` snapshots of two run directories.
pub fn compare(run_a: &Path, run_b: &Path, s: SobolevIndex, project: bool) -> Result<Vec<(f64, f64)>> {
    compare_series(&read_snapshots(run_a, "w")?, &read_snapshots(run_b, "w")?, s, project)
}

pub fn series_csv(series: &[(f64, f64)]) -> String {
    let mut s = String::from("t,diff\n");
    for (t, d) in series {
        s.push_str(&format!("{t:e},{d:e}\n"));
    }
    s
}
