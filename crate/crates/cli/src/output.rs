use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use semrheo_core::projection::pca_2d;
use semrheo_core::{Result, Trajectory};

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn write_with<F>(&self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let mut w = BufWriter::new(File::create(self.root.join(name))?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    /// Writes `projection{suffix}.csv` when the trajectory supports a 2-D PCA.
    pub fn write_projection(&self, traj: &Trajectory, suffix: &str) -> Result<()> {
        if traj.len() < 3 || traj.dim() < 2 {
            eprintln!("note: skipping projection for {} points in {} dims", traj.len(), traj.dim());
            return Ok(());
        }
        let proj = pca_2d(&traj.to_rows())?;
        self.write_with(&format!("projection{suffix}.csv"), |w| proj.write_csv(w))
    }
}
