//! Output directory handling and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;

#[derive(Debug, Serialize)]
struct Manifest<'a, P: Serialize> {
    subcommand: &'a str,
    version: &'a str,
    seed: u64,
    params: &'a P,
    started_at: &'a str,
    finished_at: String,
}

pub struct Run {
    dir: PathBuf,
    echo: bool,
    started_at: String,
}

impl Run {
    pub fn start(dir: &Path, echo: bool) -> anyhow::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            echo,
            started_at: now(),
        })
    }

    /// Writes `bytes` to `name` under the output directory.
    pub fn write(&self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        Ok(())
    }

    /// Like [`write`](Self::write), and also copies the bytes to stdout when
    /// `--stdout` is set.
    pub fn write_data(&self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        self.write(name, bytes)?;
        if self.echo {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
        Ok(())
    }

    pub fn finish<P: Serialize>(self, subcommand: &str, seed: u64, params: &P) -> anyhow::Result<()> {
        let manifest = Manifest {
            subcommand,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            params,
            started_at: &self.started_at,
            finished_at: now(),
        };
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        self.write("manifest.json", &text)
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}
