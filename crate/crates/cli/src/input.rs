use std::io::Read;
use std::path::{Path, PathBuf};

use clap::Args;
use dlps_core::ingest::{self, Config};
use dlps_core::{Dataset, Error, Result};

#[derive(Args)]
pub struct DataArgs {
    /// Use the bundled 177-customer benchmark, ignoring DLPS_DATA_DIR.
    #[arg(long, conflicts_with_all = ["customers", "mcp", "config"])]
    benchmark: bool,
    /// Customers CSV, or `-` for stdin.
    #[arg(long, requires = "mcp")]
    customers: Option<PathBuf>,
    /// State profile CSV, or `-` for stdin.
    #[arg(long, requires = "customers")]
    mcp: Option<PathBuf>,
    /// Profit factors and peak window JSON, or `-` for stdin.
    #[arg(long, requires = "customers")]
    config: Option<PathBuf>,
    /// Directory holding customers.csv, mcp.csv and config.json.
    #[arg(long = "data-dir", env = "DLPS_DATA_DIR", hide_env_values = true)]
    data_dir: Option<PathBuf>,
}

fn is_stdin(path: &Path) -> bool {
    path.as_os_str() == "-"
}

/// Reads a path, with `-` meaning standard input. Returns the text and the
/// name used in error messages.
pub fn read_source(path: &Path) -> Result<(String, String)> {
    if is_stdin(path) {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(|source| Error::Io {
            path: "<stdin>".into(),
            source,
        })?;
        Ok((text, "<stdin>".into()))
    } else {
        Ok((ingest::read_file(path)?, path.display().to_string()))
    }
}

impl DataArgs {
    pub fn load(&self) -> Result<Dataset> {
        if let (Some(customers), Some(mcp)) = (&self.customers, &self.mcp) {
            let sources = [Some(customers), Some(mcp), self.config.as_ref()];
            if sources.iter().flatten().filter(|p| is_stdin(p)).count() > 1 {
                return Err(Error::Io {
                    path: "<stdin>".into(),
                    source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "only one input can be read from stdin"),
                });
            }
            let (text, name) = read_source(customers)?;
            let customers = ingest::parse_customers(&text, &name)?;
            let (text, mcp_name) = read_source(mcp)?;
            let records = ingest::parse_mcp(&text, &mcp_name)?;
            let config = match &self.config {
                Some(path) => {
                    let (text, name) = read_source(path)?;
                    ingest::parse_config(&text, &name)?
                }
                None => Config::default(),
            };
            return Ok(ingest::assemble(&name, customers, &records, &config, &mcp_name));
        }
        match &self.data_dir {
            Some(dir) if !self.benchmark => ingest::load_dataset_dir(dir),
            _ => Ok(ingest::bundled_benchmark()),
        }
    }
}
