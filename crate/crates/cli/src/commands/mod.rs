pub mod converge;
pub mod propagate;
pub mod sharpness;
pub mod symbol_check;

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::output::OutDir;
use crate::{Common, Failure};

/// `--out`, then the config's `out_dir`, then `out/<command>`.
fn out_dir(common: &Common, configured: Option<PathBuf>, command: &str) -> Result<OutDir, Failure> {
    let root = common
        .out
        .clone()
        .or(configured)
        .unwrap_or_else(|| PathBuf::from("out").join(command));
    OutDir::open(&root)
}

fn seed(common: &Common, configured: Option<u64>) -> Result<u64, Failure> {
    common
        .seed
        .or(configured)
        .ok_or_else(|| Failure::Usage("this suite is randomized: set \"seed\" in the config or pass --seed".into()))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::Usage(msg()))
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "true"
    } else {
        "false"
    }
}
