//! Plain-text weights file.
//!
//! ```text
//! qnet 1
//! layers 5 128 128 3
//! distance_scale 100
//! slot_scale 2000
//! no_obstacle 1
//! params 17539
//! <one value per line, weights row-major then biases, layer by layer>
//! ```
//! Values use the shortest decimal form that parses back to the same bits.

use std::fmt::Write as _;
use std::path::Path;

use super::{Normalization, QNetwork};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub net: QNetwork,
    pub norm: Normalization,
}

impl Weights {
    pub fn to_text(&self) -> String {
        let mut s = String::from("qnet 1\nlayers");
        for n in self.net.sizes() {
            write!(s, " {n}").unwrap();
        }
        writeln!(s).unwrap();
        writeln!(s, "distance_scale {}", self.norm.distance_scale).unwrap();
        writeln!(s, "slot_scale {}", self.norm.slot_scale).unwrap();
        writeln!(s, "no_obstacle {}", self.norm.no_obstacle).unwrap();
        let params = self.net.params();
        writeln!(s, "params {}", params.len()).unwrap();
        for p in params {
            writeln!(s, "{p:?}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Weights(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut header = |key: &str| -> Result<(usize, Vec<String>)> {
            let (n, l) = lines.next().ok_or_else(|| Error::Weights(format!("missing `{key}` line")))?;
            let mut parts = l.split_whitespace();
            if parts.next() != Some(key) {
                return Err(bad(n, &format!("expected `{key}`")));
            }
            Ok((n, parts.map(str::to_string).collect()))
        };
        let (n, v) = header("qnet")?;
        if v != ["1"] {
            return Err(bad(n, "unsupported version"));
        }
        let (n, v) = header("layers")?;
        let sizes: Vec<usize> =
            v.iter().map(|x| x.parse().map_err(|_| bad(n, "bad layer size"))).collect::<Result<_>>()?;
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(bad(n, "need at least two positive layer sizes"));
        }
        let mut scalar = |key: &str| -> Result<f64> {
            let (n, v) = header(key)?;
            match v.as_slice() {
                [x] => x.parse().map_err(|_| bad(n, "bad number")),
                _ => Err(bad(n, "expected one value")),
            }
        };
        let norm = Normalization {
            distance_scale: scalar("distance_scale")?,
            slot_scale: scalar("slot_scale")?,
            no_obstacle: scalar("no_obstacle")?,
        };
        let (n, v) = header("params")?;
        let count: usize = match v.as_slice() {
            [x] => x.parse().map_err(|_| bad(n, "bad count"))?,
            _ => return Err(bad(n, "expected one value")),
        };
        let mut net = QNetwork::zeros(&sizes);
        if count != net.param_count() {
            return Err(bad(n, &format!("{count} parameters for shapes needing {}", net.param_count())));
        }
        let mut flat = Vec::with_capacity(count);
        for (n, l) in lines {
            if l.is_empty() {
                continue;
            }
            let v: f64 = l.parse().map_err(|_| bad(n, "bad parameter"))?;
            if !v.is_finite() {
                return Err(bad(n, "non-finite parameter"));
            }
            flat.push(v);
        }
        if flat.len() != count {
            return Err(Error::Weights(format!("expected {count} parameters, found {}", flat.len())));
        }
        net.set_params(&flat);
        Ok(Self { net, norm })
    }
}

pub fn write_weights(path: &Path, w: &Weights) -> Result<()> {
    std::fs::write(path, w.to_text()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_weights(path: &Path) -> Result<Weights> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Weights::from_text(&text)
}
