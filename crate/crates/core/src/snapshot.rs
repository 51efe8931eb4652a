//! Field snapshot files: one JSON header line, then `N^d` little-endian
//! `f64` pairs `(re, im)` in row-major order.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::geometry::Geometry;
use crate::nonlinearity::NonlinearitySpec;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SnapshotHeader {
    pub format_version: u32,
    pub d: usize,
    pub N: Vec<usize>,
    pub L: Vec<f64>,
    pub time: f64,
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

impl SnapshotHeader {
    pub fn new(state: &FieldState, spec: &NonlinearitySpec) -> Self {
        let g = state.geometry();
        SnapshotHeader {
            format_version: FORMAT_VERSION,
            d: g.dim(),
            N: g.point_counts().to_vec(),
            L: g.periods().to_vec(),
            time: state.time(),
            lambda: spec.lambda,
            mu: spec.mu,
            alpha: spec.alpha,
            epsilon: spec.epsilon,
        }
    }

    pub fn geometry(&self) -> Result<Geometry> {
        if self.N.len() != self.d || self.L.len() != self.d {
            return Err(Error::Format(format!(
                "header declares d = {} but lists {} point counts and {} periods",
                self.d,
                self.N.len(),
                self.L.len()
            )));
        }
        Geometry::with_axes(&self.L, &self.N)
    }
}

pub fn write_snapshot<W: Write>(
    mut out: W,
    state: &FieldState,
    spec: &NonlinearitySpec,
) -> Result<()> {
    let header = SnapshotHeader::new(state, spec);
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(16 * state.values().len());
    for z in state.values() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: BufRead>(mut input: R) -> Result<(SnapshotHeader, FieldState)> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end())?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format_version {}",
            header.format_version
        )));
    }
    let geometry = header.geometry()?;
    let mut raw = Vec::new();
    input.read_to_end(&mut raw)?;
    if raw.len() != 16 * geometry.len() {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            16 * geometry.len(),
            raw.len()
        )));
    }
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let state = FieldState::new(geometry, values, header.time)?;
    Ok((header, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn round_trip_is_bit_exact(seed in 0u64..1000, two_d in any::<bool>(), t in -5.0f64..5.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = if two_d { Geometry::with_axes(&[3.0, 4.5], &[8, 16]).unwrap() } else { Geometry::new(1, 2.5, 32).unwrap() };
            let values = (0..g.len()).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() * 1e-200)).collect();
            let u = FieldState::new(g, values, t).unwrap();
            let spec = NonlinearitySpec::exact(-1.0);
            let mut bytes = Vec::new();
            write_snapshot(&mut bytes, &u, &spec).unwrap();
            let (header, back) = read_snapshot(&bytes[..]).unwrap();
            prop_assert_eq!(&back, &u);
            prop_assert_eq!(header.lambda, -1.0);
            for (a, b) in back.values().iter().zip(u.values()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    #[test]
    fn header_layout() {
        let g = Geometry::new(1, 2.0, 8).unwrap();
        let u = FieldState::from_fn(g, |_| Complex64::new(1.0, -2.0));
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &u, &NonlinearitySpec::exact(1.0)).unwrap();
        let newline = bytes.iter().position(|&b| b == b'\n').unwrap();
        let header: serde_json::Value = serde_json::from_slice(&bytes[..newline]).unwrap();
        assert_eq!(header["format_version"], 1);
        assert_eq!(header["N"], serde_json::json!([8]));
        assert_eq!(bytes.len() - newline - 1, 8 * 16);
        assert_eq!(&bytes[newline + 1..newline + 9], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[newline + 9..newline + 17], &(-2.0f64).to_le_bytes());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let g = Geometry::new(1, 2.0, 8).unwrap();
        let u = FieldState::zeros(g);
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &u, &NonlinearitySpec::exact(1.0)).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(read_snapshot(&bytes[..]), Err(Error::Format(_))));
    }
}
