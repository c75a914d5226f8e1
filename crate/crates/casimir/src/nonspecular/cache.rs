//! On-disk tabulation of response kernels.
//!
//! Kernel samples are expensive, so sweeps cache them as plain text tables.
//! The header pins everything the numbers depend on — mirror pair, kind,
//! separation, tolerance and a digest of all of it — and a load only
//! succeeds when the digest of the requested configuration matches, so a
//! stale or foreign file is recomputed rather than silently reused.

use super::{KernelError, KernelKind, KernelSample, ResponseKernel};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

/// Format version; bump on any layout change.
const FORMAT_VERSION: u32 = 1;

fn config_digest(model: &str, kind: KernelKind, length: f64, rel_tol: f64) -> String {
    let mut h = Sha256::new();
    h.update(format!(
        "casimir-kernel-v{FORMAT_VERSION}|{model}|{}|{length:.12e}|{rel_tol:.6e}",
        kind.as_str()
    ));
    hex_digest(&h.finalize())
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(2 * bytes.len());
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Write a kernel table.
pub fn write_kernel(path: &Path, kern: &ResponseKernel) -> Result<(), KernelError> {
    let digest = config_digest(&kern.model, kern.kind, kern.length, kern.rel_tol);
    let mut out = String::new();
    out.push_str(&format!("# casimir kernel table v{FORMAT_VERSION}\n"));
    out.push_str(&format!("# kind: {}\n", kern.kind.as_str()));
    out.push_str(&format!("# model: {}\n", kern.model));
    out.push_str(&format!("# L: {:.12e}\n", kern.length));
    out.push_str(&format!("# rel_tol: {:.6e}\n", kern.rel_tol));
    out.push_str(&format!("# digest: {digest}\n"));
    out.push_str("# columns: k[rad/m]\tG[J/m^4]\test_error[J/m^4]\n");
    for s in &kern.samples {
        out.push_str(&format!(
            "{:.12e}\t{:.12e}\t{:.12e}\n",
            s.k, s.value, s.est_error
        ));
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| KernelError::Cache(format!("create {}: {e}", path.display())))?;
    f.write_all(out.as_bytes())
        .map_err(|e| KernelError::Cache(format!("write {}: {e}", path.display())))?;
    Ok(())
}

/// Load a kernel table if it exists and matches the requested
/// configuration; `Ok(None)` means a cache miss (absent or stale file).
pub fn read_kernel(
    path: &Path,
    model: &str,
    kind: KernelKind,
    length: f64,
    rel_tol: f64,
) -> Result<Option<ResponseKernel>, KernelError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(KernelError::Cache(format!("read {}: {e}", path.display()))),
    };
    let want = config_digest(model, kind, length, rel_tol);
    let mut found_digest = None;
    let mut samples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(d) = rest.trim().strip_prefix("digest:") {
                found_digest = Some(d.trim().to_string());
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 3 {
            return Err(KernelError::Cache(format!(
                "{} line {}: expected 3 columns",
                path.display(),
                i + 1
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                KernelError::Cache(format!(
                    "{} line {}: '{s}' is not a number",
                    path.display(),
                    i + 1
                ))
            })
        };
        samples.push(KernelSample {
            k: parse(cols[0])?,
            value: parse(cols[1])?,
            est_error: parse(cols[2])?,
            evals: 0,
        });
    }
    match found_digest {
        Some(d) if d == want => Ok(Some(ResponseKernel {
            kind,
            length,
            model: model.to_string(),
            rel_tol,
            samples,
        })),
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_kernel() -> ResponseKernel {
        ResponseKernel {
            kind: KernelKind::Corrugation,
            length: 1e-6,
            model: "lower=perfect-reflector upper=perfect-reflector L=1.0e-6".into(),
            rel_tol: 1e-5,
            samples: vec![
                KernelSample {
                    k: 1e5,
                    value: -2.5e-9,
                    est_error: 1e-13,
                    evals: 1234,
                },
                KernelSample {
                    k: 1e6,
                    value: -1.5e-9,
                    est_error: 1e-13,
                    evals: 1234,
                },
            ],
        }
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kern.tsv");
        let kern = demo_kernel();
        write_kernel(&path, &kern).unwrap();
        let back = read_kernel(&path, &kern.model, kern.kind, kern.length, kern.rel_tol)
            .unwrap()
            .expect("cache hit");
        assert_eq!(back.samples.len(), 2);
        assert_eq!(back.samples[0].value, kern.samples[0].value);
        assert_eq!(back.samples[1].k, kern.samples[1].k);
    }

    #[test]
    fn stale_configuration_misses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kern.tsv");
        let kern = demo_kernel();
        write_kernel(&path, &kern).unwrap();
        // different separation -> digest mismatch -> miss
        let miss = read_kernel(&path, &kern.model, kern.kind, 2e-6, kern.rel_tol).unwrap();
        assert!(miss.is_none());
        // absent file -> miss, not an error
        let absent = read_kernel(
            &dir.path().join("nope.tsv"),
            &kern.model,
            kern.kind,
            kern.length,
            kern.rel_tol,
        )
        .unwrap();
        assert!(absent.is_none());
    }
}
