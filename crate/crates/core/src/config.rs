//! `key = value` configuration text.
//!
//! One setting per line; blank lines and lines starting with `#` are ignored.
//! Later lines override earlier ones.

use crate::error::{Error, Result};

pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::params(format!(
                "config line {}: expected 'key = value', got '{line}'",
                n + 1
            )));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::params(format!("config line {}: empty key", n + 1)));
        }
        let value = value.trim().trim_matches('"');
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureParams;

    #[test]
    fn parses_and_applies() {
        let text = "# texture settings\nlbp_radius = 2\n\nglcm_offset = 1,0\ngabor_lambda=6.5\n";
        let kv = parse_key_values(text).unwrap();
        assert_eq!(kv.len(), 3);
        let mut p = FeatureParams::default();
        for (k, v) in &kv {
            p.apply_setting(k, v).unwrap();
        }
        assert_eq!(p.lbp.radius, 2);
        assert_eq!(p.glcm.offset, (1, 0));
        assert_eq!(p.gabor.wavelength, 6.5);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_key_values("lbp_radius 2").is_err());
        assert!(parse_key_values(" = 2").is_err());
    }
}
