//! JSON file format for SPD curve data: `{"J": ..., "matrices": [...]}` with
//! each matrix as `{"dim": d, "upper": [row-major upper triangle]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spd::SpdMat;

/// On-disk curve representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveFile {
    #[serde(rename = "J")]
    pub j: usize,
    pub matrices: Vec<SpdMat>,
}

impl CurveFile {
    pub fn new(matrices: Vec<SpdMat>) -> Result<Self> {
        let len = matrices.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NonPowerOfTwo { len });
        }
        Ok(CurveFile {
            j: len.trailing_zeros() as usize,
            matrices,
        })
    }

    fn validate(self) -> Result<Self> {
        if self.matrices.len() != 1usize << self.j {
            return Err(Error::InvalidParameter(format!(
                "curve file declares J = {} but holds {} matrices",
                self.j,
                self.matrices.len()
            )));
        }
        Ok(self)
    }
}

pub fn write_curve_json(matrices: &[SpdMat], path: &Path) -> Result<()> {
    let file = CurveFile::new(matrices.to_vec())?;
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::InvalidParameter(format!("serialization error: {e}")))?;
    std::fs::write(path, json).map_err(|e| Error::InvalidParameter(format!("io error: {e}")))
}

pub fn read_curve_json(path: &Path) -> Result<Vec<SpdMat>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("io error reading {}: {e}", path.display())))?;
    let file: CurveFile = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("bad curve file {}: {e}", path.display())))?;
    Ok(file.validate()?.matrices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let ms: Vec<SpdMat> = (0..8)
            .map(|k| SpdMat::from_diag(&[1.0 + k as f64, 2.0]).unwrap())
            .collect();
        let dir = std::env::temp_dir().join("spdwave-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("curve.json");
        write_curve_json(&ms, &path).unwrap();
        let back = read_curve_json(&path).unwrap();
        assert_eq!(back.len(), 8);
        for (a, b) in ms.iter().zip(&back) {
            assert_eq!(a.as_sym().upper(), b.as_sym().upper());
        }
        // non-SPD payload rejected on read
        let bad = r#"{"J": 0, "matrices": [{"dim": 2, "upper": [1.0, 5.0, 1.0]}]}"#;
        std::fs::write(&path, bad).unwrap();
        assert!(read_curve_json(&path).is_err());
        // length mismatch rejected
        let bad = r#"{"J": 3, "matrices": [{"dim": 2, "upper": [1.0, 0.0, 1.0]}]}"#;
        std::fs::write(&path, bad).unwrap();
        assert!(read_curve_json(&path).is_err());
        assert!(CurveFile::new(vec![]).is_err());
    }
}
