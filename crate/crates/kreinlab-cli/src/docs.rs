//! JSON document formats. Matrices are row-major [re, im] pair arrays so
//! that serialization round-trips bit for bit; twist documents refuse to
//! load unless every cocycle identity checks out.

use std::fs;
use std::path::Path;

use kreinlab::krein::RealLinearOp;
use kreinlab::numkit::{c64, ComplexMatrix};
use kreinlab::twistkit::{validate_twist, FiniteGroupData, Phase, TwistData};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub schema: u32,
    pub dimension: usize,
    /// row-major [re, im] pairs
    pub entries: Vec<[f64; 2]>,
    /// "metric" | "hamiltonian" | "symmetry" | "gradation"
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    /// -1 tags the matrix as the linear part of an anti-linear operator
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varpi: Option<i8>,
}

impl MatrixDocument {
    pub fn from_matrix(m: &ComplexMatrix, role: Option<&str>) -> MatrixDocument {
        MatrixDocument {
            schema: SCHEMA_VERSION,
            dimension: m.dim(),
            entries: m.data().iter().map(|z| [z.re, z.im]).collect(),
            role: role.map(str::to_string),
            varpi: None,
        }
    }

    pub fn from_operator(op: &RealLinearOp, role: Option<&str>) -> MatrixDocument {
        let mut doc = MatrixDocument::from_matrix(&op.mat, role);
        doc.varpi = Some(op.varpi);
        doc
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "unknown matrix schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        let n = self.dimension;
        if self.entries.len() != n * n {
            return Err(CliError::Parse(format!(
                "matrix document declares dimension {n} but carries {} entries",
                self.entries.len()
            )));
        }
        let data: Vec<c64> = self.entries.iter().map(|[re, im]| c64::new(*re, *im)).collect();
        Ok(ComplexMatrix::from_rows(n, &data))
    }

    pub fn to_operator(&self) -> Result<RealLinearOp, CliError> {
        let mat = self.to_matrix()?;
        match self.varpi {
            None | Some(1) => Ok(RealLinearOp::linear(mat)),
            Some(-1) => Ok(RealLinearOp::antilinear(mat)),
            Some(other) => Err(CliError::Parse(format!("varpi tag {other} is not a sign"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwistDocument {
    pub schema: u32,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// row-major multiplication table of element indices
    pub table: Vec<usize>,
    pub varpi: Vec<i8>,
    pub wp: Vec<i8>,
    pub c: Vec<i8>,
    /// row-major [re, im] cocycle values
    pub tau: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl TwistDocument {
    pub fn from_twist(t: &TwistData, metadata: Option<serde_json::Value>) -> TwistDocument {
        let n = t.group().order();
        let mut tau = Vec::with_capacity(n * n);
        for g in 0..n {
            for h in 0..n {
                let z = t.tau(g, h).value();
                tau.push([z.re, z.im]);
            }
        }
        TwistDocument {
            schema: SCHEMA_VERSION,
            order: n,
            labels: Some((0..n).map(|g| t.group().label(g).to_string()).collect()),
            table: (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .map(|(a, b)| t.group().mul(a, b))
                .collect(),
            varpi: (0..n).map(|g| t.varpi(g)).collect(),
            wp: (0..n).map(|g| t.wp(g)).collect(),
            c: (0..n).map(|g| t.c(g)).collect(),
            tau,
            metadata,
        }
    }

    pub fn to_twist(&self) -> Result<TwistData, CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "unknown twist schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        let labels = match &self.labels {
            Some(l) if l.len() == self.order => l.clone(),
            Some(l) => {
                return Err(CliError::Parse(format!(
                    "{} labels for a group of order {}",
                    l.len(),
                    self.order
                )))
            }
            None => (0..self.order).map(|g| format!("g{g}")).collect(),
        };
        let group = FiniteGroupData::new(labels, self.table.clone())
            .map_err(|e| CliError::Parse(e.to_string()))?;
        let tau: Vec<Phase> = self
            .tau
            .iter()
            .map(|[re, im]| Phase::from_value(c64::new(*re, *im)))
            .collect();
        let twist =
            TwistData::new(group, self.varpi.clone(), self.wp.clone(), self.c.clone(), tau)
                .map_err(|e| CliError::Parse(e.to_string()))?;
        let verdict = validate_twist(&twist);
        match verdict.failure {
            None => Ok(twist),
            Some(f) => Err(CliError::Parse(format!("twist document is invalid: {f}"))),
        }
    }
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("serialization: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Analysis(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use kreinlab::twistkit::reduce_data;

    #[test]
    fn matrix_documents_round_trip_bit_exactly() {
        let m = ComplexMatrix::from_fn(3, |i, j| {
            c64::new(
                (i as f64 + 0.1) / (j as f64 + 3.7),
                (j as f64 - 1.3) * 0.123456789012345,
            )
        });
        let doc = MatrixDocument::from_matrix(&m, Some("hamiltonian"));
        let json = serde_json::to_string(&doc).unwrap();
        let parsed: MatrixDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, doc);
        let back = parsed.to_matrix().unwrap();
        assert_eq!(
            back.data()
                .iter()
                .zip(m.data())
                .filter(|(a, b)| a != b)
                .count(),
            0
        );
    }

    #[test]
    fn matrix_documents_reject_malformed_input() {
        let mut doc = MatrixDocument::from_matrix(&ComplexMatrix::identity(2), None);
        doc.entries.pop();
        assert!(doc.to_matrix().is_err());
        let mut doc = MatrixDocument::from_matrix(&ComplexMatrix::identity(2), None);
        doc.schema = 99;
        assert!(doc.to_matrix().is_err());
    }

    #[test]
    fn operator_documents_carry_the_linearity_tag() {
        let op = RealLinearOp::antilinear(ComplexMatrix::identity(2));
        let doc = MatrixDocument::from_operator(&op, Some("symmetry"));
        let back = doc.to_operator().unwrap();
        assert_eq!(back.varpi, -1);
    }

    #[test]
    fn twist_documents_round_trip_and_validate() {
        let mut t = TwistData::untwisted(kreinlab::twistkit::FiniteGroupData::cyclic2());
        t.set_wp(vec![1, -1]);
        let reduced = reduce_data(&t).unwrap();
        let doc = TwistDocument::from_twist(&reduced, None);
        let back = doc.to_twist().unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(back.tau(a, b), reduced.tau(a, b));
            }
        }
        // breaking one cocycle value must make the document unloadable
        let mut bad = doc.clone();
        bad.tau[9] = [-bad.tau[9][0], bad.tau[9][1]];
        assert!(bad.to_twist().is_err());
    }
}
