//! JSON input formats: `{"p": [..]}` for a distribution and `{"r": [[..], ..]}`
//! for a joint whose rows are B outcomes.
//!
//! The parsed values are kept verbatim alongside the validated objects so
//! reports can echo exactly what was read.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::prob::{Distribution, JointDistribution};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionFile {
    p: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    r: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDistribution {
    pub raw: Vec<f64>,
    pub distribution: Distribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedJoint {
    pub raw: Vec<Vec<f64>>,
    pub joint: JointDistribution,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse_distribution(text: &str) -> Result<ParsedDistribution> {
    let file: DistributionFile = serde_json::from_str(text).map_err(parse_error)?;
    let distribution = Distribution::new(file.p.clone())?;
    Ok(ParsedDistribution {
        raw: file.p,
        distribution,
    })
}

pub fn parse_joint(text: &str) -> Result<ParsedJoint> {
    let file: JointFile = serde_json::from_str(text).map_err(parse_error)?;
    let joint = JointDistribution::new(&file.r)?;
    Ok(ParsedJoint { raw: file.r, joint })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_distribution() {
        let parsed = parse_distribution(r#"{"p": [0.1, 0.2, 0.7]}"#).unwrap();
        assert_eq!(parsed.raw, vec![0.1, 0.2, 0.7]);
        assert_eq!(parsed.distribution.len(), 3);
    }

    #[test]
    fn parses_joint() {
        let parsed = parse_joint("{\"r\": [[0.4, 0.1],\n [0.1, 0.4]]}").unwrap();
        assert_eq!(parsed.joint.n_b(), 2);
        assert_eq!(parsed.raw[1], vec![0.1, 0.4]);
    }

    #[test]
    fn reports_position_of_syntax_errors() {
        match parse_distribution("{\n  \"p\": [0.5, 0.5,]\n}") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_joint(r#"{"p": [1.0]}"#), Err(Error::Parse { .. })));
    }

    #[test]
    fn passes_validation_errors_through() {
        assert!(matches!(
            parse_distribution(r#"{"p": [0.5, 0.6]}"#),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            parse_joint(r#"{"r": [[0.5, 0.5], [0.1]]}"#),
            Err(Error::Ragged { row: 1, .. })
        ));
    }
}
