//! JSON instance files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::linalg::Mat;
use crate::numerics::{fmt_rational, parse_rational, Angle, Rational};
use crate::qbf::program::{Family, HardnessInstance};
use crate::rounding::{GridPoint, RealRoundingKind, RoundingSpec, Shape};
use crate::system::{ExactValue, JnfSystem, JordanBlock, RationalSystem, SparseMatrix};

pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub system: SystemJson,
    pub rounding: RoundingJson,
    pub initial: Vec<ValueJson>,
    pub target: Vec<ValueJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<QbfMetaJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemJson {
    /// Dense rational matrix, optionally with a Jordan decomposition `M P = P J`.
    Rational {
        matrix: Vec<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        jordan: Option<JordanJson>,
    },
    /// Sparse rational matrix as `[row, column, value]` triples.
    Sparse { dim: usize, entries: Vec<(usize, usize, String)> },
    Jnf { blocks: Vec<BlockJson> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JordanJson {
    pub p: Vec<Vec<String>>,
    pub j: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockJson {
    pub size: usize,
    pub modulus: String,
    pub angle: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundingJson {
    /// `argand` or `polar`.
    pub shape: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    pub g: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueJson {
    Real(String),
    Cartesian { re: String, im: String },
    Polar { modulus: String, angle: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QbfMetaJson {
    pub n: usize,
    pub ell: usize,
    pub m: usize,
    pub t: usize,
    pub dimension: usize,
    pub family: String,
    pub const_slot: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<String>,
}

/// A parsed instance.
#[derive(Clone, Debug)]
pub enum Instance {
    Rational { system: RationalSystem, jordan: Option<(Mat, Mat)> },
    Jnf(JnfSystem),
}

fn rats(v: &[String]) -> Result<Vec<Rational>> {
    v.iter().map(|s| parse_rational(s)).collect()
}

fn mat(m: &[Vec<String>]) -> Result<Mat> {
    m.iter().map(|r| rats(r)).collect()
}

fn strs(v: &[Rational]) -> Vec<String> {
    v.iter().map(fmt_rational).collect()
}

impl RoundingJson {
    pub fn to_spec(&self) -> Result<RoundingSpec> {
        let kind = RealRoundingKind::parse(&self.kind)?;
        let g = parse_rational(&self.g)?;
        let spec = match (self.shape.as_str(), self.r) {
            ("argand", None) => RoundingSpec::argand(kind, g),
            ("polar", Some(r)) => RoundingSpec::polar(kind, r, g),
            ("argand", Some(_)) => return Err(Error::Parse("argand rounding takes no 'r'".into())),
            ("polar", None) => return Err(Error::Parse("polar rounding needs 'r'".into())),
            (other, _) => return Err(Error::Parse(format!("unknown rounding shape {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &RoundingSpec) -> Self {
        let (shape, r) = match spec.shape {
            Shape::Argand(_) => ("argand", None),
            Shape::Polar { r, .. } => ("polar", Some(r)),
        };
        RoundingJson { shape: shape.into(), kind: spec.kind().name().into(), r, g: fmt_rational(&spec.g) }
    }
}

impl ValueJson {
    fn real(&self) -> Result<Rational> {
        match self {
            ValueJson::Real(s) => parse_rational(s),
            _ => Err(Error::Parse("rational systems take real values".into())),
        }
    }

    fn exact(&self) -> Result<ExactValue> {
        Ok(match self {
            ValueJson::Real(s) => ExactValue::real(parse_rational(s)?),
            ValueJson::Cartesian { re, im } => ExactValue::Cartesian { re: parse_rational(re)?, im: parse_rational(im)? },
            ValueJson::Polar { modulus, angle } => {
                ExactValue::Polar { modulus: parse_rational(modulus)?, angle: Angle::parse(angle)? }
            }
        })
    }
}

impl InstanceFile {
    pub fn from_json(s: &str) -> Result<Self> {
        let f: InstanceFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if f.version != VERSION {
            return Err(Error::Parse(format!("unsupported version {}", f.version)));
        }
        Ok(f)
    }

    /// Canonical pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serialization");
        s.push('\n');
        s
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let spec = self.rounding.to_spec()?;
        match &self.system {
            SystemJson::Rational { .. } | SystemJson::Sparse { .. } => {
                let (matrix, jordan) = match &self.system {
                    SystemJson::Rational { matrix, jordan } => {
                        let m = mat(matrix)?;
                        if m.iter().any(|r| r.len() != m.len()) {
                            return Err(Error::DimensionMismatch("matrix is not square".into()));
                        }
                        let pj = match jordan {
                            Some(j) => Some((mat(&j.p)?, mat(&j.j)?)),
                            None => None,
                        };
                        (SparseMatrix::from_dense(&m)?, pj)
                    }
                    SystemJson::Sparse { dim, entries } => {
                        let e = entries
                            .iter()
                            .map(|(i, j, v)| Ok((*i, *j, parse_rational(v)?)))
                            .collect::<Result<Vec<_>>>()?;
                        (SparseMatrix::from_entries(*dim, e)?, None)
                    }
                    SystemJson::Jnf { .. } => unreachable!(),
                };
                let x = self.initial.iter().map(|v| v.real()).collect::<Result<Vec<_>>>()?;
                let y = self.target.iter().map(|v| v.real()).collect::<Result<Vec<_>>>()?;
                Ok(Instance::Rational { system: RationalSystem::new(matrix, x, y, spec)?, jordan })
            }
            SystemJson::Jnf { blocks } => {
                let bl = blocks
                    .iter()
                    .map(|b| Ok(JordanBlock::new(b.size, parse_rational(&b.modulus)?, Angle::parse(&b.angle)?)))
                    .collect::<Result<Vec<_>>>()?;
                let x = self.initial.iter().map(|v| v.exact()).collect::<Result<Vec<_>>>()?;
                let y = self.target.iter().map(|v| v.exact()).collect::<Result<Vec<_>>>()?;
                Ok(Instance::Jnf(JnfSystem::new(bl, &x, &y, spec)?))
            }
        }
    }

    pub fn from_rational(sys: &RationalSystem, jordan: Option<(&Mat, &Mat)>) -> Self {
        let dense = sys.matrix.to_dense();
        let s = |m: &Mat| m.iter().map(|r| strs(r)).collect::<Vec<_>>();
        InstanceFile {
            version: VERSION,
            system: SystemJson::Rational { matrix: s(&dense), jordan: jordan.map(|(p, j)| JordanJson { p: s(p), j: s(j) }) },
            rounding: RoundingJson::from_spec(&sys.spec),
            initial: sys.initial.iter().map(|v| ValueJson::Real(fmt_rational(v))).collect(),
            target: sys.target.iter().map(|v| ValueJson::Real(fmt_rational(v))).collect(),
            meta: None,
        }
    }

    pub fn from_jnf(sys: &JnfSystem) -> Self {
        InstanceFile {
            version: VERSION,
            system: SystemJson::Jnf {
                blocks: sys
                    .blocks
                    .iter()
                    .map(|b| BlockJson { size: b.size, modulus: fmt_rational(&b.modulus), angle: b.angle.to_string() })
                    .collect(),
            },
            rounding: RoundingJson::from_spec(&sys.spec),
            initial: sys.initial.iter().map(|p| grid_value(p, sys.spec.polar_r())).collect(),
            target: sys.target.iter().map(|p| grid_value(p, sys.spec.polar_r())).collect(),
            meta: None,
        }
    }

    pub fn from_hardness(inst: &HardnessInstance) -> Self {
        let sys = &inst.system;
        let m = &inst.meta;
        InstanceFile {
            version: VERSION,
            system: SystemJson::Sparse {
                dim: sys.matrix.dim(),
                entries: sys.matrix.entries().into_iter().map(|(i, j, v)| (i, j, fmt_rational(&v))).collect(),
            },
            rounding: RoundingJson::from_spec(&sys.spec),
            initial: sys.initial.iter().map(|v| ValueJson::Real(fmt_rational(v))).collect(),
            target: sys.target.iter().map(|v| ValueJson::Real(fmt_rational(v))).collect(),
            meta: Some(QbfMetaJson {
                n: m.n,
                ell: m.ell,
                m: m.m,
                t: m.t,
                dimension: m.dimension,
                family: family_name(m.family).into(),
                const_slot: m.const_slot,
                factor: m.factor.as_ref().map(fmt_rational),
            }),
        }
    }
}

fn family_name(f: Family) -> &'static str {
    f.name()
}

/// JSON form of a grid point: a real string, `{re, im}`, or `{modulus, angle}` with angle `index * pi / r`.
pub fn grid_value(p: &GridPoint, r: Option<u32>) -> ValueJson {
    match p {
        GridPoint::Argand { re, im } if num_traits::Zero::is_zero(im) => ValueJson::Real(fmt_rational(re)),
        GridPoint::Argand { re, im } => ValueJson::Cartesian { re: fmt_rational(re), im: fmt_rational(im) },
        GridPoint::Polar { modulus, index } => ValueJson::Polar {
            modulus: fmt_rational(modulus),
            angle: Angle::new(*index as i64, r.unwrap_or(1) as i64).to_string(),
        },
    }
}
