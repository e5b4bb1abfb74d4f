//! JSON file formats. Rationals are written as `"a/b"` strings.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::doubly::Lottery;
use crate::error::{Error, Result};
use crate::gf2::Gf2Vec;
use crate::model::{Allocation, Instance, Valuation};
use crate::poe::PoeValue;
use crate::solver::{SolveResult, TruncationDiagnostics};
use crate::welfare::{parse_rational, PParam, WelfareReport, WelfareValue};

pub const FORMAT_VERSION: u32 = 1;

/// Serde adapter for `BigRational` as `"a/b"`.
pub mod rational_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn emit<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported format_version {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ValuationFile {
    Additive { row: Vec<i64> },
    /// `columns[g]` is the GF(2) column vector of good `g`.
    Matroid { rows: usize, columns: Vec<Vec<u8>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    n: usize,
    m: usize,
    valuations: Vec<ValuationFile>,
}

pub fn instance_to_json(inst: &Instance, name: Option<&str>) -> String {
    let valuations = inst
        .valuations()
        .iter()
        .map(|v| match v {
            Valuation::BinaryAdditive { row } => ValuationFile::Additive {
                row: row.iter().map(|&b| b as i64).collect(),
            },
            Valuation::LinearMatroidGf2 { rows, cols } => ValuationFile::Matroid {
                rows: *rows,
                columns: cols.iter().map(|c| c.to_bits().into_iter().map(u8::from).collect()).collect(),
            },
        })
        .collect();
    emit(&InstanceFile {
        format_version: FORMAT_VERSION,
        name: name.map(str::to_string),
        n: inst.n(),
        m: inst.m(),
        valuations,
    })
}

/// Parsed instance and its optional name.
pub fn instance_from_json(text: &str) -> Result<(Instance, Option<String>)> {
    let file: InstanceFile = parse(text)?;
    check_version(file.format_version)?;
    if file.valuations.len() != file.n {
        return Err(Error::Parse(format!("n = {} but {} valuations", file.n, file.valuations.len())));
    }
    let mut vals = Vec::with_capacity(file.n);
    for (agent, v) in file.valuations.into_iter().enumerate() {
        vals.push(match v {
            ValuationFile::Additive { row } => Valuation::additive_from_ints(agent, &row)?,
            ValuationFile::Matroid { rows, columns } => {
                let mut cols = Vec::with_capacity(columns.len());
                for (good, c) in columns.into_iter().enumerate() {
                    if let Some(&bad) = c.iter().find(|&&b| b > 1) {
                        return Err(Error::NonBinaryEntry { agent, good, value: i64::from(bad) });
                    }
                    cols.push(Gf2Vec::from_bits(&c.iter().map(|&b| b == 1).collect::<Vec<_>>()));
                }
                Valuation::matroid(rows, cols)?
            }
        });
    }
    Ok((Instance::new(file.m, vals)?, file.name))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WelfareEntry {
    pub p: PParam,
    /// `None` for dominated allocations.
    pub exact: Option<String>,
    pub approx: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationReport {
    pub owner: Vec<i64>,
    pub values: Vec<u32>,
    pub positive_count: usize,
    pub welfare: Vec<WelfareEntry>,
}

impl AllocationReport {
    fn new(alloc: &Allocation, report: &WelfareReport) -> Self {
        let welfare = report
            .pmean
            .iter()
            .map(|e| WelfareEntry {
                p: e.p.clone(),
                exact: e.value.as_ref().and_then(WelfareValue::exact_string),
                approx: e.value.as_ref().map(WelfareValue::to_f64),
            })
            .collect();
        AllocationReport {
            owner: alloc.to_owner_array(),
            values: report.values.clone(),
            positive_count: report.positive_count,
            welfare,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoeEntry {
    pub p: PParam,
    /// Exact form where available, else the float.
    pub value: String,
    pub approx: f64,
    pub exact: bool,
}

impl PoeEntry {
    pub fn new(p: &PParam, v: &PoeValue) -> Self {
        PoeEntry {
            p: p.clone(),
            value: v.to_string(),
            approx: v.to_f64(),
            exact: !matches!(v, PoeValue::Float(_)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    pub format_version: u32,
    pub n: usize,
    pub m: usize,
    pub normalisation: Option<u32>,
    pub num_types: usize,
    pub max_positive_count: usize,
    pub l: u32,
    pub i_l: usize,
    pub a_star: AllocationReport,
    pub b: AllocationReport,
    pub poe: Vec<PoeEntry>,
    pub diagnostics: Option<TruncationDiagnostics>,
    pub warnings: Vec<String>,
}

impl SolveReport {
    pub fn new(inst: &Instance, res: &SolveResult) -> Self {
        SolveReport {
            format_version: FORMAT_VERSION,
            n: inst.n(),
            m: inst.m(),
            normalisation: inst.normalisation(),
            num_types: inst.num_types(),
            max_positive_count: res.opt.restrict,
            l: res.l,
            i_l: res.i_l,
            a_star: AllocationReport::new(&res.a_star, &res.opt),
            b: AllocationReport::new(&res.b, &res.fair),
            poe: res.poe.iter().map(|(p, v)| PoeEntry::new(p, v)).collect(),
            diagnostics: res.diagnostics.clone(),
            warnings: res.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        emit(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: SolveReport = parse(text)?;
        check_version(r.format_version)?;
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionFile {
    pub format_version: u32,
    pub weights: Vec<String>,
    pub allocations: Vec<Vec<i64>>,
}

impl DecompositionFile {
    pub fn new(lottery: &Lottery) -> Self {
        DecompositionFile {
            format_version: FORMAT_VERSION,
            weights: lottery.iter().map(|(w, _)| w.to_string()).collect(),
            allocations: lottery.iter().map(|(_, a)| a.to_owner_array()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        emit(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: DecompositionFile = parse(text)?;
        check_version(d.format_version)?;
        Ok(d)
    }

    pub fn to_lottery(&self, n: usize) -> Result<Lottery> {
        self.weights
            .iter()
            .zip(&self.allocations)
            .map(|(w, a)| Ok((parse_rational(w)?, Allocation::from_owner_array(n, a)?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doubly::randomized_allocation;
    use crate::generators::{example1, gen_submodular_lb_instance};
    use crate::solver::solve;

    #[test]
    fn instance_round_trip() {
        for inst in [example1(), gen_submodular_lb_instance(3).unwrap()] {
            let text = instance_to_json(&inst, Some("x"));
            let (back, name) = instance_from_json(&text).unwrap();
            assert_eq!(back, inst);
            assert_eq!(name.as_deref(), Some("x"));
            assert_eq!(instance_to_json(&back, Some("x")), text);
        }
    }

    #[test]
    fn instance_errors() {
        assert!(matches!(instance_from_json("{"), Err(Error::Parse(_))));
        let bad = r#"{"format_version":1,"n":1,"m":2,"valuations":[{"kind":"additive","row":[1,2]}]}"#;
        assert!(matches!(instance_from_json(bad), Err(Error::NonBinaryEntry { good: 1, .. })));
        let version = r#"{"format_version":9,"n":1,"m":1,"valuations":[{"kind":"additive","row":[1]}]}"#;
        assert!(instance_from_json(version).is_err());
    }

    #[test]
    fn report_round_trip() {
        let inst = example1();
        let res = solve(&inst, &PParam::standard_grid()).unwrap();
        let text = SolveReport::new(&inst, &res).to_json();
        let back = SolveReport::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert!(back.poe.iter().all(|e| (e.approx - 1.0).abs() < 1e-12));
    }

    #[test]
    fn decomposition_round_trip() {
        let inst = example1();
        let lottery = randomized_allocation(&inst).unwrap();
        let file = DecompositionFile::new(&lottery);
        let text = file.to_json();
        let back = DecompositionFile::from_json(&text).unwrap();
        assert_eq!(back.to_lottery(inst.n()).unwrap(), lottery);
        assert_eq!(back.to_json(), text);
    }
}
