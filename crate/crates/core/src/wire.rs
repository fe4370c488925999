//! JSON documents for spaces, maps, witnesses, measures, test functions,
//! retraction data, neighborhoods and homotopy tracks.
//!
//! Parsing goes through plain serde documents first and then through the
//! validating constructors, so every `parse_*` entry point either yields a
//! value satisfying all invariants or an [`Error`].

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homotopy::HomotopyTrack;
use crate::maxplus::MaxPlus;
use crate::measure::{IdempotentMeasure, Normalize};
use crate::space::{build_space, FiniteMetricSpace, HomotopyWitness, Point, PointSpec, SpaceMap, TestFunction};
use crate::subspace::AmbientRetractionData;
use crate::topology::{BracketNeighborhood, SubbaseNeighborhood};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coords: Vec<f64>,
}

/// `{"points":[{"id","coords"}], "metric":[[...]]}`; without `metric` the
/// Euclidean metric on `coords` is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub points: Vec<PointDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
}

impl SpaceDoc {
    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        SpaceDoc {
            points: space
                .points()
                .map(|p| PointDoc {
                    id: space.id(p).to_string(),
                    coords: space.coords(p).to_vec(),
                })
                .collect(),
            metric: Some(space.metric_rows()),
        }
    }

    pub fn to_space(&self) -> Result<FiniteMetricSpace> {
        let points = self
            .points
            .iter()
            .map(|p| PointSpec::new(p.id.clone(), p.coords.clone()))
            .collect();
        build_space(points, self.metric.clone())
    }
}

pub fn parse_space(json: &str) -> Result<FiniteMetricSpace> {
    serde_json::from_str::<SpaceDoc>(json)?.to_space()
}

fn resolve_space(
    embedded: &Option<SpaceDoc>,
    given: Option<&Arc<FiniteMetricSpace>>,
) -> Result<Arc<FiniteMetricSpace>> {
    match (embedded, given) {
        (Some(doc), _) => Ok(Arc::new(doc.to_space()?)),
        (None, Some(space)) => Ok(space.clone()),
        (None, None) => Err(Error::Config("document names no space".into())),
    }
}

/// `{"atoms":[["a",0.0],["b",-1.5]]}`, optionally with an embedded `"space"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceDoc>,
    pub atoms: Vec<(String, f64)>,
}

impl MeasureDoc {
    pub fn from_measure(mu: &IdempotentMeasure, embed_space: bool) -> Self {
        MeasureDoc {
            space: embed_space.then(|| SpaceDoc::from_space(mu.space())),
            atoms: mu
                .atoms()
                .iter()
                .map(|&(p, w)| (mu.space().id(p).to_string(), w.value()))
                .collect(),
        }
    }

    /// Uses the embedded space if present, else `space`.
    pub fn to_measure(&self, space: Option<&Arc<FiniteMetricSpace>>, mode: Normalize) -> Result<IdempotentMeasure> {
        let space = resolve_space(&self.space, space)?;
        let raw = self
            .atoms
            .iter()
            .map(|(id, w)| Ok((space.point(id)?, MaxPlus::finite(*w)?)))
            .collect::<Result<Vec<_>>>()?;
        IdempotentMeasure::canonicalize(space, raw, mode)
    }
}

pub fn parse_measure(json: &str, space: Option<&Arc<FiniteMetricSpace>>) -> Result<IdempotentMeasure> {
    serde_json::from_str::<MeasureDoc>(json)?.to_measure(space, Normalize::Reject)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValuesDoc {
    ById(BTreeMap<String, f64>),
    Ordered(Vec<f64>),
}

/// `{"values":{"a":1.0,...},"lipschitz":1.0}`; a missing bound is replaced
/// by the tightest one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionDoc {
    pub values: ValuesDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

impl TestFunctionDoc {
    pub fn from_function(phi: &TestFunction) -> Self {
        let s = phi.space();
        TestFunctionDoc {
            values: ValuesDoc::ById(s.points().map(|p| (s.id(p).to_string(), phi.value(p))).collect()),
            lipschitz: Some(phi.lipschitz()),
        }
    }

    pub fn to_function(&self, space: &Arc<FiniteMetricSpace>) -> Result<TestFunction> {
        let values = match &self.values {
            ValuesDoc::Ordered(v) => v.clone(),
            ValuesDoc::ById(map) => {
                let mut v = vec![None; space.len()];
                for (id, &x) in map {
                    v[space.point(id)?.0] = Some(x);
                }
                v.into_iter()
                    .enumerate()
                    .map(|(i, x)| {
                        x.ok_or_else(|| Error::InvalidTestFunction(format!("no value at {}", space.id(Point(i)))))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        match self.lipschitz {
            Some(l) => TestFunction::new(space.clone(), values, l),
            None => TestFunction::tight(space.clone(), values),
        }
    }
}

pub fn parse_test_function(json: &str, space: &Arc<FiniteMetricSpace>) -> Result<TestFunction> {
    serde_json::from_str::<TestFunctionDoc>(json)?.to_function(space)
}

/// `{"table":{"a":"p"}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub table: BTreeMap<String, String>,
}

impl MapDoc {
    pub fn from_map(f: &SpaceMap) -> Self {
        let (d, c) = (f.domain(), f.codomain());
        MapDoc {
            table: d
                .points()
                .map(|p| (d.id(p).to_string(), c.id(f.apply(p)).to_string()))
                .collect(),
        }
    }

    pub fn to_map(&self, domain: &Arc<FiniteMetricSpace>, codomain: &Arc<FiniteMetricSpace>) -> Result<SpaceMap> {
        let mut table = vec![None; domain.len()];
        for (from, to) in &self.table {
            table[domain.point(from)?.0] = Some(codomain.point(to)?);
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.ok_or_else(|| Error::MapNotTotal(format!("no image for {}", domain.id(Point(i))))))
            .collect::<Result<Vec<_>>>()?;
        SpaceMap::new(domain.clone(), codomain.clone(), table)
    }
}

pub fn parse_map(json: &str, domain: &Arc<FiniteMetricSpace>, codomain: &Arc<FiniteMetricSpace>) -> Result<SpaceMap> {
    serde_json::from_str::<MapDoc>(json)?.to_map(domain, codomain)
}

/// `{"steps":[{"table":...},...],"step_bound":0.1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDoc {
    pub steps: Vec<MapDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_bound: Option<f64>,
}

impl WitnessDoc {
    pub fn from_witness(w: &HomotopyWitness) -> Self {
        WitnessDoc {
            steps: w.steps().iter().map(MapDoc::from_map).collect(),
            step_bound: Some(w.step_bound()),
        }
    }

    pub fn to_witness(
        &self,
        domain: &Arc<FiniteMetricSpace>,
        codomain: &Arc<FiniteMetricSpace>,
    ) -> Result<HomotopyWitness> {
        let steps = self
            .steps
            .iter()
            .map(|s| s.to_map(domain, codomain))
            .collect::<Result<Vec<_>>>()?;
        match self.step_bound {
            Some(b) => HomotopyWitness::new(steps, b),
            None => HomotopyWitness::tight(steps),
        }
    }
}

pub fn parse_witness(
    json: &str,
    domain: &Arc<FiniteMetricSpace>,
    codomain: &Arc<FiniteMetricSpace>,
) -> Result<HomotopyWitness> {
    serde_json::from_str::<WitnessDoc>(json)?.to_witness(domain, codomain)
}

/// `{"X":[ids],"U":[ids],"r":{"y2":"y1"}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetractionDoc {
    #[serde(rename = "X")]
    pub x: Vec<String>,
    #[serde(rename = "U")]
    pub u: Vec<String>,
    #[serde(default)]
    pub r: BTreeMap<String, String>,
}

impl RetractionDoc {
    pub fn from_data(data: &AmbientRetractionData) -> Self {
        let s = data.space();
        let ids = |v: &[Point]| v.iter().map(|&p| s.id(p).to_string()).collect();
        let in_x = |p: Point| data.x().contains(&p);
        RetractionDoc {
            x: ids(data.x()),
            u: ids(data.u()),
            r: data
                .u()
                .iter()
                .filter(|&&p| !in_x(p))
                .map(|&p| {
                    (
                        s.id(p).to_string(),
                        s.id(data.retract_point(p).expect("defined on U")).to_string(),
                    )
                })
                .collect(),
        }
    }

    pub fn to_data(&self, space: &Arc<FiniteMetricSpace>) -> Result<AmbientRetractionData> {
        let pts = |v: &[String]| v.iter().map(|id| space.point(id)).collect::<Result<Vec<_>>>();
        let r = self
            .r
            .iter()
            .map(|(a, b)| Ok((space.point(a)?, space.point(b)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        AmbientRetractionData::new(space.clone(), pts(&self.x)?, pts(&self.u)?, &r)
    }
}

pub fn parse_retraction(json: &str, space: &Arc<FiniteMetricSpace>) -> Result<AmbientRetractionData> {
    serde_json::from_str::<RetractionDoc>(json)?.to_data(space)
}

/// `{"measure":…, "radii":[…], "epsilon":0.5}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketDoc {
    pub measure: MeasureDoc,
    pub radii: Vec<f64>,
    pub epsilon: f64,
}

impl BracketDoc {
    pub fn from_bracket(n: &BracketNeighborhood, embed_space: bool) -> Self {
        BracketDoc {
            measure: MeasureDoc::from_measure(n.base(), embed_space),
            radii: n.radii().to_vec(),
            epsilon: n.epsilon(),
        }
    }

    pub fn to_bracket(&self, space: Option<&Arc<FiniteMetricSpace>>) -> Result<BracketNeighborhood> {
        let base = self.measure.to_measure(space, Normalize::Reject)?;
        BracketNeighborhood::new(base, self.radii.clone(), self.epsilon)
    }
}

/// `{"measure":…, "phi":{"values":…,"lipschitz":1.0}, "epsilon":0.5}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubbaseDoc {
    pub measure: MeasureDoc,
    pub phi: TestFunctionDoc,
    pub epsilon: f64,
}

impl SubbaseDoc {
    pub fn from_subbase(n: &SubbaseNeighborhood, embed_space: bool) -> Self {
        SubbaseDoc {
            measure: MeasureDoc::from_measure(n.base(), embed_space),
            phi: TestFunctionDoc::from_function(n.phi()),
            epsilon: n.epsilon(),
        }
    }

    pub fn to_subbase(&self, space: Option<&Arc<FiniteMetricSpace>>) -> Result<SubbaseNeighborhood> {
        let base = self.measure.to_measure(space, Normalize::Reject)?;
        let phi = self.phi.to_function(base.space())?;
        SubbaseNeighborhood::new(base, phi, self.epsilon)
    }
}

/// Either neighborhood literal, told apart by its fields.
#[derive(Clone, Debug)]
pub enum Neighborhood {
    Bracket(BracketNeighborhood),
    Subbase(SubbaseNeighborhood),
}

pub fn parse_neighborhood(json: &str, space: Option<&Arc<FiniteMetricSpace>>) -> Result<Neighborhood> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    if value.get("phi").is_some() {
        Ok(Neighborhood::Subbase(
            serde_json::from_value::<SubbaseDoc>(value)?.to_subbase(space)?,
        ))
    } else {
        Ok(Neighborhood::Bracket(
            serde_json::from_value::<BracketDoc>(value)?.to_bracket(space)?,
        ))
    }
}

/// `{"t":[...],"states":[measure literals]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceDoc>,
    pub t: Vec<f64>,
    pub states: Vec<MeasureDoc>,
}

impl TrackDoc {
    pub fn from_track(track: &HomotopyTrack, embed_space: bool) -> Self {
        TrackDoc {
            space: embed_space.then(|| SpaceDoc::from_space(track.states()[0].space())),
            t: track.t_grid().to_vec(),
            states: track
                .states()
                .iter()
                .map(|s| MeasureDoc::from_measure(s, false))
                .collect(),
        }
    }

    pub fn to_track(&self, space: Option<&Arc<FiniteMetricSpace>>) -> Result<HomotopyTrack> {
        let space = resolve_space(&self.space, space)?;
        let states = self
            .states
            .iter()
            .map(|s| s.to_measure(Some(&space), Normalize::Reject))
            .collect::<Result<Vec<_>>>()?;
        HomotopyTrack::new(self.t.clone(), states)
    }
}

pub fn parse_track(json: &str, space: Option<&Arc<FiniteMetricSpace>>) -> Result<HomotopyTrack> {
    serde_json::from_str::<TrackDoc>(json)?.to_track(space)
}
