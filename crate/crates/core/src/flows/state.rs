use serde::{Deserialize, Serialize};

use super::finsler_flow::FinslerFlow;
use super::integrator::Scheme;
use super::kr::BaseMetric;
use crate::curvature::PositivityReport;
use crate::gridcore::{HermitianMatrixField, TensorField};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Finsler,
    Hym,
    Kr,
    MaxPrinciple,
}

/// The evolving field.
#[derive(Clone, Debug)]
pub enum Payload {
    /// u = log(G/G₀) on the P(E*) grid.
    Finsler(Vec<f64>),
    /// Bundle metric h on E.
    Hym(HermitianMatrixField),
    /// Kähler metric on TM.
    Kr(BaseMetric),
    /// The (1,1)-form η.
    MaxPrinciple(HermitianMatrixField),
}

/// One named scalar logged during a run (stitching defect, det ratio, ...).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub t: f64,
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    pub payload: Payload,
    pub dt: f64,
    pub step_count: usize,
    pub diagnostics: Vec<PositivityReport>,
    pub conserved: Vec<CheckRecord>,
}

impl FlowState {
    pub fn new(payload: Payload, dt: f64) -> Self {
        FlowState {
            t: 0.0,
            payload,
            dt,
            step_count: 0,
            diagnostics: vec![],
            conserved: vec![],
        }
    }

    pub fn kind(&self) -> FlowKind {
        match self.payload {
            Payload::Finsler(_) => FlowKind::Finsler,
            Payload::Hym(_) => FlowKind::Hym,
            Payload::Kr(_) => FlowKind::Kr,
            Payload::MaxPrinciple(_) => FlowKind::MaxPrinciple,
        }
    }

    /// The payload as named tensor fields for a snapshot.
    pub fn fields(&self, finsler: Option<&FinslerFlow>) -> Result<Vec<(String, TensorField)>> {
        match &self.payload {
            Payload::Finsler(u) => {
                let flow = finsler.ok_or_else(|| {
                    Error::Shape("the Finsler payload needs its flow grid".into())
                })?;
                flow.to_fields(u)
            }
            Payload::Hym(h) => Ok(vec![("h".into(), h.field.clone())]),
            Payload::Kr(g) => Ok(g
                .charts()
                .iter()
                .map(|c| (format!("g:{}", c.grid().chart_id), c.field.clone()))
                .collect()),
            Payload::MaxPrinciple(eta) => Ok(vec![("eta".into(), eta.field.clone())]),
        }
    }
}

/// One step of the Finsler flow on a state carrying u.
pub fn finsler_flow_step(
    state: &FlowState,
    flow: &FinslerFlow,
    dt: f64,
    scheme: Scheme,
) -> Result<FlowState> {
    let Payload::Finsler(u) = &state.payload else {
        return Err(Error::Shape(
            "finsler_flow_step needs a Finsler payload".into(),
        ));
    };
    let next = flow.step(u, dt, scheme)?;
    Ok(FlowState {
        t: state.t + dt,
        payload: Payload::Finsler(next),
        dt,
        step_count: state.step_count + 1,
        diagnostics: state.diagnostics.clone(),
        conserved: state.conserved.clone(),
    })
}
