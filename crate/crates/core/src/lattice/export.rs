use serde::{Deserialize, Serialize};

use super::{BoundaryKind, LatticeLayout, PauliKind, Role, SubGroup, WeightClass};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitJson {
    pub id: usize,
    pub role: Role,
    pub x: i32,
    pub y: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizerJson {
    #[serde(rename = "type")]
    pub pauli: PauliKind,
    pub support: Vec<usize>,
    pub subgroup: SubGroup,
    pub weight_class: WeightClass,
    pub boundary: BoundaryKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalJson {
    pub x: Vec<usize>,
    pub z: Vec<usize>,
}

/// Serializable view of a layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutJson {
    pub d: u32,
    pub qubits: Vec<QubitJson>,
    pub edges: Vec<[usize; 2]>,
    pub stabilizers: Vec<StabilizerJson>,
    pub logical: LogicalJson,
}

impl From<&LatticeLayout> for LayoutJson {
    fn from(l: &LatticeLayout) -> Self {
        let ids = |v: &[super::QubitId]| v.iter().map(|q| q.0).collect::<Vec<_>>();
        LayoutJson {
            d: l.distance().get(),
            qubits: l
                .qubits()
                .iter()
                .map(|q| QubitJson {
                    id: q.id.0,
                    role: q.role,
                    x: q.coord.x,
                    y: q.coord.y,
                })
                .collect(),
            edges: l.edges().iter().map(|&(a, b)| [a.0, b.0]).collect(),
            stabilizers: l
                .stabilizers()
                .iter()
                .map(|s| StabilizerJson {
                    pauli: s.pauli,
                    support: ids(&s.support),
                    subgroup: s.subgroup,
                    weight_class: s.weight_class,
                    boundary: s.boundary,
                })
                .collect(),
            logical: LogicalJson {
                x: ids(&l.logical_x().support),
                z: ids(&l.logical_z().support),
            },
        }
    }
}

impl LatticeLayout {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&LayoutJson::from(self)).expect("layout serializes")
    }
}
