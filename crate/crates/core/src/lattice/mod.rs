//! Heavy-hexagonal embedding of the rotated surface code.
//!
//! Data qubits sit on a `d x d` grid plus one extra row of `d - 1` qubits in the
//! top region. Grid rows are counted upward from the bottom boundary, so grid
//! row `d` is the extra row. Between horizontally neighbouring data qubits sits
//! at most one syndrome qubit, and every vertical data-data link goes through a
//! bridge qubit. Each data qubit therefore touches one syndrome qubit and up to
//! two bridges, which keeps every vertex at degree three or less.
//!
//! Weight-four stabilizers are measured by folding: a bridge-mediated CNOT from
//! grid row `r` to row `r + 1` on every column maps `X X X X` plaquettes onto the
//! two control qubits and `Z Z Z Z` plaquettes onto the two target qubits, where
//! a single syndrome qubit reads them out.

mod export;
mod svg;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bits::{gf2_rank, BitRow};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

pub use export::LayoutJson;
pub use svg::render_svg;

/// Odd code distance, at least 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u32")]
pub struct CodeDistance(u32);

impl CodeDistance {
    pub fn new(d: i64) -> Result<Self> {
        if d >= 3 && d % 2 == 1 && d <= u32::MAX as i64 {
            Ok(Self(d as u32))
        } else {
            Err(Error::InvalidDistance(d))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    fn n(self) -> usize {
        self.0 as usize
    }
}

impl TryFrom<i64> for CodeDistance {
    type Error = Error;
    fn try_from(d: i64) -> Result<Self> {
        Self::new(d)
    }
}

impl From<CodeDistance> for u32 {
    fn from(d: CodeDistance) -> u32 {
        d.0
    }
}

impl std::fmt::Display for CodeDistance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeVariant {
    Rotated,
    Unrotated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QubitCounts {
    pub data: u64,
    pub total: u64,
}

/// Physical qubit requirements on the heavy-hexagonal lattice.
pub fn qubit_counts(d: i64, variant: CodeVariant) -> Result<QubitCounts> {
    if d < 1 || d % 2 == 0 {
        return Err(Error::InvalidDistance(d));
    }
    let d = d as u64;
    Ok(match variant {
        // (5/2)d^2 + 2d - 7/2 is integral for odd d
        CodeVariant::Rotated => QubitCounts {
            data: d * d + d - 1,
            total: (5 * d * d + 4 * d - 7) / 2,
        },
        CodeVariant::Unrotated => QubitCounts {
            data: 2 * d * d - 1,
            total: 5 * d * d - 2 * (d + 1),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub usize);

impl QubitId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for QubitId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Physical lattice position; `y` grows downward as in the rendered picture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Data,
    Syndrome,
    Bridge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Qubit {
    pub id: QubitId,
    pub role: Role,
    pub coord: Coord,
}

/// Pauli type of a stabilizer or logical operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliKind {
    X,
    Z,
}

impl PauliKind {
    pub fn pauli(self) -> Pauli {
        match self {
            PauliKind::X => Pauli::X,
            PauliKind::Z => Pauli::Z,
        }
    }

    pub fn other(self) -> PauliKind {
        match self {
            PauliKind::X => PauliKind::Z,
            PauliKind::Z => PauliKind::X,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubGroup {
    A,
    B,
}

impl SubGroup {
    fn of_row(plaquette_row: i64) -> SubGroup {
        if plaquette_row.rem_euclid(2) == 0 {
            SubGroup::A
        } else {
            SubGroup::B
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightClass {
    Four,
    Two,
    One,
}

impl WeightClass {
    pub fn weight(self) -> usize {
        match self {
            WeightClass::Four => 4,
            WeightClass::Two => 2,
            WeightClass::One => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Bulk,
    Side,
    Top,
    Bottom,
}

/// How a stabilizer's eigenvalue is read out during its sub-round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Readout {
    /// Folded operator measured through a syndrome qubit.
    Ancilla { ancilla: QubitId, folded: Vec<QubitId> },
    /// Weight-one stabilizer read by measuring the data qubit itself.
    Direct(QubitId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stabilizer {
    pub pauli: PauliKind,
    pub support: Vec<QubitId>,
    pub subgroup: SubGroup,
    pub weight_class: WeightClass,
    pub boundary: BoundaryKind,
    pub readout: Readout,
}

impl Stabilizer {
    pub fn to_pauli_string(&self, num_qubits: usize) -> PauliString {
        PauliString::uniform(num_qubits, self.pauli.pauli(), self.support.iter().map(|q| q.0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalOperator {
    pub pauli: PauliKind,
    pub support: Vec<QubitId>,
}

impl LogicalOperator {
    pub fn to_pauli_string(&self, num_qubits: usize) -> PauliString {
        PauliString::uniform(num_qubits, self.pauli.pauli(), self.support.iter().map(|q| q.0))
    }
}

/// Bridge-mediated CNOT used to fold one column pair of a plaquette row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldLink {
    pub control: QubitId,
    pub bridge: QubitId,
    pub target: QubitId,
}

#[derive(Clone, Debug)]
pub struct LatticeLayout {
    d: CodeDistance,
    qubits: Vec<Qubit>,
    edges: Vec<(QubitId, QubitId)>,
    stabilizers: Vec<Stabilizer>,
    logical_z: LogicalOperator,
    logical_x: LogicalOperator,
    fold_links: [Vec<FoldLink>; 2],
    data_grid: HashMap<(usize, usize), QubitId>,
    by_coord: HashMap<Coord, QubitId>,
}

/// Grid-to-physical coordinate mapping.
struct Geometry {
    d: i32,
}

impl Geometry {
    fn data(&self, row: usize, col: usize) -> Coord {
        Coord {
            x: 2 * col as i32 + 1,
            y: 2 * (self.d - row as i32),
        }
    }
    /// Syndrome qubit between `(row, col)` and `(row, col + 1)`.
    fn gap(&self, row: usize, col: usize) -> Coord {
        Coord {
            x: 2 * col as i32 + 2,
            y: 2 * (self.d - row as i32),
        }
    }
    fn left(&self, row: usize) -> Coord {
        Coord {
            x: 0,
            y: 2 * (self.d - row as i32),
        }
    }
    fn right(&self, row: usize) -> Coord {
        Coord {
            x: 2 * self.d,
            y: 2 * (self.d - row as i32),
        }
    }
    /// Bridge between `(row, col)` and `(row + 1, col)`.
    fn bridge(&self, row: usize, col: usize) -> Coord {
        Coord {
            x: 2 * col as i32 + 1,
            y: 2 * (self.d - row as i32) - 1,
        }
    }
}

/// Plaquette `(row, col)` spans grid rows `row, row+1` and columns `col, col+1`.
fn plaquette_kind(row: i64, col: i64) -> PauliKind {
    if (row + col).rem_euclid(2) == 0 {
        PauliKind::Z
    } else {
        PauliKind::X
    }
}

pub fn build_layout(d: CodeDistance) -> LatticeLayout {
    let n = d.n();
    let geo = Geometry { d: n as i32 };

    // Collect positions first, then index row-major by (y, x).
    let mut sites: Vec<(Coord, Role)> = Vec::new();
    for row in 0..n {
        for col in 0..n {
            sites.push((geo.data(row, col), Role::Data));
        }
    }
    for col in 0..n - 1 {
        sites.push((geo.data(n, col), Role::Data));
    }
    for row in 0..n {
        for col in 0..n - 1 {
            if (row + col) % 2 == 1 {
                sites.push((geo.gap(row, col), Role::Syndrome));
            }
        }
    }
    for col in (0..n - 1).step_by(2) {
        sites.push((geo.gap(n, col), Role::Syndrome));
    }
    for row in (0..n - 1).step_by(2) {
        sites.push((geo.left(row), Role::Syndrome));
    }
    for row in (1..n - 1).step_by(2) {
        sites.push((geo.right(row), Role::Syndrome));
    }
    for row in 0..n {
        let cols = if row == n - 1 { n - 1 } else { n };
        for col in 0..cols {
            sites.push((geo.bridge(row, col), Role::Bridge));
        }
    }
    sites.sort_by_key(|(c, _)| (c.y, c.x));

    let qubits: Vec<Qubit> = sites
        .iter()
        .enumerate()
        .map(|(i, &(coord, role))| Qubit {
            id: QubitId(i),
            role,
            coord,
        })
        .collect();
    let by_coord: HashMap<Coord, QubitId> = qubits.iter().map(|q| (q.coord, q.id)).collect();
    let at = |c: Coord| by_coord[&c];

    let mut data_grid = HashMap::new();
    for row in 0..=n {
        let cols = if row == n { n - 1 } else { n };
        for col in 0..cols {
            data_grid.insert((row, col), at(geo.data(row, col)));
        }
    }
    let data = |row: usize, col: usize| data_grid[&(row, col)];

    let mut edges = Vec::new();
    let mut add_edge = |a: QubitId, b: QubitId| edges.push((a.min(b), a.max(b)));
    for row in 0..=n {
        let cols = if row == n { n - 1 } else { n };
        for col in 0..cols.saturating_sub(1) {
            if let Some(&s) = by_coord.get(&geo.gap(row, col)) {
                add_edge(s, data(row, col));
                add_edge(s, data(row, col + 1));
            }
        }
    }
    for row in (0..n - 1).step_by(2) {
        add_edge(at(geo.left(row)), data(row, 0));
    }
    for row in (1..n - 1).step_by(2) {
        add_edge(at(geo.right(row)), data(row, n - 1));
    }
    let mut fold_links: [Vec<FoldLink>; 2] = [Vec::new(), Vec::new()];
    for row in 0..n {
        let cols = if row == n - 1 { n - 1 } else { n };
        for col in 0..cols {
            let bridge = at(geo.bridge(row, col));
            let control = data(row, col);
            let target = data(row + 1, col);
            add_edge(control, bridge);
            add_edge(bridge, target);
            fold_links[SubGroup::of_row(row as i64) as usize].push(FoldLink {
                control,
                bridge,
                target,
            });
        }
    }
    edges.sort();
    edges.dedup();

    let mut stabilizers = Vec::new();
    let sorted = |mut v: Vec<QubitId>| {
        v.sort();
        v
    };
    // Bottom boundary: weight-two Z read directly on grid row 0.
    for col in (1..n - 1).step_by(2) {
        let support = sorted(vec![data(0, col), data(0, col + 1)]);
        stabilizers.push(Stabilizer {
            pauli: PauliKind::Z,
            support: support.clone(),
            subgroup: SubGroup::B,
            weight_class: WeightClass::Two,
            boundary: BoundaryKind::Bottom,
            readout: Readout::Ancilla {
                ancilla: at(geo.gap(0, col)),
                folded: support,
            },
        });
    }
    for row in 0..n - 1 {
        // Left side X boundary for even rows, right side for odd rows.
        if row % 2 == 0 {
            stabilizers.push(Stabilizer {
                pauli: PauliKind::X,
                support: sorted(vec![data(row, 0), data(row + 1, 0)]),
                subgroup: SubGroup::of_row(row as i64),
                weight_class: WeightClass::Two,
                boundary: BoundaryKind::Side,
                readout: Readout::Ancilla {
                    ancilla: at(geo.left(row)),
                    folded: vec![data(row, 0)],
                },
            });
        }
        for col in 0..n - 1 {
            let pauli = plaquette_kind(row as i64, col as i64);
            let support = sorted(vec![
                data(row, col),
                data(row, col + 1),
                data(row + 1, col),
                data(row + 1, col + 1),
            ]);
            let (ancilla, folded) = match pauli {
                PauliKind::X => (at(geo.gap(row, col)), vec![data(row, col), data(row, col + 1)]),
                PauliKind::Z => (
                    at(geo.gap(row + 1, col)),
                    vec![data(row + 1, col), data(row + 1, col + 1)],
                ),
            };
            stabilizers.push(Stabilizer {
                pauli,
                support,
                subgroup: SubGroup::of_row(row as i64),
                weight_class: WeightClass::Four,
                boundary: BoundaryKind::Bulk,
                readout: Readout::Ancilla { ancilla, folded },
            });
        }
        if row % 2 == 1 {
            stabilizers.push(Stabilizer {
                pauli: PauliKind::X,
                support: sorted(vec![data(row, n - 1), data(row + 1, n - 1)]),
                subgroup: SubGroup::of_row(row as i64),
                weight_class: WeightClass::Two,
                boundary: BoundaryKind::Side,
                readout: Readout::Ancilla {
                    ancilla: at(geo.right(row)),
                    folded: vec![data(row, n - 1)],
                },
            });
        }
    }
    // Top region: weight-four Z through the extra row, then weight-one Z on it.
    let top = n - 1;
    for col in (0..n - 1).step_by(2) {
        stabilizers.push(Stabilizer {
            pauli: PauliKind::Z,
            support: sorted(vec![data(top, col), data(top, col + 1), data(n, col), data(n, col + 1)]),
            subgroup: SubGroup::of_row(top as i64),
            weight_class: WeightClass::Four,
            boundary: BoundaryKind::Top,
            readout: Readout::Ancilla {
                ancilla: at(geo.gap(n, col)),
                folded: vec![data(n, col), data(n, col + 1)],
            },
        });
    }
    for col in 0..n - 1 {
        stabilizers.push(Stabilizer {
            pauli: PauliKind::Z,
            support: vec![data(n, col)],
            subgroup: SubGroup::of_row(top as i64 + 1),
            weight_class: WeightClass::One,
            boundary: BoundaryKind::Top,
            readout: Readout::Direct(data(n, col)),
        });
    }

    let mid = (n - 1) / 2;
    let logical_z = LogicalOperator {
        pauli: PauliKind::Z,
        support: sorted((0..n).map(|row| data(row, mid)).collect()),
    };
    let logical_x = LogicalOperator {
        pauli: PauliKind::X,
        support: sorted((0..n).map(|col| data(mid, col)).collect()),
    };

    LatticeLayout {
        d,
        qubits,
        edges,
        stabilizers,
        logical_z,
        logical_x,
        fold_links,
        data_grid,
        by_coord,
    }
}

impl LatticeLayout {
    pub fn distance(&self) -> CodeDistance {
        self.d
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[Qubit] {
        &self.qubits
    }

    pub fn qubit(&self, id: QubitId) -> &Qubit {
        &self.qubits[id.0]
    }

    pub fn qubits_with_role(&self, role: Role) -> impl Iterator<Item = QubitId> + '_ {
        self.qubits.iter().filter(move |q| q.role == role).map(|q| q.id)
    }

    pub fn data_qubits(&self) -> Vec<QubitId> {
        self.qubits_with_role(Role::Data).collect()
    }

    pub fn edges(&self) -> &[(QubitId, QubitId)] {
        &self.edges
    }

    pub fn has_edge(&self, a: QubitId, b: QubitId) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn degree(&self, q: QubitId) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == q || b == q).count()
    }

    pub fn stabilizers(&self) -> &[Stabilizer] {
        &self.stabilizers
    }

    pub fn stabilizers_in(&self, group: SubGroup) -> impl Iterator<Item = (usize, &Stabilizer)> {
        self.stabilizers
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.subgroup == group)
    }

    pub fn fold_links(&self, group: SubGroup) -> &[FoldLink] {
        &self.fold_links[group as usize]
    }

    pub fn logical_z(&self) -> &LogicalOperator {
        &self.logical_z
    }

    pub fn logical_x(&self) -> &LogicalOperator {
        &self.logical_x
    }

    pub fn logical(&self, kind: PauliKind) -> &LogicalOperator {
        match kind {
            PauliKind::X => &self.logical_x,
            PauliKind::Z => &self.logical_z,
        }
    }

    /// Data qubit at grid `(row, col)`; row `d` is the extra top-region row.
    pub fn data_at(&self, row: usize, col: usize) -> Option<QubitId> {
        self.data_grid.get(&(row, col)).copied()
    }

    /// Grid position of a data qubit.
    pub fn grid_position(&self, q: QubitId) -> Option<(usize, usize)> {
        self.data_grid.iter().find(|(_, &id)| id == q).map(|(&pos, _)| pos)
    }

    pub fn qubit_at(&self, coord: Coord) -> Option<QubitId> {
        self.by_coord.get(&coord).copied()
    }

    pub fn center(&self) -> QubitId {
        let mid = (self.d.n() - 1) / 2;
        self.data_grid[&(mid, mid)]
    }

    /// Rank of the stabilizer generators over GF(2).
    pub fn independent_generators(&self) -> usize {
        let n = self.num_qubits();
        let rows: Vec<BitRow> = self
            .stabilizers
            .iter()
            .map(|s| s.to_pauli_string(n).symplectic_row())
            .collect();
        gf2_rank(&rows)
    }

    /// Smallest weight of a single-type operator that commutes with every
    /// stabilizer yet is not a product of stabilizers, searching up to
    /// `max_weight`. Returns `None` if there is none that light.
    ///
    /// For CSS codes the minimum over single-type operators equals the code
    /// distance, so this is an exact distance check when `max_weight >= d`.
    pub fn min_logical_weight(&self, max_weight: usize) -> Option<usize> {
        let data = self.data_qubits();
        let n = self.num_qubits();
        let mut best: Option<usize> = None;
        for kind in [PauliKind::X, PauliKind::Z] {
            let checks: Vec<PauliString> = self
                .stabilizers
                .iter()
                .filter(|s| s.pauli != kind)
                .map(|s| s.to_pauli_string(n))
                .collect();
            let same: Vec<BitRow> = self
                .stabilizers
                .iter()
                .filter(|s| s.pauli == kind)
                .map(|s| s.to_pauli_string(n).symplectic_row())
                .collect();
            let base_rank = gf2_rank(&same);
            let limit = best.map_or(max_weight, |b| b - 1).min(max_weight);
            for w in 1..=limit {
                let found = combinations(data.len(), w).any(|subset| {
                    let op = PauliString::uniform(n, kind.pauli(), subset.iter().map(|&i| data[i].0));
                    if !checks.iter().all(|c| c.commutes_with(&op)) {
                        return false;
                    }
                    let mut rows = same.clone();
                    rows.push(op.symplectic_row());
                    gf2_rank(&rows) > base_rank
                });
                if found {
                    best = Some(w);
                    break;
                }
            }
        }
        best
    }
}

/// Lexicographic k-subsets of `0..n`.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}

/// Preparation basis for a data qubit in the injection protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InitBasis {
    /// `|0>`
    Z,
    /// `|+>`
    X,
}

impl InitBasis {
    pub fn kind(self) -> PauliKind {
        match self {
            InitBasis::Z => PauliKind::Z,
            InitBasis::X => PauliKind::X,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectionLayout {
    pub center: QubitId,
    /// Every data qubit except the center, in qubit order.
    pub init_basis: Vec<(QubitId, InitBasis)>,
}

impl InjectionLayout {
    pub fn basis_of(&self, q: QubitId) -> Option<InitBasis> {
        self.init_basis.iter().find(|(id, _)| *id == q).map(|&(_, b)| b)
    }
}

/// Initialization pattern for injecting a state on the central data qubit.
///
/// The row through the center (the `X_L` support) starts in `|+>`, the column
/// (the `Z_L` support) in `|0>`. The four quadrants alternate so that every
/// boundary stabilizer starts with eigenvalue +1, and the extra top-region row
/// starts in `|0>`.
pub fn injection_layout(layout: &LatticeLayout) -> Result<InjectionLayout> {
    let d = layout.distance();
    if d.get() != 3 {
        return Err(Error::UnsupportedDistance {
            d: d.get(),
            reason: "the injection protocol is defined for distance 3",
        });
    }
    let n = d.n();
    let mid = (n - 1) / 2;
    let center = layout.center();
    let mut init_basis = Vec::new();
    for q in layout.data_qubits() {
        if q == center {
            continue;
        }
        let (row, col) = layout.grid_position(q).expect("data qubit on grid");
        let basis = if row == n || col == mid {
            InitBasis::Z
        } else if row == mid || (row < mid) == (col < mid) {
            InitBasis::X
        } else {
            InitBasis::Z
        };
        init_basis.push((q, basis));
    }
    Ok(InjectionLayout { center, init_basis })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(d: i64) -> LatticeLayout {
        build_layout(CodeDistance::new(d).unwrap())
    }

    #[test]
    fn counts_match_closed_forms() {
        let c = qubit_counts(3, CodeVariant::Rotated).unwrap();
        assert_eq!((c.data, c.total), (11, 25));
        let c = qubit_counts(3, CodeVariant::Unrotated).unwrap();
        assert_eq!((c.data, c.total), (17, 37));
        let c = qubit_counts(1, CodeVariant::Rotated).unwrap();
        assert_eq!((c.data, c.total), (1, 1));
        let c = qubit_counts(15, CodeVariant::Rotated).unwrap();
        assert_eq!((c.data, c.total), (239, 589));
        assert!(qubit_counts(4, CodeVariant::Rotated).is_err());
        assert!(qubit_counts(-3, CodeVariant::Rotated).is_err());
        assert!(qubit_counts(0, CodeVariant::Unrotated).is_err());
    }

    #[test]
    fn distance_rejects_even_and_small() {
        assert!(CodeDistance::new(1).is_err());
        assert!(CodeDistance::new(4).is_err());
        assert!(CodeDistance::new(5).is_ok());
    }

    #[test]
    fn built_layouts_match_counting_formula() {
        for d in [3, 5, 7, 9] {
            let l = layout(d);
            let c = qubit_counts(d, CodeVariant::Rotated).unwrap();
            assert_eq!(l.data_qubits().len() as u64, c.data, "d={d}");
            assert_eq!(l.num_qubits() as u64, c.total, "d={d}");
        }
    }

    #[test]
    fn heavy_hex_degree_bound() {
        for d in [3, 5, 7] {
            let l = layout(d);
            let max = l.qubits().iter().map(|q| l.degree(q.id)).max().unwrap();
            assert!(max <= 3, "d={d} max degree {max}");
            for q in l.qubits_with_role(Role::Bridge) {
                assert_eq!(l.degree(q), 2);
            }
        }
    }

    #[test]
    fn stabilizers_commute_and_generator_count() {
        for d in [3, 5, 7] {
            let l = layout(d);
            let n = l.num_qubits();
            let ps: Vec<_> = l.stabilizers().iter().map(|s| s.to_pauli_string(n)).collect();
            for a in &ps {
                for b in &ps {
                    assert!(a.commutes_with(b));
                }
            }
            let du = d as usize;
            assert_eq!(l.independent_generators(), du * du + du - 2);
            assert_eq!(l.stabilizers().len(), du * du + du - 2);
            for s in l.stabilizers() {
                assert_eq!(s.support.len(), s.weight_class.weight());
                assert!(s.support.iter().all(|&q| l.qubit(q).role == Role::Data));
                if s.weight_class == WeightClass::One {
                    assert_eq!(s.pauli, PauliKind::Z);
                    assert_eq!(s.boundary, BoundaryKind::Top);
                }
            }
        }
    }

    #[test]
    fn logical_operators() {
        for d in [3, 5, 7] {
            let l = layout(d);
            let n = l.num_qubits();
            let zl = l.logical_z().to_pauli_string(n);
            let xl = l.logical_x().to_pauli_string(n);
            assert!(!zl.commutes_with(&xl));
            assert_eq!(l.logical_z().support.len(), d as usize);
            assert_eq!(l.logical_x().support.len(), d as usize);
            assert!(l.logical_z().support.contains(&l.center()));
            assert!(l.logical_x().support.contains(&l.center()));
            for s in l.stabilizers() {
                let p = s.to_pauli_string(n);
                assert!(p.commutes_with(&zl));
                assert!(p.commutes_with(&xl));
            }
        }
    }

    #[test]
    fn readouts_use_lattice_edges() {
        let l = layout(5);
        for s in l.stabilizers() {
            if let Readout::Ancilla { ancilla, folded } = &s.readout {
                assert_eq!(l.qubit(*ancilla).role, Role::Syndrome);
                for &q in folded {
                    assert!(l.has_edge(*ancilla, q));
                }
            }
        }
        for g in [SubGroup::A, SubGroup::B] {
            for link in l.fold_links(g) {
                assert!(l.has_edge(link.control, link.bridge));
                assert!(l.has_edge(link.bridge, link.target));
            }
        }
    }

    #[test]
    fn ancillas_not_shared_within_subgroup() {
        let l = layout(7);
        for g in [SubGroup::A, SubGroup::B] {
            let mut seen = std::collections::HashSet::new();
            for (_, s) in l.stabilizers_in(g) {
                let q = match &s.readout {
                    Readout::Ancilla { ancilla, .. } => *ancilla,
                    Readout::Direct(q) => *q,
                };
                assert!(seen.insert(q));
            }
        }
    }

    #[test]
    fn code_distance_by_exhaustive_search() {
        assert_eq!(layout(3).min_logical_weight(3), Some(3));
        assert_eq!(layout(5).min_logical_weight(5), Some(5));
    }

    #[test]
    fn injection_layout_shape() {
        let l = layout(3);
        let inj = injection_layout(&l).unwrap();
        assert_eq!(inj.center, l.center());
        assert_eq!(inj.init_basis.len(), 10);
        for &q in &l.logical_x().support {
            if q != inj.center {
                assert_eq!(inj.basis_of(q), Some(InitBasis::X));
            }
        }
        for &q in &l.logical_z().support {
            if q != inj.center {
                assert_eq!(inj.basis_of(q), Some(InitBasis::Z));
            }
        }
        assert!(matches!(
            injection_layout(&layout(5)),
            Err(Error::UnsupportedDistance { d: 5, .. })
        ));
    }

    #[test]
    fn injection_boundary_stabilizers_are_initially_satisfied() {
        let l = layout(3);
        let inj = injection_layout(&l).unwrap();
        for s in l.stabilizers() {
            let touches_center = s.support.contains(&inj.center);
            let all_eigen = s
                .support
                .iter()
                .all(|&q| inj.basis_of(q).map(InitBasis::kind) == Some(s.pauli));
            let has_conjugate = s
                .support
                .iter()
                .any(|&q| inj.basis_of(q).map(InitBasis::kind) == Some(s.pauli.other()));
            if touches_center {
                assert!(has_conjugate, "{s:?}");
            } else {
                assert!(all_eigen, "{s:?}");
            }
        }
    }
}
