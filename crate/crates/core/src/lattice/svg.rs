use std::fmt::Write;

use super::{InitBasis, InjectionLayout, LatticeLayout, Role};

const SCALE: i32 = 40;
const MARGIN: i32 = 30;

fn fill(role: Role, basis: Option<InitBasis>, is_center: bool) -> &'static str {
    if is_center {
        return "#2ca02c";
    }
    match (role, basis) {
        (Role::Data, Some(InitBasis::X)) => "#d62728",
        (Role::Data, Some(InitBasis::Z)) => "#1f77b4",
        (Role::Data, None) => "#ffffff",
        (Role::Syndrome, _) => "#7f7f7f",
        (Role::Bridge, _) => "#c7c7c7",
    }
}

/// Draws the lattice. With an injection layout, data qubits are coloured by
/// preparation basis (red `|+>`, blue `|0>`) and the center is green.
pub fn render_svg(layout: &LatticeLayout, injection: Option<&InjectionLayout>) -> String {
    let (max_x, max_y) = layout
        .qubits()
        .iter()
        .fold((0, 0), |(mx, my), q| (mx.max(q.coord.x), my.max(q.coord.y)));
    let width = max_x * SCALE + 2 * MARGIN;
    let height = max_y * SCALE + 2 * MARGIN;
    let px = |v: i32| v * SCALE + MARGIN;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(out, r##"<g class="edges" stroke="#444444" stroke-width="3">"##).unwrap();
    for &(a, b) in layout.edges() {
        let (ca, cb) = (layout.qubit(a).coord, layout.qubit(b).coord);
        writeln!(
            out,
            r#"<line class="edge" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            px(ca.x),
            px(ca.y),
            px(cb.x),
            px(cb.y)
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, r#"<g class="qubits" stroke="black" stroke-width="1.5">"#).unwrap();
    for q in layout.qubits() {
        let basis = injection.and_then(|inj| inj.basis_of(q.id));
        let is_center = injection.is_some_and(|inj| inj.center == q.id);
        let radius = if q.role == Role::Bridge { 8 } else { 12 };
        let role = match q.role {
            Role::Data => "data",
            Role::Syndrome => "syndrome",
            Role::Bridge => "bridge",
        };
        let class = if is_center { "qubit center" } else { "qubit" };
        writeln!(
            out,
            r#"<circle class="{class}" data-id="{}" data-role="{role}" cx="{}" cy="{}" r="{radius}" fill="{}"/>"#,
            q.id,
            px(q.coord.x),
            px(q.coord.y),
            fill(q.role, basis, is_center)
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, "</svg>").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_layout, injection_layout, CodeDistance};

    #[test]
    fn one_node_per_qubit_and_deterministic() {
        let l = build_layout(CodeDistance::new(3).unwrap());
        let a = render_svg(&l, None);
        assert_eq!(a.matches("<circle").count(), 25);
        assert_eq!(a.matches("<line").count(), l.edges().len());
        assert_eq!(a, render_svg(&l, None));
        let inj = injection_layout(&l).unwrap();
        let b = render_svg(&l, Some(&inj));
        assert_eq!(b.matches("qubit center").count(), 1);
    }
}
