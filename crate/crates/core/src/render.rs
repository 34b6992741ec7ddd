//! Plain-text and SVG pictures of an instance on a 2- or 3-dimensional torus.
//!
//! The second axis grows upwards; three-dimensional tori are drawn as slices
//! along the third axis, side by side.

use std::fmt::Write;

use crate::abelian::Homomorphism;
use crate::constructions::Construction;
use crate::error::{PddsError, Result};
use crate::lattice::{TorusDims, TorusIndex};
use crate::verifier::{check_kernel, instantiate_on_torus, nearest_assignment, PddsInstance};

/// Largest torus that will be drawn.
pub const RENDER_VERTEX_LIMIT: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderFormat {
    Ascii,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelMode {
    /// Rank of `Phi(v)`; needs a homomorphism.
    GroupElements,
    /// Index of the component serving each vertex.
    ComponentIds,
    /// `#` on component vertices, `.` on other covered vertices.
    Devices,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderSpec {
    pub format: RenderFormat,
    pub label_mode: LabelMode,
}

struct Canvas {
    dims: Vec<i64>,
    labels: Vec<String>,
    device: Vec<bool>,
}

fn check_dims(torus: &TorusDims, format: RenderFormat) -> Result<()> {
    let ok = match format {
        RenderFormat::Ascii => torus.dim() == 2,
        RenderFormat::Svg => matches!(torus.dim(), 2 | 3),
    };
    if ok {
        Ok(())
    } else {
        Err(PddsError::UnsupportedRender(format!(
            "{format:?} output is not available in dimension {}",
            torus.dim()
        )))
    }
}

fn canvas(inst: &PddsInstance, hom: Option<&Homomorphism>, mode: LabelMode) -> Result<Canvas> {
    let ix = TorusIndex::new(inst.torus(), RENDER_VERTEX_LIMIT)?;
    let volume = ix.volume() as usize;
    let mut owner: Vec<Option<usize>> = vec![None; volume];
    let mut multi = vec![false; volume];
    nearest_assignment(inst, RENDER_VERTEX_LIMIT, |a| {
        let v = a.vertex as usize;
        if owner[v].is_some() {
            multi[v] = true;
        }
        owner[v] = Some(a.component);
    })?;
    let mut device = vec![false; volume];
    for i in 0..inst.len() {
        for v in inst.component_indices(i) {
            device[v as usize] = true;
        }
    }
    let labels = match mode {
        LabelMode::GroupElements => {
            let hom = hom.ok_or_else(|| {
                PddsError::UnsupportedRender("group element labels need a construction".into())
            })?;
            check_kernel(hom, inst.torus())?;
            (0..ix.volume())
                .map(|v| hom.rank_of(&ix.point(v)).map(|r| r.to_string()))
                .collect::<Result<Vec<_>>>()?
        }
        LabelMode::ComponentIds => (0..volume)
            .map(|v| match (owner[v], multi[v]) {
                (_, true) => "?".to_string(),
                (Some(c), false) => c.to_string(),
                (None, _) => String::new(),
            })
            .collect(),
        LabelMode::Devices => (0..volume)
            .map(|v| {
                if device[v] {
                    "#".to_string()
                } else if owner[v].is_some() {
                    ".".to_string()
                } else {
                    String::new()
                }
            })
            .collect(),
    };
    Ok(Canvas {
        dims: inst.torus().dims().to_vec(),
        labels,
        device,
    })
}

/// Vertex index of `(x, y, z)` with the last axis fastest.
fn at(dims: &[i64], x: i64, y: i64, z: i64) -> usize {
    match dims.len() {
        2 => (x * dims[1] + y) as usize,
        _ => ((x * dims[1] + y) * dims[2] + z) as usize,
    }
}

fn ascii(c: &Canvas) -> String {
    let width = c.labels.iter().map(String::len).max().unwrap_or(0).max(1);
    let mut out = String::new();
    for y in (0..c.dims[1]).rev() {
        let row: Vec<String> = (0..c.dims[0])
            .map(|x| format!("{:>width$}", c.labels[at(&c.dims, x, y, 0)]))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn svg(c: &Canvas) -> String {
    const CELL: i64 = 28;
    const GAP: i64 = CELL;
    let slices = if c.dims.len() == 3 { c.dims[2] } else { 1 };
    let (w, h) = (c.dims[0] * CELL, c.dims[1] * CELL);
    let total_w = slices * w + (slices - 1) * GAP;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{h}" viewBox="0 0 {total_w} {h}" font-family="monospace" font-size="11">"#
    );
    for z in 0..slices {
        let left = z * (w + GAP);
        for x in 0..c.dims[0] {
            for y in 0..c.dims[1] {
                let v = at(&c.dims, x, y, z);
                let px = left + x * CELL;
                let py = (c.dims[1] - 1 - y) * CELL;
                let fill = if c.device[v] { "#c8c8c8" } else { "#ffffff" };
                let _ = writeln!(
                    out,
                    r##"<rect x="{px}" y="{py}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#808080"/>"##
                );
                if !c.labels[v].is_empty() {
                    let _ = writeln!(
                        out,
                        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                        px + CELL / 2,
                        py + CELL / 2 + 4,
                        c.labels[v]
                    );
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

fn draw(c: &Canvas, format: RenderFormat) -> String {
    match format {
        RenderFormat::Ascii => ascii(c),
        RenderFormat::Svg => svg(c),
    }
}

pub fn render_instance(inst: &PddsInstance, spec: &RenderSpec) -> Result<String> {
    check_dims(inst.torus(), spec.format)?;
    Ok(draw(&canvas(inst, None, spec.label_mode)?, spec.format))
}

/// Draws `c` on `torus` (its period torus by default).
pub fn render_construction(
    c: &Construction,
    torus: Option<&TorusDims>,
    spec: &RenderSpec,
) -> Result<String> {
    let inst = instantiate_on_torus(c, torus)?;
    check_dims(inst.torus(), spec.format)?;
    Ok(draw(
        &canvas(&inst, Some(&c.hom), spec.label_mode)?,
        spec.format,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{pdds1_path, pdds1_q3, pdds1_square};
    use crate::lattice::BoxSpec;

    const ASCII_GROUP: RenderSpec = RenderSpec {
        format: RenderFormat::Ascii,
        label_mode: LabelMode::GroupElements,
    };

    #[test]
    fn square_zero_grid() {
        let text = render_construction(&pdds1_square(0).unwrap(), None, &ASCII_GROUP).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 4);
        let mut counts = [0; 12];
        for row in &rows {
            let cells: Vec<&str> = row.split_whitespace().collect();
            assert_eq!(cells.len(), 6);
            for c in cells {
                counts[c.parse::<usize>().unwrap()] += 1;
            }
        }
        assert_eq!(counts, [2; 12]);
        // bottom row is y = 0: Phi(x, 0) = 2x mod 12
        assert_eq!(
            rows[3].split_whitespace().collect::<Vec<_>>(),
            ["0", "2", "4", "6", "8", "10"]
        );
    }

    #[test]
    fn unsupported_dimensions() {
        let c = pdds1_path(4, 1).unwrap();
        assert!(matches!(
            render_construction(&c, None, &ASCII_GROUP),
            Err(PddsError::UnsupportedRender(_))
        ));
        let q3 = pdds1_q3().unwrap();
        assert!(render_construction(&q3, None, &ASCII_GROUP).is_err());
        let svg = RenderSpec {
            format: RenderFormat::Svg,
            label_mode: LabelMode::GroupElements,
        };
        let doc = render_construction(&q3, None, &svg).unwrap();
        assert!(doc.starts_with("<svg") && doc.ends_with("</svg>\n"));
        assert_eq!(doc.matches("<rect").count(), 64);
    }

    #[test]
    fn empty_instance_draws_blank_grid() {
        let torus = TorusDims::new(vec![3, 2]).unwrap();
        let inst =
            PddsInstance::from_components(torus, 1, BoxSpec::new(vec![1, 1]).unwrap(), vec![])
                .unwrap();
        let spec = RenderSpec {
            format: RenderFormat::Ascii,
            label_mode: LabelMode::ComponentIds,
        };
        assert_eq!(render_instance(&inst, &spec).unwrap(), "     \n     \n");
        assert!(render_instance(&inst, &ASCII_GROUP).is_err());
    }

    #[test]
    fn devices_mode_marks_components() {
        let spec = RenderSpec {
            format: RenderFormat::Ascii,
            label_mode: LabelMode::Devices,
        };
        let text = render_construction(&pdds1_square(0).unwrap(), None, &spec).unwrap();
        assert_eq!(text.matches('#').count(), 8);
        assert_eq!(text.matches('.').count(), 16);
    }
}
