//! Plain text mesh format and a Gmsh MSH 2.2 ASCII import subset.
//!
//! Text format (whitespace separated, LF line endings):
//!
//! ```text
//! dim nv nc
//! x y [z]        # nv lines
//! i0 i1 i2 [i3]  # nc lines, 1-based vertex indices
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{MeshError, Point, SimplicialMesh};

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<N: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<N, MeshError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} '{tok}'")))
}

/// Content lines with their 1-based line numbers; blank lines are skipped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn read_mesh_text(text: &str) -> Result<SimplicialMesh, MeshError> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty mesh file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 3 {
        return Err(parse_err(ln, "header must be 'dim nv nc'"));
    }
    let dim: usize = parse_num(head[0], ln, "dimension")?;
    let nv: usize = parse_num(head[1], ln, "vertex count")?;
    let nc: usize = parse_num(head[2], ln, "cell count")?;
    if dim != 2 && dim != 3 {
        return Err(parse_err(ln, format!("dimension {dim} not in {{2, 3}}")));
    }
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(ln + i + 1, "unexpected end of file in vertex block"))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != dim {
            return Err(parse_err(
                ln,
                format!("expected {dim} coordinates, found {}", toks.len()),
            ));
        }
        let mut p: Point = [0.0; 3];
        for (k, t) in toks.iter().enumerate() {
            p[k] = parse_num(t, ln, "coordinate")?;
            if !p[k].is_finite() {
                return Err(parse_err(ln, "non-finite coordinate"));
            }
        }
        vertices.push(p);
    }
    let mut cells = Vec::with_capacity(nc);
    let mut last = ln;
    for _ in 0..nc {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(last + 1, "unexpected end of file in cell block"))?;
        last = ln;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != dim + 1 {
            return Err(parse_err(
                ln,
                format!("expected {} vertex indices, found {}", dim + 1, toks.len()),
            ));
        }
        let mut cell = Vec::with_capacity(dim + 1);
        for t in toks {
            let idx: usize = parse_num(t, ln, "vertex index")?;
            if idx == 0 || idx > nv {
                return Err(parse_err(ln, format!("vertex index {idx} outside 1..={nv}")));
            }
            cell.push(idx - 1);
        }
        cells.push(cell);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after cell block"));
    }
    SimplicialMesh::new(dim, vertices, cells).map_err(|e| parse_err(0, e.to_string()))
}

/// Writes the text format; coordinates round-trip exactly.
pub fn write_mesh_text(mesh: &SimplicialMesh) -> String {
    let mut out = String::new();
    let dim = mesh.dim();
    writeln!(out, "{} {} {}", dim, mesh.vertex_count(), mesh.cell_count()).unwrap();
    for p in mesh.vertices() {
        let coords: Vec<String> = p[..dim].iter().map(|x| format!("{x:?}")).collect();
        writeln!(out, "{}", coords.join(" ")).unwrap();
    }
    for c in 0..mesh.cell_count() {
        let idx: Vec<String> = mesh.oriented_cell(c).iter().map(|v| (v + 1).to_string()).collect();
        writeln!(out, "{}", idx.join(" ")).unwrap();
    }
    out
}

/// Result of a Gmsh import: the mesh plus warnings about skipped content.
#[derive(Debug, Clone)]
pub struct GmshImport {
    pub mesh: SimplicialMesh,
    pub warnings: Vec<String>,
}

const GMSH_TRIANGLE: u32 = 2;
const GMSH_TETRAHEDRON: u32 = 4;

/// Reads nodes and 2-/3-simplex elements of a Gmsh MSH 2.2 ASCII file.
///
/// Triangles are ignored when tetrahedra are present; every other element
/// type is ignored with a warning. Nodes not referenced by a cell are dropped.
pub fn read_gmsh(text: &str) -> Result<GmshImport, MeshError> {
    let lines: Vec<(usize, &str)> = content_lines(text).collect();
    let mut pos = 0;
    let mut nodes: BTreeMap<u64, Point> = BTreeMap::new();
    let mut elements: Vec<(usize, u32, Vec<u64>)> = Vec::new();
    let mut warnings = Vec::new();
    let mut saw_format = false;
    while pos < lines.len() {
        let (ln, l) = lines[pos];
        pos += 1;
        match l {
            "$MeshFormat" => {
                let (fl, f) = *lines.get(pos).ok_or_else(|| parse_err(ln, "truncated $MeshFormat"))?;
                let toks: Vec<&str> = f.split_whitespace().collect();
                if toks.len() < 3 || !toks[0].starts_with('2') {
                    return Err(parse_err(fl, format!("unsupported mesh format '{f}'")));
                }
                if toks[1] != "0" {
                    return Err(parse_err(fl, "binary Gmsh files are not supported"));
                }
                saw_format = true;
                pos = expect_end(&lines, pos + 1, "$EndMeshFormat")?;
            }
            "$Nodes" => {
                let (cl, c) = *lines.get(pos).ok_or_else(|| parse_err(ln, "truncated $Nodes"))?;
                let count: usize = parse_num(c, cl, "node count")?;
                for i in 0..count {
                    let (nl, n) = *lines
                        .get(pos + 1 + i)
                        .ok_or_else(|| parse_err(cl, "truncated node block"))?;
                    let toks: Vec<&str> = n.split_whitespace().collect();
                    if toks.len() != 4 {
                        return Err(parse_err(nl, "node line must be 'id x y z'"));
                    }
                    let id: u64 = parse_num(toks[0], nl, "node id")?;
                    let mut p = [0.0; 3];
                    for k in 0..3 {
                        p[k] = parse_num(toks[k + 1], nl, "coordinate")?;
                    }
                    nodes.insert(id, p);
                }
                pos = expect_end(&lines, pos + 1 + count, "$EndNodes")?;
            }
            "$Elements" => {
                let (cl, c) = *lines.get(pos).ok_or_else(|| parse_err(ln, "truncated $Elements"))?;
                let count: usize = parse_num(c, cl, "element count")?;
                for i in 0..count {
                    let (el, e) = *lines
                        .get(pos + 1 + i)
                        .ok_or_else(|| parse_err(cl, "truncated element block"))?;
                    let toks: Vec<&str> = e.split_whitespace().collect();
                    if toks.len() < 3 {
                        return Err(parse_err(el, "element line too short"));
                    }
                    let kind: u32 = parse_num(toks[1], el, "element type")?;
                    let ntags: usize = parse_num(toks[2], el, "tag count")?;
                    let node_toks = toks
                        .get(3 + ntags..)
                        .ok_or_else(|| parse_err(el, "element line too short"))?;
                    let ids = node_toks
                        .iter()
                        .map(|t| parse_num::<u64>(t, el, "node id"))
                        .collect::<Result<Vec<_>, _>>()?;
                    elements.push((el, kind, ids));
                }
                pos = expect_end(&lines, pos + 1 + count, "$EndElements")?;
            }
            other if other.starts_with('$') && !other.starts_with("$End") => {
                let end = format!("$End{}", &other[1..]);
                warnings.push(format!("line {ln}: skipped section {other}"));
                while pos < lines.len() && lines[pos].1 != end {
                    pos += 1;
                }
                pos += 1;
            }
            _ => return Err(parse_err(ln, format!("unexpected content '{l}'"))),
        }
    }
    if !saw_format {
        return Err(parse_err(1, "missing $MeshFormat section"));
    }
    let dim = if elements.iter().any(|e| e.1 == GMSH_TETRAHEDRON) {
        3
    } else {
        2
    };
    let wanted = if dim == 3 { GMSH_TETRAHEDRON } else { GMSH_TRIANGLE };
    let mut skipped: BTreeMap<u32, usize> = BTreeMap::new();
    let mut renumber: BTreeMap<u64, usize> = BTreeMap::new();
    let mut cells_raw = Vec::new();
    for (el, kind, ids) in &elements {
        if *kind != wanted {
            *skipped.entry(*kind).or_insert(0) += 1;
            continue;
        }
        if ids.len() != dim + 1 {
            return Err(parse_err(*el, "simplex element with wrong node count"));
        }
        for id in ids {
            if !nodes.contains_key(id) {
                return Err(parse_err(*el, format!("element references unknown node {id}")));
            }
            renumber.insert(*id, 0);
        }
        cells_raw.push(ids.clone());
    }
    for (kind, n) in skipped {
        warnings.push(format!("ignored {n} element(s) of Gmsh type {kind}"));
    }
    if cells_raw.is_empty() {
        return Err(parse_err(0, "no triangle or tetrahedron elements"));
    }
    let mut vertices = Vec::with_capacity(renumber.len());
    for (id, slot) in renumber.iter_mut() {
        *slot = vertices.len();
        let p = nodes[id];
        if dim == 2 && p[2] != 0.0 {
            warnings.push(format!("node {id}: nonzero z coordinate dropped"));
        }
        vertices.push(if dim == 2 { [p[0], p[1], 0.0] } else { p });
    }
    let cells = cells_raw
        .iter()
        .map(|ids| ids.iter().map(|id| renumber[id]).collect())
        .collect();
    let mesh = SimplicialMesh::new(dim, vertices, cells).map_err(|e| parse_err(0, e.to_string()))?;
    Ok(GmshImport { mesh, warnings })
}

fn expect_end(lines: &[(usize, &str)], pos: usize, marker: &str) -> Result<usize, MeshError> {
    match lines.get(pos) {
        Some((_, l)) if *l == marker => Ok(pos + 1),
        Some((ln, l)) => Err(parse_err(*ln, format!("expected {marker}, found '{l}'"))),
        None => Err(parse_err(
            lines.last().map(|l| l.0).unwrap_or(0),
            format!("missing {marker}"),
        )),
    }
}

/// Reads either format, detected by a leading `$MeshFormat`.
pub fn read_mesh_file(path: &Path) -> Result<GmshImport, MeshError> {
    let text = std::fs::read_to_string(path).map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with("$MeshFormat") {
        read_gmsh(&text)
    } else {
        Ok(GmshImport {
            mesh: read_mesh_text(&text)?,
            warnings: Vec::new(),
        })
    }
}
