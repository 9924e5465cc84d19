//! MSH 2.2 ASCII reader and writer.
//!
//! Only four-node quadrangles (type 3) become elements. Two-node lines
//! (type 1) carrying a physical group become tagged boundary edges; points
//! (type 15) are skipped. Any other element type is rejected.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{Node, NormalMode, Provenance, QuadElement, SurfaceMesh};
use crate::{Error, Result, Vec3};

const QUAD: u32 = 3;
const LINE: u32 = 1;
const POINT: u32 = 15;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate(), last: 0 }
    }

    /// Next non-empty line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim();
            if !line.is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let last = self.last;
        self.next().ok_or_else(|| parse_error(last + 1, format!("unexpected end of file, expected {what}")))
    }

    fn expect_exact(&mut self, token: &str) -> Result<usize> {
        let (n, line) = self.expect(token)?;
        if line != token {
            return Err(parse_error(n, format!("expected {token}, found {line:?}")));
        }
        Ok(n)
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn number<T: std::str::FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| parse_error(line, format!("missing {what}")))?;
    token.parse().map_err(|_| parse_error(line, format!("invalid {what} {token:?}")))
}

fn count(lines: &mut Lines, what: &str) -> Result<usize> {
    let (n, line) = lines.expect(what)?;
    number(Some(line), n, what)
}

/// Parses an MSH 2.2 ASCII file.
///
/// Nodes that no quadrangle references are dropped. The result carries
/// averaged nodal normals in the orientation of the file.
pub fn parse_msh(text: &str) -> Result<SurfaceMesh> {
    let mut lines = Lines::new(text);
    let mut names: HashMap<u32, String> = HashMap::new();
    let mut raw_nodes: Vec<(u64, Vec3)> = Vec::new();
    let mut quads: Vec<(usize, [u64; 4])> = Vec::new();
    let mut tag_lines: Vec<(usize, u32, [u64; 2])> = Vec::new();
    let mut seen_format = false;

    while let Some((n, header)) = lines.next() {
        match header {
            "$MeshFormat" => {
                let (vn, version) = lines.expect("format line")?;
                let mut it = version.split_whitespace();
                let v = it.next().unwrap_or("");
                if v != "2.2" {
                    return Err(parse_error(vn, format!("unsupported MSH version {v:?}, expected 2.2")));
                }
                if it.next() != Some("0") {
                    return Err(parse_error(vn, "only ASCII files (file-type 0) are supported"));
                }
                lines.expect_exact("$EndMeshFormat")?;
                seen_format = true;
            }
            "$PhysicalNames" => {
                for _ in 0..count(&mut lines, "physical name count")? {
                    let (pn, line) = lines.expect("physical name")?;
                    let mut it = line.splitn(3, char::is_whitespace);
                    let _dim: u32 = number(it.next(), pn, "physical dimension")?;
                    let tag: u32 = number(it.next(), pn, "physical tag")?;
                    let name = it.next().unwrap_or("").trim().trim_matches('"').to_string();
                    if name.is_empty() {
                        return Err(parse_error(pn, "empty physical name"));
                    }
                    names.insert(tag, name);
                }
                lines.expect_exact("$EndPhysicalNames")?;
            }
            "$Nodes" => {
                if !seen_format {
                    return Err(parse_error(n, "$Nodes before $MeshFormat"));
                }
                for _ in 0..count(&mut lines, "node count")? {
                    let (ln, line) = lines.expect("node")?;
                    let mut it = line.split_whitespace();
                    let id: u64 = number(it.next(), ln, "node id")?;
                    let x: f64 = number(it.next(), ln, "x coordinate")?;
                    let y: f64 = number(it.next(), ln, "y coordinate")?;
                    let z: f64 = number(it.next(), ln, "z coordinate")?;
                    raw_nodes.push((id, Vec3::new(x, y, z)));
                }
                lines.expect_exact("$EndNodes")?;
            }
            "$Elements" => {
                if !seen_format {
                    return Err(parse_error(n, "$Elements before $MeshFormat"));
                }
                for _ in 0..count(&mut lines, "element count")? {
                    let (ln, line) = lines.expect("element")?;
                    let mut it = line.split_whitespace();
                    let id: u64 = number(it.next(), ln, "element id")?;
                    let kind: u32 = number(it.next(), ln, "element type")?;
                    let ntags: usize = number(it.next(), ln, "tag count")?;
                    let mut tags = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        tags.push(number::<i64>(it.next(), ln, "element tag")?);
                    }
                    let physical = tags.first().copied().unwrap_or(0);
                    let ids: Vec<u64> =
                        it.map(|t| number(Some(t), ln, "node reference")).collect::<Result<_>>()?;
                    match kind {
                        QUAD if ids.len() == 4 => quads.push((ln, [ids[0], ids[1], ids[2], ids[3]])),
                        LINE if ids.len() == 2 => {
                            if physical > 0 {
                                tag_lines.push((ln, physical as u32, [ids[0], ids[1]]));
                            }
                        }
                        POINT if ids.len() == 1 => {}
                        QUAD | LINE | POINT => {
                            return Err(parse_error(
                                ln,
                                format!("element {id}: type {kind} with {} node references", ids.len()),
                            ))
                        }
                        other => {
                            return Err(parse_error(
                                ln,
                                format!("element {id}: unsupported element type {other}, only quadrangles (3) are accepted"),
                            ))
                        }
                    }
                }
                lines.expect_exact("$EndElements")?;
            }
            other if other.starts_with("$End") => {
                return Err(parse_error(n, format!("unmatched section terminator {other}")));
            }
            other if other.starts_with('$') => {
                // unknown section: skip to its terminator
                let end = format!("$End{}", &other[1..]);
                loop {
                    let (_, line) = lines.expect(&end)?;
                    if line == end {
                        break;
                    }
                }
            }
            other => return Err(parse_error(n, format!("unexpected content {other:?}"))),
        }
    }
    if !seen_format {
        return Err(parse_error(1, "missing $MeshFormat section"));
    }
    if quads.is_empty() {
        return Err(parse_error(lines.last.max(1), "file contains no quadrangle elements"));
    }

    let file_index: HashMap<u64, usize> = raw_nodes.iter().enumerate().map(|(i, (id, _))| (*id, i)).collect();
    if file_index.len() != raw_nodes.len() {
        return Err(parse_error(1, "duplicate node ids"));
    }
    let resolve = |id: u64, ln: usize| {
        file_index.get(&id).copied().ok_or_else(|| parse_error(ln, format!("reference to undefined node {id}")))
    };

    let mut referenced = vec![false; raw_nodes.len()];
    let mut file_quads = Vec::with_capacity(quads.len());
    for &(ln, ids) in &quads {
        let mut q = [0usize; 4];
        for (slot, &id) in q.iter_mut().zip(&ids) {
            *slot = resolve(id, ln)?;
            referenced[*slot] = true;
        }
        file_quads.push(q);
    }
    let mut dense = vec![usize::MAX; raw_nodes.len()];
    let mut nodes = Vec::new();
    for (i, (_, p)) in raw_nodes.iter().enumerate() {
        if referenced[i] {
            dense[i] = nodes.len();
            nodes.push(Node { id: nodes.len(), position: *p, normal: Vec3::zeros() });
        }
    }
    let elements: Vec<QuadElement> =
        file_quads.iter().map(|q| QuadElement { nodes: q.map(|i| dense[i]) }).collect();

    let mut mesh = SurfaceMesh {
        nodes,
        elements,
        tags: BTreeMap::new(),
        provenance: Provenance::Imported,
        surface: None,
    };

    let owner = mesh.boundary_edge_owner();
    for &(ln, physical, [a, b]) in &tag_lines {
        let a = dense[resolve(a, ln)?];
        let b = dense[resolve(b, ln)?];
        if a == usize::MAX || b == usize::MAX {
            return Err(parse_error(ln, "tagged line references a node outside every quadrangle"));
        }
        let &(e, k) = owner
            .get(&(a.min(b), a.max(b)))
            .ok_or_else(|| parse_error(ln, format!("tagged line ({a}, {b}) is not a boundary edge")))?;
        let name = names.get(&physical).cloned().unwrap_or_else(|| physical.to_string());
        mesh.tags.entry(name).or_default().push(mesh.elements[e].edges()[k]);
    }

    let mesh = mesh.compute_nodal_normals(NormalMode::Averaged)?;
    mesh.validate()?;
    Ok(mesh)
}

/// Serializes a mesh as MSH 2.2 ASCII. Coordinates use the shortest
/// representation that parses back to the same `f64`.
pub fn write_msh(mesh: &SurfaceMesh) -> String {
    let mut out = String::new();
    out.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n");
    let tag_ids: Vec<(&String, u32)> = mesh.tags.keys().zip(1..).collect();
    let surface_id = tag_ids.len() as u32 + 1;
    out.push_str("$PhysicalNames\n");
    let _ = writeln!(out, "{}", tag_ids.len() + 1);
    for (name, id) in &tag_ids {
        let _ = writeln!(out, "1 {id} \"{name}\"");
    }
    let _ = writeln!(out, "2 {surface_id} \"surface\"");
    out.push_str("$EndPhysicalNames\n$Nodes\n");
    let _ = writeln!(out, "{}", mesh.nodes.len());
    for (i, n) in mesh.nodes.iter().enumerate() {
        let p = n.position;
        let _ = writeln!(out, "{} {:?} {:?} {:?}", i + 1, p.x, p.y, p.z);
    }
    out.push_str("$EndNodes\n$Elements\n");
    let total = mesh.elements.len() + mesh.tags.values().map(Vec::len).sum::<usize>();
    let _ = writeln!(out, "{total}");
    let mut id = 0;
    for el in &mesh.elements {
        id += 1;
        let [a, b, c, d] = el.nodes.map(|i| i + 1);
        let _ = writeln!(out, "{id} 3 2 {surface_id} 1 {a} {b} {c} {d}");
    }
    for (name, tag) in &tag_ids {
        for &[a, b] in mesh.tag_edges(name) {
            id += 1;
            let _ = writeln!(out, "{id} 1 2 {tag} {tag} {} {}", a + 1, b + 1);
        }
    }
    out.push_str("$EndElements\n");
    out
}

/// Plain-text normals: one `id nx ny nz` line per node, 1-based ids matching
/// [`write_msh`].
pub fn write_normals(mesh: &SurfaceMesh) -> String {
    let mut out = String::new();
    for (i, n) in mesh.nodes.iter().enumerate() {
        let v = n.normal;
        let _ = writeln!(out, "{} {:?} {:?} {:?}", i + 1, v.x, v.y, v.z);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n\
        $PhysicalNames\n1\n1 7 \"junction\"\n$EndPhysicalNames\n\
        $Nodes\n5\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n9 5 5 5\n$EndNodes\n\
        $Elements\n3\n1 3 2 1 1 1 2 3 4\n2 1 2 7 1 2 1\n3 15 2 0 1 1\n$EndElements\n";

    #[test]
    fn minimal_square() {
        let m = parse_msh(SQUARE).unwrap();
        assert_eq!(m.elements.len(), 1);
        assert_eq!(m.nodes.len(), 4);
        assert_eq!(m.tag_edges("junction"), &[[0, 1]]);
        assert_eq!(m.provenance, Provenance::Imported);
        assert!((m.nodes[0].normal - Vec3::z()).norm() < 1e-15);
    }

    #[test]
    fn triangle_rejected_with_line() {
        let text = SQUARE.replace("3 15 2 0 1 1", "3 2 2 0 1 1 2 3");
        match parse_msh(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 20);
                assert!(message.contains("element 3"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let text = SQUARE.replace("2.2 0 8", "4.1 0 8");
        assert!(matches!(parse_msh(&text), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn dangling_reference_rejected() {
        let text = SQUARE.replace("1 3 2 1 1 1 2 3 4", "1 3 2 1 1 1 2 3 44");
        match parse_msh(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 18);
                assert!(message.contains("44"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_file() {
        let text = &SQUARE[..SQUARE.find("$EndNodes").unwrap()];
        assert!(matches!(parse_msh(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn write_then_parse_is_exact() {
        let m = parse_msh(SQUARE).unwrap();
        let again = parse_msh(&write_msh(&m)).unwrap();
        assert_eq!(again.elements, m.elements);
        assert_eq!(again.tags, m.tags);
        for (a, b) in m.nodes.iter().zip(&again.nodes) {
            assert_eq!(a.position, b.position);
        }
    }
}
