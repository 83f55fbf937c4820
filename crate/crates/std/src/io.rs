//! Edge-list ingestion and the binary graph format.
//!
//! ASCII parsing is chunk-parallel: the byte range is split, each chunk
//! start is advanced to the next newline, chunks are parsed independently
//! and concatenated in chunk order, then globally sorted. The result is
//! byte-identical to a sequential parse regardless of chunk count.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::thread;

use blockgraph_core::{Graph, VertexId};
use thiserror::Error;

const MAGIC: &[u8; 4] = b"PGBB";
const VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed token {token:?}")]
    Malformed { line: usize, token: String },
    #[error("line {line}: vertex id {value} out of range")]
    VertexRange { line: usize, value: u64 },
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u64),
    #[error("truncated file: expected {expected} more bytes")]
    Truncated { expected: u64 },
    #[error("invalid graph data: {0}")]
    InvalidGraph(String),
}

/// Options for [`parse_edge_list`].
#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Add the reverse of every edge.
    pub symmetrize: bool,
    /// Remove duplicate directed edges.
    pub dedupe: bool,
    pub drop_self_loops: bool,
    /// Input ids start at 1.
    pub one_indexed: bool,
    /// Worker count for chunked parsing; 0 means available parallelism.
    pub chunks: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            symmetrize: true,
            dedupe: true,
            drop_self_loops: true,
            one_indexed: false,
            chunks: 0,
        }
    }
}

/// Parses a whitespace-separated "u v [w]" edge list. Lines starting
/// with '#' or '%' are comments. A MatrixMarket size header (first
/// non-comment line with three counts matching the data) is skipped.
/// Edge weights are parsed for validity and discarded: none of the
/// shipped kernels consume them.
pub fn parse_edge_list(path: &Path, options: &ParseOptions) -> Result<Graph, IoError> {
    let bytes = fs::read(path)?;
    parse_edge_list_bytes(&bytes, options)
}

pub fn parse_edge_list_bytes(bytes: &[u8], options: &ParseOptions) -> Result<Graph, IoError> {
    let chunks = if options.chunks == 0 {
        thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
    } else {
        options.chunks
    };
    // MatrixMarket tolerance: a leading three-count "n n m" line is a
    // header candidate, confirmed once the ids have been seen.
    let (header, body_start) = scan_size_header(bytes);
    let skipped_lines = bytes[..body_start].iter().filter(|&&b| b == b'\n').count();
    let body = &bytes[body_start..];
    let ranges = chunk_ranges(body, chunks);
    // line numbers per chunk start, for error reporting
    let mut chunk_first_line = Vec::with_capacity(ranges.len());
    {
        let mut line = 1 + skipped_lines;
        let mut pos = 0usize;
        for &(start, _) in &ranges {
            line += body[pos..start].iter().filter(|&&b| b == b'\n').count();
            pos = start;
            chunk_first_line.push(line);
        }
    }
    let parsed: Vec<Result<Vec<(u64, u64)>, IoError>> = thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .iter()
            .zip(&chunk_first_line)
            .map(|(&(start, end), &first_line)| {
                scope.spawn(move || parse_chunk(&body[start..end], first_line))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("parser thread panicked")).collect()
    });

    let mut raw: Vec<(u64, u64)> = Vec::new();
    for part in parsed {
        raw.extend(part?);
    }

    let mut header_n = 0usize;
    if let Some((a, b)) = header {
        let base = if options.one_indexed { 1u64 } else { 0 };
        let max_id = raw.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0);
        let is_header = a == b && a > 0 && max_id <= a - 1 + base;
        if is_header {
            header_n = a as usize;
        } else {
            // not a size header after all; treat it as a weighted edge
            raw.insert(0, (a, b));
        }
    }

    let mut edges: Vec<(VertexId, VertexId)> = Vec::with_capacity(raw.len());
    let base = if options.one_indexed { 1u64 } else { 0 };
    for (line, &(mut u, mut v)) in raw.iter().enumerate() {
        if options.one_indexed {
            if u < base || v < base {
                return Err(IoError::VertexRange { line: line + 1, value: u.min(v) });
            }
            u -= base;
            v -= base;
        }
        if u > u32::MAX as u64 || v > u32::MAX as u64 {
            return Err(IoError::VertexRange { line: line + 1, value: u.max(v) });
        }
        if options.drop_self_loops && u == v {
            continue;
        }
        edges.push((u as VertexId, v as VertexId));
        if options.symmetrize && u != v {
            edges.push((v as VertexId, u as VertexId));
        }
    }
    let n = edges
        .iter()
        .map(|&(u, v)| u.max(v) as usize + 1)
        .max()
        .unwrap_or(0)
        .max(header_n);
    if !options.dedupe {
        edges.sort_unstable();
        return Ok(graph_from_sorted(n, edges, options.symmetrize));
    }
    Ok(Graph::from_edges(n, edges, options.symmetrize))
}

fn graph_from_sorted(n: usize, edges: Vec<(VertexId, VertexId)>, symmetrized: bool) -> Graph {
    // keeps duplicates; from_edges would dedupe
    let mut offsets = vec![0u64; n + 1];
    for &(u, _) in &edges {
        offsets[u as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let adjacency = edges.into_iter().map(|(_, v)| v).collect();
    Graph::from_csr_unchecked(offsets, adjacency, symmetrized)
}

/// Looks for a MatrixMarket-style size line: the first non-comment line
/// with exactly three numeric fields. Returns its first two counts and
/// the byte offset just past it, or (None, 0) when absent.
fn scan_size_header(bytes: &[u8]) -> (Option<(u64, u64)>, usize) {
    let mut pos = 0usize;
    while pos < bytes.len() {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| pos + i + 1)
            .unwrap_or(bytes.len());
        let line = &bytes[pos..end];
        let line = line.strip_suffix(b"\n").unwrap_or(line);
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        let fields: Vec<&[u8]> = line
            .split(|&b| b == b' ' || b == b'\t')
            .filter(|f| !f.is_empty())
            .collect();
        match fields.first() {
            None => {
                pos = end;
                continue;
            }
            Some(f) if f[0] == b'#' || f[0] == b'%' => {
                pos = end;
                continue;
            }
            _ => {}
        }
        if fields.len() == 3 {
            let nums: Option<Vec<u64>> = fields
                .iter()
                .map(|f| std::str::from_utf8(f).ok().and_then(|s| s.parse::<u64>().ok()))
                .collect();
            if let Some(nums) = nums {
                // only an integer triple can be a size line; anything else
                // (e.g. a float weight) is an ordinary edge
                return (Some((nums[0], nums[1])), end);
            }
        }
        return (None, 0);
    }
    (None, 0)
}

/// Splits [0, len) into chunks whose starts are advanced past the next
/// newline so no line straddles two chunks.
fn chunk_ranges(bytes: &[u8], chunks: usize) -> Vec<(usize, usize)> {
    let len = bytes.len();
    let chunks = chunks.max(1);
    let mut starts = vec![0usize];
    for i in 1..chunks {
        let mut pos = len * i / chunks;
        if pos <= *starts.last().unwrap() {
            continue;
        }
        while pos < len && bytes[pos - 1] != b'\n' {
            pos += 1;
        }
        if pos > *starts.last().unwrap() && pos < len {
            starts.push(pos);
        }
    }
    starts.push(len);
    starts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn parse_chunk(bytes: &[u8], first_line: usize) -> Result<Vec<(u64, u64)>, IoError> {
    let mut edges = Vec::new();
    for (offset, line) in bytes.split(|&b| b == b'\n').enumerate() {
        let line_no = first_line + offset;
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        let mut fields = line
            .split(|&b| b == b' ' || b == b'\t')
            .filter(|f| !f.is_empty());
        let Some(first) = fields.next() else { continue };
        if first[0] == b'#' || first[0] == b'%' {
            continue;
        }
        let u = parse_u64(first, line_no)?;
        let second = fields
            .next()
            .ok_or_else(|| IoError::Malformed { line: line_no, token: String::new() })?;
        let v = parse_u64(second, line_no)?;
        if let Some(w) = fields.next() {
            // weight column: validate, then discard
            std::str::from_utf8(w)
                .ok()
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| IoError::Malformed {
                    line: line_no,
                    token: String::from_utf8_lossy(w).into_owned(),
                })?;
        }
        edges.push((u, v));
    }
    Ok(edges)
}

fn parse_u64(token: &[u8], line: usize) -> Result<u64, IoError> {
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .ok_or_else(|| IoError::Malformed {
            line,
            token: String::from_utf8_lossy(token).into_owned(),
        })
}

/// Binary layout, all little-endian: magic "PGBB", version u64 = 1,
/// n u64, m u64, id width byte (4 when n < 2^32, else 8), then (n+1)
/// 8-byte offsets and m id-width adjacency entries.
pub fn write_binary(graph: &Graph, path: &Path) -> Result<(), IoError> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let n = graph.num_vertices() as u64;
    let m = graph.num_edges() as u64;
    let id_width: u8 = if n < (1u64 << 32) { 4 } else { 8 };
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&m.to_le_bytes())?;
    w.write_all(&[id_width])?;
    for &off in graph.offsets() {
        w.write_all(&off.to_le_bytes())?;
    }
    for &v in graph.adjacency() {
        if id_width == 4 {
            w.write_all(&v.to_le_bytes())?;
        } else {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<Graph, IoError> {
    let mut file = fs::File::open(path)?;
    let mut header = [0u8; 4 + 8 + 8 + 8 + 1];
    read_exact(&mut file, &mut header)?;
    let magic: [u8; 4] = header[0..4].try_into().unwrap();
    if &magic != MAGIC {
        return Err(IoError::BadMagic(magic));
    }
    let version = u64::from_le_bytes(header[4..12].try_into().unwrap());
    if version != VERSION {
        return Err(IoError::UnsupportedVersion(version));
    }
    let n = u64::from_le_bytes(header[12..20].try_into().unwrap());
    let m = u64::from_le_bytes(header[20..28].try_into().unwrap());
    let id_width = header[28] as u64;
    if id_width != 4 && id_width != 8 {
        return Err(IoError::InvalidGraph(format!("bad id width {id_width}")));
    }
    let mut offsets_raw = vec![0u8; ((n + 1) * 8) as usize];
    read_exact(&mut file, &mut offsets_raw)?;
    let offsets: Vec<u64> = offsets_raw
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut adj_raw = vec![0u8; (m * id_width) as usize];
    read_exact(&mut file, &mut adj_raw)?;
    let adjacency: Result<Vec<VertexId>, IoError> = adj_raw
        .chunks_exact(id_width as usize)
        .map(|c| {
            let v = if id_width == 4 {
                u32::from_le_bytes(c.try_into().unwrap()) as u64
            } else {
                u64::from_le_bytes(c.try_into().unwrap())
            };
            if v > u32::MAX as u64 {
                Err(IoError::VertexRange { line: 0, value: v })
            } else {
                Ok(v as VertexId)
            }
        })
        .collect();
    Graph::from_csr(offsets, adjacency?, true)
        .map_err(|e| IoError::InvalidGraph(e.to_string()))
}

fn read_exact(file: &mut fs::File, buf: &mut [u8]) -> Result<(), IoError> {
    let mut filled = 0usize;
    while filled < buf.len() {
        let read = file.read(&mut buf[filled..])?;
        if read == 0 {
            return Err(IoError::Truncated { expected: (buf.len() - filled) as u64 });
        }
        filled += read;
    }
    Ok(())
}

/// Writes a graph back out as a zero-indexed ASCII edge list (one
/// directed edge per line).
pub fn write_edge_list(graph: &Graph, path: &Path) -> Result<(), IoError> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    for (u, v) in graph.edges() {
        writeln!(w, "{u}\t{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Relabels vertices by non-decreasing degree, ties broken by original
/// id. Returns the relabeled graph and the old->new permutation.
pub fn degree_relabel(graph: &Graph) -> (Graph, Vec<VertexId>) {
    let n = graph.num_vertices();
    let mut order: Vec<VertexId> = (0..n as VertexId).collect();
    order.sort_by_key(|&v| (graph.degree(v), v));
    let mut perm = vec![0 as VertexId; n];
    for (new_id, &old_id) in order.iter().enumerate() {
        perm[old_id as usize] = new_id as VertexId;
    }
    let edges = graph
        .edges()
        .map(|(u, v)| (perm[u as usize], perm[v as usize]))
        .collect();
    (Graph::from_edges(n, edges, graph.is_symmetrized()), perm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, options: &ParseOptions) -> Graph {
        parse_edge_list_bytes(text.as_bytes(), options).unwrap()
    }

    #[test]
    fn k3_symmetrized() {
        let g = parse("0 1\n1 2\n2 0\n", &ParseOptions::default());
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 6);
    }

    #[test]
    fn duplicate_edges_deduped() {
        let g = parse("0 1\n0 1\n", &ParseOptions::default());
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn one_indexed_shifts_down() {
        let options = ParseOptions { one_indexed: true, symmetrize: false, ..Default::default() };
        let g = parse("1 2\n2 3\n", &options);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn comments_and_weights_tolerated() {
        let g = parse("# snap style\n% mm style\n0 1 3.5\n1 2 1.0\n", &ParseOptions::default());
        assert_eq!(g.num_edges(), 4);
    }

    #[test]
    fn matrix_market_header_skipped() {
        let options = ParseOptions { one_indexed: true, ..Default::default() };
        let g = parse("%%MatrixMarket matrix coordinate\n3 3 2\n1 2\n2 3\n", &options);
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 4);
    }

    #[test]
    fn malformed_token_reports_line() {
        let err = parse_edge_list_bytes(b"0 1\nx 2\n", &ParseOptions::default()).unwrap_err();
        match err {
            IoError::Malformed { line, token } => {
                assert_eq!(line, 2);
                assert_eq!(token, "x");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn self_loops_dropped() {
        let g = parse("0 0\n0 1\n", &ParseOptions::default());
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn chunk_counts_agree() {
        let text = "# header\r\n0 1\n1 2\r\n\n% more\n2 3\n3 4\n4 0\n\n";
        let reference = parse(text, &ParseOptions { chunks: 1, ..Default::default() });
        for chunks in [2, 7, 16] {
            let g = parse(text, &ParseOptions { chunks, ..Default::default() });
            assert_eq!(g, reference, "chunks={chunks}");
        }
    }

    #[test]
    fn binary_round_trip() {
        let g = parse("0 1\n1 2\n2 0\n", &ParseOptions::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k3.pgbb");
        write_binary(&g, &path).unwrap();
        let back = read_binary(&path).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn empty_graph_binary_size() {
        let g = Graph::from_edges(0, vec![], true);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.pgbb");
        write_binary(&g, &path).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 4 + 8 + 8 + 8 + 1 + 8);
    }

    #[test]
    fn corrupt_magic_rejected() {
        let g = parse("0 1\n", &ParseOptions::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pgbb");
        write_binary(&g, &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        fs::write(&path, &bytes).unwrap();
        match read_binary(&path).unwrap_err() {
            IoError::BadMagic(m) => assert_eq!(&m, b"XGBB"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_file_rejected() {
        let g = parse("0 1\n1 2\n", &ParseOptions::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.pgbb");
        write_binary(&g, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(read_binary(&path).unwrap_err(), IoError::Truncated { .. }));
    }

    #[test]
    fn degree_relabel_star_center_last() {
        let mut edges = Vec::new();
        for i in 1..5u32 {
            edges.push((0, i));
            edges.push((i, 0));
        }
        let star = Graph::from_edges(5, edges, true);
        let (_, perm) = degree_relabel(&star);
        assert_eq!(perm[0], 4);
    }

    #[test]
    fn degree_relabel_p4_tie_rule() {
        // degrees [1,2,2,1]: vertices 0,3 first, then 1,2
        let g = parse("0 1\n1 2\n2 3\n", &ParseOptions::default());
        let (_, perm) = degree_relabel(&g);
        assert_eq!(perm, vec![0, 2, 3, 1]);
    }

    #[test]
    fn degree_relabel_regular_ring_identity() {
        let g = parse("0 1\n1 2\n2 0\n", &ParseOptions::default());
        let (relabeled, perm) = degree_relabel(&g);
        assert_eq!(perm, vec![0, 1, 2]);
        assert_eq!(relabeled, g);
    }

    #[test]
    fn degree_relabel_preserves_edge_multiset() {
        let g = parse("0 3\n1 3\n2 3\n0 1\n", &ParseOptions::default());
        let (relabeled, perm) = degree_relabel(&g);
        let mut mapped: Vec<_> = g
            .edges()
            .map(|(u, v)| (perm[u as usize], perm[v as usize]))
            .collect();
        mapped.sort_unstable();
        let original: Vec<_> = relabeled.edges().collect();
        assert_eq!(mapped, original);
    }
}
