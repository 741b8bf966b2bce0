//! Text edge lists and CSV feature files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use super::{Graph, GraphError};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> GraphError + '_ {
    move |source| GraphError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Loads a whitespace-separated `u v` edge list and a headerless feature CSV.
///
/// The feature file fixes the node count; an edge naming a node beyond it is
/// an error. Blank lines and lines starting with `#` are skipped in both.
pub fn load_graph(
    edge_path: impl AsRef<Path>,
    feature_path: impl AsRef<Path>,
) -> Result<Graph, GraphError> {
    let features = read_features(feature_path.as_ref())?;
    let edges = read_edges(edge_path.as_ref())?;
    if edges.is_empty() || features.nrows() == 0 {
        return Err(GraphError::Empty);
    }
    Graph::from_edges(features.nrows(), &edges, features)
}

fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>, GraphError> {
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next = || -> Result<usize, GraphError> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(path, i + 1, "expected two node ids"))?;
            tok.parse()
                .map_err(|_| parse_err(path, i + 1, format!("bad node id {tok:?}")))
        };
        let u = next()?;
        let v = next()?;
        if fields.next().is_some() {
            return Err(parse_err(path, i + 1, "expected exactly two node ids"));
        }
        edges.push((u, v));
    }
    Ok(edges)
}

fn read_features(path: &Path) -> Result<Array2<f32>, GraphError> {
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut values = Vec::new();
    let mut dim = None;
    let mut rows = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let before = values.len();
        for tok in line.split(',') {
            let tok = tok.trim();
            let x: f32 = tok
                .parse()
                .map_err(|_| parse_err(path, i + 1, format!("bad feature value {tok:?}")))?;
            values.push(x);
        }
        let found = values.len() - before;
        match dim {
            None => dim = Some(found),
            Some(expected) if expected != found => {
                return Err(GraphError::RaggedFeatures {
                    row: rows,
                    expected,
                    found,
                })
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let dim = dim.unwrap_or(0);
    Ok(Array2::from_shape_vec((rows, dim), values).expect("row lengths checked"))
}

/// Writes `g` in the format [`load_graph`] reads. Reloading reproduces the
/// graph exactly.
pub fn write_graph(
    g: &Graph,
    edge_path: impl AsRef<Path>,
    feature_path: impl AsRef<Path>,
) -> Result<(), GraphError> {
    let edge_path = edge_path.as_ref();
    let mut out = BufWriter::new(File::create(edge_path).map_err(io_err(edge_path))?);
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").map_err(io_err(edge_path))?;
    }
    out.flush().map_err(io_err(edge_path))?;

    let feature_path = feature_path.as_ref();
    let mut out = BufWriter::new(File::create(feature_path).map_err(io_err(feature_path))?);
    for row in g.features().rows() {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", line.join(",")).map_err(io_err(feature_path))?;
    }
    out.flush().map_err(io_err(feature_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_and_cleans() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "0 1\n1 0\n0 0\n\n# comment\n1 2\n");
        let f = write(dir.path(), "f.csv", "1,0\n0,1\n0.5,-0.25\n");
        let g = load_graph(&e, &f).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.features()[[2, 1]], -0.25);
    }

    #[test]
    fn rejects_bad_input() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(dir.path(), "f.csv", "1\n2\n");
        let e = write(dir.path(), "e.txt", "0 5\n");
        assert!(matches!(
            load_graph(&e, &f),
            Err(GraphError::NodeOutOfRange { node: 5, num_nodes: 2 })
        ));
        let e = write(dir.path(), "e2.txt", "0 x\n");
        assert!(matches!(load_graph(&e, &f), Err(GraphError::Parse { line: 1, .. })));
        let e = write(dir.path(), "e3.txt", "");
        assert!(matches!(load_graph(&e, &f), Err(GraphError::Empty)));
        let e = write(dir.path(), "e4.txt", "0 1\n");
        let ragged = write(dir.path(), "r.csv", "1,2\n3\n");
        assert!(matches!(
            load_graph(&e, &ragged),
            Err(GraphError::RaggedFeatures { row: 1, .. })
        ));
    }
}
