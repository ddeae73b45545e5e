//! Plain-text heightmap files.
//!
//! ```text
//! resolution 4
//! cell_size 0.1
//! amplitude 0.08
//! wavelength 0.8
//! seed 42
//! <resolution + 1 rows of resolution + 1 heights, south to north>
//! ```
//!
//! Heights use the shortest representation that parses back to the same
//! `f64`, so export and import round-trip exactly.

use std::fmt::Write as _;
use std::str::FromStr;

use morphevo_core::terrain::Heightmap;

use crate::Error;

pub fn to_text(map: &Heightmap) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "resolution {}", map.resolution);
    let _ = writeln!(out, "cell_size {}", map.cell_size);
    let _ = writeln!(out, "amplitude {}", map.amplitude);
    let _ = writeln!(out, "wavelength {}", map.wavelength);
    let _ = writeln!(out, "seed {}", map.seed);
    for row in map.heights.chunks(map.resolution + 1) {
        let line: Vec<String> = row.iter().map(|h| h.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn header<T: FromStr>(lines: &mut std::iter::Enumerate<std::str::Lines<'_>>, key: &str) -> Result<T, Error> {
    let (n, line) = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("missing header `{key}`")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::Parse(format!("line {}: expected header `{key}`", n + 1)));
    }
    let value = parts
        .next()
        .ok_or_else(|| Error::Parse(format!("line {}: `{key}` has no value", n + 1)))?;
    value
        .parse()
        .map_err(|_| Error::Parse(format!("line {}: bad value for `{key}`: {value}", n + 1)))
}

pub fn from_text(text: &str) -> Result<Heightmap, Error> {
    let mut lines = text.lines().enumerate();
    let resolution: usize = header(&mut lines, "resolution")?;
    let cell_size: f64 = header(&mut lines, "cell_size")?;
    let amplitude: f64 = header(&mut lines, "amplitude")?;
    let wavelength: f64 = header(&mut lines, "wavelength")?;
    let seed: u64 = header(&mut lines, "seed")?;
    let mut heights = Vec::with_capacity((resolution + 1) * (resolution + 1));
    for (n, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| Error::Parse(format!("line {}: bad height {v}", n + 1))))
            .collect::<Result<_, _>>()?;
        if row.len() != resolution + 1 {
            return Err(Error::Parse(format!(
                "line {}: expected {} heights, found {}",
                n + 1,
                resolution + 1,
                row.len()
            )));
        }
        heights.extend(row);
    }
    Ok(Heightmap::from_parts(resolution, cell_size, amplitude, wavelength, seed, heights)?)
}
