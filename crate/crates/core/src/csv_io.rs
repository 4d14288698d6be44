//! Headered CSV for sample sets (`x1,…,xd[,y]`) and atomic file output.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::beta_sampling::SampleSet;
use crate::error::{Error, Result};

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_samples<W: Write>(mut w: W, set: &SampleSet) -> Result<()> {
    let d = set.d();
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    if set.y().is_some() {
        header.push("y".into());
    }
    writeln!(w, "{}", header.join(","))?;
    for (i, p) in set.points().enumerate() {
        let mut fields: Vec<String> = p.iter().map(|&v| fmt_f64(v)).collect();
        if let Some(y) = set.y() {
            fields.push(fmt_f64(y[i]));
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Reads a sample set; the header decides `d` and whether `y` is present.
pub fn read_samples<R: BufRead>(r: R) -> Result<SampleSet> {
    let mut lines = r.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(Error::Empty("CSV input has no header".into())),
        }
    };
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let has_y = cols.last() == Some(&"y");
    let d = cols.len() - usize::from(has_y);
    for (j, c) in cols[..d].iter().enumerate() {
        if *c != format!("x{}", j + 1) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected column 'x{}', found '{c}'", j + 1),
            });
        }
    }
    if d == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "no coordinate columns".into(),
        });
    }

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {} fields, found {}", cols.len(), fields.len()),
            });
        }
        for (j, f) in fields.iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("'{f}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("non-finite value '{f}'"),
                });
            }
            if j < d {
                x.push(v);
            } else {
                y.push(v);
            }
        }
    }
    if x.is_empty() {
        return Err(Error::Empty("CSV input has no data rows".into()));
    }
    SampleSet::new(d, x, has_y.then_some(y))
}

pub fn read_samples_file(path: &Path) -> Result<SampleSet> {
    let file = std::fs::File::open(path)?;
    read_samples(std::io::BufReader::new(file))
}

/// Writes through a temporary file in the target directory and renames it
/// into place only after `body` succeeds.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
