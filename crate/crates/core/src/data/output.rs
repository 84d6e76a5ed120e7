use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{Result, TpsError};
use crate::series::{SeriesBatch, SplitPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Original,
    Synthetic,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Original => "original",
            Role::Synthetic => "synthetic",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "original" => Some(Role::Original),
            "synthetic" => Some(Role::Synthetic),
            _ => None,
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Streams windows to a CSV file with columns
/// `window_id,role,step,c0..c{C-1}`; every window contributes `t + h` rows.
pub struct AugmentedWriter {
    out: csv::Writer<BufWriter<File>>,
    path: PathBuf,
    channels: usize,
    next_id: usize,
}

impl AugmentedWriter {
    pub fn create(path: impl AsRef<Path>, channels: usize) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| TpsError::io(&path, e))?;
        let out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(file));
        let mut header = vec!["window_id".to_string(), "role".into(), "step".into()];
        header.extend((0..channels).map(|c| format!("c{c}")));
        let mut w = Self {
            out,
            path,
            channels,
            next_id: 0,
        };
        w.out.write_record(&header).map_err(|e| w.error(e))?;
        Ok(w)
    }

    fn error(&self, e: csv::Error) -> TpsError {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => TpsError::io(&self.path, io),
            other => TpsError::Data(format!("{}: {other:?}", self.path.display())),
        }
    }

    /// Writes a merged batch whose first `n_original` samples are originals.
    pub fn write_batch(&mut self, pair: &SplitPair, n_original: usize) -> Result<()> {
        if pair.channels() != self.channels {
            return Err(TpsError::Data(format!(
                "writer expects {} channels, batch has {}",
                self.channels,
                pair.channels()
            )));
        }
        let x = pair.concat();
        let c = self.channels;
        for b in 0..x.batch() {
            let role = if b < n_original {
                Role::Original
            } else {
                Role::Synthetic
            };
            let id = self.next_id.to_string();
            for (step, row) in x.sample(b).chunks_exact(c).enumerate() {
                let mut record = Vec::with_capacity(3 + c);
                record.push(id.clone());
                record.push(role.name().to_string());
                record.push(step.to_string());
                record.extend(row.iter().map(|&v| format_value(v)));
                self.out.write_record(&record).map_err(|e| self.error(e))?;
            }
            self.next_id += 1;
        }
        Ok(())
    }

    pub fn windows_written(&self) -> usize {
        self.next_id
    }

    pub fn finish(mut self) -> Result<usize> {
        self.out
            .flush()
            .map_err(|e| TpsError::io(&self.path, e))?;
        Ok(self.next_id)
    }
}

/// Writes `(merged batch, originals in it)` items; returns the window count.
pub fn write_augmented<'a>(
    path: impl AsRef<Path>,
    channels: usize,
    batches: impl IntoIterator<Item = (&'a SplitPair, usize)>,
) -> Result<usize> {
    let mut w = AugmentedWriter::create(path, channels)?;
    for (pair, n_original) in batches {
        w.write_batch(pair, n_original)?;
    }
    w.finish()
}

/// One window read back from an augmented file, shape `[1, t+h, C]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub id: usize,
    pub role: Role,
    pub values: SeriesBatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedFile {
    pub channels: usize,
    pub windows: Vec<Window>,
}

impl AugmentedFile {
    /// Stacks windows (optionally of one role) into a `[N, t+h, C]` batch.
    pub fn stack(&self, role: Option<Role>) -> Result<SeriesBatch> {
        let picked: Vec<&SeriesBatch> = self
            .windows
            .iter()
            .filter(|w| role.is_none_or(|r| w.role == r))
            .map(|w| &w.values)
            .collect();
        if picked.is_empty() {
            return Err(TpsError::Data("no windows to stack".into()));
        }
        SeriesBatch::concat_batch(&picked)
    }

    pub fn count(&self, role: Role) -> usize {
        self.windows.iter().filter(|w| w.role == role).count()
    }
}

pub fn read_augmented(path: impl AsRef<Path>) -> Result<AugmentedFile> {
    let path = path.as_ref();
    let parse_err = |row: usize, column: &str, message: String| TpsError::Parse {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => TpsError::io(path, io),
        other => TpsError::Data(format!("{}: {other:?}", path.display())),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, "", e.to_string()))?
        .clone();
    if headers.len() < 4 || &headers[0] != "window_id" || &headers[1] != "role" || &headers[2] != "step" {
        return Err(parse_err(1, "", "not an augmented window file".into()));
    }
    let channels = headers.len() - 3;
    let mut windows: Vec<Window> = Vec::new();
    let mut current: Option<(usize, Role, Vec<f64>, usize)> = None;
    let flush = |cur: Option<(usize, Role, Vec<f64>, usize)>, windows: &mut Vec<Window>| -> Result<()> {
        if let Some((id, role, values, steps)) = cur {
            windows.push(Window {
                id,
                role,
                values: SeriesBatch::new(values, 1, steps, channels)?,
            });
        }
        Ok(())
    };
    for (r, record) in reader.records().enumerate() {
        let line = r + 2;
        let record = record.map_err(|e| parse_err(line, "", e.to_string()))?;
        let id: usize = record[0]
            .parse()
            .map_err(|_| parse_err(line, "window_id", format!("bad id {:?}", &record[0])))?;
        let role = Role::parse(&record[1])
            .ok_or_else(|| parse_err(line, "role", format!("bad role {:?}", &record[1])))?;
        let step: usize = record[2]
            .parse()
            .map_err(|_| parse_err(line, "step", format!("bad step {:?}", &record[2])))?;
        let same = matches!(&current, Some((cid, _, _, _)) if *cid == id);
        if !same {
            flush(current.take(), &mut windows)?;
            current = Some((id, role, Vec::new(), 0));
        }
        let (_, _, values, steps) = current.as_mut().expect("set above");
        if step != *steps {
            return Err(parse_err(line, "step", format!("expected step {steps}, got {step}")));
        }
        for c in 0..channels {
            let field = &record[3 + c];
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, &headers[3 + c], format!("bad value {field:?}")))?;
            values.push(v);
        }
        *steps += 1;
    }
    flush(current.take(), &mut windows)?;
    Ok(AugmentedFile { channels, windows })
}
