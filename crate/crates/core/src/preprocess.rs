//! t-score ingestion, article grouping, and the symmetrize/shift transform.
//!
//! A [`MetaSample`] carries its pipeline stage in the type. Only a
//! `MetaSample<Raw>` can be transformed or bootstrapped, so a sample is never
//! transformed twice and resampling always starts from the original scores.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::marker::PhantomData;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};

/// Stage marker: scores as read or simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Raw;

/// Stage marker: scores after [`MetaSample::transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transformed;

#[derive(Debug, Clone, PartialEq)]
pub struct Article {
    pub id: String,
    pub scores: Vec<f64>,
}

/// t-scores grouped by article. Articles are the resampling unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaSample<S = Raw> {
    articles: Vec<Article>,
    n: usize,
    _stage: PhantomData<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSpec {
    pub symmetrize: bool,
    pub shift: f64,
}

impl Default for PreprocessSpec {
    fn default() -> Self {
        Self {
            symmetrize: true,
            shift: 1.96,
        }
    }
}

impl PreprocessSpec {
    /// No symmetrization and no shift.
    pub fn identity() -> Self {
        Self {
            symmetrize: false,
            shift: 0.0,
        }
    }
}

impl<S> MetaSample<S> {
    fn from_parts(articles: Vec<Article>) -> Self {
        let n = articles.iter().map(|a| a.scores.len()).sum();
        Self {
            articles,
            n,
            _stage: PhantomData,
        }
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    /// Total number of scores.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of articles.
    pub fn m(&self) -> usize {
        self.articles.len()
    }

    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.articles.iter().flat_map(|a| a.scores.iter().copied())
    }

    /// Largest article size.
    pub fn max_article_size(&self) -> usize {
        self.articles.iter().map(|a| a.scores.len()).max().unwrap_or(0)
    }

    /// Ids of articles reporting more than `cap` scores. Advisory only.
    pub fn articles_over_cap(&self, cap: usize) -> Vec<&str> {
        self.articles
            .iter()
            .filter(|a| a.scores.len() > cap)
            .map(|a| a.id.as_str())
            .collect()
    }
}

impl MetaSample<Raw> {
    /// Builds a sample from `(article_id, scores)` groups.
    pub fn from_articles<I>(groups: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let articles: Vec<Article> = groups
            .into_iter()
            .map(|(id, scores)| Article { id, scores })
            .collect();
        if articles.is_empty() {
            return Err(Error::EmptySample);
        }
        for a in &articles {
            if a.scores.is_empty() {
                return Err(argument(format!("article {:?} has no scores", a.id)));
            }
            if let Some(t) = a.scores.iter().find(|t| !t.is_finite()) {
                return Err(argument(format!("article {:?} has non-finite score {t}", a.id)));
            }
        }
        Ok(Self::from_parts(articles))
    }

    /// One article per score, ids `0, 1, ...`.
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        Self::from_articles(
            scores
                .iter()
                .enumerate()
                .map(|(i, &t)| (i.to_string(), vec![t])),
        )
    }

    /// Symmetrize (each `t` becomes `|t|, −|t|`), then subtract `shift`.
    pub fn transform(&self, spec: &PreprocessSpec) -> MetaSample<Transformed> {
        let articles = self
            .articles
            .iter()
            .map(|a| Article {
                id: a.id.clone(),
                scores: transform_scores(&a.scores, spec),
            })
            .collect();
        MetaSample::from_parts(articles)
    }

    /// Draws articles by index. Used by the bootstrap.
    pub fn select(&self, indices: &[usize]) -> MetaSample<Raw> {
        MetaSample::from_parts(indices.iter().map(|&i| self.articles[i].clone()).collect())
    }

    /// Writes the sample as `t,article_id` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "article_id"])?;
        for a in &self.articles {
            for t in &a.scores {
                w.write_record([format!("{t:?}"), a.id.clone()])?;
            }
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Applies the transform to one article's scores.
pub fn transform_scores(scores: &[f64], spec: &PreprocessSpec) -> Vec<f64> {
    if spec.symmetrize {
        scores
            .iter()
            .flat_map(|t| [t.abs() - spec.shift, -t.abs() - spec.shift])
            .collect()
    } else {
        scores.iter().map(|t| t - spec.shift).collect()
    }
}

/// Reads a `t,article_id` CSV. Extra columns are ignored.
pub fn load_csv(path: impl AsRef<Path>) -> Result<MetaSample<Raw>> {
    load_csv_impl(path.as_ref(), None)
}

/// Like [`load_csv`] but keeps only rows whose `column` equals `value`,
/// e.g. one estimation method out of a pooled dataset.
pub fn load_csv_filtered(
    path: impl AsRef<Path>,
    column: &str,
    value: &str,
) -> Result<MetaSample<Raw>> {
    load_csv_impl(path.as_ref(), Some((column, value)))
}

fn load_csv_impl(path: &Path, filter: Option<(&str, &str)>) -> Result<MetaSample<Raw>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| argument(format!("{}: missing column `{name}`", path.display())))
    };
    let t_col = col("t")?;
    let id_col = col("article_id")?;
    let filter_col = match filter {
        Some((name, value)) => Some((col(name)?, value)),
        None => None,
    };

    let mut index: HashMap<String, usize> = HashMap::new();
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // header is line 1
        let row = record
            .as_ref()
            .ok()
            .and_then(|r| r.position())
            .map(|p| p.line() as usize)
            .unwrap_or(i + 2);
        let record = record.map_err(|e| Error::MalformedRow {
            row,
            message: e.to_string(),
        })?;
        if let Some((c, value)) = filter_col {
            if record.get(c) != Some(value) {
                continue;
            }
        }
        let raw_t = record.get(t_col).ok_or_else(|| Error::MalformedRow {
            row,
            message: "missing t".into(),
        })?;
        let t: f64 = raw_t.parse().map_err(|_| Error::MalformedRow {
            row,
            message: format!("t = {raw_t:?} is not a number"),
        })?;
        if !t.is_finite() {
            return Err(Error::MalformedRow {
                row,
                message: format!("t = {raw_t:?} is not finite"),
            });
        }
        let id = record.get(id_col).unwrap_or_default().to_string();
        if id.is_empty() {
            return Err(Error::MalformedRow {
                row,
                message: "empty article_id".into(),
            });
        }
        match index.get(&id) {
            Some(&k) => groups[k].1.push(t),
            None => {
                index.insert(id.clone(), groups.len());
                groups.push((id, vec![t]));
            }
        }
    }
    if groups.is_empty() {
        return Err(Error::EmptySample);
    }
    MetaSample::from_articles(groups)
}
