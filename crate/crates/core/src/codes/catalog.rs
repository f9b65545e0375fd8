//! Plain-text catalog of difference sets.
//!
//! One design per line, `Q K lambda : i0,i1,...`. Blank lines and `#`
//! comments are ignored, except `# missing Q K lambda`, which records a
//! design that is listed but has no known base set. Every entry is validated
//! against the pairwise correlation property on load.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use super::{Codebook, DesignParams};
use crate::error::{Error, Result};

/// Designs listed with their `Q/K` ratios in the reference table, plus
/// (19,9,4), which the dispersive-channel experiments use.
pub const TABLE_I: [DesignParams; 13] = [
    DesignParams::new(35, 17, 8),
    DesignParams::new(11, 5, 2),
    DesignParams::new(7, 3, 1),
    DesignParams::new(40, 13, 4),
    DesignParams::new(13, 4, 1),
    DesignParams::new(109, 28, 7),
    DesignParams::new(21, 5, 1),
    DesignParams::new(31, 6, 1),
    DesignParams::new(57, 8, 1),
    DesignParams::new(91, 10, 1),
    DesignParams::new(183, 14, 1),
    DesignParams::new(381, 20, 1),
    DesignParams::new(19, 9, 4),
];

static SHIPPED_TEXT: &str = include_str!("../../data/difference_sets.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub params: DesignParams,
    pub base_set: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    entries: BTreeMap<(usize, usize, usize), Codebook>,
    missing: Vec<DesignParams>,
}

impl Catalog {
    /// The catalog compiled into the crate.
    pub fn shipped() -> &'static Catalog {
        static CELL: OnceLock<Catalog> = OnceLock::new();
        CELL.get_or_init(|| Catalog::parse(SHIPPED_TEXT).expect("shipped catalog is valid"))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cat = Catalog::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |message: String| Error::Catalog { line: n + 1, message };
            if let Some(rest) = line.strip_prefix("# missing") {
                let p = parse_triple(rest).map_err(err)?;
                cat.missing.push(p);
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, tail) = line
                .split_once(':')
                .ok_or_else(|| err("expected `Q K lambda : indices`".into()))?;
            let params = parse_triple(head).map_err(err)?;
            let base: Vec<usize> = tail
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| err(format!("bad index: {e}")))?;
            let cb = Codebook::build(params, &base)?;
            cat.insert(cb);
        }
        Ok(cat)
    }

    pub fn insert(&mut self, cb: Codebook) {
        let p = cb.params();
        self.missing.retain(|m| *m != p);
        self.entries.insert((p.q, p.k, p.lambda), cb);
    }

    pub fn mark_missing(&mut self, params: DesignParams) {
        if !self.missing.contains(&params) && self.get(params).is_none() {
            self.missing.push(params);
        }
    }

    pub fn get(&self, params: DesignParams) -> Option<&Codebook> {
        self.entries.get(&(params.q, params.k, params.lambda))
    }

    pub fn codebook(&self, params: DesignParams) -> Result<Codebook> {
        self.get(params).cloned().ok_or(Error::NoDesignFound {
            q: params.q,
            k: params.k,
            lambda: params.lambda,
        })
    }

    pub fn codebooks(&self) -> impl Iterator<Item = &Codebook> {
        self.entries.values()
    }

    pub fn missing(&self) -> &[DesignParams] {
        &self.missing
    }

    pub fn entries(&self) -> Vec<CatalogEntry> {
        self.entries
            .values()
            .map(|cb| CatalogEntry {
                params: cb.params(),
                base_set: cb.base_set().to_vec(),
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# Cyclic (Q,K,lambda) difference sets, 0-based chip indices.\n");
        out.push_str("# Format: Q K lambda : i0,i1,...\n");
        for cb in self.entries.values() {
            let p = cb.params();
            let idx: Vec<String> = cb.base_set().iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "{} {} {} : {}", p.q, p.k, p.lambda, idx.join(","));
        }
        for p in &self.missing {
            let _ = writeln!(out, "# missing {} {} {}", p.q, p.k, p.lambda);
        }
        out
    }
}

fn parse_triple(s: &str) -> std::result::Result<DesignParams, String> {
    let v: Vec<usize> = s
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| format!("bad parameter `{t}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [q, k, l] => Ok(DesignParams::new(*q, *k, *l)),
        _ => Err(format!("expected three parameters, got {}", v.len())),
    }
}
