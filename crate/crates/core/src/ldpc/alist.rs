//! alist text format for sparse parity-check matrices.
//!
//! The standard layout, all integers whitespace-separated and 1-indexed:
//!
//! ```text
//! n m                      <- variables, checks
//! max_var_deg max_chk_deg
//! <n variable degrees>
//! <m check degrees>
//! <n lines: check indices per variable, optionally zero-padded>
//! <m lines: variable indices per check, optionally zero-padded>
//! ```
//!
//! Zero entries pad short rows and are ignored on input; this writer emits
//! unpadded rows.

use super::{LdpcCode, LdpcError};

struct Tokens<'a> {
    inner: std::iter::Peekable<TokenIter<'a>>,
}

struct TokenIter<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    current: Option<(usize, std::str::SplitAsciiWhitespace<'a>)>,
}

impl<'a> Iterator for TokenIter<'a> {
    type Item = (usize, &'a str);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some((line_no, ref mut toks)) = self.current {
                if let Some(t) = toks.next() {
                    return Some((line_no, t));
                }
            }
            let (idx, line) = self.lines.next()?;
            self.current = Some((idx + 1, line.split_ascii_whitespace()));
        }
    }
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Tokens {
            inner: TokenIter { lines: text.lines().enumerate(), current: None }.peekable(),
        }
    }

    fn next_usize(&mut self, what: &str) -> Result<(usize, usize), LdpcError> {
        let (line, tok) = self.inner.next().ok_or(LdpcError::Parse {
            line: 0,
            message: format!("unexpected end of file while reading {what}"),
        })?;
        let value = tok.parse::<usize>().map_err(|_| LdpcError::Parse {
            line,
            message: format!("expected integer for {what}, found {tok:?}"),
        })?;
        Ok((line, value))
    }

    fn at_end(&mut self) -> bool {
        self.inner.peek().is_none()
    }
}

/// Parses alist text into an [`LdpcCode`]. Parse errors carry the offending
/// line number.
pub fn parse_alist(text: &str) -> Result<LdpcCode, LdpcError> {
    let mut toks = Tokens::new(text);
    let (line, n) = toks.next_usize("variable count")?;
    if n == 0 {
        return Err(LdpcError::Parse { line, message: "variable count must be positive".into() });
    }
    let (line, m) = toks.next_usize("check count")?;
    if m == 0 {
        return Err(LdpcError::Parse { line, message: "check count must be positive".into() });
    }
    let (_, max_var_deg) = toks.next_usize("max variable degree")?;
    let (_, max_chk_deg) = toks.next_usize("max check degree")?;

    let mut var_degs = Vec::with_capacity(n);
    for i in 0..n {
        let (line, d) = toks.next_usize(&format!("degree of variable {}", i + 1))?;
        if d == 0 || d > max_var_deg {
            return Err(LdpcError::Parse {
                line,
                message: format!("variable {} degree {d} outside [1, {max_var_deg}]", i + 1),
            });
        }
        var_degs.push(d);
    }
    let mut chk_degs = Vec::with_capacity(m);
    for i in 0..m {
        let (line, d) = toks.next_usize(&format!("degree of check {}", i + 1))?;
        if d == 0 || d > max_chk_deg {
            return Err(LdpcError::Parse {
                line,
                message: format!("check {} degree {d} outside [1, {max_chk_deg}]", i + 1),
            });
        }
        chk_degs.push(d);
    }

    // variable adjacency: read and validate, also to advance the stream.
    // Rows may be zero-padded to the max degree; a row is accepted either
    // unpadded (deg entries) or padded (max entries with zeros after deg).
    let mut var_adj: Vec<Vec<u32>> = Vec::with_capacity(n);
    for (i, &deg) in var_degs.iter().enumerate() {
        let row = read_adjacency_row(&mut toks, deg, max_var_deg, m, &format!("variable {}", i + 1))?;
        var_adj.push(row);
    }
    let mut check_adj: Vec<Vec<u32>> = Vec::with_capacity(m);
    for (i, &deg) in chk_degs.iter().enumerate() {
        let row = read_adjacency_row(&mut toks, deg, max_chk_deg, n, &format!("check {}", i + 1))?;
        check_adj.push(row);
    }

    // cross-validate the two adjacency blocks
    let mut from_vars: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (v, checks) in var_adj.iter().enumerate() {
        for &c in checks {
            from_vars[c as usize].push(v as u32);
        }
    }
    for (c, row) in check_adj.iter().enumerate() {
        let mut a = row.clone();
        a.sort_unstable();
        from_vars[c].sort_unstable();
        if a != from_vars[c] {
            return Err(LdpcError::Parse {
                line: 0,
                message: format!("check {} adjacency disagrees with the variable block", c + 1),
            });
        }
    }

    LdpcCode::from_check_rows(n, check_adj)
}

/// Reads one adjacency row of `deg` 1-indexed entries (optionally padded with
/// zeros to `max_deg`), converting to 0-indexed.
fn read_adjacency_row(
    toks: &mut Tokens<'_>,
    deg: usize,
    max_deg: usize,
    index_bound: usize,
    what: &str,
) -> Result<Vec<u32>, LdpcError> {
    let mut row = Vec::with_capacity(deg);
    for j in 0..deg {
        let (line, idx) = toks.next_usize(&format!("{what} entry {}", j + 1))?;
        if idx == 0 {
            return Err(LdpcError::Parse {
                line,
                message: format!("{what}: index 0 in the first {deg} entries (format is 1-indexed)"),
            });
        }
        if idx > index_bound {
            return Err(LdpcError::Parse {
                line,
                message: format!("{what}: index {idx} exceeds {index_bound}"),
            });
        }
        row.push((idx - 1) as u32);
    }
    // optional zero padding: consume trailing zeros up to max_deg
    for _ in deg..max_deg {
        if toks.at_end() {
            break;
        }
        // peek: only consume if it is a literal 0 (padding)
        let is_pad = matches!(toks.inner.peek(), Some(&(_, t)) if t == "0");
        if is_pad {
            toks.inner.next();
        } else {
            break;
        }
    }
    Ok(row)
}

/// Serializes a code to alist text (unpadded rows, trailing newline).
pub fn write_alist(code: &LdpcCode) -> String {
    let n = code.n();
    let m = code.num_checks();
    let var_cols = code.var_cols();
    let check_rows = code.check_rows();
    let max_var = var_cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_chk = check_rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str(&format!("{n} {m}\n{max_var} {max_chk}\n"));
    let join =
        |xs: &[usize]| xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    out.push_str(&join(&var_cols.iter().map(Vec::len).collect::<Vec<_>>()));
    out.push('\n');
    out.push_str(&join(&check_rows.iter().map(Vec::len).collect::<Vec<_>>()));
    out.push('\n');
    for col in var_cols {
        out.push_str(&join(&col.iter().map(|&c| c as usize + 1).collect::<Vec<_>>()));
        out.push('\n');
    }
    for row in check_rows {
        out.push_str(&join(&row.iter().map(|&v| v as usize + 1).collect::<Vec<_>>()));
        out.push('\n');
    }
    out
}
