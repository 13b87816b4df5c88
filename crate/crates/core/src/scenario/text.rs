//! Line-oriented text format for bracket expressions.
//!
//! ```text
//! # optional directives; defaults are 3 parties with 2 inputs each
//! @parties 3
//! @inputs 2
//! @outputs 3
//! 1 * [ +A2 -B1 +C1 +0 ] % 3
//! 1 * [ +A1 +B2 -C1 +0 ] % 3
//! -1/2 * [ +2*A1 +1 ] % 3
//! >= 2
//! ```
//!
//! Party tags are an upper-case letter (`A` is party 1) followed by the 1-based
//! input. A party may appear more than once in a bracket only with the same input;
//! its coefficients are added. `#` starts a comment.

use std::fmt::Write as _;

use num_traits::One;

use super::behavior::Scenario;
use super::expression::{party_letter, BellExpression, BracketTerm, Comparator, PartySetting, Rational, TermDisplay};
use crate::error::{Error, Result};

type Located<T> = std::result::Result<T, (usize, String)>;

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
    /// column of `s[0]` within the line (0-based)
    base: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str, base: usize) -> Self {
        Self {
            s: s.as_bytes(),
            pos: 0,
            base,
        }
    }

    fn col(&self) -> usize {
        self.base + self.pos + 1
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn integer(&mut self) -> Located<i64> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err((self.col(), "expected an integer".into()));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| (self.base + start + 1, "integer out of range".into()))
    }

    fn sign(&mut self) -> Option<i64> {
        if self.eat(b'+') {
            Some(1)
        } else if self.eat(b'-') {
            Some(-1)
        } else {
            None
        }
    }

    fn rational(&mut self) -> Located<Rational> {
        self.skip_ws();
        let sign = self.sign().unwrap_or(1);
        self.skip_ws();
        let num = self.integer()?;
        let den = if self.eat(b'/') {
            let col = self.col();
            let d = self.integer()?;
            if d == 0 {
                return Err((col, "zero denominator".into()));
            }
            d
        } else {
            1
        };
        Ok(Rational::new(sign * num, den))
    }
}

/// Parses `+A2 -B1 +2*C1 -1` into per-party settings and the integer offset.
pub fn parse_bracket_body(body: &str, scenario: &Scenario) -> Result<(Vec<Option<PartySetting>>, i64)> {
    parse_body(&mut Cursor::new(body, 0), scenario).map_err(|(column, message)| Error::Parse {
        line: 1,
        column,
        message,
    })
}

fn parse_body(cur: &mut Cursor<'_>, sc: &Scenario) -> Located<(Vec<Option<PartySetting>>, i64)> {
    let mut settings: Vec<Option<PartySetting>> = vec![None; sc.parties()];
    let mut offset = 0i64;
    let mut first = true;
    loop {
        cur.skip_ws();
        if cur.at_end() || cur.peek() == Some(b']') {
            break;
        }
        let item_col = cur.col();
        let sign = match cur.sign() {
            Some(s) => s,
            None if first => 1,
            None => return Err((item_col, "expected '+' or '-'".into())),
        };
        first = false;
        cur.skip_ws();
        let mut magnitude = None;
        if matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
            magnitude = Some(cur.integer()?);
            cur.skip_ws();
            if cur.eat(b'*') {
                cur.skip_ws();
            } else if !matches!(cur.peek(), Some(c) if c.is_ascii_alphabetic()) {
                offset += sign * magnitude.unwrap();
                continue;
            }
        }
        let tag_col = cur.col();
        let (party, input) = parse_tag(cur, sc).map_err(|m| (tag_col, m))?;
        let coeff = sign * magnitude.unwrap_or(1);
        match &mut settings[party] {
            Some(s) if s.input != input => {
                return Err((
                    tag_col,
                    format!("party {} already appears with input {}", party_letter(party), s.input + 1),
                ))
            }
            Some(s) => s.coeff += coeff,
            slot @ None => *slot = Some(PartySetting { input, coeff }),
        }
    }
    for s in &mut settings {
        if matches!(s, Some(ps) if ps.coeff == 0) {
            *s = None;
        }
    }
    Ok((settings, offset))
}

fn parse_tag(cur: &mut Cursor<'_>, sc: &Scenario) -> std::result::Result<(usize, usize), String> {
    let start = cur.pos;
    while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
        cur.pos += 1;
    }
    let tag = std::str::from_utf8(&cur.s[start..cur.pos]).unwrap();
    let bad = || format!("malformed party tag `{tag}`");
    let mut chars = tag.chars();
    let letter = chars.next().ok_or_else(bad)?;
    if !letter.is_ascii_uppercase() {
        return Err(bad());
    }
    let party = (letter as u8 - b'A') as usize;
    if party >= sc.parties() {
        return Err(format!("unknown party tag `{tag}` for {} parties", sc.parties()));
    }
    let digits = chars.as_str().trim_start_matches('_');
    let input: usize = digits.parse().map_err(|_| bad())?;
    if input == 0 || input > sc.inputs(party) {
        return Err(format!("party tag `{tag}` refers to a missing input"));
    }
    Ok((party, input - 1))
}

struct RawTerm<'a> {
    line: usize,
    text: &'a str,
    start: usize,
}

/// Parses the text format into an expression.
pub fn parse_expression(text: &str) -> Result<BellExpression> {
    let err = |line: usize, (column, message): (usize, String)| Error::Parse {
        line,
        column,
        message,
    };
    let mut parties: Option<usize> = None;
    let mut inputs: Option<Vec<usize>> = None;
    let mut outputs: Option<(usize, usize, usize)> = None; // (K, line, column)
    let mut comparator: Option<(Comparator, Rational)> = None;
    let mut raw = Vec::new();
    let mut last_line = 0;

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = full.split('#').next().unwrap();
        let start = content.len() - content.trim_start().len();
        let body = content.trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('@') {
            let mut parts = rest.splitn(2, char::is_whitespace);
            let key = parts.next().unwrap();
            let value = parts.next().unwrap_or("").trim();
            let vcol = start + 1 + full[start..].find(value).unwrap_or(0);
            let num = |v: &str| v.trim().parse::<usize>().map_err(|_| err(line, (vcol, format!("bad value `{v}`"))));
            match key {
                "parties" => parties = Some(num(value)?),
                "inputs" => inputs = Some(value.split(',').map(num).collect::<Result<_>>()?),
                "outputs" => {
                    let k = num(value)?;
                    outputs = Some((k, line, vcol));
                }
                _ => return Err(err(line, (start + 1, format!("unknown directive `@{key}`")))),
            }
            continue;
        }
        if body.starts_with(">=") || body.starts_with("<=") {
            if comparator.is_some() {
                return Err(err(line, (start + 1, "second comparator line".into())));
            }
            let cmp = if body.starts_with(">=") {
                Comparator::AtLeast
            } else {
                Comparator::AtMost
            };
            let mut cur = Cursor::new(&content[start + 2..], start + 2);
            let bound = cur.rational().map_err(|e| err(line, e))?;
            cur.skip_ws();
            if !cur.at_end() {
                return Err(err(line, (cur.col(), "trailing characters after bound".into())));
            }
            comparator = Some((cmp, bound));
            continue;
        }
        raw.push(RawTerm {
            line,
            text: content,
            start,
        });
    }

    // K comes from the directive or the first bracket's `% K`
    let mut k_decl = outputs;
    let mut parsed_k = Vec::with_capacity(raw.len());
    for t in &raw {
        let (k, col) = trailing_modulus(t).map_err(|e| err(t.line, e))?;
        match k_decl {
            Some((k0, _, _)) if k0 != k => {
                return Err(err(t.line, (col, format!("modulus {k} disagrees with K = {k0}"))))
            }
            None => k_decl = Some((k, t.line, col)),
            _ => {}
        }
        parsed_k.push(k);
    }
    let (k, kline, kcol) = k_decl.ok_or_else(|| err(last_line.max(1), (1, "cannot determine K".into())))?;
    let n = parties.unwrap_or_else(|| inputs.as_ref().map_or(3, |v| if v.len() > 1 { v.len() } else { 3 }));
    let input_counts = match inputs {
        Some(v) if v.len() == 1 => vec![v[0]; n],
        Some(v) if v.len() == n => v,
        Some(v) => {
            return Err(err(1, (1, format!("{} input counts for {n} parties", v.len()))));
        }
        None => vec![2; n],
    };
    let scenario = Scenario::new(input_counts, k).map_err(|e| err(kline, (kcol, e.to_string())))?;

    let mut terms = Vec::with_capacity(raw.len());
    for t in &raw {
        terms.push(parse_term_line(t, &scenario).map_err(|e| err(t.line, e))?);
    }
    let (cmp, bound) = comparator.ok_or_else(|| err(last_line + 1, (1, "missing `>=` or `<=` bound line".into())))?;
    BellExpression::new(scenario, terms, cmp, bound)
}

fn trailing_modulus(t: &RawTerm<'_>) -> Located<(usize, usize)> {
    let pct = t
        .text
        .rfind('%')
        .ok_or((t.start + 1, "expected `weight * [ ... ] % K`".to_string()))?;
    let mut cur = Cursor::new(&t.text[pct + 1..], pct + 1);
    cur.skip_ws();
    let col = cur.col();
    let k = cur.integer()?;
    cur.skip_ws();
    if !cur.at_end() {
        return Err((cur.col(), "trailing characters after modulus".into()));
    }
    Ok((k as usize, col))
}

fn parse_term_line(t: &RawTerm<'_>, sc: &Scenario) -> Located<BracketTerm> {
    let open = t
        .text
        .find('[')
        .ok_or((t.start + 1, "expected `[`".to_string()))?;
    let head = &t.text[..open];
    let weight = if head.trim().is_empty() {
        Rational::one()
    } else {
        let mut cur = Cursor::new(head, 0);
        let w = cur.rational()?;
        cur.skip_ws();
        if !cur.eat(b'*') {
            return Err((cur.col(), "expected `*` after weight".into()));
        }
        cur.skip_ws();
        if !cur.at_end() {
            return Err((cur.col(), "unexpected text before `[`".into()));
        }
        w
    };
    let close = t.text[open..]
        .find(']')
        .map(|i| i + open)
        .ok_or((open + 1, "unclosed `[`".to_string()))?;
    let mut cur = Cursor::new(&t.text[open + 1..close], open + 1);
    let (settings, offset) = parse_body(&mut cur, sc)?;
    let tail = t.text[close + 1..].trim_start();
    if !tail.starts_with('%') {
        return Err((close + 2, "expected `% K` after bracket".into()));
    }
    Ok(BracketTerm::new(weight, settings, offset))
}

/// Canonical text form; `parse_expression(&serialize_expression(e)) == e`.
pub fn serialize_expression(expr: &BellExpression) -> String {
    let sc = expr.scenario();
    let mut out = String::new();
    writeln!(out, "@parties {}", sc.parties()).unwrap();
    if sc.is_homogeneous() {
        writeln!(out, "@inputs {}", sc.inputs(0)).unwrap();
    } else {
        let v: Vec<String> = sc.input_counts().iter().map(|m| m.to_string()).collect();
        writeln!(out, "@inputs {}", v.join(",")).unwrap();
    }
    writeln!(out, "@outputs {}", sc.outputs()).unwrap();
    for t in expr.terms() {
        writeln!(out, "{}", TermDisplay(t, sc.outputs())).unwrap();
    }
    writeln!(out, "{} {}", expr.comparator().symbol(), expr.bound()).unwrap();
    out
}

impl std::str::FromStr for BellExpression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_expression(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::catalog;

    #[test]
    fn catalog_round_trips() {
        for k in 2..=5 {
            let e = catalog::mermin_cglmp(k).unwrap();
            assert_eq!(parse_expression(&serialize_expression(&e)).unwrap(), e);
            let e = catalog::sliwa7_generalized(k).unwrap();
            assert_eq!(parse_expression(&serialize_expression(&e)).unwrap(), e);
        }
        let e = catalog::catalog("symm-A4", 3).unwrap();
        assert_eq!(parse_expression(&serialize_expression(&e)).unwrap(), e);
        let e = catalog::cglmp_bipartite(4).unwrap();
        assert_eq!(parse_expression(&serialize_expression(&e)).unwrap(), e);
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let e = parse_expression(
            "1*[ +A2 -B1 +C1 +0 ] % 3\n1*[ +A1 +B2 -C1 +0 ] % 3\n1*[ -A1 +B1 +C2 +0 ] % 3\n1*[ -A2 -B2 -C2 -1 ] % 3\n>= 2\n",
        )
        .unwrap();
        assert_eq!(e, catalog::mermin_cglmp(3).unwrap());
    }

    #[test]
    fn serialized_text_is_canonical() {
        let a = parse_expression("2/4 * [A1 + 2*B2 - 4] % 3 # note\n[ +2*B2 + A1 + 2 ] % 3\n<= -1/3").unwrap();
        let text = serialize_expression(&a);
        assert_eq!(
            text,
            "@parties 3\n@inputs 2\n@outputs 3\n3/2 * [ +A1 +2*B2 +2 ] % 3\n<= -1/3\n"
        );
        assert_eq!(serialize_expression(&parse_expression(&text).unwrap()), text);
    }

    #[test]
    fn bad_party_tag_is_located() {
        let err = parse_expression("1 * [ +A2 -D1 +C1 +0 ] % 3\n>= 2").unwrap_err();
        match err {
            Error::Parse { line, column, message } => {
                assert_eq!((line, column), (1, 12));
                assert!(message.contains("D1"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
        for bad in ["1 * [ +a1 ] % 3\n>= 0", "1 * [ +A3 ] % 3\n>= 0", "1 * [ +A ] % 3\n>= 0"] {
            assert!(matches!(parse_expression(bad), Err(Error::Parse { line: 1, .. })), "{bad}");
        }
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(parse_expression("1 * [ +A1 ] % 3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(
            parse_expression("1 * [ +A1 ] % 3\n1 * [ +B1 ] % 4\n>= 0"),
            Err(Error::Parse { line: 2, column: 15, .. })
        ));
        assert!(matches!(
            parse_expression("1 * [ +A1 +A2 ] % 3\n>= 0"),
            Err(Error::Parse { line: 1, column: 12, .. })
        ));
        assert!(matches!(parse_expression("1 [ +A1 ] % 3\n>= 0"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_expression("1 * [ +A1 +B1 ] % 3\n>= 1/0"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn trivial_bracket_vanishes() {
        let e = parse_expression("1 * [ +A1 -A1 ] % 4\n>= 0").unwrap();
        assert!(e.terms().is_empty());
        assert_eq!(e.outputs(), 4);
        assert_eq!(parse_expression(&serialize_expression(&e)).unwrap(), e);
    }

    #[test]
    fn bipartite_directive() {
        let e = parse_expression("@parties 2\n[ +A2 -B1 ] % 3\n[ +A1 -B2 ] % 3\n[ -A1 +B1 ] % 3\n[ +B2 -A2 -1 ] % 3\n>= 2").unwrap();
        assert_eq!(e, catalog::cglmp_bipartite(3).unwrap());
        assert!(parse_expression("@parties 2\n[ +C1 ] % 3\n>= 0").is_err());
    }
}
