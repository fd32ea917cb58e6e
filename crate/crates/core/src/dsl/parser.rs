use std::collections::HashMap;

use super::lexer::{lex_line, Tok, Token};
use super::{
    BenchProgram, ElementKind, ElementStmt, ErrorCategory, ParseError, RunDirective, Source,
    Statement,
};
use crate::elements::BsConvention;
use crate::hilbert::{c64, Photon, C64};
use crate::protocol::MeasurementMode;
use crate::spdc::ProfileKind;

/// Parses raw bytes; invalid UTF-8 is a lexical error at the offending byte.
pub fn parse_bytes(bytes: &[u8]) -> Result<BenchProgram, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().unwrap_or("").chars().count() + 1;
            Err(ParseError::new(
                line,
                column,
                ErrorCategory::Lexical,
                "invalid UTF-8",
            ))
        }
    }
}

pub fn parse(text: &str) -> Result<BenchProgram, ParseError> {
    let mut checker = Checker::default();
    let mut statements = Vec::new();
    let mut last_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let tokens = lex_line(line_no, line)?;
        if tokens.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            tokens,
            pos: 0,
            line: line_no,
            end_column: line.chars().count() + 1,
        };
        statements.push(cur.statement(&mut checker)?);
    }
    checker.finish(last_line.max(1))?;
    Ok(BenchProgram { statements })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Live,
    Consumed(usize),
    Detected(usize),
}

#[derive(Clone, Copy, Debug)]
struct PathInfo {
    photon: Photon,
    declared: usize,
    status: Status,
}

struct Checker {
    paths: HashMap<String, PathInfo>,
    detectors: HashMap<String, usize>,
    source: Option<usize>,
    prepare: Option<usize>,
    run: Option<usize>,
}

impl Default for Checker {
    fn default() -> Self {
        let entry = |photon| PathInfo {
            photon,
            declared: 0,
            status: Status::Live,
        };
        Checker {
            paths: HashMap::from([
                ("A".to_string(), entry(Photon::A)),
                ("B".to_string(), entry(Photon::B)),
            ]),
            detectors: HashMap::new(),
            source: None,
            prepare: None,
            run: None,
        }
    }
}

fn semantic(line: usize, column: usize, msg: impl Into<String>) -> ParseError {
    ParseError::new(line, column, ErrorCategory::Semantic, msg)
}

impl Checker {
    fn use_path(&self, name: &str, line: usize, column: usize) -> Result<Photon, ParseError> {
        match self.paths.get(name) {
            None => Err(semantic(line, column, format!("undeclared path '{name}'"))),
            Some(p) => match p.status {
                Status::Live => Ok(p.photon),
                Status::Consumed(at) => Err(semantic(
                    line,
                    column,
                    format!("path '{name}' was consumed on line {at}"),
                )),
                Status::Detected(at) => Err(semantic(
                    line,
                    column,
                    format!("path '{name}' ends at a detector on line {at}"),
                )),
            },
        }
    }

    fn declare(
        &mut self,
        name: &str,
        photon: Photon,
        line: usize,
        column: usize,
    ) -> Result<(), ParseError> {
        if let Some(p) = self.paths.get(name) {
            let origin = if p.declared == 0 {
                "is a photon entry".to_string()
            } else {
                format!("was declared on line {}", p.declared)
            };
            return Err(semantic(
                line,
                column,
                format!("path reused: '{name}' {origin}"),
            ));
        }
        self.paths.insert(
            name.to_string(),
            PathInfo {
                photon,
                declared: line,
                status: Status::Live,
            },
        );
        Ok(())
    }

    fn set_status(&mut self, name: &str, status: Status) {
        if let Some(p) = self.paths.get_mut(name) {
            p.status = status;
        }
    }

    fn once(slot: &mut Option<usize>, what: &str, line: usize) -> Result<(), ParseError> {
        if let Some(first) = *slot {
            return Err(semantic(
                line,
                1,
                format!("duplicate {what} (first on line {first})"),
            ));
        }
        *slot = Some(line);
        Ok(())
    }

    fn finish(&self, last_line: usize) -> Result<(), ParseError> {
        if self.source.is_none() {
            return Err(semantic(last_line, 1, "program has no source"));
        }
        if self.detectors.is_empty() {
            return Err(semantic(last_line, 1, "program has no detector"));
        }
        Ok(())
    }
}

struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
    end_column: usize,
}

impl Cursor {
    fn column(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map_or(self.end_column, |t| t.column)
    }

    fn syntax(&self, column: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, column, ErrorCategory::Syntax, msg)
    }

    fn found(&self) -> String {
        self.tokens
            .get(self.pos)
            .map_or("end of line".into(), |t| t.tok.describe())
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn expect(&mut self, want: Tok) -> Result<usize, ParseError> {
        let col = self.column();
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(col)
        } else {
            Err(self.syntax(
                col,
                format!("expected {}, found {}", want.describe(), self.found()),
            ))
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let col = self.column();
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok((w, col))
            }
            _ => Err(self.syntax(col, format!("expected {what}, found {}", self.found()))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<usize, ParseError> {
        let col = self.column();
        match self.peek() {
            Some(Tok::Word(w)) if w == kw => {
                self.pos += 1;
                Ok(col)
            }
            _ => Err(self.syntax(col, format!("expected '{kw}', found {}", self.found()))),
        }
    }

    /// `key =`
    fn key(&mut self, key: &str) -> Result<(), ParseError> {
        self.keyword(key)?;
        self.expect(Tok::Eq)?;
        Ok(())
    }

    fn number_text(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let col = self.column();
        match self.peek() {
            Some(Tok::Number(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok((n, col))
            }
            _ => Err(self.syntax(col, format!("expected {what}, found {}", self.found()))),
        }
    }

    fn int(&mut self, what: &str) -> Result<i64, ParseError> {
        let (text, col) = self.number_text(what)?;
        text.parse::<i64>()
            .map_err(|_| self.syntax(col, format!("expected {what}, found {text}")))
    }

    fn uint(&mut self, what: &str) -> Result<u64, ParseError> {
        let (text, col) = self.number_text(what)?;
        text.trim_start_matches('+')
            .parse::<u64>()
            .map_err(|_| self.syntax(col, format!("expected {what}, found {text}")))
    }

    fn float(&mut self, what: &str) -> Result<f64, ParseError> {
        let (text, col) = self.number_text(what)?;
        let x: f64 = text
            .parse()
            .map_err(|_| self.syntax(col, format!("expected {what}, found {text}")))?;
        if !x.is_finite() {
            return Err(self.syntax(col, format!("{what} out of range")));
        }
        Ok(x)
    }

    fn complex(&mut self, what: &str) -> Result<C64, ParseError> {
        let col = self.column();
        match self.peek() {
            Some(Tok::Complex(z)) => {
                let z = *z;
                self.pos += 1;
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(self.syntax(col, format!("{what} out of range")));
                }
                Ok(z)
            }
            Some(Tok::Number(_)) => Ok(c64(self.float(what)?, 0.0)),
            _ => Err(self.syntax(col, format!("expected {what}, found {}", self.found()))),
        }
    }

    fn end(&self) -> Result<(), ParseError> {
        if self.pos < self.tokens.len() {
            return Err(self.syntax(self.column(), format!("unexpected {}", self.found())));
        }
        Ok(())
    }

    fn statement(&mut self, ck: &mut Checker) -> Result<Statement, ParseError> {
        let (head, col) = self.word("a statement keyword")?;
        let stmt = match head.as_str() {
            "source" => self.source(ck)?,
            "prepare" => self.prepare(ck)?,
            "element" => self.element(ck)?,
            "detect" => self.detect(ck)?,
            "run" => self.run(ck)?,
            other => {
                return Err(self.syntax(
                    col,
                    format!("unknown statement '{other}' (expected source, prepare, element, detect or run)"),
                ))
            }
        };
        self.end()?;
        Ok(stmt)
    }

    fn source(&mut self, ck: &mut Checker) -> Result<Statement, ParseError> {
        self.keyword("spdc")?;
        self.key("l")?;
        let l = self.int("pump charge")?;
        self.key("K")?;
        let k_col = self.column();
        let half_width = self.int("window half-width")?;
        if half_width < 1 {
            return Err(semantic(self.line, k_col, "K must be at least 1"));
        }
        self.key("profile")?;
        let profile = self.profile()?;
        Checker::once(&mut ck.source, "source", self.line)?;
        Ok(Statement::Source(Source {
            l,
            half_width,
            profile,
        }))
    }

    fn profile(&mut self) -> Result<ProfileKind, ParseError> {
        let (name, col) = self.word("a profile")?;
        match name.as_str() {
            "uniform" => Ok(ProfileKind::Uniform),
            "gaussian" => {
                self.expect(Tok::LParen)?;
                let width = self.float("gaussian width")?;
                self.expect(Tok::RParen)?;
                Ok(ProfileKind::Gaussian { width })
            }
            "explicit" => {
                self.expect(Tok::LParen)?;
                let mut coeffs = Vec::new();
                loop {
                    let m = self.int("OAM charge")?;
                    self.expect(Tok::Colon)?;
                    coeffs.push((m, self.complex("coefficient")?));
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(ProfileKind::Explicit { coeffs })
            }
            other => Err(self.syntax(
                col,
                format!("unknown profile '{other}' (expected uniform, gaussian or explicit)"),
            )),
        }
    }

    fn prepare(&mut self, ck: &mut Checker) -> Result<Statement, ParseError> {
        self.keyword("A")?;
        self.key("alpha")?;
        let alpha = self.complex("alpha")?;
        self.key("beta")?;
        let beta = self.complex("beta")?;
        Checker::once(&mut ck.prepare, "prepare", self.line)?;
        Ok(Statement::Prepare { alpha, beta })
    }

    fn run(&mut self, ck: &mut Checker) -> Result<Statement, ParseError> {
        self.key("trials")?;
        let trials = self.uint("trial count")?;
        self.key("seed")?;
        let seed = self.uint("seed")?;
        self.key("mode")?;
        let (mode, col) = self.word("a mode")?;
        let mode = match mode.as_str() {
            "projector" => MeasurementMode::Projector,
            "apparatus" => MeasurementMode::Apparatus,
            other => {
                return Err(self.syntax(
                    col,
                    format!("unknown mode '{other}' (expected projector or apparatus)"),
                ))
            }
        };
        Checker::once(&mut ck.run, "run directive", self.line)?;
        Ok(Statement::Run(RunDirective { trials, seed, mode }))
    }

    fn detect(&mut self, ck: &mut Checker) -> Result<Statement, ParseError> {
        let (id, id_col) = self.word("a detector name")?;
        let (path, path_col) = self.word("a path")?;
        self.end()?;
        if let Some(first) = ck.detectors.get(&id) {
            return Err(semantic(
                self.line,
                id_col,
                format!("duplicate detector '{id}' (first on line {first})"),
            ));
        }
        ck.use_path(&path, self.line, path_col)?;
        ck.detectors.insert(id.clone(), self.line);
        ck.set_status(&path, Status::Detected(self.line));
        Ok(Statement::Detect { id, path })
    }

    fn element(&mut self, ck: &mut Checker) -> Result<Statement, ParseError> {
        let (arm, arm_col) = self.word("a path")?;
        let (kind_word, kind_col) = self.word("an element kind")?;
        let mut partner: Option<(String, usize)> = None;
        let kind = match kind_word.as_str() {
            "sorter" => ElementKind::Sorter,
            "dove" => ElementKind::Dove,
            "pbs" => {
                if let Some(Tok::Word(_)) = self.peek() {
                    partner = Some(self.word("a path")?);
                }
                ElementKind::Pbs {
                    partner: partner.as_ref().map(|p| p.0.clone()),
                }
            }
            "bs" => {
                let p = self.word("the second input path")?;
                let convention = match self.peek() {
                    Some(Tok::Word(_)) => {
                        let (c, col) = self.word("a convention")?;
                        match c.as_str() {
                            "symmetric" => BsConvention::Symmetric,
                            "hadamard" => BsConvention::Hadamard,
                            other => {
                                return Err(self.syntax(
                                    col,
                                    format!("unknown convention '{other}' (expected symmetric or hadamard)"),
                                ))
                            }
                        }
                    }
                    _ => BsConvention::Symmetric,
                };
                let kind = ElementKind::Bs {
                    partner: p.0.clone(),
                    convention,
                };
                partner = Some(p);
                kind
            }
            "sph" => {
                let charge = match self.peek() {
                    Some(Tok::Number(_)) => {
                        let col = self.column();
                        match self.int("hologram charge")? {
                            1 => 1,
                            -1 => -1,
                            q => {
                                return Err(semantic(
                                    self.line,
                                    col,
                                    format!("hologram charge must be +1 or -1, got {q}"),
                                ))
                            }
                        }
                    }
                    _ => 1,
                };
                ElementKind::Sph { charge }
            }
            "hwp" => ElementKind::Hwp {
                theta: self.float("plate angle")?,
            },
            "qwp" => ElementKind::Qwp {
                theta: self.float("plate angle")?,
            },
            "delay" => ElementKind::Delay {
                phi: self.float("phase")?,
            },
            other => {
                return Err(self.syntax(
                    kind_col,
                    format!("unknown element '{other}' (expected sorter, pbs, bs, dove, sph, hwp, qwp or delay)"),
                ))
            }
        };

        let mut outputs: Vec<(String, usize)> = Vec::new();
        let arrow_col = self.column();
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            while let Some(Tok::Word(_)) = self.peek() {
                outputs.push(self.word("a path")?);
            }
            if outputs.is_empty() {
                return Err(self.syntax(arrow_col, "expected at least one path after '->'"));
            }
        }
        self.end()?;

        let (min, max, shape) = match &kind {
            ElementKind::Sorter => (2, 2, "sorter needs two outputs: even odd"),
            ElementKind::Pbs { partner: None } => (2, 2, "pbs needs two outputs: h v"),
            ElementKind::Pbs { partner: Some(_) } => (1, 1, "recombining pbs needs one output"),
            ElementKind::Bs { .. } => (2, 2, "bs needs two outputs"),
            _ => (
                0,
                1,
                "single-path elements take at most one output (a rename)",
            ),
        };
        if outputs.len() < min || outputs.len() > max {
            return Err(self.syntax(
                if outputs.is_empty() {
                    arrow_col
                } else {
                    outputs[0].1
                },
                shape,
            ));
        }

        let photon = ck.use_path(&arm, self.line, arm_col)?;
        if let Some((p, col)) = &partner {
            let other = ck.use_path(p, self.line, *col)?;
            if *p == arm {
                return Err(semantic(
                    self.line,
                    *col,
                    format!("element joins path '{arm}' to itself"),
                ));
            }
            if other != photon {
                return Err(semantic(
                    self.line,
                    *col,
                    format!("paths '{arm}' and '{p}' belong to different photons"),
                ));
            }
        }
        for (k, (name, col)) in outputs.iter().enumerate() {
            if outputs[..k].iter().any(|(n, _)| n == name) {
                return Err(semantic(
                    self.line,
                    *col,
                    format!("path reused: '{name}' listed twice"),
                ));
            }
        }
        if !outputs.is_empty() {
            ck.set_status(&arm, Status::Consumed(self.line));
            if let Some((p, _)) = &partner {
                ck.set_status(p, Status::Consumed(self.line));
            }
        }
        for (name, col) in &outputs {
            ck.declare(name, photon, self.line, *col)?;
        }
        Ok(Statement::Element(ElementStmt {
            arm,
            kind,
            outputs: outputs.into_iter().map(|(n, _)| n).collect(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "source spdc l=1 K=2 profile=uniform\n";

    fn err(body: &str) -> ParseError {
        parse(&format!("{HEAD}{body}")).unwrap_err()
    }

    #[test]
    fn minimal_program() {
        let p = parse(&format!("{HEAD}detect D1 A\n")).unwrap();
        assert_eq!(p.statements.len(), 2);
        assert_eq!(p.source().half_width, 2);
        assert_eq!(p.detectors().collect::<Vec<_>>(), vec![("D1", "A")]);
    }

    #[test]
    fn missing_path_after_arrow() {
        let e = err("element A sph -> \n");
        assert_eq!(e.category, ErrorCategory::Syntax);
        assert_eq!((e.line, e.column), (2, 15));
    }

    #[test]
    fn path_reused() {
        let e = err("element A sorter -> e o\nelement e pbs -> h o\n");
        assert_eq!(e.category, ErrorCategory::Semantic);
        assert!(e.message.contains("path reused"), "{}", e.message);
        assert_eq!((e.line, e.column), (3, 20));
    }

    #[test]
    fn undeclared_and_consumed() {
        let e = err("element x dove\n");
        assert_eq!(e.category, ErrorCategory::Semantic);
        assert!(e.message.contains("undeclared path"));
        let e = err("element A sorter -> e o\nelement A dove\n");
        assert!(e.message.contains("consumed"));
        let e = err("detect D1 A\nelement A dove\n");
        assert!(e.message.contains("detector"));
    }

    #[test]
    fn duplicate_source() {
        let e = err("source spdc l=1 K=3 profile=uniform\ndetect D A\n");
        assert_eq!((e.category, e.line), (ErrorCategory::Semantic, 2));
        assert!(e.message.contains("duplicate source"));
    }

    #[test]
    fn missing_source_and_detector() {
        assert!(parse("detect D A\n")
            .unwrap_err()
            .message
            .contains("no source"));
        assert!(parse(HEAD).unwrap_err().message.contains("no detector"));
        assert!(parse("").is_err());
    }

    #[test]
    fn cross_photon_and_self_joins() {
        assert!(err("element A bs B -> x y\ndetect D x\n")
            .message
            .contains("different photons"));
        assert!(err("element A bs A -> x y\ndetect D x\n")
            .message
            .contains("itself"));
    }

    #[test]
    fn arity_errors_are_syntax() {
        assert_eq!(
            err("element A sorter -> e\n").category,
            ErrorCategory::Syntax
        );
        assert_eq!(
            err("element A dove -> x y\n").category,
            ErrorCategory::Syntax
        );
        assert_eq!(err("element A bs\n").category, ErrorCategory::Syntax);
    }

    #[test]
    fn profiles_and_literals() {
        let p = parse(
            "source spdc l=0 K=3 profile=explicit(0:1+0i, 1:0.5-0.25i)\n\
             prepare A alpha=0.6 beta=0+0.8i\n\
             element A sph -1\n\
             detect D A\n\
             run trials=10 seed=3 mode=apparatus\n",
        )
        .unwrap();
        match &p.source().profile {
            ProfileKind::Explicit { coeffs } => assert_eq!(coeffs[1], (1, c64(0.5, -0.25))),
            other => panic!("{other:?}"),
        }
        assert_eq!(p.preparation(), Some((c64(0.6, 0.0), c64(0.0, 0.8))));
        assert_eq!(p.run_directive().unwrap().mode, MeasurementMode::Apparatus);
        let e = parse("source spdc l=1 K=2 profile=gaussian(x)\n").unwrap_err();
        assert_eq!((e.category, e.column), (ErrorCategory::Syntax, 38));
    }

    #[test]
    fn invalid_utf8() {
        let mut bytes = HEAD.as_bytes().to_vec();
        bytes.extend_from_slice(b"detect D \xff\n");
        let e = parse_bytes(&bytes).unwrap_err();
        assert_eq!(
            (e.line, e.column, e.category),
            (2, 10, ErrorCategory::Lexical)
        );
    }
}
