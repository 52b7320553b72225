//! Line-oriented model description language.
//!
//! ```text
//! system radioactive
//! params a b c
//! states x w
//! eq x' = -a*x + b - w
//! eq w' = 0
//! out y1 = c*x
//! out y2 = w
//! ```
//!
//! ```text
//! compartment two
//! vertices 2
//! edge 1 -> 2            # rate a21
//! edge 2 -> 1 rate a12
//! leak 1                 # rate a01
//! input 1
//! output 2 scale 1
//! ```

use std::collections::{BTreeSet, HashMap};

use num_traits::ToPrimitive;

use super::compartment::{CompartmentModel, Edge};
use super::expr::{eval_affine, eval_param_expr, tokenize, Binding, ExprParser, Tok, Token};
use super::linear::LinearModel;
use super::Model;
use crate::algebra::{RatFunc, Symbols};
use crate::error::ModelError;

pub const OPERATOR: &str = "s";

struct Line {
    no: usize,
    toks: Vec<Token>,
    end_col: usize,
}

impl Line {
    fn syntax(&self, idx: usize, msg: impl Into<String>) -> ModelError {
        let col = self.toks.get(idx).map_or(self.end_col, |t| t.col);
        ModelError::Syntax { line: self.no, col, msg: msg.into() }
    }

    fn semantic(&self, msg: impl Into<String>) -> ModelError {
        ModelError::Semantic { line: self.no, msg: msg.into() }
    }

    fn ident(&self, idx: usize, what: &str) -> Result<String, ModelError> {
        match self.toks.get(idx).map(|t| &t.tok) {
            Some(Tok::Ident(s)) => Ok(s.clone()),
            _ => Err(self.syntax(idx, format!("expected {what}"))),
        }
    }

    fn sym(&self, idx: usize, c: char) -> Result<(), ModelError> {
        match self.toks.get(idx).map(|t| &t.tok) {
            Some(Tok::Sym(d)) if *d == c => Ok(()),
            _ => Err(self.syntax(idx, format!("expected `{c}`"))),
        }
    }

    fn uint(&self, idx: usize, what: &str) -> Result<usize, ModelError> {
        match self.toks.get(idx).map(|t| &t.tok) {
            Some(Tok::Int(n)) => n.to_usize().ok_or_else(|| self.syntax(idx, format!("{what} too large"))),
            _ => Err(self.syntax(idx, format!("expected {what}"))),
        }
    }

    fn idents_from(&self, idx: usize) -> Result<Vec<String>, ModelError> {
        (idx..self.toks.len()).map(|i| self.ident(i, "an identifier")).collect()
    }

    fn end(&self, idx: usize) -> Result<(), ModelError> {
        if idx < self.toks.len() {
            Err(self.syntax(idx, "unexpected trailing tokens"))
        } else {
            Ok(())
        }
    }

    fn expr_from(&self, idx: usize) -> Result<super::expr::Expr, ModelError> {
        if idx >= self.toks.len() {
            return Err(self.syntax(idx, "expected an expression"));
        }
        ExprParser::new(&self.toks[idx..], self.no, self.end_col).parse_all()
    }
}

fn lines(text: &str) -> Result<Vec<Line>, ModelError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let toks = tokenize(raw, i + 1)?;
        if !toks.is_empty() {
            out.push(Line { no: i + 1, toks, end_col: raw.chars().count() + 1 });
        }
    }
    Ok(out)
}

pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let lines = lines(text)?;
    let Some(head) = lines.first() else {
        return Err(ModelError::Syntax { line: 1, col: 1, msg: "empty document".into() });
    };
    let kind = head.ident(0, "`system` or `compartment`")?;
    let name = head.ident(1, "a model name")?;
    head.end(2)?;
    match kind.as_str() {
        "system" => parse_system(name, &lines[1..]).map(Model::Linear),
        "compartment" => parse_compartment(name, &lines[1..]).map(Model::Compartment),
        _ => Err(head.syntax(0, "expected `system` or `compartment`")),
    }
}

fn check_fresh(line: &Line, seen: &mut HashMap<String, usize>, name: &str) -> Result<(), ModelError> {
    if name == OPERATOR {
        return Err(line.semantic(format!("`{OPERATOR}` is reserved for the differentiation operator")));
    }
    if let Some(prev) = seen.insert(name.to_string(), line.no) {
        return Err(line.semantic(format!("symbol `{name}` already declared on line {prev}")));
    }
    Ok(())
}

fn parse_system(name: String, lines: &[Line]) -> Result<LinearModel, ModelError> {
    let mut seen = HashMap::new();
    let (mut params, mut states, mut inputs) = (Vec::new(), Vec::new(), Vec::new());
    let mut eqs: Vec<(&Line, String)> = Vec::new();
    let mut outs: Vec<(&Line, String)> = Vec::new();
    let mut states_line = None;
    for line in lines {
        let kw = line.ident(0, "a keyword")?;
        match kw.as_str() {
            "params" | "states" | "inputs" => {
                let names = line.idents_from(1)?;
                for n in &names {
                    check_fresh(line, &mut seen, n)?;
                }
                match kw.as_str() {
                    "params" => params.extend(names),
                    "states" => {
                        states_line.get_or_insert(line.no);
                        states.extend(names)
                    }
                    _ => inputs.extend(names),
                }
            }
            "eq" => {
                let x = line.ident(1, "a state")?;
                line.sym(2, '\'')?;
                line.sym(3, '=')?;
                eqs.push((line, x));
            }
            "out" => {
                let y = line.ident(1, "an output name")?;
                line.sym(2, '=')?;
                check_fresh(line, &mut seen, &y)?;
                outs.push((line, y));
            }
            _ => return Err(line.syntax(0, format!("unknown statement `{kw}` in a system block"))),
        }
    }
    let decl_line = states_line.unwrap_or(lines.first().map_or(1, |l| l.no));
    if states.is_empty() {
        return Err(ModelError::Semantic { line: decl_line, msg: "the state list is empty".into() });
    }
    if outs.is_empty() {
        return Err(ModelError::Semantic { line: decl_line, msg: "no outputs declared".into() });
    }

    let symbols = Symbols::with_operator(params.iter());
    let nv = symbols.len();
    let (n, k) = (states.len(), inputs.len());
    let resolve = |id: &str| -> Option<Binding> {
        if let Some(i) = params.iter().position(|p| p == id) {
            return Some(Binding::Param(i));
        }
        if let Some(i) = states.iter().position(|p| p == id) {
            return Some(Binding::Linear(i));
        }
        inputs.iter().position(|p| p == id).map(|i| Binding::Linear(n + i))
    };

    let zero = RatFunc::zero(nv);
    let mut a = vec![vec![zero.clone(); n]; n];
    let mut b = vec![vec![zero.clone(); k]; n];
    let mut f0 = vec![zero.clone(); n];
    let mut defined = vec![None; n];
    for (line, x) in &eqs {
        let Some(i) = states.iter().position(|s| s == x) else {
            return Err(line.semantic(format!("`{x}` is not a declared state")));
        };
        if let Some(prev) = defined[i].replace(line.no) {
            return Err(line.semantic(format!("state `{x}` already has an equation on line {prev}")));
        }
        let aff = eval_affine(&line.expr_from(4)?, nv, n + k, line.no, &resolve)?;
        a[i] = aff.linear[..n].to_vec();
        b[i] = aff.linear[n..].to_vec();
        f0[i] = aff.constant;
    }
    if let Some(i) = defined.iter().position(Option::is_none) {
        return Err(ModelError::Semantic { line: decl_line, msg: format!("state `{}` has no equation", states[i]) });
    }
    let (mut c, mut d, mut g0) = (Vec::new(), Vec::new(), Vec::new());
    for (line, _) in &outs {
        let aff = eval_affine(&line.expr_from(3)?, nv, n + k, line.no, &resolve)?;
        c.push(aff.linear[..n].to_vec());
        d.push(aff.linear[n..].to_vec());
        g0.push(aff.constant);
    }
    let model = LinearModel {
        name,
        symbols,
        states,
        outputs: outs.into_iter().map(|(_, y)| y).collect(),
        inputs,
        a,
        b,
        c,
        d,
        f0,
        g0,
    };
    model.validate()?;
    Ok(model)
}

struct PendingScale<'a> {
    line: &'a Line,
    vertex: usize,
    expr_at: Option<usize>,
}

fn parse_compartment(name: String, lines: &[Line]) -> Result<CompartmentModel, ModelError> {
    let mut seen = HashMap::new();
    let mut params = Vec::new();
    let mut n = None;
    let mut edges: Vec<(&Line, usize, usize, String)> = Vec::new();
    let mut leaks: Vec<(&Line, usize, String)> = Vec::new();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for line in lines {
        let kw = line.ident(0, "a keyword")?;
        match kw.as_str() {
            "params" => {
                for p in line.idents_from(1)? {
                    check_fresh(line, &mut seen, &p)?;
                    params.push(p);
                }
            }
            "vertices" => {
                if n.is_some() {
                    return Err(line.semantic("vertex count given twice"));
                }
                n = Some(line.uint(1, "a vertex count")?);
                line.end(2)?;
            }
            "edge" => {
                let from = line.uint(1, "a vertex")?;
                if !matches!(line.toks.get(2).map(|t| &t.tok), Some(Tok::Arrow)) {
                    return Err(line.syntax(2, "expected `->`"));
                }
                let to = line.uint(3, "a vertex")?;
                let rate = optional_rate(line, 4)?.unwrap_or_else(|| format!("a{to}{from}"));
                edges.push((line, from, to, rate));
            }
            "leak" => {
                let v = line.uint(1, "a vertex")?;
                let rate = optional_rate(line, 2)?.unwrap_or_else(|| format!("a0{v}"));
                leaks.push((line, v, rate));
            }
            "input" | "output" => {
                let vertex = line.uint(1, "a vertex")?;
                let expr_at = match line.toks.get(2).map(|t| &t.tok) {
                    None => None,
                    Some(Tok::Ident(s)) if s == "scale" => Some(3),
                    Some(_) => return Err(line.syntax(2, "expected `scale`")),
                };
                let pending = PendingScale { line, vertex, expr_at };
                if kw == "input" {
                    inputs.push(pending);
                } else {
                    outputs.push(pending);
                }
            }
            _ => return Err(line.syntax(0, format!("unknown statement `{kw}` in a compartment block"))),
        }
    }
    let first = lines.first().map_or(1, |l| l.no);
    let n = n.ok_or(ModelError::Semantic { line: first, msg: "missing `vertices` statement".into() })?;
    if n == 0 {
        return Err(ModelError::Semantic { line: first, msg: "a compartment model needs at least one vertex".into() });
    }
    let check_vertex = |line: &Line, v: usize| {
        if (1..=n).contains(&v) {
            Ok(())
        } else {
            Err(line.semantic(format!("vertex {v} outside 1..={n}")))
        }
    };

    // Rate symbols: each used once; those not declared are appended sorted.
    let mut used: HashMap<String, usize> = HashMap::new();
    let mut extra = BTreeSet::new();
    let rate_uses = edges.iter().map(|(l, _, _, r)| (*l, r)).chain(leaks.iter().map(|(l, _, r)| (*l, r)));
    for (line, r) in rate_uses {
        if r == OPERATOR {
            return Err(line.semantic(format!("`{OPERATOR}` is reserved for the differentiation operator")));
        }
        if let Some(prev) = used.insert(r.clone(), line.no) {
            return Err(line.semantic(format!("rate symbol `{r}` already used on line {prev}")));
        }
        if !params.contains(r) {
            extra.insert(r.clone());
        }
    }
    let table: Vec<String> = params.iter().cloned().chain(extra).collect();
    let symbols = Symbols::with_operator(table.iter());
    let nv = symbols.len();
    let index = |s: &str| table.iter().position(|p| p == s);

    let mut edge_list = Vec::new();
    for (line, from, to, rate) in &edges {
        check_vertex(line, *from)?;
        check_vertex(line, *to)?;
        if from == to {
            return Err(line.semantic(format!("self-loop at vertex {from}")));
        }
        if edge_list.iter().any(|e: &Edge| (e.from, e.to) == (*from, *to)) {
            return Err(line.semantic(format!("duplicate edge {from} -> {to}")));
        }
        edge_list.push(Edge { from: *from, to: *to, rate: index(rate).expect("rate in table") });
    }
    let mut leak_list = Vec::new();
    for (line, v, rate) in &leaks {
        check_vertex(line, *v)?;
        if leak_list.iter().any(|&(w, _)| w == *v) {
            return Err(line.semantic(format!("duplicate leak at vertex {v}")));
        }
        leak_list.push((*v, index(rate).expect("rate in table")));
    }
    let scales = |list: &[PendingScale], what: &str| -> Result<Vec<(usize, RatFunc)>, ModelError> {
        let mut out: Vec<(usize, RatFunc)> = Vec::new();
        for p in list {
            check_vertex(p.line, p.vertex)?;
            if out.iter().any(|(v, _)| *v == p.vertex) {
                return Err(p.line.semantic(format!("duplicate {what} at vertex {}", p.vertex)));
            }
            let scale = match p.expr_at {
                None => RatFunc::one(nv),
                Some(at) => eval_param_expr(&p.line.expr_from(at)?, nv, p.line.no, &index)?,
            };
            if scale.is_zero() {
                return Err(p.line.semantic(format!("{what} scaling must be nonzero")));
            }
            out.push((p.vertex, scale));
        }
        Ok(out)
    };
    let model = CompartmentModel {
        name,
        symbols,
        n,
        edges: edge_list,
        leaks: leak_list,
        inputs: scales(&inputs, "input")?,
        outputs: scales(&outputs, "output")?,
    };
    if model.outputs.is_empty() {
        return Err(ModelError::Semantic { line: first, msg: "no outputs declared".into() });
    }
    model.validate()?;
    Ok(model)
}

fn optional_rate(line: &Line, idx: usize) -> Result<Option<String>, ModelError> {
    match line.toks.get(idx).map(|t| &t.tok) {
        None => Ok(None),
        Some(Tok::Ident(s)) if s == "rate" => {
            let r = line.ident(idx + 1, "a rate symbol")?;
            line.end(idx + 2)?;
            Ok(Some(r))
        }
        Some(_) => Err(line.syntax(idx, "expected `rate`")),
    }
}
