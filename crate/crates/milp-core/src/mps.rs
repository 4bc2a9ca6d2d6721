//! Free-format MPS writer and reader.
//!
//! The writer emits NAME, ROWS, COLUMNS (with INTORG/INTEND markers around
//! binaries), RHS, BOUNDS and ENDATA in model order, one entry per line,
//! numbers with 17 significant digits. The reader accepts the same dialect:
//! whitespace-tokenized, `*` comments, RHS entries with a leading set name,
//! bound lines as `<type> <set> <var> [value]`.

use std::collections::HashMap;

use crate::error::{MilpError, Result};
use crate::model::{MilpModel, Sense, VarKind};

const OBJ_ROW: &str = "OBJ";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn check_name(kind: &str, name: &str) -> Result<()> {
    if name.is_empty() || name.len() > 255 {
        return Err(MilpError::BadName(format!(
            "{kind} name '{name}' must be 1..=255 characters"
        )));
    }
    if name.chars().any(|c| c.is_whitespace()) {
        return Err(MilpError::BadName(format!(
            "{kind} name '{name}' contains whitespace"
        )));
    }
    Ok(())
}

/// Renders the model as free-format MPS text.
pub fn write_mps(model: &MilpModel) -> Result<String> {
    model.validate()?;

    let mut seen = HashMap::new();
    for (i, v) in model.vars.iter().enumerate() {
        check_name("variable", &v.name)?;
        if let Some(prev) = seen.insert(v.name.as_str(), i) {
            return Err(MilpError::BadName(format!(
                "variable name '{}' used by both #{prev} and #{i}",
                v.name
            )));
        }
    }
    let mut seen = HashMap::new();
    for (i, c) in model.constraints.iter().enumerate() {
        check_name("constraint", &c.name)?;
        if c.name == OBJ_ROW {
            return Err(MilpError::BadName(format!(
                "constraint name '{OBJ_ROW}' is reserved for the objective row"
            )));
        }
        if let Some(prev) = seen.insert(c.name.as_str(), i) {
            return Err(MilpError::BadName(format!(
                "constraint name '{}' used by both #{prev} and #{i}",
                c.name
            )));
        }
    }

    // Column-major view of the constraint matrix.
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.vars.len()];
    for (ri, c) in model.constraints.iter().enumerate() {
        for &(vi, a) in &c.terms {
            cols[vi].push((ri, a));
        }
    }
    let mut obj = vec![0.0; model.vars.len()];
    for &(vi, c) in &model.objective {
        obj[vi] += c;
    }

    let mut s = String::new();
    s.push_str("NAME model\n");
    s.push_str("ROWS\n");
    s.push_str(&format!(" N {OBJ_ROW}\n"));
    for c in &model.constraints {
        let tag = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        s.push_str(&format!(" {tag} {}\n", c.name));
    }

    s.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0usize;
    for (vi, v) in model.vars.iter().enumerate() {
        let want_int = v.kind == VarKind::Binary;
        if want_int != in_int {
            let tag = if want_int { "INTORG" } else { "INTEND" };
            s.push_str(&format!(" MARKER{marker} 'MARKER' '{tag}'\n"));
            marker += 1;
            in_int = want_int;
        }
        if obj[vi] != 0.0 {
            s.push_str(&format!(" {} {OBJ_ROW} {}\n", v.name, num(obj[vi])));
        }
        for &(ri, a) in &cols[vi] {
            s.push_str(&format!(
                " {} {} {}\n",
                v.name,
                model.constraints[ri].name,
                num(a)
            ));
        }
    }
    if in_int {
        s.push_str(&format!(" MARKER{marker} 'MARKER' 'INTEND'\n"));
    }

    s.push_str("RHS\n");
    for c in &model.constraints {
        if c.rhs != 0.0 {
            s.push_str(&format!(" RHS {} {}\n", c.name, num(c.rhs)));
        }
    }

    s.push_str("BOUNDS\n");
    for v in &model.vars {
        if v.kind == VarKind::Binary {
            if v.lower == 0.0 && v.upper == 1.0 {
                s.push_str(&format!(" BV BND {}\n", v.name));
            } else if v.lower == v.upper {
                s.push_str(&format!(" FX BND {} {}\n", v.name, num(v.lower)));
            } else {
                s.push_str(&format!(" LO BND {} {}\n", v.name, num(v.lower)));
                s.push_str(&format!(" UP BND {} {}\n", v.name, num(v.upper)));
            }
            continue;
        }
        let default = v.lower == 0.0 && v.upper == f64::INFINITY;
        if default {
            continue;
        }
        if v.lower == v.upper {
            s.push_str(&format!(" FX BND {} {}\n", v.name, num(v.lower)));
        } else if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            s.push_str(&format!(" FR BND {}\n", v.name));
        } else {
            if v.lower == f64::NEG_INFINITY {
                s.push_str(&format!(" MI BND {}\n", v.name));
            } else if v.lower != 0.0 {
                s.push_str(&format!(" LO BND {} {}\n", v.name, num(v.lower)));
            }
            if v.upper != f64::INFINITY {
                s.push_str(&format!(" UP BND {} {}\n", v.name, num(v.upper)));
            }
        }
    }
    s.push_str("ENDATA\n");
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Name,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

impl Section {
    fn label(self) -> &'static str {
        match self {
            Section::Start => "start",
            Section::Name => "NAME",
            Section::Rows => "ROWS",
            Section::Columns => "COLUMNS",
            Section::Rhs => "RHS",
            Section::Bounds => "BOUNDS",
            Section::End => "ENDATA",
        }
    }
}

struct Parser {
    model: MilpModel,
    obj_row: Option<String>,
    row_index: HashMap<String, usize>,
    var_index: HashMap<String, usize>,
    /// Variables declared inside INTORG/INTEND, with whether BOUNDS touched them.
    int_vars: Vec<usize>,
    bounded: Vec<bool>,
}

fn perr(line: usize, section: Section, message: impl Into<String>) -> MilpError {
    MilpError::MpsParse {
        line,
        section: section.label().to_string(),
        message: message.into(),
    }
}

fn parse_num(tok: &str, line: usize, section: Section) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| perr(line, section, format!("expected a number, found '{tok}'")))
}

/// Parses free-format MPS text into a model.
pub fn read_mps(text: &str) -> Result<MilpModel> {
    let mut section = Section::Start;
    let mut in_int = false;
    let mut p = Parser {
        model: MilpModel::new(),
        obj_row: None,
        row_index: HashMap::new(),
        var_index: HashMap::new(),
        int_vars: Vec::new(),
        bounded: Vec::new(),
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();

        // Section headers sit at column 1; data lines are indented.
        let indented = raw.starts_with(' ') || raw.starts_with('\t');
        match if indented { "" } else { toks[0] } {
            "NAME" => {
                if section != Section::Start {
                    return Err(perr(line, section, "unexpected NAME section"));
                }
                section = Section::Name;
                continue;
            }
            "ROWS" => {
                if section != Section::Name {
                    return Err(perr(line, section, "ROWS must follow NAME"));
                }
                section = Section::Rows;
                continue;
            }
            "COLUMNS" => {
                if section != Section::Rows {
                    return Err(perr(line, section, "COLUMNS must follow ROWS"));
                }
                section = Section::Columns;
                continue;
            }
            "RHS" => {
                if section != Section::Columns {
                    return Err(perr(line, section, "RHS must follow COLUMNS"));
                }
                section = Section::Rhs;
                continue;
            }
            "BOUNDS" => {
                if section != Section::Rhs {
                    return Err(perr(line, section, "BOUNDS must follow RHS"));
                }
                section = Section::Bounds;
                continue;
            }
            "RANGES" => {
                return Err(perr(line, section, "RANGES section is not supported"));
            }
            "OBJSENSE" => {
                return Err(perr(line, section, "OBJSENSE section is not supported"));
            }
            "ENDATA" => {
                section = Section::End;
                break;
            }
            _ => {}
        }

        match section {
            Section::Start => {
                return Err(perr(line, section, "missing NAME"));
            }
            Section::Name => {
                return Err(perr(line, section, format!("unexpected token '{}'", toks[0])));
            }
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(perr(line, section, "expected '<type> <row>'"));
                }
                match toks[0] {
                    "N" => {
                        if p.obj_row.is_some() {
                            return Err(perr(line, section, "multiple objective (N) rows"));
                        }
                        p.obj_row = Some(toks[1].to_string());
                    }
                    t @ ("L" | "G" | "E") => {
                        let sense = match t {
                            "L" => Sense::Le,
                            "G" => Sense::Ge,
                            _ => Sense::Eq,
                        };
                        if p.row_index.contains_key(toks[1]) {
                            return Err(perr(line, section, format!("duplicate row '{}'", toks[1])));
                        }
                        let idx = p.model.add_constraint(toks[1], Vec::new(), sense, 0.0);
                        p.row_index.insert(toks[1].to_string(), idx);
                    }
                    other => {
                        return Err(perr(line, section, format!("unknown row type '{other}'")));
                    }
                }
            }
            Section::Columns => {
                if toks.len() >= 3 && toks[1] == "'MARKER'" {
                    match toks[2] {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" => in_int = false,
                        other => {
                            return Err(perr(line, section, format!("unknown marker '{other}'")));
                        }
                    }
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(perr(
                        line,
                        section,
                        "expected '<col> <row> <value> [<row> <value>]'",
                    ));
                }
                let var = match p.var_index.get(toks[0]) {
                    Some(&v) => v,
                    None => {
                        let idx = p.model.add_var(toks[0], 0.0, f64::INFINITY);
                        if in_int {
                            // Classic MPS default for integer columns: [0, 1].
                            p.model.vars[idx].kind = VarKind::Binary;
                            p.model.vars[idx].upper = 1.0;
                            p.int_vars.push(idx);
                        }
                        p.bounded.push(false);
                        p.var_index.insert(toks[0].to_string(), idx);
                        idx
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let val = parse_num(pair[1], line, section)?;
                    if Some(pair[0]) == p.obj_row.as_deref() {
                        p.model.add_objective_term(var, val);
                    } else {
                        let row = *p.row_index.get(pair[0]).ok_or_else(|| {
                            perr(line, section, format!("unknown row '{}'", pair[0]))
                        })?;
                        p.model.constraints[row].terms.push((var, val));
                    }
                }
            }
            Section::Rhs => {
                // First token is the RHS set name.
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(perr(
                        line,
                        section,
                        "expected '<set> <row> <value> [<row> <value>]'",
                    ));
                }
                for pair in toks[1..].chunks(2) {
                    let val = parse_num(pair[1], line, section)?;
                    if Some(pair[0]) == p.obj_row.as_deref() {
                        // Objective-row RHS (a constant offset) is not supported.
                        return Err(perr(line, section, "objective RHS is not supported"));
                    }
                    let row = *p.row_index.get(pair[0]).ok_or_else(|| {
                        perr(line, section, format!("unknown row '{}'", pair[0]))
                    })?;
                    p.model.constraints[row].rhs = val;
                }
            }
            Section::Bounds => {
                if toks.len() < 3 {
                    return Err(perr(line, section, "expected '<type> <set> <var> [value]'"));
                }
                let var = *p
                    .var_index
                    .get(toks[2])
                    .ok_or_else(|| perr(line, section, format!("unknown column '{}'", toks[2])))?;
                let need_val = matches!(toks[0], "UP" | "LO" | "FX");
                if need_val && toks.len() != 4 {
                    return Err(perr(line, section, "bound type requires a value"));
                }
                let v = &mut p.model.vars[var];
                match toks[0] {
                    "UP" => {
                        let val = parse_num(toks[3], line, section)?;
                        v.upper = val;
                        // Historic quirk: a negative upper bound on a default
                        // [0, inf) column implies a free lower bound.
                        if val < 0.0 && v.lower == 0.0 && !p.bounded[var] {
                            v.lower = f64::NEG_INFINITY;
                        }
                    }
                    "LO" => {
                        let val = parse_num(toks[3], line, section)?;
                        v.lower = val;
                    }
                    "FX" => {
                        let val = parse_num(toks[3], line, section)?;
                        v.lower = val;
                        v.upper = val;
                    }
                    "FR" => {
                        v.lower = f64::NEG_INFINITY;
                        v.upper = f64::INFINITY;
                    }
                    "MI" => {
                        v.lower = f64::NEG_INFINITY;
                    }
                    "PL" => {
                        v.upper = f64::INFINITY;
                    }
                    "BV" => {
                        v.kind = VarKind::Binary;
                        v.lower = 0.0;
                        v.upper = 1.0;
                    }
                    other => {
                        return Err(perr(line, section, format!("unknown bound type '{other}'")));
                    }
                }
                p.bounded[var] = true;
            }
            Section::End => unreachable!(),
        }
    }

    if section == Section::Start {
        return Err(perr(0, Section::Start, "missing NAME"));
    }
    if section != Section::End {
        return Err(perr(
            text.lines().count(),
            section,
            "missing ENDATA terminator",
        ));
    }
    if p.obj_row.is_none() {
        return Err(perr(0, Section::Rows, "no objective (N) row declared"));
    }
    for &vi in &p.int_vars {
        let v = &p.model.vars[vi];
        if v.lower < 0.0 || v.upper > 1.0 {
            return Err(perr(
                0,
                Section::Bounds,
                format!(
                    "integer column '{}' has bounds [{}, {}]; only binaries are supported",
                    v.name, v.lower, v.upper
                ),
            ));
        }
    }
    p.model.validate()?;
    Ok(p.model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> MilpModel {
        let mut m = MilpModel::new();
        let x = m.add_var("x", 0.0, 3.0);
        m.add_objective_term(x, -1.0);
        m.add_constraint("cap", vec![(x, 1.0)], Sense::Le, 3.0);
        m
    }

    #[test]
    fn writes_single_column_and_terminator() {
        let text = write_mps(&tiny()).unwrap();
        assert!(text.starts_with("NAME"));
        assert!(text.trim_end().ends_with("ENDATA"));
        let col_lines: Vec<&str> = text
            .lines()
            .skip_while(|l| !l.starts_with("COLUMNS"))
            .skip(1)
            .take_while(|l| !l.starts_with("RHS"))
            .collect();
        assert_eq!(col_lines.len(), 2); // objective entry + one row entry
    }

    #[test]
    fn binary_gets_marker_pair() {
        let mut m = MilpModel::new();
        let y = m.add_binary("y");
        m.add_objective_term(y, 1.0);
        m.add_constraint("r", vec![(y, 1.0)], Sense::Le, 1.0);
        let text = write_mps(&m).unwrap();
        assert!(text.contains("'INTORG'"));
        assert!(text.contains("'INTEND'"));
        assert!(text.contains(" BV BND y"));
        let intorg = text.find("'INTORG'").unwrap();
        let yentry = text.find(" y OBJ").unwrap();
        let intend = text.find("'INTEND'").unwrap();
        assert!(intorg < yentry && yentry < intend);
    }

    #[test]
    fn missing_endata_is_an_error() {
        let text = write_mps(&tiny()).unwrap();
        let broken = text.replace("ENDATA\n", "");
        match read_mps(&broken) {
            Err(MilpError::MpsParse { message, .. }) => {
                assert!(message.contains("ENDATA"), "message: {message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_input_reports_missing_name() {
        match read_mps("") {
            Err(MilpError::MpsParse { message, .. }) => {
                assert!(message.contains("missing NAME"), "message: {message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn name_collision_is_rejected() {
        let mut m = tiny();
        let x2 = m.add_var("x", 0.0, 1.0);
        m.add_objective_term(x2, 1.0);
        assert!(matches!(write_mps(&m), Err(MilpError::BadName(_))));
    }

    #[test]
    fn whitespace_in_name_is_rejected() {
        let mut m = MilpModel::new();
        let x = m.add_var("bad name", 0.0, 1.0);
        m.add_objective_term(x, 1.0);
        assert!(matches!(write_mps(&m), Err(MilpError::BadName(_))));
    }

    #[test]
    fn roundtrip_preserves_structure() {
        let mut m = MilpModel::new();
        let x = m.add_var("x", -1.5, 4.0);
        let free = m.add_var("f", f64::NEG_INFINITY, f64::INFINITY);
        let y = m.add_binary("y");
        m.add_objective_term(x, 2.0);
        m.add_objective_term(free, -0.5);
        m.add_objective_term(y, 3.0);
        m.add_constraint("c1", vec![(x, 1.0), (free, -2.0)], Sense::Le, 7.5);
        m.add_constraint("c2", vec![(x, 1.0), (y, 5.0)], Sense::Ge, -2.0);
        m.add_constraint("c3", vec![(free, 1.0), (y, 1.0)], Sense::Eq, 0.25);

        let text = write_mps(&m).unwrap();
        let back = read_mps(&text).unwrap();
        assert_eq!(back.num_vars(), m.num_vars());
        assert_eq!(back.num_constraints(), m.num_constraints());
        for (a, b) in m.vars.iter().zip(back.vars.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.lower, b.lower);
            assert_eq!(a.upper, b.upper);
        }
        for (a, b) in m.constraints.iter().zip(back.constraints.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.sense, b.sense);
            assert_eq!(a.rhs, b.rhs);
        }
        // Same matrix, compared densely.
        let dense = |mm: &MilpModel| {
            let mut d = vec![vec![0.0; mm.num_vars()]; mm.num_constraints()];
            for (ri, c) in mm.constraints.iter().enumerate() {
                for &(vi, a) in &c.terms {
                    d[ri][vi] += a;
                }
            }
            d
        };
        assert_eq!(dense(&m), dense(&back));
    }
}
