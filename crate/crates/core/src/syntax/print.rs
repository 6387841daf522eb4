use std::fmt;

use super::{Formula, Program};

// Binding strength, loosest first.
const IMP: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const UNARY: u8 = 4;

enum View<'a> {
    Bot,
    Top,
    Var(u32),
    Not(&'a Formula),
    And(&'a Formula, &'a Formula),
    Or(&'a Formula, &'a Formula),
    Imp(&'a Formula, &'a Formula),
    Diamond(&'a Program, &'a Formula),
    Box(&'a Program, &'a Formula),
}

fn view(f: &Formula) -> View<'_> {
    match f {
        Formula::Bot => View::Bot,
        Formula::Var(i) => View::Var(*i),
        Formula::Diamond(e, a) => View::Diamond(e, a),
        Formula::Imp(a, b) => {
            if **a == Formula::Bot && **b == Formula::Bot {
                return View::Top;
            }
            if **b == Formula::Bot {
                match &**a {
                    Formula::Imp(x, y) => {
                        if let Some(ny) = y.is_negation() {
                            return View::And(x, ny);
                        }
                    }
                    Formula::Diamond(e, inner) => {
                        if let Some(ni) = inner.is_negation() {
                            return View::Box(e, ni);
                        }
                    }
                    _ => {}
                }
                return View::Not(a);
            }
            if let Some(na) = a.is_negation() {
                return View::Or(na, b);
            }
            View::Imp(a, b)
        }
    }
}

fn level(f: &Formula) -> u8 {
    match view(f) {
        View::Imp(..) => IMP,
        View::Or(..) => OR,
        View::And(..) => AND,
        _ => UNARY,
    }
}

fn write_formula(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = level(f);
    let paren = own < min;
    if paren {
        out.write_str("(")?;
    }
    match view(f) {
        View::Bot => out.write_str("false")?,
        View::Top => out.write_str("true")?,
        View::Var(i) => write!(out, "p{i}")?,
        View::Not(a) => {
            out.write_str("!")?;
            write_formula(a, UNARY, out)?;
        }
        View::Diamond(e, a) => {
            write!(out, "<{e}>")?;
            write_formula(a, UNARY, out)?;
        }
        View::Box(e, a) => {
            write!(out, "[{e}]")?;
            write_formula(a, UNARY, out)?;
        }
        View::And(a, b) => {
            write_formula(a, AND, out)?;
            out.write_str(" & ")?;
            write_formula(b, AND + 1, out)?;
        }
        View::Or(a, b) => {
            write_formula(a, OR, out)?;
            out.write_str(" | ")?;
            write_formula(b, OR + 1, out)?;
        }
        View::Imp(a, b) => {
            write_formula(a, IMP + 1, out)?;
            out.write_str(" -> ")?;
            write_formula(b, IMP, out)?;
        }
    }
    if paren {
        out.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, IMP, f)
    }
}

fn program_level(e: &Program) -> u8 {
    match e {
        Program::Union(..) => 1,
        Program::Comp(..) => 2,
        _ => 3,
    }
}

fn write_program(e: &Program, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = program_level(e) < min;
    if paren {
        out.write_str("(")?;
    }
    match e {
        Program::Atom(a) => out.write_str(a)?,
        Program::Union(a, b) => {
            write_program(a, 1, out)?;
            out.write_str("|")?;
            write_program(b, 2, out)?;
        }
        Program::Comp(a, b) => {
            write_program(a, 2, out)?;
            out.write_str(";")?;
            write_program(b, 3, out)?;
        }
        Program::TransClos(a) => {
            write_program(a, 3, out)?;
            out.write_str("^+")?;
        }
        Program::Converse(a) => {
            write_program(a, 3, out)?;
            out.write_str("^-")?;
        }
    }
    if paren {
        out.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_program(self, 1, f)
    }
}
