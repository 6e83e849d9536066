use std::fmt::Write;

use crate::prefs::Bundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Aggregate first choice against the separate choice from X.
    FirstChoice,
    /// Aggregate second choice against the separate choice from Y.
    SecondChoice,
    /// Sum of separate choices against the aggregate total.
    Overall,
    /// Aggregate first choice from one X under two different partners Y.
    FirstChoiceAcrossPartners,
    Warp,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::FirstChoice => "F_A = C(X)",
            Family::SecondChoice => "S_A = C(Y)",
            Family::Overall => "O_S = O_A",
            Family::FirstChoiceAcrossPartners => "F_A independent of Y",
            Family::Warp => "WARP",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: Family,
    /// Indices of the menus or menu pairs involved.
    pub menus: Vec<usize>,
    pub left: Bundle,
    pub right: Bundle,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ViolationReport {
    pub entries: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn count(&self, family: Family) -> usize {
        self.entries.iter().filter(|v| v.family == family).count()
    }

    pub(crate) fn push_if(&mut self, family: Family, menus: Vec<usize>, left: Bundle, right: Bundle, tol: f64) {
        let gap = left.distance(&right);
        if gap > tol {
            self.entries.push(Violation {
                family,
                menus,
                left,
                right,
                gap,
            });
        }
    }

    pub fn to_text(&self) -> String {
        if self.entries.is_empty() {
            return "no violations\n".to_string();
        }
        let mut out = String::new();
        for v in &self.entries {
            let menus: Vec<String> = v.menus.iter().map(|m| m.to_string()).collect();
            writeln!(
                out,
                "{:<22} menus [{}]: {} vs {} (gap {:.4})",
                v.family.label(),
                menus.join(", "),
                v.left,
                v.right,
                v.gap
            )
            .expect("writing to a string");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,menus,left_tasks,left_money,right_tasks,right_money,gap\n");
        for v in &self.entries {
            let menus: Vec<String> = v.menus.iter().map(|m| m.to_string()).collect();
            writeln!(
                out,
                "{},{},{},{:.4},{},{:.4},{:.4}",
                v.family.label(),
                menus.join(";"),
                v.left.tasks,
                v.left.money,
                v.right.tasks,
                v.right.money,
                v.gap
            )
            .expect("writing to a string");
        }
        out
    }
}
