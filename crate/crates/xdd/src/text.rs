//! Stable text and DOT renderings of diagrams, for reports and golden tests.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::store::{XddHandle, XddNode, XddStore};

impl XddStore {
    /// One-line form: `event[gen](lo, hi)` with plain leaves. Byte-stable for
    /// a given diagram.
    pub fn compact(&self, f: XddHandle) -> String {
        match self.node(f) {
            XddNode::Leaf(k) => k.to_string(),
            XddNode::Branch { event, lo, hi } => format!(
                "{}({}, {})",
                self.event_name(event),
                self.compact(lo),
                self.compact(hi)
            ),
        }
    }

    /// Indented multi-line form with labelled branches.
    pub fn text(&self, f: XddHandle) -> String {
        let mut out = String::new();
        self.text_rec(f, 0, None, &mut out);
        out
    }

    fn text_rec(&self, f: XddHandle, depth: usize, branch: Option<&str>, out: &mut String) {
        for _ in 0..depth {
            out.push_str("  ");
        }
        if let Some(b) = branch {
            out.push_str(b);
            out.push_str(": ");
        }
        match self.node(f) {
            XddNode::Leaf(k) => {
                let _ = writeln!(out, "{k}");
            }
            XddNode::Branch { event, lo, hi } => {
                let _ = writeln!(out, "{}", self.event_name(event));
                self.text_rec(lo, depth + 1, Some("lo"), out);
                self.text_rec(hi, depth + 1, Some("hi"), out);
            }
        }
    }

    /// GraphViz rendering; dashed edges are the event-absent branch.
    pub fn dot(&self, f: XddHandle, name: &str) -> String {
        let mut out = format!("digraph \"{name}\" {{\n");
        out.push_str("  rankdir=TB;\n");
        let mut ids: HashMap<XddHandle, usize> = HashMap::new();
        let mut order: Vec<XddHandle> = Vec::new();
        let mut stack = vec![f];
        while let Some(h) = stack.pop() {
            if ids.contains_key(&h) {
                continue;
            }
            ids.insert(h, order.len());
            order.push(h);
            if let XddNode::Branch { lo, hi, .. } = self.node(h) {
                stack.push(hi);
                stack.push(lo);
            }
        }
        for &h in &order {
            let id = ids[&h];
            match self.node(h) {
                XddNode::Leaf(k) => {
                    let _ = writeln!(out, "  n{id} [shape=box, label=\"{k}\"];");
                }
                XddNode::Branch { event, .. } => {
                    let _ = writeln!(
                        out,
                        "  n{id} [shape=circle, label=\"{}\"];",
                        self.event_name(event)
                    );
                }
            }
        }
        for &h in &order {
            if let XddNode::Branch { lo, hi, .. } = self.node(h) {
                let id = ids[&h];
                let _ = writeln!(out, "  n{id} -> n{} [style=dashed];", ids[&lo]);
                let _ = writeln!(out, "  n{id} -> n{};", ids[&hi]);
            }
        }
        out.push_str("}\n");
        out
    }
}
