use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::OutputError;
use crate::io::write_file;
use crate::scenario::{CaseId, ScenarioId};

fn relative_to(path: &Path, base: &Path) -> PathBuf {
    path.strip_prefix(base).map(Path::to_path_buf).unwrap_or_else(|_| path.to_path_buf())
}

/// Writes a matplotlib script that overlays frequency against time, one
/// figure per scenario and one line per case. Trace paths inside the
/// script are relative to the script's directory. Missing traces are left
/// out and listed in a comment.
pub fn emit_plot_script(traces: &[(ScenarioId, CaseId, PathBuf)], out: &Path) -> Result<(), OutputError> {
    if traces.is_empty() {
        return Err(OutputError::new(
            out,
            std::io::Error::new(std::io::ErrorKind::InvalidInput, "no traces to plot"),
        ));
    }
    let base = out.parent().unwrap_or(Path::new(""));
    let mut by_scenario: BTreeMap<ScenarioId, Vec<(CaseId, String)>> = BTreeMap::new();
    let mut missing = Vec::new();
    for (scenario, case, path) in traces {
        if path.exists() {
            let rel = relative_to(path, base).display().to_string().replace('\\', "/");
            by_scenario.entry(*scenario).or_default().push((*case, rel));
        } else {
            missing.push(path.display().to_string());
        }
    }

    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str("\"\"\"Frequency overlays of the simulated scenarios.\"\"\"\n");
    for m in &missing {
        let _ = writeln!(s, "# missing trace, series omitted: {m}");
    }
    s.push_str("import csv\nimport os\n\nimport matplotlib\n\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n");
    s.push_str("HERE = os.path.dirname(os.path.abspath(__file__))\n\n");
    s.push_str("FIGURES = [\n");
    for (scenario, series) in &by_scenario {
        let _ = writeln!(s, "    (\"{}\", \"{}\", [", scenario.as_str(), scenario.title());
        for (case, rel) in series {
            let _ = writeln!(s, "        (\"{}\", \"{}\"),", case.title(), rel);
        }
        s.push_str("    ]),\n");
    }
    s.push_str("]\n\n");
    s.push_str(
        "\
def load(rel):
    t, f = [], []
    with open(os.path.join(HERE, rel), newline=\"\") as fh:
        for row in csv.DictReader(fh):
            t.append(float(row[\"t_s\"]))
            f.append(float(row[\"f_hz\"]))
    return t, f


def main():
    for name, title, series in FIGURES:
        fig, ax = plt.subplots(figsize=(10, 4))
        for label, rel in series:
            t, f = load(rel)
            ax.plot(t, f, label=label, linewidth=0.8)
        ax.set_title(title)
        ax.set_xlabel(\"time (s)\")
        ax.set_ylabel(\"frequency (Hz)\")
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(os.path.join(HERE, name + \"_frequency.png\"), dpi=120)
        plt.close(fig)


if __name__ == \"__main__\":
    main()
",
    );
    write_file(out, s.as_bytes())
}
