"""Comparing methods over datasets by average rank.

Uses the framework score matrix shipped with the tests: five methods over
seven datasets.  Writes ``report.json`` and ``cd.svg`` to a temporary folder.

Run with ``python demos/03_rank_comparison.py``.
"""

import tempfile
from pathlib import Path

from eager.evaluation import cd_diagram, rank_report, read_score_csv

scores = Path(__file__).resolve().parent.parent / "tests" / "data" / "framework_fm.csv"
methods, datasets, S = read_score_csv(scores)
report = rank_report(S, methods, datasets, alpha=0.05)

for m, r in sorted(zip(methods, report.avg_ranks), key=lambda x: x[1]):
    print(f"{m:>17}  {r:.3f}")
print(f"Friedman chi2 = {report.friedman_chi2:.3f}, p = {report.friedman_p:.4f}")
print(f"Iman-Davenport F = {report.iman_davenport_f:.3f}, p = {report.iman_davenport_p:.4f}")
print(f"critical distance = {report.cd:.3f}")

# Groups are maximal sets of methods whose ranks all lie within one CD.
for g in report.groups:
    print("  not significantly different:", ", ".join(g))

best = methods[min(range(len(methods)), key=lambda i: report.avg_ranks[i])]
print(f"significantly worse than {best}:", [m for m in methods if m != best and report.significantly_different(m, best)])

out = Path(tempfile.mkdtemp(prefix="eager-rank-"))
report.to_json(out / "report.json")
cd_diagram(report.avg_ranks, methods, report.cd, out / "cd.svg")
print("wrote", out / "report.json", "and", out / "cd.svg")
