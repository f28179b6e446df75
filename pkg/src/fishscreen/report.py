"""Evaluation reports as JSON documents and Markdown."""
from __future__ import annotations

from pathlib import Path

from . import __version__
from .io import dump_json
from .plotting import MODE_TITLES, plot_confusion, plot_mode_metrics


def provenance(command: str, config: dict) -> dict:
    return {"tool": "fishscreen", "version": __version__, "command": command,
            "seed": config.get("seed"), "config": config}


def mode_entry(result) -> dict:
    d = result.report.to_dict()
    d.update({
        "n_test": result.report.n,
        "n_features": len(result.feature_names),
        "features": list(result.feature_names),
        "undefined": result.report.undefined(),
        "test_ids": list(result.test_ids),
    })
    if result.extra.get("selections"):
        d["selections"] = result.extra["selections"]
    return d


def build_report(results: dict, prov: dict) -> dict:
    return {"provenance": prov, "modes": {str(m): mode_entry(r) for m, r in sorted(results.items())}}


def _fmt(v) -> str:
    return "undefined" if v is None else f"{v:.4f}"


def render_markdown(report: dict) -> str:
    prov = report.get("provenance", {})
    lines = ["# Screening report", ""]
    lines.append(f"- seed: `{prov.get('seed')}`")
    for k, v in sorted((prov.get("config") or {}).items()):
        if k != "seed":
            lines.append(f"- {k}: `{v}`")
    lines.append("")
    modes = report["modes"]
    lines += ["## Metrics", "",
              "| metric | " + " | ".join(f"mode {m}" for m in modes) + " |",
              "|---|" + "---|" * len(modes)]
    for name in ("accuracy", "sensitivity", "specificity", "precision", "f1"):
        lines.append(f"| {name} | " + " | ".join(_fmt(modes[m].get(name)) for m in modes) + " |")
    lines.append("| features | " + " | ".join(str(modes[m]["n_features"]) for m in modes) + " |")
    lines.append("")
    for m, d in modes.items():
        lines += [f"## Mode {m} ({MODE_TITLES.get(int(m), '')})", "",
                  "| | predicted ADHD | predicted Control |", "|---|---|---|",
                  f"| true ADHD | {d['tp']} | {d['fn']} |",
                  f"| true Control | {d['fp']} | {d['tn']} |", "",
                  "Features: " + ", ".join(f"`{f}`" for f in d["features"]), ""]
        if d.get("undefined"):
            lines += ["Undefined metrics (zero denominator): " + ", ".join(d["undefined"]), ""]
        if d.get("figure"):
            lines += [f"![confusion matrix, mode {m}]({d['figure']})", ""]
    return "\n".join(lines)


def write_report(report: dict, out_dir, stem: str = "report", figures: bool = True) -> list:
    """Write JSON, Markdown and (optionally) PNG figures; return written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if figures:
        for m, d in report["modes"].items():
            name = f"{stem}_confusion_mode{m}.png"
            plot_confusion(d, out_dir / name, f"mode {m} ({MODE_TITLES.get(int(m), '')})",
                           report.get("provenance"))
            d["figure"] = name
            written.append(out_dir / name)
        plot_mode_metrics(report["modes"], out_dir / f"{stem}_metrics.png", report.get("provenance"))
        written.append(out_dir / f"{stem}_metrics.png")
    dump_json(report, out_dir / f"{stem}.json")
    (out_dir / f"{stem}.md").write_text(render_markdown(report) + "\n")
    return [out_dir / f"{stem}.json", out_dir / f"{stem}.md"] + written
