"""Plain-text report assembled from a verified artifact directory."""
from __future__ import annotations

from pathlib import Path

import pandas as pd

from . import artifacts as art
from .pipeline import OUTPUTS


def _bar(n, top, width=40):
    return "#" * (int(round(width * n / top)) if top else 0)


def _section_panel(out):
    s = art.read_csv(out / "panel_summary.csv")
    f = art.read_json(out / "filter_report.json")
    lines = [f"countries: {f['n_countries']}  products: {f['n_products']}  years: {f['years'][0]}-{f['years'][1]}",
             "removed by filter: " + ", ".join(f"{k}={len(v)}" for k, v in sorted(f["removed"].items()))]
    lines.append(f"mean basket size {s['mean_basket'].mean():.1f}, mean option set {s['mean_option_set'].mean():.1f}")
    return lines


def _section_directions(out):
    summ = art.read_json(out / "direction_summary.json")
    if not summ.get("n"):
        return ["no direction vectors (no new products detected)"]
    lines = [
        f"HEADLINE: share of direction vectors with Omega > 0: {100 * summ['share_positive_omega']:.1f}% "
        f"(n = {summ['n']})",
        f"mean Omega {summ['mean_omega']:.3f}, mean Pi {summ['mean_pi']:.3f}, "
        f"pooled slope of Pi on Omega {summ['slope_pooled']:.3f}",
    ]
    h = art.read_csv(out / "direction_histograms.csv")
    for comp, g in h.groupby("component", sort=True):
        lines.append(f"{comp} distribution:")
        top = g["count"].max()
        for r in g.itertuples(index=False):
            lines.append(f"  [{r.bin_lo:7.2f}, {r.bin_hi:7.2f}) {r.count:5d} {_bar(r.count, top)}")
    return lines


def _section_jumps(out):
    rep = art.read_json(out / "jump_report.json")
    lines = [f"new products: {rep['n_events']} (censored survival: {rep['n_censored']}), "
             f"audit violations: {rep['audit_violations']}"]
    if rep.get("reason"):
        lines.append(f"note: {rep['reason']}")
    return lines


def _section_stages(out):
    st = art.read_csv(out / "stages.csv")
    ks = art.read_json(out / "ks_report.json")
    counts = st["stage"].value_counts(dropna=False).sort_index()
    top = counts.max()
    lines = [f"stage cuts on rho: {ks['cuts']}"]
    for stage, n in counts.items():
        label = "undefined" if pd.isna(stage) else f"stage {int(stage)}"
        lines.append(f"  {label:10s} {n:6d} {_bar(n, top)}")
    for comp in ("Omega", "Pi"):
        for pair in ks.get(comp, {}).get("pairs", []):
            lines.append(f"  KS {comp} stages {pair['stages']}: D = {pair['D']:.3f}, p = {pair['p_value']:.3g}")
    return lines


def _section_regress(out):
    lines = (out / "regressions.txt").read_text().rstrip().splitlines()
    cubic = art.read_json(out / "cubic_minimum.json")
    for x, res in sorted(cubic.items()):
        if "argmin" in res:
            where = "interior minimum" if res["interior"] else f"no interior minimum ({res['boundary']} end)"
            lines.append(f"cubic fit of Omega on {x}: {where} at {res['argmin']:.3f}")
        else:
            lines.append(f"cubic fit of Omega on {x}: {res.get('error')}")
    return lines


SECTIONS = (
    ("Panel", "ingest", _section_panel),
    ("New products", "jumps", _section_jumps),
    ("Development directions", "directions", _section_directions),
    ("Stages", "stages", _section_stages),
    ("Regressions", "regress", _section_regress),
)


def render_report(out_dir) -> str:
    """Verify the manifest, then render every section whose stage is present.

    Sections whose stage is absent from the manifest are listed as gaps.
    """
    out = Path(out_dir)
    manifest = art.verify_manifest(out)
    done = manifest["stages"]
    parts, gaps = [], []
    for title, stage, fn in SECTIONS:
        if stage not in done or set(done[stage]) != set(OUTPUTS[stage]):
            gaps.append(f"{title}: stage '{stage}' missing from manifest")
            continue
        parts.append("\n".join([f"== {title} ==", *fn(out)]))
    if gaps:
        parts.append("\n".join(["== Missing sections ==", *gaps]))
    return "\n\n".join(parts) + "\n"
