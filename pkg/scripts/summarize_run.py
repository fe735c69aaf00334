#!/usr/bin/env python3
"""
Print a dashboard of a run or sweep directory
Reads the summary.json written by `main.py run` / `main.py sweep`
"""
import sys
from pathlib import Path
from typing import Any, Dict, List

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from artifacts import ArtifactError, read_json


RULE = "-" * 80


def _pm(stat: Dict[str, Any], scale: float = 1.0, digits: int = 3) -> str:
    return f"{stat['mean'] * scale:.{digits}f} ± {stat['std'] * scale:.{digits}f} (n={stat['n']})"


def _run_section(summary: Dict[str, Any]) -> List[str]:
    agg = summary["aggregate"]
    lines = [
        "📊 ACROSS SEEDS",
        RULE,
        f"  Throughput (Mbit/s):         {_pm(agg['throughput_bps'], 1e-6)}",
        f"  Energy efficiency (Mbit/J):  {_pm(agg['energy_efficiency'], 1e-6)}",
        f"  Switches:                    {_pm(agg['switch_count'], digits=1)}",
        f"  Switches per minute:         {_pm(agg['switches_per_minute'], digits=2)}",
        f"  PU miss rate:                {_pm(agg['md_rate'], digits=4)}",
        f"  Avg coalition FA:            {_pm(agg['avg_coalition_fa'], digits=4)}",
        f"  Dissatisfied SUs (rate):     {_pm(agg['mean_rate_dissatisfied'], digits=2)}",
        f"  Stability breaks:            {_pm(agg['stability_breaks'], digits=1)}",
        "",
        "🎲 PER SEED",
        RULE,
    ]
    for seed, row in summary.get("per_seed", {}).items():
        lines.append(
            f"  seed {seed:>4}: {row['throughput_bps'] / 1e6:8.3f} Mbit/s, "
            f"{row['switch_count']:>4} switches, MD {row['md_rate']:.4f}"
        )
    return lines


def _split_section(summary: Dict[str, Any]) -> List[str]:
    centered = summary["and_argmax"] == summary["center"] == summary["or_argmin"]
    return [
        "📈 FA VERSUS SNR SPLIT",
        RULE,
        f"  Mean SNR:                    {summary['mean_snr']}",
        f"  Coalition MD:                {summary['md_coalition']}",
        f"  AND peak / OR floor / center: {summary['and_argmax']} / {summary['or_argmin']} / {summary['center']}",
        f"  Extremes at equal split:     {'yes' if centered else 'no'}",
        f"  Conditions (MD, threshold):  {summary['md_condition']}, {summary['threshold_condition']}",
    ]


def _points_section(summary: Dict[str, Any]) -> List[str]:
    lines = [f"📈 SWEEP OVER {summary['variable']}", RULE]
    for point, stats in summary["points"].items():
        if "mean" in stats:
            lines.append(f"  {point:<16} switches/min {_pm(stats, digits=2)}")
        else:
            lines.append(
                f"  N={point:<4} T_converge {_pm(stats['t_converge'], digits=1)}, "
                f"switches {_pm(stats['switch_count'], digits=1)}, "
                f"FA computations {_pm(stats['fa_computation_count'], digits=0)}"
            )
    if "all_stable" in summary:
        lines.append(f"  All partitions Nash-stable:  {'✅' if summary['all_stable'] else '❌'}")
    return lines


def render_summary(summary: Dict[str, Any]) -> str:
    """Dashboard text for a summary document"""
    lines = [
        "=" * 80,
        f"coalspec - {summary.get('name', 'experiment')} ({summary.get('command', '?')})",
        "=" * 80,
        "",
    ]
    if "aggregate" in summary:
        lines += _run_section(summary)
    elif summary.get("variable") == "split":
        lines += _split_section(summary)
    else:
        lines += _points_section(summary)
    lines += ["", "=" * 80]
    return "\n".join(lines)


def main() -> int:
    if len(sys.argv) != 2:
        print("Usage: python scripts/summarize_run.py <output_dir or summary.json>")
        return 2
    path = Path(sys.argv[1])
    if path.is_dir():
        path = path / "summary.json"
    try:
        summary = read_json(path)
    except ArtifactError as e:
        print(f"❌ {e}")
        return 1
    print(render_summary(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
