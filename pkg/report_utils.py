"""Tabular views of certificates and CLI reports for --format text."""

from typing import Any, Dict, List

import pandas as pd


def checks_table(checks: Dict[str, bool]) -> pd.DataFrame:
    return pd.DataFrame(
        [{"check": name, "passed": bool(passed)} for name, passed in checks.items()],
        columns=["check", "passed"],
    )


def transcript_table(transcript: List[Dict[str, Any]]) -> pd.DataFrame:
    """One row per transcript step; columns are the union of step keys."""
    if not transcript:
        return pd.DataFrame()
    df = pd.DataFrame(transcript)
    return df.map(_cell) if hasattr(df, "map") else df.applymap(_cell)


def jordan_table(partition: List[int]) -> pd.DataFrame:
    """Block sizes with multiplicities, largest first."""
    counts = pd.Series(partition, dtype="int64").value_counts()
    df = counts.rename_axis("block_size").reset_index(name="multiplicity")
    return df.sort_values("block_size", ascending=False).reset_index(drop=True)


def _cell(value):
    if isinstance(value, (list, tuple, dict)):
        return str(value)
    return value


def _scalar_lines(report: Dict[str, Any], indent: str = "") -> List[str]:
    lines = []
    for key, value in report.items():
        if isinstance(value, dict) and key not in ("checks",):
            lines.append(f"{indent}{key}:")
            lines.extend(_scalar_lines(value, indent + "  "))
        elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            continue
        elif key != "checks":
            lines.append(f"{indent}{key}: {value}")
    return lines


def render_text(report: Dict[str, Any]) -> str:
    """Human-readable rendering of a CLI report."""
    lines = _scalar_lines({k: v for k, v in report.items() if k != "manifest"})
    for key, value in report.items():
        if key == "checks" and _is_validation(value):
            lines.append("")
            lines.append(display_validation_results(validation_results(value)))
        elif key == "checks" and isinstance(value, dict):
            lines.append("\nchecks:")
            lines.append(checks_table(value).to_string(index=False))
        elif key == "jordan_type" and isinstance(value, list) and value:
            lines.append("\njordan blocks:")
            lines.append(jordan_table(value).to_string(index=False))
        elif isinstance(value, dict) and isinstance(value.get("checks"), dict):
            lines.append(f"\n{key} checks:")
            lines.append(checks_table(value["checks"]).to_string(index=False))
        elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            lines.append(f"\n{key}:")
            lines.append(transcript_table(value).to_string(index=False))
    manifest = report.get("manifest")
    if manifest:
        lines.append(f"\n[{manifest['command']} | hk {manifest['library_version']} | {manifest['outcome']}]")
    return "\n".join(lines)


def _is_validation(checks) -> bool:
    return isinstance(checks, dict) and bool(checks) and all(
        isinstance(r, dict) and "status" in r for r in checks.values()
    )


def validation_results(checks: Dict[str, Dict[str, Any]]) -> Dict[str, Dict[str, Any]]:
    """GramValidator results back from their JSON form (affected records to DataFrames)."""
    return {
        name: {
            "status": r["status"],
            "message": r["message"],
            "affected_rows": pd.DataFrame(r.get("affected", [])),
        }
        for name, r in checks.items()
    }


def display_validation_results(results: Dict) -> str:
    """Render GramValidator results: one status line per check plus affected entries."""
    lines = ["=" * 60, "GRAM VALIDATION RESULTS", "=" * 60]
    for check, result in results.items():
        status_symbol = "OK " if result["status"] == "Success" else "ERR"
        lines.append(f"{status_symbol} {check.upper()}: {result['message']}")
        affected = result.get("affected_rows")
        if affected is not None and not affected.empty:
            lines.append("Affected entries:")
            lines.append(affected.to_string(index=False))
    return "\n".join(lines)
