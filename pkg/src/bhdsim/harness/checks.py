"""Reference-claim checks over a set of scenario reports (``bhdsim report --check``)."""

from __future__ import annotations

from dataclasses import dataclass

FIG2_DELTAS = {"fig2a": -10.0, "fig2b": -5.0, "fig2d": 5.0, "fig2e": 10.0}


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    expected: str
    passed: bool

    def __str__(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.4g} (expected {self.expected})"


def check_reports(reports: dict) -> list[CheckResult]:
    out = []
    single = reports.get("fig6_single")
    if single and single["snr_db"] is not None:
        v = single["snr_db"]
        out.append(CheckResult("fig6_single snr_db", v, "12.0 +/- 0.5", abs(v - 12.0) <= 0.5))
    double = reports.get("fig6_double_theta0")
    if single and double and single["snr_db"] is not None and double["snr_db"] is not None:
        v = double["snr_db"] - single["snr_db"]
        out.append(CheckResult("fig6 homodyne - heterodyne snr", v, "6.0 +/- 0.5", abs(v - 6.0) <= 0.5))
    dark = reports.get("fig6_double_theta90")
    if dark and dark["floor_db"] is not None:
        # displayed level at the sideband frequency, tone plus noise
        v = dark["traces"]["double_theta90"]["level_db"] - dark["floor_db"]
        out.append(CheckResult("fig6_double_theta90 level above floor", v, "|x| <= 1.0 dB", abs(v) <= 1.0))
    for name, delta in FIG2_DELTAS.items():
        rep = reports.get(name)
        if not rep or rep.get("envelope_period_lab_s") is None:
            continue
        period = rep["envelope_period_lab_s"]
        target = 1.0 / abs(delta)
        out.append(CheckResult(f"{name} envelope period [s]", period, f"{target:g} +/- 2%", abs(period / target - 1) <= 0.02))
        if rep["floor_db"] is not None:
            v = rep["envelope_min_db"] - rep["floor_db"]
            out.append(CheckResult(f"{name} envelope min above floor", v, "|x| <= 1.0 dB", abs(v) <= 1.0))
        if rep.get("gain_over_single_db") is not None:
            v = rep["gain_over_single_db"]
            out.append(CheckResult(f"{name} envelope max over single", v, "6.0 +/- 0.5", abs(v - 6.0) <= 0.5))
    return out
