import json
import logging
import math
from pathlib import Path
from typing import Any, Sequence

from app import __version__
from app.config import Config
from app.error import ReportWriteError, UnknownCheck
from app.manifold.schema import ManifoldSpec
from app.soliton.services import SolitonService
from app.verify.checks import CHECKS, CHECKS_BY_NAME, Check, PointAnalysis, RunAnalysis, missing_need
from app.verify.fixtures import fixture_text
from app.verify.schema import CheckRecord, CheckReport, SkippedCheck

logger = logging.getLogger(__name__)


def _format_float(value: float) -> str:
    if not math.isfinite(value):
        return "null"
    return format(value, ".17g")


def encode_json(value: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with sorted keys, 17 significant digits and null for non-finite floats."""
    pad = " " * (indent * (_level + 1))
    close = " " * (indent * _level)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(key))}: {encode_json(value[key], indent, _level + 1)}"
            for key in sorted(value)
        ]
        return "{\n" + ",\n".join(items) + f"\n{close}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}{encode_json(item, indent, _level + 1)}" for item in value]
        return "[\n" + ",\n".join(items) + f"\n{close}]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _format_float(value)
    return json.dumps(str(value))


class VerifyService:
    def __init__(self, soliton_services: SolitonService | None = None):
        self.soliton_services = soliton_services or SolitonService()
        self.manifold_services = self.soliton_services.manifold_services
        self.curvature_services = self.soliton_services.curvature_services

    def select_checks(
        self, spec: ManifoldSpec, order: int, names: Sequence[str] | None = None
    ) -> tuple[list[Check], list[SkippedCheck]]:
        if names:
            unknown = [name for name in names if name not in CHECKS_BY_NAME]
            if unknown:
                raise UnknownCheck(
                    f"unknown check(s) {', '.join(unknown)}; available: {', '.join(CHECKS_BY_NAME)}"
                )
            wanted = set(names)
            candidates = [check for check in CHECKS if check.name in wanted]
        else:
            candidates = list(CHECKS)

        selected, skipped = [], []
        for check in candidates:
            reason = missing_need(check, spec, order)
            if reason is None:
                selected.append(check)
            else:
                logger.warning(f"Skipping check {check.name}: {reason}")
                skipped.append(SkippedCheck(name=check.name, reason=reason))
        return selected, skipped

    def _evaluate(self, check: Check, run: RunAnalysis) -> CheckRecord:
        value = None
        if check.point is not None:
            residual = max(check.point(p) for p in run.points)
            asserted = check.point_hypothesis is None or all(check.point_hypothesis(p) for p in run.points)
        else:
            residual, value = check.run(run)
            asserted = check.run_hypothesis is None or check.run_hypothesis(run)
        asserted = asserted and not check.informational
        if not asserted and check.hypothesis_text:
            logger.warning(f"Check {check.name} reported, not asserted: hypothesis '{check.hypothesis_text}' fails")

        tolerance = check.tolerance_value(run.tol)
        record = CheckRecord(
            name=check.name,
            tag=check.tag,
            title=check.title,
            points=len(run.points),
            max_residual=float(residual),
            tolerance=tolerance,
            passed=bool(residual <= tolerance),
            asserted=asserted,
            hypothesis=check.hypothesis_text or None,
            value=value,
        )
        logger.debug(f"{check.name}: max {record.max_residual:.3e} tol {tolerance:.1e} pass={record.passed}")
        return record

    def run(
        self,
        text: str,
        points: int | None = None,
        seed: int | None = None,
        tol: float | None = None,
        order: int | None = None,
        checks: Sequence[str] | None = None,
    ) -> CheckReport:
        points = Config.DEFAULT_POINTS if points is None else points
        seed = Config.DEFAULT_SEED if seed is None else seed
        tol = Config.DEFAULT_TOL if tol is None else tol
        order = Config.DEFAULT_ORDER if order is None else order

        spec = self.manifold_services.load_manifold(text)
        selected, skipped = self.select_checks(spec, order, checks)
        sample = self.manifold_services.sample_points(spec.domain, points, seed)

        records: list[CheckRecord] = []
        classification = None
        if len(sample):
            geometries = [self.curvature_services.point_geometry(spec, p, order) for p in sample]
            analyses = [PointAnalysis(self.soliton_services, spec, geo, tol) for geo in geometries]
            run = RunAnalysis(self.soliton_services, spec, analyses, seed, tol)
            records = [self._evaluate(check, run) for check in selected]
            classification = self.soliton_services.classify(spec, geometries, tol, seed)
        else:
            skipped.extend(SkippedCheck(name=check.name, reason="no sample points") for check in selected)

        if not records:
            verdict = "no-checks"
        elif all(record.passed for record in records if record.asserted):
            verdict = "pass"
        else:
            verdict = "fail"

        report = CheckReport(
            version=__version__,
            digest=spec.digest,
            seed=seed,
            points=len(sample),
            tol=tol,
            order=order,
            checks=records,
            skipped=skipped,
            classification=classification,
            verdict=verdict,
        )
        logger.info(f"Verification finished: {len(records)} checks, verdict {verdict}")
        return report

    def run_example(self, name: str, **options) -> CheckReport:
        return self.run(fixture_text(name), **options)

    @staticmethod
    def encode_report(report: CheckReport) -> bytes:
        return (encode_json(report.model_dump(by_alias=True)) + "\n").encode("utf-8")

    def emit_report(self, report: CheckReport, path: str | Path) -> int:
        data = self.encode_report(report)
        try:
            Path(path).write_bytes(data)
        except OSError as exc:
            raise ReportWriteError(f"cannot write report to {path}: {exc}")
        logger.info(f"Report written to {path} ({len(data)} bytes)")
        return len(data)

    @staticmethod
    def summary_lines(report: CheckReport) -> list[str]:
        lines = []
        for record in report.checks:
            if not record.asserted:
                status = "INFO"
            else:
                status = "PASS" if record.passed else "FAIL"
            line = f"{record.tag} {record.title}: max {record.max_residual:.1e} {status}"
            if record.value is not None:
                line += f" (value {record.value:.10g})"
            lines.append(line)
        lines.extend(f"SKIP {skip.name}: {skip.reason}" for skip in report.skipped)
        if report.classification is not None:
            lines.append(f"classification: {report.classification.label}")
        lines.append(f"verdict: {report.verdict}")
        return lines
