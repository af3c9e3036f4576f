import hashlib
import logging
from typing import Sequence

import numpy as np

from app.config import Config
from app.error import (
    ExpressionSyntaxError,
    ManifoldConfigError,
    SingularMetric,
    UnknownSymbol,
)
from app.expression.schema import Constant, Expr
from app.expression.services import (
    RESERVED_NAMES,
    eval_coefficients,
    evaluate_float,
    parse_expression,
    split_expression_list,
)
from app.jet.algebra import JetAlgebra
from app.manifold.reader import ConfigEntry, ConfigSection, read_sections
from app.manifold.schema import Domain, ManifoldSpec, SolitonSpec, StructureSpec

logger = logging.getLogger(__name__)

ZERO = Constant(0.0)


def spec_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ManifoldService:
    # loading

    def load_manifold(self, text: str) -> ManifoldSpec:
        sections = read_sections(text)
        if "manifold" not in sections:
            raise ManifoldConfigError("line 1: config has no [manifold] section")
        dim, coords = self._read_chart(sections["manifold"])
        params = self._read_params(sections.get("params"), coords)
        domain = self._read_domain(sections.get("domain"), coords, params, sections["manifold"].line)
        metric = self._read_metric(sections.get("metric"), coords, params, sections["manifold"].line)

        structure = None
        if "structure" in sections:
            structure = self._read_structure(sections["structure"], coords, params)
        soliton = None
        if "soliton" in sections:
            soliton = self._read_soliton(sections["soliton"], coords, params)

        spec = ManifoldSpec(
            dim=dim,
            coords=coords,
            params=params,
            domain=domain,
            metric=metric,
            structure=structure,
            soliton=soliton,
            digest=spec_digest(text),
        )
        logger.info(
            f"Loaded manifold spec: dim={dim}, coords={','.join(coords)}, "
            f"structure={'yes' if structure else 'no'}, "
            f"soliton={soliton.kind if soliton else 'no'}"
        )
        return spec

    def _read_chart(self, section: ConfigSection) -> tuple[int, tuple[str, ...]]:
        dim_entry = section.require("dim")
        try:
            dim = int(dim_entry.value)
        except ValueError:
            raise ManifoldConfigError(f"line {dim_entry.line}: dim must be an integer, got {dim_entry.value!r}")
        if dim < 1:
            raise ManifoldConfigError(f"line {dim_entry.line}: dim must be positive")

        coords_entry = section.require("coords")
        coords = tuple(name.strip() for name in coords_entry.value.split(","))
        if len(coords) != dim:
            raise ManifoldConfigError(
                f"line {coords_entry.line}: {len(coords)} coordinates declared for dim {dim}"
            )
        for name in coords:
            if not name.isidentifier():
                raise ManifoldConfigError(f"line {coords_entry.line}: invalid coordinate name {name!r}")
            if name in RESERVED_NAMES:
                raise ManifoldConfigError(
                    f"line {coords_entry.line}: coordinate {name!r} shadows a built-in name"
                )
        if len(set(coords)) != dim:
            raise ManifoldConfigError(f"line {coords_entry.line}: duplicate coordinate names")
        extra = set(section.entries) - {"dim", "coords"}
        if extra:
            entry = section.entries[sorted(extra)[0]]
            raise ManifoldConfigError(f"line {entry.line}: unknown key '{entry.key}' in [manifold]")
        return dim, coords

    def _read_params(self, section: ConfigSection | None, coords) -> dict[str, float]:
        params: dict[str, float] = {}
        if section is None:
            return params
        for entry in section.entries.values():
            if entry.key in RESERVED_NAMES or entry.key in coords:
                raise ManifoldConfigError(
                    f"line {entry.line}: parameter {entry.key!r} shadows a coordinate or built-in name"
                )
            params[entry.key] = self._constant(entry, entry.value, params)
        return params

    def _read_domain(self, section, coords, params, fallback_line) -> Domain:
        if section is None:
            raise ManifoldConfigError(f"line {fallback_line}: config has no [domain] section")
        bounds = []
        for name in coords:
            entry = section.require(name)
            lo_src, sep, hi_src = entry.value.partition("..")
            if not sep:
                raise ManifoldConfigError(f"line {entry.line}: interval must read 'lo..hi', got {entry.value!r}")
            bounds.append((self._constant(entry, lo_src, params), self._constant(entry, hi_src, params)))
        extra = set(section.entries) - set(coords)
        if extra:
            entry = section.entries[sorted(extra)[0]]
            raise ManifoldConfigError(f"line {entry.line}: '{entry.key}' is not a coordinate")
        return Domain(bounds=tuple(bounds))

    def _read_metric(self, section, coords, params, fallback_line) -> tuple[tuple[Expr, ...], ...]:
        if section is None:
            raise ManifoldConfigError(f"line {fallback_line}: config has no [metric] section")
        dim = len(coords)
        given: dict[tuple[int, int], tuple[Expr, ConfigEntry]] = {}
        for entry in section.entries.values():
            i, j = self._indices(entry, "g", 2, dim)
            given[(i, j)] = (self._expr(entry, entry.value, coords, params), entry)

        metric = [[ZERO] * dim for _ in range(dim)]
        for (i, j), (e, entry) in given.items():
            mirror = given.get((j, i))
            if mirror is not None and mirror[0] != e:
                raise ManifoldConfigError(
                    f"line {entry.line}: g_{i + 1}_{j + 1} and g_{j + 1}_{i + 1} "
                    f"(line {mirror[1].line}) differ"
                )
            metric[i][j] = e
            metric[j][i] = e
        for i in range(dim):
            if (i, i) not in given:
                raise ManifoldConfigError(f"line {section.line}: diagonal entry g_{i + 1}_{i + 1} missing")
        return tuple(tuple(row) for row in metric)

    def _read_structure(self, section, coords, params) -> StructureSpec:
        dim = len(coords)
        if dim % 2 == 0 or dim < 3:
            raise ManifoldConfigError(
                f"line {section.line}: an almost contact structure needs odd dim >= 3, got {dim}"
            )
        xi = self._expr_list(section.require("xi"), coords, params)
        eta = self._expr_list(section.require("eta"), coords, params)
        phi = [[ZERO] * dim for _ in range(dim)]
        for entry in section.entries.values():
            if entry.key in ("xi", "eta"):
                continue
            i, j = self._indices(entry, "phi", 2, dim)
            phi[i][j] = self._expr(entry, entry.value, coords, params)
        return StructureSpec(phi=tuple(tuple(row) for row in phi), xi=xi, eta=eta)

    def _read_soliton(self, section, coords, params) -> SolitonSpec:
        v_entry, f_entry = section.get("V"), section.get("f")
        if (v_entry is None) == (f_entry is None):
            raise ManifoldConfigError(f"line {section.line}: [soliton] needs exactly one of 'V' or 'f'")
        lam = None
        lam_entry = section.get("lambda")
        if lam_entry is not None and lam_entry.value != "unknown":
            lam = self._expr(lam_entry, lam_entry.value, coords, params)
        extra = set(section.entries) - {"V", "f", "lambda"}
        if extra:
            entry = section.entries[sorted(extra)[0]]
            raise ManifoldConfigError(f"line {entry.line}: unknown key '{entry.key}' in [soliton]")
        if v_entry is not None:
            return SolitonSpec(kind="vector_field", V=self._expr_list(v_entry, coords, params), lam=lam)
        return SolitonSpec(kind="gradient", f=self._expr(f_entry, f_entry.value, coords, params), lam=lam)

    @staticmethod
    def _indices(entry: ConfigEntry, prefix: str, count: int, dim: int) -> tuple[int, ...]:
        parts = entry.key.split("_")
        if parts[0] != prefix or len(parts) != count + 1 or not all(p.isdigit() for p in parts[1:]):
            raise ManifoldConfigError(
                f"line {entry.line}: expected a key of the form {prefix}" + "_i" * count + f", got '{entry.key}'"
            )
        indices = tuple(int(p) - 1 for p in parts[1:])
        if not all(0 <= k < dim for k in indices):
            raise ManifoldConfigError(f"line {entry.line}: index out of range 1..{dim} in '{entry.key}'")
        return indices

    @staticmethod
    def _expr(entry: ConfigEntry, src: str, coords, params) -> Expr:
        try:
            return parse_expression(src, coords, params)
        except (ExpressionSyntaxError, UnknownSymbol) as exc:
            raise type(exc)(f"line {entry.line}, '{entry.key}': {exc}") from exc

    def _expr_list(self, entry: ConfigEntry, coords, params) -> tuple[Expr, ...]:
        pieces = split_expression_list(entry.value)
        if len(pieces) != len(coords):
            raise ManifoldConfigError(
                f"line {entry.line}: '{entry.key}' has {len(pieces)} components, expected {len(coords)}"
            )
        return tuple(self._expr(entry, piece, coords, params) for piece in pieces)

    def _constant(self, entry: ConfigEntry, src: str, params) -> float:
        e = self._expr(entry, src.strip(), (), params)
        return float(evaluate_float(e, (), params))

    # evaluation

    @staticmethod
    def chart_seeds(point: Sequence[float], order: int) -> tuple[JetAlgebra, list[np.ndarray]]:
        """Jet algebra of the chart and the coordinate jets at ``point``."""
        algebra = JetAlgebra.get(len(point), order)
        return algebra, [algebra.variable(float(v), i) for i, v in enumerate(point)]

    def scalar_field_at(self, spec: ManifoldSpec, e: Expr, point, order: int) -> np.ndarray:
        algebra, seeds = self.chart_seeds(point, order)
        return eval_coefficients(e, algebra, seeds, spec.params, point)

    def vector_field_at(self, spec: ManifoldSpec, exprs: Sequence[Expr], point, order: int) -> np.ndarray:
        algebra, seeds = self.chart_seeds(point, order)
        return np.stack([eval_coefficients(e, algebra, seeds, spec.params, point) for e in exprs])

    # Covectors and vectors share a component layout; only the index position differs.
    covector_field_at = vector_field_at

    def endomorphism_at(self, spec: ManifoldSpec, rows, point, order: int) -> np.ndarray:
        algebra, seeds = self.chart_seeds(point, order)
        return np.stack(
            [
                np.stack([eval_coefficients(e, algebra, seeds, spec.params, point) for e in row])
                for row in rows
            ]
        )

    def metric_at(self, spec: ManifoldSpec, point, order: int) -> np.ndarray:
        """Jet-valued metric ``g[i, j, :]``; the upper triangle is evaluated and mirrored."""
        algebra, seeds = self.chart_seeds(point, order)
        g = np.zeros((spec.dim, spec.dim, algebra.size))
        for i in range(spec.dim):
            for j in range(i, spec.dim):
                g[i, j] = eval_coefficients(spec.metric[i][j], algebra, seeds, spec.params, point)
                g[j, i] = g[i, j]
        return g

    def metric_value(self, spec: ManifoldSpec, point) -> np.ndarray:
        """Plain float metric, the finite-difference oracle's view of the same expressions."""
        return np.array(
            [[evaluate_float(e, point, spec.params) for e in row] for row in spec.metric]
        )

    def inverse_metric_at(self, g: np.ndarray, algebra: JetAlgebra, point=None) -> np.ndarray:
        det = float(np.linalg.det(algebra.value(g)))
        if abs(det) <= Config.DETERMINANT_EPS:
            where = f" at point {tuple(float(v) for v in point)}" if point is not None else ""
            raise SingularMetric(f"metric determinant {det:.3e}{where} is below {Config.DETERMINANT_EPS}")
        return algebra.inverse_matrix(g)

    # sampling

    def sample_points(self, domain: Domain, count: int, seed: int) -> np.ndarray:
        """``count`` uniform points in the domain box, each interval shrunk by 1% at both ends.

        Uses numpy's PCG64 generator, whose stream is stable for a given seed.
        """
        if count < 0:
            raise ValueError(f"point count must be non-negative, got {count}")
        lo = np.array([b[0] for b in domain.bounds], dtype=float)
        hi = np.array([b[1] for b in domain.bounds], dtype=float)
        if np.any(hi < lo):
            k = int(np.argmax(hi < lo))
            raise ManifoldConfigError(f"empty interval {lo[k]}..{hi[k]} for coordinate {k + 1}")
        margin = 0.01 * (hi - lo)
        rng = np.random.default_rng(seed)
        points = rng.uniform(lo + margin, hi - margin, size=(count, domain.dim))
        logger.info(f"Sampled {count} points with seed {seed}")
        return points
