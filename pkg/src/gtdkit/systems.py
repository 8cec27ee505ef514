"""Thermodynamic systems: built-in black holes and a JSON file format.

A system bundles a potential expression with an ordered variable list,
numeric parameters, optional declared weights and per-variable sampling
intervals.  Systems are immutable after construction; the expression
and all first/second derivative tapes are compiled eagerly so repeated
point evaluations stay cheap.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np

from . import expr as ex
from .errors import LoadError, ValidationError
from .homogeneity import WeightAssignment
from .kernel import run_program, run_program_many
from .kernel.program import Program, compile_expression

DEFAULT_DOMAIN = (0.0, math.inf)
_SAMPLING_BOX = (0.5, 2.0)
DECLARED_WEIGHTS_TOL = 1e-10
_VALIDATION_SEED = 1729
_VALIDATION_POINTS = 20


@dataclass(frozen=True)
class _CompiledSystem:
    value: Program
    grads: Tuple[Program, ...]
    hess: Tuple[Tuple[Program, ...], ...]
    grad_exprs: Tuple[ex.Expression, ...]


@dataclass(frozen=True)
class ThermoSystem:
    """A named potential with ordered variables and fixed parameters."""

    name: str
    variables: Tuple[str, ...]
    parameters: Dict[str, float]
    expression: ex.Expression
    declared_weights: Optional[WeightAssignment]
    domain_hint: Dict[str, Tuple[float, float]]
    potential_symbol: str = field(default="Phi", compare=False)
    intensive_names: Dict[str, str] = field(default_factory=dict, compare=False)
    compiled: _CompiledSystem = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        value = compile_expression(self.expression, self.variables, self.parameters)
        grad_exprs = tuple(ex.differentiate(self.expression, v) for v in self.variables)
        grads = tuple(
            compile_expression(g, self.variables, self.parameters) for g in grad_exprs
        )
        hess = tuple(
            tuple(
                compile_expression(
                    ex.differentiate(g, v), self.variables, self.parameters
                )
                for v in self.variables
            )
            for g in grad_exprs
        )
        object.__setattr__(
            self, "compiled", _CompiledSystem(value, grads, hess, grad_exprs)
        )

    # -- point plumbing ----------------------------------------------------

    def point_array(self, pt: Mapping[str, float]) -> np.ndarray:
        """Ordered value vector; the point must bind exactly the variables."""
        if set(pt.keys()) != set(self.variables):
            raise ValidationError(
                f"point must bind exactly {self.variables}, got {tuple(pt.keys())}"
            )
        arr = np.array([float(pt[v]) for v in self.variables], dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"point values must be finite, got {dict(pt)}")
        return arr

    def intensive_name(self, var: str) -> str:
        return self.intensive_names.get(var, f"I_{var}")

    def sampling_box(self, var: str) -> Tuple[float, float]:
        lo, hi = self.domain_hint.get(var, DEFAULT_DOMAIN)
        blo, bhi = max(lo, _SAMPLING_BOX[0]), min(hi, _SAMPLING_BOX[1])
        if blo < bhi:
            return blo, bhi
        if math.isfinite(lo) and math.isfinite(hi):
            width = hi - lo
            return lo + 0.05 * width, hi - 0.05 * width
        if math.isfinite(lo):
            return lo + 0.5, lo + 2.0
        return hi - 2.0, hi - 0.5

    # -- evaluation --------------------------------------------------------

    def evaluate(self, pt: Mapping[str, float]) -> float:
        return self.evaluate_array(self.point_array(pt))

    def gradient(self, pt: Mapping[str, float]) -> np.ndarray:
        return self.gradient_array(self.point_array(pt))

    def hessian(self, pt: Mapping[str, float]) -> np.ndarray:
        return self.hessian_array(self.point_array(pt))

    def evaluate_array(self, arr: np.ndarray) -> float:
        return run_program(self.compiled.value, arr)

    def evaluate_many(self, pts: np.ndarray):
        return run_program_many(self.compiled.value, pts)

    def gradient_array(self, arr: np.ndarray) -> np.ndarray:
        return np.array(
            [run_program(p, arr) for p in self.compiled.grads], dtype=np.float64
        )

    def hessian_array(self, arr: np.ndarray) -> np.ndarray:
        n = len(self.variables)
        H = np.empty((n, n), dtype=np.float64)
        for i in range(n):
            for j in range(n):
                H[i, j] = run_program(self.compiled.hess[i][j], arr)
        return ex._symmetrize_checked(H)

    def gradient_expressions(self) -> Tuple[ex.Expression, ...]:
        """Derivative trees, for inspection."""
        return self.compiled.grad_exprs


def make_system(
    name: str,
    potential: str,
    variables,
    parameters: Optional[Mapping[str, float]] = None,
    weights: Optional[WeightAssignment] = None,
    domain: Optional[Mapping[str, Tuple[float, float]]] = None,
    potential_symbol: str = "Phi",
    intensive_names: Optional[Mapping[str, str]] = None,
    validate: bool = True,
) -> ThermoSystem:
    """Parse, assemble and validate a system.

    Validation covers the structural invariants (variables distinct and
    disjoint from parameters, all expression names declared) and, when
    weights are declared, an Euler-identity check at 20 sampled points.
    """
    variables = tuple(variables)
    parameters = {k: float(v) for k, v in (parameters or {}).items()}
    if not variables:
        raise ValidationError("system must declare at least one variable")
    if len(set(variables)) != len(variables):
        raise ValidationError(f"duplicate variable names in {variables}")
    overlap = set(variables) & set(parameters)
    if overlap:
        raise ValidationError(f"names used as both variable and parameter: {sorted(overlap)}")

    tree = ex.parse(potential, set(variables) | set(parameters))

    hint: Dict[str, Tuple[float, float]] = {}
    domain = dict(domain or {})
    for bad in set(domain) - set(variables):
        raise ValidationError(f"domain given for unknown variable '{bad}'")
    for v in variables:
        lo, hi = domain.get(v, DEFAULT_DOMAIN)
        lo, hi = float(lo), float(hi)
        if not lo < hi:
            raise ValidationError(f"domain for '{v}' must satisfy lo < hi, got [{lo}, {hi}]")
        hint[v] = (lo, hi)

    if weights is not None and set(weights.powers) != set(variables):
        raise ValidationError(
            f"declared weights must cover exactly the variables {variables}, "
            f"got {tuple(weights.powers)}"
        )

    system = ThermoSystem(
        name=name,
        variables=variables,
        parameters=parameters,
        expression=tree,
        declared_weights=weights,
        domain_hint=hint,
        potential_symbol=potential_symbol,
        intensive_names=dict(intensive_names or {}),
    )

    if validate and weights is not None:
        _validate_declared_weights(system)
    return system


def _validate_declared_weights(system: ThermoSystem) -> None:
    from .homogeneity import euler_residual, sample_points

    pts, _ = sample_points(system, _VALIDATION_POINTS, _VALIDATION_SEED)
    worst = 0.0
    for row in pts:
        pt = dict(zip(system.variables, row))
        worst = max(worst, euler_residual(system, system.declared_weights, pt))
    if worst > DECLARED_WEIGHTS_TOL:
        raise ValidationError(
            f"declared weights fail the Euler identity: residual {worst:.3e} "
            f"> {DECLARED_WEIGHTS_TOL:.0e} on {_VALIDATION_POINTS} sampled points"
        )


# ---------------------------------------------------------------------------
# Built-in systems


def kerr_newman() -> ThermoSystem:
    """Kerr-Newman black hole: M(S, J, Q), degree-1 weights (1/2, 1/2, 1)."""
    return make_system(
        name="kerr-newman",
        potential="sqrt(2*S + (J^2 + Q^4/4)/(8*S) + Q^2/2)",
        variables=("S", "J", "Q"),
        weights=WeightAssignment(1.0, {"S": 0.5, "J": 0.5, "Q": 1.0}),
        potential_symbol="M",
        intensive_names={"S": "T", "J": "Omega", "Q": "phi"},
    )


def reissner_nordstrom_d(d: int) -> ThermoSystem:
    """Reissner-Nordstrom black hole in d spacetime dimensions.

    M(S, Q) = S^D/2 + Q^2/(4*D*S^D) with D = (d-3)/(d-2); degree-1
    weights are (D, 1).  Only integer d >= 4 is accepted here; other
    exponents D in (0, 1) can be loaded from a system file.
    """
    if not isinstance(d, int) or isinstance(d, bool):
        raise ValidationError(f"dimension d must be an integer, got {d!r}")
    if d < 4:
        raise ValidationError(f"dimension d must be >= 4, got {d}")
    D = (d - 3) / (d - 2)
    return make_system(
        name=f"reissner-nordstrom-{d}d",
        potential="S^D/2 + Q^2/(4*D*S^D)",
        variables=("S", "Q"),
        parameters={"d": float(d), "D": D},
        weights=WeightAssignment(1.0, {"S": D, "Q": 1.0}),
        potential_symbol="M",
        intensive_names={"S": "T", "Q": "phi"},
    )


# ---------------------------------------------------------------------------
# File format

_REQUIRED_KEYS = {"name", "potential", "variables"}
_ALLOWED_KEYS = _REQUIRED_KEYS | {"parameters", "weights", "domain"}


def load_system(contents: Union[bytes, str]) -> ThermoSystem:
    """Load a system from its JSON document.

    Schema: {"name": str, "potential": str, "variables": [str],
    "parameters": {str: number}, "weights": {"beta": number,
    "powers": {str: number}}?, "domain": {str: [number, number]}?}.
    Declared weights are cross-checked against the Euler identity.
    """
    if isinstance(contents, bytes):
        try:
            contents = contents.decode("utf-8")
        except UnicodeDecodeError as e:
            raise LoadError(f"system file is not valid UTF-8: {e}") from e
    try:
        doc = json.loads(contents)
    except json.JSONDecodeError as e:
        raise LoadError(f"system file is not valid JSON: {e.msg} (line {e.lineno}, column {e.colno})") from e

    if not isinstance(doc, dict):
        raise LoadError("system file must contain a JSON object")
    missing = _REQUIRED_KEYS - set(doc)
    if missing:
        raise LoadError(f"system file missing required fields: {sorted(missing)}")
    unknown = set(doc) - _ALLOWED_KEYS
    if unknown:
        raise LoadError(f"system file has unknown fields: {sorted(unknown)}")

    name = doc["name"]
    potential = doc["potential"]
    variables = doc["variables"]
    if not isinstance(name, str) or not isinstance(potential, str):
        raise LoadError("'name' and 'potential' must be strings")
    if not isinstance(variables, list) or not all(isinstance(v, str) for v in variables):
        raise LoadError("'variables' must be a list of strings")

    parameters = doc.get("parameters", {})
    if not isinstance(parameters, dict) or not all(
        isinstance(k, str) and isinstance(v, (int, float)) and not isinstance(v, bool)
        for k, v in parameters.items()
    ):
        raise LoadError("'parameters' must map names to numbers")

    weights = None
    if "weights" in doc:
        wdoc = doc["weights"]
        if (
            not isinstance(wdoc, dict)
            or set(wdoc) != {"beta", "powers"}
            or not isinstance(wdoc["powers"], dict)
        ):
            raise LoadError("'weights' must be {\"beta\": number, \"powers\": {name: number}}")
        try:
            weights = WeightAssignment(
                float(wdoc["beta"]), {k: float(v) for k, v in wdoc["powers"].items()}
            )
        except (TypeError, ValueError) as e:
            raise LoadError(f"invalid weights: {e}") from e

    domain = None
    if "domain" in doc:
        ddoc = doc["domain"]
        if not isinstance(ddoc, dict):
            raise LoadError("'domain' must map variable names to [lo, hi] pairs")
        domain = {}
        for k, pair in ddoc.items():
            if not (isinstance(pair, list) and len(pair) == 2):
                raise LoadError(f"domain for '{k}' must be a [lo, hi] pair")
            domain[k] = (float(pair[0]), float(pair[1]))

    return make_system(
        name=name,
        potential=potential,
        variables=variables,
        parameters=parameters,
        weights=weights,
        domain=domain,
    )


def system_to_json(sys: ThermoSystem, indent: int = 2) -> str:
    """Serialize a system to the file format; round-trips via load_system."""
    doc: dict = {
        "name": sys.name,
        "potential": ex.serialize(sys.expression),
        "variables": list(sys.variables),
        "parameters": dict(sys.parameters),
    }
    if sys.declared_weights is not None:
        doc["weights"] = {
            "beta": sys.declared_weights.beta,
            "powers": dict(sys.declared_weights.powers),
        }
    domain = {
        v: list(sys.domain_hint[v])
        for v in sys.variables
        if sys.domain_hint[v] != DEFAULT_DOMAIN
    }
    if domain:
        doc["domain"] = domain
    return json.dumps(doc, indent=indent)
