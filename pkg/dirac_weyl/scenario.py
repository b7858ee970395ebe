"""
Scenario files: one JSON document describing an expression, a boundary
condition at 0, a λ-grid and per-run overrides of the numerical settings.

Complex numbers are [re, im] pairs (a bare real is accepted), matrices are
row-major nested lists of them.
"""

import json
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import (
    BaseModel,
    Field,
    GetCoreSchemaHandler,
    PositiveInt,
    ValidationError,
    field_validator,
    model_validator,
)
from pydantic_core import CoreSchema, core_schema

from dirac_weyl import logger
from dirac_weyl.boundary_algebra import (
    AdmissiblePair,
    BoundaryScheme,
    Completion,
    PhiParameter,
)
from dirac_weyl.dirac_core import DiracExpression, Interval, SignatureMatrix
from dirac_weyl.potentials import family_names, make_potential
from dirac_weyl.settings import Settings, resolve
from dirac_weyl.utils import ScenarioError, complex_to_pair, pair_to_complex
from dirac_weyl.weyl_engine import TruncationSchedule

SCHEMA_VERSION = "1"


class _ComplexPair:
    @classmethod
    def __get_pydantic_core_schema__(cls, _source_type, _handler: GetCoreSchemaHandler) -> CoreSchema:
        number = core_schema.float_schema(allow_inf_nan=False)
        pair_or_real = core_schema.union_schema([
            core_schema.list_schema(number, min_length=2, max_length=2),
            number,
        ])
        return core_schema.no_info_after_validator_function(
            pair_to_complex,
            pair_or_real,
            serialization=core_schema.plain_serializer_function_ser_schema(
                complex_to_pair, info_arg=False
            ),
        )


Complex = Annotated[complex, _ComplexPair]
Matrix = List[List[Complex]]


def _to_array(mat: Matrix) -> np.ndarray:
    arr = np.array(mat, dtype=complex)
    if arr.ndim != 2:
        raise ValueError("matrix rows have unequal lengths")
    return arr


class PotentialBlock(BaseModel, extra='forbid'):
    family: str
    params: Dict[str, Any] = Field(default_factory=dict)

    @field_validator('family')
    @classmethod
    def registered(cls, family):
        if family not in family_names():
            raise ValueError(f"unknown family '{family}', expected one of {', '.join(family_names())}")
        return family


class IntervalBlock(BaseModel, extra='forbid'):
    kind: Literal["finite", "half_line", "whole_line"] = "half_line"
    length: float = Field(40.0, gt=0)

    def build(self) -> Interval:
        return getattr(Interval, self.kind)(self.length)


class ExpressionBlock(BaseModel, extra='forbid'):
    J: Union[Literal["canonical", "diag_i", "diag_minus_i"], Matrix] = "canonical"
    n: PositiveInt = 2
    potential: PotentialBlock = PotentialBlock(family="zero")
    interval: IntervalBlock = IntervalBlock()

    @model_validator(mode='after')
    def check_dimensions(self):
        if isinstance(self.J, str):
            assert self.n % 2 == 0, f"J form '{self.J}' needs even n, got n={self.n}"
        else:
            shape = _to_array(self.J).shape
            assert shape == (self.n, self.n), f"J has shape {shape}, expected ({self.n}, {self.n})"
        return self

    def signature(self) -> SignatureMatrix:
        if isinstance(self.J, str):
            return SignatureMatrix.from_name(self.J, self.n)
        return SignatureMatrix(_to_array(self.J))

    def build(self) -> DiracExpression:
        Q = make_potential(self.potential.family, self.n, self.potential.params)
        return DiracExpression(self.signature(), Q, self.interval.build())


class BoundaryBlock(BaseModel, extra='forbid'):
    """At most one of Φ, the pair (C1, C2) and an explicit completion (X, Y).

    With none given the completion is the identity, i.e. the condition y1(0) = 0
    in the canonical frame.
    """

    phi: Optional[Matrix] = None
    C1: Optional[Matrix] = None
    C2: Optional[Matrix] = None
    X: Optional[Matrix] = None
    Y: Optional[Matrix] = None

    @model_validator(mode='before')
    @classmethod
    def check_one_form(cls, values):
        if isinstance(values, dict):
            for a, b in (("C1", "C2"), ("X", "Y")):
                assert (values.get(a) is None) == (values.get(b) is None), f"{a} and {b} go together"
            given = [k for k in ("phi", "C1", "X") if values.get(k) is not None]
            assert len(given) <= 1, f"give at most one of phi, (C1, C2), (X, Y); got {given}"
        return values

    def build(self, J: SignatureMatrix, settings: Optional[Settings] = None) -> BoundaryScheme:
        settings = resolve(settings)
        if self.phi is not None:
            return BoundaryScheme.build(J, phi=PhiParameter(_to_array(self.phi)), settings=settings)
        if self.C1 is not None:
            pair = AdmissiblePair(_to_array(self.C1), _to_array(self.C2), settings)
            return BoundaryScheme.build(J, pair=pair, settings=settings)
        if self.X is not None:
            comp = Completion(_to_array(self.X), _to_array(self.Y),
                              SignatureMatrix.canonical(J.p), "explicit", settings)
            return BoundaryScheme.build(J, completion=comp, settings=settings)
        return BoundaryScheme.build(J, settings=settings)


class RectangleGrid(BaseModel, extra='forbid'):
    re: Tuple[float, float]
    im: Tuple[float, float]
    counts: Tuple[PositiveInt, PositiveInt]

    @field_validator('re', 'im')
    @classmethod
    def ordered(cls, bounds):
        assert bounds[0] <= bounds[1], f"range {bounds} is reversed"
        return bounds


class LambdaGrid(BaseModel, extra='forbid'):
    points: Optional[List[Complex]] = None
    rectangle: Optional[RectangleGrid] = None

    @model_validator(mode='after')
    def check_non_empty(self):
        assert (self.points is None) != (self.rectangle is None), "give exactly one of points, rectangle"
        if self.points is not None:
            assert len(self.points) > 0, "λ-grid is empty"
        return self

    def values(self) -> np.ndarray:
        """Grid points; a rectangle is walked row by row in Im λ, then Re λ."""
        if self.points is not None:
            return np.array(self.points, dtype=complex)
        r = self.rectangle
        res = np.linspace(*r.re, r.counts[0])
        ims = np.linspace(*r.im, r.counts[1])
        return np.array([complex(x, y) for y in ims for x in res])


class ScheduleBlock(BaseModel, extra='forbid'):
    L0: Optional[float] = Field(None, gt=0)
    growth: Optional[float] = Field(None, gt=1)
    L_max: Optional[float] = Field(None, gt=0)
    tol: Optional[float] = Field(None, gt=0)


class TolerancesBlock(BaseModel, extra='forbid'):
    rtol: Optional[float] = Field(None, gt=0)
    atol: Optional[float] = Field(None, gt=0)
    rank_threshold: Optional[float] = Field(None, gt=0)


class OutputsBlock(BaseModel, extra='forbid'):
    directory: Optional[str] = None
    formats: List[Literal["csv", "json"]] = ["csv", "json"]


class ScenarioConfig(BaseModel, extra='forbid'):
    schema_version: Literal["1"] = SCHEMA_VERSION
    name: str = "scenario"
    description: str = ""
    expression: ExpressionBlock = ExpressionBlock()
    boundary: BoundaryBlock = BoundaryBlock()
    lambda_grid: LambdaGrid = LambdaGrid(points=[[0.0, 1.0]])
    schedule: ScheduleBlock = ScheduleBlock()
    tolerances: TolerancesBlock = TolerancesBlock()
    outputs: OutputsBlock = OutputsBlock()

    def settings(self, base: Optional[Settings] = None) -> Settings:
        t = self.tolerances
        try:
            return resolve(base).with_overrides(
                t.rtol, t.atol, t.rank_threshold, **self.schedule.model_dump())
        except ValidationError as e:
            raise ScenarioError(self.name, errors=e.errors(include_context=False)) from e

    def truncation(self, settings: Settings) -> TruncationSchedule:
        return TruncationSchedule.from_settings(settings)

    def build_expression(self) -> DiracExpression:
        return self.expression.build()

    def boundary_scheme(self, settings: Optional[Settings] = None) -> BoundaryScheme:
        return self.boundary.build(self.expression.signature(), settings)

    def grid(self) -> np.ndarray:
        return self.lambda_grid.values()

    def echo(self) -> dict:
        return self.model_dump(mode="json", exclude_none=True)


def _constant_gamma(gamma: float, n: int = 2) -> list:
    """i·γ·I, so Q1 = 0 and Q2 = γI."""
    return [[[0.0, gamma] if i == j else [0.0, 0.0] for j in range(n)] for i in range(n)]


BUILTIN_SCENARIOS: Dict[str, dict] = {
    "free_dirac_p1": {
        "description": "J = [[0, -1], [1, 0]], Q = 0, Φ = 0; M(λ) = i in the upper half-plane",
        "expression": {"J": "canonical", "n": 2, "potential": {"family": "zero"}},
        "boundary": {"phi": [[0.0]]},
        "lambda_grid": {"points": [[0, 1], [0, 2], [0, 3], [1, 1]]},
    },
    "almost_fsa_canonical": {
        "description": "canonical J with constant Q2 = 0.5 I, λ = ±2i",
        "expression": {"J": "canonical", "n": 2,
                       "potential": {"family": "constant", "params": {"matrix": _constant_gamma(0.5)}}},
        "lambda_grid": {"points": [[0, 2], [0, -2]]},
    },
    "almost_fsa_diag_i": {
        "description": "J = i·diag(1, -1) with constant Q2 = 0.5 I, λ = ±2i",
        "expression": {"J": "diag_i", "n": 2,
                       "potential": {"family": "constant", "params": {"matrix": _constant_gamma(0.5)}}},
        "lambda_grid": {"points": [[0, 2], [0, -2]]},
    },
    "almost_fsa_diag_minus_i": {
        "description": "J = diag(-i, i) with constant Q2 = 0.5 I, λ = ±2i",
        "expression": {"J": "diag_minus_i", "n": 2,
                       "potential": {"family": "constant", "params": {"matrix": _constant_gamma(0.5)}}},
        "lambda_grid": {"points": [[0, 2], [0, -2]]},
    },
    "exp_decay_p1": {
        "description": "canonical J, Q = exp(-x)·[[1, 0.5], [0.5, -1]] + 0.3i·exp(-x) I",
        "expression": {
            "J": "canonical", "n": 2,
            "potential": {"family": "exp_decay", "params": {
                "matrix": [[[1.0, 0.3], [0.5, 0.0]], [[0.5, 0.0], [-1.0, 0.3]]], "mu": 1.0}},
        },
        "lambda_grid": {"rectangle": {"re": [-1.0, 1.0], "im": [1.0, 2.0], "counts": [3, 2]}},
    },
    "nls_offdiag_p2": {
        "description": "J = i·diag(I, -I), Q = i[[0, -q], [-q*, 0]], q = exp(-x)·[[1, 0.3], [0.3, 0.5]]",
        "expression": {
            "J": "diag_i", "n": 4,
            "potential": {"family": "nls_offdiag", "params": {
                "q": [[[1.0, 0.0], [0.3, 0.0]], [[0.3, 0.0], [0.5, 0.0]]], "mu": 1.0}},
        },
        "lambda_grid": {"points": [[0, 2]]},
    },
    "finite_exp_decay_n2": {
        "description": "canonical J on [0, 1], Q = exp(-x)·[[0.5, 0.2i], [0.1, -0.5]]",
        "expression": {
            "J": "canonical", "n": 2,
            "potential": {"family": "exp_decay", "params": {
                "matrix": [[[0.5, 0.0], [0.0, 0.2]], [[0.1, 0.0], [-0.5, 0.0]]], "mu": 1.0}},
            "interval": {"kind": "finite", "length": 1.0},
        },
        "lambda_grid": {"points": [[0, 1]]},
    },
}


def builtin_names() -> List[str]:
    return sorted(BUILTIN_SCENARIOS)


def builtin(name: str) -> ScenarioConfig:
    try:
        data = BUILTIN_SCENARIOS[name]
    except KeyError:
        raise ScenarioError(
            "builtin", f"unknown scenario '{name}', expected one of {', '.join(builtin_names())}"
        ) from None
    return ScenarioConfig.model_validate({"name": name, **data})


def parse_scenario(data: dict, source="<data>") -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ScenarioError(source, errors=e.errors(include_context=False)) from e


def load_scenario(path: Path) -> ScenarioConfig:
    path = Path(path)
    try:
        with open(path) as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ScenarioError(path, "file not found") from None
    except json.JSONDecodeError as e:
        raise ScenarioError(path, f"invalid JSON ({e})") from e
    if not isinstance(data, dict):
        raise ScenarioError(path, "top level must be an object")
    data.setdefault("name", path.stem)
    scenario = parse_scenario(data, path)
    logger.debug(f"Loaded scenario {scenario.name} from {path}")
    return scenario
