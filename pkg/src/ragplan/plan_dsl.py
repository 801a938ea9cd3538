"""Parser, validator, and renderer for the constrained plan language.

Plans are flat sequences of API calls, one per line, of the form
``name(arg=value, ...)``. Values are quoted strings (referential expressions)
or numbers. No control flow, no variables; anything else is a syntax error.
The accepted call names and argument types come from the shipped signature
table, which is also the source of the API documentation shown to the plan
generator.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ArgError, PlanSyntaxError, UnknownApi

SIGNATURES_PATH = Path(__file__).resolve().parent / "data" / "api_signatures.json"

_CALL_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*$")
_ARG_RE = re.compile(
    r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*"
    r"(\"[^\"]*\"|'[^']*'|-?\d+(?:\.\d+)?)\s*(,|$)"
)


@dataclass(frozen=True)
class ApiArg:
    name: str
    type: str  # "ref" | "number" | "string"
    required: bool = True
    choices: tuple[str, ...] = ()
    doc: str = ""


@dataclass(frozen=True)
class ApiSignature:
    name: str
    summary: str
    args: tuple[ApiArg, ...]
    doc: tuple[str, ...] = ()


class SignatureTable:
    """The API surface plans may call, loaded from the versioned data file."""

    def __init__(self, apis: dict[str, ApiSignature], version: int = 1):
        self.apis = apis
        self.version = version

    @classmethod
    def load(cls, path: str | Path = SIGNATURES_PATH) -> "SignatureTable":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        apis = {}
        for name, spec in raw["apis"].items():
            args = tuple(
                ApiArg(
                    name=a["name"],
                    type=a["type"],
                    required=a.get("required", True),
                    choices=tuple(a.get("choices", ())),
                    doc=a.get("doc", ""),
                )
                for a in spec["args"]
            )
            apis[name] = ApiSignature(
                name=name,
                summary=spec.get("summary", ""),
                args=args,
                doc=tuple(spec.get("doc", ())),
            )
        return cls(apis, version=raw.get("version", 1))

    def names(self) -> list[str]:
        return sorted(self.apis)


_DEFAULT_TABLE: SignatureTable | None = None


def default_table() -> SignatureTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = SignatureTable.load()
    return _DEFAULT_TABLE


@dataclass(frozen=True)
class PlanStep:
    api: str
    args: dict[str, str | float | int] = field(default_factory=dict)

    def __hash__(self):
        return hash((self.api, tuple(sorted(self.args.items()))))

    def __eq__(self, other):
        return isinstance(other, PlanStep) and self.api == other.api and self.args == other.args


@dataclass(frozen=True)
class PlanProgram:
    steps: tuple[PlanStep, ...]

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def _parse_value(token: str) -> str | float | int:
    if token.startswith(("\"", "'")):
        return token[1:-1]
    if "." in token:
        return float(token)
    return int(token)


def _check_args(api: ApiSignature, args: dict, line_no: int) -> dict:
    by_name = {a.name: a for a in api.args}
    for arg_name, value in args.items():
        spec = by_name.get(arg_name)
        if spec is None:
            raise ArgError(api.name, arg_name, "not a parameter of this api", line_no)
        if spec.type in ("ref", "string"):
            if not isinstance(value, str):
                raise ArgError(api.name, arg_name, "expected a quoted string", line_no)
            if spec.type == "ref" and not value.strip():
                raise ArgError(api.name, arg_name, "referential expression is empty", line_no)
            if spec.choices and value not in spec.choices:
                raise ArgError(api.name, arg_name, f"must be one of {list(spec.choices)}", line_no)
        elif spec.type == "number":
            if not isinstance(value, (int, float)):
                raise ArgError(api.name, arg_name, "expected a number", line_no)
    for spec in api.args:
        if spec.required and spec.name not in args:
            raise ArgError(api.name, spec.name, "required argument missing", line_no)
    return args


def parse_plan(text: str, table: SignatureTable | None = None) -> PlanProgram:
    """Parse plan text into a typed program.

    Blank lines, comment lines (# ...), and code-fence markers are ignored.
    Raises PlanSyntaxError / UnknownApi / ArgError with the offending line.
    """
    table = table or default_table()
    steps: list[PlanStep] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped.startswith("```"):
            continue
        m = _CALL_RE.match(stripped)
        if m is None:
            raise PlanSyntaxError(line_no, "expected a call of the form name(arg=value, ...)", stripped[:40])
        name, body = m.group(1), m.group(2).strip()
        if name not in table.apis:
            raise UnknownApi(name, line_no)
        args: dict[str, str | float | int] = {}
        pos = 0
        while pos < len(body):
            am = _ARG_RE.match(body, pos)
            if am is None:
                raise PlanSyntaxError(line_no, "malformed argument list", body[pos : pos + 40])
            arg_name = am.group(1)
            if arg_name in args:
                raise ArgError(name, arg_name, "given twice", line_no)
            args[arg_name] = _parse_value(am.group(2))
            pos = am.end()
            if am.group(3) == "," and pos >= len(body):
                raise PlanSyntaxError(line_no, "trailing comma in argument list", body[-10:])
        steps.append(PlanStep(api=name, args=_check_args(table.apis[name], args, line_no)))
    if not steps:
        raise PlanSyntaxError(0, "plan contains no steps")
    return PlanProgram(steps=tuple(steps))


def render_plan(program: PlanProgram, table: SignatureTable | None = None) -> str:
    """Render a program back to canonical text; reparses to an equal program."""
    table = table or default_table()
    lines = []
    for step in program:
        sig = table.apis[step.api]
        order = [a.name for a in sig.args if a.name in step.args]
        parts = []
        for arg_name in order:
            value = step.args[arg_name]
            if isinstance(value, str):
                parts.append(f'{arg_name}="{value}"')
            else:
                parts.append(f"{arg_name}={value}")
        lines.append(f"{step.api}({', '.join(parts)})")
    return "\n".join(lines) + "\n"


def validate_plan(program: PlanProgram, table: SignatureTable | None = None) -> list[str]:
    """Non-fatal lint pass; fatal issues were already raised by parse_plan."""
    warnings = []
    prev: PlanStep | None = None
    for i, step in enumerate(program, start=1):
        if step.api == "rotate" and float(step.args.get("degrees", 1)) % 360.0 == 0.0:
            warnings.append(f"step {i}: no-op rotation")
        if prev is not None and step == prev:
            warnings.append(f"step {i}: repeated step")
        if step.api == "detect":
            expr = step.args.get("obj")
            used_later = any(
                expr in later.args.values() for later in program.steps[i:]
            )
            if not used_later:
                warnings.append(f"step {i}: detect result unused")
        prev = step
    return warnings
