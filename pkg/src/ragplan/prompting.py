"""Generator prompt assembly.

The template file has three sections introduced by ``{{preamble}}``,
``{{demos}}``, and ``{{query}}`` markers on their own lines. The demos section
is a per-demonstration format with ``{instruction}`` and ``{code}``
placeholders; the query section holds ``{query}``. Demonstrations are placed
in reverse relevance order: the best-ranked demonstration is the last one
before the task line.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import TemplateError
from .plan_dsl import SignatureTable, default_table
from .retrieval import Query, RankedCandidate

DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_TEMPLATE_PATH = DATA_DIR / "prompt_template.txt"
DEFAULT_REWRITE_PATH = DATA_DIR / "rewrite_template.txt"

CHARS_PER_TOKEN = 4
TOKEN_BUDGET = 8000

_API_DOCS_MARKER = "{api_docs}"


@dataclass(frozen=True)
class PromptTemplate:
    preamble: str
    demo_slot_format: str
    instruction_slot_format: str


@dataclass(frozen=True)
class PromptBundle:
    text: str
    image: bytes | None
    demo_order: tuple[str, ...]
    token_estimate: int


def render_api_docs(table: SignatureTable | None = None) -> str:
    """API reference block built from the signature table (the single source
    of truth shared with the parser)."""
    table = table or default_table()
    lines = []
    for name in table.names():
        sig = table.apis[name]
        args = ", ".join(
            a.name if a.required else f"{a.name}=None" for a in sig.args
        )
        lines.append(f"def {name}({args}):")
        lines.append(f'    """{sig.summary}')
        lines.append("")
        for a in sig.args:
            opt = "" if a.required else " (optional)"
            choice = f" One of: {', '.join(a.choices)}." if a.choices else ""
            lines.append(f"    {a.name}{opt}: {a.doc}{choice}")
        for para in sig.doc:
            lines.append("")
            lines.append(f"    {para}")
        lines.append('    """')
        lines.append("")
    return "\n".join(lines)


def load_template(path: str | Path = DEFAULT_TEMPLATE_PATH, table: SignatureTable | None = None) -> PromptTemplate:
    """Parse and validate a template file; expands the API docs marker."""
    text = Path(path).read_text(encoding="utf-8")
    sections = {"preamble": None, "demos": None, "query": None}
    current = None
    buf: dict[str, list[str]] = {k: [] for k in sections}
    for line in text.splitlines():
        stripped = line.strip()
        if stripped in ("{{preamble}}", "{{demos}}", "{{query}}"):
            current = stripped[2:-2]
            continue
        if current is not None:
            buf[current].append(line)
    for name in sections:
        if not buf[name]:
            raise TemplateError(name, f"template section {{{{{name}}}}} is missing or empty")
    preamble = "\n".join(buf["preamble"]).strip("\n") + "\n"
    demo = "\n".join(buf["demos"]).strip("\n") + "\n"
    query = "\n".join(buf["query"]).strip("\n") + "\n"

    if _API_DOCS_MARKER in preamble:
        preamble = preamble.replace(_API_DOCS_MARKER, render_api_docs(table))

    for placeholder, section, content in (
        ("instruction", "demos", demo),
        ("code", "demos", demo),
        ("query", "query", query),
    ):
        token = "{" + placeholder + "}"
        count = content.count(token)
        if count != 1:
            raise TemplateError(placeholder, f"{section} section must contain {token} exactly once, found {count}")
    return PromptTemplate(preamble=preamble, demo_slot_format=demo, instruction_slot_format=query)


def assemble(tmpl: PromptTemplate, q: Query, ranked: list[RankedCandidate]) -> PromptBundle:
    """Build the full generator prompt; most relevant demonstration goes last."""
    ordered = sorted(ranked, key=lambda c: c.rank if c.rank is not None else 0)
    parts = [tmpl.preamble]
    demo_order = []
    for cand in reversed(ordered):  # rank k first ... rank 1 last
        block = tmpl.demo_slot_format.replace("{instruction}", cand.entry.instruction)
        block = block.replace("{code}", cand.entry.code.rstrip("\n"))
        parts.append(block)
        demo_order.append(cand.entry.id)
    parts.append(tmpl.instruction_slot_format.replace("{query}", q.raw))
    text = "\n".join(parts)
    return PromptBundle(
        text=text,
        image=q.scene_image,
        demo_order=tuple(demo_order),
        token_estimate=len(text) // CHARS_PER_TOKEN,
    )


def render_rewrite_prompt(raw_query: str, template: str | None = None) -> str:
    """Fill the instruction-distillation template with the raw task query."""
    if template is None:
        template = DEFAULT_REWRITE_PATH.read_text(encoding="utf-8")
    if "{query}" not in template:
        raise TemplateError("query", "rewrite template must contain {query}")
    return template.replace("{query}", raw_query)
