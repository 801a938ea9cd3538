import pytest

from conftest import make_entry
from ragplan.errors import TemplateError
from ragplan.prompting import DEFAULT_TEMPLATE_PATH, assemble, load_template, render_rewrite_prompt
from ragplan.retrieval import Query, RankedCandidate


def _ranked(*pairs):
    out = []
    for rank, (eid, instruction, code) in enumerate(pairs, start=1):
        c = RankedCandidate(entry=make_entry(eid, instruction, code=code))
        c.rank = rank
        out.append(c)
    return out


SMALL_TEMPLATE = """{{preamble}}
You are a planner.
{{demos}}
Task: {instruction}
Plan:
{code}
{{query}}
Now: {query}
"""


def _write(tmp_path, text):
    p = tmp_path / "tmpl.txt"
    p.write_text(text, encoding="utf-8")
    return p


def test_shipped_template_loads():
    tmpl = load_template(DEFAULT_TEMPLATE_PATH)
    assert "{instruction}" in tmpl.demo_slot_format
    assert "{code}" in tmpl.demo_slot_format
    assert "{query}" in tmpl.instruction_slot_format
    assert len(tmpl.preamble) > 1000


def test_template_missing_code_placeholder(tmp_path):
    bad = SMALL_TEMPLATE.replace("{code}", "")
    with pytest.raises(TemplateError) as err:
        load_template(_write(tmp_path, bad))
    assert err.value.placeholder == "code"


def test_template_missing_section(tmp_path):
    bad = SMALL_TEMPLATE.replace("{{query}}\nNow: {query}\n", "")
    with pytest.raises(TemplateError) as err:
        load_template(_write(tmp_path, bad))
    assert err.value.placeholder == "query"


def test_reverse_order_two_demos(tmp_path):
    tmpl = load_template(_write(tmp_path, SMALL_TEMPLATE))
    ranked = _ranked(("a", "inst a", "code_a(obj=\"x\")"), ("b", "inst b", "code_b(obj=\"y\")"))
    bundle = assemble(tmpl, Query(raw="the task"), ranked)
    assert bundle.demo_order == ("b", "a")
    assert bundle.text.index("inst b") < bundle.text.index("inst a")


def test_single_demo_is_first_and_last(tmp_path):
    tmpl = load_template(_write(tmp_path, SMALL_TEMPLATE))
    bundle = assemble(tmpl, Query(raw="t"), _ranked(("only", "inst", "c(obj=\"z\")")))
    assert bundle.demo_order == ("only",)


def test_rank_one_code_is_last_before_instruction(tmp_path):
    tmpl = load_template(_write(tmp_path, SMALL_TEMPLATE))
    ranked = _ranked(
        ("first", "best demo", 'best(obj="1")'),
        ("second", "middle demo", 'mid(obj="2")'),
        ("third", "worst demo", 'worst(obj="3")'),
    )
    bundle = assemble(tmpl, Query(raw="the task"), ranked)
    pos_best = bundle.text.index('best(obj="1")')
    pos_mid = bundle.text.index('mid(obj="2")')
    pos_worst = bundle.text.index('worst(obj="3")')
    pos_query = bundle.text.index("Now: the task")
    assert pos_worst < pos_mid < pos_best < pos_query


def test_demos_appear_verbatim(tmp_path):
    tmpl = load_template(_write(tmp_path, SMALL_TEMPLATE))
    code = 'pick_place(obj="the red heart block", target="the green bowl")\nrotate(obj="the red heart block", degrees=30)'
    bundle = assemble(tmpl, Query(raw="t"), _ranked(("e", "an instruction with words", code)))
    assert "an instruction with words" in bundle.text
    assert code in bundle.text


def test_assemble_deterministic(tmp_path):
    tmpl = load_template(_write(tmp_path, SMALL_TEMPLATE))
    ranked = _ranked(("a", "i1", "c1(obj=\"q\")"), ("b", "i2", "c2(obj=\"r\")"))
    b1 = assemble(tmpl, Query(raw="t"), ranked)
    b2 = assemble(tmpl, Query(raw="t"), ranked)
    assert b1.text == b2.text
    assert b1.token_estimate == b2.token_estimate


def test_token_estimate_is_quarter_of_chars(tmp_path):
    tmpl = load_template(_write(tmp_path, SMALL_TEMPLATE))
    bundle = assemble(tmpl, Query(raw="t"), _ranked(("a", "i", "c(obj=\"s\")")))
    assert bundle.token_estimate == len(bundle.text) // 4


def test_render_with_no_demos_is_preamble_plus_query_slot(tmp_path):
    tmpl = load_template(_write(tmp_path, SMALL_TEMPLATE))
    bundle = assemble(tmpl, Query(raw="the job"), [])
    expected = tmpl.preamble + "\n" + tmpl.instruction_slot_format.replace("{query}", "the job")
    assert bundle.text == expected


def test_image_carried_through(tmp_path):
    tmpl = load_template(_write(tmp_path, SMALL_TEMPLATE))
    bundle = assemble(tmpl, Query(raw="t", scene_image=b"\x89PNGfake"), [])
    assert bundle.image == b"\x89PNGfake"
    assert assemble(tmpl, Query(raw="t"), []).image is None


def test_api_docs_marker_expanded():
    tmpl = load_template(DEFAULT_TEMPLATE_PATH)
    assert "{api_docs}" not in tmpl.preamble
    for api in ("pick_place", "rotate", "sweep", "push", "detect", "distract"):
        assert f"def {api}(" in tmpl.preamble


def test_rewrite_prompt_sections():
    prompt = render_rewrite_prompt("Please put the cute block away.")
    for section in ("Scene:", "Description:", "Example:", "Instruction:"):
        assert section in prompt
    assert "Please put the cute block away." in prompt


def test_rewrite_prompt_requires_placeholder():
    with pytest.raises(TemplateError):
        render_rewrite_prompt("x", template="no placeholder here")
