"""ce evaluator: the procedural-layer C expression subset."""

import pytest

from luxdbg.ce import ce_eval, read_string
from luxdbg.core import create_core
from luxdbg.errors import ScriptError
from luxdbg.image import load_image


@pytest.fixture
def core(image_path):
    core = create_core("lx16i", "p1")
    load_image(core, image_path("cedemo"))
    return core


def test_global_read_default_decimal(core):
    assert ce_eval(core, "output") == "7"
    assert ce_eval(core, "output", "%d") == "7"


def test_null_comparison(core):
    assert ce_eval(core, "head_of_list != NULL") == "0"
    core.ymem.contents[301] = 5
    assert ce_eval(core, "head_of_list != NULL") == "1"


def test_array_indexing(core):
    assert ce_eval(core, "arr[2]") == "9"
    assert ce_eval(core, "arr[1 + 1]") == "9"
    with pytest.raises(ScriptError, match="not an array"):
        ce_eval(core, "output[0]")


def test_int32_two_words(core):
    assert ce_eval(core, "big") == "131073"  # low=1 at 320, high=2 at 321
    core.ymem.contents[321] = 0xFFFF
    core.ymem.contents[320] = 0xFFFF
    assert ce_eval(core, "big") == "-1"


def test_pointer_deref_and_string(core):
    assert ce_eval(core, "msg", "%s") == "ok"
    assert ce_eval(core, "*msg") == str(ord("o"))
    assert ce_eval(core, "msg", "%d") == "330"


def test_int16_sign(core):
    core.ymem.contents[300] = 0xFFFE
    assert ce_eval(core, "output") == "-2"
    assert ce_eval(core, "output", "%x") == "fffffffe"


def test_assignment(core):
    assert ce_eval(core, "output = 40 + 2") == "42"
    assert core.ymem.contents[300] == 42
    ce_eval(core, "arr[0] = 77")
    assert core.ymem.contents[310] == 77
    ce_eval(core, "*msg = 65")
    assert core.ymem.contents[330] == 65


def test_arithmetic_and_logic(core):
    assert ce_eval(core, "output * 2 + 1") == "15"
    assert ce_eval(core, "(output > 5) && (output < 10)") == "1"
    assert ce_eval(core, "output == 7 || output == 8") == "1"
    assert ce_eval(core, "-output") == "-7"
    assert ce_eval(core, "!output") == "0"


def test_local_scope(core):
    # run to the body of calc so the local is framed
    core.step(3)  # LDI sp, LDI r0, PUSH r0
    assert ce_eval(core, "cnt") == "42"
    core.reset()
    with pytest.raises(ScriptError, match="not in scope"):
        ce_eval(core, "cnt")


def test_unknown_identifier(core):
    with pytest.raises(ScriptError, match="unknown symbol"):
        ce_eval(core, "nosuch")


def test_labels_not_c_variables(core):
    with pytest.raises(ScriptError, match="not a C variable"):
        ce_eval(core, "start")


def test_division_by_zero(core):
    with pytest.raises(ScriptError, match="division by zero"):
        ce_eval(core, "output / 0")


def test_parse_errors(core):
    for bad in ("", "output +", "arr[", "(output", "output = "):
        with pytest.raises(ScriptError):
            ce_eval(core, bad)


def test_ce_fxpr_agreement(core):
    # for an int16 global, ce "g" equals fxpr "*g" rendered decimal
    from luxdbg.fxpr import EvalContext, fxpr_eval

    ctx = EvalContext(core, {"p1": core})
    for v in (0, 7, 1000, 0x7FFF):
        core.ymem.contents[300] = v
        assert ce_eval(core, "output") == fxpr_eval(ctx, "*output")


def test_read_string_unterminated(core):
    core.ymem.contents[65530:65536] = [65] * 6
    with pytest.raises(ScriptError, match="unterminated"):
        read_string(core, 65530)