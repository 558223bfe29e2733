"""
Text, JSON and LaTeX rendering of polynomials, forms and α_Γ.
"""
from typing import Any, Dict, List, Optional, Sequence

from sympy import latex

from .alpha import AlphaForm
from .forms import DiffForm, GenKind, Generator, ScalarPrefactor, format_word
from .poly import MPoly, poly_to_json, poly_to_text, to_fraction

ODD_LOOPS_TEXT = "0 (odd loop number)"


def _needs_parens(text: str) -> bool:
    return " " in text.lstrip("-")


def form_to_text(form: DiffForm) -> str:
    """``± coeff · da_i∧da_j`` terms in canonical word order."""
    if not form:
        return "0"
    parts = []
    for word, coeff in form.items():
        text = poly_to_text(coeff)
        sign = "+"
        if text.startswith("-") and not _needs_parens(text):
            sign, text = "-", text[1:]
        if _needs_parens(text):
            text = f"({text})"
        parts.append(f"{sign} {text} · {format_word(word)}")
    joined = " ".join(parts)
    return joined[2:] if joined.startswith("+ ") else "-" + joined[2:]


def prefactor_to_text(prefactor: ScalarPrefactor, with_pi: bool = False) -> str:
    return prefactor.render(with_pi=with_pi)


def alpha_to_text(alpha: AlphaForm, with_pi: bool = False) -> str:
    if alpha.is_zero:
        if alpha.metadata.loop_number % 2:
            return ODD_LOOPS_TEXT
        return "0"
    return f"{prefactor_to_text(alpha.prefactor, with_pi)} · [{form_to_text(alpha.body)}]"


def _half_json(doubled: int) -> Any:
    return doubled // 2 if doubled % 2 == 0 else f"{doubled}/2"


def prefactor_to_json(prefactor: ScalarPrefactor, with_pi: bool = False) -> Dict[str, Any]:
    coefficient = to_fraction(prefactor.coefficient)
    record: Dict[str, Any] = {
        "coefficient": [coefficient.numerator, coefficient.denominator],
        "psi": _half_json(prefactor.psi_half),
        "a": {f"a{e}": _half_json(x) for e, x in enumerate(prefactor.a_half, start=1) if x},
    }
    if with_pi:
        record["pi"] = _half_json(prefactor.pi_half)
    return record


def form_to_json(form: DiffForm) -> List[Dict[str, Any]]:
    return [
        {"word": [str(g) for g in word], "poly": poly_to_json(coeff), "text": poly_to_text(coeff)}
        for word, coeff in form.items()
    ]


def alpha_to_json(alpha: AlphaForm, with_pi: bool = False) -> Dict[str, Any]:
    return {
        "prefactor": prefactor_to_json(alpha.prefactor, with_pi),
        "terms": form_to_json(alpha.body),
        "variables": [str(s) for s in alpha.body.ring.symbols],
    }


def result_record(
    graph_name: str,
    alpha: AlphaForm,
    wedge_zero: Optional[bool],
    pipelines_agree: Optional[bool],
    timings: Dict[str, float],
    with_pi: bool = False,
) -> Dict[str, Any]:
    """Machine-readable per-graph record."""
    return {
        "graph": graph_name,
        "v_star": alpha.metadata.v_star,
        "L": alpha.metadata.loop_number,
        "alpha": alpha_to_json(alpha, with_pi),
        "wedge_zero": wedge_zero,
        "pipelines_agree": pipelines_agree,
        "timings": {k: round(v, 6) for k, v in timings.items()},
    }


def poly_to_latex(p: MPoly) -> str:
    if not p:
        return "0"
    return latex(p.as_expr())


def _generator_latex(gen: Generator) -> str:
    letter = "a" if gen.kind == GenKind.DA else "x"
    return rf"\mathrm{{d}}{letter}_{{{gen.index}}}"


def word_to_latex(word: Sequence[Generator]) -> str:
    return r" \wedge ".join(_generator_latex(g) for g in word) if word else "1"


def form_to_latex(form: DiffForm) -> str:
    if not form:
        return "0"
    parts = []
    for word, coeff in form.items():
        body = poly_to_latex(coeff)
        if len(coeff.terms()) > 1:
            body = rf"\left({body}\right)"
        parts.append(rf"{body}\, {word_to_latex(word)}")
    return " + ".join(parts).replace("+ -", "- ")


def _half_latex(doubled: int) -> str:
    return str(doubled // 2) if doubled % 2 == 0 else rf"{doubled}/2"


def prefactor_to_latex(prefactor: ScalarPrefactor, with_pi: bool = False) -> str:
    coefficient = to_fraction(prefactor.coefficient)
    parts = []
    if coefficient != 1:
        if coefficient.denominator == 1:
            parts.append(str(coefficient.numerator))
        else:
            sign = "-" if coefficient < 0 else ""
            parts.append(rf"{sign}\frac{{{abs(coefficient.numerator)}}}{{{coefficient.denominator}}}")
    if with_pi and prefactor.pi_half:
        parts.append(rf"\pi^{{{_half_latex(prefactor.pi_half)}}}")
    if prefactor.psi_half:
        parts.append(rf"\psi^{{{_half_latex(prefactor.psi_half)}}}")
    for edge, doubled in enumerate(prefactor.a_half, start=1):
        if doubled:
            parts.append(rf"a_{{{edge}}}^{{{_half_latex(doubled)}}}")
    return r"\,".join(parts)


def alpha_to_latex(alpha: AlphaForm, with_pi: bool = False) -> str:
    if alpha.is_zero:
        return r"0 \quad \text{(odd loop number)}" if alpha.metadata.loop_number % 2 else "0"
    prefactor = prefactor_to_latex(alpha.prefactor, with_pi)
    body = rf"\left[{form_to_latex(alpha.body)}\right]"
    return rf"{prefactor}\,{body}" if prefactor else body


def dodgson_label_latex(rows: Sequence[int], cols: Sequence[int]) -> str:
    """``\\psi^{A,B}`` with the index sets written as braced lists."""
    def braced(indices: Sequence[int]) -> str:
        return str(indices[0]) if len(indices) == 1 else "\\{" + ",".join(map(str, indices)) + "\\}"
    return rf"\psi^{{{braced(rows)},{braced(cols)}}}"
