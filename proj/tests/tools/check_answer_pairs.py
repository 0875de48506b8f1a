"""Recomputes the expected verdict of every committed answer pair with SymPy.

The LaTeX here is translated by a small independent reader, not the harness
parser, so the fixture is checked against a second opinion.
"""
import json
import sys

import sympy as sp


def translate(tex):
    out, i = [], 0

    def group(j):
        # returns (content, index after the closing brace)
        assert tex[j] == "{", tex
        depth, k = 0, j
        while True:
            if tex[k] == "{":
                depth += 1
            elif tex[k] == "}":
                depth -= 1
                if depth == 0:
                    return tex[j + 1:k], k + 1
            k += 1

    while i < len(tex):
        ch = tex[i]
        if ch == "\\":
            j = i + 1
            while j < len(tex) and tex[j].isalpha():
                j += 1
            name = tex[i + 1:j]
            if name in ("frac", "dfrac", "tfrac", "binom"):
                a, j = group(j)
                b, j = group(j)
                fn = "binomial" if name == "binom" else ""
                out.append(f"{fn}(({translate(a)}),({translate(b)}))" if fn else f"(({translate(a)})/({translate(b)}))")
            elif name == "sqrt":
                if tex[j] == "[":
                    k = tex.index("]", j)
                    n = tex[j + 1:k]
                    a, j = group(k + 1)
                    out.append(f"root(({translate(a)}),{n})")
                else:
                    a, j = group(j)
                    out.append(f"sqrt({translate(a)})")
            elif name == "pi":
                out.append("pi")
            else:
                raise ValueError(f"unsupported command \\{name}")
            i = j
        elif ch == "^":
            if tex[i + 1] == "{":
                a, j = group(i + 1)
            else:
                a, j = tex[i + 1], i + 2
            out.append(f"**({translate(a)})")
            i = j
        elif ch == "{":
            a, j = group(i)
            out.append(f"({translate(a)})")
            i = j
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def value(tex):
    from sympy.parsing.sympy_parser import (implicit_multiplication_application, parse_expr, rationalize,
                                            standard_transformations)
    # Decimals are read as exact rationals, as in the harness.
    t = standard_transformations + (implicit_multiplication_application, rationalize)
    return parse_expr(translate(tex), transformations=t, local_dict={"x": sp.Symbol("x")})


def verdict(a, b):
    d = sp.simplify(value(a) - value(b))
    return "equivalent" if d == 0 else "distinct"


def main(path):
    bad = 0
    n = 0
    with open(path) as f:
        for line in f:
            if not line.strip():
                continue
            p = json.loads(line)
            n += 1
            got = verdict(p["candidate"], p["truth"])
            if got != p["expected"]:
                bad += 1
                print(f"MISMATCH {p['candidate']!r} vs {p['truth']!r}: fixture says {p['expected']}, sympy says {got}")
    print(f"{n} pairs checked, {bad} mismatches")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
