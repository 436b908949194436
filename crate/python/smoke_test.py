"""Smoke test for the pyselfsim extension module."""

import math

import pyselfsim

CANTOR = "base 3\ndim 1\nallow (0)\nallow (2)\n"


def main():
    k = pyselfsim.Kernel.from_kss(CANTOR)
    assert len(k) == 4 and k.k == 3 and k.d == 1
    assert k.matrix() == [[2, 0, 0, 0], [1, 0, 0, 0], [0, 1, 1, 0], [0, 1, 0, 1]]
    assert [row[0] for row in k.matrix_power(4)] == [16, 8, 7, 7]

    dim = k.dimension(1e-12)
    assert dim.contains(math.log(2, 3)), dim
    assert dim.rho_lower == "2" and dim.certified
    assert k.entropy().contains(math.log(2, 3))
    assert k.word_count(60) == 5 * 2**59 - 2
    assert k.cube_count(0, 60) == k.word_count(60)
    k.verify()

    g = k.ggdc()
    assert (g.num_vertices, g.num_edges) == (7, 12)
    assert g.validate() == []
    assert g.dimension().contains(math.log(2, 3))

    assert k.render_svg(3).count("<rect") == 18
    assert k.closure_violations() == []
    again = pyselfsim.Kernel.from_json(k.to_json())
    assert again.matrix() == k.matrix()

    carpet = pyselfsim.Kernel.from_builtin("sierpinski-carpet")
    assert carpet.dimension().contains(math.log(8, 3))
    assert pyselfsim.box_count("sierpinski-carpet", 1) == 9 == carpet.cube_count(0, 1)
    assert "vicsek" in pyselfsim.builtins()

    try:
        pyselfsim.Kernel.from_kss("base 3\ndim 1\nallow (3)\n")
    except pyselfsim.SpecError as e:
        assert "out of range" in str(e)
    else:
        raise AssertionError("expected SpecError")
    assert issubclass(pyselfsim.BudgetError, pyselfsim.SelfsimError)

    print("pyselfsim smoke test: ok")


if __name__ == "__main__":
    main()
