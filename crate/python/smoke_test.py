"""Smoke test for the termlab Python extension.

Build and install first, e.g.

    pip install maturin
    cd crates/python && maturin build --release -o dist && pip install dist/termlab-*.whl

then run ``python python/smoke_test.py`` from the repository root.
"""

from pathlib import Path

import termlab

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def load(name):
    return (CORPUS / name).read_text()


def test_terms():
    t = termlab.Term.parse("f(x, g(a))", ["x"])
    assert str(t) == "f(x,g(a))", str(t)
    assert t.size == 4
    assert t.root == "f"
    assert t.args[0].is_var()
    assert t == termlab.Term.parse("f(x,g(a))", ["x"])
    assert len({t, termlab.Term.parse("f(x,g(a))", ["x"])}) == 1
    try:
        termlab.Term.parse("f(")
    except termlab.TermlabError:
        pass
    else:
        raise AssertionError("malformed term accepted")


def test_rewriting():
    beans = termlab.Trs(load("beans1.trs"))
    assert len(beans) == len(beans.rules) > 0
    result = beans.normalize("b(b(b(e)))", "li")
    assert result["outcome"] == "normal_form", result
    assert beans.step("e") is None
    primes = termlab.Trs(load("primes.trs"))
    lazy = primes.normalize("take(s(s(0)),primes)", "lo")
    assert lazy["outcome"] == "normal_form", lazy
    eager = primes.normalize("take(s(s(0)),primes)", "li", fuel=200)
    assert eager["outcome"] != "normal_form", eager


def test_annotations():
    boolean = termlab.Trs(load("bool.trs"))
    ann = load("bool.ann")
    check = boolean.check_annotation(ann)
    assert check["full"] and check["inTime"], check
    out = boolean.annotated_normalize("or(and(inf,F),or(T,inf))", ann)
    assert out["outcome"] == "normal_form" and out["term"] == "T", out


def test_analyses():
    beans2 = termlab.Trs(load("beans2.trs"))
    proof = beans2.termination("poly", "b = 4*x1 + _")
    assert proof["answer"] == "YES", proof
    primes = termlab.Trs(load("primes.trs"))
    assert primes.confluence()["verdict"] == "YES"
    cps = termlab.Trs(load("beans1.trs")).critical_pairs()
    assert isinstance(cps, list)
    shuffle = termlab.Trs(load("shuffle.trs"))
    assert shuffle.dh("rev(:(1,:(2,nil)))")["value"] == 6
    assert shuffle.rc(4)["value"] == 3
    termlab.Trs(load("beans1.trs")).dc(4)


def test_completion():
    session = termlab.CompletionSession(load("genes.trs"), "kbo")
    assert session.status == "running"
    session.apply("orient e1 lr")
    assert session.state()["historyLength"] == 1
    session.undo()
    assert session.state()["historyLength"] == 0
    try:
        session.apply("orient e99 lr")
    except termlab.TermlabError as e:
        assert "unknown-equation" in str(e)
    else:
        raise AssertionError("unknown equation accepted")
    assert session.run() == "success"
    trs = session.trs()
    assert len(trs) == 6, session.export()
    verdict = trs.validity("T(A(G(C(T(e)))))", "T(e)")
    assert verdict["valid"] is True, verdict


def main():
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok   {name}")
    print("all smoke tests passed")


if __name__ == "__main__":
    main()
