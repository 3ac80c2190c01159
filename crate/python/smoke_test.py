"""Smoke test for the qtgsearch extension. Run from the repository root."""

import math
import tempfile
from collections import Counter
from pathlib import Path

import qtgsearch as q

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"


def main():
    inst = q.Instance.load(str(FIX / "instances" / "qkp_small.json"))
    assert (inst.kind, inst.n, inst.d) == ("QKP", 6, 1), repr(inst)
    assert inst.greedy() == (36, "111010")
    assert inst.exact_optimum() == (36, "111010")
    assert inst.profit("111010") == 36 and inst.is_feasible("111010")
    assert q.Instance.from_json(inst.to_json()).exact_optimum() == (36, "111010")

    orlib = q.Instance.load(str(FIX / "orlib" / "mknap_tiny.txt"), format="orlib")
    assert orlib.known_optimum == 25 and orlib.exact_optimum()[0] == 25

    model = q.Model(inst)
    draws = model.sample(20000, seed=7)
    assert all(inst.is_feasible(bits) for bits, _ in draws)
    freq = Counter(bits for bits, _ in draws)
    bits, count = freq.most_common(1)[0]
    assert abs(count / 20000 - model.path_probability(bits)) < 0.02
    exact, err = model.success_mass(35)
    assert err is None and 0 < exact <= 1

    assert q.grover_success_probability(0.3, 0) == 0.3
    p = 0.01
    expect = math.sin(3 * math.asin(math.sqrt(p))) ** 2
    assert abs(q.grover_success_probability(p, 1) - expect) < 1e-12
    assert q.relative_gap(100, 140) == (0.4, False)
    assert q.numbits(8) == 4
    assert math.isclose(q.cycles_to_runtime(1000, 2.0), 2e-6)

    est = q.estimate(inst)
    assert est["qubits"] > 0, est
    trace, record = q.qmaxsearch(inst, seed=3)
    assert trace[0][0] == 0 and trace[-1][1] == record["final_profit"] == 36

    with tempfile.TemporaryDirectory() as out:
        summary = q.run_campaign(
            str(FIX / "instances"), out, classical_traces=str(FIX / "classical"), seed=1
        )
        assert summary["failures"] == 0 and summary["instances"] == 3, summary
        assert (Path(out) / "records.csv").read_text().startswith("instance,n,d,")

    print("qtgsearch smoke test passed")


if __name__ == "__main__":
    main()
