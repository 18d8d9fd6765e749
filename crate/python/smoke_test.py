"""Smoke test for the elliptic_shooter extension module."""

import math

import elliptic_shooter as es


def main() -> None:
    cubic = es.SemilinearModel("power", lambda_=1.0, p=3.0)
    gs = es.find_ground_state(cubic, dim=3)
    assert abs(gs.d0 - 4.3373876799) < 1e-8, gs.d0
    assert abs(gs.decay_rate + 1.0) < 1e-3
    assert gs.nondegeneracy()["nondegenerate"]
    assert all(c["pass"] for c in gs.key_lemma()["checks"].values())
    prof = gs.profile()
    assert len(prof["r"]) == len(prof["u"]) > 10
    assert math.isclose(gs.u(0.0), gs.d0, rel_tol=1e-12)

    assert es.classify(cubic, gs.d0 * 1.01)["kind"] == "crosses_zero"
    assert es.classify(cubic, gs.d0 * 0.99)["kind"] == "stays_positive"

    nagumo = es.SemilinearModel("nagumo", c=0.6)
    rep = es.check_semilinear(nagumo, dim=3, per_decade=2000)
    assert rep["verdicts"]["G3"]["verdict"] == "fail"

    sol = es.solve_quasilinear(es.DiffusionModel.mnls(1.0), es.SemilinearModel("power", p=2.0), dim=2)
    assert sol.residual < 1e-8
    assert abs(sol.k_infty - 0.5) < 1e-2
    kernels = sol.mnls_kernels(mesh_n=2000)
    assert all(v["pass"] for v in kernels["verdicts"].values()), kernels["verdicts"]

    try:
        es.SemilinearModel("power")
    except ValueError:
        pass
    else:
        raise AssertionError("missing p accepted")

    print(f"smoke test ok: d0 = {gs.d0:.10f}, mNLS u0 = {sol.u0:.10f}")


if __name__ == "__main__":
    main()
