"""Command-line interface: one subcommand per computation plus a grid harness.

Every subcommand prints a report document (JSON or fixed-width text) and
exits 0 when all checks pass or are expected failures, 1 when a check fails,
and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import hecke, tangent, torext
from .groupalg import augmentation_quotient
from .groups import FiniteAbelianPGroup
from .modarith import Ring, is_prime, vp


class InvalidInput(ValueError):
    pass


# ---------------------------------------------------------------------------
# report documents


PARAM_KEYS = ("p", "m", "exponents", "rank", "trunc", "max_degree")


@dataclass
class ReportDocument:
    params: dict
    checks: list = field(default_factory=list)
    degree_ranks: list = field(default_factory=list)
    structure_constants: list = field(default_factory=list)
    timing_ms: int = 0

    def add(self, name: str, ok: bool, detail: str = "", expected_fail: bool = False):
        verdict = "pass" if ok else ("expected-fail" if expected_fail else "fail")
        self.checks.append({"name": name, "verdict": verdict, "detail": detail})

    def extend(self, other: "ReportDocument", prefix: str):
        for c in other.checks:
            self.checks.append({"name": f"{prefix}: {c['name']}", "verdict": c["verdict"], "detail": c["detail"]})

    @property
    def passed(self) -> bool:
        return all(c["verdict"] != "fail" for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "params": {k: self.params.get(k) for k in PARAM_KEYS},
            "checks": [{"name": c["name"], "verdict": c["verdict"], "detail": c["detail"]} for c in self.checks],
            "tables": {"degree_ranks": [int(x) for x in self.degree_ranks],
                       "structure_constants": [
                           {k: int(row[k]) for k in ("deg_a", "idx_a", "deg_b", "idx_b", "deg_c", "idx_c", "value")}
                           for row in self.structure_constants]},
            "timing_ms": int(self.timing_ms),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReportDocument":
        return cls(dict(d["params"]), list(d["checks"]), list(d["tables"]["degree_ranks"]),
                   list(d["tables"]["structure_constants"]), d["timing_ms"])

    def sort_key(self):
        p = self.to_dict()["params"]
        return tuple((v if not isinstance(v, list) else tuple(v)) if v is not None else -1
                     for v in (p[k] for k in PARAM_KEYS))


def _render_text(d: dict) -> str:
    lines = []
    pr = d["params"]
    lines.append("params  " + "  ".join(f"{k}={pr[k]}" for k in PARAM_KEYS))
    lines.append(f"{'check':<56} {'verdict':<14} detail")
    for c in d["checks"]:
        lines.append(f"{c['name'][:56]:<56} {c['verdict']:<14} {c['detail']}")
    lines.append("degree_ranks  " + " ".join(f"{x:>4}" for x in d["tables"]["degree_ranks"]))
    sc = d["tables"]["structure_constants"]
    if sc:
        lines.append(f"{'deg_a':>5} {'idx_a':>5} {'deg_b':>5} {'idx_b':>5} {'deg_c':>5} {'idx_c':>5} {'value':>7}")
        for row in sc:
            lines.append(" ".join(f"{row[k]:>5}" for k in ("deg_a", "idx_a", "deg_b", "idx_b", "deg_c", "idx_c"))
                         + f" {row['value']:>7}")
    lines.append(f"timing_ms {d['timing_ms']}")
    return "\n".join(lines) + "\n"


def emit_report(doc, fmt: str = "json") -> bytes:
    """Serialize one document or a list of documents."""
    docs = doc if isinstance(doc, list) else [doc]
    dicts = [x.to_dict() if isinstance(x, ReportDocument) else x for x in docs]
    if fmt == "json":
        payload = dicts if isinstance(doc, list) else dicts[0]
        return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode()
    if fmt == "text":
        return "\n".join(_render_text(d) for d in dicts).encode()
    raise ValueError(f"unknown format {fmt!r}")


def parse_report(data: bytes):
    obj = json.loads(data.decode())
    if isinstance(obj, list):
        return [ReportDocument.from_dict(o) for o in obj]
    return ReportDocument.from_dict(obj)


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class Params:
    p: int
    m: int
    exponents: tuple
    trunc: Optional[int] = None
    max_degree: int = 4

    @property
    def rank(self):
        return len(self.exponents)

    def group(self):
        return FiniteAbelianPGroup(self.p, self.exponents)

    def ring(self):
        return Ring(self.p, self.m)

    def as_dict(self):
        return {"p": self.p, "m": self.m, "exponents": list(self.exponents), "rank": self.rank,
                "trunc": self.trunc, "max_degree": self.max_degree}

    @property
    def p2_edge(self) -> bool:
        """p = 2 with some N_i <= m: the exterior ⊗ divided-power description breaks."""
        return self.p == 2 and any(n <= self.m for n in self.exponents)


def _params_from_args(a, need_group=True) -> Params:
    p = a.p
    if p is None or not is_prime(p):
        raise InvalidInput("--p must be a prime")
    m = a.m
    if m is None or m < 1:
        raise InvalidInput("--m must be >= 1")
    if getattr(a, "exponents", None):
        ex = tuple(int(x) for x in a.exponents.split(",") if x.strip())
    else:
        if getattr(a, "q", None) is not None:
            if a.q < 2:
                raise InvalidInput("--q must be at least 2")
            N = vp(a.q - 1, p)
            if N < m:
                raise InvalidInput(f"v_p(q - 1) = {N} < m = {m}: q is not 1 in Λ")
        elif getattr(a, "N", None) is not None:
            N = a.N
        else:
            raise InvalidInput("give --N, --q or --exponents")
        r = a.r if a.r is not None else 1
        ex = (N,) * r
    if a.r is not None and len(ex) != a.r:
        raise InvalidInput("--r disagrees with the number of exponents")
    if any(n < 1 for n in ex):
        raise InvalidInput("exponents must be >= 1")
    if need_group and ex and m > min(ex):
        raise InvalidInput("need m <= min N_i")
    if a.max_deg < 0:
        raise InvalidInput("--max-deg must be >= 0")
    trunc = getattr(a, "trunc", None)
    if trunc is not None and trunc < 1:
        raise InvalidInput("--trunc must be >= 1")
    return Params(p, m, ex, trunc, a.max_deg)


def _pm(value: int):
    """Split a prime power into (p, m)."""
    if value is None or value < 2:
        raise InvalidInput("--pm must be a prime power")
    for p in range(2, value + 1):
        if value % p == 0:
            m = vp(value, p)
            if p ** m != value or not is_prime(p):
                raise InvalidInput(f"{value} is not a prime power")
            return p, m
    raise InvalidInput(f"{value} is not a prime power")


# ---------------------------------------------------------------------------
# computations, one per subcommand


def run_homology(P: Params) -> ReportDocument:
    G, R = P.group(), P.ring()
    sd = min(P.max_degree, 4)
    H = torext.group_homology(G, R, P.max_degree, sd)
    doc = ReportDocument(P.as_dict(), degree_ranks=H.ranks(), structure_constants=H.structure_constants())
    doc.add("associative", H.check_associative())
    doc.add("graded commutative", H.check_graded_commutative())
    doc.add("unit", H.check_unit())
    doc.add("coassociative", H.check_coassociative())
    doc.add("cocommutative", H.check_cocommutative())
    doc.add("counit", H.check_counit())
    expect = [sum(1 for _ in torext.multi_indices(P.rank, n)) for n in range(P.max_degree + 1)]
    doc.add("ranks match Künneth count", H.ranks() == expect, f"{H.ranks()}")
    return doc


def run_cohomology(P: Params) -> ReportDocument:
    G, R = P.group(), P.ring()
    sd = min(P.max_degree, 4)
    C = torext.group_cohomology(G, R, P.max_degree, sd)
    H = torext.group_homology(G, R, P.max_degree, sd)
    doc = ReportDocument(P.as_dict(), degree_ranks=C.ranks(), structure_constants=C.structure_constants())
    doc.add("associative", C.check_associative())
    doc.add("graded commutative", C.check_graded_commutative())
    doc.add("unit", C.check_unit())
    doc.add("ranks equal homology ranks", C.ranks() == H.ranks())
    v = torext.duality_check(G, R, sd)
    doc.add("Ext product is dual to Tor coproduct", v.ok, v.detail)
    return doc


def run_bockstein(P: Params) -> ReportDocument:
    G, R = P.group(), P.ring()
    B = torext.bockstein_suite(G, R, max(P.max_degree, 4), min(3, max(P.max_degree - 1, 1)))
    doc = ReportDocument(P.as_dict(), degree_ranks=torext.group_cohomology(G, R, P.max_degree, 0).ranks())
    doc.add("β∘β = 0", B.square_zero)
    doc.add("independent of the lift", B.lift_independent)
    doc.add("derivation identity", B.derivation, B.derivation_failure)
    doc.add("image of β is the kernel of reduction to p^{2m}", B.exactness)
    doc.add("integral factorization", B.integral)
    # the index statements need a single exponent N
    if len(set(P.exponents)) == 1:
        e = P.exponents[0] - P.m
        doc.add("β(H¹) = p^(N-m)·H²_ind", B.scaled_equality,
                f"elementary divisors of the index: {[P.p ** a for a in B.index_exponents]}")
        doc.add("β(H¹) = H²_ind", B.surjective,
                "equality holds exactly when N = m" if e == 0 else
                f"index p^{min(e, P.m)} per factor since N - m = {e}", expected_fail=e > 0)
    return doc


def run_decompose2(P: Params) -> ReportDocument:
    G, R = P.group(), P.ring()
    D = torext.decompose_degree2(G, R)
    r = P.rank
    doc = ReportDocument(P.as_dict(), degree_ranks=[D.wedge_cohomology.rank, D.ind_cohomology.rank,
                                                    D.wedge_homology.rank, D.prim_homology.rank])
    doc.add("cohomology H² = ∧²H¹ ⊕ H²_ind", D.direct_sum_cohomology, expected_fail=P.p2_edge)
    doc.add("homology H_2 = ∧²H_1 ⊕ H_2,prim", D.direct_sum_homology, expected_fail=P.p2_edge)
    doc.add("rank ∧² = r(r-1)/2", D.wedge_homology.rank == r * (r - 1) // 2 == D.wedge_cohomology.rank,
            expected_fail=P.p2_edge)
    doc.add("rank H_2,prim = r", D.prim_homology.rank == r == D.ind_cohomology.rank,
            f"prim {D.prim_homology.rank}, ind {D.ind_cohomology.rank}", expected_fail=P.p2_edge)
    return doc


def run_model_compare(P: Params) -> ReportDocument:
    G, R = P.group(), P.ring()
    sd = min(P.max_degree, 4)
    v = torext.compare_to_model(G, R, P.max_degree, sd)
    H = torext.group_homology(G, R, P.max_degree, sd)
    M = torext.ExteriorDividedModel(P.rank, R, P.max_degree)
    doc = ReportDocument(P.as_dict(), degree_ranks=H.ranks())
    doc.add("ranks match the model", H.ranks() == M.ranks(), f"{H.ranks()}")
    doc.add("graded algebra and coalgebra match the model", v.ok, v.detail, expected_fail=P.p2_edge)
    return doc


def run_spectral_hecke(P: Params) -> ReportDocument:
    D = P.trunc or 2
    SH = hecke.spectral_hecke_homotopy(P.p, P.exponents, P.m, P.rank, D, P.max_degree, min(P.max_degree, 4))
    models = hecke.framed_ring_models(P.p, P.exponents, P.m, P.rank, D)
    doc = ReportDocument(P.as_dict(), degree_ranks=SH.lambda_ranks())
    structural = {"route products", "route coproducts"}
    for name, ok, detail in SH.verdicts:
        doc.add(name, ok, detail, expected_fail=P.p2_edge and name in structural)
    from math import comb
    expect = comb(D - 1 + P.rank, P.rank) * P.p ** sum(P.exponents)
    doc.add("Λ-rank of S", models.unramified.rank * models.tame.rank == expect,
            f"{models.unramified.rank} x {models.tame.rank}")
    doc.add("presentation bridge", models.bridge_ok)
    # the homotopy is free over the base, so Tor over the base vanishes
    base = models.unramified
    tot = sum(SH.ranks[: min(len(SH.ranks), 3)])
    A = hecke.FiniteRModule.free(base, tot)
    v = hecke.flat_degeneration_check(A, A, 2, expected_tensor_order=_free_order(base, tot * tot))
    doc.add("flat degeneration", v.ok, v.detail)
    return doc


def _free_order(base, n):
    """Order of the free base-module of rank n."""
    return base.ring.mod ** (base.rank * n)


def run_torus_dha(P: Params, datum_name: Optional[str]) -> ReportDocument:
    G, R = P.group(), P.ring()
    sd = min(P.max_degree, 4)
    Hc = torext.group_cohomology(G, R, sd, sd)
    doc = ReportDocument(P.as_dict(), degree_ranks=Hc.ranks(), structure_constants=Hc.structure_constants())
    r = P.rank
    zero = (0,) * r
    one = hecke.TorusHeckeElement.delta(Hc, zero)
    lams = [zero] + [tuple(1 if j == i else 0 for j in range(r)) for i in range(r)] + \
           [tuple(-1 if j == i else 0 for j in range(r)) for i in range(r)]
    elems = []
    for lam in lams:
        for n in range(min(sd, 2) + 1):
            for a in range(Hc.rank(n)):
                elems.append(hecke.TorusHeckeElement.delta(Hc, lam, n, np.eye(Hc.rank(n), dtype=np.int64)[a]))
    doc.add("unit is two-sided", all(one * f == f and f * one == f for f in elems))
    deg0 = all(hecke.torus_convolve(hecke.TorusHeckeElement.delta(Hc, a), hecke.TorusHeckeElement.delta(Hc, b))
               == hecke.TorusHeckeElement.delta(Hc, tuple(x + y for x, y in zip(a, b)))
               for a in lams for b in lams)
    doc.add("degree 0 is the group algebra of X_*", deg0)
    if r >= 2 and Hc.rank(1) >= 2:
        x1 = hecke.TorusHeckeElement.delta(Hc, lams[1], 1, [1] + [0] * (Hc.rank(1) - 1))
        x2 = hecke.TorusHeckeElement.delta(Hc, lams[2], 1, [0, 1] + [0] * (Hc.rank(1) - 2))
        doc.add("degree-1 classes anticommute", x1 * x2 == -(x2 * x1))
    assoc = all((a * b) * c == a * (b * c) for a in elems[:8] for b in elems[:8] for c in elems[:8])
    doc.add("convolution is associative", assoc)
    if datum_name:
        datum = hecke.root_datum(datum_name)
        if datum.rank != r:
            raise InvalidInput("root datum rank differs from r")
        sup, K = hecke.weyl_invariants(datum, G, R, 0, 1)
        doc.add("W-invariants in degree 0 computed", K.shape[1] > 0, f"{K.shape[1]} generators on {len(sup)} points")
    return doc


def _character(datum_name, pm, u):
    datum = hecke.root_datum(datum_name)
    p, m = _pm(pm)
    us = tuple(int(x) for x in str(u).split(","))
    R = Ring(p, m)
    try:
        chi = hecke.StrongRegularCharacter(datum, R, us)
    except ValueError as e:
        raise InvalidInput(str(e))
    return datum, R, chi


def _small_params(p, m, r, trunc, max_degree=0):
    return {"p": p, "m": m, "exponents": [], "rank": r, "trunc": trunc, "max_degree": max_degree}


def run_localize(datum_name, pm, u, k) -> ReportDocument:
    datum, R, chi = _character(datum_name, pm, u)
    doc = ReportDocument(_small_params(R.p, R.m, datum.rank, k))
    try:
        loc = hecke.localize_at_character(chi, k)
    except hecke.NotRegular as e:
        doc.add("character is strongly regular", False, str(e))
        return doc
    doc.add("character is strongly regular", True)
    ok = True
    import itertools
    for lam in itertools.product(range(-3, 4), repeat=datum.rank):
        v = loc({lam: 1})
        if loc.target.augmentation(v) != chi(lam):
            ok = False
    doc.add("augmentation after completion equals χ", ok)
    doc.degree_ranks = [len(hecke.multi_indices(datum.rank, n)) for n in range(k)]
    return doc


def run_satake(datum_name, pm, u, k) -> ReportDocument:
    datum, R, chi = _character(datum_name, pm, u)
    doc = ReportDocument(_small_params(R.p, R.m, datum.rank, k))
    v = hecke.satake_split_check(datum, chi, k)
    doc.add(f"completion of the invariant ring is an isomorphism mod degree {k} (u={u})", v.ok, v.detail)
    return doc


def run_derived_satake(P: Params, datum_name, u) -> ReportDocument:
    datum = hecke.root_datum(datum_name)
    if datum.rank != P.rank:
        raise InvalidInput("root datum rank differs from r")
    R = P.ring()
    us = tuple(int(x) for x in str(u).split(","))
    try:
        chi = hecke.StrongRegularCharacter(datum, R, us)
    except ValueError as e:
        raise InvalidInput(str(e))
    doc = ReportDocument(P.as_dict())
    if not chi.is_strongly_regular():
        doc.add("character is strongly regular", False, str(chi.regularity_witness()))
        return doc
    res = hecke.derived_satake_graded(P.p, P.exponents, P.m, P.rank, datum, chi, P.trunc or 2,
                                      min(P.max_degree, 2))
    doc.degree_ranks = res.ranks
    doc.structure_constants = [dict(row, value=row["right"]) for row in res.table]
    doc.add("graded comparison of structure constants", res.verdict.ok, res.verdict.detail)
    doc.add("no sign twist", not res.sign_twists, f"{sorted(res.sign_twists)}")
    return doc


def run_hurewicz(P: Params) -> ReportDocument:
    G, R = P.group(), P.ring()
    doc = ReportDocument(P.as_dict())
    v = tangent.hurewicz_iso_check(G, R)
    doc.add("Gram matrices invertible; i = 1 is the identity", v.ok, v.detail, expected_fail=P.p2_edge)
    aq = augmentation_quotient(G, R)
    doc.add("I/I² -> T_q ⊗ Λ is an isomorphism", aq.is_iso, aq.reason)
    doc.degree_ranks = [tangent.aq_cohomology_free_model(P.rank, R, i).rank for i in (1, 2)]
    return doc


def run_tangent(P: Params) -> ReportDocument:
    G, R = P.group(), P.ring()
    T = tangent.fib_tangent_table(G, R)
    doc = ReportDocument(P.as_dict(), degree_ranks=[T.t0.rank, T.t1.rank, T.t2.rank])
    for name, ok in T.checks:
        doc.add(name, ok, expected_fail=P.p2_edge and "prim" in name)
    doc.add("long exact sequence is exact", T.les_exact)
    return doc


# ---------------------------------------------------------------------------
# grid


GRIDS = {
    "default": dict(primes=(3, 5), Ns=(1, 2, 3), ranks=(1, 2), Ds=(2, 3), moduli=(9, 25)),
    "p2": dict(primes=(2,), Ns=(1, 2), ranks=(1, 2), Ds=(2,), moduli=()),
    "small": dict(primes=(3,), Ns=(1, 2), ranks=(1, 2), Ds=(2,), moduli=(25,)),
}

GROUP_STEPS = [("homology", run_homology), ("cohomology", run_cohomology), ("bockstein", run_bockstein),
               ("decompose2", run_decompose2), ("model-compare", run_model_compare),
               ("hurewicz", run_hurewicz), ("tangent-table", run_tangent)]


def grid_point(p, N, m, r, D, max_deg=6) -> dict:
    P = Params(p, m, (N,) * r, D, max_deg)
    doc = ReportDocument(P.as_dict())
    for name, fn in GROUP_STEPS:
        sub = fn(P)
        doc.extend(sub, name)
        if name == "homology":
            doc.degree_ranks = sub.degree_ranks
            doc.structure_constants = sub.structure_constants
    doc.extend(run_spectral_hecke(P), "spectral-hecke")
    return doc.to_dict()


def satake_point(pm, k=4) -> dict:
    p, m = _pm(pm)
    R = Ring(p, m)
    doc = ReportDocument(_small_params(p, m, 1, k))
    for u in R.units():
        datum, _, chi = _character("A1", pm, u)
        regular = chi.is_strongly_regular()
        v = hecke.satake_split_check(datum, chi, k)
        doc.add(f"satake-check u={u}: split iff regular", v.data["invertible"] == regular,
                f"{'regular' if regular else 'not regular'}; {v.detail}")
    return doc.to_dict()


def derived_satake_point(p, m, datum_name, u, D=2) -> dict:
    datum = hecke.root_datum(datum_name)
    P = Params(p, m, (m,) * datum.rank, D, 2)
    doc = run_derived_satake(P, datum_name, u)
    out = ReportDocument(P.as_dict())
    out.extend(doc, f"derived-satake {datum_name} u={u}")
    out.degree_ranks = doc.degree_ranks
    out.structure_constants = doc.structure_constants
    return out.to_dict()


def grid_tasks(name: str):
    g = GRIDS[name]
    tasks = []
    for p in g["primes"]:
        for N in g["Ns"]:
            for m in range(1, N + 1):
                for r in g["ranks"]:
                    for D in g["Ds"]:
                        tasks.append((grid_point, (p, N, m, r, D)))
    for pm in g["moduli"]:
        tasks.append((satake_point, (pm,)))
    if name in ("default", "small"):
        tasks.append((derived_satake_point, (5, 1, "A1", "2")))
        tasks.append((derived_satake_point, (5, 1, "A1xA1", "2,3")))
        tasks.append((derived_satake_point, (3, 1, "GL2", "1,2")))
    return tasks


def _call(task):
    fn, args = task
    return fn(*args)


def verify_all(grid: str, jobs: int = 1) -> list:
    tasks = grid_tasks(grid)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_call, tasks))
    else:
        results = [_call(t) for t in tasks]
    docs = [ReportDocument.from_dict(d) for d in results]
    docs.sort(key=lambda d: (d.sort_key(), [c["name"] for c in d.checks]))
    return docs


# ---------------------------------------------------------------------------
# argument parsing


def _add_group_flags(sp, trunc=False):
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--N", type=int)
    sp.add_argument("--q", type=int)
    sp.add_argument("--exponents", type=str)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--r", type=int)
    sp.add_argument("--max-deg", dest="max_deg", type=int, default=4)
    if trunc:
        sp.add_argument("--trunc", "--D", dest="trunc", type=int, default=2)


def _add_common(sp):
    sp.add_argument("--format", choices=("json", "text"), default="json")
    sp.add_argument("--timing", action="store_true", help="record wall-clock time in timing_ms")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spectral-hecke", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("homology", "cohomology", "bockstein", "decompose2", "model-compare", "hurewicz",
                 "tangent-table"):
        sp = sub.add_parser(name)
        _add_group_flags(sp)
        _add_common(sp)
    sp = sub.add_parser("spectral-hecke")
    _add_group_flags(sp, trunc=True)
    _add_common(sp)
    sp = sub.add_parser("torus-dha")
    _add_group_flags(sp)
    sp.add_argument("--type", dest="datum", choices=("A1", "A1xA1", "GL2"))
    _add_common(sp)
    for name in ("localize", "satake-check"):
        sp = sub.add_parser(name)
        sp.add_argument("--type", dest="datum", choices=("A1", "A1xA1", "GL2"), default="A1")
        sp.add_argument("--pm", type=int, required=True, help="the modulus p^m")
        sp.add_argument("--u", type=str, required=True, help="unit values, comma separated")
        sp.add_argument("--k", type=int, default=4, help="truncation order")
        _add_common(sp)
    sp = sub.add_parser("derived-satake")
    _add_group_flags(sp, trunc=True)
    sp.add_argument("--type", dest="datum", choices=("A1", "A1xA1", "GL2"), default="A1")
    sp.add_argument("--u", type=str, required=True)
    _add_common(sp)
    sp = sub.add_parser("verify-all")
    sp.add_argument("--grid", choices=tuple(GRIDS), default="default")
    sp.add_argument("--jobs", type=int, default=1)
    _add_common(sp)
    return ap


def _dispatch(a):
    c = a.command
    if c == "verify-all":
        if a.jobs < 1:
            raise InvalidInput("--jobs must be >= 1")
        return verify_all(a.grid, a.jobs)
    if c in ("localize", "satake-check"):
        if a.k < 1:
            raise InvalidInput("--k must be >= 1")
        return (run_localize if c == "localize" else run_satake)(a.datum, a.pm, a.u, a.k)
    P = _params_from_args(a)
    if c == "torus-dha":
        return run_torus_dha(P, a.datum)
    if c == "derived-satake":
        return run_derived_satake(P, a.datum, a.u)
    table = {"homology": run_homology, "cohomology": run_cohomology, "bockstein": run_bockstein,
             "decompose2": run_decompose2, "model-compare": run_model_compare,
             "hurewicz": run_hurewicz, "tangent-table": run_tangent, "spectral-hecke": run_spectral_hecke}
    return table[c](P)


def run_subcommand(argv, out=None) -> int:
    out = out if out is not None else sys.stdout.buffer
    a = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        result = _dispatch(a)
    except (InvalidInput, hecke.NotRegular) as e:
        sys.stderr.write(f"invalid input: {e}\n")
        return 2
    except ValueError as e:
        sys.stderr.write(f"invalid input: {e}\n")
        return 2
    elapsed = int(round((time.perf_counter() - t0) * 1000)) if a.timing else 0
    docs = result if isinstance(result, list) else [result]
    for d in docs:
        d.timing_ms = elapsed
    out.write(emit_report(result, a.format))
    out.flush()
    return 0 if all(d.passed for d in docs) else 1


def main(argv=None) -> int:
    return run_subcommand(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
