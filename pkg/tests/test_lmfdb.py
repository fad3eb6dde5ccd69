import json
import threading
import time
from fractions import Fraction
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from lrlab import arith, lmfdb
from lrlab.errors import (ConsistencyError, NotSteinbergRational, OfflineMiss, PreconditionError, RemoteError,
                          SchemaDrift)

LEVELS = (11, 35, 77, 143, 187, 665, 805, 1001, 1085, 1463)
COUNTS = {11: 1, 35: 2, 77: 4, 143: 3, 187: 6, 665: 11, 805: 13, 1001: 14, 1085: 18, 1463: 9}


@pytest.fixture(scope="module")
def client():
    return lmfdb.Client(cache_dir="/nonexistent-cache", offline=True)


@pytest.fixture(scope="module")
def forms(client):
    return {N: client.fetch_newforms(N) for N in LEVELS}


def by_label(forms, label):
    N = int(label.split(".")[0])
    return next(g for g in forms[N] if g.label == label)


# ------------------------------------------------------------------ cache


def test_canonical_key_is_order_independent():
    a = lmfdb.request_key("/api/x/", {"b": 1, "a": "2"})
    b = lmfdb.request_key("/api/x/", {"a": 2, "b": "1"})
    assert a == b
    assert a != lmfdb.request_key("/api/y/", {"a": 2, "b": 1})
    assert len(a) == 64


def test_cache_round_trip(tmp_path):
    c = lmfdb.Cache(tmp_path)
    key = c.put("/api/x/", {"q": 1}, {"data": [1, 2]}, "test")
    assert key == lmfdb.request_key("/api/x/", {"q": 1})
    assert c.get(key) == {"data": [1, 2]}
    assert c.keys() == [key]
    assert not list(tmp_path.glob(".tmp-*"))


def test_cache_rejects_foreign_schema(tmp_path):
    c = lmfdb.Cache(tmp_path)
    key = c.put("/api/x/", {}, {"data": []}, "test")
    p = tmp_path / f"{key}.json"
    entry = json.loads(p.read_text())
    entry["schema"] = "something-else/2"
    p.write_text(json.dumps(entry))
    with pytest.raises(SchemaDrift):
        c.get(key)


def test_cache_concurrent_puts_keep_index(tmp_path):
    c = lmfdb.Cache(tmp_path)
    threads = [threading.Thread(target=c.put, args=("/api/x/", {"i": i}, {"data": [i]}, "t")) for i in range(20)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(c.keys()) == 20
    for i in range(20):
        assert c.get(lmfdb.request_key("/api/x/", {"i": i})) == {"data": [i]}


def test_every_fixture_parses_and_round_trips(forms):
    fx = lmfdb.Cache(lmfdb.FIXTURE_DIR)
    assert len(fx.keys()) > 50
    for N, gs in forms.items():
        assert len(gs) == COUNTS[N]
        for g in gs:
            d = g.to_dict()
            nf = {k: d[k] for k in ("label", "level", "weight", "dim", "field_poly", "traces",
                                    "atkin_lehner_eigenvals")}
            again = lmfdb.parse_newform(nf, d)
            assert again == g
            assert json.loads(json.dumps(d)) == d


# -------------------------------------------------------------- fixture data


def test_fixture_traces_match_eigenvalues(forms):
    # trace of a_p recomputed from the power-basis coordinates
    for gs in forms.values():
        for g in gs:
            for p in g.eigen_primes():
                if p > len(g.traces):
                    continue
                v = g.ap_power_basis(p)
                cp = lmfdb._charpoly_of_element(v, g.field_poly)
                assert -cp[g.dim - 1] == g.traces[p - 1]
                assert all(c.denominator == 1 for c in cp)


def test_fixture_weil_bound(forms):
    for gs in forms.values():
        for g in gs:
            if g.dim == 1:
                for p in g.eigen_primes():
                    if g.level % p:
                        assert g.rational_ap(p) ** 2 <= 4 * p


@pytest.mark.parametrize("label,form", [("11a1", "11.2.a.a"), ("35a1", "35.2.a.a")])
def test_rational_forms_match_point_counts(forms, curves, label, form):
    E, g = curves[label], by_label(forms, form)
    # at bad primes too: the U_p eigenvalue is the split/nonsplit sign
    for p in g.eigen_primes():
        assert g.rational_ap(p) == E.ap(p)


def test_newspace_dimensions(forms):
    assert sum(g.dim for g in forms[77]) == 5
    assert sorted(g.dim for g in forms[77]) == [1, 1, 1, 2]
    dims = sorted(g.dim for g in forms[1085])
    for d in (1, 3, 4, 7, 8, 11):
        assert d in dims


def test_record_validation():
    base = {"label": "x", "level": 11, "weight": 2, "dim": 1, "field_poly": [0, 1], "traces": [1, -2]}
    lmfdb.parse_newform(base, None)
    for k in base:
        bad = dict(base)
        del bad[k]
        with pytest.raises(SchemaDrift):
            lmfdb.parse_newform(bad, None)
    with pytest.raises(SchemaDrift):
        lmfdb.parse_newform(dict(base, weight=4), None)
    with pytest.raises(SchemaDrift):
        lmfdb.parse_newform(dict(base, field_poly=[1, 0, 1]), None)
    hecke = {"hecke_ring_numerators": [[1]], "hecke_ring_denominators": [1], "ap": [[-2], [-1]], "maxp": 7}
    with pytest.raises(SchemaDrift):
        lmfdb.parse_newform(base, hecke)
    with pytest.raises(SchemaDrift):
        lmfdb.parse_newform(base, {"ap": []})


# ------------------------------------------------------------------ signs


@pytest.mark.parametrize("label,p,sign", [
    ("77.2.a.a", 7, -1), ("77.2.a.b", 7, 1), ("77.2.a.a", 11, -1), ("11.2.a.a", 11, 1),
    ("35.2.a.a", 5, -1), ("35.2.a.a", 7, 1),
])
def test_sign_extract_examples(forms, label, p, sign):
    assert lmfdb.sign_extract(by_label(forms, label), p) == sign


def test_sign_extract_agrees_with_atkin_lehner(forms):
    n = 0
    for gs in forms.values():
        for g in gs:
            for p in arith.factorize(g.level):
                s = lmfdb.sign_extract(g, p)
                assert g.atkin_lehner[p] == -s
                n += 1
    assert n > 100


def test_sign_extract_all_plus_form(forms):
    plus = [g for g in forms[1001] if all(lmfdb.sign_extract(g, p) == 1 for p in (7, 11, 13))]
    assert plus


def test_sign_extract_errors(forms):
    g = by_label(forms, "77.2.a.a")
    with pytest.raises(PreconditionError):
        lmfdb.sign_extract(g, 3)
    sq = lmfdb.NewformRecord("x", 50, 2, 1, (0, 1), tuple([1, 0, 0, 0, 0]))
    with pytest.raises(NotSteinbergRational):
        lmfdb.sign_extract(sq, 5)
    odd = lmfdb.NewformRecord("y", 14, 2, 2, (-2, 0, 1), (2, 1, 0, 0, 0, 0, 0))
    with pytest.raises(NotSteinbergRational):
        lmfdb.sign_extract(odd, 2)
    bad_al = lmfdb.NewformRecord("z", 11, 2, 1, (0, 1), tuple([1] * 11), {11: 1})
    with pytest.raises(ConsistencyError):
        lmfdb.sign_extract(bad_al, 11)


# ------------------------------------------------------------ congruences


def test_congruence_examples(forms, e11):
    for label in ("77.2.a.a", "77.2.a.b"):
        c = lmfdb.congruence_audit(e11, by_label(forms, label), 19)
        assert c.overall == "certified"
        assert c.primes == [2, 3, 5, 13, 17, 19]
        assert all(c.status.values())
    c = lmfdb.congruence_audit(e11, by_label(forms, "77.2.a.c"), 19)
    assert c.overall == "failed"
    assert c.first_offending_prime is not None
    assert not c.status[c.first_offending_prime]


def test_congruence_rational_oracle(forms, curves):
    # dim 1: congruent iff a_p(g) = a_p(E) mod 2 for every admissible p
    for E in (curves["11a1"], curves["35a1"]):
        for gs in forms.values():
            for g in gs:
                if g.dim != 1:
                    continue
                c = lmfdb.congruence_audit(E, g, 97)
                want = all((g.rational_ap(p) - E.ap(p)) % 2 == 0 for p in c.primes)
                assert (c.overall == "certified") == want


def test_factor_and_ideal_methods_agree(forms, curves):
    both = 0
    for E in (curves["11a1"], curves["35a1"]):
        for gs in forms.values():
            for g in gs:
                try:
                    a = lmfdb.congruence_audit(E, g, 97, method="factor")
                except PreconditionError:
                    continue
                b = lmfdb.congruence_audit(E, g, 97, method="ideal")
                assert a.overall == b.overall, g.label
                both += 1
    assert both > 100


def test_congruence_never_only_necessary(forms, curves):
    for E in (curves["11a1"], curves["35a1"]):
        for gs in forms.values():
            for g in gs:
                assert lmfdb.congruence_audit(E, g, 97).overall in ("certified", "failed")


def test_congruence_argument_checks(forms, e11):
    g = by_label(forms, "77.2.a.a")
    with pytest.raises(PreconditionError):
        lmfdb.congruence_audit(e11, g, 19, method="magic")
    with pytest.raises(PreconditionError):
        lmfdb.congruence_audit(e11, g, 1000)


def test_certificate_serializes(forms, e11):
    d = lmfdb.congruence_audit(e11, by_label(forms, "77.2.a.a"), 19).to_dict()
    assert json.loads(json.dumps(d)) == d


# -------------------------------------------------------------- table audit


def test_table_audit_passes(client):
    rep = lmfdb.verify_table(lmfdb.load_tables(), client)
    assert rep["ok"], json.dumps(rep, indent=1)[:2000]
    t1 = rep["tables"]["level_raising_at_7"]
    assert t1["cells"] == t1["matched"] == 24
    assert rep["tables"]["all_sign_combinations"]["complete"]


def test_table_audit_detects_a_wrong_cell(client):
    tables = lmfdb.load_tables()
    tables["level_raising_at_7"]["rows"][1]["values"][0] += 2
    rep = lmfdb.verify_table(tables, client)
    assert not rep["ok"]
    assert rep["tables"]["level_raising_at_7"]["mismatches"]


def test_table_audit_detects_a_wrong_sign(client):
    tables = lmfdb.load_tables()
    row = tables["signs_11a1"]["rows"][0]
    p = next(iter(row["signs"]))
    row["signs"][p] = -row["signs"][p]
    assert not lmfdb.verify_table(tables, client)["ok"]


# ------------------------------------------------------------ client/network


def test_offline_miss(tmp_path):
    c = lmfdb.Client(cache_dir=tmp_path, offline=True)
    with pytest.raises(OfflineMiss):
        c.fetch_newforms(13)
    with pytest.raises(OfflineMiss):
        c.fetch_curve("13a1")


def test_offline_env_flag(tmp_path, monkeypatch):
    monkeypatch.setenv("LRLAB_OFFLINE", "1")
    assert lmfdb.Client(cache_dir=tmp_path).offline
    monkeypatch.setenv("LRLAB_OFFLINE", "0")
    assert not lmfdb.Client(cache_dir=tmp_path).offline


def test_fetch_curve_from_fixtures(client):
    E = client.fetch_curve("11a1")
    assert E.ainvs == (0, -1, 1, -10, -20) and E.conductor == 11


class FakeLMFDB:
    """Local HTTP server: fails the first ``failures`` requests, then answers."""

    def __init__(self, failures=0, body=None, status=500):
        self.failures = failures
        self.status = status
        self.body = body if body is not None else {"data": [{"Clabel": "11a1", "ainvs": [0, -1, 1, -10, -20],
                                                           "conductor": 11}]}
        self.hits = []
        self.active = 0
        self.max_active = 0
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                outer.active += 1
                outer.max_active = max(outer.max_active, outer.active)
                outer.hits.append((time.monotonic(), self.path))
                time.sleep(0.01)
                if len(outer.hits) <= outer.failures:
                    self.send_response(outer.status)
                    self.end_headers()
                    outer.active -= 1
                    return
                data = json.dumps(outer.body).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)
                outer.active -= 1

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}"
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


def make_client(url, tmp_path, **kw):
    kw.setdefault("min_interval", 0.0)
    kw.setdefault("backoff", 0.01)
    return lmfdb.Client(base_url=url, cache_dir=tmp_path, offline=False, fixture_dir=None, **kw)


def test_fetch_and_cache(tmp_path):
    with FakeLMFDB() as srv:
        c = make_client(srv.url, tmp_path)
        E = c.fetch_curve("11a1")
        assert E.conductor == 11
        assert c.fetch_curve("11a1").ainvs == E.ainvs
        assert len(srv.hits) == 1
        path = srv.hits[0][1]
        assert path.startswith("/api/ec_curvedata/?") and "Clabel=11a1" in path
    # now served from disk with the server gone
    c2 = lmfdb.Client(cache_dir=tmp_path, offline=True, fixture_dir=None)
    assert c2.fetch_curve("11a1").conductor == 11


def test_retry_then_success(tmp_path):
    with FakeLMFDB(failures=2) as srv:
        c = make_client(srv.url, tmp_path, retries=3, backoff=0.05)
        t0 = time.monotonic()
        assert c.fetch_curve("11a1").conductor == 11
        elapsed = time.monotonic() - t0
        assert len(srv.hits) == 3 and c.requests_made == 3
        assert elapsed >= 0.05 + 0.10 - 0.01  # backoff 0.05 * 2^attempt


def test_retries_exhausted(tmp_path):
    with FakeLMFDB(failures=10) as srv:
        c = make_client(srv.url, tmp_path, retries=3)
        with pytest.raises(RemoteError):
            c.fetch_curve("11a1")
        assert len(srv.hits) == 3
    assert not lmfdb.Cache(tmp_path).keys()


def test_bad_json_is_retried(tmp_path):
    with FakeLMFDB(failures=1, status=200) as srv:
        c = make_client(srv.url, tmp_path, retries=2)
        assert c.fetch_curve("11a1").conductor == 11


def test_rate_limit_and_serialization(tmp_path):
    with FakeLMFDB() as srv:
        c = make_client(srv.url, tmp_path, min_interval=0.1)
        threads = [threading.Thread(target=c.get, args=("/api/x/", {"i": i})) for i in range(5)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        times = sorted(t for t, _ in srv.hits)
        assert len(times) == 5
        assert srv.max_active == 1
        assert all(b - a >= 0.1 - 0.01 for a, b in zip(times, times[1:]))


def test_env_base_url(tmp_path, monkeypatch):
    with FakeLMFDB() as srv:
        monkeypatch.setenv("LRLAB_LMFDB_URL", srv.url)
        c = lmfdb.Client(cache_dir=tmp_path, offline=False, fixture_dir=None, min_interval=0)
        assert c.fetch_curve("11a1").conductor == 11


def test_conductor_mismatch_is_reported(tmp_path):
    body = {"data": [{"Clabel": "11a1", "ainvs": [0, -1, 1, -10, -20], "conductor": 13}]}
    with FakeLMFDB(body=body) as srv:
        with pytest.raises(ConsistencyError):
            make_client(srv.url, tmp_path).fetch_curve("11a1")


def test_missing_fields_are_schema_drift(tmp_path):
    with FakeLMFDB(body={"data": [{"Clabel": "11a1"}]}) as srv:
        with pytest.raises(SchemaDrift):
            make_client(srv.url, tmp_path).fetch_curve("11a1")
    with FakeLMFDB(body={"rows": []}) as srv:
        with pytest.raises(SchemaDrift):
            make_client(srv.url, tmp_path / "b").fetch_newforms(11)


def test_unknown_curve(tmp_path):
    with FakeLMFDB(body={"data": []}) as srv:
        with pytest.raises(PreconditionError):
            make_client(srv.url, tmp_path).fetch_curve("9999zz1")


def test_power_basis_of_rational_form(forms):
    g = by_label(forms, "11.2.a.a")
    assert g.ap_power_basis(2) == [Fraction(-2)]
    with pytest.raises(PreconditionError):
        by_label(forms, "77.2.a.d").rational_ap(2)
