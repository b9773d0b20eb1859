import json
import os
import pathlib
import shutil
import socket
import subprocess
import time
import urllib.error
import urllib.request

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
FIX = ROOT / "tests" / "fixtures"
START = (51.5128603, -0.0963076)


def fixture_config(tmp_path, **extra):
    cfg = json.loads((FIX / "config.json").read_text())
    for k, v in cfg["datasets"].items():
        cfg["datasets"][k] = str(FIX / v)
    cfg["query_points"] = str(FIX / cfg["query_points"])
    cfg["database"] = str(tmp_path / "service.db")
    cfg["analysis"]["min_count"] = 5
    cfg.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


# ---- module -------------------------------------------------------------

@pytest.fixture(scope="module")
def rs():
    return pytest.importorskip("runscape")


@pytest.fixture(scope="module")
def store(rs):
    return rs.ingest(osm=str(FIX / "city.osm"), geotags=str(FIX / "geotags.jsonl"), crimes=str(FIX / "crimes.csv"))


def test_ingest_is_deterministic(rs, store, tmp_path):
    again = rs.ingest(osm=str(FIX / "city.osm"), geotags=str(FIX / "geotags.jsonl"), crimes=str(FIX / "crimes.csv"))
    assert store.to_bytes() == again.to_bytes()
    assert store.segment_count > 0 and store.geotag_count > 0
    store.save(str(tmp_path / "s.bin"))
    assert rs.load_store(str(tmp_path / "s.bin")).to_bytes() == store.to_bytes()
    with pytest.raises(rs.FormatError):
        rs.store_from_bytes(store.to_bytes() + b"x")


def test_route(rs, store):
    eng = rs.Engine(store)
    r = eng.route(*START, length_m=3000, profile="scenic")
    assert r["geojson"]["type"] == "Feature"
    coords = r["geojson"]["geometry"]["coordinates"]
    assert coords[0] == coords[-1]
    assert 2400 <= r["metrics"]["length_m"] <= 3600
    assert 0 <= r["metrics"]["mean_desirability"] <= 1
    assert eng.route(*START, length_m=3000, profile="scenic") == r


def test_route_errors(rs, store):
    eng = rs.Engine(store)
    with pytest.raises(rs.ValidationError):
        eng.route(*START, length_m=0)
    with pytest.raises(rs.NoSnapError):
        eng.route(10.0, 10.0, length_m=3000)
    with pytest.raises(rs.NoRouteError) as info:
        eng.route(*START, length_m=3000, tolerance=1e-6)
    assert info.value.closest_length_m is not None
    assert isinstance(info.value, rs.Error)
    with pytest.raises(rs.UnknownKeyError):
        rs.Engine(store, cost_mode="cheap")


def test_scores_and_batch(rs, store):
    eng = rs.Engine(store, cost_mode="paper_reciprocal")
    layer = eng.scores("urban")
    assert len(layer["features"]) == store.segment_count
    assert all(0 <= f["properties"]["desirability"] <= 1 for f in layer["features"])
    out = eng.batch(FIX / "query_points.csv", length_m=3000, min_count=5, threads=2)
    assert len(out["pairs"]["features"]) > 0
    entries = out["importance"]["tags"]
    assert entries
    imps = [e["importance"] for e in entries]
    assert imps == sorted(imps, reverse=True)


def test_service_handlers(rs, tmp_path):
    svc = rs.Service(fixture_config(tmp_path))
    status, body = svc.post_route({"lat": START[0], "lon": START[1], "length_m": 3000, "profile": "urban"})
    assert status == 200
    rid = body["route_id"]
    assert svc.get_route(rid)[1]["metrics"] == body["metrics"]
    assert svc.post_route({"lat": START[0], "lon": START[1], "length_m": 0})[0] == 400
    status, q = svc.questionnaire("pre")
    assert status == 200 and [i["id"] for i in q["items"]] == ["S1", "S2", "S3"]
    status, ers = svc.post_ers({"route_id": rid, "phase": "post", "item_s1": 4, "item_s2": 5, "item_s3": 3})
    assert status == 201
    assert svc.get_ers(ers["id"]) == (200, ers)
    assert svc.list_ers(rid)[1]["responses"] == [ers]
    assert svc.post_ers({"phase": "post", "item_s1": 6, "item_s2": 5, "item_s3": 3})[0] == 400
    assert svc.importance()[0] == 200


# ---- HTTP transport ----------------------------------------------------------

def find_cli():
    env = os.environ.get("RUNSCAPE_CLI")
    if env:
        return env
    for cand in (ROOT / "build" / "tools" / "runscape", shutil.which("runscape")):
        if cand and pathlib.Path(cand).exists():
            return str(cand)
    return None


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def call(base, method, path, body=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(base + path, data=data, method=method, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=60) as r:
            return r.status, json.loads(r.read())
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read())


@pytest.fixture(scope="module")
def server(tmp_path_factory):
    cli = find_cli()
    if cli is None:
        pytest.skip("runscape CLI not built")
    tmp = tmp_path_factory.mktemp("http")
    port = free_port()
    proc = subprocess.Popen([cli, "serve", "--config", str(fixture_config(tmp)), "--port", str(port)],
                            stdout=subprocess.DEVNULL, stderr=subprocess.PIPE)
    base = f"http://127.0.0.1:{port}"
    for _ in range(300):
        if proc.poll() is not None:
            pytest.fail("server exited: " + proc.stderr.read().decode())
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                break
        except OSError:
            time.sleep(0.1)
    else:
        proc.kill()
        pytest.fail("server did not start")
    yield base
    proc.terminate()
    proc.wait(timeout=10)


def test_http_routes(server):
    req = {"lat": START[0], "lon": START[1], "length_m": 3000, "profile": "scenic"}
    status, a = call(server, "POST", "/routes", req)
    assert status == 200
    assert call(server, "POST", "/routes", req)[1] == a
    status, got = call(server, "GET", "/routes/" + a["route_id"])
    assert status == 200 and got["geojson"] == a["geojson"]
    assert call(server, "GET", "/routes/0123456789abcdef")[0] == 404
    assert call(server, "POST", "/routes", {**req, "length_m": 0})[0] == 400
    assert call(server, "POST", "/routes", {**req, "lat": 10.0, "lon": 10.0})[0] == 422


def test_http_ers(server):
    status, q = call(server, "GET", "/ers/questionnaire?phase=post&form=long")
    assert status == 200 and len(q["items"]) == 13
    assert call(server, "GET", "/ers/questionnaire?phase=later")[0] == 400
    status, ers = call(server, "POST", "/ers", {"phase": "pre", "item_s1": 3, "item_s2": 4, "item_s3": 2})
    assert status == 201
    assert call(server, "GET", f"/ers/{ers['id']}") == (200, ers)
    assert ers in call(server, "GET", "/ers")[1]["responses"]
    assert call(server, "POST", "/ers", {"phase": "pre", "item_s1": 6, "item_s2": 4, "item_s3": 2})[0] == 400


def test_http_read_only(server):
    status, layer = call(server, "GET", "/segments/scores?profile=urban&bbox=-0.11,51.50,-0.09,51.52")
    assert status == 200 and layer["type"] == "FeatureCollection"
    assert call(server, "GET", "/segments/scores?bbox=1,2,3")[0] == 400
    status, imp = call(server, "GET", "/analysis/importance")
    assert status == 200 and imp["tags"]
