#!/usr/bin/env python3
"""Record real server responses into tests/fixtures/recorded.json.

The UI test suite replays these through a fetch stub, so every value the
components render is a response the actual service produced. Re-run after
wire format changes: python3 tools/record_fixtures.py
"""
import json
import pathlib
import sys

from fastapi.testclient import TestClient

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[2] / "src"))

from relwb import corpus  # noqa: E402
from relwb.instance import to_json  # noqa: E402
from relwb.service.server import create_app  # noqa: E402
from relwb.typecheck import analyze  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "recorded.json"

LTS_CORRECT = corpus.LTS_MODEL
LTS_FAULTY = LTS_CORRECT.replace("run inv3 for 3", "run inv3Faulty for 3")
QUEUE = corpus.QUEUE_MODEL

entries = []


def record(client, method, path, body=None):
    if method == "GET":
        res = client.get(path)
    elif method == "DELETE":
        res = client.delete(path)
    else:
        res = client.post(path, json=body) if body is not None else client.post(path)
    entries.append(
        {
            "method": method,
            "path": path,
            "status": res.status_code,
            "body": res.json(),
        }
    )
    return res.json()


def main():
    meta = {}
    with TestClient(create_app()) as client:
        # -- differential + focus scenario on the state-machine model ----
        opened = record(
            client,
            "POST",
            "/sessions",
            {
                "text": LTS_FAULTY,
                "scope": {"default": 2, "perSig": {"Event": 1}},
                "debounceMs": 20,
            },
        )
        sid = opened["id"]
        record(client, "POST", f"/sessions/{sid}/wait?timeout=30")
        for key in ("stayedValid", "becameValid", "stayedInvalid", "becameInvalid"):
            record(client, "GET", f"/sessions/{sid}/categories/{key}")
        record(client, "GET", f"/sessions/{sid}/focus")

        record(client, "POST", f"/sessions/{sid}/edit", {"text": LTS_CORRECT})
        client.post(f"/sessions/{sid}/wait?timeout=30")  # settle, not replayed
        for key in ("stayedValid", "becameValid", "stayedInvalid", "becameInvalid"):
            record(client, "GET", f"/sessions/{sid}/categories/{key}")
        record(client, "GET", f"/sessions/{sid}/focus")

        tm, _ = analyze(LTS_CORRECT)
        fault = corpus.lts_fault_instance(tm, states=2, events=1)
        fault_wire = to_json(tm, fault)
        record(
            client,
            "POST",
            f"/sessions/{sid}/focus",
            {"instance": fault_wire, "expected": "valid"},
        )
        record(client, "DELETE", f"/sessions/{sid}/focus/0")
        record(
            client,
            "POST",
            f"/sessions/{sid}/focus",
            {"instance": fault_wire, "expected": "invalid"},
        )
        record(client, "POST", f"/sessions/{sid}/categories/stayedValid/advance")
        meta["lts"] = {
            "faulty": LTS_FAULTY,
            "correct": LTS_CORRECT,
            "faultInstance": fault_wire,
            "sessionId": sid,
        }

        # -- completion scenario on the queue model ----------------------
        opened = record(
            client,
            "POST",
            "/sessions",
            {"text": QUEUE, "scope": {"default": 2}, "debounceMs": 20},
        )
        qid = opened["id"]
        record(client, "POST", f"/sessions/{qid}/wait?timeout=30")
        for key in ("stayedValid", "becameValid", "stayedInvalid", "becameInvalid"):
            record(client, "GET", f"/sessions/{qid}/categories/{key}")
        record(client, "GET", f"/sessions/{qid}/focus")

        broken = QUEUE + "pred probe { some Queue.head. }\n"
        offset = broken.rindex("Queue.head.") + len("Queue.head.")
        record(client, "POST", f"/sessions/{qid}/edit", {"text": broken})
        record(client, "GET", f"/sessions/{qid}/suggestions?offset={offset}")

        selected = broken[:offset] + "link" + broken[offset:]
        offset2 = offset + len("link")
        record(client, "POST", f"/sessions/{qid}/edit", {"text": selected})
        record(client, "GET", f"/sessions/{qid}/suggestions?offset={offset2}")
        meta["queue"] = {
            "model": QUEUE,
            "broken": broken,
            "offset": offset,
            "selected": selected,
            "offset2": offset2,
            "sessionId": qid,
        }

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"meta": meta, "entries": entries}, indent=2))
    print(f"recorded {len(entries)} exchanges -> {OUT}")


if __name__ == "__main__":
    main()
