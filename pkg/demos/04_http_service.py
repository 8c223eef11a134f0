"""Serve the corpus over HTTP and exercise the API end to end.

Starts the service in a background thread (same app the `cpsearch serve`
command runs), then queries it, fetches a model's source, adds a new model
incrementally, and shows the new model is immediately retrievable.

Run:  python demos/04_http_service.py
"""

import threading
import time
from pathlib import Path

import httpx
import uvicorn

from cpsearch import FallbackEmbeddingProvider, IndexConfig, load_corpus
from cpsearch.service import ServiceState, create_app

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "data" / "fixture_corpus.json"
PORT = 8731


def start_server() -> uvicorn.Server:
    state = ServiceState.build(
        corpus=load_corpus(FIXTURE),
        config=IndexConfig.parse("SC+D2"),
        embedding_provider=FallbackEmbeddingProvider(dimension=768),
    )
    config = uvicorn.Config(create_app(state), host="127.0.0.1", port=PORT, log_level="error")
    server = uvicorn.Server(config)
    threading.Thread(target=server.run, daemon=True).start()
    while not server.started:
        time.sleep(0.05)
    return server


def main() -> None:
    server = start_server()
    base = f"http://127.0.0.1:{PORT}"
    client = httpx.Client(base_url=base, timeout=10.0)

    health = client.get("/api/health").json()
    print(f"GET /api/health -> {health}")

    body = client.post(
        "/api/query", json={"text": "assign nurses to day and night shifts with rest after nights"}
    ).json()
    print(f"\nPOST /api/query ({body['config']}, {body['provider']}):")
    for r in body["results"]:
        print(f"  {r['rank']}. {r['name']} [{r['entry_id']}] (similarity: {r['score']:.4f})")

    top = body["results"][0]["entry_id"]
    model = client.get(f"/api/models/{top}").json()
    print(f"\nGET /api/models/{top} -> {len(model['source_files'])} file(s):")
    first_file = model["source_files"][0]
    print(f"  % file: {first_file['filename']}")
    for line in first_file["content"].splitlines()[:4]:
        print(f"  {line}")

    new_model = {
        "id": "car_sequencing",
        "name": "Car Sequencing",
        "source_files": [{
            "filename": "car_sequencing.mzn",
            "content": (
                "% car sequencing: order cars on an assembly line so option\n"
                "% stations are never overloaded within their sliding windows.\n"
                "solve satisfy;\n"
            ),
        }],
        "descriptions": {
            "D2": "Order cars on an assembly line so each option station's "
                  "sliding-window capacity is never exceeded."
        },
    }
    added = client.post("/api/models", json=new_model)
    print(f"\nPOST /api/models -> HTTP {added.status_code}, {added.json()}")

    requery = client.post(
        "/api/query",
        json={"text": "sequence cars on an assembly line without overloading option stations"},
    ).json()
    print("query mentioning the new model now ranks it:")
    for r in requery["results"][:3]:
        print(f"  {r['rank']}. {r['name']} [{r['entry_id']}] (similarity: {r['score']:.4f})")

    server.should_exit = True
    print("\ndone; server shut down")


if __name__ == "__main__":
    main()
