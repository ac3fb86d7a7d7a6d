"""Exercise the JSON API in process (no network needed).

The same app can be served with `forge serve`; here we drive it through
the test client to show each endpoint's envelope.
"""

import json

from fastapi.testclient import TestClient

from forge import service

state = service.build_state(seed=7, train=False)
client = TestClient(service.create_app(state))

r = client.get("/scenarios", params={"bank": "fm"}).json()
print(f"GET /scenarios -> {len(r['data']['recipes'])} recipes "
      f"(schema v{r['schema_version']})")

r = client.get("/scenarios/S04/outputs").json()
print(f"GET /scenarios/S04/outputs -> objective {r['data']['objective']:,.2f}")

r = client.get("/clusters", params={"space": "input", "t": 0.5}).json()
print(f"GET /clusters -> {max(r['data']['labels'])} cluster(s) at t=0.5")

r = client.post("/ask", json={
    "question": "What happens if CO2 price increases by 20%?",
    "bank": "fm", "stub": True,
}).json()
print("POST /ask ->", json.dumps(r["data"]["parsed"]))
print("matched:", r["data"]["matched_ids"])
print("narrative:", r["data"]["narrative"][:120], "...")
