from pathlib import Path

import json

from report.verify import evaluate_sample, load_reference_samples


OUTPUT_PATH = Path("data") / "reference_samples.json"
JET_ORDER = 4

results = []
for sample in load_reference_samples():
    print("Running sample", sample.label, "K =", sample.spec.K)
    result = evaluate_sample(sample, JET_ORDER)
    for printed in result["printed"]:
        i, k = printed["entry"]
        print(f"  quot[{i},{k}] printed {printed['quot']}, computed {printed['computed_quot']!r}")
    print("  max normalized residual:", result["max_normalized"])
    results.append(result)

OUTPUT_PATH.parent.mkdir(parents=True, exist_ok=True)
with OUTPUT_PATH.open("w", encoding="utf-8") as f:
    json.dump(results, f, indent=2)
print(f"Saved: {OUTPUT_PATH}")
