from pathlib import Path

from report.config import VerifyConfig
from report.verify import run_verify
from sphere.metric_spec import MetricSpec, format_hemisphere, format_sign


OUTPUT_FOLDER = Path("data") / "verify_reports"
K_VALUES = (1.5, 2.0, 13.0, 29.0, 31.0, 357.0)
SAMPLES = 200

failures = []
for K in K_VALUES:
    for hemisphere in (1, -1):
        for sign in (1, -1):
            spec = MetricSpec(K=K, sign=sign, hemisphere=hemisphere)
            name = f"K{K:g}-{format_hemisphere(hemisphere)}-{'plus' if sign > 0 else 'minus'}"
            out_path = OUTPUT_FOLDER / f"{name}.json"
            if out_path.exists():
                print("Skipping:", name)
                continue

            print("Running:", name, "sign", format_sign(sign))
            report = run_verify(VerifyConfig(spec=spec, samples=SAMPLES, seed=0, order=4, timing=True))
            report.to_file(out_path)
            print(f"  max normalized {report.body['max_normalized']:.3e}, evaluate {report.timing['evaluate']:.1f}s")
            if not report.passed:
                failures.append((name, report.failing_checks()))

print("Failures:", failures if failures else "none")
