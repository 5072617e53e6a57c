from report.verify import PROJECTIVE_BOX, douglas_floor, generate_samples
from randers.projective import douglas_magnitude
from sphere.metric_spec import MetricSpec


# smallest |D| |y| seen per K; the projective check needs it above douglas_floor(spec)
K_VALUES = (1.0001, 1.01, 1.5, 2.0, 13.0, 29.0, 357.0)
SAMPLES = 50

for K in K_VALUES:
    spec = MetricSpec(K=K)
    magnitudes = [douglas_magnitude(spec, s.p, s.y) for s in generate_samples(spec, SAMPLES, seed=0, box=PROJECTIVE_BOX)]
    low = min(magnitudes)
    print(f"K = {K:<8g} min {low:.3e}  max {max(magnitudes):.3e}  {'ok' if low > douglas_floor(spec) else 'BELOW FLOOR'}")
