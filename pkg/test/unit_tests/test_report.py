import json
import os
import textwrap
import unittest
from pathlib import Path
from tempfile import TemporaryDirectory
from unittest import mock

import jsonschema

from report.config import DEFAULT_JET_ORDER, JET_ORDER_ENV, ConfigError, VerifyConfig, default_jet_order
from report.schema import SCHEMA_VERSION, schemas, validate_report
from report.verify import (
    FLAT_VERDICT,
    NOT_FLAT_VERDICT,
    RIEMANNIAN_FLAG,
    VerifyReport,
    douglas_floor,
    evaluate_samples,
    generate_samples,
    load_reference_samples,
    run_geodesic,
    run_projective,
    run_verify,
    run_ys_criteria,
)
from sphere.metric_spec import MetricSpec

TEST_SPEC = MetricSpec(K=29.0)
TEST_CONFIG_TEXT = textwrap.dedent(
    """
    K = 13
    sign = -
    samples = 3
    seed = 5
    tol = 1e-9
    """
)


def _small_config(**overrides):
    return VerifyConfig(spec=TEST_SPEC, samples=3, seed=1, order=4).with_overrides(**overrides)


class TestVerifyConfig(unittest.TestCase):
    def test_defaults(self):
        with mock.patch.dict(os.environ, {}, clear=True):
            cfg = VerifyConfig(spec=TEST_SPEC)
        self.assertEqual(cfg.samples, 20)
        self.assertEqual(cfg.seed, 0)
        self.assertEqual(cfg.order, DEFAULT_JET_ORDER)
        self.assertEqual(cfg.tol, 1e-8)
        self.assertEqual(cfg.quot_tol, 1e-9)

    def test_jet_order_environment(self):
        with mock.patch.dict(os.environ, {JET_ORDER_ENV: "5"}):
            self.assertEqual(default_jet_order(), 5)
            self.assertEqual(VerifyConfig(spec=TEST_SPEC).order, 5)
        with mock.patch.dict(os.environ, {JET_ORDER_ENV: "six"}):
            with self.assertRaises(ConfigError):
                default_jet_order()
        with mock.patch.dict(os.environ, {JET_ORDER_ENV: "0"}):
            with self.assertRaises(ConfigError):
                default_jet_order()

    def test_validation(self):
        with self.assertRaises(ConfigError):
            VerifyConfig(spec=TEST_SPEC, samples=0)
        VerifyConfig(spec=TEST_SPEC, samples=0, reference_samples=True)
        with self.assertRaises(ConfigError):
            VerifyConfig(spec=TEST_SPEC, tol=0.0)
        with self.assertRaises(ConfigError):
            VerifyConfig(spec=TEST_SPEC, output_format="xml")
        with self.assertRaises(ConfigError):
            VerifyConfig(spec=TEST_SPEC, workers=0)

    def test_overrides_skip_unset_values(self):
        cfg = _small_config(seed=None, samples=7)
        self.assertEqual(cfg.seed, 1)
        self.assertEqual(cfg.samples, 7)

    def test_config_text(self):
        cfg = VerifyConfig.from_config_text(TEST_CONFIG_TEXT)
        self.assertEqual(cfg.spec, MetricSpec(K=13.0, sign=-1))
        self.assertEqual((cfg.samples, cfg.seed, cfg.tol), (3, 5, 1e-9))
        with self.assertRaises(ConfigError):
            VerifyConfig.from_config_text("K=2\ncolour=blue\n")
        with self.assertRaises(ConfigError):
            VerifyConfig.from_config_text("K=2\nsamples=many\n")

    def test_from_file(self):
        with TemporaryDirectory() as folder:
            path = Path(folder) / "verify.cfg"
            path.write_text(TEST_CONFIG_TEXT, encoding="utf-8")
            self.assertEqual(VerifyConfig.from_file(path).seed, 5)
            with self.assertRaises(ConfigError):
                VerifyConfig.from_file(Path(folder) / "missing.cfg")


class TestSchema(unittest.TestCase):
    def test_registry(self):
        self.assertEqual(sorted(schemas), ["geodesic", "projective", "verify", "ys-criteria"])

    def test_unknown_command(self):
        with self.assertRaises(ValueError):
            validate_report({"command": "nosuch"})

    def test_rejects_bad_report(self):
        report = run_ys_criteria(2.0).to_dict()
        report["checks"]["killing"] = "yes"
        with self.assertRaises(jsonschema.ValidationError):
            validate_report(report)
        report = run_ys_criteria(2.0).to_dict()
        report["schema_version"] = SCHEMA_VERSION + 1
        with self.assertRaises(jsonschema.ValidationError):
            validate_report(report)


class TestSamples(unittest.TestCase):
    def test_reference_samples(self):
        samples = load_reference_samples()
        self.assertEqual([s.label for s in samples], list("ABCDEFG"))
        D = samples[3]
        self.assertEqual(D.spec.K, 2.0)
        self.assertEqual(D.y[2], 1.0 / 137.0)
        self.assertEqual(samples[-1].printed[0]["entry"], [3, 2])

    def test_generation_is_seeded(self):
        first = generate_samples(TEST_SPEC, 4, seed=9)
        second = generate_samples(TEST_SPEC, 4, seed=9)
        self.assertEqual([s.p for s in first], [s.p for s in second])
        self.assertNotEqual(first[0].p, generate_samples(TEST_SPEC, 1, seed=10)[0].p)
        for sample in first:
            self.assertTrue(all(abs(t) <= 2.0 for t in sample.p))

    def test_workers_keep_order(self):
        samples = generate_samples(TEST_SPEC, 3, seed=2)
        serial = evaluate_samples(samples, 4, workers=1)
        parallel = evaluate_samples(samples, 4, workers=2)
        self.assertEqual(serial, parallel)


class TestRunners(unittest.TestCase):
    def test_verify_passes(self):
        report = run_verify(_small_config())
        self.assertTrue(report.passed, msg=report.failing_checks())
        self.assertEqual(set(report.checks), {"normalized_residual", "quot", "flag_curvature"})
        self.assertEqual(len(report.body["samples"]), 3)
        self.assertLess(report.body["max_normalized"], 1e-8)

    def test_verify_is_deterministic(self):
        first = run_verify(_small_config()).to_dict()
        second = run_verify(_small_config()).to_dict()
        self.assertEqual(first, second)

    def test_verify_with_reference_and_explicit_samples(self):
        cfg = _small_config(samples=1, reference_samples=True, explicit_samples=(((0.1, 0.2, 0.3), (1.0, -1.0, 0.5)),))
        report = run_verify(cfg)
        labels = [s["label"] for s in report.body["samples"]]
        self.assertEqual(labels, ["explicit-0", "A", "B", "C", "D", "E", "F", "G", "random-0"])
        self.assertTrue(report.passed, msg=report.failing_checks())
        for sample in report.body["samples"]:
            for printed in sample.get("printed", []):
                self.assertIsNotNone(printed["computed_quot"])

    def test_verify_rejects_zero_tangent(self):
        with self.assertRaises(ConfigError):
            run_verify(_small_config(explicit_samples=(((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),)))

    def test_verify_detects_perturbed_drift(self):
        cfg = _small_config(spec=MetricSpec(K=4.0).with_drift_scale(0.9))
        report = run_verify(cfg)
        self.assertFalse(report.passed)
        self.assertIn("normalized_residual", report.failing_checks())

    def test_ys_criteria(self):
        report = run_ys_criteria(29.0)
        self.assertTrue(report.passed)
        self.assertFalse(report.body["riemannian"])
        broken = run_ys_criteria(29.0, lambda_override=1.0)
        self.assertEqual(broken.failing_checks(), ["curvature"])
        with self.assertLogs("report.verify", level="WARNING"):
            flat = run_ys_criteria(1.0)
        self.assertIn(RIEMANNIAN_FLAG, flat.to_text())

    def test_projective(self):
        report = run_projective(MetricSpec(K=2.0), samples=2, seed=0)
        self.assertTrue(report.passed, msg=report.failing_checks())
        self.assertEqual(report.body["verdict"], NOT_FLAT_VERDICT)
        round_sphere = run_projective(MetricSpec(K=1.0), samples=2, seed=0)
        self.assertTrue(round_sphere.passed)
        self.assertEqual(round_sphere.body["verdict"], FLAT_VERDICT)
        self.assertIn("douglas_vanishes", round_sphere.checks)

    def test_projective_riemannian_berger(self):
        spec = MetricSpec(K=4.0, drift_scale=0.0)
        report = run_projective(spec, samples=2, seed=0)
        self.assertNotIn("douglas_nonzero", report.checks)
        self.assertTrue(report.checks["douglas_vanishes"])
        self.assertFalse(report.checks["weyl_vanishes"])
        self.assertEqual(report.body["verdict"], NOT_FLAT_VERDICT)
        with self.assertRaises(ValueError):
            douglas_floor(spec)
        self.assertAlmostEqual(douglas_floor(MetricSpec(K=4.0, drift_scale=1e-2)), 1e-3 * 1.7320508075688772e-2)

    def test_geodesic(self):
        with TemporaryDirectory() as folder:
            path = Path(folder) / "trajectory.csv"
            report = run_geodesic(MetricSpec(K=4.0), (0.0, 0.0, 0.0), (0.2, 0.3, -0.1), 0.5, 1e-2, trajectory_path=path)
            self.assertTrue(path.is_file())
            self.assertEqual(report.render("csv"), path.read_text(encoding="utf-8"))
        self.assertTrue(report.passed)
        self.assertEqual(report.body["steps"], 50)
        self.assertEqual(report.body["status"], "completed")


class TestVerifyReport(unittest.TestCase):
    def test_json_round_trip(self):
        report = run_ys_criteria(13.0, sign=-1)
        loaded = VerifyReport.from_json(report.to_json())
        self.assertEqual(loaded.to_dict(), report.to_dict())
        self.assertEqual(VerifyReport.from_json(json.loads(report.to_json())).checks, report.checks)

    def test_file_round_trip(self):
        report = run_verify(_small_config(timing=True))
        self.assertIn("evaluate", report.timing)
        with TemporaryDirectory() as folder:
            path = Path(folder) / "nested" / "report.json"
            report.to_file(path)
            loaded = VerifyReport.from_json(path)
        self.assertEqual(loaded.to_dict(), report.to_dict())

    def test_from_json_errors(self):
        data = run_ys_criteria(2.0).to_dict()
        data["schema_version"] = 99
        with self.assertRaises(ValueError):
            VerifyReport.from_json(data)
        with self.assertRaises(TypeError):
            VerifyReport.from_json(42)

    def test_text_and_csv(self):
        report = run_ys_criteria(29.0, lambda_override=1.0)
        text = report.to_text()
        self.assertIn("FAIL curvature", text)
        self.assertIn("PASS killing", text)
        self.assertTrue(text.rstrip().endswith("verdict: fail (curvature)"))
        self.assertTrue(report.to_csv().startswith("criterion,residual,passed\n"))
        with self.assertRaises(ConfigError):
            VerifyReport(command="ys-criteria", config={}, checks={}).to_csv()
        with self.assertRaises(ConfigError):
            report.render("xml")


if __name__ == "__main__":
    unittest.main()
